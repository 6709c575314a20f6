"""Monte Carlo Pauli-frame simulation of the encoded repeater chain.

Per trial, each intermediate station measures one block in X (phase
errors, rate ``q_p``) and one in Z (bit flips, rate ``q_b``) and decodes
both classically. A wrong decoded bit corrupts the announced Pauli frame.
The outermost stations add one X and one Z decode for the recovery of the
final encoded pair, and the far end one more decode per basis for the key
readout.

Bookkeeping of a block counts as a logical error when the decoded bit is
wrong, when the syndrome is beyond the decoder, or (by default) when more
than ``t`` errors hit the block, which is how the binomial tail model
scores it.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .codes import CssCodeSpec, UnsupportedDecoderError, decode_many

# stream labels
_INTERMEDIATE, _END = 0, 1
_X, _Z = 0, 1


@dataclass(frozen=True)
class ChainConfig:
    code: CssCodeSpec
    L: int
    q_b: float
    q_p: float
    trials: int
    master_seed: int = 0
    # None: use single-species mode exactly when the code only corrects one species
    single_species: bool | None = None
    beyond_distance_is_error: bool = True
    chunk: int = 1 << 15

    def __post_init__(self):
        if self.L < 3:
            raise ValueError("the chain needs at least one intermediate station (L >= 3)")
        for name in ("q_b", "q_p"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if self.trials <= 0:
            raise ValueError("trials must be positive")
        if self.chunk <= 0 or self.chunk % 8:
            raise ValueError("chunk must be a positive multiple of 8")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        if not self.code.decodable:
            raise UnsupportedDecoderError(
                f"code {self.code.name!r} has no decoder and cannot be simulated"
            )

    @property
    def single_species_mode(self) -> bool:
        if self.single_species is None:
            return self.code.single_error_type
        return self.single_species

    def block_plan(self) -> list[tuple[tuple[int, int, int], str, float, int]]:
        """``(stream label, decode basis, error rate, station)`` for every block.

        In single-species mode both blocks of a station see the corrected
        species (rate ``q_b``) and are decoded with the Z-side code.
        """
        single = self.single_species_mode

        def spec(species: int) -> tuple[str, float]:
            if single:
                return "Z", self.q_b
            return ("X", self.q_p) if species == _X else ("Z", self.q_b)

        plan = []
        for station in range(1, self.L - 1):
            for species in (_X, _Z):
                basis, q = spec(species)
                plan.append(((_INTERMEDIATE, station, species), basis, q, station))
        for end, station in ((0, 0), (1, self.L - 1)):
            for species in (_X, _Z):
                basis, q = spec(species)
                plan.append(((_END, end, species), basis, q, station))
        return plan


@dataclass(frozen=True)
class SimOutcome:
    trials: int
    error_free: int
    x_chain_correct: int
    z_chain_correct: int
    station_errors: np.ndarray = field(repr=False)
    block_trials: np.ndarray = field(repr=False)

    @property
    def logical_error_free_fraction(self) -> float:
        return self.error_free / self.trials

    @property
    def x_chain_correct_fraction(self) -> float:
        return self.x_chain_correct / self.trials

    @property
    def z_chain_correct_fraction(self) -> float:
        return self.z_chain_correct / self.trials

    def standard_error(self, fraction: float) -> float:
        return math.sqrt(fraction * (1.0 - fraction) / self.trials)

    @property
    def error_free_stderr(self) -> float:
        return self.standard_error(self.logical_error_free_fraction)

    @property
    def x_chain_stderr(self) -> float:
        return self.standard_error(self.x_chain_correct_fraction)

    @property
    def z_chain_stderr(self) -> float:
        return self.standard_error(self.z_chain_correct_fraction)

    def per_block_error_rate(self) -> float:
        """Logical errors per decoded block, pooled over the whole chain."""
        return float(self.station_errors.sum()) / float(self.block_trials.sum())

    def __eq__(self, other):
        if not isinstance(other, SimOutcome):
            return NotImplemented
        return (
            (self.trials, self.error_free, self.x_chain_correct, self.z_chain_correct)
            == (other.trials, other.error_free, other.x_chain_correct, other.z_chain_correct)
            and np.array_equal(self.station_errors, other.station_errors)
            and np.array_equal(self.block_trials, other.block_trials)
        )


def block_errors(
    code: CssCodeSpec, basis: str, errors: np.ndarray, beyond_distance_is_error: bool = True
) -> np.ndarray:
    """Which blocks (rows of an injected error pattern) end in a logical error.

    The transmitted logical value is taken as 0; only the error pattern matters.
    """
    weight = errors.sum(axis=1)
    if beyond_distance_is_error:
        bad = weight > code.t
    else:
        bad = np.zeros(len(errors), dtype=bool)
    # error-free rows decode trivially and rows already scored need no decode
    todo = (weight > 0) & ~bad
    if todo.any():
        logical, _, failed, _ = decode_many(code, basis, errors[todo])
        bad[todo] = logical.any(axis=1) | failed
    return bad


def _run_chunk(cfg: ChainConfig, plan, start: int, size: int):
    n = cfg.code.n
    ok_x = np.ones(size, dtype=bool)
    ok_z = np.ones(size, dtype=bool)
    ok_recovery = np.ones(size, dtype=bool)
    station_errors = np.zeros(cfg.L, dtype=np.int64)
    for label, basis, q, station in plan:
        errors = rng.bernoulli_bits(cfg.master_seed, label, start, size, n, q)
        bad = block_errors(cfg.code, basis, errors, cfg.beyond_distance_is_error)
        station_errors[station] += int(bad.sum())
        kind, where, species = label
        if species == _X:
            ok_x &= ~bad
        else:
            ok_z &= ~bad
        if kind == _INTERMEDIATE or where == 0:
            ok_recovery &= ~bad
    return (
        int(ok_recovery.sum()),
        int(ok_x.sum()),
        int(ok_z.sum()),
        station_errors,
    )


def simulate_chain(cfg: ChainConfig, workers: int = 1) -> SimOutcome:
    """Sample ``cfg.trials`` chains; results do not depend on ``workers``."""
    if workers < 1:
        raise ValueError("workers must be >= 1")
    plan = cfg.block_plan()
    starts = list(range(0, cfg.trials, cfg.chunk))
    jobs = [(s, min(cfg.chunk, cfg.trials - s)) for s in starts]
    if workers == 1:
        parts = [_run_chunk(cfg, plan, s, size) for s, size in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _run_chunk(cfg, plan, *job), jobs))

    station_errors = np.zeros(cfg.L, dtype=np.int64)
    block_trials = np.zeros(cfg.L, dtype=np.int64)
    for *_, station in plan:
        block_trials[station] += cfg.trials
    totals = [0, 0, 0]
    for ok_rec, ok_x, ok_z, errs in parts:
        totals[0] += ok_rec
        totals[1] += ok_x
        totals[2] += ok_z
        station_errors += errs
    return SimOutcome(
        trials=cfg.trials,
        error_free=totals[0],
        x_chain_correct=totals[1],
        z_chain_correct=totals[2],
        station_errors=station_errors,
        block_trials=block_trials,
    )


class InstanceTooLargeError(ValueError):
    pass


MAX_EXACT_BITS = 30


def exact_chain_error(
    code: CssCodeSpec,
    L: int,
    q_b: float,
    q_p: float,
    single_species: bool | None = None,
    beyond_distance_is_error: bool = True,
) -> float:
    """Exact probability that the chain (recovery included) is error free.

    Enumerates every joint error pattern over all blocks feeding the
    fidelity event and runs each through the same decoding path as
    :func:`simulate_chain`.
    """
    cfg = ChainConfig(
        code, L, q_b, q_p, trials=1, single_species=single_species,
        beyond_distance_is_error=beyond_distance_is_error,
    )
    plan = [b for b in cfg.block_plan() if b[0][0] == _INTERMEDIATE or b[0][1] == 0]
    n = code.n
    bits = n * len(plan)
    if bits > MAX_EXACT_BITS:
        raise InstanceTooLargeError(
            f"{2**bits} joint patterns exceed the enumeration limit of 2**{MAX_EXACT_BITS}"
        )

    # per-block tables over all 2^n local patterns: does it fail, how likely is it
    patterns = ((np.arange(1 << n)[:, None] >> np.arange(n)) & 1).astype(np.uint8)
    weights = patterns.sum(axis=1)
    local_ok, local_prob = [], []
    for _, basis, q, _ in plan:
        local_ok.append(~block_errors(code, basis, patterns, beyond_distance_is_error))
        local_prob.append(q**weights * (1.0 - q) ** (n - weights))

    total = []
    step = 1 << min(bits, 20)
    mask = (1 << n) - 1
    for start in range(0, 1 << bits, step):
        idx = np.arange(start, start + step, dtype=np.int64)
        ok = np.ones(step, dtype=bool)
        prob = np.ones(step)
        for b in range(len(plan)):
            local = (idx >> (b * n)) & mask
            ok &= local_ok[b][local]
            prob *= local_prob[b][local]
        total.append(float(prob[ok].sum()))
    return math.fsum(total)


def analytic_predictions(code: CssCodeSpec, L: int, q_b: float, q_p: float, single_species: bool | None = None):
    """Closed-form counterparts: ``(error_free, x_chain, z_chain)``."""
    from .chain import logical_error_prob

    single = code.single_error_type if single_species is None else single_species
    Qz = logical_error_prob(code.n, code.t, q_b)
    Qx = Qz if single else logical_error_prob(code.n, code.t, q_p)
    error_free = ((1 - Qx) * (1 - Qz)) ** (L - 1)
    return error_free, (1 - Qx) ** L, (1 - Qz) ** L
