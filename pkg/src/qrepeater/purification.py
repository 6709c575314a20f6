"""Entanglement purification yield, pair-number statistics and cycle time.

Bell-diagonal states are stored as ``(A, B, C, D)`` = weights of
Phi+, Psi+, Psi-, Phi-. Internally each Bell state is labelled by a
(phase, bit) pair: Phi+ = (0, 0), Psi+ = (0, 1), Phi- = (1, 0), Psi- = (1, 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binom

# coefficient order (A, B, C, D) -> index 2 * phase + bit
_TO_PB = np.array([0, 1, 3, 2])


class UnreachableTargetError(ValueError):
    pass


@dataclass(frozen=True)
class BellDiagState:
    coeffs: tuple[float, float, float, float]

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (4,) or np.any(c < -1e-15) or abs(c.sum() - 1.0) > 1e-12:
            raise ValueError(f"not a normalised Bell-diagonal state: {self.coeffs}")
        object.__setattr__(self, "coeffs", tuple(float(x) for x in c))

    @classmethod
    def werner(cls, fidelity: float) -> BellDiagState:
        """Depolarized pair: fidelity on Phi+, the rest spread evenly."""
        if not 0.25 <= fidelity <= 1.0:
            raise ValueError("Werner fidelity must lie in [1/4, 1]")
        rest = (1.0 - fidelity) / 3.0
        return cls((fidelity, rest, rest, 1.0 - fidelity - 2 * rest))

    @property
    def fidelity(self) -> float:
        return self.coeffs[0]

    def by_phase_bit(self) -> np.ndarray:
        out = np.empty(4)
        out[_TO_PB] = self.coeffs
        return out

    @classmethod
    def from_phase_bit(cls, v: np.ndarray) -> BellDiagState:
        v = np.asarray(v, dtype=float)
        v = v / v.sum()
        return cls(tuple(v[_TO_PB]))


@dataclass(frozen=True)
class NumberDist:
    """Distribution over how many level-``level`` pairs survive."""

    level: int
    probs: dict[int, float]
    truncated: float = 0.0

    def as_array(self) -> np.ndarray:
        size = max(self.probs, default=0) + 1
        out = np.zeros(size)
        for m, p in self.probs.items():
            out[m] = p
        return out

    def mean(self) -> float:
        return sum(m * p for m, p in self.probs.items())


@dataclass(frozen=True)
class LinkParams:
    l0_km: float = 10.0
    l_att_km: float = 20.0
    v_km_s: float = 2e5
    eta: float = 0.3
    n_eng: float = 28.0

    def __post_init__(self):
        if min(self.l0_km, self.l_att_km, self.v_km_s, self.n_eng) <= 0:
            raise ValueError("link parameters must be positive")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("eta must lie in (0, 1]")


# ---------------------------------------------------------------------------
# one round of recurrence purification


def _rotate(v: np.ndarray) -> np.ndarray:
    """Bilateral pi/2 x-rotations: swaps Phi- and Psi-, i.e. bit ^= phase."""
    out = np.empty(4)
    for phase in (0, 1):
        for bit in (0, 1):
            out[2 * phase + (bit ^ phase)] = v[2 * phase + bit]
    return out


def purify_step(state: BellDiagState, beta: float = 0.0, delta: float = 0.0) -> tuple[float, BellDiagState]:
    """One recurrence round on two copies of ``state``.

    Both pairs get the bilateral rotation, then a CNOT on each side (pair 1
    controls pair 2) followed by Z measurement of pair 2; the round succeeds
    when the two outcomes agree. Each CNOT carries a two-qubit depolarizing
    error ``beta`` and each measured bit flips with probability ``delta``.

    Returns ``(success_probability, output_state)``.
    """
    if not (0.0 <= beta <= 1.0 and 0.0 <= delta <= 1.0):
        raise ValueError("beta and delta must be probabilities")
    v = _rotate(state.by_phase_bit())
    keep = (1.0 - beta) ** 2
    joint = keep * np.outer(v, v) + (1.0 - keep) / 16.0
    flip = 2.0 * delta * (1.0 - delta)

    out = np.zeros(4)
    for i in range(4):
        p1, b1 = divmod(i, 2)
        for j in range(4):
            p2, b2 = divmod(j, 2)
            # bit flips copy control -> target, phases copy target -> control
            accept = 1.0 - flip if b1 == b2 else flip
            out[2 * (p1 ^ p2) + b1] += joint[i, j] * accept
    success = float(out.sum())
    return success, BellDiagState.from_phase_bit(out)


@dataclass(frozen=True)
class PurificationSchedule:
    success: tuple[float, ...]
    states: tuple[BellDiagState, ...] = field(repr=False)

    @property
    def final_fidelity(self) -> float:
        return self.states[-1].fidelity


def purification_schedule(f0: float, beta: float, delta: float, levels: int) -> PurificationSchedule:
    """Success probabilities r_0..r_{levels-1} starting from depolarized pairs."""
    if levels < 0:
        raise ValueError("levels must be non-negative")
    state = BellDiagState.werner(f0)
    states, rs = [state], []
    for _ in range(levels):
        r, state = purify_step(state, beta, delta)
        rs.append(r)
        states.append(state)
    return PurificationSchedule(tuple(rs), tuple(states))


# ---------------------------------------------------------------------------
# pair-number statistics


def _level_up(p: np.ndarray, r: float) -> np.ndarray:
    paired = np.zeros(len(p) // 2 + 1)
    np.add.at(paired, np.arange(len(p)) // 2, p)
    js = np.arange(len(paired))
    ms = np.arange(len(paired))
    # kernel[m, j] = C(j, m) r^m (1-r)^(j-m)
    kernel = binom.pmf(ms[:, None], js[None, :], r)
    return kernel @ paired


def number_distribution(n0: int, r, levels: int, tol: float = 1e-15) -> NumberDist:
    """Distribution of surviving level-``levels`` pairs from ``n0`` raw pairs.

    Entries below ``tol`` are dropped (not renormalised); their total mass
    is kept in ``truncated``.
    """
    if levels < 0:
        raise ValueError("levels must be non-negative")
    if n0 < 0:
        raise ValueError("n0 must be non-negative")
    r = tuple(r)
    if len(r) < levels:
        raise ValueError(f"need {levels} success probabilities, got {len(r)}")
    if any(not 0.0 <= x <= 1.0 for x in r):
        raise ValueError("success probabilities must lie in [0, 1]")
    p = np.zeros(n0 + 1)
    p[n0] = 1.0
    for i in range(levels):
        p = _level_up(p, r[i])
    small = p < tol
    return NumberDist(
        level=levels,
        probs={int(m): float(x) for m, x in enumerate(p) if not small[m]},
        truncated=float(p[small].sum()),
    )


def _failure_from_array(p: np.ndarray, n: int) -> float:
    return float(p[:n].sum())


def failure_probability(n0: int, n: int, r, levels: int) -> float:
    """Probability that fewer than ``n`` purified pairs come out of ``n0``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    dist = number_distribution(n0, r, levels, tol=0.0)
    return _failure_from_array(dist.as_array(), n)


def required_pairs(n: int, r, levels: int, p_target: float, n0_max: int = 1_000_000) -> int:
    """Smallest number of raw pairs whose failure probability is <= ``p_target``."""
    if not 0.0 < p_target < 1.0:
        raise ValueError("p_target must lie in (0, 1)")
    r = tuple(r)
    if n == 0:
        return 0
    if any(x == 0.0 for x in r[:levels]):
        raise UnreachableTargetError("a purification level never succeeds")

    def ok(n0: int) -> bool:
        return failure_probability(n0, n, r, levels) <= p_target

    # failure probability is nonincreasing in n0: grow a bracket, then bisect
    lo = n * 2**levels - 1
    hi = max(lo + 1, 2 * lo)
    while not ok(hi):
        lo, hi = hi, 2 * hi
        if hi > n0_max:
            raise UnreachableTargetError(f"target {p_target} not reached with {n0_max} pairs")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# timing


def generation_rate(link: LinkParams) -> float:
    """Raw pair generation rate between neighbours, pairs per second."""
    return link.v_km_s / link.l0_km * link.eta**2 * math.exp(-link.l0_km / link.l_att_km) * link.n_eng


def cycle_time(link: LinkParams, n0: int) -> tuple[float, float]:
    """``(tau_c, kappa)``: the cycle serves both neighbours, hence 2 * n0 / R."""
    rate = generation_rate(link)
    tau_c = 2.0 * n0 / rate
    kappa = 2.0 * n0 / link.n_eng
    return tau_c, kappa


def attempt_time(link: LinkParams) -> float:
    """tau_c / kappa: one round trip scaled by the inverse success probability."""
    return link.l0_km / link.v_km_s * math.exp(link.l0_km / link.l_att_km) / link.eta**2


@dataclass(frozen=True)
class KeyRate:
    raw: float
    sifted: float


def key_rate(tau_c: float) -> KeyRate:
    """One key bit per cycle; half survive basis sifting."""
    if tau_c <= 0:
        raise ValueError("tau_c must be positive")
    return KeyRate(raw=1.0 / tau_c, sifted=0.5 / tau_c)
