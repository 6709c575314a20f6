"""CSS code registry and classical decoding of measured encoding blocks.

Every block is read out transversally: the X-measured block is checked
against ``h_x`` and the Z-measured block against ``h_z``. Bits follow the
convention |+>, |0> -> 0 and |->, |1> -> 1; syndromes are ``h @ v mod 2``.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

Basis = Literal["X", "Z"]

REGISTRY_NAMES = (
    "none",
    "repetition-3",
    "repetition-5",
    "hamming-7",
    "bacon-shor-25",
    "golay-23",
    "bch-127",
    "qr-103",
)


class UnknownCodeError(KeyError):
    pass


class UnsupportedDecoderError(NotImplementedError):
    pass


@dataclass(frozen=True)
class DecodeResult:
    logical_bits: np.ndarray
    correction_weight: int
    failed: bool


@dataclass(frozen=True, eq=False)
class CssCodeSpec:
    """A CSS code with its two classical check matrices.

    ``h_x`` / ``h_z`` are ``None`` for codes registered only by their
    parameters (no decoder available).
    """

    name: str
    n: int
    k: int
    t: int
    h_x: np.ndarray | None
    h_z: np.ndarray | None
    logical_x_support: np.ndarray | None
    logical_z_support: np.ndarray | None
    decoder_kind: str
    single_error_type: bool = False
    _tables: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def distance(self) -> int:
        return 2 * self.t + 1

    @property
    def decodable(self) -> bool:
        return self.decoder_kind != "unsupported"

    def check_matrix(self, basis: Basis) -> np.ndarray:
        self._require_decoder()
        return self.h_x if basis == "X" else self.h_z

    def logical_support(self, basis: Basis) -> np.ndarray:
        self._require_decoder()
        return self.logical_x_support if basis == "X" else self.logical_z_support

    def _require_decoder(self) -> None:
        if not self.decodable:
            raise UnsupportedDecoderError(
                f"code {self.name!r} is registered for analytic use only; "
                "no decoder is available"
            )

    def validate(self) -> None:
        """Raise ``ValueError`` if the commutation/orthogonality invariants fail."""
        if not self.decodable:
            return
        hx, hz = self.h_x, self.h_z
        if hx.shape[1] != self.n or hz.shape[1] != self.n:
            raise ValueError(f"{self.name}: check matrices must have {self.n} columns")
        if np.any((hx @ hz.T) % 2):
            raise ValueError(f"{self.name}: X and Z stabilizers do not commute")
        lx = np.atleast_2d(self.logical_x_support)
        lz = np.atleast_2d(self.logical_z_support)
        if np.any((hx @ lz.T) % 2) or np.any((hz @ lx.T) % 2):
            raise ValueError(f"{self.name}: logical operators do not commute with stabilizers")
        if np.any((lx @ lz.T) % 2 != np.eye(self.k, dtype=np.int64)):
            raise ValueError(f"{self.name}: logical X and Z do not pair up")


@dataclass(frozen=True)
class StabilizerFrame:
    """Known stabilizer eigenvalues of a block, stored as bits (1 means -1)."""

    x_eigen: np.ndarray
    z_eigen: np.ndarray

    @classmethod
    def trivial(cls, code: CssCodeSpec) -> StabilizerFrame:
        return cls(
            np.zeros(code.h_x.shape[0], dtype=np.uint8),
            np.zeros(code.h_z.shape[0], dtype=np.uint8),
        )

    @classmethod
    def from_signs(cls, x_signs, z_signs) -> StabilizerFrame:
        return cls(
            (np.asarray(x_signs) < 0).astype(np.uint8),
            (np.asarray(z_signs) < 0).astype(np.uint8),
        )

    def signs(self) -> tuple[np.ndarray, np.ndarray]:
        return 1 - 2 * self.x_eigen.astype(np.int8), 1 - 2 * self.z_eigen.astype(np.int8)

    def __eq__(self, other):
        if not isinstance(other, StabilizerFrame):
            return NotImplemented
        return np.array_equal(self.x_eigen, other.x_eigen) and np.array_equal(
            self.z_eigen, other.z_eigen
        )


# ---------------------------------------------------------------------------
# registry


def _repetition_checks(n: int) -> np.ndarray:
    h = np.zeros((n - 1, n), dtype=np.uint8)
    for j in range(n - 1):
        h[j, j] = h[j, j + 1] = 1
    return h


def _hamming_checks() -> np.ndarray:
    # column j is the binary expansion of j + 1
    cols = np.arange(1, 8)
    return np.array([(cols >> b) & 1 for b in range(3)], dtype=np.uint8)


def _golay_checks() -> np.ndarray:
    # generator polynomial x^11 + x^10 + x^6 + x^5 + x^4 + x^2 + 1
    g = np.zeros(23, dtype=np.uint8)
    g[[0, 2, 4, 5, 6, 10, 11]] = 1
    gen = np.array([np.roll(g, s) for s in range(12)], dtype=np.uint8)
    return gf2_nullspace(gen)


def _bacon_shor_checks(side: int) -> tuple[np.ndarray, np.ndarray]:
    n = side * side
    grid = np.arange(n).reshape(side, side)
    hx = np.zeros((side - 1, n), dtype=np.uint8)
    hz = np.zeros((side - 1, n), dtype=np.uint8)
    for j in range(side - 1):
        hx[j, grid[j : j + 2, :].ravel()] = 1
        hz[j, grid[:, j : j + 2].ravel()] = 1
    return hx, hz


def _ones(n: int) -> np.ndarray:
    return np.ones((1, n), dtype=np.uint8)


def _make(name: str) -> CssCodeSpec:
    empty = lambda n: np.zeros((0, n), dtype=np.uint8)  # noqa: E731
    if name == "none":
        return CssCodeSpec(name, 1, 1, 0, empty(1), empty(1), _ones(1), _ones(1), "lookup-table")
    if name in ("repetition-3", "repetition-5"):
        n = int(name.split("-")[1])
        return CssCodeSpec(
            name, n, 1, (n - 1) // 2, empty(n), _repetition_checks(n), _ones(n), _ones(n),
            "majority", single_error_type=True,
        )
    if name == "hamming-7":
        h = _hamming_checks()
        return CssCodeSpec(name, 7, 1, 1, h, h.copy(), _ones(7), _ones(7), "lookup-table")
    if name == "golay-23":
        h = _golay_checks()
        return CssCodeSpec(name, 23, 1, 3, h, h.copy(), _ones(23), _ones(23), "lookup-table")
    if name == "bacon-shor-25":
        hx, hz = _bacon_shor_checks(5)
        grid = np.arange(25).reshape(5, 5)
        lx = np.zeros((1, 25), dtype=np.uint8)
        lz = np.zeros((1, 25), dtype=np.uint8)
        lx[0, grid[0, :]] = 1
        lz[0, grid[:, 0]] = 1
        return CssCodeSpec(name, 25, 1, 2, hx, hz, lx, lz, "row-column-majority")
    if name == "bch-127":
        return CssCodeSpec(name, 127, 29, 7, None, None, None, None, "unsupported")
    if name == "qr-103":
        return CssCodeSpec(name, 103, 1, 9, None, None, None, None, "unsupported")
    raise UnknownCodeError(
        f"unknown code {name!r}; valid names are: {', '.join(REGISTRY_NAMES)}"
    )


def build_code(name: str) -> CssCodeSpec:
    """Return the registered code called ``name`` (case and spaces ignored)."""
    return _cached_code(name.strip().lower())


@functools.lru_cache(maxsize=None)
def _cached_code(name: str) -> CssCodeSpec:
    code = _make(name)
    code.validate()
    return code


def registry() -> list[CssCodeSpec]:
    return [build_code(name) for name in REGISTRY_NAMES]


# ---------------------------------------------------------------------------
# GF(2) helpers


def gf2_rank(m: np.ndarray) -> int:
    a = (np.array(m, dtype=np.uint8) % 2).copy()
    rank = 0
    rows, cols = a.shape
    for c in range(cols):
        pivot = next((r for r in range(rank, rows) if a[r, c]), None)
        if pivot is None:
            continue
        a[[rank, pivot]] = a[[pivot, rank]]
        for r in range(rows):
            if r != rank and a[r, c]:
                a[r] ^= a[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def gf2_nullspace(m: np.ndarray) -> np.ndarray:
    """Basis (as rows) of {v : m @ v = 0 mod 2}."""
    a = (np.array(m, dtype=np.uint8) % 2).copy()
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if a[i, c]), None)
        if pivot is None:
            continue
        a[[r, pivot]] = a[[pivot, r]]
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, p in enumerate(pivots):
            basis[i, p] = a[row, f]
    return basis


# ---------------------------------------------------------------------------
# decoding


def _bits_to_int(bits: np.ndarray) -> np.ndarray:
    weights = 1 << np.arange(bits.shape[-1], dtype=np.int64)
    return bits.astype(np.int64) @ weights


def _syndrome_table(code: CssCodeSpec, basis: Basis) -> tuple[np.ndarray, np.ndarray]:
    """Coset-leader table: syndrome index -> (correction, defined?)."""
    key = ("table", basis)
    if key in code._tables:
        return code._tables[key]
    h = code.check_matrix(basis)
    m = h.shape[0]
    corrections = np.zeros((1 << m, code.n), dtype=np.uint8)
    defined = np.zeros(1 << m, dtype=bool)
    for w in range(code.t + 1):
        for support in itertools.combinations(range(code.n), w):
            e = np.zeros(code.n, dtype=np.uint8)
            e[list(support)] = 1
            s = int(_bits_to_int((h @ e) % 2)) if m else 0
            if not defined[s]:
                corrections[s] = e
                defined[s] = True
    corrections.setflags(write=False)
    defined.setflags(write=False)
    code._tables[key] = (corrections, defined)
    return corrections, defined


def syndromes(code: CssCodeSpec, basis: Basis, outputs: np.ndarray) -> np.ndarray:
    h = code.check_matrix(basis)
    v = np.atleast_2d(outputs)
    if h.shape[0] == 0:
        return np.zeros((v.shape[0], 0), dtype=np.uint8)
    # float matmul hits BLAS; entries are small integers so the result is exact
    return (v.astype(np.float32) @ h.T.astype(np.float32)).astype(np.int64) % 2


def decode_many(
    code: CssCodeSpec,
    basis: Basis,
    outputs: np.ndarray,
    stabilizer_signs: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised bounded-distance decoding of a batch of measured blocks.

    ``outputs`` has shape ``(batch, n)``. ``stabilizer_signs`` holds known
    stabilizer eigenvalue bits for the checked basis (the syndrome is taken
    relative to them).

    Returns ``(logical_bits, correction_weight, failed, correction)`` with
    shapes ``(batch, k)``, ``(batch,)``, ``(batch,)`` and ``(batch, n)``.
    """
    v = np.atleast_2d(np.asarray(outputs, dtype=np.uint8))
    if v.shape[1] != code.n:
        raise ValueError(f"expected blocks of length {code.n}, got {v.shape[1]}")
    support = code.logical_support(basis)

    if code.decoder_kind == "majority" and basis == "Z":
        correction = _majority_correction(v, stabilizer_signs)
        failed = np.zeros(v.shape[0], dtype=bool)
    elif code.decoder_kind == "row-column-majority":
        correction = _line_majority_correction(code, basis, v, stabilizer_signs)
        failed = np.zeros(v.shape[0], dtype=bool)
    else:
        s = syndromes(code, basis, v)
        if stabilizer_signs is not None:
            s = s ^ np.asarray(stabilizer_signs, dtype=np.int64)
        idx = _bits_to_int(s) if s.shape[1] else np.zeros(v.shape[0], dtype=np.int64)
        table, defined = _syndrome_table(code, basis)
        correction = table[idx]
        failed = ~defined[idx]

    corrected = v ^ correction
    logical = (corrected.astype(np.int64) @ support.T.astype(np.int64)) % 2
    weight = correction.sum(axis=1, dtype=np.int64)
    return logical.astype(np.uint8), weight, failed, correction


def _majority_correction(v: np.ndarray, signs) -> np.ndarray:
    if signs is not None and np.any(signs):
        # shift each bit by the known parity relative to bit 0 before voting
        offsets = np.concatenate([[0], np.cumsum(np.asarray(signs, dtype=np.uint8)) % 2])
        v = v ^ offsets.astype(np.uint8)
    else:
        offsets = np.zeros(v.shape[1], dtype=np.uint8)
    ones = v.sum(axis=1)
    majority = (2 * ones > v.shape[1]).astype(np.uint8)
    return (v ^ majority[:, None]).astype(np.uint8)


def _line_majority_correction(code: CssCodeSpec, basis: Basis, v: np.ndarray, signs) -> np.ndarray:
    side = int(round(np.sqrt(code.n)))
    grid = v.reshape(-1, side, side)
    # Z readout: column parities all equal the logical Z; X readout: row parities
    parities = grid.sum(axis=1) % 2 if basis == "Z" else grid.sum(axis=2) % 2
    if signs is not None and np.any(signs):
        offsets = np.concatenate([[0], np.cumsum(np.asarray(signs, dtype=np.uint8)) % 2])
        parities = parities ^ offsets
    majority = (2 * parities.sum(axis=1) > side).astype(np.int64)
    minority = parities != majority[:, None]
    correction = np.zeros_like(grid)
    if basis == "Z":
        correction[:, 0, :] = minority
    else:
        correction[:, :, 0] = minority
    return correction.reshape(-1, code.n).astype(np.uint8)


def decode_block(
    code: CssCodeSpec,
    basis: Basis,
    outputs,
    stabilizer_signs=None,
) -> DecodeResult:
    """Decode one measured block; ``failed`` flags a beyond-distance syndrome."""
    if basis not in ("X", "Z"):
        raise ValueError(f"basis must be 'X' or 'Z', got {basis!r}")
    v = np.asarray(outputs, dtype=np.uint8)
    if v.ndim != 1 or v.shape[0] != code.n:
        raise ValueError(f"outputs must be a vector of length {code.n}")
    logical, weight, failed, _ = decode_many(code, basis, v[None, :], stabilizer_signs)
    return DecodeResult(logical[0], int(weight[0]), bool(failed[0]))


def stabilizer_cnot_update(
    control: StabilizerFrame, target: StabilizerFrame
) -> tuple[StabilizerFrame, StabilizerFrame]:
    """Eigenvalue bookkeeping for a transversal CNOT between two blocks.

    Control keeps its X eigenvalues and picks up the target's Z ones; the
    target picks up the control's X eigenvalues.
    """
    if control.x_eigen.shape != target.x_eigen.shape or control.z_eigen.shape != target.z_eigen.shape:
        raise ValueError("stabilizer frames belong to codes of different dimensions")
    new_control = StabilizerFrame(control.x_eigen.copy(), control.z_eigen ^ target.z_eigen)
    new_target = StabilizerFrame(control.x_eigen ^ target.x_eigen, target.z_eigen.copy())
    return new_control, new_target


@dataclass(frozen=True)
class Resources:
    total: int
    memory: int
    ancilla: int


def resource_estimate(code: CssCodeSpec) -> Resources:
    """Qubits per station: 2n memory plus 4n ancilla (GHZ block of 2n)."""
    if code.name == "none":
        return Resources(total=4, memory=2, ancilla=2)
    return Resources(total=6 * code.n, memory=2 * code.n, ancilla=4 * code.n)
