"""Analytic model of the encoded chain: block failure, fidelity, reach."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .codes import CssCodeSpec, registry, resource_estimate

UNBOUNDED = math.inf


@dataclass(frozen=True)
class ChainReport:
    code: str
    n: int
    k: int
    t: int
    q: float
    Q: float
    L: float
    F: float
    F_refined: float
    C: float
    distance_km: float
    qubits_per_station: int | None = None


def _log_binom(n: int, j: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(j + 1) - math.lgamma(n - j + 1)


def logical_error_prob(n: int, t: int, q: float) -> float:
    """Probability that more than ``t`` of ``n`` i.i.d. outputs are wrong.

    The full binomial tail, summed in log space so n in the hundreds or
    thousands does not overflow.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    if t < 0 or n < 1:
        raise ValueError("need n >= 1 and t >= 0")
    if t > n:
        raise ValueError(f"t={t} exceeds block size n={n}")
    if t == n or q == 0.0:
        return 0.0
    if q == 1.0:
        return 1.0
    return min(math.exp(log_logical_error_prob(n, t, q)), 1.0)


def _log_binom_sum(n: int, q: float, js: range) -> float:
    if len(js) == 0:
        return -math.inf
    lq, l1q = math.log(q), math.log1p(-q)
    logs = [_log_binom(n, j) + j * lq + (n - j) * l1q for j in js]
    top = max(logs)
    return top + math.log(math.fsum(math.exp(x - top) for x in logs))


def log_logical_error_prob(n: int, t: int, q: float) -> float:
    """Natural log of the binomial tail; stays finite where Q underflows."""
    if t >= n or q == 0.0:
        return -math.inf
    if q == 1.0:
        return 0.0
    return _log_binom_sum(n, q, range(t + 1, n + 1))


def log_success_prob(n: int, t: int, q: float) -> float:
    """Natural log of 1 - Q, accurate when Q is close to one."""
    if t >= n or q == 0.0:
        return 0.0
    if q == 1.0:
        return -math.inf
    return _log_binom_sum(n, q, range(0, t + 1))


def logical_error_prob_asymptotic(n: int, t: int, q: float) -> float:
    """Large-block (n >> t >> 1) closed-form approximation of the tail."""
    if t < 1 or n < t:
        raise ValueError("the asymptotic form needs n >= t >= 1")
    if q < 0:
        raise ValueError("q must be non-negative")
    base = math.exp(1 + 1 / (2 * n)) * n * q / (t + 1)
    return base ** (t + 1) / math.sqrt(2 * math.pi * t)


def _check_chain(Q: float, L: float) -> None:
    if not 0.0 <= Q <= 1.0:
        raise ValueError(f"Q must lie in [0, 1], got {Q}")
    if L < 2:
        raise ValueError(f"a chain needs at least 2 stations, got L={L}")


def chain_fidelity(Q: float, L: float) -> tuple[float, float]:
    """Return ``(F, F_refined)`` = ``((1-Q)^(2L), (1-Q)^(2L-2))``."""
    _check_chain(Q, L)
    if Q == 1.0:
        return 0.0, 0.0
    log1q = math.log1p(-Q)
    return math.exp(2 * L * log1q), math.exp((2 * L - 2) * log1q)


def key_correlation(Q: float, L: float) -> float:
    _check_chain(Q, L)
    if Q == 1.0:
        return 0.0
    return math.exp(L * math.log1p(-Q))


def max_connections(Q: float, f_star: float) -> float:
    """Largest L with (1-Q)^(2L) >= f_star; ``UNBOUNDED`` when Q == 0."""
    if not 0.0 < f_star < 1.0:
        raise ValueError(f"target fidelity must lie in (0, 1), got {f_star}")
    if not 0.0 <= Q <= 1.0:
        raise ValueError(f"Q must lie in [0, 1], got {Q}")
    if Q == 0.0:
        return UNBOUNDED
    if Q == 1.0:
        return 0.0
    return math.log(f_star) / (2 * math.log1p(-Q))


def family_t(ratio: float, n: int) -> int:
    return int(math.floor(ratio * n + 1e-12))


def threshold_scan(ratio: float, n_max: int = 2000, tol: float = 1e-6) -> float:
    """Estimate the error threshold of a code family with t = floor(ratio * n).

    Below threshold the block failure probability falls as the block grows;
    bisection finds the largest q with Q(n_max) < Q(n_max / 2).
    """
    if not 0.0 < ratio < 0.5 + 1e-12:
        raise ValueError("ratio must lie in (0, 1/2]")
    n_small = n_max // 2
    t_big, t_small = family_t(ratio, n_max), family_t(ratio, n_small)
    if n_small < 1 or t_small < 1:
        raise ValueError(f"n_max={n_max} too small to hold two members of the family")

    def improves(q: float) -> bool:
        tail_big = log_logical_error_prob(n_max, t_big, q)
        tail_small = log_logical_error_prob(n_small, t_small, q)
        if max(tail_big, tail_small) < -math.log(2):
            return tail_big < tail_small
        # both tails near one: compare the complements instead
        return log_success_prob(n_max, t_big, q) > log_success_prob(n_small, t_small, q)

    lo, hi = 1e-9, 0.5
    if not improves(lo):
        raise ValueError("family does not improve with size even at tiny q")
    if improves(hi):
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if improves(mid):
            lo = mid
        else:
            hi = mid
    return lo


def asymptotic_threshold(ratio: float, n: int | None = None) -> float:
    """Crude threshold (t+1)/(e^(1+1/2n) n) read off the asymptotic form."""
    if n is None:
        return ratio / math.e
    t = family_t(ratio, n)
    return (t + 1) / (math.exp(1 + 1 / (2 * n)) * n)


def chain_report(code: CssCodeSpec, q: float, f_star: float = 0.95, l0_km: float = 10.0) -> ChainReport:
    Q = logical_error_prob(code.n, code.t, q)
    L = max_connections(Q, f_star)
    if math.isinf(L) or L < 2:
        F = F_ref = 1.0 if math.isinf(L) else float("nan")
        C = F
    else:
        F, F_ref = chain_fidelity(Q, L)
        C = key_correlation(Q, L)
    return ChainReport(
        code=code.name,
        n=code.n,
        k=code.k,
        t=code.t,
        q=q,
        Q=Q,
        L=L,
        F=F,
        F_refined=F_ref,
        C=C,
        distance_km=L * l0_km,
        qubits_per_station=resource_estimate(code).total,
    )


def table1_report(q: float = 3e-3, f_star: float = 0.95, l0_km: float = 10.0) -> list[ChainReport]:
    """One row per registered code, each with reach L* and distance L* * l0.

    Repetition codes use q for the single species they correct; the
    other species is left out of the reach estimate.
    """
    return [chain_report(code, q, f_star, l0_km) for code in registry()]
