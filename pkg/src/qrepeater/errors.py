"""Physical error parameters and the effective per-qubit output error rates."""

from __future__ import annotations

import math
from dataclasses import dataclass


def _check_prob(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class ErrorParams:
    """Gate (beta), measurement (delta) and memory (mu) error probabilities.

    ``gamma`` is the memory decoherence rate in 1/s and ``f0`` the fidelity
    of freshly generated, unpurified pairs.
    """

    beta: float = 1e-3
    delta: float = 1e-3
    mu: float = 0.0
    gamma: float = 0.0
    f0: float = 0.95

    def __post_init__(self):
        _check_prob("beta", self.beta)
        _check_prob("delta", self.delta)
        _check_prob("mu", self.mu)
        if self.gamma < 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")
        if not 0.25 <= self.f0 <= 1.0:
            raise ValueError(f"f0 must lie in [0.25, 1], got {self.f0}")

    @classmethod
    def with_memory(cls, beta: float, delta: float, gamma: float, tau_c: float, f0: float = 0.95):
        return cls(beta=beta, delta=delta, mu=memory_error_prob(gamma, tau_c), gamma=gamma, f0=f0)


@dataclass(frozen=True)
class FlipRates:
    """Bit-flip / phase-flip probabilities of one qubit at some protocol stage."""

    b: float
    p: float


@dataclass(frozen=True)
class EffectiveError:
    q_b: float
    q_p: float
    q: float
    saturated: bool = False
    stages: dict[str, FlipRates] | None = None


def memory_error_prob(gamma: float, tau_c: float) -> float:
    """Probability a stored qubit decoheres during ``tau_c`` seconds."""
    if gamma < 0 or tau_c < 0:
        raise ValueError("gamma and tau_c must be non-negative")
    if gamma == 0 or tau_c == 0:
        return 0.0
    return -math.expm1(-gamma * tau_c)


def effective_error_probabilities(p: ErrorParams) -> EffectiveError:
    """Accumulate bit and phase error rates through generation and connection.

    Stages (each exposed in ``stages``):

    * ``distillation`` - fault-tolerantly prepared memory qubit
    * ``purification`` - qubit of a purified physical pair
    * ``cnot_control`` / ``cnot_target`` - after the teleportation-based CNOT
    * ``memory`` - one depolarizing memory channel per stored qubit
    * ``connection`` - the measured outputs after the transversal CNOT

    Bit errors of the control block and phase errors of the target block
    are copied across by the connection CNOT, so both measured qubits
    contribute to each species.
    """
    beta, delta, mu = p.beta, p.delta, p.mu
    distilled = FlipRates(beta / 4, beta / 2)
    purified = FlipRates(beta / 2, beta / 4)
    control = FlipRates(
        distilled.b + beta / 2,
        2 * distilled.p + 2 * purified.p + beta + delta,
    )
    target = FlipRates(
        2 * distilled.b + 2 * purified.b + beta + delta,
        distilled.p + beta / 2,
    )
    # memory depolarizing with probability mu flips each species w.p. mu/2
    memory = FlipRates(mu / 2, mu / 2)
    q_b = control.b + target.b + 2 * memory.b + beta / 2 + delta
    q_p = control.p + target.p + 2 * memory.p + beta / 2 + delta

    saturated = q_b > 1 or q_p > 1
    q_b, q_p = min(q_b, 1.0), min(q_p, 1.0)
    stages = {
        "distillation": distilled,
        "purification": purified,
        "cnot_control": control,
        "cnot_target": target,
        "memory": memory,
        "connection": FlipRates(q_b, q_p),
    }
    return EffectiveError(q_b=q_b, q_p=q_p, q=max(q_b, q_p), saturated=saturated, stages=stages)
