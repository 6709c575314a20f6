import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrepeater.errors import ErrorParams, effective_error_probabilities, memory_error_prob

prob = st.floats(min_value=0.0, max_value=0.05, allow_nan=False)


@pytest.mark.parametrize(
    "beta, delta, mu, q_b, q_p",
    [
        (1e-3, 1e-3, 0.0, 5.75e-3, 6.0e-3),
        (0.0, 0.0, 0.0, 0.0, 0.0),
        (5e-4, 5e-4, 0.0, 2.875e-3, 3.0e-3),
    ],
)
def test_effective_error_examples(beta, delta, mu, q_b, q_p):
    eff = effective_error_probabilities(ErrorParams(beta=beta, delta=delta, mu=mu))
    assert eff.q_b == pytest.approx(q_b, abs=1e-15)
    assert eff.q_p == pytest.approx(q_p, abs=1e-15)
    assert eff.q == pytest.approx(q_p, abs=1e-15)
    assert not eff.saturated


def test_memory_error_prob():
    assert memory_error_prob(0.0, 5.0) == 0.0
    assert memory_error_prob(0.1, 7e-3) == pytest.approx(6.9976e-4, rel=1e-4)
    assert memory_error_prob(1e9, 1.0) == 1.0
    with pytest.raises(ValueError):
        memory_error_prob(-1.0, 1.0)


def test_with_memory_builds_mu():
    p = ErrorParams.with_memory(1e-3, 1e-3, gamma=0.1, tau_c=7e-3)
    assert p.mu == pytest.approx(-math.expm1(-7e-4))


@pytest.mark.parametrize("field, value", [("beta", -0.1), ("delta", 1.5), ("gamma", -1.0), ("f0", 0.2)])
def test_invalid_params(field, value):
    with pytest.raises(ValueError):
        ErrorParams(**{field: value})


@settings(max_examples=200, deadline=None)
@given(prob, prob, prob)
def test_closed_forms_and_gap(beta, delta, mu):
    eff = effective_error_probabilities(ErrorParams(beta=beta, delta=delta, mu=mu))
    assert eff.q_b == pytest.approx(3.75 * beta + 2 * delta + mu, abs=1e-15)
    assert eff.q_p == pytest.approx(4 * beta + 2 * delta + mu, abs=1e-15)
    assert eff.q_p - eff.q_b == pytest.approx(beta / 4, abs=1e-15)
    assert eff.q == eff.q_p


@settings(max_examples=100, deadline=None)
@given(prob, prob, prob, st.sampled_from(["beta", "delta", "mu"]), st.floats(0.0, 0.05))
def test_monotone_in_each_parameter(beta, delta, mu, which, bump):
    base = dict(beta=beta, delta=delta, mu=mu)
    lo = effective_error_probabilities(ErrorParams(**base))
    base[which] += bump
    hi = effective_error_probabilities(ErrorParams(**base))
    assert hi.q_b >= lo.q_b and hi.q_p >= lo.q_p


def test_stages_compose_to_output():
    eff = effective_error_probabilities(ErrorParams(beta=2e-3, delta=1e-3, mu=4e-4))
    s = eff.stages
    assert set(s) == {"distillation", "purification", "cnot_control", "cnot_target", "memory", "connection"}
    assert (s["connection"].b, s["connection"].p) == (eff.q_b, eff.q_p)


def test_saturation_is_reported():
    eff = effective_error_probabilities(ErrorParams(beta=0.5, delta=0.5, mu=0.5))
    assert eff.saturated
    assert eff.q_b == 1.0 and eff.q_p == 1.0


def test_q_ignores_initial_fidelity():
    a = effective_error_probabilities(ErrorParams(f0=0.8))
    b = effective_error_probabilities(ErrorParams(f0=0.99))
    assert a.q == b.q
