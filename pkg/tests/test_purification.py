import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrepeater.purification import (
    BellDiagState,
    LinkParams,
    UnreachableTargetError,
    attempt_time,
    cycle_time,
    failure_probability,
    generation_rate,
    key_rate,
    number_distribution,
    purification_schedule,
    purify_step,
    required_pairs,
)

# ---------------------------------------------------------------------------
# density-matrix oracle: qubits ordered A1, B1, A2, B2 (A = Alice, B = Bob)

_S = 1 / math.sqrt(2)
BELL = np.array([
    [_S, 0, 0, _S],   # Phi+
    [0, _S, _S, 0],   # Psi+
    [0, _S, -_S, 0],  # Psi-
    [_S, 0, 0, -_S],  # Phi-
])
I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]])


def kron(*ops):
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def pair_rho(coeffs):
    return sum(c * np.outer(b, b) for c, b in zip(coeffs, BELL))


def cnot(control, target, n=4):
    dim = 2**n
    u = np.zeros((dim, dim))
    for i in range(dim):
        bits = [(i >> (n - 1 - k)) & 1 for k in range(n)]
        if bits[control]:
            bits[target] ^= 1
        j = sum(b << (n - 1 - k) for k, b in enumerate(bits))
        u[j, i] = 1
    return u


def depolarize_pair(rho, qa, qb, beta):
    """Two-qubit depolarizing channel on qubits qa, qb of a 4-qubit state."""
    t = rho.reshape([2] * 8)
    keep = [q for q in range(4) if q not in (qa, qb)]
    letters = "abcdefgh"
    ket = list(letters[:4])
    bra = list(letters[4:])
    for q in (qa, qb):
        bra[q] = ket[q]
    reduced = np.einsum("".join(ket) + "".join(bra) + "->" + "".join(ket[q] for q in keep) + "".join(bra[q] for q in keep), t)
    mixed = np.einsum("ij,kl,mnop->ikmnjlop", np.eye(2) / 2, np.eye(2) / 2, reduced)
    # mixed is ordered (qa, qb, keep...) on both sides; restore qubit order
    order = [qa, qb] + keep
    perm = [order.index(q) for q in range(4)]
    mixed = mixed.transpose(perm + [p + 4 for p in perm]).reshape(16, 16)
    return (1 - beta) * rho + beta * mixed


def oracle_step(coeffs, beta=0.0, delta=0.0):
    rho = np.kron(pair_rho(coeffs), pair_rho(coeffs))
    rx = lambda s: math.cos(math.pi / 4) * I2 - 1j * s * math.sin(math.pi / 4) * X  # noqa: E731
    u = kron(rx(+1), rx(-1), rx(+1), rx(-1))
    rho = u @ rho @ u.conj().T
    c = cnot(0, 2) @ cnot(1, 3)
    rho = c @ rho @ c.T
    rho = depolarize_pair(rho, 0, 2, beta)
    rho = depolarize_pair(rho, 1, 3, beta)
    flip = 2 * delta * (1 - delta)
    out = np.zeros((4, 4), dtype=complex)
    t = rho.reshape([2] * 8)
    for a in (0, 1):
        for b in (0, 1):
            block = t[:, :, a, b, :, :, a, b].reshape(4, 4)
            out += block * ((1 - flip) if a == b else flip)
    success = np.trace(out).real
    out /= success
    fid = [float((v @ out @ v).real) for v in BELL]
    return success, fid


def random_bell_diag(draw_floats):
    w = np.array(draw_floats) + 1e-3
    return tuple(w / w.sum())


@pytest.mark.parametrize(
    "coeffs",
    [(0.95, 0.05 / 3, 0.05 / 3, 0.05 / 3), (0.7, 0.1, 0.15, 0.05), (0.6, 0.0, 0.4, 0.0)],
)
def test_step_matches_density_matrix_oracle(coeffs):
    r, state = purify_step(BellDiagState(coeffs))
    r_ref, fid_ref = oracle_step(coeffs)
    assert r == pytest.approx(r_ref, abs=1e-10)
    np.testing.assert_allclose(state.coeffs, fid_ref, atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(
    st.lists(st.floats(0, 1), min_size=4, max_size=4),
    st.floats(0, 0.05),
    st.floats(0, 0.05),
)
def test_noisy_step_matches_oracle(weights, beta, delta):
    coeffs = random_bell_diag(weights)
    r, state = purify_step(BellDiagState(coeffs), beta, delta)
    r_ref, fid_ref = oracle_step(coeffs, beta, delta)
    assert r == pytest.approx(r_ref, abs=1e-10)
    np.testing.assert_allclose(state.coeffs, fid_ref, atol=1e-10)


def test_perfect_pair_is_fixed_point():
    r, state = purify_step(BellDiagState((1.0, 0.0, 0.0, 0.0)))
    assert r == pytest.approx(1.0)
    assert state.coeffs == pytest.approx((1.0, 0.0, 0.0, 0.0))


@settings(max_examples=100, deadline=None)
@given(st.floats(0.51, 0.999))
def test_noiseless_step_improves_werner_pairs(f):
    _, state = purify_step(BellDiagState.werner(f))
    assert state.fidelity > f
    assert abs(sum(state.coeffs) - 1) < 1e-12


def test_three_level_schedule():
    sched = purification_schedule(0.95, 1e-3, 1e-3, 3)
    assert sched.final_fidelity == pytest.approx(0.9984, abs=2e-3)
    assert len(sched.success) == 3
    assert all(0.9 < r < 1 for r in sched.success)


def test_invalid_bell_state():
    with pytest.raises(ValueError):
        BellDiagState((0.5, 0.5, 0.5, 0.0))


# ---------------------------------------------------------------------------
# pair-number statistics


def test_distribution_examples():
    assert number_distribution(4, (1.0,), 1).probs == {2: 1.0}
    assert number_distribution(1, (0.3,), 1).probs == {0: 1.0}
    assert number_distribution(2, (0.5,), 1).probs == pytest.approx({0: 0.5, 1: 0.5})


@pytest.mark.parametrize("n0", [0, 1, 7, 64, 301])
@pytest.mark.parametrize("r", [(0.9, 0.8, 0.95), (0.5, 0.5, 0.5), (1.0, 1.0, 1.0)])
def test_distribution_mass_and_mean(n0, r):
    prev = number_distribution(n0, r, 0, tol=0.0)
    for level in range(1, 4):
        dist = number_distribution(n0, r, level, tol=0.0)
        assert sum(dist.probs.values()) == pytest.approx(1.0, abs=1e-12)
        pairs = sum(p * (m // 2) for m, p in prev.probs.items())
        assert dist.mean() == pytest.approx(r[level - 1] * pairs, rel=1e-10, abs=1e-12)
        prev = dist


def test_truncation_is_reported():
    dist = number_distribution(200, (0.9, 0.9, 0.9), 3)
    assert dist.truncated > 0
    assert sum(dist.probs.values()) + dist.truncated == pytest.approx(1.0, abs=1e-12)


def test_failure_examples():
    assert failure_probability(2, 1, (1.0,), 1) == 0.0
    assert failure_probability(2, 1, (0.5,), 1) == pytest.approx(0.5)


def test_failure_monotone_on_grid():
    r = purification_schedule(0.95, 1e-3, 1e-3, 3).success
    grid = np.array([[failure_probability(n0, n, r, 3) for n0 in range(40, 200, 7)] for n in range(1, 12)])
    assert np.all(np.diff(grid, axis=1) <= 1e-15)
    assert np.all(np.diff(grid, axis=0) >= -1e-15)


def test_deterministic_halving():
    for n in (3, 7):
        assert failure_probability(8 * n, n, (1.0, 1.0, 1.0), 3) == 0.0
        assert failure_probability(8 * n - 1, n, (1.0, 1.0, 1.0), 3) == 1.0


def test_required_pairs_examples():
    assert required_pairs(1, (1.0,), 1, 0.1) == 2
    r = purification_schedule(0.95, 1e-3, 1e-3, 3).success
    n0 = required_pairs(7, r, 3, 1e-5)
    assert 12 <= n0 / 7 <= 18
    assert failure_probability(n0, 7, r, 3) <= 1e-5 < failure_probability(n0 - 1, 7, r, 3)


def test_required_pairs_monotone_in_target():
    r = purification_schedule(0.95, 1e-3, 1e-3, 3).success
    values = [required_pairs(10, r, 3, p) for p in (1e-1, 1e-3, 1e-5, 1e-7, 1e-9)]
    assert values == sorted(values)


def test_unreachable_target():
    with pytest.raises(UnreachableTargetError):
        required_pairs(3, (0.0, 0.9), 2, 1e-3)
    with pytest.raises(UnreachableTargetError):
        required_pairs(3, (0.01,), 1, 1e-9, n0_max=1000)


def test_pfail_log_linear_tail():
    r = purification_schedule(0.95, 1e-3, 1e-3, 3).success
    n0 = np.arange(100, 400, 8)
    logp = np.log([failure_probability(int(m), 7, r, 3) for m in n0])
    slope, intercept = np.polyfit(n0, logp, 1)
    resid = logp - (slope * n0 + intercept)
    r2 = 1 - resid.var() / logp.var()
    assert slope < 0 and r2 > 0.98


# ---------------------------------------------------------------------------
# timing


def test_generation_rate():
    link = LinkParams(n_eng=1.0)
    assert generation_rate(link) == pytest.approx(1.0918e3, rel=1e-3)
    assert generation_rate(LinkParams(n_eng=2.0)) == pytest.approx(2 * generation_rate(link))
    lossless = LinkParams(l0_km=1e-6, eta=1.0, l_att_km=20, n_eng=3.0)
    assert generation_rate(lossless) == pytest.approx(2e5 / 1e-6 * 3.0, rel=1e-6)


def test_cycle_time():
    link = LinkParams(n_eng=28.0)
    assert attempt_time(link) == pytest.approx(0.916e-3, rel=1e-3)
    tau, kappa = cycle_time(link, 14)
    assert kappa == 1.0
    assert tau == pytest.approx(attempt_time(link))
    tau, kappa = cycle_time(link, 112)
    assert kappa == 8.0
    assert tau == pytest.approx(7.3e-3, rel=0.01)
    slow = LinkParams(n_eng=28.0, eta=0.15)
    assert cycle_time(slow, 112)[0] == pytest.approx(4 * tau)


def test_key_rate():
    rate = key_rate(7e-3)
    assert rate.raw == pytest.approx(142.857, rel=1e-4)
    assert rate.sifted == pytest.approx(71.43, rel=1e-3)
    assert key_rate(1.0).raw == 1.0
    with pytest.raises(ValueError):
        key_rate(0.0)


def test_link_validation():
    with pytest.raises(ValueError):
        LinkParams(eta=0.0)
    with pytest.raises(ValueError):
        LinkParams(l0_km=-1)
