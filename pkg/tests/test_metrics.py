import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import minimize

from corrlab.metrics import (
    DensityOperator,
    binary_entropy,
    d1_distance,
    d1_variational,
    fidelity,
    generalized_fidelity,
    purified_distance,
)
from corrlab.tensor import RngSeed, haar_state, partial_trace, projector, purify, random_density

ZERO = np.diag([1.0, 0.0])
ONE = np.diag([0.0, 1.0])


def _fidelity_sqrtm(rho, sigma):
    s = sla.sqrtm(rho)
    return float(np.trace(sla.sqrtm(s @ sigma @ s)).real)


def test_density_operator_validation():
    with pytest.raises(ValueError):
        DensityOperator(np.diag([1.0, -0.1]))
    with pytest.raises(ValueError):
        DensityOperator(np.eye(2))
    op = DensityOperator(0.5 * ZERO)
    assert not op.normalized and np.isclose(op.trace, 0.5)
    with pytest.raises(ValueError):
        DensityOperator(np.eye(4) / 4, dims=(2, 3))


def test_fidelity_examples():
    rho = random_density(3, RngSeed(1))
    assert np.isclose(fidelity(rho, rho), 1.0)
    assert np.isclose(fidelity(ZERO, ONE), 0.0)
    assert np.isclose(fidelity(ZERO, np.eye(2) / 2), np.sqrt(0.5))


def test_fidelity_matches_sqrtm_oracle():
    for k in range(20):
        g = RngSeed(2).stream(k)
        rho, sigma = random_density(4, g.stream(0)), random_density(4, g.stream(1))
        assert abs(fidelity(rho, sigma) - _fidelity_sqrtm(rho, sigma)) <= 1e-7
        assert np.isclose(fidelity(rho, sigma), fidelity(sigma, rho))


def test_generalized_fidelity_examples():
    rho, sigma = random_density(2, RngSeed(3)), random_density(2, RngSeed(4))
    assert np.isclose(generalized_fidelity(rho, sigma), fidelity(rho, sigma))
    assert np.isclose(generalized_fidelity(0.5 * ZERO, 0.5 * ONE), 0.5)
    t = 0.7
    assert np.isclose(generalized_fidelity(t * rho, t * rho), 1.0)


def test_purified_distance_examples():
    rho = random_density(3, RngSeed(5))
    assert np.isclose(purified_distance(rho, rho), 0.0, atol=1e-7)
    assert np.isclose(purified_distance(ZERO, ONE), 1.0)
    assert np.isclose(purified_distance(ZERO, np.eye(2) / 2), np.sqrt(0.5))


def test_trace_distance_examples():
    rho = random_density(3, RngSeed(6))
    assert np.isclose(d1_distance(rho, rho), 0.0)
    assert np.isclose(d1_distance(ZERO, np.eye(2) / 2), 0.5)
    assert np.isclose(d1_distance(rho, 0.9 * rho), 0.1)


def test_d1_variational_matches_distance_for_normalized():
    for k in range(20):
        g = RngSeed(7).stream(k)
        rho, sigma = random_density(5, g.stream(0)), random_density(5, g.stream(1))
        val, m = d1_variational(rho, sigma)
        assert np.isclose(val, d1_distance(rho, sigma))
        assert np.isclose(abs(np.trace(m @ (rho - sigma))), val)
        w = np.linalg.eigvalsh(m)
        assert w[0] >= -1e-12 and w[-1] <= 1 + 1e-12


def _pair(seed, sub):
    gen = RngSeed(seed).generator()
    d = int(gen.integers(2, 9))
    rho = random_density(d, gen, rank=int(gen.integers(1, d + 1)))
    sigma = random_density(d, gen, rank=int(gen.integers(1, d + 1)))
    if sub:
        rho, sigma = rho * gen.uniform(0.3, 1), sigma * gen.uniform(0.3, 1)
    return rho, sigma


@given(st.integers(0, 2**32 - 1), st.booleans())
def test_distance_sandwich(seed, sub):
    rho, sigma = _pair(seed, sub)
    d1, dp = d1_distance(rho, sigma), purified_distance(rho, sigma)
    assert d1 <= dp + 1e-9
    assert dp <= np.sqrt(2 * d1) + 1e-9


@given(st.integers(0, 2**32 - 1), st.booleans())
def test_purified_distance_is_a_metric(seed, sub):
    rho, sigma = _pair(seed, sub)
    tau = random_density(rho.shape[0], RngSeed(seed, 1)) * (0.8 if sub else 1.0)
    a, b, c = purified_distance(rho, sigma), purified_distance(sigma, tau), purified_distance(rho, tau)
    assert np.isclose(a, purified_distance(sigma, rho), atol=1e-8)
    assert c <= a + b + 1e-7


@given(st.integers(2, 3), st.integers(2, 3), st.integers(0, 2**32 - 1))
def test_purified_distance_monotone_under_partial_trace(da, db, seed):
    rho = random_density(da * db, RngSeed(seed, 0))
    sigma = random_density(da * db, RngSeed(seed, 1))
    full = purified_distance(rho, sigma)
    for keep in ([0], [1]):
        part = purified_distance(partial_trace(rho, (da, db), keep), partial_trace(sigma, (da, db), keep))
        assert part <= full + 1e-9


def _unitary(params):
    a, b, c, d = params
    h = np.array([[a, b + 1j * c], [b - 1j * c, d]])
    return sla.expm(1j * h)


@pytest.mark.parametrize("seed", range(5))
def test_uhlmann_search(seed):
    rho, sigma = random_density(2, RngSeed(8, seed)), random_density(2, RngSeed(9, seed))
    psi = purify(rho).reshape(2, 2)
    phi = purify(sigma).reshape(2, 2)

    def dist(params):
        moved = phi @ _unitary(params).T
        return np.sqrt(max(1 - abs(np.vdot(psi, moved)) ** 2, 0.0))

    gen = RngSeed(10, seed).generator()
    best = min(minimize(dist, gen.uniform(-np.pi, np.pi, 4), method="Nelder-Mead",
                        options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000}).fun for _ in range(8))
    assert abs(best - purified_distance(rho, sigma)) <= 1e-6


def test_pure_state_closed_forms():
    u, v = haar_state(4, RngSeed(11)), haar_state(4, RngSeed(12))
    overlap = abs(np.vdot(u, v))
    assert np.isclose(fidelity(projector(u), projector(v)), overlap)
    assert np.isclose(d1_distance(projector(u), projector(v)), np.sqrt(1 - overlap**2))
    assert np.isclose(purified_distance(projector(u), projector(v)), np.sqrt(1 - overlap**2))


def test_binary_entropy():
    assert binary_entropy(0) == 0 and binary_entropy(1) == 0
    assert np.isclose(binary_entropy(0.5), 1.0)
    assert np.isclose(binary_entropy(0.25), 0.8112781244591328)
