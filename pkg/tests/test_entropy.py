import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import minimize

from corrlab import entropy as en
from corrlab.metrics import purified_distance
from corrlab.tensor import (
    RngSeed,
    haar_state,
    kron,
    maximally_entangled,
    partial_trace,
    projector,
    random_density,
)


def _shannon_bits(p):
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def test_von_neumann_examples():
    assert abs(en.von_neumann(projector(haar_state(5, RngSeed(1))))) <= 1e-12
    for d in (2, 3, 7):
        assert np.isclose(en.von_neumann(np.eye(d) / d), np.log2(d))
    assert np.isclose(en.von_neumann(np.diag([0.75, 0.25])), 0.81128, atol=1e-5)


def test_hmax_examples():
    rep = en.hmax_smooth(np.eye(4) / 4, 0.0)
    assert rep.value_lower == rep.value_upper == 2.0
    rep = en.hmax_smooth(np.diag([0.9, 0.05, 0.03, 0.02]), 0.3)
    assert rep.value_upper == 1.0 and rep.value_lower == 0.0
    pure = projector(haar_state(6, RngSeed(2)))
    for eps in (0.0, 0.1, 0.9):
        rep = en.hmax_smooth(pure, eps)
        assert rep.value_lower == rep.value_upper == 0.0


@given(st.integers(1, 10), st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_hmax_zero_eps_is_log_rank(dim, rank, seed):
    rank = min(rank, dim)
    rho = random_density(dim, RngSeed(seed), rank=rank)
    rep = en.hmax_smooth(rho, 0.0)
    assert rep.value_upper == rep.value_lower == np.log2(rank)


@given(st.integers(2, 10), st.floats(0.001, 0.45), st.integers(0, 2**32 - 1))
def test_hmax_interval_and_certificate(dim, eps, seed):
    rho = random_density(dim, RngSeed(seed))
    rep = en.hmax_smooth(rho, eps)
    assert rep.value_lower <= rep.value_upper
    assert en.verify_hmax_upper(rho, rep)
    # the truncation behind the upper end lies in the eps-ball
    t = en.truncated_state(rho, rep.certificate_upper["rank"])
    assert purified_distance(rho, t) <= eps + 1e-9


def test_hmax_lower_end_against_brute_force():
    # any state of rank r has trace distance >= 1 - (top-r mass) from rho; purified
    # distance <= eps then forces 1 - mass <= 2 eps, so rank r is excluded when
    # the top-r mass is below 1 - 2 eps
    w = np.array([0.5, 0.2, 0.15, 0.1, 0.05])
    for eps in (0.05, 0.1, 0.2):
        rep = en.hmax_from_spectrum(w, eps)
        r_min = next(r for r in range(1, 6) if w[:r].sum() >= 1 - 2 * eps - 1e-13)
        assert rep.value_lower == np.log2(r_min)


def test_hmin_closed_forms():
    for d in (2, 3, 4):
        sol = en.hmin_conditional(projector(maximally_entangled(d)), (d, d))
        assert abs(sol.value + np.log2(d)) <= 1e-6
        assert sol.gap <= 1e-8
    ra, rb = random_density(3, RngSeed(3)), random_density(2, RngSeed(4))
    sol = en.hmin_conditional(np.kron(ra, rb), (3, 2))
    assert abs(sol.value + np.log2(np.linalg.eigvalsh(ra)[-1])) <= 1e-6
    sol = en.hmin_conditional(np.kron(np.eye(2) / 2, rb), (2, 2))
    assert abs(sol.value - 1.0) <= 1e-6
    sol = en.hmin_conditional(ra, (3, 1))
    assert abs(sol.value + np.log2(np.linalg.eigvalsh(ra)[-1])) <= 1e-6


def test_hmin_product_certificates():
    # primal sigma = lambda_max(rho_A) rho_B and dual X = P_max (x) rho_B^0 support
    ra, rb = random_density(2, RngSeed(5)), random_density(3, RngSeed(6))
    lam = np.linalg.eigvalsh(ra)[-1]
    sigma = lam * rb
    slack = np.kron(np.eye(2), sigma) - np.kron(ra, rb)
    assert np.linalg.eigvalsh(slack)[0] >= -1e-12
    sol = en.hmin_conditional(np.kron(ra, rb), (2, 3))
    assert sol.primal_value <= np.trace(sigma).real + 1e-8


@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_hmin_gap_and_feasibility(da, db, seed):
    rho = random_density(da * db, RngSeed(seed))
    sol = en.hmin_conditional(rho, (da, db))
    assert sol.gap <= 1e-8
    assert sol.verify(rho, 1e-9)
    # H_min(A|B) lies between -log2 |A| and log2 |A|
    assert -np.log2(da) - 1e-6 <= sol.value <= np.log2(da) + 1e-6


def test_hmin_rejects_large_instances():
    with pytest.raises(ValueError):
        en.hmin_conditional(np.eye(81) / 81, (9, 9))


def test_hmax_conditional_closed_forms():
    for d in (2, 3):
        psi = maximally_entangled(d)  # A and C, trivial B in the middle
        rep = en.hmax_conditional(psi, (d, 1, d))
        assert abs(rep.value_upper + np.log2(d)) <= 1e-6
    psi = kron(haar_state(2, RngSeed(7)), haar_state(6, RngSeed(8)))
    rep = en.hmax_conditional(psi, (2, 2, 3))
    assert abs(rep.value_upper) <= 1e-6 and abs(rep.value_lower) <= 1e-6


def _search_hmax_given_c(rho_ac):
    def neg(params):
        r = np.tanh(params[0]) * 0.5 + 0.5
        th, ph = params[1], params[2]
        bloch = r * np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
        sigma = 0.5 * np.array([[1 + bloch[2], bloch[0] - 1j * bloch[1]], [bloch[0] + 1j * bloch[1], 1 - bloch[2]]])
        return -en.conditional_fidelity_objective(rho_ac, (2, 2), sigma)

    gen = RngSeed(9).generator()
    runs = [minimize(neg, gen.uniform(-2, 2, 3), method="Nelder-Mead",
                     options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 5000}) for _ in range(12)]
    return -min(r.fun for r in runs)


@pytest.mark.parametrize("seed", range(3))
def test_hmax_conditional_duality_against_search(seed):
    psi = haar_state(8, RngSeed(10, seed))
    rep = en.hmax_conditional(psi, (2, 2, 2))
    found = _search_hmax_given_c(partial_trace(psi, (2, 2, 2), [0, 2]))
    assert found <= rep.value_upper + 1e-6
    assert abs(found - rep.value_upper) <= 1e-5


def test_smax_examples():
    rho = random_density(3, RngSeed(11))
    assert abs(en.smax_relative(rho, rho)) <= 1e-9
    assert np.isclose(en.smax_relative(np.diag([1.0, 0.0]), np.eye(2) / 2), 1.0)
    assert abs(en.smax_relative(np.eye(4) / 4, np.eye(4) / 4)) <= 1e-12
    with pytest.raises(en.SupportError):
        en.smax_relative(np.eye(2) / 2, np.diag([1.0, 0.0]))


@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_smax_bisection_agrees(dim, seed):
    rho = random_density(dim, RngSeed(seed, 0))
    sigma = random_density(dim, RngSeed(seed, 1))
    assert abs(en.smax_relative(rho, sigma) - en.smax_relative_bisection(rho, sigma)) <= 1e-7


def test_substate_identity():
    # subnormalized smoothing: (1 - eps^2) rho sits exactly on the ball boundary
    rho = random_density(3, RngSeed(12))
    res = en.substate_smoothing(rho, rho, 0.1)
    assert abs(res.lam - np.log2(1 - 0.1**2)) <= 1e-8
    assert np.allclose(res.smoothed, (1 - 0.1**2) * rho)


def _diagonal_scan(p, q, eps, grid=1001):
    """min over diagonal subnormalized x in the eps-ball of log2 max_i x_i / q_i (two levels)."""
    a = np.linspace(0, 1, grid)
    xa, xb = np.meshgrid(a, a, indexing="ij")
    ok = xa + xb <= 1 + 1e-12
    # rho is normalized, so the generalized fidelity has no subnormalization term
    fid = np.sqrt(p[0] * xa) + np.sqrt(p[1] * xb)
    inside = ok & (np.sqrt(np.clip(1 - fid**2, 0, None)) <= eps)
    with np.errstate(divide="ignore"):
        vals = np.log2(np.maximum(xa / q[0], xb / q[1]))
    return vals[inside].min()


def test_substate_commuting_example_against_diagonal_scan():
    rho, sigma, eps = np.diag([0.99, 0.01]), np.eye(2) / 2, 0.2
    res = en.substate_smoothing(rho, sigma, eps)
    assert res.distance <= eps + 1e-9 and res.within_guarantee
    best = _diagonal_scan(np.array([0.99, 0.01]), np.array([0.5, 0.5]), eps)
    # the exact commuting smoothing meets the grid optimum up to grid resolution
    assert abs(res.lam - best) <= 2e-3
    assert res.lam <= best + 1e-9


def _commuting_pair(k):
    gen = RngSeed(13).stream(k).generator()
    d = int(gen.integers(2, 6))
    p, q = gen.dirichlet(np.ones(d)), gen.dirichlet(np.ones(d))
    return p, q, float(gen.uniform(0.05, 0.5))


def test_substate_bound_on_commuting_pairs():
    # the bound holds in the fidelity convention F^2 >= 1 - eps, i.e. a smoothing
    # ball of purified-distance radius sqrt(eps)
    for k in range(200):
        p, q, eps = _commuting_pair(k)
        res = en.substate_smoothing(np.diag(p), np.diag(q), np.sqrt(eps))
        rel = float(np.sum(p * np.log2(p / q)))
        assert res.lam <= rel / eps + np.log2(1 / (1 - eps)) + 1e-9
        assert res.distance <= np.sqrt(eps) + 1e-9 and res.within_guarantee


def test_substate_bound_fails_with_radius_eps():
    # with purified-distance radius eps the bound can fail even for the exact smoothing
    p, q, eps = _commuting_pair(1)
    res = en.substate_smoothing(np.diag(p), np.diag(q), eps)
    rel = float(np.sum(p * np.log2(p / q)))
    bound = rel / eps + np.log2(1 / (1 - eps))
    assert res.lam > bound + 0.5
    assert np.isclose(res.lam, 4.9522, atol=1e-3) and np.isclose(bound, 4.3826, atol=1e-3)


def test_substate_exact_on_three_levels_against_optimizer():
    p, q, eps = np.array([0.6, 0.3, 0.1]), np.array([0.2, 0.3, 0.5]), 0.15
    res = en.substate_smoothing(np.diag(p), np.diag(q), eps)
    # variables (x_1, x_2, x_3, lam): minimize lam with x_i <= 2^lam q_i inside the ball
    cons = [
        {"type": "ineq", "fun": lambda z: 2.0 ** z[3] * q - z[:3]},
        {"type": "ineq", "fun": lambda z: 1 - z[:3].sum()},
        {"type": "ineq", "fun": lambda z: np.sqrt(p * np.clip(z[:3], 0, None)).sum() - np.sqrt(1 - eps**2)},
    ]
    gen = RngSeed(22).generator()
    found = []
    for _ in range(10):
        x0 = np.append(gen.dirichlet(np.ones(3)), 2.0)
        r = minimize(lambda z: z[3], x0, method="SLSQP", constraints=cons,
                     bounds=[(0, 1)] * 3 + [(-10, 10)], options={"ftol": 1e-12, "maxiter": 500})
        if r.success:
            found.append(r.fun)
    assert found
    assert abs(min(found) - res.lam) <= 1e-6


def test_substate_noncommuting_truncation_stays_in_ball():
    eps = 0.2
    flagged_eps, flagged_sqrt, outside_guarantee = 0, 0, 0
    for k in range(30):
        rho, sigma = random_density(3, RngSeed(23, k)), random_density(3, RngSeed(24, k))
        bound = en.relative_entropy(rho, sigma) / eps + np.log2(1 / (1 - eps))
        small = en.substate_smoothing(rho, sigma, eps)
        large = en.substate_smoothing(rho, sigma, np.sqrt(eps))
        for res, radius in ((small, eps), (large, np.sqrt(eps))):
            assert res.distance <= radius + 1e-9
            assert res.lam <= en.smax_relative(rho, sigma) + 1e-9
            # the smoothed state is in the ball, so its exact S_max is always a valid upper bound
            assert np.isclose(res.smax_smoothed, en.smax_relative(res.smoothed, sigma))
        assert small.within_guarantee
        outside_guarantee += not large.within_guarantee
        flagged_eps += small.lam > bound + 1e-9
        flagged_sqrt += large.lam > bound + 1e-9
    # truncation is not optimal for non-commuting pairs, so the bound is flagged rather than
    # assumed; regression counts for this seeded batch
    assert (flagged_eps, flagged_sqrt, outside_guarantee) == (2, 0, 1)


def test_relative_entropy_matches_shannon_for_diagonals():
    p, q = np.array([0.7, 0.2, 0.1]), np.array([0.3, 0.3, 0.4])
    assert np.isclose(en.relative_entropy(np.diag(p), np.diag(q)), np.sum(p * np.log2(p / q)))


def test_mutual_information_examples():
    prod = np.kron(random_density(2, RngSeed(14)), random_density(3, RngSeed(15)))
    assert abs(en.mutual_information(prod, (2, 3))) <= 1e-9
    assert np.isclose(en.mutual_information(projector(maximally_entangled(2)), (2, 2)), 2.0)
    cc = np.diag([0.5, 0, 0, 0.5])
    assert np.isclose(en.mutual_information(cc, (2, 2)), 2 * _shannon_bits([0.5, 0.5]) - _shannon_bits([0.5, 0.5]))


@given(st.integers(2, 4), st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_mutual_information_range(da, db, seed):
    rho = random_density(da * db, RngSeed(seed))
    mi = en.mutual_information(rho, (da, db))
    assert -1e-9 <= mi <= 2 * min(np.log2(da), np.log2(db)) + 1e-9


def test_imax_examples():
    psi = kron(haar_state(2, RngSeed(16)), haar_state(2, RngSeed(17)), haar_state(2, RngSeed(18)))
    assert abs(en.imax_upper(psi, (2, 2, 2), 0.0)) <= 1e-6
    for d in (2, 3):
        psi = maximally_entangled(d)
        assert abs(en.imax_upper(psi, (d, d, 1), 0.0) - 2 * np.log2(d)) <= 1e-6


def test_imax_monotone_in_eps():
    for k in range(5):
        psi = haar_state(16, RngSeed(19, k))
        assert en.imax_upper(psi, (2, 2, 4), 0.1) <= en.imax_upper(psi, (2, 2, 4), 0.0) + 1e-9


@given(st.integers(2, 8), st.integers(0, 2**32 - 1), st.floats(0.0, 0.5))
def test_fannes_inequality(d, seed, t):
    rho = random_density(d, RngSeed(seed, 0))
    sigma = (1 - t**2) * rho + t**2 * random_density(d, RngSeed(seed, 1))
    dist = purified_distance(rho, sigma)
    if dist <= 0.5:
        assert abs(en.von_neumann(rho) - en.von_neumann(sigma)) <= en.fannes_bound(d, dist) + 1e-9


@given(st.integers(2, 4), st.integers(2, 4), st.integers(0, 2**32 - 1),
       st.tuples(st.floats(0.01, 0.2), st.floats(0.01, 0.2), st.floats(0.01, 0.2)))
def test_subadditivity_direction_safe(da, db, seed, epss):
    e1, e2, e3 = epss
    rho = random_density(da * db, RngSeed(seed))
    lhs = en.hmax_smooth(rho, e1 + e2 + 2 * e3).value_lower
    rhs = (en.hmax_smooth(partial_trace(rho, (da, db), [0]), e2).value_upper
           + en.hmax_smooth(partial_trace(rho, (da, db), [1]), e3).value_upper + np.log2(2 / e1**2))
    assert lhs <= rhs + 1e-9


@given(st.integers(1, 12), st.sampled_from([0.01, 0.1]), st.integers(0, 2**32 - 1))
def test_quantum_equipartition(n, eps, seed):
    pi = random_density(2, RngSeed(seed))
    w = en.spectrum(pi)
    lhs = en.hmax_from_spectrum(en.product_spectrum([w] * n), eps).value_lower
    assert lhs <= n * en.von_neumann(pi) + 8 * np.sqrt(n * np.log2(2 / eps**2)) + 1e-9


def test_product_spectrum_matches_kron():
    a, b = random_density(2, RngSeed(20)), random_density(3, RngSeed(21))
    direct = np.sort(np.linalg.eigvalsh(np.kron(a, b)))[::-1]
    assert np.allclose(en.product_spectrum([en.spectrum(a), en.spectrum(b)]), direct)


def test_fannes_bound_value():
    # log2(3) * 0.1 + h(0.1)
    assert np.isclose(en.fannes_bound(4, 0.1), np.log2(3) * 0.1 + 0.4689955935892812)
