import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from corrlab.tensor import (
    RngSeed,
    TensorSpace,
    eigh,
    haar_state,
    haar_unitary,
    kron,
    maximally_entangled,
    partial_trace,
    permute_factors,
    projector,
    purify,
    random_density,
    schatten_norms,
    trace_norm,
)


def _ptrace_loops(rho, dims, keep):
    """Reference partial trace by explicit index sums over the traced factors."""
    n = len(dims)
    keep = sorted(keep)
    drop = [k for k in range(n) if k not in keep]
    dk = int(np.prod([dims[k] for k in keep])) if keep else 1
    out = np.zeros((dk, dk), dtype=complex)
    t = rho.reshape(list(dims) * 2)
    for kept_row in np.ndindex(*[dims[k] for k in keep]):
        for kept_col in np.ndindex(*[dims[k] for k in keep]):
            total = 0
            for traced in np.ndindex(*[dims[k] for k in drop]):
                row, col = [0] * n, [0] * n
                for k, i, j in zip(keep, kept_row, kept_col):
                    row[k], col[k] = i, j
                for k, i in zip(drop, traced):
                    row[k] = col[k] = i
                total += t[tuple(row + col)]
            r = np.ravel_multi_index(kept_row, [dims[k] for k in keep]) if keep else 0
            c = np.ravel_multi_index(kept_col, [dims[k] for k in keep]) if keep else 0
            out[r, c] = total
    return out


def test_partial_trace_keep_all_is_identity_map():
    rho = random_density(12, RngSeed(1))
    assert np.allclose(partial_trace(rho, (3, 4), [0, 1]), rho)


def test_partial_trace_product():
    ra, rb = random_density(3, RngSeed(2)), random_density(4, RngSeed(3))
    assert np.allclose(partial_trace(np.kron(ra, rb), (3, 4), [0]), ra)
    assert np.allclose(partial_trace(np.kron(ra, rb), (3, 4), [1]), rb)


def test_partial_trace_bell_state():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    rho = np.outer(bell, bell)
    # direct 4x4 computation: rho_A[i, j] = sum_k rho[(i,k), (j,k)]
    direct = np.array([[rho[0, 0] + rho[1, 1], rho[0, 2] + rho[1, 3]],
                       [rho[2, 0] + rho[3, 1], rho[2, 2] + rho[3, 3]]])
    assert np.allclose(direct, np.eye(2) / 2)
    assert np.allclose(partial_trace(rho, (2, 2), [0]), direct)
    assert np.allclose(partial_trace(bell, (2, 2), [0]), direct)


def test_partial_trace_rejects_bad_index():
    with pytest.raises(IndexError):
        partial_trace(np.eye(4) / 4, (2, 2), [2])


@given(st.lists(st.integers(1, 3), min_size=2, max_size=4), st.integers(0, 2**32 - 1), st.data())
def test_partial_trace_matches_loops_and_preserves_trace(dims, seed, data):
    keep = data.draw(st.lists(st.sampled_from(range(len(dims))), unique=True))
    rho = random_density(int(np.prod(dims)), RngSeed(seed))
    red = partial_trace(rho, dims, keep)
    assert np.allclose(red, _ptrace_loops(rho, dims, keep), atol=1e-12)
    assert np.isclose(np.trace(red).real, 1.0)
    assert np.linalg.eigvalsh(red)[0] >= -1e-12


@given(st.lists(st.integers(1, 3), min_size=2, max_size=4), st.integers(0, 2**32 - 1), st.data())
def test_partial_trace_commutes_with_permutation(dims, seed, data):
    n = len(dims)
    order = data.draw(st.permutations(range(n)))
    keep = data.draw(st.lists(st.sampled_from(range(n)), unique=True, min_size=1))
    rho = random_density(int(np.prod(dims)), RngSeed(seed))
    moved = permute_factors(rho, dims, order)
    new_dims = [dims[k] for k in order]
    # old factor order[i] sits at position i after the permutation
    new_keep = [order.index(k) for k in keep]
    a = partial_trace(moved, new_dims, new_keep)
    b = partial_trace(rho, dims, keep)
    kept_sorted_old = sorted(keep)
    kept_in_new_order = [order[i] for i in sorted(new_keep)]
    perm = [kept_sorted_old.index(k) for k in kept_in_new_order]
    assert np.allclose(a, permute_factors(b, [dims[k] for k in kept_sorted_old], perm), atol=1e-12)


def test_haar_unitary_dim_one_is_a_phase():
    u = haar_unitary(1, RngSeed(4))
    assert u.shape == (1, 1)
    assert np.isclose(abs(u[0, 0]), 1.0)


@pytest.mark.parametrize("dim", [1, 2, 5, 16, 64])
def test_haar_unitary_is_unitary(dim):
    u = haar_unitary(dim, RngSeed(5, dim))
    assert np.linalg.norm(u.conj().T @ u - np.eye(dim)) <= 1e-12


def test_haar_unitary_second_moment():
    vals = [abs(haar_unitary(4, RngSeed(6).stream(k))[0, 0]) ** 2 for k in range(10_000)]
    assert abs(np.mean(vals) - 0.25) <= 0.02


def test_haar_unitary_left_invariance():
    v = haar_unitary(3, RngSeed(7))
    a = [abs(haar_unitary(3, RngSeed(8).stream(k))[0, 0]) ** 2 for k in range(3000)]
    b = [abs((v @ haar_unitary(3, RngSeed(9).stream(k)))[0, 0]) ** 2 for k in range(3000)]
    assert stats.ks_2samp(a, b).pvalue > 1e-3
    # |U_11|^2 is Beta(1, d-1) distributed for Haar unitaries
    assert stats.kstest(a, stats.beta(1, 2).cdf).pvalue > 1e-3


def test_haar_state_norm_and_moment():
    assert np.isclose(abs(haar_state(1, RngSeed(10))[0]), 1.0)
    samples = [haar_state(8, RngSeed(11).stream(k)) for k in range(10_000)]
    assert all(abs(np.linalg.norm(s) - 1) <= 1e-12 for s in samples[:200])
    assert abs(np.mean([abs(s[0]) ** 2 for s in samples]) - 1 / 8) <= 0.01


def test_rng_streams_reproducible_and_distinct():
    a = RngSeed(3, 5).generator().standard_normal(4)
    b = RngSeed(3, 5).generator().standard_normal(4)
    c = RngSeed(3, 6).generator().standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.allclose(a, c)
    # nested streams differ from flat ones with the same last id
    assert not np.allclose(RngSeed(3).stream(1).stream(2).generator().standard_normal(4),
                           RngSeed(3).stream(2).generator().standard_normal(4))


def test_rng_independent_of_thread_count():
    from concurrent.futures import ThreadPoolExecutor

    seeds = [RngSeed(12).stream(k) for k in range(32)]
    serial = [haar_state(6, s) for s in seeds]
    with ThreadPoolExecutor(4) as ex:
        threaded = list(ex.map(lambda s: haar_state(6, s), seeds))
    assert all(np.array_equal(a, b) for a, b in zip(serial, threaded))


@pytest.mark.parametrize("d", [1, 2, 7])
def test_schatten_identity(d):
    assert np.allclose(schatten_norms(np.eye(d)), (d, 1, np.sqrt(d)))


def test_schatten_examples():
    assert np.allclose(schatten_norms(projector(haar_state(5, RngSeed(13)))), (1, 1, 1))
    assert np.allclose(schatten_norms(np.diag([3.0, -4.0])), (7, 4, 5))


@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_trace_norm_dominates_operator_norm(r, c, seed):
    g = RngSeed(seed).generator()
    m = g.standard_normal((r, c)) + 1j * g.standard_normal((r, c))
    if r == c and seed % 2:
        m = m + m.conj().T
    t, o, f = schatten_norms(m)
    assert t >= o - 1e-12 and t >= f - 1e-12 and f >= o - 1e-12
    assert np.isclose(trace_norm(m), t)


def test_trace_norm_equals_operator_norm_for_rank_one():
    v = haar_state(4, RngSeed(14))
    t, o, _ = schatten_norms(3 * projector(v))
    assert np.isclose(t, o)


@pytest.mark.parametrize("dim", [2, 16, 64, 256])
def test_eigh_reconstructs(dim):
    rho = random_density(dim, RngSeed(15, dim))
    w, v = eigh(rho)
    assert np.linalg.norm(v @ np.diag(w) @ v.conj().T - rho) <= 1e-10


def test_purify_reproduces_state():
    rho = random_density(5, RngSeed(16), rank=3)
    psi = purify(rho)
    assert psi.size == 15
    assert np.allclose(partial_trace(psi, (5, 3), [0]), rho)


def test_kron_and_maximally_entangled():
    phi = maximally_entangled(3)
    assert np.isclose(np.linalg.norm(phi), 1)
    assert np.allclose(partial_trace(phi, (3, 3), [1]), np.eye(3) / 3)
    assert np.allclose(kron(np.eye(2), np.eye(3)), np.eye(6))


def test_tensor_space():
    sp = TensorSpace([2, 3, 4])
    assert sp.total_dim == 24 and len(sp) == 3
    assert sp.sub([2, 0]).local_dims == (4, 2)
    with pytest.raises(ValueError):
        TensorSpace([2, 0])
