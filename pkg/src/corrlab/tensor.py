"""Dense linear algebra, tensor-product index arithmetic and seeded sampling.

Everything in corrlab is built on plain complex numpy arrays. Operators on a
tensor product space carry their factor dimensions separately (``dims``), in
the same order as the Kronecker product that built them.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Iterable, Sequence

import numpy as np

#: Relative eigenvalue floor: eigenvalues below ``EIG_FLOOR * lambda_max`` are zero.
EIG_FLOOR = 1e-10


@dataclass(frozen=True)
class TensorSpace:
    """Ordered list of local dimensions of a tensor product space."""

    local_dims: tuple[int, ...]

    def __init__(self, local_dims: Iterable[int]):
        dims = tuple(int(d) for d in local_dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError(f"invalid local dimensions {dims}")
        object.__setattr__(self, "local_dims", dims)

    @property
    def total_dim(self) -> int:
        return prod(self.local_dims)

    def __len__(self) -> int:
        return len(self.local_dims)

    def sub(self, factors: Iterable[int]) -> "TensorSpace":
        return TensorSpace(self.local_dims[k] for k in factors)


# ---------------------------------------------------------------------------
# random numbers


@dataclass(frozen=True)
class RngSeed:
    """Counter-based RNG address: identical (seed, stream path) gives identical draws.

    ``stream(k)`` appends ``k`` to the path, so nested loops (sample, restart)
    get distinct, reproducible streams regardless of execution order.
    """

    seed: int
    stream_id: int = 0
    parent: tuple[int, ...] = ()

    def generator(self) -> np.random.Generator:
        key = tuple(k & (2**64 - 1) for k in self.parent + (self.stream_id,))
        ss = np.random.SeedSequence(self.seed & (2**64 - 1), spawn_key=key)
        return np.random.Generator(np.random.Philox(ss))

    def stream(self, stream_id: int) -> "RngSeed":
        """Child address; used to give every Monte Carlo sample its own stream."""
        return RngSeed(self.seed, stream_id, self.parent + (self.stream_id,))


def as_generator(rng) -> np.random.Generator:
    """Accept an RngSeed, a Generator or an int seed (None means seed 0)."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngSeed):
        return rng.generator()
    return RngSeed(0 if rng is None else int(rng)).generator()


def ginibre(rows: int, cols: int, rng) -> np.ndarray:
    gen = as_generator(rng)
    return (gen.standard_normal((rows, cols)) + 1j * gen.standard_normal((rows, cols))) / np.sqrt(2)


def haar_unitary(dim: int, rng) -> np.ndarray:
    """Haar random unitary from the QR factorisation of a Ginibre matrix.

    The phases of the columns are fixed so that the triangular factor has a
    positive real diagonal, which makes the factorisation unique and the
    output exactly Haar distributed.
    """
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    q, r = np.linalg.qr(ginibre(dim, dim, rng))
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_state(dim: int, rng) -> np.ndarray:
    """Haar random unit vector of length ``dim``."""
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    v = ginibre(dim, 1, rng)[:, 0]
    return v / np.linalg.norm(v)


def random_density(dim: int, rng, rank: int | None = None) -> np.ndarray:
    """Random density matrix (induced measure: partial trace of a Haar state)."""
    rank = dim if rank is None else rank
    g = ginibre(dim, rank, rng)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


# ---------------------------------------------------------------------------
# Hermitian calculus


def hermitize(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().T) / 2


def eigh(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian eigendecomposition of the Hermitian part of ``a`` (ascending)."""
    return np.linalg.eigh(hermitize(np.asarray(a, dtype=complex)))


def floor_eigenvalues(w: np.ndarray) -> np.ndarray:
    """Zero eigenvalues below the global relative floor (and all negative dust)."""
    top = np.max(np.abs(w)) if w.size else 0.0
    out = np.where(w > EIG_FLOOR * top, w, 0.0)
    return out


def numerical_rank(a: np.ndarray) -> int:
    w = np.linalg.eigvalsh(hermitize(a))
    return int(np.count_nonzero(floor_eigenvalues(w)))


def psd_function(a: np.ndarray, fn) -> np.ndarray:
    """Apply ``fn`` to the floored spectrum of a positive semidefinite matrix."""
    w, v = eigh(a)
    w = floor_eigenvalues(w)
    return (v * fn(w)) @ v.conj().T


def psd_sqrt(a: np.ndarray) -> np.ndarray:
    return psd_function(a, np.sqrt)


def support_projector(a: np.ndarray) -> np.ndarray:
    w, v = eigh(a)
    keep = floor_eigenvalues(w) > 0
    vs = v[:, keep]
    return vs @ vs.conj().T


def is_psd(a: np.ndarray, tol: float = 1e-10) -> bool:
    return bool(np.linalg.eigvalsh(hermitize(a))[0] >= -tol)


def schatten_norms(m: np.ndarray) -> tuple[float, float, float]:
    """Return (trace norm, operator norm, Frobenius norm) from singular values."""
    s = np.linalg.svd(np.atleast_2d(m), compute_uv=False)
    if s.size == 0:
        return 0.0, 0.0, 0.0
    return float(s.sum()), float(s[0]), float(np.sqrt(np.sum(s**2)))


def trace_norm(m: np.ndarray) -> float:
    m = np.asarray(m)
    if m.ndim == 2 and m.shape[0] == m.shape[1] and np.allclose(m, m.conj().T, atol=1e-13):
        return float(np.abs(np.linalg.eigvalsh(hermitize(m))).sum())
    return float(np.linalg.svd(m, compute_uv=False).sum())


def polar_unitary(m: np.ndarray) -> np.ndarray:
    """Unitary ``W`` with ``tr(W m) = ||m||_1`` (conjugate polar factor)."""
    u, _, vh = np.linalg.svd(m)
    return (u @ vh).conj().T


# ---------------------------------------------------------------------------
# tensor-product index arithmetic


def _check_factors(dims: Sequence[int], factors: Iterable[int]) -> list[int]:
    out = []
    for k in factors:
        if not 0 <= k < len(dims):
            raise IndexError(f"factor {k} out of range for {len(dims)} factors")
        out.append(int(k))
    if len(set(out)) != len(out):
        raise ValueError("repeated factor index")
    return out


def partial_trace(op: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every factor not in ``keep``.

    Kept factors appear in the result in ascending order. ``op`` may also be a
    state vector, in which case the reduced density matrix is returned.
    """
    dims = list(dims)
    keep = sorted(_check_factors(dims, keep))
    n = len(dims)
    drop = [k for k in range(n) if k not in keep]
    dk = prod(dims[k] for k in keep) if keep else 1
    op = np.asarray(op)
    if op.ndim == 1:
        psi = op.reshape(dims).transpose(keep + drop).reshape(dk, -1)
        return psi @ psi.conj().T
    if op.shape != (prod(dims), prod(dims)):
        raise ValueError(f"operator shape {op.shape} does not match dims {dims}")
    t = op.reshape(dims + dims)
    t = t.transpose(keep + drop + [n + k for k in keep] + [n + k for k in drop])
    dd = prod(dims[k] for k in drop) if drop else 1
    t = t.reshape(dk, dd, dk, dd)
    return np.einsum("ajbj->ab", t)


def permute_factors(op: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: new factor ``i`` is old factor ``order[i]``."""
    dims = list(dims)
    order = _check_factors(dims, order)
    if len(order) != len(dims):
        raise ValueError("order must be a permutation of all factors")
    n = len(dims)
    op = np.asarray(op)
    if op.ndim == 1:
        return op.reshape(dims).transpose(order).reshape(-1)
    t = op.reshape(dims + dims).transpose(list(order) + [n + k for k in order])
    return t.reshape(op.shape)


def kron(*ops: np.ndarray) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex) if np.ndim(ops[0]) == 2 else np.ones(1, dtype=complex)
    for o in ops:
        out = np.kron(out, o)
    return out


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def maximally_entangled(d: int) -> np.ndarray:
    """Vector (1/sqrt d) sum_k |k>|k>."""
    return np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)


def purify(rho: np.ndarray) -> np.ndarray:
    """Purification |psi>_{S E} with the environment dimension equal to rank(rho)."""
    w, v = eigh(rho)
    w = floor_eigenvalues(w)
    keep = w > 0
    w, v = w[keep], v[:, keep]
    return (v * np.sqrt(w)).reshape(-1)
