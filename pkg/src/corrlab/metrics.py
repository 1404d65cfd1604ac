"""Fidelity, purified distance and trace distance on (sub)normalized states."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tensor import EIG_FLOOR, TensorSpace, hermitize, psd_sqrt, trace_norm

TRACE_TOL = 1e-10


@dataclass(frozen=True)
class DensityOperator:
    """Positive semidefinite operator with trace at most one.

    Subnormalized operators are allowed; ``normalized`` tells them apart.
    """

    matrix: np.ndarray
    space: TensorSpace

    def __init__(self, matrix, dims: Sequence[int] | None = None):
        m = hermitize(np.asarray(matrix, dtype=complex))
        dims = (m.shape[0],) if dims is None else tuple(dims)
        space = TensorSpace(dims)
        if m.shape != (space.total_dim, space.total_dim):
            raise ValueError(f"matrix shape {m.shape} does not match dims {dims}")
        w = np.linalg.eigvalsh(m)
        if w[0] < -TRACE_TOL:
            raise ValueError(f"operator is not positive semidefinite (min eigenvalue {w[0]:.3e})")
        if w.sum() > 1 + TRACE_TOL:
            raise ValueError(f"trace {w.sum():.12f} exceeds one")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "space", space)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def normalized(self) -> bool:
        return abs(self.trace - 1) <= TRACE_TOL

    @property
    def dims(self) -> tuple[int, ...]:
        return self.space.local_dims


def _mat(x) -> np.ndarray:
    return x.matrix if isinstance(x, DensityOperator) else np.asarray(x, dtype=complex)


def _pair(rho, sigma) -> tuple[np.ndarray, np.ndarray]:
    a, b = _mat(rho), _mat(sigma)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} vs {b.shape}")
    return a, b


def _trace(a: np.ndarray) -> float:
    t = float(np.trace(a).real)
    if t > 1 + TRACE_TOL:
        raise ValueError(f"trace {t:.12f} exceeds one")
    return min(t, 1.0)


def fidelity(rho, sigma) -> float:
    """F(rho, sigma) = tr sqrt(sigma^1/2 rho sigma^1/2) (not squared)."""
    a, b = _pair(rho, sigma)
    sb = psd_sqrt(b)
    w = np.linalg.eigvalsh(hermitize(sb @ a @ sb))
    top = max(w.max(initial=0.0), 0.0)
    w = np.where(w > EIG_FLOOR * top, w, 0.0)
    return float(np.sqrt(w).sum())


def generalized_fidelity(rho, sigma) -> float:
    a, b = _pair(rho, sigma)
    ta, tb = _trace(a), _trace(b)
    return fidelity(a, b) + float(np.sqrt(max(1 - ta, 0.0) * max(1 - tb, 0.0)))


def purified_distance(rho, sigma) -> float:
    """sqrt(1 - Fbar^2) with Fbar the generalized fidelity.

    For nearly equal states 1 - Fbar^2 cancels to zero in floating point long
    before the distance does, so the result is floored by the trace
    distance, which never exceeds the purified distance.
    """
    f = min(generalized_fidelity(rho, sigma), 1.0)
    return max(float(np.sqrt(max(1 - f * f, 0.0))), d1_distance(rho, sigma))


def d1_distance(rho, sigma) -> float:
    """Half trace norm of the difference plus half the trace gap."""
    a, b = _pair(rho, sigma)
    ta, tb = _trace(a), _trace(b)
    return 0.5 * trace_norm(hermitize(a - b)) + 0.5 * abs(ta - tb)


def d1_variational(rho, sigma) -> tuple[float, np.ndarray]:
    """max over 0 <= M <= 1 of |tr(M (rho - sigma))| with its optimal M.

    The optimum is the projector onto the positive or the negative part of the
    difference, whichever has the larger weight.
    """
    a, b = _pair(rho, sigma)
    w, v = np.linalg.eigh(hermitize(a - b))
    pos = w > 0
    p_plus = v[:, pos] @ v[:, pos].conj().T
    p_minus = v[:, ~pos] @ v[:, ~pos].conj().T
    vp, vm = float(w[pos].sum()), float(-w[~pos].sum())
    return (vp, p_plus) if vp >= vm else (vm, p_minus)


def binary_entropy(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return float(-p * np.log2(p) - (1 - p) * np.log2(1 - p))
