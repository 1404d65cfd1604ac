"""Primal-dual path-following solver for the conditional min-entropy SDP.

Primal:  minimize tr(sigma)  subject to  I_A (x) sigma - rho_AB >= 0
Dual:    maximize tr(rho_AB X) subject to  tr_A X = I_B,  X >= 0

The dual is in standard form (X is the cone variable, tr_A the linear map)
and the primal is its Lagrangian dual, with slack S = I_A (x) sigma - rho_AB.
Search directions are HKM directions with a Mehrotra predictor-corrector.
After convergence both witnesses are projected onto their feasible sets
exactly, so the reported gap is a certificate and not a solver estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import hermitize


class SdpConvergenceError(RuntimeError):
    def __init__(self, message: str, best_gap: float):
        super().__init__(f"{message} (best gap {best_gap:.3e})")
        self.best_gap = best_gap


@dataclass
class SdpSolution:
    primal_value: float
    dual_value: float
    primal_witness: np.ndarray  # sigma_B
    dual_witness: np.ndarray  # X_AB
    iterations: int = 0
    dims: tuple[int, int] = (1, 1)
    history: list = field(default_factory=list, repr=False)

    @property
    def gap(self) -> float:
        return abs(self.primal_value - self.dual_value)

    @property
    def value(self) -> float:
        """H_min(A|B) in bits, from the primal (upper-bound side) value."""
        return float(-np.log2(self.primal_value))

    @property
    def value_interval(self) -> tuple[float, float]:
        """Certified [lower, upper] for H_min(A|B)."""
        return float(-np.log2(self.primal_value)), float(-np.log2(max(self.dual_value, 1e-300)))

    def verify(self, rho: np.ndarray, tol: float = 1e-9) -> bool:
        """Re-check feasibility of both witnesses against ``rho``."""
        da, db = self.dims
        s = np.kron(np.eye(da), self.primal_witness) - rho
        ok_p = np.linalg.eigvalsh(hermitize(s))[0] >= -tol
        x = self.dual_witness
        ok_x = np.linalg.eigvalsh(hermitize(x))[0] >= -tol
        tr_a = np.einsum("abac->bc", x.reshape(da, db, da, db))
        ok_c = np.max(np.abs(tr_a - np.eye(db))) <= tol
        return bool(ok_p and ok_x and ok_c)


def _hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal (real inner product) basis of d x d Hermitian matrices, as columns of vec."""
    cols = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1
        cols.append(e.reshape(-1))
    s = 1 / np.sqrt(2)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = e[j, i] = s
            cols.append(e.reshape(-1))
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = -1j * s
            e[j, i] = 1j * s
            cols.append(e.reshape(-1))
    return np.array(cols).T


def _max_step(x: np.ndarray, dx: np.ndarray) -> float:
    """Largest alpha <= 1 with x + alpha dx >= 0, for x positive definite."""
    lc = np.linalg.cholesky(x)
    li = np.linalg.inv(lc)
    w = np.linalg.eigvalsh(hermitize(li @ dx @ li.conj().T))
    lo = w[0]
    return 1.0 if lo >= 0 else min(1.0, -1.0 / lo)


def solve_hmin_sdp(rho: np.ndarray, dim_a: int, dim_b: int, *, gap_tol: float = 1e-10,
                   max_iter: int = 200) -> SdpSolution:
    """Solve the conditional min-entropy SDP for ``rho`` on A (x) B."""
    rho = hermitize(np.asarray(rho, dtype=complex))
    n = dim_a * dim_b
    if rho.shape != (n, n):
        raise ValueError(f"rho shape {rho.shape} does not match {dim_a}x{dim_b}")
    eye_a, eye_b = np.eye(dim_a), np.eye(dim_b)

    def tr_a(m):
        return np.einsum("abac->bc", m.reshape(dim_a, dim_b, dim_a, dim_b))

    def lift(y):
        return np.kron(eye_a, y)

    basis = _hermitian_basis(dim_b)
    # scale so that the starting point is comfortably interior
    lam = float(np.linalg.eigvalsh(rho)[-1])
    y = (lam + 1.0) * eye_b
    s = lift(y) - rho
    x = np.kron(eye_a, eye_b) / dim_a
    best = (np.inf, None)
    history = []
    it = 0
    for it in range(1, max_iter + 1):
        try:
            x, y, s = _step(rho, x, y, s, dim_a, dim_b, basis, tr_a, lift)
        except np.linalg.LinAlgError:
            # iterates too close to the boundary for another Newton step
            break
        sol = _certify(rho, x, y, dim_a, dim_b)
        history.append((it, sol[0], sol[1]))
        gap = abs(sol[0] - sol[1])
        if gap < best[0]:
            best = (gap, sol)
        if gap <= gap_tol:
            break
    gap, sol = best
    if sol is None or gap > 1e-8:
        raise SdpConvergenceError("min-entropy SDP did not reach the gap tolerance", gap)
    pv, dv, sigma, xf = sol
    return SdpSolution(pv, dv, sigma, xf, it, (dim_a, dim_b), history)


def _step(rho, x, y, s, dim_a, dim_b, basis, tr_a, lift):
    """One Mehrotra predictor-corrector iteration with HKM directions."""
    n = dim_a * dim_b
    eye_b, eye_n = np.eye(dim_b), np.eye(n)
    rp = eye_b - tr_a(x)
    rd = rho + s - lift(y)
    mu = np.trace(x @ s).real / n
    sinv = np.linalg.inv(s)
    sinv = hermitize(sinv)

    # Schur complement on Hermitian coordinates: dY -> tr_A(X (I (x) dY) S^-1)
    k = np.einsum("ibjc,jdie->becd",
                  x.reshape(dim_a, dim_b, dim_a, dim_b),
                  sinv.reshape(dim_a, dim_b, dim_a, dim_b))
    lmap = k.reshape(dim_b * dim_b, dim_b * dim_b)
    schur = (basis.conj().T @ lmap @ basis).real
    schur = (schur + schur.T) / 2
    chol = np.linalg.cholesky(schur)

    def direction(rc):
        # rc: complementarity target, dX S + X dS = rc
        rhs_mat = tr_a(rc @ sinv + x @ rd @ sinv) - rp
        rhs = (basis.conj().T @ rhs_mat.reshape(-1)).real
        dy_c = np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))
        dy = (basis @ dy_c).reshape(dim_b, dim_b)
        dy = hermitize(dy)
        ds = lift(dy) - rd
        dx = hermitize((rc - x @ ds) @ sinv)
        return dx, dy, ds

    # predictor
    dx_a, dy_a, ds_a = direction(-x @ s)
    ap = _max_step(x, dx_a)
    ad = _max_step(s, ds_a)
    mu_aff = np.trace((x + ap * dx_a) @ (s + ad * ds_a)).real / n
    sigma_c = (max(mu_aff, 0.0) / mu) ** 3 if mu > 0 else 0.0
    # corrector
    rc = sigma_c * mu * eye_n - x @ s - dx_a @ ds_a
    dx, dy, ds = direction(rc)
    ap = min(1.0, 0.98 * _max_step(x, dx))
    ad = min(1.0, 0.98 * _max_step(s, ds))
    return hermitize(x + ap * dx), hermitize(y + ad * dy), hermitize(s + ad * ds)


def _certify(rho, x, y, dim_a, dim_b):
    """Project the iterates onto exactly feasible witnesses."""
    # primal: shift sigma until I (x) sigma - rho >= 0
    sigma = hermitize(y)
    lo = np.linalg.eigvalsh(hermitize(np.kron(np.eye(dim_a), sigma) - rho))[0]
    if lo < 0:
        sigma = sigma + (-lo) * (1 + 1e-12) * np.eye(dim_b)
    pv = float(np.trace(sigma).real)
    # dual: congruence with (tr_A X)^{-1/2} makes the partial trace exactly I_B
    w = np.einsum("abac->bc", x.reshape(dim_a, dim_b, dim_a, dim_b))
    ww, wv = np.linalg.eigh(hermitize(w))
    ww = np.maximum(ww, 1e-300)
    w_isqrt = (wv / np.sqrt(ww)) @ wv.conj().T
    t = np.kron(np.eye(dim_a), w_isqrt)
    xf = hermitize(t @ x @ t)
    dv = float(np.trace(rho @ xf).real)
    return pv, dv, sigma, xf
