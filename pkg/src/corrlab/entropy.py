"""Von Neumann, smooth max-, conditional min/max- and max-relative entropies.

All logarithms are base 2. Smooth max-entropies are reported as certified
intervals: the upper end comes from an explicit state in the smoothing ball
(a normalized spectral truncation), the lower end from the fact that any
rank-r state in the ball forces the top-r eigenvalue mass of the original
state to be at least 1 - 2 eps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .metrics import binary_entropy, fidelity, purified_distance
from .sdp import SdpSolution, solve_hmin_sdp
from .tensor import (
    EIG_FLOOR,
    eigh,
    floor_eigenvalues,
    hermitize,
    partial_trace,
    psd_function,
    support_projector,
)

NORM_TOL = 1e-10


class SupportError(ValueError):
    """Raised when supp(rho) is not contained in supp(sigma)."""


@dataclass
class EntropyReport:
    value_lower: float
    value_upper: float
    certificate_lower: dict = field(default_factory=dict)
    certificate_upper: dict = field(default_factory=dict)
    epsilon: float = 0.0
    von_neumann: float | None = None

    def __post_init__(self):
        if self.value_lower > self.value_upper + 1e-9:
            raise ValueError(f"inverted interval [{self.value_lower}, {self.value_upper}]")


def _check_normalized(rho: np.ndarray) -> np.ndarray:
    rho = hermitize(np.asarray(rho, dtype=complex))
    tr = np.trace(rho).real
    if abs(tr - 1) > NORM_TOL:
        raise ValueError(f"state must be normalized (trace {tr:.12f})")
    return rho


def spectrum(rho: np.ndarray) -> np.ndarray:
    """Floored eigenvalues in decreasing order."""
    w = np.linalg.eigvalsh(hermitize(np.asarray(rho, dtype=complex)))
    return floor_eigenvalues(w)[::-1]


def von_neumann(rho: np.ndarray) -> float:
    rho = _check_normalized(rho)
    w = spectrum(rho)
    w = w[w > 0]
    return float(max(-(w * np.log2(w)).sum(), 0.0))


def shannon(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def relative_entropy(rho: np.ndarray, sigma: np.ndarray) -> float:
    """S(rho || sigma) in bits; infinite if the support condition fails."""
    if not support_contained(rho, sigma):
        return float("inf")
    log_rho = psd_function(rho, lambda w: np.where(w > 0, np.log2(np.where(w > 0, w, 1)), 0.0))
    log_sigma = psd_function(sigma, lambda w: np.where(w > 0, np.log2(np.where(w > 0, w, 1)), 0.0))
    return float(np.trace(rho @ (log_rho - log_sigma)).real)


def _smallest_rank(w: np.ndarray, mass: float) -> int:
    """Smallest r with sum of the r largest eigenvalues >= mass."""
    cum = np.cumsum(w)
    r = int(np.searchsorted(cum, mass - 1e-13) + 1)
    return min(max(r, 1), len(w))


def hmax_from_spectrum(w: np.ndarray, eps: float) -> EntropyReport:
    """Smooth max-entropy interval from a decreasing, normalized spectrum."""
    if not 0 <= eps < 1:
        raise ValueError("smoothing parameter must lie in [0, 1)")
    w = np.asarray(w, dtype=float)
    rank = int(np.count_nonzero(w > 0))
    if eps == 0:
        h = float(np.log2(rank))
        cert = {"kind": "rank", "rank": rank}
        return EntropyReport(h, h, cert, cert, 0.0)
    r_up = _smallest_rank(w, 1 - eps * eps)
    r_lo = _smallest_rank(w, 1 - 2 * eps) if 1 - 2 * eps > 0 else 1
    r_lo = min(r_lo, r_up)
    cert_up = {"kind": "spectral_truncation", "rank": r_up, "mass": float(w[:r_up].sum())}
    cert_lo = {"kind": "top_mass_bound", "rank": r_lo, "mass_below": float(w[: r_lo - 1].sum())}
    return EntropyReport(float(np.log2(r_lo)), float(np.log2(r_up)), cert_lo, cert_up, eps)


def hmax_smooth(rho: np.ndarray, eps: float) -> EntropyReport:
    """Certified interval for the eps-smooth max-entropy of a normalized state."""
    rho = _check_normalized(rho)
    rep = hmax_from_spectrum(spectrum(rho), eps)
    rep.von_neumann = von_neumann(rho)
    return rep


def truncated_state(rho: np.ndarray, rank: int) -> np.ndarray:
    """Normalized projection of rho onto its top-``rank`` eigenvectors."""
    w, v = eigh(rho)
    vs = v[:, ::-1][:, :rank]
    p = vs @ vs.conj().T
    t = p @ rho @ p
    return t / np.trace(t).real


def verify_hmax_upper(rho: np.ndarray, report: EntropyReport) -> bool:
    """Rebuild the truncation certificate and check it lies in the smoothing ball."""
    r = report.certificate_upper["rank"]
    if report.epsilon == 0:
        return bool(np.log2(r) <= report.value_upper + 1e-12)
    d = purified_distance(rho, truncated_state(rho, r))
    return bool(d <= report.epsilon + 1e-9 and np.log2(r) <= report.value_upper + 1e-12)


# ---------------------------------------------------------------------------
# conditional entropies


def hmin_conditional(rho_ab: np.ndarray, dims: tuple[int, int]) -> SdpSolution:
    """H_min(A|B) by semidefinite programming; ``dims = (dim_a, dim_b)``."""
    rho_ab = _check_normalized(rho_ab)
    da, db = dims
    if da * db > 64:
        raise ValueError("conditional min-entropy limited to |A||B| <= 64")
    return solve_hmin_sdp(rho_ab, da, db)


def hmax_conditional(psi_abc: np.ndarray, dims: tuple[int, int, int]) -> EntropyReport:
    """H_max(A|C) = -H_min(A|B) evaluated on the tripartite pure state.

    Only the unsmoothed value is computed; the SDP gap gives the interval.
    """
    da, db, dc = dims
    rho_ab = partial_trace(psi_abc, dims, [0, 1])
    sol = hmin_conditional(rho_ab, (da, db))
    lo, hi = sol.value_interval
    cert = {"kind": "sdp_duality", "primal": sol.primal_value, "dual": sol.dual_value, "gap": sol.gap}
    return EntropyReport(-hi, -lo, cert, cert, 0.0)


def conditional_fidelity_objective(rho_ac: np.ndarray, dims: tuple[int, int], sigma_c: np.ndarray) -> float:
    """log2 F(rho_AC, I_A (x) sigma_C)^2; its maximum over states sigma_C is H_max(A|C)."""
    da, _ = dims
    f = fidelity(rho_ac, np.kron(np.eye(da), sigma_c))
    return float(2 * np.log2(f))


# ---------------------------------------------------------------------------
# relative entropies


def support_contained(rho: np.ndarray, sigma: np.ndarray, tol: float = 1e-9) -> bool:
    p = support_projector(sigma)
    leak = rho - p @ rho @ p
    return bool(np.linalg.norm(leak) <= tol * max(1.0, np.linalg.norm(rho)))


def smax_relative(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Max-relative entropy log2 min{2^lam : rho <= 2^lam sigma}."""
    rho = hermitize(np.asarray(rho, dtype=complex))
    sigma = hermitize(np.asarray(sigma, dtype=complex))
    if not support_contained(rho, sigma):
        raise SupportError("supp(rho) is not contained in supp(sigma)")
    inv_sqrt = psd_function(sigma, lambda w: np.where(w > 0, 1 / np.sqrt(np.where(w > 0, w, 1)), 0.0))
    lam = np.linalg.eigvalsh(hermitize(inv_sqrt @ rho @ inv_sqrt))[-1]
    return float(np.log2(lam))


def smax_relative_bisection(rho: np.ndarray, sigma: np.ndarray, tol: float = 1e-10) -> float:
    """Same quantity by bisection on the feasibility of 2^lam sigma - rho >= 0."""
    def feasible(lam):
        m = hermitize(2.0**lam * sigma - rho)
        return np.linalg.eigvalsh(m)[0] >= -1e-12 * 2.0**lam

    lo, hi = -64.0, 64.0
    if not feasible(hi):
        raise SupportError("no finite lambda makes 2^lam sigma dominate rho")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass
class SubstateResult:
    smoothed: np.ndarray
    lam: float
    distance: float
    smax_smoothed: float
    epsilon: float

    @property
    def guarantee(self) -> float:
        return self.lam + float(np.log2(1 / (1 - self.epsilon)))

    @property
    def within_guarantee(self) -> bool:
        return self.smax_smoothed <= self.guarantee + 1e-9


def _truncate_positive_part(rho, sigma, lam):
    w, v = eigh(rho - 2.0**lam * sigma)
    top = max(np.abs(w).max(), 1e-300)
    neg = v[:, w <= EIG_FLOOR * top]
    q = neg @ neg.conj().T
    t = hermitize(q @ rho @ q)
    tr = np.trace(t).real
    if tr <= 0:
        return None
    return t / tr


def _joint_diagonal(rho, sigma, tol=1e-10):
    """Common eigenbasis spectra (p, q) when rho and sigma commute, else None."""
    if np.linalg.norm(rho @ sigma - sigma @ rho) > tol:
        return None
    _, v = eigh(rho + 0.6180339887 * sigma)
    a, b = v.conj().T @ rho @ v, v.conj().T @ sigma @ v
    if max(np.abs(a - np.diag(np.diag(a))).max(), np.abs(b - np.diag(np.diag(b))).max()) > tol:
        return None
    return np.clip(np.diag(a).real, 0, None), np.clip(np.diag(b).real, 0, None), v


def _waterfill(p, cap):
    """argmax sum sqrt(p x) over 0 <= x <= cap, sum x <= 1: x = min(cap, t p)."""
    if cap.sum() <= 1:
        return cap.copy()
    pos = p > 0
    ratios = np.sort(cap[pos] / p[pos])
    # sum_i min(cap_i, t p_i) is increasing and piecewise linear in t
    for t_hi in ratios:
        if np.minimum(cap, t_hi * p).sum() >= 1:
            break
    fixed = cap[pos] / p[pos] < t_hi
    free_mass = p[pos][~fixed].sum()
    t = (1 - cap[pos][fixed].sum()) / free_mass
    return np.minimum(cap, t * p)


def _commuting_smoothing(p, q, v, eps, tol):
    def state(lam):
        return _waterfill(p, 2.0**lam * q)

    def dist(x):
        fid = float(np.sum(np.sqrt(p * x)))
        return float(np.sqrt(max(1 - min(fid, 1.0) ** 2, 0.0)))

    pos = p > 0
    hi = float(np.log2(np.max(p[pos] / q[pos])))
    lo = hi - 64.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if dist(state(mid)) <= eps:
            hi = mid
        else:
            lo = mid
    x = state(hi)
    return hi, (v * x) @ v.conj().T


def substate_smoothing(rho: np.ndarray, sigma: np.ndarray, eps: float, tol: float = 1e-9) -> SubstateResult:
    """Certified upper bound on the eps-smooth max-relative entropy.

    Commuting pairs are smoothed exactly: in the common eigenbasis the best
    state below 2^lam sigma caps each weight at 2^lam q_i and spreads the
    freed mass proportionally to rho over the uncapped weights. Other pairs
    use the truncation family: project out the positive part of
    rho - 2^lam sigma and renormalize. Either way lam is the smallest value
    (to ``tol``) whose smoothed state stays eps-close.
    """
    if not 0 < eps < 1:
        raise ValueError("smoothing parameter must lie in (0, 1)")
    rho = _check_normalized(rho)
    sigma = hermitize(np.asarray(sigma, dtype=complex))
    hi = smax_relative(rho, sigma)  # raises on a support violation
    joint = _joint_diagonal(rho, sigma)
    if joint is not None:
        lam, smoothed = _commuting_smoothing(*joint, eps, tol)
        dist = purified_distance(rho, smoothed)
        return SubstateResult(smoothed, lam, dist, smax_relative(smoothed, sigma), eps)
    lo = hi - 64.0

    def ok(lam):
        t = _truncate_positive_part(rho, sigma, lam)
        return t is not None and purified_distance(rho, t) <= eps

    if ok(lo):
        hi = lo
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    smoothed = _truncate_positive_part(rho, sigma, hi)
    if smoothed is None:
        raise RuntimeError("substate bisection failed")
    dist = purified_distance(rho, smoothed)
    return SubstateResult(smoothed, hi, dist, smax_relative(smoothed, sigma), eps)


# ---------------------------------------------------------------------------
# mutual informations


def mutual_information(rho: np.ndarray, dims: tuple[int, int]) -> float:
    """I(A:B) = S(A) + S(B) - S(AB) for a state on A (x) B."""
    rho = _check_normalized(rho)
    sa = von_neumann(partial_trace(rho, dims, [0]))
    sb = von_neumann(partial_trace(rho, dims, [1]))
    return sa + sb - von_neumann(rho)


def imax_upper(psi_abc: np.ndarray, dims: tuple[int, int, int], eps: float) -> float:
    """Upper bound on I_max^eps(A:B) = H_max^eps(A) - H_min^eps(A|B).

    Uses the truncation upper end for H_max^eps(A) and the unsmoothed H_min
    (smoothing can only raise H_min, so this over-estimates the difference).
    """
    rho_a = partial_trace(psi_abc, dims, [0])
    rho_ab = partial_trace(psi_abc, dims, [0, 1])
    up = hmax_smooth(rho_a, eps).value_upper
    return up - hmin_conditional(rho_ab, dims[:2]).value


def qep_bound(n: int, entropy_per_site: float, d: int, eps: float) -> float:
    """Right-hand side n S + 4 d sqrt(n log2(2/eps^2)) of the equipartition bound."""
    return n * entropy_per_site + 4 * d * float(np.sqrt(n * np.log2(2 / eps**2)))


def product_spectrum(site_spectra: list[np.ndarray]) -> np.ndarray:
    """Decreasing spectrum of a tensor product of states given their spectra."""
    w = np.ones(1)
    for s in site_spectra:
        w = np.outer(w, s).reshape(-1)
    return np.sort(w)[::-1]


def fannes_bound(d: int, dist: float) -> float:
    """log2(d-1) D + h(D), the continuity bound on |H(rho) - H(sigma)|."""
    return float(np.log2(d - 1)) * dist + binary_entropy(dist) if d > 1 else 0.0


__all__ = [
    "EntropyReport",
    "SubstateResult",
    "SupportError",
    "fannes_bound",
    "hmax_conditional",
    "conditional_fidelity_objective",
    "hmax_from_spectrum",
    "hmax_smooth",
    "hmin_conditional",
    "imax_upper",
    "mutual_information",
    "product_spectrum",
    "qep_bound",
    "relative_entropy",
    "smax_relative",
    "smax_relative_bisection",
    "spectrum",
    "substate_smoothing",
    "truncated_state",
    "von_neumann",
]
