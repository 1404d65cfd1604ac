"""Desk-scale experiments: decoupling, merging, correlation boosting and saturation.

Every experiment returns plain dataclasses holding the measured numbers next
to the bound being tested, so a report can be re-checked without rerunning.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .correlations import DecayCertificate, correlation_estimate, correlation_operator
from .entropy import (
    EntropyReport,
    hmax_conditional,
    hmax_from_spectrum,
    hmax_smooth,
    hmin_conditional,
    mutual_information,
)
from .metrics import purified_distance
from .states import ChainState, MixedChainState, Region
from .tensor import (
    RngSeed,
    eigh,
    floor_eigenvalues,
    haar_unitary,
    hermitize,
    partial_trace,
    purify,
    trace_norm,
)

LOG13 = float(np.log2(13))


def _seed(rng) -> RngSeed:
    if isinstance(rng, RngSeed):
        return rng
    return RngSeed(0 if rng is None else int(rng))


def _map(fn, items, threads: int = 1):
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _psi_matrix(psi: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.size != int(np.prod(dims)):
        raise ValueError(f"state of length {psi.size} does not match dims {tuple(dims)}")
    if abs(np.linalg.norm(psi) - 1) > 1e-10:
        raise ValueError("pure state must be normalized")
    return psi


# ---------------------------------------------------------------------------
# Haar decoupling


@dataclass
class DecouplingRun:
    distances: np.ndarray
    bound: float

    @property
    def mean(self) -> float:
        return float(np.mean(self.distances))

    @property
    def holds(self) -> bool:
        return self.mean <= self.bound


def haar_decoupling_bound(dim_a: int, dim_b: int) -> float:
    return float((2 * dim_b / dim_a) ** 0.25)


def haar_decoupling_experiment(dim_a: int, dim_b: int, samples: int, rng=None, threads: int = 1) -> DecouplingRun:
    """Purified distance of rho_B from maximally mixed, for Haar psi_AB."""
    if dim_a < dim_b:
        raise ValueError("need dim_A >= dim_B")
    if dim_a * dim_b > 2**14:
        raise ValueError("dim_A * dim_B limited to 2^14")
    seed = _seed(rng)
    tau = np.eye(dim_b) / dim_b

    def one(k):
        gen = seed.stream(k).generator()
        g = gen.standard_normal((dim_a, dim_b)) + 1j * gen.standard_normal((dim_a, dim_b))
        g /= np.linalg.norm(g)
        rho_b = hermitize(g.T @ g.conj())
        return purified_distance(rho_b, tau)

    dist = np.array(_map(one, range(samples), threads))
    return DecouplingRun(dist, haar_decoupling_bound(dim_a, dim_b))


# ---------------------------------------------------------------------------
# random rank-L measurements


@dataclass
class PovmFamily:
    elements: list[np.ndarray]
    ranks: list[int]
    residual: float
    isometries: list[np.ndarray] = field(default_factory=list, repr=False)


def random_rank_povm(dim_a: int, L: int, rng=None) -> PovmFamily:
    """floor(dim_A / L) rank-L projectors plus the remainder, Haar rotated.

    A remainder of rank zero is omitted rather than stored as a zero element.
    """
    if not 1 <= L <= dim_a:
        raise ValueError("need 1 <= L <= dim_A")
    u = haar_unitary(dim_a, rng if rng is not None else RngSeed(0))
    n = dim_a // L
    cuts = [(k * L, (k + 1) * L) for k in range(n)]
    if n * L < dim_a:
        cuts.append((n * L, dim_a))
    isos = [u[:, a:b] for a, b in cuts]
    elems = [v @ v.conj().T for v in isos]
    residual = float(np.linalg.norm(sum(elems) - np.eye(dim_a), 2))
    return PovmFamily(elems, [b - a for a, b in cuts], residual, isos)


def povm_decoupling_bound(rho_ab: np.ndarray, dims_ab: tuple[int, int], L: int) -> float:
    da, db = dims_ab
    purity = float(np.trace(rho_ab @ rho_ab).real)
    return float(2 * np.sqrt(L * db * purity) + 2 * L / da)


def povm_decoupling_error(rho_ab: np.ndarray, dims_ab: tuple[int, int], povm: PovmFamily) -> float:
    """sum_k p_k ||rho^k_{A'B} - tau_{A'} (x) rho_B||_1 for one measurement.

    A' is the support of P_k; rho_B is the unmeasured marginal. Outcomes of
    zero probability contribute nothing and the other weights are kept.
    """
    da, db = dims_ab
    rho_b = partial_trace(rho_ab, dims_ab, [1])
    total = 0.0
    for v in povm.isometries:
        r = v.shape[1]
        w = np.kron(v, np.eye(db))
        post = w.conj().T @ rho_ab @ w
        p = float(np.trace(post).real)
        if p <= 1e-14:
            continue
        diff = hermitize(post / p - np.kron(np.eye(r) / r, rho_b))
        total += p * trace_norm(diff)
    return total


@dataclass
class MergingDecouplingRun:
    errors: np.ndarray
    bound: float

    @property
    def best(self) -> float:
        return float(np.min(self.errors))

    @property
    def holds(self) -> bool:
        return self.best <= self.bound + 1e-9


def decoupling_merging_experiment(psi_abc: np.ndarray, dims: tuple[int, int, int], L: int, povm_samples: int,
                                  rng=None, threads: int = 1) -> MergingDecouplingRun:
    """Best average decoupling error over random rank-L measurements on A."""
    da, db, dc = dims
    if da > 16 or db > 4 or dc > 16:
        raise ValueError("dims limited to (16, 4, 16)")
    if L > da:
        raise ValueError("L exceeds dim A")
    psi = _psi_matrix(psi_abc, dims)
    rho_ab = partial_trace(psi, dims, [0, 1])
    seed = _seed(rng)
    errs = _map(lambda k: povm_decoupling_error(rho_ab, (da, db), random_rank_povm(da, L, seed.stream(k))),
                range(povm_samples), threads)
    return MergingDecouplingRun(np.array(errs), povm_decoupling_bound(rho_ab, (da, db), L))


# ---------------------------------------------------------------------------
# merging rates


@dataclass
class MergingReport:
    log_n_bound: float
    log_l_bound_plus: float  # +H_max(A|C) convention, the sign as usually printed
    log_l_bound_minus: float  # -H_max(A|C) convention, the distillation rate
    epsilon: float
    error_bound: float
    hmax_a: EntropyReport
    hmin_a_given_b: float
    hmax_a_given_c: EntropyReport

    def recompute(self) -> tuple[float, float, float]:
        tail = -4 * np.log2(self.epsilon) + 2 * LOG13
        hmc = self.hmax_a_given_c.value_upper
        return (float(self.hmax_a.value_upper - self.hmin_a_given_b + tail), float(hmc + tail),
                float(-hmc + tail))


def merging_rate_report(psi_abc: np.ndarray, dims: tuple[int, int, int], eps: float) -> MergingReport:
    """Classical-communication and distillation bounds of one-shot merging.

    Conditional entropies are unsmoothed: smoothing only raises H_min(A|B),
    so the reported communication bound is never below the smoothed one.
    """
    if not 0 < eps < 1:
        raise ValueError("smoothing parameter must lie in (0, 1)")
    psi = _psi_matrix(psi_abc, dims)
    rho_a = partial_trace(psi, dims, [0])
    rho_ab = partial_trace(psi, dims, [0, 1])
    ha = hmax_smooth(rho_a, eps)
    hmin = hmin_conditional(rho_ab, dims[:2]).value
    hmc = hmax_conditional(psi, dims)
    tail = -4 * np.log2(eps) + 2 * LOG13
    return MergingReport(
        log_n_bound=float(ha.value_upper - hmin + tail),
        log_l_bound_plus=float(hmc.value_upper + tail),
        log_l_bound_minus=float(-hmc.value_upper + tail),
        epsilon=eps,
        error_bound=float(13 * np.sqrt(eps)),
        hmax_a=ha,
        hmin_a_given_b=hmin,
        hmax_a_given_c=hmc,
    )


# ---------------------------------------------------------------------------
# correlations created by measuring A


def _postselect_c(rho_ac: np.ndarray, dims: tuple[int, int], m: np.ndarray) -> tuple[float, np.ndarray]:
    da, dc = dims
    w, v = eigh(m)
    sq = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    k = np.kron(sq, np.eye(dc))
    post = partial_trace(k @ rho_ac @ k, dims, [1])
    p = float(np.trace(post).real)
    return p, (post / p if p > 1e-14 else post)


def _check_effect(m: np.ndarray) -> np.ndarray:
    m = hermitize(np.asarray(m, dtype=complex))
    w = np.linalg.eigvalsh(m)
    if w[0] < -1e-10 or w[-1] > 1 + 1e-10:
        raise ValueError("measurement operator must satisfy 0 <= M <= I")
    return m


def cor_lower_from_measurement(rho_ac: np.ndarray, dims: tuple[int, int], m: np.ndarray) -> float:
    """(p/2) D(rho~_C, rho_C)^2 with rho~_C the state of C after outcome M on A."""
    m = _check_effect(m)
    p, post = _postselect_c(rho_ac, dims, m)
    if p <= 1e-14:
        return 0.0
    rho_c = partial_trace(rho_ac, dims, [1])
    return float(p / 2 * purified_distance(post, rho_c) ** 2)


def measurement_witness(rho_ac: np.ndarray, dims: tuple[int, int], m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Product witness (M, sign(rho~_C - rho_C)) whose value is p ||rho~_C - rho_C||_1.

    This value dominates the bound of :func:`cor_lower_from_measurement`.
    """
    m = _check_effect(m)
    p, post = _postselect_c(rho_ac, dims, m)
    rho_c = partial_trace(rho_ac, dims, [1])
    w, v = np.linalg.eigh(hermitize(post - rho_c))
    return m, (v * np.sign(w)) @ v.conj().T


def top_projector(rho: np.ndarray, rank: int) -> np.ndarray:
    w, v = eigh(rho)
    vs = v[:, ::-1][:, :rank]
    return vs @ vs.conj().T


@dataclass
class BoostCheck:
    status: str  # pass | fail | skipped
    gamma: float  # from the certified lower bound on Cor(A:C)
    cor_lower: float
    gamma_floor: float = 0.0  # (p / (1 - 2 delta))^(1/2) D(rho~_C, rho_C), where the proof starts
    gammas: list = field(default_factory=list)
    margins: list = field(default_factory=list)  # rhs - lhs at each tested gamma
    reason: str = ""

    @property
    def worst_margin(self) -> float | None:
        return min(self.margins) if self.margins else None


def lemma1_part3_check(psi_abc: np.ndarray, dims: tuple[int, int, int], delta: float, restarts: int = 8,
                       rng=None, grid: int = 5) -> BoostCheck:
    """Check lower(H_max^{2 g}(A)) <= upper(H_max^delta(A)) + 2 log|B| + log(2 / g^2).

    The chain of inequalities behind this bound only uses g >= D(rho~_C,
    rho_C), where rho~_C is C after projecting A onto its high-weight
    subspace P. The measurement witness of P is among the Cor candidates, so
    g = (Cor lower / (1/2 - delta))^(1/2) is at least that distance. The
    check runs at ``grid`` points from the distance floor up to min(g, 1/2);
    every such point is a valid instance of the bound.
    """
    da, db, dc = dims
    psi = _psi_matrix(psi_abc, dims)
    rho_a = partial_trace(psi, dims, [0])
    rho_ac = partial_trace(psi, dims, [0, 2])
    ha = hmax_smooth(rho_a, delta)
    p_a = top_projector(rho_a, ha.certificate_upper["rank"] if delta > 0 else int(round(2**ha.value_upper)))
    extra = [measurement_witness(rho_ac, (da, dc), p_a)]
    est = correlation_estimate(rho_ac, (da, dc), restarts=restarts, rng=_seed(rng), extra_witnesses=extra)
    cor = est.lower
    p, post = _postselect_c(rho_ac, (da, dc), p_a)
    dist = purified_distance(post, partial_trace(rho_ac, (da, dc), [1]))
    floor = float(np.sqrt(p / (1 - 2 * delta)) * dist)
    if cor <= 1e-12:
        return BoostCheck("skipped", 0.0, cor, floor, reason="no correlations between A and C")
    gamma = float(np.sqrt(cor / (0.5 - delta)))
    top = min(gamma, 0.5 - 1e-6)
    lo = max(floor, 1e-3)
    if lo > top:
        return BoostCheck("skipped", gamma, cor, floor, reason="no admissible smoothing below 1/2")
    gammas = [float(g) for g in np.geomspace(lo, top, grid)] if top > lo else [lo]
    margins = []
    for g in gammas:
        lhs = hmax_smooth(rho_a, 2 * g).value_lower
        rhs = ha.value_upper + 2 * np.log2(db) + np.log2(2 / g**2)
        margins.append(float(rhs - lhs))
    status = "pass" if min(margins) >= -1e-9 else "fail"
    return BoostCheck(status, gamma, cor, floor, gammas, margins)


def projector_alpha(delta: float, nu: float, dim_p: int, dim_q0: int) -> float:
    """Closeness constant for random projectors below P_A; inf when the bound is vacuous."""
    ratio = dim_q0 / dim_p
    num = delta * ratio + 8 / np.sqrt(dim_p)
    den = (1 - 2 * nu) * ratio - 8 / np.sqrt(dim_p)
    return float(num / den) if den > 0 else float("inf")


@dataclass
class MeasurementDemo:
    cor_values: np.ndarray
    cor_norm_values: np.ndarray
    pi_rho_distances: np.ndarray
    alpha: float
    delta: float
    nu: float
    dim_p: int
    dim_q0: int

    def fraction_above(self, threshold: float) -> float:
        return float(np.mean(self.cor_values >= threshold))

    @property
    def fraction_within_alpha(self) -> float:
        return float(np.mean(self.pi_rho_distances <= np.sqrt(self.alpha) + 1e-12))


def lemma1_random_measurement_demo(psi_abc: np.ndarray, dims: tuple[int, int, int], projector_rank: int,
                                   samples: int, rng=None, delta: float = 0.01, nu: float = 0.01) -> MeasurementDemo:
    """Post-select on Haar random projectors Q <= P_A and record what happens on C.

    rho_AC splits exactly as (1 - w) pi_AC + w sigma_AC, with pi the state
    after projecting B onto its high-weight subspace and w the weight left
    outside it.
    """
    da, db, dc = dims
    psi = _psi_matrix(psi_abc, dims)
    rho_a = partial_trace(psi, dims, [0])
    rho_b = partial_trace(psi, dims, [1])
    rho_ac = partial_trace(psi, dims, [0, 2])
    rep_a = hmax_smooth(rho_a, nu)
    dim_p = rep_a.certificate_upper["rank"] if nu > 0 else int(round(2**rep_a.value_upper))
    w_a, v_a = eigh(rho_a)
    basis_p = v_a[:, ::-1][:, :dim_p]
    p_mass = float(np.trace(basis_p.conj().T @ rho_a @ basis_p).real)
    nu_eff = max((1 - p_mass) / 2, 0.0)
    rep_b = hmax_smooth(rho_b, delta)
    r_b = rep_b.certificate_upper["rank"] if delta > 0 else int(round(2**rep_b.value_upper))
    pb = top_projector(rho_b, r_b)
    t = psi.reshape(da, db, dc)
    pi_vec = np.einsum("ab,ibc->iac", pb, t)
    weight_out = max(1 - float(np.vdot(pi_vec, pi_vec).real), 0.0)
    pi_vec = pi_vec / np.linalg.norm(pi_vec)
    pi_ac = partial_trace(pi_vec.transpose(1, 0, 2).reshape(-1), (db, da, dc), [1, 2])
    if projector_rank > dim_p:
        raise ValueError("projector rank exceeds the rank of P_A")
    seed = _seed(rng)
    cors, cns, dists = [], [], []
    for k in range(samples):
        u = haar_unitary(dim_p, seed.stream(k))
        q_basis = basis_p @ u[:, :projector_rank]
        q = q_basis @ q_basis.conj().T
        m, n = measurement_witness(rho_ac, (da, dc), q)
        delta_op = correlation_operator(rho_ac, (da, dc))
        cors.append(float(abs(np.trace(np.kron(m, n) @ delta_op))))
        cns.append(cor_lower_from_measurement(rho_ac, (da, dc), q))
        p_r, post_r = _postselect_c(rho_ac, (da, dc), q)
        p_p, post_p = _postselect_c(pi_ac, (da, dc), q)
        dists.append(purified_distance(post_r, post_p) if p_r > 1e-14 and p_p > 1e-14 else 0.0)
    return MeasurementDemo(np.array(cors), np.array(cns), np.array(dists),
                           projector_alpha(weight_out, nu_eff, dim_p, projector_rank), weight_out, nu_eff, dim_p,
                           projector_rank)


# ---------------------------------------------------------------------------
# saturation of mutual information


@dataclass
class SaturationResult:
    region: tuple[Region, Region, Region]  # (X_L, X_C, X_R)
    l: int
    mutual_info: float
    threshold: float
    met: bool
    scanned: list = field(default_factory=list, repr=False)


def saturation_regions(n: int, start: int, l: int, geometry: str, topology: str = "ring"):
    """(X_L, X_C, X_R) with X_C starting at ``start``.

    appendixB: borders of floor(l/2) and l - floor(l/2) sites around a
    centre of l sites. lemma2: borders of l sites around a centre of 2l.
    """
    if geometry == "appendixB":
        left, centre, right = l // 2, l, l - l // 2
    elif geometry == "lemma2":
        left, centre, right = l, 2 * l, l
    else:
        raise ValueError(f"unknown geometry {geometry!r}")
    wrap = (lambda k: k % n) if topology == "ring" else (lambda k: k)
    xl = Region(wrap(start - left), left, n, topology) if left else None
    xc = Region(wrap(start), centre, n, topology)
    xr = Region(wrap(start + centre), right, n, topology) if right else None
    return xl, xc, xr, left + centre + right


def _block_mi(state, xl, xc, xr) -> float:
    borders = [r for r in (xl, xr) if r is not None]
    sites_c = list(xc.sites)
    sites_b = [s for r in borders for s in r.sites]
    if not sites_b:
        return 0.0
    rho = state.reduced(sites_c + sites_b)
    return mutual_information(rho, (state.d ** len(sites_c), state.d ** len(sites_b)))


def saturation_scan(state, s: int, eps: float, l0: int, geometry: str = "appendixB", budget: int | None = None,
                    l_max: int | None = None) -> SaturationResult:
    """First (l, centre) with I(X_C : X_L X_R) <= eps l.

    Scan order: l ascending from l0, then centre offset from s in the order
    0, +1, -1, +2, -2, ... up to ``budget`` sites away.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    n = state.n
    budget = n // 2 if budget is None else budget
    offsets = [0]
    for k in range(1, budget + 1):
        offsets += [k, -k]
    best = None
    scanned = []
    l = max(l0, 1)
    while True:
        if l_max is not None and l > l_max:
            break
        left = l // 2 if geometry == "appendixB" else l
        span = 2 * l if geometry == "appendixB" else 4 * l
        if span > n:
            break
        for off in offsets:
            start = s + off
            if state.topology == "line" and (start - left < 0 or start - left + span > n):
                continue
            xl, xc, xr, _ = saturation_regions(n, start, l, geometry, state.topology)
            mi = _block_mi(state, xl, xc, xr)
            thr = eps * l
            scanned.append((l, xc.start, mi))
            res = SaturationResult((xl, xc, xr), l, mi, thr, mi <= thr + 1e-9, scanned)
            if res.met:
                return res
            if best is None or mi - thr < best.mutual_info - best.threshold:
                best = res
        l += 1
    if best is None:
        raise ValueError("no admissible region inside the chain")
    best.met = False
    return best


# ---------------------------------------------------------------------------
# area-law harness


@dataclass
class HarnessRow:
    block_start: int
    block_len: int
    l: int
    eps: float
    hmax_lower: float
    hmax_upper: float


@dataclass
class HarnessReport:
    rows: list[HarnessRow]
    saturation_gap: float
    saturation_window: tuple[int, int]
    saturated: bool
    hmax_total: float | None
    normalized_excess: float | None
    normalized_ok: bool | None
    tolerance: float

    @property
    def passes_pure_form(self) -> bool:
        return self.saturated

    @property
    def passes_normalized_form(self) -> bool:
        return bool(self.normalized_ok)


def _block_spectra(vec: np.ndarray, n_sites: int, d: int, env_dim: int, topology: str, lengths) -> dict:
    """Spectra of every contiguous block, from Schmidt values of the pure vector."""
    t = vec.reshape([d] * n_sites + [env_dim])
    out = {}
    starts = range(n_sites) if topology == "ring" else None
    for k in lengths:
        st = starts if starts is not None else range(n_sites - k + 1)
        for s in st:
            sites = [(s + j) % n_sites for j in range(k)]
            rest = [j for j in range(n_sites + 1) if j not in sites]
            m = t.transpose(sites + rest).reshape(d**k, -1)
            sv = np.linalg.svd(m, compute_uv=False)
            w = floor_eigenvalues(sv**2)
            out[s, k] = np.sort(w)[::-1]
    return out


def theorem_harness(state, certificate: DecayCertificate, window: tuple[int, int] | None = None,
                    tolerance: float = 0.1, l_max: int | None = None) -> HarnessReport:
    """Smooth max-entropy table of all contiguous blocks at eps = 2^(-l / 8 xi).

    Mixed input is purified once; the purifying system joins the complement
    of every block, so block spectra are those of the original state.
    """
    if not certificate.certified:
        raise ValueError("theorem harness requires a certified decay certificate")
    xi = certificate.xi
    if isinstance(state, MixedChainState):
        vec = purify(state.matrix)
        env = vec.size // state.d**state.n
        w = floor_eigenvalues(np.linalg.eigvalsh(state.matrix))
        h_total = float(np.log2(np.count_nonzero(w > 0)))
    elif isinstance(state, ChainState):
        vec, env, h_total = state.amplitudes, 1, None
    else:
        raise TypeError("state must be a ChainState or MixedChainState")
    n, d = state.n, state.d
    lengths = range(1, n) if state.topology == "ring" else range(1, n + 1)
    spectra = _block_spectra(vec, n, d, env, state.topology, lengths)
    l_start = int(np.ceil(8 * xi))
    l_stop = max(n, l_start) if l_max is None else l_max
    rows = []
    for l in range(l_start, l_stop + 1):
        eps = float(2.0 ** (-l / (8 * xi)))
        for (s, k), w in sorted(spectra.items(), key=lambda kv: (kv[0][1], kv[0][0])):
            rep = hmax_from_spectrum(w, eps)
            rows.append(HarnessRow(s, k, l, eps, rep.value_lower, rep.value_upper))
    window = (n // 3, n // 2) if window is None else window
    gaps = []
    for l in range(l_start, l_stop + 1):
        ups = [r.hmax_upper for r in rows if r.l == l and window[0] <= r.block_len <= window[1]]
        if ups:
            gaps.append(max(ups) - min(ups))
    gap = float(max(gaps)) if gaps else 0.0
    excess, norm_ok = None, None
    if h_total is not None:
        if h_total > 0:
            excess = float(max((r.hmax_upper - r.l) / h_total for r in rows)) if rows else 0.0
            norm_ok = excess <= 1 + 1e-9
        else:
            excess, norm_ok = 0.0, True
    return HarnessReport(rows, gap, window, gap <= tolerance, h_total, excess, norm_ok, tolerance)


# ---------------------------------------------------------------------------
# CSV


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def _f(x: float) -> str:
    return f"{x:.12e}"


def decoupling_csv(run: DecouplingRun) -> str:
    rows = [(k, _f(v), _f(run.bound)) for k, v in enumerate(run.distances)]
    rows.append(("mean", _f(run.mean), _f(run.bound)))
    return _csv(["sample", "distance", "bound"], rows)


def merging_csv(run: MergingDecouplingRun) -> str:
    rows = [(k, _f(v), _f(run.bound)) for k, v in enumerate(run.errors)]
    rows.append(("min", _f(run.best), _f(run.bound)))
    return _csv(["sample", "error", "bound"], rows)


def theorem_csv(report: HarnessReport) -> str:
    rows = [(r.block_start, r.block_len, r.l, _f(r.eps), _f(r.hmax_lower), _f(r.hmax_upper)) for r in report.rows]
    return _csv(["block_start", "block_len", "l", "eps", "hmax_lower", "hmax_upper"], rows)
