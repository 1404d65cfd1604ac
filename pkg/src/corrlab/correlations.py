"""Correlation function estimates, transfer spectra and decay certification.

Cor(X:Y) is the largest |tr((M (x) N) Delta)| over operators of norm at most
one, with Delta = rho_XY - rho_X (x) rho_Y. It is a nonconvex bilinear
maximization, so it is reported as an interval: the lower end is the value
of an explicit witness pair (re-evaluated from the stored operators), the
upper end is ||Delta||_1.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import Sequence

import numpy as np

from .states import MatrixProductState, QuantumChannel, Region, open_block_purification, reduced_density
from .tensor import RngSeed, ginibre, hermitize, partial_trace, polar_unitary, trace_norm


# ---------------------------------------------------------------------------
# basic objects


def correlation_operator(rho_xy: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    """Delta = rho_XY - rho_X (x) rho_Y."""
    rho_xy = hermitize(np.asarray(rho_xy, dtype=complex))
    rx = partial_trace(rho_xy, dims, [0])
    ry = partial_trace(rho_xy, dims, [1])
    return rho_xy - np.kron(rx, ry)


def witness_value(delta: np.ndarray, dims: tuple[int, int], m: np.ndarray, n: np.ndarray) -> float:
    """|tr((M (x) N) Delta)|."""
    g = _reduce_y(delta, dims, n)
    return float(abs(np.sum(m * g.T)))


def _reduce_y(delta, dims, n):
    """G = tr_Y[(I (x) N) Delta], so that tr((M (x) N) Delta) = tr(M G)."""
    dx, dy = dims
    return np.tensordot(delta.reshape(dx, dy, dx, dy), n, axes=([3, 1], [0, 1]))


def _reduce_x(delta, dims, m):
    dx, dy = dims
    return np.tensordot(delta.reshape(dx, dy, dx, dy), m, axes=([2, 0], [0, 1]))


def op_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2))


# ---------------------------------------------------------------------------
# data-hiding witness decomposition


@dataclass
class ProductWitness:
    x_op: np.ndarray
    y_op: np.ndarray
    value: float


def datahiding_witness(delta: np.ndarray, dims: tuple[int, int]) -> list[ProductWitness]:
    """Split the optimal trace-norm observable into at most d_min^2 product pairs.

    With M the sign of Delta (so tr(M Delta) = ||Delta||_1), write
    M = sum_ab |a><b| (x) M_ab over the smaller factor. Each block has
    operator norm at most one, so some pair reaches ||Delta||_1 / d_min^2.
    """
    dx, dy = dims
    delta = hermitize(np.asarray(delta, dtype=complex))
    w, v = np.linalg.eigh(delta)
    m = (v * np.sign(w)) @ v.conj().T
    t = m.reshape(dx, dy, dx, dy)
    out = []
    if dx <= dy:
        for a, b in iproduct(range(dx), range(dx)):
            xo = np.zeros((dx, dx), dtype=complex)
            xo[a, b] = 1
            yo = t[a, :, b, :]
            out.append(ProductWitness(xo, yo, witness_value(delta, dims, xo, yo)))
    else:
        for a, b in iproduct(range(dy), range(dy)):
            yo = np.zeros((dy, dy), dtype=complex)
            yo[a, b] = 1
            xo = t[:, a, :, b]
            out.append(ProductWitness(xo, yo, witness_value(delta, dims, xo, yo)))
    return out


# ---------------------------------------------------------------------------
# alternating maximization


@dataclass
class CorrelationEstimate:
    lower: float
    upper: float
    witness_x: np.ndarray
    witness_y: np.ndarray
    restarts: int
    converged: bool
    source: str = ""
    dims: tuple[int, int] = (1, 1)
    traces: list = field(default_factory=list, repr=False)

    def reevaluate(self, delta: np.ndarray) -> float:
        return witness_value(delta, self.dims, self.witness_x, self.witness_y)


def _random_contraction(dim: int, gen) -> np.ndarray:
    g = ginibre(dim, dim, gen)
    return g / op_norm(g)


class _Contractions:
    """Delta stored as the two matrices used by the half-steps.

    G = tr_Y[(I (x) N) Delta] and H = tr_X[(M (x) I) Delta] become plain
    matrix-vector products, avoiding a transpose copy of Delta per step.
    """

    def __init__(self, delta, dims):
        dx, dy = dims
        t = np.asarray(delta).reshape(dx, dy, dx, dy)
        self.dx, self.dy = dx, dy
        self.to_x = np.ascontiguousarray(t.transpose(0, 2, 3, 1).reshape(dx * dx, dy * dy))
        self.to_y = np.ascontiguousarray(t.transpose(1, 3, 2, 0).reshape(dy * dy, dx * dx))

    def reduce_y(self, n):
        return (self.to_x @ n.reshape(-1)).reshape(self.dx, self.dx)

    def reduce_x(self, m):
        return (self.to_y @ m.reshape(-1)).reshape(self.dy, self.dy)


def _polar_and_norm(g):
    u, sv, vh = np.linalg.svd(g)
    return (u @ vh).conj().T, float(sv.sum())


def alternating_maximization(delta, dims, n0, tol=1e-10, max_iter=500, contractions=None):
    """Block-coordinate ascent from the starting Y-side operator ``n0``.

    Returns (value, M, N, trace of values, converged). Each half-step is an
    exact maximization (the best M for fixed N is the conjugate polar factor
    of G and the value is ||G||_1), so the trace is nondecreasing.
    """
    c = contractions if contractions is not None else _Contractions(delta, dims)
    n = n0
    m, value = _polar_and_norm(c.reduce_y(n))
    trace = [value]
    converged = False
    for _ in range(max_iter):
        n, _ = _polar_and_norm(c.reduce_x(m))
        m, new = _polar_and_norm(c.reduce_y(n))
        trace.append(new)
        if abs(new - value) < tol:
            value = new
            converged = True
            break
        value = new
    return value, m, n, trace, converged


def correlation_estimate(rho_xy: np.ndarray, dims: tuple[int, int], restarts: int = 16, tol: float = 1e-10,
                         rng=None, max_iter: int = 500, max_dim: int | None = 64,
                         extra_witnesses: Sequence[tuple[np.ndarray, np.ndarray]] = ()) -> CorrelationEstimate:
    """Certified interval for Cor(X:Y) of a bipartite state on ``dims``."""
    dx, dy = dims
    if max_dim is not None and max(dx, dy) > max_dim:
        raise ValueError(f"per-side dimension limited to {max_dim}")
    delta = correlation_operator(rho_xy, dims)
    upper = trace_norm(delta)
    seed = rng if isinstance(rng, RngSeed) else RngSeed(0 if rng is None else int(rng))

    best = (-1.0, None, None, "")
    traces = []
    all_conv = True
    contractions = _Contractions(delta, dims)
    for r in range(restarts):
        gen = seed.stream(r).generator()
        value, m, n, trace, conv = alternating_maximization(delta, dims, _random_contraction(dy, gen), tol,
                                                            max_iter, contractions)
        traces.append(trace)
        all_conv &= conv
        if value > best[0]:
            best = (value, m, n, f"alternating[{r}]")
    for k, wtn in enumerate(datahiding_witness(delta, dims)):
        if wtn.value > best[0]:
            best = (wtn.value, wtn.x_op, wtn.y_op, f"datahiding[{k}]")
    for k, (mx, ny) in enumerate(extra_witnesses):
        v = witness_value(delta, dims, mx, ny)
        if v > best[0]:
            best = (v, mx, ny, f"extra[{k}]")
    _, m, n, src = best
    lower = witness_value(delta, dims, m, n)
    return CorrelationEstimate(lower, upper, m, n, restarts, all_conv, src, (dx, dy), traces)


# ---------------------------------------------------------------------------
# transfer operators and the MPS bound


@dataclass
class TransferSpectrum:
    eigenvalue_moduli: np.ndarray
    eta: float
    gap_ok: bool


def transfer_operator(ch: QuantumChannel) -> TransferSpectrum:
    if ch.dim**2 > 4096:
        raise ValueError("transfer operator limited to D^2 <= 4096")
    ev = np.linalg.eigvals(ch.transfer_matrix())
    mods = np.sort(np.abs(ev))[::-1]
    eta = float(mods[1]) if mods.size > 1 else 0.0
    return TransferSpectrum(mods, eta, bool(abs(mods[0] - 1) <= 1e-9))


def mps_correlation_bound(mps_or_channel, l: int) -> float:
    """D eta^l bound on ||rho_AC - rho_A (x) rho_C||_1 for regions l sites apart."""
    ch = mps_or_channel.channel() if isinstance(mps_or_channel, MatrixProductState) else mps_or_channel
    if not ch.unital:
        raise ValueError("MPS correlation bound requires a unital channel")
    return ch.dim * transfer_operator(ch).eta ** l


def block_pair_correlation(state, x: Region, y: Region, **kw) -> CorrelationEstimate:
    """Correlation estimate between two regions of a chain state."""
    rho = reduced_density(state, [x, y])
    return correlation_estimate(rho, (state.d**x.length, state.d**y.length), **kw)


def delta_trace_norm(state, x: Region, y: Region) -> float:
    """||rho_XY - rho_X (x) rho_Y||_1 for two regions of a chain state.

    For pure states with a large XY block the difference is compressed onto
    the joint support of its two terms: rho_XY has rank at most dim(rest)
    and rho_X (x) rho_Y at most rank(rho_X) rank(rho_Y), which is tiny for
    matrix product states.
    """
    dxy = state.d ** (x.length + y.length)
    if not state.is_pure or dxy <= 256:
        rho = reduced_density(state, [x, y])
        return trace_norm(correlation_operator(rho, (state.d**x.length, state.d**y.length)))
    return _delta_trace_norm_lowrank(state, x, y)


def _schmidt_factor(mat: np.ndarray, rel: float = 1e-13) -> np.ndarray:
    """Columns U diag(s) with mat mat^dag = sum of their outer products."""
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    keep = s > rel * s[0]
    return u[:, keep] * s[keep]


def _delta_trace_norm_lowrank(state, x: Region, y: Region) -> float:
    psi = state.amplitudes.reshape([state.d] * state.n)
    return lowrank_delta_trace_norm(psi, list(x.sites), list(y.sites))


def lowrank_delta_trace_norm(psi: np.ndarray, x_axes: Sequence[int], y_axes: Sequence[int]) -> float:
    """||rho_XY - rho_X (x) rho_Y||_1 for a pure state given as a tensor.

    ``x_axes`` and ``y_axes`` name tensor legs; all other legs are traced out.
    """
    xs, ys = list(x_axes), list(y_axes)
    rest = [k for k in range(psi.ndim) if k not in xs and k not in ys]
    psi = psi.transpose(xs + ys + rest)
    dx = int(np.prod([psi.shape[k] for k in range(len(xs))]))
    dy = int(np.prod([psi.shape[k] for k in range(len(xs), len(xs) + len(ys))]))
    k_xy = _schmidt_factor(psi.reshape(dx * dy, -1))
    psi_x = psi.reshape(dx, dy, -1)
    f_x = _schmidt_factor(psi_x.reshape(dx, -1))
    f_y = _schmidt_factor(psi_x.transpose(1, 0, 2).reshape(dy, -1))
    f_prod = np.kron(f_x, f_y)
    q, _ = np.linalg.qr(np.hstack([k_xy, f_prod]))
    a = q.conj().T @ k_xy
    b = q.conj().T @ f_prod
    return trace_norm(hermitize(a @ a.conj().T - b @ b.conj().T))


def block_delta_trace_norm(mps_or_channel, n_a: int, l: int, n_c: int) -> float:
    """||rho_AC - rho_A (x) rho_C||_1 for A, B, C consecutive blocks of an infinite chain.

    A has ``n_a`` sites, the gap B has ``l`` sites and C has ``n_c`` sites,
    so this is exactly the geometry of the MPS decay bound.
    """
    ch = mps_or_channel.channel() if isinstance(mps_or_channel, MatrixProductState) else mps_or_channel
    psi = open_block_purification(ch, n_a + l + n_c)
    return lowrank_delta_trace_norm(psi, range(1, 1 + n_a), range(1 + n_a + l, 1 + n_a + l + n_c))


# ---------------------------------------------------------------------------
# decay certification


@dataclass
class DecaySample:
    x: Region
    y: Region
    l: int
    upper: float
    lower: float | None
    threshold: float
    status: str  # ok | indeterminate | violated
    witness: tuple[np.ndarray, np.ndarray] | None = None


@dataclass
class DecayCertificate:
    xi: float
    l0: int
    samples: list[DecaySample]
    verdict: str  # certified | violated | indeterminate

    @property
    def certified(self) -> bool:
        return self.verdict == "certified"

    @property
    def violations(self) -> list[DecaySample]:
        return [s for s in self.samples if s.status == "violated"]

    def worst_by_separation(self) -> dict[int, tuple[float, float]]:
        """Largest (upper, lower) bound seen at each separation."""
        out: dict[int, tuple[float, float]] = {}
        for s in self.samples:
            up, lo = out.get(s.l, (0.0, 0.0))
            out[s.l] = (max(up, s.upper), max(lo, s.lower or 0.0))
        return dict(sorted(out.items()))


def region_pairs(n: int, topology: str, region_cap: int, l_min: int = 0):
    """All pairs of contiguous regions with sizes <= region_cap and separation >= l_min."""
    pairs = []
    starts = range(n)
    for lx in range(1, region_cap + 1):
        for ly in range(1, region_cap + 1):
            for sx in starts:
                if topology == "line" and sx + lx > n:
                    continue
                x = Region(sx, lx, n, topology)
                for sy in starts:
                    if topology == "line" and sy + ly > n:
                        continue
                    y = Region(sy, ly, n, topology)
                    gap = x.gap_to(y)
                    if gap < l_min:
                        continue
                    # count each unordered pair once
                    if (lx, sx) > (ly, sy):
                        continue
                    pairs.append((x, y, gap))
    return pairs


def separation_profile(state, region_cap: int, l_min: int = 1, threads: int = 1) -> dict[int, float]:
    """Largest ||Delta||_1 over region pairs at each separation (contiguous regions)."""
    pairs = region_pairs(state.n, state.topology, region_cap, l_min)
    uppers = _map(lambda p: delta_trace_norm(state, p[0], p[1]), pairs, threads)
    out: dict[int, float] = {}
    for (_, _, gap), up in zip(pairs, uppers):
        out[gap] = max(out.get(gap, 0.0), up)
    return dict(sorted(out.items()))


def decay_scan(state, region_cap: int, l_min: int = 1, restarts: int = 4, seed: int = 0,
               threads: int = 1) -> dict[int, tuple[float, float]]:
    """Worst (lower, upper) correlation bounds over region pairs at each separation."""
    pairs = region_pairs(state.n, state.topology, region_cap, l_min)

    def one(item):
        idx, (x, y, _) = item
        est = block_pair_correlation(state, x, y, restarts=restarts, rng=RngSeed(seed, idx))
        return est.lower, est.upper

    vals = _map(one, list(enumerate(pairs)), threads)
    out: dict[int, tuple[float, float]] = {}
    for (_, _, gap), (lo, up) in zip(pairs, vals):
        a, b = out.get(gap, (0.0, 0.0))
        out[gap] = (max(a, lo), max(b, up))
    return dict(sorted(out.items()))


def _map(fn, items, threads):
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def edc_certify(state, xi: float, l0: int, region_cap: int, restarts: int = 16, seed: int = 0,
                threads: int = 1, max_dim: int = 64) -> DecayCertificate:
    """Check Cor(X:Y) <= 2^(-l/xi) for every contiguous pair with separation l >= l0."""
    if xi <= 0:
        raise ValueError("correlation length must be positive")
    if state.d**region_cap > max_dim:
        raise ValueError(f"region_cap {region_cap} exceeds the dimension budget {max_dim}")
    if state.n * np.log2(state.d) > 20:
        raise ValueError("dense certification limited to n log2 d <= 20")
    pairs = region_pairs(state.n, state.topology, region_cap, max(l0, 0))

    def check(item):
        idx, (x, y, gap) = item
        thr = 2.0 ** (-gap / xi)
        rho = reduced_density(state, [x, y])
        dims = (state.d**x.length, state.d**y.length)
        up = trace_norm(correlation_operator(rho, dims))
        if up <= thr + 1e-9:
            return DecaySample(x, y, gap, up, None, thr, "ok")
        est = correlation_estimate(rho, dims, restarts=restarts, rng=RngSeed(seed, idx))
        if est.lower > thr + 1e-9:
            return DecaySample(x, y, gap, up, est.lower, thr, "violated", (est.witness_x, est.witness_y))
        return DecaySample(x, y, gap, up, est.lower, thr, "indeterminate")

    samples = _map(check, list(enumerate(pairs)), threads)
    if any(s.status == "violated" for s in samples):
        verdict = "violated"
    elif any(s.status == "indeterminate" for s in samples):
        verdict = "indeterminate"
    else:
        verdict = "certified"
    return DecayCertificate(xi, l0, samples, verdict)


class FitFailure(ValueError):
    pass


@dataclass
class CorrelationFit:
    xi: float
    l0: int
    slope: float
    intercept: float


def correlation_length_fit(samples: Sequence[tuple[float, float]], residual_bits: float = 0.5) -> CorrelationFit:
    """Fit log2 Cor = intercept - l / xi over the decaying tail.

    ``l0`` is the smallest sampled separation from which every later sample
    lies within ``residual_bits`` of the fitted line. The slope is refit on
    that tail.
    """
    pts = sorted((float(l), float(c)) for l, c in samples if c > 0)
    if len(pts) < 3:
        raise FitFailure("need at least three positive samples")
    ls = np.array([p[0] for p in pts])
    ys = np.log2([p[1] for p in pts])

    def fit(i):
        slope, icpt = np.polyfit(ls[i:], ys[i:], 1)
        return slope, icpt

    chosen = None
    for i in range(0, len(ls) - 2):
        slope, icpt = fit(i)
        resid = np.abs(ys[i:] - (icpt + slope * ls[i:]))
        if slope < 0 and resid.max() < residual_bits:
            chosen = (i, slope, icpt)
            break
    if chosen is None:
        slope, icpt = fit(len(ls) - 3)
        if slope >= 0:
            raise FitFailure("correlations do not decay")
        chosen = (len(ls) - 3, slope, icpt)
    i, slope, icpt = chosen
    if slope >= -1e-12:
        raise FitFailure("correlations do not decay")
    return CorrelationFit(float(-1 / slope), int(ls[i]), float(slope), float(icpt))


# ---------------------------------------------------------------------------
# CSV


def decay_csv(rows: Sequence[tuple[int, float, float, float]]) -> str:
    """``l,cor_lower,cor_upper,bound`` rows formatted with %.12e."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["l", "cor_lower", "cor_upper", "bound"])
    for l, lo, up, b in rows:
        w.writerow([int(l), f"{lo:.12e}", f"{up:.12e}", f"{b:.12e}"])
    return buf.getvalue()
