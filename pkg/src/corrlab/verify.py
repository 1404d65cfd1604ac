"""Seeded inequality suites behind ``corrlab verify``.

Each suite draws its instances from ``RngSeed(seed)`` streams, checks one or
more inequalities and returns :class:`CheckResult` records. A failing record
carries a witness string with enough numbers to re-check it by hand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import correlations as cr
from . import entropy as en
from . import metrics as mt
from . import protocols as pr
from . import states as stt
from .tensor import RngSeed, haar_state, maximally_entangled, partial_trace, projector, random_density


@dataclass
class CheckResult:
    name: str
    instances: int
    violations: int
    worst: float = 0.0  # largest (lhs - rhs) seen; <= 0 means slack
    witness: str = ""
    skipped: int = 0

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.instances > 0

    def line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        extra = f", skipped {self.skipped}" if self.skipped else ""
        text = f"{self.name}: {status} ({self.instances} instances, {self.violations} violations, worst slack {-self.worst:.3e}{extra})"
        if self.witness and not self.passed:
            text += f"\n  witness: {self.witness}"
        return text


class _Tally:
    def __init__(self, name: str):
        self.r = CheckResult(name, 0, 0, -np.inf)

    def add(self, lhs: float, rhs: float, tol: float, witness: str = ""):
        self.r.instances += 1
        gap = lhs - rhs
        if gap > self.r.worst:
            self.r.worst = gap
        if gap > tol:
            if not self.r.violations:
                self.r.witness = witness or f"lhs={lhs!r} rhs={rhs!r}"
            self.r.violations += 1

    def skip(self):
        self.r.skipped += 1

    def result(self) -> CheckResult:
        if self.r.worst == -np.inf:
            self.r.worst = 0.0
        return self.r


def _pair_states(gen_seed: RngSeed, k: int):
    gen = gen_seed.stream(k).generator()
    d = int(gen.integers(2, 9))
    rho = random_density(d, gen, rank=int(gen.integers(1, d + 1)))
    sig = random_density(d, gen, rank=int(gen.integers(1, d + 1)))
    if k % 4 == 3:  # subnormalized pairs exercise the generalized definitions
        rho = rho * gen.uniform(0.5, 1.0)
        sig = sig * gen.uniform(0.5, 1.0)
    return rho, sig


# ---------------------------------------------------------------------------


def suite_metrics(seed: int = 0, pairs: int = 1000) -> list[CheckResult]:
    base = RngSeed(seed, 101)
    lo, hi = _Tally("trace distance <= purified distance"), _Tally("purified distance <= sqrt(2 trace distance)")
    for k in range(pairs):
        rho, sig = _pair_states(base, k)
        d1 = mt.d1_distance(rho, sig)
        dp = mt.purified_distance(rho, sig)
        w = f"pair {k}: D1={d1!r} D={dp!r}"
        lo.add(d1, dp, 1e-9, w)
        hi.add(dp, np.sqrt(2 * d1), 1e-9, w)
    return [lo.result(), hi.result()]


def suite_entropy(seed: int = 0, instances: int = 500, fannes_pairs: int = 1000) -> list[CheckResult]:
    fan = _Tally("Fannes inequality (purified distance <= 1/2)")
    base = RngSeed(seed, 201)
    k = 0
    while fan.r.instances < fannes_pairs:
        gen = base.stream(k).generator()
        k += 1
        d = int(gen.integers(2, 9))
        rho = random_density(d, gen)
        t = gen.uniform(0, 0.5) ** 2
        sig = (1 - t) * rho + t * random_density(d, gen)
        dist = mt.purified_distance(rho, sig)
        if dist > 0.5:
            continue
        lhs = abs(en.von_neumann(rho) - en.von_neumann(sig))
        fan.add(lhs, en.fannes_bound(d, dist), 1e-9, f"d={d} D={dist!r} |dS|={lhs!r}")

    sub = _Tally("subadditivity of smooth max-entropy")
    base = RngSeed(seed, 202)
    for k in range(instances):
        gen = base.stream(k).generator()
        da, db = int(gen.integers(2, 5)), int(gen.integers(2, 5))
        rho = random_density(da * db, gen, rank=int(gen.integers(1, da * db + 1)))
        e1, e2, e3 = gen.uniform(0.01, 0.2, size=3)
        tot = e1 + e2 + 2 * e3
        lhs = en.hmax_smooth(rho, tot).value_lower
        rhs = (en.hmax_smooth(partial_trace(rho, (da, db), [0]), e2).value_upper
               + en.hmax_smooth(partial_trace(rho, (da, db), [1]), e3).value_upper + np.log2(2 / e1**2))
        sub.add(lhs, rhs, 1e-9, f"dims=({da},{db}) eps=({e1},{e2},{e3})")

    qep = _Tally("equipartition for i.i.d. qubit states")
    base = RngSeed(seed, 203)
    for k in range(instances):
        gen = base.stream(k).generator()
        n = int(gen.integers(1, 13))
        eps = (0.01, 0.1)[k % 2]
        pi = random_density(2, gen)
        w = en.spectrum(pi)
        lhs = en.hmax_from_spectrum(en.product_spectrum([w] * n), eps).value_lower
        rhs = en.qep_bound(n, en.von_neumann(pi), 2, eps)
        qep.add(lhs, rhs, 1e-9, f"n={n} eps={eps} spectrum={w.tolist()}")
    return [fan.result(), sub.result(), qep.result()]


def suite_sdp(seed: int = 0, instances: int = 200) -> list[CheckResult]:
    gap = _Tally("min-entropy SDP duality gap <= 1e-8")
    feas = _Tally("SDP witnesses feasible to 1e-9")
    base = RngSeed(seed, 301)
    for k in range(instances):
        gen = base.stream(k).generator()
        # total dimension up to 64; |B| <= 16 keeps the |B|^2 x |B|^2 Newton system small
        da = int(gen.integers(1, 9))
        db = int(gen.integers(1, min(16, 64 // da) + 1))
        rho = random_density(da * db, gen, rank=int(gen.integers(1, da * db + 1)))
        sol = en.hmin_conditional(rho, (da, db))
        gap.add(sol.gap, 1e-8, 0.0, f"instance {k} dims=({da},{db}) gap={sol.gap!r}")
        feas.add(0.0 if sol.verify(rho, 1e-9) else 1.0, 0.0, 0.0, f"instance {k} dims=({da},{db})")

    closed = _Tally("min-entropy closed forms to 1e-6")
    for d in (2, 3, 4, 5):
        phi = projector(maximally_entangled(d))
        v = en.hmin_conditional(phi, (d, d)).value
        closed.add(abs(v + np.log2(d)), 1e-6, 0.0, f"maximally entangled d={d}: {v!r}")
    for k in range(20):
        gen = RngSeed(seed, 302).stream(k).generator()
        da, db = int(gen.integers(2, 5)), int(gen.integers(1, 5))
        ra, rb = random_density(da, gen), random_density(db, gen)
        v = en.hmin_conditional(np.kron(ra, rb), (da, db)).value
        ref = -np.log2(np.linalg.eigvalsh(ra)[-1])
        closed.add(abs(v - ref), 1e-6, 0.0, f"product dims=({da},{db}): {v!r} vs {ref!r}")
        v1 = en.hmin_conditional(ra, (da, 1)).value
        closed.add(abs(v1 - ref), 1e-6, 0.0, f"trivial B dim {da}: {v1!r} vs {ref!r}")
    return [gap.result(), feas.result(), closed.result()]


def suite_correlations(seed: int = 0, instances: int = 500, restarts: int = 2) -> list[CheckResult]:
    lower = _Tally("lower >= ||Delta||_1 / d_min^2")
    upper = _Tally("lower <= ||Delta||_1")
    mono = _Tally("alternating value nondecreasing")
    base = RngSeed(seed, 401)
    for k in range(instances):
        gen = base.stream(k).generator()
        rho = random_density(16, gen, rank=int(gen.integers(1, 17)))
        est = cr.correlation_estimate(rho, (4, 4), restarts=restarts, rng=base.stream(k).stream(1))
        w = f"instance {k}: lower={est.lower!r} upper={est.upper!r}"
        lower.add(est.upper / 16 - est.lower, 0.0, 1e-9, w)
        upper.add(est.lower, est.upper, 1e-9, w)
        drops = max((float(np.max(-np.diff(t))) for t in est.traces if len(t) > 1), default=0.0)
        mono.add(drops, 0.0, 1e-12, f"instance {k}: value decreased by {drops!r}")
    bell = _Tally("maximally entangled qubits: Z (x) Z witness reaches 1")
    phi = projector(maximally_entangled(2))
    z = np.diag([1.0, -1.0])
    delta = cr.correlation_operator(phi, (2, 2))
    est = cr.correlation_estimate(phi, (2, 2))
    bell.add(1.0 - cr.witness_value(delta, (2, 2), z, z), 0.0, 1e-9, "Z (x) Z value")
    bell.add(1.0 - est.lower, 0.0, 1e-9, f"estimate lower={est.lower!r}")
    bell.add(abs(est.upper - 1.5), 0.0, 1e-9, f"estimate upper={est.upper!r}")
    return [lower.result(), upper.result(), mono.result(), bell.result()]


def suite_mps(seed: int = 0, expander_samples: int = 20) -> list[CheckResult]:
    spec = _Tally("AKLT transfer moduli {1, 1/3, 1/3, 1/3}")
    ts = cr.transfer_operator(stt.aklt_mps(9).channel())
    spec.add(float(np.max(np.abs(ts.eigenvalue_moduli - [1, 1 / 3, 1 / 3, 1 / 3]))), 0.0, 1e-8,
             f"moduli={ts.eigenvalue_moduli.tolist()}")
    bound = _Tally("||rho_AC - rho_A (x) rho_C||_1 <= D eta^l")
    ch = stt.aklt_mps(9).channel()
    for l in range(1, 8):
        for r in range(1, 9 - l):
            v = cr.block_delta_trace_norm(ch, r, l, 9 - r - l)
            bound.add(v, cr.mps_correlation_bound(ch, l), 1e-8, f"AKLT |A|={r} l={l}: {v!r}")
    for s in range(expander_samples):
        _, ch = stt.expander_state(2, 3, 10, RngSeed(seed, 501).stream(s))
        b = [cr.mps_correlation_bound(ch, l) for l in range(10)]
        for l in range(1, 9):
            for r in range(1, 10 - l):
                v = cr.block_delta_trace_norm(ch, r, l, 10 - r - l)
                bound.add(v, b[l], 1e-8, f"expander sample {s} |A|={r} l={l}: {v!r} > {b[l]!r}")
    return [spec.result(), bound.result()]


def suite_expander(seed: int = 0, samples: int = 20, k_max: float = 10.0) -> list[CheckResult]:
    ident = _Tally("purity: channel formula = dense block state")
    for d in (2, 3):
        for D in (2, 3, 4):
            _, ch = stt.expander_state(d, D, 4, RngSeed(seed, 601).stream(10 * d + D))
            for l in (1, 2, 3):
                a, b = stt.expander_purity(ch, l), stt.expander_purity_dense(ch, l)
                ident.add(abs(a - b), 0.0, 1e-10, f"(d,D,l)=({d},{D},{l}): {a!r} vs {b!r}")
    scale = _Tally(f"mean purity <= 1/D^2 + k l / d^l with k <= {k_max:g}")
    d, D = 2, 4
    need = 0.0
    for l in range(1, 7):
        vals = [stt.expander_purity(stt.expander_state(d, D, 4, RngSeed(seed, 602).stream(s))[1], l)
                for s in range(samples)]
        need = max(need, (np.mean(vals) - 1 / D**2) * d**l / l)
    scale.add(need, k_max, 0.0, f"smallest admissible k={need!r}")
    return [ident.result(), scale.result()]


def suite_decoupling(seed: int = 0, samples: int = 200) -> list[CheckResult]:
    out = []
    for da, db in ((64, 4), (256, 4)):
        run = pr.haar_decoupling_experiment(da, db, samples, RngSeed(seed, 701 + da))
        t = _Tally(f"Haar decoupling mean at ({da},{db}) <= (2|B|/|A|)^(1/4)")
        t.add(run.mean, run.bound, 0.0, f"mean={run.mean!r} bound={run.bound!r}")
        out.append(t.result())
    return out


def suite_povm(seed: int = 0, states: int = 100, povms: int = 10) -> list[CheckResult]:
    t = _Tally("rank-L measurement decoupling error <= bound")
    for k in range(states):
        psi = haar_state(32, RngSeed(seed, 801).stream(k))
        run = pr.decoupling_merging_experiment(psi, (4, 2, 4), 2, povms, RngSeed(seed, 802).stream(k))
        t.add(run.best, run.bound, 1e-9, f"state {k}: best={run.best!r} bound={run.bound!r}")
    fam = _Tally("POVM completeness and orthogonality")
    for k in range(20):
        da = 2 + k % 7
        L = 1 + k % da
        p = pr.random_rank_povm(da, L, RngSeed(seed, 803).stream(k))
        off = max((float(np.abs(a @ b).max()) for i, a in enumerate(p.elements) for b in p.elements[i + 1:]),
                  default=0.0)
        fam.add(max(p.residual, off), 0.0, 1e-10, f"dim={da} L={L} residual={p.residual!r} overlap={off!r}")
    return [t.result(), fam.result()]


def suite_merging(seed: int = 0) -> list[CheckResult]:
    t = _Tally("merging ingredients match closed forms")
    eps = 0.01
    tail = -4 * np.log2(eps) + 2 * np.log2(13)
    prod = np.kron(np.kron(haar_state(2, RngSeed(seed, 901)), haar_state(2, RngSeed(seed, 902))),
                   haar_state(2, RngSeed(seed, 903)))
    rep = pr.merging_rate_report(prod, (2, 2, 2), eps)
    t.add(abs(rep.log_n_bound - tail), 0.0, 1e-6, f"product log N bound {rep.log_n_bound!r}")
    for d in (2, 3, 4):
        rep = pr.merging_rate_report(maximally_entangled(d), (d, 1, d), eps)
        t.add(abs(-rep.hmax_a_given_c.value_upper - np.log2(d)), 0.0, 1e-6, f"maximally entangled d={d}")
    ghz = np.zeros(8)
    ghz[0] = ghz[7] = 1 / np.sqrt(2)
    rep = pr.merging_rate_report(ghz, (2, 2, 2), eps)
    # dense oracle: rho_AB = (|00><00| + |11><11|)/2 gives H_min(A|B) = 0 and H_max(A|C) = 0
    t.add(abs(rep.hmin_a_given_b), 0.0, 1e-6, f"GHZ H_min(A|B)={rep.hmin_a_given_b!r}")
    t.add(abs(rep.hmax_a_given_c.value_upper), 0.0, 1e-6, "GHZ H_max(A|C)")
    t.add(abs(rep.hmax_a.value_upper - 1.0), 0.0, 1e-6, "GHZ H_max^eps(A)")
    t.add(max(abs(a - b) for a, b in zip(rep.recompute(), (rep.log_n_bound, rep.log_l_bound_plus,
                                                           rep.log_l_bound_minus))), 0.0, 1e-12, "recompute")
    return [t.result()]


def suite_boost(seed: int = 0, states: int = 200, delta: float = 0.01) -> list[CheckResult]:
    t = _Tally("correlation boost inequality (direction-safe)")
    for k in range(states):
        psi = haar_state(32, RngSeed(seed, 1001).stream(k))
        c = pr.lemma1_part3_check(psi, (4, 2, 4), delta, rng=RngSeed(seed, 1002).stream(k))
        if c.status == "skipped":
            t.skip()
            continue
        t.add(-c.worst_margin, 0.0, 1e-9, f"state {k}: gamma grid {c.gammas} margins {c.margins}")
    cn = _Tally("measurement lower bound examples")
    phi = projector(maximally_entangled(2))
    v = pr.cor_lower_from_measurement(phi, (2, 2), np.diag([1.0, 0.0]))
    cn.add(abs(v - 1 / 8), 0.0, 1e-12, f"value {v!r}")
    v = pr.cor_lower_from_measurement(phi, (2, 2), np.eye(2))
    cn.add(abs(v), 0.0, 1e-12, f"identity effect {v!r}")
    return [t.result(), cn.result()]


def suite_edc(seed: int = 0, haar_samples: int = 3, haar_threshold: float = 0.2) -> list[CheckResult]:
    ghz = _Tally("GHZ:10 strictly violates decay for xi <= 4, l0 <= 3")
    g = stt.ghz_state(10)
    for xi in (0.5, 1.0, 2.0, 3.0, 4.0):
        for l0 in (0, 1, 2, 3):
            c = cr.edc_certify(g, xi, l0, 2, restarts=4, seed=seed)
            ghz.add(0.0 if c.verdict == "violated" else 1.0, 0.0, 0.0, f"xi={xi} l0={l0} verdict={c.verdict}")
    tfim = _Tally("TFIM n=12 h=2 certified with its fitted (xi, l0)")
    st = stt.tfim_groundstate(12, 2.0).state
    prof = cr.separation_profile(st, 3, 1)
    fit = cr.correlation_length_fit(list(prof.items()))
    c = cr.edc_certify(st, fit.xi, fit.l0, 3, seed=seed)
    tfim.add(0.0 if c.certified else 1.0, 0.0, 0.0, f"xi={fit.xi} l0={fit.l0} verdict={c.verdict}")
    haar = _Tally(f"Haar 12 qubits: Cor(A:C) >= {haar_threshold}")
    for s in range(haar_samples):
        psi = stt.haar_chain(12, RngSeed(seed, 1101).stream(s))
        est = cr.block_pair_correlation(psi, stt.Region(1, 2, 12), stt.Region(4, 8, 12), restarts=2, max_iter=50,
                                        max_dim=None, rng=RngSeed(seed, 1102).stream(s))
        haar.add(haar_threshold - est.lower, 0.0, 0.0, f"sample {s}: lower={est.lower!r}")
    return [ghz.result(), tfim.result(), haar.result()]


def suite_saturation(seed: int = 0) -> list[CheckResult]:
    t = _Tally("saturation scan examples")
    r = pr.saturation_scan(stt.product_state(8), 0, 0.1, 1)
    t.add(0.0 if (r.met and r.l == 1 and abs(r.mutual_info) < 1e-9) else 1.0, 0.0, 0.0, "product")
    st = stt.tfim_groundstate(12, 2.0).state
    r = pr.saturation_scan(st, 0, 0.5, 2)
    t.add(0.0 if (r.met and r.l <= 4) else 1.0, 0.0, 0.0, f"TFIM l={r.l} I={r.mutual_info}")
    r = pr.saturation_scan(stt.ghz_state(10), 0, 0.1, 1)
    t.add(0.0 if not r.met else 1.0, 0.0, 0.0, f"GHZ met={r.met}")
    recheck = _Tally("scan mutual information matches direct recomputation")
    hs = stt.haar_chain(8, RngSeed(seed, 1201))
    for geometry in ("appendixB", "lemma2"):
        r = pr.saturation_scan(hs, 0, 1e-6, 1, geometry=geometry)
        for l, start, mi in r.scanned:
            xl, xc, xr, _ = pr.saturation_regions(8, start, l, geometry)
            sites_b = [s for reg in (xl, xr) if reg is not None for s in reg.sites]
            rho = hs.reduced(list(xc.sites) + sites_b)
            ref = en.mutual_information(rho, (2**xc.length, 2 ** len(sites_b)))
            recheck.add(abs(mi - ref), 0.0, 1e-9, f"l={l} start={start}")
    return [t.result(), recheck.result()]


def suite_theorem(seed: int = 0) -> list[CheckResult]:
    t = _Tally("TFIM block table saturates (block sizes 4..6, 0.1 bit)")
    st = stt.tfim_groundstate(12, 2.0).state
    prof = cr.separation_profile(st, 3, 1)
    fit = cr.correlation_length_fit(list(prof.items()))
    cert = cr.edc_certify(st, fit.xi, fit.l0, 3, seed=seed)
    rep = pr.theorem_harness(st, cert, window=(4, 6))
    t.add(rep.saturation_gap, 0.1, 0.0, f"gap={rep.saturation_gap!r}")
    mm = _Tally("maximally mixed 8 sites passes only the normalized form")
    mix = stt.maximally_mixed_chain(8)
    cert = cr.edc_certify(mix, 0.5, 0, 2, seed=seed)
    rep = pr.theorem_harness(mix, cert)
    mm.add(0.0 if (rep.passes_normalized_form and not rep.passes_pure_form) else 1.0, 0.0, 0.0,
           f"gap={rep.saturation_gap!r} normalized excess={rep.normalized_excess!r}")
    return [t.result(), mm.result()]


SUITES = {
    "metrics": suite_metrics,
    "entropy": suite_entropy,
    "sdp": suite_sdp,
    "correlations": suite_correlations,
    "mps": suite_mps,
    "expander": suite_expander,
    "decoupling": suite_decoupling,
    "povm": suite_povm,
    "merging": suite_merging,
    "boost": suite_boost,
    "edc": suite_edc,
    "saturation": suite_saturation,
    "theorem": suite_theorem,
}


def run_suite(name: str, seed: int = 0) -> list[CheckResult]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return SUITES[name](seed)
