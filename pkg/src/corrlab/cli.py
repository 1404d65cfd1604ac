"""Command-line front end.

Every subcommand writes CSV to ``--output`` (stdout by default) and
diagnostics to stderr. Exit status is 0 on success, 1 when a checked
inequality fails (the witness goes to stderr) and 2 on usage errors.

Named states::

    ghz:n  product:n  mixed:n  tfim:n:h  aklt:n  expander:d:D:n
    haar:n (n-qubit chain)  haar:a,b,c (tripartite vector)  file:path
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import correlations as cr
from . import entropy as en
from . import protocols as pr
from . import states as stt
from .tensor import RngSeed, haar_state
from .verify import SUITES, run_suite

# stream ids keep independent experiments on disjoint random streams
_STREAM = {"state": 1, "decouple": 2, "merge": 3, "expander": 6}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# state specs


def parse_state(spec: str, seed: int = 0):
    """Build a state from a spec string.

    Returns a chain state, or ``(vector, dims)`` for ``haar:a,b,c``.
    """
    kind, _, rest = spec.partition(":")
    args = rest.split(":") if rest else []
    rng = RngSeed(seed, _STREAM["state"])
    try:
        if kind == "file":
            return stt.read_chainstate(rest)
        if kind == "ghz":
            return stt.ghz_state(int(args[0]))
        if kind == "product":
            return stt.product_state(int(args[0]))
        if kind == "mixed":
            return stt.maximally_mixed_chain(int(args[0]))
        if kind == "tfim":
            return stt.tfim_groundstate(int(args[0]), float(args[1])).state
        if kind == "aklt":
            return stt.aklt_mps(int(args[0])).to_chain()
        if kind == "expander":
            d, bond, n = (int(a) for a in args)
            return stt.expander_state(d, bond, n, rng)[0].to_chain()
        if kind == "haar":
            if "," in rest:
                dims = tuple(int(a) for a in rest.split(","))
                return haar_state(int(np.prod(dims)), rng), dims
            return stt.haar_chain(int(args[0]), rng)
    except (IndexError, ValueError, OSError) as exc:
        raise UsageError(f"bad state spec {spec!r}: {exc}") from exc
    raise UsageError(f"unknown state kind {kind!r}")


def _chain(spec: str, seed: int):
    st = parse_state(spec, seed)
    if isinstance(st, tuple):
        raise UsageError("this subcommand needs a chain state, not haar:a,b,c")
    return st


def _tripartite(spec: str, seed: int, dims_arg: str | None):
    st = parse_state(spec, seed)
    if isinstance(st, tuple):
        vec, dims = st
    elif isinstance(st, stt.ChainState):
        vec = st.amplitudes
        if dims_arg is None:
            raise UsageError("chain states need --dims a,b,c for a tripartite split")
        dims = None
    else:
        raise UsageError("tripartite experiments need a pure state")
    if dims_arg is not None:
        dims = tuple(int(a) for a in dims_arg.split(","))
    if len(dims) != 3 or int(np.prod(dims)) != vec.size:
        raise UsageError(f"dims {dims} do not split a vector of size {vec.size}")
    return vec, dims


def _region(arg: str, n: int):
    try:
        start, length = (int(a) for a in arg.split(":"))
    except ValueError as exc:
        raise UsageError(f"region must be start:length, got {arg!r}") from exc
    return start, length


def _fail(msg: str) -> int:
    print(msg, file=sys.stderr)
    return 1


def _matrix_json(m: np.ndarray) -> str:
    return json.dumps([[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)])


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(a, out):
    st = _chain(a.state, a.seed)
    if not isinstance(st, stt.ChainState):
        raise UsageError("only pure chain states can be written")
    if a.output is None:
        raise UsageError("gen needs --output")
    stt.write_chainstate(st, a.output, tol=a.tol)
    return 0, None


def cmd_cor(a, out):
    st = _chain(a.state, a.seed)
    scan = cr.decay_scan(st, a.region_cap, a.l_min, a.restarts, a.seed, a.threads)
    rows = []
    for l, (lo, up) in scan.items():
        bound = 2.0 ** (-l / a.xi) if a.xi else float("nan")
        rows.append((l, lo, up, bound))
    return 0, cr.decay_csv(rows)


def cmd_entropy(a, out):
    st = _chain(a.state, a.seed)
    start, length = _region(a.region, st.n) if a.region else (0, st.n // 2)
    rho = stt.reduced_density(st, st.region(start, length))
    h = en.von_neumann(rho)
    lines = ["region_start,region_len,eps,von_neumann,hmax_lower,hmax_upper"]
    for eps in a.eps:
        rep = en.hmax_smooth(rho, eps)
        lines.append(f"{start},{length},{eps:.12e},{h:.12e},{rep.value_lower:.12e},{rep.value_upper:.12e}")
    return 0, "\n".join(lines) + "\n"


def _fit(st, region_cap: int):
    prof = cr.separation_profile(st, region_cap, 1)
    fit = cr.correlation_length_fit(list(prof.items()))
    print(f"fitted xi={fit.xi:.6g} l0={fit.l0}", file=sys.stderr)
    return fit.xi, fit.l0


def _certify(a, st):
    if a.fit:
        xi, l0 = _fit(st, a.region_cap)
    else:
        if a.xi is None:
            raise UsageError("give --xi and --l0, or --fit")
        xi, l0 = a.xi, a.l0
    return cr.edc_certify(st, xi, l0, a.region_cap, restarts=a.restarts,
                          seed=a.seed, threads=a.threads)


def _report_violation(cert) -> str:
    s = cert.violations[0]
    return (f"decay of correlations violated: xi={cert.xi:g} l0={cert.l0} "
            f"X=sites{s.x.sites} Y=sites{s.y.sites} l={s.l} "
            f"cor_lower={s.lower:.12e} threshold={s.threshold:.12e}\n"
            f"witness_x={_matrix_json(s.witness[0])}\nwitness_y={_matrix_json(s.witness[1])}")


def cmd_edc(a, out):
    st = _chain(a.state, a.seed)
    cert = _certify(a, st)
    rows = [(l, lo, up, 2.0 ** (-l / cert.xi)) for l, (up, lo) in cert.worst_by_separation().items()]
    csv_text = cr.decay_csv(rows)
    print(f"verdict: {cert.verdict}", file=sys.stderr)
    if cert.verdict == "violated":
        return _fail(_report_violation(cert)), csv_text
    if cert.verdict == "indeterminate":
        bad = next(s for s in cert.samples if s.status == "indeterminate")
        return _fail(f"decay could not be certified: X=sites{bad.x.sites} Y=sites{bad.y.sites} l={bad.l} "
                     f"cor_upper={bad.upper:.12e} threshold={bad.threshold:.12e}"), csv_text
    return 0, csv_text


def cmd_expander(a, out):
    mps, ch = stt.expander_state(a.d, a.D, a.n, RngSeed(a.seed, _STREAM["expander"]))
    lines = ["l,purity,purity_dense,delta_trace_norm,bound"]
    code = 0
    for l in range(1, a.n - 1):
        pur = stt.expander_purity(ch, l)
        dense = stt.expander_purity_dense(ch, l) if a.d**l <= 256 else float("nan")
        worst = max(cr.block_delta_trace_norm(ch, r, l, a.n - r - l) for r in range(1, a.n - l))
        bound = cr.mps_correlation_bound(ch, l)
        lines.append(f"{l},{pur:.12e},{dense:.12e},{worst:.12e},{bound:.12e}")
        if worst > bound + 1e-8 and code == 0:
            code = _fail(f"MPS correlation bound violated at l={l}: {worst:.12e} > {bound:.12e}")
        if np.isfinite(dense) and abs(dense - pur) > 1e-10 and code == 0:
            code = _fail(f"purity identity failed at l={l}: {pur:.12e} vs {dense:.12e}")
    return code, "\n".join(lines) + "\n"


def cmd_decouple(a, out):
    run = pr.haar_decoupling_experiment(a.dimA, a.dimB, a.samples, RngSeed(a.seed, _STREAM["decouple"]), a.threads)
    text = pr.decoupling_csv(run)
    if not run.holds:
        return _fail(f"Haar decoupling bound violated: mean={run.mean:.12e} bound={run.bound:.12e}"), text
    return 0, text


def cmd_merge(a, out):
    vec, dims = _tripartite(a.state, a.seed, a.dims)
    rs = RngSeed(a.seed, _STREAM["merge"])
    run = pr.decoupling_merging_experiment(vec, dims, a.L, a.povms, rs, a.threads)
    rep = pr.merging_rate_report(vec, dims, a.eps)
    print(f"log N bound={rep.log_n_bound:.12e} log L bound (-H_max(A|C))={rep.log_l_bound_minus:.12e} "
          f"error bound={rep.error_bound:.12e}", file=sys.stderr)
    text = pr.merging_csv(run)
    if not run.holds:
        return _fail(f"measurement decoupling bound violated: best={run.best:.12e} bound={run.bound:.12e}"), text
    return 0, text


def cmd_saturate(a, out):
    st = _chain(a.state, a.seed)
    res = pr.saturation_scan(st, a.start, a.eps, a.l0, geometry=a.geometry, budget=a.budget, l_max=a.l_max)
    lines = ["l,start,mutual_info,threshold"]
    for l, start, mi in res.scanned:
        lines.append(f"{l},{start},{mi:.12e},{a.eps * l:.12e}")
    where = res.region[1]
    print(f"saturation {'met' if res.met else 'not met'}: l={res.l} center=sites{where.sites} "
          f"I={res.mutual_info:.12e} threshold={res.threshold:.12e}", file=sys.stderr)
    return 0, "\n".join(lines) + "\n"


def cmd_theorem(a, out):
    st = _chain(a.state, a.seed)
    cert = _certify(a, st)
    if cert.verdict == "violated":
        return _fail(_report_violation(cert)), None
    if not cert.certified:
        return _fail("decay could not be certified; the harness needs a certificate"), None
    window = tuple(int(x) for x in a.window.split(":")) if a.window else None
    rep = pr.theorem_harness(st, cert, window=window, tolerance=a.tolerance, l_max=a.l_max)
    text = pr.theorem_csv(rep)
    if rep.hmax_total is None:
        print(f"saturation gap={rep.saturation_gap:.6g} over block sizes {rep.saturation_window}", file=sys.stderr)
        if not rep.passes_pure_form:
            return _fail(f"block entropies do not saturate: gap {rep.saturation_gap:.12e} > {rep.tolerance}"), text
    else:
        print(f"normalized excess={rep.normalized_excess:.6g}", file=sys.stderr)
        if not rep.passes_normalized_form:
            return _fail(f"normalized bound violated: excess {rep.normalized_excess:.12e} > 1"), text
    return 0, text


def cmd_verify(a, out):
    names = list(SUITES) if a.suite == "all" else [a.suite]
    lines, failed = [], False
    for name in names:
        for res in run_suite(name, a.seed):
            lines.append(f"[{name}] {res.line()}")
            failed |= not res.passed
    text = "\n".join(lines) + "\n"
    if failed:
        print("one or more checks failed", file=sys.stderr)
    return (1 if failed else 0), text


# ---------------------------------------------------------------------------
# parser


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="root seed (default 0)")
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads (default 1)")
    p.add_argument("--output", default=argparse.SUPPRESS, help="output path (default stdout)")
    p.add_argument("--config", default=argparse.SUPPRESS, help="file of key=value lines")
    return p


def _edc_args(p):
    p.add_argument("--state", required=True)
    p.add_argument("--xi", type=float, default=None, help="correlation length")
    p.add_argument("--l0", type=int, default=0, help="smallest separation checked (default 0)")
    p.add_argument("--region-cap", type=int, default=2, help="largest region size (default 2)")
    p.add_argument("--restarts", type=int, default=16, help="alternating restarts per pair (default 16)")
    p.add_argument("--fit", action="store_true", help="fit (xi, l0) from the state first")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    top = argparse.ArgumentParser(prog="corrlab", description=__doc__,
                                  formatter_class=argparse.RawDescriptionHelpFormatter)
    top.add_argument("--seed", type=int, default=0)
    top.add_argument("--threads", type=int, default=1)
    top.add_argument("--output", default=None)
    top.add_argument("--config", default=None)
    sub = top.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("gen", parents=[common], help="write a named state to a chainstate file", formatter_class=fmt)
    p.add_argument("--state", required=True)
    p.add_argument("--tol", type=float, default=0.0, help="drop amplitudes at or below this modulus")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("cor", parents=[common], help="correlation decay scan", formatter_class=fmt)
    p.add_argument("--state", required=True)
    p.add_argument("--region-cap", type=int, default=2)
    p.add_argument("--l-min", type=int, default=1)
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--xi", type=float, default=None, help="fill the bound column with 2^(-l/xi)")
    p.set_defaults(func=cmd_cor)

    p = sub.add_parser("entropy", parents=[common], help="entropies of one region", formatter_class=fmt)
    p.add_argument("--state", required=True)
    p.add_argument("--region", default=None, help="start:length (default first half)")
    p.add_argument("--eps", type=float, nargs="+", default=[0.01])
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("edc-certify", parents=[common], help="certify exponential decay", formatter_class=fmt)
    _edc_args(p)
    p.set_defaults(func=cmd_edc)

    p = sub.add_parser("expander", parents=[common], help="expander purity and MPS bound", formatter_class=fmt)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--D", type=int, default=3)
    p.add_argument("--n", type=int, default=10)
    p.set_defaults(func=cmd_expander)

    p = sub.add_parser("decouple", parents=[common], help="Haar decoupling experiment", formatter_class=fmt)
    p.add_argument("--dimA", type=int, required=True)
    p.add_argument("--dimB", type=int, required=True)
    p.add_argument("--samples", type=int, default=200)
    p.set_defaults(func=cmd_decouple)

    p = sub.add_parser("merge", parents=[common], help="measurement decoupling and merging rates",
                       formatter_class=fmt)
    p.add_argument("--state", default="haar:4,2,4")
    p.add_argument("--dims", default=None, help="a,b,c split for chain states")
    p.add_argument("--L", type=int, default=2, help="POVM element rank")
    p.add_argument("--povms", type=int, default=10, help="POVM samples")
    p.add_argument("--eps", type=float, default=0.01)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("saturate", parents=[common], help="mutual information saturation scan", formatter_class=fmt)
    p.add_argument("--state", required=True)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--l0", type=int, default=1)
    p.add_argument("--geometry", choices=["appendixB", "lemma2"], default="appendixB")
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--l-max", type=int, default=None)
    p.set_defaults(func=cmd_saturate)

    p = sub.add_parser("theorem", parents=[common], help="block max-entropy table", formatter_class=fmt)
    _edc_args(p)
    p.add_argument("--window", default=None, help="lo:hi block sizes for the saturation gap")
    p.add_argument("--tolerance", type=float, default=0.1)
    p.add_argument("--l-max", type=int, default=None)
    p.set_defaults(func=cmd_theorem)

    p = sub.add_parser("verify", parents=[common], help="run the verification suites", formatter_class=fmt)
    p.add_argument("--suite", choices=["all", *SUITES], default="all")
    p.set_defaults(func=cmd_verify)
    return top


def _config_flags(path: str) -> list[str]:
    flags = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"config line {raw!r} is not key=value")
        key, value = key.strip().replace("_", "-"), value.strip()
        if value.lower() in ("true", "yes", "on"):
            flags.append(f"--{key}")
        elif value.lower() in ("false", "no", "off"):
            continue
        else:
            flags += [f"--{key}", *value.split()]
    return flags


def _splice_config(argv: list[str], parser: argparse.ArgumentParser) -> list[str]:
    """Insert config-file flags right after the subcommand, so explicit flags win."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return argv
    flags = _config_flags(known.config)
    commands = set(parser._subparsers._group_actions[0].choices)
    for i, tok in enumerate(argv):
        if tok in commands:
            return argv[: i + 1] + flags + argv[i + 1:]
    return argv


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _splice_config(argv, parser)
    except (UsageError, OSError) as exc:
        print(f"corrlab: {exc}", file=sys.stderr)
        return 2
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        code, text = a.func(a, a.output)
    except cr.FitFailure as exc:
        print(f"corrlab: correlation fit failed: {exc}", file=sys.stderr)
        return 1
    except (UsageError, ValueError) as exc:
        print(f"corrlab: {exc}", file=sys.stderr)
        return 2
    if text is not None and a.command != "gen":
        if a.output:
            Path(a.output).write_text(text)
        else:
            sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
