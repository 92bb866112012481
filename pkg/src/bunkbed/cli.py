"""``bunkbed`` command line.

Every command prints a RunRecord: human-readable text by default, one
canonical JSON object with ``--json``.  Exit codes: 0 success, 2 usage or
validation error, 3 verification mismatch, 4 sign not certified,
5 bunkbed violation found.
"""
from __future__ import annotations

import argparse
import json
import logging
import platform
import sys
import time
from fractions import Fraction
from pathlib import Path

import gmpy2
import numpy as np

from . import __version__, kernels
from .analysis import (
    GapReport,
    ScanReport,
    bbc_gap_exact,
    batch_scan,
    complete_bbc_gap_exact,
    counterexample_gap,
)
from .certified import fraction_str
from .exact import (
    EnumerationCapExceeded,
    HyperedgeKernel,
    check_eq390,
    gadget_kernel_bruteforce,
    gadget_kernel_closed,
)
from .formats import FormatError, emit_edge_list, iter_graph6_file, parse_edge_list, parse_graph6
from .graphs import (
    HOLLOM_POLES,
    BunkbedInstance,
    build_complete_clone_instance,
    build_hollom,
)
from .hyper import alt_bunkbed_probs
from .montecarlo import RNG_NAME, McEstimate, mc_gap_alternative, mc_gap_standard

log = logging.getLogger("bunkbed")

EXIT_OK, EXIT_USAGE, EXIT_MISMATCH, EXIT_UNCERTIFIED, EXIT_VIOLATION = 0, 2, 3, 4, 5


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# serialization


def versions() -> dict:
    return {
        "artifact": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "gmpy2": gmpy2.version(),
        "rng": RNG_NAME,
        "backend": kernels.BACKEND,
    }


def kernel_json(k: HyperedgeKernel) -> dict:
    return {
        "p_abc": fraction_str(k.p_abc),
        "p_ab_c": fraction_str(k.p_ab_c),
        "p_ac_b": fraction_str(k.p_ac_b),
        "p_a_bc": fraction_str(k.p_a_bc),
        "p_a_b_c": fraction_str(k.p_a_b_c),
    }


def _log10_window(x) -> list:
    lo, hi = x.log10_abs_window()
    if lo == hi:
        return [round(lo, 6)]
    # integer window when the interval endpoints disagree
    return [int(np.floor(lo)) if lo != float("-inf") else None, int(np.ceil(hi))]


def gap_report_json(r: GapReport) -> dict:
    return {
        "p_same": r.p_same.to_json(),
        "p_cross": r.p_cross.to_json(),
        "gap": r.gap.to_json(),
        "sign": r.sign.value,
        "log10_abs_gap": _log10_window(r.gap) if r.gap.sign() != 0 else None,
        "method": r.method,
        "instance_summary": r.instance_summary,
        "precision_bits": r.precision_bits,
        "work": r.work,
    }


def run_record(command: str, inputs: dict, result, wall_time: float) -> dict:
    return {
        "command": command,
        "inputs": inputs,
        "result": result,
        "versions": versions(),
        "wall_time": round(wall_time, 6),
    }


def dumps(record: dict) -> str:
    return json.dumps(record, separators=(",", ":"), ensure_ascii=True)


# --------------------------------------------------------------------------
# argument helpers


def rational(text: str) -> Fraction:
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc
    if not 0 <= value <= 1:
        raise argparse.ArgumentTypeError(f"probability {text} outside [0, 1]")
    return value


def vertex_list(text: str) -> frozenset:
    text = text.strip()
    if not text:
        return frozenset()
    try:
        return frozenset(int(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated vertices, got {text!r}") from exc


def _load_graph(args):
    if args.graph is not None:
        try:
            g = parse_edge_list(Path(args.graph).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read {args.graph}: {exc}") from exc
        return g.with_probability(args.p) if args.p is not None else g
    return parse_graph6(args.graph6, args.p if args.p is not None else Fraction(1, 2))


# --------------------------------------------------------------------------
# commands


def cmd_gadget_kernel(args):
    if args.n < 2:
        raise UsageError("gadget kernel needs n >= 2")
    if not 0 < args.p < 1:
        raise UsageError("p must lie strictly between 0 and 1")
    k = gadget_kernel_closed(args.n, args.p)
    result = {"kernel": kernel_json(k)}
    code = EXIT_OK
    if args.check_390:
        result["check_390"] = check_eq390(k)
    if args.oracle:
        if args.n > 6:
            raise UsageError("--oracle enumerates 2^(2n-1) subsets and is limited to n <= 6")
        ok = gadget_kernel_bruteforce(args.n, args.p) == k
        result["oracle"] = "OK" if ok else "MISMATCH"
        code = EXIT_OK if ok else EXIT_MISMATCH
    lines = [f"{name} = {value}" for name, value in result["kernel"].items()]
    if "check_390" in result:
        lines.append(f"check_390 = {str(result['check_390']).lower()}")
    if "oracle" in result:
        lines.append(f"oracle: {result['oracle']}")
    return {"n": args.n, "p": str(args.p), "check_390": args.check_390, "oracle": args.oracle}, result, lines, code


def cmd_hollom_check(args):
    same, cross = alt_bunkbed_probs(build_hollom(), *HOLLOM_POLES)
    ok = (same, cross) == (Fraction(12, 64), Fraction(13, 64))
    result = {
        "p_same": str(same),
        "p_cross": str(cross),
        "p_same_64": f"{same * 64}/64",
        "p_cross_64": f"{cross * 64}/64",
        "status": "PASS" if ok else "FAIL",
    }
    lines = [f"p_same  = {same} = {same * 64}/64", f"p_cross = {cross} = {cross * 64}/64",
             result["status"]]
    return {}, result, lines, EXIT_OK if ok else EXIT_MISMATCH


def _gap_lines(r: GapReport) -> list[str]:
    out = [f"sign: {r.sign.value}", f"p_same: {_short(r.p_same)}", f"p_cross: {_short(r.p_cross)}",
           f"gap: {_short(r.gap)}"]
    if r.gap.sign() != 0:
        out.append(f"log10|gap|: {_log10_window(r.gap)}")
    out.append(f"method: {r.method}, work: {r.work}" +
               (f", precision: {r.precision_bits} bits" if r.precision_bits else ""))
    out.append("instance: " + ", ".join(f"{k}={v}" for k, v in r.instance_summary.items()))
    return out


def _short(x, limit: int = 120) -> str:
    text = str(x)
    if len(text) > limit:
        return text[:limit // 2] + f"...({len(text)} chars)"
    return text


def cmd_counterexample(args):
    if args.n < 2:
        raise UsageError("n must be >= 2")
    if not 0 < args.p < 1:
        raise UsageError("p must lie strictly between 0 and 1")
    r = counterexample_gap(args.n, args.p, mode=args.mode, bits=args.bits, max_bits=args.max_bits)
    inputs = {"n": args.n, "p": str(args.p), "mode": args.mode}
    if args.mode == "interval":
        inputs["bits"] = args.bits
    code = EXIT_UNCERTIFIED if r.sign.value == "uncertified" else EXIT_OK
    return inputs, gap_report_json(r), _gap_lines(r), code


def _mc_lines(e: McEstimate) -> list[str]:
    lo, hi = e.confidence_interval()
    return [f"p_same_hat: {e.p_same_hat}", f"p_cross_hat: {e.p_cross_hat}",
            f"gap_hat: {e.gap_hat} +/- {e.std_error} (95% CI [{lo:.6g}, {hi:.6g}])",
            f"samples: {e.samples}, seed: {e.seed}, early stopped: {e.early_stopped}, rng: {e.rng}"]


def cmd_gap(args):
    g = _load_graph(args)
    b = BunkbedInstance(g, args.transversal, args.poles[0], args.poles[1])
    inputs = {
        "graph": args.graph if args.graph is not None else args.graph6,
        "transversal": sorted(b.transversal),
        "poles": list(args.poles),
        "p": None if args.p is None else str(args.p),
        "method": args.method,
    }
    if args.method == "mc":
        inputs.update(model=args.model, samples=args.samples, seed=args.seed)
        run = mc_gap_standard if args.model == "standard" else mc_gap_alternative
        e = run(b, args.samples, args.seed, early_stop=args.early_stop)
        return inputs, e.to_json(), _mc_lines(e), EXIT_OK
    if args.model != "standard":
        raise UsageError("exact evaluation covers the standard model; use --method mc for the alternative model")
    try:
        r = bbc_gap_exact(b, cap=args.cap, method="split" if args.method == "split" else "brute-force",
                          workers=args.workers)
    except EnumerationCapExceeded as exc:
        raise UsageError(f"{exc} (try --method mc)") from exc
    return inputs, gap_report_json(r), _gap_lines(r), EXIT_OK


def cmd_batch_scan(args):
    try:
        text = Path(args.graph6_file).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {args.graph6_file}: {exc}") from exc
    p = args.p if args.p is not None else Fraction(1, 2)

    def stream():
        for lineno, item in iter_graph6_file(text, p):
            if isinstance(item, FormatError):
                log.warning("%s", item)
                continue
            if args.max_vertices is not None and item.vertex_count > args.max_vertices:
                continue
            yield f"line {lineno}", item

    out = open(args.out, "w") if args.out else None
    emitted = []

    def emit(record):
        line = json.dumps(record, separators=(",", ":"))
        if out:
            out.write(line + "\n")
            out.flush()
        else:
            emitted.append(line)

    try:
        rep = _scan(stream(), args, emit)
        if out:
            out.write(json.dumps({"type": "summary", **rep.summary()}, separators=(",", ":")) + "\n")
    finally:
        if out:
            out.close()
    inputs = {"graph6_file": args.graph6_file, "max_vertices": args.max_vertices, "p": str(p),
              "all_transversals": args.all_transversals}
    s = rep.summary()
    lines = emitted + [f"graphs: {s['graphs']}, instances: {s['instances']}, min gap: {s['min_gap']}, "
                     f"violations: {s['violations']}"]
    if rep.witness:
        w = rep.witness
        lines.append(f"witness: graph {w['graph']}, T={w['transversal']}, poles {w['u']} {w['v']}")
    code = EXIT_VIOLATION if rep.violations else EXIT_OK
    return inputs, s, lines, code


def _scan(stream, args, emit) -> ScanReport:
    if args.all_transversals:
        return batch_scan(stream, emit=emit, verbose=args.verbose, workers=args.workers)
    # without --all-transversals only T = {} and single-vertex T are scanned
    report = ScanReport()
    for label, g in stream:
        ts = [frozenset()] + [frozenset({w}) for w in range(g.vertex_count)]
        part = batch_scan([(label, g)], transversals=ts, emit=emit, verbose=args.verbose)
        report.graphs += part.graphs
        report.instances += part.instances
        report.violations += part.violations
        report.errors += part.errors
        if part.min_gap is not None and (report.min_gap is None or part.min_gap < report.min_gap):
            report.min_gap, report.witness = part.min_gap, part.witness
    return report


def cmd_complete_bbc(args):
    g = _load_graph(args)
    u, v = args.poles
    try:
        r = complete_bbc_gap_exact(g, u, v, cap=args.cap, workers=args.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    inputs = {"graph": args.graph if args.graph is not None else args.graph6, "poles": [u, v],
              "p": None if args.p is None else str(args.p)}
    return inputs, gap_report_json(r), _gap_lines(r), EXIT_OK


def cmd_clone_build(args):
    if args.k < 1:
        raise UsageError("k must be >= 1")
    try:
        g = build_complete_clone_instance(args.k)
    except AssertionError as exc:
        log.error("%s", exc)
        return {"k": args.k}, {"counts": "FAIL"}, [f"counts FAIL: {exc}"], EXIT_MISMATCH
    expected = {"vertices": 7222 + 3 * (args.k - 1), "edges": 14442 + 12 * (args.k - 1)}
    result = {
        "vertices": g.vertex_count,
        "edges": g.edge_count,
        "expected": expected,
        "counts": "PASS",
        "out": args.out,
    }
    if args.out:
        Path(args.out).write_text(emit_edge_list(g, canonical=False))
    lines = [f"vertices: {g.vertex_count} (expected {expected['vertices']})",
             f"edges: {g.edge_count} (expected {expected['edges']})", f"counts {result['counts']}"]
    if args.out:
        lines.append(f"wrote {args.out}")
    return {"k": args.k}, result, lines, EXIT_OK


def cmd_verify_paper(args):
    from .verify import CRITERIA, format_line, run_criterion

    wanted = set(args.only) if args.only else None
    rows, lines = [], []
    for c in CRITERIA:
        if wanted and c.number not in wanted:
            continue
        ok, detail, seconds = run_criterion(c)
        rows.append({"criterion": c.number, "title": c.title, "pass": ok, "detail": detail,
                     "seconds": round(seconds, 3)})
        lines.append(format_line(c, ok, detail, seconds))
        if not args.json:
            print(lines[-1], flush=True)
    code = EXIT_OK if all(r["pass"] for r in rows) else EXIT_MISMATCH
    passed = sum(r["pass"] for r in rows)
    tail = [f"{passed}/{len(rows)} criteria passed"]
    return {"only": sorted(wanted) if wanted else None}, {"criteria": rows}, tail, code


# --------------------------------------------------------------------------
# parser


def _add_graph_source(p, required=True):
    src = p.add_mutually_exclusive_group(required=required)
    src.add_argument("--graph", metavar="FILE", help="edge-list file (header 'n m', then 'u v p' lines)")
    src.add_argument("--graph6", metavar="STR", help="graph6 string; every edge gets probability --p")
    p.add_argument("--p", type=rational, default=None,
                   help="edge probability (graph6 default 1/2; overrides edge-list weights when given)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bunkbed", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print one canonical JSON RunRecord")
    common.add_argument("--workers", type=int, default=None,
                        help="worker processes for enumeration (default: $BUNKBED_WORKERS or 1)")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gadget-kernel", parents=[common], help="exact kernel of the fan gadget G_n")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-p", type=rational, required=True)
    p.add_argument("--check-390", action="store_true", help="test 400 p_a|bc <= p_abc p_a|b|c - p_ab|c^2")
    p.add_argument("--oracle", action="store_true", help="cross-check against brute-force enumeration (n <= 6)")
    p.set_defaults(func=cmd_gadget_kernel)

    p = sub.add_parser("hollom-check", parents=[common], help="alternative-model probabilities on Hollom's hypergraph")
    p.set_defaults(func=cmd_hollom_check)

    p = sub.add_parser("counterexample", parents=[common], help="gap of the gadget-substituted Hollom graph")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-p", type=rational, required=True)
    p.add_argument("--mode", choices=("exact", "interval"), default="exact")
    p.add_argument("--bits", type=int, default=65536, help="starting interval precision")
    p.add_argument("--max-bits", type=int, default=1 << 18, help="escalation ceiling")
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("gap", parents=[common], help="bunkbed gap of one instance")
    _add_graph_source(p)
    p.add_argument("--transversal", type=vertex_list, default=frozenset(), help="comma-separated vertices")
    p.add_argument("--poles", type=int, nargs=2, required=True, metavar=("U", "V"))
    p.add_argument("--method", choices=("exact", "split", "mc"), default="exact")
    p.add_argument("--model", choices=("standard", "alternative"), default="standard")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--early-stop", type=float, default=None, metavar="Z",
                   help="stop once |gap_hat| > Z standard errors")
    p.add_argument("--cap", type=int, default=26, help="largest number of random edges to enumerate")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("batch-scan", parents=[common], help="exhaustive scan of a graph6 file")
    p.add_argument("--graph6-file", required=True)
    p.add_argument("--max-vertices", type=int, default=None)
    p.add_argument("--p", type=rational, default=None, help="edge probability (default 1/2)")
    p.add_argument("--all-transversals", action="store_true",
                   help="scan every transversal set (default: empty and single-vertex sets)")
    p.add_argument("--out", default=None, help="write JSON Lines records here")
    p.set_defaults(func=cmd_batch_scan)

    p = sub.add_parser("complete-bbc", parents=[common], help="gap on G x K_2 with posts open with probability 1/2")
    _add_graph_source(p)
    p.add_argument("--poles", type=int, nargs=2, required=True, metavar=("U", "V"))
    p.add_argument("--cap", type=int, default=26)
    p.set_defaults(func=cmd_complete_bbc)

    p = sub.add_parser("clone-build", parents=[common], help="counterexample graph with transversal clones")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", default=None, help="write the edge list here")
    p.set_defaults(func=cmd_clone_build)

    p = sub.add_parser("verify-paper", parents=[common], help="run every reproduction check")
    p.add_argument("--only", type=int, nargs="*", default=None, metavar="N")
    p.set_defaults(func=cmd_verify_paper)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        inputs, result, lines, code = args.func(args)
    except (UsageError, FormatError, ValueError) as exc:
        print(f"bunkbed {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    record = run_record(args.command, inputs, result, time.perf_counter() - t0)
    if args.json:
        print(dumps(record))
    else:
        for line in lines:
            print(line)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
