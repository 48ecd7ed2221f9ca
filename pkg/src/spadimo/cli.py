"""Command-line entry point.

Exit codes: 0 on success, 1 on errors, 2 when some requested case could
not be explained (not outlying, or the grid ran out before convergence).
"""

import argparse
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
import csv
import io
import sys

import numpy as np

from . import __version__
from .errors import NotOutlying, SpadimoError, UsageError
from .explain import (
    SpadimoConfig,
    Termination,
    case_outlyingness,
    default_grid,
    direction_path,
    spadimo_explain,
)
from .maxout import max_outlying_direction
from .report import ExplanationDocument, dumps, explanation_csv, fingerprint, load_csv
from .robust import detect_weights, standardize, weighted_moments
from .simlab import Correlation, SimConfig, run_study, thread_count
from . import svg

EXIT_OK, EXIT_ERROR, EXIT_PARTIAL = 0, 1, 2
HEATMAP_MAX_COLUMNS = 60


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _grid(text):
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("grid must look like LO:HI:STEP") from None
    return lo, hi, step


def build_parser():
    data = _Parser(add_help=False)
    data.add_argument("--input", required=True, help="CSV file, optional header row")
    data.add_argument("--drop-incomplete", action="store_true",
                      help="skip rows with missing or non-numeric cells")
    data.add_argument("--detect-alpha", type=float, default=0.975,
                      help="significance of the case-weight cutoff")
    data.add_argument("--out", help="output file (default: stdout)")

    scan = _Parser(add_help=False)
    scan.add_argument("--alpha", type=float, default=0.975, help="stopping significance")
    scan.add_argument("--grid", type=_grid, help="LO:HI:STEP (default depends on n and p)")
    scan.add_argument("--h", type=int, default=1, help="number of SNIPLS components")
    scan.add_argument("--eps-weight", type=float, default=1e-4,
                      help="weight given to a zero-weight target case")
    scan.add_argument("--no-refit", action="store_true",
                      help="reuse the original case weights after removing columns")

    parser = _Parser(prog="spadimo", description="Explain which variables make a case outlying.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("explain", parents=[data, scan], help="flag outlying variables per case")
    sel = p.add_mutually_exclusive_group(required=True)
    sel.add_argument("--case", type=int, action="append", help="1-based case number (repeatable)")
    sel.add_argument("--all", action="store_true", help="every case with weight zero")
    p.add_argument("--format", choices=["json", "csv", "svg"], default="json")

    p = sub.add_parser("direction", parents=[data],
                       help="dense direction of maximal outlyingness for one case")
    p.add_argument("--case", type=int, required=True)
    p.add_argument("--format", choices=["json", "csv"], default="json")

    p = sub.add_parser("path", parents=[data, scan], help="sparse directions over an eta grid")
    p.add_argument("--case", type=int, required=True)
    p.add_argument("--format", choices=["json", "csv", "svg"], default="json")
    p.add_argument("--plot", choices=["screeplot", "heatmap"], default="screeplot",
                   help="which figure --format svg draws")

    p = sub.add_parser("simulate", parents=[scan], help="run one simulation cell")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--corr", choices=[c.value for c in Correlation], default="a09")
    p.add_argument("--corr-seed", type=int, default=0)
    p.add_argument("--frac", type=float, default=0.05)
    p.add_argument("--gamma", type=float, default=4.0)
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--records", action="store_true", help="include per-replication rows")
    p.add_argument("--format", choices=["json", "csv"], default="csv")
    p.add_argument("--out")

    p = sub.add_parser("weights", parents=[data], help="robust 0/1 case weights")
    p.add_argument("--format", choices=["json", "csv"], default="csv")
    return parser


def scan_config(args, n, p):
    base = default_grid(n, p)
    lo, hi, step = args.grid if args.grid else (base.grid_low, base.grid_high, base.grid_step)
    detect_alpha = getattr(args, "detect_alpha", 0.975)
    return SpadimoConfig(lo, hi, step, args.alpha, args.h, args.eps_weight,
                         not args.no_refit, detect_alpha)


def _prepare(args):
    loaded = load_csv(args.input, args.drop_incomplete)
    Z, params = standardize(loaded.data)
    w = detect_weights(Z.values, args.detect_alpha)
    return loaded, Z, params, w


def _case_index(case, n):
    if not 1 <= case <= n:
        raise UsageError(f"case {case} outside 1..{n}")
    return case - 1


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(rows):
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def cmd_explain(args):
    loaded, Z, params, w = _prepare(args)
    data = loaded.data
    cfg = scan_config(args, data.n, data.p)
    if args.all:
        cases = [int(i) for i in np.flatnonzero(w.weights == 0.0)]
    else:
        cases = [_case_index(c, data.n) for c in args.case]

    def run(i):
        try:
            return spadimo_explain(Z.values, w, i, cfg)
        except SpadimoError as exc:
            return exc

    with ThreadPoolExecutor(thread_count(max(1, len(cases)))) as pool:
        results = list(pool.map(run, cases))

    doc = ExplanationDocument(fingerprint(data), list(params.centers), list(params.scales),
                              {**asdict(cfg), "drop_incomplete": args.drop_incomplete})
    failed = partial = False
    for i, res in zip(cases, results):
        if isinstance(res, NotOutlying):
            partial = True
            doc.errors.append({"case": i + 1, "error": "NotOutlying",
                               "message": _not_outlying(res)})
        elif isinstance(res, SpadimoError):
            failed = True
            doc.errors.append({"case": i + 1, "error": type(res).__name__, "message": str(res)})
        else:
            doc.reports.append(res)
            partial |= res.terminated is Termination.GRID_EXHAUSTED
    status = EXIT_ERROR if failed else EXIT_PARTIAL if partial else EXIT_OK

    if args.format == "json":
        text = dumps(doc.to_dict())
    elif args.format == "csv":
        text = explanation_csv(doc)
    else:
        text = _explain_svg(doc, data)
    _emit(text, args.out)
    for e in doc.errors:
        print(f"case {e['case']}: {e['error']}: {e['message']}", file=sys.stderr)
    return status


def _not_outlying(exc):
    return f"o^2 = {exc.distance_sq:.6g} is below the cutoff {exc.cutoff:.6g}"


def _explain_svg(doc, data):
    names = data.names()
    values = np.zeros((len(doc.reports), data.p))
    for k, r in enumerate(doc.reports):
        for f in r.flagged:
            values[k, f.column] = f.coefficient
    if data.p <= HEATMAP_MAX_COLUMNS:
        cols = list(range(data.p))
    else:
        cols = [int(j) for j in np.flatnonzero(np.any(values != 0.0, axis=0))]
    return svg.heatmap(values[:, cols], [str(r.case_index + 1) for r in doc.reports],
                       [names[j] for j in cols], "flagged variables per case")


def cmd_direction(args):
    loaded, Z, _, w = _prepare(args)
    i = _case_index(args.case, loaded.data.n)
    summary = weighted_moments(Z.values, w)
    a = max_outlying_direction(Z.values[i], summary)
    o2, df, cutoff = case_outlyingness(Z.values, w, i, 0.975)
    names = loaded.data.names()
    if args.format == "json":
        text = dumps({"case": args.case, "weight": float(w.weights[i]),
                      "outlyingness_sq": o2, "df": df, "cutoff": cutoff,
                      "direction": {n: float(v) for n, v in zip(names, a)},
                      "column_names": names})
    else:
        text = _csv([["column", "name", "component"]]
                    + [[j + 1, names[j], repr(float(a[j]))] for j in range(len(a))])
    _emit(text, args.out)
    return EXIT_OK


def cmd_path(args):
    loaded, Z, _, w = _prepare(args)
    data = loaded.data
    i = _case_index(args.case, data.n)
    cfg = scan_config(args, data.n, data.p)
    path = direction_path(Z.values, w, i, cfg.grid(), cfg.h, cfg.epsilon_weight)
    status = EXIT_OK
    try:
        report = spadimo_explain(Z.values, w, i, cfg)
        selected = report.selected_eta
        if report.terminated is Termination.GRID_EXHAUSTED:
            status = EXIT_PARTIAL
        n_flagged = len(report.flagged)
    except NotOutlying as exc:
        print(f"case {args.case}: NotOutlying: {_not_outlying(exc)}", file=sys.stderr)
        selected, n_flagged, status = None, None, EXIT_PARTIAL
    names = data.names()
    if args.format == "json":
        text = dumps({
            "case": args.case, "column_names": names, "etas": path.etas,
            "counts": path.counts, "directions": [[float(v) for v in d] for d in path.directions],
            "selected_eta": selected, "flagged_at_selected_eta": n_flagged,
            "errors": {repr(e): m for e, m in path.errors.items()},
        })
    elif args.format == "csv":
        rows = [["eta", "count", "selected"] + names]
        for e, c, d in zip(path.etas, path.counts, path.directions):
            rows.append([repr(e), c, int(e == selected)] + [repr(float(v)) for v in d])
        text = _csv(rows)
    elif args.plot == "screeplot":
        text = svg.screeplot(path.etas, path.counts, selected, f"case {args.case}")
    else:
        text = svg.heatmap(path.directions, [f"{e:g}" for e in path.etas], names,
                           f"case {args.case}")
    _emit(text, args.out)
    return status


def cmd_simulate(args):
    if args.n < 2 or args.p < 1 or args.reps < 1:
        raise UsageError("need --n >= 2, --p >= 1 and --reps >= 1")
    try:
        cfg = SimConfig(args.n, args.p, args.corr, args.frac, args.gamma, args.reps, args.seed,
                        scan_config(args, args.n, args.p), args.corr_seed)
    except SpadimoError as exc:
        raise UsageError(str(exc)) from exc
    m = run_study(cfg)
    cell = {"n": cfg.n, "p": cfg.p, "corr": cfg.correlation.value,
            "frac": cfg.contamination_fraction, "gamma": cfg.gamma, "reps": cfg.replications,
            "seed": cfg.seed}
    summary = {"flagged": m.flagged_count, "detected_pct": m.detected_pct,
               "swamped_pct": m.swamped_pct,
               "eta": None if np.isnan(m.mean_eta) else m.mean_eta, "failures": m.failures}
    if args.format == "json":
        doc = {"cell": cell, "summary": summary, "version": __version__}
        if args.records:
            doc["records"] = [
                {"replication": r.index + 1, "case": r.case + 1,
                 "truth": [c + 1 for c in r.truth], "flagged": [c + 1 for c in r.flagged],
                 "detected_pct": r.detected_pct, "swamped_pct": r.swamped_pct,
                 "eta": None if np.isnan(r.eta) else r.eta, "terminated": r.terminated,
                 "failure": r.failure}
                for r in m.records]
        text = dumps(doc)
    else:
        head = list(cell) + ["flagged", "detected_pct", "swamped_pct", "eta", "failures"]
        row = list(cell.values()) + [f"{m.flagged_count:.3f}", f"{m.detected_pct:.3f}",
                                     f"{m.swamped_pct:.3f}", f"{m.mean_eta:.3f}", m.failures]
        rows = [head, row]
        if args.records:
            rows.append([])
            rows.append(["replication", "case", "flagged", "detected_pct", "swamped_pct",
                         "eta", "terminated"])
            for r in m.records:
                rows.append([r.index + 1, r.case + 1, r.flagged_count, f"{r.detected_pct:.3f}",
                             f"{r.swamped_pct:.3f}", f"{r.eta:.3f}", r.terminated])
        text = _csv(rows)
    _emit(text, args.out)
    return EXIT_OK


def cmd_weights(args):
    loaded, _, _, w = _prepare(args)
    if args.format == "json":
        text = dumps({"n": loaded.data.n, "n_w": w.n_w,
                      "weights": [float(v) for v in w.weights],
                      "outliers": [int(i) + 1 for i in np.flatnonzero(w.weights == 0.0)]})
    else:
        text = _csv([["case", "weight"]]
                    + [[k + 1, int(v)] for k, v in enumerate(w.weights)])
    _emit(text, args.out)
    return EXIT_OK


COMMANDS = {
    "explain": cmd_explain,
    "direction": cmd_direction,
    "path": cmd_path,
    "simulate": cmd_simulate,
    "weights": cmd_weights,
}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except SpadimoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
