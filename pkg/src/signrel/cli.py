"""Command line interface.

Every subcommand reads files, writes files (atomically) or standard output,
and writes a ``<out>.manifest.json`` next to each output file. Exit codes:
1 usage, 2 parse, 3 model, 4 numeric.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import sys
import tempfile
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .errors import ParseError, SignrelError
from .evaluation import (
    METHOD_LABELS,
    SplitPolicy,
    compare_methods,
    evaluate,
    format_report_table,
    reports_to_json,
)
from .graph import load_attributes, load_relations, read_edge_list, write_edge_list
from .hype import all_marginals, build_possibility_matrix
from .models import RESPONSE_FOR_KIND, FitResult, FitSpec, assemble_training_set, fit
from .phi import DEFAULT_COEFFICIENTS, build_signed_network, read_signed_network
from .social import homophily, triad_importance
from .synth import SynthConfig, generate

logger = logging.getLogger("signrel")


class UsageError(SignrelError):
    exit_code = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _atomic_write(path, write):
    """Call ``write(tmp_path)`` then move the file into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    os.close(fd)
    try:
        write(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_text(path, text):
    def w(tmp):
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)

    _atomic_write(path, w)


INPUT_OPTIONS = ("graph", "labels", "coeffs", "signed", "attributes", "config", "records")


def _manifest(args, out_path):
    opts = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "verbose")}
    inputs = {}
    for key in INPUT_OPTIONS:
        p = opts.get(key)
        if p and os.path.isfile(p):
            inputs[key] = {"path": str(p), "sha256": _digest(p)}
    manifest = {
        "subcommand": args.command,
        "options": {k: (str(v) if isinstance(v, Path) else v) for k, v in opts.items()},
        "inputs": inputs,
        "version": __version__,
        "seed": opts.get("seed"),
        "output": Path(out_path).name,
    }
    _write_text(str(out_path) + ".manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _emit(args, text, out=None):
    out = out if out is not None else getattr(args, "out", None)
    if out:
        _write_text(out, text)
        _manifest(args, out)
    else:
        sys.stdout.write(text)


def _window(args):
    if args.t0 is None and args.t1 is None:
        return None
    if args.t0 is None or args.t1 is None:
        raise UsageError("--t0 and --t1 must be given together")
    return (args.t0, args.t1)


def _graph(args):
    directed = bool(getattr(args, "directed_phi", False) or getattr(args, "directed", False))
    return read_edge_list(args.graph, directed=directed, window=_window(args))


def _marginals(args, g):
    xi = build_possibility_matrix(g, include_diagonal=args.include_diagonal)
    return xi, all_marginals(xi, g, workers=args.threads)


def _labels(args):
    return load_relations(args.labels, args.kind, levels=args.levels, symmetrize=not args.directed_labels)


def _policy(args) -> SplitPolicy:
    if getattr(args, "in_sample", False):
        return SplitPolicy(kind="in-sample", seed=args.seed)
    if getattr(args, "holdout", None):
        return SplitPolicy(kind="holdout", fraction=args.holdout, seed=args.seed)
    return SplitPolicy(kind="kfold", k=args.folds, seed=args.seed)


def cmd_ingest(args):
    g = read_edge_list(args.graph, directed=args.directed, window=_window(args))
    rep = g.report
    logger.info(
        "%d nodes, m = %d, %d records, %d self-loops dropped, %d outside window",
        g.n, g.m, rep.records, rep.self_loops, rep.out_of_window,
    )
    _atomic_write(args.out, lambda tmp: write_edge_list(g, tmp))
    _manifest(args, args.out)
    summary = {"nodes": g.n, "m": g.m, "directed": g.directed, "digest": g.digest(), **asdict(rep)}
    sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")


def cmd_marginals(args):
    g = _graph(args)
    _, mg = _marginals(args, g)
    _atomic_write(args.out, mg.to_csv)
    _manifest(args, args.out)


def _fit_spec(args, predictor=None):
    response = args.response or RESPONSE_FOR_KIND[args.kind]
    return FitSpec(predictor=predictor or args.predictor, response=response, levels=args.levels, ridge=args.ridge)


def cmd_fit(args):
    g = _graph(args)
    labels = _labels(args)
    mg = _marginals(args, g)[1] if args.predictor == "phi" else None
    ts = assemble_training_set(labels, g, mg, predictor=args.predictor)
    spec = _fit_spec(args)
    res = fit(spec, ts)
    text = json.dumps(
        {**res.to_dict(), "spec": asdict(spec), "graph_digest": g.digest()}, indent=2, sort_keys=True
    ) + "\n"
    _emit(args, text)


def cmd_infer(args):
    g = _graph(args)
    if args.coeffs and args.default_coeffs:
        raise UsageError("--coeffs and --default-coeffs are exclusive")
    if args.coeffs:
        coeff = FitResult.from_json(args.coeffs).phi_coefficients()
    else:
        coeff = DEFAULT_COEFFICIENTS
    xi, mg = _marginals(args, g)
    net = build_signed_network(g, xi, coeff, marginals=mg)
    _atomic_write(args.out, net.to_csv)
    _write_text(str(args.out) + ".json", json.dumps(net.sidecar(), indent=2, sort_keys=True) + "\n")
    _manifest(args, args.out)


def _render_reports(args, reports, title):
    if args.format == "json":
        return reports_to_json(reports)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", "split", "sensitivity", "specificity", "balanced_accuracy", "r2", "rmse"])
        for name, r in reports.items():
            w.writerow([name, r.split, r.sensitivity, r.specificity, r.balanced_accuracy, r.r2, r.rmse])
        return buf.getvalue()
    return format_report_table(reports, title) + "\n"


def cmd_evaluate(args):
    g = _graph(args)
    labels = _labels(args)
    mg = _marginals(args, g)[1] if args.predictor == "phi" else None
    ts = assemble_training_set(labels, g, mg, predictor=args.predictor)
    rep = evaluate(_fit_spec(args), ts, _policy(args), cutoff=args.cutoff)
    _emit(args, _render_reports(args, {METHOD_LABELS[args.predictor]: rep}, rep.split))


def cmd_compare(args):
    g = _graph(args)
    labels = _labels(args)
    _, mg = _marginals(args, g)
    policy = _policy(args)
    reports = compare_methods(g, labels, policy=policy, marginals=mg)
    reports = {METHOD_LABELS[k]: v for k, v in reports.items()}
    _emit(args, _render_reports(args, reports, policy.describe()))


def cmd_homophily(args):
    net = read_signed_network(args.signed)
    attrs = load_attributes(args.attributes)
    reports = [homophily(net, attrs, a) for a in args.attribute]
    if args.format == "json":
        text = json.dumps([asdict(r) for r in reports], indent=2, sort_keys=True) + "\n"
    else:
        text = "".join(r.summary() + "\n" for r in reports)
    _emit(args, text)


def cmd_triads(args):
    net = read_signed_network(args.signed)
    attrs = load_attributes(args.attributes)
    column = attrs.column(args.group_attr)
    groups = args.group or sorted(set(column.values()))
    mode, node = "all", None
    if args.involving and args.excluding:
        raise UsageError("--involving and --excluding are exclusive")
    if args.involving:
        mode, node = "involving", args.involving
    elif args.excluding:
        mode, node = "excluding", args.excluding
    reports = []
    for grp in groups:
        members = [v for v, c in column.items() if c == grp]
        reports.append(triad_importance(net, members, mode=mode, node=node, name=str(grp)))
    if args.format == "json":
        text = json.dumps([asdict(r) for r in reports], indent=2, sort_keys=True) + "\n"
    else:
        text = "".join(r.summary() + "\n" for r in reports)
    _emit(args, text)


def cmd_simulate(args):
    cfg = SynthConfig.from_json(args.config) if args.config else SynthConfig()
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    community = generate(cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory(dir=out) as tmp:
        paths = community.write(tmp)
        for p in paths.values():
            os.replace(p, out / p.name)
    for p in paths.values():
        _manifest(args, out / p.name)
    _write_text(out / "config.json", json.dumps(asdict(cfg), indent=2, sort_keys=True) + "\n")


def _add_graph_opts(p, with_model=True):
    p.add_argument("--graph", required=True, help="edge list CSV: source,target[,timestamp][,weight]")
    p.add_argument("--t0", type=int, help="keep interactions with t0 <= timestamp < t1")
    p.add_argument("--t1", type=int)
    p.add_argument("--directed-phi", action="store_true",
                   help="treat the interactions as directed instead of symmetrising them")
    if with_model:
        p.add_argument("--include-diagonal", action="store_true",
                       help="keep self-pair capacity k_out(v) k_in(v) in the urn")
        p.add_argument("--threads", type=int, default=1, help="worker processes for the marginals")


def _add_label_opts(p):
    p.add_argument("--labels", required=True, help="relations CSV: source,target,relation")
    p.add_argument("--kind", choices=("binary", "ordered", "continuous"), default="binary")
    p.add_argument("--levels", type=int, help="number of ordered categories")
    p.add_argument("--directed-labels", action="store_true", help="do not symmetrise declared relations")
    p.add_argument("--response", choices=("logistic", "linear", "ordered"),
                   help="override the response model implied by --kind")
    p.add_argument("--ridge", type=float, default=0.0)


def _add_split_opts(p):
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--holdout", type=float, help="hold out this fraction instead of k-fold")
    p.add_argument("--in-sample", action="store_true")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="signrel", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="normalise an interaction edge list")
    p.add_argument("--graph", required=True)
    p.add_argument("--directed", action="store_true")
    p.add_argument("--t0", type=int)
    p.add_argument("--t1", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("marginals", help="per-dyad hypergeometric tail probabilities")
    _add_graph_opts(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_marginals)

    p = sub.add_parser("fit", help="calibrate a relation model on surveyed relations")
    _add_graph_opts(p)
    _add_label_opts(p)
    p.add_argument("--predictor", choices=("phi", "threshold", "modularity"), default="phi")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("infer", help="weighted signed network")
    _add_graph_opts(p)
    p.add_argument("--coeffs", help="fit JSON produced by 'fit'")
    p.add_argument("--default-coeffs", action="store_true", help="a = 1, b = -1")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("evaluate", help="in-sample or cross-validated quality of one model")
    _add_graph_opts(p)
    _add_label_opts(p)
    _add_split_opts(p)
    p.add_argument("--predictor", choices=("phi", "threshold", "modularity"), default="phi")
    p.add_argument("--cutoff", type=float, default=0.5)
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="threshold vs modularity vs phi on identical splits")
    _add_graph_opts(p)
    _add_label_opts(p)
    _add_split_opts(p)
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("homophily", help="binomial homophily test on a signed network")
    p.add_argument("--signed", required=True)
    p.add_argument("--attributes", required=True)
    p.add_argument("--attribute", required=True, action="append")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_homophily)

    p = sub.add_parser("triads", help="relative importance of triad sign patterns per group")
    p.add_argument("--signed", required=True)
    p.add_argument("--attributes", required=True)
    p.add_argument("--group-attr", required=True)
    p.add_argument("--group", action="append", help="group value(s); default all")
    p.add_argument("--involving")
    p.add_argument("--excluding")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_triads)

    p = sub.add_parser("simulate", help="synthetic community with planted relations")
    p.add_argument("--config", help="JSON with SynthConfig fields")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        args.func(args)
    except SignrelError as exc:
        print(f"signrel {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        print(f"signrel {args.command}: {exc}", file=sys.stderr)
        return ParseError.exit_code
    except (ValueError, TypeError) as exc:
        print(f"signrel {args.command}: {exc}", file=sys.stderr)
        return UsageError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
