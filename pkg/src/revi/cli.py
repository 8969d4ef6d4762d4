"""Command-line entry point: ``revi run | verify | print-default-config | plot``.

Exit codes: 0 success, 1 computation failure, 2 configuration error.
"""

import argparse
import json
import sys

from .config import EXPERIMENTS, ConfigError, default_config, load_config
from .experiments import plot_rows, read_trace_csv, run_experiment, thread_count
from .verify import SUITES, format_table, run_verify

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


def _build_parser():
    parser = _Parser(prog="revi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run an experiment described by a JSON config")
    p.add_argument("config")
    p.add_argument("--output-dir", help="override the config's output_dir")

    p = sub.add_parser("verify", help="run the certification suite")
    p.add_argument("--filter", action="append", choices=SUITES, metavar="SUITE",
                   help=f"restrict to a suite (repeatable): {', '.join(SUITES)}")

    p = sub.add_parser("print-default-config", help="print the config of a published experiment")
    p.add_argument("experiment", choices=EXPERIMENTS)

    p = sub.add_parser("plot", help="plot trace CSVs as one SVG")
    p.add_argument("csv", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--metric", help="metric to plot (default: first one in the first file)")
    p.add_argument("--linear", action="store_true", help="linear instead of log-scale y")
    return parser


def _run(args):
    cfg = load_config(args.config)
    if args.output_dir:
        cfg["output_dir"] = args.output_dir
    report = run_experiment(cfg, threads=thread_count())
    for res in report.results:
        line = f"{res.cell.key}: {res.status} ({res.wall_time_s:.1f}s)"
        if res.error:
            line += f" {res.error}"
        print(line)
    print(f"wrote {len(report.csv_files)} CSV, {len(report.svg_files)} SVG, {report.manifest}")
    return EXIT_OK if report.ok else EXIT_FAILURE


def _verify(args):
    results = run_verify(args.filter)
    print(format_table(results))
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} check(s) failed: " + "; ".join(f"{r.suite}/{r.name}" for r in failed))
        return EXIT_FAILURE
    print(f"all {len(results)} checks passed")
    return EXIT_OK


def _plot(args):
    series_rows = []
    for path in args.csv:
        try:
            rows = read_trace_csv(path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read trace {path}: {exc}") from exc
        series_rows.append((path, rows))
    metric = args.metric
    if metric is None:
        names = [r["metric_name"] for _, rows in series_rows for r in rows]
        if not names:
            raise ConfigError("no rows to plot")
        metric = names[0]
    prefix = len(args.csv) > 1
    rows = []
    for path, rs in series_rows:
        for r in rs:
            if prefix:
                r = dict(r, solver=f"{path}:{r['solver']}")
            rows.append(r)
    if not any(r["metric_name"] == metric for r in rows):
        raise ConfigError(f"metric {metric!r} not found in the given CSV files")
    svg = plot_rows(rows, metric, title=metric, log_y=not args.linear)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(svg)
    print(f"wrote {args.out}")
    return EXIT_OK


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.verb == "run":
            return _run(args)
        if args.verb == "verify":
            return _verify(args)
        if args.verb == "print-default-config":
            print(json.dumps(default_config(args.experiment), indent=2))
            return EXIT_OK
        return _plot(args)
    except ConfigError as exc:
        print(f"revi: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
