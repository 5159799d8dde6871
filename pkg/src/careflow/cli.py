"""Command-line pipeline: preprocess, check, convert, dotted-chart, simulate.

Exit codes: 0 success, 2 unreadable or invalid input, 3 model
compilation failure, 4 alignment resource failures (partial results are
written), 5 simulation produced nothing but dead ends.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from datetime import date
from typing import Optional

from . import alignment as alignment_mod
from . import bpmn, event_log, figures, petri, report as report_mod

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_COMPILE = 3
EXIT_RESOURCE = 4
EXIT_DEAD_ENDS = 5


class _InputError(Exception):
    """Wraps any unreadable-input condition for a uniform exit code."""


def _read_log(args: argparse.Namespace) -> event_log.EventLog:
    path = args.log
    mapping = (args.case_col, args.activity_col, args.date_col)
    name = os.path.splitext(os.path.basename(path))[0]
    try:
        if path.lower().endswith(".xes"):
            with open(path, "rb") as fh:
                return event_log.parse_xes(fh, name=name)
        with open(path, newline="", encoding="utf-8") as fh:
            return event_log.parse_csv(fh, mapping, args.date_format, name=name)
    except OSError as exc:
        raise _InputError(f"cannot read log {path!r}: {exc}") from exc
    except ValueError as exc:  # schema, row, and XML errors
        raise _InputError(f"log {path!r}: {exc}") from exc


def _read_model(path: str) -> bpmn.BpmnModel:
    try:
        with open(path, "rb") as fh:
            return bpmn.parse_bpmn(fh)
    except OSError as exc:
        raise _InputError(f"cannot read model {path!r}: {exc}") from exc
    except bpmn.BpmnStructureError as exc:
        raise _InputError(f"model {path!r}: {exc}") from exc


def _parse_waves(text: Optional[str]) -> Optional[event_log.WaveBoundaries]:
    if not text:
        return None
    try:
        cutoffs = tuple(date.fromisoformat(part.strip()) for part in text.split(","))
        return event_log.WaveBoundaries(cutoffs)
    except ValueError as exc:
        raise _InputError(f"invalid --waves value {text!r}: {exc}") from exc


def _load_abstraction_map(path: Optional[str]) -> Optional[dict[str, Optional[str]]]:
    if path is None:
        return None
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise _InputError(f"cannot read abstraction map {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _InputError(f"abstraction map {path!r}: {exc}") from exc
    if not isinstance(raw, dict) or not all(
        isinstance(k, str) and (v is None or isinstance(v, str)) for k, v in raw.items()
    ):
        raise _InputError(
            f"abstraction map {path!r} must be a JSON object of label -> label or null"
        )
    return raw


def _fmt_fitness(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.2f}"


def _out_path(args: argparse.Namespace, filename: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, filename)


# ---------------------------------------------------------------------------
# Commands


def cmd_preprocess(args: argparse.Namespace) -> int:
    before = _read_log(args)
    cleaned = before
    if args.max_days is not None:
        cleaned = event_log.remove_duration_outliers(cleaned, args.max_days)
    rename = _load_abstraction_map(args.abstraction_map)
    if rename:
        cleaned = event_log.abstract_activities(cleaned, rename)
    if args.min_variant_count > 1:
        cleaned = event_log.filter_infrequent_variants(cleaned, args.min_variant_count)

    out_file = _out_path(args, "cleaned.csv")
    mapping = (args.case_col, args.activity_col, args.date_col)
    with open(out_file, "w", newline="", encoding="utf-8") as fh:
        event_log.write_csv(cleaned, fh, mapping, args.date_format)

    print(f"cases: {before.case_count} -> {cleaned.case_count}")
    print(f"activities: {len(before.activity_labels)} -> {len(cleaned.activity_labels)}")
    print(f"variants: {len(event_log.variants(before))} -> {len(event_log.variants(cleaned))}")
    print(f"events: {before.event_count} -> {cleaned.event_count}")
    print(f"wrote {out_file}")
    return EXIT_OK


def _bucket_names(count: int) -> list[str]:
    if count == 1:
        return [""]
    return [f"_wave{i + 1}" for i in range(count)]


def cmd_check(args: argparse.Namespace) -> int:
    log_ = _read_log(args)
    model = _read_model(args.model)
    net = petri.compile_bpmn(model)
    boundaries = _parse_waves(args.waves)
    buckets = (
        event_log.split_by_waves(log_, boundaries) if boundaries is not None else [log_]
    )

    any_failures = False
    extension = {"csv": "csv", "markdown": "md", "json": "json"}[args.format]
    for index, (bucket, suffix) in enumerate(zip(buckets, _bucket_names(len(buckets)))):
        result = alignment_mod.align_log(net, bucket, state_budget=args.state_budget)
        table = report_mod.per_activity_moves(result)

        report_file = _out_path(args, f"report{suffix}.{extension}")
        with open(report_file, "w", encoding="utf-8") as fh:
            fh.write(report_mod.render(table, args.format))
        json_file = _out_path(args, f"conformance{suffix}.json")
        with open(json_file, "w", encoding="utf-8") as fh:
            fh.write(alignment_mod.result_to_json(result))
        if args.dump_alignments:
            dump_file = _out_path(args, f"alignments{suffix}.tsv")
            with open(dump_file, "w", encoding="utf-8") as fh:
                for case_id, aln in result.per_trace:
                    fh.write(f"# case {case_id}\n")
                    fh.write(alignment_mod.moves_tsv(aln))
        if not args.no_figures:
            figures.moves_bar_png(
                table,
                _out_path(args, f"moves{suffix}.png"),
                title=f"Moves per activity ({bucket.name})",
            )

        label = "log" if len(buckets) == 1 else f"wave {index + 1}"
        print(
            f"{label}: cases={bucket.case_count} events={bucket.event_count} "
            f"fitness average={_fmt_fitness(result.log_fitness_average)} "
            f"cost-based={_fmt_fitness(result.log_fitness_cost_based)}"
        )
        for case_id, reason in result.failures:
            any_failures = True
            print(f"  failed: {case_id}: {reason}", file=sys.stderr)

    return EXIT_RESOURCE if any_failures else EXIT_OK


def cmd_convert(args: argparse.Namespace) -> int:
    model = _read_model(args.model)
    net = petri.compile_bpmn(model)
    stem = os.path.splitext(os.path.basename(args.model))[0]
    out_file = _out_path(args, f"{stem}.pnml")
    with open(out_file, "w", encoding="utf-8") as fh:
        fh.write(petri.to_pnml(net, net_id=stem))
    problems = petri.check_workflow_net(net)
    visible = sum(1 for t in net.transitions if not t.is_silent)
    print(f"places: {len(net.places)}")
    print(f"transitions: {len(net.transitions)} ({visible} visible)")
    if problems:
        print("workflow net check: FAIL")
        for p in problems:
            print(f"  {p}")
    else:
        print("workflow net check: pass")
    print(f"wrote {out_file}")
    return EXIT_OK


def cmd_dotted_chart(args: argparse.Namespace) -> int:
    log_ = _read_log(args)
    boundaries = _parse_waves(args.waves)
    data = event_log.dotted_chart(log_, boundaries)

    csv_file = _out_path(args, "dotted.csv")
    with open(csv_file, "w", newline="", encoding="utf-8") as fh:
        event_log.write_dotted_csv(data, fh)
    svg_file = _out_path(args, "dotted.svg")
    with open(svg_file, "w", encoding="utf-8") as fh:
        fh.write(event_log.dotted_chart_svg(data))
    if not args.no_figures:
        figures.dotted_chart_png(
            data, _out_path(args, "dotted.png"), title=f"Dotted chart ({log_.name})"
        )
    print(f"dots: {len(data.dots)}")
    print(f"wrote {csv_file}, {svg_file}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    model = _read_model(args.model)
    net = petri.compile_bpmn(model)
    kinds = tuple(k.strip() for k in args.noise_kinds.split(",") if k.strip())
    alphabet = net.visible_labels()

    traces = []
    dead_ends = 0
    for i in range(args.traces):
        case_id = f"sim_{i + 1:04d}"
        try:
            trace = petri.random_playout(
                net,
                seed=args.seed * 1_000_003 + i,
                max_steps=args.max_steps,
                case_id=case_id,
            )
        except petri.PlayoutDeadEnd as exc:
            dead_ends += 1
            log.warning("playout %s: %s", case_id, exc)
            continue
        if args.noise_edits:
            trace = event_log.inject_noise(
                trace,
                args.noise_edits,
                kinds,
                seed=args.seed * 7_654_321 + i,
                alphabet=alphabet,
            )
        traces.append(trace)

    if args.traces and not traces:
        print(f"error: all {args.traces} playouts dead-ended", file=sys.stderr)
        return EXIT_DEAD_ENDS

    out_file = _out_path(args, "simulated.csv")
    mapping = (args.case_col, args.activity_col, args.date_col)
    simulated = event_log.EventLog.from_traces(traces, name="simulated")
    with open(out_file, "w", newline="", encoding="utf-8") as fh:
        event_log.write_csv(simulated, fh, mapping, args.date_format)
    print(f"traces: {len(traces)} written, {dead_ends} dead ends")
    print(f"wrote {out_file}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def _add_log_options(parser: argparse.ArgumentParser, with_input: bool = True) -> None:
    if with_input:
        parser.add_argument("--log", required=True, help="event log (.csv or .xes)")
    parser.add_argument("--case-col", default=event_log.DEFAULT_CASE_COL,
                        help="case id column (default: %(default)s)")
    parser.add_argument("--activity-col", default=event_log.DEFAULT_ACTIVITY_COL,
                        help="activity column (default: %(default)s)")
    parser.add_argument("--date-col", default=event_log.DEFAULT_DATE_COL,
                        help="date column (default: %(default)s)")
    parser.add_argument("--date-format", default=event_log.DEFAULT_DATE_FORMAT,
                        help="strptime pattern for dates (default: %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="careflow",
        description="Guideline conformance toolkit: event logs vs BPMN models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="clean a log: outliers, abstraction, variants")
    _add_log_options(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--max-days", type=int, default=None,
                   help="drop cases spanning more than this many days")
    p.add_argument("--abstraction-map", default=None,
                   help="JSON file mapping labels to replacements (null drops)")
    p.add_argument("--min-variant-count", type=int, default=1,
                   help="drop variants rarer than this (default: %(default)s)")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("check", help="align a log against a BPMN model")
    _add_log_options(p)
    p.add_argument("--model", required=True, help="BPMN 2.0 model file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--waves", default=None,
                   help="comma-separated ISO cutoff dates for wave splitting")
    p.add_argument("--format", choices=("csv", "markdown", "json"), default="csv",
                   help="report table format (default: %(default)s)")
    p.add_argument("--dump-alignments", action="store_true",
                   help="write per-case alignment moves as TSV")
    p.add_argument("--no-figures", action="store_true", help="skip PNG figures")
    p.add_argument("--state-budget", type=int,
                   default=alignment_mod.DEFAULT_STATE_BUDGET,
                   help="alignment search state budget (default: %(default)s)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("convert", help="compile BPMN to a Petri net (PNML)")
    p.add_argument("--model", required=True, help="BPMN 2.0 model file")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("dotted-chart", help="export dotted-chart CSV/SVG/PNG")
    _add_log_options(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--waves", default=None,
                   help="comma-separated ISO cutoff dates drawn as separators")
    p.add_argument("--no-figures", action="store_true", help="skip the PNG rendering")
    p.set_defaults(func=cmd_dotted_chart)

    p = sub.add_parser("simulate", help="random playouts of a model, optional noise")
    p.add_argument("--model", required=True, help="BPMN 2.0 model file")
    p.add_argument("--out", required=True, help="output directory")
    _add_log_options(p, with_input=False)
    p.add_argument("--traces", type=int, default=100,
                   help="number of playouts (default: %(default)s)")
    p.add_argument("--seed", type=int, default=0,
                   help="base random seed (default: %(default)s)")
    p.add_argument("--max-steps", type=int, default=500,
                   help="playout step budget (default: %(default)s)")
    p.add_argument("--noise-edits", type=int, default=0,
                   help="random edits injected per trace (default: %(default)s)")
    p.add_argument("--noise-kinds", default="drop,insert,swap",
                   help="comma-separated edit kinds (default: %(default)s)")
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(
        level=logging.WARNING, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except petri.CompileError as exc:
        print(f"error: model compilation failed: {exc}", file=sys.stderr)
        return EXIT_COMPILE
    except alignment_mod.UnsoundModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPILE


if __name__ == "__main__":
    sys.exit(main())
