"""Command line entry point: run a suite, print a crafting census, or replot."""

from __future__ import annotations

import argparse
import logging
import re
import sys
from pathlib import Path

from .environment import TruthScope
from .grounding import GroundingModeKind
from .harness import (
    aggregate_traces,
    craft,
    emit_aggregate_csv,
    emit_outputs,
    emit_plots,
    load_bundle,
    parse_manifest,
    read_traces_csv,
    run_suite,
)
from .student import StudentPolicyKind
from .teacher import TeacherPolicyKind

log = logging.getLogger(__name__)

_TEACHER_ALIASES = {
    "random": TeacherPolicyKind.RANDOM,
    "property": TeacherPolicyKind.PROPERTY_BASED,
    "property_based": TeacherPolicyKind.PROPERTY_BASED,
    "property-based": TeacherPolicyKind.PROPERTY_BASED,
}
_STUDENT_ALIASES = {
    "frequency": StudentPolicyKind.FREQUENCY,
    "logic": StudentPolicyKind.LOGIC,
}


def parse_policy_grid(value: str):
    """Parse `T1,T2×S1,S2` (an ascii `x` works too) into a policy grid."""
    halves = re.split(r"[×xX]", value, maxsplit=1)
    if len(halves) != 2:
        raise argparse.ArgumentTypeError(
            f"expected `teachers×students`, e.g. random,property×frequency,logic; got {value!r}"
        )

    def lookup(names: str, aliases, side: str):
        kinds = []
        for token in names.replace(",", " ").split():
            kind = aliases.get(token.strip().lower())
            if kind is None:
                raise argparse.ArgumentTypeError(
                    f"unknown {side} policy {token!r} (choose from {sorted(aliases)})"
                )
            if kind not in kinds:
                kinds.append(kind)
        if not kinds:
            raise argparse.ArgumentTypeError(f"no {side} policies given in {value!r}")
        return tuple(kinds)

    return (
        lookup(halves[0], _TEACHER_ALIASES, "teacher"),
        lookup(halves[1], _STUDENT_ALIASES, "student"),
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="queryteach",
        description="Teach queries across agent ontologies with grounded examples.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the full experiment suite for a dataset")
    run.add_argument("--config", required=True, help="dataset manifest file")
    run.add_argument("--out", default=None, help="output directory (default out/<name>)")
    run.add_argument("--seed", type=int, default=None, help="override the manifest seed")
    run.add_argument(
        "--policies",
        type=parse_policy_grid,
        default=None,
        metavar="T1,T2×S1,S2",
        help="policy grid, e.g. random,property×frequency,logic",
    )
    run.add_argument(
        "--grounding",
        choices=[m.value for m in GroundingModeKind],
        default=None,
        help="override the manifest grounding mode",
    )
    run.add_argument(
        "--truth-scope",
        choices=[s.value for s in TruthScope],
        default=None,
        help="answer-set scope: student view only, or union with the teacher view",
    )
    run.add_argument("--max-cycles", type=int, default=None)
    run.add_argument("--repetitions", type=int, default=None)
    run.add_argument("--workers", type=int, default=1, help="parallel worker processes")

    craft_cmd = sub.add_parser("craft", help="print the experiment census for a dataset")
    craft_cmd.add_argument("--config", required=True)
    craft_cmd.add_argument(
        "--grounding", choices=[m.value for m in GroundingModeKind], default=None
    )

    plot = sub.add_parser("plot", help="re-aggregate a traces.csv and emit plots")
    plot.add_argument("--traces", required=True)
    plot.add_argument("--out", default=None, help="output directory (default: alongside traces)")
    plot.add_argument("--max-cycle", type=int, default=20)

    return parser


def _configured_bundle(args):
    config = parse_manifest(args.config)
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    if getattr(args, "grounding", None) is not None:
        config.grounding = GroundingModeKind(args.grounding)
        if config.grounding is not GroundingModeKind.EXTENDED:
            config.imports = {}
    if getattr(args, "truth_scope", None) is not None:
        config.truth_scope = TruthScope(args.truth_scope)
    if getattr(args, "max_cycles", None) is not None:
        config.max_cycles = args.max_cycles
    if getattr(args, "repetitions", None) is not None:
        config.repetitions = args.repetitions
    return config, load_bundle(config)


def cmd_run(args) -> int:
    config, bundle = _configured_bundle(args)
    result = run_suite(
        bundle,
        policy_grid=args.policies,
        repetitions=config.repetitions,
        base_seed=config.seed,
        max_cycles=config.max_cycles,
        truth_scope=config.truth_scope,
        workers=args.workers,
    )
    out_dir = Path(args.out) if args.out else Path("out") / config.name
    written = emit_outputs(result, out_dir)
    episodes = len(result.traces)
    experiments = len({t.spec_id for t in result.traces})
    print(f"{config.name}: {experiments} experiments, {episodes} episodes")
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_craft(args) -> int:
    config, bundle = _configured_bundle(args)
    crafted = craft(bundle, config.max_cycles, config.truth_scope)
    print(f"dataset: {config.name} (grounding={config.grounding.value})")
    for pair, count in sorted(crafted.commons_per_pair.items()):
        refs = len(bundle.reference_class_alignments[pair])
        print(f"  pair {pair[0]}:{pair[1]}: {count} common instances, {refs} class alignments")
    if crafted.commons_per_pair:
        print(f"mean common instances per pair: {crafted.mean_common_instances:.1f}")
    print(f"runnable experiments: {len(crafted.specs)}")
    print(f"skipped directions: {len(crafted.skipped)}")
    for skip in crafted.skipped:
        print(f"  {skip.teacher}>{skip.student} {skip.query_property}: {skip.reason}")
    return 0


def cmd_plot(args) -> int:
    traces = read_traces_csv(args.traces)
    if not traces:
        print("traces file contains no records", file=sys.stderr)
        return 1
    aggregates = aggregate_traces(traces)
    out_dir = Path(args.out) if args.out else Path(args.traces).parent
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [emit_aggregate_csv(aggregates, out_dir)]
    written += emit_plots(aggregates, out_dir, plot_max_cycle=args.max_cycle)
    for path in written:
        print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "craft":
            return cmd_craft(args)
        return cmd_plot(args)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
