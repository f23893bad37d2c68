"""Experiment crafting, suite execution, aggregation and output emission.

A dataset manifest (flat `key = value` file) names the triple file per
ontology, the ontology pairs, the reference class alignment TSV per pair,
the grounding mode and the run parameters. Every reference class alignment
yields up to two experiments, one per teaching direction, kept only when
both classes have a common instance and the teacher side can build an
example pool. Each experiment runs under every policy combination for a
number of seeded repetitions; repetition means are computed before
cross-experiment means.
"""

from __future__ import annotations

import csv
import logging
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .corpus import DEFAULT_TYPE_PREDICATE, AgentOntology, load_view
from .environment import ExperimentSpec, ExperimentTrace, TruthScope, run_episode
from .grounding import (
    GroundingMode,
    GroundingModeKind,
    InstanceAlignment,
    align,
    load_imported_alignments,
)
from .student import StudentPolicy, StudentPolicyKind
from .svgchart import line_chart
from .teacher import TeacherPolicy, TeacherPolicyKind

log = logging.getLogger(__name__)

DEFAULT_POLICY_GRID = (
    (TeacherPolicyKind.RANDOM, TeacherPolicyKind.PROPERTY_BASED),
    (StudentPolicyKind.FREQUENCY, StudentPolicyKind.LOGIC),
)

TRACE_COLUMNS = [
    "experiment_id",
    "teacher_ontology",
    "student_ontology",
    "query_property",
    "target_property",
    "teacher_policy",
    "student_policy",
    "repetition",
    "cycle",
    "precision",
    "recall",
    "examples_sent",
    "teacher_episodic",
    "student_episodic",
    "student_working",
    "feedback",
]


class ManifestError(ValueError):
    pass


@dataclass
class RunConfig:
    """Parsed dataset manifest with resolved paths."""

    name: str
    triples: dict[str, Path]
    pairs: list[tuple[str, str]]
    refs: dict[tuple[str, str], Path]
    imports: dict[tuple[str, str], Path] = field(default_factory=dict)
    type_predicate: str = DEFAULT_TYPE_PREDICATE
    grounding: GroundingModeKind = GroundingModeKind.SIMPLE
    max_cycles: int = 50
    repetitions: int = 10
    seed: int = 0
    truth_scope: TruthScope = TruthScope.STUDENT


def parse_manifest(path) -> RunConfig:
    """Parse a flat key-value manifest; relative paths resolve against it.

    Required keys: `name`, one `triples.<ontology>` per view, `pairs`
    (comma-separated `a:b` tokens) and one `refs.<a>:<b>` per pair.
    Optional: `imports.<a>:<b>`, `type_predicate`, `grounding`,
    `max_cycles`, `repetitions`, `seed`, `truth_scope`.
    """
    path = Path(path)
    base = path.parent
    entries: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ManifestError(f"{path}: line {line_no}: expected `key = value`")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not key or not value:
                raise ManifestError(f"{path}: line {line_no}: empty key or value")
            if key in entries:
                raise ManifestError(f"{path}: line {line_no}: duplicate key {key!r}")
            entries[key] = value

    def pop(key: str, default: str | None = None) -> str | None:
        return entries.pop(key, default)

    name = pop("name")
    if not name:
        raise ManifestError(f"{path}: missing `name`")

    pairs_value = pop("pairs")
    if not pairs_value:
        raise ManifestError(f"{path}: missing `pairs`")
    pairs: list[tuple[str, str]] = []
    for token in pairs_value.replace(",", " ").split():
        if ":" not in token:
            raise ManifestError(f"{path}: pair {token!r} must look like `a:b`")
        a, _, b = token.partition(":")
        if (a, b) in pairs:
            raise ManifestError(f"{path}: duplicate pair {token!r}")
        pairs.append((a, b))

    grounding = GroundingModeKind(pop("grounding", "simple"))
    truth_scope = TruthScope(pop("truth_scope", "student"))
    type_predicate = pop("type_predicate", DEFAULT_TYPE_PREDICATE)
    max_cycles = int(pop("max_cycles", "50"))
    repetitions = int(pop("repetitions", "10"))
    seed = int(pop("seed", "0"))

    triples: dict[str, Path] = {}
    refs: dict[tuple[str, str], Path] = {}
    imports: dict[tuple[str, str], Path] = {}
    for key, value in entries.items():
        prefix, _, rest = key.partition(".")
        if prefix == "triples" and rest:
            triples[rest] = base / value
        elif prefix == "refs" and ":" in rest:
            a, _, b = rest.partition(":")
            refs[(a, b)] = base / value
        elif prefix == "imports" and ":" in rest:
            a, _, b = rest.partition(":")
            imports[(a, b)] = base / value
        else:
            raise ManifestError(f"{path}: unknown key {key!r}")

    for a, b in pairs:
        for onto in (a, b):
            if onto not in triples:
                raise ManifestError(f"{path}: pair ({a}, {b}) names unknown ontology {onto!r}")
        if (a, b) not in refs:
            raise ManifestError(f"{path}: no refs.{a}:{b} entry")
    if imports and grounding is not GroundingModeKind.EXTENDED:
        raise ManifestError(f"{path}: imports are only permitted with extended grounding")

    return RunConfig(
        name=name,
        triples=triples,
        pairs=pairs,
        refs=refs,
        imports=imports,
        type_predicate=type_predicate,
        grounding=grounding,
        max_cycles=max_cycles,
        repetitions=repetitions,
        seed=seed,
        truth_scope=truth_scope,
    )


@dataclass
class DatasetBundle:
    name: str
    views: dict[str, AgentOntology]
    pairs: list[tuple[str, str]]
    reference_class_alignments: dict[tuple[str, str], list[tuple[str, str]]]
    grounding_mode: GroundingModeKind = GroundingModeKind.SIMPLE
    imported: dict[tuple[str, str], tuple[InstanceAlignment, ...]] = field(default_factory=dict)


def load_class_alignments(path) -> list[tuple[str, str]]:
    """Read a `classA TAB classB` TSV of reference class alignments."""
    out: list[tuple[str, str]] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2 or not all(f.strip() for f in fields):
                raise ManifestError(f"{path}: line {line_no}: expected `classA TAB classB`")
            out.append((fields[0].strip(), fields[1].strip()))
    return out


def load_bundle(config: RunConfig) -> DatasetBundle:
    views = {
        name: load_view(path, name, config.type_predicate)
        for name, path in sorted(config.triples.items())
    }
    refs: dict[tuple[str, str], list[tuple[str, str]]] = {}
    for pair in config.pairs:
        refs[pair] = load_class_alignments(config.refs[pair])
        a, b = pair
        for class_a, class_b in refs[pair]:
            if not views[a].owners(class_a):
                log.warning("class %s has no instances in %s", class_a, a)
            if not views[b].owners(class_b):
                log.warning("class %s has no instances in %s", class_b, b)
    imported = {
        pair: tuple(load_imported_alignments(path))
        for pair, path in sorted(config.imports.items())
    }
    return DatasetBundle(
        name=config.name,
        views=views,
        pairs=list(config.pairs),
        reference_class_alignments=refs,
        grounding_mode=config.grounding,
        imported=imported,
    )


def grounding_for_pair(bundle: DatasetBundle, pair: tuple[str, str]) -> GroundingMode:
    return GroundingMode(bundle.grounding_mode, bundle.imported.get(pair, ()))


@dataclass(frozen=True, slots=True)
class SkippedExperiment:
    teacher: str
    student: str
    query_property: str
    target_property: str
    reason: str


@dataclass
class CraftResult:
    specs: list[ExperimentSpec]
    skipped: list[SkippedExperiment]
    commons_per_pair: dict[tuple[str, str], int]

    @property
    def mean_common_instances(self) -> float:
        if not self.commons_per_pair:
            return 0.0
        return statistics.mean(self.commons_per_pair.values())


def _flip(alignments: list[InstanceAlignment]) -> tuple[InstanceAlignment, ...]:
    return tuple(InstanceAlignment(al.right, al.left, al.rule) for al in alignments)


def craft(
    bundle: DatasetBundle,
    max_cycles: int = 50,
    truth_scope: TruthScope = TruthScope.STUDENT,
) -> CraftResult:
    """Turn every reference class alignment into up to two experiment specs.

    A direction is kept when both classes have at least one instance among
    the pair's common objects and the teacher side has a non-owner common
    object to pair it with (a buildable pool). Skipped directions are
    recorded with their reason.
    """
    specs: list[ExperimentSpec] = []
    skipped: list[SkippedExperiment] = []
    commons_per_pair: dict[tuple[str, str], int] = {}
    default_teacher = TeacherPolicy(TeacherPolicyKind.RANDOM)
    default_student = StudentPolicy(StudentPolicyKind.FREQUENCY)

    for pair in bundle.pairs:
        a_name, b_name = pair
        view_a, view_b = bundle.views[a_name], bundle.views[b_name]
        alignments = align(view_a, view_b, grounding_for_pair(bundle, pair))
        commons_per_pair[pair] = len(alignments)
        oriented = {
            (a_name, b_name): tuple(alignments),
            (b_name, a_name): _flip(alignments),
        }
        for index, (class_a, class_b) in enumerate(bundle.reference_class_alignments[pair]):
            directions = [
                (a_name, b_name, class_a, class_b),
                (b_name, a_name, class_b, class_a),
            ]
            for teacher, student, query, target in directions:
                teacher_view = bundle.views[teacher]
                student_view = bundle.views[student]
                orientation = oriented[(teacher, student)]
                teacher_map = {al.left: al.left for al in orientation}
                student_map = {al.left: al.right for al in orientation}
                reason = _usable(teacher_view, student_view, teacher_map, student_map, query, target)
                if reason is not None:
                    skipped.append(SkippedExperiment(teacher, student, query, target, reason))
                    log.info("skipping %s>%s %s=%s: %s", teacher, student, query, target, reason)
                    continue
                specs.append(
                    ExperimentSpec(
                        spec_id=f"{teacher}>{student}:{index:03d}",
                        teacher_view=teacher_view,
                        student_view=student_view,
                        alignment=orientation,
                        query_property=query,
                        target_property=target,
                        teacher_policy=default_teacher,
                        student_policy=default_student,
                        max_cycles=max_cycles,
                        truth_scope=truth_scope,
                    )
                )
    return CraftResult(specs, skipped, commons_per_pair)


def _usable(teacher_view, student_view, teacher_map, student_map, query, target) -> str | None:
    """None when the direction yields a runnable experiment, else the reason."""
    teacher_owners = [c for c in teacher_map if query in teacher_view.props(teacher_map[c])]
    if not teacher_owners:
        return f"no common instance of {query} in {teacher_view.name}"
    if len(teacher_owners) == len(teacher_map):
        return f"no negative exemplar for {query} in {teacher_view.name}"
    student_owners = [c for c in student_map if target in student_view.props(student_map[c])]
    if not student_owners:
        return f"no common instance of {target} in {student_view.name}"
    return None


def craft_experiments(
    bundle: DatasetBundle,
    max_cycles: int = 50,
    truth_scope: TruthScope = TruthScope.STUDENT,
) -> list[ExperimentSpec]:
    return craft(bundle, max_cycles, truth_scope).specs


def _run_spec_grid(args) -> list[ExperimentTrace]:
    """Run every policy combination and repetition for one crafted spec."""
    spec, teacher_kinds, student_kinds, repetitions, base_seed = args
    traces = []
    for t_kind in teacher_kinds:
        for s_kind in student_kinds:
            for rep in range(repetitions):
                run_spec = replace(
                    spec,
                    teacher_policy=TeacherPolicy(t_kind),
                    student_policy=StudentPolicy(s_kind),
                    seed=base_seed + rep,
                )
                traces.append(run_episode(run_spec, repetition=rep))
    return traces


@dataclass(slots=True)
class AggregateRow:
    teacher_policy: str
    student_policy: str
    cycle: int
    experiments: int
    mean_precision: float
    mean_recall: float


@dataclass(slots=True)
class MemorySummaryRow:
    teacher_policy: str
    student_policy: str
    experiments: int
    mean_examples_sent: float
    mean_student_working: float
    mean_student_episodic: float
    student_episodic_pct: float
    mean_teacher_episodic: float
    teacher_episodic_pct: float


@dataclass
class SuiteResult:
    traces: list[ExperimentTrace]
    aggregates: list[AggregateRow]
    memory_summary: list[MemorySummaryRow]


def run_suite(
    bundle: DatasetBundle,
    policy_grid=None,
    repetitions: int = 10,
    base_seed: int = 0,
    max_cycles: int = 50,
    truth_scope: TruthScope = TruthScope.STUDENT,
    workers: int = 1,
) -> SuiteResult:
    """Run the whole policy grid over every crafted experiment.

    Repetition seeds are base_seed + repetition index, so the suite is
    deterministic given base_seed regardless of worker count.
    """
    crafted = craft(bundle, max_cycles, truth_scope)
    if not crafted.specs:
        raise ValueError(f"dataset {bundle.name!r} yields no runnable experiments")
    teacher_kinds, student_kinds = policy_grid or DEFAULT_POLICY_GRID
    tasks = [
        (spec, tuple(teacher_kinds), tuple(student_kinds), repetitions, base_seed)
        for spec in crafted.specs
    ]
    traces: list[ExperimentTrace] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for chunk in pool.map(_run_spec_grid, tasks):
                traces.extend(chunk)
    else:
        for task in tasks:
            traces.extend(_run_spec_grid(task))
    traces.sort(
        key=lambda t: (
            t.spec_id,
            t.teacher_policy.kind.value,
            t.student_policy.kind.value,
            t.repetition,
        )
    )
    return SuiteResult(traces, aggregate_traces(traces), summarize_memory(traces))


def _policy_key(trace: ExperimentTrace) -> tuple[str, str]:
    return trace.teacher_policy.kind.value, trace.student_policy.kind.value


def aggregate_traces(traces: list[ExperimentTrace]) -> list[AggregateRow]:
    """Mean precision/recall per policy pair and cycle.

    Repetition means first: each experiment contributes one value per
    cycle, averaged over the repetitions that reached that cycle; only
    experiments with at least one such repetition count.
    """
    by_group: dict[tuple[str, str, str], list[ExperimentTrace]] = {}
    for trace in traces:
        key = (*_policy_key(trace), trace.spec_id)
        by_group.setdefault(key, []).append(trace)

    max_cycle = max((len(t.records) for t in traces), default=0)
    rows: list[AggregateRow] = []
    policy_pairs = sorted({_policy_key(t) for t in traces})
    for t_policy, s_policy in policy_pairs:
        spec_ids = sorted(
            {sid for (tp, sp, sid) in by_group if (tp, sp) == (t_policy, s_policy)}
        )
        for cycle in range(1, max_cycle + 1):
            exp_precisions: list[float] = []
            exp_recalls: list[float] = []
            for sid in spec_ids:
                reps = by_group[(t_policy, s_policy, sid)]
                precisions = [
                    t.records[cycle - 1].precision for t in reps if len(t.records) >= cycle
                ]
                recalls = [
                    t.records[cycle - 1].recall for t in reps if len(t.records) >= cycle
                ]
                if precisions:
                    exp_precisions.append(statistics.mean(precisions))
                    exp_recalls.append(statistics.mean(recalls))
            if exp_precisions:
                rows.append(
                    AggregateRow(
                        teacher_policy=t_policy,
                        student_policy=s_policy,
                        cycle=cycle,
                        experiments=len(exp_precisions),
                        mean_precision=statistics.mean(exp_precisions),
                        mean_recall=statistics.mean(exp_recalls),
                    )
                )
    return rows


def summarize_memory(traces: list[ExperimentTrace]) -> list[MemorySummaryRow]:
    """End-of-episode memory demands per policy pair.

    Percentage bases: the Teacher's unclear-example memory over the initial
    pool size, the Student's memorized sets over the examples sent. Raw
    counts are always emitted alongside (memory.csv) so any other base can
    be recomputed.
    """
    by_group: dict[tuple[str, str, str], list[ExperimentTrace]] = {}
    for trace in traces:
        if not trace.records:
            continue
        key = (*_policy_key(trace), trace.spec_id)
        by_group.setdefault(key, []).append(trace)

    rows: list[MemorySummaryRow] = []
    policy_pairs = sorted({key[:2] for key in by_group})
    for t_policy, s_policy in policy_pairs:
        per_experiment: list[tuple[float, float, float, float, float, float]] = []
        spec_ids = sorted({sid for (tp, sp, sid) in by_group if (tp, sp) == (t_policy, s_policy)})
        for sid in spec_ids:
            reps = by_group[(t_policy, s_policy, sid)]
            finals = [t.records[-1] for t in reps]
            pool_fractions = [
                t.records[-1].teacher_episodic / t.initial_pool_size
                for t in reps
                if t.initial_pool_size > 0
            ]
            per_experiment.append(
                (
                    statistics.mean(r.examples_sent for r in finals),
                    statistics.mean(r.student_working for r in finals),
                    statistics.mean(r.student_episodic for r in finals),
                    statistics.mean(r.student_episodic / r.examples_sent for r in finals),
                    statistics.mean(r.teacher_episodic for r in finals),
                    statistics.mean(pool_fractions) if pool_fractions else 0.0,
                )
            )
        columns = list(zip(*per_experiment))
        rows.append(
            MemorySummaryRow(
                teacher_policy=t_policy,
                student_policy=s_policy,
                experiments=len(per_experiment),
                mean_examples_sent=statistics.mean(columns[0]),
                mean_student_working=statistics.mean(columns[1]),
                mean_student_episodic=statistics.mean(columns[2]),
                student_episodic_pct=100.0 * statistics.mean(columns[3]),
                mean_teacher_episodic=statistics.mean(columns[4]),
                teacher_episodic_pct=100.0 * statistics.mean(columns[5]),
            )
        )
    return rows


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def emit_traces_csv(traces: list[ExperimentTrace], out_dir) -> Path:
    rows = []
    for t in traces:
        for r in t.records:
            rows.append(
                [
                    t.spec_id,
                    t.teacher_ontology,
                    t.student_ontology,
                    t.query_property,
                    t.target_property,
                    t.teacher_policy.kind.value,
                    t.student_policy.kind.value,
                    t.repetition,
                    r.cycle,
                    f"{r.precision:.6f}",
                    f"{r.recall:.6f}",
                    r.examples_sent,
                    r.teacher_episodic,
                    r.student_episodic,
                    r.student_working,
                    r.feedback.value,
                ]
            )
    path = Path(out_dir) / "traces.csv"
    _write_csv(path, TRACE_COLUMNS, rows)
    return path


def emit_aggregate_csv(aggregates: list[AggregateRow], out_dir) -> Path:
    rows = [
        [
            a.teacher_policy,
            a.student_policy,
            a.cycle,
            a.experiments,
            f"{a.mean_precision:.6f}",
            f"{a.mean_recall:.6f}",
        ]
        for a in aggregates
    ]
    path = Path(out_dir) / "aggregate.csv"
    _write_csv(
        path,
        ["teacher_policy", "student_policy", "cycle", "experiments", "mean_precision", "mean_recall"],
        rows,
    )
    return path


def emit_memory_csvs(result: SuiteResult, out_dir) -> list[Path]:
    out = Path(out_dir)
    memory_rows = [
        [
            t.spec_id,
            t.teacher_policy.kind.value,
            t.student_policy.kind.value,
            t.repetition,
            t.records[-1].examples_sent,
            t.initial_pool_size,
            t.records[-1].teacher_episodic,
            t.records[-1].student_episodic,
            t.records[-1].student_working,
        ]
        for t in result.traces
        if t.records
    ]
    memory_path = out / "memory.csv"
    _write_csv(
        memory_path,
        [
            "experiment_id",
            "teacher_policy",
            "student_policy",
            "repetition",
            "examples_sent",
            "initial_pool_size",
            "teacher_episodic",
            "student_episodic",
            "student_working",
        ],
        memory_rows,
    )

    summary_rows = [
        [
            m.teacher_policy,
            m.student_policy,
            m.experiments,
            f"{m.mean_examples_sent:.6f}",
            f"{m.mean_student_working:.6f}",
            f"{m.mean_student_episodic:.6f}",
            f"{m.student_episodic_pct:.6f}",
            f"{m.mean_teacher_episodic:.6f}",
            f"{m.teacher_episodic_pct:.6f}",
        ]
        for m in result.memory_summary
    ]
    summary_path = out / "memory_summary.csv"
    _write_csv(
        summary_path,
        [
            "teacher_policy",
            "student_policy",
            "experiments",
            "mean_examples_sent",
            "mean_student_working",
            "mean_student_episodic",
            "student_episodic_pct",
            "mean_teacher_episodic",
            "teacher_episodic_pct",
        ],
        summary_rows,
    )
    return [memory_path, summary_path]


def emit_plots(aggregates: list[AggregateRow], out_dir, plot_max_cycle: int = 20) -> list[Path]:
    """One SVG per metric: a mean-vs-cycle line per policy pair."""
    out = Path(out_dir)
    written = []
    pairs = sorted({(a.teacher_policy, a.student_policy) for a in aggregates})
    for metric in ("precision", "recall"):
        series = []
        for t_policy, s_policy in pairs:
            points = [
                (float(a.cycle), getattr(a, f"mean_{metric}"))
                for a in aggregates
                if a.teacher_policy == t_policy
                and a.student_policy == s_policy
                and a.cycle <= plot_max_cycle
            ]
            if points:
                series.append((f"{t_policy}-{s_policy}", points))
        path = out / f"{metric}.svg"
        path.write_text(
            line_chart(f"mean {metric} vs examples", series, y_label=metric),
            encoding="utf-8",
        )
        written.append(path)
    return written


def emit_outputs(result: SuiteResult, out_dir, plot_max_cycle: int = 20) -> list[Path]:
    """Write traces.csv, aggregate.csv, the memory CSVs and the SVG plots."""
    if not result.traces:
        raise ValueError("cannot emit outputs for an empty suite")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return [
        emit_traces_csv(result.traces, out),
        emit_aggregate_csv(result.aggregates, out),
        *emit_memory_csvs(result, out),
        *emit_plots(result.aggregates, out, plot_max_cycle),
    ]


def read_traces_csv(path) -> list[ExperimentTrace]:
    """Rebuild traces from a traces.csv for re-aggregation and plotting."""
    from .environment import CycleRecord
    from .interpretation import Feedback

    grouped: dict[tuple, ExperimentTrace] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(TRACE_COLUMNS) - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            key = (
                row["experiment_id"],
                row["teacher_policy"],
                row["student_policy"],
                int(row["repetition"]),
            )
            if key not in grouped:
                grouped[key] = ExperimentTrace(
                    spec_id=row["experiment_id"],
                    teacher_ontology=row["teacher_ontology"],
                    student_ontology=row["student_ontology"],
                    query_property=row["query_property"],
                    target_property=row["target_property"],
                    teacher_policy=TeacherPolicy(TeacherPolicyKind(row["teacher_policy"])),
                    student_policy=StudentPolicy(StudentPolicyKind(row["student_policy"])),
                    repetition=int(row["repetition"]),
                )
            grouped[key].records.append(
                CycleRecord(
                    cycle=int(row["cycle"]),
                    precision=float(row["precision"]),
                    recall=float(row["recall"]),
                    examples_sent=int(row["examples_sent"]),
                    teacher_episodic=int(row["teacher_episodic"]),
                    student_episodic=int(row["student_episodic"]),
                    student_working=int(row["student_working"]),
                    feedback=Feedback(row["feedback"]),
                )
            )
    return list(grouped.values())
