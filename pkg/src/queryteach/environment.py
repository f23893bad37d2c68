"""The interaction environment: one episode of the three-step cycle.

Per cycle the Teacher presents a grounded example, the Student interprets
it in its own view, updates its state and answers the query, and the
environment scores the answer against the ground truth. The evaluation is
recorded for the Teacher's side of the trace only; the Student's state is
a pure function of the example stream and never sees precision or recall.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable

from .corpus import AgentOntology, property_weights
from .grounding import InstanceAlignment
from .interpretation import Feedback, interpret
from .student import (
    StudentPolicy,
    answer,
    derive_representation,
    memory_metrics,
    new_state,
    observe,
)
from .teacher import (
    PoolExhaustedError,
    TeacherPolicy,
    build_pool,
    next_example,
    receive_feedback,
)


class TruthScope(Enum):
    STUDENT = "student"
    UNION = "union"


class Termination(Enum):
    MAX_CYCLES = "max_cycles"
    POOL_EXHAUSTED = "pool_exhausted"


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything one episode needs.

    The alignment is oriented: `left` identifiers belong to the teacher
    view, `right` to the student view. `query_property` is the teacher-side
    class being explained; `target_property` is the student-side class of
    the reference alignment, used only to define the answer set.
    """

    spec_id: str
    teacher_view: AgentOntology
    student_view: AgentOntology
    alignment: tuple[InstanceAlignment, ...]
    query_property: str
    target_property: str
    teacher_policy: TeacherPolicy
    student_policy: StudentPolicy
    max_cycles: int = 50
    seed: int = 0
    truth_scope: TruthScope = TruthScope.STUDENT


@dataclass(slots=True)
class CycleRecord:
    cycle: int
    precision: float
    recall: float
    examples_sent: int
    teacher_episodic: int
    student_episodic: int
    student_working: int
    feedback: Feedback


@dataclass
class ExperimentTrace:
    spec_id: str
    teacher_ontology: str
    student_ontology: str
    query_property: str
    target_property: str
    teacher_policy: TeacherPolicy
    student_policy: StudentPolicy
    repetition: int
    records: list[CycleRecord] = field(default_factory=list)
    termination: Termination = Termination.MAX_CYCLES
    initial_pool_size: int = 0


def ground_truth(spec: ExperimentSpec) -> frozenset[str]:
    """The complete answer set the environment holds.

    By default: the student view's instances of the target class (the
    Student can only ever return its own objects). UNION scope adds the
    teacher view's instances of the query class, mapped into student-side
    identifiers where the instance is a common object.
    """
    truth = set(spec.student_view.owners(spec.target_property))
    if spec.truth_scope is TruthScope.UNION:
        to_student = {al.left: al.right for al in spec.alignment}
        for obj in spec.teacher_view.owners(spec.query_property):
            truth.add(to_student.get(obj, obj))
    if not truth:
        raise ValueError(
            f"target {spec.target_property!r} has no instances; "
            "the experiment should have been rejected at crafting time"
        )
    return frozenset(truth)


def evaluate(answers: Iterable[str], truth: frozenset[str]) -> tuple[float, float]:
    """Precision and recall of the answer set; an empty answer scores (0, 0)."""
    answer_set = set(answers)
    if not truth:
        raise ValueError("ground truth must be non-empty")
    if not answer_set:
        return 0.0, 0.0
    hits = len(answer_set & truth)
    return hits / len(answer_set), hits / len(truth)


EvaluateFn = Callable[[set[str], frozenset[str]], tuple[float, float]]


def run_episode(
    spec: ExperimentSpec,
    repetition: int = 0,
    evaluate_fn: EvaluateFn | None = None,
    answer_log: list | None = None,
) -> ExperimentTrace:
    """Run one episode until max_cycles or pool exhaustion.

    `evaluate_fn` replaces the environment's scoring (used to demonstrate
    that the Student's behavior cannot depend on it). `answer_log`, when
    given, collects the Student's ranked answer list per cycle.
    """
    teacher_map = {al.left: al.left for al in spec.alignment}
    student_map = {al.left: al.right for al in spec.alignment}
    weights = property_weights(spec.teacher_view)
    pool = build_pool(spec.teacher_view, teacher_map, spec.query_property)
    state = new_state(spec.student_policy)
    truth = ground_truth(spec)
    seed = spec.teacher_policy.rng_seed
    rng = random.Random(spec.seed if seed is None else seed)
    scorer = evaluate if evaluate_fn is None else evaluate_fn

    trace = ExperimentTrace(
        spec_id=spec.spec_id,
        teacher_ontology=spec.teacher_view.name,
        student_ontology=spec.student_view.name,
        query_property=spec.query_property,
        target_property=spec.target_property,
        teacher_policy=spec.teacher_policy,
        student_policy=spec.student_policy,
        repetition=repetition,
        initial_pool_size=pool.initial_size,
    )

    for cycle in range(1, spec.max_cycles + 1):
        try:
            ex = next_example(pool, spec.teacher_policy, weights, rng)
        except PoolExhaustedError:
            trace.termination = Termination.POOL_EXHAUSTED
            return trace
        feedback = observe(state, interpret(spec.student_view, ex, student_map))
        receive_feedback(pool, ex, feedback)
        ranked = answer(derive_representation(state), spec.student_view)
        if answer_log is not None:
            answer_log.append(tuple(ranked))
        precision, recall = scorer({obj for obj, _ in ranked}, truth)
        episodic, working = memory_metrics(state)
        trace.records.append(
            CycleRecord(
                cycle=cycle,
                precision=precision,
                recall=recall,
                examples_sent=cycle,
                teacher_episodic=len(pool.removed),
                student_episodic=episodic,
                student_working=working,
                feedback=feedback,
            )
        )
    trace.termination = Termination.MAX_CYCLES
    return trace
