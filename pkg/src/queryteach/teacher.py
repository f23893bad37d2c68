"""Teacher side: the example pool and the example selection policies.

The pool for a query property holds every ordered pair of common objects
whose teacher-side Positive set contains that property (the first object
owns it, the second one does not). The Random policy samples the pool
uniformly with replacement. The Property-based policy plays the candidate
with the highest score

    score = sum of weights over Negative and Common properties
          - sum of weights over Positive properties

so that examples excluding many frequent properties come first; scoring
ties are resolved uniformly at random. Examples the Student reports as
unclear are memorized and never presented again.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

from .corpus import AgentOntology, PropertyWeight
from .interpretation import Feedback, GroundedExample, interpret


class TeacherPolicyKind(Enum):
    RANDOM = "random"
    PROPERTY_BASED = "property_based"


@dataclass(frozen=True)
class TeacherPolicy:
    kind: TeacherPolicyKind
    rng_seed: int | None = None


@dataclass(frozen=True, slots=True)
class ExampleScore:
    example: GroundedExample
    score: float


class UntrainableQueryError(ValueError):
    """No candidate pair exists for the query property."""


class PoolExhaustedError(RuntimeError):
    """Every candidate has been removed; the episode must terminate."""


@dataclass
class ExamplePool:
    """Candidate examples for one query, plus the memorized unclear ones.

    `removed` is the Teacher's episodic memory. The private fields carry
    what scoring and stable sampling need; they are not part of the pool's
    logical state.
    """

    query_property: str
    candidates: set[GroundedExample]
    removed: set[GroundedExample] = field(default_factory=set)
    _view: AgentOntology | None = field(default=None, repr=False, compare=False)
    _to_local: Mapping[str, str] | None = field(default=None, repr=False, compare=False)
    _ordered: list[GroundedExample] = field(default_factory=list, repr=False, compare=False)
    _score_groups: list[tuple[float, list[GroundedExample]]] | None = field(
        default=None, repr=False, compare=False
    )
    initial_size: int = 0

    def __post_init__(self):
        if not self._ordered:
            self._ordered = sorted(self.candidates)
        if not self.initial_size:
            self.initial_size = len(self.candidates)


def build_pool(
    teacher_view: AgentOntology,
    to_local: Mapping[str, str],
    query_property: str,
) -> ExamplePool:
    """Enumerate all (owner, non-owner) pairs of common objects for the query.

    `to_local` maps common-object handles to the teacher's identifiers.
    Raises UntrainableQueryError when no pair qualifies (the query is not
    teachable over these common objects and the experiment is skipped).
    """
    commons = sorted(to_local)
    owners = [c for c in commons if query_property in teacher_view.props(to_local[c])]
    others = [c for c in commons if query_property not in teacher_view.props(to_local[c])]
    if not owners or not others:
        raise UntrainableQueryError(
            f"query {query_property!r} has no (owner, non-owner) pair among "
            f"{len(commons)} common objects"
        )
    candidates = {GroundedExample(r, i) for r in owners for i in others}
    return ExamplePool(
        query_property=query_property,
        candidates=candidates,
        _view=teacher_view,
        _to_local=to_local,
    )


def score_example(
    teacher_view: AgentOntology,
    weights: Mapping[str, PropertyWeight],
    ex: GroundedExample,
    to_local: Mapping[str, str] | None = None,
) -> ExampleScore:
    interp = interpret(teacher_view, ex, to_local)
    score = sum(weights[p].weight for p in interp.negative)
    score += sum(weights[p].weight for p in interp.common)
    score -= sum(weights[p].weight for p in interp.positive)
    return ExampleScore(ex, score)


def _score_groups(
    pool: ExamplePool, weights: Mapping[str, PropertyWeight]
) -> list[tuple[float, list[GroundedExample]]]:
    """All candidates grouped by score, best group first. Computed once:
    scores never change within an episode."""
    if pool._score_groups is None:
        if pool._view is None:
            raise ValueError("pool was built without a teacher view; cannot score")
        by_score: dict[float, list[GroundedExample]] = {}
        for ex in sorted(pool.candidates | pool.removed):
            scored = score_example(pool._view, weights, ex, pool._to_local)
            by_score.setdefault(scored.score, []).append(ex)
        pool._score_groups = [
            (score, by_score[score]) for score in sorted(by_score, reverse=True)
        ]
    return pool._score_groups


def next_example(
    pool: ExamplePool,
    policy: TeacherPolicy,
    weights: Mapping[str, PropertyWeight],
    rng: random.Random,
) -> GroundedExample:
    """Pick the next example to present.

    RANDOM samples uniformly with replacement; PROPERTY_BASED plays a
    maximum-score candidate, ties broken uniformly at random. Previously
    presented clear examples stay eligible. Raises PoolExhaustedError when
    no candidate remains.
    """
    if not pool.candidates:
        raise PoolExhaustedError(f"pool for {pool.query_property!r} is exhausted")
    if policy.kind is TeacherPolicyKind.RANDOM:
        return rng.choice(pool._ordered)
    for _, group in _score_groups(pool, weights):
        live = [ex for ex in group if ex in pool.candidates]
        if live:
            return rng.choice(live)
    raise PoolExhaustedError(f"pool for {pool.query_property!r} is exhausted")


def receive_feedback(
    pool: ExamplePool, ex: GroundedExample, feedback: Feedback
) -> ExamplePool:
    """Apply the Student's feedback: unclear examples move to episodic memory.

    Clear feedback leaves the pool unchanged; repeating unclear feedback
    for the same example is a no-op. Unknown examples are rejected.
    """
    if ex not in pool.candidates and ex not in pool.removed:
        raise KeyError(f"example {ex} is not in this pool")
    if feedback is Feedback.UNCLEAR and ex in pool.candidates:
        pool.candidates.discard(ex)
        pool.removed.add(ex)
        pool._ordered.remove(ex)
    return pool
