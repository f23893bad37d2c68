"""Student side: estimated query representations and query answering.

The Student turns the incoming example stream into a property-score map
(the estimated query representation) and answers the query by ranking its
own objects by the summed scores of their properties, returning only
objects with a positive total.

Two policies are provided. The Frequency-based policy keeps a running
integer score per observed property: +1 for every appearance in a Positive
set, -1 for every appearance in a Common set (Negative sets are ignored).
The Logic-based policy memorizes the unique Positive property sets of
clear examples; treating each memorized example as an object of a formal
context whose attributes are its Positive properties plus a query
pseudo-property held by every example, the properties implied by the query
are exactly those present in every memorized set, and each gets score 1.

An example whose Positive set is empty is unclear: the Student reports it
back to the Teacher and changes no state, under either policy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

from .corpus import AgentOntology
from .interpretation import Feedback, Interpretation, is_clear


class StudentPolicyKind(Enum):
    FREQUENCY = "frequency"
    LOGIC = "logic"


@dataclass(frozen=True)
class StudentPolicy:
    kind: StudentPolicyKind


@dataclass
class FrequencyState:
    """Running property scores; no examples are memorized."""

    scores: dict[str, int] = field(default_factory=dict)


@dataclass
class FcaMemory:
    """The unique Positive property sets of memorized clear examples."""

    positive_sets: set[frozenset[str]] = field(default_factory=set)


StudentState = FrequencyState | FcaMemory

# The estimated query representation: property -> score.
QueryRepresentation = dict[str, int]


def new_state(policy: StudentPolicy) -> StudentState:
    if policy.kind is StudentPolicyKind.FREQUENCY:
        return FrequencyState()
    return FcaMemory()


def observe(state: StudentState, interp: Interpretation) -> Feedback:
    """Fold one interpreted example into the policy state.

    Unclear examples (empty Positive set) leave the state untouched and
    yield UNCLEAR feedback for the Teacher.
    """
    if not is_clear(interp):
        return Feedback.UNCLEAR
    if isinstance(state, FrequencyState):
        for prop in interp.positive:
            state.scores[prop] = state.scores.get(prop, 0) + 1
        for prop in interp.common:
            state.scores[prop] = state.scores.get(prop, 0) - 1
    else:
        state.positive_sets.add(interp.positive)
    return Feedback.CLEAR


def derive_representation(state: StudentState) -> QueryRepresentation:
    """The current estimated query representation.

    FREQUENCY returns its score map as-is. LOGIC returns the properties
    implied by the query pseudo-property, i.e. the intersection of all
    memorized Positive sets, each with score 1; empty memory yields an
    empty representation.
    """
    if isinstance(state, FrequencyState):
        return dict(state.scores)
    if not state.positive_sets:
        return {}
    implied = frozenset.intersection(*state.positive_sets)
    return {prop: 1 for prop in sorted(implied)}


def answer(
    rep: QueryRepresentation, student_view: AgentOntology
) -> list[tuple[str, int]]:
    """Rank the Student's objects by summed property scores.

    Only objects with a strictly positive total are returned, best first;
    ties are broken by object identifier so the ranking is reproducible.
    """
    totals: dict[str, int] = {}
    for prop, score in rep.items():
        for obj in student_view.owners(prop):
            totals[obj] = totals.get(obj, 0) + score
    positive = [(obj, total) for obj, total in totals.items() if total > 0]
    positive.sort(key=lambda pair: (-pair[1], pair[0]))
    return positive


def memory_metrics(state: StudentState) -> tuple[int, int]:
    """(episodic, working) memory sizes of the current state.

    FREQUENCY memorizes nothing but tracks one score variable per property;
    LOGIC memorizes positive sets and tracks no score variables.
    """
    if isinstance(state, FrequencyState):
        return 0, len(state.scores)
    return len(state.positive_sets), 0
