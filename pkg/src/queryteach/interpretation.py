"""Agent-relative interpretation of grounded examples.

A grounded example names two common objects, one relevant and one
irrelevant to the query. Each agent resolves those handles to its own
local identifiers and splits the objects' properties into the Positive set
(owned only by the relevant object), the Negative set (only the irrelevant
one) and the Common set (both). An example is clear for an agent exactly
when its Positive set is non-empty.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping

from .corpus import AgentOntology


class Feedback(Enum):
    CLEAR = "clear"
    UNCLEAR = "unclear"


class UnknownObjectError(LookupError):
    """An example references an object this view cannot resolve (grounding bug)."""


@dataclass(frozen=True, slots=True, order=True)
class GroundedExample:
    """An ordered pair of common-object handles: (relevant, irrelevant)."""

    relevant: str
    irrelevant: str

    def __post_init__(self):
        if self.relevant == self.irrelevant:
            raise ValueError("relevant and irrelevant objects must differ")


@dataclass(frozen=True, slots=True)
class Interpretation:
    positive: frozenset[str]
    negative: frozenset[str]
    common: frozenset[str]


def _resolve(view: AgentOntology, obj: str, to_local: Mapping[str, str] | None) -> set[str]:
    local = obj if to_local is None else to_local.get(obj)
    if local is None or local not in view.properties_of:
        raise UnknownObjectError(
            f"object {obj!r} is not grounded in view {view.name!r}"
        )
    return view.properties_of[local]


def interpret(
    view: AgentOntology,
    ex: GroundedExample,
    to_local: Mapping[str, str] | None = None,
) -> Interpretation:
    """Split the example's properties into Positive/Negative/Common sets.

    `to_local` maps common-object handles to this agent's identifiers;
    None means the example already uses local identifiers.
    """
    rel = _resolve(view, ex.relevant, to_local)
    irr = _resolve(view, ex.irrelevant, to_local)
    return Interpretation(
        positive=frozenset(rel - irr),
        negative=frozenset(irr - rel),
        common=frozenset(rel & irr),
    )


def is_clear(interp: Interpretation) -> bool:
    """Clear iff the Positive property set is non-empty."""
    return bool(interp.positive)
