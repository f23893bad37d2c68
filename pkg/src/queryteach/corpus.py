"""Instance-level triple files and per-agent ontology views.

Each agent's private knowledge is a flat set of triples. Triples whose
predicate is the type predicate define the agent's world objects and their
class properties; every other triple is kept as a plain relation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

DEFAULT_TYPE_PREDICATE = "rdf:type"


class TripleParseError(ValueError):
    """A malformed line in a triple file."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True, slots=True, order=True)
class Triple:
    subject: str
    predicate: str
    object: str


def parse_triples(text: str) -> list[Triple]:
    """Parse a triple document: one `subject TAB predicate TAB object` per line.

    Blank lines and lines starting with '#' are skipped. Raises
    TripleParseError (with the 1-based line number) on a wrong field count
    or an empty field.
    """
    triples: list[Triple] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split("\t")]
        if len(fields) != 3:
            raise TripleParseError(
                line_no, f"expected 3 tab-separated fields, got {len(fields)}"
            )
        if any(not f for f in fields):
            raise TripleParseError(line_no, "empty field")
        triples.append(Triple(*fields))
    return triples


def load_triples(path) -> list[Triple]:
    with open(path, encoding="utf-8") as fh:
        return parse_triples(fh.read())


def render_triples(triples: Iterable[Triple]) -> str:
    """Inverse of parse_triples for well-formed triples."""
    return "".join(f"{t.subject}\t{t.predicate}\t{t.object}\n" for t in triples)


@dataclass
class AgentOntology:
    """One agent's private world view.

    `objects` are all triple subjects; `properties_of` maps every object to
    the classes it is typed with (possibly empty); `relations` holds the
    non-type triples. Views are immutable after construction and safe to
    share across concurrently running experiments.
    """

    name: str
    objects: set[str]
    properties_of: dict[str, set[str]]
    relations: list[Triple]
    type_predicate: str = DEFAULT_TYPE_PREDICATE
    _owner_index: dict[str, set[str]] = field(
        init=False, repr=False, compare=False, default_factory=dict
    )

    def __post_init__(self):
        index: dict[str, set[str]] = {}
        for obj, props in self.properties_of.items():
            for prop in props:
                index.setdefault(prop, set()).add(obj)
        self._owner_index = index

    def props(self, obj: str) -> set[str]:
        return self.properties_of[obj]

    def owners(self, prop: str) -> set[str]:
        """All objects typed with `prop` (empty set if nobody owns it)."""
        return self._owner_index.get(prop, set())

    def properties(self) -> set[str]:
        """All properties owned by at least one object."""
        return set(self._owner_index)

    def type_triples(self) -> list[Triple]:
        """The view's class-membership triples, in sorted order."""
        return sorted(
            Triple(obj, self.type_predicate, prop)
            for obj, props in self.properties_of.items()
            for prop in props
        )


def build_view(
    triples: Iterable[Triple],
    name: str,
    type_predicate: str = DEFAULT_TYPE_PREDICATE,
) -> AgentOntology:
    """Group triples into an agent view.

    Duplicate triples are dropped (class membership is set-valued). Objects
    are all triple subjects; subjects without type triples keep an empty
    property set. Raises ValueError if no objects result.
    """
    unique: list[Triple] = []
    seen: set[Triple] = set()
    for t in triples:
        if t not in seen:
            seen.add(t)
            unique.append(t)

    objects = {t.subject for t in unique}
    if not objects:
        raise ValueError(f"view {name!r} has no objects (no triples loaded)")

    properties_of: dict[str, set[str]] = {obj: set() for obj in objects}
    relations: list[Triple] = []
    for t in unique:
        if t.predicate == type_predicate:
            properties_of[t.subject].add(t.object)
        else:
            relations.append(t)
    return AgentOntology(name, objects, properties_of, relations, type_predicate)


def load_view(path, name: str, type_predicate: str = DEFAULT_TYPE_PREDICATE) -> AgentOntology:
    return build_view(load_triples(path), name, type_predicate)


@dataclass(frozen=True, slots=True)
class PropertyWeight:
    """Normalized frequency of a property over the whole database."""

    property: str
    weight: float


def property_weights(view: AgentOntology) -> dict[str, PropertyWeight]:
    """Weight of each property: owner count over total object count.

    The denominator is the view's entire object set, not only objects shared
    with another agent. Properties owned by no object do not appear.
    """
    if not view.objects:
        raise ValueError(f"view {view.name!r} is empty")
    total = len(view.objects)
    return {
        prop: PropertyWeight(prop, len(owners) / total)
        for prop, owners in view._owner_index.items()
    }
