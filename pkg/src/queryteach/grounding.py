"""Identifying common (grounded) objects between two agent views.

The Simple rule set treats two instances as the same only on exact URI
equality. The Extended rule set additionally matches equal local names
across namespaces, propagates identity along equally-named relations until
a fixpoint, and accepts externally supplied (pre-mined) alignments.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .corpus import AgentOntology, Triple

log = logging.getLogger(__name__)


class AlignmentRule(Enum):
    URI_EQUAL = "uri_equal"
    SAME_LOCAL_NAME = "same_local_name"
    RELATIONAL = "relational"
    IMPORTED = "imported"


@dataclass(frozen=True, slots=True)
class InstanceAlignment:
    """One common object: `left` in view A is the same instance as `right` in B."""

    left: str
    right: str
    rule: AlignmentRule


class GroundingModeKind(Enum):
    SIMPLE = "simple"
    EXTENDED = "extended"


@dataclass(frozen=True)
class GroundingMode:
    mode: GroundingModeKind
    imported_alignments: tuple[InstanceAlignment, ...] = ()

    def __post_init__(self):
        if self.mode is GroundingModeKind.SIMPLE and self.imported_alignments:
            raise ValueError("imported alignments are only permitted in EXTENDED mode")


class AlignmentError(ValueError):
    pass


def split_identifier(identifier: str) -> tuple[str, str]:
    """Split an identifier into (namespace, local name) at the last '#' or '/'.

    Identifiers without either separator get an empty namespace.
    """
    cut = max(identifier.rfind("#"), identifier.rfind("/"))
    if cut < 0:
        return "", identifier
    return identifier[: cut + 1], identifier[cut + 1 :]


def local_name(identifier: str) -> str:
    return split_identifier(identifier)[1]


def align_simple(a: AgentOntology, b: AgentOntology) -> list[InstanceAlignment]:
    """Instances are the same only if their URIs are identical."""
    return [
        InstanceAlignment(obj, obj, AlignmentRule.URI_EQUAL)
        for obj in sorted(a.objects & b.objects)
    ]


class _Matcher:
    """Tracks the partial injection while alignments accumulate."""

    def __init__(self):
        self.result: list[InstanceAlignment] = []
        self.left_taken: set[str] = set()
        self.right_taken: set[str] = set()

    def add(self, left: str, right: str, rule: AlignmentRule) -> bool:
        if left in self.left_taken or right in self.right_taken:
            return False
        self.result.append(InstanceAlignment(left, right, rule))
        self.left_taken.add(left)
        self.right_taken.add(right)
        return True


def _relations_by_local(view: AgentOntology):
    """Index relations as anchor -> relation local name -> endpoints, both ways.

    forward anchors on subjects, backward on objects. Only endpoints that
    are world objects of the view can become alignments.
    """
    forward: dict[str, dict[str, set[str]]] = {}
    backward: dict[str, dict[str, set[str]]] = {}
    for t in view.relations:
        rel = local_name(t.predicate)
        if t.object in view.objects:
            forward.setdefault(t.subject, {}).setdefault(rel, set()).add(t.object)
        if t.subject in view.objects:
            backward.setdefault(t.object, {}).setdefault(rel, set()).add(t.subject)
    return forward, backward


def align_extended(
    a: AgentOntology,
    b: AgentOntology,
    imported: Sequence[InstanceAlignment] = (),
) -> list[InstanceAlignment]:
    """Extended identity: URI equality, imports, equal local names, and
    relation propagation to a fixpoint.

    Rule order: exact URI matches are seeded first, then imported pairs,
    then same-local-name pairs, then the relational rule is iterated until
    no new pair appears. A candidate whose object is already aligned is
    skipped, and a candidate matching several objects in one round is
    dropped rather than guessed, so the result stays a partial injection.
    """
    matcher = _Matcher()

    for al in align_simple(a, b):
        matcher.add(al.left, al.right, AlignmentRule.URI_EQUAL)

    for al in imported:
        if al.left not in a.objects or al.right not in b.objects:
            raise AlignmentError(
                f"imported alignment ({al.left}, {al.right}) references unknown objects"
            )
        if not matcher.add(al.left, al.right, AlignmentRule.IMPORTED):
            log.warning("imported alignment (%s, %s) conflicts, dropped", al.left, al.right)

    # Same local name, different namespace. Ambiguous local names (several
    # unaligned carriers on one side) are dropped, not guessed.
    by_local_a: dict[str, list[str]] = {}
    for obj in sorted(a.objects - matcher.left_taken):
        by_local_a.setdefault(local_name(obj), []).append(obj)
    by_local_b: dict[str, list[str]] = {}
    for obj in sorted(b.objects - matcher.right_taken):
        by_local_b.setdefault(local_name(obj), []).append(obj)
    for name in sorted(set(by_local_a) & set(by_local_b)):
        cand_a, cand_b = by_local_a[name], by_local_b[name]
        if len(cand_a) != 1 or len(cand_b) != 1:
            log.debug("local name %r is ambiguous, skipped", name)
            continue
        left, right = cand_a[0], cand_b[0]
        if split_identifier(left)[0] != split_identifier(right)[0]:
            matcher.add(left, right, AlignmentRule.SAME_LOCAL_NAME)

    # Relational propagation: if (e, r, x) in A and (e', r', y) in B with
    # (e, e') already aligned and r, r' sharing a local name, then x and y
    # are candidates for identity; same with the anchor on the object side.
    fwd_a, bwd_a = _relations_by_local(a)
    fwd_b, bwd_b = _relations_by_local(b)
    while True:
        candidates: dict[str, set[str]] = {}
        reverse: dict[str, set[str]] = {}
        for al in matcher.result:
            for index_a, index_b in ((fwd_a, fwd_b), (bwd_a, bwd_b)):
                rels_a = index_a.get(al.left, {})
                rels_b = index_b.get(al.right, {})
                for rel in set(rels_a) & set(rels_b):
                    xs = rels_a[rel] - matcher.left_taken
                    ys = rels_b[rel] - matcher.right_taken
                    for x in xs:
                        for y in ys:
                            candidates.setdefault(x, set()).add(y)
                            reverse.setdefault(y, set()).add(x)
        added = False
        for x in sorted(candidates):
            ys = candidates[x]
            if len(ys) != 1:
                continue
            (y,) = ys
            if len(reverse[y]) != 1:
                continue
            if matcher.add(x, y, AlignmentRule.RELATIONAL):
                added = True
        if not added:
            break

    return matcher.result


def align(
    a: AgentOntology, b: AgentOntology, mode: GroundingMode
) -> list[InstanceAlignment]:
    if mode.mode is GroundingModeKind.SIMPLE:
        return align_simple(a, b)
    return align_extended(a, b, mode.imported_alignments)


def common_object_map(
    alignments: Iterable[InstanceAlignment], side: str
) -> dict[str, str]:
    """Map shared object handles (left identifiers) to one agent's local ids.

    `side` is 'left' or 'right'. Both agents address a common object by the
    alignment's left identifier; this map resolves it to the identifier the
    given agent knows the object under.
    """
    if side == "left":
        return {al.left: al.left for al in alignments}
    if side == "right":
        return {al.left: al.right for al in alignments}
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def load_imported_alignments(path) -> list[InstanceAlignment]:
    """Read a `left TAB right` TSV of pre-mined instance alignments."""
    out: list[InstanceAlignment] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2 or not all(f.strip() for f in fields):
                raise AlignmentError(f"{path}: line {line_no}: expected `left TAB right`")
            out.append(
                InstanceAlignment(fields[0].strip(), fields[1].strip(), AlignmentRule.IMPORTED)
            )
    return out
