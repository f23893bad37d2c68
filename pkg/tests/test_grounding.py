import pytest
from hypothesis import given, strategies as st

from queryteach.corpus import Triple, build_view
from queryteach.grounding import (
    AlignmentError,
    AlignmentRule,
    GroundingMode,
    GroundingModeKind,
    InstanceAlignment,
    align_extended,
    align_simple,
    common_object_map,
    local_name,
    split_identifier,
)


def view_of(typed, relations=(), name="v"):
    triples = [Triple(obj, "ty", cls) for obj, cls in typed]
    triples += [Triple(s, p, o) for s, p, o in relations]
    return build_view(triples, name, "ty")


def pairs(alignments):
    return {(al.left, al.right) for al in alignments}


def test_split_identifier():
    assert split_identifier("http://x#bob") == ("http://x#", "bob")
    assert split_identifier("http://x/bob") == ("http://x/", "bob")
    assert split_identifier("bob") == ("", "bob")
    assert local_name("ns#a/b") == "b"


def test_simple_is_set_intersection():
    a = view_of([("u", "C"), ("v", "C")])
    b = view_of([("v", "D"), ("w", "D")])
    assert pairs(align_simple(a, b)) == {("v", "v")}


def test_simple_disjoint():
    a = view_of([("u", "C")])
    b = view_of([("w", "D")])
    assert align_simple(a, b) == []


def test_simple_identity():
    a = view_of([("u", "C"), ("v", "C")])
    assert pairs(align_simple(a, a)) == {("u", "u"), ("v", "v")}
    assert all(al.rule is AlignmentRule.URI_EQUAL for al in align_simple(a, a))


def test_extended_same_local_name():
    a = view_of([("ns1#bob", "C")])
    b = view_of([("ns2#bob", "D")])
    result = align_extended(a, b)
    assert pairs(result) == {("ns1#bob", "ns2#bob")}
    assert result[0].rule is AlignmentRule.SAME_LOCAL_NAME


def test_extended_relation_names_must_match():
    a = view_of([("p", "C"), ("ns1#x", "C")], [("p", "ns#writes", "ns1#x")])
    b = view_of([("p", "D"), ("ns2#y", "D")], [("p", "ns#has_written", "ns2#y")])
    assert pairs(align_extended(a, b)) == {("p", "p")}


def test_extended_relational_forward():
    a = view_of([("p", "C"), ("ns1#x", "C")], [("p", "ns1#writes", "ns1#x")])
    b = view_of([("p", "D"), ("ns2#y", "D")], [("p", "ns2#writes", "ns2#y")])
    result = align_extended(a, b)
    assert pairs(result) == {("p", "p"), ("ns1#x", "ns2#y")}
    by_left = {al.left: al.rule for al in result}
    assert by_left["ns1#x"] is AlignmentRule.RELATIONAL


def test_extended_relational_backward():
    # the known-equal anchor sits on the object side of the relation
    a = view_of([("p", "C"), ("ns1#x", "C")], [("ns1#x", "ns1#writes", "p")])
    b = view_of([("p", "D"), ("ns2#y", "D")], [("ns2#y", "ns2#writes", "p")])
    assert pairs(align_extended(a, b)) == {("p", "p"), ("ns1#x", "ns2#y")}


def test_extended_relation_target_must_be_world_object():
    # untyped, never-a-subject endpoints are not world objects and cannot align
    a = view_of([("p", "C")], [("p", "ns1#writes", "ns1#x")])
    b = view_of([("p", "D")], [("p", "ns2#writes", "ns2#y")])
    assert pairs(align_extended(a, b)) == {("p", "p")}


def test_extended_ambiguous_relational_candidates_dropped():
    a = view_of(
        [("p", "C"), ("ns1#x1", "C"), ("ns1#x2", "C")],
        [("p", "ns1#writes", "ns1#x1"), ("p", "ns1#writes", "ns1#x2")],
    )
    b = view_of([("p", "D"), ("ns2#y", "D")], [("p", "ns2#writes", "ns2#y")])
    assert pairs(align_extended(a, b)) == {("p", "p")}


def test_extended_ambiguous_local_names_dropped():
    a = view_of([("ns1#bob", "C"), ("ns3#bob", "C")])
    b = view_of([("ns2#bob", "D")])
    assert align_extended(a, b) == []


def naive_extended_closure(a, b, imported=()):
    """Quadratic repeat-until-stable restatement of the extended rules."""
    aligned: dict[str, str] = {}
    taken_right: set[str] = set()

    def try_add(left, right):
        if left in aligned or right in taken_right:
            return
        aligned[left] = right
        taken_right.add(right)

    for obj in sorted(a.objects & b.objects):
        try_add(obj, obj)
    for left, right in imported:
        try_add(left, right)
    for left in sorted(a.objects):
        if left in aligned:
            continue
        matches = [
            right
            for right in sorted(b.objects)
            if right not in taken_right
            and local_name(right) == local_name(left)
            and split_identifier(right)[0] != split_identifier(left)[0]
        ]
        others_left = [
            other
            for other in a.objects
            if other != left and other not in aligned and local_name(other) == local_name(left)
        ]
        if len(matches) == 1 and not others_left:
            try_add(left, matches[0])

    changed = True
    while changed:
        changed = False
        candidates: dict[str, set[str]] = {}
        reverse: dict[str, set[str]] = {}
        for left, right in aligned.items():
            for ta in a.relations:
                for tb in b.relations:
                    if local_name(ta.predicate) != local_name(tb.predicate):
                        continue
                    for xa, xb in (
                        (ta.object, tb.object) if (ta.subject, tb.subject) == (left, right) else (None, None),
                        (ta.subject, tb.subject) if (ta.object, tb.object) == (left, right) else (None, None),
                    ):
                        if xa is None:
                            continue
                        if xa not in a.objects or xb not in b.objects:
                            continue
                        if xa in aligned or xb in taken_right:
                            continue
                        candidates.setdefault(xa, set()).add(xb)
                        reverse.setdefault(xb, set()).add(xa)
        for xa in sorted(candidates):
            if len(candidates[xa]) == 1:
                (xb,) = candidates[xa]
                if len(reverse[xb]) == 1 and xa not in aligned and xb not in taken_right:
                    try_add(xa, xb)
                    changed = True
    return set(aligned.items())


def test_two_step_chain_matches_naive_closure():
    # the relational rule needs the local-name rule's anchor first, then two rounds
    a = view_of(
        [("ns1#anchor", "C"), ("ns1#x", "C"), ("ns1#x2", "C")],
        [("ns1#anchor", "ns1#rel", "ns1#x"), ("ns1#x", "ns1#rel2", "ns1#x2")],
    )
    b = view_of(
        [("ns2#anchor", "D"), ("ns2#y", "D"), ("ns2#y2", "D")],
        [("ns2#anchor", "ns2#rel", "ns2#y"), ("ns2#y", "ns2#rel2", "ns2#y2")],
    )
    result = align_extended(a, b)
    expected = {
        ("ns1#anchor", "ns2#anchor"),
        ("ns1#x", "ns2#y"),
        ("ns1#x2", "ns2#y2"),
    }
    assert pairs(result) == expected
    assert naive_extended_closure(a, b) == expected


def test_imported_alignment_accepted():
    a = view_of([("ns1#u", "C")])
    b = view_of([("ns2#w", "D")])
    imported = [InstanceAlignment("ns1#u", "ns2#w", AlignmentRule.IMPORTED)]
    result = align_extended(a, b, imported)
    assert pairs(result) == {("ns1#u", "ns2#w")}
    assert result[0].rule is AlignmentRule.IMPORTED


def test_imported_unknown_object_rejected():
    a = view_of([("ns1#u", "C")])
    b = view_of([("ns2#w", "D")])
    imported = [InstanceAlignment("ns1#nope", "ns2#w", AlignmentRule.IMPORTED)]
    with pytest.raises(AlignmentError):
        align_extended(a, b, imported)


def test_simple_subset_of_extended():
    a = view_of([("u", "C"), ("ns1#bob", "C")])
    b = view_of([("u", "D"), ("ns2#bob", "D")])
    assert pairs(align_simple(a, b)) <= pairs(align_extended(a, b))


def test_extended_fixpoint_rerun_adds_nothing():
    a = view_of(
        [("p", "C"), ("ns1#x", "C")],
        [("p", "ns1#writes", "ns1#x")],
    )
    b = view_of(
        [("p", "D"), ("ns2#y", "D")],
        [("p", "ns2#writes", "ns2#y")],
    )
    first = align_extended(a, b)
    again = align_extended(a, b, [al for al in first if al.rule is AlignmentRule.IMPORTED])
    assert pairs(again) == pairs(first)


def test_grounding_mode_rejects_imports_in_simple():
    with pytest.raises(ValueError):
        GroundingMode(
            GroundingModeKind.SIMPLE,
            (InstanceAlignment("a", "b", AlignmentRule.IMPORTED),),
        )


def test_common_object_map_sides():
    alignments = [InstanceAlignment("l1", "r1", AlignmentRule.URI_EQUAL)]
    assert common_object_map(alignments, "left") == {"l1": "l1"}
    assert common_object_map(alignments, "right") == {"l1": "r1"}
    with pytest.raises(ValueError):
        common_object_map(alignments, "middle")


names = st.sampled_from(
    ["ns1#a", "ns1#b", "ns1#c", "ns2#a", "ns2#b", "ns2#c", "ns3#a", "ns3#d", "plain"]
)
toy_views = st.builds(
    lambda objs: view_of([(o, "C") for o in objs]),
    st.sets(names, min_size=1, max_size=6),
)


@given(toy_views, toy_views)
def test_partial_injection_property(a, b):
    result = align_extended(a, b)
    lefts = [al.left for al in result]
    rights = [al.right for al in result]
    assert len(lefts) == len(set(lefts))
    assert len(rights) == len(set(rights))
    assert all(al.left in a.objects and al.right in b.objects for al in result)
