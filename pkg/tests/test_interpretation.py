import pytest
from hypothesis import given, strategies as st

from queryteach.corpus import Triple, build_view
from queryteach.interpretation import (
    GroundedExample,
    UnknownObjectError,
    interpret,
    is_clear,
)


def two_object_view(props_r, props_i):
    triples = [Triple("r", "ty", p) for p in props_r]
    triples += [Triple("i", "ty", p) for p in props_i]
    triples += [Triple("r", "noop", "i")]  # keeps both objects present even untyped
    triples += [Triple("i", "noop", "r")]
    return build_view(triples, "v", "ty")


def test_interpret_set_algebra():
    view = two_object_view({"p1", "p2", "p3"}, {"p2", "p4"})
    interp = interpret(view, GroundedExample("r", "i"))
    assert interp.positive == {"p1", "p3"}
    assert interp.negative == {"p4"}
    assert interp.common == {"p2"}


def test_interpret_identical_objects():
    view = two_object_view({"p1", "p2"}, {"p1", "p2"})
    interp = interpret(view, GroundedExample("r", "i"))
    assert interp.positive == set() == interp.negative
    assert interp.common == {"p1", "p2"}


def test_interpret_untyped_relevant():
    view = two_object_view(set(), {"p4"})
    interp = interpret(view, GroundedExample("r", "i"))
    assert interp.positive == set()
    assert interp.negative == {"p4"}
    assert interp.common == set()


def test_interpret_maps_through_alignment():
    view = two_object_view({"p1"}, {"p2"})
    interp = interpret(
        view, GroundedExample("common-1", "common-2"), {"common-1": "r", "common-2": "i"}
    )
    assert interp.positive == {"p1"}


def test_interpret_unknown_object_is_grounding_bug():
    view = two_object_view({"p1"}, {"p2"})
    with pytest.raises(UnknownObjectError):
        interpret(view, GroundedExample("r", "ghost"))
    with pytest.raises(UnknownObjectError):
        interpret(view, GroundedExample("r", "i"), {"r": "r"})


def test_example_must_have_distinct_objects():
    with pytest.raises(ValueError):
        GroundedExample("same", "same")


def test_is_clear():
    view = two_object_view({"p1"}, {"p2"})
    assert is_clear(interpret(view, GroundedExample("r", "i")))
    unclear_view = two_object_view({"p2"}, {"p2"})
    assert not is_clear(interpret(unclear_view, GroundedExample("r", "i")))
    empty_view = two_object_view(set(), set())
    assert not is_clear(interpret(empty_view, GroundedExample("r", "i")))


prop_sets = st.sets(st.sampled_from([f"p{i}" for i in range(10)]), max_size=8)


@given(prop_sets, prop_sets)
def test_interpretation_invariants(props_r, props_i):
    view = two_object_view(props_r, props_i)
    interp = interpret(view, GroundedExample("r", "i"))

    assert not interp.positive & interp.negative
    assert not interp.positive & interp.common
    assert not interp.negative & interp.common
    assert interp.positive | interp.common == props_r
    assert interp.negative | interp.common == props_i
    assert (
        len(interp.positive) + len(interp.negative) + 2 * len(interp.common)
        == len(props_r) + len(props_i)
    )


@given(prop_sets, prop_sets)
def test_interpret_swap_symmetry(props_r, props_i):
    view = two_object_view(props_r, props_i)
    forward = interpret(view, GroundedExample("r", "i"))
    backward = interpret(view, GroundedExample("i", "r"))
    assert forward.positive == backward.negative
    assert forward.negative == backward.positive
    assert forward.common == backward.common
