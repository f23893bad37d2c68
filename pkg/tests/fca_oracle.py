"""Brute-force formal concept analysis, used as an independent test oracle.

The production Logic-based student derives its query representation as a
plain intersection of memorized positive sets. This oracle takes the long
way round: it builds the formal context whose objects are the memorized
examples and whose attributes are their positive properties plus a query
pseudo-attribute held by every example, enumerates the full concept
lattice from object subsets, and reads the implied properties off the
attribute concept of the query pseudo-attribute.
"""

from __future__ import annotations

from itertools import combinations

QUERY_ATTRIBUTE = "__query__"


def enumerate_concepts(
    attributes_of: dict[int, frozenset[str]], universe: frozenset[str]
) -> set[tuple[frozenset[int], frozenset[str]]]:
    """All formal concepts (extent, intent) of the context, by brute force.

    Every subset of objects is closed: intent = common attributes of the
    subset (the full attribute universe for the empty subset), extent =
    all objects carrying that intent.
    """
    objects = sorted(attributes_of)
    concepts = set()
    for size in range(len(objects) + 1):
        for subset in combinations(objects, size):
            if subset:
                intent = frozenset.intersection(*(attributes_of[o] for o in subset))
            else:
                intent = universe
            extent = frozenset(
                o for o in objects if intent <= attributes_of[o]
            )
            concepts.add((extent, intent))
    return concepts


def implied_by_query(positive_sets) -> dict[str, int]:
    """Properties the query pseudo-attribute implies, each with score 1.

    Among all concepts whose intent contains the query attribute, the one
    with the largest extent is the query's attribute concept; its intent
    minus the pseudo-attribute is exactly the implied property set.
    """
    positive_sets = list(positive_sets)
    attributes_of = {
        i: frozenset(props) | {QUERY_ATTRIBUTE} for i, props in enumerate(positive_sets)
    }
    universe = frozenset().union(*attributes_of.values()) if attributes_of else frozenset()
    concepts = enumerate_concepts(attributes_of, universe)
    with_query = [
        (extent, intent) for extent, intent in concepts if QUERY_ATTRIBUTE in intent
    ]
    if not with_query:
        return {}
    extent, intent = max(with_query, key=lambda c: len(c[0]))
    if len(extent) < len(attributes_of):
        # the pseudo-attribute is held by every example by construction
        raise AssertionError("query attribute concept must span all objects")
    return {prop: 1 for prop in sorted(intent - {QUERY_ATTRIBUTE})}
