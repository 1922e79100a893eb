"""Family spec parsing, validation and serialisation round-trips."""

import pytest

from qgends.errors import InvariantError, NonPositiveLength, SchemaError
from qgends.graphspec import ExtendedCount, parse_spec, serialize_spec

TREE = {"variant": "RadialTree",
        "b": {"kind": "constant", "c": 2},
        "ell": {"kind": "geometric", "a": 1, "r": 0.25}}


def test_radial_tree_parses():
    spec = parse_spec(TREE)
    assert spec.variant == "RadialTree"
    assert spec.b.term(5) == 2


def test_roundtrip_identity():
    docs = [
        TREE,
        {"variant": "HalfLinePath", "ell": {"kind": "constant", "c": "1/3"}},
        {"variant": "FullLinePath",
         "ell_pos": {"kind": "geometric", "a": 1, "r": "1/2"},
         "ell_neg": {"kind": "constant", "c": 1}},
        {"variant": "SphereSymmetric",
         "spheres": {"kind": "explicit", "prefix": [1], "tail": {"kind": "constant", "c": 2}},
         "ell": {"kind": "constant", "c": 1}, "ends": 1},
        {"variant": "FiniteGraph", "edges": [["a", "b", 1], ["b", "c", "3/2"]],
         "root": "a"},
        {"variant": "ChainWithAttachments",
         "ell": {"kind": "constant", "c": 1},
         "attachment": {"variant": "FullLinePath",
                        "ell_pos": {"kind": "geometric", "a": 1, "r": "1/2"},
                        "ell_neg": {"kind": "geometric", "a": 1, "r": "1/2"}},
         "scaling": {"kind": "geometric", "a": 1, "r": "1/2"}},
    ]
    for doc in docs:
        spec = parse_spec(doc)
        again = parse_spec(serialize_spec(spec))
        assert again == spec


def test_branching_one_rejected():
    doc = dict(TREE, b={"kind": "constant", "c": 1})
    with pytest.raises(InvariantError):
        parse_spec(doc)


def test_negative_length_rejected():
    with pytest.raises(NonPositiveLength):
        parse_spec({"variant": "HalfLinePath", "ell": {"kind": "constant", "c": -1}})


def test_unknown_variant():
    with pytest.raises(SchemaError):
        parse_spec({"variant": "MoebiusLadder"})


def test_unknown_field():
    with pytest.raises(SchemaError):
        parse_spec(dict(TREE, colour="red"))


def test_schema_version_checked():
    with pytest.raises(SchemaError):
        parse_spec(dict(TREE, schema="qgends-spec/999"))


def test_metadata_preserved():
    spec = parse_spec(dict(TREE, name="t", notes="example"))
    doc = serialize_spec(spec)
    assert doc["name"] == "t" and doc["notes"] == "example"
    assert doc["schema"] == "qgends-spec/1"


def test_finite_graph_must_connect():
    with pytest.raises(InvariantError):
        parse_spec({"variant": "FiniteGraph",
                    "edges": [["a", "b", 1], ["c", "d", 1]]})


def test_finite_graph_rejects_loops_and_multiedges():
    with pytest.raises(InvariantError):
        parse_spec({"variant": "FiniteGraph", "edges": [["a", "a", 1]]})
    with pytest.raises(InvariantError):
        parse_spec({"variant": "FiniteGraph",
                    "edges": [["a", "b", 1], ["b", "a", 2]]})


def test_sphere_symmetric_needs_unit_root():
    with pytest.raises(InvariantError):
        parse_spec({"variant": "SphereSymmetric",
                    "spheres": {"kind": "constant", "c": 2},
                    "ell": {"kind": "constant", "c": 1}, "ends": 1})


def test_sphere_symmetric_cantor_declaration():
    spec = parse_spec({"variant": "SphereSymmetric",
                       "spheres": {"kind": "explicit", "prefix": [1],
                                   "tail": {"kind": "geometric", "a": 4, "r": 3}},
                       "ell": {"kind": "constant", "c": 1}, "ends": "cantor"})
    assert spec.declared_ends == ExtendedCount.UNCOUNTABLE


def test_sphere_symmetric_rejects_other_cardinality():
    with pytest.raises(InvariantError):
        parse_spec({"variant": "SphereSymmetric",
                    "spheres": {"kind": "explicit", "prefix": [1],
                                "tail": {"kind": "constant", "c": 2}},
                    "ell": {"kind": "constant", "c": 1}, "ends": 3})


def test_chain_cannot_nest_chains():
    inner = {"variant": "ChainWithAttachments",
             "ell": {"kind": "constant", "c": 1},
             "attachment": {"variant": "HalfLinePath",
                            "ell": {"kind": "constant", "c": 1}},
             "scaling": {"kind": "constant", "c": 1}}
    with pytest.raises(InvariantError):
        parse_spec({"variant": "ChainWithAttachments",
                    "ell": {"kind": "constant", "c": 1},
                    "attachment": inner,
                    "scaling": {"kind": "constant", "c": 1}})


class TestExtendedCount:
    def test_ordering(self):
        a, b = ExtendedCount.finite(0), ExtendedCount.finite(5)
        assert a < b < ExtendedCount.COUNTABLE < ExtendedCount.UNCOUNTABLE

    def test_json_forms(self):
        assert ExtendedCount.finite(3).to_json() == 3
        assert ExtendedCount.COUNTABLE.to_json() == "countably-infinite"
        assert ExtendedCount.from_json("cantor") == ExtendedCount.UNCOUNTABLE

    def test_finite_value_guard(self):
        with pytest.raises(ValueError):
            ExtendedCount.UNCOUNTABLE.finite_value


def test_finite_graph_rejects_nonpositive_length():
    with pytest.raises(NonPositiveLength):
        parse_spec({"variant": "FiniteGraph", "edges": [["a", "b", -2]]})
    with pytest.raises(NonPositiveLength):
        parse_spec({"variant": "FiniteGraph", "edges": [["a", "b", 0]]})
