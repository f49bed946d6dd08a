import pytest

from xcsolve import (
    FormatError,
    ResolutionError,
    StructuralError,
    UnsupportedExtensionError,
    XmlError,
    parse_instance,
    parse_integer_set,
    parse_tuples,
    resolve_references,
)
from xcsolve.expr import VarRef
from xcsolve.intset import IntegerSet
from xcsolve.model import GlobalRef, PredicateRef, RelationRef, to_xml

from helpers import TINY_ALLDIFF, instance_xml


# -- abridged text content ----------------------------------------------------


def test_integer_set_range():
    assert parse_integer_set("1..2") == IntegerSet.from_intervals([(1, 2)])


def test_integer_set_singleton():
    assert parse_integer_set("5").ranges == ((5, 5),)


def test_integer_set_union_merges():
    assert parse_integer_set("1 3 2..4 7").ranges == ((1, 4), (7, 7))


def test_integer_set_negative():
    assert parse_integer_set("-3..-1 -7").ranges == ((-7, -7), (-3, -1))


def test_integer_set_canonical_idempotent():
    s = parse_integer_set("9 1..3 2 5..6")
    assert IntegerSet.from_intervals(s.ranges) == s


def test_integer_set_bad_range():
    with pytest.raises(FormatError):
        parse_integer_set("5..2")


def test_integer_set_bad_token():
    with pytest.raises(FormatError):
        parse_integer_set("1 x 3")


def test_tuples_basic():
    assert parse_tuples("1 2|2 1", 2) == [(1, 2), (2, 1)]


def test_tuples_empty():
    assert parse_tuples("", 3) == []
    assert parse_tuples("   ", 3) == []


def test_tuples_order_and_negatives():
    assert parse_tuples("0 0 0|1 -1 2|3 3 3", 3) == [(0, 0, 0), (1, -1, 2), (3, 3, 3)]


def test_tuples_arity_mismatch_names_group():
    with pytest.raises(FormatError, match="tuple 1"):
        parse_tuples("1 2|3|4 5", 2)


# -- parse_instance -----------------------------------------------------------


def test_tiny_alldiff_example_counts():
    model = parse_instance(TINY_ALLDIFF)
    assert len(model.domains) == 1
    assert len(model.variables) == 2
    assert len(model.relations) == 0
    assert len(model.predicates) == 0
    assert len(model.constraints) == 1
    assert model.constraints[0].reference == "global:alldifferent"
    assert model.domains[0].values == IntegerSet.from_intervals([(1, 2)])


def test_parse_accepts_bytes():
    model = parse_instance(TINY_ALLDIFF.encode("utf-8"))
    assert len(model.variables) == 2


def test_zero_constraints_is_fine():
    xml = instance_xml([("X", [5])], [])
    model = parse_instance(xml)
    assert model.constraints == []


def test_malformed_xml_reports_position():
    with pytest.raises(XmlError) as info:
        parse_instance("<instance><domains>")
    assert info.value.line is not None


def test_missing_variables_section():
    with pytest.raises(StructuralError, match="variables"):
        parse_instance("<instance><constraints nbConstraints=\"0\"/></instance>")


def test_missing_constraints_section():
    with pytest.raises(StructuralError, match="constraints"):
        parse_instance(
            '<instance><variables nbVariables="0"></variables></instance>')


def test_duplicate_variable_name():
    xml = TINY_ALLDIFF.replace('name="A2"', 'name="A1"')
    with pytest.raises(StructuralError, match="A1"):
        parse_instance(xml)


def test_scope_arity_mismatch():
    xml = TINY_ALLDIFF.replace('arity="2"', 'arity="3"')
    with pytest.raises(StructuralError, match="arity"):
        parse_instance(xml)


def test_count_drift_is_diagnostic_not_error():
    xml = TINY_ALLDIFF.replace('nbValues="2"', 'nbValues="9"')
    model = parse_instance(xml)
    assert any("nbValues" in d for d in model.diagnostics)
    assert model.domains[0].values.size() == 2


def test_unknown_attribute_warns():
    xml = TINY_ALLDIFF.replace('name="A1"', 'name="A1" shiny="yes"')
    model = parse_instance(xml)
    assert any("shiny" in d for d in model.diagnostics)


def test_wcsp_type_rejected():
    xml = TINY_ALLDIFF.replace('format="XCSP 2.1"', 'format="XCSP 2.1" type="WCSP"')
    with pytest.raises(UnsupportedExtensionError, match="unsupported extension"):
        parse_instance(xml)


def test_qcsp_quantification_rejected():
    xml = TINY_ALLDIFF.replace(
        "<constraints", "<quantification/><constraints")
    with pytest.raises(UnsupportedExtensionError, match="unsupported extension"):
        parse_instance(xml)


def test_soft_relation_rejected():
    xml = instance_xml(
        [("X", [1, 2])],
        [{"name": "c0", "scope": ["X"], "reference": "r0"}],
        relations=[{"name": "r0", "arity": 1, "semantics": "supports",
                    "tuples": [(1,)]}],
    ).replace('semantics="supports"', 'semantics="soft"')
    with pytest.raises(UnsupportedExtensionError):
        parse_instance(xml)


# -- round-trip ---------------------------------------------------------------


def _roundtrip(xml):
    model = parse_instance(xml)
    again = parse_instance(to_xml(model))
    assert again == model


def test_roundtrip_tiny_alldiff():
    _roundtrip(TINY_ALLDIFF)


def test_roundtrip_relations_and_predicates():
    xml = instance_xml(
        [("X", [0, 1, 2]), ("Y", [1, 3])],
        [
            {"name": "c0", "scope": ["X", "Y"], "reference": "r0"},
            {"name": "c1", "scope": ["X", "Y"], "reference": "p0",
             "parameters": "X Y"},
            {"name": "c2", "scope": ["X", "Y"], "reference": "global:weightedSum",
             "parameters": "[ { 2 X } { 3 Y } ] le 10"},
        ],
        relations=[{"name": "r0", "arity": 2, "semantics": "conflicts",
                    "tuples": [(1, 1), (2, 3)]}],
        predicates=[{"name": "p0", "params": ["P0", "P1"],
                     "body": "gt(add(P0,P1),0)"}],
    )
    _roundtrip(xml)


# -- resolution ---------------------------------------------------------------


def test_resolve_tiny_alldiff():
    instance = resolve_references(parse_instance(TINY_ALLDIFF))
    assert instance.names == ["A1", "A2"]
    c = instance.constraints[0]
    assert c.scope == [0, 1]
    assert isinstance(c.ref, GlobalRef) and c.ref.name == "alldifferent"


def test_resolve_classifies_references():
    xml = instance_xml(
        [("X", [0, 1]), ("Y", [0, 1])],
        [
            {"name": "c0", "scope": ["X", "Y"], "reference": "r0"},
            {"name": "c1", "scope": ["X", "Y"], "reference": "p0",
             "parameters": "X 3"},
        ],
        relations=[{"name": "r0", "arity": 2, "semantics": "supports",
                    "tuples": [(0, 1)]}],
        predicates=[{"name": "p0", "params": ["P0", "P1"], "body": "ne(P0,P1)"}],
    )
    instance = resolve_references(parse_instance(xml))
    assert isinstance(instance.constraints[0].ref, RelationRef)
    assert isinstance(instance.constraints[1].ref, PredicateRef)
    assert instance.constraints[1].parameters == [VarRef(0), 3]


def test_resolve_repeated_scope_variable():
    xml = TINY_ALLDIFF.replace('scope="A1 A2"', 'scope="A1 A1"')
    with pytest.raises(ResolutionError, match="repeats"):
        resolve_references(parse_instance(xml))


def test_resolve_relation_arity_mismatch():
    xml = instance_xml(
        [("X", [0, 1]), ("Y", [0, 1])],
        [{"name": "c0", "scope": ["X", "Y"], "reference": "r0"}],
        relations=[{"name": "r0", "arity": 3, "semantics": "supports",
                    "tuples": [(0, 1, 0)]}],
    )
    with pytest.raises(ResolutionError, match="arity"):
        resolve_references(parse_instance(xml))


def test_resolve_dangling_reference():
    xml = instance_xml([("X", [0, 1])],
                       [{"name": "c0", "scope": ["X"], "reference": "nowhere"}])
    with pytest.raises(ResolutionError, match="nowhere"):
        resolve_references(parse_instance(xml))


def test_resolve_unsupported_global_lists_supported():
    xml = instance_xml([("X", [0, 1])],
                       [{"name": "c0", "scope": ["X"],
                         "reference": "global:circuit"}])
    with pytest.raises(ResolutionError, match="alldifferent"):
        resolve_references(parse_instance(xml))


def test_resolve_indices_dense_and_in_range():
    xml = instance_xml(
        [("A", [1]), ("B", [1, 2]), ("C", [2, 3])],
        [{"name": "c0", "scope": ["C", "A"], "reference": "global:alldifferent"}],
    )
    instance = resolve_references(parse_instance(xml))
    assert instance.names == ["A", "B", "C"]
    for c in instance.constraints:
        assert all(0 <= v < len(instance.names) for v in c.scope)
    assert instance.constraints[0].scope == [2, 0]
