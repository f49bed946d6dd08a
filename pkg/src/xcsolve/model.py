"""XCSP 2.1 instance model: XML parsing, canonical serialization, resolution.

Supports the fully-tagged XML representation with abridged text content
inside tags (``1..2`` integer sets, ``1 2|2 1`` tuple lists, functional
predicate expressions). WCSP and QCSP extensions are detected and rejected.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from . import expr as ex
from .errors import (
    FormatError,
    ResolutionError,
    StructuralError,
    UnsupportedExtensionError,
    XmlError,
)
from .intset import IntegerSet

SUPPORTED_GLOBALS = (
    "alldifferent", "among", "atleast", "atmost", "cumulative", "diffn",
    "disjunctive", "element", "global_cardinality", "lex_less", "lex_lesseq",
    "not_all_equal", "weightedsum",
)

# relational keywords that may appear as bare tokens in <parameters>
_RELOP_TOKENS = {"eq", "ne", "ge", "gt", "le", "lt"}

# attributes we understand, per element; anything else draws a diagnostic
_KNOWN_ATTRS = {
    "instance": set(),
    "presentation": {"name", "maxConstraintArity", "minViolatedConstraints",
                     "nbSolutions", "solution", "format", "type"},
    "domains": {"nbDomains"},
    "domain": {"name", "nbValues"},
    "variables": {"nbVariables"},
    "variable": {"name", "domain"},
    "relations": {"nbRelations"},
    "relation": {"name", "arity", "nbTuples", "semantics"},
    "predicates": {"nbPredicates"},
    "predicate": {"name"},
    "constraints": {"nbConstraints"},
    "constraint": {"name", "arity", "scope", "reference"},
    "parameters": set(),
    "expression": set(),
    "functional": set(),
}

# Nested parameter tokens: int literal, bare name, or a bracketed group.
ParamToken = Union[int, str, List["ParamToken"]]


# -- data model ---------------------------------------------------------------


@dataclass
class DomainDef:
    name: str
    values: IntegerSet
    declared_count: int


@dataclass
class VariableDef:
    name: str
    domain_ref: str


@dataclass
class RelationDef:
    name: str
    arity: int
    semantics: str  # "supports" | "conflicts"
    tuples: List[Tuple[int, ...]]


@dataclass
class PredicateDef:
    name: str
    formal_params: List[str]
    body: ex.Expr


@dataclass
class ConstraintDef:
    name: str
    arity: int
    scope: List[str]
    reference: str
    parameters: Optional[List[ParamToken]] = None


@dataclass
class InstanceModel:
    domains: List[DomainDef] = field(default_factory=list)
    variables: List[VariableDef] = field(default_factory=list)
    relations: List[RelationDef] = field(default_factory=list)
    predicates: List[PredicateDef] = field(default_factory=list)
    constraints: List[ConstraintDef] = field(default_factory=list)
    nb_domains: Optional[int] = None
    nb_variables: Optional[int] = None
    nb_relations: Optional[int] = None
    nb_predicates: Optional[int] = None
    nb_constraints: Optional[int] = None
    diagnostics: List[str] = field(default_factory=list, compare=False)


@dataclass
class RelationRef:
    relation: RelationDef


@dataclass
class PredicateRef:
    predicate: PredicateDef


@dataclass
class GlobalRef:
    name: str


ConstraintRef = Union[RelationRef, PredicateRef, GlobalRef]


@dataclass
class ResolvedConstraint:
    name: str
    scope: List[int]
    ref: ConstraintRef
    parameters: Optional[List[ParamToken]] = None  # names resolved to VarRef


@dataclass
class ResolvedInstance:
    names: List[str]
    domains: List[IntegerSet]
    constraints: List[ResolvedConstraint]
    diagnostics: List[str] = field(default_factory=list, compare=False)


# -- abridged text content ----------------------------------------------------


def parse_integer_set(text: str) -> IntegerSet:
    """Parse whitespace-separated integers and ``a..b`` ranges into canonical
    form."""
    intervals = []
    for token in text.split():
        if ".." in token:
            lo_text, _, hi_text = token.partition("..")
            try:
                lo, hi = int(lo_text), int(hi_text)
            except ValueError:
                raise FormatError("bad range token %r" % token) from None
            if lo > hi:
                raise FormatError("empty range %r (lower bound exceeds upper)" % token)
            intervals.append((lo, hi))
        else:
            try:
                v = int(token)
            except ValueError:
                raise FormatError("bad integer token %r" % token) from None
            intervals.append((v, v))
    return IntegerSet.from_intervals(intervals)


def parse_tuples(text: str, arity: int) -> List[Tuple[int, ...]]:
    """Parse the abridged ``|``-separated tuple-list notation, in document
    order, duplicates preserved."""
    if not text.strip():
        return []
    tuples = []
    for i, group in enumerate(text.split("|")):
        try:
            values = tuple(int(tok) for tok in group.split())
        except ValueError:
            raise FormatError("non-integer value in tuple %d" % i) from None
        if len(values) != arity:
            raise FormatError(
                "tuple %d has %d value(s), expected arity %d" % (i, len(values), arity)
            )
        tuples.append(values)
    return tuples


def _tokenize_params(text: str) -> List[ParamToken]:
    """Tokenize a <parameters> body into a nested token list; ``[ ]`` and
    ``{ }`` both delimit groups."""
    text = text.replace("[", " [ ").replace("]", " ] ")
    text = text.replace("{", " { ").replace("}", " } ")
    stack: List[List[ParamToken]] = [[]]
    for tok in text.split():
        if tok in ("[", "{"):
            group: List[ParamToken] = []
            stack[-1].append(group)
            stack.append(group)
        elif tok in ("]", "}"):
            if len(stack) == 1:
                raise FormatError("unbalanced bracket in parameters")
            stack.pop()
        else:
            try:
                stack[-1].append(int(tok))
            except ValueError:
                stack[-1].append(tok)
    if len(stack) != 1:
        raise FormatError("unbalanced bracket in parameters")
    return stack[0]


# -- XML parsing --------------------------------------------------------------


def _local(tag: str) -> str:
    return tag.rpartition("}")[2]


def _check_attrs(el, diagnostics: List[str]):
    known = _KNOWN_ATTRS.get(_local(el.tag))
    if known is None:
        return
    for attr in el.attrib:
        if attr not in known:
            diagnostics.append(
                "warning: ignoring unknown attribute %r on <%s>" % (attr, _local(el.tag))
            )


def _require_attr(el, attr: str) -> str:
    value = el.get(attr)
    if value is None:
        raise StructuralError("<%s> is missing mandatory attribute %r" % (_local(el.tag), attr))
    return value


def _int_attr(el, attr: str, required: bool) -> Optional[int]:
    value = _require_attr(el, attr) if required else el.get(attr)
    if value is None:
        return None
    try:
        return int(value)
    except ValueError:
        raise StructuralError("attribute %s=%r is not an integer" % (attr, value)) from None


def _child(root, tag: str):
    for el in root:
        if _local(el.tag) == tag:
            return el
    return None


def _children(parent, tag: str):
    return [el for el in parent if _local(el.tag) == tag]


def _parameters_text(el) -> str:
    # mixed content: embedded elements such as <le/> become bare tokens
    parts = [el.text or ""]
    for child in el:
        parts.append(" %s " % _local(child.tag))
        parts.append(child.tail or "")
    return "".join(parts)


def _reject_extensions(root):
    presentation = _child(root, "presentation")
    if presentation is not None:
        kind = presentation.get("type")
        if kind is not None and kind.upper() != "CSP":
            raise UnsupportedExtensionError(
                "unsupported extension: instance type %r (only CSP is supported)" % kind
            )
    for el in root.iter():
        tag = _local(el.tag)
        if tag in ("weightedConstraints", "quantification", "quantifiers"):
            raise UnsupportedExtensionError(
                "unsupported extension: <%s> (WCSP/QCSP content is not supported)" % tag
            )
        if tag == "relation" and el.get("semantics") == "soft":
            raise UnsupportedExtensionError(
                "unsupported extension: soft relation %r" % el.get("name")
            )


def _unique(name: str, seen: set, section: str):
    if name in seen:
        raise StructuralError("duplicate %s name %r" % (section, name))
    seen.add(name)


def parse_instance(document) -> InstanceModel:
    """Parse an XCSP 2.1 document (bytes or str) into an InstanceModel.

    Raises XmlError for malformed XML, StructuralError for schema
    violations, UnsupportedExtensionError for WCSP/QCSP content. Count
    drift (nb* attributes vs. actual content) only adds diagnostics.
    """
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        root = ET.fromstring(document)
    except ET.ParseError as e:
        line, column = e.position
        raise XmlError("malformed XML: %s" % e.msg if hasattr(e, "msg") else str(e),
                       line=line, column=column) from None
    if _local(root.tag) != "instance":
        raise StructuralError("root element must be <instance>, found <%s>" % _local(root.tag))
    _reject_extensions(root)

    model = InstanceModel()
    diag = model.diagnostics
    _check_attrs(root, diag)
    presentation = _child(root, "presentation")
    if presentation is not None:
        _check_attrs(presentation, diag)

    domains_el = _child(root, "domains")
    if domains_el is not None:
        _check_attrs(domains_el, diag)
        model.nb_domains = _int_attr(domains_el, "nbDomains", required=True)
        seen: set = set()
        for el in _children(domains_el, "domain"):
            _check_attrs(el, diag)
            name = _require_attr(el, "name")
            _unique(name, seen, "domain")
            count = _int_attr(el, "nbValues", required=True)
            values = parse_integer_set(el.text or "")
            if values.size() != count:
                diag.append(
                    "warning: domain %r declares nbValues=%d but holds %d value(s)"
                    % (name, count, values.size())
                )
            model.domains.append(DomainDef(name, values, count))
        if model.nb_domains != len(model.domains):
            diag.append(
                "warning: nbDomains=%d but %d domain(s) declared"
                % (model.nb_domains, len(model.domains))
            )

    variables_el = _child(root, "variables")
    if variables_el is None:
        raise StructuralError("missing mandatory <variables> section")
    _check_attrs(variables_el, diag)
    model.nb_variables = _int_attr(variables_el, "nbVariables", required=True)
    seen = set()
    for el in _children(variables_el, "variable"):
        _check_attrs(el, diag)
        name = _require_attr(el, "name")
        _unique(name, seen, "variable")
        model.variables.append(VariableDef(name, _require_attr(el, "domain")))
    if model.nb_variables != len(model.variables):
        diag.append(
            "warning: nbVariables=%d but %d variable(s) declared"
            % (model.nb_variables, len(model.variables))
        )

    relations_el = _child(root, "relations")
    if relations_el is not None:
        _check_attrs(relations_el, diag)
        model.nb_relations = _int_attr(relations_el, "nbRelations", required=False)
        seen = set()
        for el in _children(relations_el, "relation"):
            _check_attrs(el, diag)
            name = _require_attr(el, "name")
            _unique(name, seen, "relation")
            arity = _int_attr(el, "arity", required=True)
            semantics = _require_attr(el, "semantics")
            if semantics not in ("supports", "conflicts"):
                raise StructuralError(
                    "relation %r has unknown semantics %r" % (name, semantics)
                )
            tuples = parse_tuples(el.text or "", arity)
            declared = _int_attr(el, "nbTuples", required=False)
            if declared is not None and declared != len(tuples):
                diag.append(
                    "warning: relation %r declares nbTuples=%d but holds %d"
                    % (name, declared, len(tuples))
                )
            model.relations.append(RelationDef(name, arity, semantics, tuples))
        if model.nb_relations is not None and model.nb_relations != len(model.relations):
            diag.append("warning: nbRelations mismatch")

    predicates_el = _child(root, "predicates")
    if predicates_el is not None:
        _check_attrs(predicates_el, diag)
        model.nb_predicates = _int_attr(predicates_el, "nbPredicates", required=False)
        seen = set()
        for el in _children(predicates_el, "predicate"):
            _check_attrs(el, diag)
            name = _require_attr(el, "name")
            _unique(name, seen, "predicate")
            params_el = _child(el, "parameters")
            if params_el is None:
                raise StructuralError("predicate %r is missing <parameters>" % name)
            formals = _parse_formal_params(name, params_el.text or "")
            expression_el = _child(el, "expression")
            functional_el = _child(expression_el, "functional") if expression_el is not None else None
            if functional_el is None:
                raise StructuralError(
                    "predicate %r is missing <expression><functional>" % name
                )
            body = ex.parse_functional(functional_el.text or "", formals)
            model.predicates.append(PredicateDef(name, formals, body))
        if model.nb_predicates is not None and model.nb_predicates != len(model.predicates):
            diag.append("warning: nbPredicates mismatch")

    constraints_el = _child(root, "constraints")
    if constraints_el is None:
        raise StructuralError("missing mandatory <constraints> section")
    _check_attrs(constraints_el, diag)
    model.nb_constraints = _int_attr(constraints_el, "nbConstraints", required=False)
    seen = set()
    for el in _children(constraints_el, "constraint"):
        _check_attrs(el, diag)
        name = _require_attr(el, "name")
        _unique(name, seen, "constraint")
        arity = _int_attr(el, "arity", required=True)
        scope = _require_attr(el, "scope").split()
        if len(scope) != arity:
            raise StructuralError(
                "constraint %r: scope has %d variable(s) but arity=%d"
                % (name, len(scope), arity)
            )
        reference = _require_attr(el, "reference")
        params_el = _child(el, "parameters")
        parameters = None
        if params_el is not None:
            parameters = _tokenize_params(_parameters_text(params_el))
        model.constraints.append(ConstraintDef(name, arity, scope, reference, parameters))
    if model.nb_constraints is not None and model.nb_constraints != len(model.constraints):
        diag.append("warning: nbConstraints mismatch")

    return model


def _parse_formal_params(pred_name: str, text: str) -> List[str]:
    tokens = text.split()
    if len(tokens) % 2 != 0:
        raise StructuralError("predicate %r: malformed formal parameter list" % pred_name)
    formals = []
    for type_name, param in zip(tokens[::2], tokens[1::2]):
        if type_name != "int":
            raise StructuralError(
                "predicate %r: unsupported parameter type %r" % (pred_name, type_name)
            )
        if param in formals:
            raise StructuralError(
                "predicate %r: duplicate formal parameter %r" % (pred_name, param)
            )
        formals.append(param)
    return formals


# -- canonical serialization --------------------------------------------------


def _set_text(values: IntegerSet) -> str:
    parts = []
    for lo, hi in values.ranges:
        parts.append(str(lo) if lo == hi else "%d..%d" % (lo, hi))
    return " ".join(parts)


def _params_text(tokens: List[ParamToken]) -> str:
    parts = []
    for tok in tokens:
        if isinstance(tok, list):
            parts.append("[ %s ]" % _params_text(tok))
        else:
            parts.append(str(tok))
    return " ".join(parts)


def to_xml(model: InstanceModel) -> str:
    """Serialize back to canonical XCSP 2.1; re-parsing yields an equal model."""
    lines = ['<instance>', '<presentation format="XCSP 2.1"/>']
    lines.append('<domains nbDomains="%d">' % (model.nb_domains if model.nb_domains is not None else len(model.domains)))
    for d in model.domains:
        lines.append('<domain name="%s" nbValues="%d">%s</domain>'
                     % (d.name, d.declared_count, _set_text(d.values)))
    lines.append('</domains>')
    lines.append('<variables nbVariables="%d">'
                 % (model.nb_variables if model.nb_variables is not None else len(model.variables)))
    for v in model.variables:
        lines.append('<variable name="%s" domain="%s"/>' % (v.name, v.domain_ref))
    lines.append('</variables>')
    if model.relations or model.nb_relations is not None:
        lines.append('<relations nbRelations="%d">'
                     % (model.nb_relations if model.nb_relations is not None else len(model.relations)))
        for r in model.relations:
            body = "|".join(" ".join(str(v) for v in t) for t in r.tuples)
            lines.append('<relation name="%s" arity="%d" nbTuples="%d" semantics="%s">%s</relation>'
                         % (r.name, r.arity, len(r.tuples), r.semantics, body))
        lines.append('</relations>')
    if model.predicates or model.nb_predicates is not None:
        lines.append('<predicates nbPredicates="%d">'
                     % (model.nb_predicates if model.nb_predicates is not None else len(model.predicates)))
        for p in model.predicates:
            formals = " ".join("int %s" % name for name in p.formal_params)
            lines.append('<predicate name="%s">' % p.name)
            lines.append('<parameters>%s</parameters>' % formals)
            lines.append('<expression><functional>%s</functional></expression>' % ex.to_text(p.body))
            lines.append('</predicate>')
        lines.append('</predicates>')
    lines.append('<constraints nbConstraints="%d">'
                 % (model.nb_constraints if model.nb_constraints is not None else len(model.constraints)))
    for c in model.constraints:
        attrs = 'name="%s" arity="%d" scope="%s" reference="%s"' % (
            c.name, c.arity, " ".join(c.scope), c.reference)
        if c.parameters is None:
            lines.append('<constraint %s/>' % attrs)
        else:
            lines.append('<constraint %s>' % attrs)
            lines.append('<parameters>%s</parameters>' % _params_text(c.parameters))
            lines.append('</constraint>')
    lines.append('</constraints>')
    lines.append('</instance>')
    return "\n".join(lines) + "\n"


# -- resolution ---------------------------------------------------------------


def _resolve_params(tokens: List[ParamToken], var_index: Dict[str, int],
                    context: str) -> List[ParamToken]:
    out: List[ParamToken] = []
    for tok in tokens:
        if isinstance(tok, list):
            out.append(_resolve_params(tok, var_index, context))
        elif isinstance(tok, str):
            if tok in var_index:
                out.append(ex.VarRef(var_index[tok]))
            elif tok in _RELOP_TOKENS:
                out.append(tok)
            else:
                raise ResolutionError(
                    "%s: parameter token %r names no declared variable" % (context, tok)
                )
        else:
            out.append(tok)
    return out


def resolve_references(model: InstanceModel) -> ResolvedInstance:
    """Map all by-name references to dense 0-based variable indices.

    Raises ResolutionError for dangling names, repeated scope variables,
    relation/constraint arity mismatches, and unsupported globals.
    """
    domain_by_name = {d.name: d for d in model.domains}
    relation_by_name = {r.name: r for r in model.relations}
    predicate_by_name = {p.name: p for p in model.predicates}
    var_index: Dict[str, int] = {}
    domains: List[IntegerSet] = []
    names: List[str] = []
    for i, v in enumerate(model.variables):
        if v.domain_ref not in domain_by_name:
            raise ResolutionError(
                "variable %r references undeclared domain %r" % (v.name, v.domain_ref)
            )
        var_index[v.name] = i
        names.append(v.name)
        # IntegerSet is immutable, so sharing is as good as copying
        domains.append(domain_by_name[v.domain_ref].values)

    constraints: List[ResolvedConstraint] = []
    for c in model.constraints:
        scope = []
        for var_name in c.scope:
            if var_name not in var_index:
                raise ResolutionError(
                    "constraint %r references undeclared variable %r" % (c.name, var_name)
                )
            idx = var_index[var_name]
            if idx in scope:
                raise ResolutionError(
                    "constraint %r repeats variable %r in its scope" % (c.name, var_name)
                )
            scope.append(idx)

        ref: ConstraintRef
        if c.reference.startswith("global:"):
            global_name = c.reference[len("global:"):].strip().lower()
            if global_name not in SUPPORTED_GLOBALS:
                raise ResolutionError(
                    "unsupported global constraint %r; supported: %s"
                    % (global_name, ", ".join(SUPPORTED_GLOBALS))
                )
            ref = GlobalRef(global_name)
        elif c.reference in relation_by_name:
            relation = relation_by_name[c.reference]
            if relation.arity != c.arity:
                raise ResolutionError(
                    "constraint %r has arity %d but relation %r has arity %d"
                    % (c.name, c.arity, relation.name, relation.arity)
                )
            ref = RelationRef(relation)
        elif c.reference in predicate_by_name:
            ref = PredicateRef(predicate_by_name[c.reference])
        else:
            raise ResolutionError(
                "constraint %r references unknown relation/predicate %r"
                % (c.name, c.reference)
            )

        parameters = None
        if c.parameters is not None:
            parameters = _resolve_params(c.parameters, var_index,
                                         "constraint %r" % c.name)
        constraints.append(ResolvedConstraint(c.name, scope, ref, parameters))

    return ResolvedInstance(names, domains, constraints,
                            diagnostics=list(model.diagnostics))
