"""Independent semantic oracle: check a total assignment against constraint
definitions, never against propagators.

Relations are checked by tuple membership, predicates by expression
evaluation, globals by their catalog definitions written out directly.
The compiler's parameter-shape parsers are reused, but no filtering code
is."""

from __future__ import annotations

from typing import List

from . import expr as ex
from .compiler import (
    parse_counting_params,
    parse_cumulative_params,
    parse_diffn_params,
    parse_disjunctive_params,
    parse_element_params,
    parse_gcc_params,
    parse_lex_params,
    parse_weighted_sum_params,
    _scope_vars,
)
from .model import (
    GlobalRef,
    PredicateRef,
    RelationRef,
    ResolvedConstraint,
    ResolvedInstance,
)


def _term_value(term, values: List[int]) -> int:
    return values[term[1]] if term[0] == "var" else term[1]


def _check_global(c: ResolvedConstraint, values: List[int],
                  element_base: int) -> bool:
    name = c.ref.name
    if name == "alldifferent":
        vs = [values[v] for v in _scope_vars(c, "[x...]")]
        return len(set(vs)) == len(vs)
    if name in ("among", "atleast", "atmost"):
        sig = parse_counting_params(c, name)
        count = sum(1 for v in sig.vars if values[v] in set(sig.values))
        if sig.count_var is not None:
            return count == values[sig.count_var]
        if sig.lo is not None and count < sig.lo:
            return False
        if sig.hi is not None and count > sig.hi:
            return False
        return True
    if name == "element":
        sig = parse_element_params(c)
        i = _term_value(sig.index, values) - element_base
        if not (0 <= i < len(sig.table)):
            return False
        return _term_value(sig.table[i], values) == _term_value(sig.value, values)
    if name == "global_cardinality":
        sig = parse_gcc_params(c)
        for counted, occ in sig.entries:
            count = sum(1 for v in sig.vars if values[v] == counted)
            if count != _term_value(occ, values):
                return False
        return True
    if name == "cumulative":
        sig = parse_cumulative_params(c)
        usage = {}
        for origin, duration, height in sig.tasks:
            start = _term_value(origin, values)
            for t in range(start, start + duration):
                usage[t] = usage.get(t, 0) + height
        return all(h <= sig.capacity for h in usage.values())
    if name == "disjunctive":
        sig = parse_disjunctive_params(c)
        spans = [(_term_value(o, values), d) for o, d in sig.tasks]
        for i in range(len(spans)):
            for j in range(i + 1, len(spans)):
                (si, di), (sj, dj) = spans[i], spans[j]
                if not (si + di <= sj or sj + dj <= si):
                    return False
        return True
    if name == "diffn":
        sig = parse_diffn_params(c)
        boxes = [tuple(_term_value(t, values) for t in box) for box in sig.boxes]
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                (xi, yi, wi, hi) = boxes[i]
                (xj, yj, wj, hj) = boxes[j]
                if not (xi + wi <= xj or xj + wj <= xi
                        or yi + hi <= yj or yj + hj <= yi):
                    return False
        return True
    if name in ("lex_less", "lex_lesseq"):
        sig = parse_lex_params(c)
        xs = tuple(_term_value(t, values) for t in sig.xs)
        ys = tuple(_term_value(t, values) for t in sig.ys)
        return xs < ys if name == "lex_less" else xs <= ys
    if name == "not_all_equal":
        vs = [values[v] for v in _scope_vars(c, "[x...]")]
        return len(set(vs)) > 1
    if name == "weightedsum":
        sig = parse_weighted_sum_params(c)
        total = sum(coeff * _term_value(t, values) for coeff, t in sig.terms)
        return {
            "eq": total == sig.rhs, "ne": total != sig.rhs,
            "ge": total >= sig.rhs, "gt": total > sig.rhs,
            "le": total <= sig.rhs, "lt": total < sig.rhs,
        }[sig.op]
    raise ValueError("unknown global %r" % name)


def verify_solution(instance: ResolvedInstance, values: List[int],
                    element_base: int = 1) -> bool:
    """True iff `values` (in declaration order) satisfies every constraint."""
    if len(values) != len(instance.domains):
        return False
    if any(v not in d for v, d in zip(values, instance.domains)):
        return False
    for c in instance.constraints:
        if isinstance(c.ref, RelationRef):
            relation = c.ref.relation
            point = tuple(values[v] for v in c.scope)
            member = point in set(map(tuple, relation.tuples))
            ok = member if relation.semantics == "supports" else not member
        elif isinstance(c.ref, PredicateRef):
            predicate = c.ref.predicate
            if c.parameters is None:
                effective = [ex.VarRef(i) for i in c.scope]
            else:
                effective = list(c.parameters)
            ground = ex.substitute(predicate.body, predicate.formal_params, effective)
            ok = ex.satisfied(ground, {i: values[i] for i in range(len(values))})
        else:
            assert isinstance(c.ref, GlobalRef)
            ok = _check_global(c, values, element_base)
        if not ok:
            return False
    return True
