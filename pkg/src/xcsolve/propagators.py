"""One filtering implementation per propagator kind.

Every propagator obeys the soundness contract: it never removes a value
that appears in some satisfying assignment of its own constraint given the
other current domains. Reporting SUBSUMED means the constraint holds for
every completion of the current domains.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Tuple

from . import expr as ex
from .compiler import PropagatorSpec
from .errors import EvalError
from .intset import IntegerSet
from .store import DomainStore

OK = "ok"
SUBSUMED = "subsumed"
FAILED = "failed"


def _term_domain(store: DomainStore, term) -> IntegerSet:
    if term[0] == "var":
        return store.domain(term[1])
    return IntegerSet.interval(term[1], term[1])


def _term_min(store, term):
    return _term_domain(store, term).min_value()


def _term_max(store, term):
    return _term_domain(store, term).max_value()


def _floor_div(a: int, b: int) -> int:
    return a // b


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


class Propagator:
    def __init__(self, spec: PropagatorSpec):
        self.spec = spec

    def vars(self) -> Tuple[int, ...]:
        return self.spec.scope

    def prune(self, store: DomainStore) -> str:
        raise NotImplementedError


class TableSupportsProp(Propagator):
    """Generalized arc consistency by support scanning over the tuple list."""

    def prune(self, store):
        scope = self.spec.scope
        tuples = self.spec.data["tuples"]
        doms = [store.domain(v) for v in scope]
        supported = [set() for _ in scope]
        for t in tuples:
            if all(t[k] in doms[k] for k in range(len(scope))):
                for k, value in enumerate(t):
                    supported[k].add(value)
        for k, v in enumerate(scope):
            store.update(v, IntegerSet.from_values(
                val for val in doms[k] if val in supported[k]))
            if store.failed:
                return FAILED
        if all(store.assigned(v) for v in scope):
            return SUBSUMED
        return OK


class TableConflictsProp(Propagator):
    """Forbidden tuples: each listed tuple must differ from the scope in at
    least one position."""

    def prune(self, store):
        scope = self.spec.scope
        doms = [store.domain(v) for v in scope]
        active = [t for t in self.spec.data["tuples"]
                  if all(t[k] in doms[k] for k in range(len(scope)))]
        if not active:
            return SUBSUMED
        unassigned = [k for k in range(len(scope)) if not store.assigned(scope[k])]
        if not unassigned:
            # some active conflict matches the full assignment exactly
            return FAILED
        if len(unassigned) == 1:
            k = unassigned[0]
            for t in active:
                store.remove_value(scope[k], t[k])
                if store.failed:
                    return FAILED
            return SUBSUMED
        return OK


class NotEqualProp(Propagator):
    def prune(self, store):
        x, y = self.spec.scope
        if store.assigned(x) and store.assigned(y):
            return FAILED if store.value(x) == store.value(y) else SUBSUMED
        if store.assigned(x):
            store.remove_value(y, store.value(x))
            return FAILED if store.failed else SUBSUMED
        if store.assigned(y):
            store.remove_value(x, store.value(y))
            return FAILED if store.failed else SUBSUMED
        if not store.domain(x).intersects(store.domain(y)):
            return SUBSUMED
        return OK


class LinearRelProp(Propagator):
    """Bounds-consistent filtering of sum(c_i * x_i) RELOP rhs."""

    def prune(self, store):
        terms = self.spec.data["terms"]
        op = self.spec.data["op"]
        rhs = self.spec.data["rhs"]
        if op == "lt":
            return self._le_ge(store, terms, rhs - 1, None)
        if op == "le":
            return self._le_ge(store, terms, rhs, None)
        if op == "gt":
            return self._le_ge(store, terms, None, rhs + 1)
        if op == "ge":
            return self._le_ge(store, terms, None, rhs)
        if op == "eq":
            return self._le_ge(store, terms, rhs, rhs)
        return self._ne(store, terms, rhs)

    @staticmethod
    def _bounds(store, terms):
        smin = smax = 0
        for v, c in terms:
            d = store.domain(v)
            lo, hi = d.min_value(), d.max_value()
            if c > 0:
                smin += c * lo
                smax += c * hi
            else:
                smin += c * hi
                smax += c * lo
        return smin, smax

    def _le_ge(self, store, terms, upper: Optional[int], lower: Optional[int]):
        smin, smax = self._bounds(store, terms)
        if upper is not None and smin > upper:
            return FAILED
        if lower is not None and smax < lower:
            return FAILED
        for v, c in terms:
            d = store.domain(v)
            lo, hi = d.min_value(), d.max_value()
            own_min = c * lo if c > 0 else c * hi
            own_max = c * hi if c > 0 else c * lo
            if upper is not None:
                slack = upper - (smin - own_min)
                if c > 0:
                    store.clamp(v, hi=_floor_div(slack, c))
                else:
                    store.clamp(v, lo=_ceil_div(slack, c))
            if store.failed:
                return FAILED
            if lower is not None:
                need = lower - (smax - own_max)
                if c > 0:
                    store.clamp(v, lo=_ceil_div(need, c))
                else:
                    store.clamp(v, hi=_floor_div(need, c))
            if store.failed:
                return FAILED
        smin, smax = self._bounds(store, terms)
        if (upper is None or smax <= upper) and (lower is None or smin >= lower):
            return SUBSUMED
        return OK

    def _ne(self, store, terms, rhs):
        smin, smax = self._bounds(store, terms)
        if smin == smax:
            return FAILED if smin == rhs else SUBSUMED
        if rhs < smin or rhs > smax:
            return SUBSUMED
        unassigned = [(v, c) for v, c in terms if not store.assigned(v)]
        if len(unassigned) == 1:
            v, c = unassigned[0]
            fixed = sum(c2 * store.value(v2) for v2, c2 in terms if v2 != v)
            need = rhs - fixed
            if need % c == 0:
                store.remove_value(v, need // c)
                if store.failed:
                    return FAILED
            return SUBSUMED
        return OK


class AllDifferentProp(Propagator):
    """Value propagation from assigned variables plus a pigeonhole check on
    the union of the current domains."""

    def prune(self, store):
        scope = self.spec.scope
        taken: Dict[int, int] = {}
        for v in scope:
            if store.assigned(v):
                value = store.value(v)
                if value in taken:
                    return FAILED
                taken[value] = v
        for v in scope:
            if not store.assigned(v):
                for value in taken:
                    store.remove_value(v, value)
                    if store.failed:
                        return FAILED
        union = IntegerSet(())
        for v in scope:
            union = union.union(store.domain(v))
        if union.size() < len(scope):
            return FAILED
        if len(taken) == len(scope):
            return SUBSUMED
        return OK


class CountingProp(Propagator):
    """Shared filtering for among / atleast / atmost.

    Maintains lower/upper bounds on |{i : x_i in S}| and confronts them
    with the required count (a fixed interval or a count variable).
    """

    def prune(self, store):
        data = self.spec.data
        vars_ = data["vars"]
        value_set = IntegerSet.from_values(data["values"])
        count_var = data["count_var"]

        lb = ub = 0
        undecided = []
        for v in vars_:
            d = store.domain(v)
            inside = d.intersect(value_set)
            if inside.is_empty():
                continue
            ub += 1
            if inside == d:
                lb += 1
            else:
                undecided.append(v)

        if count_var is not None:
            store.clamp(count_var, lo=lb, hi=ub)
            if store.failed:
                return FAILED
            need_lo = store.domain(count_var).min_value()
            need_hi = store.domain(count_var).max_value()
        else:
            need_lo = data["lo"] if data["lo"] is not None else 0
            need_hi = data["hi"] if data["hi"] is not None else len(vars_)

        if lb > need_hi or ub < need_lo:
            return FAILED
        if lb == need_hi:
            # no further variable may take a counted value
            for v in undecided:
                store.update(v, store.domain(v).difference(value_set))
                if store.failed:
                    return FAILED
        elif ub == need_lo:
            # every still-intersecting variable must take a counted value
            for v in undecided:
                store.intersect(v, value_set)
                if store.failed:
                    return FAILED
        if lb == ub and (count_var is None or store.assigned(count_var)):
            return SUBSUMED
        return OK


class ElementProp(Propagator):
    """table[index] = value with a configurable index base."""

    def prune(self, store):
        data = self.spec.data
        table = data["table"]
        base = data["base"]
        index, value = data["index"], data["value"]
        idom = _term_domain(store, index)
        vdom = _term_domain(store, value)

        valid = [j for j in range(len(table))
                 if (j + base) in idom and _term_domain(store, table[j]).intersects(vdom)]
        if not valid:
            return FAILED
        if index[0] == "var":
            store.update(index[1], IntegerSet.from_values(j + base for j in valid))
            if store.failed:
                return FAILED
        reachable = IntegerSet(())
        for j in valid:
            reachable = reachable.union(_term_domain(store, table[j]))
        if value[0] == "var":
            store.intersect(value[1], reachable)
            if store.failed:
                return FAILED
        elif value[1] not in reachable:
            return FAILED

        idom = _term_domain(store, index)
        if idom.is_singleton():
            j = idom.value() - base
            cell = table[j]
            both = _term_domain(store, cell).intersect(_term_domain(store, value))
            if both.is_empty():
                return FAILED
            if cell[0] == "var":
                store.intersect(cell[1], both)
            if value[0] == "var":
                store.intersect(value[1], both)
            if store.failed:
                return FAILED
            if both.is_singleton():
                return SUBSUMED
        return OK


class GlobalCardinalityProp(Propagator):
    """One among-style counter per counted value, sharing one scan."""

    def prune(self, store):
        data = self.spec.data
        vars_ = data["vars"]
        all_done = all(store.assigned(v) for v in vars_)
        satisfied = True
        for value, occ in data["entries"]:
            lb = ub = 0
            undecided = []
            for v in vars_:
                d = store.domain(v)
                if value not in d:
                    continue
                ub += 1
                if d.is_singleton():
                    lb += 1
                else:
                    undecided.append(v)
            if occ[0] == "var":
                store.clamp(occ[1], lo=lb, hi=ub)
                if store.failed:
                    return FAILED
                need_lo = store.domain(occ[1]).min_value()
                need_hi = store.domain(occ[1]).max_value()
                if not store.assigned(occ[1]):
                    satisfied = False
            else:
                need_lo = need_hi = occ[1]
            if lb > need_hi or ub < need_lo:
                return FAILED
            if lb == need_hi:
                for v in undecided:
                    store.remove_value(v, value)
                    if store.failed:
                        return FAILED
            elif ub == need_lo:
                for v in undecided:
                    store.assign(v, value)
                    if store.failed:
                        return FAILED
            if lb != ub:
                satisfied = False
        if all_done and satisfied:
            return SUBSUMED
        return OK


class CumulativeProp(Propagator):
    """Time-table filtering over compulsory parts."""

    def prune(self, store):
        data = self.spec.data
        tasks = data["tasks"]
        capacity = data["capacity"]

        profile: Dict[int, int] = {}
        parts: List[Optional[Tuple[int, int]]] = []
        for origin, duration, height in tasks:
            d = _term_domain(store, origin)
            lst, ect = d.max_value(), d.min_value() + duration
            if height > 0 and lst < ect:
                parts.append((lst, ect))
                for t in range(lst, ect):
                    profile[t] = profile.get(t, 0) + height
            else:
                parts.append(None)
        if any(h > capacity for h in profile.values()):
            return FAILED

        for i, (origin, duration, height) in enumerate(tasks):
            if origin[0] != "var" or height == 0 or duration == 0:
                continue
            v = origin[1]
            own = parts[i]
            keep = []
            for s in store.domain(v):
                fits = True
                for t in range(s, s + duration):
                    others = profile.get(t, 0)
                    if own is not None and own[0] <= t < own[1]:
                        others -= height
                    if others + height > capacity:
                        fits = False
                        break
                if fits:
                    keep.append(s)
            store.update(v, IntegerSet.from_values(keep))
            if store.failed:
                return FAILED

        if all(_term_domain(store, origin).is_singleton() for origin, _, _ in tasks):
            # pruning above may have assigned variables after the profile
            # was computed; re-check the now-complete schedule exactly
            final: Dict[int, int] = {}
            for origin, duration, height in tasks:
                start = _term_min(store, origin)
                for t in range(start, start + duration):
                    final[t] = final.get(t, 0) + height
            if any(h > capacity for h in final.values()):
                return FAILED
            return SUBSUMED
        return OK


class LexProp(Propagator):
    """Pointer-based filtering for lexicographic vector ordering."""

    strict = True

    def prune(self, store):
        xs = self.spec.data["xs"]
        ys = self.spec.data["ys"]
        n = len(xs)

        def dmin(t):
            return _term_min(store, t)

        def dmax(t):
            return _term_max(store, t)

        def ground_equal(i):
            xd = _term_domain(store, xs[i])
            yd = _term_domain(store, ys[i])
            return xd.is_singleton() and yd.is_singleton() and xd.value() == yd.value()

        alpha = 0
        while alpha < n and ground_equal(alpha):
            alpha += 1
        if alpha == n:
            return FAILED if self.strict else SUBSUMED

        # beta: most significant position from which a strict decrease is
        # already impossible; runs where only equality fits are transparent
        beta = None
        run_start = -1
        i = alpha
        while i < n:
            if dmin(xs[i]) > dmax(ys[i]):
                beta = run_start if run_start != -1 else i
                break
            if dmin(xs[i]) == dmax(ys[i]):
                if run_start == -1:
                    run_start = i
            else:
                run_start = -1
            i += 1
        if beta is None:
            if self.strict:
                beta = run_start if run_start != -1 else n
            else:
                beta = n + 1
        if alpha >= beta:
            return FAILED

        offset = 1 if alpha + 1 == beta else 0
        if dmin(xs[alpha]) > dmax(ys[alpha]) - offset:
            return FAILED
        if xs[alpha][0] == "var":
            store.clamp(xs[alpha][1], hi=dmax(ys[alpha]) - offset)
            if store.failed:
                return FAILED
        if ys[alpha][0] == "var":
            store.clamp(ys[alpha][1], lo=dmin(xs[alpha]) + offset)
            if store.failed:
                return FAILED
        if dmax(xs[alpha]) < dmin(ys[alpha]):
            return SUBSUMED
        return OK


class LexLessEqProp(LexProp):
    strict = False


class ExprCheckProp(Propagator):
    """Generic expression constraint: satisfied iff the expression
    evaluates to 1. Prunes only when at most one scope variable is
    unassigned, and never prunes on an erroring evaluation."""

    def prune(self, store):
        scope = self.spec.scope
        body = self.spec.data["expr"]
        unassigned = [v for v in scope if not store.assigned(v)]
        if not unassigned:
            assignment = {v: store.value(v) for v in scope}
            return SUBSUMED if ex.satisfied(body, assignment) else FAILED
        if len(unassigned) > 1:
            return OK
        u = unassigned[0]
        assignment = {v: store.value(v) for v in scope if v != u}
        removals = []
        clean = True
        for candidate in store.domain(u):
            assignment[u] = candidate
            try:
                if ex.evaluate(body, assignment) != 1:
                    removals.append(candidate)
            except EvalError:
                clean = False  # keep the value; the full-assignment check decides
        for candidate in removals:
            store.remove_value(u, candidate)
            if store.failed:
                return FAILED
        return SUBSUMED if clean else OK


PROPAGATOR_CLASSES = {
    "TableSupports": TableSupportsProp,
    "TableConflicts": TableConflictsProp,
    "NotEqual": NotEqualProp,
    "LinearRel": LinearRelProp,
    "AllDifferent": AllDifferentProp,
    "Among": CountingProp,
    "AtLeast": CountingProp,
    "AtMost": CountingProp,
    "Element": ElementProp,
    "GlobalCardinality": GlobalCardinalityProp,
    "Cumulative": CumulativeProp,
    "LexLess": LexProp,
    "LexLessEq": LexLessEqProp,
    "ExprCheck": ExprCheckProp,
}


def build_propagator(spec: PropagatorSpec) -> Propagator:
    try:
        cls = PROPAGATOR_CLASSES[spec.kind]
    except KeyError:
        raise ValueError("no propagator for kind %r" % spec.kind) from None
    return cls(spec)
