"""Propagation-based depth-first search with binary branching.

Branching is x=v versus x!=v. Variable and value heuristics are pluggable
and deterministically tie-broken (lowest variable index, then lowest
value), so two runs over the same problem produce identical statistics and
solution order.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .compiler import Problem
from .propagators import FAILED, SUBSUMED, build_propagator
from .store import DomainStore

VAR_HEURISTICS = ("input", "min-dom", "max-deg")
VAL_HEURISTICS = ("min", "max")


@dataclass
class SearchStats:
    nodes: int = 0
    failures: int = 0
    propagations: int = 0
    peak_depth: int = 0
    solutions: int = 0


@dataclass
class SearchResult:
    solutions: List[List[int]]
    stats: SearchStats
    complete: bool  # False when a node/time budget cut the search short


@dataclass
class BranchStrategy:
    var_heuristic: str = "input"
    val_heuristic: str = "min"

    def __post_init__(self):
        if self.var_heuristic not in VAR_HEURISTICS:
            raise ValueError("unknown variable heuristic %r" % self.var_heuristic)
        if self.val_heuristic not in VAL_HEURISTICS:
            raise ValueError("unknown value heuristic %r" % self.val_heuristic)

    def select(self, store: DomainStore, degrees: List[int]) -> Tuple[int, int]:
        candidates = [i for i in range(len(store)) if not store.assigned(i)]
        if self.var_heuristic == "min-dom":
            var = min(candidates, key=lambda i: (store.domain(i).size(), i))
        elif self.var_heuristic == "max-deg":
            var = min(candidates, key=lambda i: (-degrees[i], i))
        else:
            var = candidates[0]
        d = store.domain(var)
        value = d.min_value() if self.val_heuristic == "min" else d.max_value()
        return var, value


class Engine:
    """One search owns its DomainStore; the Problem itself stays immutable."""

    def __init__(self, problem: Problem, strategy: Optional[BranchStrategy] = None):
        self.problem = problem
        self.strategy = strategy or BranchStrategy()
        self.store = DomainStore(problem.domains)
        self.props = [build_propagator(spec) for spec in problem.propagators]
        self.watchers: List[List[int]] = [[] for _ in problem.domains]
        self.degrees = [0] * len(problem.domains)
        for k, p in enumerate(self.props):
            for v in p.vars():
                self.watchers[v].append(k)
                self.degrees[v] += 1
        self.active = [True] * len(self.props)
        self.stats = SearchStats()
        # subsumption is search-state: trailed alongside the domain store
        self._sub_trail: List[int] = []
        self._sub_marks: List[int] = []

    # -- trail ------------------------------------------------------------

    def _push(self):
        self.store.push()
        self._sub_marks.append(len(self._sub_trail))

    def _undo(self):
        self.store.undo()
        mark = self._sub_marks.pop()
        while len(self._sub_trail) > mark:
            self.active[self._sub_trail.pop()] = True

    def _subsume(self, k: int):
        self.active[k] = False
        self._sub_trail.append(k)

    # -- propagation ------------------------------------------------------

    def propagate_fixpoint(self, seeds: Optional[List[int]] = None) -> bool:
        """Run propagators until fixpoint; returns False exactly on failure."""
        if self.store.failed:
            self.stats.failures += 1
            return False
        if seeds is None:
            seeds = [k for k in range(len(self.props)) if self.active[k]]
        queue = deque(seeds)
        queued = [False] * len(self.props)
        for k in seeds:
            queued[k] = True
        self.store.drain_changed()
        while queue:
            k = queue.popleft()
            queued[k] = False
            if not self.active[k]:
                continue
            self.stats.propagations += 1
            outcome = self.props[k].prune(self.store)
            if outcome == FAILED or self.store.failed:
                self.stats.failures += 1
                return False
            if outcome == SUBSUMED:
                self._subsume(k)
            for v in self.store.drain_changed():
                for watcher in self.watchers[v]:
                    if self.active[watcher] and not queued[watcher]:
                        queue.append(watcher)
                        queued[watcher] = True
        return True

    # -- search -----------------------------------------------------------

    def solve(self, find_all: bool = False, limit: Optional[int] = None,
              node_limit: Optional[int] = None,
              time_limit: Optional[float] = None) -> SearchResult:
        deadline = None if time_limit is None else time.monotonic() + time_limit
        solutions: List[List[int]] = []
        stats = self.stats
        complete = True
        # decision stack: (var, value, took_right_branch)
        decisions: List[Tuple[int, int, bool]] = []

        def budget_exceeded() -> bool:
            if node_limit is not None and stats.nodes >= node_limit:
                return True
            if deadline is not None and time.monotonic() >= deadline:
                return True
            return False

        if budget_exceeded():
            return SearchResult(solutions, stats, False)
        # root propagation gets its own trail frame so solve() leaves the
        # store exactly as constructed and the engine can be reused
        self._push()
        failed = not self.propagate_fixpoint()
        while True:
            if not failed and self.store.all_assigned():
                solutions.append(self.store.solution_values())
                stats.solutions += 1
                if not find_all and limit is None:
                    break
                if limit is not None and len(solutions) >= limit:
                    break
                failed = True  # exhaust this branch and keep enumerating
            if failed:
                # backtrack to the deepest open left branch, then go right
                while decisions and decisions[-1][2]:
                    decisions.pop()
                    self._undo()
                if not decisions:
                    break
                var, value, _ = decisions.pop()
                self._undo()
                if budget_exceeded():
                    complete = False
                    break
                self._push()
                decisions.append((var, value, True))
                stats.nodes += 1
                stats.peak_depth = max(stats.peak_depth, len(decisions))
                self.store.remove_value(var, value)
                failed = not self.propagate_fixpoint()
                continue
            if budget_exceeded():
                complete = False
                break
            var, value = self.strategy.select(self.store, self.degrees)
            self._push()
            decisions.append((var, value, False))
            stats.nodes += 1
            stats.peak_depth = max(stats.peak_depth, len(decisions))
            self.store.assign(var, value)
            failed = not self.propagate_fixpoint()

        # unwind so the store returns to its root state
        while decisions:
            decisions.pop()
            self._undo()
        self._undo()  # the root-propagation frame
        return SearchResult(solutions, stats, complete)


def search_first(problem: Problem, strategy: Optional[BranchStrategy] = None,
                 node_limit: Optional[int] = None,
                 time_limit: Optional[float] = None) -> SearchResult:
    """First solution in deterministic DFS order, or proof of UNSAT."""
    return Engine(problem, strategy).solve(node_limit=node_limit,
                                           time_limit=time_limit)


def search_all(problem: Problem, strategy: Optional[BranchStrategy] = None,
               limit: Optional[int] = None,
               node_limit: Optional[int] = None,
               time_limit: Optional[float] = None) -> SearchResult:
    """All solutions (up to `limit`) in deterministic DFS order."""
    return Engine(problem, strategy).solve(find_all=True, limit=limit,
                                           node_limit=node_limit,
                                           time_limit=time_limit)
