"""Trail-based mutable domain store for depth-first search.

Domains are immutable IntegerSets replaced wholesale on update; the trail
records the previous set so backtracking restores choice-point state
exactly. `failed` is set precisely when some domain became empty.
"""

from __future__ import annotations

from typing import List, Optional, Tuple

from .intset import IntegerSet


class DomainStore:
    def __init__(self, domains: List[IntegerSet]):
        self._domains = list(domains)
        self.failed = any(d.is_empty() for d in domains)
        self._trail: List[Tuple[int, IntegerSet]] = []
        self._marks: List[int] = []
        # variables updated since the engine last drained this list
        self.changed: List[int] = []

    def __len__(self) -> int:
        return len(self._domains)

    def domain(self, i: int) -> IntegerSet:
        return self._domains[i]

    def assigned(self, i: int) -> bool:
        return self._domains[i].is_singleton()

    def value(self, i: int) -> int:
        return self._domains[i].value()

    def value_or_none(self, i: int) -> Optional[int]:
        d = self._domains[i]
        return d.value() if d.is_singleton() else None

    # -- updates ----------------------------------------------------------

    def update(self, i: int, new: IntegerSet) -> bool:
        """Replace domain i; returns True when it actually shrank."""
        old = self._domains[i]
        if new == old:
            return False
        self._trail.append((i, old))
        self._domains[i] = new
        self.changed.append(i)
        if new.is_empty():
            self.failed = True
        return True

    def assign(self, i: int, v: int) -> bool:
        d = self._domains[i]
        if v in d:
            return self.update(i, IntegerSet.interval(v, v))
        return self.update(i, IntegerSet(()))

    def remove_value(self, i: int, v: int) -> bool:
        return self.update(i, self._domains[i].remove(v))

    def clamp(self, i: int, lo=None, hi=None) -> bool:
        return self.update(i, self._domains[i].clamp(lo, hi))

    def intersect(self, i: int, other: IntegerSet) -> bool:
        return self.update(i, self._domains[i].intersect(other))

    def drain_changed(self) -> List[int]:
        out = self.changed
        self.changed = []
        return out

    # -- trail ------------------------------------------------------------

    def push(self):
        self._marks.append(len(self._trail))

    def undo(self):
        mark = self._marks.pop()
        while len(self._trail) > mark:
            i, old = self._trail.pop()
            self._domains[i] = old
        self.failed = False
        self.changed = []

    def depth(self) -> int:
        return len(self._marks)

    def snapshot(self) -> Tuple[IntegerSet, ...]:
        """Structural copy of all current domains, for restoration checks."""
        return tuple(self._domains)

    def all_assigned(self) -> bool:
        return all(d.is_singleton() for d in self._domains)

    def solution_values(self) -> List[int]:
        return [d.value() for d in self._domains]
