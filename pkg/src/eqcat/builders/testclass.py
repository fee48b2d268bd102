"""A structure with one migrating class that is infinite iff T holds infinitely often."""

from __future__ import annotations

from ..core import Pool, StagedPartition
from ..predicates import Predicate
from .common import SFunction


class TestClassStructure(StagedPartition):
    """Classes C_i of limit size lim_s g(i, s), one of which is the test class.

    Stage t places the even number 2t.  Normally 2t starts class C_t, padded
    with odd numbers to g(t, t+1) elements.  When T(t) holds, 2t joins the
    current test class C_i instead; that class becomes C_t (padded to
    g(t, t+1), or one more than its old size if that is larger), and index i
    gets a fresh class of g(i, t+1) odd numbers.  Every other class is kept
    at g(j, t+1).
    """

    __test__ = False  # keep pytest from collecting this

    def __init__(self, g: SFunction, T: Predicate):
        if T.arity != 1:
            raise ValueError("T must have arity 1")
        super().__init__([Pool("even", 2, 0), Pool("odd", 2, 1)])
        self.g = g
        self.T = T
        self.index: list[int] = []  # index -> class id
        self.test = 0
        self.migrations: list[int] = []
        self.overfull: list[int] = []

    def _size(self, i: int, t: int) -> int:
        return max(1, self.g(i, t + 1))

    def _stage(self, t: int) -> None:
        g = self.g
        if not g.stage_free or t == 0:
            for j, cid in enumerate(self.index):
                self.add(cid, g(j, t + 1) - self.size_now(cid), "odd")
        if t > 0 and self.T(t):
            i = self.test
            cid = self.index[i]
            old = self.size_now(cid)
            self.add(cid, 1, "even")
            target = self._size(t, t)
            if target < old + 1:
                self.overfull.append(t)
            self.add(cid, target - old - 1, "odd")
            fresh = self.new_class(self._size(i, t), "odd")
            self.index[i] = fresh
            self.index.append(cid)
            self.test = t
            self.migrations.append(t)
            self.log("migrate", frm=i, to=t, cls=cid, size=max(target, old + 1))
            return
        cid = self.new_class(1, "even")
        self.add(cid, self._size(t, t) - 1, "odd")
        self.index.append(cid)

    def test_class(self, stage: int) -> int:
        self.run_to(stage)
        return self.index[self.test]


def build_test_class(g: SFunction, T: Predicate) -> TestClassStructure:
    return TestClassStructure(g, T)
