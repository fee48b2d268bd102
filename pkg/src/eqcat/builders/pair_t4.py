"""Two copies of one structure that disagree on deciding the size-k1 classes.

C codes a k1-free copy B on the odd numbers and infinitely many k1-blocks
on the evens, so a class has size k1 exactly when its elements are even.
D codes the base A beside a gadget C' whose class with representative 2i
has size k1 while i is outside M and size k2 once i enters M.
"""

from __future__ import annotations

from dataclasses import replace

from ..core import Pool, StagedPartition, is_omega
from ..predicates import Predicate, sigma2_member_at
from .bounded import BoundedStructure
from .common import BlockStructure, BoundedCharSpec, EnumerableSet, SFunction, SpecMismatch, skip_index
from .sfunc import FromS1Structure
from .union import FunctionCoder, ParityCoder, UnionStructure


class WithoutSize(Predicate):
    """R with every pair of size ``k`` removed from its character."""

    def __init__(self, R: Predicate, k: int):
        self.R = R
        self.k = k
        self.variables = R.variables

    def __call__(self, k, n, w, z):
        return k != self.k and self.R(k, n, w, z)

    def to_spec(self):
        return {"without": self.k, "base": self.R.to_spec()}


class GadgetStructure(StagedPartition):
    """C': stage s opens the class of 2s; odd numbers pad the classes.

    With finite k2 a class jumps from k1 to k2 elements when its index is
    enumerated into M.  With k2 = OMEGA it is kept at max(k1, s) elements
    from then on, which makes it infinite.
    """

    def __init__(self, k1: int, k2, M: EnumerableSet):
        super().__init__([Pool("rep", 2, 0), Pool("pad", 2, 1)])
        if not 1 <= k1:
            raise ValueError("k1 must be at least 1")
        if not is_omega(k2) and k2 <= k1:
            raise ValueError("need k1 < k2")
        self.k1, self.k2, self.M = k1, k2, M
        self._waiting: list[int] = []  # in M, kept at k1 until the stage reaches k1

    def _target(self, s):
        return self.k2 if not is_omega(self.k2) else max(self.k1, s)

    def _enter(self, i: int, s: int) -> None:
        if is_omega(self.k2):
            if s < self.k1:
                self._waiting.append(i)
                return
            self.add(i, self._target(s) - self.size_now(i), "pad")
            self.declare_infinite(i)
        else:
            self.add(i, self.k2 - self.size_now(i), "pad")
        self.log("enter", i=i)

    def _stage(self, s: int) -> None:
        self.grow_roster("pad")
        if self._waiting and s >= self.k1:
            waiting, self._waiting = self._waiting, []
            for i in waiting:
                self._enter(i, s)
        for i in self.M.new_at(s):
            if i >= s:
                continue
            self._enter(i, s)
        cid = self.new_class(1, "rep")
        self.add(cid, self.k1 - 1, "pad")
        if self.M.enumerated_at(s, s):
            self._enter(cid, s)

    def in_M(self, i: int, s: int) -> bool:
        return self.M.enumerated_at(i, s)


def d_coder() -> FunctionCoder:
    """Part 0 (the base) on 4a+1; part 1 (C') keeps its representatives 2i and
    moves its odd padding 2j+1 to 4j+3."""

    def enc(part, a):
        if part == 0:
            return 4 * a + 1
        return a if a % 2 == 0 else 4 * (a // 2) + 3

    def dec(x):
        if x % 2 == 0:
            return 1, x
        if x % 4 == 3:
            return 1, 2 * (x // 4) + 1
        return 0, x // 4

    return FunctionCoder(enc, dec, parts=2, name="t4-d")


def _check_bounded(spec: BoundedCharSpec, k1, k2) -> None:
    if k1 not in spec.repeat_sizes:
        raise SpecMismatch(f"base has only finitely many classes of size {k1}")
    if is_omega(k2):
        if not is_omega(spec.r):
            raise SpecMismatch("k2 = omega needs infinitely many infinite classes")
    elif k2 not in spec.repeat_sizes:
        raise SpecMismatch(f"base has only finitely many classes of size {k2}")


def _check_sigma2(R: Predicate, k1, k2, budget: int, depth: int = 4) -> None:
    if is_omega(k2):
        raise SpecMismatch("an s1 base has no infinite classes, so k2 cannot be omega")
    for k in (k1, k2):
        for n in range(1, depth + 1):
            if not sigma2_member_at(R, k, n, budget):
                raise SpecMismatch(f"({k},{n}) not seen in the character of R within budget {budget}")


def find_limit_index(f: SFunction, value: int, budget: int, window: int | None = None):
    """Index i whose column looks settled at ``value`` by ``budget``, if any."""
    window = window if window is not None else budget // 2
    for i in range(budget + 1):
        v = f(i, budget)
        if v > value and f(i, max(0, budget - window)) > value:
            # strictly increasing limits: nothing later can come back down
            break
        if v == value and f(i, max(0, budget - window)) == value:
            return i
    return None


class PairT4:
    """Holds A, B, C and D plus the parameters used to make them."""

    def __init__(self, base, k1: int, k2, M: EnumerableSet, R: Predicate | None = None,
                 budget: int = 400):
        if is_omega(k1):
            raise ValueError("k1 must be finite")
        if not is_omega(k2) and k2 <= k1:
            raise ValueError("need k1 < k2")
        self.k1, self.k2, self.M = k1, k2, M
        self.skipped = None
        if isinstance(base, BoundedCharSpec):
            _check_bounded(base, k1, k2)
            self.A = BoundedStructure(base)
            fixed = tuple(p for p in base.fixed_sizes if p[0] != k1)
            self.B = BoundedStructure(replace(base, repeat_sizes=base.repeat_sizes - {k1}, fixed_sizes=fixed))
        elif isinstance(base, SFunction):
            if R is None:
                raise ValueError("an s1 base needs its predicate R")
            _check_sigma2(R, k1, k2, budget)
            self.A = FromS1Structure(base, R)
            self.skipped = find_limit_index(base, k1, budget)
            g = base if self.skipped is None else skip_index(base, self.skipped)
            self.B = FromS1Structure(g, WithoutSize(R, k1))
        else:
            raise TypeError("base must be a BoundedCharSpec or an s1 SFunction")
        self.gadget = GadgetStructure(k1, k2, M)
        self.C = UnionStructure([BlockStructure(k1), self.B], ParityCoder())
        self.D = UnionStructure([self.A, self.gadget], d_coder())

    def c_rule(self, x: int) -> bool:
        """The decision procedure for card([x]) = k1 in C."""
        return x % 2 == 0

    def d_rep(self, i: int) -> int:
        return 2 * i


def build_pair_t4(base, k1: int, k2, M: EnumerableSet | None = None, R: Predicate | None = None):
    pair = PairT4(base, k1, k2, M or EnumerableSet.empty(), R)
    return pair.C, pair.D
