"""Structures realizing a Sigma^0_2 character with infinitely many infinite classes."""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from ..core import Pool, StagedPartition
from ..predicates import Predicate
from .common import CharacterViolation


def b_set_member(R: Predicate, k: int, n: int, w: int, z: int, literal: bool = False) -> bool:
    """Membership of the quadruple (k, n, w, z) in the set B, by enumeration.

    B collects the quadruples where, looking only below z, w is the least
    candidate witness for (k, n): w survives every y < z, every v < w is
    refuted below z, and z is the first bound at which that happens.

    With ``literal=True`` the minimality clause is read as
    ``(forall y<z)(exists v<w) R(k,n,v,y)`` instead of over initial
    segments.  That reading keeps only w = 0 quadruples and is here for
    comparison.
    """
    if not all(R(k, n, w, y) for y in range(z)):
        return False
    if not all(any(not R(k, n, v, y) for y in range(z)) for v in range(w)):
        return False
    if literal:
        return all(any(R(k, n, v, y) for v in range(w)) for y in range(z))
    return all(
        any(all(R(k, n, v, y) for y in range(zp)) for v in range(w)) for zp in range(z)
    )


class BEnumerator:
    """Lists B without repetition in order of k + n + w + z, then k, n, w.

    For a pair (k, n) the only admissible z for witness w is one more than
    the largest least-refutation among v < w (0 when w = 0).  Refutations
    are searched column by column, each search bounded by the current
    level, so every level is settled after finitely many evaluations.
    """

    def __init__(self, R: Predicate):
        self.R = R
        self._level = 1
        self._pending: list[tuple] = []  # heap of (level, k, n, w, z)
        self._resolved: dict[tuple, int] = {}  # (k, n) -> columns with known refutation
        self._zstar: dict[tuple, int] = {}  # (k, n) -> 1 + max refutation so far
        self._searched: dict[tuple, int] = {}  # (k, n, v) -> bound searched
        self._ready: list[tuple] = []
        self.listed: list[tuple] = []

    def _refute(self, k, n, v, bound):
        key = (k, n, v)
        R = self.R
        start = self._searched.get(key, 0)
        for y in range(start, bound):
            if not R(k, n, v, y):
                return y
        self._searched[key] = max(start, bound)
        return None

    def _fill(self):
        R = self.R
        while not self._ready:
            self._level += 1
            L = self._level
            for k in range(1, L):
                for n in range(1, L - k + 1):
                    pair = (k, n)
                    if k + n == L:
                        heapq.heappush(self._pending, (L, k, n, 0, 0))
                    wu = self._resolved.get(pair, 0)
                    while k + n + wu + 1 < L:
                        y = self._refute(k, n, wu, L - k - n - wu - 1)
                        if y is None:
                            break
                        zs = max(self._zstar.get(pair, 0), y + 1)
                        self._zstar[pair] = zs
                        wu += 1
                        self._resolved[pair] = wu
                        # witness wu now has its only possible z
                        if all(R(k, n, wu, yy) for yy in range(zs)):
                            heapq.heappush(self._pending, (k + n + wu + zs, k, n, wu, zs))
            while self._pending and self._pending[0][0] <= L:
                _, k, n, w, z = heapq.heappop(self._pending)
                self._ready.append((k, n, w, z))
            self._ready.reverse()

    def __getitem__(self, i: int) -> tuple:
        while len(self.listed) <= i:
            self._fill()
            self.listed.append(self._ready.pop())
        return self.listed[i]


@dataclass
class BRecord:
    index: int
    quad: tuple
    cid: int | None
    checked_upto: int = 0  # every z < checked_upto has been tested
    refuted_at: int | None = None


class Sigma2InfStructure(StagedPartition):
    """One class per B-quadruple plus an infinite family of infinite classes.

    Odd numbers feed the infinite family, whose c-th class opens at stage
    2c.  Even numbers hold the B-classes and all growth.  At stage t the
    quadruples admitted earlier are tested at z = t - 1; a refuted class is
    declared infinite, topped up to t - 1 elements and from then on gains
    one element per stage.  Then b_t is admitted with a class of k_t
    elements.
    """

    def __init__(self, R: Predicate, audit: bool = True):
        if R.arity != 4:
            raise ValueError("R must have arity 4")
        super().__init__([Pool("even", 2, 0), Pool("odd", 2, 1)])
        self.R = R
        self.audit = audit
        self.enum = BEnumerator(R)
        self.records: list[BRecord] = []
        self._live: list[BRecord] = []
        self.family: list[int] = []

    def _stage(self, t: int) -> None:
        R = self.R
        self.grow_roster("even")
        if t > 0:
            still = []
            for rec in self._live:
                k, n, w, _ = rec.quad
                z = rec.checked_upto
                ok = True
                while z < t:
                    if not R(k, n, w, z):
                        ok = False
                        break
                    z += 1
                rec.checked_upto = z
                if ok:
                    still.append(rec)
                    continue
                rec.refuted_at = z
                self.declare_infinite(rec.cid)
                self.add(rec.cid, (t - 1) - self.size_now(rec.cid), "even")
                self.log("declare-infinite", b=rec.index, quad=list(rec.quad), z=z)
            self._live = still
        if t % 2 == 0:
            cid = self.new_class(1, "odd")
            self.declare_infinite(cid)
            self.family.append(cid)
        quad = self.enum[t]
        cid = self.new_class(quad[0], "even")
        rec = BRecord(t, quad, cid)
        self.records.append(rec)
        self._live.append(rec)
        self.log("admit", b=t, quad=list(quad), cls=cid)
        if self.audit:
            seen = set()
            for r in self._live:
                key = r.quad[:2]
                if key in seen and r.checked_upto > 0:
                    raise CharacterViolation(f"two live classes for {key} at stage {t}")
                seen.add(key)

    def stable_character(self, stage: int, settle: int):
        """Character of the finite classes created by ``stage - settle``."""
        from ..core import CharacterApprox

        return CharacterApprox.from_sizes(self.finite_sizes(stage, stage - settle), stage)


def build_sigma2_inf(R: Predicate) -> Sigma2InfStructure:
    return Sigma2InfStructure(R)
