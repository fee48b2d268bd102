"""Structures driven by s-functions and s1-functions."""

from __future__ import annotations

from dataclasses import dataclass

from ..core import StagedPartition
from ..predicates import Predicate
from .common import BlocAutomatonViolation, BuildReport, SFunction
from .sigma2 import BEnumerator


class FromSStructure(StagedPartition):
    """Class i opens at stage i and has max(1, f(i, s)) elements at stage s.

    ``r`` extra classes are declared infinite at stage 0 and gain one
    element per stage.  A stage-free f opens each class at its final size,
    so the per-stage top-up is skipped.
    """

    def __init__(self, f: SFunction, r: int = 0):
        super().__init__()
        self.f = f
        self.r = r
        self.reps: list[int] = []

    def _stage(self, s: int) -> None:
        self.grow_roster()
        if s == 0:
            for _ in range(self.r):
                self.declare_infinite(self.new_class(1))
        if not self.f.stage_free:
            for i, cid in enumerate(self.reps):
                self.add(cid, self.f(i, s) - self.size_now(cid))
        cid = self.new_class(max(1, self.f(s, s)))
        self.reps.append(cid)


def build_from_s(f: SFunction, r: int = 0) -> FromSStructure:
    return FromSStructure(f, r)


# bloc automaton: state a class may move to from each state
LEGAL_TRANSITIONS = {
    None: {"active-class", "revived", "attached"},
    "active-class": {"inactive-bloc", "displaced"},
    "revived": {"inactive-bloc", "displaced"},
    "inactive-bloc": {"attached"},
    "displaced": {"revived", "attached"},
    "attached": set(),
}
WAITING = ("inactive-bloc", "displaced")


@dataclass
class QuadRecord:
    index: int
    quad: tuple
    active: bool
    checked_upto: int
    cid: int | None = None
    displaced_by: tuple | None = None  # (marker, size)


class FromS1Structure(StagedPartition):
    """Character of R with no infinite classes, steered by an s1-function.

    Each stage runs four phases.  (1) Admit b_t: an active (k, 1) quadruple
    that matches the current size of a marker class waits displaced,
    otherwise it gets a class of k elements.  (2) Classes of quadruples
    refuted at z = t are set aside as blocs.  (3) Waiting blocs, smallest
    first (ties by least representative), are attached to the least unused
    marker j <= t with f(j, t) at least the bloc size; on a stage with no
    waiting bloc a fresh marker class is opened instead.  (4) Marker
    classes grow to f(j, t); a (k', 1) class matching the new size is
    displaced and the (k, 1) quadruples displaced at the old size are
    revived.  Attaching runs again after growth.

    A marker never takes a size another marker class currently has; such
    growth waits a stage.
    """

    def __init__(self, f: SFunction, R: Predicate, stuck_factor: int = 10):
        if R.arity != 4:
            raise ValueError("R must have arity 4")
        super().__init__()
        self.f = f
        self.R = R
        self.stuck_factor = stuck_factor
        self.enum = BEnumerator(R)
        self.quads: list[QuadRecord] = []
        self.state: dict[int, str] = {}
        self.owner: dict[int, int] = {}
        self.markers: dict[int, int] = {}
        self._msize: dict[int, int] = {}  # marker -> current class size
        self._size_owner: dict[int, int] = {}  # size -> marker holding it
        self.marker_of: dict[int, int] = {}
        self.waiting: dict[int, int] = {}  # cid -> stage it started waiting
        self._holding1: dict[int, set] = {}  # size -> quads (n == 1) holding a live class
        self._displaced: dict[tuple, set] = {}  # (marker, size) -> quads
        self._live: list[QuadRecord] = []
        self.report = BuildReport()

    # -- bookkeeping ------------------------------------------------------
    def _set_state(self, cid: int, new: str) -> None:
        old = self.state.get(cid)
        self.report.transitions += 1
        if new not in LEGAL_TRANSITIONS[old]:
            self.report.illegal_transitions += 1
            raise BlocAutomatonViolation(f"class {cid}: {old} -> {new} at stage {self.stage}")
        self.state[cid] = new
        if new in WAITING:
            self.waiting.setdefault(cid, self.stage)
        else:
            self.waiting.pop(cid, None)
        self.log("bloc", cls=cid, old=old, new=new)

    def _set_marker_size(self, j: int, size: int) -> None:
        old = self._msize.get(j)
        if old is not None and self._size_owner.get(old) == j:
            del self._size_owner[old]
        self._msize[j] = size
        self._size_owner.setdefault(size, j)

    def _hold(self, q: QuadRecord) -> None:
        if q.quad[1] == 1:
            self._holding1.setdefault(q.quad[0], set()).add(q.index)

    def _release(self, q: QuadRecord) -> None:
        if q.quad[1] == 1:
            self._holding1.get(q.quad[0], set()).discard(q.index)

    def _displace(self, size: int, j: int) -> None:
        for qi in sorted(self._holding1.get(size, ())):
            q = self.quads[qi]
            self._release(q)
            self._set_state(q.cid, "displaced")
            q.displaced_by = (j, size)
            self._displaced.setdefault((j, size), set()).add(qi)
            self.log("displace", b=qi, marker=j, size=size)

    def _revive(self, j: int, size: int) -> None:
        pending = self._displaced.pop((j, size), set())
        other = self._size_owner
        for qi in sorted(pending):
            q = self.quads[qi]
            if not q.active:
                q.displaced_by = None
                continue
            if size in other:
                q.displaced_by = (other[size], size)
                self._displaced.setdefault(q.displaced_by, set()).add(qi)
                continue
            if q.cid is not None and self.state.get(q.cid) == "displaced" and self.size_now(q.cid) == size:
                self._set_state(q.cid, "revived")
            else:
                q.cid = self.new_class(size)
                self.owner[q.cid] = qi
                self._set_state(q.cid, "revived")
            q.displaced_by = None
            self._hold(q)
            self.log("revive", b=qi, cls=q.cid, size=size)

    def _free_marker(self, t: int, at_least: int):
        taken = self._size_owner
        for j in range(t + 1):
            if j in self.markers:
                continue
            v = self.f(j, t)
            if v >= at_least and v not in taken:
                return j, v
        return None

    def _attach_waiting(self, t: int) -> int:
        attached = 0
        while self.waiting:
            cid = min(self.waiting, key=lambda c: (self.size_now(c), self.representative(c)))
            size = self.size_now(cid)
            found = self._free_marker(t, size)
            if found is None:
                break
            j, v = found
            self.add(cid, v - size)
            self._set_state(cid, "attached")
            self.markers[j] = cid
            self.marker_of[cid] = j
            self._set_marker_size(j, v)
            self.log("attach", cls=cid, marker=j, size=v)
            self._displace(v, j)
            attached += 1
        return attached

    # -- stage program ----------------------------------------------------
    def _stage(self, t: int) -> None:
        R, f = self.R, self.f
        # phase 1
        quad = self.enum[t]
        k, n, w, _ = quad
        active = all(R(k, n, w, z) for z in range(t + 1))
        q = QuadRecord(t, quad, active, t + 1)
        self.quads.append(q)
        if active:
            self._live.append(q)
            blocking = self._size_owner.get(k) if n == 1 else None
            if blocking is not None:
                q.displaced_by = (blocking, k)
                self._displaced.setdefault(q.displaced_by, set()).add(t)
                self.log("admit-displaced", b=t, quad=list(quad), marker=blocking)
            else:
                q.cid = self.new_class(k)
                self.owner[q.cid] = t
                self._set_state(q.cid, "active-class")
                self._hold(q)
                self.log("admit", b=t, quad=list(quad), cls=q.cid)
        # phase 2
        still = []
        for q in self._live:
            if q.index == t:
                still.append(q)
                continue
            qk, qn, qw, _ = q.quad
            if R(qk, qn, qw, t):
                q.checked_upto = t + 1
                still.append(q)
                continue
            q.active = False
            self.log("refute", b=q.index, z=t)
            if q.cid is not None and self.state.get(q.cid) in ("active-class", "revived"):
                self._release(q)
                self._set_state(q.cid, "inactive-bloc")
            if q.displaced_by is not None:
                self._displaced.get(q.displaced_by, set()).discard(q.index)
                q.displaced_by = None
        self._live = still
        # phase 3
        if self._attach_waiting(t) == 0 and not self.waiting:
            found = self._free_marker(t, 1)
            if found is not None:
                j, v = found
                cid = self.new_class(v)
                self._set_state(cid, "attached")
                self.markers[j] = cid
                self.marker_of[cid] = j
                self._set_marker_size(j, v)
                self.log("open-marker", cls=cid, marker=j, size=v)
                self._displace(v, j)
        # phase 4; a column that ignores the stage never moves after attaching
        for j in ([] if f.stage_free else sorted(self.markers)):
            cid = self.markers[j]
            old = self._msize[j]
            target = f(j, t)
            if target <= old or target in self._size_owner:
                continue
            self.add(cid, target - old)
            self._set_marker_size(j, target)
            self.log("grow", marker=j, old=old, new=target)
            self._displace(target, j)
            self._revive(j, old)
        self._attach_waiting(t)
        self._audit(t)

    def _audit(self, t: int) -> None:
        if len(self._size_owner) != len(self._msize):
            self.report.duplicate_marker_sizes += 1
        horizon = self.stuck_factor
        for cid, since in self.waiting.items():
            if t - since > horizon * (since + 1) and cid not in self.report.stuck_blocs:
                self.report.stuck_blocs.append(cid)
                self.log("stuck-bloc", cls=cid, since=since)


def build_from_s1(f: SFunction, R: Predicate) -> FromS1Structure:
    return FromS1Structure(f, R)
