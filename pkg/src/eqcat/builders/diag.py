"""Two isomorphic structures built against a finite family of limit guesses.

Both sides run the same construction: one class per B-quadruple (declared
infinite once refuted), an infinite family of infinite classes, and one
class parked on each column j of an s1-function f, kept at f(j, s)
elements.  Witness x_e = 4e + 3 starts its own column class at stage e.

Requirement R_e watches the guess y = phi_e(x_e).  It is met when the class
of y in B2 is infinite, or when it is a column class on column j2 while
x_e sits on a column j1 > j2 in B1; strictly increasing limits then give
the two classes different final sizes.  Otherwise R_e acts: a quadruple
class holding y in B2 is moved onto a fresh column (the quadruple gets a
new generation class of the same size), and x_e is moved in B1 onto a fresh
column above j2 (its old column gets a new class of the same size).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from ..core import BudgetExceeded, Pool, StagedPartition
from ..predicates import Predicate
from .common import SFunction
from .sigma2 import BEnumerator


# ---------------------------------------------------------------------------
# opponents: stage approximations phi(x, s) -> value or None (diverged)


class Opponent:
    name = "opponent"

    def __call__(self, x: int, s: int):
        raise NotImplementedError

    def to_spec(self) -> dict:
        return {"kind": self.name}


class IdentityGuess(Opponent):
    """phi(x, s) = x + shift once s >= settle, diverged before."""

    name = "identity"

    def __init__(self, shift: int = 0, settle: int = 0):
        self.shift = shift
        self.settle = settle

    def __call__(self, x, s):
        return x + self.shift if s >= self.settle else None

    def to_spec(self):
        return {"kind": self.name, "shift": self.shift, "settle": self.settle}


class Diverged(Opponent):
    name = "diverged"

    def __call__(self, x, s):
        return None


class ChangeOfMind(Opponent):
    """Guesses x + first before stage ``switch`` and x + second from then on."""

    name = "change"

    def __init__(self, first: int, second: int, switch: int):
        self.first, self.second, self.switch = first, second, switch

    def __call__(self, x, s):
        return x + (self.first if s < self.switch else self.second)

    def to_spec(self):
        return {"kind": self.name, "first": self.first, "second": self.second, "switch": self.switch}


class FunctionOpponent(Opponent):
    def __init__(self, fn: Callable[[int, int], object], name: str = "function"):
        self.fn = fn
        self.name = name

    def __call__(self, x, s):
        return self.fn(x, s)


def opponent_from_spec(spec: dict) -> Opponent:
    kind = spec.get("kind")
    if kind == "identity":
        return IdentityGuess(int(spec.get("shift", 0)), int(spec.get("settle", 0)))
    if kind == "diverged":
        return Diverged()
    if kind == "change":
        return ChangeOfMind(int(spec["first"]), int(spec["second"]), int(spec["switch"]))
    raise ValueError(f"unknown opponent kind {kind!r}")


# ---------------------------------------------------------------------------


class DiagSide(StagedPartition):
    """One of the two structures; its stages are driven by the owning pair."""

    def __init__(self, pair: "DiagPair", name: str):
        super().__init__([Pool("main", 2, 0), Pool("family", 4, 1), Pool("wit", 4, 3)])
        self.pair = pair
        self.name = name
        self.records: list[list] = []  # per quadruple: [quad, cid, checked_upto, generation]
        self.live: list[int] = []
        self.quad_of: dict[int, int] = {}  # class id -> quadruple index it serves
        self.col: dict[int, int] = {}  # column -> class id
        self.col_of: dict[int, int] = {}  # class id -> column
        self.witness: dict[int, int] = {}  # e -> class id of x_e
        self.filled = 0  # every column below this is occupied

    def run_to(self, stage: int) -> None:
        self.pair.run_to(stage)

    def _stage(self, s: int) -> None:  # pragma: no cover - driven by the pair
        raise RuntimeError("diag sides are advanced by their pair")

    # column helpers
    def occupy(self, j: int, cid: int) -> None:
        self.col[j] = cid
        self.col_of[cid] = j

    def vacate(self, cid: int) -> int:
        j = self.col_of.pop(cid)
        del self.col[j]
        return j

    def free_column(self, t: int, size: int, above: int = -1, limit: int = 100_000):
        f = self.pair.f
        j = max(above + 1, self.filled)
        while j <= limit:
            if j not in self.col and f(j, t) >= size:
                return j
            j += 1
        return None


@dataclass
class DiagPair:
    f: SFunction
    R: Predicate
    opponents: list
    requirement_log: list = field(default_factory=list)

    def __post_init__(self):
        if self.R.arity != 4:
            raise ValueError("R must have arity 4")
        self.enum = BEnumerator(self.R)
        self.B1 = DiagSide(self, "B1")
        self.B2 = DiagSide(self, "B2")
        self.stage = -1
        self.hard_budget = self.B1.hard_budget
        self.acted: dict[int, int] = {e: 0 for e in range(len(self.opponents))}

    @staticmethod
    def witness(e: int) -> int:
        return 4 * e + 3

    def run_to(self, stage: int) -> None:
        while self.stage < stage:
            t = self.stage + 1
            if t > self.hard_budget:
                raise BudgetExceeded(f"stage {t} beyond hard budget {self.hard_budget}")
            self.stage = t
            for side in (self.B1, self.B2):
                side.stage = t
                self._grow_step(side, t)
                self._columns_step(side, t)
            for e in range(len(self.opponents)):
                self._requirement(e, t)

    # -- the shared construction ------------------------------------------
    def _grow_step(self, side: DiagSide, t: int) -> None:
        R = self.R
        side.grow_roster("main")
        still = []
        for qi in side.live:
            rec = side.records[qi]
            (k, n, w, _), cid, z = rec[0], rec[1], rec[2]
            ok = True
            while z < t:
                if not R(k, n, w, z):
                    ok = False
                    break
                z += 1
            rec[2] = z
            if ok:
                still.append(qi)
                continue
            side.declare_infinite(cid)
            side.add(cid, (t - 1) - side.size_now(cid), "main")
            side.log("declare-infinite", b=qi, z=z)
        side.live = still
        if t % 2 == 0:
            side.declare_infinite(side.new_class(1, "family"))
        quad = self.enum[t]
        cid = side.new_class(quad[0], "main")
        side.records.append([quad, cid, 0, 0])
        side.quad_of[cid] = t
        side.live.append(t)

    def _columns_step(self, side: DiagSide, t: int) -> None:
        f = self.f
        cid = side.new_class(1, "wit")
        side.witness[t] = cid
        j = side.free_column(t, 1)
        side.occupy(j, cid)
        side.add(cid, f(j, t) - 1, "main")
        # columns are only ever vacated and refilled together, so a prefix pointer suffices
        while side.filled <= t:
            if side.filled not in side.col:
                side.occupy(side.filled, side.new_class(max(1, f(side.filled, t)), "main"))
            side.filled += 1
        if not f.stage_free:
            for j, cid in side.col.items():
                side.add(cid, f(j, t) - side.size_now(cid), "main")

    def _renew(self, side: DiagSide, cid: int, t: int) -> None:
        """Give the role of ``cid`` (quadruple or column) to a fresh class of the same size."""
        size = side.size_now(cid)
        fresh = side.new_class(size, "main")
        if cid in side.quad_of:
            qi = side.quad_of.pop(cid)
            rec = side.records[qi]
            rec[1] = fresh
            rec[3] += 1
            side.quad_of[fresh] = qi
            side.log("permission", b=qi, generation=rec[3], cls=fresh, size=size)
        else:
            j = side.vacate(cid)
            side.occupy(j, fresh)
            side.log("permission", column=j, cls=fresh, size=size)

    def _move(self, side: DiagSide, cid: int, j: int, t: int) -> None:
        self._renew(side, cid, t)
        side.occupy(j, cid)
        side.add(cid, self.f(j, t) - side.size_now(cid), "main")

    def _requirement(self, e: int, t: int) -> None:
        x = self.witness(e)
        if t < e:
            return
        phi = self.opponents[e]
        if any(phi(v, t) is None for v in range(x + 1)):
            return
        y = phi(x, t)
        B1, B2 = self.B1, self.B2
        cy = B2.class_key(y, t) if y >= 0 else None
        if cy is None:
            return
        if B2.class_infinite(cy, t):
            return
        cx = B1.witness[e]
        j1 = B1.col_of[cx]
        j2 = B2.col_of.get(cy)
        if j2 is not None and j1 > j2:
            return
        moved_y = False
        if j2 is None:
            j2 = B2.free_column(t, B2.size_now(cy))
            if j2 is None:
                self.requirement_log.append({"stage": t, "e": e, "event": "no-column", "side": "B2"})
                return
            self._move(B2, cy, j2, t)
            moved_y = True
        if j1 <= j2:
            new = B1.free_column(t, B1.size_now(cx), above=j2)
            if new is None:
                self.requirement_log.append({"stage": t, "e": e, "event": "no-column", "side": "B1"})
                return
            self._move(B1, cx, new, t)
            j1 = new
        self.acted[e] += 1
        entry = {"stage": t, "e": e, "event": "attention", "witness": x, "guess": y,
                 "b1_column": j1, "b2_column": j2, "moved_guess": moved_y,
                 "b1_size": B1.size_now(cx), "b2_size": B2.size_now(cy)}
        self.requirement_log.append(entry)
        B1.log("attention", e=e, column=j1)
        B2.log("attention", e=e, column=j2)

    # -- reporting ----------------------------------------------------------
    def requirement_status(self, e: int, budget: int) -> dict:
        """Where R_e stands at ``budget``, judged from the stage-``budget`` state."""
        self.run_to(budget)
        x = self.witness(e)
        phi = self.opponents[e]
        y = phi(x, budget)
        out = {"e": e, "witness": x, "guess": y, "attention": self.acted[e], "diverged": y is None}
        if y is None:
            return out
        cx = self.B1.final_key(x)
        cy = self.B2.final_key(y)
        half = budget // 2
        s1_now, s1_half = self.B1.class_size(cx, budget), self.B1.class_size(cx, half)
        s2_now, s2_half = self.B2.class_size(cy, budget), self.B2.class_size(cy, half)
        inf2 = self.B2.class_infinite(cy, budget)
        out.update({
            "b1_size": s1_now, "b2_size": s2_now, "b2_infinite": inf2,
            "b1_column": self.B1.col_of.get(cx), "b2_column": self.B2.col_of.get(cy),
            "frozen": s1_now == s1_half and (inf2 or s2_now == s2_half),
        })
        out["separated"] = inf2 or (out["frozen"] and s1_now != s2_now)
        return out


def build_diag_pair(f: SFunction, R: Predicate, opponents):
    pair = DiagPair(f, R, list(opponents))
    return pair.B1, pair.B2, pair.requirement_log
