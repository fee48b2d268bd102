"""Stage-driven equivalence structures.

A structure lives on the natural numbers and is built in stages.  Elements
are only ever added to classes; no element changes class and classes never
merge, so the state at stage ``s`` is always a restriction of the state at
any later stage.  Everything the analyses and isomorphism engines need is
asked of the :class:`Structure` interface below.
"""

from __future__ import annotations

import bisect
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Iterator


class _Omega:
    """Token for an infinite class size.  Deliberately not an integer."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "OMEGA"

    def __reduce__(self):
        return (_Omega, ())


OMEGA = _Omega()


def is_omega(value) -> bool:
    return value is OMEGA


class EqcatError(Exception):
    """Base class for library errors."""


class AuditViolation(EqcatError):
    """A runtime audit of a construction failed."""


class BudgetExceeded(AuditViolation):
    """An element was not placed within the hard stage budget."""


class Unplaced(EqcatError):
    def __init__(self, element, stage):
        super().__init__(f"element {element} is not placed by stage {stage}")
        self.element = element
        self.stage = stage


@dataclass(frozen=True)
class SnapshotClass:
    id: int
    infinite: bool
    members: tuple[int, ...]


@dataclass(frozen=True)
class Snapshot:
    stage: int
    classes: tuple[SnapshotClass, ...]

    @property
    def placement(self) -> dict[int, int]:
        return {x: c.id for c in self.classes for x in c.members}

    @property
    def class_members(self) -> dict[int, tuple[int, ...]]:
        return {c.id: c.members for c in self.classes}

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "classes": [
                {"id": c.id, "infinite": c.infinite, "members": list(c.members)}
                for c in self.classes
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    def restricts(self, later: "Snapshot") -> bool:
        """True if every placement here persists unchanged in ``later``."""
        later_members = later.class_members
        for c in self.classes:
            m = later_members.get(c.id)
            if m is None or m[: len(c.members)] != c.members:
                return False
        return True


@dataclass(frozen=True)
class CharacterApprox:
    stage: int
    pairs: frozenset

    @classmethod
    def from_sizes(cls, sizes: Iterable[int], stage: int) -> "CharacterApprox":
        counts = Counter(sizes)
        return cls(stage, frozenset((k, n) for k, c in counts.items() for n in range(1, c + 1)))

    def to_dict(self) -> dict:
        return {"stage": self.stage, "pairs": [list(p) for p in sorted(self.pairs)]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    def restricted(self, max_size: int, max_count: int) -> frozenset:
        return frozenset((k, n) for k, n in self.pairs if k <= max_size and n <= max_count)


@dataclass(frozen=True)
class SizeVerdict:
    """Outcome of a bounded size query.

    ``kind`` is ``"impossible"`` (more than ``k`` members were found, final),
    ``"current"`` (``count`` members seen so far, a lower bound only) or
    ``"unknown"`` (the element was not placed within the budget).
    """

    kind: str
    k: int
    count: int
    budget: int


def validate_character(pairs) -> bool:
    """Downward closure in the count coordinate; sizes and counts start at 1."""
    pairs = set(pairs)
    for k, n in pairs:
        if k < 1 or n < 1:
            return False
        if n > 1 and (k, n - 1) not in pairs:
            return False
    return True


def character_of_sizes(sizes: Iterable[int]) -> frozenset:
    return CharacterApprox.from_sizes(sizes, 0).pairs


class Structure:
    """Interface shared by built structures and coded unions of them.

    Subclasses provide ``run_to``, ``placement_stage``, ``class_key``,
    ``class_size``, ``class_infinite``, ``classes`` and ``class_members``.
    Class keys are hashable and stable; ``classes(s)`` lists them in
    creation order, which fixes the dense snapshot ids.
    """

    hard_budget: int = 200_000

    # -- primitives -------------------------------------------------------
    def run_to(self, stage: int) -> None:
        raise NotImplementedError

    def placement_stage(self, x: int) -> int:
        """Stage at which ``x`` is placed; replays as far as needed."""
        raise NotImplementedError

    def class_key(self, x: int, stage: int) -> Hashable | None:
        raise NotImplementedError

    def class_size(self, key: Hashable, stage: int) -> int:
        raise NotImplementedError

    def class_infinite(self, key: Hashable, stage: int) -> bool:
        raise NotImplementedError

    def classes(self, stage: int) -> list:
        raise NotImplementedError

    def class_members(self, key: Hashable, stage: int) -> list[int]:
        raise NotImplementedError

    def class_created(self, key: Hashable) -> int:
        raise NotImplementedError

    # -- derived ----------------------------------------------------------
    def final_key(self, x: int) -> Hashable:
        """Class of ``x``, which never changes once ``x`` is placed."""
        cache = self.__dict__.setdefault("_final_keys", {})
        key = cache.get(x)
        if key is None:
            s = self.placement_stage(x)
            key = self.class_key(x, s)
            cache[x] = key
        return key

    def is_placed(self, x: int, stage: int) -> bool:
        self.run_to(stage)
        return self.class_key(x, stage) is not None

    def related(self, a: int, b: int) -> bool:
        if a == b:
            self.final_key(a)
            return True
        return self.final_key(a) == self.final_key(b)

    def card_at_stage(self, a: int, s: int) -> int:
        """Number of ``x <= s`` in the class of ``a``."""
        key = self.final_key(a)
        return sum(1 for x in range(s + 1) if self.final_key_or_none(x) == key)

    def final_key_or_none(self, x: int):
        """Like ``final_key`` but ``None`` for elements that are never placed."""
        return self.final_key(x)

    def size_query(self, a: int, k: int, budget: int) -> SizeVerdict:
        if k < 1:
            raise ValueError("size bound must be at least 1")
        self.run_to(budget)
        key = self.class_key(a, budget)
        if key is None:
            return SizeVerdict("unknown", k, 0, budget)
        count = self.class_size(key, budget)
        if count > k:
            return SizeVerdict("impossible", k, count, budget)
        return SizeVerdict("current", k, count, budget)

    def finite_sizes(self, stage: int, created_by: int | None = None) -> list[int]:
        self.run_to(stage)
        out = []
        for key in self.classes(stage):
            if created_by is not None and self.class_created(key) > created_by:
                continue
            if not self.class_infinite(key, stage):
                out.append(self.class_size(key, stage))
        return out

    def character_at_stage(self, s: int) -> CharacterApprox:
        """Stage-``s`` character; classes flagged infinite are left out."""
        return CharacterApprox.from_sizes(self.finite_sizes(s), s)

    def infinite_count(self, stage: int) -> int:
        self.run_to(stage)
        return sum(1 for key in self.classes(stage) if self.class_infinite(key, stage))

    def snapshot(self, stage: int) -> Snapshot:
        self.run_to(stage)
        classes = tuple(
            SnapshotClass(i, self.class_infinite(key, stage), tuple(self.class_members(key, stage)))
            for i, key in enumerate(self.classes(stage))
        )
        return Snapshot(stage, classes)


# ---------------------------------------------------------------------------
# Concrete storage for builders


class Pool:
    """Elements ``modulus * q + residue`` handed out in increasing order of ``q``."""

    def __init__(self, name: str, modulus: int = 1, residue: int = 0):
        if not 0 <= residue < modulus:
            raise ValueError("residue out of range")
        self.name = name
        self.modulus = modulus
        self.residue = residue
        self.next_index = 0
        # runs are contiguous index ranges: parallel arrays for bisect
        self.run_starts: list[int] = []
        self.runs: list[tuple] = []

    def owns(self, x: int) -> bool:
        return x % self.modulus == self.residue

    def element(self, q: int) -> int:
        return self.modulus * q + self.residue

    def index(self, x: int) -> int:
        return (x - self.residue) // self.modulus

    def take(self, count: int, run: tuple) -> int:
        start = self.next_index
        self.run_starts.append(start)
        self.runs.append((start, count) + run)
        self.next_index += count
        return start

    def find(self, q: int):
        i = bisect.bisect_right(self.run_starts, q) - 1
        if i < 0:
            return None
        run = self.runs[i]
        if q >= run[0] + run[1]:
            return None
        return run


@dataclass
class _ClassRecord:
    cid: int
    created: int
    size_stages: list = field(default_factory=list)
    sizes: list = field(default_factory=list)
    runs: list = field(default_factory=list)  # (seq, pool, start_q, count)
    roster_pos: int | None = None
    infinite_since: int | None = None


class StagedPartition(Structure):
    """Append-only partition filled in by a deterministic stage program.

    Subclasses implement ``_stage(s)`` using ``new_class``, ``add``,
    ``declare_infinite`` and ``grow_roster``.  Classes put on the roster
    receive one element at every later call of ``grow_roster``; such growth is
    stored as a single run so that the quadratic element count of the
    infinite families costs linear memory.
    """

    def __init__(self, pools: Iterable[Pool] = (), hard_budget: int | None = None):
        self.pools = list(pools) or [Pool("main")]
        self._by_name = {p.name: p for p in self.pools}
        if hard_budget is not None:
            self.hard_budget = hard_budget
        self._records: list[_ClassRecord] = []
        self._roster: list[int] = []
        self._grow_stages: list[int] = []
        self._grow_lens: list[int] = []
        self._grow_seqs: list[int] = []
        self._seq = 0
        self.stage = -1
        self.events: list[tuple] = []

    # -- stage program ----------------------------------------------------
    def _stage(self, s: int) -> None:
        raise NotImplementedError

    def run_to(self, stage: int) -> None:
        while self.stage < stage:
            if self.stage + 1 > self.hard_budget:
                raise BudgetExceeded(f"stage {self.stage + 1} beyond hard budget {self.hard_budget}")
            self.stage += 1
            self._stage(self.stage)

    def log(self, kind: str, **payload) -> None:
        self.events.append((self.stage, kind, payload))

    def pool(self, name: str | None = None) -> Pool:
        return self.pools[0] if name is None else self._by_name[name]

    def _pool_of(self, x: int) -> Pool | None:
        for p in self.pools:
            if p.owns(x):
                return p
        return None

    def _bump(self, rec: _ClassRecord, count: int) -> None:
        prev = rec.sizes[-1] if rec.sizes else 0
        if rec.size_stages and rec.size_stages[-1] == self.stage:
            rec.sizes[-1] = prev + count
        else:
            rec.size_stages.append(self.stage)
            rec.sizes.append(prev + count)

    def new_class(self, count: int = 1, pool: str | None = None) -> int:
        if count < 1:
            raise ValueError("a class needs at least one element")
        cid = len(self._records)
        rec = _ClassRecord(cid, self.stage)
        self._records.append(rec)
        self.add(cid, count, pool)
        return cid

    def add(self, cid: int, count: int, pool: str | None = None) -> None:
        if count <= 0:
            return
        p = self.pool(pool)
        rec = self._records[cid]
        self._seq += 1
        start = p.take(count, ("class", cid, self.stage))
        rec.runs.append((self._seq, p, start, count))
        self._bump(rec, count)

    def declare_infinite(self, cid: int) -> None:
        rec = self._records[cid]
        if rec.infinite_since is not None:
            return
        rec.infinite_since = self.stage
        rec.roster_pos = len(self._roster)
        self._roster.append(cid)

    def grow_roster(self, pool: str | None = None) -> None:
        n = len(self._roster)
        if n == 0:
            return
        p = self.pool(pool)
        self._seq += 1
        p.take(n, ("roster", self.stage))
        self._grow_stages.append(self.stage)
        self._grow_lens.append(n)
        self._grow_seqs.append((self._seq, p, p.next_index - n))

    def size_now(self, cid: int) -> int:
        return self.class_size(cid, self.stage)

    def representative(self, cid: int) -> int:
        _, p, start, _ = self._records[cid].runs[0]
        return p.element(start)

    @property
    def class_count(self) -> int:
        return len(self._records)

    # -- Structure primitives ---------------------------------------------
    def placement_stage(self, x: int) -> int:
        p = self._pool_of(x)
        if p is None:
            raise BudgetExceeded(f"element {x} belongs to no pool")
        q = p.index(x)
        while p.next_index <= q:
            self.run_to(self.stage + 1)
        run = p.find(q)
        return run[-1]

    def class_key(self, x: int, stage: int):
        p = self._pool_of(x)
        if p is None:
            return None
        run = p.find(p.index(x))
        if run is None or run[-1] > stage:
            return None
        if run[2] == "class":
            return run[3]
        return self._roster[p.index(x) - run[0]]

    def class_size(self, cid: int, stage: int) -> int:
        rec = self._records[cid]
        if rec.created > stage:
            return 0
        i = bisect.bisect_right(rec.size_stages, stage)
        size = rec.sizes[i - 1] if i else 0
        if rec.roster_pos is not None:
            hi = bisect.bisect_right(self._grow_stages, stage)
            lo = bisect.bisect_right(self._grow_lens, rec.roster_pos)
            size += max(0, hi - lo)
        return size

    def class_infinite(self, cid: int, stage: int) -> bool:
        since = self._records[cid].infinite_since
        return since is not None and since <= stage

    def classes(self, stage: int) -> list[int]:
        return [r.cid for r in self._records if r.created <= stage]

    def class_created(self, cid: int) -> int:
        return self._records[cid].created

    def class_members(self, cid: int, stage: int) -> list[int]:
        rec = self._records[cid]
        items = []
        for seq, p, start, count in rec.runs:
            run = p.find(start)
            if run[-1] <= stage:
                items.extend((seq, p.element(q)) for q in range(start, start + count))
        if rec.roster_pos is not None:
            hi = bisect.bisect_right(self._grow_stages, stage)
            lo = bisect.bisect_right(self._grow_lens, rec.roster_pos)
            for i in range(lo, hi):
                seq, p, start = self._grow_seqs[i]
                items.append((seq, p.element(start + rec.roster_pos)))
        items.sort()
        return [x for _, x in items]

    def iter_events(self) -> Iterator[dict]:
        for stage, kind, payload in self.events:
            yield {"stage": stage, "event": kind, **payload}


class FinitePartitionStructure(StagedPartition):
    """A fixed finite partition of ``{0..n}`` placed entirely at stage 0.

    Handy for tests and for the frozen examples.  Elements beyond ``n`` are
    never placed.
    """

    def __init__(self, blocks: Iterable[Iterable[int]]):
        blocks = [sorted(b) for b in blocks]
        elems = sorted(x for b in blocks for x in b)
        if elems != list(range(len(elems))):
            raise ValueError("blocks must partition an initial segment of the naturals")
        super().__init__([Pool("main")], hard_budget=10**9)
        self._blocks = sorted(blocks, key=lambda b: b[0])
        self._owner = {x: i for i, b in enumerate(self._blocks) for x in b}
        self._n = len(elems)

    def _stage(self, s: int) -> None:
        if s == 0:
            for i, b in enumerate(self._blocks):
                self._records.append(_ClassRecord(i, 0))
                self._records[i].size_stages.append(0)
                self._records[i].sizes.append(len(b))

    def placement_stage(self, x: int) -> int:
        if x >= self._n:
            raise BudgetExceeded(f"element {x} is never placed in a finite partition")
        self.run_to(0)
        return 0

    def class_key(self, x: int, stage: int):
        if stage < 0 or x >= self._n:
            return None
        return self._owner[x]

    def class_members(self, cid: int, stage: int) -> list[int]:
        return list(self._blocks[cid]) if stage >= 0 else []

    def final_key_or_none(self, x: int):
        return self._owner.get(x)
