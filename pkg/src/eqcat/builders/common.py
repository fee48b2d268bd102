"""Shared inputs for the builders: s-functions, bounded specs, enumerable sets."""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from ..core import OMEGA, AuditViolation, EqcatError, Pool, StagedPartition, is_omega
from ..predicates import _HELPERS, _Parser


class MonotonicityViolation(AuditViolation):
    pass


class CharacterViolation(AuditViolation):
    pass


class BlocAutomatonViolation(AuditViolation):
    pass


class SpecMismatch(EqcatError):
    pass


def parse_function(source: str, variables: Sequence[str] = ("i", "s")) -> Callable[..., int]:
    """Compile an arithmetic DSL expression; undefined values read as 0."""
    parser = _Parser(source, variables)
    node = parser.sum()
    tok = parser.peek()
    if tok[0] != "end":
        from ..predicates import PredicateSyntaxError

        raise PredicateSyntaxError(tok[2], f"unexpected {tok[1]!r}")
    params = ", ".join(f"_v{i}" for i in range(len(variables)))
    fn = eval(compile(f"lambda {params}: {node.code}", "<function>", "eval"), dict(_HELPERS))

    def total(*args):
        value = fn(*args)
        return 0 if value is None else value

    return total


class SFunction:
    """An audited function f(i, s), nondecreasing in s.

    Every probed value is cached and compared with the nearest probes of the
    same column, so any drop between probed stages aborts the run.
    ``kind`` is ``"s"`` or ``"s1"``; for ``"s1"`` the limits are supposed
    to increase strictly in i, which :meth:`audit_limits` checks on the
    values observed so far.
    """

    def __init__(self, fn: Callable[[int, int], int], kind: str = "s", source: str | None = None,
                 name: str | None = None):
        if kind not in ("s", "s1"):
            raise ValueError("kind must be 's' or 's1'")
        self.fn = fn
        self.kind = kind
        self.source = source
        self.name = name or source or getattr(fn, "__name__", "f")
        self._probed: dict[int, list] = {}

    @classmethod
    def from_dsl(cls, source: str, kind: str = "s") -> "SFunction":
        return cls(parse_function(source), kind, source=source)

    def __call__(self, i: int, s: int) -> int:
        # per column: sorted runs [lo, hi, value] of consecutive probed stages
        runs = self._probed.setdefault(i, [])
        if runs:
            # builders probe a column at consecutive stages, so try the last run first
            last = runs[-1]
            if last[0] <= s <= last[1]:
                return last[2]
            if last[1] == s - 1:
                value = self.fn(i, s)
                if value < last[2]:
                    raise MonotonicityViolation(
                        f"{self.name}({i},{last[1]}) = {last[2]} > {self.name}({i},{s}) = {value}")
                if value == last[2]:
                    last[1] = s
                else:
                    runs.append([s, s, value])
                return value
        pos = bisect.bisect_right(runs, [s, float("inf")])
        if pos and runs[pos - 1][1] >= s:
            return runs[pos - 1][2]
        value = self.fn(i, s)
        if value < 0:
            raise MonotonicityViolation(f"{self.name}({i},{s}) = {value} is negative")
        prev = runs[pos - 1] if pos else None
        nxt = runs[pos] if pos < len(runs) else None
        if prev is not None and prev[2] > value:
            raise MonotonicityViolation(
                f"{self.name}({i},{prev[1]}) = {prev[2]} > {self.name}({i},{s}) = {value}")
        if nxt is not None and nxt[2] < value:
            raise MonotonicityViolation(
                f"{self.name}({i},{s}) = {value} > {self.name}({i},{nxt[0]}) = {nxt[2]}")
        if prev is not None and prev[1] == s - 1 and prev[2] == value:
            prev[1] = s
            if nxt is not None and nxt[0] == s + 1 and nxt[2] == value:
                prev[1] = nxt[1]
                del runs[pos]
        elif nxt is not None and nxt[0] == s + 1 and nxt[2] == value:
            nxt[0] = s
        else:
            runs.insert(pos, [s, s, value])
        return value

    @property
    def stage_free(self) -> bool:
        """True when the DSL source never mentions the stage variable."""
        if self.source is None:
            return False
        return re.search(r"\bs\b", self.source) is None

    def audit_limits(self, indices: int, stage: int, window: int | None = None) -> None:
        """Check strict increase among indices that look settled at ``stage``."""
        if self.kind != "s1":
            return
        window = window if window is not None else max(1, stage // 2)
        settled = []
        for i in range(indices):
            v = self(i, stage)
            if self(i, max(0, stage - window)) == v:
                settled.append((i, v))
        for (i, a), (j, b) in zip(settled, settled[1:]):
            if a >= b:
                raise MonotonicityViolation(
                    f"observed limits of {self.name} not increasing: f({i})={a}, f({j})={b}")

    def to_spec(self) -> dict:
        if self.source is None:
            return {"name": self.name, "kind": self.kind}
        return {"dsl": self.source, "kind": self.kind}


def skip_index(f: SFunction, index: int) -> SFunction:
    """The s1-function with column ``index`` removed."""

    def g(j, s):
        return f(j, s) if j < index else f(j + 1, s)

    out = SFunction(g, f.kind, name=f"{f.name}-skip{index}")
    if f.source is not None:
        out.source = None
    return out


@dataclass(frozen=True)
class BoundedCharSpec:
    repeat_sizes: frozenset = frozenset()
    fixed_sizes: tuple = ()  # ((size, count), ...)
    r: object = 0  # natural number or OMEGA

    def __post_init__(self):
        object.__setattr__(self, "repeat_sizes", frozenset(self.repeat_sizes))
        object.__setattr__(self, "fixed_sizes", tuple(tuple(p) for p in self.fixed_sizes))
        if any(k < 1 for k in self.repeat_sizes):
            raise ValueError("sizes start at 1")
        for size, count in self.fixed_sizes:
            if size < 1 or count < 1:
                raise ValueError("fixed sizes and counts start at 1")
        if not (is_omega(self.r) or (isinstance(self.r, int) and self.r >= 0)):
            raise ValueError("r must be a natural number or OMEGA")

    def to_spec(self) -> dict:
        return {"repeat": sorted(self.repeat_sizes), "fixed": [list(p) for p in self.fixed_sizes],
                "infinite": "omega" if is_omega(self.r) else self.r}

    @classmethod
    def from_spec(cls, spec: dict) -> "BoundedCharSpec":
        r = spec.get("infinite", 0)
        return cls(frozenset(spec.get("repeat", ())), tuple(tuple(p) for p in spec.get("fixed", ())),
                   OMEGA if r == "omega" else int(r))


class EnumerableSet:
    """A monotone stage enumeration ``stage -> finite set``.

    ``at(s)`` is the union of everything enumerated by stage s.  The first
    stage an element shows up is remembered, and later stages may not drop
    it.
    """

    def __init__(self, fn: Callable[[int], Iterable[int]], name: str = "M"):
        self.fn = fn
        self.name = name
        self._computed = 0
        self._order: list[int] = []
        self._first: dict[int, int] = {}
        self._by_stage: dict[int, list] = {}

    def _advance(self, s: int) -> None:
        while self._computed <= s:
            t = self._computed
            for x in sorted(set(self.fn(t))):
                if x not in self._first:
                    self._first[x] = t
                    self._order.append(x)
                    self._by_stage.setdefault(t, []).append(x)
            self._computed += 1

    def at(self, s: int) -> frozenset:
        self._advance(s)
        return frozenset(x for x, t in self._first.items() if t <= s)

    def enumerated_at(self, x: int, s: int) -> bool:
        self._advance(s)
        t = self._first.get(x)
        return t is not None and t <= s

    def first_stage(self, x: int, s: int) -> int | None:
        """Stage at which ``x`` was enumerated, if by stage ``s``."""
        return self._first.get(x) if self.enumerated_at(x, s) else None

    def new_at(self, s: int) -> list[int]:
        """Elements first enumerated at exactly stage s."""
        self._advance(s)
        return list(self._by_stage.get(s, ()))

    def order(self, s: int) -> list[int]:
        """Distinct elements in enumeration order up to stage s."""
        self._advance(s)
        return [x for x in self._order if self._first[x] <= s]

    @classmethod
    def finite(cls, schedule: dict[int, int], name: str = "M") -> "EnumerableSet":
        """``schedule`` maps element -> stage at which it is enumerated."""
        return cls(lambda t: [x for x, st in schedule.items() if st <= t], name)

    @classmethod
    def empty(cls) -> "EnumerableSet":
        return cls(lambda t: (), "empty")


class IdentityStructure(StagedPartition):
    """Every class a singleton; element s is placed at stage s."""

    def _stage(self, s: int) -> None:
        self.new_class(1)


class BlockStructure(StagedPartition):
    """Infinitely many classes of one size; class m is {mk, ..., mk+k-1}."""

    def __init__(self, size: int):
        super().__init__([Pool("main")])
        self.size = size

    def _stage(self, s: int) -> None:
        self.new_class(self.size)


@dataclass
class BuildReport:
    """Per-run audit counters that the acceptance checks read back."""

    transitions: int = 0
    illegal_transitions: int = 0
    duplicate_marker_sizes: int = 0
    stuck_blocs: list = field(default_factory=list)


__all__ = [
    "OMEGA", "MonotonicityViolation", "CharacterViolation", "BlocAutomatonViolation", "SpecMismatch",
    "SFunction", "skip_index", "parse_function", "BoundedCharSpec", "EnumerableSet",
    "IdentityStructure", "BlockStructure", "BuildReport",
]
