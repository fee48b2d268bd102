"""Coded unions of structures.

A coder packs (part, local element) pairs into single naturals.  The union
relates two elements only when they decode to the same part and are related
there.
"""

from __future__ import annotations

from typing import Callable, Sequence

from ..core import BudgetExceeded, EqcatError, Structure


class CoderCollision(EqcatError):
    def __init__(self, first, second, value):
        super().__init__(f"parts {first} and {second} both code to {value}")
        self.first = first
        self.second = second
        self.value = value


class Coder:
    """Injective map (part, a) -> element with a partial inverse."""

    name = "coder"
    parts: int | None = None  # None: any number of parts

    def encode(self, part: int, a: int) -> int:
        raise NotImplementedError

    def decode(self, x: int):
        raise NotImplementedError

    def check(self, parts: int, width: int = 64) -> None:
        """Raise CoderCollision unless encode is injective and decode inverts it on a window."""
        seen = {}
        for c in range(parts):
            for a in range(width):
                x = self.encode(c, a)
                if x in seen:
                    raise CoderCollision(seen[x], (c, a), x)
                seen[x] = (c, a)
                if self.decode(x) != (c, a):
                    raise CoderCollision(self.decode(x), (c, a), x)


class DyadicCoder(Coder):
    """Part c, element a goes to 2^c (2a + 1) - 1: part 0 on the evens, a bijection."""

    name = "dyadic"

    def encode(self, part, a):
        return (1 << part) * (2 * a + 1) - 1

    def decode(self, x):
        y = x + 1
        c = (y & -y).bit_length() - 1
        return c, ((y >> c) - 1) // 2


class ParityCoder(Coder):
    """Two parts: part 0 on the evens, part 1 on the odds."""

    name = "parity"
    parts = 2

    def encode(self, part, a):
        if part not in (0, 1):
            raise ValueError("the parity coder has two parts")
        return 2 * a + part

    def decode(self, x):
        return x % 2, x // 2


class OverlapCoder(Coder):
    """Part 0 at 2a and part c >= 1 at 2^c (2a + 1).

    The two rules overlap on the even numbers (2 = 2·1 = 2^1·1), so
    :meth:`check` rejects it for two or more parts.
    """

    name = "overlap"

    def encode(self, part, a):
        return 2 * a if part == 0 else (1 << part) * (2 * a + 1)

    def decode(self, x):
        if x % 2 == 0:
            return 0, x // 2
        return None


class FunctionCoder(Coder):
    def __init__(self, encode: Callable[[int, int], int], decode: Callable[[int], object],
                 parts: int | None = None, name: str = "custom"):
        self._encode = encode
        self._decode = decode
        self.parts = parts
        self.name = name

    def encode(self, part, a):
        return self._encode(part, a)

    def decode(self, x):
        return self._decode(x)


CODERS = {"dyadic": DyadicCoder, "parity": ParityCoder, "overlap": OverlapCoder}


class UnionStructure(Structure):
    """The coded union of ``parts``.

    ``parts`` is a sequence of structures or a callable ``c -> structure``
    for a uniform infinite family.  A uniform family starts part c at global
    stage c, so only finitely many parts are live at any stage.
    """

    def __init__(self, parts: Sequence[Structure] | Callable[[int], Structure], coder: Coder | None = None):
        self.coder = coder or DyadicCoder()
        self.uniform = callable(parts) and not isinstance(parts, (list, tuple))
        if self.uniform:
            self._factory = parts
            self._parts: list[Structure] = []
        else:
            self._parts = list(parts)
            if self.coder.parts is not None and len(self._parts) > self.coder.parts:
                raise ValueError(f"coder {self.coder.name} takes at most {self.coder.parts} parts")
        self.coder.check(len(self._parts) if not self.uniform else 8)
        self.stage = -1
        self.hard_budget = max([p.hard_budget for p in self._parts] or [Structure.hard_budget])

    # parts and their clocks
    def offset(self, c: int) -> int:
        return c if self.uniform else 0

    def part(self, c: int) -> Structure:
        if self.uniform:
            while len(self._parts) <= c:
                self._parts.append(self._factory(len(self._parts)))
        return self._parts[c]

    def live_parts(self, stage: int) -> range:
        return range(stage + 1) if self.uniform else range(len(self._parts))

    def run_to(self, stage: int) -> None:
        if stage <= self.stage:
            return
        if stage > self.hard_budget:
            raise BudgetExceeded(f"stage {stage} beyond hard budget {self.hard_budget}")
        for c in self.live_parts(stage):
            self.part(c).run_to(stage - self.offset(c))
        self.stage = stage

    def _local(self, x: int):
        d = self.coder.decode(x)
        if d is None:
            return None
        c, a = d
        if not self.uniform and c >= len(self._parts):
            return None
        return c, a

    def placement_stage(self, x: int) -> int:
        d = self._local(x)
        if d is None:
            raise BudgetExceeded(f"element {x} is not coded by {self.coder.name}")
        c, a = d
        return self.offset(c) + self.part(c).placement_stage(a)

    def final_key_or_none(self, x: int):
        d = self._local(x)
        if d is None:
            return None
        c, a = d
        k = self.part(c).final_key_or_none(a)
        return None if k is None else (c, k)

    def class_key(self, x: int, stage: int):
        d = self._local(x)
        if d is None:
            return None
        c, a = d
        local = stage - self.offset(c)
        if local < 0:
            return None
        self.part(c).run_to(local)
        k = self.part(c).class_key(a, local)
        return None if k is None else (c, k)

    def class_size(self, key, stage: int) -> int:
        c, k = key
        return self.part(c).class_size(k, stage - self.offset(c))

    def class_infinite(self, key, stage: int) -> bool:
        c, k = key
        return self.part(c).class_infinite(k, stage - self.offset(c))

    def class_created(self, key) -> int:
        c, k = key
        return self.offset(c) + self.part(c).class_created(k)

    def classes(self, stage: int) -> list:
        self.run_to(stage)
        keys = []
        for c in self.live_parts(stage):
            local = stage - self.offset(c)
            if local < 0:
                continue
            p = self.part(c)
            for pos, k in enumerate(p.classes(local)):
                keys.append((self.offset(c) + p.class_created(k), c, pos, k))
        keys.sort(key=lambda t: t[:3])
        return [(c, k) for _, c, _, k in keys]

    def class_members(self, key, stage: int) -> list[int]:
        c, k = key
        enc = self.coder.encode
        return [enc(c, a) for a in self.part(c).class_members(k, stage - self.offset(c))]


class CopyStructure(Structure):
    """A computable copy: element x of the copy is element ``inverse(x)`` of ``base``.

    ``perm`` and ``inverse`` must be mutually inverse bijections of the naturals.
    """

    def __init__(self, base: Structure, perm: Callable[[int], int], inverse: Callable[[int], int],
                 name: str = "copy"):
        self.base = base
        self.perm = perm
        self.inverse = inverse
        self.name = name
        self.hard_budget = base.hard_budget

    @property
    def stage(self):
        return getattr(self.base, "stage", -1)

    def run_to(self, stage: int) -> None:
        self.base.run_to(stage)

    def placement_stage(self, x: int) -> int:
        return self.base.placement_stage(self.inverse(x))

    def final_key_or_none(self, x: int):
        return self.base.final_key_or_none(self.inverse(x))

    def class_key(self, x: int, stage: int):
        return self.base.class_key(self.inverse(x), stage)

    def class_size(self, key, stage: int) -> int:
        return self.base.class_size(key, stage)

    def class_infinite(self, key, stage: int) -> bool:
        return self.base.class_infinite(key, stage)

    def class_created(self, key) -> int:
        return self.base.class_created(key)

    def classes(self, stage: int) -> list:
        return self.base.classes(stage)

    def class_members(self, key, stage: int) -> list[int]:
        return [self.perm(a) for a in self.base.class_members(key, stage)]


def block_reversal(m: int) -> Callable[[int], int]:
    """Reverse each block {qm, ..., qm + m - 1}; an involution."""
    if m < 1:
        raise ValueError("block length must be positive")
    return lambda x: m * (x // m) + (m - 1 - x % m)


def computable_copy(base: Structure, block: int = 2) -> CopyStructure:
    f = block_reversal(block)
    return CopyStructure(base, f, f, f"reverse-{block}")


def effective_union(parts, coder: Coder | None = None) -> UnionStructure:
    return UnionStructure(parts, coder)
