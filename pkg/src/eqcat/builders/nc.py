"""An s-function read off a c.e. set of elements with finite classes."""

from __future__ import annotations

from ..core import Structure
from .common import EnumerableSet, SFunction


class CESubsetSFunction(SFunction):
    """f(i, s) = card({x <= s : x E c_i}).

    c_0, c_1, ... lists one element per class met by C, in the order C
    reaches those classes; members of a class already listed are skipped.
    Before c_i has been enumerated f(i, s) is 0.
    """

    def __init__(self, S: Structure, C: EnumerableSet):
        self.S = S
        self.C = C
        self._reps: list[tuple[int, int]] = []  # (element, stage enumerated)
        self._keys: set = set()
        self._scanned = 0  # prefix of C.order already deduplicated
        super().__init__(self._value, "s", name=f"card-over-{C.name}")

    def _catch_up(self, s: int) -> None:
        order = self.C.order(s)
        for x in order[self._scanned:]:
            key = self.S.final_key(x)
            if key not in self._keys:
                self._keys.add(key)
                self._reps.append((x, self.C.first_stage(x, s)))
        self._scanned = len(order)

    def representative(self, i: int, s: int):
        self._catch_up(s)
        if i < len(self._reps) and self._reps[i][1] <= s:
            return self._reps[i][0]
        return None

    def _value(self, i: int, s: int) -> int:
        c = self.representative(i, s)
        return 0 if c is None else self.S.card_at_stage(c, s)

    def representatives(self, budget: int) -> list[int]:
        self._catch_up(budget)
        return [x for x, st in self._reps if st <= budget]

    def empty_within(self, budget: int) -> bool:
        return not self.representatives(budget)


def s_from_ce_subset(S: Structure, C: EnumerableSet) -> CESubsetSFunction:
    return CESubsetSFunction(S, C)
