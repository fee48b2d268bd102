"""Structures with a bounded character and a prescribed number of infinite classes."""

from __future__ import annotations

from ..core import Pool, StagedPartition, is_omega
from .common import BoundedCharSpec


class BoundedStructure(StagedPartition):
    """Three components: r infinite classes, repeated sizes, and fixed classes.

    Every stage opens one new class of each repeated size.  With a finite r
    the infinite classes all open at stage 0; with r = OMEGA the c-th opens
    at stage 2c.  Infinite classes gain one element per stage.  When both the
    finite and the infinite supply are unending, finite classes live on even
    numbers and infinite ones on odd numbers, so Fin is decided by parity.
    """

    def __init__(self, spec: BoundedCharSpec):
        self.spec = spec
        self.omega = is_omega(spec.r)
        self.by_residue = bool(spec.repeat_sizes) and (self.omega or spec.r > 0)
        pools = [Pool("fin", 2, 0), Pool("inf", 2, 1)] if self.by_residue else [Pool("main")]
        super().__init__(pools)
        self._fin = "fin" if self.by_residue else None
        self._inf = "inf" if self.by_residue else None
        self._sizes = sorted(spec.repeat_sizes)

    def _open_infinite(self):
        cid = self.new_class(1, self._inf)
        self.declare_infinite(cid)

    def _stage(self, s: int) -> None:
        self.grow_roster(self._inf)
        if s == 0:
            for size, count in self.spec.fixed_sizes:
                for _ in range(count):
                    self.new_class(size, self._fin)
            if not self.omega:
                for _ in range(self.spec.r):
                    self._open_infinite()
        if self.omega and s % 2 == 0:
            self._open_infinite()
        for size in self._sizes:
            self.new_class(size, self._fin)

    def fin_decider(self, x: int) -> bool:
        """Whether the class of ``x`` is finite; total and stage-independent."""
        if self.by_residue:
            return x % 2 == 0
        return not self.class_infinite(self.final_key(x), self.placement_stage(x))


def build_bounded(spec: BoundedCharSpec) -> BoundedStructure:
    return BoundedStructure(spec)
