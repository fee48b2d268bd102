"""Computable equivalence structures: builders, invariants and isomorphism engines.

Structures are built stage by stage on the natural numbers; every query
names the stage it is asked at, so any construction can be replayed to a
finite budget and inspected.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    OMEGA, AuditViolation, BudgetExceeded, CharacterApprox, EqcatError, Snapshot, StagedPartition, Structure,
    Unplaced,
)

__all__ = [
    "__version__", "OMEGA", "AuditViolation", "BudgetExceeded", "CharacterApprox", "EqcatError", "Snapshot",
    "StagedPartition", "Structure", "Unplaced",
]
