"""Stage programs for every construction, each producing a replayable structure."""

from .bounded import BoundedStructure, build_bounded
from .common import (
    BlocAutomatonViolation,
    BlockStructure,
    BoundedCharSpec,
    BuildReport,
    CharacterViolation,
    EnumerableSet,
    IdentityStructure,
    MonotonicityViolation,
    SFunction,
    SpecMismatch,
    parse_function,
    skip_index,
)
from .diag import ChangeOfMind, DiagPair, Diverged, IdentityGuess, Opponent, build_diag_pair, opponent_from_spec
from .nc import CESubsetSFunction, s_from_ce_subset
from .pair_t4 import GadgetStructure, PairT4, build_pair_t4
from .sfunc import LEGAL_TRANSITIONS, FromS1Structure, FromSStructure, build_from_s, build_from_s1
from .sigma2 import BEnumerator, Sigma2InfStructure, b_set_member, build_sigma2_inf
from .testclass import TestClassStructure, build_test_class
from .union import (
    CODERS,
    Coder,
    CoderCollision,
    CopyStructure,
    DyadicCoder,
    FunctionCoder,
    OverlapCoder,
    ParityCoder,
    UnionStructure,
    block_reversal,
    computable_copy,
    effective_union,
)

__all__ = [name for name in dir() if not name.startswith("_")]
