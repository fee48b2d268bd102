"""Brute-force ground truth on finite truncations."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass

from .core import CharacterApprox, Structure, Unplaced, character_of_sizes

DEFAULT_MAX_BLOCKS = 12


@dataclass(frozen=True)
class FinitePartition:
    """Disjoint nonempty blocks covering {0..n}, kept in order of least element."""

    blocks: tuple

    def __init__(self, blocks):
        blocks = [frozenset(b) for b in blocks]
        if any(not b for b in blocks):
            raise ValueError("blocks must be nonempty")
        union = set()
        total = 0
        for b in blocks:
            union |= b
            total += len(b)
        if len(union) != total:
            raise ValueError("blocks overlap")
        if union != set(range(total)):
            raise ValueError("blocks must cover an initial segment {0..n}")
        object.__setattr__(self, "blocks", tuple(sorted(blocks, key=min)))

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks) - 1

    def block_of(self, x: int) -> int:
        for i, b in enumerate(self.blocks):
            if x in b:
                return i
        raise KeyError(x)

    def sizes(self) -> list[int]:
        return [len(b) for b in self.blocks]

    def to_lists(self) -> list[list[int]]:
        return [sorted(b) for b in self.blocks]


def truncate(S: Structure, n: int, stage: int) -> FinitePartition:
    """The partition of {0..n} at ``stage``; every element must be placed by then."""
    S.run_to(stage)
    groups: dict = {}
    for x in range(n + 1):
        key = S.class_key(x, stage)
        if key is None:
            raise Unplaced(x, stage)
        groups.setdefault(key, []).append(x)
    return FinitePartition(groups.values())


def brute_character(P: FinitePartition) -> CharacterApprox:
    return CharacterApprox(-1, character_of_sizes(P.sizes()))


def brute_sigma2_character(R, kmax: int, nmax: int, wmax: int, zmax: int) -> frozenset:
    """{(k, n) : exists w <= wmax, forall z <= zmax, R(k, n, w, z)} with k, n >= 1.

    Exact for a finite-support table once every bound is past its support.
    """
    out = set()
    for k in range(1, kmax + 1):
        for n in range(1, nmax + 1):
            for w in range(wmax + 1):
                if all(R(k, n, w, z) for z in range(zmax + 1)):
                    out.add((k, n))
                    break
    return frozenset(out)


def _seed_blocks(P: FinitePartition, Q: FinitePartition, seed: dict):
    """Block constraints forced by the seed, or None if the seed is inconsistent."""
    if len(set(seed.values())) != len(seed):
        return None
    forced: dict[int, int] = {}
    for a, b in seed.items():
        try:
            i, j = P.block_of(a), Q.block_of(b)
        except KeyError:
            return None
        if forced.setdefault(i, j) != j:
            return None
    if len(set(forced.values())) != len(forced):
        return None
    return forced


def _extend(P: FinitePartition, Q: FinitePartition, assign: dict, seed: dict) -> dict:
    h = dict(seed)
    for i, j in assign.items():
        src = sorted(x for x in P.blocks[i] if x not in seed)
        used = {seed[x] for x in P.blocks[i] if x in seed}
        dst = sorted(y for y in Q.blocks[j] if y not in used)
        h.update(zip(src, dst))
    return h


def brute_iso_search(P: FinitePartition, Q: FinitePartition, seed: dict | None = None,
                     max_blocks: int = DEFAULT_MAX_BLOCKS):
    """Backtracking search for a block-preserving bijection P -> Q extending ``seed``.

    Returns the bijection as a dict, or None.  Refuses partitions with more
    than ``max_blocks`` blocks unless the cap is raised.
    """
    seed = dict(seed or {})
    if max(len(P.blocks), len(Q.blocks)) > max_blocks:
        raise ValueError(f"more than {max_blocks} blocks; raise max_blocks to search anyway")
    if len(P.blocks) != len(Q.blocks):
        return None
    forced = _seed_blocks(P, Q, seed)
    if forced is None:
        return None
    sizes_p, sizes_q = P.sizes(), Q.sizes()
    if any(sizes_p[i] != sizes_q[j] for i, j in forced.items()):
        return None
    assign = dict(forced)
    taken = set(forced.values())
    todo = [i for i in range(len(P.blocks)) if i not in forced]

    def go(pos: int) -> bool:
        if pos == len(todo):
            return True
        i = todo[pos]
        tried = set()
        for j in range(len(Q.blocks)):
            # blocks of equal size are interchangeable, so try one of each size
            if j in taken or sizes_q[j] != sizes_p[i] or sizes_q[j] in tried:
                continue
            tried.add(sizes_q[j])
            assign[i] = j
            taken.add(j)
            if go(pos + 1):
                return True
            del assign[i]
            taken.discard(j)
        return False

    if not go(0):
        return None
    return _extend(P, Q, assign, seed)


def permutation_iso_exists(P: FinitePartition, Q: FinitePartition, seed: dict | None = None) -> bool:
    """Second oracle: try every ordering of Q's blocks against P's.  Small inputs only."""
    seed = dict(seed or {})
    if max(len(P.blocks), len(Q.blocks)) > 8:
        raise ValueError("permutation oracle is limited to 8 blocks")
    if len(P.blocks) != len(Q.blocks) or len(set(seed.values())) != len(seed):
        return False
    where = {}
    for a in seed:
        i = _block(P, a)
        if i is None:
            return False
        where[a] = i
    for perm in itertools.permutations(range(len(Q.blocks))):
        if any(len(P.blocks[i]) != len(Q.blocks[j]) for i, j in enumerate(perm)):
            continue
        if all(b in Q.blocks[perm[where[a]]] for a, b in seed.items()):
            return True
    return False


def _block(P: FinitePartition, x: int):
    try:
        return P.block_of(x)
    except KeyError:
        return None


def is_block_isomorphism(P: FinitePartition, Q: FinitePartition, h: dict) -> bool:
    dom = set().union(*P.blocks) if P.blocks else set()
    cod = set().union(*Q.blocks) if Q.blocks else set()
    if set(h) != dom or set(h.values()) != cod or len(set(h.values())) != len(h):
        return False
    return all(len({Q.block_of(h[x]) for x in b}) == 1 for b in P.blocks)


def same_size_multiset(P: FinitePartition, Q: FinitePartition) -> bool:
    return Counter(P.sizes()) == Counter(Q.sizes())


__all__ = [
    "FinitePartition", "truncate", "brute_character", "brute_sigma2_character", "brute_iso_search", "permutation_iso_exists",
    "is_block_isomorphism", "same_size_multiset", "DEFAULT_MAX_BLOCKS",
]
