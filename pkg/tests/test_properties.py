"""Algebraic invariants over generated structures, partitions and programs."""

from collections import Counter

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from eqcat.builders import DyadicCoder, ParityCoder, SFunction, computable_copy
from eqcat.catalog import build
from eqcat.core import FinitePartitionStructure, StagedPartition, character_of_sizes, validate_character
from eqcat.oracle import (
    FinitePartition, brute_character, brute_iso_search, is_block_isomorphism, permutation_iso_exists,
    same_size_multiset,
)
from eqcat.predicates import parse

from .test_acceptance import catalog_configs

FAST = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def partitions(draw, max_elems=12):
    n = draw(st.integers(1, max_elems))
    labels = draw(st.lists(st.integers(0, 5), min_size=n, max_size=n))
    groups = {}
    for x, lab in enumerate(labels):
        groups.setdefault(lab, []).append(x)
    return FinitePartition(groups.values())


@st.composite
def programs(draw):
    """A random stage program: each stage opens, extends or declares classes."""
    ops = draw(st.lists(st.tuples(st.sampled_from("nadg"), st.integers(0, 30), st.integers(1, 3)),
                        min_size=1, max_size=40))
    return ops


class Scripted(StagedPartition):
    def __init__(self, ops):
        super().__init__()
        self.ops = ops

    def _stage(self, s):
        if s >= len(self.ops):
            self.new_class(1)
            return
        kind, target, count = self.ops[s]
        if kind == "n" or not self.class_count:
            self.new_class(count)
            return
        cid = target % self.class_count
        if kind == "a":
            self.add(cid, count)
        elif kind == "d":
            self.declare_infinite(cid)
        self.grow_roster()


@FAST
@given(programs(), st.integers(0, 60), st.integers(0, 60))
def test_snapshots_only_grow(ops, s, t):
    S = Scripted(ops)
    s, t = min(s, t), max(s, t)
    assert S.snapshot(s).restricts(S.snapshot(t))
    assert Scripted(ops).snapshot(t) == S.snapshot(t)


@FAST
@given(programs(), st.integers(0, 60))
def test_character_is_downward_closed(ops, s):
    ch = Scripted(ops).character_at_stage(s)
    assert validate_character(ch.pairs)


@FAST
@given(programs())
def test_related_is_an_equivalence(ops):
    S = Scripted(ops)
    xs = range(25)
    rel = {(a, b): S.related(a, b) for a in xs for b in xs}
    assert all(rel[a, a] for a in xs)
    assert all(rel[a, b] == rel[b, a] for a in xs for b in xs)
    assert all(rel[a, c] for a in xs for b in xs for c in xs if rel[a, b] and rel[b, c])


@FAST
@given(programs(), st.integers(0, 20))
def test_card_at_stage_nondecreasing(ops, a):
    S = Scripted(ops)
    counts = [S.card_at_stage(a, s) for s in range(40)]
    assert counts == sorted(counts)


@FAST
@given(st.lists(st.integers(1, 6), max_size=15))
def test_character_of_sizes_valid(sizes):
    pairs = character_of_sizes(sizes)
    assert validate_character(pairs)
    assert {k: max(n for kk, n in pairs if kk == k) for k, _ in pairs} == dict(Counter(sizes))


@FAST
@given(partitions())
def test_frozen_partition_character(P):
    S = FinitePartitionStructure(P.to_lists())
    assert S.character_at_stage(0).pairs == brute_character(P).pairs


@settings(max_examples=200, deadline=None)
@given(partitions(8), partitions(8), st.dictionaries(st.integers(0, 8), st.integers(0, 8), max_size=3))
def test_two_oracles_agree(P, Q, seed):
    if max(len(P.blocks), len(Q.blocks)) > 6:
        return
    h = brute_iso_search(P, Q, seed)
    assert (h is not None) == permutation_iso_exists(P, Q, seed)
    if h is not None:
        assert is_block_isomorphism(P, Q, h)
        assert all(h[a] == b for a, b in seed.items())


@FAST
@given(partitions())
def test_unseeded_search_is_size_multiset(P):
    Q = FinitePartition(reversed(P.to_lists()))
    assert brute_iso_search(P, Q) is not None
    R = FinitePartition([[x] for x in range(P.n + 1)])
    assert (brute_iso_search(P, R) is not None) == same_size_multiset(P, R)


@FAST
@given(st.integers(0, 7), st.integers(0, 10**6))
def test_dyadic_coder_round_trip(part, a):
    c = DyadicCoder()
    assert c.decode(c.encode(part, a)) == (part, a)
    p = ParityCoder()
    assert p.decode(p.encode(part % 2, a)) == (part % 2, a)


@FAST
@given(st.lists(st.integers(0, 200), min_size=1, max_size=60))
def test_sfunction_cache_is_transparent(stages):
    fn = lambda i, s: s // 7 + i  # noqa: E731
    f = SFunction(fn)
    assert all(f(3, s) == fn(3, s) for s in stages)


ATOMS = st.sampled_from(["k", "n", "w", "z", "0", "1", "2", "7"])


@st.composite
def expressions(draw, depth=3):
    if depth == 0 or draw(st.booleans()):
        return draw(ATOMS)
    op = draw(st.sampled_from(["+", "-", "*", "/", "mod"]))
    return f"({draw(expressions(depth - 1))} {op} {draw(expressions(depth - 1))})"


def reference(src, env):
    """Independent evaluator: saturating minus, floor division, undefined on a zero divisor."""
    tokens = src.replace("(", " ( ").replace(")", " ) ").split()

    def parse_expr(i):
        if tokens[i] == "(":
            left, i = parse_expr(i + 1)
            op = tokens[i]
            right, i = parse_expr(i + 1)
            return combine(op, left, right), i + 1
        tok = tokens[i]
        return (env[tok] if tok in env else int(tok)), i + 1

    def combine(op, a, b):
        if a is None or b is None:
            return None
        if op == "+":
            return a + b
        if op == "-":
            return max(0, a - b)
        if op == "*":
            return a * b
        if b == 0:
            return None
        return a // b if op == "/" else a % b

    return parse_expr(0)[0]


@settings(max_examples=150, deadline=None)
@given(expressions(), expressions(), st.tuples(*[st.integers(0, 9)] * 4))
def test_dsl_matches_reference(lhs, rhs, args):
    src = f"{lhs} <= {rhs}"
    try:
        p = parse(src)
    except Exception:
        # a literal zero divisor is rejected up front
        assert "/ 0)" in src or "mod 0)" in src
        return
    env = dict(zip("knwz", args))
    a, b = reference(lhs, env), reference(rhs, env)
    want = a is not None and b is not None and a <= b
    assert p(*args) == want


@settings(max_examples=6, deadline=None)
@given(st.sampled_from(catalog_configs()))
def test_catalog_places_every_element(cfg):
    S = build(cfg)
    assert all(S.is_placed(x, 800) for x in range(200))


def test_copy_is_isomorphic_on_prefix():
    base = build({"kind": "bounded", "repeat": [2, 3], "infinite": 1})
    C = computable_copy(build({"kind": "bounded", "repeat": [2, 3], "infinite": 1}), 3)
    assert sorted(base.finite_sizes(100)) == sorted(C.finite_sizes(100))
