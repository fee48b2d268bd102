import pytest

from eqcat.predicates import (
    ArityMismatch, FiniteTable, PredicateSyntaxError, Residue, Threshold, UnknownVariable, always_false,
    always_true, eval_predicate, from_spec, parse, sigma2_member_at,
)


def test_simple_programs():
    p = parse("z < 5")
    assert eval_predicate(p, (1, 1, 0, 3))
    assert not eval_predicate(p, (1, 1, 0, 7))
    assert parse("w == k + n")(2, 3, 5, 0)
    assert parse("(k mod 2) == 1 and n <= 3").eval((3, 2, 0, 0))


@pytest.mark.parametrize("src, pos", [("k <", 3), ("k < < 2", 4), ("(k == 1", 7), ("k # 2", 2)])
def test_syntax_errors_carry_positions(src, pos):
    with pytest.raises(PredicateSyntaxError) as info:
        parse(src)
    assert info.value.position == pos


def test_unknown_variable():
    with pytest.raises(UnknownVariable) as info:
        parse("q == 1")
    assert info.value.name == "q"


def test_arity_is_checked():
    with pytest.raises(ArityMismatch):
        parse("z < 5").eval((1, 2))


def test_saturating_arithmetic():
    p = parse("k - n == 0", ("k", "n"))
    assert p(2, 5) and not p(5, 2)
    assert parse("k / 2 == 1", ("k",))(3)


def test_division_by_zero():
    with pytest.raises(PredicateSyntaxError):
        parse("k / 0 == 1", ("k",))
    with pytest.raises(PredicateSyntaxError):
        parse("k mod 0 == 1", ("k",))
    p = parse("k / n == 0", ("k", "n"))
    assert not p(3, 0)
    assert parse("not (k mod n == 0)", ("k", "n"))(3, 0)  # only the comparison itself goes false
    assert parse("k mod n == 0 or k == 3", ("k", "n"))(3, 0)


def test_keywords_and_precedence():
    p = parse("not k == 1 or n == 2 and w == 3")
    assert p(2, 0, 0, 0)
    assert not p(1, 2, 0, 0)
    assert p(1, 2, 3, 0)
    assert parse("true")(0, 0, 0, 0) and not parse("false")(0, 0, 0, 0)


def test_eval_is_pure():
    p = parse("(k mod 3) == 1 and n + w <= 2 * z")
    first = p(4, 1, 2, 2)
    results = {p(4, 1, 2, 2) for _ in range(10**6)}
    assert results == {first}


def test_builtins():
    assert always_true()(9, 9, 9, 9) and not always_false()(0, 0, 0, 0)
    assert Threshold("z", 3)(0, 0, 0, 2) and not Threshold("z", 3)(0, 0, 0, 3)
    assert Residue("k", 2, 1)(3, 0, 0, 0)
    t = FiniteTable({(2, 1, 0): None, (3, 1, 1): 4})
    assert t(2, 1, 0, 99) and t(3, 1, 1, 3) and not t(3, 1, 1, 4)
    assert t.support == 4 and t.sigma2_set() == {(2, 1)}


@pytest.mark.parametrize("p", [
    parse("z < 5"), always_true(), Threshold("w", 4), Residue("n", 3, 2),
    FiniteTable({(1, 1, 0): None, (2, 1, 3): 2}),
])
def test_spec_round_trip(p):
    q = from_spec(p.to_spec())
    args = [(k, n, w, z) for k in range(3) for n in range(3) for w in range(5) for z in range(6)]
    assert [p(*a) for a in args] == [q(*a) for a in args]


def test_sigma2_member_at():
    assert sigma2_member_at(always_true(), 3, 4, 0)
    assert not sigma2_member_at(parse("z < 5"), 1, 1, 10)
    assert sigma2_member_at(parse("w == 2"), 7, 7, 2)


def test_sigma2_member_exact_on_tables_past_support():
    t = FiniteTable({(1, 1, 0): None, (1, 2, 2): 3, (2, 1, 3): None})
    b = t.support + 1
    got = {(k, n) for k in range(1, 4) for n in range(1, 4) if sigma2_member_at(t, k, n, b)}
    assert got == t.sigma2_set() == {(1, 1), (2, 1)}
