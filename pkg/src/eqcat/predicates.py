"""A small total expression language for the computable relations.

Grammar (EBNF)::

    expr    = disj ;
    disj    = conj , { "or" , conj } ;
    conj    = neg , { "and" , neg } ;
    neg     = "not" , neg | comp ;
    comp    = sum , [ ( "<" | "<=" | ">" | ">=" | "==" | "!=" ) , sum ] ;
    sum     = term , { ( "+" | "-" ) , term } ;
    term    = atom , { ( "*" | "/" | "mod" ) , atom } ;
    atom    = INT | NAME | "true" | "false" | "(" , expr , ")" ;

Arithmetic is over the naturals: ``-`` saturates at 0 and ``/`` floors.
Dividing by a literal ``0`` is rejected at parse time; any other zero
divisor makes the value undefined and the comparison around it false.
There are no loops and no recursion, so every program halts.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Sequence

from .core import EqcatError


class PredicateSyntaxError(EqcatError):
    def __init__(self, position: int, message: str):
        super().__init__(f"at {position}: {message}")
        self.position = position
        self.message = message


class UnknownVariable(PredicateSyntaxError):
    def __init__(self, position: int, name: str):
        super().__init__(position, f"unknown variable {name!r}")
        self.name = name


class ArityMismatch(EqcatError):
    pass


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_]\w*)|(<=|>=|==|!=|<|>|\+|-|\*|/|\(|\)))")
_KEYWORDS = {"and", "or", "not", "mod", "true", "false"}
_COMPARE = {"<", "<=", ">", ">=", "==", "!="}


def _tokenize(source: str):
    pos = 0
    tokens = []
    while True:
        while pos < len(source) and source[pos].isspace():
            pos += 1
        if pos >= len(source):
            break
        m = _TOKEN.match(source, pos)
        if not m:
            raise PredicateSyntaxError(pos, f"unexpected character {source[pos]!r}")
        start = m.start(m.lastindex)
        if m.group(1) is not None:
            tokens.append(("int", m.group(1), start))
        elif m.group(2) is not None:
            word = m.group(2)
            tokens.append(("kw" if word in _KEYWORDS else "name", word, start))
        else:
            tokens.append(("op", m.group(3), start))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


@dataclass
class _Node:
    code: str
    kind: str  # "int" or "bool"
    undef: bool  # arithmetic value may be undefined (zero divisor)
    pos: int


class _Parser:
    def __init__(self, source: str, variables: Sequence[str]):
        self.tokens = _tokenize(source)
        self.i = 0
        self.variables = list(variables)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok = self.take()
        if tok[1] != value:
            raise PredicateSyntaxError(tok[2], f"expected {value!r}, found {tok[1] or 'end of input'!r}")
        return tok

    def parse(self) -> _Node:
        node = self.disj()
        tok = self.peek()
        if tok[0] != "end":
            raise PredicateSyntaxError(tok[2], f"unexpected {tok[1]!r}")
        if node.kind != "bool":
            raise PredicateSyntaxError(0, "expression is arithmetic, expected a condition")
        return node

    def _bool(self, node: _Node) -> _Node:
        if node.kind != "bool":
            raise PredicateSyntaxError(node.pos, "expected a condition")
        return node

    def disj(self) -> _Node:
        node = self.conj()
        while self.peek()[1] == "or":
            self.take()
            rhs = self._bool(self.conj())
            node = _Node(f"({self._bool(node).code} or {rhs.code})", "bool", False, node.pos)
        return node

    def conj(self) -> _Node:
        node = self.neg()
        while self.peek()[1] == "and":
            self.take()
            rhs = self._bool(self.neg())
            node = _Node(f"({self._bool(node).code} and {rhs.code})", "bool", False, node.pos)
        return node

    def neg(self) -> _Node:
        tok = self.peek()
        if tok[1] == "not":
            self.take()
            inner = self._bool(self.neg())
            return _Node(f"(not {inner.code})", "bool", False, tok[2])
        return self.comp()

    def comp(self) -> _Node:
        lhs = self.sum()
        tok = self.peek()
        if tok[0] == "op" and tok[1] in _COMPARE:
            self.take()
            rhs = self.sum()
            for side in (lhs, rhs):
                if side.kind != "int":
                    raise PredicateSyntaxError(side.pos, "comparison needs arithmetic operands")
            if lhs.undef or rhs.undef:
                code = f"_cmp({lhs.code}, {rhs.code}, lambda a, b: a {tok[1]} b)"
            else:
                code = f"({lhs.code} {tok[1]} {rhs.code})"
            return _Node(code, "bool", False, lhs.pos)
        return lhs

    def _arith(self, node: _Node) -> _Node:
        if node.kind != "int":
            raise PredicateSyntaxError(node.pos, "expected an arithmetic operand")
        return node

    def sum(self) -> _Node:
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            lhs, rhs = self._arith(node), self._arith(self.term())
            undef = lhs.undef or rhs.undef
            if op == "-":
                code = f"_sub({lhs.code}, {rhs.code})"
            elif undef:
                code = f"_add({lhs.code}, {rhs.code})"
            else:
                code = f"({lhs.code} + {rhs.code})"
            node = _Node(code, "int", undef, lhs.pos)
        return node

    def term(self) -> _Node:
        node = self.atom()
        while self.peek()[1] in ("*", "/", "mod"):
            op_tok = self.take()
            lhs, rhs = self._arith(node), self._arith(self.atom())
            if op_tok[1] in ("/", "mod"):
                if rhs.code == "0":
                    raise PredicateSyntaxError(op_tok[2], "division by literal zero")
                fn = "_div" if op_tok[1] == "/" else "_mod"
                node = _Node(f"{fn}({lhs.code}, {rhs.code})", "int", True, lhs.pos)
            else:
                undef = lhs.undef or rhs.undef
                code = f"_mul({lhs.code}, {rhs.code})" if undef else f"({lhs.code} * {rhs.code})"
                node = _Node(code, "int", undef, lhs.pos)
        return node

    def atom(self) -> _Node:
        kind, value, pos = self.take()
        if kind == "int":
            return _Node(str(int(value)), "int", False, pos)
        if kind == "name":
            if value not in self.variables:
                raise UnknownVariable(pos, value)
            return _Node(f"_v{self.variables.index(value)}", "int", False, pos)
        if value in ("true", "false"):
            return _Node("True" if value == "true" else "False", "bool", False, pos)
        if value == "(":
            node = self.disj()
            self.expect(")")
            return _Node(node.code, node.kind, node.undef, pos)
        raise PredicateSyntaxError(pos, f"unexpected {value or 'end of input'!r}")


def _sub(a, b):
    if a is None or b is None:
        return None
    return a - b if a > b else 0


def _add(a, b):
    return None if a is None or b is None else a + b


def _mul(a, b):
    return None if a is None or b is None else a * b


def _div(a, b):
    return None if a is None or not b else a // b


def _mod(a, b):
    return None if a is None or not b else a % b


def _cmp(a, b, op):
    return False if a is None or b is None else op(a, b)


_HELPERS = {"_sub": _sub, "_add": _add, "_mul": _mul, "_div": _div, "_mod": _mod, "_cmp": _cmp}


class Predicate:
    """Anything evaluable as a total relation on a fixed number of naturals."""

    variables: tuple[str, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.variables)

    def __call__(self, *args: int) -> bool:
        raise NotImplementedError

    def eval(self, args: Sequence[int]) -> bool:
        if len(args) != self.arity:
            raise ArityMismatch(f"expected {self.arity} arguments, got {len(args)}")
        return self(*args)

    def to_spec(self) -> dict:
        raise NotImplementedError


class PredicateProgram(Predicate):
    def __init__(self, source: str, variables: Sequence[str], fn: Callable[..., bool]):
        self.source = source
        self.variables = tuple(variables)
        self._fn = fn

    def __call__(self, *args: int) -> bool:
        return bool(self._fn(*args))

    def __repr__(self):
        return f"PredicateProgram({self.source!r}, vars={self.variables})"

    def to_spec(self) -> dict:
        return {"dsl": self.source, "vars": list(self.variables)}


RELATION_VARS = ("k", "n", "w", "z")


def parse(source: str, variables: Sequence[str] = RELATION_VARS) -> PredicateProgram:
    """Compile ``source`` over ``variables`` into a callable program."""
    node = _Parser(source, variables).parse()
    params = ", ".join(f"_v{i}" for i in range(len(variables)))
    code = compile(f"lambda {params}: {node.code}", "<predicate>", "eval")
    fn = eval(code, dict(_HELPERS))  # generated from the checked syntax tree only
    return PredicateProgram(source, variables, fn)


def eval_predicate(p: Predicate, args: Sequence[int]) -> bool:
    return p.eval(args)


# ---------------------------------------------------------------------------
# builtin families


class Constant(Predicate):
    def __init__(self, value: bool, variables: Sequence[str] = RELATION_VARS):
        self.value = bool(value)
        self.variables = tuple(variables)

    def __call__(self, *args):
        return self.value

    def to_spec(self):
        return {"builtin": "true" if self.value else "false", "vars": list(self.variables)}


def always_true(variables=RELATION_VARS) -> Constant:
    return Constant(True, variables)


def always_false(variables=RELATION_VARS) -> Constant:
    return Constant(False, variables)


class Threshold(Predicate):
    """``var < bound``."""

    def __init__(self, var: str, bound: int, variables: Sequence[str] = RELATION_VARS):
        self.variables = tuple(variables)
        self.var, self.bound = var, bound
        self._i = self.variables.index(var)

    def __call__(self, *args):
        return args[self._i] < self.bound

    def to_spec(self):
        return {"builtin": "threshold", "var": self.var, "bound": self.bound, "vars": list(self.variables)}


class Residue(Predicate):
    """``var mod modulus == residue``."""

    def __init__(self, var: str, modulus: int, residue: int, variables: Sequence[str] = RELATION_VARS):
        self.variables = tuple(variables)
        self.var, self.modulus, self.residue = var, modulus, residue
        self._i = self.variables.index(var)

    def __call__(self, *args):
        return args[self._i] % self.modulus == self.residue

    def to_spec(self):
        return {"builtin": "residue", "var": self.var, "modulus": self.modulus,
                "residue": self.residue, "vars": list(self.variables)}


class FiniteTable(Predicate):
    """Finite-support relation R(k, n, w, z).

    ``entries`` maps ``(k, n, w)`` to ``None`` (true for every ``z``) or to
    an integer ``r`` (true exactly for ``z < r``).  Triples without an entry
    are false everywhere.
    """

    variables = RELATION_VARS

    def __init__(self, entries: dict):
        self.entries = {tuple(key): value for key, value in entries.items()}

    def __call__(self, k, n, w, z):
        key = (k, n, w)
        if key not in self.entries:
            return False
        r = self.entries[key]
        return r is None or z < r

    @property
    def support(self) -> int:
        """Largest coordinate mentioned by the table."""
        biggest = 0
        for key, r in self.entries.items():
            biggest = max(biggest, *key, r or 0)
        return biggest

    def sigma2_set(self) -> frozenset:
        return frozenset((k, n) for (k, n, w), r in self.entries.items() if r is None)

    def to_spec(self):
        return {"builtin": "table",
                "entries": [[k, n, w, r] for (k, n, w), r in sorted(self.entries.items())]}


def from_spec(spec: dict) -> Predicate:
    if "dsl" in spec:
        return parse(spec["dsl"], spec.get("vars", RELATION_VARS))
    kind = spec["builtin"]
    variables = spec.get("vars", RELATION_VARS)
    if kind in ("true", "false"):
        return Constant(kind == "true", variables)
    if kind == "threshold":
        return Threshold(spec["var"], spec["bound"], variables)
    if kind == "residue":
        return Residue(spec["var"], spec["modulus"], spec["residue"], variables)
    if kind == "table":
        return FiniteTable({(k, n, w): r for k, n, w, r in spec["entries"]})
    raise ValueError(f"unknown builtin predicate {kind!r}")


def sigma2_member_at(R: Predicate, k: int, n: int, budget: int) -> bool:
    """Budgeted test of ``exists w forall z R(k, n, w, z)``."""
    for w in range(budget + 1):
        if all(R(k, n, w, z) for z in range(budget + 1)):
            return True
    return False
