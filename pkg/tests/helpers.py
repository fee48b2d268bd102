"""Shared structure pairs and small constructions for the test suite."""

from eqcat.catalog import build
from eqcat.core import StagedPartition
from eqcat.iso import CategoricityCertificate

# f(i, s) = 2 except f(3, s) = 1, written with saturating arithmetic
DIST3 = "((i - 3) + (3 - i))"
ONE_SINGLETON_F = f"1 + {DIST3} - ({DIST3} - 1)"


class Late(StagedPartition):
    """Pairs {2s, 2s+1}-style classes of size 2, with one singleton opened at stage ``at``."""

    def __init__(self, at=3):
        super().__init__()
        self.at = at

    def _stage(self, s):
        if s == self.at:
            self.new_class(1)
        self.new_class(2)


def rep_of_size(S, size, stage=20, nth=0, infinite=False):
    """Least element of the nth class of ``size`` (or the nth infinite class) at ``stage``."""
    S.run_to(stage)
    found = []
    for key in S.classes(stage):
        if infinite:
            if S.class_infinite(key, stage):
                found.append(S.class_members(key, stage)[0])
        elif not S.class_infinite(key, stage) and S.class_size(key, stage) == size:
            found.append(S.class_members(key, stage)[0])
    return sorted(found)[nth]


def computable_pairs():
    """(name, A, B, certificate of A, certificate of B) for the computable engine."""
    out = []
    A, B = build({"kind": "identity"}), build({"kind": "identity"})
    c = CategoricityCertificate("bounded-one-repeat", K=1, k=1)
    out.append(("identity", A, B, c, c))

    B = build({"kind": "union", "coder": "parity", "parts": [{"kind": "identity"}, {"kind": "identity"}]})
    out.append(("identity-vs-union", build({"kind": "identity"}), B, c, c))

    A = build({"kind": "bounded", "repeat": [2], "fixed": [[1, 1]]})
    B = build({"kind": "from-s", "f": ONE_SINGLETON_F})
    out.append(("one-singleton", A, B,
                CategoricityCertificate("bounded-one-repeat", finite=[(rep_of_size(A, 1), 1)], K=2, k=2),
                CategoricityCertificate("bounded-one-repeat", finite=[(rep_of_size(B, 1), 1)], K=2, k=2)))

    A = build({"kind": "blocks", "size": 3})
    B = build({"kind": "copy", "block": 2, "of": {"kind": "bounded", "repeat": [3]}})
    c3 = CategoricityCertificate("bounded-one-repeat", K=3, k=3)
    out.append(("blocks-vs-copy", A, B, c3, c3))

    spec = {"kind": "bounded", "fixed": [[1, 2], [3, 1]], "infinite": "omega"}
    A, B = build(spec), build({"kind": "copy", "block": 4, "of": spec})

    def kind1(S):
        return CategoricityCertificate("finitely-many-finite-classes",
                                       finite=[(rep_of_size(S, 1, nth=0), 1), (rep_of_size(S, 1, nth=1), 1),
                                               (rep_of_size(S, 3), 3)])
    out.append(("finitely-many-finite", A, B, kind1(A), kind1(B)))

    spec = {"kind": "bounded", "repeat": [2], "fixed": [[1, 1], [3, 1]], "infinite": 2}
    A, B = build(spec), build({"kind": "copy", "block": 2, "of": spec})

    def kind2(S):
        return CategoricityCertificate("bounded-one-repeat", K=3, k=2,
                                       finite=[(rep_of_size(S, 1), 1), (rep_of_size(S, 3), 3)],
                                       infinite=[rep_of_size(S, 0, nth=0, infinite=True),
                                                 rep_of_size(S, 0, nth=1, infinite=True)])
    out.append(("named-infinite", A, B, kind2(A), kind2(B)))
    return out
