import json

import pytest

from eqcat.builders import BoundedCharSpec, EnumerableSet, IdentityStructure, PairT4, computable_copy
from eqcat.catalog import build
from eqcat.core import FinitePartitionStructure, StagedPartition
from eqcat.iso import (
    CategoricityCertificate, CertificateMismatch, CertificateRefuted, FinSideInfo, IsoApprox,
    PreconditionUnverifiable, check_certificates, iso_computable, iso_delta2, iso_delta3, verify_partial_iso,
    window,
)

from .helpers import ONE_SINGLETON_F, computable_pairs, rep_of_size

ONE = CategoricityCertificate("bounded-one-repeat", K=1, k=1)


def test_identity_is_identity():
    A, B = IdentityStructure(), IdentityStructure()
    approx = iso_computable(A, B, ONE, ONE, budget=200, frontier=100)
    assert approx.map_at(200) == {a: a for a in range(101)}
    assert verify_partial_iso(A, B, approx.map_at(200), 100) == (True, None)


def test_one_named_singleton():
    A = build({"kind": "bounded", "repeat": [2], "fixed": [[1, 1]]})
    B = build({"kind": "from-s", "f": ONE_SINGLETON_F})
    ca = CategoricityCertificate("bounded-one-repeat", finite=[(rep_of_size(A, 1), 1)], K=2, k=2)
    cb = CategoricityCertificate("bounded-one-repeat", finite=[(rep_of_size(B, 1), 1)], K=2, k=2)
    approx = iso_computable(A, B, ca, cb, budget=500, frontier=200)
    h = approx.map_at(500)
    assert verify_partial_iso(A, B, h, 200)[0]
    assert h[rep_of_size(A, 1)] == rep_of_size(B, 1)
    assert approx.is_monotone() and not approx.retractions


def test_mismatched_certificates():
    c3 = CategoricityCertificate("bounded-one-repeat", K=3, k=3)
    c2 = CategoricityCertificate("bounded-one-repeat", K=3, k=2)
    with pytest.raises(CertificateMismatch):
        iso_computable(IdentityStructure(), IdentityStructure(), c2, c3, budget=10)
    with pytest.raises(CertificateMismatch):
        check_certificates(CategoricityCertificate("finitely-many-finite-classes", finite=[(0, 1)]), c3)
    with pytest.raises(CertificateMismatch):
        check_certificates(CategoricityCertificate("finitely-many-finite-classes", finite=[(0, 1)]),
                           CategoricityCertificate("finitely-many-finite-classes", finite=[(0, 2)]))


def test_refuted_certificate():
    A = FinitePartitionStructure([[0, 1], [2]])
    bad = CategoricityCertificate("finitely-many-finite-classes", finite=[(0, 1), (2, 1)])
    with pytest.raises(CertificateRefuted):
        iso_computable(A, A, bad, bad, budget=5, frontier=2)
    blocks = build({"kind": "blocks", "size": 3})
    with pytest.raises(CertificateRefuted):
        iso_computable(blocks, blocks, CategoricityCertificate("bounded-one-repeat", K=2, k=2),
                       CategoricityCertificate("bounded-one-repeat", K=2, k=2), budget=20, frontier=10)


def test_certificate_round_trip():
    c = CategoricityCertificate("bounded-one-repeat", finite=[(4, 1)], infinite=[1, 3], K=3, k=2)
    assert CategoricityCertificate.from_dict(json.loads(json.dumps(c.to_dict()))) == c
    with pytest.raises(ValueError):
        CategoricityCertificate("bounded-one-repeat")
    with pytest.raises(ValueError):
        CategoricityCertificate("something-else")


@pytest.mark.parametrize("case", computable_pairs(), ids=lambda c: c[0])
def test_computable_catalog_frontiers(case):
    _, A, B, ca, cb = case
    approx = iso_computable(A, B, ca, cb, budget=600, frontier=300)
    assert approx.is_monotone()
    for s in (150, 300, 600):
        h = approx.map_at(s)
        n = max((a for a in h), default=-1)
        ok, witness = verify_partial_iso(A, B, h, min(n, 300))
        assert ok, witness


# -- Delta2 -------------------------------------------------------------------


def test_delta2_bounded_sigma2():
    A = build({"kind": "sigma2-inf", "pred": "k <= 2 and w == 0"})
    B = build({"kind": "sigma2-inf", "pred": "k <= 2 and w == n"})
    approx = iso_delta2(A, B, 3000, boundK=2, frontier=100)
    stable = approx.stabilized(3000)
    assert set(range(101)) <= stable
    h = {a: approx.image_at(a, 3000) for a in range(101)}
    assert verify_partial_iso(A, B, h, 100)[0]


def test_delta2_fin_decidable_pair():
    p = PairT4(BoundedCharSpec({1, 3}), 1, 3, EnumerableSet.empty())
    always = FinSideInfo(lambda x: True)
    approx = iso_delta2(p.C, p.D, 400, fin=(always, always), frontier=60, hold=0)
    assert approx.is_monotone() and not approx.retractions
    assert verify_partial_iso(p.C, p.D, approx.map_at(400), 60)[0]


class Flip(StagedPartition):
    """Singletons, except that class ``which`` starts growing at stage ``at``."""

    def __init__(self, which=0, at=50):
        super().__init__()
        self.which, self.at = which, at

    def _stage(self, s):
        if s == self.at:
            self.declare_infinite(self.which)
        self.grow_roster()
        self.new_class(1)


def test_delta2_single_reclassification():
    A, B = Flip(0), computable_copy(Flip(1), 2)
    approx = iso_delta2(A, B, 400, boundK=2, frontier=20, hold=0)
    counts = approx.retraction_counts()
    assert set(counts) == {0, 1} and set(counts.values()) == {1}
    # both growing classes change label together from stage 50 on, so one rematch suffices
    assert all(r["stage"] == 50 for r in approx.retractions)
    h = {a: approx.image_at(a, 400) for a in range(21)}
    assert verify_partial_iso(A, B, h, 20)[0]


def test_delta2_needs_a_precondition():
    with pytest.raises(PreconditionUnverifiable):
        iso_delta2(IdentityStructure(), IdentityStructure(), 10)


def test_fin_side_info_stage_form():
    info = FinSideInfo(lambda x, s: s < 5, decidable=False)
    assert info(0, 4) and not info(0, 5)


# -- Delta3 -------------------------------------------------------------------


def test_window_escalates():
    assert window(0) == 8 and window(100) == 25 and window(4000, base=8) == 1000


def test_delta3_from_s():
    cfg = {"kind": "from-s", "f": "i + 1", "r": 1}
    A, B = build(cfg), build(cfg)
    approx = iso_delta3(A, B, 4000, frontier=50)
    stable = approx.stabilized(4000)
    assert set(range(51)) <= stable
    h = {a: approx.image_at(a, 4000) for a in range(51)}
    assert verify_partial_iso(A, B, h, 50)[0]


def test_delta3_identity_is_immediate():
    approx = iso_delta3(IdentityStructure(), IdentityStructure(), 200, frontier=30)
    h = approx.map_at(200)
    assert h == {a: a for a in range(31)}
    assert not approx.retractions


# -- verifier -----------------------------------------------------------------


def test_verify_identity():
    S = IdentityStructure()
    assert verify_partial_iso(S, S, {a: a for a in range(101)}, 100) == (True, None)


def test_verify_pair_onto_singletons():
    A = FinitePartitionStructure([[0, 1], [2], [3]])
    B = FinitePartitionStructure([[0], [1], [2, 3]])
    ok, w = verify_partial_iso(A, B, {0: 0, 1: 1, 2: 2, 3: 3}, 3)
    assert not ok and w["kind"] == "relation" and w["pair"] == [0, 1]


def test_verify_other_witnesses():
    S = IdentityStructure()
    assert verify_partial_iso(S, S, {0: 0, 1: 0}, 1)[1]["kind"] == "not-injective"
    assert verify_partial_iso(S, S, {0: 0}, 1)[1] == {"kind": "undefined", "element": 1}
    F = FinitePartitionStructure([[0], [1]])
    assert verify_partial_iso(S, F, {0: 0, 1: 5}, 1)[1]["kind"] == "unplaced-image"


def test_verify_empty_map_vacuous():
    assert verify_partial_iso(IdentityStructure(), IdentityStructure(), {}, -1) == (True, None)


# -- serialization ------------------------------------------------------------


def test_iso_approx_json():
    approx = iso_delta3(IdentityStructure(), IdentityStructure(), 100, frontier=5)
    d = json.loads(approx.to_json())
    assert d["level"] == "Delta3" and d["budget"] == 100
    assert [p[:2] for p in d["pairs"]] == [[a, a] for a in range(6)]
    assert isinstance(approx, IsoApprox)
