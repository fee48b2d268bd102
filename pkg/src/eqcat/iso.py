"""Isomorphism engines: computable (from certificates), limit (Delta2) and double limit (Delta3).

All three share one matcher.  Every class of A that meets the frontier
{0..N} carries a label at each stage; it is paired with the earliest-found
class of B carrying the same label, and the pair is dropped as soon as the
two labels differ.  Inside a pair the j-th member of the A class goes to
the j-th member of the B class, so each h_s is injective and respects E by
construction.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

from .core import AuditViolation, EqcatError, Structure


class CertificateMismatch(EqcatError):
    pass


class CertificateRefuted(EqcatError):
    pass


class PreconditionUnverifiable(EqcatError):
    pass


KINDS = ("finitely-many-finite-classes", "bounded-one-repeat")


@dataclass(frozen=True)
class CategoricityCertificate:
    """Evidence that a structure falls under one of the computably categorical shapes.

    ``finite`` lists (representative, size) for the named finite classes:
    all finite classes for the first kind, those of size other than ``k``
    for the second.  ``infinite`` lists representatives of the infinite
    classes (second kind only).
    """

    kind: str
    finite: tuple = ()
    infinite: tuple = ()
    K: int | None = None
    k: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown certificate kind {self.kind!r}")
        object.__setattr__(self, "finite", tuple(tuple(p) for p in self.finite))
        object.__setattr__(self, "infinite", tuple(self.infinite))
        if self.kind == "bounded-one-repeat" and self.K is None:
            raise ValueError("a bounded certificate needs K")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "finite": [list(p) for p in self.finite],
                "infinite": list(self.infinite), "K": self.K, "k": self.k}

    @classmethod
    def from_dict(cls, d: dict) -> "CategoricityCertificate":
        return cls(d["kind"], tuple(tuple(p) for p in d.get("finite", ())), tuple(d.get("infinite", ())),
                   d.get("K"), d.get("k"))


def check_certificates(a: CategoricityCertificate, b: CategoricityCertificate) -> None:
    if a.kind != b.kind:
        raise CertificateMismatch(f"kinds differ: {a.kind} vs {b.kind}")
    if (a.K, a.k) != (b.K, b.k):
        raise CertificateMismatch(f"parameters differ: K={a.K},k={a.k} vs K={b.K},k={b.k}")
    if [s for _, s in a.finite] != [s for _, s in b.finite]:
        raise CertificateMismatch("named finite classes do not correspond size for size")
    if len(a.infinite) != len(b.infinite):
        raise CertificateMismatch("different numbers of named infinite classes")


# ---------------------------------------------------------------------------


@dataclass
class IsoApprox:
    """The run of an engine: every change of h_s on the frontier, stage by stage."""

    level: str
    frontier: int
    budget: int
    history: dict = field(default_factory=dict)  # a -> [(stage, image or None), ...]
    retractions: list = field(default_factory=list)

    def image_at(self, a: int, s: int):
        out = None
        for stage, img in self.history.get(a, ()):
            if stage > s:
                break
            out = img
        return out

    def map_at(self, s: int) -> dict:
        out = {}
        for a in self.history:
            b = self.image_at(a, s)
            if b is not None:
                out[a] = b
        return out

    def last_change(self, a: int, s: int):
        last = None
        for stage, _ in self.history.get(a, ()):
            if stage > s:
                break
            last = stage
        return last

    def stabilized(self, budget: int | None = None) -> set:
        """Elements whose image is defined at ``budget`` and unchanged since budget/2.

        A computable map never retracts, so there every defined image counts.
        """
        budget = self.budget if budget is None else budget
        if self.level == "Delta1":
            return set(self.map_at(budget))
        out = set()
        for a in self.history:
            if self.image_at(a, budget) is not None and self.last_change(a, budget) <= budget // 2:
                out.add(a)
        return out

    def retraction_counts(self) -> Counter:
        return Counter(r["element"] for r in self.retractions)

    def is_monotone(self) -> bool:
        """No image ever changes once defined."""
        for changes in self.history.values():
            defined = [img for _, img in changes if img is not None]
            if len(set(defined)) > 1 or any(img is None for _, img in changes[1:]):
                return False
        return True

    def to_dict(self, s: int | None = None) -> dict:
        s = self.budget if s is None else s
        pairs = [[a, b, self.last_change(a, s)] for a, b in sorted(self.map_at(s).items())]
        return {"level": self.level, "frontier": self.frontier, "budget": self.budget,
                "pairs": pairs, "retractions": self.retractions}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"), sort_keys=True)


class _Matcher:
    def __init__(self, A: Structure, B: Structure, level: str, frontier: int, budget: int,
                 label_a: Callable, label_b: Callable, fixed: bool = False, audit: Callable | None = None,
                 hold: int = 0):
        self.A, self.B = A, B
        self.hold = hold
        self.label_a, self.label_b = label_a, label_b
        self.fixed = fixed
        self.audit = audit
        self.N = frontier
        self.out = IsoApprox(level, frontier, budget)
        self.pending = list(range(frontier + 1))
        self.key_of: dict[int, object] = {}
        self.pos: dict[int, int] = {}
        self.order: list = []  # A keys meeting the frontier, in discovery order
        self.partner: dict = {}
        self.taken: dict = {}  # B key -> A key
        self.image: dict[int, tuple | None] = {}

    def _place(self, s: int) -> None:
        still = []
        new_keys = []
        for a in self.pending:
            key = self.A.class_key(a, s)
            if key is None:
                still.append(a)
                continue
            self.key_of[a] = key
            self.pos[a] = self.A.class_members(key, s).index(a)
            if key not in self.partner and key not in new_keys and key not in self.order:
                new_keys.append(key)
        self.pending = still
        if new_keys:
            self.order.extend(new_keys)
            self.order.sort(key=lambda k: (self.A.class_created(k), self.A.class_members(k, s)[0]))

    def _held(self, label_fn, S: Structure, key, label, s: int) -> bool:
        """Whether ``key`` already existed and carried ``label`` at each of the last ``hold`` stages."""
        if not self.hold:
            return True
        if s - self.hold < S.class_created(key):
            return False
        return all(label_fn(key, s - j) == label for j in range(1, self.hold + 1))

    def _find(self, label, s: int, b_classes: list):
        for kb in b_classes:
            if kb not in self.taken and self.label_b(kb, s) == label \
                    and self._held(self.label_b, self.B, kb, label, s):
                return kb
        return None

    def step(self, s: int) -> None:
        A, B = self.A, self.B
        A.run_to(s)
        B.run_to(s)
        self._place(s)
        labels = {ka: self.label_a(ka, s) for ka in self.order}
        for ka, kb in list(self.partner.items()):
            if labels[ka] != self.label_b(kb, s):
                if self.fixed:
                    raise AuditViolation(f"stage {s}: certified labels diverged for {ka}")
                del self.partner[ka]
                del self.taken[kb]
        b_classes = None
        for ka in self.order:
            if ka in self.partner or not self._held(self.label_a, A, ka, labels[ka], s):
                continue
            if b_classes is None:
                b_classes = B.classes(s)
            kb = self._find(labels[ka], s, b_classes)
            if kb is not None:
                self.partner[ka] = kb
                self.taken[kb] = ka
        if self.audit is not None:
            self.audit(s, self)
        for a, ka in self.key_of.items():
            kb = self.partner.get(ka)
            new = None
            if kb is not None and B.class_size(kb, s) > self.pos[a]:
                new = (kb, self.pos[a])
            old = self.image.get(a)
            if new == old:
                continue
            self.image[a] = new
            b_new = B.class_members(kb, s)[self.pos[a]] if new is not None else None
            hist = self.out.history.setdefault(a, [])
            if old is not None:
                self.out.retractions.append({"stage": s, "element": a, "old": hist[-1][1], "new": b_new})
                if self.fixed:
                    raise AuditViolation(f"stage {s}: computable map retracted at {a}")
            hist.append((s, b_new))

    def run(self, budget: int) -> IsoApprox:
        for s in range(budget + 1):
            self.step(s)
        return self.out


# ---------------------------------------------------------------------------
# computable engine


def _cert_keys(S: Structure, cert: CategoricityCertificate):
    finite = [S.final_key(r) for r, _ in cert.finite]
    infinite = [S.final_key(r) for r in cert.infinite]
    keys = finite + infinite
    if len(set(keys)) != len(keys):
        raise CertificateRefuted("two named representatives lie in one class")
    return finite, infinite


def _cert_labeller(S: Structure, cert: CategoricityCertificate, side: str):
    finite, infinite = _cert_keys(S, cert)
    names = {k: ("named", i) for i, k in enumerate(finite)}
    names.update({k: ("infinite", i) for i, k in enumerate(infinite)})
    sizes = {k: size for k, (_, size) in zip(finite, cert.finite)}

    def label(key, s):
        size = S.class_size(key, s)
        if key in sizes and size > sizes[key]:
            raise CertificateRefuted(f"{side}: named class has {size} > {sizes[key]} elements at stage {s}")
        if cert.kind == "bounded-one-repeat" and key not in names:
            limit = cert.k if cert.k is not None else cert.K
            if size > limit:
                raise CertificateRefuted(f"{side}: unnamed class has {size} > {limit} elements at stage {s}")
        return names.get(key, "pool")

    return label


def iso_computable(A: Structure, B: Structure, cert_a: CategoricityCertificate,
                   cert_b: CategoricityCertificate, budget: int, frontier: int | None = None) -> IsoApprox:
    """Back-and-forth from matching certificates; the map only ever grows.

    Named classes go to their named counterparts; the unnamed supply
    (infinite classes for the first kind, size-k classes for the second)
    is paired in order of discovery.
    """
    check_certificates(cert_a, cert_b)
    frontier = budget if frontier is None else frontier
    la = _cert_labeller(A, cert_a, "A")
    lb = _cert_labeller(B, cert_b, "B")
    m = _Matcher(A, B, "Delta1", frontier, budget, la, lb, fixed=True)
    out = m.run(budget)
    # one last sweep over every class present at the budget
    for S, lab in ((A, la), (B, lb)):
        for key in S.classes(budget):
            lab(key, budget)
    return out


# ---------------------------------------------------------------------------
# limit engines


@dataclass
class FinSideInfo:
    """Fin for one structure: ``fin(x)`` total, or ``fin(x, s)`` a stage approximation."""

    fin: Callable
    decidable: bool = True

    def __call__(self, x: int, s: int) -> bool:
        return self.fin(x) if self.decidable else self.fin(x, s)


def threshold_labeller(S: Structure, K: int):
    """Size-m while the class has at most K elements, infinite from K+1 on."""

    def label(key, s):
        size = S.class_size(key, s)
        return "inf" if size >= K + 1 else ("size", size)

    return label


def fin_labeller(S: Structure, info: FinSideInfo):
    def label(key, s):
        rep = S.class_members(key, s)[0]
        if not info(rep, s):
            return "inf"
        return ("size", S.class_size(key, s))

    return label


def iso_delta2(A: Structure, B: Structure, budget: int, boundK: int | None = None,
               fin: tuple | None = None, frontier: int = 100, hold: int = 1) -> IsoApprox:
    """Limit isomorphism from a bound K on finite sizes or from Fin of both sides.

    A class is paired only after its label has stood for ``hold`` stages;
    classes that are still filling up are left alone for a stage instead
    of being matched and then retracted.  ``hold=0`` pairs immediately.
    """
    if boundK is not None:
        la, lb = threshold_labeller(A, boundK), threshold_labeller(B, boundK)
    elif fin is not None:
        la, lb = fin_labeller(A, fin[0]), fin_labeller(B, fin[1])
    else:
        raise PreconditionUnverifiable("need a bound on finite class sizes or Fin for both structures")
    return _Matcher(A, B, "Delta2", frontier, budget, la, lb, hold=hold).run(budget)


def window(s: int, base: int = 8) -> int:
    """No-growth window used at stage s; it escalates with the stage."""
    return max(base, s // 4)


def growth_labeller(S: Structure, base: int = 8):
    """Infinite if the class grew during the last window(s) stages, else its size."""

    def label(key, s):
        w = window(s, base)
        size = S.class_size(key, s)
        if s - w < 0 or S.class_size(key, s - w) != size:
            return "inf"
        return ("size", size)

    return label


def iso_delta3(A: Structure, B: Structure, budget: int, frontier: int = 30, base: int = 8) -> IsoApprox:
    """Double limit: size verdicts from a growing no-growth window, then matching on verdicts."""
    return _Matcher(A, B, "Delta3", frontier, budget, growth_labeller(A, base), growth_labeller(B, base)).run(budget)


# ---------------------------------------------------------------------------


def verify_partial_iso(A: Structure, B: Structure, h: dict, n: int):
    """Check h on {0..n}: defined on placed elements, injective, and E-preserving both ways.

    Returns ``(True, None)`` or ``(False, witness)``.
    """
    dom = []
    for a in range(n + 1):
        if A.final_key_or_none(a) is None:
            continue
        if a not in h:
            return False, {"kind": "undefined", "element": a}
        dom.append(a)
    seen = {}
    for a in dom:
        b = h[a]
        if b in seen:
            return False, {"kind": "not-injective", "pair": [seen[b], a], "image": b}
        seen[b] = a
    keys_a = {a: A.final_key(a) for a in dom}
    keys_b = {a: B.final_key_or_none(h[a]) for a in dom}
    for a in dom:
        if keys_b[a] is None:
            return False, {"kind": "unplaced-image", "element": a, "image": h[a]}
    for i, a in enumerate(dom):
        for b in dom[i + 1:]:
            if (keys_a[a] == keys_a[b]) != (keys_b[a] == keys_b[b]):
                return False, {"kind": "relation", "pair": [a, b], "images": [h[a], h[b]],
                               "related_in_A": keys_a[a] == keys_a[b]}
    return True, None


__all__ = [
    "CertificateMismatch", "CertificateRefuted", "PreconditionUnverifiable", "CategoricityCertificate",
    "check_certificates", "IsoApprox", "iso_computable", "FinSideInfo", "iso_delta2", "iso_delta3",
    "threshold_labeller", "fin_labeller", "growth_labeller", "window", "verify_partial_iso",
]
