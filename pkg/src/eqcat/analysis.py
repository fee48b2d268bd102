"""Invariants read off built structures: s-functions, s1-functions, characters over time."""

from __future__ import annotations

import bisect
from collections import Counter
from dataclasses import dataclass, field

from .builders.common import MonotonicityViolation, SFunction
from .core import CharacterApprox, Structure


@dataclass
class RepresentativeList:
    """a_0 < a_1 < ..., each the least element unrelated to the earlier ones."""

    reps: list = field(default_factory=list)
    stages: list = field(default_factory=list)  # element frontier at which a_i was found
    excised: tuple = ()
    heuristic: bool = False

    def to_dict(self) -> dict:
        return {"representatives": list(self.reps), "found_at": list(self.stages),
                "excised": list(self.excised), "heuristic": self.heuristic}


class _Scanner:
    """Walks the elements of a structure in order, grouping them by class."""

    def __init__(self, S: Structure):
        self.S = S
        self.next = 0
        self.members: dict = {}  # class key -> sorted elements scanned so far
        self.order: list = []  # class keys in order of least element

    def upto(self, p: int):
        while self.next <= p:
            x = self.next
            key = self.S.final_key(x)
            if key not in self.members:
                self.members[key] = []
                self.order.append(key)
            self.members[key].append(x)
            self.next += 1
            yield x, key

    def scan(self, p: int) -> None:
        for _ in self.upto(p):
            pass

    def count(self, key, p: int) -> int:
        self.scan(p)
        return bisect.bisect_right(self.members.get(key, []), p)


class ExtractedS(SFunction):
    """f(i, s) = card({a <= s : a E a_i}) for the representatives of a structure."""

    def __init__(self, S: Structure, excise=()):
        self.scanner = _Scanner(S)
        self.excise_keys = {S.final_key(x) for x in excise}
        self.excised = tuple(excise)
        super().__init__(self._value, "s", name="extracted-s")

    def _keys(self) -> list:
        return [k for k in self.scanner.order if k not in self.excise_keys]

    def _value(self, i: int, s: int) -> int:
        self.scanner.scan(s)
        keys = self._keys()
        # a_i is the least element of its class, so if it lies beyond s it has no members <= s
        return self.scanner.count(keys[i], s) if i < len(keys) else 0

    def representatives(self, budget: int) -> RepresentativeList:
        self.scanner.scan(budget)
        out = RepresentativeList(excised=self.excised)
        for key in self._keys():
            a = self.scanner.members[key][0]
            out.reps.append(a)
            out.stages.append(a)
        return out


def auto_excise(S: Structure, budget: int, threshold: int) -> list[int]:
    """Heuristic: least elements of classes with more than ``threshold`` members at ``budget``."""
    S.run_to(budget)
    out = []
    for key in S.classes(budget):
        if S.class_infinite(key, budget) or S.class_size(key, budget) > threshold:
            members = S.class_members(key, budget)
            if members:
                out.append(min(members))
    return sorted(out)


def extract_s(S: Structure, budget: int, excise=(), auto_threshold: int | None = None):
    """The s-function of a structure with finitely many infinite classes.

    Representatives of infinite classes can be passed in ``excise``; with
    ``auto_threshold`` the classes already larger than the threshold at
    ``budget`` are excised too and the list is marked heuristic.
    """
    excise = list(excise)
    heuristic = False
    if auto_threshold is not None:
        excise += [x for x in auto_excise(S, budget, auto_threshold) if x not in excise]
        heuristic = True
    f = ExtractedS(S, excise)
    reps = f.representatives(budget)
    reps.heuristic = heuristic
    return f, reps


# ---------------------------------------------------------------------------


@dataclass
class InsufficientEvidence:
    """No admissible frontier p <= budget was found at ``stage``."""

    stage: int
    budget: int
    needed: int
    reason: str = ""

    def to_dict(self) -> dict:
        return {"outcome": "insufficient-evidence", "stage": self.stage, "budget": self.budget,
                "needed": self.needed, "reason": self.reason}


@dataclass
class S1ExtractionState:
    stage: int
    p: int
    reps: list
    counts: list


class ExtractedS1(SFunction):
    """The s1-function obtained by the least-frontier search.

    At stage s+1 the search takes the least p >= p_s for which some b_0 ..
    b_{s+1} have strictly increasing counts among the elements <= p, where
    b_i must stay a_i^s unless a class a_j^s with j <= i gained an element
    in (p_s, p].  Stages beyond the evidence raise
    :class:`InsufficientEvidenceError`.

    A class may fill a free position only if none of its members lies in
    (p/2, p], a finite stand-in for "the whole class is below p".  Without
    it the least p always puts the class being laid out at the frontier
    into the sequence with a partial count, and low indices never settle.
    Free positions are filled one at a time with the earliest-born eligible
    class whose count is above the previous one and still leaves enough
    larger counts for the positions after it.
    """

    def __init__(self, S: Structure, budget: int):
        self.S = S
        self.budget = budget
        self.scanner = _Scanner(S)
        self.cnt: Counter = Counter()  # class key -> members <= p
        self.vals: Counter = Counter()  # count -> number of classes with that count
        self.states: list[S1ExtractionState] = []
        self.failure: InsufficientEvidence | None = None
        self._advance_p(0)
        key0 = S.final_key(0)
        self.states.append(S1ExtractionState(0, 0, [key0], [1]))
        super().__init__(self._value, "s1", name="extracted-s1")

    def _advance_p(self, p: int):
        touched = []
        for _, key in self.scanner.upto(p):
            c = self.cnt[key]
            if c:
                self.vals[c] -= 1
                if not self.vals[c]:
                    del self.vals[c]
            self.cnt[key] = c + 1
            self.vals[c + 1] += 1
            touched.append(key)
        return touched

    def _pick(self, threshold: int, need: int, p: int) -> list | None:
        members = self.scanner.members
        settled = [k for k in self.scanner.order if members[k][-1] <= p // 2 and self.cnt[k] > threshold]
        values = sorted({self.cnt[k] for k in settled})
        if len(values) < need:
            return None
        chosen = []
        for _ in range(need):
            remaining = need - len(chosen) - 1
            for key in settled:
                v = self.cnt[key]
                if v > threshold and len(values) - bisect.bisect_right(values, v) >= remaining:
                    chosen.append(key)
                    threshold = v
                    break
        return chosen

    def _step(self) -> bool:
        prev = self.states[-1]
        s = prev.stage + 1
        index = {key: j for j, key in enumerate(prev.reps)}
        istar = len(prev.reps)
        p = prev.p
        while True:
            if p > prev.p:
                for key in self._advance_p(p):
                    j = index.get(key)
                    if j is not None and j < istar:
                        istar = j
            kept = prev.reps[:istar]
            threshold = self.cnt[kept[-1]] if kept else 0
            chosen = self._pick(threshold, s + 1 - len(kept), p)
            if chosen is not None:
                reps = kept + chosen
                counts = [self.cnt[k] for k in reps]
                if any(a >= b for a, b in zip(counts, counts[1:])):
                    raise MonotonicityViolation(f"stage {s}: counts {counts} not strictly increasing")
                self.states.append(S1ExtractionState(s, p, reps, counts))
                return True
            if p >= self.budget:
                self.failure = InsufficientEvidence(
                    s, self.budget, s + 1 - len(kept),
                    f"fewer than {s + 1 - len(kept)} distinct class sizes above {threshold} among elements <= {p}")
                return False
            p += 1

    def run_stages(self, stages: int) -> bool:
        while len(self.states) <= stages:
            if self.failure is not None or not self._step():
                return False
        return True

    def _value(self, i: int, s: int) -> int:
        if not self.run_stages(s):
            raise InsufficientEvidenceError(self.failure)
        st = self.states[s]
        return st.counts[i] if i < len(st.counts) else 0

    def representative(self, i: int, s: int) -> int:
        self.run_stages(s)
        return self.scanner.members[self.states[s].reps[i]][0]


class InsufficientEvidenceError(Exception):
    def __init__(self, evidence: InsufficientEvidence):
        super().__init__(evidence.reason)
        self.evidence = evidence


def extract_s1(S: Structure, budget: int, stages: int | None = None):
    """Run the least-frontier search for ``stages`` stages with frontier <= ``budget``.

    Returns the extracted s1-function, or an :class:`InsufficientEvidence`
    record when some stage has no admissible frontier within the budget.
    With ``stages`` omitted the search runs until the budget is exhausted
    and returns what it has, failing only if stage 1 cannot be completed.
    """
    g = ExtractedS1(S, budget)
    if stages is None:
        g.run_stages(budget)
        if len(g.states) < 2:
            return g.failure
        return g
    if not g.run_stages(stages):
        return g.failure
    return g


def settled_limits(g: ExtractedS1, count: int, window: int = 1) -> list[int]:
    """Values f(i, last) for i < count, the stage-``last`` guesses at the limits."""
    last = len(g.states) - 1
    return [g.states[last].counts[i] for i in range(min(count, len(g.states[last].counts)))]


# ---------------------------------------------------------------------------


def s1_range_member(f: SFunction, m: int, budget: int) -> dict:
    """Whether m is a limit of f, judged two ways at a finite budget.

    Sigma form: some column i <= m is equal to m from a stage s <= budget/2
    through budget.  Pi form: for every s <= budget/2 some t in (s, budget]
    has f(i, t) = m.  The quantified stage ranges over the first half of
    the budget so that both forms need evidence from the second half.
    """
    half = budget // 2
    sigma_i = pi_i = None
    for i in range(m + 1) if m > 0 else ():
        if f(i, half) > m:
            continue
        if sigma_i is None and all(f(i, t) == m for t in range(half + 1, budget + 1)):
            sigma_i = i
        if pi_i is None and any(f(i, t) == m for t in range(half + 1, budget + 1)):
            pi_i = i
    sigma, pi = sigma_i is not None, pi_i is not None
    return {"m": m, "budget": budget, "member": sigma, "sigma": sigma, "pi": pi,
            "index": sigma_i if sigma else pi_i, "agree": sigma == pi}


def character_trace(S: Structure, stages) -> list[CharacterApprox]:
    stages = list(stages)
    if stages != sorted(stages):
        raise ValueError("stages must be ascending")
    return [S.character_at_stage(s) for s in stages]


__all__ = [
    "RepresentativeList", "ExtractedS", "extract_s", "auto_excise", "InsufficientEvidence",
    "InsufficientEvidenceError", "S1ExtractionState", "ExtractedS1", "extract_s1", "settled_limits",
    "s1_range_member", "character_trace",
]
