"""Zero-error partial-correction verification over the binary adder channel.

For a tuple of per-user binary codebooks sent through y = sum(x_j) + s
with states 0..ell, decodability hinges on two output multisets: the
"clean" outputs reachable with the all-zero state sequence, and the
"attacked" outputs reachable with any other state sequence.  A tuple
admits a decoder with zero probability of partial-correction error
(recovering at least ceil(gamma*t) users, flagging the rest with 0) if
and only if

  (1) no attacked output collides with a clean output,
  (2) clean outputs are pairwise distinct, and
  (3) every attacked output reachable more than one way pins down at
      least ceil(gamma*t) users' codewords.

All three checks run on exact integer vectors; (1) and a fast variant of
(3) scan differences of clean sums instead of materializing the attacked
multiset.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from .feasibility import ceil_frac

Vec = tuple[int, ...]
MsgTuple = tuple[int, ...]  # 1-based message index per user

DEFAULT_BUDGET = 4_000_000


class VerificationBudgetError(RuntimeError):
    """Enumerating attacked outputs would exceed the configured budget."""


class CodebookFormatError(ValueError):
    """Raised when a codebook file cannot be parsed."""


@dataclass(frozen=True)
class CodebookTuple:
    """Per-user binary codebooks of a common block length.

    Message i of user j (1-based) is encoded as codebooks[j-1][i-1].
    Codewords within one codebook must be distinct.
    """

    codebooks: tuple[tuple[Vec, ...], ...]

    def __post_init__(self) -> None:
        if not self.codebooks:
            raise ValueError("need at least one codebook")
        n = len(self.codebooks[0][0]) if self.codebooks[0] else 0
        for j, cb in enumerate(self.codebooks):
            if not cb:
                raise ValueError(f"codebook {j + 1} is empty")
            for w in cb:
                if len(w) != n:
                    raise ValueError(f"codebook {j + 1} mixes block lengths {len(w)} and {n}")
                if any(b not in (0, 1) for b in w):
                    raise ValueError(f"codeword {w} in codebook {j + 1} is not binary")
            if len(set(cb)) != len(cb):
                raise ValueError(f"codebook {j + 1} repeats a codeword")

    @property
    def t(self) -> int:
        return len(self.codebooks)

    @property
    def n(self) -> int:
        return len(self.codebooks[0][0])

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(cb) for cb in self.codebooks)

    def codeword(self, user: int, msg: int) -> Vec:
        """Codeword of 1-based message `msg` for 1-based `user`."""
        return self.codebooks[user - 1][msg - 1]

    def message_tuples(self) -> Iterator[MsgTuple]:
        return itertools.product(*(range(1, m + 1) for m in self.sizes))

    def encode(self, msgs: Sequence[int]) -> tuple[Vec, ...]:
        return tuple(self.codeword(j + 1, m) for j, m in enumerate(msgs))

    def rates(self) -> tuple[Fraction | float, ...]:
        return tuple(log2_rate(m, self.n) for m in self.sizes)


def log2_rate(size: int, length: int) -> Fraction | float:
    """log2(size)/length, exact when size is a power of two."""
    if size < 1 or length < 1:
        raise ValueError("size and length must be positive")
    if size & (size - 1) == 0:
        return Fraction(size.bit_length() - 1, length)
    return math.log2(size) / length


def vec_add(a: Vec, b: Vec) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


def vec_sub(a: Vec, b: Vec) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def codeword_sum(cb: CodebookTuple, msgs: MsgTuple) -> Vec:
    total = cb.codeword(1, msgs[0])
    for j in range(2, cb.t + 1):
        total = vec_add(total, cb.codeword(j, msgs[j - 1]))
    return total


def build_clean_outputs(cb: CodebookTuple) -> dict[Vec, list[MsgTuple]]:
    """All no-adversary output sums, grouped with their message tuples.

    Iteration order of the dict follows lexicographic message order, so
    reports built from it are deterministic.
    """
    out: dict[Vec, list[MsgTuple]] = {}
    for msgs in cb.message_tuples():
        out.setdefault(codeword_sum(cb, msgs), []).append(msgs)
    return out


def nonzero_state_sequences(ell: int, n: int) -> Iterator[Vec]:
    zero = (0,) * n
    for s in itertools.product(range(ell + 1), repeat=n):
        if s != zero:
            yield s


# ---------------------------------------------------------------------------
# witnesses and report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CollisionWitness:
    """Condition-1 failure: clean_sum = base_sum + state_diff."""

    clean_sum: Vec
    base_sum: Vec
    state_diff: Vec
    clean_msgs: MsgTuple
    base_msgs: MsgTuple


@dataclass(frozen=True)
class CleanDuplicateWitness:
    """Condition-2 failure: several message tuples share one clean sum."""

    output: Vec
    msgs: tuple[MsgTuple, ...]


@dataclass(frozen=True)
class AgreementWitness:
    """Condition-3 failure: an attacked output whose decompositions agree
    on fewer than the required number of users."""

    output: Vec
    decompositions: tuple[tuple[Vec, MsgTuple], ...]  # (state sequence, messages)
    agreement: tuple[int, ...]  # 1-based users on which all decompositions agree


@dataclass(frozen=True)
class ConditionFailure:
    condition: int  # 1, 2 or 3
    witness: CollisionWitness | CleanDuplicateWitness | AgreementWitness


@dataclass
class PartialCorrectionReport:
    ok: bool
    gamma: Fraction
    u: int
    ell: int
    failures: list[ConditionFailure] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok

    def failures_for(self, condition: int) -> list[ConditionFailure]:
        return [f for f in self.failures if f.condition == condition]


# ---------------------------------------------------------------------------
# the three conditions
# ---------------------------------------------------------------------------


def check_attack_collision(cb: CodebookTuple, ell: int, collect_all: bool = False) -> list[CollisionWitness]:
    """Condition 1: no clean output is another clean output plus a state sequence.

    Scans ordered pairs of distinct-as-vectors clean sums u != v and
    flags u - v landing in {0..ell}^n.  Equal-vector collisions are
    condition 2's job.  Returns witnesses ([] means the condition holds);
    with collect_all the full list, else at most the first in scan order.
    """
    if ell < 1:
        raise ValueError(f"state bound must be >= 1, got ell={ell}")
    clean = build_clean_outputs(cb)
    sums = list(clean.keys())
    found: list[CollisionWitness] = []
    for u in sums:
        for v in sums:
            if u == v:
                continue
            diff = vec_sub(u, v)
            if all(0 <= d <= ell for d in diff):
                found.append(
                    CollisionWitness(
                        clean_sum=u,
                        base_sum=v,
                        state_diff=diff,
                        clean_msgs=clean[u][0],
                        base_msgs=clean[v][0],
                    )
                )
                if not collect_all:
                    return found
    return found


def check_clean_collision(cb: CodebookTuple, collect_all: bool = False) -> list[CleanDuplicateWitness]:
    """Condition 2: distinct message tuples must give distinct clean sums."""
    found: list[CleanDuplicateWitness] = []
    for output, msgs in build_clean_outputs(cb).items():
        if len(msgs) > 1:
            found.append(CleanDuplicateWitness(output=output, msgs=tuple(msgs)))
            if not collect_all:
                return found
    return found


def _agreement_mask(t: int) -> int:
    return (1 << t) - 1


def _attacked_output_count(cb: CodebookTuple, ell: int) -> int:
    total_msgs = 1
    for m in cb.sizes:
        total_msgs *= m
    return ((ell + 1) ** cb.n - 1) * total_msgs


def check_attack_agreement(
    cb: CodebookTuple,
    ell: int,
    gamma: Fraction,
    collect_all: bool = False,
    budget: int = DEFAULT_BUDGET,
) -> list[AgreementWitness]:
    """Condition 3, ground truth: group every attacked output by value and
    require the users on which all of its decompositions agree to number
    at least ceil(gamma*t).

    Streams state sequence x message tuple pairs and keeps one compressed
    entry per distinct output; decomposition lists for witnesses are
    collected in a second pass over the failing outputs only.  Raises
    VerificationBudgetError when the stream would exceed `budget` items.
    """
    gamma = Fraction(gamma)
    if not 0 < gamma < 1:
        raise ValueError(f"gamma must lie strictly between 0 and 1, got {gamma}")
    if ell < 1:
        raise ValueError(f"state bound must be >= 1, got ell={ell}")
    u_req = ceil_frac(gamma, cb.t)
    items = _attacked_output_count(cb, ell)
    if items > budget:
        raise VerificationBudgetError(
            f"attacked-output stream has {items} entries, over the budget of {budget}"
        )

    clean = build_clean_outputs(cb)
    full = _agreement_mask(cb.t)
    # output -> [count, codeword-ids of first decomposition, agreement bitmask]
    seen: dict[Vec, list] = {}
    for s in nonzero_state_sequences(ell, cb.n):
        for output_base, msg_list in clean.items():
            w = vec_add(output_base, s)
            for msgs in msg_list:
                entry = seen.get(w)
                if entry is None:
                    seen[w] = [1, msgs, full]
                else:
                    entry[0] += 1
                    first = entry[1]
                    mask = entry[2]
                    if mask:
                        for j in range(cb.t):
                            if mask >> j & 1 and msgs[j] != first[j]:
                                mask &= ~(1 << j)
                        entry[2] = mask

    failing = [
        w
        for w, (count, _, mask) in seen.items()
        if count > 1 and bin(mask).count("1") < u_req
    ]
    if not failing:
        return []
    if not collect_all:
        failing = failing[:1]

    witnesses = []
    failing_set = set(failing)
    decomps: dict[Vec, list[tuple[Vec, MsgTuple]]] = {w: [] for w in failing}
    for s in nonzero_state_sequences(ell, cb.n):
        for output_base, msg_list in clean.items():
            w = vec_add(output_base, s)
            if w in failing_set:
                for msgs in msg_list:
                    decomps[w].append((s, msgs))
    for w in failing:
        mask = seen[w][2]
        agree = tuple(j + 1 for j in range(cb.t) if mask >> j & 1)
        witnesses.append(AgreementWitness(output=w, decompositions=tuple(decomps[w]), agreement=agree))
    return witnesses


@dataclass(frozen=True)
class SuspiciousPair:
    """Two clean sums whose decompositions differ on too many users while
    staying within one state sequence of each other."""

    sum_a: Vec
    sum_b: Vec
    msgs_a: MsgTuple
    msgs_b: MsgTuple
    differing_users: tuple[int, ...]


def scan_attack_agreement_fast(cb: CodebookTuple, ell: int, gamma: Fraction) -> list[SuspiciousPair]:
    """Sound fast detector for condition-3 failures.

    Reports every pair of clean-sum decompositions that differ on at
    least t - ceil(gamma*t) + 1 users with |sum_a - sum_b| entrywise at
    most ell.  Each reported pair certifies a condition-3 failure; the
    ground-truth check remains check_attack_agreement.
    """
    gamma = Fraction(gamma)
    if not 0 < gamma < 1:
        raise ValueError(f"gamma must lie strictly between 0 and 1, got {gamma}")
    if ell < 1:
        raise ValueError(f"state bound must be >= 1, got ell={ell}")
    u_req = ceil_frac(gamma, cb.t)
    need_diff = cb.t - u_req + 1
    entries = [(codeword_sum(cb, msgs), msgs) for msgs in cb.message_tuples()]
    found = []
    for (ua, ma), (ub, mb) in itertools.combinations(entries, 2):
        differing = tuple(j + 1 for j in range(cb.t) if ma[j] != mb[j])
        if len(differing) < need_diff:
            continue
        if all(abs(a - b) <= ell for a, b in zip(ua, ub)):
            found.append(SuspiciousPair(sum_a=ua, sum_b=ub, msgs_a=ma, msgs_b=mb, differing_users=differing))
    return found


def verify_zero_error(
    cb: CodebookTuple,
    ell: int,
    gamma: Fraction,
    collect_all: bool = True,
    budget: int = DEFAULT_BUDGET,
) -> PartialCorrectionReport:
    """Full zero-error verdict: conjunction of the three conditions, with
    collected witnesses for each failure."""
    gamma = Fraction(gamma)
    if not 0 < gamma < 1:
        raise ValueError(f"gamma must lie strictly between 0 and 1, got {gamma}")
    failures: list[ConditionFailure] = []
    for w1 in check_attack_collision(cb, ell, collect_all=collect_all):
        failures.append(ConditionFailure(condition=1, witness=w1))
    for w2 in check_clean_collision(cb, collect_all=collect_all):
        failures.append(ConditionFailure(condition=2, witness=w2))
    for w3 in check_attack_agreement(cb, ell, gamma, collect_all=collect_all, budget=budget):
        failures.append(ConditionFailure(condition=3, witness=w3))
    return PartialCorrectionReport(
        ok=not failures,
        gamma=gamma,
        u=ceil_frac(gamma, cb.t),
        ell=ell,
        failures=failures,
    )


# ---------------------------------------------------------------------------
# decoding
# ---------------------------------------------------------------------------


class AdderDecoder:
    """Table decoder for a codebook tuple over the adder channel.

    Decodes an output sequence to a tuple of per-user messages, with 0
    marking a user whose message could not be pinned down:

    * a clean output with a unique decomposition decodes in full;
    * a clean output with several decompositions (only possible for
      unverified tuples) keeps the users on which all agree;
    * an attacked output keeps the users on which all of its
      decompositions agree;
    * anything else - including outputs outside both tables - decodes to
      the all-zero tuple, the convention for "adversary detected".

    Built tables are independent of verification, so the decoder can be
    used to measure error rates of failing tuples; the zero-error
    guarantees of course only hold once verify_zero_error passes.
    """

    def __init__(self, cb: CodebookTuple, ell: int, gamma: Fraction, budget: int = DEFAULT_BUDGET):
        gamma = Fraction(gamma)
        if not 0 < gamma < 1:
            raise ValueError(f"gamma must lie strictly between 0 and 1, got {gamma}")
        if ell < 1:
            raise ValueError(f"state bound must be >= 1, got ell={ell}")
        self.cb = cb
        self.ell = ell
        self.gamma = gamma
        self.u = ceil_frac(gamma, cb.t)
        items = _attacked_output_count(cb, ell)
        if items > budget:
            raise VerificationBudgetError(
                f"attacked-output table has {items} entries, over the budget of {budget}"
            )
        clean = build_clean_outputs(cb)
        self._clean: dict[Vec, MsgTuple] = {}
        for output, msgs in clean.items():
            self._clean[output] = _agreeing_messages(cb.t, msgs)
        partial: dict[Vec, MsgTuple] = {}
        for s in nonzero_state_sequences(ell, cb.n):
            for output_base, msg_list in clean.items():
                w = vec_add(output_base, s)
                for msgs in msg_list:
                    prev = partial.get(w)
                    if prev is None:
                        partial[w] = msgs
                    elif prev != msgs:
                        partial[w] = tuple(
                            p if p == m else 0 for p, m in zip(prev, msgs)
                        )
        self._attacked = partial

    def __call__(self, y: Sequence[int]) -> MsgTuple:
        y = tuple(y)
        hit = self._clean.get(y)
        if hit is not None:
            return hit
        hit = self._attacked.get(y)
        if hit is not None:
            return hit
        return (0,) * self.cb.t


def _agreeing_messages(t: int, msgs: Sequence[MsgTuple]) -> MsgTuple:
    first = msgs[0]
    if len(msgs) == 1:
        return first
    return tuple(
        first[j] if all(m[j] == first[j] for m in msgs) else 0 for j in range(t)
    )


def canonical_decode(
    cb: CodebookTuple, ell: int, gamma: Fraction, y: Sequence[int], budget: int = DEFAULT_BUDGET
) -> MsgTuple:
    """One-shot decode requiring a verified tuple.

    Raises ValueError when the tuple does not verify; batch callers
    should verify once and reuse an AdderDecoder instead.
    """
    report = verify_zero_error(cb, ell, gamma, collect_all=False, budget=budget)
    if not report.ok:
        raise ValueError("codebook tuple fails zero-error verification; canonical decoding is undefined")
    return AdderDecoder(cb, ell, gamma, budget=budget)(y)


# ---------------------------------------------------------------------------
# structural filters
# ---------------------------------------------------------------------------


def support_leq(a: Vec, b: Vec) -> bool:
    """supp(a) contained in supp(b), for binary vectors."""
    return all(x <= y for x, y in zip(a, b))


def check_antichain(codebook: Sequence[Vec]) -> tuple[Vec, Vec] | None:
    """None when no codeword's support contains another's; else the pair
    (smaller, larger) in first-scan order."""
    words = list(codebook)
    for a, b in itertools.combinations(words, 2):
        if support_leq(a, b):
            return (a, b)
        if support_leq(b, a):
            return (b, a)
    return None


@dataclass(frozen=True)
class UnionStructureViolation:
    reason: str
    detail: tuple


def check_union_structure(c1: Sequence[Vec], c2: Sequence[Vec]) -> UnionStructureViolation | None:
    """Necessary structure of a two-user zero-error pair (unit state bound,
    half correction): disjoint codebooks whose union carries no three
    pairwise-disjoint support-related pairs, and any two disjoint related
    pairs put their smaller elements in distinct codebooks.

    Related pairs that share a codeword are allowed; they occur in
    genuinely verified pairs (e.g. {001,010} with {011,100}), so
    rejecting them would make this filter unsound.
    """
    if len(c1) <= 1 or len(c2) <= 1:
        raise ValueError("union structure check needs both codebooks larger than one codeword")
    s1, s2 = set(c1), set(c2)
    inter = s1 & s2
    if inter:
        return UnionStructureViolation("codebooks intersect", tuple(sorted(inter)))
    union = sorted(s1 | s2)
    related = []  # (smaller, larger)
    for a, b in itertools.combinations(union, 2):
        if support_leq(a, b):
            related.append((a, b))
        elif support_leq(b, a):
            related.append((b, a))
    for small, large in related:
        if (small in s1 and large in s1) or (small in s2 and large in s2):
            return UnionStructureViolation("related pair inside one codebook", ((small, large),))
    for pair_a, pair_b in itertools.combinations(related, 2):
        if set(pair_a) & set(pair_b):
            continue
        sa, sb = pair_a[0], pair_b[0]
        if (sa in s1) == (sb in s1):
            return UnionStructureViolation(
                "disjoint related pairs with smaller elements in one codebook",
                (pair_a, pair_b),
            )
    for trio in itertools.combinations(related, 3):
        members = [set(p) for p in trio]
        if not (members[0] & members[1] or members[0] & members[2] or members[1] & members[2]):
            return UnionStructureViolation("three pairwise-disjoint related pairs", trio)
    return None


def sperner_bound(n: int) -> int:
    """Maximum size of the union of a valid two-user pair: the largest
    antichain in the n-cube plus the two permitted related elements."""
    if n < 1:
        raise ValueError(f"block length must be >= 1, got n={n}")
    return math.comb(n, (n + 1) // 2) + 2


# ---------------------------------------------------------------------------
# codebook file format: one section per user, one 0/1 string per line
# ---------------------------------------------------------------------------

_HEADER = "avmac-codebook v1"


def parse_codeword(token: str) -> Vec:
    if not token or any(c not in "01" for c in token):
        raise CodebookFormatError(f"codeword {token!r} is not a 0/1 string")
    return tuple(int(c) for c in token)


def format_codeword(w: Vec) -> str:
    return "".join(str(b) for b in w)


def serialize_codebooks(cb: CodebookTuple) -> str:
    lines = [_HEADER]
    for j, book in enumerate(cb.codebooks, start=1):
        lines.append(f"user {j}")
        lines.extend(format_codeword(w) for w in book)
    return "\n".join(lines) + "\n"


def parse_codebooks(text: str) -> CodebookTuple:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0] != _HEADER:
        raise CodebookFormatError(f"missing header line {_HEADER!r}")
    books: list[list[Vec]] = []
    for ln in lines[1:]:
        if ln.startswith("user "):
            idx = int(ln.split()[1])
            if idx != len(books) + 1:
                raise CodebookFormatError(f"user sections out of order at {ln!r}")
            books.append([])
        else:
            if not books:
                raise CodebookFormatError(f"codeword line {ln!r} before any user section")
            books[-1].append(parse_codeword(ln))
    if not books:
        raise CodebookFormatError("no user sections found")
    try:
        return CodebookTuple(codebooks=tuple(tuple(b) for b in books))
    except ValueError as exc:
        raise CodebookFormatError(str(exc)) from exc
