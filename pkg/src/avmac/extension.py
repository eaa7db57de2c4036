"""Block-length extension by concatenation with outer erasure codes.

A verified inner tuple guarantees that in each of r concatenated time
instances at least u = ceil(gamma*t) users decode correctly while the
rest are flagged as erased.  An adversary who always erases t-u users
per instance and concentrates on t-u+1 users still leaves some u users
with at most floor(r(t-u)/(t-u+1)) erasures each, so per-user outer
codes with minimum distance above that budget recover at least u users'
messages in full.  This module builds such plans, encodes/decodes them,
and exhaustively checks small plans against every admissible erasure
pattern.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from .codebooks import CodebookTuple, Vec, log2_rate, verify_zero_error
from .feasibility import ceil_frac

DEFAULT_PATTERN_BUDGET = 2_000_000

OuterCode = tuple[tuple[int, ...], ...]  # codewords over 0-based symbols


class PatternBudgetError(RuntimeError):
    """Exhausting erasure patterns would exceed the configured budget."""


def erasure_budget(t: int, u: int, r: int) -> int:
    """Worst-case erasures that the best-off u users can be forced to carry
    over r instances: floor(r(t-u)/(t-u+1))."""
    if t < 2:
        raise ValueError(f"need at least 2 users, got t={t}")
    if not 1 <= u < t:
        raise ValueError(f"correctable user count must satisfy 1 <= u < t, got u={u}")
    if r < 0:
        raise ValueError(f"repetition count must be >= 0, got r={r}")
    return (r * (t - u)) // (t - u + 1)


@dataclass(frozen=True)
class ErasurePattern:
    """Boolean grid, one row per user and one column per time instance;
    True marks an erased inner block."""

    grid: tuple[tuple[bool, ...], ...]

    @property
    def t(self) -> int:
        return len(self.grid)

    @property
    def r(self) -> int:
        return len(self.grid[0]) if self.grid else 0

    @classmethod
    def from_columns(cls, t: int, columns: Sequence[frozenset[int] | set[int]]) -> "ErasurePattern":
        """Build from per-instance sets of erased users (0-based)."""
        return cls(grid=tuple(tuple(j in col for col in columns) for j in range(t)))

    def erasures_per_user(self) -> tuple[int, ...]:
        return tuple(sum(row) for row in self.grid)

    def erased_instances(self, user: int) -> tuple[int, ...]:
        """0-based instances erased for a 0-based user."""
        return tuple(k for k, e in enumerate(self.grid[user]) if e)

    def admissible(self, u: int) -> bool:
        """At most t-u erasures in every time instance."""
        limit = self.t - u
        return all(sum(self.grid[j][k] for j in range(self.t)) <= limit for k in range(self.r))


def best_users_erasure_load(pattern: ErasurePattern, u: int) -> int:
    """Erasures carried by the worst member of the best size-u user subset;
    equivalently the u-th smallest per-user erasure count."""
    counts = sorted(pattern.erasures_per_user())
    if not 1 <= u <= len(counts):
        raise ValueError(f"u={u} outside 1..{len(counts)}")
    return counts[u - 1]


def concentrated_pattern(t: int, u: int, r: int) -> ErasurePattern:
    """The adversary's optimal strategy: erase t-u users per instance,
    rotating over the first t-u+1 users so their loads stay balanced."""
    erasure_budget(t, u, r)  # argument validation
    width = t - u
    targets = list(range(t - u + 1))
    columns = []
    for k in range(r):
        start = (k * width) % len(targets)
        col = {targets[(start + i) % len(targets)] for i in range(width)}
        columns.append(col)
    return ErasurePattern.from_columns(t, columns)


def admissible_patterns(t: int, u: int, r: int) -> Iterator[ErasurePattern]:
    """All patterns erasing exactly t-u users per instance.

    Any admissible pattern is dominated coordinatewise by one of these,
    and both the adversary's objective and decode failure are monotone in
    added erasures, so exhausting only the full-width columns is enough.
    """
    column_choices = [frozenset(c) for c in itertools.combinations(range(t), t - u)]
    for cols in itertools.product(column_choices, repeat=r):
        yield ErasurePattern.from_columns(t, cols)


def worst_case_erasures(
    t: int, u: int, r: int, budget: int = DEFAULT_PATTERN_BUDGET
) -> tuple[int, ErasurePattern]:
    """Exhaustive maximum of the best-u-users erasure load, with a
    maximizing pattern.

    Column order does not affect per-user counts, so the search runs over
    multisets of columns; the witness is expanded back to a concrete
    pattern.  Guarded by `budget` on the multiset count.
    """
    erasure_budget(t, u, r)  # argument validation
    if r == 0:
        return 0, ErasurePattern.from_columns(t, [])
    column_choices = [frozenset(c) for c in itertools.combinations(range(t), t - u)]
    count = _multiset_count(len(column_choices), r)
    if count > budget:
        raise PatternBudgetError(
            f"{count} column multisets exceed the exhaustive budget of {budget}"
        )
    best = -1
    best_pattern: ErasurePattern | None = None
    for combo in itertools.combinations_with_replacement(column_choices, r):
        counts = [0] * t
        for col in combo:
            for j in col:
                counts[j] += 1
        value = sorted(counts)[u - 1]
        if value > best:
            best = value
            best_pattern = ErasurePattern.from_columns(t, combo)
    assert best_pattern is not None
    return best, best_pattern


def _multiset_count(kinds: int, picks: int) -> int:
    import math

    return math.comb(picks + kinds - 1, kinds - 1)


def min_distance(code: Sequence[Sequence[int]]) -> int:
    """Minimum pairwise Hamming distance; needs at least two codewords."""
    words = [tuple(w) for w in code]
    if len(words) < 2:
        raise ValueError("minimum distance needs at least two codewords")
    n = len(words[0])
    for w in words:
        if len(w) != n:
            raise ValueError("codewords must share a common length")
    return min(
        sum(a != b for a, b in zip(x, y)) for x, y in itertools.combinations(words, 2)
    )


@dataclass(frozen=True)
class ExtensionPlan:
    """Concatenation plan: verified inner tuple plus per-user outer codes.

    Outer codewords are tuples over {0..M_j-1}; symbol v at instance k
    expands to inner codeword v (0-based) of that user.  Outer message
    indices are 1-based, with 0 meaning "discarded" on the decode side.
    """

    inner: CodebookTuple
    outer: tuple[OuterCode, ...]
    r: int
    ell: int
    gamma: Fraction
    u: int
    budget: int
    required_dmin: int
    warnings: tuple[str, ...] = field(default=())

    @property
    def t(self) -> int:
        return self.inner.t

    def inner_rates(self) -> tuple[Fraction | float, ...]:
        return self.inner.rates()

    def outer_rates(self) -> tuple[Fraction | float, ...]:
        return tuple(log2_rate(len(c), self.r) if self.r > 0 else Fraction(0) for c in self.outer)


def build_plan(
    inner: CodebookTuple,
    outer: Sequence[Sequence[Sequence[int]]],
    r: int,
    ell: int,
    gamma: Fraction,
    check_inner: bool = True,
) -> ExtensionPlan:
    """Assemble and sanity-check a concatenation plan.

    The inner tuple must verify zero-error at (ell, gamma); outer codes
    must have length r with symbols inside each user's message alphabet.
    Outer codes below the required minimum distance only WARN, so
    deliberately weak plans remain constructible for experiments.
    """
    gamma = Fraction(gamma)
    t = inner.t
    u = ceil_frac(gamma, t)
    if not 1 <= u < t:
        raise ValueError(f"ceil(gamma*t)={u} leaves no user erasable; need 1 <= u < t={t}")
    if len(outer) != t:
        raise ValueError(f"{len(outer)} outer codes for {t} users")
    if check_inner:
        report = verify_zero_error(inner, ell, gamma)
        if not report.ok:
            raise ValueError(
                f"inner tuple fails zero-error verification ({len(report.failures)} failures)"
            )
    outer_t: list[OuterCode] = []
    for j, code in enumerate(outer):
        words = tuple(tuple(w) for w in code)
        if not words:
            raise ValueError(f"outer code for user {j + 1} is empty")
        for w in words:
            if len(w) != r:
                raise ValueError(f"outer codeword {w} for user {j + 1} has length {len(w)}, expected r={r}")
            if any(not 0 <= v < inner.sizes[j] for v in w):
                raise ValueError(
                    f"outer codeword {w} for user {j + 1} uses symbols outside 0..{inner.sizes[j] - 1}"
                )
        if len(set(words)) != len(words):
            raise ValueError(f"outer code for user {j + 1} repeats a codeword")
        outer_t.append(words)
    budget = erasure_budget(t, u, r) if r > 0 else 0
    required = budget + 1
    warnings = []
    for j, words in enumerate(outer_t):
        if len(words) >= 2 and r > 0:
            d = min_distance(words)
            if d < required:
                warnings.append(
                    f"outer code for user {j + 1} has minimum distance {d} < required {required}"
                )
    return ExtensionPlan(
        inner=inner,
        outer=tuple(outer_t),
        r=r,
        ell=ell,
        gamma=gamma,
        u=u,
        budget=budget,
        required_dmin=required,
        warnings=tuple(warnings),
    )


def concat_encode(plan: ExtensionPlan, messages: Sequence[int]) -> tuple[Vec, ...]:
    """Expand per-user outer messages (1-based) into length r*n symbol rows."""
    if len(messages) != plan.t:
        raise ValueError(f"{len(messages)} messages for {plan.t} users")
    rows = []
    for j, msg in enumerate(messages):
        code = plan.outer[j]
        if not 1 <= msg <= len(code):
            raise ValueError(f"outer message {msg} for user {j + 1} outside 1..{len(code)}")
        word = code[msg - 1]
        bits: list[int] = []
        for symbol in word:
            bits.extend(plan.inner.codebooks[j][symbol])
        rows.append(tuple(bits))
    return tuple(rows)


def erasure_decode_user(code: OuterCode, observed: Sequence[tuple[int, int]]) -> int:
    """Unique-completion erasure decoding for one user.

    `observed` holds (position, symbol) pairs for the unerased instances.
    Returns the 1-based index of the unique consistent codeword, or 0
    when no or several codewords remain.
    """
    candidates = [
        i for i, w in enumerate(code) if all(w[k] == v for k, v in observed)
    ]
    if len(candidates) == 1:
        return candidates[0] + 1
    return 0


@dataclass
class ConcatDecodeResult:
    estimates: tuple[int, ...]  # 1-based outer messages, 0 = discarded
    recovered: int

    def __iter__(self):
        return iter((self.estimates, self.recovered))


def concat_decode(plan: ExtensionPlan, inner_results: Sequence[Sequence[int]]) -> ConcatDecodeResult:
    """Decode per-instance inner results into outer message estimates.

    `inner_results[k][j]` is the inner decoder's output for user j at
    instance k: a 1-based inner message, or 0 for an erasure.  Nonzero
    inner symbols are trusted (the zero-error inner guarantee); each
    user's outer message is recovered by unique completion.
    """
    if len(inner_results) != plan.r:
        raise ValueError(f"{len(inner_results)} instances, expected r={plan.r}")
    for k, row in enumerate(inner_results):
        if len(row) != plan.t:
            raise ValueError(f"instance {k} has {len(row)} entries, expected t={plan.t}")
    estimates = []
    for j in range(plan.t):
        observed = []
        for k in range(plan.r):
            e = inner_results[k][j]
            if e == 0:
                continue
            if not 1 <= e <= plan.inner.sizes[j]:
                raise ValueError(f"inner result {e} for user {j + 1} outside 0..{plan.inner.sizes[j]}")
            observed.append((k, e - 1))
        estimates.append(erasure_decode_user(plan.outer[j], observed))
    est = tuple(estimates)
    return ConcatDecodeResult(estimates=est, recovered=sum(1 for e in est if e != 0))


@dataclass
class ExtensionCheck:
    ok: bool
    patterns_checked: int
    failing_pattern: ErasurePattern | None = None
    unrecoverable_users: tuple[int, ...] = ()  # 1-based, for the failing pattern

    def __bool__(self) -> bool:
        return self.ok


def _user_recoverable(code: OuterCode, erased: frozenset[int]) -> bool:
    # recoverable for every transmitted word iff no two codewords agree
    # on all unerased positions
    for a, b in itertools.combinations(code, 2):
        if all(k in erased for k in range(len(a)) if a[k] != b[k]):
            return False
    return True


def verify_extension(
    plan: ExtensionPlan, budget: int = DEFAULT_PATTERN_BUDGET
) -> ExtensionCheck:
    """Exhaustively confirm that every admissible erasure pattern leaves at
    least u users fully recoverable by unique completion.

    Recoverability under an erased-position set is codeword-independent:
    a user survives iff no pair of their outer codewords agrees on all
    unerased positions.  Fails with the first violating pattern in
    deterministic enumeration order.
    """
    t, u, r = plan.t, plan.u, plan.r
    if r == 0:
        return ExtensionCheck(ok=True, patterns_checked=0)
    per_column = _column_choice_count(t, u)
    total = per_column**r
    if total > budget:
        raise PatternBudgetError(f"{total} erasure patterns exceed the exhaustive budget of {budget}")
    checked = 0
    for pattern in admissible_patterns(t, u, r):
        checked += 1
        recoverable = [
            _user_recoverable(plan.outer[j], frozenset(pattern.erased_instances(j)))
            for j in range(t)
        ]
        if sum(recoverable) < u:
            return ExtensionCheck(
                ok=False,
                patterns_checked=checked,
                failing_pattern=pattern,
                unrecoverable_users=tuple(j + 1 for j, rec in enumerate(recoverable) if not rec),
            )
    return ExtensionCheck(ok=True, patterns_checked=checked)


def _column_choice_count(t: int, u: int) -> int:
    import math

    return math.comb(t, t - u)


def achieved_rates(plan: ExtensionPlan) -> tuple[Fraction | float, ...]:
    """Per-user end-to-end rates: outer rate times inner rate."""
    inner = plan.inner_rates()
    outer = plan.outer_rates()
    return tuple(q * rr for q, rr in zip(outer, inner))


# ---------------------------------------------------------------------------
# plan file format
# ---------------------------------------------------------------------------

_HEADER = "avmac-plan v1"


def serialize_plan(plan: ExtensionPlan, inner_ref: str) -> str:
    """Plan file with a reference to the inner codebook file; outer
    codewords are space-separated symbol lines."""
    lines = [
        _HEADER,
        f"gamma {plan.gamma}",
        f"ell {plan.ell}",
        f"r {plan.r}",
        f"inner {inner_ref}",
    ]
    for j, code in enumerate(plan.outer, start=1):
        lines.append(f"outer {j}")
        for w in code:
            lines.append(" ".join(str(v) for v in w))
    return "\n".join(lines) + "\n"


def parse_outer_sections(text: str) -> list[OuterCode]:
    """Outer codebooks from 'user j' sections of space-separated symbols
    (or compact digit strings when every symbol is a single digit)."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    books: list[list[tuple[int, ...]]] = []
    for ln in lines:
        if ln.startswith("user "):
            books.append([])
        elif books:
            if " " in ln:
                books[-1].append(tuple(int(v) for v in ln.split()))
            else:
                books[-1].append(tuple(int(c) for c in ln))
        else:
            raise ValueError(f"outer codeword line {ln!r} before any user section")
    if not books:
        raise ValueError("no user sections found in outer code file")
    return [tuple(book) for book in books]
