"""Symmetrizability and overwritability of finite AV-MACs by exact feasibility.

Both properties ask for a conditional state distribution P(s | inputs of
a user subset) making the adversary's action indistinguishable at the
output.  Each is a linear feasibility problem over the entries of P:
row-sum equalities, nonnegativity, and one defining equality per pair of
subset input assignments, per fixed assignment of the remaining users
(identical on both sides), per output symbol.  Systems are solved
exactly; a returned witness always re-verifies by direct substitution.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .channel import ChannelSpec, Vec
from .exactlp import Equation, solve_nonneg

ZERO = Fraction(0)
ONE = Fraction(1)

SYMMETRIZER = "symmetrizer"
OVERWRITER = "overwriter"


class WitnessFormatError(ValueError):
    """Raised for malformed witness objects or files."""


@dataclass(frozen=True)
class StateConditionalWitness:
    """Conditional distribution P(state | inputs of the listed users).

    `users` are 1-based user indices, sorted ascending.  `table` maps each
    assignment of those users' input symbols to a dense tuple of exact
    state probabilities.
    """

    users: tuple[int, ...]
    table: Mapping[Vec, tuple[Fraction, ...]]

    def prob(self, x_sub: Vec, s: int) -> Fraction:
        return self.table[x_sub][s]


def _check_users(ch: ChannelSpec, users: Sequence[int]) -> tuple[int, ...]:
    users = tuple(sorted(users))
    if not users:
        raise ValueError("user subset must be nonempty")
    if len(set(users)) != len(users):
        raise ValueError(f"duplicate user indices in {users}")
    if users[0] < 1 or users[-1] > ch.t:
        raise ValueError(f"user indices {users} outside 1..{ch.t}")
    return users


def _subset_assignments(ch: ChannelSpec, users: Sequence[int]) -> list[Vec]:
    return list(itertools.product(*(range(ch.input_sizes[j - 1]) for j in users)))


def _rest_assignments(ch: ChannelSpec, users: Sequence[int]) -> list[tuple[tuple[int, int], ...]]:
    rest = [j for j in range(1, ch.t + 1) if j not in users]
    combos = itertools.product(*(range(ch.input_sizes[j - 1]) for j in rest))
    return [tuple(zip(rest, combo)) for combo in combos]


def _merge(ch: ChannelSpec, users: Sequence[int], x_sub: Vec, rest: Iterable[tuple[int, int]]) -> Vec:
    full = [0] * ch.t
    for j, v in zip(users, x_sub):
        full[j - 1] = v
    for j, v in rest:
        full[j - 1] = v
    return tuple(full)


def _witness_from_solution(
    ch: ChannelSpec, users: tuple[int, ...], assignments: list[Vec], x: list[Fraction]
) -> StateConditionalWitness:
    table = {}
    k = ch.n_states
    for i, a in enumerate(assignments):
        table[a] = tuple(x[i * k + s] for s in range(k))
    return StateConditionalWitness(users=users, table=table)


def _build_system(ch: ChannelSpec, users: tuple[int, ...], kind: str) -> tuple[int, list[Equation], list[Vec]]:
    assignments = _subset_assignments(ch, users)
    k = ch.n_states
    var = {(a, s): i * k + s for i, a in enumerate(assignments) for s in range(k)}
    n_vars = len(assignments) * k

    equations: list[Equation] = []
    for a in assignments:
        equations.append(({var[(a, s)]: ONE for s in range(k)}, ONE))

    rests = _rest_assignments(ch, users)
    if kind == SYMMETRIZER:
        pairs = itertools.combinations(assignments, 2)
    elif kind == OVERWRITER:
        pairs = itertools.product(assignments, assignments)
    else:
        raise ValueError(f"unknown witness kind {kind!r}")

    for x_sub, xp_sub in pairs:
        for rest in rests:
            x_full = _merge(ch, users, x_sub, rest)
            xp_full = _merge(ch, users, xp_sub, rest)
            for y in ch.outputs():
                coeffs: dict[int, Fraction] = {}
                for s in range(k):
                    w = ch.rows[(x_full, s)][y]
                    if w != 0:
                        i = var[(xp_sub, s)]
                        coeffs[i] = coeffs.get(i, ZERO) + w
                if kind == SYMMETRIZER:
                    for s in range(k):
                        w = ch.rows[(xp_full, s)][y]
                        if w != 0:
                            i = var[(x_sub, s)]
                            coeffs[i] = coeffs.get(i, ZERO) - w
                    rhs = ZERO
                else:
                    rhs = ch.rows[(xp_full, ch.s0)][y]
                equations.append((coeffs, rhs))
    return n_vars, equations, assignments


def find_symmetrizer(ch: ChannelSpec, users: Sequence[int]) -> StateConditionalWitness | None:
    """A state distribution making the subset's inputs swappable, or None."""
    users = _check_users(ch, users)
    n_vars, equations, assignments = _build_system(ch, users, SYMMETRIZER)
    x = solve_nonneg(n_vars, equations)
    if x is None:
        return None
    return _witness_from_solution(ch, users, assignments, x)


def find_overwriter(ch: ChannelSpec, users: Sequence[int]) -> StateConditionalWitness | None:
    """A state distribution imitating a clean transmission of spoofed inputs, or None."""
    users = _check_users(ch, users)
    n_vars, equations, assignments = _build_system(ch, users, OVERWRITER)
    x = solve_nonneg(n_vars, equations)
    if x is None:
        return None
    return _witness_from_solution(ch, users, assignments, x)


@dataclass(frozen=True)
class WitnessCheck:
    ok: bool
    violation: tuple | None = None  # (x_sub, xp_sub, rest, y, lhs, rhs)

    def __bool__(self) -> bool:
        return self.ok


def verify_witness(ch: ChannelSpec, witness: StateConditionalWitness, kind: str) -> WitnessCheck:
    """Exact re-check of every defining equality, independent of the solver.

    Raises WitnessFormatError for malformed witnesses (bad domain, rows
    not summing to one, negative entries).
    """
    users = _check_users(ch, witness.users)
    if users != witness.users:
        raise WitnessFormatError(f"witness users {witness.users} not sorted")
    assignments = _subset_assignments(ch, users)
    for a in assignments:
        if a not in witness.table:
            raise WitnessFormatError(f"witness table missing assignment {a}")
        row = witness.table[a]
        if len(row) != ch.n_states:
            raise WitnessFormatError(f"witness row for {a} has {len(row)} states, expected {ch.n_states}")
        if any(p < 0 for p in row):
            raise WitnessFormatError(f"witness row for {a} has a negative entry")
        if sum(row) != 1:
            raise WitnessFormatError(f"witness row for {a} sums to {sum(row)}, not 1")

    rests = _rest_assignments(ch, users)
    if kind == SYMMETRIZER:
        pairs: Iterable[tuple[Vec, Vec]] = itertools.combinations(assignments, 2)
    elif kind == OVERWRITER:
        pairs = itertools.product(assignments, assignments)
    else:
        raise ValueError(f"unknown witness kind {kind!r}")

    for x_sub, xp_sub in pairs:
        for rest in rests:
            x_full = _merge(ch, users, x_sub, rest)
            xp_full = _merge(ch, users, xp_sub, rest)
            for y in ch.outputs():
                lhs = sum(
                    witness.prob(xp_sub, s) * ch.rows[(x_full, s)][y]
                    for s in range(ch.n_states)
                )
                if kind == SYMMETRIZER:
                    rhs = sum(
                        witness.prob(x_sub, s) * ch.rows[(xp_full, s)][y]
                        for s in range(ch.n_states)
                    )
                else:
                    rhs = ch.rows[(xp_full, ch.s0)][y]
                if lhs != rhs:
                    return WitnessCheck(ok=False, violation=(x_sub, xp_sub, rest, y, lhs, rhs))
    return WitnessCheck(ok=True)


def symmetrizable_orders(ch: ChannelSpec) -> dict[int, list[tuple[tuple[int, ...], StateConditionalWitness]]]:
    """For each subset size m, the symmetrizable subsets with witnesses."""
    out: dict[int, list[tuple[tuple[int, ...], StateConditionalWitness]]] = {}
    for m in range(1, ch.t + 1):
        found = []
        for users in itertools.combinations(range(1, ch.t + 1), m):
            w = find_symmetrizer(ch, users)
            if w is not None:
                found.append((users, w))
        out[m] = found
    return out


def overwritable_subsets(ch: ChannelSpec) -> list[tuple[tuple[int, ...], StateConditionalWitness]]:
    """All overwritable user subsets of any size, with witnesses."""
    found = []
    for m in range(1, ch.t + 1):
        for users in itertools.combinations(range(1, ch.t + 1), m):
            w = find_overwriter(ch, users)
            if w is not None:
                found.append((users, w))
    return found


def ceil_frac(gamma: Fraction, t: int) -> int:
    """ceil(gamma * t) computed exactly on rationals."""
    return math.ceil(gamma * t)


@dataclass
class InteriorReport:
    """Necessary-condition report for positive-rate partially correcting codes.

    The verdict fails exactly when some user subset is overwritable (any
    size), or some subset of size m > t - ceil(gamma*t) is symmetrizable.
    """

    gamma: Fraction
    u: int
    overwritable: list[tuple[tuple[int, ...], StateConditionalWitness]]
    symmetrizable: dict[int, list[tuple[tuple[int, ...], StateConditionalWitness]]]
    passed: bool
    reasons: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed


def interior_necessary_conditions(ch: ChannelSpec, gamma: Fraction) -> InteriorReport:
    """Evaluate both necessary conditions for nonempty-interior rate regions."""
    gamma = Fraction(gamma)
    if not 0 < gamma < 1:
        raise ValueError(f"gamma must lie strictly between 0 and 1, got {gamma}")
    u = ceil_frac(gamma, ch.t)
    over = overwritable_subsets(ch)
    symm = symmetrizable_orders(ch)
    reasons = []
    for users, _ in over:
        reasons.append(f"subset {users} is overwritable")
    threshold = ch.t - u
    for m, entries in symm.items():
        if m > threshold and entries:
            for users, _ in entries:
                reasons.append(f"subset {users} of size {m} > t - ceil(gamma*t) = {threshold} is symmetrizable")
    return InteriorReport(
        gamma=gamma,
        u=u,
        overwritable=over,
        symmetrizable=symm,
        passed=not reasons,
        reasons=reasons,
    )


# ---------------------------------------------------------------------------
# witness file format (shares the rational "p/q" convention of channel files)
# ---------------------------------------------------------------------------

_HEADER = "avmac-witness v1"


def serialize_witness(w: StateConditionalWitness) -> str:
    lines = [_HEADER, "users " + " ".join(str(j) for j in w.users)]
    for a in sorted(w.table.keys()):
        row = w.table[a]
        lines.append("row " + " ".join(str(v) for v in a) + " : " + " ".join(str(p) for p in row))
    return "\n".join(lines) + "\n"


def parse_witness(text: str) -> StateConditionalWitness:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if not lines or lines[0] != _HEADER:
        raise WitnessFormatError(f"missing header line {_HEADER!r}")
    users: tuple[int, ...] | None = None
    table: dict[Vec, tuple[Fraction, ...]] = {}
    for ln in lines[1:]:
        key, _, rest = ln.partition(" ")
        if key == "users":
            users = tuple(int(v) for v in rest.split())
        elif key == "row":
            head, _, probs = rest.partition(":")
            a = tuple(int(v) for v in head.split())
            table[a] = tuple(Fraction(tok) for tok in probs.split())
        else:
            raise WitnessFormatError(f"unrecognized line {ln!r}")
    if users is None:
        raise WitnessFormatError("missing 'users' line")
    return StateConditionalWitness(users=users, table=table)
