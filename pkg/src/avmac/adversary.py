"""Partial-correction error probabilities and witness-driven attacks.

Error probabilities follow the usual success-set convention: under the
all-clear state sequence a decode must match the sent message tuple
exactly, and under any other state sequence it must match the sent tuple
on every nonzero coordinate with at least ceil(gamma*t) nonzero
coordinates.  Messages are averaged uniformly.  Deterministic channels
are evaluated exactly in rationals; stochastic channels and randomized
strategies go through seeded Monte Carlo where trial i's draws depend
only on (seed, i), so runs are reproducible and partitionable.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from statistics import NormalDist
from typing import Callable, Mapping, Sequence

from .channel import ChannelSpec, StateSeq, Vec, output_of
from .codebooks import CodebookTuple, MsgTuple
from .feasibility import (
    OVERWRITER,
    SYMMETRIZER,
    StateConditionalWitness,
    ceil_frac,
    verify_witness,
)

Decoder = Callable[[Vec], MsgTuple]
Strategy = Callable[[random.Random, int], StateSeq]

DEFAULT_STATE_BUDGET = 2_000_000

MESSAGE_CONVENTION = "uniform average over message tuples"


class StateBudgetError(RuntimeError):
    """Exhaustive state enumeration would exceed the configured budget."""


def _trial_rng(seed: int, trial: int) -> random.Random:
    # str seeding hashes with sha512 internally, so this is stable across
    # runs and processes, and trial i depends only on (seed, i)
    return random.Random(f"{seed}:{trial}")


def decode_success(decoded: MsgTuple, sent: MsgTuple, u: int, clear: bool) -> bool:
    """Success-set membership for one decode.

    Under the all-clear sequence (`clear`) only the exact tuple counts;
    otherwise every nonzero decoded entry must match and the support must
    reach u.
    """
    if clear:
        return decoded == sent
    support = 0
    for d, s in zip(decoded, sent):
        if d != 0:
            if d != s:
                return False
            support += 1
    return support >= u


def exact_error(
    cb: CodebookTuple,
    ch: ChannelSpec,
    decoder: Decoder,
    s_seq: Sequence[int],
    gamma: Fraction,
) -> Fraction:
    """Average probability of partial-correction error for one state
    sequence of a deterministic channel, as an exact rational."""
    if not ch.deterministic:
        raise ValueError("exact_error requires a deterministic channel")
    gamma = Fraction(gamma)
    u = ceil_frac(gamma, cb.t)
    s_seq = tuple(s_seq)
    clear = s_seq == ch.clear_state_sequence(cb.n)
    failures = 0
    total = 0
    for msgs in cb.message_tuples():
        y = output_of(ch, cb.encode(msgs), s_seq)
        if not decode_success(decoder(y), msgs, u, clear):
            failures += 1
        total += 1
    return Fraction(failures, total)


@dataclass
class ErrorProfile:
    """Per-state (or per-strategy) error values with their maximum.

    Values are exact rationals for exhaustive evaluations and
    MonteCarloEstimate objects for sampled ones.
    """

    values: dict = field(default_factory=dict)
    convention: str = MESSAGE_CONVENTION

    def record(self, key, value) -> None:
        self.values[key] = value

    @property
    def max_value(self):
        return max(self.values.values(), key=_value_mean) if self.values else None

    @property
    def max_key(self):
        return max(self.values, key=lambda k: _value_mean(self.values[k])) if self.values else None

    def average(self) -> Fraction:
        vals = [v for v in self.values.values() if isinstance(v, Fraction)]
        if len(vals) != len(self.values):
            raise ValueError("average is only defined for fully exact profiles")
        return sum(vals, Fraction(0)) / len(vals)


def _value_mean(v):
    return v.mean if isinstance(v, MonteCarloEstimate) else v


def max_error_exhaustive(
    cb: CodebookTuple,
    ch: ChannelSpec,
    decoder: Decoder,
    gamma: Fraction,
    budget: int = DEFAULT_STATE_BUDGET,
    workers: int = 1,
) -> ErrorProfile:
    """exact_error for every state sequence of the channel.

    With workers > 1 the sequences are partitioned across threads; the
    profile is assembled in enumeration order either way, so results do
    not depend on the partitioning.
    """
    if not ch.deterministic:
        raise ValueError("max_error_exhaustive requires a deterministic channel")
    n = cb.n
    count = ch.n_states**n
    if count > budget:
        raise StateBudgetError(f"{count} state sequences exceed the budget of {budget}")
    seqs = list(ch.state_sequences(n))
    profile = ErrorProfile()
    if workers <= 1:
        for s in seqs:
            profile.record(s, exact_error(cb, ch, decoder, s, gamma))
        return profile
    from concurrent.futures import ThreadPoolExecutor

    def job(s: StateSeq) -> tuple[StateSeq, Fraction]:
        return s, exact_error(cb, ch, decoder, s, gamma)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        for s, value in pool.map(job, seqs):
            profile.record(s, value)
    return profile


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Empirical failure rate with a two-sided Wilson confidence interval."""

    failures: int
    trials: int
    level: float = 0.95

    @property
    def mean(self) -> Fraction:
        return Fraction(self.failures, self.trials)

    def interval(self) -> tuple[float, float]:
        z = NormalDist().inv_cdf(0.5 + self.level / 2)
        n = self.trials
        p = self.failures / n
        denom = 1 + z * z / n
        center = (p + z * z / (2 * n)) / denom
        half = z * ((p * (1 - p) / n + z * z / (4 * n * n)) ** 0.5) / denom
        return (max(0.0, center - half), min(1.0, center + half))

    @property
    def radius(self) -> float:
        lo, hi = self.interval()
        return (hi - lo) / 2

    def contains(self, value) -> bool:
        lo, hi = self.interval()
        return lo <= float(value) <= hi


def fixed_state_strategy(s_seq: Sequence[int]) -> Strategy:
    s = tuple(s_seq)

    def strategy(rng: random.Random, n: int) -> StateSeq:
        if n != len(s):
            raise ValueError(f"strategy built for length {len(s)}, asked for {n}")
        return s

    return strategy


def uniform_state_strategy(n_states: int) -> Strategy:
    def strategy(rng: random.Random, n: int) -> StateSeq:
        return tuple(rng.randrange(n_states) for _ in range(n))

    return strategy


def _sample_output(ch: ChannelSpec, x: Vec, s: int, rng: random.Random) -> int:
    row = ch.rows[(x, s)]
    u = rng.random()  # float-vs-Fraction comparisons are exact in Python
    acc = Fraction(0)
    for y, p in enumerate(row):
        acc += p
        if u < acc:
            return y
    return len(row) - 1


def _channel_outputs(ch: ChannelSpec, rows: Sequence[Vec], s_seq: StateSeq, rng: random.Random) -> Vec:
    if ch.deterministic:
        return output_of(ch, rows, s_seq)
    n = len(s_seq)
    return tuple(
        _sample_output(ch, tuple(row[k] for row in rows), s_seq[k], rng) for k in range(n)
    )


def monte_carlo_error(
    cb: CodebookTuple,
    ch: ChannelSpec,
    decoder: Decoder,
    strategy: Strategy,
    gamma: Fraction,
    trials: int,
    seed: int,
    level: float = 0.95,
) -> MonteCarloEstimate:
    """Sampled partial-correction error rate under an adversary strategy.

    Bit-reproducible for a given seed; each trial draws its own generator
    from (seed, trial index).
    """
    if trials < 1:
        raise ValueError(f"need at least one trial, got {trials}")
    gamma = Fraction(gamma)
    u = ceil_frac(gamma, cb.t)
    clear_seq = ch.clear_state_sequence(cb.n)
    failures = 0
    for i in range(trials):
        rng = _trial_rng(seed, i)
        msgs = tuple(rng.randrange(1, m + 1) for m in cb.sizes)
        s_seq = strategy(rng, cb.n)
        y = _channel_outputs(ch, cb.encode(msgs), s_seq, rng)
        if not decode_success(decoder(y), msgs, u, s_seq == clear_seq):
            failures += 1
    return MonteCarloEstimate(failures=failures, trials=trials, level=level)


# ---------------------------------------------------------------------------
# witness-driven attacks
# ---------------------------------------------------------------------------


def _spoof_state_distribution(
    witness: StateConditionalWitness,
    cb: CodebookTuple,
    spoof: Mapping[int, int],
) -> list[tuple[Fraction, ...]]:
    """Per-coordinate state distributions induced by spoofed codewords."""
    users = witness.users
    spoof_words = {j: cb.codeword(j, spoof[j]) for j in users}
    dists = []
    for k in range(cb.n):
        x_sub = tuple(spoof_words[j][k] for j in users)
        dists.append(witness.table[x_sub])
    return dists


def _sample_state_seq(dists: Sequence[tuple[Fraction, ...]], rng: random.Random) -> StateSeq:
    seq = []
    for dist in dists:
        u = rng.random()
        acc = Fraction(0)
        pick = len(dist) - 1
        for s, p in enumerate(dist):
            acc += p
            if u < acc:
                pick = s
                break
        seq.append(pick)
    return tuple(seq)


def _spoof_tuples(cb: CodebookTuple, users: Sequence[int]):
    return itertools.product(*(range(1, cb.sizes[j - 1] + 1) for j in users))


def symmetrization_attack(
    ch: ChannelSpec,
    users: Sequence[int],
    witness: StateConditionalWitness,
    cb: CodebookTuple,
    decoder: Decoder,
    gamma: Fraction,
    trials: int,
    seed: int,
    level: float = 0.95,
) -> ErrorProfile:
    """Monte Carlo symmetrization attack.

    Each trial draws a uniform spoof tuple for the attacked users,
    samples the state sequence coordinatewise from the witness
    distribution conditioned on the spoofed codeword symbols, transmits a
    uniform legitimate tuple, and records a partial-correction failure.
    """
    users = tuple(sorted(users))
    check = verify_witness(ch, witness, SYMMETRIZER)
    if not check.ok:
        raise ValueError(f"witness fails symmetrizer verification at {check.violation}")
    if trials < 1:
        raise ValueError(f"need at least one trial, got {trials}")
    gamma = Fraction(gamma)
    u = ceil_frac(gamma, cb.t)
    clear_seq = ch.clear_state_sequence(cb.n)
    failures = 0
    for i in range(trials):
        rng = _trial_rng(seed, i)
        spoof = {j: rng.randrange(1, cb.sizes[j - 1] + 1) for j in users}
        dists = _spoof_state_distribution(witness, cb, spoof)
        s_seq = _sample_state_seq(dists, rng)
        msgs = tuple(rng.randrange(1, m + 1) for m in cb.sizes)
        y = _channel_outputs(ch, cb.encode(msgs), s_seq, rng)
        if not decode_success(decoder(y), msgs, u, s_seq == clear_seq):
            failures += 1
    profile = ErrorProfile()
    profile.record(("attack", users), MonteCarloEstimate(failures=failures, trials=trials, level=level))
    return profile


def symmetrization_attack_exact(
    ch: ChannelSpec,
    users: Sequence[int],
    witness: StateConditionalWitness,
    cb: CodebookTuple,
    decoder: Decoder,
    gamma: Fraction,
    budget: int = DEFAULT_STATE_BUDGET,
) -> ErrorProfile:
    """Exact symmetrization-attack error, one entry per spoof tuple.

    Enumerates, for each spoof tuple, the state sequences with nonzero
    probability under the witness and accumulates their exact weighted
    error.  The profile's average is the attack's expected error under
    uniform spoofing.
    """
    users = tuple(sorted(users))
    check = verify_witness(ch, witness, SYMMETRIZER)
    if not check.ok:
        raise ValueError(f"witness fails symmetrizer verification at {check.violation}")
    if not ch.deterministic:
        raise ValueError("exact attack evaluation requires a deterministic channel")
    profile = ErrorProfile()
    for spoof_vals in _spoof_tuples(cb, users):
        spoof = dict(zip(users, spoof_vals))
        dists = _spoof_state_distribution(witness, cb, spoof)
        supports = [tuple(s for s, p in enumerate(dist) if p > 0) for dist in dists]
        count = 1
        for sup in supports:
            count *= len(sup)
        if count > budget:
            raise StateBudgetError(f"{count} state sequences for spoof {spoof_vals} exceed budget {budget}")
        total = Fraction(0)
        for s_seq in itertools.product(*supports):
            prob = Fraction(1)
            for k, s in enumerate(s_seq):
                prob *= dists[k][s]
            total += prob * exact_error(cb, ch, decoder, s_seq, Fraction(gamma))
        profile.record(("spoof", spoof_vals), total)
    return profile


def overwrite_attack(
    ch: ChannelSpec,
    users: Sequence[int],
    witness: StateConditionalWitness,
    cb: CodebookTuple,
    decoder: Decoder,
    gamma: Fraction,
    trials: int,
    seed: int,
    level: float = 0.95,
) -> tuple[ErrorProfile, MonteCarloEstimate]:
    """Monte Carlo overwrite attack.

    Returns the partial-correction error profile together with the
    impersonation success rate: how often the decoder outputs the spoofed
    messages on every attacked coordinate.
    """
    users = tuple(sorted(users))
    check = verify_witness(ch, witness, OVERWRITER)
    if not check.ok:
        raise ValueError(f"witness fails overwriter verification at {check.violation}")
    if trials < 1:
        raise ValueError(f"need at least one trial, got {trials}")
    gamma = Fraction(gamma)
    u = ceil_frac(gamma, cb.t)
    clear_seq = ch.clear_state_sequence(cb.n)
    failures = 0
    impersonations = 0
    for i in range(trials):
        rng = _trial_rng(seed, i)
        spoof = {j: rng.randrange(1, cb.sizes[j - 1] + 1) for j in users}
        dists = _spoof_state_distribution(witness, cb, spoof)
        s_seq = _sample_state_seq(dists, rng)
        msgs = tuple(rng.randrange(1, m + 1) for m in cb.sizes)
        y = _channel_outputs(ch, cb.encode(msgs), s_seq, rng)
        decoded = decoder(y)
        if not decode_success(decoded, msgs, u, s_seq == clear_seq):
            failures += 1
        if all(decoded[j - 1] == spoof[j] for j in users):
            impersonations += 1
    profile = ErrorProfile()
    profile.record(("attack", users), MonteCarloEstimate(failures=failures, trials=trials, level=level))
    return profile, MonteCarloEstimate(failures=impersonations, trials=trials, level=level)
