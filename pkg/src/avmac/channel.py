"""Finite arbitrarily varying multiple-access channels with exact probabilities.

A channel is a finite table W(y | x_1..x_t, s) of rational transition
probabilities, where each of the t senders picks an input symbol, the
adversary picks a state symbol, and the receiver sees one output symbol.
All alphabets are 0-based integer ranges; probabilities are
`fractions.Fraction` end-to-end so that feasibility and zero-error checks
downstream are exact equalities, never tolerance comparisons.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

Vec = tuple[int, ...]
StateSeq = tuple[int, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


class ChannelFormatError(ValueError):
    """Raised when a channel spec file cannot be parsed."""


@dataclass(frozen=True)
class ChannelSpec:
    """Immutable finite AV-MAC transition table.

    `rows` maps (input tuple, state) to a dense tuple of output
    probabilities. Construction does not enforce stochasticity; use
    :func:`validate` to get a report on the invariants. Instances are
    safe to share across threads.
    """

    t: int
    input_sizes: tuple[int, ...]
    n_states: int
    s0: int
    n_outputs: int
    rows: Mapping[tuple[Vec, int], tuple[Fraction, ...]]
    deterministic: bool = False
    name: str = ""

    def input_tuples(self) -> Iterable[Vec]:
        import itertools

        return itertools.product(*(range(k) for k in self.input_sizes))

    def states(self) -> range:
        return range(self.n_states)

    def outputs(self) -> range:
        return range(self.n_outputs)

    def state_sequences(self, n: int) -> Iterable[StateSeq]:
        import itertools

        return itertools.product(range(self.n_states), repeat=n)

    def clear_state_sequence(self, n: int) -> StateSeq:
        return (self.s0,) * n


def make_adder_channel(t: int, ell: int) -> ChannelSpec:
    """Deterministic adder channel: y = x_1 + ... + x_t + s.

    Binary inputs for all t users, states {0..ell} with 0 the
    no-adversary state, outputs {0..t+ell}.
    """
    if t < 2:
        raise ValueError(f"adder channel needs at least 2 users, got t={t}")
    if ell < 1:
        raise ValueError(f"adder channel needs state bound >= 1, got ell={ell}")
    import itertools

    n_outputs = t + ell + 1
    rows: dict[tuple[Vec, int], tuple[Fraction, ...]] = {}
    for x in itertools.product((0, 1), repeat=t):
        for s in range(ell + 1):
            y = sum(x) + s
            rows[(x, s)] = tuple(ONE if i == y else ZERO for i in range(n_outputs))
    return ChannelSpec(
        t=t,
        input_sizes=(2,) * t,
        n_states=ell + 1,
        s0=0,
        n_outputs=n_outputs,
        rows=rows,
        deterministic=True,
        name=f"adder(t={t},ell={ell})",
    )


def _check_symbols(ch: ChannelSpec, x: Sequence[int], s: int, y: int | None = None) -> None:
    if len(x) != ch.t:
        raise ValueError(f"expected {ch.t} input symbols, got {len(x)}")
    for j, (xj, size) in enumerate(zip(x, ch.input_sizes)):
        if not 0 <= xj < size:
            raise ValueError(f"input symbol {xj} for user {j + 1} outside alphabet of size {size}")
    if not 0 <= s < ch.n_states:
        raise ValueError(f"state symbol {s} outside alphabet of size {ch.n_states}")
    if y is not None and not 0 <= y < ch.n_outputs:
        raise ValueError(f"output symbol {y} outside alphabet of size {ch.n_outputs}")


def transition_prob(ch: ChannelSpec, x: Sequence[int], s: int, y: int) -> Fraction:
    """Exact probability W(y | x, s); raises on out-of-alphabet symbols."""
    _check_symbols(ch, x, s, y)
    return ch.rows[(tuple(x), s)][y]


def output_symbol(ch: ChannelSpec, x: Sequence[int], s: int) -> int:
    """The unique output of a deterministic channel for one symbol slot."""
    if not ch.deterministic:
        raise ValueError("output_symbol requires a deterministic channel")
    _check_symbols(ch, x, s)
    row = ch.rows[(tuple(x), s)]
    for y, p in enumerate(row):
        if p == ONE:
            return y
    raise ValueError(f"row {tuple(x), s} has no probability-1 output")


def output_of(ch: ChannelSpec, xs: Sequence[Sequence[int]], s_seq: Sequence[int]) -> Vec:
    """Apply a deterministic channel coordinatewise to t codeword rows.

    `xs` holds one length-n symbol sequence per user; `s_seq` is the
    adversary's length-n state sequence.  Returns the length-n output.
    """
    if not ch.deterministic:
        raise ValueError("output_of requires a deterministic channel")
    if len(xs) != ch.t:
        raise ValueError(f"expected {ch.t} codeword rows, got {len(xs)}")
    n = len(s_seq)
    for j, row in enumerate(xs):
        if len(row) != n:
            raise ValueError(f"length mismatch: user {j + 1} row has {len(row)} symbols, state sequence has {n}")
    return tuple(output_symbol(ch, [row[k] for row in xs], s_seq[k]) for k in range(n))


def check_state_sequence(ch: ChannelSpec, s_seq: Sequence[int]) -> StateSeq:
    """Validate a state sequence against the channel's state alphabet."""
    for k, s in enumerate(s_seq):
        if not 0 <= s < ch.n_states:
            raise ValueError(f"state {s} at position {k} outside alphabet of size {ch.n_states}")
    return tuple(s_seq)


@dataclass
class ValidationReport:
    passed: bool
    problems: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed


def validate(ch: ChannelSpec) -> ValidationReport:
    """Check all ChannelSpec invariants, collecting violations into a report."""
    problems: list[str] = []
    if ch.t < 2:
        problems.append(f"user count t={ch.t} < 2")
    if len(ch.input_sizes) != ch.t:
        problems.append(f"{len(ch.input_sizes)} input alphabets for t={ch.t} users")
    if any(k < 1 for k in ch.input_sizes):
        problems.append("empty input alphabet")
    if ch.n_states < 1:
        problems.append("empty state alphabet")
    if not 0 <= ch.s0 < ch.n_states:
        problems.append(f"no-adversary state s0={ch.s0} outside state alphabet")
    if ch.n_outputs < 1:
        problems.append("empty output alphabet")

    seen = set()
    for (x, s), row in ch.rows.items():
        seen.add((x, s))
        if len(x) != ch.t or any(not 0 <= xj < kj for xj, kj in zip(x, ch.input_sizes)):
            problems.append(f"row key {x!r} outside input alphabets")
            continue
        if not 0 <= s < ch.n_states:
            problems.append(f"row key state {s} outside state alphabet")
            continue
        if len(row) != ch.n_outputs:
            problems.append(f"row ({x}, {s}) has {len(row)} entries, expected {ch.n_outputs}")
            continue
        if any(p < 0 or p > 1 for p in row):
            problems.append(f"row ({x}, {s}) has probability outside [0, 1]")
        total = sum(row)
        if total != 1:
            problems.append(f"row ({x}, {s}) sums to {total}, not 1")
        if ch.deterministic and sum(1 for p in row if p == ONE) != 1:
            problems.append(f"row ({x}, {s}) not deterministic (no single probability-1 entry)")

    for x in ch.input_tuples():
        for s in range(ch.n_states):
            if (x, s) not in seen:
                problems.append(f"missing transition row for inputs {x}, state {s}")

    return ValidationReport(passed=not problems, problems=problems)


# ---------------------------------------------------------------------------
# channel spec file format
#
# Line-oriented text.  Header fields, then one line per transition row.
# Deterministic channels may use compact output-map lines:
#     out <x_1> ... <x_t> <s> <y>
# Stochastic channels list full rows with probabilities written p/q:
#     row <x_1> ... <x_t> <s> : <p(y=0)> <p(y=1)> ...
# Serialization is canonical (rows in lexicographic (x, s) order), so
# parse -> serialize -> parse round-trips bit-exactly.
# ---------------------------------------------------------------------------

_HEADER = "avmac-channel v1"


def serialize_channel(ch: ChannelSpec) -> str:
    lines = [_HEADER]
    if ch.name:
        lines.append(f"name {ch.name}")
    lines.append(f"t {ch.t}")
    lines.append("inputs " + " ".join(str(k) for k in ch.input_sizes))
    lines.append(f"states {ch.n_states}")
    lines.append(f"s0 {ch.s0}")
    lines.append(f"outputs {ch.n_outputs}")
    lines.append(f"deterministic {1 if ch.deterministic else 0}")
    keys = sorted(ch.rows.keys())
    for x, s in keys:
        row = ch.rows[(x, s)]
        prefix = " ".join(str(v) for v in x) + f" {s}"
        if ch.deterministic:
            y = max(range(len(row)), key=lambda i: row[i])
            lines.append(f"out {prefix} {y}")
        else:
            lines.append(f"row {prefix} : " + " ".join(str(p) for p in row))
    return "\n".join(lines) + "\n"


def parse_channel(text: str) -> ChannelSpec:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0] != _HEADER:
        raise ChannelFormatError(f"missing header line {_HEADER!r}")
    fields: dict[str, str] = {}
    row_lines: list[str] = []
    for ln in lines[1:]:
        key, _, rest = ln.partition(" ")
        if key in ("row", "out"):
            row_lines.append(ln)
        else:
            fields[key] = rest.strip()
    try:
        t = int(fields["t"])
        input_sizes = tuple(int(v) for v in fields["inputs"].split())
        n_states = int(fields["states"])
        s0 = int(fields["s0"])
        n_outputs = int(fields["outputs"])
        deterministic = fields.get("deterministic", "0") in ("1", "true")
    except (KeyError, ValueError) as exc:
        raise ChannelFormatError(f"bad or missing header field: {exc}") from exc
    if len(input_sizes) != t:
        raise ChannelFormatError(f"'inputs' lists {len(input_sizes)} alphabets for t={t}")

    rows: dict[tuple[Vec, int], tuple[Fraction, ...]] = {}
    for ln in row_lines:
        kind, _, rest = ln.partition(" ")
        if kind == "out":
            parts = rest.split()
            if len(parts) != t + 2:
                raise ChannelFormatError(f"output-map line needs {t + 2} integers: {ln!r}")
            *xv, s, y = (int(v) for v in parts)
            x = tuple(xv)
            rows[(x, s)] = tuple(ONE if i == y else ZERO for i in range(n_outputs))
        else:
            head, _, probs = rest.partition(":")
            parts = head.split()
            if len(parts) != t + 1:
                raise ChannelFormatError(f"row line needs {t + 1} leading integers: {ln!r}")
            *xv, s = (int(v) for v in parts)
            x = tuple(xv)
            try:
                row = tuple(Fraction(tok) for tok in probs.split())
            except ValueError as exc:
                raise ChannelFormatError(f"bad probability in {ln!r}") from exc
            if len(row) != n_outputs:
                raise ChannelFormatError(f"row {ln!r} has {len(row)} probabilities, expected {n_outputs}")
            rows[(x, s)] = row
    return ChannelSpec(
        t=t,
        input_sizes=input_sizes,
        n_states=n_states,
        s0=s0,
        n_outputs=n_outputs,
        rows=rows,
        deterministic=deterministic,
        name=fields.get("name", ""),
    )


_ADDER_NAME = re.compile(r"adder\(t=(\d+),ell=(\d+)\)")


def adder_params(ch: ChannelSpec) -> tuple[int, int] | None:
    """(t, ell) if this spec is a named adder channel, else None."""
    m = _ADDER_NAME.fullmatch(ch.name)
    if not m:
        return None
    return int(m.group(1)), int(m.group(2))
