"""Shared fixtures: the worked codebook examples and small channels."""

from __future__ import annotations

from fractions import Fraction

import pytest

from avmac.channel import ChannelSpec, make_adder_channel
from avmac.codebooks import CodebookTuple, parse_codeword

ONE = Fraction(1)
ZERO = Fraction(0)


def books(*sections: list[str]) -> CodebookTuple:
    return CodebookTuple(
        codebooks=tuple(tuple(parse_codeword(w) for w in sec) for sec in sections)
    )


@pytest.fixture
def two_user_pair() -> CodebookTuple:
    # half-correcting pair over the unit-state adder channel
    return books(["011", "100"], ["010", "101"])


@pytest.fixture
def good_triple() -> CodebookTuple:
    # two-thirds-correcting triple over the three-user unit-state adder channel
    return books(
        ["011010", "100101"],
        ["010110", "101001"],
        ["001101", "110010"],
    )


@pytest.fixture
def bad_triple_cond1() -> CodebookTuple:
    # clean/attacked outputs collide: 222231 = 211221 + 011010
    return books(
        ["100110", "110110"],
        ["111010", "100101"],
        ["011111", "001010"],
    )


@pytest.fixture
def bad_triple_cond3() -> CodebookTuple:
    # repeated attacked output 222222 with no agreeing user
    return books(
        ["011010", "100101"],
        ["010110", "101001"],
        ["010101", "101010"],
    )


@pytest.fixture
def adder_2_1() -> ChannelSpec:
    return make_adder_channel(2, 1)


@pytest.fixture
def adder_3_1() -> ChannelSpec:
    return make_adder_channel(3, 1)


@pytest.fixture
def adder_3_2() -> ChannelSpec:
    return make_adder_channel(3, 2)


def state_copy_channel(t: int = 2) -> ChannelSpec:
    """Input-ignoring channel: the output equals the adversary's state."""
    import itertools

    rows = {}
    for x in itertools.product((0, 1), repeat=t):
        for s in (0, 1):
            rows[(x, s)] = (ONE, ZERO) if s == 0 else (ZERO, ONE)
    return ChannelSpec(
        t=t,
        input_sizes=(2,) * t,
        n_states=2,
        s0=0,
        n_outputs=2,
        rows=rows,
        deterministic=True,
        name="state-copy",
    )


def weighted_adder_channel(weights: tuple[int, ...], ell: int) -> ChannelSpec:
    """y = sum(w_j x_j) + s with binary inputs; asymmetric across users."""
    import itertools

    t = len(weights)
    n_outputs = sum(weights) + ell + 1
    rows = {}
    for x in itertools.product((0, 1), repeat=t):
        for s in range(ell + 1):
            y = sum(w * b for w, b in zip(weights, x)) + s
            rows[(x, s)] = tuple(ONE if i == y else ZERO for i in range(n_outputs))
    return ChannelSpec(
        t=t,
        input_sizes=(2,) * t,
        n_states=ell + 1,
        s0=0,
        n_outputs=n_outputs,
        rows=rows,
        deterministic=True,
        name=f"weighted{weights}",
    )
