"""Exact error profiles, Monte Carlo estimation, and witness-driven attacks."""

from __future__ import annotations

import itertools
from fractions import Fraction

import pytest

from avmac.adversary import (
    MonteCarloEstimate,
    StateBudgetError,
    decode_success,
    exact_error,
    fixed_state_strategy,
    max_error_exhaustive,
    monte_carlo_error,
    overwrite_attack,
    symmetrization_attack,
    symmetrization_attack_exact,
    uniform_state_strategy,
)
from avmac.channel import make_adder_channel
from avmac.codebooks import AdderDecoder
from avmac.feasibility import StateConditionalWitness, find_overwriter
from conftest import state_copy_channel
from test_feasibility import adder_witness

TWO_THIRDS = Fraction(2, 3)
HALF = Fraction(1, 2)
ONE = Fraction(1)
ZERO = Fraction(0)


def test_decode_success_rules():
    assert decode_success((1, 2), (1, 2), u=1, clear=True)
    assert not decode_success((1, 0), (1, 2), u=1, clear=True)
    assert decode_success((1, 0), (1, 2), u=1, clear=False)
    assert not decode_success((1, 0), (1, 2), u=2, clear=False)
    assert not decode_success((1, 3), (1, 2), u=1, clear=False)


def test_exact_error_zero_for_verified_tuple(good_triple, adder_3_1):
    dec = AdderDecoder(good_triple, 1, TWO_THIRDS)
    assert exact_error(good_triple, adder_3_1, dec, (0,) * 6, TWO_THIRDS) == 0
    assert exact_error(good_triple, adder_3_1, dec, (1, 0, 0, 1, 0, 1), TWO_THIRDS) == 0


def test_exact_error_on_condition3_witness_state(bad_triple_cond3, adder_3_1):
    dec = AdderDecoder(bad_triple_cond3, 1, TWO_THIRDS)
    value = exact_error(bad_triple_cond3, adder_3_1, dec, (0, 1, 1, 0, 0, 1), TWO_THIRDS)
    assert value >= Fraction(1, 8)


def test_exact_error_requires_deterministic_channel(good_triple):
    from avmac.channel import ChannelSpec

    ch = make_adder_channel(3, 1)
    rows = dict(ch.rows)
    key = ((0, 0, 0), 0)
    half = Fraction(1, 2)
    probs = list(rows[key])
    probs[0] = half
    probs[1] = half
    rows[key] = tuple(probs)
    noisy = ChannelSpec(
        t=3, input_sizes=(2, 2, 2), n_states=2, s0=0, n_outputs=5, rows=rows, deterministic=False
    )
    dec = AdderDecoder(good_triple, 1, TWO_THIRDS)
    with pytest.raises(ValueError):
        exact_error(good_triple, noisy, dec, (0,) * 6, TWO_THIRDS)


def test_max_error_exhaustive_verified_tuple(good_triple, adder_3_1):
    dec = AdderDecoder(good_triple, 1, TWO_THIRDS)
    profile = max_error_exhaustive(good_triple, adder_3_1, dec, TWO_THIRDS)
    assert len(profile.values) == 64
    assert profile.max_value == 0


def test_max_error_exhaustive_failing_tuple(bad_triple_cond1, adder_3_1):
    dec = AdderDecoder(bad_triple_cond1, 1, TWO_THIRDS)
    profile = max_error_exhaustive(bad_triple_cond1, adder_3_1, dec, TWO_THIRDS)
    assert profile.max_value > 0
    assert profile.values[(0, 1, 1, 0, 1, 0)] >= Fraction(1, 8)


def test_max_error_budget_guard(good_triple, adder_3_1):
    dec = AdderDecoder(good_triple, 1, TWO_THIRDS)
    with pytest.raises(StateBudgetError):
        max_error_exhaustive(good_triple, adder_3_1, dec, TWO_THIRDS, budget=10)


def test_max_error_worker_partition_invariance(good_triple, adder_3_1):
    dec = AdderDecoder(good_triple, 1, TWO_THIRDS)
    seq = max_error_exhaustive(good_triple, adder_3_1, dec, TWO_THIRDS, workers=1)
    par = max_error_exhaustive(good_triple, adder_3_1, dec, TWO_THIRDS, workers=3)
    assert seq.values == par.values


def test_monte_carlo_zero_error_tuple(good_triple, adder_3_1):
    dec = AdderDecoder(good_triple, 1, TWO_THIRDS)
    est = monte_carlo_error(
        good_triple, adder_3_1, dec, uniform_state_strategy(2), TWO_THIRDS, trials=2000, seed=11
    )
    assert est.failures == 0
    assert est.mean == 0


def test_monte_carlo_deterministic_given_seed(bad_triple_cond3, adder_3_1):
    dec = AdderDecoder(bad_triple_cond3, 1, TWO_THIRDS)
    strat = fixed_state_strategy((0, 1, 1, 0, 0, 1))
    a = monte_carlo_error(bad_triple_cond3, adder_3_1, dec, strat, TWO_THIRDS, trials=3000, seed=5)
    b = monte_carlo_error(bad_triple_cond3, adder_3_1, dec, strat, TWO_THIRDS, trials=3000, seed=5)
    c = monte_carlo_error(bad_triple_cond3, adder_3_1, dec, strat, TWO_THIRDS, trials=3000, seed=6)
    assert (a.failures, a.trials) == (b.failures, b.trials)
    assert a.failures != c.failures or a.mean == c.mean  # different seed may differ


def test_monte_carlo_interval_contains_exact_value(bad_triple_cond3, adder_3_1):
    dec = AdderDecoder(bad_triple_cond3, 1, TWO_THIRDS)
    s = (0, 1, 1, 0, 0, 1)
    exact = exact_error(bad_triple_cond3, adder_3_1, dec, s, TWO_THIRDS)
    est = monte_carlo_error(
        bad_triple_cond3, adder_3_1, dec, fixed_state_strategy(s), TWO_THIRDS, trials=4000, seed=123
    )
    assert est.contains(exact)


def test_monte_carlo_coverage_over_seed_list(bad_triple_cond3, adder_3_1):
    # deterministic coverage check: the 95% interval should contain the
    # exact value for nearly all of a fixed batch of seeds
    dec = AdderDecoder(bad_triple_cond3, 1, TWO_THIRDS)
    s = (0, 1, 1, 0, 0, 1)
    exact = exact_error(bad_triple_cond3, adder_3_1, dec, s, TWO_THIRDS)
    hits = 0
    seeds = range(40)
    for seed in seeds:
        est = monte_carlo_error(
            bad_triple_cond3, adder_3_1, dec, fixed_state_strategy(s), TWO_THIRDS,
            trials=800, seed=seed,
        )
        if est.contains(exact):
            hits += 1
    assert hits >= 34  # nominal 95% coverage, generous slack to stay exact-deterministic


def test_wilson_interval_basic_shape():
    est = MonteCarloEstimate(failures=0, trials=100)
    lo, hi = est.interval()
    assert lo == 0.0
    assert 0 < hi < 0.06
    mid = MonteCarloEstimate(failures=50, trials=100)
    lo2, hi2 = mid.interval()
    assert lo2 < 0.5 < hi2


# ---------------------------------------------------------------------------
# attacks
# ---------------------------------------------------------------------------


def test_symmetrization_attack_exact_floor(good_triple, adder_3_2):
    witness = adder_witness((1, 2), 3)
    dec = AdderDecoder(good_triple, 2, TWO_THIRDS)
    profile = symmetrization_attack_exact(adder_3_2, (1, 2), witness, good_triple, dec, TWO_THIRDS)
    assert len(profile.values) == 4
    assert profile.average() == Fraction(1, 4)
    assert profile.average() >= Fraction(1, 4)


def test_symmetrization_attack_monte_carlo_matches_exact(good_triple, adder_3_2):
    witness = adder_witness((1, 2), 3)
    dec = AdderDecoder(good_triple, 2, TWO_THIRDS)
    exact_avg = symmetrization_attack_exact(
        adder_3_2, (1, 2), witness, good_triple, dec, TWO_THIRDS
    ).average()
    profile = symmetrization_attack(
        adder_3_2, (1, 2), witness, good_triple, dec, TWO_THIRDS, trials=4000, seed=77
    )
    est = profile.values[("attack", (1, 2))]
    assert est.contains(exact_avg)
    assert est.mean >= Fraction(1, 5)


def test_single_user_attack_cannot_break_verified_tuple(good_triple, adder_3_1):
    witness = adder_witness((1,), 2)
    dec = AdderDecoder(good_triple, 1, TWO_THIRDS)
    profile = symmetrization_attack_exact(adder_3_1, (1,), witness, good_triple, dec, TWO_THIRDS)
    assert profile.average() == 0
    assert profile.max_value == 0


def test_symmetrization_attack_rejects_invalid_witness(good_triple, adder_3_1):
    table = {
        (0,): (ONE, ZERO),
        (1,): (ONE, ZERO),
    }
    bogus = StateConditionalWitness(users=(3,), table=table)
    dec = AdderDecoder(good_triple, 1, TWO_THIRDS)
    # P(s=0|x)=1 is not a symmetrizer for the adder channel
    with pytest.raises(ValueError):
        symmetrization_attack(adder_3_1, (3,), bogus, good_triple, dec, TWO_THIRDS, trials=10, seed=0)


def test_overwrite_attack_on_toy_channel(two_user_pair):
    ch = state_copy_channel()
    witness = find_overwriter(ch, [1])
    assert witness is not None

    # output ignores inputs, so a fixed decode of the all-clear output
    # impersonates a uniform spoof half the time
    def const_decoder(y):
        return (1, 1) if all(v == 0 for v in y) else (0, 0)

    cb = two_user_pair  # binary codebooks; content is irrelevant on this channel
    profile, impersonation = overwrite_attack(
        ch, (1,), witness, cb, const_decoder, HALF, trials=4000, seed=9
    )
    assert impersonation.contains(Fraction(1, 2))
    est = profile.values[("attack", (1,))]
    assert est.trials == 4000


def test_overwrite_attack_rejects_invalid_witness(two_user_pair, adder_2_1):
    table = {(0,): (ONE, ZERO), (1,): (ONE, ZERO)}
    w = StateConditionalWitness(users=(1,), table=table)
    dec = AdderDecoder(two_user_pair, 1, HALF)
    with pytest.raises(ValueError):
        overwrite_attack(adder_2_1, (1,), w, two_user_pair, dec, HALF, trials=10, seed=0)


def test_cross_module_zero_error_equivalence_sweep():
    """max error over every state sequence is zero exactly when the
    verifier accepts, over an exhaustive small family."""
    from avmac.codebooks import CodebookTuple, verify_zero_error

    ch = make_adder_channel(2, 1)
    vectors = list(itertools.product((0, 1), repeat=3))
    pair_books = list(itertools.combinations(vectors, 2))
    agree = 0
    for b1 in pair_books:
        for b2 in pair_books:
            cb = CodebookTuple(codebooks=(b1, b2))
            verdict = verify_zero_error(cb, 1, HALF).ok
            dec = AdderDecoder(cb, 1, HALF)
            profile = max_error_exhaustive(cb, ch, dec, HALF)
            assert (profile.max_value == 0) == verdict, (b1, b2)
            agree += 1
    assert agree == 784


def test_cross_module_zero_error_equivalence_three_users_random():
    """Seeded random three-user tuples (n <= 5, two codewords per user):
    the verifier verdict equals the exhaustive zero-max-error test."""
    import random

    from avmac.codebooks import CodebookTuple, verify_zero_error

    rng = random.Random(404)
    checked = verified_seen = 0
    for _ in range(120):
        n = rng.randrange(3, 6)
        vectors = list(itertools.product((0, 1), repeat=n))
        cb = CodebookTuple(
            codebooks=tuple(tuple(rng.sample(vectors, 2)) for _ in range(3))
        )
        ch = make_adder_channel(3, 1)
        verdict = verify_zero_error(cb, 1, TWO_THIRDS).ok
        dec = AdderDecoder(cb, 1, TWO_THIRDS)
        profile = max_error_exhaustive(cb, ch, dec, TWO_THIRDS)
        assert (profile.max_value == 0) == verdict
        checked += 1
        verified_seen += verdict
    assert checked == 120
    # the random family is dominated by failing tuples; make sure the
    # verified branch was still exercised at least via the fixtures
    from conftest import books

    good = books(["011010", "100101"], ["010110", "101001"], ["001101", "110010"])
    dec = AdderDecoder(good, 1, TWO_THIRDS)
    assert max_error_exhaustive(good, make_adder_channel(3, 1), dec, TWO_THIRDS).max_value == 0


def test_monte_carlo_stochastic_channel_sampling():
    """Coin-flip output channel: the sampler path is seeded-reproducible
    and converges to the hand-computed failure rate."""
    from avmac.channel import ChannelSpec
    from avmac.codebooks import CodebookTuple

    half = Fraction(1, 2)
    rows = {}
    for x1 in (0, 1):
        for x2 in (0, 1):
            for s in (0, 1):
                rows[((x1, x2), s)] = (half, half)
    coin = ChannelSpec(
        t=2, input_sizes=(2, 2), n_states=2, s0=0, n_outputs=2, rows=rows, deterministic=False
    )
    cb = CodebookTuple(codebooks=(((0, 1), (1, 0)), ((0, 0), (1, 1))))

    def decoder(y):
        return (1, 1) if y[0] == 0 else (2, 2)

    strat = fixed_state_strategy((0, 0))
    a = monte_carlo_error(cb, coin, decoder, strat, HALF, trials=3000, seed=21)
    b = monte_carlo_error(cb, coin, decoder, strat, HALF, trials=3000, seed=21)
    assert (a.failures, a.trials) == (b.failures, b.trials)
    # exact-match success under the clear sequence: decode hits the sent
    # tuple with probability 1/4, so failures concentrate near 3/4
    assert a.contains(Fraction(3, 4))
