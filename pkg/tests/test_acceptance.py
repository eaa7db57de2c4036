"""Acceptance suite: one test per criterion, exact arithmetic throughout.

Each criterion prints a single PASS/FAIL line (run with -s to see them
on success).  Expected values are the worked examples and property
sweeps; everything is checked exactly, no tolerances.
"""

from __future__ import annotations

import functools
import itertools
from fractions import Fraction

from avmac.adversary import exact_error, max_error_exhaustive, symmetrization_attack_exact
from avmac.channel import make_adder_channel
from avmac.codebooks import (
    AdderDecoder,
    CodebookTuple,
    build_clean_outputs,
    check_antichain,
    check_attack_collision,
    check_union_structure,
    nonzero_state_sequences,
    sperner_bound,
    verify_zero_error,
)
from avmac.extension import (
    best_users_erasure_load,
    build_plan,
    concentrated_pattern,
    erasure_budget,
    verify_extension,
    worst_case_erasures,
)
from avmac.feasibility import (
    find_overwriter,
    find_symmetrizer,
    interior_necessary_conditions,
    verify_witness,
)
from conftest import books
from test_feasibility import adder_witness

HALF = Fraction(1, 2)
TWO_THIRDS = Fraction(2, 3)


def criterion(num: int, name: str):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"ACCEPTANCE {num}: FAIL - {name}")
                raise
            print(f"ACCEPTANCE {num}: PASS - {name}")

        return wrapper

    return decorate


def _grid_channels():
    for t in (2, 3, 4):
        for ell in (1, 2):
            if ell <= t:
                yield t, ell, make_adder_channel(t, ell)


@criterion(1, "symmetrizability lattice of the adder channel (q <= ell exactly)")
def test_acceptance_1_symmetrizability_lattice():
    for t, ell, ch in _grid_channels():
        for q in range(1, t + 1):
            for users in itertools.combinations(range(1, t + 1), q):
                witness = find_symmetrizer(ch, users)
                assert (witness is not None) == (q <= ell), (t, ell, users)
                if witness is not None:
                    assert verify_witness(ch, witness, "symmetrizer").ok, (t, ell, users)


@criterion(2, "adder channel is never overwritable, any subset size")
def test_acceptance_2_non_overwritability():
    for t, ell, ch in _grid_channels():
        for m in range(1, t + 1):
            for users in itertools.combinations(range(1, t + 1), m):
                assert find_overwriter(ch, users) is None, (t, ell, users)


@criterion(3, "necessary-condition reports: (3,1) passes, (3,2) fails at gamma=2/3")
def test_acceptance_3_interior_reports():
    passing = interior_necessary_conditions(make_adder_channel(3, 1), TWO_THIRDS)
    assert passing.passed
    assert passing.u == 2
    failing = interior_necessary_conditions(make_adder_channel(3, 2), TWO_THIRDS)
    assert not failing.passed
    assert any("symmetrizable" in r for r in failing.reasons)
    assert failing.overwritable == []


GOOD_TRIPLE = books(["011010", "100101"], ["010110", "101001"], ["001101", "110010"])
BAD_COND1 = books(["100110", "110110"], ["111010", "100101"], ["011111", "001010"])
BAD_COND3 = books(["011010", "100101"], ["010110", "101001"], ["010101", "101010"])
TWO_USER = books(["011", "100"], ["010", "101"])


@criterion(4, "golden codebooks verify; bad triples fail with the expected witnesses")
def test_acceptance_4_golden_codebooks():
    assert verify_zero_error(TWO_USER, 1, HALF).ok
    assert verify_zero_error(GOOD_TRIPLE, 1, TWO_THIRDS).ok

    r1 = verify_zero_error(BAD_COND1, 1, TWO_THIRDS)
    assert not r1.ok
    cond1 = [f.witness for f in r1.failures_for(1)]
    assert any(
        w.state_diff == (0, 1, 1, 0, 1, 0)
        and w.clean_sum == (2, 2, 2, 2, 3, 1)
        and w.base_sum == (2, 1, 1, 2, 2, 1)
        for w in cond1
    )

    r3 = verify_zero_error(BAD_COND3, 1, TWO_THIRDS)
    assert not r3.ok
    assert not r3.failures_for(1) and not r3.failures_for(2)
    cond3 = [f.witness for f in r3.failures_for(3)]
    hit = next(w for w in cond3 if w.output == (2, 2, 2, 2, 2, 2))
    from avmac.codebooks import codeword_sum

    bases = {codeword_sum(BAD_COND3, msgs) for _, msgs in hit.decompositions}
    assert {(2, 1, 1, 2, 2, 1), (1, 2, 2, 1, 1, 2)} <= bases
    assert hit.agreement == ()


@criterion(5, "exhaustive error: zero for verified tuples, at least 1/8 for failing ones")
def test_acceptance_5_exhaustive_error():
    for cb, ell, gamma in ((GOOD_TRIPLE, 1, TWO_THIRDS), (TWO_USER, 1, HALF)):
        ch = make_adder_channel(cb.t, ell)
        decoder = AdderDecoder(cb, ell, gamma)
        profile = max_error_exhaustive(cb, ch, decoder, gamma)
        assert len(profile.values) == 2**cb.n
        assert profile.max_value == 0, cb.sizes
    ch3 = make_adder_channel(3, 1)
    for cb in (BAD_COND1, BAD_COND3):
        decoder = AdderDecoder(cb, 1, TWO_THIRDS)
        profile = max_error_exhaustive(cb, ch3, decoder, TWO_THIRDS)
        assert profile.max_value >= Fraction(1, 8)


@criterion(6, "erasure budgets match brute force; concentration attains them")
def test_acceptance_6_erasure_budget():
    for t in (2, 3, 4):
        for u in range(1, t):
            for r in range(0, 9):
                budget = erasure_budget(t, u, r)
                value, pattern = worst_case_erasures(t, u, r)
                assert value == budget, (t, u, r)
                assert pattern.admissible(u)
                concentrated = concentrated_pattern(t, u, r)
                assert concentrated.admissible(u)
                assert best_users_erasure_load(concentrated, u) == budget, (t, u, r)


@criterion(7, "extension scheme: strong outer codes pass, the weak example fails")
def test_acceptance_7_extension_scheme():
    strong_outer = (((0,) * 6, (1,) * 6),) * 3
    plan = build_plan(GOOD_TRIPLE, strong_outer, r=6, ell=1, gamma=TWO_THIRDS)
    assert plan.budget == 3 and plan.required_dmin == 4
    assert plan.warnings == ()
    check = verify_extension(plan)
    assert check.ok and check.patterns_checked == 3**6

    weak = ((1, 0, 0, 1, 0, 1), (0, 1, 1, 1, 0, 1), (0, 0, 0, 1, 0, 1), (1, 1, 1, 0, 1, 0))
    weak_plan = build_plan(GOOD_TRIPLE, (weak,) * 3, r=6, ell=1, gamma=TWO_THIRDS)
    assert weak_plan.warnings  # minimum distance 1 < 4
    weak_check = verify_extension(weak_plan)
    assert not weak_check.ok
    assert weak_check.failing_pattern is not None
    assert weak_check.failing_pattern.admissible(2)


@criterion(8, "cross-oracle equivalence on the exhaustive two-user sweep")
def test_acceptance_8_cross_oracle_equivalence():
    ch = make_adder_channel(2, 1)
    verified_tuples = []
    for n in (1, 2, 3, 4):
        vectors = list(itertools.product((0, 1), repeat=n))
        pair_books = list(itertools.combinations(vectors, 2))
        for b1 in pair_books:
            for b2 in pair_books:
                cb = CodebookTuple(codebooks=(b1, b2))
                # route 1: difference scan
                scan_ok = not check_attack_collision(cb, 1)
                # route 2: direct multiset construction
                clean = set(build_clean_outputs(cb))
                attacked = {
                    tuple(c + s for c, s in zip(base, seq))
                    for base in clean
                    for seq in nonzero_state_sequences(1, n)
                }
                direct_ok = not (clean & attacked)
                assert scan_ok == direct_ok, (b1, b2)
                # route 3: exhaustive exact error against the full verdict
                verdict = verify_zero_error(cb, 1, HALF).ok
                decoder = AdderDecoder(cb, 1, HALF)
                profile = max_error_exhaustive(cb, ch, decoder, HALF)
                assert (profile.max_value == 0) == verdict, (b1, b2)
                if verdict:
                    verified_tuples.append(cb)
    assert len(verified_tuples) > 400


@criterion(9, "symmetrization attack floor on the double-state adder channel")
def test_acceptance_9_attack_floor():
    ch = make_adder_channel(3, 2)
    witness = adder_witness((1, 2), 3)
    decoder = AdderDecoder(GOOD_TRIPLE, 2, TWO_THIRDS)
    profile = symmetrization_attack_exact(ch, (1, 2), witness, GOOD_TRIPLE, decoder, TWO_THIRDS)
    average = profile.average()
    assert average >= Fraction(1, 4), average
    # no sampling anywhere: every entry is an exact rational
    assert all(isinstance(v, Fraction) for v in profile.values.values())


@criterion(10, "structural filters never reject a verified tuple in the sweep")
def test_acceptance_10_structural_filters():
    ch = make_adder_channel(2, 1)
    checked = 0
    for n in (1, 2, 3, 4):
        vectors = list(itertools.product((0, 1), repeat=n))
        pair_books = list(itertools.combinations(vectors, 2))
        for b1 in pair_books:
            for b2 in pair_books:
                cb = CodebookTuple(codebooks=(b1, b2))
                if not verify_zero_error(cb, 1, HALF).ok:
                    continue
                checked += 1
                assert check_antichain(b1) is None, (b1, b2)
                assert check_antichain(b2) is None, (b1, b2)
                assert check_union_structure(b1, b2) is None, (b1, b2)
                assert len(set(b1) | set(b2)) <= sperner_bound(n), (b1, b2)
    assert checked > 400


def test_supplement_witness_state_error_value():
    # supplementary regression pinning the derived 1/8 value exactly
    ch = make_adder_channel(3, 1)
    decoder = AdderDecoder(BAD_COND3, 1, TWO_THIRDS)
    value = exact_error(BAD_COND3, ch, decoder, (0, 1, 1, 0, 0, 1), TWO_THIRDS)
    assert value == Fraction(1, 8)
