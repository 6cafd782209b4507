import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cafreq import (
    DiracMeasure,
    ExplicitMeasure,
    LocalRule,
    ProductMeasure,
    block_entropy,
    check_measure_invariance,
    check_uniform_contraction,
    iterate_pushforward,
    make_measure,
    parse_rule,
    pushforward,
    pushforward_mass_from_histogram,
    surjective_rules,
)
from cafreq.rng import SplitMix64
from cafreq.rules import random_rule

XOR = parse_rule("2 1 0110")
IDENTITY2 = LocalRule.identity(2)
UNIFORM2 = ProductMeasure.uniform(2)


def ternary_example_rule():
    import itertools

    table = []
    for a, b, c in itertools.product(range(3), repeat=3):
        table.append(2 if b == c else (1 if a == 0 else 0))
    return LocalRule(3, 2, tuple(table))


class TestMeasureConstruction:
    def test_uniform(self):
        assert UNIFORM2.cylinder("01") == Fraction(1, 4)

    def test_bernoulli(self):
        mu = ProductMeasure.bernoulli(Fraction(1, 4))
        assert mu.cylinder("11") == Fraction(1, 16)

    def test_concentrated(self):
        mu = ProductMeasure.concentrated(3, [0, 2], Fraction(1, 2))
        assert mu.cylinder("0") == Fraction(1, 4)
        assert mu.cylinder("1") == Fraction(1, 2)

    def test_probabilities_must_sum_to_one(self):
        with pytest.raises(ValueError):
            ProductMeasure(2, (Fraction(1, 2), Fraction(1, 3)))

    def test_dirac(self):
        mu = DiracMeasure(2, 0)
        assert mu.cylinder("000") == 1
        assert mu.cylinder("010") == 0

    def test_explicit_consistent(self):
        table = {
            "": Fraction(1),
            "0": Fraction(2, 3),
            "1": Fraction(1, 3),
            "00": Fraction(1, 2),
            "01": Fraction(1, 6),
            "10": Fraction(1, 6),
            "11": Fraction(1, 6),
        }
        mu = ExplicitMeasure(2, 2, table)
        assert mu.cylinder("01") == Fraction(1, 6)
        with pytest.raises(ValueError):
            mu.cylinder("010")

    def test_explicit_inconsistent(self):
        bad = {
            "": Fraction(1),
            "0": Fraction(2, 3),
            "1": Fraction(1, 3),
            "00": Fraction(1, 2),
            "01": Fraction(1, 2),
            "10": Fraction(1, 6),
            "11": Fraction(1, 6),
        }
        with pytest.raises(ValueError):
            ExplicitMeasure(2, 2, bad)

    def test_make_measure_descriptors(self):
        assert make_measure("uniform", 2).cylinder("0") == Fraction(1, 2)
        assert make_measure("bernoulli:1/4").cylinder("1") == Fraction(1, 4)
        assert make_measure("dirac:0", 2).cylinder("00") == 1
        assert make_measure("product:1/2,1/4,1/4").cylinder("1") == Fraction(1, 4)
        mu = make_measure("subset:02:1/2", 3)
        assert mu.cylinder("1") == Fraction(1, 2)
        with pytest.raises(ValueError):
            make_measure("nonsense:1")


class TestPushforward:
    def test_xor_uniform(self):
        assert pushforward(XOR, UNIFORM2, "1") == Fraction(1, 2)

    def test_xor_bernoulli(self):
        mu = ProductMeasure.bernoulli(Fraction(1, 4))
        assert pushforward(XOR, mu, "1") == Fraction(3, 8)

    def test_ternary_example_uniform(self):
        mu = ProductMeasure.uniform(3)
        assert pushforward(ternary_example_rule(), mu, "1") == Fraction(2, 9)

    def test_guard(self):
        with pytest.raises(ValueError):
            pushforward(XOR, UNIFORM2, "0" * 40, limit=1 << 10)

    def test_alphabet_mismatch(self):
        with pytest.raises(ValueError):
            pushforward(XOR, ProductMeasure.uniform(3), "1")

    def test_explicit_measure_depth_shortfall(self):
        # preimage words are one cell longer than the target, beyond depth 1
        table = {"": Fraction(1), "0": Fraction(1, 2), "1": Fraction(1, 2)}
        mu = ExplicitMeasure(2, 1, table)
        with pytest.raises(ValueError):
            pushforward(XOR, mu, "1")


class TestIteratePushforward:
    def test_uniform_invariant_many_steps(self):
        assert iterate_pushforward(XOR, UNIFORM2, 10, "1") == Fraction(1, 2)

    def test_bernoulli_two_steps(self):
        mu = ProductMeasure.bernoulli(Fraction(1, 4))
        assert iterate_pushforward(XOR, mu, 2, "1") == Fraction(3, 8)

    def test_zero_steps(self):
        mu = ProductMeasure.bernoulli(Fraction(1, 7))
        assert iterate_pushforward(XOR, mu, 0, "01") == mu.cylinder("01")

    def test_consistency_both_sides(self):
        # sum over one-symbol extensions on either side returns the value
        rng = SplitMix64(5)
        for _ in range(25):
            q = 2 + rng.below(2)
            rule = random_rule(q, rng.below(2), rng)
            probs = [1 + rng.below(4) for _ in range(q)]
            total = sum(probs)
            mu = ProductMeasure(q, tuple(Fraction(x, total) for x in probs))
            for u in ("0", "01", "010"):
                if any(int(c) >= q for c in u):
                    continue
                v = pushforward(rule, mu, u)
                right = sum(
                    pushforward(rule, mu, u + str(a)) for a in range(q)
                )
                left = sum(pushforward(rule, mu, str(a) + u) for a in range(q))
                assert v == right == left


class TestHistogramMassFormula:
    def test_xor_value(self):
        assert pushforward_mass_from_histogram(XOR, [1], Fraction(1, 3)) == Fraction(4, 9)

    def test_identity_preserves_mass(self):
        for q in (2, 3):
            rule = LocalRule.identity(q)
            for p in (Fraction(1, 3), Fraction(9, 10)):
                assert pushforward_mass_from_histogram(rule, [0], p) == p

    def test_matches_direct_pushforward(self):
        rng = SplitMix64(11)
        for _ in range(100):
            q = 2 + rng.below(2)
            rule = random_rule(q, rng.below(3), rng)
            size = 1 + rng.below(q - 1)
            A = frozenset(range(size))
            for p in (Fraction(1, 3), Fraction(1, 7), Fraction(9, 10)):
                mu = ProductMeasure.concentrated(q, A, p)
                direct = sum(pushforward(rule, mu, str(a)) for a in sorted(A))
                assert pushforward_mass_from_histogram(rule, A, p) == direct

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError):
            pushforward_mass_from_histogram(XOR, [0, 1], Fraction(1, 2))
        with pytest.raises(ValueError):
            pushforward_mass_from_histogram(XOR, [1], Fraction(1))


class TestUniformContraction:
    def test_xor_bernoulli(self):
        mu = ProductMeasure.bernoulli(Fraction(3, 10))
        rep = check_uniform_contraction(XOR, mu, 1)
        assert rep.lhs == Fraction(2, 25)
        assert rep.rhs == Fraction(1, 5)
        assert rep.holds

    def test_uniform_trivial(self):
        for rule in surjective_rules(2, 1):
            rep = check_uniform_contraction(rule, UNIFORM2, 2)
            assert rep.lhs == 0 and rep.rhs == 0 and rep.holds

    def test_identity_equality(self):
        mu = ProductMeasure.bernoulli(Fraction(1, 5))
        for n in (1, 2, 3):
            rep = check_uniform_contraction(IDENTITY2, mu, n)
            assert rep.lhs == rep.rhs and rep.holds

    def test_violated_by_pair_correlated_measure(self):
        # uniform single-cell marginals but correlated pairs: one XOR step
        # moves the cell distribution strictly away from uniform, so the
        # contraction inequality fails even for a surjective rule
        table = {
            "": Fraction(1),
            "0": Fraction(1, 2),
            "1": Fraction(1, 2),
            "00": Fraction(1, 8),
            "01": Fraction(3, 8),
            "10": Fraction(3, 8),
            "11": Fraction(1, 8),
        }
        mu = ExplicitMeasure(2, 2, table)
        rep = check_uniform_contraction(XOR, mu, 1)
        assert rep.rhs == 0
        assert rep.lhs == Fraction(1, 4)
        assert not rep.holds


class TestMeasureInvariance:
    def test_uniform_invariant_for_surjective(self):
        for rule in surjective_rules(2, 1):
            assert check_measure_invariance(rule, UNIFORM2, 5)

    def test_bernoulli_not_invariant_under_xor(self):
        mu = ProductMeasure.bernoulli(Fraction(1, 4))
        assert not check_measure_invariance(XOR, mu, 1)

    def test_identity_preserves_everything(self):
        mu = ProductMeasure.bernoulli(Fraction(2, 7))
        assert check_measure_invariance(IDENTITY2, mu, 4)


class TestBlockEntropy:
    def test_uniform(self):
        rep = block_entropy(UNIFORM2, 3)
        assert rep.value == pytest.approx(3 * math.log(2))
        assert rep.rate == pytest.approx(math.log(2))
        assert rep.increment == pytest.approx(math.log(2))

    def test_bernoulli_quarter(self):
        rep = block_entropy(ProductMeasure.bernoulli(Fraction(1, 4)), 1)
        expected = -0.25 * math.log(0.25) - 0.75 * math.log(0.75)
        assert rep.value == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.5623, abs=5e-4)

    def test_dirac_zero(self):
        for n in (1, 2, 5):
            assert block_entropy(DiracMeasure(2, 0), n).value == 0.0

    def test_identity_preserves_block_entropy(self):
        mu = ProductMeasure.bernoulli(Fraction(1, 3))
        for n in (1, 2, 3):
            rep = block_entropy(mu, n)
            pushed = [
                (u, iterate_pushforward(IDENTITY2, mu, 1, u))
                for u in _binary_words(n)
            ]
            h = -sum(float(p) * math.log(float(p)) for _, p in pushed if p > 0)
            assert h == pytest.approx(rep.value, abs=1e-12)


def _binary_words(n):
    return [format(i, f"0{n}b") for i in range(1 << n)]


@given(st.integers(1, 6), st.integers(0, 63))
@settings(max_examples=40, deadline=None)
def test_pushforward_consistency_property(n, bits):
    # right-extension consistency for the XOR pushforward of a biased measure
    mu = ProductMeasure.bernoulli(Fraction(1, 3))
    u = format(bits & ((1 << n) - 1), f"0{n}b")
    total = sum(pushforward(XOR, mu, u + b) for b in "01")
    assert pushforward(XOR, mu, u) == total
