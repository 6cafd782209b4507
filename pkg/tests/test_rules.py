import itertools
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cafreq import (
    LocalRule,
    apply_word,
    compose,
    enumerate_rules,
    format_rule,
    is_balanced,
    is_surjective,
    iterate_word,
    parse_rule,
    preimages,
    random_rule,
    surjective_rules,
)
from cafreq.rules import rule_count, rule_from_index, rule_index
from cafreq.rng import SplitMix64

XOR = parse_rule("2 1 0110")
IDENTITY2 = parse_rule("2 0 01")
OR = parse_rule("2 1 0111")
AND = parse_rule("2 1 0001")
SHIFT2 = LocalRule.shift(2)


def all_words(q, n):
    return ("".join(map(str, syms)) for syms in itertools.product(range(q), repeat=n))


class TestParsing:
    def test_xor_table(self):
        assert XOR.table == (0, 1, 1, 0)
        assert XOR.q == 2 and XOR.r == 1

    def test_identity(self):
        assert IDENTITY2.table == (0, 1)
        assert IDENTITY2 == LocalRule.identity(2)

    def test_or_rule(self):
        assert OR.table == (0, 1, 1, 1)

    def test_roundtrip(self):
        for text in ("2 1 0110", "3 0 120", "2 2 01101001"):
            assert format_rule(parse_rule(text)) == text

    @pytest.mark.parametrize(
        "bad",
        [
            "2 1",  # missing digits
            "2 1 012",  # wrong count and digit out of range
            "2 1 0120",  # digit >= q
            "1 1 00",  # alphabet too small
            "2 -1 01",  # negative radius
            "x 1 0110",
        ],
    )
    def test_malformed(self, bad):
        with pytest.raises(ValueError):
            parse_rule(bad)


class TestApply:
    def test_xor_short(self):
        assert apply_word(XOR, "01") == "1"

    def test_xor_longer(self):
        # cellwise sum mod 2 of adjacent cells; two applications then give 11
        assert apply_word(XOR, "0011") == "010"
        assert apply_word(XOR, "010") == "11"

    def test_length_contract(self):
        for rule in (XOR, OR, LocalRule.shift(2)):
            for n in range(rule.r + 1, 8):
                for w in all_words(2, n):
                    assert len(apply_word(rule, w)) == n - rule.r

    def test_too_short(self):
        with pytest.raises(ValueError):
            apply_word(XOR, "1")

    def test_bad_symbol(self):
        with pytest.raises(ValueError):
            apply_word(XOR, "012")


class TestIterate:
    def test_xor_twice(self):
        assert iterate_word(XOR, "0011", 2) == "11"

    def test_zero_steps(self):
        assert iterate_word(OR, "0101", 0) == "0101"

    def test_identity_many_steps(self):
        assert iterate_word(IDENTITY2, "0110", 3) == "0110"

    def test_too_short_for_t(self):
        with pytest.raises(ValueError):
            iterate_word(XOR, "0011", 4)


class TestCompose:
    def test_identity_neutral(self):
        assert compose(IDENTITY2, XOR).table == XOR.table

    def test_xor_squared(self):
        sq = compose(XOR, XOR)
        assert sq.r == 2
        # table of a xor c over all abc
        expected = tuple((w >> 2) ^ (w & 1) for w in range(8))
        assert sq.table == expected

    def test_shift_squared(self):
        sq = compose(SHIFT2, SHIFT2)
        assert sq.r == 2
        assert sq.table == tuple(w & 1 for w in range(8))

    def test_alphabet_mismatch(self):
        with pytest.raises(ValueError):
            compose(XOR, LocalRule.identity(3))

    def test_matches_sequential_application(self):
        for f, g in ((XOR, OR), (OR, SHIFT2), (SHIFT2, XOR)):
            fg = compose(f, g)
            for w in all_words(2, fg.r + 3):
                assert apply_word(fg, w) == apply_word(f, apply_word(g, w))


class TestBalance:
    def test_xor_balanced(self):
        assert is_balanced(XOR)

    def test_and_unbalanced(self):
        assert not is_balanced(AND)

    def test_identity_balanced(self):
        assert is_balanced(IDENTITY2)


class TestSurjectivity:
    def test_xor(self):
        assert is_surjective(XOR)

    def test_and(self):
        assert not is_surjective(AND)

    def test_two_neighbor_census(self):
        # the six surjective two-neighbor binary rules: a, not a, b, not b,
        # a xor b, not (a xor b)
        surj = {r.table for r in enumerate_rules(2, 1) if is_surjective(r)}
        assert surj == {
            (0, 0, 1, 1),
            (1, 1, 0, 0),
            (0, 1, 0, 1),
            (1, 0, 1, 0),
            (0, 1, 1, 0),
            (1, 0, 0, 1),
        }

    def test_against_brute_force_preimage_counts(self):
        # exact balance of preimage counts at every length is equivalent to
        # surjectivity; verify the decider against counting for all radius-1
        # rules at lengths up to 4
        for rule in enumerate_rules(2, 1):
            expected = True
            for n in range(1, 5):
                counts = Counter(
                    apply_word(rule, w) for w in all_words(2, n + rule.r)
                )
                if any(counts[u] != 2**rule.r for u in all_words(2, n)):
                    expected = False
                    break
            assert is_surjective(rule) == expected, rule.format()

    def test_nonsurjective_unbalanced_within_length_six(self):
        # for every non-surjective (q=2, r<=2) rule some word of length <= 6
        # has a preimage count differing from q^r
        for r in (0, 1, 2):
            for rule in enumerate_rules(2, r):
                if is_surjective(rule):
                    continue
                found = False
                for n in range(1, 7):
                    counts = Counter(
                        apply_word(rule, w) for w in all_words(2, n + rule.r)
                    )
                    if any(counts[u] != 2**rule.r for u in all_words(2, n)):
                        found = True
                        break
                assert found, rule.format()

    def test_surjective_implies_balanced(self):
        for r in (0, 1, 2):
            for rule in enumerate_rules(2, r):
                if is_surjective(rule):
                    assert is_balanced(rule)

    def test_de_bruijn_guard(self):
        with pytest.raises(ValueError):
            is_surjective(LocalRule(2, 5, tuple(0 for _ in range(64))))


class TestPreimages:
    def test_xor_single(self):
        assert preimages(XOR, "1") == ["01", "10"]

    def test_identity(self):
        assert preimages(IDENTITY2, "01") == ["01"]

    def test_xor_pair(self):
        assert preimages(XOR, "11") == ["010", "101"]

    def test_balance_property_small_words(self):
        for r in (0, 1, 2):
            for rule in surjective_rules(2, r):
                for n in range(1, 5):
                    for u in all_words(2, n):
                        assert len(preimages(rule, u)) == 2**rule.r

    def test_preimages_actually_map_back(self):
        for u in ("0", "10", "011"):
            for w in preimages(OR, u):
                assert apply_word(OR, w) == u


class TestEnumeration:
    def test_counts(self):
        assert sum(1 for _ in enumerate_rules(2, 1)) == 16
        assert sum(1 for _ in enumerate_rules(3, 0)) == 27

    def test_surjective_count(self):
        assert len(surjective_rules(2, 1)) == 6

    def test_lexicographic_order(self):
        tables = [r.table for r in enumerate_rules(2, 1)]
        assert tables == sorted(tables)

    def test_guard(self):
        with pytest.raises(ValueError):
            list(enumerate_rules(2, 4))

    def test_index_roundtrip(self):
        for i in (0, 1, 255, 65535):
            rule = rule_from_index(2, 3, i)
            assert rule_index(rule) == i
        assert rule_count(2, 3) == 65536


class TestRandomRule:
    def test_deterministic(self):
        a = random_rule(3, 1, SplitMix64(42))
        b = random_rule(3, 1, SplitMix64(42))
        assert a == b
        assert a.q == 3 and a.r == 1


@given(st.integers(0, 2**20 - 1), st.integers(3, 20))
@settings(max_examples=60, deadline=None)
def test_apply_length_property(bits, length):
    w = format(bits & ((1 << length) - 1), f"0{length}b")
    assert len(apply_word(XOR, w)) == length - 1


@given(st.integers(0, 15), st.integers(0, 15))
@settings(max_examples=40, deadline=None)
def test_compose_agreement_property(fi, gi):
    f = rule_from_index(2, 1, fi)
    g = rule_from_index(2, 1, gi)
    fg = compose(f, g)
    for w in all_words(2, 5):
        assert apply_word(fg, w) == apply_word(f, apply_word(g, w))
