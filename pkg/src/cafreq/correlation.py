"""Preimage histograms, correlations, domination checks, and conservation.

For symbol sets A, B and an effective radius r, the histogram of a rule
counts, for each k, the neighborhoods of length r+1 that map into B and
contain exactly k symbols from A.  The correlation of order m is the m-th
moment of that histogram; the normalized correlation removes the radius
dependence by solving the radius recursion down to radius 0.

Everything in this module is exact: integers and rationals only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Optional

from .rules import (
    DEFAULT_ENUMERATION_LIMIT,
    DIGITS,
    LocalRule,
    enumerate_rules,
    is_surjective,
    symbols_word,
    word_symbols,
)

SymbolsLike = Iterable[int]


def normalize_symbols(symbols: SymbolsLike, q: int) -> frozenset[int]:
    """Validate a symbol set against the alphabet {0, ..., q-1}."""
    out = frozenset(symbols)
    for s in out:
        if not 0 <= s < q:
            raise ValueError(f"symbol {s} out of range for alphabet size {q}")
    return out


def parse_symbols(text: str, q: int) -> frozenset[int]:
    """Parse a symbol set like "02" or "{0,2}"."""
    cleaned = text.strip().strip("{}").replace(",", "").replace(" ", "")
    return normalize_symbols(word_symbols(cleaned, q), q)


@dataclass(frozen=True)
class Histogram:
    """Counts N_k of B-preimage neighborhoods with k symbols in A."""

    q: int
    r: int
    A: frozenset[int]
    B: frozenset[int]
    counts: tuple[int, ...]

    @property
    def total(self) -> int:
        """Number of neighborhoods mapping into B."""
        return sum(self.counts)

    def moment(self, m: int) -> int:
        """Order-m moment, with the convention 0^0 = 1."""
        if m == 0:
            return self.total
        return sum(k**m * n for k, n in enumerate(self.counts))


@dataclass(frozen=True)
class CorrelationReport:
    order: int
    raw: int
    normalized: Fraction


def histogram(
    rule: LocalRule,
    A: SymbolsLike,
    B: SymbolsLike,
    r_eff: Optional[int] = None,
) -> Histogram:
    """Histogram at radius r_eff >= rule.r (extra cells are ignored by f)."""
    q, r = rule.q, rule.r
    if r_eff is None:
        r_eff = r
    if r_eff < r:
        raise ValueError(f"effective radius {r_eff} below rule radius {r}")
    Aset = normalize_symbols(A, q)
    Bset = normalize_symbols(B, q)
    width = r_eff + 1
    drop = q ** (r_eff - r)
    counts = [0] * (width + 1)
    for w in range(q**width):
        if rule.table[w // drop] in Bset:
            k = 0
            x = w
            for _ in range(width):
                x, d = divmod(x, q)
                if d in Aset:
                    k += 1
            counts[k] += 1
    return Histogram(q, r_eff, Aset, Bset, tuple(counts))


def correlation(
    rule: LocalRule,
    A: SymbolsLike,
    B: SymbolsLike,
    r_eff: Optional[int] = None,
    m: int = 1,
) -> int:
    """Order-m correlation at radius r_eff: sum of k^m * N_k."""
    if m < 0:
        raise ValueError("order must be >= 0")
    return histogram(rule, A, B, r_eff).moment(m)


def normalized_correlation(
    rule: LocalRule, A: SymbolsLike, B: SymbolsLike, m: int = 1
) -> Fraction:
    """Radius-free correlation of order m.

    Computed by solving the radius recursion

        C(rho+1, m) = q * C(rho, m) + |A| * sum_{i<m} comb(m, i) * C(rho, i)

    downward from the rule's own radius to radius 0, one order at a time.
    The result is an exact rational and may be negative.
    """
    if m < 0:
        raise ValueError("order must be >= 0")
    q = rule.q
    a_size = len(normalize_symbols(A, q))
    h = histogram(rule, A, B)
    vals = [Fraction(h.moment(i)) for i in range(m + 1)]
    for _ in range(rule.r):
        lower: list[Fraction] = []
        for i in range(m + 1):
            shift = a_size * sum(comb(i, j) * lower[j] for j in range(i))
            lower.append((vals[i] - shift) / q)
        vals = lower
    return vals[m]


def correlation_report(
    rule: LocalRule, A: SymbolsLike, B: SymbolsLike, m: int = 1
) -> CorrelationReport:
    return CorrelationReport(
        order=m,
        raw=correlation(rule, A, B, m=m),
        normalized=normalized_correlation(rule, A, B, m=m),
    )


def identity_correlation(q: int, a_size: int, r: int, m: int = 1) -> int:
    """Closed form (q + r*a) * a * q^(r-1) for the identity rule, order 1."""
    if m != 1:
        raise ValueError("closed form available for order 1 only")
    if not 0 <= a_size <= q:
        raise ValueError("symbol set size out of range")
    value = Fraction((q + r * a_size) * a_size, 1) * Fraction(q) ** (r - 1)
    assert value.denominator == 1
    return int(value)


def weighted_square_sum(n: int, a) -> Fraction:
    """sum_k k^2 a^k comb(n, k) = n a (n a + 1) (a + 1)^(n-2) for n >= 2."""
    if n < 0:
        raise ValueError("n must be >= 0")
    a = Fraction(a)
    if n < 2:
        return sum((Fraction(k) ** 2) * a**k * comb(n, k) for k in range(n + 1))
    return n * a * (n * a + 1) * (a + 1) ** (n - 2)


def finite_correlation(
    rule: LocalRule, A: SymbolsLike, n: int, limit: int = 1 << 24
) -> int:
    """Total weight correlation over all input words of length n + r.

    Sums |w|_A * |F(w)|_A over every word w of length n + r, where F(w) has
    length n.  Exact and exhaustive; guarded by q^(n+r) <= limit.
    """
    if n < 1:
        raise ValueError("window length must be >= 1")
    q, r = rule.q, rule.r
    if q ** (n + r) > limit:
        raise ValueError(f"q^(n+r) = {q ** (n + r)} exceeds limit {limit}")
    Aset = normalize_symbols(A, q)
    qr = q**r
    table = rule.table
    total = 0
    width = n + r
    # iterate words as digit vectors via odometer to avoid re-decoding
    syms = [0] * width
    in_a = [s in Aset for s in range(q)]
    while True:
        wa = sum(1 for s in syms if in_a[s])
        if wa:
            idx = 0
            for s in syms[:r]:
                idx = idx * q + s
            fa = 0
            for s in syms[r:]:
                idx = idx * q + s
                if table[idx] in Aset:
                    fa += 1
                idx %= qr
            total += wa * fa
        pos = width - 1
        while pos >= 0 and syms[pos] == q - 1:
            syms[pos] = 0
            pos -= 1
        if pos < 0:
            return total
        syms[pos] += 1


@dataclass(frozen=True)
class OneDominationReport:
    holds: bool
    margin: int
    surjective: bool
    worst_A: frozenset[int]


def check_one_domination(
    rule: LocalRule, A: Optional[SymbolsLike] = None
) -> OneDominationReport:
    """Compare first-order self-correlation against the identity rule.

    Scans every nonempty proper symbol set (or just A when given) and
    reports the minimal margin identity - rule.  Surjective rules are
    expected to dominate; non-surjective inputs are allowed but flagged.
    """
    q, r = rule.q, rule.r
    if A is not None:
        sets = [normalize_symbols(A, q)]
    else:
        sets = [
            frozenset(c)
            for size in range(1, q)
            for c in itertools.combinations(range(q), size)
        ]
    margin: Optional[int] = None
    worst = sets[0]
    for s in sets:
        diff = identity_correlation(q, len(s), r) - correlation(rule, s, s)
        if margin is None or diff < margin:
            margin = diff
            worst = s
    return OneDominationReport(
        holds=margin >= 0,
        margin=margin,
        surjective=is_surjective(rule),
        worst_A=worst,
    )


@dataclass(frozen=True)
class HighDominationReport:
    k0: Optional[int]
    strict_at_k0: Optional[bool]
    m_star: Optional[int]


def check_high_domination(
    rule: LocalRule, A: SymbolsLike, m_max: int = 16
) -> HighDominationReport:
    """Find the order from which the identity dominates all higher moments.

    k0 is the largest index where the rule's histogram differs from the
    identity's (None if equal).  m_star is the least m <= m_max such that
    the moment inequality holds for every order in [m, m_max] and the tail
    criterion

        (N_id[k0] - N_rule[k0]) * k0^m > sum_{i<k0} |N_id[i] - N_rule[i]| * i^m

    holds at m; the criterion propagates to every larger order because the
    k0 term grows at least as fast as each lower-index term.
    """
    q, r = rule.q, rule.r
    h_rule = histogram(rule, A, A)
    h_id = histogram(LocalRule.identity(q), A, A, r_eff=r)
    diffs = [i - f for f, i in zip(h_rule.counts, h_id.counts)]
    k0 = None
    for k in range(r + 1, -1, -1):
        if diffs[k] != 0:
            k0 = k
            break
    if k0 is None:
        return HighDominationReport(k0=None, strict_at_k0=None, m_star=0)
    strict = diffs[k0] > 0
    moments_rule = [h_rule.moment(m) for m in range(m_max + 1)]
    moments_id = [h_id.moment(m) for m in range(m_max + 1)]
    m_star = None
    for m in range(m_max + 1):
        lead = diffs[k0] * _power(k0, m)
        tail = sum(abs(diffs[i]) * _power(i, m) for i in range(k0))
        if lead <= tail:
            continue
        if all(moments_rule[mm] <= moments_id[mm] for mm in range(m, m_max + 1)):
            m_star = m
            break
    return HighDominationReport(k0=k0, strict_at_k0=strict, m_star=m_star)


def _power(base: int, exp: int) -> int:
    # 0^0 = 1 convention used throughout the histogram moments
    return 1 if exp == 0 else base**exp


@dataclass(frozen=True)
class PrefixSumReport:
    holds: bool
    witness_n: Optional[int]
    surjective: bool


def check_prefix_sum_conjecture(rule: LocalRule) -> PrefixSumReport:
    """Prefix-sum domination for binary rules with A = B = {1}.

    Checks sum_{k<=n} N_rule(k) >= sum_{k<=n} N_id(k) for every n up to
    r + 1, reporting the first failing n otherwise.
    """
    if rule.q != 2:
        raise ValueError("prefix-sum check is defined for binary rules")
    h_rule = histogram(rule, [1], [1])
    h_id = histogram(LocalRule.identity(2), [1], [1], r_eff=rule.r)
    acc_rule = 0
    acc_id = 0
    for n in range(rule.r + 2):
        acc_rule += h_rule.counts[n]
        acc_id += h_id.counts[n]
        if acc_rule < acc_id:
            return PrefixSumReport(
                holds=False, witness_n=n, surjective=is_surjective(rule)
            )
    return PrefixSumReport(holds=True, witness_n=None, surjective=is_surjective(rule))


def average_normalized_correlation(
    q: int,
    r: int,
    A: SymbolsLike,
    B: SymbolsLike,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> Fraction:
    """Exact average of the normalized correlation over all radius-r rules."""
    total = Fraction(0)
    count = 0
    for rule in enumerate_rules(q, r, limit=limit):
        total += normalized_correlation(rule, A, B)
        count += 1
    return total / count


@dataclass(frozen=True)
class ConservationReport:
    status: str  # "conserves" | "violates" | "unknown"
    witness: Optional[tuple[str, str]]  # (periodic config, its image), one period


def histogram_matches_identity(rule: LocalRule, A: SymbolsLike) -> bool:
    """Histogram equality with the identity rule at the rule's radius."""
    h_rule = histogram(rule, A, A)
    h_id = histogram(LocalRule.identity(rule.q), A, A, r_eff=rule.r)
    return h_rule.counts == h_id.counts


def apply_periodic(rule: LocalRule, config: str) -> str:
    """One rule step on a spatially periodic configuration, one period."""
    p = len(config)
    syms = word_symbols(config, rule.q)
    q, r, table = rule.q, rule.r, rule.table
    out = []
    for i in range(p):
        idx = 0
        for j in range(r + 1):
            idx = idx * q + syms[(i + j) % p]
        out.append(DIGITS[table[idx]])
    return "".join(out)


def find_conservation_violation(
    rule: LocalRule, A: SymbolsLike, max_period: int
) -> Optional[tuple[str, str]]:
    """Search p-periodic configurations (p <= max_period) for an A-count change.

    Returns the first violating (config, image) in (period, lexicographic)
    order, or None.  Sound for violation, incomplete for conservation.
    """
    q = rule.q
    Aset = normalize_symbols(A, q)
    a_digits = {DIGITS[s] for s in Aset}
    for p in range(1, max_period + 1):
        syms = [0] * p
        while True:
            before = sum(1 for s in syms if s in Aset)
            config = symbols_word(syms)
            image = apply_periodic(rule, config)
            after = sum(1 for ch in image if ch in a_digits)
            if before != after:
                return config, image
            pos = p - 1
            while pos >= 0 and syms[pos] == q - 1:
                syms[pos] = 0
                pos -= 1
            if pos < 0:
                break
            syms[pos] += 1
    return None


def conserves_symbols(
    rule: LocalRule, A: SymbolsLike, max_period: Optional[int] = None
) -> ConservationReport:
    """Decide (or bound) whether the rule conserves the count of A-symbols.

    Surjective rules are decided exactly by histogram equality with the
    identity; a violating rule also gets a periodic witness when one exists
    within the period bound.  For non-surjective rules only the periodic
    search is used, so the result may be "unknown" (the finite search is
    sound for violation, incomplete for conservation).
    """
    if max_period is None:
        max_period = 3 * (rule.r + 1)
    if is_surjective(rule):
        if histogram_matches_identity(rule, A):
            return ConservationReport(status="conserves", witness=None)
        witness = find_conservation_violation(rule, A, max_period)
        return ConservationReport(status="violates", witness=witness)
    witness = find_conservation_violation(rule, A, max_period)
    if witness is not None:
        return ConservationReport(status="violates", witness=witness)
    return ConservationReport(status="unknown", witness=None)
