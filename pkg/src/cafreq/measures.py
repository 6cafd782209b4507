"""Shift-invariant measures on symbol sequences, queried on cylinders.

A measure is represented by its exact rational cylinder values: the
probability that a given finite word appears at position 0.  Product,
uniform, Dirac, and finite-depth explicit tables are supported.  Pushing a
measure forward under a rule sums the measure over all preimage words;
everything is exact except block entropy, which is the one floating-point
diagnostic (it needs logarithms).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Mapping, Optional, Union

from .correlation import SymbolsLike, histogram, normalize_symbols
from .rules import (
    DIGITS,
    LocalRule,
    _preimage_iter,
    self_compose,
    symbols_word,
    word_symbols,
)

DEFAULT_PUSHFORWARD_LIMIT = 1 << 26


class CylinderMeasure:
    """Base: a shift-invariant measure described by exact cylinder values."""

    q: int

    def cylinder(self, word: str) -> Fraction:
        raise NotImplementedError


@dataclass(frozen=True)
class ProductMeasure(CylinderMeasure):
    """Independent identically distributed cells with rational symbol weights."""

    q: int
    probs: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.probs) != self.q:
            raise ValueError("need one probability per symbol")
        if any(p < 0 or p > 1 for p in self.probs):
            raise ValueError("probabilities must lie in [0, 1]")
        if sum(self.probs) != 1:
            raise ValueError("probabilities must sum to 1 exactly")

    def cylinder(self, word: str) -> Fraction:
        out = Fraction(1)
        for s in word_symbols(word, self.q):
            out *= self.probs[s]
        return out

    @classmethod
    def uniform(cls, q: int) -> "ProductMeasure":
        return cls(q, tuple(Fraction(1, q) for _ in range(q)))

    @classmethod
    def bernoulli(cls, p) -> "ProductMeasure":
        """Binary product measure with 1-density p."""
        p = Fraction(p)
        return cls(2, (1 - p, p))

    @classmethod
    def concentrated(cls, q: int, A: SymbolsLike, p) -> "ProductMeasure":
        """Product measure giving total mass p to A, spread uniformly.

        Each symbol of A gets p/|A| and each other symbol (1-p)/(q-|A|).
        """
        Aset = normalize_symbols(A, q)
        p = Fraction(p)
        if not Aset or len(Aset) == q:
            raise ValueError("symbol set must be nonempty and proper")
        inside = p / len(Aset)
        outside = (1 - p) / (q - len(Aset))
        return cls(q, tuple(inside if s in Aset else outside for s in range(q)))


@dataclass(frozen=True)
class DiracMeasure(CylinderMeasure):
    """Unit mass on the constant configuration of one symbol."""

    q: int
    symbol: int

    def __post_init__(self):
        if not 0 <= self.symbol < self.q:
            raise ValueError("symbol out of range")

    def cylinder(self, word: str) -> Fraction:
        word_symbols(word, self.q)
        ch = DIGITS[self.symbol]
        return Fraction(1) if all(c == ch for c in word) else Fraction(0)


class ExplicitMeasure(CylinderMeasure):
    """Cylinder table for every word up to a fixed depth, validated."""

    def __init__(self, q: int, depth: int, table: Mapping[str, Fraction]):
        self.q = q
        self.depth = depth
        self._table = {w: Fraction(v) for w, v in table.items()}
        if self._table.get("", Fraction(1)) != 1:
            raise ValueError("the empty cylinder must have measure 1")
        self._table[""] = Fraction(1)
        for length in range(depth + 1):
            for syms in itertools.product(range(q), repeat=length):
                w = symbols_word(syms)
                if w not in self._table:
                    raise ValueError(f"missing cylinder value for {w!r}")
                v = self._table[w]
                if v < 0 or v > 1:
                    raise ValueError(f"cylinder value for {w!r} out of [0, 1]")
                if length < depth:
                    right = sum(self._table[w + DIGITS[a]] for a in range(q))
                    left = sum(self._table[DIGITS[a] + w] for a in range(q))
                    if right != v or left != v:
                        raise ValueError(
                            f"inconsistent explicit table at {w!r}: "
                            f"{v} vs right {right}, left {left}"
                        )

    def cylinder(self, word: str) -> Fraction:
        word_symbols(word, self.q)
        if len(word) > self.depth:
            raise ValueError(
                f"explicit measure has depth {self.depth}, cannot answer "
                f"cylinder of length {len(word)}"
            )
        return self._table[word]


MeasureSpec = Union[str, Mapping]


def make_measure(spec: MeasureSpec, q: Optional[int] = None) -> CylinderMeasure:
    """Build a measure from a descriptor.

    Strings: "uniform", "bernoulli:P", "dirac:S", "product:P0,P1,...",
    "subset:SYMBOLS:P" (mass P spread over the given symbols).  Mappings use
    a "kind" key with matching fields; kind "explicit" takes depth and table.
    """
    if isinstance(spec, str):
        name, _, arg = spec.partition(":")
        name = name.strip().lower()
        if name == "uniform":
            if q is None:
                raise ValueError("uniform measure needs the alphabet size")
            return ProductMeasure.uniform(q)
        if name == "bernoulli":
            return ProductMeasure.bernoulli(Fraction(arg))
        if name == "dirac":
            if q is None:
                raise ValueError("dirac measure needs the alphabet size")
            return DiracMeasure(q, word_symbols(arg.strip(), q)[0])
        if name == "product":
            probs = tuple(Fraction(x) for x in arg.split(","))
            return ProductMeasure(len(probs), probs)
        if name == "subset":
            if q is None:
                raise ValueError("subset measure needs the alphabet size")
            symbols_text, _, p_text = arg.partition(":")
            return ProductMeasure.concentrated(
                q, word_symbols(symbols_text.strip(), q), Fraction(p_text)
            )
        raise ValueError(f"unknown measure descriptor {spec!r}")
    kind = spec.get("kind")
    if kind == "explicit":
        return ExplicitMeasure(spec["q"], spec["depth"], spec["table"])
    if kind == "product":
        probs = tuple(Fraction(x) for x in spec["probs"])
        return ProductMeasure(len(probs), probs)
    if kind == "uniform":
        return ProductMeasure.uniform(spec["q"])
    if kind == "dirac":
        return DiracMeasure(spec["q"], spec["symbol"])
    raise ValueError(f"unknown measure spec {spec!r}")


def _check_pushforward_bound(q: int, exponent: int, limit: int) -> None:
    if q**exponent > limit:
        raise ValueError(
            f"preimage enumeration q^{exponent} = {q ** exponent} exceeds "
            f"limit {limit}"
        )


def pushforward(
    rule: LocalRule,
    mu: CylinderMeasure,
    word: str,
    limit: int = DEFAULT_PUSHFORWARD_LIMIT,
) -> Fraction:
    """Image-measure cylinder value: the measure of the word's preimage set."""
    if len(word) < 1:
        raise ValueError("pushforward needs a nonempty word")
    if mu.q != rule.q:
        raise ValueError("measure and rule alphabets differ")
    _check_pushforward_bound(rule.q, len(word) + rule.r, limit)
    return sum(
        (mu.cylinder(w) for w in _preimage_iter(rule, word)), Fraction(0)
    )


def iterate_pushforward(
    rule: LocalRule,
    mu: CylinderMeasure,
    t: int,
    word: str,
    limit: int = DEFAULT_PUSHFORWARD_LIMIT,
) -> Fraction:
    """Cylinder value after t rule steps, via the t-fold composed rule."""
    if t < 0:
        raise ValueError("step count must be >= 0")
    if t == 0:
        return mu.cylinder(word)
    _check_pushforward_bound(rule.q, len(word) + t * rule.r, limit)
    return pushforward(self_compose(rule, t), mu, word, limit)


def pushforward_mass_from_histogram(rule: LocalRule, A: SymbolsLike, p) -> Fraction:
    """A-mass of the pushforward of the A-concentrated product measure.

    Evaluates, from the histogram counts N_k alone,

        sum_{l=0}^{r+1} p^l * sum_{k<=l} (-1)^(l-k) C(r+1-k, r+1-l) N_k
                                          / (|A|^k (q-|A|)^(r+1-k))

    which must agree with summing the direct pushforward over the symbols
    of A.
    """
    p = Fraction(p)
    if not 0 < p < 1:
        raise ValueError("mass parameter must satisfy 0 < p < 1")
    q, r = rule.q, rule.r
    Aset = normalize_symbols(A, q)
    if not Aset or len(Aset) == q:
        raise ValueError("symbol set must be nonempty and proper")
    counts = histogram(rule, Aset, Aset).counts
    a, b = len(Aset), q - len(Aset)
    total = Fraction(0)
    for l in range(r + 2):
        inner = Fraction(0)
        for k in range(l + 1):
            sign = -1 if (l - k) % 2 else 1
            inner += Fraction(
                sign * comb(r + 1 - k, r + 1 - l) * counts[k],
                a**k * b ** (r + 1 - k),
            )
        total += p**l * inner
    return total


@dataclass(frozen=True)
class ContractionReport:
    lhs: Fraction
    rhs: Fraction
    holds: bool
    witness_u: str
    witness_w: str


def check_uniform_contraction(
    rule: LocalRule,
    mu: CylinderMeasure,
    n: int,
    limit: int = DEFAULT_PUSHFORWARD_LIMIT,
) -> ContractionReport:
    """Compare sup-distance to uniform before and after one rule step.

    lhs is the maximum of |F mu([u]) - q^-n| over length-n words u, rhs the
    same maximum for mu itself; holds means lhs <= rhs.  Witnesses are the
    lexicographically first maximizers.
    """
    if n < 1:
        raise ValueError("cylinder length must be >= 1")
    q = rule.q
    _check_pushforward_bound(q, n + rule.r, limit)
    lam = Fraction(1, q**n)
    lhs = rhs = Fraction(-1)
    witness_u = witness_w = ""
    for syms in itertools.product(range(q), repeat=n):
        u = symbols_word(syms)
        d_image = abs(pushforward(rule, mu, u, limit) - lam)
        if d_image > lhs:
            lhs, witness_u = d_image, u
        d_base = abs(mu.cylinder(u) - lam)
        if d_base > rhs:
            rhs, witness_w = d_base, u
    return ContractionReport(
        lhs=lhs, rhs=rhs, holds=lhs <= rhs, witness_u=witness_u, witness_w=witness_w
    )


def check_measure_invariance(
    rule: LocalRule,
    mu: CylinderMeasure,
    depth: int,
    limit: int = DEFAULT_PUSHFORWARD_LIMIT,
) -> bool:
    """True iff the pushforward agrees with mu on all cylinders up to depth."""
    q = rule.q
    for length in range(1, depth + 1):
        for syms in itertools.product(range(q), repeat=length):
            u = symbols_word(syms)
            if pushforward(rule, mu, u, limit) != mu.cylinder(u):
                return False
    return True


@dataclass(frozen=True)
class BlockEntropyReport:
    n: int
    value: float  # H_n in nats
    rate: float  # H_n / n
    increment: float  # H_n - H_{n-1}


def _block_entropy_value(mu: CylinderMeasure, n: int) -> float:
    if n == 0:
        return 0.0
    total = 0.0
    for syms in itertools.product(range(mu.q), repeat=n):
        p = mu.cylinder(symbols_word(syms))
        if p > 0:
            pf = float(p)
            total -= pf * math.log(pf)
    return total


def block_entropy(
    mu: CylinderMeasure, n: int, limit: int = DEFAULT_PUSHFORWARD_LIMIT
) -> BlockEntropyReport:
    """Shannon entropy of the length-n cylinder distribution (nats, float).

    The one deliberately inexact diagnostic in this module.
    """
    if n < 1:
        raise ValueError("block length must be >= 1")
    if mu.q**n > limit:
        raise ValueError(f"q^n = {mu.q ** n} exceeds limit {limit}")
    h_n = _block_entropy_value(mu, n)
    h_prev = _block_entropy_value(mu, n - 1)
    return BlockEntropyReport(n=n, value=h_n, rate=h_n / n, increment=h_n - h_prev)
