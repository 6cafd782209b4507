"""Local rules of one-dimensional cellular automata over finite alphabets.

A rule of radius r on an alphabet of size q is a table f mapping each
neighborhood word of length r+1 to a symbol.  Neighborhoods extend to the
right only: applying the rule to a word w of length n yields a word of
length n - r with output i computed from w[i : i+r+1].

Words are strings of base-q digits (0-9 then a-z, so q <= 36), leftmost
symbol first.  Rule tables are indexed by neighborhoods in lexicographic
order with the leftmost cell most significant, and the text form of a rule
is "q r digits" with exactly q^(r+1) table digits.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

from .rng import SplitMix64

DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"
MAX_ALPHABET = len(DIGITS)

#: refuse to enumerate rule spaces larger than this (tables, not rules tested)
DEFAULT_ENUMERATION_LIMIT = 1 << 26

#: subset construction is guaranteed cheap only while q^r stays tiny
MAX_DE_BRUIJN_NODES = 16


def symbol_value(ch: str) -> int:
    v = DIGITS.find(ch)
    if v < 0:
        raise ValueError(f"invalid symbol {ch!r}")
    return v


def word_symbols(word: str, q: int) -> list[int]:
    """Decode a digit string into symbol values, validating against q."""
    out = []
    for ch in word:
        v = symbol_value(ch)
        if v >= q:
            raise ValueError(f"symbol {ch!r} out of range for alphabet size {q}")
        out.append(v)
    return out


def symbols_word(symbols: Iterable[int]) -> str:
    return "".join(DIGITS[s] for s in symbols)


@dataclass(frozen=True)
class LocalRule:
    """A local rule: alphabet size q, radius r, and the full truth table."""

    q: int
    r: int
    table: tuple[int, ...]

    def __post_init__(self):
        if not 2 <= self.q <= MAX_ALPHABET:
            raise ValueError(f"alphabet size must be in [2, {MAX_ALPHABET}]")
        if self.r < 0:
            raise ValueError("radius must be >= 0")
        if len(self.table) != self.q ** (self.r + 1):
            raise ValueError(
                f"table must have q^(r+1) = {self.q ** (self.r + 1)} entries, "
                f"got {len(self.table)}"
            )
        for v in self.table:
            if not 0 <= v < self.q:
                raise ValueError(f"table entry {v} out of range")

    @property
    def neighborhood_size(self) -> int:
        return self.r + 1

    def format(self) -> str:
        return f"{self.q} {self.r} {symbols_word(self.table)}"

    def __str__(self) -> str:
        return self.format()

    @classmethod
    def identity(cls, q: int) -> "LocalRule":
        return cls(q, 0, tuple(range(q)))

    @classmethod
    def shift(cls, q: int) -> "LocalRule":
        return cls(q, 1, tuple(b for _ in range(q) for b in range(q)))

    @classmethod
    def xor(cls) -> "LocalRule":
        """The two-neighbor binary XOR rule f(a, b) = a + b mod 2."""
        return cls(2, 1, (0, 1, 1, 0))


def parse_rule(text: str) -> LocalRule:
    """Parse a "q r digits" descriptor into a LocalRule."""
    parts = text.split()
    if len(parts) != 3:
        raise ValueError(f"rule descriptor must be 'q r digits', got {text!r}")
    try:
        q = int(parts[0])
        r = int(parts[1])
    except ValueError as exc:
        raise ValueError(f"bad alphabet size or radius in {text!r}") from exc
    if not 2 <= q <= MAX_ALPHABET:
        raise ValueError(f"alphabet size must be in [2, {MAX_ALPHABET}]")
    if r < 0:
        raise ValueError("radius must be >= 0")
    expected = q ** (r + 1)
    if len(parts[2]) != expected:
        raise ValueError(
            f"rule needs {expected} table digits, got {len(parts[2])}"
        )
    return LocalRule(q, r, tuple(word_symbols(parts[2], q)))


def format_rule(rule: LocalRule) -> str:
    return rule.format()


def apply_word(rule: LocalRule, word: str) -> str:
    """Apply the rule once; the result is r symbols shorter."""
    syms = word_symbols(word, rule.q)
    if len(syms) < rule.r + 1:
        raise ValueError(
            f"word of length {len(syms)} too short for radius {rule.r}"
        )
    q, qr, table = rule.q, rule.q ** rule.r, rule.table
    idx = 0
    for s in syms[: rule.r]:
        idx = idx * q + s
    out = []
    for s in syms[rule.r :]:
        idx = idx * q + s
        out.append(DIGITS[table[idx]])
        idx %= qr
    return "".join(out)


def iterate_word(rule: LocalRule, word: str, t: int) -> str:
    """Apply the rule t times; needs |word| >= t*r + 1."""
    if t < 0:
        raise ValueError("iteration count must be >= 0")
    if len(word) < t * rule.r + 1:
        raise ValueError(
            f"word of length {len(word)} too short for {t} steps of radius {rule.r}"
        )
    for _ in range(t):
        word = apply_word(rule, word)
    return word


def compose(f: LocalRule, g: LocalRule) -> LocalRule:
    """Rule computing f after g, of radius f.r + g.r."""
    if f.q != g.q:
        raise ValueError("cannot compose rules over different alphabets")
    q = f.q
    width = f.r + g.r + 1
    table = []
    for syms in itertools.product(range(q), repeat=width):
        mid = apply_word(g, symbols_word(syms))
        table.append(symbol_value(apply_word(f, mid)))
    return LocalRule(q, f.r + g.r, tuple(table))


def self_compose(rule: LocalRule, t: int) -> LocalRule:
    """The rule of the t-fold iterate, radius t*r; t = 0 gives the identity."""
    if t < 0:
        raise ValueError("iteration count must be >= 0")
    out = LocalRule.identity(rule.q)
    for _ in range(t):
        out = compose(out, rule)
    return out


def is_balanced(rule: LocalRule) -> bool:
    """True iff every symbol has exactly q^r preimage neighborhoods."""
    counts = [0] * rule.q
    for v in rule.table:
        counts[v] += 1
    return all(c == rule.q ** rule.r for c in counts)


def _pairs_balanced(rule: LocalRule) -> bool:
    # balance for two-symbol words: every ab must have exactly q^r preimages
    q, r = rule.q, rule.r
    qr = q**r
    qr1 = q ** (r + 1)
    counts = [0] * (q * q)
    for w in range(q ** (r + 2)):
        a = rule.table[w // q]
        b = rule.table[w % qr1]
        counts[a * q + b] += 1
    return all(c == qr for c in counts)


def is_surjective(rule: LocalRule) -> bool:
    """Decide surjectivity of the global map on bi-infinite configurations.

    Subset construction over the de Bruijn transition system: vertices are
    words of length r, and u reaches v under output symbol a when the
    overlap word w (|w| = r+1, u = w[:-1], v = w[1:]) satisfies f(w) = a.
    Starting from the full vertex set, the map is surjective iff the empty
    set is unreachable, i.e. every finite word has at least one preimage.

    Surjectivity forces balance at every word length, so cheap balance
    checks at lengths 1 and 2 reject most rules before the search.
    """
    q, r = rule.q, rule.r
    nodes = q**r
    if nodes > MAX_DE_BRUIJN_NODES:
        raise ValueError(
            f"q^r = {nodes} de Bruijn vertices exceeds the supported {MAX_DE_BRUIJN_NODES}"
        )
    if not is_balanced(rule):
        return False
    if not _pairs_balanced(rule):
        return False
    succ = [[0] * nodes for _ in range(q)]
    for u in range(nodes):
        for b in range(q):
            w = u * q + b
            succ[rule.table[w]][u] |= 1 << (w % nodes)
    full = (1 << nodes) - 1
    seen = {full}
    stack = [full]
    while stack:
        state = stack.pop()
        for a in range(q):
            rows = succ[a]
            target = 0
            m = state
            while m:
                u = (m & -m).bit_length() - 1
                target |= rows[u]
                m &= m - 1
            if target == 0:
                return False
            if target not in seen:
                seen.add(target)
                stack.append(target)
    return True


def _preimage_iter(rule: LocalRule, word: str) -> Iterator[str]:
    q, r = rule.q, rule.r
    target = word_symbols(word, q)
    n = len(target)
    if n == 0:
        raise ValueError("preimages need a nonempty word")
    qr = q**r
    table = rule.table

    def extend(prefix: list[int], idx: int, pos: int) -> Iterator[str]:
        if pos == n:
            yield symbols_word(prefix)
            return
        want = target[pos]
        for b in range(q):
            if table[idx * q + b] == want:
                prefix.append(b)
                yield from extend(prefix, (idx * q + b) % qr, pos + 1)
                prefix.pop()
        return

    for start in itertools.product(range(q), repeat=r):
        idx = 0
        for s in start:
            idx = idx * q + s
        yield from extend(list(start), idx, 0)


def preimages(rule: LocalRule, word: str) -> list[str]:
    """All words w with apply_word(rule, w) == word, in lexicographic order."""
    return list(_preimage_iter(rule, word))


def rule_count(q: int, r: int) -> int:
    """Size q^(q^(r+1)) of the radius-r rule space."""
    return q ** (q ** (r + 1))


def rule_from_index(q: int, r: int, index: int) -> LocalRule:
    """The index-th rule in lexicographic table order."""
    entries = q ** (r + 1)
    if not 0 <= index < rule_count(q, r):
        raise ValueError(f"rule index {index} out of range")
    table = [0] * entries
    for pos in range(entries - 1, -1, -1):
        index, table[pos] = divmod(index, q)
    return LocalRule(q, r, tuple(table))


def rule_index(rule: LocalRule) -> int:
    """Position of the rule in lexicographic table order."""
    index = 0
    for v in rule.table:
        index = index * rule.q + v
    return index


def enumerate_rules(
    q: int,
    r: int,
    surjective_only: bool = False,
    limit: int = DEFAULT_ENUMERATION_LIMIT,
) -> Iterator[LocalRule]:
    """Yield every radius-r rule table in lexicographic order.

    Refuses rule spaces larger than `limit` tables.
    """
    count = rule_count(q, r)
    if count > limit:
        raise ValueError(
            f"rule space of size q^(q^(r+1)) = {count} exceeds limit {limit}"
        )
    for table in itertools.product(range(q), repeat=q ** (r + 1)):
        rule = LocalRule(q, r, table)
        if surjective_only and not is_surjective(rule):
            continue
        yield rule


@lru_cache(maxsize=32)
def surjective_rules(q: int, r: int) -> tuple[LocalRule, ...]:
    """All surjective radius-r rules, cached for sweeps."""
    return tuple(enumerate_rules(q, r, surjective_only=True))


def random_rule(q: int, r: int, rng: SplitMix64) -> LocalRule:
    """A uniformly random rule table drawn from the given stream."""
    return LocalRule(q, r, tuple(rng.below(q) for _ in range(q ** (r + 1))))
