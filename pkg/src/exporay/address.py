"""Bounded external addresses: eventually periodic integer sequences.

An address s = s1 s2 s3 ... labels which horizontal strip
((2*s_n - 1)*pi, (2*s_n + 1)*pi) each forward image of a point visits.
Only bounded, eventually periodic addresses are representable here: a finite
preperiod followed by a repeating block.  Text form is "pre|block", e.g.
"|0" for the constant zero address and "2|0,1" for 2 0 1 0 1 ...
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import gcd

# Entries are kept small enough that no arithmetic on them can overflow
# intermediate float work downstream (2*pi*M must stay far below 1e308).
MAX_ENTRY = 10**6


def _primitive(block: tuple[int, ...]) -> tuple[int, ...]:
    n = len(block)
    for d in range(1, n + 1):
        if n % d == 0 and block == block[:d] * (n // d):
            return block[:d]
    return block


@dataclass(frozen=True)
class ExternalAddress:
    """Canonical eventually periodic address.

    The representation is normalized on construction: the period block is
    primitive and the preperiod never ends with a symbol that could be
    absorbed into a rotation of the block, so structural equality coincides
    with equality of the underlying infinite sequences.
    """

    preperiod: tuple[int, ...]
    period_block: tuple[int, ...]

    def __post_init__(self) -> None:
        pre = tuple(int(x) for x in self.preperiod)
        block = tuple(int(x) for x in self.period_block)
        if not block:
            raise ValueError("period block must be nonempty")
        for x in itertools.chain(pre, block):
            if abs(x) > MAX_ENTRY:
                raise ValueError(f"address entry {x} exceeds bound {MAX_ENTRY}")
        block = _primitive(block)
        while pre and pre[-1] == block[-1]:
            pre = pre[:-1]
            block = (block[-1],) + block[:-1]
        object.__setattr__(self, "preperiod", pre)
        object.__setattr__(self, "period_block", block)

    # -- basic queries ----------------------------------------------------

    def entry(self, n: int) -> int:
        """n-th entry of the sequence, 1-indexed."""
        if n < 1:
            raise ValueError("entries are 1-indexed")
        k = n - 1
        if k < len(self.preperiod):
            return self.preperiod[k]
        return self.period_block[(k - len(self.preperiod)) % len(self.period_block)]

    def shift(self) -> "ExternalAddress":
        """Drop the first entry."""
        if self.preperiod:
            return ExternalAddress(self.preperiod[1:], self.period_block)
        b = self.period_block
        return ExternalAddress((), b[1:] + b[:1])

    def is_periodic(self) -> bool:
        return not self.preperiod

    def exact_period(self) -> int | None:
        """Length of the primitive block for periodic addresses, else None."""
        return len(self.period_block) if not self.preperiod else None

    def bound(self) -> int:
        """Largest absolute entry value, sup_n |s_n|."""
        return max(abs(x) for x in self.preperiod + self.period_block)

    def prefix(self, k: int) -> tuple[int, ...]:
        return tuple(self.entry(i) for i in range(1, k + 1))

    # -- text form ---------------------------------------------------------

    @classmethod
    def parse(cls, text: str) -> "ExternalAddress":
        """Parse "pre|block" with comma-separated integer entries."""
        if text.count("|") != 1:
            raise ValueError(f"address needs exactly one '|': {text!r}")
        left, right = text.split("|")
        try:
            pre = tuple(int(x) for x in left.split(",") if x.strip() != "")
            block = tuple(int(x) for x in right.split(",") if x.strip() != "")
        except ValueError as exc:
            raise ValueError(f"bad address entry in {text!r}") from exc
        if not block:
            raise ValueError(f"empty period block in {text!r}")
        return cls(pre, block)

    def __str__(self) -> str:
        pre = ",".join(str(x) for x in self.preperiod)
        block = ",".join(str(x) for x in self.period_block)
        return f"{pre}|{block}"


def lex_cmp(s: ExternalAddress, r: ExternalAddress) -> int:
    """Lexicographic comparison of the underlying sequences: -1, 0 or +1.

    Two eventually periodic sequences that agree beyond the joint preperiod
    plus one least common multiple of the periods agree everywhere.
    """
    horizon = (
        max(len(s.preperiod), len(r.preperiod))
        + _lcm(len(s.period_block), len(r.period_block))
        + 1
    )
    for n in range(1, horizon + 1):
        a, b = s.entry(n), r.entry(n)
        if a != b:
            return -1 if a < b else 1
    return 0


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def in_open_interval(s: ExternalAddress, lo: ExternalAddress, hi: ExternalAddress) -> bool:
    """Strict lexicographic membership lo < s < hi."""
    return lex_cmp(lo, s) < 0 and lex_cmp(s, hi) < 0


def enumerate_periodic(n: int, M: int) -> list[ExternalAddress]:
    """All periodic addresses of period dividing n with entries in [-M, M].

    Exactly (2M+1)^n distinct sequences, returned in lexicographic order.
    """
    if n < 1:
        raise ValueError("period must be >= 1")
    if M < 0:
        raise ValueError("entry bound must be >= 0")
    out = {ExternalAddress((), block) for block in itertools.product(range(-M, M + 1), repeat=n)}
    return sorted(out, key=lambda s: s.prefix(n))


def sort_lex(addresses: list[ExternalAddress]) -> list[ExternalAddress]:
    """Sort addresses by the sequence order (total, ties impossible)."""
    import functools

    return sorted(addresses, key=functools.cmp_to_key(lex_cmp))
