"""Lacunary sequences theta = {k_r}: blocks I_r = (k_{r-1}, k_r], h_r, q_r."""
from __future__ import annotations

import bisect
import math
import threading
import warnings
from fractions import Fraction

from ._frozen import frozen
from .errors import InvalidLacunary, LacunaryWarning

_CACHE: dict = {}
_LOCK = threading.RLock()


class LacunarySequence:
    """Common behaviour; subclasses provide ``_generate(r)`` or a finite list."""

    length = None  # number of terms for finite sequences

    def _generate(self, r: int) -> int:
        raise NotImplementedError

    def _terms_through(self, r: int) -> list:
        if r < 0:
            raise InvalidLacunary(f"block index must be >= 0, got {r}")
        if self.length is not None and r >= self.length:
            raise InvalidLacunary(f"{self.describe()} has only {self.length} terms (asked for k_{r})")
        cached = _CACHE.get(self)
        if cached is not None and len(cached) > r:  # lists only grow, so no lock needed here
            return cached
        with _LOCK:
            cached = _CACHE.setdefault(self, [])
            while len(cached) <= r:
                value = self._generate(len(cached))
                if cached and value <= cached[-1]:
                    raise InvalidLacunary(
                        f"{self.describe()} is not strictly increasing at r={len(cached)}")
                cached.append(value)
            return cached

    def term(self, r: int) -> int:
        return self._terms_through(r)[r]

    def terms(self, r_max: int) -> list:
        return list(self._terms_through(r_max)[: r_max + 1])

    def h(self, r: int) -> int:
        if r < 1:
            raise InvalidLacunary("h_r is defined for r >= 1")
        ks = self._terms_through(r)
        return ks[r] - ks[r - 1]

    def q(self, r: int) -> Fraction:
        if r < 1:
            raise InvalidLacunary("q_r is defined for r >= 1")
        ks = self._terms_through(r)
        return Fraction(ks[r], ks[r - 1])

    def block(self, r: int) -> tuple:
        """Inclusive integer range (k_{r-1} + 1, k_r) of the block I_r."""
        ks = self._terms_through(r)
        return ks[r - 1] + 1, ks[r]

    def block_of(self, n: int):
        """Index r with n in I_r, or None if n <= k_0 or past a finite list."""
        ks = _CACHE.get(self)
        if ks and ks[-1] >= n:
            return bisect.bisect_left(ks, n) if n > ks[0] else None
        if n <= self.term(0):
            return None
        r = 1
        while True:
            if self.length is not None:
                r = min(r, self.length - 1)
            ks = self._terms_through(r)
            if ks[r] >= n:
                return bisect.bisect_left(ks, n)
            if self.length is not None and r == self.length - 1:
                return None
            r *= 2

    def last_block_through(self, n: int) -> int:
        """Largest r with k_r <= n, or -1 when n < k_0."""
        if n < self.term(0):
            return -1
        r = self.block_of(n)
        if r is None:
            return 0 if n == self.term(0) else self.length - 1
        return r if self.term(r) == n else r - 1


@frozen
class Powers(LacunarySequence):
    base: int

    def __post_init__(self):
        if int(self.base) != self.base or self.base < 2:
            raise InvalidLacunary(f"powers(base) needs an integer base >= 2, got {self.base}")

    def _generate(self, r):
        return self.base ** r

    def describe(self):
        return f"powers({self.base})"


@frozen
class FactorialEven(LacunarySequence):
    """k_r = (2r)!"""

    def _generate(self, r):
        return math.factorial(2 * r)

    def describe(self):
        return "factorial_even"


@frozen
class FactorialOdd(LacunarySequence):
    """k_r = (2r+1)!"""

    def _generate(self, r):
        return math.factorial(2 * r + 1)

    def describe(self):
        return "factorial_odd"


@frozen
class ExplicitList(LacunarySequence):
    values: tuple

    def __post_init__(self):
        values = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if len(values) < 2:
            raise InvalidLacunary("an explicit lacunary list needs at least two terms")
        if values[0] < 1:
            raise InvalidLacunary(f"k_0 must be >= 1, got {values[0]}")
        for a, b in zip(values, values[1:]):
            if b <= a:
                raise InvalidLacunary(f"terms must be strictly increasing ({a} then {b})")

    @property
    def length(self):
        return len(self.values)

    def _generate(self, r):
        return self.values[r]

    def describe(self):
        return "list[" + ", ".join(str(v) for v in self.values) + "]"


@frozen
class RatioControlled(LacunarySequence):
    """Sequence with liminf q_r = 1 built from block pairs (a_j, b_j].

    For j = 1..j_max the terms a_j < b_j are consecutive, with b_j / a_j < 1 + 1/j
    and a_{j+1} = (j+1) b_j + 1, so a_{j+1} / b_j > j + 1. Between b_j and
    a_{j+1} the sequence doubles; after b_{j_max} it doubles forever.
    """

    j_max: int

    def __post_init__(self):
        if int(self.j_max) != self.j_max or self.j_max < 1:
            raise InvalidLacunary(f"ratio_controlled needs j_max >= 1, got {self.j_max}")

    def construction(self):
        """(terms, pairs) where pairs holds (j, r(j), a_j, b_j)."""
        key = ("construction", self.j_max)
        with _LOCK:
            if key in _CACHE:
                return _CACHE[key]
        terms = [1]
        pairs = []
        a = 2
        for j in range(1, self.j_max + 1):
            b = a + a // (j + 1) + 1
            while b * j >= a * (j + 1):
                b -= 1
            if b <= a:
                raise InvalidLacunary(f"cannot fit a block with ratio < 1 + 1/{j} after {a}")
            terms.append(a)
            terms.append(b)
            pairs.append((j, len(terms) - 1, a, b))
            if j == self.j_max:
                break
            nxt = (j + 1) * b + 1
            x = 2 * b
            while x < nxt:
                terms.append(x)
                x *= 2
            a = nxt
        with _LOCK:
            _CACHE[key] = (tuple(terms), tuple(pairs))
        return _CACHE[key]

    def pairs(self):
        return self.construction()[1]

    def _generate(self, r):
        terms = self.construction()[0]
        if r < len(terms):
            return terms[r]
        return terms[-1] * 2 ** (r - len(terms) + 1)

    def describe(self):
        return f"ratio_controlled({self.j_max})"


def lacunary_terms(theta: LacunarySequence, r_max: int) -> list:
    """Rows (r, k_r, h_r, q_r); h_r and q_r are None for r = 0.

    Emits a LacunaryWarning if h_r decreases inside the requested range.
    """
    if r_max < 0:
        raise InvalidLacunary(f"r_max must be >= 0, got {r_max}")
    ks = theta.terms(r_max)
    rows = [(0, ks[0], None, None)]
    prev_h = None
    for r in range(1, r_max + 1):
        h = ks[r] - ks[r - 1]
        if prev_h is not None and h < prev_h:
            warnings.warn(f"{theta.describe()}: h_{r} = {h} < h_{r - 1} = {prev_h}",
                          LacunaryWarning, stacklevel=2)
        prev_h = h
        rows.append((r, ks[r], h, Fraction(ks[r], ks[r - 1])))
    return rows


def theta_from_spec(spec: str) -> LacunarySequence:
    """Parse the command-line shorthand: pow2, pow:B, fact_even, fact_odd, ratio:J, list:1,2,4."""
    spec = spec.strip()
    try:
        if spec == "pow2":
            return Powers(2)
        if spec.startswith("pow:"):
            return Powers(int(spec[4:]))
        if spec == "fact_even":
            return FactorialEven()
        if spec == "fact_odd":
            return FactorialOdd()
        if spec.startswith("ratio:"):
            return RatioControlled(int(spec[6:]))
        if spec.startswith("list:"):
            return ExplicitList(tuple(int(v) for v in spec[5:].split(",")))
    except ValueError as exc:
        raise InvalidLacunary(f"bad theta spec {spec!r}: {exc}") from None
    raise InvalidLacunary(f"unknown theta spec {spec!r}")
