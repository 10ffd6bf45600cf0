"""Index sets K of positive integers with exact membership and counting.

Every kind answers three questions using integer arithmetic only:

* ``contains(n)``
* ``count(n)`` -- |K intersect [1, n]| in closed form (``count(0) == 0``)
* ``ranges(lo, hi)`` -- maximal runs of members inside [lo, hi]
"""
from __future__ import annotations

import bisect
import math
import threading
from fractions import Fraction
from functools import lru_cache

import gmpy2

from ._frozen import frozen
from .errors import DomainError, EnumerationCapExceeded
from .expr import format_rational
from .lacunary import LacunarySequence, RatioControlled

RANGE_LIMIT = 10**6


def iroot(x: int, n: int) -> int:
    """floor(x ** (1/n)) for x >= 0."""
    if n == 2:
        return math.isqrt(x)
    return int(gmpy2.iroot(gmpy2.mpz(x), n)[0])


def _merge(points):
    runs = []
    for p in points:
        if runs and runs[-1][1] + 1 == p:
            runs[-1][1] = p
        else:
            runs.append([p, p])
    return [tuple(run) for run in runs]


def _count_runs(starts, ends, before, n):
    """Members <= n of sorted disjoint runs; before[i] is the size of runs 0..i-1."""
    i = bisect.bisect_right(starts, n)
    if i == 0:
        return 0
    return before[i - 1] + min(ends[i - 1], n) - starts[i - 1] + 1


def _check_n(n):
    if int(n) != n or n < 0:
        raise DomainError(f"index must be a nonnegative integer, got {n!r}")


class IndexSet:
    def contains(self, n: int) -> bool:
        raise NotImplementedError

    def count(self, n: int) -> int:
        raise NotImplementedError

    def ranges(self, lo: int, hi: int, limit: int = RANGE_LIMIT) -> list:
        raise NotImplementedError

    def count_between(self, lo: int, hi: int) -> int:
        """|K intersect [lo, hi]|."""
        if hi < lo:
            return 0
        if lo <= 1:
            return self.count(hi)
        return self.count(hi) - self.count(lo - 1)


@frozen
class FloorPower(IndexSet):
    """{floor(m ** (s/r)) : m >= 1}, with s > r >= 1 and gcd(s, r) = 1.

    n is a member iff some m satisfies n**r <= m**s < (n+1)**r. Since s/r > 1
    the map m -> floor(m ** (s/r)) is injective, so count(n) is the number of
    m with m**s < (n+1)**r.
    """

    s: int
    r: int

    def __post_init__(self):
        if int(self.s) != self.s or int(self.r) != self.r:
            raise DomainError("floor_power exponents must be integers")
        if not self.s > self.r >= 1:
            raise DomainError(f"floor_power needs s > r >= 1, got s={self.s}, r={self.r}")
        if math.gcd(self.s, self.r) != 1:
            raise DomainError(f"floor_power({self.s},{self.r}) is not in lowest terms")

    def contains(self, n):
        _check_n(n)
        if n == 0:
            return False
        target = n ** self.r
        m = iroot(target, self.s)
        if m ** self.s < target:
            m += 1
        return m ** self.s < (n + 1) ** self.r

    def count(self, n):
        _check_n(n)
        return iroot((n + 1) ** self.r - 1, self.s)

    def member(self, m: int) -> int:
        return iroot(m ** self.s, self.r)

    def ranges(self, lo, hi, limit=RANGE_LIMIT):
        first, last = self.count(max(lo, 1) - 1) + 1, self.count(max(hi, 0))
        if last - first + 1 > limit:
            raise EnumerationCapExceeded(f"{self.describe()} has {last - first + 1} members in [{lo}, {hi}]")
        return _merge(self.member(m) for m in range(first, last + 1))

    def describe(self):
        return f"floor_power({self.s},{self.r})"


_SELF_POWERS = [0, 1]


@frozen
class SelfPower(IndexSet):
    """{m ** m : m >= 1}"""

    def contains(self, n):
        _check_n(n)
        m = 1
        while m ** m < n:
            m += 1
        return n >= 1 and m ** m == n

    def count(self, n):
        _check_n(n)
        powers = _SELF_POWERS
        while powers[-1] <= n:
            m = len(powers)
            powers.append(m ** m)
        return bisect.bisect_right(powers, n) - 1  # powers[0] = 0 stands in for m = 0

    def ranges(self, lo, hi, limit=RANGE_LIMIT):
        points = [m ** m for m in range(self.count(max(lo, 1) - 1) + 1, self.count(max(hi, 0)) + 1)]
        return _merge(points)

    def describe(self):
        return "self_power"


def factorial_level(n: int) -> int:
    """G(n) = g with g! < n <= (g+1)!; G(1) is taken to be 0."""
    if n < 1:
        raise DomainError(f"G is defined for n >= 1, got {n}")
    g, f = 0, 1  # f = (g+1)!
    while f < n:
        g += 1
        f *= g + 1
    return g


_PARITY_TABLES: dict = {}


@frozen
class FactorialParity(IndexSet):
    """{n : G(n) has the given parity}, G(n) = g for g! < n <= (g+1)!.

    Level g >= 1 covers the integers g!+1 .. (g+1)!; index 1 is level 0.
    """

    parity: str

    def __post_init__(self):
        if self.parity not in ("even", "odd"):
            raise DomainError(f"factorial_parity takes 'even' or 'odd', got {self.parity!r}")

    def _wanted(self, g):
        return (g % 2 == 0) == (self.parity == "even")

    def _levels(self, hi):
        """Yield (g, first, last) for every level intersecting [1, hi]."""
        if hi < 1:
            return
        yield 0, 1, 1
        g, f = 1, 1
        while f < hi:
            nxt = f * (g + 1)
            yield g, f + 1, nxt
            g, f = g + 1, nxt

    def contains(self, n):
        _check_n(n)
        return n >= 1 and self._wanted(factorial_level(n))

    def count(self, n):
        _check_n(n)
        starts, ends, before = self._table(n)
        return _count_runs(starts, ends, before, n)

    def _table(self, n):
        """Run table for the wanted levels, extended until it reaches n."""
        table = _PARITY_TABLES.get(self.parity)
        if table is None:
            table = _PARITY_TABLES.setdefault(self.parity, ([], [], [], [0, 1, 1]))
        starts, ends, before, state = table
        if state[1] - 1 < n or not starts:  # state[1] - 1 ends the last level seen
            with _TABLE_LOCK:
                g, first, last = state
                while not starts or first - 1 < n:
                    if self._wanted(g):
                        before.append(before[-1] + ends[-1] - starts[-1] + 1 if starts else 0)
                        starts.append(first)
                        ends.append(last)
                    g, first, last = g + 1, last + 1, last * (g + 2)
                state[:] = [g, first, last]
        return starts, ends, before

    def ranges(self, lo, hi, limit=RANGE_LIMIT):
        out = []
        for g, first, last in self._levels(hi):
            a, b = max(first, lo), min(last, hi)
            if a <= b and self._wanted(g):
                out.append((a, b))
        return out

    def describe(self):
        return f"factorial_parity({self.parity})"


@lru_cache(maxsize=None)
def _prefix_size(theta, c: Fraction, r: int) -> int:
    h = theta.h(r)
    return iroot(h ** c.numerator, c.denominator)


_TABLE_LOCK = threading.Lock()


@frozen
class BlockPrefix(IndexSet):
    """The first floor(h_r ** c) integers of every block I_r of theta."""

    theta: LacunarySequence
    c: Fraction

    def __post_init__(self):
        object.__setattr__(self, "c", Fraction(self.c))
        if not 0 <= self.c <= 1:
            raise DomainError(f"block_prefix exponent must lie in [0, 1], got {self.c}")

    def prefix_size(self, r: int) -> int:
        return _prefix_size(self.theta, self.c, r)

    def _run(self, r):
        start = self.theta.term(r - 1) + 1
        return start, start + self.prefix_size(r) - 1

    def contains(self, n):
        _check_n(n)
        r = self.theta.block_of(n)
        if r is None:
            return False
        start, end = self._run(r)
        return n <= end

    def count(self, n):
        _check_n(n)
        return _count_runs(*self._table(n), n)

    def _table(self, n):
        """Runs of the first len(block) ** c members, built lazily through the block holding n."""
        table = self.__dict__.get("_run_table")
        if table is None:
            table = ([], [], [], [1, self.theta.term(0)])
            object.__setattr__(self, "_run_table", table)
        starts, ends, before, state = table  # state: next block r, k_(r-1)
        if state[1] < n:
            theta = self.theta
            with _TABLE_LOCK:
                while state[1] < n:
                    r = state[0]
                    if theta.length is not None and r >= theta.length:
                        state[1] = math.inf  # finite list: no further blocks
                        break
                    start, size = state[1] + 1, self.prefix_size(r)
                    if size:
                        before.append(before[-1] + ends[-1] - starts[-1] + 1 if starts else 0)
                        starts.append(start)
                        ends.append(start + size - 1)
                    state[:] = [r + 1, theta.term(r)]
        return starts, ends, before

    def ranges(self, lo, hi, limit=RANGE_LIMIT):
        out = []
        r = self.theta.block_of(max(lo, 1))
        if r is None:
            if max(lo, 1) > self.theta.term(0) or hi <= self.theta.term(0):
                return out
            r = 1
        while True:
            if self.theta.length is not None and r >= self.theta.length:
                break
            start, end = self._run(r)
            if start > hi:
                break
            a, b = max(start, lo), min(end, hi)
            if a <= b:
                out.append((a, b))
                if len(out) > limit:
                    raise EnumerationCapExceeded(f"{self.describe()} has more than {limit} runs in [{lo}, {hi}]")
            r += 1
        return out

    def describe(self):
        return f"block_prefix({self.theta.describe()}, {format_rational(self.c)})"


@lru_cache(maxsize=None)
def _ratio_runs(j_max):
    runs = [(a + 1, b) for _, _, a, b in RatioControlled(j_max).pairs()]
    before = [0]
    for a, b in runs[:-1]:
        before.append(before[-1] + b - a + 1)
    return runs, [a for a, _ in runs], [b for _, b in runs], before


@frozen
class RatioBlocks(IndexSet):
    """Union of the blocks (a_j, b_j] of ratio_controlled(j_max), j <= j_max."""

    j_max: int

    def __post_init__(self):
        RatioControlled(self.j_max)  # validates j_max

    def _runs(self):
        return _ratio_runs(self.j_max)[0]

    def contains(self, n):
        _check_n(n)
        return any(a <= n <= b for a, b in self._runs())

    def count(self, n):
        _check_n(n)
        return _count_runs(*_ratio_runs(self.j_max)[1:], n)

    def ranges(self, lo, hi, limit=RANGE_LIMIT):
        return [(max(a, lo), min(b, hi)) for a, b in self._runs() if max(a, lo) <= min(b, hi)]

    def describe(self):
        return f"ratio_blocks({self.j_max})"


@frozen
class FiniteList(IndexSet):
    values: tuple

    def __post_init__(self):
        values = tuple(sorted(set(int(v) for v in self.values)))
        if values and values[0] < 1:
            raise DomainError("list members must be positive integers")
        object.__setattr__(self, "values", values)

    def contains(self, n):
        _check_n(n)
        i = bisect.bisect_left(self.values, n)
        return i < len(self.values) and self.values[i] == n

    def count(self, n):
        _check_n(n)
        return bisect.bisect_right(self.values, n)

    def ranges(self, lo, hi, limit=RANGE_LIMIT):
        return _merge(v for v in self.values if lo <= v <= hi)

    def describe(self):
        return "list[" + ", ".join(str(v) for v in self.values) + "]"


@frozen
class Empty(IndexSet):
    def contains(self, n):
        _check_n(n)
        return False

    def count(self, n):
        _check_n(n)
        return 0

    def ranges(self, lo, hi, limit=RANGE_LIMIT):
        return []

    def describe(self):
        return "empty"


@frozen
class All(IndexSet):
    def contains(self, n):
        _check_n(n)
        return n >= 1

    def count(self, n):
        _check_n(n)
        return n

    def ranges(self, lo, hi, limit=RANGE_LIMIT):
        lo = max(lo, 1)
        return [(lo, hi)] if lo <= hi else []

    def describe(self):
        return "all"


def index_contains(index_set: IndexSet, n: int) -> bool:
    if int(n) != n or n < 1:
        raise DomainError(f"indices start at 1, got {n!r}")
    return index_set.contains(int(n))


def index_count(index_set: IndexSet, n: int) -> int:
    if int(n) != n or n < 1:
        raise DomainError(f"indices start at 1, got {n!r}")
    return index_set.count(int(n))
