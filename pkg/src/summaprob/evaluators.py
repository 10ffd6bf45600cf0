"""Finite-n values of the four convergence functionals.

All set sizes are exact integers; only the final normalisation by n**alpha
or h_r**alpha happens in floating point.

For a :class:`TailModel` whose branches are monotone in k, the set
{k <= n : tail(k, eps) >= delta} splits into on-set members inside a
qualifying k-range plus an off-set prefix {k <= K*}. Counting it then needs
only the index set's closed-form count, so n can be astronomically large.
Other models fall back to enumeration, bounded by :class:`Caps`.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import expr as ex
from .errors import DomainError, EnumerationCapExceeded, MonotonicityViolated
from .index_sets import All, RANGE_LIMIT
from .lacunary import LacunarySequence
from .models import TailModel, TailRule, as_rational

UNBOUNDED = math.inf
CHUNK = 1 << 20
SEARCH_LIMIT = 2**63


@dataclass(frozen=True)
class Caps:
    prefix: int = 10**6   # ps_count / lacunary_count without closed form
    cesaro: int = 10**7   # cesaro_sum
    block: int = 10**7    # direct block summation in n_theta_mean


def current_caps() -> Caps:
    override = os.environ.get("SUMMAPROB_CAP")
    if override:
        try:
            cap = int(override)
        except ValueError:
            raise DomainError(f"SUMMAPROB_CAP must be an integer, got {override!r}") from None
        return Caps(cap, cap, cap)
    return Caps()


@dataclass(frozen=True)
class MethodParams:
    alpha: Fraction = Fraction(1)
    eps: Fraction = Fraction(1, 2)
    delta: Fraction = Fraction(1, 2)
    p: Fraction = Fraction(1)

    def __post_init__(self):
        for name in ("alpha", "eps", "delta", "p"):
            object.__setattr__(self, name, as_rational(getattr(self, name), name))
        if not 0 < self.alpha <= 1:
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.eps <= 0:
            raise DomainError(f"eps must be positive, got {self.eps}")
        if not 0 < self.delta <= 1:
            raise DomainError(f"delta must lie in (0, 1], got {self.delta}")
        if self.p <= 0:
            raise DomainError(f"p must be positive, got {self.p}")

    def replace(self, **changes):
        values = dict(alpha=self.alpha, eps=self.eps, delta=self.delta, p=self.p)
        values.update(changes)
        return MethodParams(**values)


def _check_n(n, name="n"):
    if int(n) != n or n < 1:
        raise DomainError(f"{name} must be a positive integer, got {n!r}")
    return int(n)


def _eps_delta(eps, delta):
    eps, delta = as_rational(eps, "eps"), as_rational(delta, "delta")
    # integer tests: Fraction comparisons are slow on the per-n hot path
    if eps.numerator <= 0:
        raise DomainError(f"eps must be positive, got {eps}")
    if not 0 < delta.numerator <= delta.denominator:
        raise DomainError(f"delta must lie in (0, 1], got {delta}")
    return eps, delta


def _alpha(alpha):
    alpha = as_rational(alpha, "alpha")
    if not 0 < alpha <= 1:
        raise DomainError(f"alpha must lie in (0, 1], got {alpha}")
    return alpha


def power(n: int, alpha: Fraction) -> float:
    """n ** alpha in double precision for an arbitrarily large integer n."""
    if alpha == 1:
        return float(n)
    if n < 2**53:
        return float(n) ** float(alpha)
    return math.exp(float(alpha) * math.log(n))


def normalised(count: int, n: int, alpha: Fraction) -> float:
    if count == 0:
        return 0.0
    if alpha == 1:
        return float(Fraction(count, n))
    if n < 2**53 and count < 2**53:
        return count / power(n, alpha)
    return math.exp(math.log(count) - float(alpha) * math.log(n))


# ---------------------------------------------------------------------------
# threshold searches on a single expression


def _probe(e):
    return TailModel(All(), e, e)


def _search(e, eps, delta, increasing):
    """Boundary of {k : e(k, eps) >= delta} for e monotone in k.

    Nonincreasing e: largest qualifying k, None if k = 1 fails, UNBOUNDED if
    no crossing below 2**63. Nondecreasing e: smallest qualifying k, None if
    none below 2**63. Every sampled value is checked against the assumed
    direction.
    """
    probe = _probe(e)
    samples = {}

    def hit(k):
        samples[k] = probe.tail(k, eps)
        return probe.at_least(k, eps, delta)

    def audit():
        ks = sorted(samples)
        vals = [samples[k] for k in ks]
        for (k1, v1), (k2, v2) in zip(zip(ks, vals), zip(ks[1:], vals[1:])):
            worse = v2 - v1 if not increasing else v1 - v2
            if worse > 1e-12 * max(abs(v1), abs(v2), 1e-300):
                raise MonotonicityViolated(
                    f"{e} is not {'nondecreasing' if increasing else 'nonincreasing'} in k: "
                    f"value {v1!r} at k={k1} but {v2!r} at k={k2} (eps={eps})")

    want = not increasing  # value of hit() on the lower side of the boundary
    if hit(1) != want:
        # no crossing from the start; sample the far range to audit the direction
        k = 2
        while k <= SEARCH_LIMIT:
            if hit(k) == want:
                audit()
                raise MonotonicityViolated(f"{e} crosses delta={delta} again at k={k} (eps={eps})")
            k *= 4
        audit()
        return 1 if increasing else None
    lo, hi = 1, 2
    while hit(hi) == want:
        lo, hi = hi, hi * 2
        if hi > SEARCH_LIMIT:
            audit()
            return None if increasing else UNBOUNDED
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if hit(mid) == want:
            lo = mid
        else:
            hi = mid
    k = hi * 2
    while k <= SEARCH_LIMIT:
        if hit(k) == want:
            audit()
            raise MonotonicityViolated(f"{e} crosses delta={delta} again at k={k} (eps={eps})")
        k *= 4
    audit()
    return hi if increasing else lo


@lru_cache(maxsize=4096)
def _prefix_bound_cached(off_tail, eps, delta):
    if not ex.uses(off_tail, "k"):
        return UNBOUNDED if _probe(off_tail).at_least(1, eps, delta) else None
    return _search(off_tail, eps, delta, increasing=False)


def qualifying_prefix_bound(model: TailModel, eps, delta):
    """Largest k with off_tail(k, eps) >= delta.

    Returns None when even k = 1 fails and UNBOUNDED when no crossing exists
    below 2**63. The off tail must be declared nonincreasing (or be constant);
    contradicting samples raise MonotonicityViolated.
    """
    eps, delta = _eps_delta(eps, delta)
    if not isinstance(model, TailModel):
        raise DomainError("qualifying_prefix_bound needs a piecewise TailModel")
    if ex.uses(model.off_tail, "k") and not model.offtail_monotone:
        raise DomainError("off_tail is not declared monotone (offtail_monotone)")
    return _prefix_bound_cached(model.off_tail, eps, delta)


@dataclass(frozen=True)
class _Split:
    """Qualifying indices: on-set members in [on_lo, on_hi] plus all k <= off_hi off the set."""

    on_set: object
    on_lo: object
    on_hi: object
    off_hi: object

    def count(self, n: int) -> int:
        if n <= 0:
            return 0
        count = self.on_set.count
        hi, m = min(self.on_hi, n), min(self.off_hi, n)
        upto_hi = count(hi) if hi >= 1 else 0
        upto_m = upto_hi if m == hi else (count(m) if m >= 1 else 0)
        on = 0
        if hi >= self.on_lo:
            on = upto_hi - (count(self.on_lo - 1) if self.on_lo > 1 else 0)
        return on + m - upto_m if m >= 1 else on


_SPLITS: dict = {}


def _split(model, eps, delta):
    """Cached _Split for (model, eps, delta), or None without a closed form."""
    key = (model, eps.numerator, eps.denominator, delta.numerator, delta.denominator)
    try:
        return _SPLITS[key]
    except KeyError:
        pass
    if len(_SPLITS) >= 4096:
        _SPLITS.clear()
    value = _SPLITS[key] = _make_split(model, eps, delta)
    return value


def _make_split(model, eps, delta):
    if not isinstance(model, TailModel):
        return None
    direction = ex.k_direction(model.on_tail, eps)
    if direction is None:
        return None
    if direction == 0:
        on_lo, on_hi = (1, UNBOUNDED) if _probe(model.on_tail).at_least(1, eps, delta) else (1, 0)
    elif direction < 0:
        last = _search(model.on_tail, eps, delta, increasing=False)
        on_lo, on_hi = 1, (0 if last is None else last)
    else:
        first = _search(model.on_tail, eps, delta, increasing=True)
        on_lo, on_hi = (UNBOUNDED if first is None else first), UNBOUNDED
    if ex.uses(model.off_tail, "k") and not model.offtail_monotone:
        return None
    bound = _prefix_bound_cached(model.off_tail, eps, delta)
    return _Split(model.on_set, on_lo, on_hi, 0 if bound is None else bound)


def has_closed_form(model: TailRule, eps, delta) -> bool:
    eps, delta = _eps_delta(eps, delta)
    return _split(model, eps, delta) is not None


def _enumerate(model, lo, hi, eps, delta, cap, what):
    if hi - lo + 1 > cap:
        raise EnumerationCapExceeded(
            f"{what}: {hi - lo + 1} indices to enumerate exceeds the cap of {cap}")
    total = 0
    for a in range(lo, hi + 1, CHUNK):
        total += model.count_at_least(a, min(a + CHUNK - 1, hi), eps, delta)
    return total


def count_between(model: TailRule, lo: int, hi: int, eps, delta, caps: Caps | None = None) -> int:
    """|{lo <= k <= hi : tail(k, eps) >= delta}|."""
    eps, delta = _eps_delta(eps, delta)
    if hi < lo:
        return 0
    split = _split(model, eps, delta)
    if split is not None:
        return split.count(hi) - split.count(lo - 1)
    caps = caps or current_caps()
    return _enumerate(model, lo, hi, eps, delta, caps.prefix, "count")


def ps_count(model: TailRule, n: int, eps, delta, caps: Caps | None = None) -> int:
    """|{k <= n : P(|X_k - X| >= eps) >= delta}|, exactly."""
    n = _check_n(n)
    eps, delta = _eps_delta(eps, delta)
    split = _split(model, eps, delta)
    if split is not None:
        return split.count(n)
    return count_between(model, 1, n, eps, delta, caps)


def ps_density(model: TailRule, n: int, params: MethodParams, caps: Caps | None = None) -> float:
    """ps_count / n**alpha."""
    return normalised(ps_count(model, n, params.eps, params.delta, caps), _check_n(n), params.alpha)


def _segment_power_sum(model, lo, hi, eps, p):
    parts = []
    for a in range(lo, hi + 1, CHUNK):
        values = model.tail_array(a, min(a + CHUNK - 1, hi), eps)
        if p != 1:
            values = np.power(values, float(p))
        parts.append(float(np.sum(values)))  # numpy sums pairwise
    return math.fsum(parts)


def tail_power_sums(model: TailRule, ns, eps, p, caps: Caps | None = None) -> dict:
    """{n: sum_{k<=n} tail(k, eps)**p} for every n in ns, in one pass."""
    p = as_rational(p, "p")
    if p <= 0:
        raise DomainError(f"p must be positive, got {p}")
    eps = as_rational(eps, "eps")
    caps = caps or current_caps()
    ns = sorted({_check_n(n) for n in ns})
    if ns and ns[-1] > caps.cesaro:
        raise EnumerationCapExceeded(f"cesaro sum up to n={ns[-1]} exceeds the cap of {caps.cesaro}")
    out, partials, start = {}, [], 1
    for n in ns:
        partials.append(_segment_power_sum(model, start, n, eps, p))
        out[n] = math.fsum(partials)
        start = n + 1
    return out


def cesaro_sum(model: TailRule, n: int, eps, p, alpha, caps: Caps | None = None) -> float:
    """(1/n**alpha) * sum_{k<=n} tail(k, eps)**p by direct summation."""
    n = _check_n(n)
    alpha = _alpha(alpha)
    total = tail_power_sums(model, [n], eps, p, caps)[n]
    return total / power(n, alpha)


def lacunary_count(model: TailRule, theta: LacunarySequence, r: int, eps, delta,
                   caps: Caps | None = None) -> int:
    """|{k in I_r : tail(k, eps) >= delta}| via count(k_r) - count(k_{r-1})."""
    r = _check_n(r, "r")
    lo, hi = theta.block(r)
    return count_between(model, lo, hi, eps, delta, caps)


def s_theta_density(model: TailRule, theta: LacunarySequence, r: int, params: MethodParams,
                    caps: Caps | None = None) -> float:
    count = lacunary_count(model, theta, r, params.eps, params.delta, caps)
    return normalised(count, theta.h(r), params.alpha)


def _complement(runs, lo, hi):
    out, cursor = [], lo
    for a, b in runs:
        if a > cursor:
            out.append((cursor, a - 1))
        cursor = b + 1
    if cursor <= hi:
        out.append((cursor, hi))
    return out


def analytic_tail_sum(model: TailModel, lo: int, hi: int, eps) -> float:
    """sum_{k=lo}^{hi} tail(k, eps) via closed-form partial sums of each branch."""
    eps = as_rational(eps, "eps")
    if not isinstance(model, TailModel):
        raise EnumerationCapExceeded("analytic block sums need a piecewise TailModel")
    on_terms = ex.power_terms(model.on_tail, eps)
    off_terms = ex.power_terms(model.off_tail, eps)
    if on_terms is None or off_terms is None:
        raise EnumerationCapExceeded(
            f"no closed-form partial sums for {model.on_tail} / {model.off_tail}")
    runs = model.on_set.ranges(lo, hi, limit=RANGE_LIMIT)
    parts = [ex.interval_sum(on_terms, a, b) for a, b in runs]
    parts += [ex.interval_sum(off_terms, a, b) for a, b in _complement(runs, lo, hi)]
    return math.fsum(parts)


def block_tail_sum(model: TailRule, theta: LacunarySequence, r: int, eps, route: str = "auto",
                   caps: Caps | None = None) -> float:
    """sum_{k in I_r} tail(k, eps); route is 'direct', 'analytic' or 'auto'."""
    r = _check_n(r, "r")
    caps = caps or current_caps()
    lo, hi = theta.block(r)
    if route == "direct" or (route == "auto" and hi - lo + 1 <= caps.block):
        if hi - lo + 1 > caps.block:
            raise EnumerationCapExceeded(f"block I_{r} has {hi - lo + 1} terms, cap is {caps.block}")
        return _segment_power_sum(model, lo, hi, as_rational(eps, "eps"), 1)
    return analytic_tail_sum(model, lo, hi, eps)


def n_theta_mean(model: TailRule, theta: LacunarySequence, r: int, eps, alpha,
                 caps: Caps | None = None) -> float:
    """(1/h_r**alpha) * sum_{k in I_r} tail(k, eps)."""
    alpha = _alpha(alpha)
    total = block_tail_sum(model, theta, r, eps, caps=caps)
    h = theta.h(r)
    if alpha == 1 and h < 2**53:
        return total / h
    if total == 0:
        return 0.0
    return math.exp(math.log(total) - float(alpha) * math.log(h))
