"""Tail models: the rule (k, eps) -> P(|X_k - X| >= eps) standing in for a sequence.

A :class:`TailModel` is piecewise: ``on_tail`` applies on an index set and
``off_tail`` elsewhere. Two derived rules cover the algebraic theorems:
:class:`SumBoundModel` (a union bound for X_n + Y_n) and
:class:`DeterministicModel` (constants viewed as one-point distributions).
"""
from __future__ import annotations

from dataclasses import field
from fractions import Fraction

import mpmath
import numpy as np

from ._frozen import frozen
from . import expr as ex
from .errors import DomainError, ExpressionOutOfRange
from .index_sets import IndexSet
from .lacunary import LacunarySequence

# relative half-width of the band where float comparisons defer to exact arithmetic
TIE_BAND = 1e-12


def as_rational(value, name="value") -> Fraction:
    if type(value) is Fraction:
        return value
    try:
        return Fraction(value) if not isinstance(value, float) else Fraction(str(value))
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise DomainError(f"{name} must be rational, got {value!r}") from exc


def _check_k_eps(k, eps):
    if int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k!r}")
    eps = as_rational(eps, "eps")
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {eps}")
    return int(k), eps


def _in_unit(value, where):
    if not 0.0 <= value <= 1.0:
        raise ExpressionOutOfRange(f"tail value {value!r} outside [0, 1] {where}")
    return value


class TailRule:
    """Shared comparison logic; subclasses provide float/exact/hp evaluation."""

    def tail(self, k: int, eps) -> float:
        k, eps = _check_k_eps(k, eps)
        return _in_unit(self._float(k, eps), f"at k={k}, eps={eps}")

    def tail_array(self, lo: int, hi: int, eps) -> np.ndarray:
        """Tails for k = lo..hi (inclusive) as a float array."""
        eps = as_rational(eps, "eps")
        if eps <= 0:
            raise DomainError(f"eps must be positive, got {eps}")
        if hi < lo:
            return np.zeros(0)
        values = self._array(lo, hi, eps)
        if values.size and (values.min() < 0.0 or values.max() > 1.0):
            bad = int(np.flatnonzero((values < 0) | (values > 1))[0]) + lo
            raise ExpressionOutOfRange(f"tail outside [0, 1] at k={bad}, eps={eps}")
        return values

    def at_least(self, k: int, eps, delta) -> bool:
        """tail(k, eps) >= delta, resolving near-ties exactly."""
        value = self.tail(k, eps)
        return self._resolve(value, k, Fraction(eps), Fraction(delta))

    def _resolve(self, value, k, eps, delta):
        d = float(delta)
        if abs(value - d) > TIE_BAND * max(d, 1e-300):
            return value >= d
        exact = self._exact(k, eps)
        if exact is not None:
            return exact >= delta
        with mpmath.workdps(60):
            hp = self._hp(k, eps)
            target = mpmath.mpf(delta.numerator) / delta.denominator
            return hp >= target or abs(hp - target) < mpmath.mpf(10) ** -45

    def count_at_least(self, lo: int, hi: int, eps, delta) -> int:
        """|{lo <= k <= hi : tail(k, eps) >= delta}| by enumeration."""
        values = self.tail_array(lo, hi, eps)
        d = float(delta)
        hits = int(np.count_nonzero(values >= d))
        near = np.flatnonzero(np.abs(values - d) <= TIE_BAND * d)
        for i in near:
            exact_hit = self._resolve(float(values[i]), lo + int(i), Fraction(eps), Fraction(delta))
            hits += int(exact_hit) - int(values[i] >= d)
        return hits


@frozen
class TailModel(TailRule):
    """Piecewise tail rule.

    ``offtail_monotone`` records the user's declaration that ``off_tail`` is
    nonincreasing in k; it enables exact prefix counting at any n.
    """

    on_set: IndexSet
    on_tail: ex.Expr
    off_tail: ex.Expr
    limit_label: str = "0"
    offtail_monotone: bool = False

    def branch(self, k: int) -> ex.Expr:
        return self.on_tail if self.on_set.contains(k) else self.off_tail

    def _float(self, k, eps):
        return ex.evaluate(self.branch(k), k, float(eps))

    def _exact(self, k, eps):
        return ex.exact_value(self.branch(k), k, eps)

    def _hp(self, k, eps):
        return ex.hp_value(self.branch(k), k, eps)

    def _array(self, lo, hi, eps):
        ks = np.arange(lo, hi + 1, dtype=float)
        out = ex.evaluate(self.off_tail, ks, float(eps)).copy()
        runs = self.on_set.ranges(lo, hi)
        if runs:
            on = ex.evaluate(self.on_tail, ks, float(eps))
            for a, b in runs:
                out[a - lo : b - lo + 1] = on[a - lo : b - lo + 1]
        return out


@frozen
class SumBoundModel(TailRule):
    """min(1, a(k, eps/2) + b(k, eps/2)).

    An upper bound on P(|X_k + Y_k - (X + Y)| >= eps), not the exact tail.
    """

    a: TailRule
    b: TailRule

    @property
    def limit_label(self):
        return f"{getattr(self.a, 'limit_label', '?')}+{getattr(self.b, 'limit_label', '?')}"

    def _float(self, k, eps):
        return min(1.0, self.a.tail(k, eps / 2) + self.b.tail(k, eps / 2))

    def _exact(self, k, eps):
        x, y = self.a._exact(k, eps / 2), self.b._exact(k, eps / 2)
        if x is None or y is None:
            return None
        return min(Fraction(1), x + y)

    def _hp(self, k, eps):
        return min(1, self.a._hp(k, eps / 2) + self.b._hp(k, eps / 2))

    def _array(self, lo, hi, eps):
        total = self.a.tail_array(lo, hi, eps / 2) + self.b.tail_array(lo, hi, eps / 2)
        return np.minimum(total, 1.0)


@frozen
class DeterministicModel(TailRule):
    """Tail of a constant sequence x_k = values(k): 1 if |x_k - limit| >= eps else 0."""

    values: ex.Expr
    limit: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "limit", as_rational(self.limit, "limit"))

    @property
    def limit_label(self):
        return ex.format_rational(self.limit)

    def _deviation(self, k):
        return abs(ex.evaluate(self.values, k, 1.0) - float(self.limit))

    def _float(self, k, eps):
        dev = self._deviation(k)
        e = float(eps)
        if abs(dev - e) <= TIE_BAND * e:
            exact = self._exact(k, eps)
            if exact is not None:
                return float(exact)
            return float(self._hp(k, eps))
        return 1.0 if dev >= e else 0.0

    def _exact(self, k, eps):
        v = ex.exact_value(self.values, k, eps)
        if v is None:
            return None
        return Fraction(int(abs(v - self.limit) >= eps))

    def _hp(self, k, eps):
        with mpmath.workdps(60):
            v = ex.hp_value(self.values, k, eps)
            limit = mpmath.mpf(self.limit.numerator) / self.limit.denominator
            return 1 if abs(v - limit) >= mpmath.mpf(eps.numerator) / eps.denominator else 0

    def _array(self, lo, hi, eps):
        ks = np.arange(lo, hi + 1, dtype=float)
        dev = np.abs(ex.evaluate(self.values, ks, float(eps)) - float(self.limit))
        e = float(eps)
        out = (dev >= e).astype(float)
        for i in np.flatnonzero(np.abs(dev - e) <= TIE_BAND * e):
            out[i] = self._float(lo + int(i), eps)
        return out


@frozen
class Scenario:
    """A named model with optional lacunary companion and parameter bindings."""

    name: str
    model: TailRule
    theta: LacunarySequence | None = None
    params: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not self.name:
            raise DomainError("scenario name must be nonempty")
        items = dict(self.params) if not isinstance(self.params, dict) else self.params
        object.__setattr__(
            self, "params", tuple(sorted((str(k), as_rational(v, k)) for k, v in dict(items).items())))

    def param(self, name, default=None):
        return dict(self.params).get(name, default)


# ---------------------------------------------------------------------------
# operations


def tail_eval(model: TailRule, k: int, eps) -> float:
    """p_k(eps) for the model; raises ExpressionOutOfRange outside [0, 1]."""
    return model.tail(k, eps)


def scale_model(model: TailRule, c) -> TailRule:
    """Tail rule of c * X_n against c * X: tail(k, eps / |c|); identically 0 for c = 0."""
    c = as_rational(c, "c")
    if c == 0:
        from .index_sets import Empty
        return TailModel(Empty(), ex.const(0), ex.const(0), "0", True)
    if abs(c) == 1:
        return model
    factor = abs(c)
    if isinstance(model, TailModel):
        scaled_eps = ex.BinOp("/", ex.EPS, ex.Num(factor))
        return TailModel(
            model.on_set,
            ex.substitute(model.on_tail, "eps", scaled_eps),
            ex.substitute(model.off_tail, "eps", scaled_eps),
            f"{ex.format_rational(c)}*({model.limit_label})",
            model.offtail_monotone,
        )
    if isinstance(model, SumBoundModel):
        return SumBoundModel(scale_model(model.a, c), scale_model(model.b, c))
    if isinstance(model, DeterministicModel):
        return DeterministicModel(ex.BinOp("*", ex.Num(c), model.values), c * model.limit)
    raise TypeError(f"cannot scale {type(model).__name__}")


def sum_bound_model(a: TailRule, b: TailRule) -> SumBoundModel:
    return SumBoundModel(a, b)


def deterministic_model(values: ex.Expr, limit) -> DeterministicModel:
    return DeterministicModel(values, as_rational(limit, "limit"))
