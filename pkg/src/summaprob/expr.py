"""Tail expressions: a tiny arithmetic language over the variables ``k`` and ``eps``.

Nodes are frozen dataclasses, so two expressions compare equal exactly when
their trees are identical. Evaluation comes in three flavours:

* :func:`evaluate` -- double precision, works on scalars and numpy arrays;
* :func:`exact_value` -- exact rational result when one exists;
* :func:`hp_value` -- mpmath evaluation at high precision, for tie breaking.

Two small analyses support exact counting and analytic block sums:
:func:`k_direction` (monotonicity in ``k`` for fixed ``eps``) and
:func:`power_terms` (rewrite as a combination of ``k**e`` and ``c**k``).
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

import gmpy2
import mpmath
import numpy as np

from ._frozen import frozen
from .errors import ExpressionOutOfRange

BINARY_OPS = ("+", "-", "*", "/")
FUNCTIONS = ("pow", "min", "max")
VARIABLES = ("k", "eps")

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


@frozen
class Num:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))

    def __str__(self):
        return format_rational(self.value)


@frozen
class Var:
    name: str

    def __post_init__(self):
        if self.name not in VARIABLES:
            raise ValueError(f"unknown variable {self.name!r}")

    def __str__(self):
        return self.name


@frozen
class Neg:
    operand: "Expr"

    def __str__(self):
        inner = str(self.operand)
        if isinstance(self.operand, BinOp):
            inner = f"({inner})"
        return f"-{inner}"


@frozen
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"

    def __post_init__(self):
        if self.op not in BINARY_OPS:
            raise ValueError(f"unknown operator {self.op!r}")

    def __str__(self):
        prec = _PREC[self.op]
        left = str(self.left)
        if isinstance(self.left, BinOp) and _PREC[self.left.op] < prec:
            left = f"({left})"
        right = str(self.right)
        # left associative: equal precedence on the right needs parentheses
        if isinstance(self.right, BinOp) and _PREC[self.right.op] <= prec:
            right = f"({right})"
        return f"{left} {self.op} {right}"


@frozen
class Call:
    func: str
    args: tuple

    def __post_init__(self):
        if self.func not in FUNCTIONS:
            raise ValueError(f"unknown function {self.func!r}")
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) != 2:
            raise ValueError(f"{self.func} takes exactly two arguments")

    def __str__(self):
        return f"{self.func}({self.args[0]}, {self.args[1]})"


Expr = Union[Num, Var, Neg, BinOp, Call]

K = Var("k")
EPS = Var("eps")


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def const(q) -> Num:
    return Num(Fraction(q))


def neg(e: Expr) -> Expr:
    """Negation that folds literals, matching what the parser produces."""
    if isinstance(e, Num):
        return Num(-e.value)
    return Neg(e)


def uses(e: Expr, name: str) -> bool:
    match e:
        case Num():
            return False
        case Var(n):
            return n == name
        case Neg(a):
            return uses(a, name)
        case BinOp(_, a, b):
            return uses(a, name) or uses(b, name)
        case Call(_, args):
            return any(uses(a, name) for a in args)
    raise TypeError(f"not an expression: {e!r}")


def substitute(e: Expr, name: str, replacement: Expr) -> Expr:
    match e:
        case Num():
            return e
        case Var(n):
            return replacement if n == name else e
        case Neg(a):
            return Neg(substitute(a, name, replacement))
        case BinOp(op, a, b):
            return BinOp(op, substitute(a, name, replacement), substitute(b, name, replacement))
        case Call(f, args):
            return Call(f, tuple(substitute(a, name, replacement) for a in args))
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# evaluation


def evaluate(e: Expr, k, eps: float):
    """Evaluate in double precision. ``k`` may be a scalar or a float ndarray.

    Raises ExpressionOutOfRange on division by zero, complex powers or any
    non-finite result.
    """
    if isinstance(k, np.ndarray):
        with np.errstate(all="ignore"):
            out = _eval_array(e, k, float(eps))
        out = np.broadcast_to(np.asarray(out, dtype=float), k.shape)
        if not np.all(np.isfinite(out)):
            raise ExpressionOutOfRange(f"{e} is not finite somewhere on the requested k range")
        return out
    try:
        out = _eval_scalar(e, float(k), float(eps))
    except (ZeroDivisionError, ValueError, OverflowError) as exc:
        raise ExpressionOutOfRange(f"{e} undefined at k={k}, eps={eps}: {exc}") from None
    if not math.isfinite(out):
        raise ExpressionOutOfRange(f"{e} is not finite at k={k}, eps={eps}")
    return out


def _eval_scalar(e, k, eps):
    match e:
        case Num(v):
            return float(v)
        case Var(n):
            return k if n == "k" else eps
        case Neg(a):
            return -_eval_scalar(a, k, eps)
        case BinOp(op, a, b):
            x, y = _eval_scalar(a, k, eps), _eval_scalar(b, k, eps)
            if op == "+":
                return x + y
            if op == "-":
                return x - y
            if op == "*":
                return x * y
            return x / y
        case Call(f, (a, b)):
            x, y = _eval_scalar(a, k, eps), _eval_scalar(b, k, eps)
            if f == "pow":
                return math.pow(x, y)
            return min(x, y) if f == "min" else max(x, y)
    raise TypeError(f"not an expression: {e!r}")


def _eval_array(e, k, eps):
    match e:
        case Num(v):
            return float(v)
        case Var(n):
            return k if n == "k" else eps
        case Neg(a):
            return np.negative(_eval_array(a, k, eps))
        case BinOp(op, a, b):
            x, y = _eval_array(a, k, eps), _eval_array(b, k, eps)
            if op == "+":
                return np.add(x, y)
            if op == "-":
                return np.subtract(x, y)
            if op == "*":
                return np.multiply(x, y)
            return np.divide(x, y)
        case Call(f, (a, b)):
            x, y = _eval_array(a, k, eps), _eval_array(b, k, eps)
            if f == "pow":
                return np.power(np.asarray(x, dtype=float), y)
            return np.minimum(x, y) if f == "min" else np.maximum(x, y)
    raise TypeError(f"not an expression: {e!r}")


def _rational_power(base: Fraction, exponent: Fraction):
    if exponent.denominator == 1:
        if base == 0 and exponent < 0:
            return None
        return base ** exponent.numerator
    if base < 0:
        return None
    q = exponent.denominator
    num_root, num_exact = gmpy2.iroot(gmpy2.mpz(base.numerator), q)
    den_root, den_exact = gmpy2.iroot(gmpy2.mpz(base.denominator), q)
    if not (num_exact and den_exact):
        return None
    root = Fraction(int(num_root), int(den_root))
    if root == 0 and exponent < 0:
        return None
    return root ** exponent.numerator


def exact_value(e: Expr, k: int, eps: Fraction):
    """Exact rational value, or None when the value is irrational or undefined."""
    match e:
        case Num(v):
            return v
        case Var(n):
            return Fraction(k) if n == "k" else Fraction(eps)
        case Neg(a):
            x = exact_value(a, k, eps)
            return None if x is None else -x
        case BinOp(op, a, b):
            x, y = exact_value(a, k, eps), exact_value(b, k, eps)
            if x is None or y is None:
                return None
            if op == "+":
                return x + y
            if op == "-":
                return x - y
            if op == "*":
                return x * y
            return None if y == 0 else x / y
        case Call(f, (a, b)):
            x, y = exact_value(a, k, eps), exact_value(b, k, eps)
            if x is None or y is None:
                return None
            if f == "pow":
                # huge integer powers are not worth materialising exactly
                if abs(y.numerator) > 4096:
                    return None
                return _rational_power(x, y)
            return min(x, y) if f == "min" else max(x, y)
    raise TypeError(f"not an expression: {e!r}")


def hp_value(e: Expr, k: int, eps: Fraction, dps: int = 60):
    """High precision value as an mpmath number."""
    with mpmath.workdps(dps):
        return _hp(e, mpmath.mpf(k), mpmath.mpf(eps.numerator) / eps.denominator)


def _hp(e, k, eps):
    match e:
        case Num(v):
            return mpmath.mpf(v.numerator) / v.denominator
        case Var(n):
            return k if n == "k" else eps
        case Neg(a):
            return -_hp(a, k, eps)
        case BinOp(op, a, b):
            x, y = _hp(a, k, eps), _hp(b, k, eps)
            if op == "+":
                return x + y
            if op == "-":
                return x - y
            if op == "*":
                return x * y
            return x / y
        case Call(f, (a, b)):
            x, y = _hp(a, k, eps), _hp(b, k, eps)
            if f == "pow":
                return mpmath.power(x, y)
            return min(x, y) if f == "min" else max(x, y)
    raise TypeError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# monotonicity in k


def _combine(d1, d2):
    if d1 is None or d2 is None:
        return None
    if d1 == 0:
        return d2
    if d2 == 0 or d1 == d2:
        return d1
    return None


def _mul_bounds(lo1, hi1, lo2, hi2):
    products = []
    for x in (lo1, hi1):
        for y in (lo2, hi2):
            products.append(0.0 if x == 0 or y == 0 else x * y)
    return min(products), max(products)


def _analyze(e, eps):
    """Return (direction, lo, hi) of e over k in [1, inf)."""
    match e:
        case Num(v):
            return 0, float(v), float(v)
        case Var("k"):
            return 1, 1.0, math.inf
        case Var(_):
            return 0, eps, eps
        case Neg(a):
            d, lo, hi = _analyze(a, eps)
            return (None if d is None else -d), -hi, -lo
        case BinOp("+", a, b):
            d1, lo1, hi1 = _analyze(a, eps)
            d2, lo2, hi2 = _analyze(b, eps)
            return _combine(d1, d2), lo1 + lo2, hi1 + hi2
        case BinOp("-", a, b):
            return _analyze(BinOp("+", a, Neg(b)), eps)
        case BinOp("*", a, b):
            return _analyze_product(_analyze(a, eps), _analyze(b, eps))
        case BinOp("/", a, b):
            d2, lo2, hi2 = _analyze(b, eps)
            if not (lo2 > 0 or hi2 < 0):
                return None, -math.inf, math.inf
            recip = (None if d2 is None else -d2), 1.0 / hi2, 1.0 / lo2
            return _analyze_product(_analyze(a, eps), recip)
        case Call("pow", (a, b)):
            return _analyze_pow(_analyze(a, eps), _analyze(b, eps))
        case Call(f, (a, b)):
            d1, lo1, hi1 = _analyze(a, eps)
            d2, lo2, hi2 = _analyze(b, eps)
            pick = min if f == "min" else max
            return _combine(d1, d2), pick(lo1, lo2), pick(hi1, hi2)
    raise TypeError(f"not an expression: {e!r}")


def _analyze_product(x, y):
    d1, lo1, hi1 = x
    d2, lo2, hi2 = y
    lo, hi = _mul_bounds(lo1, hi1, lo2, hi2)
    if d1 == 0 and lo1 == hi1:
        c = lo1
        return (0 if c == 0 else (None if d2 is None else d2 * (1 if c > 0 else -1))), lo, hi
    if d2 == 0 and lo2 == hi2:
        return _analyze_product(y, x)
    if lo1 >= 0 and lo2 >= 0:
        return _combine(d1, d2), lo, hi
    if hi1 <= 0 and hi2 <= 0:
        n1 = None if d1 is None else -d1
        n2 = None if d2 is None else -d2
        return _combine(n1, n2), lo, hi
    return None, lo, hi


def _analyze_pow(base, exponent):
    db, blo, bhi = base
    de, elo, ehi = exponent
    if de == 0 and elo == ehi:
        p = elo
        if p == 0:
            return 0, 1.0, 1.0
        if blo < 0 or (p < 0 and blo <= 0):
            return None, -math.inf, math.inf
        lo, hi = (blo ** p, bhi ** p) if p > 0 else (bhi ** p, blo ** p)
        return (None if db is None else db * (1 if p > 0 else -1)), lo, hi
    if db == 0 and blo == bhi:
        c = blo
        if c == 1:
            return 0, 1.0, 1.0
        if c <= 0:
            return None, -math.inf, math.inf
        lo, hi = sorted((_safe_pow(c, elo), _safe_pow(c, ehi)))
        if de is None:
            return None, lo, hi
        return (de if c > 1 else -de), lo, hi
    return None, -math.inf, math.inf


def _safe_pow(c, x):
    try:
        return math.pow(c, x)
    except OverflowError:
        return math.inf


def k_direction(e: Expr, eps: Fraction):
    """Monotonicity of ``e`` in k >= 1 at fixed eps.

    Returns 0 (constant), 1 (nondecreasing), -1 (nonincreasing) or None when
    the conservative interval analysis cannot decide.
    """
    if not uses(e, "k"):
        return 0
    return _analyze(e, float(eps))[0]


# ---------------------------------------------------------------------------
# power-sum decomposition


def power_terms(e: Expr, eps: Fraction):
    """Rewrite ``e`` (at fixed eps) as ``sum(coef * k**x) + sum(coef * c**k)``.

    Returns a dict mapping ("pow", x) or ("geom", c) to a Fraction coefficient,
    or None when the expression is not of that shape.
    """
    eps = Fraction(eps)
    match e:
        case Num(v):
            return {("pow", Fraction(0)): v}
        case Var("k"):
            return {("pow", Fraction(1)): Fraction(1)}
        case Var(_):
            return {("pow", Fraction(0)): eps}
        case Neg(a):
            t = power_terms(a, eps)
            return None if t is None else {key: -c for key, c in t.items()}
        case BinOp("+" | "-" as op, a, b):
            ta, tb = power_terms(a, eps), power_terms(b, eps)
            if ta is None or tb is None:
                return None
            sign = 1 if op == "+" else -1
            out = dict(ta)
            for key, c in tb.items():
                out[key] = out.get(key, Fraction(0)) + sign * c
            return {key: c for key, c in out.items() if c != 0} or {("pow", Fraction(0)): Fraction(0)}
        case BinOp("*", a, b):
            return _multiply_terms(power_terms(a, eps), power_terms(b, eps))
        case BinOp("/", a, b):
            return _multiply_terms(power_terms(a, eps), _reciprocal_terms(power_terms(b, eps)))
        case Call("pow", (a, b)):
            ta = power_terms(a, eps)
            tb = power_terms(b, eps)
            if ta is None or tb is None:
                return None
            exp_const = _constant_of(tb)
            base_const = _constant_of(ta)
            if exp_const is not None:
                if base_const is not None:
                    value = _rational_power(base_const, exp_const)
                    return None if value is None else {("pow", Fraction(0)): value}
                if len(ta) == 1:
                    (kind, x), c = next(iter(ta.items()))
                    if kind == "pow" and c == 1:
                        return {("pow", x * exp_const): Fraction(1)}
                return None
            if base_const is not None and base_const > 0 and tb == {("pow", Fraction(1)): Fraction(1)}:
                return {("geom", base_const): Fraction(1)}
            return None
    return None


def _constant_of(terms):
    if len(terms) == 1:
        (kind, x), c = next(iter(terms.items()))
        if kind == "pow" and x == 0:
            return c
    return None


def _reciprocal_terms(terms):
    if terms is None or len(terms) != 1:
        return None
    (kind, x), c = next(iter(terms.items()))
    if c == 0:
        return None
    if kind == "pow":
        return {("pow", -x): 1 / c}
    return {("geom", 1 / x): 1 / c}


def _multiply_terms(ta, tb):
    if ta is None or tb is None:
        return None
    out = {}
    for (ka, xa), ca in ta.items():
        for (kb, xb), cb in tb.items():
            if ka == "pow" and kb == "pow":
                key = ("pow", xa + xb)
            elif ka == "geom" and kb == "pow" and xb == 0:
                key = ("geom", xa)
            elif ka == "pow" and xa == 0 and kb == "geom":
                key = ("geom", xb)
            elif ka == "geom" and kb == "geom":
                key = ("geom", xa * xb)
            else:
                return None
            out[key] = out.get(key, Fraction(0)) + ca * cb
    return {key: c for key, c in out.items() if c != 0} or {("pow", Fraction(0)): Fraction(0)}


def interval_sum(terms, a: int, b: int, dps: int = 60) -> float:
    """Sum of the decomposed expression over integers k in [a, b], a >= 1."""
    if b < a:
        return 0.0
    total = mpmath.mpf(0)
    with mpmath.workdps(dps):
        A, B = mpmath.mpf(a), mpmath.mpf(b)
        for (kind, x), c in terms.items():
            coef = mpmath.mpf(c.numerator) / c.denominator
            if kind == "pow":
                if x == 0:
                    part = B - A + 1
                elif x == -1:
                    part = mpmath.digamma(B + 1) - mpmath.digamma(A)
                else:
                    s = -(mpmath.mpf(x.numerator) / x.denominator)
                    part = mpmath.zeta(s, A) - mpmath.zeta(s, B + 1)
            else:
                base = mpmath.mpf(x.numerator) / x.denominator
                if base == 1:
                    part = B - A + 1
                else:
                    part = (mpmath.power(base, A) - mpmath.power(base, B + 1)) / (1 - base)
            total += coef * part
        return float(total)
