"""Generators for the worked examples and in-proof constructions.

Each generator returns a :class:`CorpusEntry`: a scenario plus the verdicts
it is expected to produce. Tails are the closed forms obtained by hand from
the underlying distributions, written in the scenario expression language.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import index_sets as isets
from . import lacunary as lac
from .dsl import parse_expr
from .errors import DomainError
from .evaluators import MethodParams
from .expr import format_rational
from .models import Scenario, TailModel, as_rational

CONVERGES = "ConvergesToZero"
FAILS = "FailsToConverge"
METHODS = ("PS", "PW", "STHETA", "NTHETA")


@dataclass(frozen=True)
class Expectation:
    method: str
    params: MethodParams
    expected: str
    note: str = ""
    theta: lac.LacunarySequence | None = None
    blocks: tuple | None = None  # explicit block indices for lacunary methods

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"unknown method {self.method!r}")
        if self.expected not in (CONVERGES, FAILS):
            raise DomainError(f"unknown verdict class {self.expected!r}")


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    scenario: Scenario
    expectations: tuple
    provenance: str
    eps_max: Fraction | None = Fraction(1)  # tails are only valid for eps <= eps_max
    parameters: tuple = field(default_factory=tuple)

    @property
    def model(self):
        return self.scenario.model

    def check_eps(self, eps):
        eps = as_rational(eps, "eps")
        if self.eps_max is not None and eps > self.eps_max:
            raise DomainError(
                f"{self.name}: tails are only valid for eps <= {format_rational(self.eps_max)}, got {eps}")
        return eps


def _q(value) -> Fraction:
    return as_rational(value)


def _params(**kw) -> MethodParams:
    return MethodParams(**{k: _q(v) for k, v in kw.items()})


def _check_exponents(s, r):
    if int(s) != s or int(r) != r:
        raise DomainError("s and r must be integers")
    s, r = int(s), int(r)
    if not s > r >= 1:
        raise DomainError(f"need s > r >= 1, got s={s}, r={r}")
    if math.gcd(s, r) != 1:
        raise DomainError(f"s/r must be in lowest terms, got {s}/{r}")
    return s, r


def _around(x: Fraction, gap=Fraction(1, 10)):
    lo, hi = x - gap, x + gap
    return (lo if lo > 0 else None), (hi if hi <= 1 else None)


def example_2_1(s: int = 2, r: int = 1) -> CorpusEntry:
    """On floor(m^(s/r)) the variable is uniform on (0, 1), else it is 2 with prob. 1 - (1-eps/2)^n.

    Converges to 2 in PS order beta > r/s but not in order alpha < r/s.
    """
    s, r = _check_exponents(s, r)
    model = TailModel(isets.FloorPower(s, r), parse_expr("1"), parse_expr("pow(1 - eps/2, k)"),
                      "2", offtail_monotone=True)
    ratio = Fraction(r, s)
    below, above = _around(ratio)
    exps = []
    if above is not None:
        exps.append(Expectation("PS", _params(alpha=above), CONVERGES, f"order above r/s = {ratio}"))
    if ratio < 1:
        exps.append(Expectation("PS", _params(alpha=1), CONVERGES, "order 1"))
    if below is not None:
        exps.append(Expectation("PS", _params(alpha=below), FAILS, f"order below r/s = {ratio}"))
    return CorpusEntry("ex-2.1", Scenario("ex-2.1", model, params={"s": s, "r": r}), tuple(exps),
                       "floor-power index set separates PS orders around r/s",
                       parameters=(("r", Fraction(r)), ("s", Fraction(s))))


def theorem_2_3_example(s: int = 2, r: int = 1, p=1) -> CorpusEntry:
    """Floor-power on-set with tail 1, off-set tail k^(-2/p); tail^p sums to a bounded series off the set."""
    s, r = _check_exponents(s, r)
    p = _q(p)
    if p <= 0:
        raise DomainError(f"p must be positive, got {p}")
    model = TailModel(isets.FloorPower(s, r), parse_expr("1"),
                      parse_expr(f"pow(k, {format_rational(-2 / p)})"),
                      "0", offtail_monotone=True)
    ratio = Fraction(r, s)
    below, above = _around(ratio)
    exps = []
    if above is not None:
        exps.append(Expectation("PW", _params(alpha=above, p=p), CONVERGES, f"order above r/s = {ratio}"))
    if below is not None:
        exps.append(Expectation("PW", _params(alpha=below, p=p), FAILS, f"order below r/s = {ratio}"))
    return CorpusEntry("thm-2.3-ex", Scenario("thm-2.3-ex", model, params={"s": s, "r": r, "p": p}),
                       tuple(exps), "floor-power on-set with off-set tail k^(-2/p) separates PW_p orders",
                       parameters=(("p", p), ("r", Fraction(r)), ("s", Fraction(s))))


def example_2_2(p=1) -> CorpusEntry:
    """On m^m the variable is uniform on (0, 1); elsewhere it is 1 with prob. k^(-1/(2p)).

    PS converges for every order, PW_p fails for orders up to 1/2.
    """
    p = _q(p)
    if p <= 0:
        raise DomainError(f"p must be positive, got {p}")
    exponent = -Fraction(1) / (2 * p)
    model = TailModel(isets.SelfPower(), parse_expr("1"),
                      parse_expr(f"pow(k, {format_rational(exponent)})"), "0", offtail_monotone=True)
    exps = [Expectation("PS", _params(alpha=a), CONVERGES, "PS for every order")
            for a in ("3/10", "1/2", "4/5", "1")]
    exps += [Expectation("PW", _params(alpha=a, p=p), FAILS, "PW_p fails for order <= 1/2")
             for a in ("3/10", "1/2")]
    return CorpusEntry("ex-2.2", Scenario("ex-2.2", model, params={"p": p}), tuple(exps),
                       "self-power on-set: PS holds for all orders while PW_p fails",
                       parameters=(("p", p),))


EX31_BLOCKS = tuple(range(2, 9))


def example_3_1():
    """(limit-0 entry, limit-1 entry, theta1, theta2) for the factorial-parity sequence.

    With G(n) = g for g! < n <= (g+1)!: for even G the variable is -1 w.p. 1/n
    and 1 otherwise; for odd G it is 1 w.p. 1/n and 0 otherwise.
    """
    theta1, theta2 = lac.FactorialEven(), lac.FactorialOdd()
    lim0 = TailModel(isets.FactorialParity("even"), parse_expr("1"), parse_expr("1/k"), "0", True)
    lim1 = TailModel(isets.FactorialParity("odd"), parse_expr("1 - 1/k"), parse_expr("1/k"), "1", True)
    blocks = EX31_BLOCKS
    exp0 = (Expectation("STHETA", _params(alpha=1), CONVERGES, "limit 0 under theta1", theta1, blocks),
            Expectation("STHETA", _params(alpha=1), FAILS, "limit 0 under theta2", theta2, blocks))
    exp1 = (Expectation("STHETA", _params(alpha=1), CONVERGES, "limit 1 under theta2", theta2, blocks),
            Expectation("STHETA", _params(alpha=1), FAILS, "limit 1 under theta1", theta1, blocks))
    e0 = CorpusEntry("ex-3.1-lim0", Scenario("ex-3.1-lim0", lim0, theta1), exp0,
                     "factorial-parity sequence against limit 0")
    e1 = CorpusEntry("ex-3.1-lim1", Scenario("ex-3.1-lim1", lim1, theta2), exp1,
                     "factorial-parity sequence against limit 1")
    return e0, e1, theta1, theta2


def theorem_3_2_example(c="1/2", theta: lac.LacunarySequence | None = None) -> CorpusEntry:
    """Tail 1 on the first floor(h_r^c) integers of each block, 1/k elsewhere."""
    c = _q(c)
    if not 0 < c < 1:
        raise DomainError(f"c must lie strictly between 0 and 1, got {c}")
    theta = theta or lac.Powers(2)
    model = TailModel(isets.BlockPrefix(theta, c), parse_expr("1"), parse_expr("1/k"), "0", True)
    exps = []
    if c + Fraction(1, 5) <= 1:
        exps.append(Expectation("STHETA", _params(alpha=c + Fraction(1, 5)), CONVERGES,
                                "S_theta above c", theta))
    if c - Fraction(1, 5) > 0:
        exps.append(Expectation("NTHETA", _params(alpha=c - Fraction(1, 5)), FAILS,
                                "N_theta below c", theta))
    return CorpusEntry("thm-3.2-ex", Scenario("thm-3.2-ex", model, theta, {"c": c}), tuple(exps),
                       "block-prefix construction separates N_theta order alpha from S_theta order beta",
                       parameters=(("c", c),))


def theorem_3_3_example(j_max: int = 8):
    """(entry, theta): tail 1 on the blocks I_{r(j)} of ratio_controlled(j_max), 1/k^2 elsewhere."""
    if int(j_max) != j_max or j_max < 2:
        raise DomainError(f"j_max must be an integer >= 2, got {j_max}")
    j_max = int(j_max)
    theta = lac.RatioControlled(j_max)
    model = TailModel(isets.RatioBlocks(j_max), parse_expr("1"), parse_expr("1/pow(k, 2)"), "0", True)
    blocks = tuple(rj for _, rj, _, _ in theta.pairs())
    exps = [Expectation("PS", _params(alpha=1), CONVERGES, "PS order 1")]
    exps += [Expectation("STHETA", _params(alpha=b), FAILS, "S_theta on the blocks r(j)", theta, blocks)
             for b in ("1/2", "1")]
    entry = CorpusEntry("thm-3.3-ex", Scenario("thm-3.3-ex", model, theta, {"j_max": j_max}), tuple(exps),
                        "ratio-controlled blocks: PS holds but S_theta fails",
                        parameters=(("j_max", Fraction(j_max)),))
    return entry, theta


NAMES = ("ex-2.1", "thm-2.3-ex", "ex-2.2", "ex-3.1-lim0", "ex-3.1-lim1", "thm-3.2-ex", "thm-3.3-ex")


def get_entry(name: str, overrides: dict | None = None) -> CorpusEntry:
    """Corpus entry by registry name; overrides set generator parameters (s, r, p, c, j_max, theta)."""
    o = dict(overrides or {})
    theta = o.pop("theta", None)
    if isinstance(theta, str):
        theta = lac.theta_from_spec(theta)
    allowed = {"ex-2.1": {"s", "r"}, "thm-2.3-ex": {"s", "r", "p"}, "ex-2.2": {"p"},
               "ex-3.1-lim0": set(), "ex-3.1-lim1": set(), "thm-3.2-ex": {"c"},
               "thm-3.3-ex": {"j_max"}}
    if name not in allowed:
        raise KeyError(f"unknown corpus entry {name!r}; known: {', '.join(NAMES)}")
    extra = set(o) - allowed[name]
    if extra:
        raise DomainError(f"{name} takes no parameter(s) {', '.join(sorted(extra))}")
    if theta is not None and name != "thm-3.2-ex":
        raise DomainError(f"{name} does not take a theta override")
    ints = {k: _int_param(k, v) for k, v in o.items() if k in ("s", "r", "j_max")}
    o.update(ints)
    if name == "ex-2.1":
        return example_2_1(o.get("s", 2), o.get("r", 1))
    if name == "thm-2.3-ex":
        return theorem_2_3_example(o.get("s", 2), o.get("r", 1), o.get("p", 1))
    if name == "ex-2.2":
        return example_2_2(o.get("p", 1))
    if name == "ex-3.1-lim0":
        return example_3_1()[0]
    if name == "ex-3.1-lim1":
        return example_3_1()[1]
    if name == "thm-3.2-ex":
        return theorem_3_2_example(o.get("c", Fraction(1, 2)), theta)
    return theorem_3_3_example(o.get("j_max", 8))[0]


def _int_param(key, value):
    value = _q(value)
    if value.denominator != 1:
        raise DomainError(f"{key} must be an integer, got {value}")
    return int(value)


def default_corpus() -> tuple:
    return tuple(get_entry(name) for name in NAMES)
