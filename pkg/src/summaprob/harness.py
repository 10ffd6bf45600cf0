"""Theorem checks over the corpus.

Each check works at two levels. First, the finite-n (or finite-r) inequality
from the argument behind the theorem is tested exactly at every grid point.
Second, verdicts are compared: whenever the stronger functional is classified
ConvergesToZero, the weaker one must be too.

Failures are recorded as :class:`Witness` objects. ``witness.replay()``
recomputes the observed values from the stored inputs alone.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath

from . import corpus as cp
from . import expr as ex
from . import diagnostics as dg
from . import evaluators as ev
from . import lacunary as lac
from .dsl import parse_expr
from .errors import MissingSeparationDeclaration, UnknownCheckId
from .models import Scenario, deterministic_model, scale_model, sum_bound_model

C = dg.CONVERGES
REL_TOL = 1e-9
EPS_GRID = (Fraction(1, 4), Fraction(1, 2), Fraction(1))
DELTA_GRID = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))
P_GRID = (Fraction(1, 2), Fraction(1), Fraction(2))
INEQ_NS = tuple(1000 * 2 ** j for j in range(11))
BLOCKS = (2, 12)
GUARD_WINDOW = (2, 12)
GUARD_MARGIN = Fraction(1, 10)
HALF = Fraction(1, 2)
# PS and PW profiles are compared on the same abscissae; the default grid's last
# point lies beyond the Cesaro cap, so verdict comparisons stop one point earlier
COMMON_GRID = dg.GridSpec(1000, Fraction(2), 14)


def _f(x) -> Fraction:
    return Fraction(x)


# ---------------------------------------------------------------------------
# quantities: pure functions of (scenarios, inputs), used for checks and replay


@lru_cache(maxsize=256)
def _sums(model, eps, p, ns):
    return ev.tail_power_sums(model, ns, eps, p)


def q_pw_ps(sc, n, eps, delta, p, ns):
    total = _sums(sc.model, eps, p, ns)[n]
    return total, float(delta) ** float(p) * ev.ps_count(sc.model, n, eps, delta)


def q_thm25(sc, n, eps, delta, p, ns):
    total = _sums(sc.model, eps, p, ns)[n]
    return total / n, ev.ps_count(sc.model, n, eps, delta) / n + float(delta) ** float(p)


def q_ps_orders(sc, n, eps, delta, alpha, beta):
    a = ev.ps_density(sc.model, n, ev.MethodParams(alpha, eps, delta))
    b = ev.ps_density(sc.model, n, ev.MethodParams(beta, eps, delta))
    return a, b


def q_pw_orders(sc, n, eps, p, alpha, beta, ns):
    total = _sums(sc.model, eps, p, ns)[n]
    return total / ev.power(n, alpha), total / ev.power(n, beta)


def q_power_means(sc, n, eps, p, q, ns):
    mp = _sums(sc.model, eps, p, ns)[n] / n
    mq = _sums(sc.model, eps, q, ns)[n] / n
    return mp ** (1 / float(p)), mq ** (1 / float(q))


def q_block_mean(sc, r, eps, delta, alpha, theta):
    mean = ev.n_theta_mean(sc.model, theta, r, eps, alpha)
    dens = ev.s_theta_density(sc.model, theta, r, ev.MethodParams(alpha, eps, delta))
    return mean, float(delta) * dens


def q_sum_bound(a, b, n, eps, delta):
    model = sum_bound_model(a.model, b.model)
    lhs = ev.ps_count(model, n, eps, delta)
    rhs = ev.ps_count(a.model, n, eps / 2, delta / 2) + ev.ps_count(b.model, n, eps / 2, delta / 2)
    return lhs, rhs


def q_scaled(sc, n, eps, delta, c):
    scaled = ev.ps_count(scale_model(sc.model, c), n, eps, delta)
    if c == 0:
        return scaled, 0
    return scaled, ev.ps_count(sc.model, n, eps / abs(c), delta)


def q_separation_prefix(a, b, n, eps, delta):
    return n, ev.ps_count(a.model, n, eps / 2, delta / 2) + ev.ps_count(b.model, n, eps / 2, delta / 2)


def q_separation_block(a, b, r, eps, delta, theta):
    counts = (ev.lacunary_count(a.model, theta, r, eps / 2, delta / 2)
              + ev.lacunary_count(b.model, theta, r, eps / 2, delta / 2))
    return theta.h(r), counts


def q_thm34(a, b, r, eps, delta, alpha, beta, theta):
    q = theta.q(r)
    share = 1 - 1 / q  # h_r / k_r
    k = theta.term(r)
    ca = ev.ps_count(a.model, k, eps / 2, delta / 2)
    cb = ev.lacunary_count(b.model, theta, r, eps / 2, delta / 2)
    lhs = float(share) ** float(alpha)
    rhs = ev.normalised(ca, k, alpha) + float(share) ** float(beta) * ev.normalised(cb, theta.h(r), beta)
    return lhs, rhs


def q_thm33(sc, r, eps, delta, alpha, beta, theta):
    q = theta.q(r)
    k = theta.term(r)
    lhs = ev.normalised(ev.lacunary_count(sc.model, theta, r, eps, delta), theta.h(r), beta)
    rhs = float(q / (q - 1)) ** float(alpha) * ev.normalised(ev.ps_count(sc.model, k, eps, delta), k, alpha)
    return lhs, rhs


def _far(value_expr, limit, k, eps):
    """|x_k - limit| >= eps, decided in exact or 60-digit arithmetic."""
    x = ex.exact_value(value_expr, k, eps)
    if x is not None:
        return abs(x - limit) >= eps
    with mpmath.workdps(60):
        gap = abs(ex.hp_value(value_expr, k, eps) - mpmath.mpf(limit.numerator) / limit.denominator)
        return gap >= mpmath.mpf(eps.numerator) / eps.denominator


def q_det_count(sc, n, eps, delta):
    model = sc.model
    direct = sum(1 for k in range(1, n + 1) if _far(model.values, model.limit, k, eps))
    return ev.ps_count(model, n, eps, delta), direct


def q_cesaro(sc, n, eps, p, alpha):
    return (ev.cesaro_sum(sc.model, n, eps, p, alpha),)


def q_ratio_audit(theta, j):
    """(b_j / a_j < 1 + 1/j, a_{j+1} / b_j > j + 1); the second is vacuous for the last pair."""
    pairs = {pj: (a, b) for pj, _, a, b in theta.pairs()}
    a, b = pairs[j]
    first = Fraction(b, a) < 1 + Fraction(1, j)
    if j + 1 not in pairs:
        return first, True
    return first, Fraction(pairs[j + 1][0], b) > j + 1


def q_block_densities(sc, blocks, theta, params):
    return tuple(ev.s_theta_density(sc.model, theta, r, params) for r in blocks)


def q_verdicts(*scenarios, specs):
    """Verdict classes for (scenario index, method, params, theta, blocks) specs."""
    out = []
    for index, method, params, theta, blocks, grid in specs:
        out.append(dg.verdict(scenarios[index], method, params, grid, blocks, theta).cls)
    return tuple(out)


QUANTITIES = {
    "pw_ps": q_pw_ps, "thm25": q_thm25, "ps_orders": q_ps_orders, "pw_orders": q_pw_orders,
    "power_means": q_power_means, "block_mean": q_block_mean, "sum_bound": q_sum_bound,
    "scaled": q_scaled, "separation_prefix": q_separation_prefix,
    "separation_block": q_separation_block, "thm34": q_thm34, "thm33": q_thm33,
    "det_count": q_det_count, "verdicts": q_verdicts, "cesaro": q_cesaro,
    "ratio_audit": q_ratio_audit, "block_densities": q_block_densities,
}


def _holds(relation, observed):
    if relation in ("ge", "le"):
        lhs, rhs = observed
        slack = REL_TOL * max(abs(lhs), abs(rhs))
        return lhs >= rhs - slack if relation == "ge" else lhs <= rhs + slack
    if relation == "eq":
        return observed[0] == observed[1]
    if relation == "implies":
        return observed[0] != C or observed[1] == C
    if relation == "not_both":
        return not (observed[0] == C and observed[1] == C)
    if relation == "all":
        return all(observed)
    if relation == "all_one":
        return all(v == 1.0 for v in observed)
    if relation.startswith("gt:"):
        return observed[0] > float(relation[3:])
    if relation.startswith("is:"):
        return list(observed) == relation[3:].split(",")
    raise ValueError(f"unknown relation {relation!r}")


@dataclass(frozen=True)
class Witness:
    check_id: str
    quantity: str
    relation: str
    scenarios: tuple
    inputs: tuple  # sorted (name, value) pairs
    observed: tuple
    note: str = ""

    def replay(self) -> tuple:
        return tuple(QUANTITIES[self.quantity](*self.scenarios, **dict(self.inputs)))

    def reproduces(self) -> bool:
        """True if replay gives the same observed values and the relation still fails."""
        again = self.replay()
        return again == self.observed and not _holds(self.relation, again)

    def describe(self) -> str:
        names = ",".join(s.name for s in self.scenarios)
        args = ", ".join(f"{k}={_show(v)}" for k, v in self.inputs)
        return f"{self.quantity}[{names}]({args}) -> {self.observed} violates {self.relation}"


def _show(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, lac.LacunarySequence):
        return v.describe()
    if isinstance(v, tuple) and len(v) > 4:
        return f"({v[0]}..{v[-1]}; {len(v)} values)"
    return repr(v)


@dataclass
class CheckReport:
    check_id: str
    scenarios: tuple
    grid: str
    outcome: str  # pass, fail or skip
    witnesses: tuple = ()
    runtime: float = 0.0
    evaluated: int = 0
    details: tuple = ()

    @property
    def passed(self) -> bool:
        return self.outcome != "fail"

    def line(self) -> str:
        return (f"{self.check_id}\t{self.outcome}\t{self.evaluated} evaluations\t"
                f"{len(self.witnesses)} witnesses\t{','.join(self.scenarios)}")


class _Run:
    """Accumulates evaluations and witnesses for one check."""

    def __init__(self, check_id):
        self.check_id = check_id
        self.started = time.perf_counter()
        self.names = []
        self.witnesses = []
        self.details = []
        self.evaluated = 0
        self.grid = []

    def test(self, quantity, relation, scenarios, note="", **inputs):
        for s in scenarios:
            if s.name not in self.names:
                self.names.append(s.name)
        inputs = tuple(sorted(inputs.items()))
        observed = tuple(QUANTITIES[quantity](*scenarios, **dict(inputs)))
        self.evaluated += 1
        if not _holds(relation, observed):
            self.witnesses.append(Witness(self.check_id, quantity, relation, tuple(scenarios),
                                          inputs, observed, note))
        return observed

    def note(self, text):
        self.details.append(text)

    def report(self, skip=False):
        outcome = "fail" if self.witnesses else ("skip" if skip else "pass")
        return CheckReport(self.check_id, tuple(self.names), "; ".join(self.grid), outcome,
                           tuple(self.witnesses), time.perf_counter() - self.started,
                           self.evaluated, tuple(self.details))


def _verdict_spec(method, params, theta=None, blocks=None, index=0, grid=None):
    return (index, method, params, theta, blocks, grid)


def _common(method, params):
    """Spec on the grid shared by PS and PW comparisons (the largest one under the Cesaro cap)."""
    return _verdict_spec(method, params, grid=COMMON_GRID)


def _params(alpha=1, eps=HALF, delta=HALF, p=1):
    return ev.MethodParams(_f(alpha), _f(eps), _f(delta), _f(p))


def _corpus(entries):
    return tuple(entries) if entries is not None else cp.default_corpus()


def _eps_ok(entry, eps):
    return entry.eps_max is None or eps <= entry.eps_max


# ---------------------------------------------------------------------------
# inclusions


def _pw_inequalities(run, entries, quantity, relation, ns):
    run.grid.append(f"n in {ns[0]}..{ns[-1]} (x2); eps {EPS_GRID}; delta {DELTA_GRID}; p {P_GRID}")
    for e in entries:
        for eps in EPS_GRID:
            if not _eps_ok(e, eps):
                continue
            for p in P_GRID:
                for delta in DELTA_GRID:
                    for n in ns:
                        run.test(quantity, relation, (e.scenario,), n=n, eps=eps, delta=delta, p=p, ns=ns)


def check_thm_2_4(entries=None, ns=INEQ_NS, same_order=False):
    """PW_p^alpha inside PS^beta for alpha <= beta (same_order: beta = alpha)."""
    entries = _corpus(entries)
    run = _Run("note-2.1" if same_order else "thm-2.4")
    _pw_inequalities(run, entries, "pw_ps", "ge", ns)
    pairs = [(a, a) for a in ("1/2", "3/5", "1")]
    if not same_order:
        pairs += [("1/2", "1"), ("3/5", "1")]
    run.grid.append(f"verdicts: (alpha, beta) in {pairs}, p in (1, 2), eps = delta = 1/2")
    for e in entries:
        for alpha, beta in pairs:
            for p in (1, 2):
                run.test("verdicts", "implies", (e.scenario,),
                         specs=(_common("PW", _params(alpha, p=p)), _common("PS", _params(beta))))
    return run.report()


def check_note_2_1(entries=None, ns=INEQ_NS):
    return check_thm_2_4(entries, ns, same_order=True)


def check_thm_2_5(entries=None, ns=INEQ_NS):
    """At order 1, PW_p and PS agree: an upper bound inequality plus verdicts both ways."""
    entries = _corpus(entries)
    run = _Run("thm-2.5")
    _pw_inequalities(run, entries, "thm25", "le", ns)
    run.grid.append("verdicts at alpha = 1, p in (1/2, 1, 2), eps = delta = 1/2, both directions")
    for e in entries:
        for p in P_GRID:
            pw, ps = _common("PW", _params(1, p=p)), _common("PS", _params(1))
            run.test("verdicts", "implies", (e.scenario,), specs=(pw, ps))
            run.test("verdicts", "implies", (e.scenario,), specs=(ps, pw))
    return run.report()


ORDER_PAIRS = (("3/10", "7/10"), ("2/5", "3/5"), ("3/5", "1"), ("1/2", "1"))


def check_thm_2_2iv(entries=None, ns=INEQ_NS, pairs=ORDER_PAIRS):
    """PS^alpha inside PS^beta: densities are pointwise ordered, and so are verdicts."""
    entries = _corpus(entries)
    run = _Run("thm-2.2iv")
    run.grid.append(f"n in {ns[0]}..{ns[-1]}; eps {EPS_GRID}; delta {DELTA_GRID}; (alpha, beta) {pairs}")
    for e in entries:
        for eps in EPS_GRID:
            if not _eps_ok(e, eps):
                continue
            for delta in DELTA_GRID:
                for alpha, beta in pairs:
                    for n in ns:
                        run.test("ps_orders", "ge", (e.scenario,), n=n, eps=eps, delta=delta,
                                 alpha=_f(alpha), beta=_f(beta))
        for alpha, beta in pairs:
            run.test("verdicts", "implies", (e.scenario,),
                     specs=(_common("PS", _params(alpha)), _common("PS", _params(beta))))
    return run.report()


def check_thm_2_3i(entries=None, ns=INEQ_NS, pairs=ORDER_PAIRS):
    """PW_p^alpha inside PW_p^beta."""
    entries = _corpus(entries)
    run = _Run("thm-2.3i")
    run.grid.append(f"n in {ns[0]}..{ns[-1]}; eps {EPS_GRID}; p {P_GRID}; (alpha, beta) {pairs}")
    for e in entries:
        for eps in EPS_GRID:
            if not _eps_ok(e, eps):
                continue
            for p in P_GRID:
                for alpha, beta in pairs:
                    for n in ns:
                        run.test("pw_orders", "ge", (e.scenario,), n=n, eps=eps, p=p,
                                 alpha=_f(alpha), beta=_f(beta), ns=ns)
        for alpha, beta in pairs:
            run.test("verdicts", "implies", (e.scenario,),
                     specs=(_common("PW", _params(alpha)), _common("PW", _params(beta))))
    return run.report()


def check_thm_2_3ii(entries=None, ns=INEQ_NS):
    """PW_q inside PW_p for p < q, checked at order 1 only.

    At order 1 the power-mean inequality gives the inclusion. Below order 1 it
    can fail: tails k^(-3/10) lie in PW_2^(1/2) but not in PW_1^(1/2).
    """
    entries = _corpus(entries)
    run = _Run("thm-2.3ii")
    pq = [(P_GRID[i], P_GRID[j]) for i in range(len(P_GRID)) for j in range(i + 1, len(P_GRID))]
    run.grid.append(f"n in {ns[0]}..{ns[-1]}; eps {EPS_GRID}; (p, q) {pq}; alpha = 1")
    for e in entries:
        for eps in EPS_GRID:
            if not _eps_ok(e, eps):
                continue
            for p, q in pq:
                for n in ns:
                    run.test("power_means", "le", (e.scenario,), n=n, eps=eps, p=p, q=q, ns=ns)
        for p, q in pq:
            run.test("verdicts", "implies", (e.scenario,),
                     specs=(_common("PW", _params(1, p=q)), _common("PW", _params(1, p=p))))
    return run.report()


def _scenario_theta(e):
    return e.scenario.theta if e.scenario.theta is not None else lac.Powers(2)


def check_thm_3_2(entries=None, blocks=BLOCKS):
    """N_theta^alpha inside S_theta^beta: block mean >= delta * block density."""
    entries = _corpus(entries)
    run = _Run("thm-3.2")
    rs = range(blocks[0], blocks[1] + 1)
    alphas = (Fraction(3, 10), HALF, Fraction(1))
    run.grid.append(f"r in {blocks}; eps {EPS_GRID}; delta {DELTA_GRID}; alpha {alphas}; "
                    "theta = scenario theta or powers(2)")
    for e in entries:
        theta = _scenario_theta(e)
        for eps in EPS_GRID:
            if not _eps_ok(e, eps):
                continue
            for delta in DELTA_GRID:
                for alpha in alphas:
                    for r in rs:
                        run.test("block_mean", "ge", (e.scenario,), r=r, eps=eps, delta=delta,
                                 alpha=alpha, theta=theta)
        for alpha, beta in (("3/10", "7/10"), ("1/2", "1"), ("1", "1")):
            run.test("verdicts", "implies", (e.scenario,),
                     specs=(_verdict_spec("NTHETA", _params(alpha), theta, blocks),
                            _verdict_spec("STHETA", _params(beta), theta, blocks)))
    return run.report()


SUM_PAIRS = (("ex-2.1", "3/5", "ex-2.2", "3/10"),
             ("ex-2.2", "1/2", "thm-3.3-ex", "1"),
             ("ex-2.1", "3/5", "thm-3.2-ex", "3/5"),
             ("ex-2.1", "3/5", "ex-2.1", "3/5"))
SUM_NS = tuple(1000 * 2 ** j for j in range(7))


def check_thm_2_2ii(pairs=SUM_PAIRS, ns=SUM_NS):
    """Sums: the union-bound tail model converges at the larger of the two orders."""
    run = _Run("thm-2.2ii")
    run.grid.append(f"n in {ns[0]}..{ns[-1]}; eps {EPS_GRID}; delta {DELTA_GRID}")
    run.grid.append("verdicts at eps = delta = 1/2 on n <= enumeration cap")
    for name_a, alpha, name_b, beta in pairs:
        a, b = cp.get_entry(name_a), cp.get_entry(name_b)
        for eps in EPS_GRID:
            for delta in DELTA_GRID:
                for n in ns:
                    run.test("sum_bound", "le", (a.scenario, b.scenario), n=n, eps=eps, delta=delta)
        joint = Scenario(f"{name_a}+{name_b}", sum_bound_model(a.model, b.model))
        order = max(_f(alpha), _f(beta))
        observed = run.test("verdicts", "is:" + ",".join([C, C]), (a.scenario, b.scenario),
                            specs=(_verdict_spec("PS", _params(alpha), index=0),
                                   _verdict_spec("PS", _params(beta), index=1)))
        if list(observed) == [C, C]:
            run.test("verdicts", "is:" + C, (joint,), specs=(_verdict_spec("PS", _params(order)),))
    return run.report()


SCALES = (Fraction(0), Fraction(1, 2), Fraction(2), Fraction(-3))
SCALE_ORDERS = (("ex-2.1", "3/5"), ("thm-2.3-ex", "3/5"), ("ex-2.2", "3/10"), ("thm-3.2-ex", "3/5"),
                ("thm-3.3-ex", "1"))


def check_thm_2_2iii(items=SCALE_ORDERS, scales=SCALES, ns=INEQ_NS):
    """Scaling by c: counts at eps equal the original counts at eps / |c|; verdicts carry over."""
    run = _Run("thm-2.2iii")
    run.grid.append(f"c in {tuple(str(c) for c in scales)}; n in {ns[0]}..{ns[-1]}; "
                    f"eps {EPS_GRID} with eps/|c| in range; delta {DELTA_GRID}")
    for name, alpha in items:
        e = cp.get_entry(name)
        for c in scales:
            for eps in EPS_GRID:
                if c != 0 and not _eps_ok(e, eps / abs(c)):
                    continue
                for delta in DELTA_GRID:
                    for n in ns:
                        run.test("scaled", "eq", (e.scenario,), n=n, eps=eps, delta=delta, c=c)
            base = _params(alpha)
            if c != 0 and not _eps_ok(e, base.eps / abs(c)):
                continue
            scaled = Scenario(f"{name}*{c}", scale_model(e.model, c))
            observed = run.test("verdicts", "is:" + C, (e.scenario,), specs=(_verdict_spec("PS", base),))
            if observed == (C,):
                for beta in sorted({_f(alpha), Fraction(1)}):
                    run.test("verdicts", "is:" + C, (scaled,), specs=(_verdict_spec("PS", _params(beta)),))
    return run.report()


DET_VALUES = (("1/k", 0), ("pow(k, -1/2)", 0), ("1 - 1/k", 1), ("k", 0))


def check_thm_2_1(values=DET_VALUES, ns=(10, 100, 1000)):
    """Constants as one-point random variables: PS counts equal the deterministic counts for every delta."""
    run = _Run("thm-2.1")
    run.grid.append(f"n in {ns}; eps {EPS_GRID}; delta {DELTA_GRID}")
    for text, limit in values:
        sc = Scenario(f"det[{text}]", deterministic_model(parse_expr(text), limit))
        for eps in EPS_GRID:
            for delta in DELTA_GRID:
                for n in ns:
                    run.test("det_count", "eq", (sc,), n=n, eps=eps, delta=delta)
    return run.report()


# ---------------------------------------------------------------------------
# strictness


STRICT_IDS = ("ex-2.1", "thm-2.3-ex", "ex-2.2", "thm-3.2-ex", "thm-3.3-ex", "ex-3.1")


def check_strictness(check_id: str, **overrides) -> CheckReport:
    """Every expectation of the counterexample entry must be classified as declared."""
    if check_id not in STRICT_IDS:
        raise UnknownCheckId(check_id)
    run = _Run(check_id)
    if check_id == "ex-3.1":
        entries = cp.example_3_1()[:2]
    else:
        entries = (cp.get_entry(check_id, overrides),)
    for e in entries:
        for x in e.expectations:
            blocks = x.blocks if x.blocks is not None else (BLOCKS if x.method in dg.LACUNARY_METHODS else None)
            run.test("verdicts", "is:" + x.expected, (e.scenario,),
                     note=x.note, specs=(_verdict_spec(x.method, x.params, x.theta, blocks),))
    run.grid.append("default grid n = 1000 * 2^j, j < 15; blocks as declared or r in [2, 12]")
    if check_id == "ex-2.2":
        sc = entries[0].scenario
        (value,) = run.test("cesaro", "gt:1", (sc,), n=10**4, eps=HALF, p=sc.param("p", Fraction(1)),
                            alpha=HALF)
        run.note(f"cesaro_sum(n=10^4, eps=1/2, alpha=1/2) = {value:.17g} (must exceed 1)")
    if check_id == "thm-3.3-ex":
        theta = entries[0].scenario.theta
        for j in range(1, theta.j_max + 1):
            observed = run.test("ratio_audit", "all", (), theta=theta, j=j)
            run.note(f"j={j}: ratio conditions {observed}")
    return run.report()


# ---------------------------------------------------------------------------
# uniqueness


def _separation(a, separation):
    if separation is None:
        eps0, delta0 = a.param("sep_eps"), a.param("sep_delta")
        if eps0 is None or delta0 is None:
            raise MissingSeparationDeclaration(
                f"{a.name}: declare the separation (eps0, delta0) of the two candidate limits")
        return eps0, delta0
    return _f(separation[0]), _f(separation[1])


def check_uniqueness(a: Scenario, b: Scenario, method: str, params: ev.MethodParams,
                     separation=None, theta=None, beta=None, blocks=BLOCKS, ns=INEQ_NS,
                     check_id: str = "uniqueness", guard_window=GUARD_WINDOW,
                     guard_margin=GUARD_MARGIN) -> CheckReport:
    """The same sequence cannot converge to two limits that differ with positive probability.

    ``a`` and ``b`` are the tail models of one sequence against the two
    candidate limits; ``separation = (eps0, delta0)`` declares
    P(|X - Y| >= eps0) >= delta0. method "PS" compares PS^alpha with PS^beta;
    "STHETA"/"NTHETA" compare under one theta; "PS+STHETA" compares PS^alpha
    against S_theta^beta (beta <= alpha), and runs only while the finite-window
    liminf of q_r exceeds 1 + guard_margin.
    """
    run = _Run(check_id)
    eps0, delta0 = _separation(a, separation)
    beta = _f(beta) if beta is not None else params.alpha
    if eps0 <= 0 or delta0 <= 0:
        run.note("zero separation declared: not a uniqueness instance")
        run.names += [a.name, b.name]
        return run.report(skip=True)
    pa = params
    pb = params.replace(alpha=beta)
    if method == "PS":
        run.grid.append(f"n in {ns[0]}..{ns[-1]}; separation eps0={eps0}, delta0={delta0}")
        for n in ns:
            run.test("separation_prefix", "le", (a, b), n=n, eps=eps0, delta=delta0)
        specs = (_verdict_spec("PS", pa, index=0), _verdict_spec("PS", pb, index=1))
    elif method in dg.LACUNARY_METHODS:
        theta = theta or a.theta
        run.grid.append(f"theta {theta.describe()}; r in {blocks}; separation eps0={eps0}, delta0={delta0}")
        for r in range(blocks[0], blocks[1] + 1):
            run.test("separation_block", "le", (a, b), r=r, eps=eps0, delta=delta0, theta=theta)
        specs = (_verdict_spec(method, pa, theta, blocks, 0), _verdict_spec(method, pb, theta, blocks, 1))
    elif method == "PS+STHETA":
        theta = theta or b.theta
        if beta > params.alpha:
            raise ValueError(f"needs beta <= alpha, got beta={beta}, alpha={params.alpha}")
        window = dg.liminf_q(theta, *guard_window)
        run.note(f"liminf q_r over r in {guard_window} for {theta.describe()}: {window}")
        if not window > 1 + guard_margin:
            run.note(f"guard off: window liminf {window} <= 1 + {guard_margin}")
            run.names += [a.name, b.name]
            return run.report(skip=True)
        run.grid.append(f"theta {theta.describe()}; r in {blocks}; guard window {guard_window}")
        for r in range(blocks[0], blocks[1] + 1):
            run.test("thm34", "le", (a, b), r=r, eps=eps0, delta=delta0, alpha=params.alpha,
                     beta=beta, theta=theta)
        specs = (_verdict_spec("PS", pa, index=0), _verdict_spec("STHETA", pb, theta, blocks, 1))
    else:
        raise ValueError(f"unknown uniqueness method {method!r}")
    run.test("verdicts", "not_both", (a, b), specs=specs)
    return run.report()


def _ex31_pair():
    e0, e1, theta1, theta2 = cp.example_3_1()
    return e0.scenario, e1.scenario, theta1, theta2


SEP_31 = (Fraction(1), Fraction(1))  # |0 - 1| = 1 with probability 1


def _merge(check_id, reports):
    names, witnesses, details, grid = [], [], [], []
    evaluated, runtime, outcomes = 0, 0.0, []
    for rep in reports:
        names += [n for n in rep.scenarios if n not in names]
        witnesses += rep.witnesses
        details += [f"[{rep.check_id}/{rep.outcome}] {d}" for d in rep.details]
        grid += [rep.grid] if rep.grid else []
        evaluated += rep.evaluated
        runtime += rep.runtime
        outcomes.append(rep.outcome)
    outcome = "fail" if "fail" in outcomes else ("pass" if "pass" in outcomes else "skip")
    return CheckReport(check_id, tuple(names), " | ".join(grid), outcome, tuple(witnesses),
                       runtime, evaluated, tuple(details))


def check_thm_2_2i():
    a, b, _, _ = _ex31_pair()
    reports = [check_uniqueness(a, b, "PS", _params(alpha), SEP_31, beta=beta, check_id="thm-2.2i")
               for alpha, beta in (("1", "1"), ("1/2", "1"), ("3/10", "7/10"))]
    return _merge("thm-2.2i", reports)


def check_thm_3_1():
    a, b, theta1, theta2 = _ex31_pair()
    reports = [check_uniqueness(a, b, method, _params(1), SEP_31, theta=theta, check_id="thm-3.1",
                                blocks=cp.EX31_BLOCKS)
               for method in ("STHETA", "NTHETA") for theta in (theta1, theta2)]
    return _merge("thm-3.1", reports)


def check_thm_3_4(thetas=None):
    a, b, theta1, theta2 = _ex31_pair()
    thetas = thetas or (theta1, theta2, lac.Powers(2), lac.RatioControlled(8))
    reports = []
    for theta in thetas:
        for x, y in ((a, b), (b, a)):
            for alpha, beta in (("1", "1"), ("1", "1/2")):
                reports.append(check_uniqueness(x, y, "PS+STHETA", _params(alpha), SEP_31, theta=theta,
                                                beta=beta, blocks=cp.EX31_BLOCKS, check_id="thm-3.4"))
    return _merge("thm-3.4", reports)


# ---------------------------------------------------------------------------
# ratio condition: PS inside S_theta iff liminf q_r > 1


FORWARD_THETAS = ((lac.Powers(2), (2, 40)), (lac.FactorialEven(), (2, 12)), (lac.FactorialOdd(), (2, 12)))


def check_theorem_3_3(direction: str, entries=None, j_max: int = 8) -> CheckReport:
    """forward: PS^alpha convergence carries over to S_theta^beta when liminf q_r > 1.
    converse: the ratio-controlled construction converges in PS but not in S_theta."""
    if direction == "forward":
        entries = _corpus(entries)
        run = _Run("thm-3.3-forward")
        pairs = ((HALF, HALF), (HALF, Fraction(1)), (Fraction(1), Fraction(1)))
        for theta, blocks in FORWARD_THETAS:
            window = dg.liminf_q(theta, *GUARD_WINDOW)
            run.note(f"{theta.describe()}: liminf q_r over {GUARD_WINDOW} = {window}")
            run.grid.append(f"{theta.describe()} r in {blocks}")
            for e in entries:
                for alpha, beta in pairs:
                    for delta in DELTA_GRID:
                        for r in range(blocks[0], blocks[1] + 1):
                            run.test("thm33", "le", (e.scenario,), r=r, eps=HALF, delta=delta,
                                     alpha=alpha, beta=beta, theta=theta)
                    run.test("verdicts", "implies", (e.scenario,),
                             specs=(_verdict_spec("PS", _params(alpha)),
                                    _verdict_spec("STHETA", _params(beta), theta, blocks)))
        return run.report()
    if direction == "converse":
        entry, theta = cp.theorem_3_3_example(j_max)
        run = _Run("thm-3.3-converse")
        blocks = tuple(rj for _, rj, _, _ in theta.pairs())
        run.grid.append(f"PS alpha=1 on default grid; S_theta beta in (1/2, 1) on blocks r(j) = {blocks}")
        run.test("verdicts", "is:" + C, (entry.scenario,), specs=(_verdict_spec("PS", _params(1)),))
        for beta in (HALF, Fraction(1)):
            run.test("verdicts", "is:" + dg.FAILS, (entry.scenario,),
                     specs=(_verdict_spec("STHETA", _params(beta), theta, blocks),))
        values = run.test("block_densities", "all_one", (entry.scenario,), blocks=blocks, theta=theta,
                          params=_params(1))
        run.note(f"block densities at beta=1: {values}")
        for j in range(1, j_max + 1):
            run.test("ratio_audit", "all", (), theta=theta, j=j)
        run.note(f"liminf q_r over the pair window = {dg.liminf_q(theta, blocks[0], blocks[-1])}")
        return run.report()
    raise UnknownCheckId(f"thm-3.3 direction must be forward or converse, got {direction!r}")


# ---------------------------------------------------------------------------
# registry


INCLUSION_IDS = ("thm-2.4", "note-2.1", "thm-2.5", "thm-2.2ii", "thm-2.2iii", "thm-2.2iv",
                 "thm-2.3i", "thm-2.3ii", "thm-3.2")

CHECKS = {
    "thm-2.1": check_thm_2_1,
    "thm-2.4": check_thm_2_4,
    "note-2.1": check_note_2_1,
    "thm-2.5": check_thm_2_5,
    "thm-2.2ii": check_thm_2_2ii,
    "thm-2.2iii": check_thm_2_2iii,
    "thm-2.2iv": check_thm_2_2iv,
    "thm-2.3i": check_thm_2_3i,
    "thm-2.3ii": check_thm_2_3ii,
    "thm-3.2": check_thm_3_2,
    "thm-2.2i": check_thm_2_2i,
    "thm-3.1": check_thm_3_1,
    "thm-3.4": check_thm_3_4,
    "thm-3.3-forward": lambda: check_theorem_3_3("forward"),
    "thm-3.3-converse": lambda: check_theorem_3_3("converse"),
}
for _id in STRICT_IDS:
    CHECKS[_id] = (lambda cid: (lambda: check_strictness(cid)))(_id)


def check_inclusion(check_id: str, entries=None, **options) -> CheckReport:
    if check_id not in INCLUSION_IDS:
        raise UnknownCheckId(check_id)
    fn = CHECKS[check_id]
    if check_id in ("thm-2.2ii", "thm-2.2iii"):
        return fn(**options)
    return fn(entries, **options)


def run_check(check_id: str) -> CheckReport:
    try:
        fn = CHECKS[check_id]
    except KeyError:
        raise UnknownCheckId(check_id) from None
    return fn()


def run_all(ids=None) -> list:
    """Reports sorted by check id."""
    return [run_check(i) for i in sorted(ids or CHECKS)]
