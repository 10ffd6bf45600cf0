"""Acceptance criteria 1-11, each at its stated tolerance.

Every test carries a ``criterion`` mark; conftest rolls the marks up into one
PASS/FAIL line per criterion at the end of the run.
"""
import random
import subprocess
import sys
import time
from fractions import Fraction
from math import factorial

import gmpy2
import numpy as np
import pytest

from dsl_gen import inject_typo, parse_error_of, random_scenario
from summaprob import corpus as cp
from summaprob import diagnostics as dg
from summaprob import evaluators as ev
from summaprob import harness as hn
from summaprob import index_sets as isets
from summaprob import lacunary as lac
from summaprob.dsl import ParseError, format_scenario, parse_scenario
from summaprob.evaluators import MethodParams

N1 = 10**5
REL = 1e-9
HALF = Fraction(1, 2)
GRID_NS = tuple(1000 * 2 ** j for j in range(11))
EPS_GRID, DELTA_GRID, P_GRID = hn.EPS_GRID, hn.DELTA_GRID, hn.P_GRID
CORPUS = cp.default_corpus()
C1_SECONDS = []


def criterion(number, title):
    return pytest.mark.criterion(number, title)


def eps_ok(entry, eps):
    return entry.eps_max is None or eps <= entry.eps_max


# --- criterion 1: oracles ------------------------------------------------------

def floor_power_members(s, r, n):
    m = 1
    while True:
        v = int(gmpy2.iroot(gmpy2.mpz(m) ** s, r)[0])  # floor(m^(s/r))
        if v > n:
            return
        yield v
        m += 1


def factorial_levels(n):
    """G(k) for k = 1..n by walking the factorials; G(1) = 0."""
    level = np.zeros(n + 1, dtype=np.int64)
    g = 1
    while factorial(g) < n:
        level[factorial(g) + 1:min(factorial(g + 1), n) + 1] = g
        g += 1
    return level


def floor_root_power(h, c):
    """floor(h ** c) for rational c, by exact integer comparison."""
    t = int(h ** float(c))
    while (t + 1) ** c.denominator <= h ** c.numerator:
        t += 1
    while t ** c.denominator > h ** c.numerator:
        t -= 1
    return t


def brute_indicator(kind, n):
    ind = np.zeros(n + 1, dtype=bool)
    if isinstance(kind, isets.FloorPower):
        ind[list(floor_power_members(kind.s, kind.r, n))] = True
    elif isinstance(kind, isets.SelfPower):
        m = 1
        while m ** m <= n:
            ind[m ** m] = True
            m += 1
    elif isinstance(kind, isets.FactorialParity):
        level = factorial_levels(n)
        ind[1:] = level[1:] % 2 == (0 if kind.parity == "even" else 1)
    elif isinstance(kind, isets.BlockPrefix):
        theta, r = kind.theta, 1
        while theta.length is None or r < theta.length:
            start = theta.term(r - 1) + 1
            if start > n:
                break
            ind[start:start + floor_root_power(theta.term(r) - theta.term(r - 1), kind.c)] = True
            r += 1
    elif isinstance(kind, isets.RatioBlocks):
        for _, _, a, b in lac.RatioControlled(kind.j_max).pairs():
            ind[a + 1:b + 1] = True
    elif isinstance(kind, isets.FiniteList):
        ind[[v for v in kind.values if v <= n]] = True
    elif isinstance(kind, isets.All):
        ind[1:] = True
    else:
        assert isinstance(kind, isets.Empty)
    ind[n + 1:] = False
    return ind[:n + 1]


INDEX_KINDS = [
    isets.FloorPower(2, 1), isets.FloorPower(3, 2), isets.FloorPower(5, 3), isets.SelfPower(),
    isets.FactorialParity("even"), isets.FactorialParity("odd"),
    isets.BlockPrefix(lac.Powers(2), Fraction(1, 2)), isets.BlockPrefix(lac.Powers(3), Fraction(2, 3)),
    isets.BlockPrefix(lac.FactorialEven(), Fraction(2, 3)),
    isets.BlockPrefix(lac.ExplicitList((1, 3, 10, 40, 1000)), Fraction(1, 2)),
    isets.RatioBlocks(8), isets.RatioBlocks(5), isets.FiniteList((3, 4, 5, 17, 100)),
    isets.Empty(), isets.All(),
]


@criterion(1, "closed-form counts equal brute-force enumeration for all n <= 10^5")
@pytest.mark.parametrize("kind", INDEX_KINDS, ids=lambda k: k.describe())
def test_c1_index_counts(kind):
    started = time.perf_counter()
    want = np.cumsum(brute_indicator(kind, N1))[1:]
    got = np.fromiter((isets.index_count(kind, n) for n in range(1, N1 + 1)), dtype=np.int64, count=N1)
    C1_SECONDS.append(time.perf_counter() - started)
    bad = np.flatnonzero(got != want)
    assert bad.size == 0, f"first mismatch at n={bad[0] + 1}: {got[bad[0]]} != {want[bad[0]]}"


def ps_oracle(model, eps, delta, vals):
    """Running count of k with tail >= delta, ties inside 1e-12 settled exactly."""
    fd = float(delta)
    ind = vals >= fd
    for i in np.flatnonzero(np.abs(vals - fd) <= 1e-12 * fd):
        ind[i] = model.at_least(int(i) + 1, eps, delta)
    return np.cumsum(ind)


@criterion(1, "closed-form counts equal brute-force enumeration for all n <= 10^5")
@pytest.mark.parametrize("entry", CORPUS, ids=lambda e: e.name)
def test_c1_ps_counts(entry):
    started = time.perf_counter()
    model = entry.model
    for eps in EPS_GRID:
        vals = model.tail_array(1, N1, eps)
        for delta in DELTA_GRID:
            want = ps_oracle(model, eps, delta, vals)
            got = np.fromiter((ev.ps_count(model, n, eps, delta) for n in range(1, N1 + 1)),
                              dtype=np.int64, count=N1)
            bad = np.flatnonzero(got != want)
            assert bad.size == 0, (entry.name, eps, delta, int(bad[0]) + 1)
    C1_SECONDS.append(time.perf_counter() - started)


@criterion(1, "closed-form counts equal brute-force enumeration for all n <= 10^5")
def test_c1_runtime():
    if len(C1_SECONDS) < len(INDEX_KINDS) + len(CORPUS):
        pytest.skip("runs only after the full criterion 1 sweep")
    total = sum(C1_SECONDS)
    print(f"criterion 1 runtime {total:.1f}s")
    assert total < 60


# --- criteria 2 and 3: finite-n inequalities ------------------------------------

def pw_grid():
    for e in CORPUS:
        for eps in EPS_GRID:
            if not eps_ok(e, eps):
                continue
            for p in P_GRID:
                sums = ev.tail_power_sums(e.model, GRID_NS, eps, p)
                for delta in DELTA_GRID:
                    for n in GRID_NS:
                        yield e, eps, delta, p, n, sums[n], ev.ps_count(e.model, n, eps, delta)


@criterion(2, "sum of tail^p >= delta^p * count at every grid point")
def test_c2_pw_dominates_ps():
    checked = 0
    for e, eps, delta, p, n, total, count in pw_grid():
        rhs = float(delta) ** float(p) * count
        assert total >= rhs * (1 - REL), (e.name, eps, delta, p, n, total, rhs)
        checked += 1
    assert checked == 2079  # 7 scenarios x 3 eps x 3 p x 3 delta x 11 n


@criterion(2, "sum of tail^p >= delta^p * count at every grid point")
def test_c2_harness_check():
    report = hn.run_check("thm-2.4")
    assert report.outcome == "pass", [w.describe() for w in report.witnesses]


@criterion(3, "mean of tail^p <= count/n + delta^p; PS <=> PW_1 at order 1 on ex-2.2")
def test_c3_mean_bound():
    for e, eps, delta, p, n, total, count in pw_grid():
        lhs, rhs = total / n, count / n + float(delta) ** float(p)
        assert lhs <= rhs * (1 + REL), (e.name, eps, delta, p, n, lhs, rhs)
    assert hn.run_check("thm-2.5").outcome == "pass"


@criterion(3, "mean of tail^p <= count/n + delta^p; PS <=> PW_1 at order 1 on ex-2.2")
def test_c3_equivalence_on_example_2_2():
    entry = cp.example_2_2(1)
    ps = dg.verdict(entry, "PS", MethodParams(1))
    pw = dg.verdict(entry, "PW", MethodParams(1, p=1))
    assert (ps.cls, pw.cls) == (dg.CONVERGES, dg.CONVERGES)


# --- criterion 4 ------------------------------------------------------------------

@criterion(4, "ex-2.1 PS slopes straddle r/s = 1/2 by at least 0.05, in under 5 s")
def test_c4_example_2_1_separation():
    dg._sample_grid.cache_clear()
    started = time.perf_counter()
    entry = cp.example_2_1(2, 1)
    out = {}
    for alpha in (Fraction(3, 5), Fraction(2, 5)):
        profile = dg.sample_profile(entry, "PS", MethodParams(alpha, HALF, HALF))
        out[alpha] = (dg.fit_slope(profile), dg.classify(profile).cls, profile.abscissae)
    elapsed = time.perf_counter() - started
    (s6, c6, xs), (s4, c4, _) = out[Fraction(3, 5)], out[Fraction(2, 5)]
    print(f"slopes: alpha=0.6 {s6:+.4f}, alpha=0.4 {s4:+.4f}; {elapsed:.2f}s")
    assert xs[0] == 1000 and 1.6e7 <= xs[-1] < 1.7e7
    assert s6 <= -0.05 and c6 == dg.CONVERGES
    assert s4 >= 0.05 and c4 == dg.FAILS
    assert elapsed < 5


# --- criterion 5 ------------------------------------------------------------------

@criterion(5, "ex-2.2: PS converges at every order, PW_1 fails at orders <= 1/2")
@pytest.mark.parametrize("alpha", ["0.3", "0.5", "0.8", "1.0"])
def test_c5_ps_converges(alpha):
    assert dg.verdict(cp.example_2_2(1), "PS", MethodParams(Fraction(alpha))).cls == dg.CONVERGES


@criterion(5, "ex-2.2: PS converges at every order, PW_1 fails at orders <= 1/2")
@pytest.mark.parametrize("alpha", ["0.3", "0.5"])
def test_c5_pw_fails(alpha):
    assert dg.verdict(cp.example_2_2(1), "PW", MethodParams(Fraction(alpha), p=1)).cls == dg.FAILS


@criterion(5, "ex-2.2: PS converges at every order, PW_1 fails at orders <= 1/2")
def test_c5_cesaro_exceeds_one():
    assert ev.cesaro_sum(cp.example_2_2(1).model, 10**4, HALF, 1, HALF) > 1


# --- criterion 6 ------------------------------------------------------------------

def ex31_tail(limit, k):
    """P(|X_k - limit| >= eps) for eps in (0, 1], straight from the two-point laws."""
    g = 0
    while factorial(g + 1) < k:
        g += 1
    if limit == 0:
        return Fraction(1) if g % 2 == 0 else Fraction(1, k)
    return Fraction(1, k) if g % 2 == 0 else 1 - Fraction(1, k)


@criterion(6, "ex-3.1 verdicts through r = 8 by block arithmetic; r = 2 counts match enumeration")
def test_c6_example_3_1_verdicts():
    lim0, lim1, theta1, theta2 = cp.example_3_1()
    tiny = ev.Caps(prefix=1000, cesaro=1000, block=1000)  # nothing large may be enumerated
    blocks = (2, 8)
    assert theta2.term(8) == factorial(17)
    got = {(e.name, t.describe()): dg.verdict(e, "STHETA", MethodParams(1), blocks=blocks, theta=t,
                                               caps=tiny).cls
           for e in (lim0, lim1) for t in (theta1, theta2)}
    assert got == {("ex-3.1-lim0", "factorial_even"): dg.CONVERGES,
                   ("ex-3.1-lim1", "factorial_odd"): dg.CONVERGES,
                   ("ex-3.1-lim0", "factorial_odd"): dg.FAILS,
                   ("ex-3.1-lim1", "factorial_even"): dg.FAILS}


@criterion(6, "ex-3.1 verdicts through r = 8 by block arithmetic; r = 2 counts match enumeration")
def test_c6_block_two_enumeration():
    lim0, lim1, theta1, theta2 = cp.example_3_1()
    for entry, limit in ((lim0, 0), (lim1, 1)):
        for theta in (theta1, theta2):
            lo, hi = theta.term(1) + 1, theta.term(2)
            for eps in (Fraction(1, 4), HALF, Fraction(1)):
                for delta in DELTA_GRID:
                    want = sum(1 for k in range(lo, hi + 1) if ex31_tail(limit, k) >= delta)
                    assert ev.lacunary_count(entry.model, theta, 2, eps, delta) == want


# --- criterion 7 ------------------------------------------------------------------

@criterion(7, "block mean >= delta * block density for r in [2, 12]; c = 1/2 strictness")
def test_c7_block_inequality():
    checked = 0
    for e in CORPUS:
        theta = e.scenario.theta or lac.Powers(2)
        for eps in EPS_GRID:
            if not eps_ok(e, eps):
                continue
            for delta in DELTA_GRID:
                for alpha in (Fraction(3, 10), HALF, Fraction(1)):
                    for r in range(2, 13):
                        mean = ev.n_theta_mean(e.model, theta, r, eps, alpha)
                        dens = ev.s_theta_density(e.model, theta, r, MethodParams(alpha, eps, delta))
                        assert mean >= float(delta) * dens * (1 - REL), (e.name, eps, delta, alpha, r)
                        checked += 1
    assert checked == 2079


@criterion(7, "block mean >= delta * block density for r in [2, 12]; c = 1/2 strictness")
def test_c7_strictness():
    entry = cp.theorem_3_2_example(HALF, lac.Powers(2))
    s = dg.verdict(entry, "STHETA", MethodParams(Fraction(7, 10)), theta=lac.Powers(2))
    n = dg.verdict(entry, "NTHETA", MethodParams(Fraction(3, 10)), theta=lac.Powers(2))
    assert (s.cls, n.cls) == (dg.CONVERGES, dg.FAILS)


# --- criterion 8 ------------------------------------------------------------------

@criterion(8, "liminf q_r of powers(2) is 2; ratio-controlled converse with exact audit")
def test_c8_liminf():
    assert dg.liminf_q(lac.Powers(2), 1, 20) == Fraction(2)


@criterion(8, "liminf q_r of powers(2) is 2; ratio-controlled converse with exact audit")
def test_c8_converse():
    entry, theta = cp.theorem_3_3_example(8)
    assert dg.verdict(entry, "PS", MethodParams(1)).cls == dg.CONVERGES
    blocks = tuple(rj for _, rj, _, _ in theta.pairs())
    profile = dg.sample_profile(entry, "STHETA", MethodParams(1), blocks=blocks, theta=theta)
    assert profile.abscissae == blocks and profile.values == (1.0,) * 8
    assert dg.classify(profile).cls == dg.FAILS


@criterion(8, "liminf q_r of powers(2) is 2; ratio-controlled converse with exact audit")
def test_c8_construction_audit():
    pairs = lac.RatioControlled(8).pairs()
    assert [j for j, _, _, _ in pairs] == list(range(1, 9))
    for (j, _, a, b), nxt in zip(pairs, pairs[1:] + (None,)):
        assert Fraction(b, a) < 1 + Fraction(1, j)
        if nxt is not None:
            assert Fraction(nxt[2], b) > j + 1


# --- criterion 9 ------------------------------------------------------------------

@criterion(9, "ex-3.1 limits 0 and 1 never both converge; the guard tracks liminf q_r")
def test_c9_uniqueness():
    lim0, lim1, theta1, _ = cp.example_3_1()
    v0 = dg.verdict(lim0, "STHETA", MethodParams(1), blocks=cp.EX31_BLOCKS, theta=theta1)
    v1 = dg.verdict(lim1, "STHETA", MethodParams(1), blocks=cp.EX31_BLOCKS, theta=theta1)
    assert (v0.cls, v1.cls) == (dg.CONVERGES, dg.FAILS)
    for cid in ("thm-2.2i", "thm-3.1", "thm-3.4"):
        assert hn.run_check(cid).outcome == "pass", cid


@criterion(9, "ex-3.1 limits 0 and 1 never both converge; the guard tracks liminf q_r")
@pytest.mark.parametrize("theta", [lac.FactorialEven(), lac.FactorialOdd(), lac.Powers(2),
                                   lac.RatioControlled(8), lac.ExplicitList(tuple(range(1, 41)))],
                         ids=lambda t: t.describe()[:20])
def test_c9_guard(theta):
    lim0, lim1, _, _ = cp.example_3_1()
    report = hn.check_uniqueness(lim0.scenario, lim1.scenario, "PS+STHETA", MethodParams(1), (1, 1),
                                 theta=theta, blocks=(2, 6))
    window = dg.liminf_q(theta, *hn.GUARD_WINDOW)
    if report.outcome == "pass":
        assert window > 1
    else:
        assert report.outcome == "skip" and "guard off" in report.details[-1]


# --- criterion 10 -----------------------------------------------------------------

@criterion(10, "DSL round-trips exactly; 50 seeded typos are located by the error span")
def test_c10_round_trips():
    scenarios = [e.scenario for e in CORPUS] + [random_scenario(random.Random(seed)) for seed in range(100)]
    for s in scenarios:
        text = format_scenario(s)
        again = parse_scenario(text)
        assert again == s and format_scenario(again) == text


@criterion(10, "DSL round-trips exactly; 50 seeded typos are located by the error span")
def test_c10_typos():
    located = 0
    for seed in range(50):
        rng = random.Random(1000 + seed)
        text = format_scenario(CORPUS[seed % len(CORPUS)].scenario)
        mutated, (start, end), _, _ = inject_typo(text, rng)
        err = parse_error_of(mutated)
        located += isinstance(err, ParseError) and err.span.covers(start, end)
    assert located == 50


# --- criterion 11 -----------------------------------------------------------------

@criterion(11, "identical CLI invocations give byte-identical CSV")
def test_c11_determinism():
    argv = [sys.executable, "-m", "summaprob", "eval", "--corpus", "ex-2.1", "--method", "ps",
            "--alpha", "0.6", "--eps", "1/2", "--delta", "1/2", "--grid", "1000:2:15"]
    first = subprocess.run(argv, capture_output=True, check=True).stdout
    second = subprocess.run(argv, capture_output=True, check=True).stdout
    assert first == second and first.count(b"\n") == 16
