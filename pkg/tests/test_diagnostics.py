import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from summaprob import corpus as cp
from summaprob import diagnostics as dg
from summaprob import evaluators as ev
from summaprob import index_sets as isets
from summaprob import lacunary as lac
from summaprob.dsl import parse_expr
from summaprob.errors import DomainError, InsufficientData, InvalidLacunary
from summaprob.evaluators import MethodParams
from summaprob.models import TailModel

HALF = Fraction(1, 2)
ZERO = TailModel(isets.Empty(), parse_expr("0"), parse_expr("0"), "0", True)
ONE = TailModel(isets.All(), parse_expr("1"), parse_expr("1"), "0", True)


def profile(xs, ys, method="PS"):
    return dg.DensityProfile(tuple(xs), tuple(ys), method, MethodParams(), "t")


def test_grid_values():
    assert dg.GridSpec(1000, 2, 15).values()[-1] == 16_384_000
    assert dg.GridSpec(10, 10, 3).values() == (10, 100, 1000)
    assert dg.GridSpec(10, Fraction(3, 2), 4).values() == (10, 15, 23, 34)  # halves round up
    assert dg.GridSpec.parse("100:10:3") == dg.GridSpec(100, 10, 3)


@pytest.mark.parametrize("text", ["100:10", "a:2:3", "0:2:3", "10:1:3", "10:2:0", "10:21/20:5"])
def test_bad_grids(text):
    with pytest.raises(DomainError):
        dg.GridSpec.parse(text)


def test_zero_model_profile_is_all_zero():
    p = dg.sample_profile(ZERO, "PS", MethodParams(1), dg.GridSpec(10, 2, 5))
    assert p.values == (0.0,) * 5
    assert dg.classify(p).cls == dg.CONVERGES


def test_example_2_1_profile_decreases():
    p = dg.sample_profile(cp.example_2_1(), "PS", MethodParams(Fraction(3, 5)), dg.GridSpec(1000, 10, 5))
    assert all(b < a for a, b in zip(p.values, p.values[1:]))


def test_constant_one_profile_grows_like_square_root():
    p = dg.sample_profile(ONE, "PS", MethodParams(HALF), dg.GridSpec(10, 10, 3))
    assert p.values == pytest.approx([10 ** 0.5, 10.0, 1000 ** 0.5], rel=1e-14)


@pytest.mark.parametrize("ys, slope", [((1, 0.1, 0.01), -1.0), ((1, 1, 1), 0.0)])
def test_fit_slope_on_exact_power_laws(ys, slope):
    assert dg.fit_slope(profile((10, 100, 1000), ys)) == pytest.approx(slope, abs=1e-12)


@given(st.floats(min_value=-3, max_value=3), st.floats(min_value=1e-3, max_value=1e3))
def test_fit_slope_recovers_power_laws(a, c):
    xs = [10 * 2 ** j for j in range(8)]
    assert dg.fit_slope(profile(xs, [c * x ** a for x in xs])) == pytest.approx(a, abs=1e-9)


def test_example_2_1_slopes_follow_theory():
    entry = cp.example_2_1()
    up = dg.verdict(entry, "PS", MethodParams(Fraction(2, 5)))
    down = dg.verdict(entry, "PS", MethodParams(Fraction(3, 5)))
    assert up.slope == pytest.approx(0.1, abs=0.03) and up.cls == dg.FAILS
    assert down.slope == pytest.approx(-0.1, abs=0.03) and down.cls == dg.CONVERGES


def test_classify_rules():
    xs = (10, 100, 1000, 10**4, 10**5)
    assert dg.classify(profile(xs, (0,) * 5)).cls == dg.CONVERGES
    assert dg.classify(profile(xs, (1,) * 5)).cls == dg.FAILS
    assert dg.classify(profile(xs[:3], (1,) * 3)).cls == dg.INCONCLUSIVE  # flat but too short
    assert dg.classify(profile(xs, (1e-4, 1e-4, 1e-4, 1e-4, 0.99e-4))).cls == dg.CONVERGES
    assert dg.classify(profile(xs, (0.5, 0.49, 0.485, 0.48, 0.478))).cls == dg.FAILS  # flat above tol
    assert dg.classify(profile(xs, (1e-4, 1.01e-4, 1.02e-4, 1.01e-4, 1.02e-4))).cls == dg.INCONCLUSIVE
    assert dg.classify(profile(xs, (2, 1, 0.5, 0.25, 0.125))).cls == dg.CONVERGES
    assert dg.classify(profile(xs, (5, 3, 2, 1.5, 1.2))).cls == dg.INCONCLUSIVE  # falling but still above 1


def test_mostly_zero_profiles_converge():
    xs = (10, 100, 1000, 10**4, 10**5)
    v = dg.classify(profile(xs, (0.3, 0.1, 0, 0, 0)))
    assert v.slope == -math.inf and v.cls == dg.CONVERGES


def test_too_few_positive_points():
    with pytest.raises(InsufficientData):
        dg.fit_slope(profile((10, 100), (1, 2)))
    with pytest.raises(InsufficientData):
        dg.classify(profile((), ()))


@pytest.mark.parametrize("xs, ys", [((1, 1), (0, 0)), ((2, 1), (0, 0)), ((1, 2), (0, -1)),
                                    ((1, 2), (0, math.nan)), ((1,), (0, 0))])
def test_malformed_profiles(xs, ys):
    with pytest.raises(DomainError):
        profile(xs, ys)


def test_pw_points_past_the_cap_become_gaps():
    caps = ev.Caps(prefix=10**6, cesaro=10_000, block=10**7)
    p = dg.sample_profile(cp.example_2_2(), "PW", MethodParams(HALF), dg.GridSpec(1000, 10, 3), caps=caps)
    assert p.abscissae == (1000, 10000)
    assert [n for n, _ in p.gaps] == [100000]


def test_lacunary_profile_uses_block_index():
    lim0, _, theta1, _ = cp.example_3_1()
    p = dg.sample_profile(lim0, "STHETA", MethodParams(1), blocks=(2, 6), theta=theta1)
    assert p.abscissae == (2, 3, 4, 5, 6) and p.abscissa_kind == "r"
    assert p.scales == tuple(theta1.h(r) for r in range(2, 7))
    assert p.theta == "factorial_even"


def test_lacunary_method_needs_a_theta():
    with pytest.raises(DomainError):
        dg.sample_profile(cp.example_2_1(), "STHETA", MethodParams(1))


def test_explicit_block_list():
    entry, theta = cp.theorem_3_3_example(8)
    blocks = tuple(rj for _, rj, _, _ in theta.pairs())
    p = dg.sample_profile(entry, "STHETA", MethodParams(1), blocks=blocks)
    assert p.abscissae == blocks and set(p.values) == {1.0}


def test_finite_list_blocks_run_out_gracefully():
    theta = lac.ExplicitList((1, 2, 4, 8, 16))
    p = dg.sample_profile(ONE, "NTHETA", MethodParams(1), blocks=(1, 6), theta=theta)
    assert p.abscissae == (1, 2, 3, 4)
    assert [r for r, _ in p.gaps] == [5, 6]


@pytest.mark.parametrize("theta, lo, hi, expected", [
    (lac.Powers(2), 1, 20, Fraction(2)),
    (lac.FactorialEven(), 1, 5, Fraction(2)),
    (lac.FactorialOdd(), 2, 6, Fraction(20)),
])
def test_liminf_q(theta, lo, hi, expected):
    assert dg.liminf_q(theta, lo, hi) == expected


def test_liminf_q_of_ratio_controlled_drops_toward_one():
    theta = lac.RatioControlled(8)
    pairs = theta.pairs()
    assert dg.liminf_q(theta, pairs[0][1], pairs[-1][1]) < 1 + Fraction(1, 8)


def test_liminf_q_window_must_be_valid():
    with pytest.raises(InvalidLacunary):
        dg.liminf_q(lac.Powers(2), 5, 4)


def test_unknown_method():
    with pytest.raises(DomainError):
        dg.sample_profile(ONE, "XX", MethodParams())
