"""From pointwise values to verdicts: grid sampling, log-log slopes, classification.

A verdict is a finite-sample stand-in for "the limit is 0". The rule used by
:func:`classify` is fixed and public:

* ConvergesToZero if every value is 0, or slope <= -slope_min and the last
  value is below 1, or the last value is below tol with a negative slope;
* FailsToConverge if slope >= slope_min, or every value is at least tol,
  |slope| < slope_min and there are at least 5 samples;
* Inconclusive otherwise.

Lacunary profiles use the block index r as abscissa. Block lengths of
factorial-type sequences grow so fast that a fit against log h_r flattens
every trend to a slope near 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import evaluators as ev
from .errors import DomainError, EnumerationCapExceeded, InsufficientData, InvalidLacunary
from .lacunary import LacunarySequence
from .models import Scenario, TailRule

CONVERGES = "ConvergesToZero"
FAILS = "FailsToConverge"
INCONCLUSIVE = "Inconclusive"
METHODS = ("PS", "PW", "STHETA", "NTHETA")
LACUNARY_METHODS = ("STHETA", "NTHETA")
DEFAULT_BLOCKS = (2, 12)


@dataclass(frozen=True)
class GridSpec:
    n0: int = 1000
    ratio: Fraction = Fraction(2)
    points: int = 15

    def __post_init__(self):
        object.__setattr__(self, "ratio", Fraction(self.ratio))
        if int(self.n0) != self.n0 or self.n0 < 1:
            raise DomainError(f"grid n0 must be a positive integer, got {self.n0}")
        if self.ratio <= 1:
            raise DomainError(f"grid ratio must exceed 1, got {self.ratio}")
        if int(self.points) != self.points or self.points < 1:
            raise DomainError(f"grid points must be a positive integer, got {self.points}")
        ns = self.values()
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise DomainError(f"grid {self} does not give strictly increasing n")

    def values(self) -> tuple:
        """n_j = round(n0 * ratio**j), halves rounded up."""
        return tuple(math.floor(self.n0 * self.ratio ** j + Fraction(1, 2)) for j in range(self.points))

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """'n0:ratio:points', e.g. '1000:2:15'."""
        try:
            n0, ratio, points = text.split(":")
            return cls(int(n0), Fraction(ratio), int(points))
        except (ValueError, ZeroDivisionError):
            raise DomainError(f"grid must look like n0:ratio:points, got {text!r}") from None


DEFAULT_GRID = GridSpec()


@dataclass(frozen=True)
class DensityProfile:
    abscissae: tuple  # n, or block index r for lacunary methods
    values: tuple
    method: str
    params: ev.MethodParams
    scenario: str
    scales: tuple = ()  # n, or h_r, per sample
    gaps: tuple = ()  # (abscissa, reason) for skipped points
    theta: str | None = None

    def __post_init__(self):
        if len(self.abscissae) != len(self.values):
            raise DomainError("abscissae and values differ in length")
        if any(b <= a for a, b in zip(self.abscissae, self.abscissae[1:])):
            raise DomainError("abscissae must be strictly increasing")
        for v in self.values:
            if not (math.isfinite(v) and v >= 0):
                raise DomainError(f"profile values must be finite and >= 0, got {v!r}")

    @property
    def abscissa_kind(self) -> str:
        return "r" if self.method in LACUNARY_METHODS else "n"

    def rows(self):
        return list(zip(self.abscissae, self.values))


@dataclass(frozen=True)
class Verdict:
    cls: str
    slope: float
    last_value: float
    evidence: str

    @property
    def converges(self) -> bool:
        return self.cls == CONVERGES


def _resolve_theta(scenario, method, theta):
    if method not in LACUNARY_METHODS:
        return None
    theta = theta if theta is not None else scenario.theta
    if theta is None:
        raise DomainError(f"method {method} needs a lacunary sequence (theta)")
    return theta


def _as_scenario(target) -> Scenario:
    if isinstance(target, Scenario):
        return target
    if isinstance(target, TailRule):
        return Scenario("model", target)
    scenario = getattr(target, "scenario", None)
    if isinstance(scenario, Scenario):
        return scenario
    raise TypeError(f"expected a Scenario, CorpusEntry or tail model, got {type(target).__name__}")


def sample_profile(target, method: str, params: ev.MethodParams, grid: GridSpec | None = None,
                   blocks=None, theta: LacunarySequence | None = None,
                   caps: ev.Caps | None = None) -> DensityProfile:
    """Evaluate the functional for ``method`` at every grid point (or block index).

    Points that would exceed an enumeration cap are skipped and listed in ``gaps``.
    ``blocks`` is an (r0, r1) range or an explicit sequence of block indices.
    """
    if method not in METHODS:
        raise DomainError(f"method must be one of {', '.join(METHODS)}, got {method!r}")
    check = getattr(target, "check_eps", None)
    if check is not None:
        check(params.eps)
    scenario = _as_scenario(target)
    theta = _resolve_theta(scenario, method, theta)
    caps = caps or ev.current_caps()
    if method in LACUNARY_METHODS:
        rs = _block_indices(blocks)
        return _sample_blocks(scenario, method, params, rs, theta, caps)
    return _sample_grid(scenario, method, params, grid or DEFAULT_GRID, caps)


def _block_indices(blocks):
    if blocks is None:
        blocks = DEFAULT_BLOCKS
    blocks = tuple(int(b) for b in blocks)
    if len(blocks) == 2 and blocks[0] <= blocks[1]:
        rs = tuple(range(blocks[0], blocks[1] + 1))
    else:
        rs = blocks
    if not rs or rs[0] < 1 or any(b <= a for a, b in zip(rs, rs[1:])):
        raise DomainError(f"block indices must be increasing and >= 1, got {blocks}")
    return rs


@lru_cache(maxsize=512)
def _sample_grid(scenario, method, params, grid, caps):
    model = scenario.model
    ns = grid.values()
    xs, vals, gaps = [], [], []
    if method == "PS":
        for n in ns:
            try:
                vals.append(ev.ps_density(model, n, params, caps))
                xs.append(n)
            except EnumerationCapExceeded as exc:
                gaps.append((n, str(exc)))
    else:
        reachable = [n for n in ns if n <= caps.cesaro]
        gaps = [(n, f"beyond the cesaro cap of {caps.cesaro}") for n in ns if n > caps.cesaro]
        sums = ev.tail_power_sums(model, reachable, params.eps, params.p, caps) if reachable else {}
        for n in reachable:
            xs.append(n)
            vals.append(sums[n] / ev.power(n, params.alpha))
    return DensityProfile(tuple(xs), tuple(vals), method, params, scenario.name, tuple(xs), tuple(gaps))


@lru_cache(maxsize=512)
def _sample_blocks(scenario, method, params, rs, theta, caps):
    model = scenario.model
    xs, vals, scales, gaps = [], [], [], []
    for r in rs:
        try:
            if method == "STHETA":
                value = ev.s_theta_density(model, theta, r, params, caps)
            else:
                value = ev.n_theta_mean(model, theta, r, params.eps, params.alpha, caps)
        except EnumerationCapExceeded as exc:
            gaps.append((r, str(exc)))
            continue
        except InvalidLacunary as exc:  # finite explicit lists run out of blocks
            gaps.append((r, str(exc)))
            continue
        xs.append(r)
        vals.append(value)
        scales.append(theta.h(r))
    return DensityProfile(tuple(xs), tuple(vals), method, params, scenario.name, tuple(scales),
                          tuple(gaps), theta.describe())


def fit_slope(profile: DensityProfile) -> float:
    """Least-squares slope of log(value) against log(abscissa).

    Zero values are dropped; if more than half the samples are zero the slope
    is -inf. Fewer than 3 positive samples raise InsufficientData.
    """
    xs = np.asarray(profile.abscissae, dtype=float)
    ys = np.asarray(profile.values, dtype=float)
    positive = ys > 0
    if xs.size and np.count_nonzero(~positive) * 2 > xs.size:
        return -math.inf
    if np.count_nonzero(positive) < 3:
        raise InsufficientData(f"need at least 3 positive samples, have {int(np.count_nonzero(positive))}")
    slope, _ = np.polyfit(np.log(xs[positive]), np.log(ys[positive]), 1)
    return float(slope)


def classify(profile: DensityProfile, tol: float = 1e-3, slope_min: float = 0.05) -> Verdict:
    if not profile.values:
        raise InsufficientData("empty profile")
    values = profile.values
    last = float(values[-1])
    if all(v == 0 for v in values):
        return Verdict(CONVERGES, -math.inf, last, f"all {len(values)} values are 0")
    slope = fit_slope(profile)
    desc = f"slope {slope:.4g}, last value {last:.6g} over {len(values)} points"
    if slope <= -slope_min and last < 1:
        return Verdict(CONVERGES, slope, last, desc + f"; slope <= -{slope_min} and last < 1")
    if last < tol and slope < 0:
        return Verdict(CONVERGES, slope, last, desc + f"; last < tol={tol} and decreasing")
    if slope >= slope_min:
        return Verdict(FAILS, slope, last, desc + f"; slope >= {slope_min}")
    if min(values) >= tol and abs(slope) < slope_min and len(values) >= 5:
        return Verdict(FAILS, slope, last, desc + f"; flat and bounded below by tol={tol}")
    return Verdict(INCONCLUSIVE, slope, last, desc)


def verdict(target, method, params, grid=None, blocks=None, theta=None, caps=None,
            tol: float = 1e-3, slope_min: float = 0.05) -> Verdict:
    return classify(sample_profile(target, method, params, grid, blocks, theta, caps), tol, slope_min)


def liminf_q(theta: LacunarySequence, r_from: int, r_to: int) -> Fraction:
    """min of q_r over r_from <= r <= r_to: the finite-window stand-in for liminf q_r."""
    if not 1 <= r_from <= r_to:
        raise InvalidLacunary(f"window must satisfy 1 <= r_from <= r_to, got [{r_from}, {r_to}]")
    return min(theta.q(r) for r in range(r_from, r_to + 1))
