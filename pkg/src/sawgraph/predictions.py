"""Large-girth predictions for L, gamma and the survival of T, plus a
small harness that turns a measurement and a bracket into a verdict."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .exceptions import EmptyStats, PreconditionViolated
from .nbrw import ExactTDistribution, TSampleStats

INCONCLUSIVE = "inconclusive"
UNBOUNDED = math.inf


@dataclass(frozen=True)
class BoundReport:
    """A measured quantity, its interval, a theorem bracket and the verdict.

    ``holds`` is True only when the whole interval sits inside the bracket,
    False when the interval misses it entirely, and ``"inconclusive"`` when
    they overlap partially.
    """

    quantity: str
    measured: float
    ci_lo: float
    ci_hi: float
    bound_lo: float
    bound_hi: float
    source: str
    holds: Union[bool, str]

    def as_row(self):
        return {"quantity": self.quantity, "measured": self.measured, "ci_lo": self.ci_lo,
                "ci_hi": self.ci_hi, "bound_lo": self.bound_lo, "bound_hi": self.bound_hi,
                "source": self.source,
                "holds": self.holds if isinstance(self.holds, str) else bool(self.holds)}


BOUND_COLUMNS = ["quantity", "measured", "ci_lo", "ci_hi", "bound_lo", "bound_hi", "source", "holds"]


def check_bound(quantity: str, measured: float, ci, bounds, source: str) -> BoundReport:
    """Compare an interval estimate with ``[lo, hi]`` (either end may be infinite)."""
    ci_lo, ci_hi = (measured, measured) if ci is None else ci
    lo, hi = bounds
    if ci_lo > ci_hi:
        raise PreconditionViolated("interval is reversed")
    if lo <= ci_lo and ci_hi <= hi:
        holds = True
    elif ci_hi < lo or ci_lo > hi:
        holds = False
    else:
        holds = INCONCLUSIVE
    return BoundReport(quantity, float(measured), float(ci_lo), float(ci_hi),
                       float(lo), float(hi), source, holds)


# ------------------------------------------------------------ sub-critical


def _y(x, d):
    if not x > 0:
        raise PreconditionViolated("x must be positive")
    if d < 3:
        raise PreconditionViolated("degree must be >= 3")
    return (d - 1) * x


def subcritical_L_bounds(x: float, d: int, g: float) -> tuple:
    """``[y/(1-y) - g y^g/(1-y^g), y/(1-y)]`` with ``y = (d-1)x`` (paper convention).

    With an infinite girth the bracket collapses to its upper end.
    """
    y = _y(x, d)
    if not y < 1:
        raise PreconditionViolated(f"needs (d-1)x < 1, got {y}")
    if g < 3:
        raise PreconditionViolated("girth must be >= 3")
    hi = y / (1.0 - y)
    if math.isinf(g):
        return (hi, hi)
    yg = y**g
    return (hi - g * yg / (1.0 - yg), hi)


def subcritical_limits(x: float, d: int) -> dict:
    """Three candidate girth-to-infinity limits of L below criticality.

    ``lemma``: ``y/(1-y)`` (paper convention, the proof-backed form);
    ``theorem_literal``: ``(1-x)/x`` as it is sometimes stated;
    ``exact``: ``dx/((1-y)(1-y+dx))`` for the empty walk counted once.
    """
    y = _y(x, d)
    if not y < 1:
        raise PreconditionViolated(f"needs (d-1)x < 1, got {y}")
    return {"lemma": y / (1 - y), "theorem_literal": (1 - x) / x,
            "exact": d * x / ((1 - y) * (1 - y + d * x))}


# ---------------------------------------------------------------- critical


@dataclass(frozen=True)
class CriticalBracket:
    mean_T: float
    mean_T_stderr: float
    lo: float
    hi: float
    lo_ci: tuple
    hi_ci: tuple
    cap: float  # a-priori ceiling g (d-1)^g on E[T]
    floor: Optional[float] = None  # c' min(tau, sqrt n), if tau is known


def _mean_T(stats):
    if isinstance(stats, ExactTDistribution):
        return float(stats.mean_T()), 0.0
    if not isinstance(stats, TSampleStats) or stats.num_samples < 1:
        raise EmptyStats("no samples of T")
    if stats.method == "direct":
        t = np.asarray(stats.t_counts, dtype=float)
        k = np.arange(t.size)
        N = t.sum()
        if N < 1:
            raise EmptyStats("no samples of T")
        mean = float(np.dot(k, t) / N)
        var = float(np.dot((k - mean) ** 2, t) / max(N - 1, 1))
        return mean, math.sqrt(var / N)
    reps = np.array([sum(c) for c in stats.replicate_survival])
    return float(reps.mean()), float(reps.std(ddof=1) / math.sqrt(len(reps)))


def critical_L_bounds(stats, d: int, g: float, tau: Optional[int] = None,
                      n: Optional[int] = None, c_prime: float = 1.0, z: float = 1.96) -> CriticalBracket:
    """``[E[T-1]/2, d/(d-1) E[T] - 1]`` at ``x = 1/(d-1)``, from sampled or exact T.

    The ends carry ``z``-sigma intervals from the uncertainty of the mean.
    With ``tau`` (and ``n``) the floor ``c' min(tau, sqrt n)`` is added.
    """
    mean, se = _mean_T(stats)
    c = d / (d - 1)
    lo = 0.5 * (mean - 1.0)
    hi = c * mean - 1.0
    cap = g * (d - 1) ** g if math.isfinite(g) else math.inf
    floor = None
    if tau is not None:
        n = n if n is not None else getattr(stats, "n", None)
        if n is None:
            raise PreconditionViolated("the floor needs the graph size n")
        floor = c_prime * min(tau, math.sqrt(n))
    return CriticalBracket(mean, se, lo, hi, (lo - 0.5 * z * se, lo + 0.5 * z * se),
                           (hi - c * z * se, hi + c * z * se), cap, floor)


# ----------------------------------------------------------- super-critical


def supercritical_L_floor(x: float, d: int, n: int, c: float) -> float:
    """``c (1 ^ log((d-1)x)) n``."""
    y = _y(x, d)
    if not y > 1:
        raise PreconditionViolated(f"needs (d-1)x > 1, got {y}")
    if not c > 0:
        raise PreconditionViolated("c must be positive")
    return c * min(1.0, math.log(y)) * n


def calibrate_floor_constant(L: float, x: float, d: int, n: int, safety: float = 0.5) -> float:
    """Largest c with the floor met at this instance, shrunk by ``safety``."""
    return safety * L / supercritical_L_floor(x, d, n, 1.0)


# ---------------------------------------------------------------- survival


def survival_floor(k: int, m: int, n: int, g: float, d: int) -> float:
    """Factor ``1 - 3(k+1)m/(2n) - m^2 (d-1)^-floor(g/2)``, clamped to [0, 1].

    Lower-bounds ``P[T > k+m] / P[T > k]`` when m is at least the mixing time.
    """
    if m < 1:
        raise PreconditionViolated("m must be >= 1")
    tail = 0.0 if math.isinf(g) else m * m * float(d - 1) ** -(int(g) // 2)
    value = 1.0 - 3.0 * (k + 1) * m / (2.0 * n) - tail
    return min(1.0, max(0.0, value))


def exponential_survival_floor(k: int, c: float, delta: float, n: int) -> float:
    """``c exp(-delta k)``, valid for ``k <= delta n / 6``."""
    if k > delta * n / 6:
        raise PreconditionViolated(f"k={k} beyond delta*n/6={delta * n / 6}")
    return c * math.exp(-delta * k)


# ------------------------------------------------------------------- gamma


def gamma_prediction_large_girth(x: float, d: int) -> float:
    """Limit of gamma on large-girth d-regular families (paper convention).

    ``(log(d/(d-1)) - log(1-y)) / -log(1-y)`` below ``x = 1/(d-1)``, 1 at it,
    and unbounded above.
    """
    y = _y(x, d)
    if math.isclose(y, 1.0, rel_tol=1e-12, abs_tol=0.0):
        return 1.0
    if y > 1:
        return UNBOUNDED
    ly = -math.log1p(-y)
    return (math.log(d / (d - 1)) + ly) / ly


def exact_paper_L(census, d: int, x: float) -> float:
    """L under the ``d/(d-1)`` weight at ``k = 0``, from an exact census (as a float)."""
    xf = Fraction(x)
    c0 = Fraction(d, d - 1)
    Z = c0 + sum(Fraction(c) * xf**k for k, c in enumerate(census.counts) if k)
    S = sum(k * Fraction(c) * xf**k for k, c in enumerate(census.counts))
    return float(S / Z)
