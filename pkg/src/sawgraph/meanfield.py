"""Closed forms for self-avoiding walks on the complete graph K_n.

On K_n there are ``(n-1)!/(n-1-k)!`` walks of length k from a vertex, and
under the Gibbs measure at fugacity x the number of unvisited vertices
``n - 1 - |w|`` is Poisson(1/x) conditioned to be at most ``n - 1``. Every
sum here runs in log-space, so n in the millions is fine.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.special import gammaln

from ._series import logsumexp, series_stats
from .exact import gamma_exponent
from .exceptions import DegenerateEnvelope, KOutOfRange, PreconditionViolated

UNBOUNDED = math.inf


class Regime(str, enum.Enum):
    SUB = "sub"
    CRITICAL = "critical"
    SUPER = "super"

    def __str__(self):
        return self.value


def saw_count_complete(n: int, k: int) -> int:
    """Exact falling factorial ``(n-1)! / (n-1-k)!``."""
    if not 0 <= k <= n - 1:
        raise KOutOfRange(f"k={k} outside [0, {n - 1}]")
    return math.perm(n - 1, k)


@dataclass(frozen=True)
class PoissonTruncation:
    rate: float
    cutoff: int
    conditional_mean: float
    tail: float  # P[P >= cutoff + 1]


def truncated_poisson(rate: float, cutoff: int) -> PoissonTruncation:
    """``E[P | P <= cutoff]`` and the upper tail for ``P ~ Poisson(rate)``."""
    j = np.arange(cutoff + 1, dtype=float)
    logpmf = j * math.log(rate) - rate - gammaln(j + 1)
    top = logpmf.max()
    w = np.exp(logpmf - top)
    s = math.fsum(w)
    mean = math.fsum(j * w) / s
    log_head = top + math.log(s)  # log P[P <= cutoff]
    tail = -math.expm1(log_head) if log_head < 0 else 0.0
    return PoissonTruncation(rate, cutoff, mean, max(tail, 0.0))


def classify_regime(n: int, x: float) -> Regime:
    """Critical when ``(n-1) x`` is within ``n^(-1/2)`` of 1 (relative)."""
    r = (n - 1) * x
    band = n ** -0.5
    if abs(r - 1.0) <= band:
        return Regime.CRITICAL
    return Regime.SUB if r < 1.0 else Regime.SUPER


@dataclass(frozen=True)
class MeanFieldEval:
    n: int
    x: float
    log_Z: float
    L: float
    regime: Regime
    predicted_L: float
    envelope: Optional[tuple] = None

    @property
    def gamma(self):
        return gamma_exponent(self.log_Z, self.L)

    def as_row(self):
        lo, hi = self.envelope if self.envelope else (None, None)
        return {"n": self.n, "x": self.x, "regime": str(self.regime), "L": self.L,
                "Z_log": self.log_Z, "predicted": self.predicted_L, "lo": lo, "hi": hi}


MEANFIELD_COLUMNS = ["n", "x", "regime", "L", "Z_log", "predicted", "lo", "hi"]


def _log_terms(n: int, x: float):
    """``log |SAW_k| + k log x`` for ``k = 0..n-1``."""
    k = np.arange(n, dtype=float)
    return gammaln(n) - gammaln(n - k) + k * math.log(x)


def evaluate_complete(n: int, x: float) -> MeanFieldEval:
    """Z and L on K_n at fugacity x via the truncated-Poisson representation.

    ``L = n - 1 - E[P | P <= n-1]`` with ``P ~ Poisson(1/x)``; L is summed as
    ``sum_j (n-1-j) p_j / sum_j p_j`` so no large nearly-equal numbers are
    subtracted. ``log Z = log (n-1)! + (n-1) log x + log sum_j x^-j / j!``.
    """
    if n < 2:
        raise PreconditionViolated("n must be >= 2")
    x = float(x)
    if not x > 0:
        raise PreconditionViolated("x must be positive")
    rate = 1.0 / x
    j = np.arange(n, dtype=float)
    log_w = j * math.log(rate) - gammaln(j + 1)
    top = log_w.max()
    w = np.exp(log_w - top)
    s = math.fsum(w)
    L = math.fsum((n - 1 - j) * w) / s
    log_Z = gammaln(n) + (n - 1) * math.log(x) + top + math.log(s)

    regime = classify_regime(n, x)
    r = (n - 1) * x
    envelope = None
    if regime is Regime.SUB:
        eps = 1.0 - r
        predicted = (1.0 - eps) / eps
    elif regime is Regime.SUPER:
        eps = r - 1.0
        predicted = eps / (1.0 + eps) * (n - 1)
        try:
            envelope = supercritical_envelope(n, eps)
        except DegenerateEnvelope:
            envelope = None
    else:
        predicted = critical_constant() * math.sqrt(n - 1)
    return MeanFieldEval(n, x, float(log_Z), L, regime, predicted, envelope)


def evaluate_complete_series(n: int, x: float):
    """``(log Z, L)`` from the walk-count series directly (second route)."""
    return series_stats(_log_terms(n, 1.0), x)


def poisson_tail_bound(x: float, n: int) -> float:
    """Chernoff bound ``(xn)^-n e^(n - 1/x)`` on ``P[Poisson(1/x) >= n]``, as a log."""
    if not n > 1.0 / x:
        raise PreconditionViolated(f"bound needs n > 1/x (n={n}, 1/x={1 / x})")
    return -n * math.log(x * n) + n - 1.0 / x


def poisson_log_tail(x: float, n: int) -> float:
    """Exact ``log P[Poisson(1/x) >= n]`` by log-space partial sums of the pmf.

    Sums the upper tail directly until terms fall below double precision.
    """
    rate = 1.0 / x
    terms = []
    j = n
    log_p = j * math.log(rate) - rate - math.lgamma(j + 1)
    while True:
        terms.append(log_p)
        j += 1
        log_p += math.log(rate) - math.log(j)
        if j > rate and log_p < terms[0] - 40:
            break
    return logsumexp(terms)


def _envelope_I(eps: float) -> float:
    return max(math.exp(-eps * eps / 8.0), math.sqrt(math.e) / 2.0)


def supercritical_envelope(n: int, eps: float) -> tuple:
    """Bracket for L(x, K_n) at ``x = (1+eps)/(n-1)``.

    Centre ``eps/(1+eps) (n-1)``, half-width ``n I^(n/2) / (1 - I^n)`` with
    ``I = max(exp(-eps^2/8), sqrt(e)/2)``. Raises :class:`DegenerateEnvelope`
    when the half-width covers the whole range ``[0, n-1]``.
    """
    if not eps > 0:
        raise PreconditionViolated("eps must be positive")
    I = _envelope_I(eps)
    In = I**n
    if In >= 1.0:
        raise DegenerateEnvelope("I(eps)^n >= 1")
    half = n * I ** (n / 2) / (1.0 - In)
    if half >= n - 1:
        raise DegenerateEnvelope(f"half-width {half:.3g} exceeds the range [0, {n - 1}]")
    centre = eps / (1.0 + eps) * (n - 1)
    return (centre - half, centre + half)


def envelope_contains(L: float, envelope: tuple, rtol: float = 1e-12) -> bool:
    """Containment allowing for rounding in the computed L.

    At large ``n`` the half-width drops below the spacing of doubles near the
    centre, so the comparison allows ``rtol * |L|`` of slack.
    """
    lo, hi = envelope
    slack = rtol * abs(L)
    return lo - slack <= L <= hi + slack


def critical_constant() -> float:
    """``E|N|`` for a standard normal, ``sqrt(2/pi)``."""
    return math.sqrt(2.0 / math.pi)


def gamma_mf_prediction(regime: Union[Regime, str], eps: Optional[float] = None) -> float:
    """Limit of the finite-graph exponent along K_n: 1, or ``inf`` super-critically."""
    regime = Regime(str(regime))
    if eps is not None and not eps > 0:
        raise PreconditionViolated("eps must be positive")
    return UNBOUNDED if regime is Regime.SUPER else 1.0
