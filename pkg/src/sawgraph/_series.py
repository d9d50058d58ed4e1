"""Log-space evaluation of power series with non-negative coefficients."""

import math

import numpy as np


def log_int(c):
    """Natural log of a non-negative (possibly huge) integer; ``-inf`` for 0."""
    return math.log(c) if c > 0 else -math.inf


def series_stats(log_coeffs, x):
    """Return ``(log Z, L)`` for ``Z = sum_k c_k x^k`` and ``L = sum_k k c_k x^k / Z``.

    ``log_coeffs[k] = log c_k`` (``-inf`` for zero coefficients). Terms are
    shifted by their maximum before exponentiation and summed with
    ``math.fsum``, so neither overflow nor cancellation can occur.
    """
    lc = np.asarray(log_coeffs, dtype=float)
    k = np.arange(lc.size, dtype=float)
    finite = np.isfinite(lc)
    if not finite.any():
        raise ValueError("series has no non-zero coefficient")
    terms = lc[finite] + k[finite] * math.log(x)
    kk = k[finite]
    top = terms.max()
    w = np.exp(terms - top)
    s = math.fsum(w)
    return float(top) + math.log(s), math.fsum(kk * w) / s


def logsumexp(values):
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return -math.inf
    top = v.max()
    if not np.isfinite(top):
        return top
    return float(top) + math.log(math.fsum(np.exp(v - top)))
