"""Poisson terms, exponential sums and the regularized upper incomplete gamma.

The log Poisson pmf uses Loader's saddle-point expansion (Stirling error plus
the ``bd0`` deviance), which keeps full relative precision for large counts
and rates where ``k*log(x) - x - lgamma(k+1)`` would lose several digits to
cancellation.  Partial sums are accumulated relative to their largest term so
nothing overflows; only the final rescale can underflow.
"""

import math

import numpy as np

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
MAXLOG = 709.782712893384

_S0 = 1.0 / 12.0
_S1 = 1.0 / 360.0
_S2 = 1.0 / 1260.0
_S3 = 1.0 / 1680.0
_S4 = 1.0 / 1188.0


def stirling_error(n):
    """``log(n!) - log(sqrt(2 pi n) (n/e)^n)`` for integer ``n >= 0``."""
    if n <= 15:
        if n == 0:
            return 1.0 - LOG_SQRT_2PI
        return math.lgamma(n + 1.0) - (n + 0.5) * math.log(n) + n - LOG_SQRT_2PI
    nn = float(n) * n
    if n > 500:
        return (_S0 - _S1 / nn) / n
    if n > 80:
        return (_S0 - (_S1 - _S2 / nn) / nn) / n
    if n > 35:
        return (_S0 - (_S1 - (_S2 - _S3 / nn) / nn) / nn) / n
    return (_S0 - (_S1 - (_S2 - (_S3 - _S4 / nn) / nn) / nn) / nn) / n


def _bd0(k, x):
    # k*log(k/x) + x - k, summed as a series when k is close to x
    if abs(k - x) < 0.1 * (k + x):
        v = (k - x) / (k + x)
        s = (k - x) * v
        ej = 2.0 * k * v
        v2 = v * v
        j = 1
        while True:
            ej *= v2
            s1 = s + ej / (2 * j + 1)
            if s1 == s:
                return s1
            s = s1
            j += 1
    return k * math.log(k / x) + x - k


def log_poisson_pmf(k, x):
    """Natural log of ``exp(-x) x^k / k!`` for integer ``k >= 0`` and ``x >= 0``."""
    if k < 0:
        return -math.inf
    if x == 0.0:
        return 0.0 if k == 0 else -math.inf
    if k == 0:
        return -x
    return -stirling_error(k) - _bd0(float(k), x) - LOG_SQRT_2PI - 0.5 * math.log(k)


def log_poisson_pmf_array(kmax, x):
    """Vector of ``log_poisson_pmf(k, x)`` for ``k = 0..kmax``."""
    return np.array([log_poisson_pmf(k, x) for k in range(kmax + 1)], dtype=float)


def poisson_pmf(k, x):
    return math.exp(log_poisson_pmf(k, x))


def _scaled_partial_sum(n, x):
    """Return ``(log_anchor, s)`` with ``sum_{k<n} pi(k; x) = exp(log_anchor) * s``.

    The anchor is the largest term in the range, so ``1 <= s <= n``.
    """
    top = n - 1
    mode = int(math.floor(x))
    m = min(top, mode)
    log_anchor = log_poisson_pmf(m, x)
    s = 1.0
    t = 1.0
    for k in range(m, 0, -1):
        t *= k / x
        s += t
        if t < 1e-17 * s:
            break
    t = 1.0
    for k in range(m + 1, top + 1):
        t *= x / k
        s += t
        if t < 1e-17 * s:
            break
    return log_anchor, s


def regularized_gamma_q(n, x):
    """Regularized upper incomplete gamma ``Q(n, x)`` for integer ``n >= 1``.

    For integer ``n`` this is the Poisson lower tail ``P[X <= n-1]`` with
    ``X ~ Poisson(x)``.  Values below the smallest subnormal return 0.
    """
    if n < 1 or int(n) != n:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x!r}")
    if x == 0:
        return 1.0
    log_anchor, s = _scaled_partial_sum(int(n), float(x))
    return min(1.0, math.exp(log_anchor + math.log(s)))


def log_regularized_gamma_q(n, x):
    """``log Q(n, x)``; finite even where ``Q`` itself underflows."""
    if x == 0:
        return 0.0
    log_anchor, s = _scaled_partial_sum(int(n), float(x))
    return min(0.0, log_anchor + math.log(s))


def exp_sum(n, r, scaled=False):
    """Exponential sum ``e_n(r) = sum_{k=0}^{n} r^k / k!``.

    With ``scaled=True`` returns ``e_n(r) * exp(-r)``, i.e. ``Q(n+1, r)``,
    which lies in ``[0, 1]`` and never overflows.

    Raises
    ------
    OverflowError
        If the unscaled value exceeds the double range.
    """
    if n < 0 or int(n) != n:
        raise ValueError(f"n must be a nonnegative integer, got {n!r}")
    if r <= 0:
        raise ValueError(f"r must be positive, got {r!r}")
    if scaled:
        return regularized_gamma_q(int(n) + 1, r)
    log_value = log_regularized_gamma_q(int(n) + 1, r) + r
    if log_value > MAXLOG:
        raise OverflowError(f"e_{n}({r}) overflows a double (log value {log_value:.1f})")
    if n <= 30 and r <= 30:
        # direct summation is exact enough here and avoids exp/log round trips
        term = 1.0
        total = 1.0
        for k in range(1, int(n) + 1):
            term *= r / k
            total += term
        return total
    return math.exp(log_value)
