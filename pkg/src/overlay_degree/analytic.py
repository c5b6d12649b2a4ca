"""Closed-form steady state of the desired-degree repair process.

A node with desired degree ``j`` performs a birth-death walk on ``0..j``:
one step up at rate ``2 alpha`` while below ``j``, one step down at rate
``phi * i`` when a neighbour fails, and a reset to 0 at rate ``phi`` when it
fails itself.  The stationary law is

    D[i, j] = 1/r - c_j e_i(r),    r = 2 alpha / phi,

with ``e_i`` the exponential sum and ``c_j`` fixed by the boundary at ``i = j``.

Evaluated literally, ``e_i(r)`` and ``r^(j+1)/j!`` overflow for the rates of
interest (``r`` in the hundreds) and the scaled Poisson forms underflow when
``j << r``.  Everything here is therefore expressed through Poisson terms
``t_k = pi(k; r) / pi(m; r)`` taken relative to the largest term ``m`` on
``0..j+1``, so all intermediate values lie in ``[0, 1]``:

    W = sum_{k<=j} t_k,   U_i = sum_{i<k<=j} t_k,   A = phi (j+1) - 2 alpha,
    B = phi (j+1) t_{j+1},
    D[i, j] = (A U_i + B) / (r (A W + B)).

Substituting ``r t_k = (k+1) t_{k+1}`` removes the sign of ``A`` entirely:

    D[i, j] = ((i+1) t_{i+1} + V_i) / (r V_{-1}),   V_i = sum_{i<m<=j} (j+1-m) t_m,

a ratio of sums of nonnegative terms.  This is the evaluated form; it is free
of cancellation for either sign of ``A`` and is nonnegative by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import IndexOutOfRange, NumericalInstability
from .model import (
    DEFAULT_EPSILON,
    DegreeHistogram,
    DesiredDegreeDistribution,
    RateConfig,
    desired_degree_pmf,
    validate_rates,
)
from .special import log_poisson_pmf_array

CLAMP_TOLERANCE = 1e-9


def _relative_terms(logp: np.ndarray, upto: int) -> tuple[np.ndarray, float]:
    """Terms ``t_0..t_upto`` scaled by the largest one, plus that term's log."""
    window = logp[: upto + 1]
    anchor = float(window.max())
    return np.exp(window - anchor), anchor


def _clamp(values: np.ndarray, what: str) -> np.ndarray:
    bad = (values < -CLAMP_TOLERANCE) | (values > 1.0 + CLAMP_TOLERANCE) | ~np.isfinite(values)
    if np.any(bad):
        worst = values[bad][0]
        raise NumericalInstability(f"{what} evaluated to {worst!r}, outside [0, 1]")
    return np.clip(values, 0.0, 1.0)


@dataclass
class _Row:
    probs: np.ndarray  # D[0..j, j]
    coeff: float  # c_j, may underflow to 0 for large r
    log_scale: float  # log of the unit that t_k is measured in, minus r


def _weighted_tails(t: np.ndarray, j: int) -> np.ndarray:
    """``V_i`` for ``i = -1..j`` (index shifted by one)."""
    weights = (j + 1 - np.arange(j + 1)) * t[: j + 1]
    tails = np.cumsum(weights[::-1])[::-1]  # tails[m] = sum_{k>=m} weights[k]
    return np.concatenate([tails, [0.0]])


def _solve_row(j: int, rates: RateConfig, logp: np.ndarray) -> _Row:
    alpha, phi = rates.alpha, rates.phi
    r = rates.ratio
    t, anchor = _relative_terms(logp, j + 1)
    tails = _weighted_tails(t, j)
    denom = tails[0]
    if not denom > 0.0 or not math.isfinite(denom):
        raise NumericalInstability(f"vanishing denominator for j={j}, rates={rates}")
    i = np.arange(j + 1)
    probs = ((i + 1) * t[1 : j + 2] + tails[1 : j + 2]) / (r * denom)
    probs = _clamp(probs, f"D[., {j}]")
    # c_j e_i(r) = A W_i / (r phi V_{-1}) with W_i in units of exp(r + anchor)
    a_j = phi * (j + 1) - 2.0 * alpha
    log_unit = anchor + r
    if -log_unit < 709.0:
        coeff = a_j / (r * phi * denom) * math.exp(-log_unit)
    else:
        coeff = math.copysign(math.inf, a_j)
    return _Row(probs, coeff, log_unit)


@dataclass
class ConditionalDegreeTable:
    """Steady-state ``D[i, j] = P(degree = i | desired degree = j)`` for selected ``j``."""

    rates: RateConfig
    rows: dict[int, np.ndarray] = field(default_factory=dict)
    coeffs: dict[int, float] = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return self.rates.ratio

    @property
    def max_dd(self) -> int:
        return max(self.rows) if self.rows else -1

    def prob(self, i: int, j: int) -> float:
        if i < 0:
            raise IndexOutOfRange(f"degree must be nonnegative, got {i}")
        if j not in self.rows:
            raise IndexOutOfRange(f"desired degree {j} is not in the table")
        if i > j:
            return 0.0
        return float(self.rows[j][i])

    def row(self, j: int) -> np.ndarray:
        if j not in self.rows:
            raise IndexOutOfRange(f"desired degree {j} is not in the table")
        return self.rows[j]


def build_table(rates: RateConfig, desired: "list[int] | range | int") -> ConditionalDegreeTable:
    """Solve every row ``j`` in ``desired`` (an int means ``0..desired``).

    Poisson log-terms are computed once up to the largest ``j``, so the cost
    is linear in the total row length.
    """
    validate_rates(rates, "analytic")
    js = range(desired + 1) if isinstance(desired, int) else sorted(set(int(j) for j in desired))
    table = ConditionalDegreeTable(rates)
    if not js:
        return table
    if min(js) < 0:
        raise IndexOutOfRange("desired degrees must be nonnegative")
    logp = log_poisson_pmf_array(max(js) + 1, rates.ratio)
    for j in js:
        row = _solve_row(j, rates, logp)
        table.rows[j] = row.probs
        table.coeffs[j] = row.coeff
    return table


def coefficient_c(j: int, rates: RateConfig) -> float:
    """Boundary coefficient ``c_j``.

    Its true magnitude scales like ``exp(-r)``, so for large ``2 alpha / phi``
    it underflows to 0 even though ``c_j e_i(r)`` is of order 1; use the
    table rows for probabilities.
    """
    if j < 0:
        raise IndexOutOfRange(f"desired degree must be nonnegative, got {j}")
    validate_rates(rates, "analytic")
    return _solve_row(j, rates, log_poisson_pmf_array(j + 1, rates.ratio)).coeff


def conditional_degree_prob(i: int, j: int, rates: RateConfig) -> float:
    if i < 0 or j < 0:
        raise IndexOutOfRange(f"degrees must be nonnegative, got i={i}, j={j}")
    validate_rates(rates, "analytic")
    if i > j:
        return 0.0
    return float(_solve_row(j, rates, log_poisson_pmf_array(j + 1, rates.ratio)).probs[i])


def unconstrained_values(j: int, rates: RateConfig, i_max: int) -> np.ndarray:
    """``1/r - c_j e_i(r)`` for ``i = 0..i_max``, ignoring the cap at ``j``.

    Matches the table for ``i <= j``; beyond ``j`` these are the values of the
    uncapped auxiliary system and may leave ``[0, 1]``.
    """
    validate_rates(rates, "analytic")
    alpha, phi, r = rates.alpha, rates.phi, rates.ratio
    top = max(i_max, j + 1)
    logp = log_poisson_pmf_array(top, r)
    # anchor on the same window as the capped row so the tails stay O(1)
    _, anchor = _relative_terms(logp, j + 1)
    t = np.exp(logp - anchor)
    tails = _weighted_tails(t, j)
    denom = tails[0]
    i = np.arange(j + 1)
    values = ((i + 1) * t[1 : j + 2] + tails[1 : j + 2]) / (r * denom)
    if i_max > j:
        # past the cap: phi (j+1) t_{j+1} - A sum_{j<k<=i} t_k, over r phi V_{-1}
        a_j = phi * (j + 1) - 2.0 * alpha
        past = phi * (j + 1) * t[j + 1] - a_j * np.cumsum(t[j + 1 : i_max + 1])
        values = np.concatenate([values, past / (r * phi * denom)])
    return values[: i_max + 1]


def degree_distribution(
    dist: DesiredDegreeDistribution, rates: RateConfig, epsilon: float = DEFAULT_EPSILON
) -> DegreeHistogram:
    """Mixture ``D_i = sum_j D[i, j] P(dd = j)`` over the truncated desired-degree support."""
    pmf = desired_degree_pmf(dist, epsilon)
    table = build_table(rates, list(pmf))
    probs = np.zeros(max(pmf) + 1)
    for j, weight in pmf.items():
        probs[: j + 1] += weight * table.rows[j]
    probs = np.clip(probs, 0.0, 1.0)
    return DegreeHistogram(probs, "analytic", 0, {"rates": rates, "dist": dist, "epsilon": epsilon})


def _lookup(table: ConditionalDegreeTable, i: int, j: int) -> float:
    if i < 0:
        return 0.0
    return table.prob(i, j)


def steady_state_residual(table: ConditionalDegreeTable, i: int, j: int) -> float:
    """Absolute residual of the stationary balance equation at ``(i, j)``."""
    if j not in table.rows or i < 0 or i > j:
        raise IndexOutOfRange(f"(i={i}, j={j}) outside the populated table")
    alpha, phi = table.rates.alpha, table.rates.phi
    delta = phi if i == 0 else 0.0
    d_here = _lookup(table, i, j)
    d_below = _lookup(table, i - 1, j)
    if i < j:
        lhs = (phi * (i + 1) + 2.0 * alpha) * d_here
        rhs = phi * (i + 1) * _lookup(table, i + 1, j) + delta + 2.0 * alpha * d_below
    else:
        lhs = phi * (i + 1) * d_here
        rhs = delta + 2.0 * alpha * d_below
    return abs(lhs - rhs)


def auxiliary_residuals(j: int, rates: RateConfig) -> np.ndarray:
    """Residuals of the uncapped recurrence on ``1/r - c_j e_i(r)`` for ``i = 0..j``."""
    alpha, phi = rates.alpha, rates.phi
    d = unconstrained_values(j, rates, j + 1)
    i = np.arange(j + 1)
    below = np.concatenate([[0.0], d[:j]])
    delta = np.where(i == 0, phi, 0.0)
    lhs = (phi * (i + 1) + 2.0 * alpha) * d[: j + 1]
    rhs = phi * (i + 1) * d[1 : j + 2] + delta + 2.0 * alpha * below
    return np.abs(lhs - rhs)
