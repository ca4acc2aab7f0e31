"""Regime classification of (alpha, beta, q), the limit constants of the
grid covariance sums, the variance normalization factor phi, and the
Berry-Esseen rate bounds of the central limit cases.

The parameter square (0,1)^2 splits into six cases at the threshold
1 - 1/(2q).  Cases 1-5 lead to a Gaussian limit of the normalized Hermite
variation; case 6 (both exponents above the threshold) leads to a Hermite
sheet value.  Swapping the axes maps mixed cases onto their templates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .kernels import _hurst_value, _order_value, fgn_autocovariance

__all__ = [
    "Regime",
    "LimitConstant",
    "regime_threshold",
    "classify_regime",
    "s_gamma",
    "iota",
    "kappa",
    "phi",
    "berry_esseen_rate",
]

GAUSSIAN = "gaussian"
HERMITE = "hermite"

# Truncation control for the series sum_z r_gamma(z)^q.  Slack 1.05 covers
# |r_gamma(z)| <= 1.05 |g(2g-1)| z^{2g-2} for z >= 42.
_SERIES_SLACK = 1.05
_SERIES_MIN_CUT = 64
_SERIES_MAX_CUT = 2_000_000


@dataclass(frozen=True)
class Regime:
    """One of the six normalization cases, with the axis orientation used."""

    case_id: int
    axes_swapped: bool
    limit_kind: str

    def __post_init__(self) -> None:
        if self.case_id not in range(1, 7):
            raise ValueError(f"case_id must be in 1..6, got {self.case_id}")
        expected = HERMITE if self.case_id == 6 else GAUSSIAN
        if self.limit_kind != expected:
            raise ValueError(f"case {self.case_id} demands limit_kind={expected!r}")


@dataclass(frozen=True)
class LimitConstant:
    """Value of one of the grid-sum limit constants with a certified error bound."""

    kind: str  # "s" | "iota" | "kappa"
    gamma: float
    q: int
    value: float
    abs_error_bound: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise ValueError("limit constant must be finite")
        if self.abs_error_bound < 0.0:
            raise ValueError("error bound must be nonnegative")

    def __float__(self) -> float:
        return float(self.value)


def regime_threshold(q) -> float:
    """Critical exponent 1 - 1/(2q) separating Gaussian from Hermite limits."""
    return 1.0 - 1.0 / (2.0 * _order_value(q))


def classify_regime(alpha, beta, q) -> Regime:
    """Place (alpha, beta, q) into its normalization case.

    Comparisons against the threshold are exact.  When the raw order of the
    exponents does not match the case template (e.g. alpha above and beta
    below the threshold), the case is reported with axes_swapped=True and all
    downstream formulas exchange the roles of (alpha, N) and (beta, M).
    """
    a = _hurst_value(alpha)
    b = _hurst_value(beta)
    thr = regime_threshold(q)
    sa = (a > thr) - (a < thr)
    sb = (b > thr) - (b < thr)
    table = {
        (-1, -1): (1, False),
        (-1, 0): (2, False),
        (0, -1): (2, True),
        (0, 0): (3, False),
        (-1, 1): (4, False),
        (1, -1): (4, True),
        (0, 1): (5, False),
        (1, 0): (5, True),
        (1, 1): (6, False),
    }
    case_id, swapped = table[(sa, sb)]
    return Regime(case_id, swapped, HERMITE if case_id == 6 else GAUSSIAN)


def _series_tail_bound(g: float, q: int, cut: int) -> float:
    # integral test on 2 * sum_{z > cut} (1.05 |g(2g-1)|)^q z^{q(2g-2)}
    a = abs(g * (2.0 * g - 1.0))
    if a == 0.0:
        return 0.0
    e = q * (2.0 * g - 2.0)
    return 2.0 * (_SERIES_SLACK * a) ** q * cut ** (e + 1.0) / (-(e + 1.0))


def _series_tail_estimate(g: float, q: int, cut: int) -> tuple[float, float]:
    """Midpoint-rule value of 2*sum_{z>cut} r^q from the asymptotic expansion
    of r_gamma, with a conservative bound on the remaining error."""
    a2 = 2.0 * g
    # c_j = C(2g, 2j), j = 1..5
    c = []
    coef = 1.0
    for j in range(1, 6):
        coef *= (a2 - (2 * j - 2)) * (a2 - (2 * j - 1)) / ((2 * j - 1) * (2 * j))
        c.append(coef)
    c1 = c[0]
    if c1 == 0.0:
        return 0.0, 0.0
    t2, t3, t4, t5 = (c[1] / c1, c[2] / c1, c[3] / c1, c[4] / c1)
    d = [
        1.0,
        q * t2,
        q * t3 + math.comb(q, 2) * t2**2,
        q * t4 + 2.0 * math.comb(q, 2) * t2 * t3 + math.comb(q, 3) * t2**3,
        q * t5
        + math.comb(q, 2) * (2.0 * t2 * t4 + t3**2)
        + 3.0 * math.comb(q, 3) * t2**2 * t3
        + math.comb(q, 4) * t2**4,
    ]
    e = q * (a2 - 2.0)
    x = cut + 0.5
    scale = c1**q
    integral = sum(
        scale * d[k] * x ** (e - 2 * k + 1) / (2 * k - 1 - e) for k in range(4)
    )
    # Euler-Maclaurin: sum_{z>cut} f(z) = int_{x}^inf f + f'(x)/24 + O(f''')
    em1 = sum(scale * d[k] * (e - 2 * k) * x ** (e - 2 * k - 1) for k in range(4)) / 24.0
    mid_err = 7.0 / 5760.0 * abs(scale) * abs(e * (e - 1.0) * (e - 2.0)) * x ** (e - 3.0) * 3.0
    trunc_err = 2.0 * abs(scale * d[4]) * x ** (e - 7.0) / (7.0 - e - 1.0)
    return 2.0 * (integral + em1), 2.0 * (mid_err + trunc_err)


def _partial_sum_fp_bound(g: float, q: int, r: np.ndarray) -> float:
    # the series evaluation of r is accurate to a few ulp; 8 eps |r| per lag
    # is generous, and each lag enters r^q with derivative q |r|^{q-1}
    eps = float(np.finfo(float).eps)
    mass = float(np.sum(q * np.abs(r) ** q))
    if mass == 0.0:  # Brownian case: every term is exactly zero
        return 0.0
    return 2.0 * mass * 8.0 * eps + 8.0 * eps


@lru_cache(maxsize=None)
def _s_gamma_cached(g: float, q: int, tol: float) -> tuple[float, float]:
    cut = _SERIES_MIN_CUT
    while _series_tail_bound(g, q, cut) > tol and cut < _SERIES_MAX_CUT:
        cut *= 2
    z = np.arange(1, cut + 1)
    r = fgn_autocovariance(g, z)
    partial = 1.0 + 2.0 * math.fsum(r**q)
    fp = _partial_sum_fp_bound(g, q, r)
    trunc = _series_tail_bound(g, q, cut)
    if trunc + fp <= tol:
        return partial, trunc + fp
    # Cutoff capped: add the analytic tail estimate and certify its remainder.
    tail, tail_err = _series_tail_estimate(g, q, cut)
    if tail_err + fp > tol:
        raise ValueError(
            f"cannot certify the series constant to tol={tol:g} for "
            f"gamma={g} this close to the threshold; loosen tol"
        )
    return partial + tail, tail_err + fp


def s_gamma(gamma, q, tol: float = 1e-12) -> LimitConstant:
    """Sum of r_gamma(z)^q over all integer lags, truncated adaptively.

    Requires gamma < 1 - 1/(2q) so that the series converges absolutely.
    The returned abs_error_bound certifies |value - exact| analytically.
    """
    g = _hurst_value(gamma)
    qi = _order_value(q)
    if g >= regime_threshold(qi):
        raise ValueError(
            f"sum of r^q diverges for gamma={g} >= 1 - 1/(2q) = {regime_threshold(qi)}"
        )
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    value, bound = _s_gamma_cached(g, qi, float(tol))
    return LimitConstant("s", g, qi, value, bound)


def iota(q) -> LimitConstant:
    """Limit constant 2 ((2q-1)(q-1) / (2 q^2))^q of the threshold case."""
    qi = _order_value(q, minimum=2)
    value = 2.0 * ((2.0 * qi - 1.0) * (qi - 1.0) / (2.0 * qi * qi)) ** qi
    return LimitConstant("iota", regime_threshold(qi), qi, value, 0.0)


def kappa(gamma, q) -> LimitConstant:
    """Closed-form limit constant g^q (2g-1)^q / ((gq-q+1)(2gq-2q+1)).

    Requires gamma > 1 - 1/(2q) (positive denominator).
    """
    g = _hurst_value(gamma)
    qi = _order_value(q)
    if g <= regime_threshold(qi):
        raise ValueError(
            f"kappa requires gamma > 1 - 1/(2q); got gamma={g}, threshold "
            f"{regime_threshold(qi)}"
        )
    value = (g**qi * (2.0 * g - 1.0) ** qi) / (
        (g * qi - qi + 1.0) * (2.0 * g * qi - 2.0 * qi + 1.0)
    )
    return LimitConstant("kappa", g, qi, value, 0.0)


def _oriented(alpha, beta, q, N, M):
    reg = classify_regime(alpha, beta, q)
    a = _hurst_value(alpha)
    b = _hurst_value(beta)
    if N < 1 or M < 1:
        raise ValueError("grid sizes must be >= 1")
    if reg.axes_swapped:
        return reg, b, a, float(M), float(N)
    return reg, a, b, float(N), float(M)


def _log_factor(n: float) -> float:
    if n < 2:
        raise ValueError("logarithmic normalization is undefined for a grid size of 1")
    return math.log(n)


def phi(alpha, beta, q, N, M, tol: float = 1e-12) -> float:
    """Normalization factor making E[(normalized variation)^2] -> 1.

    The per-case power and log factors follow the six-case split; swapped
    axes exchange the (alpha, N) and (beta, M) roles consistently.
    """
    reg, g1, g2, n1, n2 = _oriented(alpha, beta, q, N, M)
    qi = _order_value(q)
    qf = math.factorial(qi)
    if reg.case_id == 1:
        const = s_gamma(g1, qi, tol).value * s_gamma(g2, qi, tol).value
        pw = n1 ** (g1 * qi - 0.5) * n2 ** (g2 * qi - 0.5)
    elif reg.case_id == 2:
        const = s_gamma(g1, qi, tol).value * iota(qi).value
        pw = n1 ** (g1 * qi - 0.5) * n2 ** (qi - 1.0) / math.sqrt(_log_factor(n2))
    elif reg.case_id == 3:
        const = iota(qi).value ** 2
        pw = (
            n1 ** (qi - 1.0)
            * n2 ** (qi - 1.0)
            / math.sqrt(_log_factor(n1) * _log_factor(n2))
        )
    elif reg.case_id == 4:
        const = s_gamma(g1, qi, tol).value * kappa(g2, qi).value
        pw = n1 ** (g1 * qi - 0.5) * n2 ** (qi - 1.0)
    elif reg.case_id == 5:
        const = iota(qi).value * kappa(g2, qi).value
        pw = n1 ** (qi - 1.0) / math.sqrt(_log_factor(n1)) * n2 ** (qi - 1.0)
    else:
        const = kappa(g1, qi).value * kappa(g2, qi).value
        pw = n1 ** (qi - 1.0) * n2 ** (qi - 1.0)
    return math.sqrt(qf / const) * pw


def berry_esseen_rate(alpha, beta, q, N, M) -> float:
    """Rate-bound value (unit constant) of the central limit cases 1-5.

    Square root of the case's sum of power/log terms; every exponent is
    strictly negative, so the value vanishes as N, M grow.  Case 6 has no
    central limit theorem and is rejected.
    """
    reg, g1, g2, n1, n2 = _oriented(alpha, beta, q, N, M)
    qi = _order_value(q)

    def subcritical(g: float, n: float) -> float:
        return 1.0 / n + n ** (2.0 * g - 2.0) + n ** (2.0 * g * qi - 2.0 * qi + 1.0)

    def supercritical(g: float, n: float) -> float:
        return n ** (2.0 * qi - 1.0 - 2.0 * g * qi)

    if reg.case_id == 1:
        total = subcritical(g1, n1) + subcritical(g2, n2)
    elif reg.case_id == 2:
        total = subcritical(g1, n1) + 1.0 / _log_factor(n2)
    elif reg.case_id == 3:
        total = 1.0 / _log_factor(n1) + 1.0 / _log_factor(n2)
    elif reg.case_id == 4:
        total = subcritical(g1, n1) + supercritical(g2, n2)
    elif reg.case_id == 5:
        total = 1.0 / _log_factor(n1) + supercritical(g2, n2)
    else:
        raise ValueError(
            "no central limit theorem when both exponents exceed 1 - 1/(2q); "
            "use the non-central study instead"
        )
    return math.sqrt(total)
