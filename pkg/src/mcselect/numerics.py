"""Log-domain helpers, small dense linear algebra, and the chi-square CDF.

Everything on the likelihood scale crosses module boundaries as a natural
log; log-zero is represented by ``-inf``.  The chi-square CDF is computed
from scratch (series / continued fraction for the regularized incomplete
gamma) so that prior mass factors carry no dependency beyond numpy, and the
Cholesky factorization is the unblocked textbook loop: the matrices here
are tiny (candidate dimension, single digits) and the factorization doubles
as the positive-definiteness test.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import solve_triangular


class EmptyInput(ValueError):
    """An operation that needs at least one element got none."""


class NotPositiveDefinite(ArithmeticError):
    """Matrix has a non-positive pivot; it is singular or indefinite."""


class DimensionMismatch(ValueError):
    """Operands have incompatible shapes."""


# Matrices handed to cholesky/log_det must already be symmetric; builders
# upstream symmetrize via (G + G.T)/2 so this tolerance is never tight.
_SYMMETRY_ATOL = 1e-12


def _as_square(m) -> np.ndarray:
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        raise EmptyInput("empty matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if np.max(np.abs(a - a.T)) > _SYMMETRY_ATOL:
        raise ValueError("matrix is not symmetric")
    return a


def cholesky(m) -> np.ndarray:
    """Lower-triangular L with L @ L.T == m.

    Raises NotPositiveDefinite as soon as a pivot is <= 0, which is the
    only positive-definiteness check the package uses.
    """
    a = _as_square(m)
    n = a.shape[0]
    L = np.zeros((n, n))
    for j in range(n):
        pivot = a[j, j] - L[j, :j] @ L[j, :j]
        if pivot <= 0.0 or not math.isfinite(pivot):
            raise NotPositiveDefinite(f"pivot {pivot:g} at index {j}")
        L[j, j] = math.sqrt(pivot)
        if j + 1 < n:
            L[j + 1 :, j] = (a[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return L


def cholesky_solve(L: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve (L L.T) x = b given the lower factor L."""
    z = solve_triangular(L, b, lower=True)
    return solve_triangular(L, z, lower=True, trans="T")


def log_det(m) -> float:
    """log det of a symmetric positive-definite matrix, via its factor."""
    L = cholesky(m)
    return float(2.0 * np.sum(np.log(np.diag(L))))


_GAMMA_RTOL = 1e-12
_GAMMA_MAX_ITER = 500


def _gamma_p_series(a: float, x: float) -> float:
    # lower series: gamma(a,x) = x^a e^-x sum x^k / (a (a+1) ... (a+k))
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_GAMMA_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _GAMMA_RTOL:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_q_cont_frac(a: float, x: float) -> float:
    # upper tail by Lentz's method on the standard continued fraction
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_RTOL:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def regularized_gamma_p(a: float, x: float) -> float:
    """P(a, x), the regularized lower incomplete gamma function."""
    if a <= 0.0:
        raise ValueError(f"shape must be positive, got {a}")
    if x < 0.0:
        raise ValueError(f"argument must be >= 0, got {x}")
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return min(_gamma_p_series(a, x), 1.0)
    return max(1.0 - _gamma_q_cont_frac(a, x), 0.0)


def chi2_cdf(df: int, x: float) -> float:
    """P(chi2_df <= x) for integer df >= 1."""
    if not isinstance(df, (int, np.integer)) or df < 1:
        raise ValueError(f"degrees of freedom must be a positive integer, got {df!r}")
    if not math.isfinite(x):
        if math.isnan(x):
            raise ValueError("x is NaN")
        return 1.0 if x > 0 else 0.0
    if x < 0.0:
        return 0.0
    return regularized_gamma_p(df / 2.0, x / 2.0)


def unit_ball_volume(d: int) -> float:
    """Volume of the unit d-ball: V1 = 2, V2 = pi, V_d = (2 pi / d) V_{d-2}."""
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    v = 2.0 if d % 2 else math.pi
    for k in range(4 - d % 2, d + 1, 2):
        v *= 2.0 * math.pi / k
    return v


def log_sum_exp(values) -> float:
    """log sum exp(v_i), stable under large shifts; empty input is an error."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise EmptyInput("log_sum_exp of no values")
    m = float(np.max(v))
    if m == -math.inf:
        return -math.inf
    return m + math.log(float(np.sum(np.exp(v - m))))
