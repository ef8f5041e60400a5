"""Linear-Gaussian regression models on the fixed polynomial family.

A candidate of order n regresses y on powers 0..n-1 of an input grid
equally spaced over [-5, 5].  Noise is i.i.d. Gaussian with a known
variance, so the observed information of the fit is (1/sigma^2) Phi' Phi
and the maximized log-likelihood is available in closed form from the
residual sum of squares.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .numerics import DimensionMismatch, cholesky, cholesky_solve
from .sampling import standard_normal

LOG_2PI = math.log(2.0 * math.pi)


class ParseError(ValueError):
    """A data CSV line could not be interpreted; carries the 1-based line."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Dataset:
    """Observed responses plus the known noise variance."""

    y: np.ndarray
    noise_variance: float

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        if y.ndim != 1 or y.size < 2:
            raise ValueError(f"need a 1-D response vector with >= 2 points, got shape {y.shape}")
        if not np.all(np.isfinite(y)):
            raise ValueError("responses contain non-finite values")
        if not (self.noise_variance > 0.0 and math.isfinite(self.noise_variance)):
            raise ValueError(f"noise variance must be positive and finite, got {self.noise_variance}")
        object.__setattr__(self, "y", y)

    @property
    def n_points(self) -> int:
        return self.y.size


def polynomial_regressors(n_points: int, order: int) -> np.ndarray:
    """Design matrix with columns base**0 .. base**(order-1).

    base_t = -5 + 10 (t - 1)/(N - 1) for t = 1..N, so the grid runs
    exactly from -5 to 5 regardless of N.
    """
    if n_points < 2:
        raise ValueError(f"need at least 2 points, got {n_points}")
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    base = -5.0 + 10.0 * np.arange(n_points) / (n_points - 1)
    return np.vander(base, order, increasing=True)


def log_likelihood(data: Dataset, regressors: np.ndarray, theta: np.ndarray) -> float:
    """Gaussian log-density of the data under coefficients theta."""
    phi = np.asarray(regressors, dtype=float)
    th = np.asarray(theta, dtype=float)
    if phi.ndim != 2:
        raise DimensionMismatch(f"regressors must be 2-D, got shape {phi.shape}")
    if phi.shape[0] != data.n_points:
        raise DimensionMismatch(
            f"regressors have {phi.shape[0]} rows but the data has {data.n_points} points"
        )
    if th.shape != (phi.shape[1],):
        raise DimensionMismatch(
            f"theta has shape {th.shape}, expected ({phi.shape[1]},)"
        )
    resid = data.y - phi @ th
    n = data.n_points
    s2 = data.noise_variance
    return float(-0.5 * n * (LOG_2PI + math.log(s2)) - 0.5 * (resid @ resid) / s2)


@dataclass(frozen=True)
class FittedModel:
    """Least-squares fit of one candidate order, with its information matrix.

    fim is the observed information (1/sigma^2) Phi' Phi, exactly symmetric
    by construction; max_loglik is the log-likelihood at theta_hat.
    """

    order: int
    theta_hat: np.ndarray
    fim: np.ndarray
    max_loglik: float
    regressors: np.ndarray
    data: Dataset

    @property
    def dim(self) -> int:
        return self.theta_hat.size

    def log_likelihood(self, theta: np.ndarray) -> float:
        return log_likelihood(self.data, self.regressors, theta)

    def log_likelihood_batch(self, thetas: np.ndarray) -> np.ndarray:
        """Log-likelihood at each row of thetas, shape (m, dim) -> (m,).

        Evaluated through the residual decomposition
        ll(theta) = max_loglik - (1/2) (theta - theta_hat)' J (theta - theta_hat),
        which is exact for this family and keeps the quadratic term from
        cancellation when sigma^2 is tiny.
        """
        t = np.asarray(thetas, dtype=float)
        if t.ndim != 2 or t.shape[1] != self.dim:
            raise DimensionMismatch(f"expected shape (m, {self.dim}), got {t.shape}")
        dev = t - self.theta_hat
        q = np.einsum("ij,jk,ik->i", dev, self.fim, dev)
        return self.max_loglik - 0.5 * q


def fit(data: Dataset, regressors: np.ndarray) -> FittedModel:
    """Least squares via the normal equations; raises NotPositiveDefinite
    when the Gram matrix is singular (e.g. more columns than points)."""
    phi = np.asarray(regressors, dtype=float)
    if phi.ndim != 2 or phi.shape[0] != data.n_points:
        raise DimensionMismatch(
            f"regressors shape {phi.shape} does not match {data.n_points} data points"
        )
    gram = phi.T @ phi
    gram = 0.5 * (gram + gram.T)
    L = cholesky(gram)
    theta_hat = cholesky_solve(L, phi.T @ data.y)
    fim = gram / data.noise_variance
    mll = log_likelihood(data, phi, theta_hat)
    return FittedModel(
        order=phi.shape[1],
        theta_hat=theta_hat,
        fim=fim,
        max_loglik=mll,
        regressors=phi,
        data=data,
    )


def generate_data(rng, order: int, coefficients, sigma2: float, n_points: int) -> Dataset:
    """Simulate the polynomial model: y = Phi coeffs + N(0, sigma2) noise."""
    coeffs = np.asarray(coefficients, dtype=float)
    if coeffs.shape != (order,):
        raise DimensionMismatch(
            f"got {coeffs.size} coefficients for order {order}"
        )
    phi = polynomial_regressors(n_points, order)
    noise = math.sqrt(sigma2) * standard_normal(rng, n_points)
    return Dataset(phi @ coeffs + noise, sigma2)


def save_dataset_csv(path, data: Dataset) -> None:
    """Write t,y rows (t = 1..N); the noise variance lives in the config."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "y"])
        for t, y in enumerate(data.y, start=1):
            w.writerow([t, f"{y:.17g}"])


def load_dataset_y(path) -> np.ndarray:
    """Read the y column of a t,y CSV written by save_dataset_csv."""
    ys = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if lineno == 1 and row[0].strip().lower() == "t":
                continue
            if len(row) != 2:
                raise ParseError(f"expected 2 fields, got {len(row)}", lineno)
            try:
                ys.append(float(row[1]))
            except ValueError:
                raise ParseError(f"bad number {row[1]!r}", lineno) from None
    if len(ys) < 2:
        raise ParseError("fewer than 2 data rows", max(len(ys) + 1, 1))
    return np.asarray(ys)
