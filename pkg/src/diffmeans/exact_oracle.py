"""Exact Gaussian likelihood for the scaled Brownian model.

When X = theta * B (zero drift, constant diffusion, started at 0), the
local means are a centered Gaussian vector with covariance theta^2 Sigma0,
where Sigma0 depends only on n and the weighting measure:

    Sigma0[i, j] = integral integral min((s+i)/n, (t+j)/n) dmu(s) dmu(t).

This gives exact log-densities, exact likelihood ratios, and a closed-form
maximum-likelihood estimator, used as ground truth by the experiments.
The covariance is dense, so n is capped: this is a test fixture, not a
production path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .measures import WeightMeasure

__all__ = ["GaussianObsModel", "build_base_cov", "log_density", "exact_llr", "exact_mle"]

_N_CAP = 4096


@dataclass(frozen=True)
class GaussianObsModel:
    """Observation covariance Sigma0 and its Cholesky factor for one (n, measure)."""

    n: int
    measure: WeightMeasure
    base_cov: np.ndarray
    chol: np.ndarray

    def quad_form(self, x) -> float:
        """x^T Sigma0^{-1} x via the cached triangular factor."""
        return float(np.sum(self.quad_forms(np.asarray(x, dtype=float)[None, :])))

    def quad_forms(self, X: np.ndarray) -> np.ndarray:
        """Quadratic forms of each row of X."""
        X = np.asarray(X, dtype=float)
        if X.shape[1] != self.n:
            raise ValueError(f"observation length {X.shape[1]} != n = {self.n}")
        y = solve_triangular(self.chol, X.T, lower=True)
        return np.einsum("ir,ir->r", y, y)

    def log_det(self) -> float:
        return float(2.0 * np.sum(np.log(np.diag(self.chol))))


def _min_moments(measure: WeightMeasure) -> tuple[float, float]:
    """(E min(s,t), E s) under mu x mu and mu, by bilinear expansion.

    The Lebesgue-Lebesgue, Lebesgue-atom and atom-atom pieces each have
    elementary closed forms: int int min = 1/3, int min(s, a) ds = a - a^2/2,
    and min(a, a') directly.
    """
    lam = measure.lebesgue_weight
    pos = np.array([a for a, _ in measure.atoms])
    wts = np.array([w for _, w in measure.atoms])
    min_moment = lam * lam / 3.0
    first_moment = 0.5 * lam
    if pos.size:
        min_moment += 2.0 * lam * float(wts @ (pos - 0.5 * pos * pos))
        min_moment += float(wts @ np.minimum.outer(pos, pos) @ wts)
        first_moment += float(wts @ pos)
    return min_moment, first_moment


def build_base_cov(n: int, measure: WeightMeasure) -> GaussianObsModel:
    """Assemble Sigma0 and factor it; n is capped (dense fixture)."""
    if n < 1:
        raise ValueError("need n >= 1 observations")
    if n > _N_CAP:
        raise ValueError(f"oracle covariance capped at n = {_N_CAP}")
    min_moment, first_moment = _min_moments(measure)
    idx = np.arange(n)
    cov = np.minimum.outer(idx, idx) + first_moment
    np.fill_diagonal(cov, idx + min_moment)
    cov = cov / n
    chol = np.linalg.cholesky(cov)
    return GaussianObsModel(n=n, measure=measure, base_cov=cov, chol=chol)


def log_density(gm: GaussianObsModel, theta: float, x) -> float:
    """Gaussian log-density of the observation vector under theta."""
    if theta <= 0.0:
        raise ValueError(f"theta must be positive, got {theta}")
    q = gm.quad_form(x)
    return -0.5 * (gm.n * np.log(2.0 * np.pi * theta * theta) + gm.log_det() + q / (theta * theta))


def exact_llr(gm: GaussianObsModel, x, theta0: float, theta1: float) -> float:
    """Exact log-likelihood ratio log p_{theta1}(x) - log p_{theta0}(x)."""
    if theta0 <= 0.0 or theta1 <= 0.0:
        raise ValueError("thetas must be positive")
    q = gm.quad_form(x)
    return float(-gm.n * np.log(theta1 / theta0) - 0.5 * q * (theta1**-2 - theta0**-2))


def exact_mle(gm: GaussianObsModel, x) -> float:
    """Closed-form maximizer theta_hat = sqrt(x^T Sigma0^{-1} x / n)."""
    x = np.asarray(x, dtype=float)
    if not np.any(x):
        raise ValueError("degenerate input: observations identically zero")
    return float(np.sqrt(gm.quad_form(x) / gm.n))
