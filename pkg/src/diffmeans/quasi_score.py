"""Tridiagonal block covariances, quadratic forms, and the Gaussian quasi-score.

Conditionally on its anchor, the vector of k+1 rescaled increments of one
block is approximately Gaussian with covariance a^2(anchor, theta) K, where
K is the deterministic tridiagonal matrix with diagonal
(v1, v1+v2, ..., v1+v2, v2) and constant off-diagonal c.  The per-block
score of that Gaussian approximation is an explicit recentered quadratic
form; summing it over blocks gives the statistics N_n (score) and I_n
(observed information) whose limits the experiment harness checks.

The means-only variants drop the anchor increments: the interior (k-1)
increments have covariance a^2 K_int with constant diagonal v1+v2, and the
anchor value is replaced by the last mean of the previous block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measures import VCoefficients
from .models import DiffusionModel
from .simulate import BlockSet, block_bounds

__all__ = [
    "TriKMatrix",
    "augmented_block_cov",
    "interior_block_cov",
    "factor_tridiagonal",
    "solve_tridiagonal",
    "quadratic_form",
    "quadratic_forms",
    "xi",
    "score_terms",
    "info_terms",
    "xi_dtheta",
    "score_and_info",
    "xi_obs",
    "obs_score_and_info",
    "quasi_loglik",
    "block_summaries",
    "obs_block_summaries",
]


@dataclass(frozen=True)
class TriKMatrix:
    """Symmetric tridiagonal matrix with constant off-diagonal."""

    size: int
    diag: np.ndarray
    offdiag: float

    def dense(self) -> np.ndarray:
        out = np.diag(np.asarray(self.diag, dtype=float))
        idx = np.arange(self.size - 1)
        out[idx, idx + 1] = self.offdiag
        out[idx + 1, idx] = self.offdiag
        return out


def augmented_block_cov(k: int, coeffs: VCoefficients) -> TriKMatrix:
    """Unit-diffusion covariance of the k+1 increments of a block of k means."""
    if k < 1:
        raise ValueError("block must hold at least one mean")
    diag = np.full(k + 1, coeffs.v1 + coeffs.v2)
    diag[0] = coeffs.v1
    diag[-1] = coeffs.v2
    return TriKMatrix(size=k + 1, diag=diag, offdiag=coeffs.c)


def interior_block_cov(k: int, coeffs: VCoefficients) -> TriKMatrix:
    """Unit-diffusion covariance of the k-1 interior increments (means only)."""
    if k < 2:
        raise ValueError("means-only block needs k >= 2")
    diag = np.full(k - 1, coeffs.v1 + coeffs.v2)
    return TriKMatrix(size=k - 1, diag=diag, offdiag=coeffs.c)


def factor_tridiagonal(K: TriKMatrix):
    """LDL^T factorization; returns (sub, piv) with unit-lower sub-diagonal ``sub``.

    Raises numpy.linalg.LinAlgError naming the pivot index if a pivot is
    not strictly positive (matrix not positive definite).
    """
    diag = np.asarray(K.diag, dtype=float)
    c = float(K.offdiag)
    piv = np.empty(K.size)
    sub = np.zeros(K.size)
    piv[0] = diag[0]
    if piv[0] <= 0.0:
        raise np.linalg.LinAlgError("tridiagonal factorization breakdown at pivot 0")
    for i in range(1, K.size):
        sub[i] = c / piv[i - 1]
        piv[i] = diag[i] - c * sub[i]
        if piv[i] <= 0.0:
            raise np.linalg.LinAlgError(f"tridiagonal factorization breakdown at pivot {i}")
    return sub, piv


def solve_tridiagonal(K: TriKMatrix, rhs) -> np.ndarray:
    """Solve K x = rhs by the Thomas recursion on the LDL^T factors."""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != K.size:
        raise ValueError(f"rhs has leading dimension {rhs.shape[0]}, expected {K.size}")
    sub, piv = factor_tridiagonal(K)
    y = rhs.copy()
    for i in range(1, K.size):
        y[i] -= sub[i] * y[i - 1]
    if y.ndim == 1:
        x = y / piv
    else:
        x = y / piv[:, None]
    for i in range(K.size - 2, -1, -1):
        x[i] -= sub[i + 1] * x[i + 1]
    return x


def quadratic_forms(K: TriKMatrix, U: np.ndarray) -> np.ndarray:
    """u K^{-1} u^T for each row of U, via one factorization."""
    U = np.asarray(U, dtype=float)
    squeeze = U.ndim == 1
    if squeeze:
        U = U[None, :]
    if U.shape[1] != K.size:
        raise ValueError(f"vectors of length {U.shape[1]} against matrix of size {K.size}")
    sub, piv = factor_tridiagonal(K)
    y = U.T.copy()
    for i in range(1, K.size):
        y[i] -= sub[i] * y[i - 1]
    q = np.einsum("ir,ir->r", y, y / piv[:, None])
    return float(q[0]) if squeeze else q


def quadratic_form(K: TriKMatrix, u) -> float:
    """u^T K^{-1} u; nonnegative for positive definite K."""
    return quadratic_forms(K, np.asarray(u, dtype=float))


def xi(U, anchor: float, theta: float, theta0: float, model: DiffusionModel,
       coeffs: VCoefficients) -> float:
    """Per-block quasi-score term: recentered Gaussian quadratic form.

    (a_dot/a)(anchor, theta0) * { a(anchor, theta)^{-2} u K^{-1} u - (k+1) }
    where k+1 = len(U).
    """
    U = np.asarray(U, dtype=float)
    q = quadratic_form(augmented_block_cov(U.size - 1, coeffs), U)
    r0 = model.rel_sensitivity(anchor, theta0)
    a = model.a(anchor, theta)
    return float(r0 * (q / (a * a) - U.size))


def xi_dtheta(U, anchor: float, theta: float, theta0: float, model: DiffusionModel,
              coeffs: VCoefficients) -> float:
    """Derivative of xi in theta (the variance argument only carries theta)."""
    U = np.asarray(U, dtype=float)
    q = quadratic_form(augmented_block_cov(U.size - 1, coeffs), U)
    r0 = model.rel_sensitivity(anchor, theta0)
    a = model.a(anchor, theta)
    return float(r0 * (-2.0 * model.a_dot(anchor, theta) / a**3) * q)


def block_summaries(blocks: BlockSet, coeffs: VCoefficients):
    """(anchors, sizes, qforms) per non-empty block.

    sizes are the increment counts k_l + 1; the final partial block gets the
    covariance of its own smaller size.
    """
    anchors = np.array([b.anchor for b in blocks.blocks])
    sizes = np.array([b.increments.size for b in blocks.blocks])
    qforms = np.empty(len(blocks.blocks))
    for size in np.unique(sizes):
        idx = np.nonzero(sizes == size)[0]
        U = np.stack([blocks.blocks[i].increments for i in idx])
        qforms[idx] = quadratic_forms(augmented_block_cov(size - 1, coeffs), U)
    return anchors, sizes, qforms


def score_terms(theta, theta0, model, anchors, sizes, qforms):
    r0 = model.rel_sensitivity(anchors, theta0)
    a = model.a(anchors, theta)
    return r0 * (qforms / (a * a) - sizes)


def info_terms(theta, theta0, model, anchors, qforms):
    # minus the xi derivative: 2 (a_dot/a)(theta0) (a_dot/a)(theta) q / a^2(theta)
    r0 = model.rel_sensitivity(anchors, theta0)
    a = model.a(anchors, theta)
    return 2.0 * r0 * (model.a_dot(anchors, theta) / a) * qforms / (a * a)


def score_and_info(blocks: BlockSet, theta0: float, model: DiffusionModel,
                   coeffs: VCoefficients) -> tuple[float, float]:
    """Aggregate statistics (N, I): N = sum xi / sqrt(n), I = -sum xi' / n."""
    anchors, sizes, qforms = block_summaries(blocks, coeffs)
    n = blocks.n
    N = float(np.sum(score_terms(theta0, theta0, model, anchors, sizes, qforms)) / np.sqrt(n))
    I = float(np.sum(info_terms(theta0, theta0, model, anchors, qforms)) / n)
    return N, I


def xi_obs(U_interior, anchor_obs: float, theta: float, theta0: float,
           model: DiffusionModel, coeffs: VCoefficients) -> float:
    """Means-only quasi-score term from the k-1 interior increments.

    The anchor is the last mean of the previous block (the known initial
    value for the first block); recentering is by k-1.
    """
    U = np.asarray(U_interior, dtype=float)
    if U.size < 1:
        raise ValueError("means-only score needs k >= 2 (at least one interior increment)")
    q = quadratic_form(interior_block_cov(U.size + 1, coeffs), U)
    r0 = model.rel_sensitivity(anchor_obs, theta0)
    a = model.a(anchor_obs, theta)
    return float(r0 * (q / (a * a) - U.size))


def obs_block_summaries(observations, xi0: float, k: int, coeffs: VCoefficients):
    """(anchors, sizes, qforms) of the means-only blocks.

    anchors are the preceding means (xi0 for the first block), sizes the
    interior increment counts k_l - 1; blocks with fewer than 2 means carry
    no interior increment and are dropped.
    """
    obs = np.asarray(observations, dtype=float)
    n = obs.size
    if k < 2:
        raise ValueError("means-only score needs k >= 2")
    _, _, bounds = block_bounds(n, k)
    root_n = np.sqrt(n)
    anchors, sizes, qforms = [], [], []
    for start, length in bounds:
        if length < 2:
            continue
        anchors.append(xi0 if start == 0 else obs[start - 1])
        U = root_n * np.diff(obs[start : start + length])
        sizes.append(U.size)
        qforms.append(quadratic_form(interior_block_cov(length, coeffs), U))
    return np.array(anchors), np.array(sizes), np.array(qforms)


def obs_score_and_info(observations, xi0: float, k: int, theta0: float,
                       model: DiffusionModel, coeffs: VCoefficients) -> tuple[float, float]:
    """Means-only aggregate statistics (N, I) built from observations alone."""
    anchors, sizes, qforms = obs_block_summaries(observations, xi0, k, coeffs)
    n = np.asarray(observations).size
    N = float(np.sum(score_terms(theta0, theta0, model, anchors, sizes, qforms)) / np.sqrt(n))
    I = float(np.sum(info_terms(theta0, theta0, model, anchors, qforms)) / n)
    return N, I


def quasi_loglik(blocks: BlockSet, theta: float, model: DiffusionModel,
                 coeffs: VCoefficients) -> float:
    """Gaussian quasi-log-likelihood of a block set, additive constants dropped.

    Its theta-derivative is the sum of the per-block xi terms with the
    sensitivity prefactor evaluated at theta.
    """
    anchors, sizes, qforms = block_summaries(blocks, coeffs)
    a2 = model.a(anchors, theta) ** 2
    return float(-0.5 * np.sum(sizes * np.log(a2) + qforms / a2))
