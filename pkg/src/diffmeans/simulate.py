"""Euler path simulation, local-mean observations, and augmented blocks.

Paths live on a fine grid with m substeps per sampling cell (step
1/(n*m)) and retain their driving Brownian increments so that the
Gaussian frozen-coefficient coupling can be built from the same noise.

Randomness contract: every replication draws from its own counter-based
stream keyed by (master seed, stream tag, replication index), so results
do not depend on how replications are batched or distributed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measures import WeightMeasure, mean_weights
from .models import DiffusionModel

__all__ = [
    "PathGrid",
    "Block",
    "BlockSet",
    "rep_rng",
    "euler_values",
    "simulate_path",
    "simulate_values",
    "observe",
    "observe_values",
    "augment",
    "block_bounds",
    "gaussian_coupled_increments",
    "coupled_increments_values",
    "path_to_csv",
]


def rep_rng(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for one replication stream.

    Streams with different key tuples are independent; the same
    (seed, key) always reproduces the same draws.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


@dataclass(frozen=True)
class PathGrid:
    """A simulated path on the fine grid plus its Brownian increments."""

    n: int
    m: int
    values: np.ndarray
    dW: np.ndarray
    theta_true: float
    seed: int

    def __post_init__(self):
        if self.values.shape != (self.n * self.m + 1,):
            raise ValueError("values length must be n*m + 1")
        if self.dW.shape != (self.n * self.m,):
            raise ValueError("dW length must be n*m")


@dataclass(frozen=True)
class Block:
    """One augmented-observation block: anchor, local means, terminal value.

    ``increments`` holds the sqrt(n)-rescaled differences
    (first mean - anchor, successive mean differences, terminal - last mean),
    k+1 entries for a block of k means.
    """

    anchor: float
    means: np.ndarray
    terminal: float
    increments: np.ndarray


@dataclass(frozen=True)
class BlockSet:
    """An augmented observation split into blocks of k means plus anchors."""

    n: int
    k: int
    L: int
    blocks: tuple[Block, ...]
    last_block_len: int


def euler_values(model: DiffusionModel, theta: float, xi0: float, h: float, dW: np.ndarray) -> np.ndarray:
    """Euler recursion X_{t+h} = X_t + a(X_t, theta) dW + b(X_t) h, step h.

    ``dW`` may be a vector (one path) or a matrix (one path per row).
    Exposed separately from the simulators so tests can drive it with
    hand-built increments (e.g. all zeros).
    """
    dW = np.asarray(dW, dtype=float)
    squeeze = dW.ndim == 1
    if squeeze:
        dW = dW[None, :]
    reps, steps = dW.shape
    values = np.empty((reps, steps + 1))
    x = np.full(reps, float(xi0))
    values[:, 0] = x
    for i in range(steps):
        x = x + model.a(x, theta) * dW[:, i] + model.b(x) * h
        values[:, i + 1] = x
    return values[0] if squeeze else values


def simulate_values(
    model: DiffusionModel,
    theta: float,
    xi0: float,
    n: int,
    m: int,
    seed: int,
    reps: int | None = None,
    *,
    stream: tuple[int, ...] = (),
    rep_offset: int = 0,
    cells: int | None = None,
):
    """Simulate Euler paths; returns (values, dW) arrays.

    With ``reps`` None a single path is returned as vectors; otherwise one
    path per row, replication r drawing from stream (seed, *stream,
    rep_offset + r).  ``cells`` truncates simulation to the first cells of
    the n-cell grid (same step 1/(n*m)); default all n.
    """
    model.check_theta(theta)
    if n < 1 or m < 2:
        raise ValueError("need n >= 1 observation cells and m >= 2 substeps")
    n_cells = n if cells is None else cells
    if not 1 <= n_cells <= n:
        raise ValueError("cells must lie in [1, n]")
    steps = n_cells * m
    h = 1.0 / (n * m)
    squeeze = reps is None
    n_reps = 1 if squeeze else reps
    dW = np.empty((n_reps, steps))
    for r in range(n_reps):
        rng = rep_rng(seed, *stream, rep_offset + r)
        dW[r] = rng.standard_normal(steps)
    dW *= np.sqrt(h)
    values = euler_values(model, theta, xi0, h, dW)
    if squeeze:
        return values[0], dW[0]
    return values, dW


def simulate_path(model: DiffusionModel, theta: float, xi0: float, n: int, m: int, seed: int) -> PathGrid:
    """Simulate one path on the full [0,1] grid; deterministic given seed."""
    if n < 2:
        raise ValueError("need n >= 2 observation cells")
    values, dW = simulate_values(model, theta, xi0, n, m, seed)
    return PathGrid(n=n, m=m, values=values, dW=dW, theta_true=float(theta), seed=int(seed))


def observe_values(values: np.ndarray, measure: WeightMeasure, n: int, m: int) -> np.ndarray:
    """Local means of each cell for a batch of paths (rows)."""
    values = np.asarray(values, dtype=float)
    squeeze = values.ndim == 1
    if squeeze:
        values = values[None, :]
    w = mean_weights(measure, m)
    obs = np.zeros((values.shape[0], n))
    for p in range(m + 1):
        obs += w[p] * values[:, p : p + (n - 1) * m + 1 : m]
    return obs[0] if squeeze else obs


def observe(path: PathGrid, measure: WeightMeasure) -> np.ndarray:
    """The n local means of one path."""
    return observe_values(path.values, measure, path.n, path.m)


def block_bounds(n: int, k: int):
    """(L, tail, bounds): bounds are (start, length) of the non-empty blocks."""
    if not 1 <= k <= n:
        raise ValueError(f"block length k={k} outside [1, n={n}]")
    L = n // k
    bounds = [(l * k, k) for l in range(L)]
    tail = n - L * k
    if tail > 0:
        bounds.append((L * k, tail))
    return L, tail, bounds


def augment(path: PathGrid, observations, k: int) -> BlockSet:
    """Split observations into blocks of k means with exact anchors off the grid.

    The final block holds the n - k*floor(n/k) leftover means (empty, and
    omitted, when k divides n).
    """
    obs = np.asarray(observations, dtype=float)
    n, m = path.n, path.m
    if obs.shape != (n,):
        raise ValueError("observations must hold one mean per cell")
    L, tail, bounds = block_bounds(n, k)
    root_n = np.sqrt(n)
    blocks = []
    for start, length in bounds:
        anchor = float(path.values[start * m])
        terminal = float(path.values[(start + length) * m])
        means = obs[start : start + length]
        inc = np.empty(length + 1)
        inc[0] = means[0] - anchor
        inc[1:length] = np.diff(means)
        inc[length] = terminal - means[-1]
        blocks.append(Block(anchor=anchor, means=means, terminal=terminal, increments=root_n * inc))
    return BlockSet(n=n, k=k, L=L, blocks=tuple(blocks), last_block_len=tail)


def coupling_weights(measure: WeightMeasure, m: int):
    """Discrete tail/cum mass weights on the substep grid.

    tail[p] approximates mu([s,1]) and cum[p] = 1 - tail[p] approximates
    mu([0,s]) on the p-th substep; they are the partial sums of the
    local-mean quadrature weights, which makes the coupling exact for
    constant-coefficient models.
    """
    w = mean_weights(measure, m)
    tail = w[::-1].cumsum()[::-1][1:]
    cum = 1.0 - tail
    return tail, cum


def coupled_increments_values(values, dW, n: int, m: int, k: int, start: int,
                              measure: WeightMeasure, model: DiffusionModel, theta: float):
    """Frozen-coefficient Gaussian increments for the block of k cells at ``start``.

    Built from the same Brownian increments as the path, with the diffusion
    coefficient frozen at the block anchor; one row per path.
    """
    values = np.asarray(values, dtype=float)
    dW = np.asarray(dW, dtype=float)
    squeeze = values.ndim == 1
    if squeeze:
        values = values[None, :]
        dW = dW[None, :]
    tail, cum = coupling_weights(measure, m)
    d = dW[:, start * m : (start + k) * m]
    out = np.empty((values.shape[0], k + 1))
    out[:, 0] = d[:, :m] @ tail
    for j in range(1, k):
        out[:, j] = d[:, (j - 1) * m : j * m] @ cum + d[:, j * m : (j + 1) * m] @ tail
    out[:, k] = d[:, (k - 1) * m :] @ cum
    anchor = values[:, start * m]
    out *= (np.sqrt(n) * model.a(anchor, theta))[:, None]
    return out[0] if squeeze else out


def gaussian_coupled_increments(path: PathGrid, model: DiffusionModel, k: int, block_index: int,
                                measure: WeightMeasure, theta: float) -> np.ndarray:
    """Gaussian coupling of the rescaled increments of one block of a path."""
    _, _, bounds = block_bounds(path.n, k)
    if not 0 <= block_index < len(bounds):
        raise ValueError(f"block index {block_index} out of range")
    start, length = bounds[block_index]
    return coupled_increments_values(
        path.values, path.dW, path.n, path.m, length, start, measure, model, theta
    )


def path_to_csv(path: PathGrid) -> str:
    """Fine-grid dump with columns t, X, dW (the last row has no increment)."""
    steps = path.n * path.m
    lines = ["t,X,dW"]
    for i in range(steps):
        lines.append(f"{i / steps!r},{float(path.values[i])!r},{float(path.dW[i])!r}")
    lines.append(f"{1.0!r},{float(path.values[steps])!r},")
    return "\n".join(lines) + "\n"
