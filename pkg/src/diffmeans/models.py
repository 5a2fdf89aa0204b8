"""Scalar diffusion coefficient bundles dX = a(X, theta) dB + b(X) dt.

Models are registered by name; coefficients are plain vectorized callables.
The parameter enters the diffusion coefficient only, and the key quantity
for inference is the relative sensitivity (da/dtheta) / a.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "DiffusionModel",
    "REGISTRY",
    "get_model",
    "info_integrand",
    "path_information",
]


@dataclass(frozen=True)
class DiffusionModel:
    """Coefficients of one parametric diffusion family.

    ``a`` and ``a_dot`` take (x, theta); ``b`` takes x.  All three accept
    numpy arrays in x.  ``a_lower`` is the non-degeneracy floor: a(x, theta)
    stays at or above it for theta in ``theta_interval``.
    """

    name: str
    a: Callable
    a_dot: Callable
    b: Callable
    theta_interval: tuple[float, float]
    a_lower: float
    default_xi0: float = 0.0

    def check_theta(self, theta: float) -> float:
        lo, hi = self.theta_interval
        if not lo <= theta <= hi:
            raise ValueError(f"theta={theta} outside parameter interval [{lo}, {hi}]")
        return float(theta)

    def rel_sensitivity(self, x, theta: float):
        """(da/dtheta) / a at (x, theta)."""
        return self.a_dot(x, theta) / self.a(x, theta)


def _const_a(x, theta):
    return np.full_like(np.asarray(x, dtype=float), float(theta)) if np.ndim(x) else float(theta)


def _const_one(x, theta):
    return np.ones_like(np.asarray(x, dtype=float)) if np.ndim(x) else 1.0


def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0


def _sine_a(x, theta):
    return theta * (2.0 + np.sin(x))


def _sine_a_dot(x, theta):
    return 2.0 + np.sin(x)


def _sine_b(x):
    return np.cos(x)


def _cauchy_a(x, theta):
    return 1.0 + theta / (1.0 + x * x)


def _cauchy_a_dot(x, theta):
    return 1.0 / (1.0 + x * x)


def _cauchy_b(x):
    return -np.tanh(x)


REGISTRY: dict[str, DiffusionModel] = {
    # Scaled Brownian motion: observations are exactly Gaussian, the one
    # case with a tractable likelihood, used as ground truth everywhere.
    "multiplicative_bm": DiffusionModel(
        name="multiplicative_bm",
        a=_const_a,
        a_dot=_const_one,
        b=_zero,
        theta_interval=(0.5, 3.0),
        a_lower=0.5,
        default_xi0=0.0,
    ),
    # a(x,theta) = theta (2 + sin x): state-dependent but with
    # (da/dtheta)/a = 1/theta, so the information is deterministic.
    "sine_scale": DiffusionModel(
        name="sine_scale",
        a=_sine_a,
        a_dot=_sine_a_dot,
        b=_sine_b,
        theta_interval=(0.5, 3.0),
        a_lower=0.5,
    ),
    # a(x,theta) = 1 + theta/(1+x^2): genuinely path-dependent sensitivity,
    # so the limiting information is random (mixed-normal limits).
    "cauchy_scale": DiffusionModel(
        name="cauchy_scale",
        a=_cauchy_a,
        a_dot=_cauchy_a_dot,
        b=_cauchy_b,
        theta_interval=(0.5, 3.0),
        a_lower=1.0,
    ),
}


def get_model(name: str) -> DiffusionModel:
    try:
        return REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; registered: {sorted(REGISTRY)}") from None


def info_integrand(model: DiffusionModel, x, theta: float):
    """Squared relative sensitivity ((da/dtheta)/a)^2 at (x, theta)."""
    r = model.rel_sensitivity(x, theta)
    return r * r


def path_information(model: DiffusionModel, path, theta: float) -> float:
    """Trapezoid approximation of 2 * int_0^1 ((da/dtheta)/a)^2(X_s, theta) ds.

    ``path`` is a PathGrid covering [0,1] (or anything exposing ``values``).
    """
    values = np.asarray(getattr(path, "values", path), dtype=float)
    y = info_integrand(model, values, theta)
    return float(2.0 * np.trapezoid(y, dx=1.0 / (values.size - 1)))


def validate_registry(x_range=(-50.0, 50.0), x_points: int = 201, theta_points: int = 100) -> None:
    """Grid-check non-degeneracy and boundedness of every registered model."""
    xs = np.linspace(*x_range, x_points)
    for model in REGISTRY.values():
        thetas = np.linspace(*model.theta_interval, theta_points)
        for theta in thetas:
            a = np.asarray(model.a(xs, theta), dtype=float)
            if not np.all(a >= model.a_lower):
                raise AssertionError(f"{model.name}: diffusion coefficient below floor")
            for arr in (a, np.asarray(model.a_dot(xs, theta)), np.asarray(model.b(xs))):
                if not np.all(np.isfinite(arr)):
                    raise AssertionError(f"{model.name}: unbounded coefficient on grid")
