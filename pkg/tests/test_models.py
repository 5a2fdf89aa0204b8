import numpy as np
import pytest

from diffmeans.models import (
    REGISTRY,
    get_model,
    info_integrand,
    path_information,
    validate_registry,
)
from diffmeans.simulate import simulate_path

MULT = get_model("multiplicative_bm")
SINE = get_model("sine_scale")
CAUCHY = get_model("cauchy_scale")


def test_registry_lookup():
    assert get_model("sine_scale").name == "sine_scale"
    with pytest.raises(ValueError):
        get_model("ornstein")


def test_registry_coefficient_floors():
    validate_registry()


class TestInfoIntegrand:
    def test_multiplicative(self):
        assert info_integrand(MULT, 12.3, 1.0) == pytest.approx(1.0)

    def test_sine_scale_is_theta_inverse_squared(self):
        assert info_integrand(SINE, 0.0, 2.0) == pytest.approx(0.25)
        assert info_integrand(SINE, 1.7, 2.0) == pytest.approx(0.25)

    def test_cauchy_at_origin(self):
        assert info_integrand(CAUCHY, 0.0, 1.0) == pytest.approx(0.25)


class TestPathInformation:
    def test_multiplicative_constant(self):
        path = simulate_path(MULT, 1.0, 0.0, n=16, m=8, seed=1)
        assert path_information(MULT, path, 1.0) == pytest.approx(2.0, abs=1e-12)

    def test_sine_scale_deterministic(self):
        path = simulate_path(SINE, 2.0, 0.0, n=16, m=8, seed=1)
        assert path_information(SINE, path, 2.0) == pytest.approx(0.5, abs=1e-12)

    def test_cauchy_zero_path(self):
        assert path_information(CAUCHY, np.zeros(129), 1.0) == pytest.approx(0.5, abs=1e-12)

    def test_grid_refinement_stable(self):
        path = simulate_path(SINE, 1.0, 0.3, n=64, m=512, seed=5)
        fine = path_information(SINE, path.values, 1.0)
        coarse = path_information(SINE, path.values[::2], 1.0)
        assert abs(fine - coarse) < 1e-3


def test_a_dot_matches_finite_differences(rng):
    eps = 1e-5
    for model in REGISTRY.values():
        lo, hi = model.theta_interval
        for _ in range(60):
            x = rng.uniform(-10, 10)
            theta = rng.uniform(lo + 2 * eps, hi - 2 * eps)
            fd = (model.a(x, theta + eps) - model.a(x, theta - eps)) / (2 * eps)
            exact = model.a_dot(x, theta)
            assert fd == pytest.approx(exact, rel=1e-6, abs=1e-9)


def test_theta_interval_enforced():
    with pytest.raises(ValueError):
        MULT.check_theta(4.0)
    with pytest.raises(ValueError):
        simulate_path(MULT, 0.2, 0.0, n=4, m=4, seed=0)
