import math

import numpy as np
import pytest

from finsler_holonomy import metrics as M
from finsler_holonomy.errors import DegenerateInputError, DomainError, PointwiseFamilyError

from conftest import ball_points


def test_klein_metric_identity_at_origin():
    np.testing.assert_allclose(M.metric_tensor(M.klein(2), [0, 0], [0.3, -1.2]), np.eye(2), atol=1e-14)


def test_euclidean_metric_is_identity(rng):
    for x, y in ball_points(rng, 5, n=3):
        np.testing.assert_allclose(M.metric_tensor(M.euclidean(3), x, y), np.eye(3), atol=1e-14)


def test_randers_metric_positive_definite(rng):
    spec = M.randers_shen([0.5, -0.3], -1)
    for x, y in ball_points(rng, 20, radius=0.9):
        assert np.all(np.linalg.eigvalsh(M.metric_tensor(spec, x, y)) > 0)


def test_batched_metric_tensor():
    y = np.array([[1.0, 0.0, 0.3], [0.0, 1.0, -2.0]])
    g = M.metric_tensor(M.randers_shen([0.2, 0.1]), [0.1, 0.1], y)
    for k in range(3):
        np.testing.assert_allclose(g[:, :, k], M.metric_tensor(M.randers_shen([0.2, 0.1]), [0.1, 0.1], y[:, k]), atol=1e-14)


@pytest.mark.parametrize("sign", [1, -1])
def test_projective_factor_closed_vs_derived(sign, rng):
    spec = M.randers_shen([0.3, 0.1], sign)
    for x, y in ball_points(rng, 20):
        a = M.projective_factor(spec, x, y, "closed")
        b = M.projective_factor(spec, x, y, "derived")
        assert abs(a - b) <= 1e-12 * (1 + abs(a))


def test_klein_projective_factor(rng):
    for x, y in ball_points(rng, 10, n=3):
        assert M.projective_factor(M.klein(3), x, y, "derived") == pytest.approx(x @ y / (1 - x @ x), abs=1e-13)


def test_homogeneity_report(rng):
    rep = M.check_homogeneity(M.randers_shen([0.3, 0.1]), ball_points(rng, 20))
    assert rep.max_euler_residual < 1e-12 and rep.max_scaling_residual < 1e-12
    assert not rep.reversible
    assert M.check_homogeneity(M.klein(2), ball_points(rng, 5)).reversible


def test_chart_and_slit_guards():
    with pytest.raises(DomainError):
        M.finsler_value(M.klein(2), [0.9999995, 0.0], [1.0, 0.0])
    with pytest.raises(DegenerateInputError):
        M.finsler_value(M.euclidean(2), [0, 0], [0.0, 0.0])
    with pytest.raises(PointwiseFamilyError):
        M.finsler_value(M.bryant_shen(0.3), [0.1, 0.0], [1.0, 0.0])
    with pytest.raises(ValueError):
        M.randers_shen([0.8, 0.8])


def test_bryant_shen_data():
    spec = M.bryant_shen(math.pi / 6)
    y = np.array([0.6, 0.8])
    assert M.finsler_value(spec, [0, 0], y) == pytest.approx(math.cos(math.pi / 6))
    assert M.projective_factor(spec, [0, 0], y) == pytest.approx(math.sin(math.pi / 6))
    assert spec.c == pytest.approx(math.tan(math.pi / 6))


@pytest.mark.parametrize(
    "d",
    [
        {"family": "RandersShen", "a": [0.3, 0.1], "sign": -1},
        {"family": "Klein", "n": 3},
        {"family": "BryantShenPointwise", "alpha": 0.5, "n": 3},
        {"family": "CustomPointwise", "n": 2, "F0": {"type": "norm_linear", "scale": 1.0, "linear": [0.2, 0.0]},
         "P0": {"type": "norm_linear", "scale": 0.5, "linear": [-0.1, 0.0]}, "lambda": -0.25},
        {"family": "PolarProfilePointwise", "profile": {"F": {"c0": 0.0}, "P": {"c0": 0.1, "sin": [0, 0.05]}}, "lambda": 1.0},
    ],
)
def test_spec_roundtrip(d):
    spec = M.spec_from_dict(d)
    again = M.spec_from_dict(spec.to_dict())
    y = np.array([0.3, 0.7] + [0.1] * (spec.n - 2))
    x = np.zeros(spec.n)
    assert float(again.F(x, y)) == pytest.approx(float(spec.F(x, y)), rel=1e-14)
    assert float(again.P(x, y)) == pytest.approx(float(spec.P(x, y)), rel=1e-14)


def test_spec_parse_errors():
    for bad in [{}, {"family": "Nope"}, {"family": "RandersShen", "a": [0.1, 0.2], "n": 3}, {"family": "RandersShen"}]:
        with pytest.raises((ValueError, KeyError)):
            M.spec_from_dict(bad)
