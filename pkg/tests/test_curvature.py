import numpy as np
import pytest

from finsler_holonomy import curvature as C
from finsler_holonomy import metrics as M
from finsler_holonomy.errors import PointwiseFamilyError

from conftest import ball_points


def test_euclidean_flat(rng):
    for x, y in ball_points(rng, 3, n=3):
        assert np.max(np.abs(C.riemann_curvature(M.euclidean(3), x, y))) == 0.0


@pytest.mark.parametrize("spec,lam", [(M.klein(2), -1.0), (M.klein(3), -1.0), (M.randers_shen([0.2, 0.1, -0.3], -1), -0.25)])
def test_constant_curvature_sign_convention(spec, lam, rng):
    for x, y in ball_points(rng, 3, n=spec.n):
        res = C.flag_curvature_residual(spec, x, y, lam)
        assert res.residual <= 1e-10 and res.sign == 1


def test_wrong_constant_fails(rng):
    x, y = ball_points(rng, 1)[0]
    assert C.flag_curvature_residual(M.randers_shen([0.3, 0.1]), x, y, -1.0).residual > 1e-2


def test_curvature_paths_agree(rng):
    spec = M.randers_shen([0.3, 0.1], -1)
    x, y = ball_points(rng, 1)[0]
    a = C.riemann_curvature(spec, x, y, "projective")
    b = C.riemann_curvature(spec, x, y, "metric")
    np.testing.assert_allclose(a, b, atol=1e-10)


def test_curvature_antisymmetric(rng):
    x, y = ball_points(rng, 1)[0]
    R = C.riemann_curvature(M.randers_shen([0.3, 0.1]), x, y)
    np.testing.assert_allclose(R, -R.transpose(0, 2, 1), atol=1e-15)


def test_first_covariant_derivative(rng):
    spec = M.randers_shen([0.3, 0.1])
    x, y = ball_points(rng, 1)[0]
    W = np.array([0.4, -1.1])
    xi = C.curvature_vector_field(spec, x, [1.0, 0.0], [0.0, 1.0])
    generic = C.berwald_covariant_derivative(spec, xi, W)(y)
    closed = C.first_covariant_closed_form(spec, x, y, W) * xi(y)
    np.testing.assert_allclose(generic, closed, atol=1e-12)


def test_second_covariant_weight(rng):
    spec = M.klein(2)
    x, y = ball_points(rng, 1)[0]
    good = C.second_covariant_closed_form(spec, x, y, [0.0, 1.0], [1.0, 0.0])
    np.testing.assert_allclose(good.closed, good.generic, atol=1e-10)
    bad = C.second_covariant_closed_form(spec, x, y, [0.0, 1.0], [1.0, 0.0], product_weight=1.0)
    assert np.max(np.abs(bad.closed - bad.generic)) > 1e-3


def test_pointwise_rejected():
    with pytest.raises(PointwiseFamilyError):
        C.riemann_curvature(M.bryant_shen(0.2), [0, 0], [1.0, 0.0])
