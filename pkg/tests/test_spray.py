import numpy as np
import pytest

from finsler_holonomy import metrics as M
from finsler_holonomy import spray as S
from finsler_holonomy.errors import ChartExitError, PointwiseFamilyError

from conftest import ball_points


@pytest.mark.parametrize("spec", [M.klein(2), M.randers_shen([0.3, 0.1], 1), M.randers_shen([0.2, -0.4], -1), M.klein(3)])
def test_projective_and_metric_paths_agree(spec, rng):
    for x, y in ball_points(rng, 4, n=spec.n):
        a = S.geodesic_coefficients(spec, x, y, "projective")
        b = S.geodesic_coefficients(spec, x, y, "metric")
        c = S.geodesic_coefficients(spec, x, y, "projective-derived")
        for u, v in [(a, b), (a, c)]:
            np.testing.assert_allclose(u.G, v.G, atol=1e-11)
            np.testing.assert_allclose(u.Gj, v.Gj, atol=1e-11)
            np.testing.assert_allclose(u.Gjk, v.Gjk, atol=1e-10)


def test_spray_homogeneity(rng):
    spec = M.randers_shen([0.3, 0.1])
    x, y = ball_points(rng, 1)[0]
    a = S.geodesic_coefficients(spec, x, y)
    b = S.geodesic_coefficients(spec, x, 3.0 * y)
    np.testing.assert_allclose(b.G, 9.0 * a.G, rtol=1e-13)
    np.testing.assert_allclose(b.Gj, 3.0 * a.Gj, rtol=1e-13)
    np.testing.assert_allclose(b.Gjk, a.Gjk, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(a.Gj @ y, 2.0 * a.G, atol=1e-14)  # Euler


def test_connection_matrix_batch(rng):
    spec = M.randers_shen([0.3, 0.1], -1)
    x = np.array([0.2, -0.1])
    Y = rng.normal(size=(2, 7))
    C = S.connection_matrix(spec, x, Y)
    for k in range(7):
        np.testing.assert_allclose(C[:, :, k], S.geodesic_coefficients(spec, x, Y[:, k]).Gj, atol=1e-14)


def test_horizontal_lift():
    spec = M.klein(2)
    v, w = S.horizontal_lift(spec, [0.1, 0.2], [1.0, 0.0], [0.0, 1.0])
    assert np.allclose(v, [0, 1])
    assert np.allclose(w, -S.geodesic_coefficients(spec, [0.1, 0.2], [1.0, 0.0]).Gj @ [0.0, 1.0])


def test_euclidean_geodesic_is_line():
    tr = S.geodesic_integrate(M.euclidean(2), [0, 0], [1.0, 2.0], 3.0)
    np.testing.assert_allclose(tr.x[:, -1], [3.0, 6.0], atol=1e-9)


def test_randers_geodesic_straight_and_F_conserved():
    spec = M.randers_shen([0.3, 0.1], 1)
    tr = S.geodesic_integrate(spec, [0.1, -0.2], [0.4, 0.3], 1.0)
    assert S.line_deviation(tr) <= 1e-9
    assert np.max(np.abs(tr.F / tr.F[0] - 1.0)) <= 1e-8


def test_chart_exit():
    spec = M.randers_shen([0.0, 0.0], -1)
    with pytest.raises(ChartExitError) as info:
        S.geodesic_integrate(spec, [0.0, 0.0], [1.0, 0.0], 50.0)
    assert 0 < info.value.exit_time < 50
    assert S.chart_exit_time(spec, [0, 0], [1.0, 0.0], 50.0) == pytest.approx(info.value.exit_time)
    assert S.chart_exit_time(M.klein(2), [0, 0], [0.1, 0.0], 1.0) == float("inf")


def test_pointwise_family_rejects_x_derivatives():
    with pytest.raises(PointwiseFamilyError):
        S.geodesic_coefficients(M.bryant_shen(0.3), [0, 0], [1.0, 0.0], "metric")
    with pytest.raises(PointwiseFamilyError):
        S.geodesic_integrate(M.bryant_shen(0.3), [0, 0], [1.0, 0.0], 1.0)
