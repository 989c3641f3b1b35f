import numpy as np
import pytest

from finsler_holonomy import metrics as M
from finsler_holonomy import spray as S
from finsler_holonomy import submanifold as SM
from finsler_holonomy import transport as T
from finsler_holonomy.errors import UnsupportedFrameError
from finsler_holonomy.independence import VERDICT_CERTIFIED, VERDICT_VIOLATION


def test_randers_restriction_is_2d_randers():
    res = SM.restrict(M.randers_shen([0.2, 0.1, 0.0], -1), (0, 1))
    assert res.restricted.family == "RandersShen"
    assert res.restricted.a == (0.2, 0.1) and res.restricted.sign == -1


def test_restricted_F_equals_parent(rng):
    parent = M.randers_shen([0.2, 0.1, 0.3])
    E = np.linalg.qr(rng.normal(size=(3, 2)))[0]
    for plane in [(0, 2), E]:
        res = SM.restrict(parent, plane)
        for _ in range(5):
            xb, yb = rng.uniform(-0.3, 0.3, 2), rng.normal(size=2)
            assert float(res.restricted.F(xb, yb)) == pytest.approx(float(parent.F(res.embed(xb), res.embed(yb))), rel=1e-14)
            assert float(res.restricted.P(xb, yb)) == pytest.approx(float(parent.P(res.embed(xb), res.embed(yb))), rel=1e-13, abs=1e-15)


def test_euclidean_and_pointwise_restrictions():
    assert SM.restrict(M.euclidean(3), (1, 2)).restricted.family == "Euclidean"
    res = SM.restrict(M.bryant_shen(0.4, 3), (0, 1))
    assert res.restricted.n == 2 and res.restricted.alpha == 0.4
    F0 = M.NormLinear(1.0, (0.1, 0.0, 0.2))
    res = SM.restrict(M.custom_pointwise(F0, M.NormLinear(0.5), 3, 1.0), (0, 2))
    y = np.array([0.3, 0.4])
    assert float(res.restricted.F(np.zeros(2), y)) == pytest.approx(0.5 + 0.03 + 0.08)


def test_unsupported_frame():
    with pytest.raises(UnsupportedFrameError):
        SM.restrict(M.klein(3), np.array([[1.0, 1.0], [0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        SM.restrict(M.klein(3), (1, 1))


def test_restricted_geodesics_and_transport_agree():
    parent = M.randers_shen([0.2, 0.1, 0.0])
    res = SM.restrict(parent, (0, 1))
    xb, yb = np.array([0.1, -0.1]), np.array([0.5, 0.3])
    a = S.geodesic_integrate(res.restricted, xb, yb, 1.0)
    b = S.geodesic_integrate(parent, res.embed(xb), res.embed(yb), 1.0)
    assert np.max(np.abs(res.embed(a.x) - b.x)) <= 1e-7
    loop2 = T.square_loop(xb, 0.2)
    loop3 = T.square_loop(res.embed(xb), 0.2)
    u = T.parallel_transport(res.restricted, loop2, yb).y_end
    v = T.parallel_transport(parent, loop3, res.embed(yb)).y_end
    assert np.max(np.abs(res.embed(u) - v)) <= 1e-8


def test_certify_via_plane_verdicts():
    assert SM.certify_via_plane(M.euclidean(3), (0, 1), "B").verdict == VERDICT_VIOLATION
    assert SM.certify_via_plane(M.bryant_shen(np.pi / 6, 3), (0, 1), "B").verdict == VERDICT_CERTIFIED
