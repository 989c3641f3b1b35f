"""Acceptance criteria 1-10; each test prints one PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from finsler_holonomy import curvature as C
from finsler_holonomy import diffengine as D
from finsler_holonomy import independence as I
from finsler_holonomy import metrics as M
from finsler_holonomy import spray as S
from finsler_holonomy import submanifold as SM
from finsler_holonomy import taylor as tj
from finsler_holonomy import transport as T
from finsler_holonomy.cli import main as cli_main
from finsler_holonomy.profile import fourier_profile, lemma_expr_values, profile_from_function

from conftest import ball_points

RANDERS_CASES = [(a, s) for a in ([0.0, 0.0], [0.3, 0.1]) for s in (1, -1)]


@pytest.fixture
def report(capsys):
    def _report(k, checks):
        ok = all(c[1] for c in checks)
        detail = "; ".join(f"{name} {'ok' if passed else 'FAIL'} ({value})" for name, passed, value in checks)
        with capsys.disabled():
            print(f"\nACCEPTANCE {k:2d}: {'PASS' if ok else 'FAIL'} | {detail}")
        assert ok, detail

    return _report


def test_acceptance_01_flag_curvature(report):
    t0 = time.perf_counter()
    worst = 0.0
    signs = set()
    for i, (a, s) in enumerate(RANDERS_CASES):
        spec = M.randers_shen(a, s)
        for x, y in ball_points(np.random.default_rng(100 + i), 100, radius=0.8):
            r = C.flag_curvature_residual(spec, x, y, -0.25)
            worst = max(worst, r.residual)
            signs.add(r.sign)
    elapsed = time.perf_counter() - t0
    report(1, [("max residual <= 1e-6", worst <= 1e-6, f"{worst:.2e}"),
               ("single sign order", signs == {1}, sorted(signs)),
               ("runtime <= 10 s", elapsed <= 10.0, f"{elapsed:.2f} s")])


def test_acceptance_02_projective_factor_identity(report):
    worst = 0.0
    for s in (1, -1):
        spec = M.randers_shen([0.3, 0.1], s)
        for x, y in ball_points(np.random.default_rng(200 + s), 100, radius=0.8):
            closed = M.projective_factor(spec, x, y, "closed")
            derived = M.projective_factor(spec, x, y, "derived")
            worst = max(worst, abs(closed - derived) / max(abs(closed), 1e-300) if abs(closed) > 1e-12 else abs(derived))
    report(2, [("relative gap <= 1e-8", worst <= 1e-8, f"{worst:.2e}")])


def test_acceptance_03_straight_geodesics(report):
    rng = np.random.default_rng(300)
    worst = 0.0
    count = 0
    for a, s in RANDERS_CASES:
        spec = M.randers_shen(a, s)
        for x, y in ball_points(rng, 5, radius=0.5):
            tr = S.geodesic_integrate(spec, x, y, 2.0, allow_exit=True)
            worst = max(worst, S.line_deviation(tr))
            count += 1
    report(3, [(f"chord deviation <= 1e-6 over {count} geodesics", worst <= 1e-6, f"{worst:.2e}")])


def test_acceptance_04_transport(report):
    loop = T.square_loop([0.0, 0.0], 0.3)
    drift = homog = 0.0
    defects = {}
    for a, s in RANDERS_CASES:
        spec = M.randers_shen(a, s)
        h = T.loop_holonomy(spec, loop, 64)
        drift = max(drift, h.F_drift)
        Y = h.inputs[:, :8]
        t1 = T.parallel_transport(spec, loop, Y).y_end
        t2 = T.parallel_transport(spec, loop, 2.0 * Y).y_end
        homog = max(homog, float(np.max(np.abs(t2 - 2.0 * t1)) / np.max(np.abs(2.0 * t1))))
        if a == [0.0, 0.0]:
            defects[f"RandersShen{s:+d}"] = T.nonlinearity_defect(h)
    lin = max(T.nonlinearity_defect(T.loop_holonomy(spec, loop, 64)) for spec in (M.euclidean(2), M.klein(2)))
    klein_off = T.nonlinearity_defect(T.loop_holonomy(M.klein(2), T.square_loop([0.1, -0.2], 0.3), 64))
    rand = min(defects.values())
    report(4, [("F-drift <= 1e-7", drift <= 1e-7, f"{drift:.2e}"),
               ("homogeneity <= 1e-8", homog <= 1e-8, f"{homog:.2e}"),
               ("Euclidean/Klein defect <= 1e-7", max(lin, klein_off) <= 1e-7, f"{max(lin, klein_off):.2e}"),
               ("RandersShen a=0 defect > 1e-4", rand > 1e-4, f"{rand:.2e}")])


def test_acceptance_05_nabla_R(report):
    rng = np.random.default_rng(500)
    worst = 0.0
    for spec in (M.randers_shen([0.3, 0.1], 1), M.randers_shen([0.3, 0.1], -1), M.klein(2)):
        for x, y in ball_points(rng, 30, radius=0.7):
            worst = max(worst, C.nabla_R_residual(spec, x, y, rng.normal(size=2)))
    report(5, [("max |nabla_W R| <= 1e-6", worst <= 1e-6, f"{worst:.2e}")])


def test_acceptance_06_covariant_closed_forms(report):
    rng = np.random.default_rng(600)
    first = second = ident = printed = 0.0
    for spec, lam in ((M.randers_shen([0.3, 0.1], 1), -0.25), (M.randers_shen([0.3, 0.1], -1), -0.25), (M.klein(2), -1.0)):
        for x, y in ball_points(rng, 5, radius=0.6):
            W, Z = rng.normal(size=2), rng.normal(size=2)
            xi = C.curvature_vector_field(spec, x, [1.0, 0.0], [0.0, 1.0])
            g1 = C.berwald_covariant_derivative(spec, xi, W)(y)
            first = max(first, float(np.max(np.abs(g1 - C.first_covariant_closed_form(spec, x, y, W) * xi(y)))))
            cmp = C.second_covariant_closed_form(spec, x, y, W, Z)
            second = max(second, float(np.max(np.abs(cmp.closed - cmp.generic))))
            bad = C.second_covariant_closed_form(spec, x, y, W, Z, product_weight=1.0)
            printed = max(printed, float(np.max(np.abs(bad.closed - bad.generic))))
            ident = max(ident, C.projective_identity_residual(spec, x, y, lam))
    report(6, [("first derivative <= 1e-6", first <= 1e-6, f"{first:.2e}"),
               ("second derivative <= 1e-6", second <= 1e-6, f"{second:.2e}"),
               ("projective identity <= 1e-6", ident <= 1e-6, f"{ident:.2e}"),
               ("unit product weight disagrees", printed > 1e-3, f"{printed:.2e}")])


PROFILES = [
    fourier_profile(0.0),
    fourier_profile(0.0, sin=[0.0, 0.1]),
    fourier_profile(0.0, sin=[0.1]),
    fourier_profile(0.2, cos=[0.1], sin=[0.0, 0.0, -0.05]),
    profile_from_function(lambda y: tj.norm(y) + 0.3 * y[0], "randers"),
]


def test_acceptance_07_polar_derivatives(report):
    t = 2.0 * np.pi * np.arange(64) / 64
    direct = flipped = 0.0
    order = D.OrderProfile(y=2, x=0, xy=0)
    for prof in PROFILES:
        phi = prof.function()
        ours = np.array(lemma_expr_values(prof, t))
        wrong = np.array(lemma_expr_values(prof, t, sign="flipped"))
        oracle = np.empty_like(ours)
        for k, tk in enumerate(t):
            J = D.lift_eval(lambda x, y: phi(y), np.zeros(2), np.array([math.cos(tk), math.sin(tk)]), order)
            oracle[:, k] = [J.dy[0], J.dy[1], J.value * J.dyy[0, 1]]
        direct = max(direct, float(np.max(np.abs(ours - oracle))))
        flipped = max(flipped, float(np.max(np.abs(wrong - oracle))))
    report(7, [("direct sign <= 1e-8 (64 angles x 5 profiles)", direct <= 1e-8, f"{direct:.2e}"),
               ("flipped sign fails by O(1)", flipped > 0.1, f"{flipped:.2e}")])


def test_acceptance_08_rank_certificates(report):
    trig = [I.sample(lambda t: 1.0 + 0 * t), I.sample(np.cos), I.sample(np.sin), I.sample(lambda t: np.cos(t) * np.sin(t))]
    g = I.gram_rank(trig)
    A = np.array([s.values for s in trig])
    gram = A @ A.T / A.shape[1]
    diag_err = float(np.max(np.abs(gram - np.diag([1.0, 0.5, 0.5, 0.125]))))
    dep = [I.sample(lambda t: 1.0 + 0 * t), I.sample(np.cos), I.sample(np.sin), I.sample(lambda t: 2.0 + 3.0 * np.cos(t))]
    dep_rank = I.gram_rank(dep).rank
    repC = I.certify(M.randers_shen([0.3, 0.1], 1), "C", lam=-0.25)
    trigC = I.gram_rank(I.independence_quadruple_C([0.3, 0.1], -0.25))
    repB = I.certify(M.bryant_shen(math.pi / 6), "B", lam=1.0)
    control = I.gram_rank(I.independence_quadruple_C([0.0, 0.0], 1.0))
    control2 = I.gram_rank(I.independence_quadruple_C([0.0, 0.0], 1.0, N=512))
    report(8, [("trig Gram = diag(1,1/2,1/2,1/8)", diag_err <= 1e-3 and g.rank == 4, f"{diag_err:.1e}, rank {g.rank}"),
               ("exact dependency rank <= 3", dep_rank <= 3, dep_rank),
               ("condition C certified, gap > 1e-3", repC.certified and repC.rel_gap > 1e-3 and trigC.rel_gap > 1e-3,
                f"{repC.rel_gap:.3e} / trig {trigC.rel_gap:.3e}"),
               ("condition B certified, gap > 1e-3", repB.certified and repB.rel_gap > 1e-3, f"{repB.rel_gap:.3e}"),
               ("a=0, lambda=1 control rank 3", control.rank == 3 and control2.rank == 3, control.rank),
               ("N -> 2N stable", repC.grid["doubled_N_consistent"] and repB.grid["doubled_N_consistent"], True)])


def test_acceptance_09_submanifold(report):
    rng = np.random.default_rng(900)
    parent = M.randers_shen([0.2, 0.1, 0.0])
    res = SM.restrict(parent, (0, 1))
    transversal = ext = ktrans = 0.0
    for k in range(50):
        xb, yb = rng.uniform(-0.4, 0.4, 2), rng.normal(size=2)
        transversal = max(transversal, SM.transversal_geodesic_coefficients(res, xb, yb))
        if k < 20:
            X, Y = rng.normal(size=2), rng.normal(size=2)
            ext = max(ext, SM.curvature_extension_check(res, xb, yb, X, Y))
            ktrans = max(ktrans, SM.transversal_curvature(res, xb, yb, X, Y))
    # a tilted plane, so that no component vanishes identically
    E = np.linalg.qr(rng.normal(size=(3, 2)))[0]
    tilted = SM.restrict(M.randers_shen([0.2, 0.1, 0.3]), E)
    for _ in range(10):
        xb, yb, X, Y = rng.uniform(-0.4, 0.4, 2), rng.normal(size=2), rng.normal(size=2), rng.normal(size=2)
        transversal = max(transversal, SM.transversal_geodesic_coefficients(tilted, xb, yb))
        ext = max(ext, SM.curvature_extension_check(tilted, xb, yb, X, Y))
        ktrans = max(ktrans, SM.transversal_curvature(tilted, xb, yb, X, Y))
    plane = SM.certify_via_plane(M.randers_shen([0.3, 0.1, 0.0]), (0, 1), "C")
    flat = I.certify(M.randers_shen([0.3, 0.1]), "C")
    same = plane.verdict == flat.verdict and plane.rank == flat.rank and abs(plane.rel_gap - flat.rel_gap) <= 1e-12
    report(9, [("transversal G <= 1e-10", transversal <= 1e-10, f"{transversal:.1e}"),
               ("curvature extension <= 1e-7", ext <= 1e-7, f"{ext:.1e}"),
               ("transversal curvature <= 1e-8", ktrans <= 1e-8, f"{ktrans:.1e}"),
               ("plane verdict = 2D verdict", same and plane.certified, plane.verdict)])


def test_acceptance_10_determinism(report, tmp_path):
    m = tmp_path / "randers.json"
    m.write_text('{"family": "RandersShen", "a": [0.3, 0.1], "sign": 1}')
    outs = []
    codes = []
    for k in range(3):
        out = tmp_path / f"r{k}.json"
        codes.append(cli_main(["certify", "--condition", "C", "--metric", str(m), "--seed", "42", "--out", str(out)]))
        outs.append(out.read_bytes())
    identical = all(o == outs[0] for o in outs)
    report(10, [("byte-identical reports", identical, f"{len(outs)} runs"), ("exit code 0", codes == [0, 0, 0], codes)])
