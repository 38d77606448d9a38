import numpy as np
import pytest
from scipy.linalg import expm

from spincurve.curves import (GAMMA_1_1, CurvatureProfile, Grid, SampledCurve, constant_profile, curvature_torsion, frenet_frame,
                              gamma_1_1, gamma_1_2, is_convex_arc, is_locally_convex, jacobi_matrix,
                              multiconvex_multiplicity, omega3, omega3_formula, sigma, sigma_curvature,
                              sigma_radius, xi)
from spincurve.errors import ConditionViolation, PreconditionError

S3 = np.sqrt(3.0)


def xi_s3(n=512):
    return xi([0.6, 0.8], [1.0, 3.0], n)


FAMILIES = {
    "sigma_pi": lambda: sigma(np.pi, n=512),
    "sigma_pi_twice": lambda: sigma(np.pi, 2, n=512),
    "sigma_bar": lambda: sigma(np.pi / 2, reflect=True, n=512),
    "xi_s2": lambda: xi([0.6, 0.8], [2.0], 512),
    "xi_s3": xi_s3,
    "gamma11": lambda: gamma_1_1(512),
    "gamma12": lambda: gamma_1_2(512),
    "omega3": lambda: omega3(512),
}


class TestGrid:
    def test_nodes(self):
        g = Grid(16)
        assert len(g) == 17 and g.h == 1 / 16
        assert g.t[0] == 0 and g.t[-1] == 1

    @pytest.mark.parametrize("n", [15, 0, 16.5])
    def test_rejects(self, n):
        with pytest.raises(PreconditionError):
            Grid(n)


class TestSampledCurve:
    def test_off_sphere(self):
        pts = np.tile([1.0, 0.1, 0.0], (17, 1))
        with pytest.raises(PreconditionError):
            SampledCurve(Grid(16), pts)

    def test_wrong_length(self):
        with pytest.raises(PreconditionError):
            SampledCurve(Grid(16), np.tile([1.0, 0, 0], (10, 1)))

    def test_numerical_jet_close_to_exact(self):
        c = sigma(np.pi, n=1024)
        numeric = SampledCurve(c.grid, c.points)
        assert np.max(np.abs(numeric.jet() - c.jet())) < 1e-6


class TestFamilies:
    def test_sigma_radius(self):
        assert sigma_radius(np.pi) == pytest.approx(np.pi / 6)
        assert sigma_curvature(np.pi) == pytest.approx(S3)
        assert sigma_radius(2 * np.pi) == pytest.approx(np.pi / 2)

    @pytest.mark.parametrize("c", [0.0, -1.0, 7.0])
    def test_sigma_rejects(self, c):
        with pytest.raises(PreconditionError):
            sigma(c)

    def test_great_circle(self):
        c = sigma(2 * np.pi, n=64)
        t = c.t
        expect = np.stack([np.cos(2 * np.pi * t), np.sin(2 * np.pi * t), 0 * t], axis=1)
        assert np.max(np.abs(c.points - expect)) < 1e-12

    def test_sigma_closes_with_identity_frame(self):
        F = frenet_frame(sigma(np.pi, n=256)).frames
        assert np.max(np.abs(F[0] - np.eye(3))) < 1e-12
        assert np.max(np.abs(F[-1] - np.eye(3))) < 1e-10

    def test_omega3_points(self):
        c = omega3(n=1024)
        assert np.allclose(c.points[0], [1, 0, 0, 0], atol=1e-12)
        assert np.allclose(c.points[256], [0, 0, 0, 1], atol=1e-12)
        assert np.allclose(omega3_formula(0.25), [0, 0, 0, 1], atol=1e-12)
        assert np.max(np.abs(c.points - omega3_formula(c.t))) < 1e-10

    def test_gamma11_is_matrix_exponential(self):
        Lam = np.pi / 2 * jacobi_matrix([S3, 2.0, S3])
        c = gamma_1_1(128)
        expect = np.stack([expm(t * Lam)[:, 0] for t in c.t])
        assert np.max(np.abs(c.points - expect)) < 1e-12

    @pytest.mark.parametrize("c,a", [([0.6, 0.8], [1.0, 1.0]), ([0.6, 0.7], [1.0, 2.0]),
                                     ([-0.6, 0.8], [1.0, 2.0]), ([1.0], [1.0, 2.0])])
    def test_xi_rejects(self, c, a):
        with pytest.raises(PreconditionError):
            xi(c, a)


class TestFrenet:
    @pytest.mark.parametrize("name", sorted(FAMILIES))
    def test_frame_consistency(self, name):
        curve = FAMILIES[name]()
        fc = frenet_frame(curve)
        F = fc.frames
        eye = np.eye(F.shape[-1])
        assert np.max(np.abs(np.swapaxes(F, 1, 2) @ F - eye)) < 1e-8
        assert np.max(np.abs(np.linalg.det(F) - 1)) < 1e-8
        assert np.max(np.abs(F[:, :, 0] - curve.points)) < 1e-8

    def test_great_circle_frame(self):
        c = sigma(2 * np.pi, n=128)
        F = frenet_frame(c).frames
        a = 2 * np.pi * c.t
        R = np.zeros_like(F)
        R[:, 0, 0] = R[:, 1, 1] = np.cos(a)
        R[:, 1, 0] = np.sin(a)
        R[:, 0, 1] = -np.sin(a)
        R[:, 2, 2] = 1
        assert np.max(np.abs(F - R)) < 1e-10

    def test_constant_lambda_frame(self):
        Lam = jacobi_matrix([1.0, 2.0, 0.5])
        from spincurve.curves import jacobi_curve
        c = jacobi_curve([1.0, 2.0, 0.5], n=1024)
        F = frenet_frame(c).frames
        err = max(np.max(np.abs(F[i] - expm(t * Lam))) for i, t in enumerate(c.t))
        assert err < 1e-6
        assert np.allclose(F[0], np.eye(4), atol=1e-12)

    def test_lift_continuous_from_one(self):
        fc = frenet_frame(gamma_1_1(1024))
        assert np.allclose(fc.lift[0], [[1, 0, 0, 0], [1, 0, 0, 0]])
        zl, zr = fc.final_lift().left, fc.final_lift().right
        assert np.allclose(zl, [-1, 0, 0, 0], atol=1e-6)
        assert np.allclose(zr, [0, 0, 0, 1], atol=1e-6)

    def test_degenerate_point_reported(self):
        # great circle on S^3 has vanishing geodesic curvature
        g = Grid(64)
        t = g.t
        pts = np.stack([np.cos(t), np.sin(t), 0 * t, 0 * t], axis=1)
        with pytest.raises(ConditionViolation) as info:
            frenet_frame(SampledCurve(g, pts))
        assert info.value.t is not None


class TestCurvatureTorsion:
    @pytest.mark.parametrize("c", [np.pi / 2, np.pi, 3 * np.pi / 2])
    def test_sigma(self, c):
        p = curvature_torsion(sigma(c, n=256))
        rho = sigma_radius(c)
        assert np.max(np.abs(p.v - c)) < 1e-8
        assert np.max(np.abs(p.kappa - 1 / np.tan(rho))) < 1e-8

    def test_great_circle_kappa_zero(self):
        p = curvature_torsion(sigma(2 * np.pi, n=128))
        assert np.max(np.abs(p.kappa)) < 1e-10

    def test_reflected_circle_negative(self):
        p = curvature_torsion(sigma(np.pi, reflect=True, n=128))
        assert np.allclose(p.kappa, -S3)

    def test_xi_torsion_positive(self):
        p = curvature_torsion(xi_s3())
        assert np.all(p.tau > 0) and np.all(p.kappa > 0)

    def test_gamma11_profile(self):
        p = curvature_torsion(gamma_1_1(256))
        assert np.allclose(p.v, GAMMA_1_1[0]) and np.allclose(p.kappa, GAMMA_1_1[1])
        assert np.allclose(p.tau, GAMMA_1_1[2])

    def test_numerical_derivatives_s3(self):
        c = xi_s3(1024)
        p_exact = curvature_torsion(c)
        p_num = curvature_torsion(SampledCurve(c.grid, c.points))
        assert np.max(np.abs(p_num.tau - p_exact.tau)) < 1e-4


class TestConvexity:
    def test_locally_convex_examples(self):
        assert is_locally_convex(sigma(np.pi, n=128)).ok
        assert is_locally_convex(gamma_1_1(256)).ok
        assert is_locally_convex(xi_s3()).ok
        w = is_locally_convex(sigma(2 * np.pi, n=128))
        assert not w.ok and w.t == 0.0

    def test_locally_convex_profile(self):
        p = CurvatureProfile(Grid(64), 1.0, np.where(np.linspace(0, 1, 65) < 0.5, 1.0, -1.0))
        w = is_locally_convex(p)
        assert not w.ok and w.t == pytest.approx(0.5)
        assert is_locally_convex(constant_profile(1.0, 1.0, 1.0, n=64)).ok

    def test_reflected_circle_not_convex(self):
        assert not is_locally_convex(sigma(np.pi, reflect=True, n=128)).ok

    @pytest.mark.parametrize("c", [np.pi / 2, np.pi, 3 * np.pi / 2])
    def test_convex_arc_circles(self, c):
        assert is_convex_arc(sigma(c, n=512), trials=10_000, seed=1)
        assert not is_convex_arc(sigma(c, 2, n=512), trials=10_000, seed=1)

    def test_convex_arc_gamma11(self):
        assert is_convex_arc(gamma_1_1(512), trials=10_000, seed=2)

    def test_convex_arc_omega3_fails(self):
        assert not is_convex_arc(omega3(512), trials=2000, seed=3)

    def test_convex_arc_dense_oracle(self):
        # a small circle meets every great circle at most twice
        c = sigma(np.pi, n=4096)
        rng = np.random.default_rng(0)
        v = rng.normal(size=(500, 3))
        s = np.sign(c.points @ v.T)
        assert np.max(np.sum(s[1:] != s[:-1], axis=0)) <= 2


class TestMulticonvex:
    def test_single_loop(self):
        m = multiconvex_multiplicity(sigma(np.pi, n=512), trials=2000, seed=0)
        assert m.k == 1 and m.times == ()

    def test_double_loop(self):
        m = multiconvex_multiplicity(sigma(np.pi, 2, n=512), trials=2000, seed=0)
        assert m.k == 2
        assert m.times == pytest.approx((0.5,), abs=1e-9)

    def test_triple_loop_off_grid(self):
        m = multiconvex_multiplicity(sigma(np.pi / 2, 3, n=500), trials=2000, seed=0)
        assert m.k == 3
        assert m.times == pytest.approx((1 / 3, 2 / 3), abs=1e-6)

    def test_open_arc(self):
        assert multiconvex_multiplicity(sigma(np.pi, 0.7, n=256), trials=500, seed=0) is None

    def test_rejects_s3(self):
        with pytest.raises(PreconditionError):
            multiconvex_multiplicity(gamma_1_1(64))
