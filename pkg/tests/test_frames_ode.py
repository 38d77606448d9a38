import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from spincurve.curves import (GAMMA_1_1, GAMMA_1_2, OMEGA3, CurvatureProfile, Grid, constant_profile,
                              curvature_torsion, frenet_frame, gamma_1_1, jacobi_matrix, omega3_formula, sigma,
                              sigma_profile)
from spincurve.errors import PreconditionError
from spincurve.frames_ode import (curve_from_profile, in_j_tilde, in_q_tilde, integrate_frame, integrate_spin3,
                                  integrate_spin4, is_jacobi, is_quasi_jacobi, log_derivative, profile_lambda,
                                  spin_endpoint)
from spincurve.spin_algebra import ONE, K, dpi3, dpi4, exp_im, pi3, pi4

S3 = np.sqrt(3.0)
LAM_11 = np.pi / 2 * jacobi_matrix([S3, 2.0, S3])
LAM_12 = np.pi * jacobi_matrix([S3, 2.0, S3])
LAM_W3 = np.pi / 2 * jacobi_matrix([4 * S3, 8.0, 4 * S3])


def max_err(frames, Lam, t):
    return max(np.max(np.abs(frames[i] - expm(s * Lam))) for i, s in enumerate(t))


class TestMembership:
    def test_jacobi(self):
        assert is_jacobi(jacobi_matrix([1.0, 2.0, 3.0]))
        assert not is_jacobi(jacobi_matrix([1.0, -2.0, 3.0]))
        assert is_quasi_jacobi(jacobi_matrix([1.0, 2.0, -3.0]))
        assert not is_quasi_jacobi(jacobi_matrix([-1.0, 2.0, 3.0]))
        M = jacobi_matrix([1.0, 2.0, 3.0])
        M[0, 2] = 0.1
        assert not is_jacobi(M) and not is_quasi_jacobi(M)

    def test_not_skew(self):
        M = jacobi_matrix([1.0, 1.0])
        M[0, 1] = 2.0
        assert not is_jacobi(M)

    def test_tilde_sets(self):
        hl, hr = [1.0, 0, 0.5], [-0.5, 0, 0.5]
        assert in_q_tilde(hl, hr) and in_j_tilde(hl, hr)
        hr = [-1.5, 0, 0.5]
        assert in_q_tilde(hl, hr) and not in_j_tilde(hl, hr)
        assert not in_q_tilde([1.0, 0, 0.5], [0.0, 0, 0.4])
        assert not in_q_tilde([1.0, 0, -0.5], [0.0, 0, -0.5])
        assert not in_q_tilde([1.0, 0.1, 0.5], [0.0, 0, 0.5])


class TestLogDerivative:
    def test_constant_exponential(self):
        g = Grid(256)
        F = np.stack([expm(t * LAM_11) for t in g.t])
        L = log_derivative(F)
        assert np.max(np.abs(L - LAM_11)) < 1e-6

    def test_identity(self):
        F = np.tile(np.eye(3), (65, 1, 1))
        assert np.max(np.abs(log_derivative(F))) < 1e-12

    def test_sigma_frame(self):
        c = np.pi
        L = log_derivative(frenet_frame(sigma(c, n=512)))
        expect = jacobi_matrix([c, c * S3])
        assert np.max(np.abs(L - expect)) < 1e-6

    def test_rejects_non_orthogonal(self):
        with pytest.raises(PreconditionError):
            log_derivative(np.tile(2 * np.eye(3), (65, 1, 1)))


class TestIntegrateFrame:
    def test_zero(self):
        fc = integrate_frame(np.zeros((65, 4, 4)))
        assert np.max(np.abs(fc.frames - np.eye(4))) == 0
        assert np.allclose(fc.lift[:, 0], ONE) and np.allclose(fc.lift[:, 1], ONE)

    @pytest.mark.parametrize("Lam", [LAM_11, LAM_12, jacobi_matrix([2.0, 3.0])])
    def test_constant_vs_expm(self, Lam):
        g = Grid(1024)
        fc = integrate_frame(np.broadcast_to(Lam, (len(g),) + Lam.shape), g)
        assert max_err(fc.frames, Lam, g.t) < 1e-8
        orth = np.swapaxes(fc.frames, 1, 2) @ fc.frames - np.eye(len(Lam))
        assert np.max(np.abs(orth)) < 1e-8

    def test_gamma12_endpoint(self):
        fc = integrate_frame(lambda t: np.broadcast_to(LAM_12, np.shape(t) + (4, 4)), 1024)
        # the lift (1, -1) covers x -> -x
        assert np.max(np.abs(fc.frames[-1] + np.eye(4))) < 1e-8
        z = fc.final_lift()
        assert np.allclose(z.left, ONE, atol=1e-6) and np.allclose(z.right, -ONE, atol=1e-6)

    def test_gamma11_endpoint(self):
        z = integrate_frame(lambda t: np.broadcast_to(LAM_11, np.shape(t) + (4, 4)), 1024).final_lift()
        assert np.allclose(z.left, -ONE, atol=1e-6) and np.allclose(z.right, K, atol=1e-6)

    def test_omega3_matches_formula(self):
        fc = integrate_frame(lambda t: np.broadcast_to(LAM_W3, np.shape(t) + (4, 4)), 1024)
        assert np.max(np.abs(fc.frames[:, :, 0] - omega3_formula(fc.t))) < 1e-6
        z = fc.final_lift()
        assert np.allclose(z.left, ONE, atol=1e-6) and np.allclose(z.right, ONE, atol=1e-6)

    def test_lift_projects_to_frames(self):
        Lam = lambda t: jacobi_matrix(np.stack([1 + 0 * t, 2 + np.sin(3 * t), np.cos(t)], -1))
        fc = integrate_frame(Lam, 256)
        proj = np.stack([pi4(z[0], z[1]) for z in fc.lift])
        assert np.max(np.abs(proj - fc.frames)) < 1e-8

    def test_left_invariance(self, rng):
        from spincurve.bruhat import random_so
        Q = random_so(4, rng)
        Lam = lambda t: jacobi_matrix(np.stack([1 + t, 2 + np.sin(3 * t), np.cos(t)], -1))
        a = integrate_frame(Lam, 256).frames
        b = integrate_frame(Lam, 256, initial=Q).frames
        assert np.max(np.abs(b - Q @ a)) < 1e-8

    def test_recovers_lambda(self):
        Lam = lambda t: jacobi_matrix(np.stack([1 + t, 2 + np.sin(3 * t)], -1))
        fc = integrate_frame(Lam, 512)
        assert np.max(np.abs(log_derivative(fc) - Lam(fc.t))) < 1e-5

    def test_order_four(self):
        Lam = lambda t: jacobi_matrix(np.stack([1 + t, 2 + np.sin(3 * t), np.cos(2 * t)], -1))
        ends = [integrate_frame(Lam, n).frames[-1] for n in (64, 128, 256)]
        e1 = np.max(np.abs(ends[0] - ends[1]))
        e2 = np.max(np.abs(ends[1] - ends[2]))
        assert 12 < e1 / e2 < 20

    def test_samples_with_breakpoint(self):
        g = Grid(256)
        sub = np.where(g.t < 0.3, 1.0, 2.0)
        Lam = jacobi_matrix(np.stack([sub, 1 + 0 * sub], -1))
        fc = integrate_frame(Lam, g, breakpoints=(0.3,))
        A, B = jacobi_matrix([1.0, 1.0]), jacobi_matrix([2.0, 1.0])
        assert np.max(np.abs(fc.frames[-1] - expm(0.3 * A) @ expm(0.7 * B))) < 1e-8

    def test_rejects_size(self):
        with pytest.raises(PreconditionError):
            integrate_frame(np.zeros((17, 5, 5)))


class TestIntegrateSpin:
    def test_zero(self):
        q = integrate_spin3(np.zeros((33, 3)))
        assert np.all(q == ONE)

    @given(st.lists(st.floats(-3, 3), min_size=3, max_size=3))
    def test_constant_is_exponential(self, h0):
        g = Grid(256)
        q = integrate_spin3(np.broadcast_to(h0, (257, 3)), g)
        assert np.max(np.abs(q - exp_im(np.array(h0), g.t))) < 1e-8
        assert np.max(np.abs(np.linalg.norm(q, axis=1) - 1)) < 1e-10

    def test_half_turn(self):
        h0 = np.array([S3 * np.pi / 2, 0, np.pi / 2])
        q = integrate_spin3(np.broadcast_to(h0, (1025, 3)))
        assert np.allclose(q[-1], -ONE, atol=1e-8)

    def test_compatibility_with_frames(self):
        hl = lambda t: np.stack([1 + t, 0 * t, np.cos(t)], -1)
        hr = lambda t: np.stack([np.sin(2 * t), 0.3 + 0 * t, np.cos(t)], -1)
        z = integrate_spin4(hl, hr, 256)
        F = integrate_frame(lambda t: dpi4(hl(t), hr(t)), 256).frames
        proj = np.stack([pi4(a, b) for a, b in z])
        assert np.max(np.abs(proj - F)) < 1e-6

    def test_compatibility_s3(self):
        h = lambda t: np.stack([1 + t, np.sin(t), np.cos(t)], -1)
        q = integrate_spin3(h, 256)
        F = integrate_frame(lambda t: dpi3(h(t)), 256).frames
        proj = np.stack([pi3(x) for x in q])
        assert np.max(np.abs(proj - F)) < 1e-6

    def test_endpoint_matches_path(self):
        h = lambda t: np.stack([1 + t, np.sin(5 * t), np.cos(t)], -1)
        q = integrate_spin3(h, 512, breakpoints=(0.25,))
        e = spin_endpoint(h, Grid(512), (0.25,))
        assert np.max(np.abs(q[-1] - e)) < 1e-12

    def test_endpoint_breakpoint_on_node_fine_grid(self):
        # a breakpoint sitting on a node of a very fine grid must not leak the next piece into the last stage
        bp = 0.5
        h = lambda t: np.where((t < bp)[..., None], [0.0, 0.0, np.pi], [0.0, 0.0, 0.0])
        e = spin_endpoint(h, Grid(2 ** 16), (bp,))
        assert np.allclose(e, exp_im(np.array([0.0, 0.0, np.pi]), bp), atol=1e-12)


class TestCurveFromProfile:
    @pytest.mark.parametrize("c", [np.pi / 2, np.pi, 2 * np.pi])
    def test_sigma(self, c):
        curve, _ = curve_from_profile(sigma_profile(c, n=512))
        assert np.max(np.abs(curve.points - sigma(c, n=512).points)) < 1e-8

    def test_gamma11_final_frame(self):
        _, frames = curve_from_profile(constant_profile(*GAMMA_1_1, n=1024))
        z = frames.final_lift()
        assert np.allclose(z.left, -ONE, atol=1e-6) and np.allclose(z.right, K, atol=1e-6)

    def test_gamma12_final_frame(self):
        _, frames = curve_from_profile(constant_profile(*GAMMA_1_2, n=1024))
        z = frames.final_lift()
        assert np.allclose(z.left, ONE, atol=1e-6) and np.allclose(z.right, -ONE, atol=1e-6)

    def test_omega3_coordinates(self):
        curve, _ = curve_from_profile(constant_profile(*OMEGA3, n=1024))
        assert np.max(np.abs(curve.points - omega3_formula(curve.t))) < 1e-6

    def test_round_trip_variable(self):
        g = Grid(1024)
        t = g.t
        p = CurvatureProfile(g, 2 + np.sin(2 * np.pi * t), 1.5 + 0.5 * np.cos(3 * t), 0.5 + t ** 2)
        curve, _ = curve_from_profile(p)
        q = curvature_torsion(curve)
        for a, b in zip(p.arrays(), q.arrays()):
            assert np.max(np.abs(a - b)) < 1e-4

    def test_profile_lambda(self):
        L = profile_lambda(constant_profile(*GAMMA_1_1, n=64))(np.array([0.2, 0.7]))
        assert np.allclose(L, LAM_11)

    def test_rejects(self):
        with pytest.raises(PreconditionError):
            curve_from_profile(constant_profile(1.0, 0.0, 1.0, n=64))
        with pytest.raises(PreconditionError):
            curve_from_profile(gamma_1_1(64))
