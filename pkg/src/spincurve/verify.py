"""Numerical verification suites, shared by ``spincurve check`` and the test-suite.

Each suite returns a :class:`SuiteResult`; ``SUITES`` maps the criterion number
to ``(name, function)``.
"""

import inspect
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .bruhat import (SignedPermutation, cell_representative, classify_so, classify_spin,
                     enumerate_b_plus, inv_count, random_so, random_up_plus, rho,
                     up_plus_action)
from .curves import (GAMMA_1_1, GAMMA_1_2, OMEGA3, CurvatureProfile, Grid, is_convex_arc,
                     is_locally_convex, jacobi_matrix, multiconvex_multiplicity, omega3_formula,
                     omega3_profile, sigma, sigma_profile)
from .decompose import CurvePair, check_condition, compose3, decompose3
from .frames_ode import curve_from_profile, integrate_frame, log_derivative, profile_lambda
from .spin_algebra import I, J, K, ONE, Spin4, pi3, pi4, quat_conj, quat_mul
from .surgery import (RRParams, SurgerySpec, add_loops, final_spin, hat_pair, relaxed_test_columns,
                      relaxed_test_frame, tangent_circles, relax_reflect, sharp)

RELAXED_CELL = SignedPermutation((3, 2, 1, 0), (1, -1, 1, -1))


@dataclass
class SuiteResult:
    name: str
    ok: bool
    details: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def line(self):
        status = "PASS" if self.ok else "FAIL"
        info = ", ".join(f"{k}={_fmt(v)}" for k, v in self.details.items())
        return f"[{status}] {self.name} ({self.elapsed:.2f}s) {info}"


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{v:.3g}"
    return str(v)


def _timed(name, fn, *args, **kw):
    t0 = time.perf_counter()
    ok, details = fn(*args, **kw)
    return SuiteResult(name, bool(ok), details, time.perf_counter() - t0)


# -- random inputs --------------------------------------------------------------

def _smooth_positive(rng, base, amp, terms=3):
    """Exact law ``t -> base * exp(sum a_k sin(2 pi k t + phi_k))``."""
    a = rng.uniform(-amp, amp, terms) / np.arange(1, terms + 1)
    phi = rng.uniform(0, 2 * np.pi, terms)
    k = np.arange(1, terms + 1)

    def f(t):
        t = np.asarray(t, dtype=float)
        return base * np.exp(np.sum(a * np.sin(2 * np.pi * k * t[..., None] + phi), axis=-1))
    return f


def random_profile(rng, dim=3, n=1024, convex=True):
    """Random smooth profile with an exact law; locally convex when ``convex``."""
    fv = _smooth_positive(rng, rng.uniform(2.0, 6.0), 0.4)
    fk = _smooth_positive(rng, rng.uniform(0.5, 2.0), 0.5)
    if dim == 2:
        def law(t):
            return fv(t), fk(t)
    else:
        ft = _smooth_positive(rng, rng.uniform(0.5, 2.0), 0.5)
        shift = 0.0 if convex else rng.uniform(0.5, 2.5)

        def law(t):
            return fv(t), fk(t), ft(t) - shift
    grid = Grid(n)
    return CurvatureProfile(grid, *law(grid.t), law=law, meta={"family": "random"})


def random_pair(rng, n=1024):
    """Random pair with a shared speed satisfying condition (G)."""
    fv = _smooth_positive(rng, rng.uniform(2.0, 6.0), 0.4)
    fr = _smooth_positive(rng, 1.0, 0.5)
    fg = _smooth_positive(rng, rng.uniform(0.3, 2.0), 0.5)

    def law(t):
        kr = fr(t) - 1.3
        return fv(t), kr + fg(t), kr
    grid = Grid(n)
    return CurvePair(grid, *law(grid.t), law=law)


# -- 1: covering maps ---------------------------------------------------------------

def _unit(rng, size):
    q = rng.normal(size=(size, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def _conj_oracle3(z):
    basis = np.stack([I, J, K])
    cols = quat_mul(quat_mul(z[:, None, :], basis[None]), quat_conj(z)[:, None, :])[..., 1:]
    return np.swapaxes(cols, -1, -2)


def _conj_oracle4(zl, zr):
    basis = np.stack([ONE, I, J, K])
    cols = quat_mul(quat_mul(zl[:, None, :], basis[None]), quat_conj(zr)[:, None, :])
    return np.swapaxes(cols, -1, -2)


def suite_covering(samples=10_000, seed=0):
    rng = np.random.default_rng(seed)
    z, w = _unit(rng, samples), _unit(rng, samples)
    zr, wr = _unit(rng, samples), _unit(rng, samples)
    err3 = np.max(np.abs(pi3(z) - _conj_oracle3(z)))
    err4 = np.max(np.abs(pi4(z, zr) - _conj_oracle4(z, zr)))
    hom3 = np.max(np.abs(pi3(quat_mul(z, w)) - pi3(z) @ pi3(w)))
    hom4 = np.max(np.abs(pi4(quat_mul(z, w), quat_mul(zr, wr)) - pi4(z, zr) @ pi4(w, wr)))
    ker3 = np.max(np.abs(pi3(-z) - pi3(z)))
    ker4 = np.max(np.abs(pi4(-z, -zr) - pi4(z, zr)))
    ker4_one = np.max(np.abs(pi4(-ONE, -ONE) - np.eye(4)))
    formula = max(err3, err4)
    ident = max(hom3, hom4, ker3, ker4, ker4_one)
    return formula <= 1e-12 and ident <= 1e-10, {"formula_err": formula, "identity_err": ident}


# -- 2, 3: example frames -------------------------------------------------------------

EXAMPLE_TARGETS = {
    "gamma11": (GAMMA_1_1, Spin4(-ONE, K)),
    "gamma12": (GAMMA_1_2, Spin4(ONE, -ONE)),
    "omega3": (OMEGA3, Spin4(ONE, ONE)),
}


def suite_example_frames(n=1024):
    details, ok = {}, True
    for name, ((v, k, t), target) in EXAMPLE_TARGETS.items():
        t0 = time.perf_counter()
        Lam = jacobi_matrix(np.array([v, v * k, v * t]))
        fc = integrate_frame(np.broadcast_to(Lam, (n + 1, 4, 4)), Grid(n))
        err = fc.final_lift().distance(target)
        dt = time.perf_counter() - t0
        details[f"{name}_err"] = err
        details[f"{name}_time"] = dt
        ok &= err <= 1e-6 and dt < 1.0
    return ok, details


def suite_omega3_formula(n=1024):
    curve, _ = curve_from_profile(omega3_profile(n))
    err = np.max(np.abs(curve.points - omega3_formula(curve.t)))
    return err <= 1e-6, {"max_err": err}


# -- 4, 5: decomposition -------------------------------------------------------------------

DECOMPOSITION_TARGETS = {
    # (v, kappa_l, kappa_r) constant, final spin (z_l, z_r)
    "gamma11": (GAMMA_1_1, (np.pi, np.sqrt(3), 0.0), (-ONE, K)),
    "gamma12": (GAMMA_1_2, (2 * np.pi, np.sqrt(3), 0.0), (ONE, -ONE)),
    "omega3": (OMEGA3, (4 * np.pi, np.sqrt(3), 0.0), (ONE, ONE)),
}


def suite_decomposition(n=1024):
    details, ok = {}, True
    for name, (vkt, expect, ends) in DECOMPOSITION_TARGETS.items():
        pair = decompose3(CurvatureProfile(Grid(n), *vkt))
        err = max(np.max(np.abs(arr - e)) for arr, e in zip((pair.v, pair.kappa_l, pair.kappa_r), expect))
        end_err = max(np.linalg.norm(pair.z_l - ends[0]), np.linalg.norm(pair.z_r - ends[1]))
        details[f"{name}_err"] = err
        details[f"{name}_end_err"] = end_err
        ok &= err <= 1e-8 and end_err <= 1e-6
    return ok, details


def suite_round_trips(cases=100, seed=1, n=256):
    rng = np.random.default_rng(seed)
    fwd = bwd = 0.0
    for _ in range(cases):
        p = random_profile(rng, 3, n)
        q = compose3(decompose3(p, endpoints=False))
        fwd = max(fwd, max(np.max(np.abs(a - b) / np.maximum(1, np.abs(a)))
                           for a, b in zip(p.arrays(), q.arrays())))
        pair = random_pair(rng, n)
        back = decompose3(compose3(pair), endpoints=False)
        bwd = max(bwd, max(np.max(np.abs(a - b)) for a, b in
                           zip((pair.v, pair.kappa_l, pair.kappa_r), (back.v, back.kappa_l, back.kappa_r))))
    p = random_profile(rng, 3, 1024)
    Lam = profile_lambda(p)(p.t)
    fc = integrate_frame(profile_lambda(p), p.grid)
    logd = np.max(np.abs(log_derivative(fc.frames) - Lam))
    ok = fwd <= 1e-10 and bwd <= 1e-10 and logd <= 1e-5
    return ok, {"compose_decompose": fwd, "decompose_compose": bwd, "log_derivative": logd}


# -- 6, 7: Bruhat cells ---------------------------------------------------------------------

def suite_bruhat(trials=1000, seed=2):
    rng = np.random.default_rng(seed)
    b3, b4 = enumerate_b_plus(2), enumerate_b_plus(3)
    wrong = 0
    for k in range(trials):
        cells = b3 if k % 2 else b4
        P = cells[rng.integers(len(cells))]
        size = P.size
        Q = cell_representative(P, random_up_plus(size, rng), random_up_plus(size, rng))
        wrong += classify_so(Q) != P
    moved = 0
    for _ in range(100):
        Q = random_so(4, rng)
        moved += classify_so(up_plus_action(Q, random_up_plus(4, rng), random_up_plus(4, rng))) != classify_so(Q)
    top = [P for P in b4 if inv_count(P) == 6]
    max_inv = max(inv_count(P) for P in b4)
    only_rho = all(P.perm == rho(3).perm for P in top)
    ok = len(b3) == 24 and len(b4) == 192 and wrong == 0 and moved == 0 and max_inv == 6 and only_rho
    return ok, {"B3": len(b3), "B4": len(b4), "misclassified": wrong, "action_changes": moved,
                "max_inv": max_inv, "top_cells": len(top)}


RELAXED_SWEEP = (0.05, 0.1, 0.2, 0.3)


def suite_relaxed_cell():
    z = relaxed_test_frame(0.1, 0.1)
    col_err = np.max(np.abs(pi4(z) - relaxed_test_columns(0.1, 0.1)))
    labels = set()
    for e in RELAXED_SWEEP:
        for d in RELAXED_SWEEP:
            cell = classify_spin(relaxed_test_frame(e, d))
            labels.add((cell.rep_so, tuple(np.round(cell.lift.as_array().ravel(), 6))))
    first = classify_spin(z)
    ok = col_err <= 1e-10 and first.rep_so == RELAXED_CELL and len(labels) == 1
    return ok, {"column_err": col_err, "cell": first.rep_so.perm + first.rep_so.signs,
                "distinct_labels": len(labels)}


# -- 8: surgeries ---------------------------------------------------------------------------

def check_add_loops(p, spec):
    out = add_loops(p, spec)
    err = final_spin(out).distance(final_spin(p)) if p.dim == 3 else \
        float(np.linalg.norm(final_spin(out) - final_spin(p)))
    return err, bool(is_locally_convex(out).ok), out


def check_relax_reflect(p, params):
    rr = relax_reflect(p, params)
    e, d = params.epsilon, params.delta
    expect = np.where((p.t < e) | (p.t > 1 - e), d, d * d * e * e)
    exact = bool(np.all(rr.kappa + p.kappa == expect) or
                 np.max(np.abs(rr.kappa + p.kappa - expect)) <= 4 * np.finfo(float).eps * np.max(np.abs(p.kappa)))
    same_speed = bool(np.array_equal(rr.v, p.v))
    return exact and same_speed, rr


def check_nu(nu, p):
    """Defining conditions of a tangent-circle replacement, as a dict of booleans."""
    s = np.linspace(0, 1, 4097)
    vg, kg = p.evaluate(s)
    vn, kn = nu.profile.evaluate(s)
    outside = (s < nu.t_mmm) | (s > nu.t_ppp)
    outer = ((s >= nu.t_mmm) & (s < nu.t_mm)) | ((s > nu.t_pp) & (s <= nu.t_ppp))
    inner = (s > nu.t_mm) & (s < nu.t_pp)
    c = nu.conditions()
    total = sum(nu.gamma_length) + nu.nu_length
    return {
        "agrees_outside": bool(np.array_equal(vg[outside], vn[outside]) and np.array_equal(kg[outside], kn[outside])),
        "outer_curvature": bool(np.all(kn[outer] == nu.K0)),
        "inner_curvature": bool(np.all(kn[inner] == nu.K1)),
        "longer": c["length_excess"] > 1e-12 * total,
        "left_length_match": c["left_match_residual"] <= 1e-8,
        "right_length_match": c["right_match_residual"] <= 1e-8,
        "ordered": bool(c["ordered"]),
        "tangency": c["tangency_residual"] <= 1e-8,
    }


def suite_surgery(cases=20, seed=3):
    rng = np.random.default_rng(seed)
    eps = 1 / 32
    frame_err, convex = 0.0, True
    for k in range(cases):
        dim = 2 if k % 2 else 3
        p = random_profile(rng, dim, 1024)
        t0 = [0.0, 1.0][k % 2] if k % 5 == 0 else float(rng.uniform(2 * eps, 1 - 2 * eps))
        err, cvx, _ = check_add_loops(p, SurgerySpec(t0, eps))
        frame_err, convex = max(frame_err, err), convex and cvx
    rr_ok = l_ok = True
    for c, m in ((np.pi, 1), (np.pi, 2), (np.pi / 2, 2), (3 * np.pi / 2, 1)):
        prof = sigma_profile(c, m)
        for e, d in ((0.1, 0.1), (0.05, 0.3), (0.3, 0.05)):
            params = RRParams(e, d)
            exact, _ = check_relax_reflect(prof, params)
            pair, _ = hat_pair(prof, params)
            rr_ok &= exact
            l_ok &= check_condition(pair, "L").ok
    prof = sigma_profile(np.pi)
    k0 = float(prof.kappa[0])
    nu_flags = check_nu(tangent_circles(prof, 0.5, eps, k0 / 2, 2 * k0), prof)
    pair = decompose3(omega3_profile())
    out = sharp(pair, 0.5, eps)
    outside = (pair.t < 0.5 - 2 * eps) | (pair.t > 0.5 + 2 * eps)
    outside_dev = max(np.max(np.abs(a[outside] - b[outside])) for a, b in
                      ((out.v, pair.v), (out.kappa_l, pair.kappa_l), (out.kappa_r, pair.kappa_r)))
    sharp_ok = check_condition(out, "L").ok and outside_dev == 0.0
    ok = frame_err <= 1e-6 and convex and rr_ok and l_ok and all(nu_flags.values()) and sharp_ok
    return ok, {"add_loops_frame_err": frame_err, "add_loops_convex": convex, "rr_exact": rr_ok,
                "hat_pair_L": l_ok, "nu_conditions": all(nu_flags.values()), "sharp_L": sharp_ok,
                "sharp_outside_dev": outside_dev}


# -- 9, 10 ------------------------------------------------------------------------------------

CONVEX_CS = (np.pi / 2, np.pi, 3 * np.pi / 2)


def suite_convexity(trials=10_000, seed=4):
    accept = all(is_convex_arc(sigma(c, 1), trials, seed) for c in CONVEX_CS)
    reject = not any(is_convex_arc(sigma(c, 2), trials, seed) for c in CONVEX_CS)
    mc = multiconvex_multiplicity(sigma(np.pi, 2), trials, seed)
    mc_ok = mc is not None and mc.k == 2 and len(mc.times) == 1 and abs(mc.times[0] - 0.5) <= 1e-4
    return accept and reject and mc_ok, {"accepts_single": accept, "rejects_double": reject,
                                         "multiplicity": None if mc is None else mc.k,
                                         "junctions": None if mc is None else mc.times}


CONVERGENCE_NS = (256, 512, 1024, 2048)


def convergence_errors(ns=CONVERGENCE_NS):
    """Errors of the frame integrator against ``expm`` for ``Lam(t) = f(t) A`` (commuting family)."""
    A = jacobi_matrix(np.array([OMEGA3[0], OMEGA3[0] * OMEGA3[1], OMEGA3[0] * OMEGA3[2]]))

    def f(t):
        return 1 + 0.5 * np.sin(2 * np.pi * t) + 0.3 * np.cos(6 * np.pi * t)
    F1 = 1.0  # integral of f over [0, 1]
    exact = expm(F1 * A)
    errs = []
    for n in ns:
        fc = integrate_frame(lambda t: f(np.asarray(t))[..., None, None] * A, Grid(n))
        errs.append(float(np.max(np.abs(fc.frames[-1] - exact))))
    return np.array(errs)


def suite_convergence():
    errs = convergence_errors()
    order = float(np.log2(errs[0] / errs[-1]) / np.log2(CONVERGENCE_NS[-1] / CONVERGENCE_NS[0]))
    return order >= 3.8, {"order": order, "err_256": errs[0], "err_2048": errs[-1]}


SUITES = {
    1: ("covering maps", suite_covering),
    2: ("example frame endpoints", suite_example_frames),
    3: ("omega3 coordinates", suite_omega3_formula),
    4: ("decomposition ground truth", suite_decomposition),
    5: ("round trips", suite_round_trips),
    6: ("bruhat", suite_bruhat),
    7: ("cell of the relaxed pair", suite_relaxed_cell),
    8: ("surgery", suite_surgery),
    9: ("convexity and multiconvexity", suite_convexity),
    10: ("integrator convergence", suite_convergence),
}


def run_suite(key, seed=None):
    """Run one suite; ``seed`` overrides the default seed of randomized suites."""
    name, fn = SUITES[key]
    kw = {"seed": seed} if seed is not None and "seed" in inspect.signature(fn).parameters else {}
    return _timed(f"{key}. {name}", fn, **kw)


def run_all(keys=None, seed=None):
    return [run_suite(k, seed) for k in (keys or sorted(SUITES))]
