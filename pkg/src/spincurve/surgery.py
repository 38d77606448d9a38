"""Curve surgeries on curvature profiles.

* :func:`add_loops` inserts a closed curve with identity end frames at ``t0``.
* :func:`relax_reflect` builds the companion curve with the same speed and
  reflected, slightly relaxed curvature; :func:`hat_pair` pairs them up.
* :func:`tangent_circles` replaces a convex arc by three tangent circle arcs, and
  :func:`sharp` uses it to insert loops into a pair while keeping
  ``kappa_l > |kappa_r|`` and the shared speed.

Everything operates on profiles with exact piecewise laws; curves are recovered
with :func:`spincurve.frames_ode.curve_from_profile`.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.spatial.transform import Rotation

from .bruhat import classify_spin
from .curves import CurvatureProfile, omega3_profile, sigma_curvature, sigma_profile
from .decompose import (CurvePair, check_condition, pair_endpoints, refined_grid,
                        spin_endpoint_s2)
from .errors import ConditionViolation, NumericalError, PreconditionError
from .frames_ode import integrate_frame, integrate_spin3, profile_lambda, spin_endpoint
from .spin_algebra import ONE, Spin4, dpi4_inverse, exp_im

DEFAULT_EPS = 1.0 / 32


# -- shared helpers -------------------------------------------------------------

def _piecewise_law(pieces, default):
    """Combine ``[(lo, hi, fn), ...]`` into one vectorized law; ``default`` elsewhere.

    Intervals are half-open ``[lo, hi)`` except that the last one also holds ``hi``.
    """
    def law(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        vals = [np.array(x, dtype=float, copy=True) for x in np.broadcast_arrays(*default(t))]
        for k, (lo, hi, fn) in enumerate(pieces):
            m = (t >= lo) & ((t < hi) if k < len(pieces) - 1 else (t <= hi))
            if m.any():
                sub = fn(t[m])
                for arr, s in zip(vals, sub):
                    arr[m] = s
        return tuple(vals)
    return law


def _sample(law, grid):
    return law(grid.t)


def final_spin(p, max_angle=0.01):
    """Final lifted frame of a profile, on a grid refined to resolve fast inserted loops."""
    if p.dim == 2:
        return spin_endpoint_s2(p, max_angle)
    Lam = profile_lambda(p)
    h_l, h_r = dpi4_inverse(Lam(p.t))
    rate = np.maximum(np.linalg.norm(h_l, axis=-1), np.linalg.norm(h_r, axis=-1))
    grid = refined_grid(p, rate, max_angle)
    return Spin4(*(spin_endpoint(lambda t, k=k: dpi4_inverse(Lam(t))[k], grid, p.breakpoints)
                   for k in (0, 1)))


def _spin_distance(a, b):
    if isinstance(a, Spin4):
        return float(a.distance(b))
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))


# -- adding loops -----------------------------------------------------------------

@dataclass(frozen=True)
class SurgerySpec:
    """Where and how to insert the closed curve ``omega``."""

    t0: float
    epsilon: float = DEFAULT_EPS
    omega: object = None

    def __post_init__(self):
        if not 0.0 <= self.t0 <= 1.0:
            raise PreconditionError("t0 must lie in [0, 1]")
        if self.epsilon <= 0:
            raise PreconditionError("epsilon must be positive")
        if 0.0 < self.t0 < 1.0 and (self.t0 - 2 * self.epsilon < 0 or self.t0 + 2 * self.epsilon > 1):
            raise PreconditionError("insertion window [t0 - 2 eps, t0 + 2 eps] leaves [0, 1]")
        if self.t0 in (0.0, 1.0) and 2 * self.epsilon > 1:
            raise PreconditionError("epsilon too large for an endpoint insertion")


def default_omega(dim, n):
    """Closed curve with identity end frames: doubled circle of length pi, or the four-turn spiral."""
    return sigma_profile(np.pi, 2, n=n) if dim == 2 else omega3_profile(n)


def _check_omega(omega, dim):
    if omega.dim != dim:
        raise PreconditionError("inserted curve must live on the same sphere")
    end = final_spin(omega)
    one = Spin4.identity() if dim == 3 else ONE
    if _spin_distance(end, one) > 1e-6:
        raise PreconditionError("inserted curve must have identity initial and final lifted frames")


def add_loops(p, spec):
    """Profile of the curve with ``spec.omega`` inserted at ``spec.t0``."""
    if not isinstance(spec, SurgerySpec):
        spec = SurgerySpec(*spec)
    if spec.omega is None:
        omega = default_omega(p.dim, p.grid.n)
    else:
        omega = spec.omega
        _check_omega(omega, p.dim)
    t0, e = spec.t0, spec.epsilon

    def speed_scaled(src, scale, shift_fn):
        def fn(t):
            vals = src.evaluate(shift_fn(t))
            return (scale * vals[0],) + tuple(vals[1:])
        return fn

    if 0.0 < t0 < 1.0:
        pieces = [
            (t0 - 2 * e, t0 - e, speed_scaled(p, 2.0, lambda t: 2 * t - t0 + 2 * e)),
            (t0 - e, t0 + e, speed_scaled(omega, 1 / (2 * e), lambda t: (t - t0 + e) / (2 * e))),
            (t0 + e, t0 + 2 * e, speed_scaled(p, 2.0, lambda t: 2 * t - t0 - 2 * e)),
        ]
        bps = (t0 - 2 * e, t0 - e, t0 + e, t0 + 2 * e)
    elif t0 == 0.0:
        pieces = [
            (0.0, e, speed_scaled(omega, 1 / e, lambda t: t / e)),
            (e, 2 * e, speed_scaled(p, 2.0, lambda t: 2 * t - 2 * e)),
        ]
        bps = (e, 2 * e)
    else:
        pieces = [
            (1 - 2 * e, 1 - e, speed_scaled(p, 2.0, lambda t: 2 * t - 1 + 2 * e)),
            (1 - e, 1.0, speed_scaled(omega, 1 / e, lambda t: (t - 1 + e) / e)),
        ]
        bps = (1 - 2 * e, 1 - e)
    law = _piecewise_law(pieces, p.evaluate)
    arrays = _sample(law, p.grid)
    bps = tuple(sorted(set(p.breakpoints) | set(bps)))
    meta = dict(p.meta, surgery="add_loops", t0=t0, epsilon=e)
    return CurvatureProfile(p.grid, *arrays, law=law, breakpoints=bps, meta=meta)


# -- relaxation-reflection ------------------------------------------------------------

@dataclass(frozen=True)
class RRParams:
    epsilon: float = 0.1
    delta: float = 0.1

    def __post_init__(self):
        for name in ("epsilon", "delta"):
            val = getattr(self, name)
            if not 0.0 < val <= 0.3:
                raise PreconditionError(f"{name} must lie in (0, 0.3], got {val}")


def _closed_lift_sign(p):
    end = spin_endpoint_s2(p)
    for sign in (1.0, -1.0):
        if np.linalg.norm(end - sign * ONE) < 1e-6:
            return sign
    raise PreconditionError("curve must have final lifted frame +1 or -1")


def relax_reflect(p, params=RRParams()):
    """Same speed, curvature ``-kappa + delta`` near the ends and ``-kappa + delta^2 eps^2`` inside."""
    if not isinstance(p, CurvatureProfile) or p.dim != 2:
        raise PreconditionError("expected a curvature profile on S^2")
    if not isinstance(params, RRParams):
        params = RRParams(*params)
    if np.any(p.kappa <= 0):
        raise ConditionViolation("curve must be locally convex", t=float(p.t[np.argmax(p.kappa <= 0)]))
    _closed_lift_sign(p)
    e, d = params.epsilon, params.delta
    big, small = d, d * d * e * e

    def shift(t):
        t = np.asarray(t, dtype=float)
        return np.where((t < e) | (t > 1 - e), big, small)

    def law(t):
        v, k = p.evaluate(t)
        return v, -k + shift(t)

    kappa = -p.kappa + shift(p.t)
    meta = dict(p.meta, surgery="relax_reflect", epsilon=e, delta=d)
    return CurvatureProfile(p.grid, p.v.copy(), kappa, law=law,
                            breakpoints=tuple(sorted(set(p.breakpoints) | {e, 1 - e})), meta=meta)


def hat_pair(p, params=RRParams()):
    """The pair ``(gamma, RR gamma)`` with its final spin frame and lifted Bruhat cell."""
    rr = relax_reflect(p, params)

    def law(t):
        v, k = p.evaluate(t)
        return v, k, rr.evaluate(t)[1]

    pair = CurvePair(p.grid, p.v, p.kappa, rr.kappa, law=law,
                     breakpoints=rr.breakpoints, meta=dict(surgery="hat_pair", epsilon=params.epsilon,
                                                           delta=params.delta))
    pair = pair_endpoints(pair)
    return pair, classify_spin(pair.final_spin())


def relaxed_test_frame(epsilon, delta):
    """Final lifted frame ``(1, exp(-eps h_r))`` of the explicit test pair, ``h_r`` at angle pi/4 + delta."""
    th = np.pi / 4 + delta
    h_r = np.array([-np.cos(th), 0.0, np.sin(th)])
    return Spin4(ONE, exp_im(h_r, -epsilon))


def relaxed_test_columns(epsilon, delta):
    """Closed-form columns of ``pi4(relaxed_test_frame(epsilon, delta))``."""
    ce, se = np.cos(epsilon), np.sin(epsilon) / np.sqrt(2)
    cd, sd = np.cos(delta), np.sin(delta)
    P1 = [ce, (-cd + sd) * se, 0.0, (cd + sd) * se]
    P2 = [(cd - sd) * se, ce, (-cd - sd) * se, 0.0]
    P3 = [0.0, (cd + sd) * se, ce, (cd - sd) * se]
    P4 = [(-cd - sd) * se, 0.0, (-cd + sd) * se, ce]
    return np.array([P1, P2, P3, P4]).T


def relaxed_test_lifts(epsilon, delta, n=1024):
    """Integrated final lifts of the two great-circle-type test curves (left at angle pi/4)."""
    th_l, th_r = np.pi / 4, np.pi / 4 + delta
    h_l = 2 * np.pi * np.array([np.cos(th_l), 0.0, np.sin(th_l)])
    h_r = (2 * np.pi - epsilon) * np.array([-np.cos(th_r), 0.0, np.sin(th_r)])
    zl = integrate_spin3(lambda t: np.broadcast_to(h_l, np.shape(t) + (3,)), n)[-1]
    zr = integrate_spin3(lambda t: np.broadcast_to(h_r, np.shape(t) + (3,)), n)[-1]
    return Spin4(zl, zr)


# -- tangent circles ------------------------------------------------------------------

def _rot(axis, angle):
    return Rotation.from_rotvec(np.asarray(axis) * angle).as_matrix()


def _angle_about(axis, x, y):
    """Positive rotation angle about ``axis`` carrying ``x`` to ``y`` (projected), in [0, 2 pi)."""
    xp = x - np.dot(x, axis) * axis
    yp = y - np.dot(y, axis) * axis
    ang = np.arctan2(np.dot(axis, np.cross(xp, yp)), np.dot(xp, yp))
    return float(ang % (2 * np.pi))


def _center(frame, K):
    rho = np.arctan2(1.0, K)
    return np.cos(rho) * frame[:, 0] + np.sin(rho) * frame[:, 2], rho


def frames_at(p, times, substeps=32, base=None):
    """Frenet frames (3x3) of an S^2 profile at arbitrary parameters."""
    Lam = profile_lambda(p)
    if base is None:
        base = integrate_frame(Lam, p.grid, p.breakpoints)
    out = []
    for t in np.atleast_1d(times):
        i = min(int(np.floor(t * p.grid.n)), p.grid.n - 1)
        a = p.t[i]
        if t - a < 1e-15:
            out.append(base.frames[i])
            continue
        span = t - a
        local = integrate_frame(lambda s: span * Lam(a + span * np.asarray(s)), substeps,
                                tuple((b - a) / span for b in p.breakpoints if a < b < t),
                                initial=base.frames[i])
        out.append(local.frames[-1])
    return np.array(out)


def _arclength_fn(p):
    """``S(a, b)``: length of the curve between parameters a and b."""
    bps = list(p.breakpoints)

    def S(a, b):
        if b <= a:
            return 0.0
        pts = [x for x in bps if a < x < b]
        val, _ = quad(lambda s: float(p.evaluate(np.array([s]))[0][0]), a, b,
                      points=pts or None, limit=200, epsabs=1e-13, epsrel=1e-13)
        return val
    return S


@dataclass(frozen=True, eq=False)
class NuArc:
    """Three-circle replacement of a convex arc and the bookkeeping of its times and lengths."""

    K0: float
    K1: float
    t_mmm: float
    t_mm: float
    t_m: float
    t0: float
    t_p: float
    t_pp: float
    t_ppp: float
    lengths: tuple          # (L1, L3, L2): K0 arc, K1 arc, K0 arc
    gamma_length: tuple     # lengths of gamma on [t_mmm, t0] and [t0, t_ppp]
    tangency_residual: float
    profile: CurvatureProfile = field(repr=False)

    @property
    def nu_length(self):
        return float(sum(self.lengths))

    @property
    def pos_minus(self):
        """Arclength along nu (from t_mmm) of the point nu(t_-)."""
        return self.gamma_length[0]

    @property
    def pos_plus(self):
        return self.nu_length - self.gamma_length[1]

    def conditions(self):
        """Residuals and flags of the six defining conditions."""
        g = self.profile
        S = _arclength_fn(g)
        left = S(self.t_mmm, self.t_m) - self.gamma_length[0]
        right = S(self.t_p, self.t_ppp) - self.gamma_length[1]
        return {
            "length_excess": self.nu_length - sum(self.gamma_length),
            "left_match_residual": abs(left),
            "right_match_residual": abs(right),
            "tangency_residual": self.tangency_residual,
            "ordered": self.t_mmm < self.t_mm < self.t_m < self.t0 < self.t_p < self.t_pp < self.t_ppp,
        }


def _three_circles(F_start, F_end, K0, K1):
    C1, rho0 = _center(F_start, K0)
    C2, _ = _center(F_end, K0)
    rho1 = np.arctan2(1.0, K1)
    c = float(np.clip(np.dot(C1, C2), -1.0, 1.0))
    k = np.cos(rho0 - rho1)
    cross = np.cross(C1, C2)
    if np.linalg.norm(cross) < 1e-14:
        raise NumericalError("tangent circles coincide; widen the window")
    disc = (1 - 2 * k * k / (1 + c)) / (1 - c * c)
    if disc < 0:
        raise NumericalError("no circle of curvature K1 fits between the two K0 circles")
    alpha, beta = k / (1 + c), np.sqrt(disc)
    # corners of the lens bounded by the two K0 circles
    ka = np.cos(rho0)
    disc_c = (1 - 2 * ka * ka / (1 + c)) / (1 - c * c)
    if disc_c < 0:
        raise NumericalError("the K0 circles do not intersect")
    corners = [ka / (1 + c) * (C1 + C2) + s * np.sqrt(disc_c) * cross for s in (1.0, -1.0)]
    p0 = F_start[:, 0]
    first = int(np.argmin([_angle_about(C1, p0, x) for x in corners]))
    sign = (1.0, -1.0)[first]
    C3 = alpha * (C1 + C2) + sign * beta * cross
    C3 /= np.linalg.norm(C3)

    def touch(C):
        u = C3 - np.dot(C3, C) * C
        return np.cos(rho0) * C + np.sin(rho0) * u / np.linalg.norm(u)

    T1, T2 = touch(C1), touch(C2)
    phi1 = _angle_about(C1, p0, T1)
    phi3 = _angle_about(C3, T1, T2)
    phi2 = _angle_about(C2, T2, F_end[:, 0])
    R = _rot(C2, phi2) @ _rot(C3, phi3) @ _rot(C1, phi1)
    residual = float(np.max(np.abs(R @ F_start - F_end)))
    lengths = (phi1 * np.sin(rho0), phi3 * np.sin(rho1), phi2 * np.sin(rho0))
    return lengths, residual


def _nu_profile(p, K0, K1, t_mmm, t_ppp, lengths):
    L1, L3, L2 = lengths
    total = L1 + L3 + L2
    span = t_ppp - t_mmm
    t_mm = t_mmm + span * L1 / total
    t_pp = t_mmm + span * (L1 + L3) / total
    speed = total / span

    def const(K):
        return lambda t: (np.full(np.shape(t), speed), np.full(np.shape(t), K))

    law = _piecewise_law([(t_mmm, t_mm, const(K0)), (t_mm, t_pp, const(K1)), (t_pp, t_ppp, const(K0))],
                         p.evaluate)
    bps = tuple(sorted(set(p.breakpoints) | {t_mmm, t_mm, t_pp, t_ppp}))
    prof = CurvatureProfile(p.grid, *_sample(law, p.grid), law=law, breakpoints=bps,
                            meta={"surgery": "nu"})
    return prof, t_mm, t_pp


def tangent_circles(p, t0, epsilon, K0, K1, t_mmm=None, t_ppp=None, min_margin=0.25):
    """Replace the convex arc of ``p`` near ``t0`` by arcs of circles of curvature K0, K1, K0.

    When ``t_mmm``/``t_ppp`` are omitted, a symmetric window ``t0 -+ a`` is chosen:
    the widest one (``a <= 2 epsilon``) for which ``nu(t_-)`` and ``nu(t_+)`` sit at
    least ``min_margin`` of the K1 arc away from its ends.
    """
    if p.dim != 2:
        raise PreconditionError("expected a curvature profile on S^2")
    lo, hi = t0 - 2 * epsilon, t0 + 2 * epsilon
    if lo < 0 or hi > 1:
        raise PreconditionError("window [t0 - 2 eps, t0 + 2 eps] leaves [0, 1]")
    if not K1 > K0 > 0:
        raise PreconditionError("need K1 > K0 > 0")
    window = p.evaluate(np.linspace(lo, hi, 257))[1]
    if not (np.all(window > K0) and np.all(window < K1)):
        raise PreconditionError("curvature on the window must lie strictly between K0 and K1")
    S = _arclength_fn(p)
    base = integrate_frame(profile_lambda(p), p.grid, p.breakpoints)

    def build(a_minus, a_plus):
        tm3, tp3 = t0 - a_minus, t0 + a_plus
        F = frames_at(p, [tm3, tp3], base=base)
        lengths, residual = _three_circles(F[0], F[1], K0, K1)
        gl = (S(tm3, t0), S(t0, tp3))
        return tm3, tp3, lengths, residual, gl

    def margin(a):
        try:
            _, _, (L1, L3, L2), _, (ga, gb) = build(a, a)
        except NumericalError:
            return -np.inf
        total = L1 + L3 + L2
        pos_m, pos_p = ga, total - gb
        return min((pos_m - L1) / L3, (L1 + L3 - pos_p) / L3, (pos_p - pos_m) / L3 if pos_p > pos_m else -1)

    if t_mmm is None or t_ppp is None:
        grid_a = np.linspace(2 * epsilon, 2 * epsilon / 64, 64)
        scores = []
        for a in grid_a:
            scores.append(margin(a))
            if scores[-1] >= min_margin:
                break
        best = int(np.argmax(scores))
        if not scores[best] > 0:
            raise NumericalError("no window places nu(t_-), nu(t_+) on the K1 circle")
        a = grid_a[best]
        t_mmm, t_ppp = t0 - a, t0 + a
    if not (lo <= t_mmm < t0 < t_ppp <= hi):
        raise PreconditionError("need t0 - 2 eps <= t_mmm < t0 < t_ppp <= t0 + 2 eps")
    t_mmm, t_ppp, lengths, residual, gl = build(t0 - t_mmm, t_ppp - t0)
    if residual > 1e-8:
        raise NumericalError(f"circle construction does not close (residual {residual:.3g})")
    prof, t_mm, t_pp = _nu_profile(p, K0, K1, t_mmm, t_ppp, lengths)
    total = sum(lengths)
    span = t_ppp - t_mmm
    t_m = t_mmm + span * gl[0] / total
    t_p = t_ppp - span * gl[1] / total
    return NuArc(float(K0), float(K1), t_mmm, t_mm, t_m, t0, t_p, t_pp, t_ppp,
                 tuple(map(float, lengths)), tuple(map(float, gl)), residual, prof)


# -- the sharp operation ------------------------------------------------------------------

def sandwich_constants(pair, t0, epsilon):
    """Default ``K0``, ``K1`` with ``K1 > kappa_l > K0 > |kappa_r|`` on the window."""
    s = np.linspace(t0 - 2 * epsilon, t0 + 2 * epsilon, 513)
    _, kl, kr = pair.evaluate(s)
    lo, hi, top = np.min(kl), np.max(kl), np.max(np.abs(kr))
    if not lo > top:
        raise PreconditionError("no K0 with kappa_l > K0 > |kappa_r| on the window")
    return 0.5 * (lo + top), 2.0 * hi


def _circle_length(K):
    return 2 * np.pi / np.sqrt(1 + K * K)


def sharp(pair, t0=0.5, epsilon=DEFAULT_EPS, K0=None, K1=None):
    """Insert loops into a pair satisfying (L) while keeping (L) and the shared speed."""
    ok, t_bad = check_condition(pair, "L")
    if not ok:
        raise ConditionViolation(f"condition (L) fails at t = {t_bad:.6g}", t=t_bad)
    if t0 - 2 * epsilon < 0 or t0 + 2 * epsilon > 1:
        raise PreconditionError("window [t0 - 2 eps, t0 + 2 eps] must lie inside [0, 1]")
    dK0, dK1 = sandwich_constants(pair, t0, epsilon)
    K0 = dK0 if K0 is None else float(K0)
    K1 = dK1 if K1 is None else float(K1)
    left = pair.left()
    nu = tangent_circles(left, t0, epsilon, K0, K1)
    L1, L3, L2 = nu.lengths
    c1 = _circle_length(K1)
    g = nu.pos_plus - nu.pos_minus
    c2 = c1 + g / 2
    if not c2 < 2 * np.pi:
        raise NumericalError("reflected circle would exceed a great circle")
    K2 = sigma_curvature(c2)
    e = epsilon
    S = _arclength_fn(left)

    def invert(a, target, b):
        return brentq(lambda x: S(a, x) - target, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)

    # transition parameters on the original curve
    tau2 = invert(nu.t_mmm, L1, t0)                              # K0 -> K1, left block
    tau3 = invert(t0, (L1 + L3) - nu.pos_plus, nu.t_ppp)          # K1 -> K0, right block
    base = pair.evaluate

    def outer(shift, kl_fn):
        def fn(t):
            tau = 2 * t - shift
            v, kl, kr = base(tau)
            return 2 * v, kl_fn(tau, kl), kr
        return fn

    def left_kl(tau, kl):
        return np.where(tau < nu.t_mmm, kl, np.where(tau < tau2, K0, K1))

    def right_kl(tau, kl):
        return np.where(tau < tau3, K1, np.where(tau < nu.t_ppp, K0, kl))

    mid_speed = (2 * c1 + g) / (2 * e)

    def middle(t):
        shape = np.shape(t)
        return np.full(shape, mid_speed), np.full(shape, K1), np.full(shape, -K2)

    pieces = [
        (t0 - 2 * e, t0 - e, outer(t0 - 2 * e, left_kl)),
        (t0 - e, t0 + e, middle),
        (t0 + e, t0 + 2 * e, outer(t0 + 2 * e, right_kl)),
    ]
    law = _piecewise_law(pieces, base)
    v, kl, kr = _sample(law, pair.grid)
    bps = {t0 - 2 * e, t0 - e, t0 + e, t0 + 2 * e,
           (nu.t_mmm + t0 - 2 * e) / 2, (tau2 + t0 - 2 * e) / 2,
           (tau3 + t0 + 2 * e) / 2, (nu.t_ppp + t0 + 2 * e) / 2}
    bps |= {(b + t0 - 2 * e) / 2 for b in pair.breakpoints if t0 - 2 * e < b < t0}
    bps |= {(b + t0 + 2 * e) / 2 for b in pair.breakpoints if t0 < b < t0 + 2 * e}
    bps |= {b for b in pair.breakpoints if not t0 - 2 * e <= b <= t0 + 2 * e}
    # keep the input samples bitwise outside the window
    outside = (pair.t < t0 - 2 * e) | (pair.t > t0 + 2 * e)
    v[outside], kl[outside], kr[outside] = pair.v[outside], pair.kappa_l[outside], pair.kappa_r[outside]
    meta = dict(pair.meta, surgery="sharp", t0=t0, epsilon=e, K0=K0, K1=K1, K2=K2, c1=c1, c2=c2,
                nu_gap=g)
    out = CurvePair(pair.grid, v, kl, kr, law=law, breakpoints=tuple(sorted(bps)), meta=meta)
    result = pair_endpoints(out)
    object.__setattr__(result, "meta", dict(meta, nu=nu))
    return result
