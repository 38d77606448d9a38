"""Logarithmic derivatives and reconstruction of frames from curvature data.

Frames solve ``G' = G Lam`` with ``G(0) = I`` and spin lifts solve ``q' = q h``
(componentwise on S^3 x S^3), where ``Lam = dpi(h)``.  Both are advanced with
classical RK4 and projected back to the group after every step.
"""

import numpy as np
from scipy.signal import savgol_filter

from .config import DEFAULT_GRID, TOL
from .curves import (
    CurvatureProfile, FrameCurve, Grid, SampledCurve, _as_grid, _piecewise_spline, jacobi_matrix,
)
from .errors import PreconditionError
from .spin_algebra import (
    ONE, dpi3_inverse, dpi4_inverse, quat_mul, renormalize,
)

__all__ = [
    "jacobi_matrix", "is_jacobi", "is_quasi_jacobi", "in_q_tilde", "in_j_tilde",
    "log_derivative", "integrate_frame", "integrate_spin3", "integrate_spin4",
    "profile_lambda", "curve_from_profile",
]


# -- matrix classes -------------------------------------------------------------

def _tridiagonal_parts(Lam, tol):
    Lam = np.asarray(Lam, dtype=float)
    size = Lam.shape[-1]
    skew = np.max(np.abs(Lam + np.swapaxes(Lam, -1, -2)), initial=0.0) <= tol
    mask = np.abs(np.subtract.outer(np.arange(size), np.arange(size))) > 1
    banded = np.max(np.abs(Lam[..., mask]), initial=0.0) <= tol
    sub = np.diagonal(Lam, offset=-1, axis1=-2, axis2=-1)
    return skew and banded, sub


def is_jacobi(Lam, tol=1e-10):
    """Tridiagonal skew-symmetric with positive subdiagonal."""
    ok, sub = _tridiagonal_parts(Lam, tol)
    return bool(ok and np.all(sub > 0))


def is_quasi_jacobi(Lam, tol=1e-10):
    """Like :func:`is_jacobi` but the last subdiagonal entry may take any sign."""
    ok, sub = _tridiagonal_parts(Lam, tol)
    return bool(ok and np.all(sub[..., :-1] > 0))


def _bd_form(h_l, h_r, tol):
    h_l = np.asarray(h_l, dtype=float)
    h_r = np.asarray(h_r, dtype=float)
    if h_l.shape[-1] == 4:
        h_l, h_r = h_l[..., 1:], h_r[..., 1:]
    ok = (np.max(np.abs(h_l[..., 1]), initial=0.0) <= tol
          and np.max(np.abs(h_r[..., 1]), initial=0.0) <= tol
          and np.max(np.abs(h_l[..., 2] - h_r[..., 2]), initial=0.0) <= tol)
    return ok, h_l[..., 0], h_r[..., 0], h_l[..., 2]


def in_q_tilde(h_l, h_r, tol=1e-10):
    """``(b_l i + d k, b_r i + d k)`` with ``b_l > b_r`` and ``d > 0``."""
    ok, bl, br, d = _bd_form(h_l, h_r, tol)
    return bool(ok and np.all(bl > br) and np.all(d > 0))


def in_j_tilde(h_l, h_r, tol=1e-10):
    """``(b_l i + d k, b_r i + d k)`` with ``b_l > |b_r|`` and ``d > 0``."""
    ok, bl, br, d = _bd_form(h_l, h_r, tol)
    return bool(ok and np.all(bl > np.abs(br)) and np.all(d > 0))


# -- log-derivative -----------------------------------------------------------

def log_derivative(F):
    """Samples of ``G^{-1} G'`` for a frame curve (derivative by local polynomial fits)."""
    frames = F.frames if isinstance(F, FrameCurve) else np.asarray(F, dtype=float)
    h = F.grid.h if isinstance(F, FrameCurve) else 1.0 / (len(frames) - 1)
    size = frames.shape[-1]
    orth = np.max(np.abs(np.swapaxes(frames, -1, -2) @ frames - np.eye(size)))
    if orth > TOL.so_membership:
        raise PreconditionError(f"frames are not orthogonal (error {orth:.3g})")
    dF = savgol_filter(frames, 7, 6, deriv=1, delta=h, axis=0, mode="interp")
    return np.swapaxes(frames, -1, -2) @ dF


# -- integration --------------------------------------------------------------

def _source(data, grid, breakpoints, shape_tail):
    """Callable ``t -> values`` from either a callable or grid samples."""
    if callable(data):
        return data
    arr = np.asarray(data, dtype=float)
    if arr.shape[0] != len(grid) or arr.shape[1:] != shape_tail:
        raise PreconditionError(f"samples must have shape {(len(grid),) + shape_tail}, got {arr.shape}")
    if np.allclose(arr, arr[0], rtol=0.0, atol=0.0):
        const = arr[0]
        return lambda t: np.broadcast_to(const, np.shape(t) + shape_tail)
    flat = arr.reshape(len(arr), -1)
    splines = [_piecewise_spline(grid.t, flat[:, k], breakpoints) for k in range(flat.shape[1])]

    def f(t):
        t = np.asarray(t, dtype=float)
        return np.stack([s(t) for s in splines], axis=-1).reshape(t.shape + shape_tail)

    return f


def _step_nodes(grid, breakpoints):
    """Substep boundaries: grid nodes plus breakpoints falling strictly inside an interval."""
    t = grid.t
    extra = [b for b in breakpoints if np.min(np.abs(t - b)) > 1e-13]
    return np.unique(np.concatenate([t, extra])) if extra else t


def _stage_times(grid, breakpoints):
    """Step sizes and RK4 stage times; stages sit strictly inside each substep."""
    nodes = _step_nodes(grid, breakpoints)
    a, b = nodes[:-1], nodes[1:]
    h = b - a
    # at least a few ulps, otherwise stages land on the breakpoint itself for tiny h
    nudge = np.maximum(1e-12 * h, 8 * np.spacing(np.maximum(np.abs(a), np.abs(b))))
    on_grid = np.isin(np.arange(1, len(nodes)), np.searchsorted(nodes, grid.t[1:]))
    return h, a + nudge, a + h / 2, b - nudge, on_grid


def _propagators(h, Aa, Am, Ab, mul, eye):
    """One-step RK4 maps ``P`` with ``y_next = y P`` for the linear equation ``y' = y A(t)``."""
    hh = h.reshape((-1,) + (1,) * (Aa.ndim - 1))
    B1 = Aa
    B2 = mul(eye + hh / 2 * B1, Am)
    B3 = mul(eye + hh / 2 * B2, Am)
    B4 = mul(eye + hh * B3, Ab)
    return eye + hh / 6 * (B1 + 2 * B2 + 2 * B3 + B4)


def _chain(y0, P, on_grid, mul, project):
    out = [np.array(y0, dtype=float)]
    y = out[0]
    for Pk, keep in zip(P, on_grid):
        y = project(mul(y, Pk))
        if keep:
            out.append(y)
    return np.stack(out)


def _project_so(Y):
    q, r = np.linalg.qr(Y)
    s = np.sign(np.diag(r))
    s[s == 0] = 1.0
    return q * s


def _im4(h):
    h = np.asarray(h, dtype=float)
    if h.shape[-1] == 4:
        return h
    return np.concatenate([np.zeros(h.shape[:-1] + (1,)), h], axis=-1)


def _spin_chain(q0, stages, h, on_grid):
    P = _propagators(h, *(_im4(x) for x in stages), quat_mul, ONE)
    return _chain(q0, P, on_grid, quat_mul, renormalize)


def _eval_stages(fn, times, tail):
    vals = [np.broadcast_to(np.asarray(fn(t), dtype=float), t.shape + tail) for t in times]
    return vals


def integrate_frame(Lam, grid=None, breakpoints=(), initial=None, initial_lift=None):
    """Solve ``G' = G Lam``, ``G(0) = initial`` (default I), together with its spin lift.

    ``Lam`` is either an array of samples ``(N, d, d)`` on ``grid`` (interpolated
    by piecewise cubic splines restarted at ``breakpoints``) or a callable
    ``t -> (..., d, d)`` vectorized over ``t``.
    """
    if callable(Lam):
        grid = _as_grid(grid if grid is not None else DEFAULT_GRID)
        size = np.asarray(Lam(np.asarray([0.5]))).shape[-1]
    else:
        arr = np.asarray(Lam, dtype=float)
        grid = _as_grid(grid if grid is not None else len(arr) - 1)
        size = arr.shape[-1]
    if size not in (3, 4):
        raise PreconditionError("only 3x3 and 4x4 log-derivatives are supported")
    Lam_fn = _source(Lam, grid, breakpoints, (size, size))
    h, ta, tm, tb, on_grid = _stage_times(grid, breakpoints)
    stages = _eval_stages(Lam_fn, (ta, tm, tb), (size, size))
    eye = np.eye(size)
    G0 = eye if initial is None else np.asarray(initial, dtype=float)
    frames = _chain(G0, _propagators(h, *stages, np.matmul, eye), on_grid, np.matmul, _project_so)
    if size == 3:
        q0 = ONE if initial_lift is None else np.asarray(initial_lift, dtype=float)
        lift = _spin_chain(q0, [dpi3_inverse(L) for L in stages], h, on_grid)
    else:
        if initial_lift is None:
            q0l = q0r = ONE
        else:
            q0l, q0r = initial_lift.left, initial_lift.right
        pairs = [dpi4_inverse(L) for L in stages]
        left = _spin_chain(q0l, [p[0] for p in pairs], h, on_grid)
        right = _spin_chain(q0r, [p[1] for p in pairs], h, on_grid)
        lift = np.stack([left, right], axis=1)
    return FrameCurve(grid, frames, lift)


def integrate_spin3(h, grid=None, breakpoints=(), initial=None):
    """Solve ``q' = q h`` with ``q(0) = 1`` (or ``initial``) for an imaginary-quaternion path."""
    if callable(h):
        grid = _as_grid(grid if grid is not None else DEFAULT_GRID)
        h_fn = h
    else:
        h = np.asarray(h, dtype=float)
        if h.shape[-1] == 4:
            h = h[..., 1:]
        grid = _as_grid(grid if grid is not None else len(h) - 1)
        h_fn = _source(h, grid, breakpoints, (3,))
    step, ta, tm, tb, on_grid = _stage_times(grid, breakpoints)
    width = np.asarray(h_fn(np.asarray([0.5]))).shape[-1]
    stages = _eval_stages(h_fn, (ta, tm, tb), (width,))
    q0 = ONE if initial is None else np.asarray(initial, dtype=float)
    return _spin_chain(q0, stages, step, on_grid)


def _tree_product(P):
    """Ordered product ``P[0] P[1] ... P[-1]`` of unit quaternions by pairwise reduction."""
    P = np.asarray(P)
    while len(P) > 1:
        if len(P) % 2:
            P = np.concatenate([P, ONE[None]])
        P = renormalize(quat_mul(P[0::2], P[1::2]))
    return P[0]


def spin_endpoint(h, grid=None, breakpoints=(), initial=None):
    """Final value of :func:`integrate_spin3` without the per-step loop (callable ``h`` only)."""
    grid = _as_grid(grid if grid is not None else DEFAULT_GRID)
    step, ta, tm, tb, _ = _stage_times(grid, breakpoints)
    stages = _eval_stages(h, (ta, tm, tb), (3,))
    P = renormalize(_propagators(step, *(_im4(x) for x in stages), quat_mul, ONE))
    q0 = ONE if initial is None else np.asarray(initial, dtype=float)
    return renormalize(quat_mul(q0, _tree_product(P)))


def integrate_spin4(h_l, h_r, grid=None, breakpoints=()):
    """Componentwise :func:`integrate_spin3`; returns an array of shape ``(N, 2, 4)``."""
    left = integrate_spin3(h_l, grid, breakpoints)
    right = integrate_spin3(h_r, grid if grid is not None else len(left) - 1, breakpoints)
    return np.stack([left, right], axis=1)


# -- profiles -----------------------------------------------------------------

def profile_lambda(p):
    """Callable ``t -> Lam(t)`` assembling the Jacobi matrix of a profile."""
    def Lam(t):
        vals = p.evaluate(t)
        v = vals[0]
        sub = [v, v * vals[1]] + ([v * vals[2]] if len(vals) == 3 else [])
        return jacobi_matrix(np.stack(sub, axis=-1))
    return Lam


def _lambda_derivatives(Lam, t, breakpoints, delta=1e-4):
    """First and second derivatives of ``Lam`` at ``t`` by finite differences.

    Stencils lean away from nearby breakpoints so no difference straddles a jump.
    """
    t = np.asarray(t, dtype=float)
    bps = np.asarray(breakpoints, dtype=float)
    direction = np.zeros_like(t)  # 0 central, +1 forward, -1 backward
    if len(bps):
        dist = t[:, None] - bps[None, :]
        near = np.abs(dist) < 2.5 * delta
        fwd = np.any(near & (dist >= 0), axis=1)
        bwd = np.any(near & (dist < 0), axis=1)
        direction[fwd] = 1
        direction[bwd & ~fwd] = -1
    direction[t < 2.5 * delta] = 1
    direction[t > 1 - 2.5 * delta] = -1
    d1 = np.empty(t.shape + Lam(t[:1]).shape[1:])
    d2 = np.empty_like(d1)
    c = direction == 0
    if c.any():
        tc = t[c]
        fp, f0, fm = Lam(tc + delta), Lam(tc), Lam(tc - delta)
        d1[c] = (fp - fm) / (2 * delta)
        d2[c] = (fp - 2 * f0 + fm) / delta ** 2
    for sgn in (1, -1):
        m = direction == sgn
        if m.any():
            tm = t[m]
            # nudge off the node so a breakpoint sitting on it is seen from the right side
            base = tm + sgn * 1e-12
            f0, f1, f2, f3 = (Lam(base + sgn * k * delta) for k in range(4))
            d1[m] = sgn * (-3 * f0 + 4 * f1 - f2) / (2 * delta)
            d2[m] = (2 * f0 - 5 * f1 + 4 * f2 - f3) / delta ** 2
    return d1, d2


def curve_from_profile(p, initial=None):
    """Curve ``G(t) e1`` and its frames for the profile ``p``.

    The spin lift is integrated directly.  Derivative samples of the curve are
    assembled from ``G`` and ``Lam`` (with ``Lam'`` and ``Lam''`` taken by
    finite differences of the profile).
    """
    if not isinstance(p, CurvatureProfile):
        raise PreconditionError("expected a CurvatureProfile")
    if p.dim == 3 and np.any(p.kappa == 0):
        raise PreconditionError("a generic curve on S^3 needs nonzero geodesic curvature")
    Lam = profile_lambda(p)
    frames = integrate_frame(Lam, p.grid, p.breakpoints, initial=initial)
    t = p.t
    G = frames.frames
    L0 = Lam(t)
    L1, L2 = _lambda_derivatives(Lam, t, p.breakpoints)
    M1 = L0
    M2 = L0 @ L0 + L1
    mats = [M1, M2]
    if p.dim == 3:
        # M2' = L1 L0 + L0 L1 + L2
        mats.append(M2 @ L0 + L1 @ L0 + L0 @ L1 + L2)
    derivs = np.stack([(G @ M)[:, :, 0] for M in mats])
    points = G[:, :, 0]
    meta = dict(p.meta)
    meta.setdefault("source", "profile")
    curve = SampledCurve(p.grid, points, derivs, None, meta)
    return curve, frames
