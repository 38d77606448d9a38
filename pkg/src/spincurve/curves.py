"""Curves on S^2 and S^3: sampled representations, Frenet frames, curvature data,
convexity predicates and a few closed-form families.
"""

from dataclasses import dataclass, field
from collections import namedtuple
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar
from scipy.signal import savgol_filter

from .config import DEFAULT_GRID, MIN_GRID, TOL
from .errors import ConditionViolation, NumericalError, PreconditionError
from .spin_algebra import lift_path


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``t_i = i/n`` on [0, 1], ``i = 0..n``."""

    n: int = DEFAULT_GRID

    def __post_init__(self):
        if int(self.n) != self.n or self.n < MIN_GRID:
            raise PreconditionError(f"grid needs n >= {MIN_GRID} intervals, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def t(self):
        return np.linspace(0.0, 1.0, self.n + 1)

    @property
    def h(self):
        return 1.0 / self.n

    def __len__(self):
        return self.n + 1


def _as_grid(grid):
    if isinstance(grid, Grid):
        return grid
    return Grid(int(grid))


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """Unit vectors ``points[i]`` in R^{dim+1} at ``grid.t[i]``.

    ``derivs[k-1]`` holds the k-th derivative samples (k = 1..dim) when known in
    closed form.  ``evaluator(t)`` returns the jet ``(len(t), dim+1, dim+1)`` of
    orders 0..dim at arbitrary parameters, for families that have one.
    """

    grid: Grid
    points: np.ndarray
    derivs: Optional[np.ndarray] = None
    evaluator: Optional[Callable] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] not in (3, 4):
            raise PreconditionError(f"points must have shape (N, 3) or (N, 4), got {pts.shape}")
        if len(pts) != len(self.grid):
            raise PreconditionError("points do not match the grid size")
        dev = np.max(np.abs(np.linalg.norm(pts, axis=1) - 1.0))
        if dev > 1e-10:
            raise PreconditionError(f"points are not on the unit sphere (deviation {dev:.3g})")
        object.__setattr__(self, "points", pts)
        if self.derivs is not None:
            d = np.asarray(self.derivs, dtype=float)
            if d.shape != (pts.shape[1] - 1,) + pts.shape:
                raise PreconditionError(f"derivs must have shape {(pts.shape[1] - 1,) + pts.shape}")
            object.__setattr__(self, "derivs", d)

    @property
    def dim(self):
        return self.points.shape[1] - 1

    @property
    def t(self):
        return self.grid.t

    def jet(self):
        """Samples of orders 0..dim, shape ``(N, dim+1, dim+1)`` (sample, order, coordinate)."""
        if self.derivs is not None:
            return np.concatenate([self.points[:, None, :], np.moveaxis(self.derivs, 0, 1)], axis=1)
        return numerical_jet(self.points, self.grid.h, self.dim)


def numerical_jet(points, h, order):
    """Derivatives up to ``order`` from samples, by local degree-6 polynomial fits."""
    points = np.asarray(points, dtype=float)
    if len(points) < 7:
        raise PreconditionError("need at least 7 samples for numerical derivatives")
    out = [points]
    for k in range(1, order + 1):
        out.append(savgol_filter(points, 7, 6, deriv=k, delta=h, axis=0, mode="interp"))
    return np.stack(out, axis=1)


@dataclass(frozen=True, eq=False)
class CurvatureProfile:
    """Speed, geodesic curvature and (on S^3) torsion sampled on a grid.

    ``law`` optionally gives the exact profile at arbitrary ``t`` as a tuple of
    arrays ``(v, kappa[, tau])``; ``breakpoints`` lists parameters where the
    profile may jump.  The integrator uses both when present.
    """

    grid: Grid
    v: np.ndarray
    kappa: np.ndarray
    tau: Optional[np.ndarray] = None
    law: Optional[Callable] = None
    breakpoints: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        N = len(self.grid)
        for name in ("v", "kappa", "tau"):
            val = getattr(self, name)
            if val is None:
                continue
            arr = np.asarray(val, dtype=float)
            if arr.ndim == 0:
                arr = np.full(N, float(arr))
            if arr.shape != (N,):
                raise PreconditionError(f"{name} must have {N} samples, got shape {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise PreconditionError(f"{name} has non-finite samples")
            object.__setattr__(self, name, arr)
        if np.any(self.v <= 0):
            i = int(np.argmax(self.v <= 0))
            raise ConditionViolation("speed must be positive", t=float(self.grid.t[i]))
        bps = tuple(sorted(float(b) for b in self.breakpoints if 0.0 < b < 1.0))
        object.__setattr__(self, "breakpoints", bps)

    @property
    def dim(self):
        return 2 if self.tau is None else 3

    @property
    def t(self):
        return self.grid.t

    def arrays(self):
        return (self.v, self.kappa) if self.tau is None else (self.v, self.kappa, self.tau)

    def evaluate(self, t):
        """Profile at arbitrary parameters, exact when a law is attached."""
        t = np.asarray(t, dtype=float)
        if self.law is not None:
            return tuple(np.broadcast_to(np.asarray(x, dtype=float), t.shape) for x in self.law(t))
        return tuple(f(t) for f in self._splines())

    def _splines(self):
        cache = self.__dict__.get("_spline_cache")
        if cache is None:
            cache = [_piecewise_spline(self.t, arr, self.breakpoints) for arr in self.arrays()]
            object.__setattr__(self, "_spline_cache", cache)
        return cache

    def with_arrays(self, v=None, kappa=None, tau=None, **kw):
        return CurvatureProfile(
            self.grid,
            self.v if v is None else v,
            self.kappa if kappa is None else kappa,
            self.tau if tau is None else tau,
            **kw,
        )


def _piecewise_spline(t, y, breakpoints):
    """Cubic spline interpolant restarted at each breakpoint.

    Each segment between consecutive breakpoints is fitted to the samples strictly
    inside it and extrapolated up to the breakpoint, so jumps may fall between nodes
    and a sample sitting exactly on a jump is never used for either side.
    """
    h = t[1] - t[0]
    cuts, segs = [], []
    lo = t[0]
    for b in sorted(breakpoints) + [None]:
        hi = t[-1] if b is None else b
        inside = (t >= lo - 1e-12 * h) & (t <= hi + 1e-12 * h)
        if b is not None:
            inside &= t < b - 1e-9 * h
        if cuts:
            inside &= t > cuts[-1] + 1e-9 * h
        idx = np.nonzero(inside)[0]
        if b is not None and len(idx) < 2:
            continue  # breakpoints closer than the grid spacing: keep one segment
        segs.append(idx)
        if b is not None:
            cuts.append(b)
            lo = b
    fits = []
    for idx in segs:
        if len(idx) >= 4:
            fits.append(CubicSpline(t[idx], y[idx]))
        else:
            fits.append(np.polynomial.Polynomial.fit(t[idx], y[idx], len(idx) - 1))
    cuts = np.array(cuts)

    def f(s):
        s = np.asarray(s, dtype=float)
        seg = np.searchsorted(cuts, s, side="right")
        out = np.empty(s.shape)
        for k, g in enumerate(fits):
            m = seg == k
            if m.any():
                out[m] = g(s[m])
        return out

    return f


def constant_profile(v, kappa, tau=None, n=DEFAULT_GRID, **meta):
    """Profile with constant entries and the matching exact law."""
    grid = _as_grid(n)
    vals = (float(v), float(kappa)) if tau is None else (float(v), float(kappa), float(tau))
    N = len(grid)
    arrays = [np.full(N, x) for x in vals]

    def law(t):
        return tuple(np.full(np.shape(t), x) for x in vals)

    return CurvatureProfile(grid, *arrays, law=law, meta=dict(meta))


@dataclass(frozen=True, eq=False)
class FrameCurve:
    """Sampled frames in SO3/SO4 with their continuous lift to Spin."""

    grid: Grid
    frames: np.ndarray
    lift: np.ndarray  # (N, 4) for S^2, (N, 2, 4) for S^3

    @property
    def dim(self):
        return self.frames.shape[-1] - 1

    @property
    def t(self):
        return self.grid.t

    def final_lift(self):
        from .spin_algebra import Spin4
        end = self.lift[-1]
        return Spin4(end[0], end[1]) if end.shape == (2, 4) else end.copy()


# -- Frenet frames --------------------------------------------------------------

def jacobi_matrix(sub):
    """Tridiagonal skew-symmetric matrices with subdiagonal ``sub`` (last axis)."""
    sub = np.asarray(sub, dtype=float)
    size = sub.shape[-1] + 1
    M = np.zeros(sub.shape[:-1] + (size, size))
    idx = np.arange(size - 1)
    M[..., idx + 1, idx] = sub
    M[..., idx, idx + 1] = -sub
    return M


def frames_from_jet(jet, t=None, tol=1e-12):
    """Frenet frames and the upper triangular coefficients ``C = F^T [g, g', ...]``.

    ``jet`` has shape ``(N, dim+1, dim+1)`` (sample, order, coordinate).
    """
    jet = np.asarray(jet, dtype=float)
    dim = jet.shape[-1] - 1
    A = np.swapaxes(jet, -1, -2)  # columns g, g', g'', ...
    if dim == 2:
        g = A[..., :, 0] / np.linalg.norm(A[..., :, 0], axis=-1, keepdims=True)
        d1 = A[..., :, 1] - np.sum(A[..., :, 1] * g, axis=-1, keepdims=True) * g
        speed = np.linalg.norm(d1, axis=-1)
        _check_degenerate(speed, np.linalg.norm(A[..., :, 1], axis=-1), t, "speed")
        tv = d1 / speed[..., None]
        F = np.stack([g, tv, np.cross(g, tv)], axis=-1)
    else:
        q, r = np.linalg.qr(A)
        d = np.diagonal(r, axis1=-2, axis2=-1)
        scale = np.linalg.norm(A, axis=-2)
        _check_degenerate(np.abs(d[..., 1]), scale[..., 1], t, "speed")
        _check_degenerate(np.abs(d[..., 2]), scale[..., 2], t, "geodesic curvature")
        s = np.sign(d).copy()
        s[..., 3] = 1.0
        s[s == 0] = 1.0
        F = q * s[..., None, :]
        det = np.linalg.det(F)
        F[..., :, 3] *= np.sign(det)[..., None]
    C = np.swapaxes(F, -1, -2) @ A
    return F, C


def _check_degenerate(val, scale, t, what):
    bad = val <= 1e-10 * np.maximum(scale, 1.0)
    if np.any(bad):
        i = int(np.argmax(bad.ravel()))
        where = None if t is None else float(np.ravel(t)[i])
        raise ConditionViolation(f"curve is not generic: vanishing {what}", t=where)


def frenet_frame(curve):
    """Frenet frames of a sampled curve and their continuous lift to Spin."""
    F, _ = frames_from_jet(curve.jet(), curve.t)
    try:
        lift = lift_path(F)
    except PreconditionError as exc:
        raise NumericalError(f"frame lift failed: {exc}") from exc
    flat = lift.reshape(len(lift), -1)
    jumps = np.linalg.norm(np.diff(flat, axis=0), axis=1)
    if np.max(jumps, initial=0.0) > TOL.lift_jump:
        i = int(np.argmax(jumps))
        raise NumericalError(f"frame lift jumps near t = {curve.t[i]:.6g}; refine the grid")
    return FrameCurve(curve.grid, F, lift)


def _profile_from_C(C):
    dim = C.shape[-1] - 1
    v = C[..., 1, 1]
    kappa = C[..., 2, 2] / v ** 2
    if dim == 2:
        return v, kappa
    tau = C[..., 3, 3] / (v * C[..., 2, 2])
    return v, kappa, tau


def curvature_torsion(curve):
    """Speed, geodesic curvature (signed on S^2) and torsion (S^3) of a sampled curve."""
    _, C = frames_from_jet(curve.jet(), curve.t)
    return CurvatureProfile(curve.grid, *_profile_from_C(C), meta={"source": "samples"})


ConvexityWitness = namedtuple("ConvexityWitness", "ok t")


def is_locally_convex(obj, tol=1e-9):
    """Local convexity test on the grid; returns ``(ok, t)`` with the first failing ``t``.

    Accepts a :class:`SampledCurve` or a :class:`CurvatureProfile`.  Curvature
    (S^2) or torsion (S^3) must exceed ``tol``; on S^3 the torsion sign is
    cross-checked against the sign of ``det(g, g', g'', g''')``.
    """
    t = obj.t
    if isinstance(obj, CurvatureProfile):
        key = obj.kappa if obj.dim == 2 else np.minimum(obj.kappa, obj.tau)
    else:
        jet = obj.jet()
        try:
            _, C = frames_from_jet(jet, t)
        except ConditionViolation as exc:
            return ConvexityWitness(False, exc.t)
        key = _profile_from_C(C)[-1]
        if obj.dim == 3:
            det = np.linalg.det(jet)
            scale = np.prod(np.linalg.norm(jet, axis=-1), axis=-1)
            clear = (np.abs(key) > tol) & (np.abs(det) > 1e-9 * scale)
            if np.any(np.sign(det[clear]) != np.sign(key[clear])):
                raise NumericalError("torsion sign and determinant sign disagree")
    bad = key <= tol
    return ConvexityWitness(not bad.any(), float(t[np.argmax(bad)]) if bad.any() else None)


def _sign_change_counts(points, normals):
    dots = points @ normals.T
    s = np.sign(dots)
    return np.sum(s[1:] != s[:-1], axis=0), np.min(np.abs(dots), axis=0)


def is_convex_arc(curve, trials=10_000, seed=None, t_range=None, batch=1000):
    """Monte-Carlo convexity test: no random hyperplane is crossed more than ``dim`` times.

    Counts transversal crossings of ``t -> <g(t), v>`` on the grid for ``trials``
    random normals ``v``.  Normals that make some sample nearly tangent are redrawn.
    """
    pts = curve.points if hasattr(curve, "points") else np.asarray(curve, dtype=float)
    dim = pts.shape[1] - 1
    if t_range is not None:
        t = curve.t
        lo, hi = t_range
        pts = pts[(t >= lo - 1e-12) & (t <= hi + 1e-12)]
    rng = np.random.default_rng(seed)
    done = 0
    while done < trials:
        m = min(batch, trials - done)
        normals = rng.normal(size=(m, dim + 1))
        counts, closest = _sign_change_counts(pts, normals)
        for _ in range(20):
            near = closest < 1e-12
            if not near.any():
                break
            normals[near] += 1e-6 * rng.normal(size=(near.sum(), dim + 1))
            counts[near], closest[near] = _sign_change_counts(pts, normals[near])
        if np.any(counts > dim):
            return False
        done += m
    return True


Multiconvexity = namedtuple("Multiconvexity", "k times")


def _frame_error(F):
    eye = np.eye(F.shape[-1])
    return np.max(np.abs(F - eye), axis=(-2, -1))


def multiconvex_multiplicity(curve, trials=10_000, seed=None, tol=TOL.frame_identity):
    """Multiplicity ``k`` and junction times if the S^2 curve is multiconvex, else None.

    Junctions are the interior parameters where the Frenet frame returns to the
    identity; each arc between junctions must pass :func:`is_convex_arc`.
    """
    if curve.dim != 2:
        raise PreconditionError("multiconvexity is defined for curves on S^2")
    if not is_locally_convex(curve).ok:
        return None
    F, _ = frames_from_jet(curve.jet(), curve.t)
    err = _frame_error(F)
    if err[0] > tol or err[-1] > tol:
        return None
    t = curve.t
    hits = []
    # a junction between nodes sits within one step's frame change of the nearest node
    coarse = max(1e-2, 50 * tol, 2 * np.max(np.abs(np.diff(err))))
    for i in range(1, len(t) - 1):
        if err[i] <= err[i - 1] and err[i] < err[i + 1] and err[i] < coarse:
            t_hit, e_hit = t[i], err[i]
            if curve.evaluator is not None and e_hit > 0:
                res = minimize_scalar(
                    lambda s: _frame_error(frames_from_jet(curve.evaluator(np.array([s])))[0])[0],
                    bounds=(t[i - 1], t[i + 1]), method="bounded", options={"xatol": 1e-12})
                if res.fun < e_hit:
                    t_hit, e_hit = float(res.x), float(res.fun)
            if e_hit < tol:
                hits.append(float(t_hit))
    times = [0.0] + hits + [1.0]
    for a, b in zip(times[:-1], times[1:]):
        if not is_convex_arc(curve, trials, seed, t_range=(a, b)):
            return None
    return Multiconvexity(len(times) - 1, tuple(hits))


# -- closed-form families ---------------------------------------------------------

def _curve_from_jet_fn(jet_fn, n, meta):
    grid = _as_grid(n)
    jet = jet_fn(grid.t)
    return SampledCurve(grid, jet[:, 0], np.moveaxis(jet[:, 1:], 1, 0), jet_fn, meta)


def sigma_radius(c):
    """Radius of curvature ``rho`` of the circle of length ``c``: ``c = 2 pi sin(rho)``."""
    c = float(c)
    if not (0.0 < c <= 2 * np.pi + 1e-12):
        raise PreconditionError(f"circle length must lie in (0, 2 pi], got {c}")
    return float(np.arcsin(min(c / (2 * np.pi), 1.0)))


def sigma_curvature(c):
    rho = sigma_radius(c)
    return float(np.cos(rho) / np.sin(rho))


def sigma_jet(c, m=1.0, reflect=False):
    """Jet function of the circle of length ``c`` traversed ``m`` times."""
    rho = sigma_radius(c)
    if m <= 0:
        raise PreconditionError("number of turns must be positive")
    cr, sr = np.cos(rho), np.sin(rho)
    w = 2 * np.pi * m

    def jet(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        theta = w * t
        out = np.empty((len(t), 3, 3))
        for k in range(3):
            ck = np.cos(theta + k * np.pi / 2) * w ** k
            sk = np.sin(theta + k * np.pi / 2) * w ** k
            base = np.array([cr * cr, 0.0, cr * sr]) if k == 0 else np.zeros(3)
            out[:, k, 0] = base[0] + sr * sr * ck
            out[:, k, 1] = base[1] + sr * sk
            out[:, k, 2] = base[2] - sr * cr * ck
        if reflect:
            out[:, :, 2] *= -1
        return out

    return jet


def sigma(c, m=1.0, n=DEFAULT_GRID, reflect=False):
    """Circle of length ``c`` on S^2 with identity initial frame, run ``m`` times."""
    name = "sigma_bar" if reflect else "sigma"
    return _curve_from_jet_fn(sigma_jet(c, m, reflect), n, {"family": name, "c": float(c), "m": float(m)})


def sigma_profile(c, m=1.0, n=DEFAULT_GRID, reflect=False):
    k = sigma_curvature(c)
    return constant_profile(float(c) * m, -k if reflect else k, n=n,
                            family="sigma_bar" if reflect else "sigma", c=float(c), m=float(m))


def xi(c, a, n=DEFAULT_GRID):
    """Curve ``(c1 cos a1 t, c1 sin a1 t, ...)``, with a leading constant ``c0`` on S^2.

    Pass ``len(c) == len(a)`` for S^3 (even ambient dimension) or
    ``len(c) == len(a) + 1`` for S^2, where ``c[0]`` is the constant coordinate.
    """
    c = np.asarray(c, dtype=float)
    a = np.asarray(a, dtype=float)
    if np.any(c <= 0) or np.any(a <= 0):
        raise PreconditionError("coefficients and frequencies must be positive")
    if abs(np.sum(c ** 2) - 1.0) > 1e-12:
        raise PreconditionError("coefficients must satisfy sum c_i^2 = 1")
    if len(np.unique(a)) != len(a):
        raise PreconditionError("frequencies must be mutually distinct")
    lead = len(c) - len(a)
    if lead not in (0, 1):
        raise PreconditionError("need len(c) == len(a) or len(c) == len(a) + 1")
    size = 2 * len(a) + lead
    if size not in (3, 4):
        raise PreconditionError("only curves on S^2 and S^3 are supported")
    dim = size - 1
    amp = c[lead:]

    def jet(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros((len(t), dim + 1, size))
        if lead:
            out[:, 0, 0] = c[0]
        for k in range(dim + 1):
            for j, (cj, aj) in enumerate(zip(amp, a)):
                ph = aj * t + k * np.pi / 2
                out[:, k, lead + 2 * j] = cj * aj ** k * np.cos(ph)
                out[:, k, lead + 2 * j + 1] = cj * aj ** k * np.sin(ph)
        return out

    return _curve_from_jet_fn(jet, n, {"family": "xi", "c": c.tolist(), "a": a.tolist()})


def constant_jacobi_jet(Lam):
    """Jet function of ``t -> exp(t Lam) e1`` for a constant skew matrix."""
    Lam = np.asarray(Lam, dtype=float)
    size = len(Lam)
    w, V = np.linalg.eig(Lam)
    Vinv = np.linalg.inv(V)
    e1 = np.zeros(size)
    e1[0] = 1.0
    coef = Vinv @ e1

    def jet(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        ph = np.exp(np.outer(t, w))  # (N, size)
        out = np.empty((len(t), size, size))
        for k in range(size):
            out[:, k, :] = np.real((ph * (w ** k * coef)) @ V.T)
        return out

    return jet


def jacobi_curve(sub, n=DEFAULT_GRID, **meta):
    """Curve ``exp(t Lam) e1`` for the constant Jacobi matrix with subdiagonal ``sub``."""
    Lam = jacobi_matrix(sub)
    curve = _curve_from_jet_fn(constant_jacobi_jet(Lam), n, dict(meta, subdiagonal=list(map(float, sub))))
    return curve


# constant profiles (v, kappa, tau) of the spiral family on S^3
_S3 = np.sqrt(3.0)
GAMMA_1_1 = (_S3 * np.pi / 2, 2 / _S3, 1.0)
GAMMA_1_2 = (_S3 * np.pi, 2 / _S3, 1.0)
OMEGA3 = (2 * _S3 * np.pi, 2 / _S3, 1.0)


def _subdiag(vkt):
    v, k, t = vkt
    return (v, v * k, v * t)


def gamma_1_1(n=DEFAULT_GRID):
    return jacobi_curve(_subdiag(GAMMA_1_1), n, family="gamma11")


def gamma_1_2(n=DEFAULT_GRID):
    return jacobi_curve(_subdiag(GAMMA_1_2), n, family="gamma12")


def omega3(n=DEFAULT_GRID):
    return jacobi_curve(_subdiag(OMEGA3), n, family="omega3")


def gamma_1_1_profile(n=DEFAULT_GRID):
    return constant_profile(*GAMMA_1_1, n=n, family="gamma11")


def gamma_1_2_profile(n=DEFAULT_GRID):
    return constant_profile(*GAMMA_1_2, n=n, family="gamma12")


def omega3_profile(n=DEFAULT_GRID):
    return constant_profile(*OMEGA3, n=n, family="omega3")


def omega3_formula(t):
    """Closed-form coordinates of the four-turn spiral on S^3."""
    t = np.asarray(t, dtype=float)
    a, b = 2 * np.pi * t, 6 * np.pi * t
    return np.stack([
        np.cos(b) / 4 + 3 * np.cos(a) / 4,
        _S3 / 4 * np.sin(b) + _S3 / 4 * np.sin(a),
        _S3 / 4 * np.cos(a) - _S3 / 4 * np.cos(b),
        3 * np.sin(a) / 4 - np.sin(b) / 4,
    ], axis=-1)
