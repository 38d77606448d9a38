"""Splitting a curve on S^3 into a pair of curves on S^2 with a shared speed, and back.

A profile ``(v, kappa, tau)`` on S^3 with ``kappa > 0`` corresponds to the pair

    v_pair = v kappa,  kappa_l = (tau + 1)/kappa,  kappa_r = (tau - 1)/kappa

whose spin lifts solve ``q' = q (b i + d k)`` with

    d = v kappa / 2,  b_l = v (tau + 1)/2,  b_r = v (tau - 1)/2.
"""

from collections import namedtuple
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .curves import CurvatureProfile, Grid
from .errors import ConditionViolation, PreconditionError
from .frames_ode import integrate_spin3, spin_endpoint
from .spin_algebra import Spin4

BBD = namedtuple("BBD", "b_l b_r d")
ConditionWitness = namedtuple("ConditionWitness", "ok t")


@dataclass(frozen=True, eq=False)
class CurvePair:
    """Two curves on S^2 sharing the speed ``v``, with curvatures ``kappa_l``, ``kappa_r``.

    ``z_l``, ``z_r`` are the final spin lifts (filled in by :func:`pair_endpoints`).
    ``law(t) -> (v, kappa_l, kappa_r)`` gives exact values between samples.
    """

    grid: Grid
    v: np.ndarray
    kappa_l: np.ndarray
    kappa_r: np.ndarray
    z_l: Optional[np.ndarray] = None
    z_r: Optional[np.ndarray] = None
    law: Optional[Callable] = None
    breakpoints: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        N = len(self.grid)
        for name in ("v", "kappa_l", "kappa_r"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim == 0:
                arr = np.full(N, float(arr))
            if arr.shape != (N,):
                raise PreconditionError(f"{name} must have {N} samples")
            object.__setattr__(self, name, arr)
        if np.any(self.v <= 0):
            raise ConditionViolation("shared speed must be positive", t=float(self.t[np.argmax(self.v <= 0)]))
        object.__setattr__(self, "breakpoints", tuple(sorted(self.breakpoints)))

    @property
    def t(self):
        return self.grid.t

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        if self.law is not None:
            return tuple(np.broadcast_to(np.asarray(x, dtype=float), t.shape) for x in self.law(t))
        left, right = self.left(), self.right()
        v, kl = left.evaluate(t)
        _, kr = right.evaluate(t)
        return v, kl, kr

    def _side(self, which):
        k = self.kappa_l if which == 0 else self.kappa_r
        law = None
        if self.law is not None:
            base = self.law

            def law(t):
                vals = base(t)
                return vals[0], vals[1 + which]
        return CurvatureProfile(self.grid, self.v, k, None, law, self.breakpoints,
                                {"side": "left" if which == 0 else "right"})

    def left(self):
        """Profile of the left curve on S^2."""
        return self._side(0)

    def right(self):
        """Profile of the right curve on S^2."""
        return self._side(1)

    def final_spin(self):
        if self.z_l is None or self.z_r is None:
            return pair_endpoints(self).final_spin()
        return Spin4(self.z_l, self.z_r)


def _require_s3(p):
    if not isinstance(p, CurvatureProfile) or p.dim != 3:
        raise PreconditionError("expected a curvature profile on S^3")


def _require_positive_kappa(p):
    bad = p.kappa <= 0
    if np.any(bad):
        i = int(np.argmax(bad))
        raise ConditionViolation("geodesic curvature must be positive", t=float(p.t[i]))


def bbd_from_profile(p):
    """Coefficients ``(b_l, b_r, d)`` of the spin log-derivatives of an S^3 profile."""
    _require_s3(p)
    _require_positive_kappa(p)
    return _bbd(p.v, p.kappa, p.tau)


def _bbd(v, kappa, tau):
    return BBD(v * (tau + 1) / 2, v * (tau - 1) / 2, v * kappa / 2)


def spin_tangent_s2(v, kappa):
    """Imaginary quaternion ``(v kappa/2) i + (v/2) k`` lifting the log-derivative of an S^2 profile."""
    v = np.asarray(v, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    return np.stack([v * kappa / 2, np.zeros_like(v), v / 2], axis=-1)


def spin_lift_s2(p):
    """Spin lift path ``(N, 4)`` of the S^2 curve with profile ``p``."""
    def h(t):
        v, k = p.evaluate(t)
        return spin_tangent_s2(v, k)
    return integrate_spin3(h, p.grid, p.breakpoints)


def refined_grid(p, rate, max_angle=0.01):
    """Grid fine enough that a step turns by at most ``max_angle`` at angular ``rate``."""
    m = max(1, int(np.ceil(np.max(rate) * p.grid.h / max_angle)))
    return Grid(p.grid.n * m)


def spin_endpoint_s2(p, max_angle=0.01):
    """Final spin lift of an S^2 profile, integrated on a grid refined to resolve fast turning."""
    def h(t):
        v, k = p.evaluate(t)
        return spin_tangent_s2(v, k)
    rate = np.linalg.norm(spin_tangent_s2(p.v, p.kappa), axis=-1)
    return spin_endpoint(h, refined_grid(p, rate, max_angle), p.breakpoints)


def pair_endpoints(pair):
    """Return ``pair`` with its final spin lifts ``z_l``, ``z_r`` computed by integration."""
    zl = spin_endpoint_s2(pair.left())
    zr = spin_endpoint_s2(pair.right())
    return CurvePair(pair.grid, pair.v, pair.kappa_l, pair.kappa_r, zl, zr,
                     pair.law, pair.breakpoints, dict(pair.meta))


def _split(v, kappa, tau):
    return v * kappa, (tau + 1) / kappa, (tau - 1) / kappa


def _join(v, kl, kr):
    gap = kl - kr
    return v * gap / 2, 2 / gap, (kl + kr) / gap


def decompose3(p, endpoints=True):
    """Left and right S^2 curves of an S^3 profile with ``kappa > 0``."""
    _require_s3(p)
    _require_positive_kappa(p)
    v, kl, kr = _split(p.v, p.kappa, p.tau)
    law = None
    if p.law is not None:
        base = p.law

        def law(t):
            return _split(*base(t))
    pair = CurvePair(p.grid, v, kl, kr, law=law, breakpoints=p.breakpoints, meta=dict(p.meta))
    return pair_endpoints(pair) if endpoints else pair


def check_condition(pair, which="G"):
    """Pointwise ``kappa_l > kappa_r`` (G) or ``kappa_l > |kappa_r|`` (L) on the samples."""
    which = which.upper()
    if which == "G":
        bad = ~(pair.kappa_l > pair.kappa_r)
    elif which == "L":
        bad = ~(pair.kappa_l > np.abs(pair.kappa_r))
    else:
        raise PreconditionError("condition must be 'G' or 'L'")
    if np.any(bad):
        return ConditionWitness(False, float(pair.t[np.argmax(bad)]))
    return ConditionWitness(True, None)


def compose3(pair):
    """S^3 profile of a pair satisfying condition (G)."""
    ok, t = check_condition(pair, "G")
    if not ok:
        raise ConditionViolation(f"condition (G) fails at t = {t:.6g}", t=t)
    v, kappa, tau = _join(pair.v, pair.kappa_l, pair.kappa_r)
    law = None
    if pair.law is not None:
        base = pair.law

        def law(t):
            return _join(*base(t))
    return CurvatureProfile(pair.grid, v, kappa, tau, law, pair.breakpoints, dict(pair.meta))
