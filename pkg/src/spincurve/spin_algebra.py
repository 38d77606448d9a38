"""Quaternions, the covering maps Spin3 -> SO3 and Spin4 -> SO4, and their inverses.

Quaternions are float arrays ``(a, b, c, d)`` standing for ``a + b i + c j + d k``;
every function broadcasts over leading axes.  Imaginary quaternions are given
either as 3-vectors ``(b, c, d)`` or as 4-vectors with zero real part.

An element of Spin4 = S^3 x S^3 is a :class:`Spin4` pair ``(left, right)``
acting on R^4 = H by ``q -> left * q * conj(right)``.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import TOL
from .errors import NumericalError, PreconditionError

ONE = np.array([1.0, 0.0, 0.0, 0.0])
I = np.array([0.0, 1.0, 0.0, 0.0])
J = np.array([0.0, 0.0, 1.0, 0.0])
K = np.array([0.0, 0.0, 0.0, 1.0])


def quat(a, b=0.0, c=0.0, d=0.0):
    return np.array([a, b, c, d], dtype=float)


def quat_mul(p, q):
    """Hamilton product of quaternion arrays (broadcasting)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    a1, b1, c1, d1 = np.moveaxis(p, -1, 0)
    a2, b2, c2, d2 = np.moveaxis(q, -1, 0)
    return np.stack([
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ], axis=-1)


def quat_conj(q):
    return np.asarray(q, dtype=float) * np.array([1.0, -1.0, -1.0, -1.0])


def quat_norm(q):
    return np.linalg.norm(np.asarray(q, dtype=float), axis=-1)


def unit_quaternion(q, tol=TOL.construction):
    """Validate ``|q| = 1`` within ``tol`` and return ``q`` as a float array."""
    q = np.asarray(q, dtype=float)
    if q.shape[-1] != 4:
        raise PreconditionError(f"quaternion must have 4 components, got shape {q.shape}")
    dev = np.max(np.abs(quat_norm(q) - 1.0))
    if dev > tol:
        raise PreconditionError(f"quaternion is not of unit norm (deviation {dev:.3g})")
    return q


def renormalize(q):
    q = np.asarray(q, dtype=float)
    return q / quat_norm(q)[..., None]


def imaginary(h):
    """Return the ``(b, c, d)`` coordinates of an imaginary quaternion."""
    h = np.asarray(h, dtype=float)
    if h.shape[-1] == 3:
        return h
    if h.shape[-1] == 4:
        if np.max(np.abs(h[..., 0]), initial=0.0) > TOL.construction:
            raise PreconditionError("imaginary quaternion has a nonzero real part")
        return h[..., 1:]
    raise PreconditionError(f"imaginary quaternion must have 3 or 4 components, got {h.shape}")


def _as_im4(h):
    h3 = imaginary(h)
    return np.concatenate([np.zeros(h3.shape[:-1] + (1,)), h3], axis=-1)


@dataclass(frozen=True, eq=False)
class Spin4:
    """A point of S^3 x S^3 (or a path of them when the arrays carry leading axes)."""

    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "left", np.asarray(self.left, dtype=float))
        object.__setattr__(self, "right", np.asarray(self.right, dtype=float))

    @classmethod
    def identity(cls):
        return cls(ONE, ONE)

    def __neg__(self):
        return Spin4(-self.left, -self.right)

    def __mul__(self, other):
        return Spin4(quat_mul(self.left, other.left), quat_mul(self.right, other.right))

    def __getitem__(self, idx):
        return Spin4(self.left[idx], self.right[idx])

    def __len__(self):
        return len(self.left)

    def as_array(self):
        """Stack to shape ``(..., 2, 4)``."""
        return np.stack([self.left, self.right], axis=-2)

    def distance(self, other):
        """Product-metric distance (Euclidean in R^8)."""
        return np.linalg.norm(self.as_array() - other.as_array(), axis=(-2, -1))

    def allclose(self, other, atol=1e-8):
        return bool(np.all(self.distance(other) <= atol))

    def __repr__(self):
        return f"Spin4(left={np.array2string(self.left, precision=6)}, right={np.array2string(self.right, precision=6)})"


def _spin4_parts(z, zr=None):
    if zr is not None:
        return np.asarray(z, dtype=float), np.asarray(zr, dtype=float)
    if isinstance(z, Spin4):
        return z.left, z.right
    arr = np.asarray(z, dtype=float)
    if arr.shape[-2:] == (2, 4):
        return arr[..., 0, :], arr[..., 1, :]
    raise PreconditionError("expected a Spin4 pair")


# -- covering maps -------------------------------------------------------------

def _pi3_formula(z):
    a, b, c, d = np.moveaxis(z, -1, 0)
    rows = [
        [a * a + b * b - c * c - d * d, -2 * a * d + 2 * b * c, 2 * a * c + 2 * b * d],
        [2 * a * d + 2 * b * c, a * a - b * b + c * c - d * d, -2 * a * b + 2 * c * d],
        [-2 * a * c + 2 * b * d, 2 * a * b + 2 * c * d, a * a - b * b - c * c + d * d],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def pi3(z):
    """Rotation ``h -> z h conj(z)`` of Im H = R^3 as a 3x3 matrix."""
    z = unit_quaternion(z, tol=TOL.unit_input)
    return _pi3_formula(z)


def _pi4_formula(zl, zr):
    al, bl, cl, dl = np.moveaxis(zl, -1, 0)
    ar, br, cr, dr = np.moveaxis(zr, -1, 0)
    c1 = [al * ar + bl * br + cl * cr + dl * dr,
          -al * br + bl * ar - cl * dr + dl * cr,
          -al * cr + bl * dr + cl * ar - dl * br,
          -al * dr - bl * cr + cl * br + dl * ar]
    c2 = [al * br - bl * ar - cl * dr + dl * cr,
          al * ar + bl * br - cl * cr - dl * dr,
          al * dr + bl * cr + cl * br + dl * ar,
          -al * cr + bl * dr - cl * ar + dl * br]
    c3 = [al * cr + bl * dr - cl * ar - dl * br,
          -al * dr + bl * cr + cl * br - dl * ar,
          al * ar - bl * br + cl * cr - dl * dr,
          al * br + bl * ar + cl * dr + dl * cr]
    c4 = [al * dr - bl * cr + cl * br - dl * ar,
          al * cr + bl * dr + cl * ar + dl * br,
          -al * br - bl * ar + cl * dr + dl * cr,
          al * ar - bl * br - cl * cr + dl * dr]
    cols = [np.stack(c, axis=-1) for c in (c1, c2, c3, c4)]
    return np.stack(cols, axis=-1)


def pi4(z, zr=None):
    """Rotation ``q -> z_l q conj(z_r)`` of H = R^4 as a 4x4 matrix.

    Accepts a :class:`Spin4`, an array of shape ``(..., 2, 4)``, or the two
    components as separate arguments.
    """
    zl, zr = _spin4_parts(z, zr)
    unit_quaternion(zl, tol=TOL.unit_input)
    unit_quaternion(zr, tol=TOL.unit_input)
    return _pi4_formula(zl, zr)


def dpi3(h):
    """Differential of ``pi3`` at 1: the skew matrix of ``v -> h v - v h = 2 h x v``."""
    b, c, d = np.moveaxis(imaginary(h), -1, 0)
    z = np.zeros_like(b)
    rows = [[z, -2 * d, 2 * c], [2 * d, z, -2 * b], [-2 * c, 2 * b, z]]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def dpi4(h_l, h_r):
    """Differential of ``pi4`` at (1, 1): the skew matrix of ``z -> h_l z - z h_r``."""
    bl, cl, dl = np.moveaxis(imaginary(h_l), -1, 0)
    br, cr, dr = np.moveaxis(imaginary(h_r), -1, 0)
    z = np.zeros_like(bl + br)
    rows = [
        [z, -(bl - br), -(cl - cr), -(dl - dr)],
        [bl - br, z, -(dl + dr), cl + cr],
        [cl - cr, dl + dr, z, -(bl + br)],
        [dl - dr, -(cl + cr), bl + br, z],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def dpi3_inverse(lam):
    """Imaginary quaternion ``h`` (as ``(b, c, d)``) with ``dpi3(h) = lam``."""
    lam = np.asarray(lam, dtype=float)
    return np.stack([lam[..., 2, 1], lam[..., 0, 2], lam[..., 1, 0]], axis=-1) / 2.0


def dpi4_inverse(lam):
    """Pair ``(h_l, h_r)`` of 3-vectors with ``dpi4(h_l, h_r) = lam``."""
    lam = np.asarray(lam, dtype=float)
    b_minus, c_minus, d_minus = lam[..., 1, 0], lam[..., 2, 0], lam[..., 3, 0]
    d_plus, c_plus, b_plus = lam[..., 2, 1], -lam[..., 3, 1], lam[..., 3, 2]
    h_l = np.stack([b_plus + b_minus, c_plus + c_minus, d_plus + d_minus], axis=-1) / 2.0
    h_r = np.stack([b_plus - b_minus, c_plus - c_minus, d_plus - d_minus], axis=-1) / 2.0
    return h_l, h_r


def exp_im(h, t=1.0):
    """``exp(t h)`` for an imaginary quaternion ``h``; always a unit quaternion."""
    h3 = imaginary(h)
    t = np.asarray(t, dtype=float)
    norm = np.linalg.norm(h3, axis=-1)
    theta = t * norm
    small = np.abs(norm) < 1e-8
    safe = np.where(small, 1.0, norm)
    # sin(t|h|)/|h| -> t (1 - (t|h|)^2/6) near 0
    sinc = np.where(small, t * (1.0 - theta ** 2 / 6.0), np.sin(theta) / safe)
    out = np.concatenate([np.cos(theta)[..., None], sinc[..., None] * h3], axis=-1)
    return renormalize(out)


# -- local inverses ------------------------------------------------------------

def _check_special_orthogonal(R, size):
    R = np.asarray(R, dtype=float)
    if R.shape != (size, size):
        raise PreconditionError(f"expected a {size}x{size} matrix, got shape {R.shape}")
    orth = np.max(np.abs(R.T @ R - np.eye(size)))
    if orth > TOL.so_membership:
        raise PreconditionError(f"matrix is not orthogonal (|R^T R - I| = {orth:.3g})")
    if abs(np.linalg.det(R) - 1.0) > TOL.so_membership:
        raise PreconditionError("matrix has determinant -1")
    return R


@lru_cache(maxsize=None)
def _pi4_linear_map():
    """16x16 ``T`` with ``vec(pi4(zl, zr)) = T vec(outer(zl, zr))``, and its inverse.

    Read off the explicit column formulas, which are bilinear in the two
    quaternions.
    """
    E = np.eye(4)
    T = np.empty((16, 16))
    for a in range(4):
        for b in range(4):
            T[:, 4 * a + b] = _pi4_formula(E[a], E[b]).ravel()
    return T, np.linalg.inv(T)


def _dominant_rank_one(M, tol=TOL.power_iteration, max_iter=200):
    """Leading singular triple of a (numerically) rank-one 4x4 matrix by power iteration."""
    start = np.argmax(np.linalg.norm(M, axis=0))
    u = M[:, start].copy()
    if np.linalg.norm(u) == 0.0:
        raise NumericalError("rank-one extraction failed: zero matrix")
    u /= np.linalg.norm(u)
    MMt = M @ M.T
    for _ in range(max_iter):
        w = MMt @ u
        nw = np.linalg.norm(w)
        if nw == 0.0:
            raise NumericalError("rank-one extraction failed: power iteration collapsed")
        w /= nw
        if np.linalg.norm(w - u) < tol:
            u = w
            break
        u = w
    v = M.T @ u
    sigma = np.linalg.norm(v)
    v = v / sigma
    residual = np.max(np.abs(M - sigma * np.outer(u, v)))
    if abs(sigma - 1.0) > 1e-6 or residual > 1e-6:
        raise NumericalError(
            f"rank-one extraction failed (sigma={sigma:.6g}, residual={residual:.3g})")
    return u, v


def so4_to_spin(R, hint=None):
    """Preimage of ``R`` under ``pi4``, choosing the sign closest to ``hint``."""
    R = _check_special_orthogonal(R, 4)
    _, T_inv = _pi4_linear_map()
    M = (T_inv @ R.ravel()).reshape(4, 4)
    zl, zr = _dominant_rank_one(M)
    z = Spin4(renormalize(zl), renormalize(zr))
    if hint is None:
        hint = Spin4.identity()
    if (-z).distance(hint) < z.distance(hint):
        z = -z
    err = np.max(np.abs(pi4(z) - R))
    if err > TOL.round_trip:
        raise NumericalError(f"so4_to_spin round trip failed (error {err:.3g})")
    return z


def so3_to_spin(R, hint=None):
    """Preimage of ``R`` under ``pi3``, choosing the sign closest to ``hint``."""
    R = _check_special_orthogonal(R, 3)
    # z z^T is linear in the entries of pi3(z) once a^2+b^2+c^2+d^2 = 1 is used
    tr = np.trace(R)
    M = np.empty((4, 4))
    M[0, 0] = 1.0 + tr
    M[1, 1] = 1.0 + 2 * R[0, 0] - tr
    M[2, 2] = 1.0 + 2 * R[1, 1] - tr
    M[3, 3] = 1.0 + 2 * R[2, 2] - tr
    M[0, 1] = M[1, 0] = R[2, 1] - R[1, 2]
    M[0, 2] = M[2, 0] = R[0, 2] - R[2, 0]
    M[0, 3] = M[3, 0] = R[1, 0] - R[0, 1]
    M[1, 2] = M[2, 1] = R[0, 1] + R[1, 0]
    M[1, 3] = M[3, 1] = R[0, 2] + R[2, 0]
    M[2, 3] = M[3, 2] = R[1, 2] + R[2, 1]
    u, _ = _dominant_rank_one(M / 4.0)
    z = renormalize(u)
    if hint is None:
        hint = ONE
    if np.linalg.norm(-z - hint) < np.linalg.norm(z - hint):
        z = -z
    err = np.max(np.abs(pi3(z) - R))
    if err > TOL.round_trip:
        raise NumericalError(f"so3_to_spin round trip failed (error {err:.3g})")
    return z


def lift_path(frames, start=None):
    """Continuous lift of a sampled SO3 or SO4 path, each sample hinted by the previous one.

    Returns an array of shape ``(N, 4)`` for SO3 or ``(N, 2, 4)`` for SO4.
    """
    frames = np.asarray(frames, dtype=float)
    size = frames.shape[-1]
    if size == 3:
        hint = ONE if start is None else np.asarray(start, dtype=float)
        out = np.empty((len(frames), 4))
        for i, R in enumerate(frames):
            hint = so3_to_spin(R, hint)
            out[i] = hint
        return out
    hint = Spin4.identity() if start is None else start
    out = np.empty((len(frames), 2, 4))
    for i, R in enumerate(frames):
        hint = so4_to_spin(R, hint)
        out[i] = hint.as_array()
    return out
