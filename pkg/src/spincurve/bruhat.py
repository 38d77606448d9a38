"""Signed permutations, Bruhat cells of SO3/SO4 and their lifts to Spin.

A matrix Q in SO_{n+1} lies in the cell of the signed permutation P when
``U Q U' = P`` for upper triangular U, U' with positive diagonal.  The cell
is found by elimination with positive pivots; the lifted cell of a spin
element is found by lifting a path inside the cell from Q to P.
"""

from dataclasses import dataclass
from itertools import permutations, product

import numpy as np

from .config import TOL
from .errors import NumericalError, PreconditionError
from .spin_algebra import Spin4, lift_path, pi3, pi4, unit_quaternion


@dataclass(frozen=True)
class SignedPermutation:
    """Signed permutation matrix; column ``j`` holds ``signs[j]`` in row ``perm[j]``."""

    perm: tuple
    signs: tuple

    def __post_init__(self):
        perm = tuple(int(p) for p in self.perm)
        signs = tuple(int(s) for s in self.signs)
        if sorted(perm) != list(range(len(perm))):
            raise PreconditionError(f"{perm} is not a permutation")
        if len(signs) != len(perm) or any(s not in (-1, 1) for s in signs):
            raise PreconditionError("signs must be a tuple of +-1 of the same size")
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "signs", signs)

    @property
    def size(self):
        return len(self.perm)

    @classmethod
    def from_matrix(cls, M, tol=1e-8):
        M = np.asarray(M, dtype=float)
        perm, signs = [], []
        for j in range(M.shape[1]):
            i = int(np.argmax(np.abs(M[:, j])))
            if abs(abs(M[i, j]) - 1.0) > tol:
                raise PreconditionError("matrix is not a signed permutation")
            perm.append(i)
            signs.append(1 if M[i, j] > 0 else -1)
        sp = cls(tuple(perm), tuple(signs))
        if np.max(np.abs(sp.matrix() - M)) > tol:
            raise PreconditionError("matrix is not a signed permutation")
        return sp

    def matrix(self):
        M = np.zeros((self.size, self.size))
        M[list(self.perm), range(self.size)] = self.signs
        return M

    def det(self):
        return int(round(np.linalg.det(self.matrix())))

    def __str__(self):
        rows = []
        for row in self.matrix().astype(int):
            rows.append(" ".join(f"{x:2d}" for x in row))
        return "\n".join(rows)


def inv_count(p):
    """Number of inversions of the underlying permutation (signs ignored)."""
    perm = p.perm if isinstance(p, SignedPermutation) else tuple(p)
    n = len(perm)
    return sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])


def enumerate_b_plus(n):
    """All signed permutation matrices of size n+1 with determinant +1."""
    if n not in (2, 3):
        raise PreconditionError("only n = 2 and n = 3 are supported")
    out = []
    for perm in permutations(range(n + 1)):
        for signs in product((1, -1), repeat=n + 1):
            sp = SignedPermutation(perm, signs)
            if sp.det() == 1:
                out.append(sp)
    return out


def rho(n):
    """The order-reversing permutation of size n+1 (unsigned)."""
    return SignedPermutation(tuple(range(n, -1, -1)), (1,) * (n + 1))


def _check_so(Q, tol=TOL.so_membership):
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] not in (3, 4):
        raise PreconditionError(f"expected a 3x3 or 4x4 matrix, got shape {Q.shape}")
    err = np.max(np.abs(Q.T @ Q - np.eye(len(Q))))
    if err > tol or abs(np.linalg.det(Q) - 1.0) > tol:
        raise PreconditionError(f"matrix is not special orthogonal (|Q^T Q - I| = {err:.3g})")
    return Q


@dataclass(frozen=True, eq=False)
class Elimination:
    """Result of positive-pivot elimination: ``U @ Q @ Uprime = P``."""

    P: SignedPermutation
    U: np.ndarray
    Uprime: np.ndarray


def eliminate(Q, pivot_tol=TOL.pivot):
    """Reduce ``Q`` to a signed permutation with upper triangular positive-diagonal factors."""
    M = np.array(Q, dtype=float)
    size = len(M)
    L = np.eye(size)
    R = np.eye(size)
    free_rows = list(range(size))
    perm, signs = [0] * size, [0] * size
    for j in range(size):
        col = M[:, j]
        scale = max(np.linalg.norm(col), 1e-300)
        cand = [i for i in free_rows if abs(col[i]) > pivot_tol * scale]
        if not cand:
            raise NumericalError(f"no pivot above threshold in column {j}: cell is numerically ambiguous")
        i = max(cand)
        piv = M[i, j]
        # clear column j above the pivot with row operations (upward only)
        for k in range(i):
            if M[k, j] != 0.0:
                c = -M[k, j] / piv
                M[k] += c * M[i]
                L[k] += c * L[i]
        # clear row i right of the pivot with column operations (rightward only)
        for m in range(j + 1, size):
            if M[i, m] != 0.0:
                c = -M[i, m] / piv
                M[:, m] += c * M[:, j]
                R[:, m] += c * R[:, j]
        # entries of free rows below i in this column are below threshold; drop them
        M[:, j] = 0.0
        M[i, j] = piv
        free_rows.remove(i)
        perm[j], signs[j] = i, (1 if piv > 0 else -1)
    D = np.array([abs(M[perm[j], j]) for j in np.argsort(perm)])
    U = L / D[:, None]
    return Elimination(SignedPermutation(tuple(perm), tuple(signs)), U, R)


def classify_so(Q, pivot_tol=TOL.pivot):
    """Signed permutation P in B+ with Q in the Bruhat cell of P."""
    Q = _check_so(Q)
    return eliminate(Q, pivot_tol).P


def _orth_factor(A):
    q, r = np.linalg.qr(A)
    s = np.sign(np.diag(r))
    s[s == 0] = 1.0
    return q * s


def reduction_path(Q, samples=256, elimination=None):
    """Samples of a path ``s -> Q(s)`` inside the cell of Q from Q to its signed permutation.

    ``Q(s)`` is the orthogonal factor of ``U(s) Q U'(s)`` where ``U(s)`` and ``U'(s)``
    interpolate linearly from the identity to the elimination factors.
    Returns ``(s, path)`` with ``path[-1]`` exactly the permutation matrix.
    """
    Q = _check_so(Q)
    el = elimination if elimination is not None else eliminate(Q)
    size = len(Q)
    s = np.linspace(0.0, 1.0, samples + 1)
    path = np.empty((len(s), size, size))
    eye = np.eye(size)
    for k, sk in enumerate(s):
        A = ((1 - sk) * eye + sk * el.U) @ Q @ ((1 - sk) * eye + sk * el.Uprime)
        path[k] = _orth_factor(A)
    path[0] = Q
    path[-1] = el.P.matrix()
    return s, path


@dataclass(frozen=True, eq=False)
class BruhatCellSpin:
    """Lifted Bruhat cell: the SO label and the spin lift of its permutation matrix."""

    rep_so: SignedPermutation
    lift: object  # unit quaternion (n = 2) or Spin4 (n = 3)

    def same_cell(self, other, atol=1e-6):
        if self.rep_so != other.rep_so:
            return False
        if isinstance(self.lift, Spin4):
            return self.lift.allclose(other.lift, atol)
        return bool(np.allclose(self.lift, other.lift, atol=atol))


def classify_spin(z, samples=256, max_samples=1 << 15):
    """Lifted Bruhat cell containing the spin element ``z`` (unit quaternion or Spin4)."""
    if isinstance(z, Spin4) or np.asarray(z).shape == (2, 4):
        z = z if isinstance(z, Spin4) else Spin4(*np.asarray(z, dtype=float))
        unit_quaternion(z.left, tol=TOL.unit_input)
        unit_quaternion(z.right, tol=TOL.unit_input)
        Q = pi4(z)
        start = z
    else:
        start = unit_quaternion(z, tol=TOL.unit_input)
        Q = pi3(start)
    el = eliminate(_check_so(Q))
    while samples <= max_samples:
        _, path = reduction_path(Q, samples, el)
        try:
            lifts = lift_path(path, start=start)
        except NumericalError:
            lifts = None
        if lifts is not None:
            flat = lifts.reshape(len(lifts), -1)
            jumps = np.linalg.norm(np.diff(flat, axis=0), axis=1)
            if np.max(jumps, initial=0.0) <= TOL.lift_jump:
                end = lifts[-1]
                lift = Spin4(end[0], end[1]) if end.shape == (2, 4) else end
                return BruhatCellSpin(el.P, lift)
        samples *= 2
    raise NumericalError("lifted reduction path keeps jumping; cell cannot be resolved")


def random_up_plus(size, rng, scale=1.0):
    """Random upper triangular matrix with positive diagonal."""
    U = np.triu(rng.normal(scale=scale, size=(size, size)), 1)
    U[np.diag_indices(size)] = np.exp(rng.normal(scale=0.5 * scale, size=size))
    return U


def random_so(size, rng):
    """Haar-random element of SO(size) from the QR of a Gaussian matrix."""
    q = _orth_factor(rng.normal(size=(size, size)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def up_plus_action(Q, U, Uprime):
    """Orthogonal factor of ``U Q U'``; stays in the Bruhat cell of Q."""
    return _orth_factor(np.asarray(U) @ np.asarray(Q) @ np.asarray(Uprime))


def cell_representative(P, U, Uprime):
    """Orthogonal factor of ``U P U'``: a point of the cell of P."""
    return _orth_factor(np.asarray(U) @ P.matrix() @ np.asarray(Uprime))
