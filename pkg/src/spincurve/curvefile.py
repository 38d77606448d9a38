"""Plain-text curve files.

One curve per file.  The first line is ``#spincurve `` followed by a JSON header
(sphere dimension, kind, grid size, column names, breakpoints, metadata); each
following line holds one sample, numbers written with 17 significant digits so
that reading back is exact.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .curves import CurvatureProfile, Grid, SampledCurve
from .errors import CurveFileError, PreconditionError
from .spin_algebra import Spin4

MAGIC = "#spincurve "
KINDS = ("profile", "samples")


def _jsonable(x):
    if isinstance(x, Spin4):
        return [_jsonable(x.left), _jsonable(x.right)]
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    return None  # objects without a textual form are dropped


@dataclass
class CurveFile:
    """Columns of a curve file plus its header."""

    sphere_dim: int
    kind: str
    n: int
    columns: dict
    breakpoints: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.sphere_dim not in (2, 3):
            raise PreconditionError("sphere_dim must be 2 or 3")
        if self.kind not in KINDS:
            raise PreconditionError(f"kind must be one of {KINDS}")
        for name, col in self.columns.items():
            col = np.asarray(col, dtype=float)
            if col.shape != (self.n + 1,):
                raise PreconditionError(f"column {name} must have n + 1 = {self.n + 1} entries")
            self.columns[name] = col
        if self.kind == "profile":
            need = ["v", "kappa"] + (["tau"] if self.sphere_dim == 3 else [])
            missing = [c for c in need if c not in self.columns]
            if missing:
                raise PreconditionError(f"profile file lacks columns {missing}")
            if np.any(self.columns["v"] <= 0):
                raise PreconditionError("speed must be positive")
        else:
            need = [f"x{k}" for k in range(1, self.sphere_dim + 2)]
            if any(c not in self.columns for c in need):
                raise PreconditionError(f"sample file needs columns {need}")

    @classmethod
    def from_profile(cls, p, meta=None):
        cols = {"t": p.t, "v": p.v, "kappa": p.kappa}
        if p.dim == 3:
            cols["tau"] = p.tau
        return cls(p.dim, "profile", p.grid.n, cols, tuple(p.breakpoints), dict(p.meta, **(meta or {})))

    @classmethod
    def from_samples(cls, curve, meta=None):
        cols = {"t": curve.t}
        for k in range(curve.points.shape[1]):
            cols[f"x{k + 1}"] = curve.points[:, k]
        return cls(curve.dim, "samples", curve.grid.n, cols, (), dict(curve.meta, **(meta or {})))

    def to_profile(self):
        if self.kind != "profile":
            raise PreconditionError("file holds point samples, not a profile")
        c = self.columns
        return CurvatureProfile(Grid(self.n), c["v"], c["kappa"], c.get("tau"),
                                breakpoints=tuple(self.breakpoints), meta=dict(self.meta))

    def to_samples(self):
        if self.kind != "samples":
            raise PreconditionError("file holds a profile, not point samples")
        pts = np.stack([self.columns[f"x{k}"] for k in range(1, self.sphere_dim + 2)], axis=1)
        return SampledCurve(Grid(self.n), pts, meta=dict(self.meta))


def write_curve(path, obj, meta=None):
    """Write a profile, sampled curve or :class:`CurveFile` to ``path``."""
    if isinstance(obj, CurvatureProfile):
        cf = CurveFile.from_profile(obj, meta)
    elif isinstance(obj, SampledCurve):
        cf = CurveFile.from_samples(obj, meta)
    elif isinstance(obj, CurveFile):
        cf = obj
    else:
        raise PreconditionError(f"cannot write {type(obj).__name__}")
    names = list(cf.columns)
    header = {"sphere_dim": cf.sphere_dim, "kind": cf.kind, "n": cf.n, "columns": names,
              "breakpoints": [float(b) for b in cf.breakpoints], "meta": _jsonable(cf.meta)}
    data = np.stack([cf.columns[k] for k in names], axis=1)
    lines = [MAGIC + json.dumps(header)]
    lines += [" ".join(format(x, ".17g") for x in row) for row in data]
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise CurveFileError(f"cannot write {path}: {exc}") from exc
    return cf


def read_curve(path):
    """Read a :class:`CurveFile` written by :func:`write_curve`."""
    try:
        with open(path) as fh:
            first = fh.readline()
            body = fh.read()
    except OSError as exc:
        raise CurveFileError(f"cannot read {path}: {exc}") from exc
    if not first.startswith(MAGIC):
        raise CurveFileError(f"{path}: missing '{MAGIC.strip()}' header line")
    try:
        header = json.loads(first[len(MAGIC):])
        names = header["columns"]
        rows = [ln.split() for ln in body.splitlines() if ln.strip()]
        data = np.array(rows, dtype=float).reshape(len(rows), len(names))
    except (ValueError, KeyError) as exc:
        raise CurveFileError(f"{path}: malformed curve file ({exc})") from exc
    cols = {name: data[:, k].copy() for k, name in enumerate(names)}
    try:
        return CurveFile(int(header["sphere_dim"]), header["kind"], int(header["n"]), cols,
                         tuple(header.get("breakpoints", ())), header.get("meta") or {})
    except PreconditionError as exc:
        raise CurveFileError(f"{path}: {exc}") from exc
