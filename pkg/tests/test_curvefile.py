import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spincurve.curvefile import MAGIC, CurveFile, read_curve, write_curve
from spincurve.curves import CurvatureProfile, Grid, omega3, sigma_profile
from spincurve.errors import CurveFileError, PreconditionError
from spincurve.spin_algebra import K, ONE, Spin4
from spincurve.verify import random_profile

finite = st.floats(allow_nan=False, allow_infinity=False, min_value=-1e300, max_value=1e300)


class TestRoundTrip:
    def test_profile_exact(self, tmp_path, rng):
        p = random_profile(rng, 3, 64)
        path = tmp_path / "p.txt"
        write_curve(path, p, {"note": "x"})
        q = read_curve(path).to_profile()
        for a, b in zip(p.arrays(), q.arrays()):
            assert np.array_equal(a, b)
        assert q.meta["note"] == "x" and q.meta["family"] == "random"

    def test_samples_exact(self, tmp_path):
        c = omega3(64)
        path = tmp_path / "c.txt"
        write_curve(path, c)
        back = read_curve(path).to_samples()
        assert np.array_equal(back.points, c.points)
        assert back.dim == 3

    @given(st.lists(finite, min_size=17, max_size=17))
    def test_arbitrary_floats(self, vals):
        import tempfile
        import os
        kappa = np.array(vals)
        p = CurvatureProfile(Grid(16), 1.0, kappa)
        with tempfile.TemporaryDirectory() as d:
            path = os.path.join(d, "f.txt")
            write_curve(path, p)
            assert np.array_equal(read_curve(path).to_profile().kappa, kappa)

    def test_breakpoints_and_spin_meta(self, tmp_path):
        p = sigma_profile(np.pi, n=32)
        p = CurvatureProfile(p.grid, p.v, p.kappa, breakpoints=(0.25, 0.5))
        path = tmp_path / "b.txt"
        write_curve(path, p, {"final_spin": Spin4(-ONE, K), "obj": object()})
        cf = read_curve(path)
        assert cf.breakpoints == (0.25, 0.5)
        assert cf.meta["final_spin"] == [[-1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0]]
        assert cf.meta["obj"] is None

    def test_header_is_json(self, tmp_path):
        path = tmp_path / "h.txt"
        write_curve(path, sigma_profile(np.pi, n=16))
        first = path.read_text().splitlines()[0]
        assert first.startswith(MAGIC)
        header = json.loads(first[len(MAGIC):])
        assert header["kind"] == "profile" and header["n"] == 16 and header["columns"] == ["t", "v", "kappa"]


class TestErrors:
    def test_missing(self, tmp_path):
        with pytest.raises(CurveFileError):
            read_curve(tmp_path / "nope.txt")

    def test_no_magic(self, tmp_path):
        path = tmp_path / "x.txt"
        path.write_text("1 2 3\n")
        with pytest.raises(CurveFileError):
            read_curve(path)

    def test_ragged_rows(self, tmp_path):
        path = tmp_path / "x.txt"
        write_curve(path, sigma_profile(np.pi, n=16))
        lines = path.read_text().splitlines()
        lines[3] = "1 2"
        path.write_text("\n".join(lines))
        with pytest.raises(CurveFileError):
            read_curve(path)

    def test_bad_speed(self, tmp_path):
        path = tmp_path / "x.txt"
        write_curve(path, sigma_profile(np.pi, n=16))
        lines = path.read_text().splitlines()
        lines[2] = lines[2].split()[0] + " -1 1"
        path.write_text("\n".join(lines))
        with pytest.raises(CurveFileError):
            read_curve(path)

    def test_truncated(self, tmp_path):
        path = tmp_path / "x.txt"
        write_curve(path, sigma_profile(np.pi, n=16))
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-2]))
        with pytest.raises(CurveFileError):
            read_curve(path)

    def test_unwritable(self, tmp_path):
        with pytest.raises(CurveFileError):
            write_curve(tmp_path / "missing" / "x.txt", sigma_profile(np.pi, n=16))

    def test_wrong_kind(self, tmp_path):
        path = tmp_path / "x.txt"
        write_curve(path, sigma_profile(np.pi, n=16))
        with pytest.raises(PreconditionError):
            read_curve(path).to_samples()

    def test_validation(self):
        with pytest.raises(PreconditionError):
            CurveFile(4, "profile", 16, {})
        with pytest.raises(PreconditionError):
            CurveFile(2, "profile", 16, {"v": np.ones(17)})
        with pytest.raises(PreconditionError):
            CurveFile(2, "samples", 16, {"x1": np.ones(17)})
        with pytest.raises(PreconditionError):
            CurveFile(2, "profile", 16, {"v": np.ones(5), "kappa": np.ones(5)})
        with pytest.raises(PreconditionError):
            write_curve("unused.txt", 3.0)
