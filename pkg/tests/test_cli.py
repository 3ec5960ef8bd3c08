import io
import json
import subprocess
import sys

import numpy as np
import pytest

from colorhomography import apply_correction, load_patches, normalize, rgi_matrix
from colorhomography.cli import main, read_matrix


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def write_chart(path, rgb, xyz=None):
    header = "patch_id,R,G,B" + (",X,Y,Z" if xyz is not None else "")
    lines = [header]
    for i, row in enumerate(rgb):
        vals = list(row) + (list(xyz[i]) if xyz is not None else [])
        lines.append(f"p{i}," + ",".join(repr(float(v)) for v in vals))
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def synth_chart(tmp_path):
    code, _, _ = run("synth", "--n", 24, "--seed", 5, "--output", tmp_path / "chart.csv")
    assert code == 0
    return tmp_path / "chart.csv"


class TestSynth:
    def test_byte_identical(self, tmp_path):
        for d in ("a", "b"):
            (tmp_path / d).mkdir()
            assert run("synth", "--n", 24, "--seed", 3, "--noise", 0.02, "--outliers", 0.1, "--output", tmp_path / d / "c.csv")[0] == 0
        for name in ("c.csv", "c.truth.csv", "c.truth.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_minimal(self, tmp_path):
        assert run("synth", "--n", 4, "--seed", 1, "--output", tmp_path / "c.csv")[0] == 0
        assert len(load_patches(tmp_path / "c.csv")) == 4

    @pytest.mark.parametrize(
        "flags",
        [["--n", 3], ["--n", 24, "--outliers", 1.5], ["--n", 24, "--shading", "0,1"], ["--n", 24, "--noise", -1], ["--n", "x"]],
    )
    def test_invalid_flags(self, tmp_path, flags):
        assert run("synth", *flags, "--seed", 1, "--output", tmp_path / "c.csv")[0] == 2

    def test_sidecar_matches_recovery(self, synth_chart, tmp_path):
        truth = json.loads(synth_chart.with_name("chart.truth.json").read_text())
        assert run("calibrate", "--method", "als", "--input", synth_chart, "--output", tmp_path / "m.txt")[0] == 0
        H, meta = read_matrix(tmp_path / "m.txt")
        assert meta["method"] == "als"
        np.testing.assert_allclose(normalize(H), normalize(np.array(truth["M_true"])), atol=1e-6)


class TestCalibrate:
    @pytest.mark.parametrize("method", ["ls", "als", "ransac"])
    def test_identity_dataset(self, tmp_path, method):
        rgb = np.random.default_rng(0).uniform(5, 60, (10, 3))
        chart = write_chart(tmp_path / "id.csv", rgb, rgb)
        code, out, _ = run("calibrate", "--method", method, "--input", chart, "--output", tmp_path / "m.txt")
        assert code == 0 and method in out
        H, _ = read_matrix(tmp_path / "m.txt")
        np.testing.assert_allclose(H, np.eye(3), atol=1e-9)

    def test_matrix_file_layout(self, synth_chart, tmp_path):
        run("calibrate", "--method", "ls", "--input", synth_chart, "--output", tmp_path / "m.txt")
        lines = (tmp_path / "m.txt").read_text().splitlines()
        assert lines[0] == "# row-vector convention: xyz = rgb * H"
        body = [line for line in lines if not line.startswith("#")]
        assert len(body) == 3 and all(len(line.split()) == 3 for line in body)

    def test_ransac_too_few_rows(self, tmp_path):
        rgb = np.random.default_rng(1).uniform(5, 60, (3, 3))
        chart = write_chart(tmp_path / "c.csv", rgb, rgb)
        code, _, err = run("calibrate", "--method", "ransac", "--input", chart, "--output", tmp_path / "m.txt")
        assert code == 3
        assert "InsufficientPoints" in err

    def test_parse_error(self, tmp_path):
        (tmp_path / "bad.csv").write_text("patch_id,R,G,B,X,Y,Z\na,1,2,x,1,2,3\n")
        code, _, err = run("calibrate", "--method", "ls", "--input", tmp_path / "bad.csv", "--output", tmp_path / "m.txt")
        assert code == 2 and "line 2" in err

    def test_missing_xyz(self, tmp_path):
        chart = write_chart(tmp_path / "c.csv", np.ones((5, 3)))
        assert run("calibrate", "--method", "ls", "--input", chart, "--output", tmp_path / "m.txt")[0] == 2

    def test_missing_file(self, tmp_path):
        assert run("calibrate", "--method", "ls", "--input", tmp_path / "nope.csv", "--output", tmp_path / "m.txt")[0] == 2

    def test_bad_white(self, synth_chart, tmp_path):
        assert run("calibrate", "--method", "ransac", "--white", "1,2", "--input", synth_chart, "--output", tmp_path / "m.txt")[0] == 2

    def test_ransac_byte_identical(self, tmp_path):
        run("synth", "--n", 24, "--seed", 8, "--noise", 0.02, "--outliers", 0.1, "--output", tmp_path / "c.csv")
        for name in ("a.txt", "b.txt"):
            assert run("calibrate", "--method", "ransac", "--seed", 42, "--max-trials", 300,
                       "--input", tmp_path / "c.csv", "--output", tmp_path / name)[0] == 0
        assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()
        assert "# seed: 42" in (tmp_path / "a.txt").read_text()


class TestApply:
    def matrix_file(self, path, H, method="custom"):
        path.write_text(f"# method: {method}\n" + "\n".join(" ".join(repr(float(v)) for v in row) for row in H) + "\n")
        return path

    def test_identity(self, tmp_path):
        rgb = np.random.default_rng(2).uniform(0, 1, (5, 3))
        chart = write_chart(tmp_path / "c.csv", rgb)
        m = self.matrix_file(tmp_path / "m.txt", np.eye(3))
        assert run("apply", "--matrix", m, "--input", chart, "--output", tmp_path / "o.csv")[0] == 0
        records = load_patches(tmp_path / "o.csv")
        np.testing.assert_array_equal([r.corrected["custom"] for r in records], rgb)

    def test_rgi(self, tmp_path):
        chart = write_chart(tmp_path / "c.csv", [[1.0, 2.0, 3.0]])
        m = self.matrix_file(tmp_path / "m.txt", rgi_matrix(), "rgi")
        run("apply", "--matrix", m, "--input", chart, "--output", tmp_path / "o.csv")
        np.testing.assert_array_equal(load_patches(tmp_path / "o.csv")[0].corrected["rgi"], [1, 2, 6])

    def test_random_matches_oracle(self, tmp_path):
        rng = np.random.default_rng(3)
        rgb, H = rng.uniform(0, 1, (6, 3)), rng.normal(size=(3, 3))
        chart = write_chart(tmp_path / "c.csv", rgb)
        m = self.matrix_file(tmp_path / "m.txt", H)
        run("apply", "--matrix", m, "--input", chart, "--output", tmp_path / "o.csv")
        out = np.array([r.corrected["custom"] for r in load_patches(tmp_path / "o.csv")])
        np.testing.assert_allclose(out, apply_correction(H, rgb), rtol=1e-15)

    def test_gain_applied(self, tmp_path):
        chart = write_chart(tmp_path / "c.csv", [[1.0, 2.0, 3.0]])
        m = tmp_path / "m.txt"
        m.write_text("# method: x\n# gain: 2.5\n1 0 0\n0 1 0\n0 0 1\n")
        run("apply", "--matrix", m, "--input", chart, "--output", tmp_path / "o.csv")
        np.testing.assert_allclose(load_patches(tmp_path / "o.csv")[0].corrected["x"], [2.5, 5, 7.5])

    def test_uses_gray_reference(self, synth_chart, tmp_path):
        m = self.matrix_file(tmp_path / "m.txt", np.eye(3), "flat")
        run("apply", "--matrix", m, "--input", synth_chart, "--output", tmp_path / "o.csv")
        records = load_patches(tmp_path / "o.csv")
        flat = np.array([r.corrected["flat"] for r in records])
        chroma = flat / flat.sum(axis=1, keepdims=True)
        rgb = np.array([r.rgb for r in records])
        np.testing.assert_allclose(chroma, rgb / rgb.sum(axis=1, keepdims=True))
        brightness = flat.sum(axis=1) / rgb.sum(axis=1) * np.array([r.gray_rgb.sum() for r in records])
        np.testing.assert_allclose(brightness, brightness[0])

    @pytest.mark.parametrize("text", ["1 0 0\n0 1 0\n", "1 0 0\n0 1 0\n0 1\n", "1 0 0\n0 a 0\n0 0 1\n", "# gain: x\n1 0 0\n0 1 0\n0 0 1\n"])
    def test_malformed_matrix(self, tmp_path, text):
        chart = write_chart(tmp_path / "c.csv", [[1.0, 2.0, 3.0]])
        (tmp_path / "m.txt").write_text(text)
        assert run("apply", "--matrix", tmp_path / "m.txt", "--input", chart, "--output", tmp_path / "o.csv")[0] == 2


class TestEvaluate:
    def test_zero_when_equal(self, tmp_path):
        xyz = np.random.default_rng(4).uniform(5, 80, (6, 3)).tolist()
        text = "patch_id,R,G,B,X,Y,Z,X_m,Y_m,Z_m\n" + "".join(
            f"p{i},1,1,1,{x[0]!r},{x[1]!r},{x[2]!r},{x[0]!r},{x[1]!r},{x[2]!r}\n" for i, x in enumerate(xyz)
        )
        (tmp_path / "c.csv").write_text(text)
        code, out, _ = run("evaluate", "--input", tmp_path / "c.csv", "--space", "lab", "--output", tmp_path / "s.csv")
        assert code == 0
        assert (tmp_path / "s.csv").read_text() == "method,space,mean,median,q95,max\nm,Lab,0.00,0.00,0.00,0.00\n"
        assert out == (tmp_path / "s.csv").read_text()

    def test_space_tags_and_ordering(self, tmp_path):
        chart = tmp_path / "c.csv"
        run("synth", "--n", 24, "--seed", 2, "--output", chart)
        current = chart
        for method in ("ls", "als"):
            run("calibrate", "--method", method, "--input", chart, "--output", tmp_path / f"{method}.txt")
            run("apply", "--matrix", tmp_path / f"{method}.txt", "--input", current, "--output", tmp_path / "corr.csv")
            current = tmp_path / "corr.csv"
        rows = {}
        for space in ("lab", "luv"):
            assert run("evaluate", "--input", current, "--space", space, "--output", tmp_path / f"{space}.csv")[0] == 0
            lines = (tmp_path / f"{space}.csv").read_text().splitlines()[1:]
            rows[space] = {line.split(",")[0]: line.split(",") for line in lines}
        assert rows["lab"]["ls"][1] == "Lab" and rows["luv"]["ls"][1] == "Luv"
        assert rows["lab"]["ls"][2:] != rows["luv"]["ls"][2:]
        assert float(rows["lab"]["ls"][2]) > float(rows["lab"]["als"][2])

    def test_missing_columns(self, tmp_path):
        write_chart(tmp_path / "c.csv", np.ones((3, 3)), np.ones((3, 3)))
        assert run("evaluate", "--input", tmp_path / "c.csv", "--space", "lab", "--output", tmp_path / "s.csv")[0] == 2
        write_chart(tmp_path / "d.csv", np.ones((3, 3)))
        assert run("evaluate", "--input", tmp_path / "d.csv", "--space", "lab", "--output", tmp_path / "s.csv")[0] == 2

    def test_reference_file(self, tmp_path):
        chart = tmp_path / "c.csv"
        run("synth", "--n", 24, "--seed", 2, "--noise", 0.05, "--output", chart)
        run("calibrate", "--method", "als", "--input", chart, "--output", tmp_path / "m.txt")
        run("apply", "--matrix", tmp_path / "m.txt", "--input", chart, "--output", tmp_path / "o.csv")
        run("evaluate", "--input", tmp_path / "o.csv", "--space", "lab", "--output", tmp_path / "noisy.csv")
        code, _, _ = run("evaluate", "--input", tmp_path / "o.csv", "--space", "lab",
                         "--reference", tmp_path / "c.truth.csv", "--output", tmp_path / "truth.csv")
        assert code == 0
        assert (tmp_path / "noisy.csv").read_text() != (tmp_path / "truth.csv").read_text()


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "colorhomography", "synth", "--n", "3", "--seed", "0", "--output", str(tmp_path / "c.csv")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 2
    assert "n_patches" in proc.stderr


def test_no_subcommand():
    assert run()[0] == 2
