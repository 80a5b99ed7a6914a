import os
import subprocess
import sys

import numpy as np
import pytest

from heightlab import cli
from heightlab.errors import InvariantViolation, ResourceError, RootFindingError

QUAD = "z^2 + t"
LATT = "(z^2 - t)^2 / (4*z*(z-1)*(z-t))"


def run(capsysbinary, *argv):
    code = cli.main(list(argv))
    out, err = capsysbinary.readouterr()
    return code, out, err.decode()


def fields(text):
    return dict(line.split(": ", 1) for line in text.decode().splitlines() if ": " in line and not line.startswith(" "))


class TestCommands:
    def test_height(self, capsysbinary):
        code, out, _ = run(capsysbinary, "height", "--family", QUAD, "--point", "2")
        assert code == 0
        text = out.decode()
        assert "lo: 511/1024" in text and "hi: 513/1024" in text

    def test_orbit(self, capsysbinary):
        code, out, _ = run(capsysbinary, "orbit", "--family", QUAD, "--point", "0", "--nmax", "3")
        assert code == 0
        assert fields(out)["points"] == "[0, t, t^2 + t, t^4 + 2*t^3 + t^2 + t]"

    def test_classify(self, capsysbinary):
        code, out, _ = run(capsysbinary, "classify", "--family", LATT, "--point", "t")
        f = fields(out)
        assert code == 0 and (f["kind"], f["m"], f["p"]) == ("preperiodic", "1", "1")

    def test_resultant(self, capsysbinary):
        code, out, _ = run(capsysbinary, "resultant", "--family", LATT)
        f = fields(out)
        assert code == 0 and f["q_infinity"] == "8" and f["D_total"] == "16"
        assert "root: 0" in out.decode() and "root: 1" in out.decode()

    def test_degenerate(self, capsysbinary):
        code, out, _ = run(capsysbinary, "degenerate", "--family", LATT, "--point", "2", "--iters", "3")
        assert code == 0 and fields(out)["q"] == "4"

    def test_preperiodic_params(self, capsysbinary):
        code, out, _ = run(capsysbinary, "preperiodic-params", "--family", QUAD, "--point", "0", "--pairs", "2:0")
        assert code == 0
        assert "value: 0+0i" in out.decode() and "value: -1+0i" in out.decode()

    def test_preperiodic_identically(self, capsysbinary):
        code, out, _ = run(capsysbinary, "preperiodic-params", "--family", LATT, "--point", "t", "--pairs", "2:1")
        assert code == 0 and "identically_preperiodic: true" in out.decode()

    def test_density(self, capsysbinary):
        code, out, _ = run(
            capsysbinary, "density", "--family", QUAD, "--point", "0",
            "--grid", "-2.5,-1.5,1,1.5,16,16", "--pairs", "2:0,3:0",
        )
        assert code == 0 and fields(out)["nonincreasing"] == "true"

    def test_negative_values_are_not_flags(self, capsysbinary):
        code, out, _ = run(capsysbinary, "height", "--family", QUAD, "--point", "-1/3", "--nmax", "4")
        assert code == 0 and fields(out)["point"] == "-1/3"


class TestFormats:
    def test_activity_pgm(self, capsysbinary):
        argv = ["activity", "--family", QUAD, "--point", "0", "--grid", "-2,-1,1,1,30,20", "--iters", "16"]
        code, out, _ = run(capsysbinary, *argv, "--format", "pgm")
        assert code == 0
        header = b"P5\n30 20\n255\n"
        assert out.startswith(header) and len(out) == len(header) + 600
        pix = np.frombuffer(out[len(header):], dtype=np.uint8).reshape(20, 30)
        code, csv, _ = run(capsysbinary, *argv, "--format", "csv")
        rows = csv.decode().splitlines()
        assert rows[0] == "re(t),im(t),i"
        i = np.array([int(r.split(",")[2]) for r in rows[1:]]).reshape(20, 30)
        want = np.minimum(255, np.floor(255 * i / 16 + 0.5))
        assert np.array_equal(pix, want)

    def test_pixel_rounding_half_up(self):
        # 255 * 1 / 2 = 127.5 rounds to 128
        assert cli.activity_pixels(np.array([0, 1, 2]), 2).tolist() == [0, 128, 255]

    def test_escape_csv(self, capsysbinary):
        code, out, _ = run(
            capsysbinary, "escape", "--family", LATT, "--point", "2",
            "--grid", "0.1,0.1,0.3,0.3,2,2", "--iters", "3", "--format", "csv",
        )
        rows = out.decode().splitlines()
        assert code == 0 and rows[0] == "re(t),im(t),n,G_n" and len(rows) == 1 + 4 * 4
        for r in rows[1:]:
            x = r.split(",")[3]
            assert float(x) == float(x) and len(x.lstrip("-").replace(".", "").lstrip("0")) <= 17

    def test_float_formatting(self):
        assert float(cli.format_float(0.1)) == 0.1
        assert cli.format_float(0.1) == "0.10000000000000001"

    def test_format_restricted(self, capsysbinary):
        code, _, err = run(capsysbinary, "height", "--family", QUAD, "--point", "0", "--format", "pgm")
        assert code == 1 and "format" in err

    def test_deterministic(self, capsysbinary, monkeypatch):
        argv = ["activity", "--family", LATT, "--point", "2", "--grid", "-1,-1,2,1,24,16", "--iters", "64", "--format", "pgm"]
        outs = []
        for w in ("1", "3"):
            monkeypatch.setenv("HEIGHTLAB_WORKERS", w)
            outs.append(run(capsysbinary, *argv)[1])
        outs.append(run(capsysbinary, *argv, "--workers", "5")[1])
        assert outs[0] == outs[1] == outs[2]

    def test_out_file(self, tmp_path, capsysbinary):
        path = tmp_path / "h.txt"
        code, out, _ = run(capsysbinary, "height", "--family", QUAD, "--point", "2", "--out", str(path))
        assert code == 0 and out == b""
        assert "hi: 513/1024" in path.read_text()


class TestExitCodes:
    @pytest.mark.parametrize(
        "argv",
        [
            ["height", "--family", "z^^2", "--point", "0"],
            ["height", "--family", "z + t", "--point", "0"],
            ["height", "--point", "0"],
            ["bogus"],
            ["height", "--family", QUAD, "--point", "0", "--nmax", "0"],
            ["activity", "--family", QUAD, "--point", "0", "--grid", "1,0,0,1,4,4"],
            ["preperiodic-params", "--family", QUAD, "--point", "0", "--pairs", "1:1"],
            ["height", "--family-file", "/nonexistent/file", "--point", "0"],
        ],
    )
    def test_domain(self, capsysbinary, argv):
        code, _, err = run(capsysbinary, *argv)
        assert code == 1 and err.startswith("error:")

    def test_parse_error_location(self, capsysbinary):
        _, _, err = run(capsysbinary, "height", "--family", "z^^2", "--point", "0")
        assert "line 1, column 3" in err

    @pytest.mark.parametrize("exc", [ResourceError("out of budget", n=3), RootFindingError("no convergence")])
    def test_resource(self, capsysbinary, monkeypatch, exc):
        def boom(cfg, F):
            raise exc

        monkeypatch.setitem(cli.HANDLERS, "height", boom)
        code, _, _ = run(capsysbinary, "height", "--family", QUAD, "--point", "0")
        assert code == 2

    def test_invariant(self, capsysbinary, monkeypatch):
        def boom(cfg, F):
            raise InvariantViolation("degree drop exceeded", witness={"n": 4})

        monkeypatch.setitem(cli.HANDLERS, "height", boom)
        code, out, err = run(capsysbinary, "height", "--family", QUAD, "--point", "0")
        assert code == 3 and out == b"" and "witness: {'n': 4}" in err

    def test_unexpected_exception_is_internal(self, capsysbinary, monkeypatch):
        def boom(cfg, F):
            raise ZeroDivisionError("oops")

        monkeypatch.setitem(cli.HANDLERS, "height", boom)
        code, _, err = run(capsysbinary, "height", "--family", QUAD, "--point", "0")
        assert code == 3 and "witness: ZeroDivisionError" in err


class TestConfig:
    def test_file_and_precedence(self, tmp_path, capsysbinary):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(f"# height run\nfamily = {QUAD}\npoint = 2\nnmax = 4\n")
        code, out, _ = run(capsysbinary, "height", "--config", str(cfg))
        assert code == 0 and fields(out)["point"] == "2"
        code, out, _ = run(capsysbinary, "height", "--config", str(cfg), "--point", "0")
        assert fields(out)["point"] == "0"
        assert "n_used: 4" in out.decode()

    def test_bad_key(self, tmp_path, capsysbinary):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("colour = blue\n")
        code, _, err = run(capsysbinary, "height", "--config", str(cfg))
        assert code == 1 and "unknown key" in err

    def test_family_file(self, tmp_path, capsysbinary):
        path = tmp_path / "lattes.txt"
        path.write_text("# flexible Lattes\n" + LATT + "\n")
        code, out, _ = run(capsysbinary, "resultant", "--family-file", str(path))
        assert code == 0 and fields(out)["D_total"] == "16"

    def test_workers_env(self, monkeypatch):
        monkeypatch.setenv("HEIGHTLAB_WORKERS", "3")
        assert cli.config_from_args(["height"]).workers == 3


def test_module_entry_point():
    env = dict(os.environ, PYTHONPATH=os.pathsep.join(sys.path))
    proc = subprocess.run(
        [sys.executable, "-m", "heightlab", "height", "--family", QUAD, "--point", "2", "--nmax", "4"],
        capture_output=True, text=True, env=env, timeout=120,
    )
    assert proc.returncode == 0 and "D_total: 4" in proc.stdout
