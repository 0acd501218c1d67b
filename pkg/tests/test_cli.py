import io
import subprocess
import sys
from contextlib import redirect_stdout

import numpy as np
import pytest

from gauge_optics.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, main, self_test


def _run(argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


def test_self_test_all_pass():
    checks = self_test()
    assert len(checks) >= 10
    assert all(c.passed is not False for c in checks), [c for c in checks if c.passed is False]


def test_check_command():
    code, out = _run(["check"])
    assert code == EXIT_OK
    assert "self-test passed" in out and "FAIL" not in out


def test_oracle_free_fringe_csv(tmp_path):
    path = tmp_path / "f.csv"
    code, _ = _run(["oracles", "free-fringe", "--k", "1", "--n", "11", "--output", str(path)])
    assert code == EXIT_OK
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (11, 2)
    assert path.read_text().startswith("eta,intensity")


@pytest.mark.parametrize("argv, header", [
    (["oracles", "shifted-fringe", "--n", "5"], "eta,intensity"),
    (["oracles", "ab-profile", "--n", "5", "--ka", "2"], "eta,intensity"),
    (["oracles", "ab-closed-form", "--n", "5"], "phi,re,im,abs"),
    (["oracles", "wilson", "--n", "4", "--nsteps", "200"],
     "phi,w11_re,w11_im,w12_re,w12_im,w21_re,w21_im,numerical_error"),
])
def test_oracles_to_stdout(argv, header):
    code, out = _run(argv)
    lines = out.strip().splitlines()
    assert code == EXIT_OK and lines[0] == header
    assert all(len(line.split(",")) == len(header.split(",")) for line in lines[1:])


def test_oracle_bad_value_is_config_error(capsys):
    assert main(["oracles", "ab-profile", "--ka", "-1"]) == EXIT_CONFIG
    assert "error" in capsys.readouterr().err


def test_run_config_error(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("scenario: interfere\nmodel:\n  preset: strong\n")
    assert main(["run", str(cfg)]) == EXIT_CONFIG
    assert "model.preset" in capsys.readouterr().err


def test_run_holonomy_report(tmp_path):
    cfg = tmp_path / "h.yaml"
    cfg.write_text(f"scenario: holonomy_report\noutput_dir: {tmp_path / 'out'}\n")
    code, out = _run(["run", str(cfg)])
    assert code == EXIT_OK and "status: pass" in out
    assert (tmp_path / "out" / "manifest.json").exists()


def test_run_failing_check_exits_nonzero(tmp_path):
    cfg = tmp_path / "h.yaml"
    cfg.write_text("scenario: holonomy_report\nanalysis:\n  line_tol: 1.0e-30\n")
    code, out = _run(["run", str(cfg), "-o", str(tmp_path / "o")])
    assert code == EXIT_FAIL and "FAIL" in out and "status: fail" in out


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gauge_optics.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "run" in proc.stdout and "oracles" in proc.stdout
