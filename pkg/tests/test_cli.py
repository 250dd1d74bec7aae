import json
import subprocess
import sys
from pathlib import Path

import pytest

from veriell.cli import RunConfig, main, run


def _run_cli(args):
    return subprocess.run([sys.executable, "-m", "veriell.cli"] + args,
                          capture_output=True, text=True)


def test_invalid_degree_exits_2(tmp_path):
    out = tmp_path / "x"
    r = _run_cli(["run", "--n", "0", "--out", str(out)])
    assert r.returncode == 2
    assert not out.exists()


def test_unknown_method_exits_2():
    # argparse rejects out-of-choice flags with exit code 2
    with pytest.raises(SystemExit) as exc:
        main(["run", "--n", "4", "--method", "fixed-point", "--variant", "bogus"])
    assert exc.value.code == 2
    # config-level validation failures also exit 2
    cfg = RunConfig(problem="emden", n=4, method="nonsense")
    code, _ = run(cfg)
    assert code == 2


def test_inconclusive_run_exits_1(tmp_path):
    # N=5 is too coarse for the classic chain: failed-hypothesis, exit 1,
    # but the certificate artifact is still written
    out = tmp_path / "artifacts"
    code = main(["run", "--problem", "emden", "--n", "5",
                 "--method", "in-classic", "--out", str(out)])
    assert code == 1
    cert = json.loads((out / "certificate-in-classic.json").read_text())
    assert cert["status"] == "failed-hypothesis"
    assert cert["rounding"] == "nextafter-nudging"


def test_certificates_bit_identical(tmp_path):
    args = ["run", "--problem", "emden", "--n", "5", "--method", "in-classic"]
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert main(args + ["--out", str(a)]) == 1
    assert main(args + ["--out", str(b)]) == 1
    ca = (a / "certificate-in-classic.json").read_bytes()
    cb = (b / "certificate-in-classic.json").read_bytes()
    assert ca == cb


def test_config_file_and_flag_override(tmp_path):
    cfgfile = tmp_path / "cfg.json"
    cfgfile.write_text(json.dumps({"problem": "emden", "n": 9, "method": "all"}))
    import argparse
    from veriell.cli import _merge_config
    ns = argparse.Namespace(problem=None, f_coeffs=None, n=5, method="in-classic",
                            variant=None, constants=None, out=None, grid=None,
                            seed=None, config=str(cfgfile))
    cfg = _merge_config(ns)
    assert cfg.n == 5            # flag wins
    assert cfg.problem == "emden"
    assert cfg.method == "in-classic"


def test_compare_requires_two_configs(tmp_path):
    cfgs = tmp_path / "one.json"
    cfgs.write_text(json.dumps([{"problem": "emden", "n": 5,
                                 "method": "in-classic"}]))
    assert main(["compare", "--configs", str(cfgs),
                 "--out", str(tmp_path / "cmp.csv")]) == 2


def test_compare_rows_and_determinism(tmp_path):
    cfgs = tmp_path / "cfgs.json"
    cfgs.write_text(json.dumps([
        {"problem": "emden", "n": 5, "method": "in-classic"},
        {"problem": "emden", "n": 5, "method": "in-classic"},
    ]))
    out = tmp_path / "cmp.csv"
    code = main(["compare", "--configs", str(cfgs), "--out", str(out)])
    assert code == 1  # failed-hypothesis at N=5
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 3
    header = lines[0].split(",")
    assert header[:4] == ["N", "method", "status", "kappa"]
    # identical configs produce identical rows apart from wall time
    r1 = lines[1].split(",")
    r2 = lines[2].split(",")
    assert r1[:-1] == r2[:-1]


def test_poly_problem_requires_coeffs():
    cfg = RunConfig(problem="poly", n=4, method="kantorovich")
    code, certs = run(cfg)
    assert code == 2 and certs == []
