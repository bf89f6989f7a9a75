import csv
import json
import math
import subprocess
import sys

import pytest

from freud_sobolev import cli
from freud_sobolev.errors import ArgumentError, ConvergenceError
from freud_sobolev.precision import ENV_VAR


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("spec,L", [("power:1:-1.5", 1.0), ("const:1", math.inf), ("power:2:-2", 0.0)])
def test_parse_schedule(spec, L):
    assert cli.parse_schedule(spec).classification == L


@pytest.mark.parametrize("spec,token", [("power:1", "power:1"), ("const:abc", "abc"), ("expo:1", "expo"),
                                        ("power:x:-1", "x")])
def test_parse_schedule_usage(spec, token):
    with pytest.raises(cli.UsageError, match=token):
        cli.parse_schedule(spec)


def test_parse_schedule_validation(tmp_path):
    with pytest.raises(ArgumentError):
        cli.parse_schedule("const:-1")
    f = tmp_path / "lam.txt"
    f.write_text("1\n0.5\n-0.1\n")
    with pytest.raises(ArgumentError):
        cli.parse_schedule(f"file:{f}")
    f.write_text("\n".join(str(n ** -1.5) for n in range(1, 101)))
    s = cli.parse_schedule(f"file:{f}")
    assert s(8) == pytest.approx(8 ** -1.5) and s.classification == pytest.approx(1, rel=1e-3)


def test_parse_grid():
    assert cli.parse_grid("128:1024:x2") == [128, 256, 512, 1024]
    assert cli.parse_grid("3,5,9") == [3, 5, 9]
    for bad in ("1:x", "5,3", "a,b"):
        with pytest.raises(cli.UsageError):
            cli.parse_grid(bad)


def test_coeffs(capsys):
    code, out, _ = run(["coeffs", "--n", "100"], capsys)
    assert code == 0
    rows = list(csv.reader(out.splitlines()))
    assert rows[0] == ["n", "b_n", "log_norm_sq"] and len(rows) == 101
    assert float(rows[1][1]) == pytest.approx(0.33798912003364236, rel=1e-15)


def test_coeffs_to_file_and_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["coeffs", "--n", "300", "--output", str(a)], capsys)[0] == 0
    assert run(["coeffs", "--n", "300", "-o", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_verify_prop1(capsys):
    code, out, _ = run(["verify", "prop1", "--schedule", "power:1:-1.5", "--grid", "128:8192:x2"], capsys)
    assert code == 0
    d = json.loads(out)
    assert d["target"] == pytest.approx(4.5563712657, rel=1e-10)
    assert d["grid"] == [128, 256, 512, 1024, 2048, 4096, 8192]


def test_verify_theorem1_const(capsys):
    argv = ["verify", "theorem1", "--schedule", "const:1", "--z", "0+2i", "--grid", "128:8192:x2"]
    code, out, _ = run(argv, capsys)
    assert code == 0
    d = json.loads(out)
    assert d["target"] == 1.5 and d["z"] == [0.0, 2.0]
    code, out2, _ = run(argv + ["--threads", "3"], capsys)
    assert out2 == out


@pytest.mark.parametrize("kind,extra", [
    ("lemma1", ["--schedule", "power:1:-1.5"]),
    ("strong", ["--z", "0+1i"]),
    ("strong", ["--z", "0+1i", "--corrected"]),
    ("ratio", []),
    ("norms", []),
    ("sninfty", ["--schedule", "const:1"]),
])
def test_verify_kinds(capsys, kind, extra):
    code, out, _ = run(["verify", kind, "--grid", "64:512:x2"] + extra, capsys)
    assert code == 0
    assert set(json.loads(out)) >= {"quantity", "values", "target", "extrapolated", "flags"}


def test_other_commands(capsys):
    code, out, _ = run(["sobolev", "--n", "20", "--lambda", "1"], capsys)
    assert code == 0 and out.splitlines()[0] == "n,lambda_n,kappa_n,alpha_n,t0,t1,ratio"
    assert len(out.splitlines()) == 19
    code, out, _ = run(["sobolev", "--n", "20", "--schedule", "power:1:-1.5"], capsys)
    assert code == 0 and len(out.splitlines()) == 19
    code, out, _ = run(["balance", "--schedule", "const:1", "--grid", "64:256:x2"], capsys)
    assert code == 0 and len(out.splitlines()) == 4
    code, out, _ = run(["mrs", "--grid", "3,10", "--field", "quartic"], capsys)
    assert code == 0 and float(out.splitlines()[1].split(",")[1]) == pytest.approx(math.sqrt(2), rel=1e-10)
    code, out, _ = run(["mrs", "--n", "4", "--field", "freud:2:0.5"], capsys)
    assert float(out.splitlines()[1].split(",")[1]) == pytest.approx(math.sqrt(8), rel=1e-10)
    code, out, _ = run(["szego", "--n", "100", "--z", "1+1i"], capsys)
    assert code == 0 and out.splitlines()[0] == "n,z,D_re,D_im"


@pytest.mark.parametrize("argv", [
    ["verify", "theorem1", "--schedule", "bogus:1", "--grid", "8:16:x2"],
    ["verify", "theorem1", "--schedule", "const:1", "--z", "2", "--grid", "8:16:x2"],
    ["verify", "ratio", "--z", "1+x", "--grid", "8:16:x2"],
    ["verify", "prop1", "--schedule", "const:1", "--grid", "8:16:x2"],
    ["coeffs", "--n", "5", "--precision", "ext10"],
    ["coeffs"],
    ["coeffs", "--n", "5", "--format", "json"],
    ["mrs", "--n", "3", "--field", "cubic"],
])
def test_usage_errors(capsys, argv):
    code, _, err = run(argv, capsys)
    assert code == 2 and err.startswith("error:")


def test_argparse_usage_exit(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["verify", "nonsense"])
    assert info.value.code == 2


def test_numeric_failure_removes_output(tmp_path, capsys, monkeypatch):
    out = tmp_path / "t.csv"

    def boom(*a, **k):
        raise ConvergenceError("stalled", 1.0)

    monkeypatch.setattr(cli, "solve_string_system", boom)
    code, _, err = run(["coeffs", "--n", "10", "-o", str(out)], capsys)
    assert code == 3 and "stalled" in err
    assert not out.exists()


def test_write_failure_cleans_up(tmp_path, capsys):
    target = tmp_path / "missing" / "x.csv"
    code, _, _ = run(["coeffs", "--n", "5", "-o", str(target)], capsys)
    assert code == 2 and not target.exists()


def test_precision_precedence(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nprecision = ext60\nn = 3\n")
    args = cli.build_parser().parse_args(["coeffs", "--config", str(cfg)])
    monkeypatch.delenv(ENV_VAR, raising=False)
    assert cli.config_from_args(args).precision == "ext60"
    assert cli.config_from_args(args).n == 3
    monkeypatch.setenv(ENV_VAR, "ext55")
    assert cli.config_from_args(args).precision == "ext55"
    args = cli.build_parser().parse_args(["coeffs", "--config", str(cfg), "--precision", "std"])
    assert cli.config_from_args(args).precision == "std"


def test_extended_output(capsys, monkeypatch):
    monkeypatch.setenv(ENV_VAR, "ext50")
    code, out, _ = run(["coeffs", "--n", "3"], capsys)
    assert code == 0
    b1 = out.splitlines()[1].split(",")[1]
    assert b1.startswith("0.33798912003364236449772384233540287")


def test_bad_config(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("precision ext60\n")
    code, _, err = run(["coeffs", "--n", "3", "--config", str(cfg)], capsys)
    assert code == 2 and "key = value" in err


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "freud_sobolev.cli", "coeffs", "--n", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.startswith("n,b_n,log_norm_sq")
