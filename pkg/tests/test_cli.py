import json
import subprocess
import sys

import pytest

from twistcancel.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_expand_modular_forms(capsys):
    assert run(capsys, "expand", "eps2", "--order", "2")[1] == "q^(1/2) + 8 q\n"
    assert run(capsys, "expand", "delta2", "--order", "2")[1] == "-1/8 - 3 q^(1/2) - 3 q\n"
    assert run(capsys, "expand", "delta1")[1] == "1/4 + 6 q + 6 q^2\n"
    assert run(capsys, "expand", "eps1")[1] == "1/16 - q + 7 q^2\n"


def test_expand_json(capsys):
    code, out, _ = run(capsys, "expand", "delta2", "--order", "2", "--format", "json")
    assert code == 0
    assert json.loads(out)["coeffs"] == ["-1/8", "-3", "-3"]


def test_expand_graded_targets(capsys):
    code, out, _ = run(capsys, "expand", "P2", "--dim", "12", "--order", "3")
    assert code == 0
    assert out.startswith("q^0: ")
    assert len(out.splitlines()) == 4
    code, out, _ = run(capsys, "expand", "theta-ratio", "--dim", "4", "--kind", "A", "--order", "2")
    assert code == 0 and out.startswith("scale: ")
    code, _, _ = run(capsys, "expand", "theta-element", "--dim", "8", "--twisted", "--which", "theta2",
                     "--order", "2")
    assert code == 0


def test_expand_needs_dim(capsys):
    code, _, err = run(capsys, "expand", "P1")
    assert code == 2 and "--dim" in err


def test_verify_theorem_text(capsys):
    code, out, _ = run(capsys, "verify", "--theorem", "2.1", "--dim", "12")
    assert code == 0
    assert "rhs = -2^14·Â-top" in out
    assert out.strip().endswith("1/1 checks passed")


def test_verify_corollary(capsys):
    code, out, _ = run(capsys, "verify", "--corollary", "2.10")
    assert code == 0
    assert "23·2048" in out


@pytest.mark.parametrize("argv", [
    ["verify", "--dim", "6"],
    ["verify", "--theorem", "2.1", "--dim", "8"],
    ["verify", "--theorem", "9.9"],
    ["verify", "--corollary", "2.99"],
    ["verify", "--theorem", "2.1", "--dim", "12", "--degree", "4"],
    ["verify", "--theorem", "2.1", "--dim", "12", "--order", "1"],
    ["verify", "--jobs", "0"],
    ["manifold", "Foo"],
    ["manifold", "K3××K3"],
    ["manifold", "Bott8^4"],
])
def test_config_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("error:")


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--theorem", "2.1", "--all"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_verify_json_deterministic_and_parallel(capsys):
    argv = ["verify", "--theorem", "2.3", "--format", "json"]
    code, a, err = run(capsys, *argv)
    assert code == 0
    assert "checks in" in err
    _, b, _ = run(capsys, *argv, "--jobs", "2")
    assert a == b
    doc = json.loads(a)
    assert doc["status"] == "pass"
    assert [r["dim"] for r in doc["reports"]] == [8, 16, 24]
    assert "seconds" not in a


def test_verify_out_file(capsys, tmp_path):
    path = tmp_path / "report.json"
    code, out, _ = run(capsys, "verify", "--corollary", "2.8", "--out", str(path))
    assert code == 0
    assert "PASS" in out
    doc = json.loads(path.read_text(encoding="utf-8"))
    assert doc["reports"][0]["case"] == "corollary-2.8"


def test_manifold_text(capsys):
    code, out, _ = run(capsys, "manifold", "K3×Bott8")
    assert code == 0
    assert "-1802240" in out
    assert "VIOLATED" not in out


def test_manifold_json_and_parse_variants(capsys):
    docs = []
    for expr in ("HP2 x HP2", "HP2*HP2", "(HP2)^2"):
        code, out, _ = run(capsys, "manifold", expr, "--format", "json")
        assert code == 0
        docs.append(json.loads(out)["values"])
    assert docs[0] == docs[1] == docs[2]
    assert docs[0]["Sig(T)"] == "0"


def test_manifold_witness_flag(capsys):
    code, out, _ = run(capsys, "manifold", "K3", "--format", "json")
    doc = json.loads(out)
    assert doc["values"]["Sig(T)"] == "-256"
    assert any(d["witness"] and d["quotient"] == "-1" for d in doc["divisibility"])


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "twistcancel", "expand", "eps2", "--order", "2"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout == "q^(1/2) + 8 q\n"
    res = subprocess.run([sys.executable, "-m", "twistcancel", "verify", "--dim", "6"],
                         capture_output=True, text=True)
    assert res.returncode == 2
