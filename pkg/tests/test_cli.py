import json
import subprocess
import sys
from fractions import Fraction

import pytest

from weakl1.cli import EXIT_USAGE, main
from weakl1.construction import ConstructionParams, make_F_k


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_norm_json(capsys):
    code, out, _ = run(capsys, "norm", "g:3:1")
    doc = json.loads(out)
    assert code == 0
    assert doc["norm"]["lo"] == doc["norm"]["hi"] == "80/81"
    assert doc["run_config"]["selector"] == "g:3:1"
    assert doc["run_config"]["tol"] == "1/1000000"


def test_norm_csv(capsys):
    code, out, _ = run(capsys, "norm", "--n", "3", "--j", "2", "--format", "csv")
    header, row = out.strip().splitlines()
    assert code == 0
    assert header == "lo,hi,lo_decimal,hi_decimal,verdict"
    assert row.startswith("80/81,80/81,")


def test_norm_budget_exhaustion_exits_2(capsys):
    code, out, _ = run(capsys, "norm", "F:6:1", "--tol", "1/1000000000000", "--budget", "20")
    assert code == 2
    assert json.loads(out)["verdict"] == "Inconclusive"


def test_norm_from_file(capsys, tmp_path):
    path = tmp_path / "f.json"
    path.write_text(make_F_k(ConstructionParams(3), 1).dumps())
    code, out, _ = run(capsys, "norm", f"@{path}", "--tol", "1/10000")
    enc = json.loads(out)["norm"]
    # (n - 1)(H_n - 1) = 5/3 at n = 3
    assert code == 0 and Fraction(enc["lo"]) <= Fraction(5, 3) <= Fraction(enc["hi"])


@pytest.mark.parametrize("argv", [
    ["norm", "bogus"],
    ["norm"],
    ["norm", "--n", "3"],
    ["norm", "g:3:1", "--tol", "abc"],
    ["verify-lemma"],
    ["type-ratio", "--n-min", "3"],
    ["verify-lemma", "--n", "4", "--signs", "sometimes"],
    ["gstar", "--n", "3", "--points", "0"],
    ["discrete", "--n", "5"],
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_USAGE
    assert "error" in err


def test_argparse_errors_exit_64(capsys):
    with pytest.raises(SystemExit) as info:
        main(["norm", "--format", "xml"])
    assert info.value.code == EXIT_USAGE


def test_verify_lemma_report(capsys):
    code, out, _ = run(capsys, "verify-lemma", "--n", "4", "--tol", "1/10000")
    doc = json.loads(out)
    assert code == 0 and doc["verdict"] == "Pass"
    assert len(doc["rows"]) == 8
    assert doc["config"]["signs"] == "all"
    assert "seconds" not in doc


def test_timing_flag(capsys):
    _, out, _ = run(capsys, "unit-norms", "--n", "3", "--timing")
    assert "seconds" in json.loads(out)


def test_unit_norms_csv(capsys):
    code, out, _ = run(capsys, "unit-norms", "--n", "3", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 3
    assert lines[1].startswith("g1,80/81,80/81")


def test_gstar(capsys):
    code, out, _ = run(capsys, "gstar", "--n", "3", "--j", "2", "--points", "9")
    doc = json.loads(out)
    assert code == 0 and len(doc["rows"]) == 9
    assert doc["params"]["j"] == 2


def test_type_ratio_range(capsys):
    code, out, _ = run(capsys, "type-ratio", "--n-min", "3", "--n-max", "4", "--tol", "1/10000")
    doc = json.loads(out)
    assert code == 0
    assert [r["label"] for r in doc["rows"]] == ["n=3", "n=4"]
    assert doc["summary"]["strictly_increasing"] == "Pass"


def test_sampled_signs_echo_seed(capsys):
    _, out, _ = run(capsys, "verify-lemma", "--n", "4", "--signs", "sample:3", "--seed", "5",
                    "--tol", "1/10000")
    doc = json.loads(out)
    assert doc["statistical"] is True and doc["config"]["seed"] == 5


def test_rearrange_table(capsys):
    code, out, _ = run(capsys, "rearrange", "recip:1", "--points", "3")
    rows = out.strip().splitlines()
    assert code == 0 and rows[0] == "t,lo,hi,lo_decimal,hi_decimal"
    # 1/(t + 1) is already decreasing: f*(1/4) = 4/5
    t, lo, hi = rows[1].split(",")[:3]
    assert t == "1/4" and Fraction(lo) <= Fraction(4, 5) <= Fraction(hi)


def test_export_function_round_trip(capsys, tmp_path):
    out_path = tmp_path / "g.json"
    code, _, _ = run(capsys, "export", "g:3:1", "--out", str(out_path))
    assert code == 0
    code, out, _ = run(capsys, "norm", f"@{out_path}")
    assert json.loads(out)["norm"]["lo"] == "80/81"


def test_export_discrete_family(capsys):
    code, out, _ = run(capsys, "export", "--n", "3")
    seqs = json.loads(out)["sequences"]
    assert code == 0 and len(seqs) == 2 and len(seqs[0]) == 81


def test_discrete_csv(capsys):
    code, out, _ = run(capsys, "discrete", "--n", "3", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 5


def test_config_file_with_flag_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# run settings\nn = 3\nformat = csv\ntol = 1/1000\n")
    code, out, _ = run(capsys, "unit-norms", "--config", str(cfg))
    assert code == 0 and out.startswith("label,")
    code, out, _ = run(capsys, "unit-norms", "--config", str(cfg), "--format", "json")
    doc = json.loads(out)
    assert doc["config"]["tol"] == "1/1000"
    assert doc["run_config"]["n"] == "3"


def test_bad_config_file(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n 3\n")
    code, _, _ = run(capsys, "unit-norms", "--config", str(cfg))
    assert code == EXIT_USAGE


def test_repeated_runs_byte_identical(tmp_path):
    outs = []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        assert main(["verify-lemma", "--n", "4", "--tol", "1/10000", "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "weakl1.cli", "norm", "one"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["norm"]["lo"] == "1/1"
