from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from lacunary.cli import main
from lacunary.tables import read_csv

CONFIGS = Path(__file__).resolve().parents[1] / "demos" / "configs"


def _cfg(tmp_path: Path, text: str) -> Path:
    p = tmp_path / "c.cfg"
    p.write_text(text)
    return p


SMALL = """
[sequence]
kind = geometric
base = 3/2

[test_function]
family = triangle
support = 1

[run]
N = 400
alpha = 1.37
k = 2

[experiment]
N_ladder = 128, 256, 512
samples_per_N = 12
seed = 3
"""


def test_gaps_happy_path(tmp_path):
    out = tmp_path / "d"
    assert main(["gaps", "--config", str(_cfg(tmp_path, SMALL)), "--out", str(out)]) == 0
    table = read_csv(out / "gaps.csv")
    assert table.columns == ("rank", "point", "gap") and len(table) == 400
    doc = json.loads((out / "summary.json").read_text())
    assert sum(doc["counts"]) == 400
    assert len(doc["bin_edges"]) == len(doc["counts"]) + 1
    assert doc["manifest"]["subcommand"] == "gaps"
    assert doc["manifest"]["config_hash"]
    assert (out / "timings.txt").exists()


def test_unknown_subcommand_exits_two(tmp_path):
    assert main(["frobnicate", "--out", str(tmp_path)]) == 2


def test_config_errors_exit_two(tmp_path, capsys):
    bad = _cfg(tmp_path, SMALL + "\n[counting]\nwidth = 3\n")
    assert main(["gaps", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "unknown key" in capsys.readouterr().err
    assert main(["gaps", "--out", str(tmp_path / "o")]) == 2  # --config missing


def test_computation_error_exits_one(tmp_path):
    # sqrt(2)^2 = 2 is an exact integer: the fractional part cannot be certified
    cfg = _cfg(tmp_path, "[sequence]\nkind = geometric\nbase = sqrt(2)\n[run]\nN = 10\nalpha = 1\n")
    assert main(["fracparts", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1


def test_every_subcommand_runs(tmp_path):
    cfg = _cfg(tmp_path, SMALL + "\n[counting]\nfamily = main_lemma\nr = 2\nK = 2\nM = 5\n")
    expected = {
        "materialize": ["sequence.csv"],
        "fracparts": ["points.csv"],
        "gaps": ["gaps.csv"],
        "correlate": ["correlation.csv"],
        "variance": ["variance.csv", "plot.csv", "plot.gp"],
        "count": ["counts.csv"],
        "ladder": ["correlation.csv", "gaps.csv", "plot.csv", "plot.gp"],
    }
    for sub, files in expected.items():
        out = tmp_path / sub
        code = main([sub, "--config", str(cfg), "--out", str(out)])
        assert code in (0, 1), sub
        for f in files + ["summary.json", "timings.txt"]:
            assert (out / f).exists(), (sub, f)
        doc = json.loads((out / "summary.json").read_text())
        assert doc["exit_code"] == code


def test_outputs_are_deterministic(tmp_path):
    cfg = _cfg(tmp_path, SMALL)
    for run in ("a", "b"):
        assert main(["ladder", "--config", str(cfg), "--out", str(tmp_path / run), "--threads", "2"]) == 0
    for f in ("correlation.csv", "gaps.csv", "plot.csv", "summary.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_seed_override_recorded(tmp_path):
    out = tmp_path / "o"
    main(["ladder", "--config", str(_cfg(tmp_path, SMALL)), "--out", str(out), "--seed", "77"])
    doc = json.loads((out / "summary.json").read_text())
    assert doc["seed"] == 77 and doc["manifest"]["overrides"] == {"seed": 77}


def test_correlate_methods(tmp_path):
    vals = {}
    for method in ("direct", "naive", "poisson"):
        text = SMALL.replace("k = 2", f"k = 2\nmethod = {method}\ntruncation = 20000")
        cfg = _cfg(tmp_path, text)
        out = tmp_path / method
        assert main(["correlate", "--config", str(cfg), "--out", str(out)]) == 0
        row = read_csv(out / "correlation.csv").rows[0]
        vals[method] = row[4]
        assert row[3] == {"direct": "direct_windowed", "naive": "naive_reference",
                          "poisson": "poisson_summation"}[method]
    assert vals["direct"] == pytest.approx(vals["naive"], rel=1e-9)
    assert vals["poisson"] == pytest.approx(vals["direct"], abs=1e-3)


def test_variance_failure_exits_one(tmp_path):
    # an impossible ceiling makes the slope assertion fail
    cfg = _cfg(tmp_path, SMALL.replace("seed = 3", "seed = 3\neta_slack = -5"))
    out = tmp_path / "o"
    assert main(["variance", "--config", str(cfg), "--out", str(out)]) == 1
    doc = json.loads((out / "summary.json").read_text())
    assert doc["passed"] is False and doc["slope_limit"] == -6.0


def test_count_ladder_appends_slope(tmp_path):
    out = tmp_path / "o"
    assert main(["count", "--config", str(CONFIGS / "count_main_lemma.cfg"), "--out", str(out),
                 "--ladder"]) == 0
    t = read_csv(out / "counts.csv")
    assert t.rows[-1][0] == "main_lemma_slope"
    assert t.column("count")[:-1] == [4, 4, 4, 4]
    doc = json.loads((out / "summary.json").read_text())
    assert doc["passed"] and doc["slope"] <= doc["proved_exponent"] + doc["slope_slack"]


def test_count_single_quadruple(tmp_path):
    cfg = _cfg(tmp_path, "[sequence]\nkind = geometric\nbase = 2\n"
               "[counting]\nfamily = quadruples\nN = 2\nepsilon = 1/10\n")
    out = tmp_path / "o"
    assert main(["count", "--config", str(cfg), "--out", str(out)]) == 0
    assert read_csv(out / "counts.csv").rows[0][:5] == ("quadruples", 2, 2, "1/10", 16)


def test_verify_forced_failure(tmp_path):
    cfg = _cfg(tmp_path, "[verify]\neta_slack = -10\n")
    out = tmp_path / "v"
    assert main(["verify", "--quick", "--config", str(cfg), "--out", str(out)]) == 1
    doc = json.loads((out / "summary.json").read_text())
    assert doc["all_passed"] is False
    assert doc["failed"] == [5]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "lacunary", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for sub in ("materialize", "fracparts", "gaps", "correlate", "variance", "count", "ladder", "verify"):
        assert sub in proc.stdout
