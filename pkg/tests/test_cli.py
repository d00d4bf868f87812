"""CLI behavior: outputs, exit codes, determinism."""

import csv
import json
import math
from pathlib import Path

import pytest

from dyadicsearch.cli import main


def read_csv(path: Path):
    lines = path.read_text(encoding="utf-8").splitlines()
    comments = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if not l.startswith("#")]
    rows = list(csv.reader(body))
    return comments, rows[0], rows[1:]


class TestInfo:
    def test_constants_table(self, tmp_path):
        rc = main(["info", "--channel", "bsc:0.1", "--out", str(tmp_path)])
        assert rc == 0
        comments, header, rows = read_csv(tmp_path / "info.csv")
        assert header == ["constant", "value"]
        values = {r[0]: float(r[1]) for r in rows}
        assert values["C"] == pytest.approx(0.5108256237659907, abs=1e-12)
        assert values["B"] == pytest.approx(math.log(9.0), abs=1e-12)
        assert values["r"] == 2
        assert any("schema" in c for c in comments)
        assert (tmp_path / "manifest-info.json").exists()

    def test_degenerate_channel_rejected(self, tmp_path, capsys):
        rc = main(["info", "--channel", "bsc:0.5", "--out", str(tmp_path)])
        assert rc == 2
        assert "degenerate" in capsys.readouterr().err

    def test_preset_alias(self, tmp_path):
        assert main(["info", "--preset", "bac:0.9,0.8", "--out", str(tmp_path)]) == 0

    def test_quoted_constants_note(self, tmp_path, capsys):
        main(["info", "--channel", "bac:0.9,0.8", "--out", str(tmp_path)])
        out = capsys.readouterr().out
        assert "0.77" in out and "2.08" in out
        manifest = json.loads((tmp_path / "manifest-info.json").read_text())
        assert manifest["findings"]["quoted_constants"] == {"C": 0.77, "B": 2.08}

    def test_unknown_preset(self, tmp_path, capsys):
        assert main(["info", "--channel", "zchan:0.1", "--out", str(tmp_path)]) == 2


class TestFig2:
    def test_sixty_six_rows_and_argmins(self, tmp_path):
        rc = main(
            ["fig2", "--channel", "bac:0.9,0.8", "--trials", "2000", "--seed", "7",
             "--out", str(tmp_path)]
        )
        assert rc == 0
        _, header, rows = read_csv(tmp_path / "fig2.csv")
        assert len(rows) == 66
        assert header[:6] == ["pattern", "L", "U", "exact_d", "mc_mean", "mc_stderr"]
        for col in ("argmin_l", "argmin_u", "argmin_exact", "argmin_mc"):
            marks = [int(r[header.index(col)]) for r in rows]
            assert sum(marks) == 1
        ranks = [int(r[header.index("rank")]) for r in rows]
        assert sorted(ranks) == list(range(1, 67))
        best = ranks.index(1)
        assert rows[best][header.index("argmin_exact")] == "1"
        manifest = json.loads((tmp_path / "manifest-fig2.json").read_text())
        assert manifest["findings"]["argmin_u"] == "7,3"
        assert manifest["findings"]["argmin_exact"] == "6,3,1"
        assert manifest["findings"]["exact_argmin_matches_reference"] is True

    def test_bounds_sandwich_in_output(self, tmp_path):
        main(["fig2", "--channel", "bac:0.9,0.8", "--trials", "500", "--seed", "3",
              "--out", str(tmp_path)])
        _, header, rows = read_csv(tmp_path / "fig2.csv")
        iL, iU, iD = header.index("L"), header.index("U"), header.index("exact_d")
        for r in rows:
            assert float(r[iL]) <= float(r[iD]) <= float(r[iU]) + 1e-12

    def test_seed_required(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["fig2", "--channel", "bac:0.9,0.8", "--out", str(tmp_path)])
        assert exc.value.code == 2


class TestFig3:
    def test_exact_sweep_columns(self, tmp_path):
        # bsc:0.25 sits in the regime where ln(D_n)/sqrt(n) >= -A1 already
        # holds at every swept budget (for noisier-than-not channels the ratio
        # dips below -A1 near n = r before sqrt(n) grows).
        rc = main(
            ["fig3", "--channel", "bsc:0.25", "--n-max", "200", "--step", "20",
             "--out", str(tmp_path)]
        )
        assert rc == 0
        _, header, rows = read_csv(tmp_path / "fig3.csv")
        assert header[0] == "n" and "log_d_over_sqrt_n" in header
        d = [float(r[header.index("d")]) for r in rows]
        assert all(a > b for a, b in zip(d, d[1:]))
        neg_a1 = float(rows[0][header.index("neg_a1")])
        for r in rows:
            assert float(r[header.index("log_d_over_sqrt_n")]) >= neg_a1

    def test_mc_mode_requires_seed(self, tmp_path, capsys):
        rc = main(["fig3", "--channel", "bsc:0.1", "--n-max", "50", "--step", "10",
                   "--mode", "mc", "--out", str(tmp_path)])
        assert rc == 2

    def test_mc_mode_runs(self, tmp_path):
        rc = main(["fig3", "--channel", "bsc:0.1", "--n-max", "40", "--step", "20",
                   "--mode", "mc", "--trials", "2000", "--seed", "5", "--out", str(tmp_path)])
        assert rc == 0
        _, header, rows = read_csv(tmp_path / "fig3.csv")
        assert all(float(r[header.index("d_stderr")]) > 0.0 for r in rows)


class TestPolicy:
    def test_aurelian_unit_staircase(self, tmp_path, capsys):
        rc = main(["policy", "--channel", "bsc:0.05", "--n", "10", "--rule", "aurelian",
                   "--out", str(tmp_path)])
        assert rc == 0
        _, header, rows = read_csv(tmp_path / "policy.csv")
        assert rows[0][header.index("pattern")] == "4,3,2,1"
        d = float(rows[0][header.index("exact_d")])
        assert float(rows[0][header.index("L")]) <= d <= float(rows[0][header.index("U")])

    def test_exhaustive_equals_greedy(self, tmp_path):
        for rule in ("greedy", "exhaustive:6"):
            main(["policy", "--channel", "bsc:0.1", "--n", "12", "--rule", rule,
                  "--out", str(tmp_path / rule.replace(":", "_"))])
        _, h1, r1 = read_csv(tmp_path / "greedy" / "policy.csv")
        _, h2, r2 = read_csv(tmp_path / "exhaustive_6" / "policy.csv")
        assert r1[0][h1.index("pattern")] == r2[0][h2.index("pattern")]

    def test_budget_refusal_exit_code(self, tmp_path):
        rc = main(["policy", "--channel", "bsc:0.1", "--n", "200",
                   "--rule", "exhaustive:6", "--out", str(tmp_path)])
        assert rc == 3

    def test_unknown_rule(self, tmp_path):
        rc = main(["policy", "--channel", "bsc:0.1", "--n", "5", "--rule", "magic",
                   "--out", str(tmp_path)])
        assert rc == 2


class TestNonuniform:
    def test_uniform_prior_columns_equal(self, tmp_path):
        rc = main(["nonuniform", "--channel", "bac:0.9,0.8", "--prior", "uniform",
                   "--pattern", "6,3,1", "--trials", "3000", "--seed", "1",
                   "--out", str(tmp_path)])
        assert rc == 0
        _, header, rows = read_csv(tmp_path / "nonuniform.csv")
        row = rows[0]
        assert row[header.index("uniform_mse")] == row[header.index("original_mse")]
        assert row[header.index("inequality_ok")] == "1"

    def test_power_prior_verdict(self, tmp_path):
        rc = main(["nonuniform", "--channel", "bac:0.9,0.8", "--prior", "power:2",
                   "--pattern", "6,3,1", "--trials", "5000", "--seed", "2",
                   "--out", str(tmp_path)])
        assert rc == 0
        _, header, rows = read_csv(tmp_path / "nonuniform.csv")
        assert float(rows[0][header.index("lipschitz_sq")]) == 4.0
        assert rows[0][header.index("inequality_ok")] == "1"

    def test_misdeclared_lipschitz_rejected_at_load(self, tmp_path, capsys):
        prior_file = tmp_path / "prior.json"
        prior_file.write_text('{"prior": "power", "exponent": 2, "lipschitz_sq": 1.0}')
        rc = main(["nonuniform", "--channel", "bsc:0.1", "--prior", str(prior_file),
                   "--pattern", "3,1", "--trials", "100", "--seed", "0",
                   "--out", str(tmp_path)])
        assert rc == 2
        assert "lipschitz" in capsys.readouterr().err

    def test_bad_pattern(self, tmp_path):
        rc = main(["nonuniform", "--channel", "bsc:0.1", "--prior", "uniform",
                   "--pattern", "3,x", "--trials", "100", "--seed", "0",
                   "--out", str(tmp_path)])
        assert rc == 2


class TestDeterminism:
    def test_fig2_byte_identical_across_runs_and_jobs(self, tmp_path):
        args = ["fig2", "--channel", "bac:0.9,0.8", "--trials", "5000", "--seed", "99"]
        main(args + ["--out", str(tmp_path / "a"), "--jobs", "1"])
        main(args + ["--out", str(tmp_path / "b"), "--jobs", "3"])
        assert (tmp_path / "a" / "fig2.csv").read_bytes() == (tmp_path / "b" / "fig2.csv").read_bytes()

    def test_nonuniform_byte_identical(self, tmp_path):
        args = ["nonuniform", "--channel", "bsc:0.2", "--prior", "power:2",
                "--pattern", "5,2,1", "--trials", "6000", "--seed", "4"]
        main(args + ["--out", str(tmp_path / "a"), "--jobs", "1"])
        main(args + ["--out", str(tmp_path / "b"), "--jobs", "4"])
        assert (tmp_path / "a" / "nonuniform.csv").read_bytes() == (tmp_path / "b" / "nonuniform.csv").read_bytes()
