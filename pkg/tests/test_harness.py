"""Harness and CLI tests: experiment grids, CSV reproducibility, the
statistical experiment helpers, and subcommand exit codes."""

import csv
import json
import math

import pytest

from relaxsched.cli import main
from relaxsched.errors import InputError
from relaxsched.harness import (
    ExperimentSpec,
    hash_csv,
    inversion_probability,
    lower_bound_extra_steps,
    run_experiment,
)


class TestExperimentSpec:
    def test_grid_enumeration(self):
        spec = ExperimentSpec(kind="sort-overhead",
                              scheduler_kinds=("exact", "adversarial",
                                               "multiqueue"),
                              k_values=(2, 4), q_values=(8,),
                              strategies=("max-rank", "delay-top"))
        assert len(spec.grid()) == 1 + 2 * 2 + 1

    def test_validation(self):
        with pytest.raises(InputError):
            ExperimentSpec(kind="bogus")
        with pytest.raises(InputError):
            ExperimentSpec(kind="sort-overhead", seed_count=0)

    def test_from_toml(self, tmp_path):
        path = tmp_path / "exp.toml"
        path.write_text('[experiment]\nkind = "sort-overhead"\nn = 64\n'
                        'scheduler_kinds = ["adversarial"]\n'
                        'k_values = [2, 4]\nseed_count = 3\n')
        spec = ExperimentSpec.from_file(path, seed_start=5)
        assert spec.n == 64 and spec.k_values == (2, 4)
        assert spec.seed_start == 5


class TestRunExperiment:
    def test_row_count_equals_grid(self, tmp_path):
        spec = ExperimentSpec(kind="sort-overhead", n=64,
                              scheduler_kinds=("exact", "adversarial"),
                              k_values=(2, 4), seed_count=3,
                              out_csv=str(tmp_path / "out.csv"))
        rows = run_experiment(spec)
        assert len(rows) == len(spec.grid()) == 3
        with open(tmp_path / "out.csv") as fh:
            assert len(list(csv.DictReader(fh))) == 3

    def test_exact_row_overhead_exactly_one(self):
        spec = ExperimentSpec(kind="sort-overhead", n=64,
                              scheduler_kinds=("exact",), seed_count=3)
        row = run_experiment(spec)[0]
        assert row["mean_overhead"] == 1.0
        assert row["mean_extra_steps"] == 0.0

    def test_overhead_at_least_one(self):
        spec = ExperimentSpec(kind="sort-overhead", n=64,
                              scheduler_kinds=("adversarial", "multiqueue"),
                              k_values=(4,), q_values=(4,), seed_count=3)
        for row in run_experiment(spec):
            assert row["mean_overhead"] >= 1.0

    def test_csv_hash_reproducible(self, tmp_path):
        hashes = []
        for name in ("a.csv", "b.csv"):
            spec = ExperimentSpec(kind="sssp-overhead", n=100, m=400,
                                  scheduler_kinds=("multiqueue",),
                                  q_values=(4,), seed_count=2,
                                  out_csv=str(tmp_path / name))
            run_experiment(spec)
            hashes.append(hash_csv(tmp_path / name))
        assert hashes[0] == hashes[1]

    def test_lemma_audit_clean(self):
        spec = ExperimentSpec(kind="lemma-audit", n=64,
                              scheduler_kinds=("adversarial",),
                              k_values=(2,), strategies=("max-rank",),
                              seed_count=3)
        assert run_experiment(spec)[0]["violations"] == 0


class TestInversionProbability:
    def test_single_queue_is_exact(self):
        assert inversion_probability(16, 1, 50, 0) == [0.0] * 15

    def test_same_seed_identical(self):
        a = inversion_probability(16, 4, 100, 3)
        b = inversion_probability(16, 4, 100, 3)
        assert a == b

    def test_trials_validated(self):
        with pytest.raises(InputError):
            inversion_probability(8, 2, 0, 0)


class TestLowerBound:
    def test_exact_control_zero_slope(self):
        table, slope, _ = lower_bound_extra_steps(
            "bst-sort", [64, 128], 1, 3, scheduler_kind="exact")
        assert all(mean == 0 for mean, _ in table.values())
        assert slope == 0

    def test_multiqueue_exceeds_eighth_log(self):
        table, slope, p_value = lower_bound_extra_steps(
            "bst-sort", [128, 512], 8, 5)
        for n, (mean, _) in table.items():
            assert mean >= math.log(n) / 8
        assert slope > 0


class TestCli:
    def run(self, capsys, *argv):
        code = main(list(argv))
        out = capsys.readouterr().out.strip().splitlines()
        return code, [json.loads(line) for line in out if line]

    def test_run_sort_single(self, capsys, tmp_path):
        trace = tmp_path / "t.jsonl"
        code, out = self.run(capsys, "run-sort", "--n", "64",
                             "--scheduler", "adversarial", "--k", "4",
                             "--seed", "1", "--trace", str(trace))
        assert code == 0
        assert out[0]["n"] == 64
        assert trace.exists()

    def test_run_sort_batch_csv(self, capsys, tmp_path):
        out_csv = tmp_path / "r.csv"
        code, out = self.run(capsys, "run-sort", "--n", "64",
                             "--scheduler", "multiqueue", "--q", "4",
                             "--seeds", "3", "--out", str(out_csv))
        assert code == 0
        with open(out_csv) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 1 and rows[0]["seeds"] == "3"

    def test_run_delaunay(self, capsys):
        code, out = self.run(capsys, "run-delaunay", "--n", "24",
                             "--scheduler", "adversarial", "--k", "2")
        assert code == 0 and out[0]["extra_steps"] >= 0

    def test_run_sssp_and_gen_graph(self, capsys, tmp_path):
        graph = tmp_path / "g.gr"
        code, _ = self.run(capsys, "gen-graph", "--n", "50", "--m", "150",
                           "--seed", "2", "--out", str(graph))
        assert code == 0
        code, out = self.run(capsys, "run-sssp", "--graph", str(graph),
                             "--scheduler", "multiqueue", "--q", "4")
        assert code == 0 and out[0]["correct"] is True

    def test_run_txsim(self, capsys):
        code, out = self.run(capsys, "run-txsim", "--n", "64", "--k", "4",
                             "--contention", "8", "--workers", "4",
                             "--duration", "2")
        assert code == 0 and out[0]["commits"] == 64

    def test_inversion_prob(self, capsys, tmp_path):
        out_csv = tmp_path / "inv.csv"
        code, out = self.run(capsys, "inversion-prob", "--n", "16",
                             "--q", "4", "--trials", "200",
                             "--out", str(out_csv))
        assert code == 0
        assert len(out[0]["estimates"]) == 15
        with open(out_csv) as fh:
            assert len(list(csv.DictReader(fh))) == 15

    def test_lemma_audit(self, capsys):
        code, _ = self.run(capsys, "lemma-audit", "--n", "48",
                           "--k-values", "2", "--seeds", "2")
        assert code == 0

    def test_gen_points(self, capsys, tmp_path):
        points = tmp_path / "p.tsv"
        code, _ = self.run(capsys, "gen-points", "--n", "12", "--seed", "0",
                           "--out", str(points))
        assert code == 0
        assert len(points.read_text().splitlines()) == 12

    def test_missing_input_exit_code_two(self, capsys):
        code = main(["run-sssp", "--graph", "/does/not/exist.gr"])
        assert code == 2

    def test_config_file_flag(self, capsys, tmp_path):
        cfg = tmp_path / "sched.toml"
        cfg.write_text('[scheduler]\nkind = "adversarial"\nk = 3\n')
        code, out = self.run(capsys, "run-sort", "--n", "32",
                             "--config", str(cfg))
        assert code == 0
