"""Execution-loop tests: extra-step counting, charge pairs, lemma checks,
and the deadlock bug trap."""

import pytest

from relaxsched.errors import ContractError, DeadlockError
from relaxsched.incremental import assert_lemmas, charge_step, run
from relaxsched.sched import AdversarialScheduler, SchedulerConfig
from relaxsched.workloads import SyntheticDagWorkload, generate_instance


def adversarial(k, strategy="max-rank", seed=0):
    return SchedulerConfig(kind="adversarial", k=k,
                           adversary_strategy=strategy, rng_seed=seed)


class TestChargeStep:
    def test_single_level_chain(self):
        w = SyntheticDagWorkload(3, [(1, 3)])
        assert charge_step(w, 3) == (1, 3)

    def test_two_level_chain_recurses_to_ready_root(self):
        # v=3 blocked by u=2, u blocked by w=1, w fully ready.
        w = SyntheticDagWorkload(3, [(1, 2), (2, 3)])
        assert charge_step(w, 3) == (1, 2)

    def test_repeated_charges_accumulate(self):
        w = SyntheticDagWorkload(2, [(1, 2)])
        counts = {}
        for _ in range(3):
            pair = charge_step(w, 2)
            counts[pair] = counts.get(pair, 0) + 1
        assert counts == {(1, 2): 3}

    def test_processable_task_is_contract_error(self):
        w = SyntheticDagWorkload(2, [(1, 2)])
        with pytest.raises(ContractError):
            charge_step(w, 1)


class TestRun:
    @pytest.mark.parametrize("kind", ["bst-sort", "delaunay", "dag"])
    def test_exact_scheduler_zero_extra_steps(self, kind):
        w = generate_instance(kind, 64, 5)
        report, _ = run(w, SchedulerConfig(kind="exact"))
        assert report.extra_steps == 0
        assert report.overhead_ratio == 1.0
        assert report.processed_order == list(range(1, 65))

    def test_dependency_free_dag_never_blocks(self):
        w = generate_instance("dag", 100, 0, dag_kind="none")
        report, _ = run(w, adversarial(4))
        assert report.extra_steps == 0
        assert report.total_steps == 100

    def test_charge_soundness(self):
        w = generate_instance("bst-sort", 256, 7)
        report, _ = run(w, adversarial(4))
        assert report.extra_steps == sum(report.charged_pairs.values())
        assert all(i < j for i, j in report.charged_pairs)
        # Charges to pairs rooted at i never exceed the observed R_i.
        for (i, _j), count in report.charged_pairs.items():
            assert count <= report.per_label_R.get(i, 0)

    def test_total_steps_at_least_n(self):
        w = generate_instance("bst-sort", 128, 1)
        report, _ = run(w, adversarial(2, "delay-top"))
        assert report.total_steps >= 128
        assert report.total_steps == 128 + report.extra_steps

    def test_report_serialization(self, tmp_path):
        import json

        w = generate_instance("bst-sort", 64, 2)
        report, _ = run(w, adversarial(4))
        data = json.loads(report.to_json())
        assert data["n"] == 64
        assert data["extra_steps"] == report.extra_steps
        path = tmp_path / "pairs.csv"
        report.write_charged_pairs_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "i,j,count"
        assert len(lines) == 1 + len(report.charged_pairs)

    def test_deadlock_trap(self):
        class BrokenWorkload(SyntheticDagWorkload):
            # Claims label 1 is blocked by label 2: a dependency cycle in
            # effect, which a correct workload can never produce.
            def is_ready(self, label):
                return False

            def unprocessed_ancestors(self, label):
                return {2} if label == 1 else set()

        with pytest.raises(DeadlockError):
            run(BrokenWorkload(2, []), SchedulerConfig(kind="exact"))


class TestAssertLemmas:
    def test_exact_no_violations(self):
        w = generate_instance("bst-sort", 128, 3)
        report, trace = run(w, SchedulerConfig(kind="exact"))
        assert assert_lemmas(report, trace, 1) == []

    @pytest.mark.parametrize("strategy",
                             ["max-rank", "delay-top", "random-top-k"])
    @pytest.mark.parametrize("k", [2, 4])
    def test_compliant_adversary_no_violations(self, k, strategy):
        for seed in range(5):
            w = generate_instance("bst-sort", 256, seed)
            report, trace = run(w, adversarial(k, strategy, seed))
            assert assert_lemmas(report, trace, k) == []

    def test_unfair_adversary_negative_control(self, monkeypatch):
        # Same rank bound k, but a fairness window of 3k: the R_i <= k^2
        # guarantee no longer holds on a chain DAG.
        k = 3
        import relaxsched.incremental as incremental

        def unfair(config, instrument=True):
            return AdversarialScheduler(config, instrument,
                                        _fairness_window=3 * k)

        monkeypatch.setattr(incremental, "make_scheduler", unfair)
        w = generate_instance("dag", 64, 0, dag_kind="chain")
        report, trace = run(w, adversarial(k, "max-rank"))
        violations = assert_lemmas(report, trace, k)
        assert violations
        assert any("R_i" in v for v in violations)
