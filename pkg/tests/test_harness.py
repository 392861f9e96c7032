import csv
import json

import numpy as np
import pytest

from sparsepr.harness import (
    Cell,
    ExperimentSpec,
    dump_reconstruction,
    run_noise_curve,
    run_sweep,
    run_trial,
    trial_seeds,
    write_reconstruction_csv,
    write_summary_csv,
    write_trials_csv,
    write_trials_jsonl,
)
from sparsepr.solver import SolverConfig


def small_spec(**overrides):
    base = dict(
        n=64,
        true_k=3,
        m_over_n_grid=(1.5, 3.0),
        trials=3,
        base_seed=77,
    )
    base.update(overrides)
    return ExperimentSpec(**base)


class TestSeeds:
    def test_deterministic(self):
        assert trial_seeds(1, 2, 3) == trial_seeds(1, 2, 3)

    def test_pairwise_distinct_over_grid(self):
        seen = set()
        for cell in range(60):
            for trial in range(60):
                seen.add(trial_seeds(42, cell, trial))
        assert len(seen) == 3600

    def test_base_seed_changes_everything(self):
        assert trial_seeds(1, 0, 0) != trial_seeds(2, 0, 0)


class TestRunTrial:
    def test_identical_calls_identical_records(self):
        spec = small_spec()
        a = run_trial(spec, 0, 1)
        b = run_trial(spec, 0, 1)
        a.wall_time = b.wall_time = 0.0
        assert a == b

    def test_success_threshold_is_strict_less(self):
        spec = small_spec(m_over_n_grid=(3.0,), trials=1)
        rec = run_trial(spec, 0, 0)
        assert rec.success  # comfortable recovery at m/n = 3
        at_boundary = small_spec(m_over_n_grid=(3.0,), trials=1,
                                 success_threshold=rec.rel_err)
        assert not run_trial(at_boundary, 0, 0).success
        just_above = small_spec(m_over_n_grid=(3.0,), trials=1,
                                success_threshold=rec.rel_err * (1 + 1e-12))
        assert run_trial(just_above, 0, 0).success

    def test_cell_coordinates_recorded(self):
        spec = small_spec(k_hat_grid=(6,), snr_db_grid=(40.0,))
        rec = run_trial(spec, 1, 2)
        assert rec.m_over_n == 3.0 and rec.k_hat == 6 and rec.snr_db == 40.0
        assert rec.trial == 2


class TestRunSweep:
    def test_single_cell_single_trial_equals_run_trial(self):
        spec = small_spec(m_over_n_grid=(2.0,), trials=1)
        sweep = run_sweep(spec)
        direct = run_trial(spec, 0, 0)
        rec = sweep.records[0]
        rec.wall_time = direct.wall_time = 0.0
        assert rec == direct

    def test_cell_count_and_per_cell_trials(self):
        spec = small_spec(k_hat_grid=(3, 6))
        sweep = run_sweep(spec)
        assert len(sweep.records) == 2 * 2 * 3
        for summary in sweep.summaries():
            assert summary.trials == 3

    def test_parallel_matches_serial(self):
        spec = small_spec()
        serial = run_sweep(spec, jobs=1)
        parallel = run_sweep(spec, jobs=2)
        for a, b in zip(serial.records, parallel.records):
            a.wall_time = b.wall_time = 0.0
        assert serial.records == parallel.records

    def test_success_rate_monotone_on_small_grid(self):
        spec = small_spec(m_over_n_grid=(0.4, 1.5, 3.0), trials=5)
        rates = run_sweep(spec).success_rates()
        slack = 1.0 / spec.trials
        assert all(rates[i + 1] >= rates[i] - slack for i in range(len(rates) - 1))

    def test_aggregates_match_recomputation_from_rows(self):
        spec = small_spec()
        sweep = run_sweep(spec)
        for summary in sweep.summaries():
            rows = [r for r in sweep.records if r.cell_index == summary.cell_index]
            assert summary.success_rate == pytest.approx(
                np.mean([r.success for r in rows]))
            assert summary.mean_rel_err == pytest.approx(
                np.mean([r.rel_err for r in rows]))
            assert summary.median_rel_err == pytest.approx(
                np.median([r.rel_err for r in rows]))

    def test_invalid_spec_rejected(self):
        with pytest.raises(ValueError, match="trials"):
            small_spec(trials=0)
        with pytest.raises(ValueError, match="m_over_n_grid"):
            small_spec(m_over_n_grid=())
        with pytest.raises(ValueError, match="success_threshold"):
            small_spec(success_threshold=0.0)


class TestNoiseCurve:
    def test_requires_snr_grid(self):
        with pytest.raises(ValueError, match="snr_db_grid"):
            run_noise_curve(small_spec())

    def test_infinite_snr_sentinel_matches_noiseless(self):
        noiseless = run_sweep(small_spec(m_over_n_grid=(2.0,)))
        sentinel = run_sweep(small_spec(m_over_n_grid=(2.0,), snr_db_grid=(None,)))
        for a, b in zip(noiseless.records, sentinel.records):
            a.wall_time = b.wall_time = 0.0
        assert noiseless.records == sentinel.records

    def test_error_decreases_with_snr(self):
        spec = small_spec(m_over_n_grid=(2.0,), trials=4,
                          snr_db_grid=(10.0, 40.0, 70.0))
        result = run_noise_curve(spec)
        medians = [s.median_rel_err for s in result.summaries()]
        assert medians[0] > medians[1] > medians[2]


class TestReconstruction:
    def test_dump_support_fidelity(self):
        spec = small_spec(m_over_n_grid=(2.0,), k_hat_grid=(10,), trials=1,
                          solver=SolverConfig(stop_tol=1e-10))
        dump = dump_reconstruction(spec)
        assert dump.smoothed_rel_err < 1e-5
        est_support = np.flatnonzero(np.abs(dump.smoothed) > 1e-8)
        assert set(est_support) == set(dump.support)

    def test_csv_round_trip(self, tmp_path):
        spec = small_spec(m_over_n_grid=(2.0,), k_hat_grid=(10,), trials=1)
        dump = dump_reconstruction(spec)
        path = tmp_path / "recon.csv"
        write_reconstruction_csv(path, dump)
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == spec.n
        got = np.array([float(r["truth_re"]) for r in rows])
        assert np.array_equal(got, dump.truth.real)


class TestWriters:
    def test_summary_and_trials_exclude_timing_by_default(self, tmp_path):
        sweep = run_sweep(small_spec(m_over_n_grid=(2.0,), trials=2))
        s_path, t_path = tmp_path / "s.csv", tmp_path / "t.csv"
        write_summary_csv(s_path, sweep)
        write_trials_csv(t_path, sweep)
        assert "wall_time" not in s_path.read_text()
        assert "wall_time" not in t_path.read_text()
        write_summary_csv(s_path, sweep, include_timing=True)
        assert "mean_wall_time" in s_path.read_text()

    def test_jsonl_rows_parse(self, tmp_path):
        sweep = run_sweep(small_spec(m_over_n_grid=(2.0,), trials=2))
        path = tmp_path / "trials.jsonl"
        write_trials_jsonl(path, sweep)
        rows = [json.loads(line) for line in path.read_text().splitlines()]
        assert len(rows) == 2
        assert rows[0]["trial"] == 0 and "rel_err" in rows[0]

    def test_rerun_bytes_identical(self, tmp_path):
        spec = small_spec()
        for name in ("a", "b"):
            sweep = run_sweep(spec, jobs=1 if name == "a" else 2)
            write_summary_csv(tmp_path / f"{name}_summary.csv", sweep)
            write_trials_csv(tmp_path / f"{name}_trials.csv", sweep)
            write_trials_jsonl(tmp_path / f"{name}_trials.jsonl", sweep)
        for kind in ("summary.csv", "trials.csv", "trials.jsonl"):
            assert (tmp_path / f"a_{kind}").read_bytes() == \
                (tmp_path / f"b_{kind}").read_bytes()


class TestCells:
    def test_label(self):
        assert Cell(1.5, 4).label() == "m/n=1.5 k_hat=4 snr=inf"
        assert Cell(0.2, 7, 30.0).label() == "m/n=0.2 k_hat=7 snr=30"

    def test_grid_order_snr_outer_m_inner(self):
        spec = small_spec(k_hat_grid=(3, 6), snr_db_grid=(10.0, 20.0))
        cells = spec.cells()
        assert len(cells) == 8
        assert cells[0] == Cell(1.5, 3, 10.0)
        assert cells[1] == Cell(3.0, 3, 10.0)
        assert cells[2] == Cell(1.5, 6, 10.0)
        assert cells[4] == Cell(1.5, 3, 20.0)
