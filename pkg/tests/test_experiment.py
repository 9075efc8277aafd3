import math

import numpy as np
import pytest

from sleepingtop import (
    ExperimentConfig,
    IntegrationConfig,
    classify_spectral,
    equilibrium,
    make_perturbed_state,
    run_single,
    run_sweep,
    write_sweep_csv,
)
from sleepingtop.experiment import SWEEP_CSV_HEADER, format_float


def sweep_config(params, m3_values, n_steps=40_000, perturbation=1e-4, seed=5, step=1e-3):
    return ExperimentConfig(
        params=params,
        m3_values=tuple(m3_values),
        perturbation=perturbation,
        integration=IntegrationConfig(step=step, n_steps=n_steps, record_every=10),
        seed=seed,
    )


class TestPerturbedState:
    def test_zero_magnitude_is_exact_equilibrium(self, unit_params):
        st = make_perturbed_state(unit_params, 2.0, 0.0, np.random.default_rng(1))
        assert st == equilibrium(2.0)

    def test_magnitude_and_normalization(self, unit_params):
        rng = np.random.default_rng(2)
        for m3 in (0.5, 3.0):
            st = make_perturbed_state(unit_params, m3, 1e-4, rng)
            assert st.M[2] == m3
            assert math.hypot(st.M[0], st.M[1]) == pytest.approx(1e-4, rel=1e-12)
            assert np.linalg.norm(st.gamma) == pytest.approx(1.0, abs=1e-15)

    def test_seeded_reproducibility(self, unit_params):
        a = make_perturbed_state(unit_params, 1.0, 1e-4, np.random.default_rng(9))
        b = make_perturbed_state(unit_params, 1.0, 1e-4, np.random.default_rng(9))
        assert a == b


class TestConfigValidation:
    def test_empty_m3(self, unit_params):
        with pytest.raises(ValueError):
            ExperimentConfig(params=unit_params, m3_values=())

    def test_negative_perturbation(self, unit_params):
        with pytest.raises(ValueError):
            ExperimentConfig(params=unit_params, m3_values=(1.0,), perturbation=-1e-4)


class TestRunSweep:
    def test_verdict_flips_at_critical_spin(self, unit_params):
        rows = run_sweep(sweep_config(unit_params, [1.6, 1.8, 2.0, 2.2, 2.4]))
        verdicts = {r.m3: r.spectral_verdict for r in rows}
        assert verdicts[1.6] == verdicts[1.8] == "UNSTABLE"
        assert verdicts[2.0] == verdicts[2.2] == verdicts[2.4] == "STABLE"

    def test_rows_sorted_by_m3(self, unit_params):
        rows = run_sweep(sweep_config(unit_params, [2.4, 1.6, 2.0], n_steps=2000))
        assert [r.m3 for r in rows] == [1.6, 2.0, 2.4]

    def test_axial_momentum_column_exact(self, unit_params):
        rows = run_sweep(sweep_config(unit_params, [1.8, 2.2], n_steps=5000))
        assert all(r.drift_F == 0.0 for r in rows)

    def test_unstable_rows_measure_predicted_rate(self, unit_params):
        rows = run_sweep(sweep_config(unit_params, [1.6, 1.8]))
        for r in rows:
            assert r.spectral_verdict == "UNSTABLE"
            assert r.growth_rate_measured is not None
            assert r.growth_rate_measured == pytest.approx(
                r.growth_rate_predicted, rel=0.1
            )
            assert r.growth_rate_predicted == classify_spectral(
                unit_params, r.m3
            ).growth_rate

    def test_stable_rows_have_no_measured_rate(self, unit_params):
        rows = run_sweep(sweep_config(unit_params, [2.2], n_steps=5000))
        assert rows[0].growth_rate_measured is None

    def test_margin_column(self, unit_params):
        rows = run_sweep(sweep_config(unit_params, [1.6], n_steps=1000))
        assert rows[0].threshold_margin == pytest.approx(1.6**2 - 4.0)

    def test_blowup_recorded_as_inf(self, unit_params):
        cfg = sweep_config(unit_params, [3.0], n_steps=20, step=1e9)
        rows = run_sweep(cfg)
        assert rows[0].max_deviation == math.inf
        assert math.isnan(rows[0].drift_H)

    def test_deterministic(self, unit_params):
        cfg = sweep_config(unit_params, [1.8, 2.2], n_steps=3000)
        assert run_sweep(cfg) == run_sweep(cfg)


class TestSweepCsv:
    def test_header_and_layout(self, unit_params, tmp_path):
        rows = run_sweep(sweep_config(unit_params, [1.8, 2.2], n_steps=3000))
        path = tmp_path / "sweep.csv"
        write_sweep_csv(rows, path)
        lines = path.read_text().splitlines()
        assert lines[0] == (
            "m3,threshold_margin,spectral_verdict,growth_rate_predicted,"
            "growth_rate_measured,max_deviation,drift_H,drift_C1,drift_C2,drift_F"
        )
        assert lines[0] == SWEEP_CSV_HEADER
        assert len(lines) == 3
        first = lines[1].split(",")
        assert len(first) == 10
        assert float(first[0]) == 1.8
        assert first[2] == "UNSTABLE"

    def test_stable_rows_leave_measured_blank(self, unit_params, tmp_path):
        rows = run_sweep(sweep_config(unit_params, [2.2], n_steps=3000))
        path = tmp_path / "sweep.csv"
        write_sweep_csv(rows, path)
        fields = path.read_text().splitlines()[1].split(",")
        assert fields[4] == ""

    def test_inf_rendering(self, unit_params, tmp_path):
        rows = run_sweep(sweep_config(unit_params, [3.0], n_steps=20, step=1e9))
        path = tmp_path / "sweep.csv"
        write_sweep_csv(rows, path)
        fields = path.read_text().splitlines()[1].split(",")
        assert fields[5] == "inf"

    def test_float_rendering_round_trips(self):
        for x in (1.0 / 3.0, 2.0, 1e-17, -math.pi):
            assert float(format_float(x)) == x

    def test_byte_identical_on_repeat(self, unit_params, tmp_path):
        cfg = sweep_config(unit_params, [1.8, 2.0, 2.2], n_steps=3000)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_sweep_csv(run_sweep(cfg), p1)
        write_sweep_csv(run_sweep(cfg), p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestRunSingle:
    def test_returns_initial_and_trajectory(self, unit_params):
        cfg = sweep_config(unit_params, [3.0], n_steps=100)
        initial, traj = run_single(cfg, 3.0)
        assert np.array_equal(traj.states[0], initial.as_array())
        assert len(traj) == 11
