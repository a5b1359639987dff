"""Tests for run configuration, the main loop, file output, and convergence."""

import dataclasses

import numpy as np
import pytest

from polarpic.control import interpolate_control, strategy_two_pointwise
from polarpic.driver import (DIAG_FIXED_COLUMNS, PRESETS, RunConfig,
                             convergence_study, preset_config,
                             read_density_snapshot, read_diagnostics, run)
from polarpic.ensemble import sample_ring
from polarpic.errors import ConfigError, IntegrationInstabilityError
from polarpic.field import (PoissonSolver, compute_efield, deposit_density,
                            gather_field)
from polarpic.geometry import locate_coarse_cell
from polarpic.pusher import push


def tiny_config(**kw):
    base = dict(n_particles=2000, m_r=32, m_theta=16, dt=0.5, t_f=2.0,
                seed=3, snapshot_times=(), mode="uncontrolled", b_const=10.0)
    base.update(kw)
    return RunConfig(**base)


# -- configuration ---------------------------------------------------------


def test_validate_rejects_bad_fields():
    for kw in (dict(n_particles=0), dict(dt=0.0), dict(t_f=-1.0),
               dict(mode="pid"), dict(snapshot_times=(-2.0,)),
               dict(n_r=40, m_r=32), dict(gamma=0.0), dict(perturbation=2.0)):
        with pytest.raises(ConfigError):
            tiny_config(**kw).validate()


def test_validate_accepts_defaults():
    assert RunConfig().validate() is not None


def test_from_dict_rejects_unknown_keys():
    with pytest.raises(ConfigError) as err:
        RunConfig.from_dict({"n_particles": 10, "n_partcles": 10})
    assert "n_partcles" in str(err.value)


def test_from_dict_rejects_bad_values():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"n_particles": "many"})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"particle_snapshots": "yes"})


def test_json_round_trip_is_exact(tmp_path):
    cfg = tiny_config(dt=0.1 + 0.2, gamma=1e-4, comment="round trip")
    path = tmp_path / "cfg.json"
    cfg.to_json(path)
    back = RunConfig.from_json(path)
    assert dataclasses.asdict(back) == dataclasses.asdict(cfg)


def test_from_json_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.from_json(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        RunConfig.from_json(bad)
    arr = tmp_path / "arr.json"
    arr.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        RunConfig.from_json(arr)


def test_presets_published_parameters():
    cfg = preset_config("diocotron-s1")
    assert cfg.mode == "strategy_one"
    assert (cfg.alpha_r, cfg.alpha_v) == (100.0, 5.0)
    assert (cfg.beta_r, cfg.beta_v) == (10.0, 5.0)
    assert cfg.gamma == 1e-4 and cfg.control_bound == 100.0
    assert cfg.n_r == 4 and cfg.n_theta == 1
    assert preset_config("diocotron-uncontrolled").b_const == 10.0
    assert preset_config("diocotron-s2").mode == "strategy_two"
    assert preset_config("validate").t_f == 10.0
    for name in PRESETS:
        preset_config(name).validate()


def test_preset_overrides_win():
    cfg = preset_config("diocotron-s1", seed=9, n_particles=500)
    assert cfg.seed == 9 and cfg.n_particles == 500
    assert cfg.mode == "strategy_one"


def test_unknown_preset():
    with pytest.raises(ConfigError):
        preset_config("diocotron-s3")


# -- main loop -------------------------------------------------------------


def test_zero_final_time_initial_snapshot_only(tmp_path):
    cfg = tiny_config(t_f=0.0, out_dir=str(tmp_path / "o"))
    result = run(cfg)
    assert result.records == []
    assert set(result.snapshots) == {"0"}
    t0, rho0 = result.snapshots["0"]
    assert t0 == 0.0 and rho0.shape == (32, 16)
    diag = (tmp_path / "o" / "diagnostics.csv").read_text().splitlines()
    assert len(diag) == 1  # header only
    assert (tmp_path / "o" / "density_t0.csv").exists()


def test_row_count_and_uncontrolled_columns():
    result = run(tiny_config())
    assert len(result.records) == 5  # N_t + 1 states
    times = result.diagnostics_column("t")
    np.testing.assert_allclose(times, [0.0, 0.5, 1.0, 1.5, 2.0])
    for rec in result.records:
        np.testing.assert_array_equal(rec.b_cells, 10.0)


def test_seed_determinism_bitwise(tmp_path):
    cfg_a = tiny_config(out_dir=str(tmp_path / "a"))
    cfg_b = tiny_config(out_dir=str(tmp_path / "b"))
    run(cfg_a)
    run(cfg_b)
    assert ((tmp_path / "a" / "diagnostics.csv").read_bytes()
            == (tmp_path / "b" / "diagnostics.csv").read_bytes())
    result_c = run(tiny_config(seed=4))
    result_a = run(tiny_config())
    assert not np.array_equal(result_a.ensemble.r, result_c.ensemble.r)


def test_infinite_gamma_matches_uncontrolled_zero_field():
    # gamma -> inf forces B = 0, which coincides bitwise with b_const = 0
    free = run(tiny_config(b_const=0.0))
    for mode in ("strategy_one", "strategy_two"):
        ctl = run(tiny_config(mode=mode, gamma=np.inf))
        np.testing.assert_array_equal(ctl.ensemble.r, free.ensemble.r)
        np.testing.assert_array_equal(ctl.ensemble.v_theta,
                                      free.ensemble.v_theta)
        for rec in ctl.records:
            np.testing.assert_array_equal(rec.b_cells, 0.0)


def test_snapshot_time_matching():
    # 1.75 is not on the step grid; the first state within h/2 (t = 1.5) wins
    result = run(tiny_config(snapshot_times=(1.0, 1.75)))
    assert set(result.snapshots) == {"0", "1", "1.75"}
    assert result.snapshots["1"][0] == 1.0
    assert result.snapshots["1.75"][0] == 1.5


def test_strategy_two_step_matches_control_pipeline_oracle():
    # one driver step against an independent re-run of the control pipeline
    cfg = tiny_config(mode="strategy_two", t_f=0.5)
    result = run(cfg)

    grid, domain, part = cfg.grid(), cfg.domain(), cfg.partition()
    weights = cfg.weights()
    ens = sample_ring(cfg.ring(), cfg.n_particles, domain, cfg.seed)
    rho = deposit_density(ens, grid)
    phi = PoissonSolver(grid).solve(cfg.ring().mass(domain) * rho)
    e_r, e_theta = compute_efield(phi, grid)
    e_r_p, e_theta_p = gather_field(ens, e_r, e_theta, grid)
    b_parts = strategy_two_pointwise(ens, e_r_p, weights, cfg.dt, clamp=False)
    b_cells = interpolate_control(b_parts, ens, part, weights)
    np.testing.assert_array_equal(result.records[0].b_cells, b_cells)

    cell = locate_coarse_cell(ens.r, ens.theta, part)
    stepped = push(ens, e_r_p, e_theta_p, b_cells[cell], cfg.dt, domain)
    np.testing.assert_array_equal(result.ensemble.r, stepped.r)
    np.testing.assert_array_equal(result.ensemble.v_r, stepped.v_r)


def test_output_files_round_trip(tmp_path):
    out = tmp_path / "files"
    cfg = tiny_config(out_dir=str(out), snapshot_times=(1.0,),
                      particle_snapshots=True)
    result = run(cfg)

    diag = read_diagnostics(out / "diagnostics.csv")
    assert list(diag) == DIAG_FIXED_COLUMNS + ["B_1", "B_2", "B_3", "B_4"]
    np.testing.assert_array_equal(diag["t"], result.diagnostics_column("t"))
    np.testing.assert_array_equal(diag["E_b"],
                                  result.diagnostics_column("E_b"))
    np.testing.assert_array_equal(diag["mode_amp"],
                                  result.diagnostics_column("mode_amp"))

    rho, meta = read_density_snapshot(out / "density_t1.csv")
    np.testing.assert_array_equal(rho, result.snapshots["1"][1])
    assert meta == {"m_r": 32, "m_theta": 16, "r_min": 5.0, "r_max": 8.0,
                    "t": 1.0}

    assert (out / "particles_t0.csv").exists()
    assert (out / "particles_t1.csv").exists()


def test_instability_reports_step_index():
    cfg = tiny_config(dt=50.0, t_f=100.0, b_const=0.0)
    with pytest.raises(IntegrationInstabilityError) as err:
        run(cfg)
    assert err.value.step == 0
    assert "step 0" in str(err.value)


def test_run_validates_config():
    with pytest.raises(ConfigError):
        run(tiny_config(mode="bogus"))


# -- convergence study -----------------------------------------------------


@pytest.fixture(scope="module")
def small_study(tmp_path_factory):
    out = tmp_path_factory.mktemp("conv")
    cfg = RunConfig(n_particles=300, m_r=16, m_theta=16, t_f=1.0, seed=5,
                    b_const=50.0, snapshot_times=(), out_dir=str(out))
    return convergence_study(cfg, nt_values=(8, 16, 32), nt_ref=256), out


def test_convergence_rows_and_derived_fields(small_study):
    result, _ = small_study
    assert [row[0] for row in result.rows] == [8, 16, 32]
    for n_t, h, err in result.rows:
        assert h == pytest.approx(1.0 / n_t)
        assert err > 0.0
    errs = [row[2] for row in result.rows]
    for i, ratio in enumerate(result.ratios):
        assert ratio == pytest.approx(errs[i] / errs[i + 1], rel=1e-12)
    assert np.isfinite(result.slope)
    assert "fitted order" in result.table()


def test_convergence_csv_round_trip(small_study):
    result, out = small_study
    lines = (out / "convergence.csv").read_text().splitlines()
    assert lines[0] == "N_t,h,err"
    for line, (n_t, h, err) in zip(lines[1:], result.rows):
        f0, f1, f2 = line.split(",")
        assert int(f0) == n_t
        assert float(f1) == h and float(f2) == err  # repr round trip


def test_convergence_study_input_checks():
    cfg = tiny_config(t_f=0.0)
    with pytest.raises(ConfigError):
        convergence_study(cfg, nt_values=(4, 8), nt_ref=64)
    with pytest.raises(ConfigError):
        convergence_study(tiny_config(), nt_values=(8, 64), nt_ref=64)
