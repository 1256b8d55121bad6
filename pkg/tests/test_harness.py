import math

import numpy as np
import pytest

from risisac import harness as h
from risisac.channel import draw_channels
from risisac.sensing import SensingError


def small(**kw):
    base = dict(n_trials=4, l_gr=50, pso_n_particles=10, pso_n_iters=10)
    base.update(kw)
    return h.ScenarioConfig(**base)


def test_config_validation():
    with pytest.raises(h.ConfigError):
        h.ScenarioConfig(tau1=5, tau2=90)
    with pytest.raises(h.ConfigError):
        h.ScenarioConfig(n_trials=0)
    with pytest.raises(h.ConfigError):
        h.ScenarioConfig(tau1=0, tau2=100)
    cfg = h.ScenarioConfig()
    assert cfg.tau1 + cfg.tau2 == cfg.T - cfg.delta_tau1
    assert cfg.deployment().bs_pos.distance_to(cfg.deployment().ris_pos) == pytest.approx(50.0)


def test_presets():
    for name in h.PRESETS:
        assert h.preset(name).name == name
        assert h.preset_variants(name)
    assert [c.d_s2s for c in h.preset_variants("fig12")] == [0.5, 2.0, 5.0, 20.0]
    assert [c.ms for c in h.preset_variants("fig5")] == [(4, 4), (6, 6)]
    for c in h.preset_variants("fig6"):
        assert c.tau1 + c.tau2 == c.T
    with pytest.raises(h.ConfigError):
        h.preset("fig99")


def test_toml_config(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text('preset = "fig5"\nn_trials = 7\nrho_grid = [0.0, 1.0]\n[pso]\nn_iters = 12\n')
    cfg = h.load_config(p)
    assert cfg.name == "fig5" and cfg.ms == (4, 4)
    assert cfg.n_trials == 7 and cfg.rho_grid == (0.0, 1.0) and cfg.pso_n_iters == 12
    p.write_text("bogus_key = 1\n")
    with pytest.raises(h.ConfigError, match="unknown config key"):
        h.load_config(p)
    p.write_text("n_trials = \n")
    with pytest.raises(h.ConfigError):
        h.load_config(p)
    with pytest.raises(h.ConfigError):
        h.load_config(tmp_path / "missing.toml")


def test_overrides():
    cfg = h.apply_overrides(h.ScenarioConfig(), {"seed": 3, "rho-grid": [0.5]})
    assert cfg.seed == 3 and cfg.rho_grid == (0.5,)
    with pytest.raises(h.ConfigError):
        h.apply_overrides(cfg, {"name": "x"})


def test_draw_ue_region():
    cfg = h.ScenarioConfig(ue_region=(5.0, 10.0, -45.0, 45.0))
    rng = np.random.default_rng(0)
    ris = cfg.deployment().ris_pos
    for _ in range(200):
        ue = h.draw_ue(cfg, rng)
        assert 5.0 - 1e-9 <= ue.distance_to(ris) <= 10.0 + 1e-9
        assert abs(math.degrees(math.atan2(ue.y, ue.x))) <= 45.0 + 1e-9


def test_trial_streams_independent_of_algorithm():
    a = [g.standard_normal() for g in h.trial_streams(0, 3)]
    b = [g.standard_normal() for g in h.trial_streams(0, 3)]
    c = [g.standard_normal() for g in h.trial_streams(0, 4)]
    assert a == b and a != c and len(set(a)) == 4


def test_run_trial_oracle_closed_form():
    cfg = h.ScenarioConfig()
    res = h.run_trial(cfg, "oracle", 0.0, trial=2)
    dep = cfg.deployment()
    ch = draw_channels(dep, h.draw_ue(cfg, np.random.default_rng()), h.trial_streams(cfg.seed, 2)[0])
    snr = cfg.rho * abs(ch.alpha_com) ** 2 * cfg.n_bs * dep.ris.size**2 * cfg.n_ue / cfg.sigma0_sq
    assert res.rate_phase2 == pytest.approx(math.log2(1 + snr), rel=1e-12)
    assert res.rate_avg == pytest.approx((cfg.tau1 * res.rate_phase1 + cfg.tau2 * res.rate_phase2) / cfg.T)
    assert min(res.rmse1, res.rmse2, res.rate_phase1) >= 0


def test_run_trial_deterministic_and_validates():
    cfg = small()
    a = h.run_trial(cfg, "s_sdr", 0.5, 1)
    b = h.run_trial(cfg, "s_sdr", 0.5, 1)
    assert a == b
    with pytest.raises(ValueError):
        h.run_trial(cfg, "magic", 0.5)


def test_tradeoff_direction():
    cfg = small(n_trials=10)
    lo = h.run_monte_carlo(cfg, "s_sdr", 0.0).rows[0]
    hi = h.run_monte_carlo(cfg, "s_sdr", 1.0).rows[0]
    assert hi.rmse2_m <= lo.rmse2_m
    assert lo.rate_avg >= hi.rate_avg


def test_stage_failure_recorded(monkeypatch):
    def boom(*a, **k):
        raise SensingError("esprit", "forced")

    monkeypatch.setattr(h, "sense_location", boom)
    res = h.run_trial(small(), "oracle", 0.0)
    assert res.failed and res.diagnostics["stage"] == "phase1_sensing"
    with pytest.raises(h.SimulationFailure, match="4/4 trials failed"):
        h.run_monte_carlo(small(), "oracle", 0.0)


def _fake(rate, err):
    return h.TrialResult(err, err, rate, rate, rate)


def test_aggregate_single_and_failures():
    row = h.aggregate("s", "oracle", 0.0, [_fake(3.0, 0.2)])
    assert row.rate_avg == 3.0 and row.rmse2_m == pytest.approx(0.2) and row.stderr_rate == 0.0
    ok = [_fake(1.0, 0.1)] * 2 + [h.TrialResult.failure("x", "y")] * 2
    assert h.aggregate("s", "a", 0.0, ok).n_failed == 2
    with pytest.raises(h.SimulationFailure):
        h.aggregate("s", "a", 0.0, ok + [h.TrialResult.failure("x", "y")])
    with pytest.raises(h.SimulationFailure):
        h.aggregate("s", "a", 0.0, [])


def test_rmse_definition():
    row = h.aggregate("s", "a", 0.0, [_fake(1.0, 3.0), _fake(1.0, 4.0)])
    assert row.rmse2_m == pytest.approx(math.sqrt(12.5))


def test_n_trials_one_equals_trial():
    cfg = small(n_trials=1)
    row = h.run_monte_carlo(cfg, "s_sdr", 0.5).rows[0]
    t = h.run_trial(cfg, "s_sdr", 0.5, 0)
    assert row.rate_avg == t.rate_avg and row.rmse2_m == t.rmse2
    assert row.n_trials == 1


def test_stderr_halves_with_four_times_trials():
    rng = np.random.default_rng(0)
    ratios = []
    for _ in range(20):
        x = rng.standard_normal(800)
        ratios.append(h._stderr(list(x[:200])) / h._stderr(list(x)))
    assert np.mean(ratios) == pytest.approx(2.0, rel=0.05)


def test_stderr_scaling_on_simulation():
    cfg = small(ue_region=(5.0, 10.0, -45.0, 45.0))
    a = h.run_monte_carlo(cfg.replace(n_trials=25), "oracle", 0.0).rows[0]
    b = h.run_monte_carlo(cfg.replace(n_trials=100), "oracle", 0.0).rows[0]
    assert 1.3 < a.stderr_rate / b.stderr_rate < 3.0


def test_sweep_rows_and_oracle_single_row():
    cfg = small(n_trials=2, rho_grid=(0.0, 1.0))
    t = h.sweep_tradeoff(cfg, ("s_sdr", "s_mbs"))
    assert len(t) == 4
    assert {r.rho_tradeoff for r in t.lookup(algorithm="s_mbs")} == {0.0, 1.0}
    assert len(h.sweep_tradeoff(cfg, ("oracle",))) == 1


def test_csv_roundtrip(tmp_path):
    p = tmp_path / "e.csv"
    h.emit_csv(h.MetricsTable(), p)
    assert p.read_text() == ",".join(h.CSV_HEADER) + "\n"
    row = h.MetricsRow("sc", "s_sdr", 0.25, 1 / 3, 2 / 7, 0.1 + 0.2, 1e-17, math.pi, 0.0, 5, 1)
    h.emit_csv(h.MetricsTable([row]), p)
    lines = p.read_text().splitlines()
    assert len(lines) == 2
    back = h.read_csv(p)[0]
    for k in h.CSV_HEADER:
        v = getattr(row, k)
        assert type(v)(back[k]) == v


def test_csv_byte_identical(tmp_path):
    cfg = small(n_trials=2, rho_grid=(0.5,))
    for i in range(2):
        h.emit_csv(h.sweep_tradeoff(cfg, ("s_sdr",)), tmp_path / f"{i}.csv")
    assert (tmp_path / "0.csv").read_bytes() == (tmp_path / "1.csv").read_bytes()


def test_mobility_speed_zero():
    cfg = h.preset("fig13").replace(n_trials=3, n_blocks=4)
    res = h.run_mobility(cfg, 0.0)
    assert np.all(res.oracle_rates == res.oracle_rates[0])
    np.testing.assert_allclose(res.block_rates[1:], res.oracle_rates[1:], rtol=1e-3)
    with pytest.raises(ValueError):
        h.run_mobility(cfg, 1.0, n_blocks=1)
    with pytest.raises(ValueError):
        h.run_mobility(cfg, -1.0)


def test_mobility_speed_monotone():
    cfg = h.preset("fig13").replace(n_trials=10)
    res = [h.run_mobility(cfg, v) for v in (1.0, 5.0, 10.0, 20.0)]
    rates = [r.mean_rate for r in res]
    ratios = [float(np.mean(r.ratio)) for r in res]
    assert all(a >= b for a, b in zip(rates, rates[1:]))
    assert all(a >= b for a, b in zip(ratios, ratios[1:]))


def test_mobility_out_of_service():
    cfg = h.preset("fig13").replace(ue_pos=(1.5, 0.0, 0.0), block_duration_s=1.0)
    dep = cfg.deployment()
    assert not h._in_service(h.Vec3(0.5, 3.0, 0.0), dep)
    assert h._in_service(h.Vec3(*cfg.ue_pos), dep)
    # pick a trial whose random heading walks the UE into the wall
    trial = next(t for t in range(50) if math.cos(h.trial_streams(cfg.seed, t)[0].uniform(0, 2 * np.pi)) < -0.5)
    assert h.mobility_trial(cfg, 5.0, 3, "s_sdr", trial, dep) is None


def test_mobility_table():
    cfg = h.preset("fig13").replace(n_trials=2, n_blocks=3)
    t = h.mobility_table(cfg, speeds=(1.0, 20.0))
    assert len(t) == 2 and 0 < t.rows[0].extra["oracle_ratio"] <= 1.0 + 1e-12
