"""Scenario configuration, the two-phase protocol driver and Monte Carlo aggregation."""

from __future__ import annotations

import csv
import dataclasses
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from risisac.beamforming import (
    PsoConfig,
    build_qcqp,
    closed_form_bs_ris,
    mrt_mrc,
    oracle_baseline,
    solve_mbs_pso,
    solve_sdr,
)
from risisac.channel import Deployment, PathlossModel, draw_channels
from risisac.geometry import UlaGeometry, UraGeometry, Vec3
from risisac.sensing import MicroSurfaceConfig, SensingError, sense_location
from risisac.signal import (
    BeamformerSet,
    dbm_to_watt,
    estimate_ecsi,
    rate,
    snr_com,
    snr_sen,
    synthesize_sensing_snapshots,
)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

ALGORITHMS = ("s_sdr", "s_mbs", "oracle")
CSV_HEADER = (
    "scenario",
    "algorithm",
    "rho_tradeoff",
    "rate_avg",
    "rate_phase2",
    "rmse1_m",
    "rmse2_m",
    "stderr_rate",
    "stderr_rmse2",
    "n_trials",
    "n_failed",
)
MAX_FAIL_FRACTION = 0.5


class ConfigError(ValueError):
    pass


class SimulationFailure(RuntimeError):
    pass


def default_bs_pos(ris_pos=(0.0, 0.0, 3.0), d_b2r: float = 50.0, height: float = 20.0, azimuth_deg: float = 30.0):
    """BS position at distance ``d_b2r`` from the reflecting sub-surface and the given height."""
    dz = height - ris_pos[2]
    r = math.sqrt(d_b2r**2 - dz**2)
    az = math.radians(azimuth_deg)
    return (ris_pos[0] + r * math.cos(az), ris_pos[1] + r * math.sin(az), height)


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to run one scenario.

    Powers are in dBm here and converted to watts when a trial runs. When
    ``ue_region`` is set, each trial draws a UE on the floor with 3D distance
    to the reflecting sub-surface in ``[d_min, d_max]`` and azimuth in
    ``[az_min, az_max]`` degrees; otherwise ``ue_pos`` is used.
    """

    name: str = "default"
    bs_pos: tuple = default_bs_pos()
    ris_pos: tuple = (0.0, 0.0, 3.0)
    d_s2s: float = 5.0
    ue_pos: tuple = (3.46, -2.0, 0.0)
    ue_region: tuple | None = None
    n_bs: int = 16
    n_ue: int = 8
    m1: tuple = (20, 20)
    ms: tuple = (6, 6)
    tau1: int = 5
    tau2: int = 95
    delta_tau1: int = 0
    T: int = 100
    rho_dbm: float = 20.0
    sigma0_dbm: float = -80.0
    pl0_db: float = 30.0
    exp_r2b: float = 2.3
    exp_u2r: float = 2.2
    exp_r2r: float = 2.1
    rho_grid: tuple = (0.0, 0.25, 0.5, 0.75, 1.0)
    epsilon: float | None = None
    ecsi_method: str = "perfect"
    l_gr: int = 500
    pso_n_particles: int = 50
    pso_n_iters: int = 100
    pso_c1: float = 0.72
    pso_c2: float = 1.49
    pso_c3: float = 1.49
    pso_v_min: float = -0.2
    pso_v_max: float = 0.2
    pso_hinge_penalty: bool = False
    n_trials: int = 200
    seed: int = 0
    block_duration_s: float = 0.01
    n_blocks: int = 10
    speeds: tuple = (1.0, 5.0, 10.0, 20.0)

    def __post_init__(self):
        for k in ("n_bs", "n_ue", "n_trials", "T", "l_gr"):
            if getattr(self, k) < 1:
                raise ConfigError(f"{k} must be positive")
        if min(self.tau1, self.tau2, self.delta_tau1) < 0:
            raise ConfigError("slot counts must be nonnegative")
        if self.tau1 < 1:
            raise ConfigError("tau1 must be >= 1 (phase-1 sensing needs data slots)")
        if self.tau1 + self.tau2 != self.T - self.delta_tau1:
            raise ConfigError(f"tau1 + tau2 = {self.tau1 + self.tau2} must equal T - delta_tau1 = {self.T - self.delta_tau1}")
        if self.ecsi_method not in ("perfect", "ls_pilot"):
            raise ConfigError(f"unknown ecsi_method {self.ecsi_method!r}")
        if self.ecsi_method == "ls_pilot" and self.delta_tau1 < self.n_ue:
            raise ConfigError("ls_pilot needs delta_tau1 >= n_ue")
        if self.d_s2s <= 0:
            raise ConfigError("d_s2s must be positive")
        if not self.rho_grid or any(not 0.0 <= r <= 1.0 for r in self.rho_grid):
            raise ConfigError("rho_grid must be a nonempty list of values in [0, 1]")
        if len(self.m1) != 2 or len(self.ms) != 2 or min(*self.m1, *self.ms) < 1:
            raise ConfigError("m1 and ms must be two positive counts")
        if self.ue_region is not None:
            d0, d1, a0, a1 = self.ue_region
            if not (0 < d0 <= d1 and a0 <= a1):
                raise ConfigError("ue_region must be (d_min, d_max, az_min_deg, az_max_deg)")
        try:
            self.pathloss
        except ValueError as e:
            raise ConfigError(str(e)) from e

    @property
    def pathloss(self) -> PathlossModel:
        return PathlossModel(self.pl0_db, self.exp_r2b, self.exp_u2r, self.exp_r2r)

    @property
    def rho(self) -> float:
        return dbm_to_watt(self.rho_dbm)

    @property
    def sigma0_sq(self) -> float:
        return dbm_to_watt(self.sigma0_dbm)

    @property
    def pso(self) -> PsoConfig:
        return PsoConfig(
            self.pso_n_particles,
            self.pso_n_iters,
            self.pso_c1,
            self.pso_c2,
            self.pso_c3,
            self.pso_v_min,
            self.pso_v_max,
            hinge_penalty=self.pso_hinge_penalty,
        )

    def deployment(self) -> Deployment:
        ris = Vec3(*self.ris_pos)
        half = 0.5 * self.d_s2s
        sensing = (Vec3(ris.x, ris.y + half, ris.z), Vec3(ris.x, ris.y - half, ris.z))
        return Deployment(
            bs_pos=Vec3(*self.bs_pos),
            ris_pos=ris,
            sensing_pos=sensing,
            bs=UlaGeometry(self.n_bs),
            ue=UlaGeometry(self.n_ue),
            ris=UraGeometry(*self.m1),
            sensing=UraGeometry(*self.ms),
            pathloss=self.pathloss,
        )

    def replace(self, **kw) -> ScenarioConfig:
        return dataclasses.replace(self, **kw)


def _with_tau(cfg: ScenarioConfig, tau1: int, T: int) -> dict:
    return dict(tau1=tau1, T=T, tau2=T - cfg.delta_tau1 - tau1)


_BASE = ScenarioConfig()
# each preset: base overrides plus named variants swept by ``sweep``
PRESETS = {
    "default": ({}, [("default", {})]),
    "fig5": ({"ms": (4, 4)}, [("ms4x4", {"ms": (4, 4)}), ("ms6x6", {"ms": (6, 6)})]),
    "fig6": (
        {"rho_dbm": 10.0, "ue_pos": (8.775, -3.5, 0.0), "rho_grid": (0.0,)},
        [(f"tau1_{t}", _with_tau(_BASE, t, 100)) for t in (1, 5, 10, 20, 40)],
    ),
    "fig9": ({"ue_pos": (3.46, -2.0, 0.0), "rho_grid": (0.0, 1.0)}, [("fig9", {})]),
    "fig12": (
        {"rho_dbm": 0.0, "tau1": 20, "tau2": 20, "T": 40, "ue_region": (5.0, 10.0, -45.0, 45.0)},
        [(f"dS2S_{d:g}m", {"d_s2s": d}) for d in (0.5, 2.0, 5.0, 20.0)],
    ),
    "fig13": ({"rho_grid": (0.0,)}, [("fig13", {})]),
}


def preset(name: str) -> ScenarioConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    base, _ = PRESETS[name]
    return ScenarioConfig(name=name, **base)


def preset_variants(name: str) -> list[ScenarioConfig]:
    cfg = preset(name)
    _, variants = PRESETS[name]
    return [cfg.replace(name=label, **kw) for label, kw in variants]


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "_"))
        else:
            out[key] = v
    return out


_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}


def apply_overrides(cfg: ScenarioConfig, values: dict) -> ScenarioConfig:
    """Apply flat ``{field: value}`` overrides; list values become tuples."""
    kw = {}
    for k, v in values.items():
        k = k.replace(".", "_").replace("-", "_")
        if k not in _FIELDS or k == "name":
            raise ConfigError(f"unknown config key {k!r}")
        kw[k] = tuple(v) if isinstance(v, list) else v
    try:
        return cfg.replace(**kw)
    except TypeError as e:
        raise ConfigError(str(e)) from e


def load_config(path, base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Read a TOML config. Nested tables and dotted keys are flattened with ``_``.

    A top-level ``preset`` key selects the starting scenario.
    """
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"invalid TOML in {path}: {e}") from e
    flat = _flatten(raw)
    name = flat.pop("preset", None)
    cfg = preset(name) if name else (base or ScenarioConfig())
    return apply_overrides(cfg, flat)


@dataclass
class TrialResult:
    rmse1: float
    rmse2: float
    rate_phase1: float
    rate_phase2: float
    rate_avg: float
    snr_sen: tuple = (0.0, 0.0)
    failed: bool = False
    diagnostics: dict = field(default_factory=dict)

    @classmethod
    def failure(cls, stage: str, message: str) -> TrialResult:
        nan = float("nan")
        return cls(nan, nan, nan, nan, nan, failed=True, diagnostics={"stage": stage, "error": message})


def trial_streams(seed: int, trial: int, n: int = 4) -> list[np.random.Generator]:
    """Independent generators for (scene, phase 1, optimizer, phase 2) of one trial.

    The same ``(seed, trial)`` gives the same scene and noise for every
    algorithm and trade-off value.
    """
    ss = np.random.SeedSequence(seed, spawn_key=(trial,))
    return [np.random.default_rng(s) for s in ss.spawn(n)]


def draw_ue(cfg: ScenarioConfig, rng: np.random.Generator) -> Vec3:
    if cfg.ue_region is None:
        return Vec3(*cfg.ue_pos)
    d0, d1, a0, a1 = cfg.ue_region
    ris = Vec3(*cfg.ris_pos)
    d = rng.uniform(d0, d1)
    az = math.radians(rng.uniform(a0, a1))
    r = math.sqrt(max(d * d - ris.z**2, 0.0))
    return Vec3(ris.x + r * math.cos(az), ris.y + r * math.sin(az), 0.0)


def phase2_beamformers(cfg, dep, algorithm, rho_tradeoff, sensed, true_pos, rng) -> tuple[BeamformerSet, dict]:
    """Phase-2 beamformers for ``algorithm`` given the phase-1 location estimate."""
    if algorithm == "oracle":
        return oracle_baseline(true_pos, dep), {}
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    w_bs, xi = closed_form_bs_ris(sensed, dep)
    q, _ = build_qcqp(sensed, dep, rho_tradeoff, cfg.epsilon, cfg.rho, cfg.sigma0_sq)
    if algorithm == "s_sdr":
        w_ue, d = solve_sdr(q, cfg.l_gr, rng)
        info = {"sdp_objective": d.sdp_objective, "chosen_objective": d.chosen_objective}
    else:
        w_ue, tr = solve_mbs_pso(q, cfg.pso, rng)
        info = {"best_fitness": float(tr[-1])}
    return BeamformerSet(w_bs=w_bs, xi=xi, w_ue=w_ue), info


def run_trial(cfg: ScenarioConfig, algorithm: str, rho_tradeoff: float, trial: int = 0, dep: Deployment | None = None) -> TrialResult:
    """One coherence block of the two-phase protocol.

    Stage failures are caught and returned as a failed result.
    """
    dep = dep or cfg.deployment()
    streams = trial_streams(cfg.seed, trial)
    ue = draw_ue(cfg, streams[0])
    return two_phase_block(cfg, dep, ue, algorithm, rho_tradeoff, streams)[0]


def two_phase_block(cfg, dep, ue, algorithm, rho_tradeoff, streams):
    """Run both phases for a UE at ``ue``; returns ``(TrialResult, channels or None)``."""
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    g_scene, g_ph1, g_opt, g_ph2 = streams
    rho, s2 = cfg.rho, cfg.sigma0_sq
    micro = MicroSurfaceConfig.for_array(dep.sensing)
    stage = "channels"
    try:
        ch = draw_channels(dep, ue, g_scene)
        xi1 = np.exp(1j * g_scene.uniform(0.0, 2.0 * np.pi, ch.m1))
        stage = "ecsi"
        ecsi = estimate_ecsi(ch, xi1, rho, s2, cfg.delta_tau1, g_ph1, cfg.ecsi_method)
        w_ue1, w_bs1 = mrt_mrc(ecsi)
        bf1 = BeamformerSet(w_bs=w_bs1, xi=xi1, w_ue=w_ue1)
        r1 = rate(snr_com(ch, bf1, rho, s2))
        stage = "phase1_sensing"
        b1 = synthesize_sensing_snapshots(ch, bf1, rho, s2, cfg.tau1, g_ph1, phase_index=1)
        est1 = sense_location(b1, micro, dep, phase_index=1)
        stage = "beamforming"
        bf2, info = phase2_beamformers(cfg, dep, algorithm, rho_tradeoff, est1, ue, g_opt)
        r2 = rate(snr_com(ch, bf2, rho, s2))
        stage = "phase2_sensing"
        est2 = est1
        if cfg.tau2 > 0:
            b2 = synthesize_sensing_snapshots(ch, bf2, rho, s2, cfg.tau2, g_ph2, phase_index=2)
            pooled = tuple(a.concat(b) for a, b in zip(b1, b2))
            est2 = sense_location(pooled, micro, dep, phase_index=2)
    except (SensingError, ValueError, np.linalg.LinAlgError) as e:
        return TrialResult.failure(stage, str(e)), None
    _, per = snr_sen(ch, bf2, rho, s2)
    e1 = est1.position.distance_to(ue)
    e2 = est2.position.distance_to(ue)
    avg = (cfg.tau1 * r1 + cfg.tau2 * r2) / cfg.T
    info.update(ue=ue.as_array().tolist(), est1=est1.position.as_array().tolist(), est2=est2.position.as_array().tolist())
    res = TrialResult(rmse1=e1, rmse2=e2, rate_phase1=r1, rate_phase2=r2, rate_avg=avg, snr_sen=per, diagnostics=info)
    return res, ch


@dataclass
class MetricsRow:
    scenario: str
    algorithm: str
    rho_tradeoff: float
    rate_avg: float
    rate_phase2: float
    rmse1_m: float
    rmse2_m: float
    stderr_rate: float
    stderr_rmse2: float
    n_trials: int
    n_failed: int
    extra: dict = field(default_factory=dict, compare=False)

    def values(self) -> tuple:
        return tuple(getattr(self, k) for k in CSV_HEADER)


@dataclass
class MetricsTable:
    rows: list = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def extend(self, other: MetricsTable) -> None:
        self.rows.extend(other.rows)

    def lookup(self, scenario=None, algorithm=None, rho_tradeoff=None) -> list:
        return [
            r
            for r in self.rows
            if (scenario is None or r.scenario == scenario)
            and (algorithm is None or r.algorithm == algorithm)
            and (rho_tradeoff is None or r.rho_tradeoff == rho_tradeoff)
        ]


def _mean(xs) -> float:
    return math.fsum(xs) / len(xs)


def _stderr(xs) -> float:
    n = len(xs)
    if n < 2:
        return 0.0
    m = _mean(xs)
    var = math.fsum((x - m) ** 2 for x in xs) / (n - 1)
    return math.sqrt(var / n)


def aggregate(scenario: str, algorithm: str, rho_tradeoff: float, results: list) -> MetricsRow:
    """Mean rates and RMSEs over successful trials.

    RMSE is ``sqrt(mean(err^2))``; its standard error uses the delta method.

    Raises:
        SimulationFailure: if more than half of the trials failed.
    """
    ok = [r for r in results if not r.failed]
    n_failed = len(results) - len(ok)
    if not results or n_failed > MAX_FAIL_FRACTION * len(results):
        stages = sorted({r.diagnostics.get("stage", "?") for r in results if r.failed})
        raise SimulationFailure(f"{n_failed}/{len(results)} trials failed in {scenario}/{algorithm}/rho={rho_tradeoff} (stages: {stages})")
    sq1 = [r.rmse1**2 for r in ok]
    sq2 = [r.rmse2**2 for r in ok]
    rmse2 = math.sqrt(_mean(sq2))
    se_rmse2 = _stderr(sq2) / (2.0 * rmse2) if rmse2 > 0 else 0.0
    return MetricsRow(
        scenario=scenario,
        algorithm=algorithm,
        rho_tradeoff=float(rho_tradeoff),
        rate_avg=_mean([r.rate_avg for r in ok]),
        rate_phase2=_mean([r.rate_phase2 for r in ok]),
        rmse1_m=math.sqrt(_mean(sq1)),
        rmse2_m=rmse2,
        stderr_rate=_stderr([r.rate_avg for r in ok]),
        stderr_rmse2=se_rmse2,
        n_trials=len(results),
        n_failed=n_failed,
    )


def run_monte_carlo(cfg: ScenarioConfig, algorithm: str, rho_tradeoff: float | None = None) -> MetricsTable:
    """Aggregate ``cfg.n_trials`` seeded trials for one algorithm and trade-off value."""
    if rho_tradeoff is None:
        rho_tradeoff = cfg.rho_grid[0]
    dep = cfg.deployment()
    results = [run_trial(cfg, algorithm, rho_tradeoff, t, dep) for t in range(cfg.n_trials)]
    return MetricsTable([aggregate(cfg.name, algorithm, rho_tradeoff, results)])


def sweep_tradeoff(cfg: ScenarioConfig, algorithms=("s_sdr",)) -> MetricsTable:
    """One Monte Carlo batch per trade-off value and algorithm.

    The oracle ignores the trade-off factor, so it gets a single row.
    """
    table = MetricsTable()
    for alg in algorithms:
        grid = cfg.rho_grid[:1] if alg == "oracle" else cfg.rho_grid
        for r in grid:
            table.extend(run_monte_carlo(cfg, alg, r))
    return table


@dataclass
class MobilityResult:
    speed: float
    block_rates: np.ndarray
    oracle_rates: np.ndarray
    n_trials: int
    n_failed: int

    @property
    def mean_rate(self) -> float:
        return _mean(list(self.block_rates))

    @property
    def ratio(self) -> np.ndarray:
        return self.block_rates / self.oracle_rates


def _in_service(ue: Vec3, dep: Deployment) -> bool:
    targets = (dep.ris_pos,) + tuple(dep.sensing_pos)
    return ue.x > 1.0 and all(ue.distance_to(t) >= 1.0 for t in targets)


def mobility_trial(cfg: ScenarioConfig, speed: float, n_blocks: int, algorithm: str, trial: int, dep: Deployment):
    """Long-term protocol for one UE track; per-block (rates, oracle rates), or ``None`` on failure."""
    streams = trial_streams(cfg.seed, trial)
    g_scene, _, g_opt, g_ph2 = streams
    rho, s2, rt = cfg.rho, cfg.sigma0_sq, cfg.rho_grid[0]
    micro = MicroSurfaceConfig.for_array(dep.sensing)
    ue = draw_ue(cfg, g_scene)
    heading = g_scene.uniform(0.0, 2.0 * np.pi)
    step = Vec3(math.cos(heading), math.sin(heading), 0.0).scaled(speed * cfg.block_duration_s)
    first, ch = two_phase_block(cfg, dep, ue, algorithm, rt, streams)
    if first.failed:
        return None
    rates = [first.rate_avg]
    orates = [rate(snr_com(ch, oracle_baseline(ue, dep), rho, s2))]
    est = Vec3(*first.diagnostics["est2"])
    for _ in range(1, n_blocks):
        ue = ue + step
        if not _in_service(ue, dep):
            return None
        try:
            ch = draw_channels(dep, ue, g_scene)
            bf, _ = phase2_beamformers(cfg, dep, algorithm, rt, est, ue, g_opt)
            rates.append(rate(snr_com(ch, bf, rho, s2)))
            orates.append(rate(snr_com(ch, oracle_baseline(ue, dep), rho, s2)))
            snaps = synthesize_sensing_snapshots(ch, bf, rho, s2, cfg.T, g_ph2, phase_index=2)
            est = sense_location(snaps, micro, dep, phase_index=2).position
        except (SensingError, ValueError, np.linalg.LinAlgError):
            return None
    return np.array(rates), np.array(orates)


def run_mobility(cfg: ScenarioConfig, speed: float, n_blocks: int | None = None, algorithm: str = "s_sdr") -> MobilityResult:
    """Long-term multi-block protocol with a UE moving at ``speed`` m/s.

    Block 1 runs both phases. Later blocks skip phase 1, beamform from the
    previous block's fine estimate and sense over the whole block. The UE
    moves ``speed * block_duration_s`` meters between blocks along a random
    horizontal heading.
    """
    n_blocks = cfg.n_blocks if n_blocks is None else n_blocks
    if n_blocks < 2:
        raise ValueError("n_blocks must be >= 2")
    if speed < 0:
        raise ValueError("speed must be nonnegative")
    dep = cfg.deployment()
    runs = [mobility_trial(cfg, speed, n_blocks, algorithm, t, dep) for t in range(cfg.n_trials)]
    ok = [r for r in runs if r is not None]
    n_failed = len(runs) - len(ok)
    if not ok or n_failed > MAX_FAIL_FRACTION * len(runs):
        raise SimulationFailure(f"{n_failed}/{len(runs)} mobility trials failed at {speed} m/s")
    rates = np.array([math.fsum(col) / len(ok) for col in zip(*(r[0] for r in ok))])
    orates = np.array([math.fsum(col) / len(ok) for col in zip(*(r[1] for r in ok))])
    return MobilityResult(speed=float(speed), block_rates=rates, oracle_rates=orates, n_trials=len(runs), n_failed=n_failed)


def mobility_table(cfg: ScenarioConfig, speeds=None, algorithm: str = "s_sdr") -> MetricsTable:
    """One row per speed; ``rate_avg`` is the mean over blocks, ratio to the oracle in ``extra``."""
    table = MetricsTable()
    nan = float("nan")
    for v in speeds if speeds is not None else cfg.speeds:
        res = run_mobility(cfg, v, algorithm=algorithm)
        table.rows.append(
            MetricsRow(
                scenario=f"{cfg.name}:speed={v:g}",
                algorithm=f"{algorithm}_longterm",
                rho_tradeoff=float(cfg.rho_grid[0]),
                rate_avg=res.mean_rate,
                rate_phase2=res.mean_rate,
                rmse1_m=nan,
                rmse2_m=nan,
                stderr_rate=nan,
                stderr_rmse2=nan,
                n_trials=res.n_trials,
                n_failed=res.n_failed,
                extra={"oracle_ratio": float(np.mean(res.ratio))},
            )
        )
    return table


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_csv(table: MetricsTable, path) -> None:
    """Write the metrics table; floats use the shortest round-trip representation."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in table:
            w.writerow([_fmt(v) for v in row.values()])


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def sweep_preset(name: str, algorithms=("s_sdr",), n_trials: int | None = None, seed: int | None = None) -> MetricsTable:
    """Run every variant of a preset (mobility presets run the speed grid)."""
    table = MetricsTable()
    for cfg in preset_variants(name):
        if n_trials is not None:
            cfg = cfg.replace(n_trials=n_trials)
        if seed is not None:
            cfg = cfg.replace(seed=seed)
        if name == "fig13":
            for alg in algorithms:
                table.extend(mobility_table(cfg, algorithm=alg))
        else:
            table.extend(sweep_tradeoff(cfg, algorithms))
    return table
