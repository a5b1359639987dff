"""Run orchestration: configuration, main loop, convergence study, file output.

The per-step pipeline is fixed: deposit -> potential solve -> field -> gather
-> control evaluation -> push. Diagnostics rows are written for every state
t^n, n = 0..N_t; the control columns of row n hold the values applied in the
push from n to n+1 (the final row logs the feedback evaluated at t_f, which
is never applied). All arithmetic is plain numpy on one stream seeded from
the config, so a run is bit-reproducible regardless of thread count.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .control import (ControlWeights, cell_statistics, interpolate_control,
                      strategy_one, strategy_two_pointwise)
from .diagnostics import (CostTerms, boundary_thermal_energy, cost_terms,
                          mode_amplitude, state_error)
from .ensemble import ParticleEnsemble, RingDistribution, sample_ring
from .errors import ConfigError, IntegrationInstabilityError
from .field import PoissonSolver, compute_efield, deposit_density, gather_field
from .geometry import AnnulusDomain, ControlPartition, GridSpec
from .pusher import push

MODES = ("uncontrolled", "strategy_one", "strategy_two")

DIAG_FIXED_COLUMNS = ["t", "E_b", "rho_b", "U_b_r", "U_b_theta",
                      "J_pos", "J_posvar", "J_vel", "J_velvar", "J_ctrl",
                      "mode_amp"]


@dataclass
class RunConfig:
    """Flat description of one simulation run; serializes to flat JSON."""

    n_particles: int = 200_000
    m_r: int = 64
    m_theta: int = 64
    n_r: int = 4
    n_theta: int = 1
    dt: float = 0.5
    t_f: float = 250.0
    seed: int = 1
    mode: str = "uncontrolled"
    b_const: float = 10.0
    r_min: float = 5.0
    r_max: float = 8.0
    ring_center: float = 6.5
    ring_falloff: float = 4.0
    perturbation: float = 0.3
    mode_number: int = 3
    alpha_r: float = 100.0
    alpha_v: float = 5.0
    beta_r: float = 10.0
    beta_v: float = 5.0
    gamma: float = 1e-4
    control_bound: float = 100.0
    r_target: float = 6.5
    v_r_target: float = 0.0
    snapshot_times: tuple = (50.0, 125.0, 250.0)
    particle_snapshots: bool = False
    out_dir: str | None = None
    comment: str = ""

    # -- derived builders -------------------------------------------------

    def domain(self) -> AnnulusDomain:
        return AnnulusDomain(self.r_min, self.r_max)

    def grid(self) -> GridSpec:
        return GridSpec(self.domain(), self.m_r, self.m_theta)

    def partition(self) -> ControlPartition:
        return ControlPartition(self.domain(), self.n_r, self.n_theta)

    def weights(self) -> ControlWeights:
        return ControlWeights(self.alpha_r, self.alpha_v, self.beta_r,
                              self.beta_v, self.gamma, self.control_bound,
                              self.r_target, self.v_r_target)

    def ring(self) -> RingDistribution:
        return RingDistribution(self.ring_center, self.ring_falloff,
                                self.perturbation, self.mode_number)

    def n_steps(self) -> int:
        return int(round(self.t_f / self.dt))

    def validate(self) -> "RunConfig":
        """Raise ConfigError on any inconsistent field; returns self."""
        try:
            if self.n_particles <= 0:
                raise ValueError("n_particles must be positive")
            if self.dt <= 0.0:
                raise ValueError("dt must be positive")
            if self.t_f < 0.0:
                raise ValueError("t_f must be nonnegative")
            if self.mode not in MODES:
                raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
            if any(t < 0.0 for t in self.snapshot_times):
                raise ValueError("snapshot times must be nonnegative")
            grid = self.grid()
            self.partition().validate_against(grid)
            self.weights()
            self.ring()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    # -- (de)serialization ------------------------------------------------

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["snapshot_times"] = list(self.snapshot_times)
        return d

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name: f for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        kwargs = {}
        for name, value in data.items():
            spec = known[name]
            try:
                if name == "snapshot_times":
                    kwargs[name] = tuple(float(t) for t in value)
                elif spec.type == "int":
                    kwargs[name] = int(value)
                elif spec.type == "float":
                    kwargs[name] = float(value)
                elif spec.type == "bool":
                    if not isinstance(value, bool):
                        raise ValueError("expected true/false")
                    kwargs[name] = value
                else:
                    kwargs[name] = value
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {name!r}: {value!r} ({exc})") from None
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        try:
            data = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)


PRESETS = {
    "diocotron-uncontrolled": dict(
        mode="uncontrolled", b_const=10.0,
        comment="perturbed ring in a constant axial field B=10; the k=3 "
                "instability develops freely"),
    "diocotron-s1": dict(
        mode="strategy_one", b_const=10.0,
        alpha_r=100.0, alpha_v=5.0, beta_r=10.0, beta_v=5.0,
        gamma=1e-4, control_bound=100.0,
        comment="cell-level feedback on four radial bands, tracking r=6.5 "
                "with zero mean radial velocity"),
    "diocotron-s2": dict(
        mode="strategy_two", b_const=10.0,
        alpha_r=100.0, alpha_v=5.0, beta_r=10.0, beta_v=5.0,
        gamma=1e-4, control_bound=100.0,
        comment="per-particle feedback averaged onto four radial bands, "
                "same weights and targets as the cell-level law"),
    "validate": dict(
        mode="uncontrolled", b_const=200.0, n_particles=10_000, t_f=10.0,
        seed=2, snapshot_times=(),
        comment="reduced-size setup for the time-step convergence study; the "
                "strong field keeps every run in the damped drift regime the "
                "short horizon can resolve"),
}


def preset_config(name: str, **overrides) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; have {', '.join(sorted(PRESETS))}")
    merged = dict(PRESETS[name])
    merged.update(overrides)
    return RunConfig(**merged)


@dataclass
class DiagnosticsRecord:
    """One CSV row: state observables at t plus the controls for the next push."""

    t: float
    e_b: float
    rho_b: float
    u_b: tuple
    cost: CostTerms
    mode_amp: float
    b_cells: np.ndarray

    def row(self) -> list:
        vals = [self.t, self.e_b, self.rho_b, self.u_b[0], self.u_b[1],
                self.cost.j_pos, self.cost.j_posvar, self.cost.j_vel,
                self.cost.j_velvar, self.cost.j_ctrl, self.mode_amp]
        return vals + list(self.b_cells)


@dataclass
class RunResult:
    config: RunConfig
    records: list
    ensemble: ParticleEnsemble
    snapshots: dict = field(default_factory=dict)   # tag -> (t, rho)

    def diagnostics_column(self, name: str) -> np.ndarray:
        idx = DIAG_FIXED_COLUMNS.index(name)
        return np.array([rec.row()[idx] for rec in self.records])


class _Stepper:
    """Shared per-step machinery for run() and the convergence study."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.domain = config.domain()
        self.grid = config.grid()
        self.partition = config.partition()
        self.weights = config.weights()
        self.solver = PoissonSolver(self.grid)
        # each particle carries 1/N of the initial distribution's physical
        # charge, so the mass-1 deposit is rescaled before the field solve
        self.charge = config.ring().mass(self.domain)

    def field_state(self, ens: ParticleEnsemble):
        rho = deposit_density(ens, self.grid)
        phi = self.solver.solve(self.charge * rho)
        e_r, e_theta = compute_efield(phi, self.grid)
        e_r_p, e_theta_p = gather_field(ens, e_r, e_theta, self.grid)
        return rho, e_r_p, e_theta_p

    def controls(self, ens: ParticleEnsemble, e_r_p, h: float):
        """Per-cell and per-particle control values for the coming push."""
        mode = self.config.mode
        if mode == "uncontrolled":
            b_cells = np.full(self.partition.n_cells, self.config.b_const)
            return b_cells, np.full(ens.n, self.config.b_const)
        stats = cell_statistics(ens, e_r_p, self.partition)
        if mode == "strategy_one":
            b_cells = strategy_one(ens, e_r_p, self.weights, self.partition, h,
                                   stats=stats)
        else:
            b_parts = strategy_two_pointwise(ens, e_r_p, self.weights, h,
                                             clamp=False)
            b_cells = interpolate_control(b_parts, ens, self.partition,
                                          self.weights, cell=stats.particle_cell)
        return b_cells, b_cells[stats.particle_cell]

    def observe(self, ens, rho, b_cells, t) -> DiagnosticsRecord:
        e_b, u_b, rho_b = boundary_thermal_energy(ens, self.grid)
        cost = cost_terms(ens, self.weights, self.config.dt, b_cells,
                          partition=self.partition)
        amp = mode_amplitude(rho, self.grid, self.config.mode_number)
        return DiagnosticsRecord(t, e_b, rho_b, u_b, cost, amp, b_cells)


def run(config: RunConfig) -> RunResult:
    """Execute one simulation described by config.

    Files (diagnostics CSV, density snapshots, optional particle snapshots)
    are written only when config.out_dir is set; the returned RunResult holds
    the same data in memory either way.

    Raises:
        ConfigError: inconsistent configuration.
        IntegrationInstabilityError: blow-up, with .step set to the step index.
    """
    config.validate()
    stepper = _Stepper(config)
    n_steps = config.n_steps()
    h = config.dt

    out = Path(config.out_dir) if config.out_dir else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    ens = sample_ring(config.ring(), config.n_particles, stepper.domain,
                      config.seed)

    # snapshot bookkeeping: t=0 always, then each requested time once
    wanted = sorted(set(float(t) for t in config.snapshot_times) | {0.0})
    result = RunResult(config, [], ens)

    def maybe_snapshot(t_now, rho, current):
        for t_req in list(wanted):
            if abs(t_now - t_req) <= h / 2 * (1 + 1e-12) or t_req == t_now == 0.0:
                tag = f"{t_req:g}"
                result.snapshots[tag] = (t_now, rho.copy())
                if out is not None:
                    write_density_snapshot(out / f"density_t{tag}.csv", rho,
                                           stepper.grid, t_now)
                    if config.particle_snapshots:
                        current.to_csv(out / f"particles_t{tag}.csv")
                wanted.remove(t_req)

    for n in range(n_steps + 1):
        t_now = n * h
        rho, e_r_p, e_theta_p = stepper.field_state(ens)
        b_cells, b_parts = stepper.controls(ens, e_r_p, h)
        if n_steps > 0:
            result.records.append(stepper.observe(ens, rho, b_cells, t_now))
        maybe_snapshot(t_now, rho, ens)
        if n == n_steps:
            break
        try:
            ens = push(ens, e_r_p, e_theta_p, b_parts, h, stepper.domain)
        except IntegrationInstabilityError as exc:
            raise IntegrationInstabilityError(f"step {n}: {exc}", step=n) from None

    result.ensemble = ens
    if out is not None:
        write_diagnostics_csv(out / "diagnostics.csv", result.records,
                              stepper.partition.n_cells)
    return result


# -- convergence study ----------------------------------------------------


@dataclass
class ConvergenceResult:
    rows: list            # (n_steps, h, err) per coarse run
    slope: float          # fitted log2(err) vs log2(h) slope
    ratios: list          # err ratios between successive coarsenings

    def table(self) -> str:
        lines = [f"{'N_t':>8} {'h':>12} {'err':>14}"]
        for n_t, h, err in self.rows:
            lines.append(f"{n_t:>8d} {h:>12.6g} {err:>14.6e}")
        lines.append(f"fitted order: {self.slope:.3f}")
        return "\n".join(lines)


def _propagate(stepper: _Stepper, ens: ParticleEnsemble, n_steps: int,
               h: float) -> ParticleEnsemble:
    for n in range(n_steps):
        _, e_r_p, e_theta_p = stepper.field_state(ens)
        _, b_parts = stepper.controls(ens, e_r_p, h)
        try:
            ens = push(ens, e_r_p, e_theta_p, b_parts, h, stepper.domain)
        except IntegrationInstabilityError as exc:
            raise IntegrationInstabilityError(f"step {n}: {exc}", step=n) from None
    return ens


def convergence_study(config: RunConfig, nt_values=(64, 128, 256, 512),
                      nt_ref: int = 4096) -> ConvergenceResult:
    """Self-convergence of the time stepping against a fine-step reference.

    Every run starts from the identical sampled ensemble and integrates to
    config.t_f with h = t_f / N_t; errors are max-norm state discrepancies
    against the N_t = nt_ref solution.
    """
    config.validate()
    if config.t_f <= 0.0:
        raise ConfigError("convergence study needs t_f > 0")
    nt_values = sorted(int(n) for n in nt_values)
    if any(n <= 0 for n in nt_values) or nt_ref <= max(nt_values):
        raise ConfigError("need 0 < N_t values < reference N_t")

    stepper = _Stepper(config)
    ens0 = sample_ring(config.ring(), config.n_particles, stepper.domain,
                       config.seed)
    ref = _propagate(stepper, ens0.copy(), nt_ref, config.t_f / nt_ref)

    rows = []
    for n_t in nt_values:
        h = config.t_f / n_t
        final = _propagate(stepper, ens0.copy(), n_t, h)
        rows.append((n_t, h, state_error(ref, final)))

    hs = np.log2([row[1] for row in rows])
    errs = np.log2([row[2] for row in rows])
    slope = float(np.polyfit(hs, errs, 1)[0])
    ratios = [rows[i][2] / rows[i + 1][2] for i in range(len(rows) - 1)]

    if config.out_dir:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "convergence.csv", "w") as fh:
            fh.write("N_t,h,err\n")
            for n_t, h, err in rows:
                fh.write(f"{n_t},{h!r},{err!r}\n")
    return ConvergenceResult(rows, slope, ratios)


# -- file formats ---------------------------------------------------------


def write_diagnostics_csv(path, records, n_cells: int) -> None:
    """Time series in the documented schema; floats via repr for determinism."""
    header = DIAG_FIXED_COLUMNS + [f"B_{k}" for k in range(1, n_cells + 1)]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for rec in records:
            fh.write(",".join(repr(float(v)) for v in rec.row()) + "\n")


def read_diagnostics(path) -> dict:
    """Columns of a diagnostics CSV as name -> float array."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = [[float(v) for v in line.split(",")] for line in fh if line.strip()]
    mat = np.array(data) if data else np.empty((0, len(header)))
    return {name: mat[:, i] for i, name in enumerate(header)}


def write_density_snapshot(path, rho: np.ndarray, grid: GridSpec, t: float) -> None:
    """Density matrix (rows radial, columns angular) with a one-line header."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# {grid.m_r} {grid.m_theta} {grid.domain.r_min!r} "
                 f"{grid.domain.r_max!r} {t!r}\n")
        for i in range(rho.shape[0]):
            fh.write(",".join(repr(float(v)) for v in rho[i]) + "\n")


def read_density_snapshot(path):
    """Inverse of write_density_snapshot; returns (rho, meta dict)."""
    with open(path) as fh:
        head = fh.readline().strip()
        if not head.startswith("#"):
            raise ValueError(f"missing snapshot header in {path}")
        parts = head[1:].split()
        meta = {"m_r": int(parts[0]), "m_theta": int(parts[1]),
                "r_min": float(parts[2]), "r_max": float(parts[3]),
                "t": float(parts[4])}
        rho = np.array([[float(v) for v in line.split(",")] for line in fh])
    if rho.shape != (meta["m_r"], meta["m_theta"]):
        raise ValueError(f"snapshot shape {rho.shape} disagrees with header")
    return rho, meta
