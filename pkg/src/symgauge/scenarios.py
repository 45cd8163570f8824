"""Named scenarios: configuration, execution and pass/fail reports."""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
import yaml

from . import grid as g
from . import maxwell as mx
from .eb_reference import eb_from_extended, plane_wave_fields, plane_wave_state, relative_l2, stagger, step_eb, synchronize
from .errors import ConfigError, SymgaugeError, UnknownScenarioError
from .grid import Grid
from .io import CsvSeries, write_snapshot
from . import mechanics as mech

PARTICLE_KINDS = ("particle", "diagnostic")


@dataclass
class Check:
    name: str
    value: float
    tol: float
    passed: bool
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} {self.name}: {self.value:.3e} (tol {self.tol:.1e})"
        return text + (f" {self.note}" if self.note else "")


@dataclass
class RunReport:
    scenario: str
    checks: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, value, tol, below=True, note=""):
        value = float(value)
        passed = bool(value < tol) if below else bool(value > tol)
        self.checks.append(Check(name, value, tol, passed, note))
        self.metrics[name] = value

    def summary(self) -> str:
        lines = [f"scenario {self.scenario}: {'ok' if self.ok else 'FAILED'} in {self.wall_time:.2f} s"]
        lines += ["  " + c.line() for c in self.checks]
        lines += [f"  {k} = {v:.6g}" for k, v in self.metrics.items() if k not in {c.name for c in self.checks}]
        return "\n".join(lines)


@dataclass
class ScenarioConfig:
    """Everything needed to reproduce a run.

    ``dt`` is absolute; when it is ``None`` field scenarios use
    ``cfl * h_min`` and particle scenarios pick their own natural step.
    """

    scenario: str
    dims: list = field(default_factory=lambda: [16, 16, 16])
    lengths: list | None = None
    backend: str = "spectral"
    dt: float | None = None
    cfl: float = 0.1
    steps: int = 100
    output_every: int = 10
    initial: dict = field(default_factory=dict)
    source: dict = field(default_factory=dict)
    seed: int = 0
    output_dir: str = "output"
    a_track: bool = True
    symplecticity_probe: bool = False
    oracle_comparison: bool = False
    snapshots: bool = True

    def validate(self) -> "ScenarioConfig":
        if self.scenario not in REGISTRY:
            raise UnknownScenarioError(
                f"scenario: unknown name {self.scenario!r}; known: {', '.join(REGISTRY)}", field="scenario"
            )
        if not isinstance(self.steps, int) or self.steps <= 0:
            raise ConfigError(f"steps: must be a positive integer, got {self.steps!r}", field="steps")
        if not isinstance(self.output_every, int) or self.output_every <= 0:
            raise ConfigError(f"output_every: must be a positive integer, got {self.output_every!r}", field="output_every")
        if self.dt is not None and not (np.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"dt: must be positive, got {self.dt!r}", field="dt")
        if not self.cfl > 0:
            raise ConfigError(f"cfl: must be positive, got {self.cfl!r}", field="cfl")
        if REGISTRY[self.scenario].kind not in PARTICLE_KINDS:
            grid = self.grid()
            if self.dt is not None and self.dt > mx.stability_limit(grid) * (1 + 1e-12):
                bound = mx.stability_limit(grid)
                raise mx.StepSizeError(
                    f"dt: {self.dt:.6g} exceeds the stability bound {bound:.6g} for the {grid.backend} backend",
                    bound=bound,
                )
        return self

    def grid(self) -> Grid:
        dims = tuple(self.dims)
        lengths = tuple(self.lengths) if self.lengths is not None else (2 * np.pi,) * len(dims)
        try:
            return Grid(dims, lengths, self.backend)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"grid: {exc}", field="grid") from exc

    def field_dt(self, grid: Grid) -> float:
        return float(self.dt) if self.dt is not None else self.cfl * grid.h_min

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        if not isinstance(data, dict) or "scenario" not in data:
            raise ConfigError("scenario: configuration must name a scenario", field="scenario")
        name = data["scenario"]
        if name not in REGISTRY:
            raise UnknownScenarioError(f"scenario: unknown name {name!r}; known: {', '.join(REGISTRY)}", field="scenario")
        known = {f.name for f in dataclasses.fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigError(f"{key}: unknown configuration key", field=key)
        merged = REGISTRY[name].defaults()
        for key, value in data.items():
            if key in ("initial", "source") and isinstance(value, dict):
                merged[key] = {**merged.get(key, {}), **value}
            else:
                merged[key] = value
        return cls(**merged)

    def dumps(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @classmethod
    def loads(cls, text: str) -> "ScenarioConfig":
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"config: not valid YAML ({exc})", field="config") from exc
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        return cls.loads(Path(path).read_text())

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.dumps())
        return path

    @classmethod
    def default(cls, name: str, **overrides) -> "ScenarioConfig":
        return cls.from_dict({"scenario": name, **overrides})


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    kind: str
    runner: Callable
    base: dict

    def defaults(self) -> dict:
        d = {f.name: _field_default(f) for f in dataclasses.fields(ScenarioConfig)}
        d["scenario"] = self.name
        for key, value in self.base.items():
            d[key] = dict(value) if isinstance(value, dict) else value
        return d


def _field_default(f):
    if f.default_factory is not dataclasses.MISSING:
        return f.default_factory()
    return None if f.default is dataclasses.MISSING else f.default


REGISTRY: dict = {}


def register(name, description, kind, **base):
    def deco(fn):
        REGISTRY[name] = Scenario(name, description, kind, fn, base)
        return fn
    return deco


def list_scenarios():
    """``(name, description)`` pairs in registration order."""
    return [(s.name, s.description) for s in REGISTRY.values()]


def run_scenario(cfg: ScenarioConfig) -> RunReport:
    cfg.validate()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = RunReport(cfg.scenario)
    t0 = time.perf_counter()
    REGISTRY[cfg.scenario].runner(cfg, out, report)
    report.wall_time = time.perf_counter() - t0
    cfg.save(out / "config.yaml")
    return report


def _drift_fit(times, values):
    """Least-squares slope and maximum deviation from the first value."""
    times, values = np.asarray(times), np.asarray(values)
    slope = float(np.polyfit(times, values, 1)[0]) if len(times) > 1 else 0.0
    return slope, float(np.max(np.abs(values - values[0])))


# --------------------------------------------------------------------------- field scenarios


def _initial_extended(cfg, grid):
    ini = cfg.initial
    family = ini.get("family", "plane_wave")
    if family == "plane_wave":
        _, ext = plane_wave_state(grid, ini.get("k", [1, 0, 0]), ini.get("amplitude", 1.0),
                                  ini.get("polarization", [0, 1, 0]))
        return ext
    if family == "random":
        rng = np.random.default_rng(cfg.seed)
        kmax = ini.get("kmax", 3)
        A = g.random_vector(grid, rng, kmax)
        Y = g.random_vector(grid, rng, kmax)
        W = g.random_scalar(grid, rng, kmax)
        return mx.ExtendedState.consistent(A, Y, W)
    raise ConfigError(f"initial.family: unknown family {family!r} (plane_wave, random)", field="initial.family")


def _symplectic_form(a, b):
    """Canonical 2-form ``<Y_a, A_b> - <A_a, Y_b> + <W_a, eta_b> - <eta_a, W_b>``."""
    return (g.inner(a.Y, b.A) - g.inner(a.A, b.Y) + g.inner(a.W, b.eta) - g.inner(a.eta, b.W))


@register("vacuum_plane_wave", "extended vacuum leapfrog from a plane wave (or random data); Lorentz and energy checks",
          "extended", cfl=0.2, steps=200, output_every=10, initial={"family": "plane_wave"},
          oracle_comparison=True, symplecticity_probe=True)
def _run_vacuum(cfg, out, report):
    grid = cfg.grid()
    dt = cfg.field_dt(grid)
    s = _initial_extended(cfg, grid)
    scale = s.scale()
    rho0 = mx.momentum_map(s)
    H0 = mx.hamiltonian_extended(s)
    times, energies = [], []
    lorentz_max = 0.0
    with CsvSeries(out / "diagnostics.csv", mx.DIAGNOSTIC_COLUMNS) as csv:
        row = mx.extended_diagnostics(None, s, rho0, dt)
        csv.write(row)
        times.append(row["t"]), energies.append(row["H"])
        done = 0
        while done < cfg.steps:
            chunk = min(cfg.output_every, cfg.steps - done)
            prev, hist = mx.evolve_extended(s, dt, chunk - 1, lorentz_every=1)
            s = mx.step_extended(prev, dt)
            done += chunk
            lorentz_max = max(lorentz_max, float(np.max(hist[:, 1], initial=0.0)))
            row = mx.extended_diagnostics(prev, s, rho0, dt)
            lorentz_max = max(lorentz_max, row["lorentz"])
            csv.write(row)
            times.append(row["t"]), energies.append(row["H"])
    report.outputs.append(str(out / "diagnostics.csv"))
    report.add("lorentz_norm", lorentz_max / scale, 1e-10)
    slope, band = _drift_fit(np.arange(len(energies)), energies)
    report.add("energy_band", band / H0, 1e-3)
    report.metrics["energy_slope_per_step"] = slope / cfg.output_every / H0
    report.metrics["dt"] = dt

    if cfg.initial.get("family", "plane_wave") == "plane_wave":
        ini = cfg.initial
        _, E, B = plane_wave_fields(grid, ini.get("k", [1, 0, 0]), ini.get("amplitude", 1.0),
                                    ini.get("polarization", [0, 1, 0]), s.time)
        report.metrics["plane_wave_error"] = relative_l2(mx.fields_from_extended(s), (E, B))

    if cfg.oracle_comparison:
        ref = _initial_extended(cfg, grid)
        eb = stagger(eb_from_extended(ref), dt)
        zero = grid.zeros_vector()
        for _ in range(cfg.steps):
            eb = step_eb(eb, zero, dt)
        eb = synchronize(eb, dt)
        diff = relative_l2(mx.fields_from_extended(s), (eb.E, eb.B))
        report.add("oracle_difference", diff, 1e-3)

    if cfg.symplecticity_probe:
        rng = np.random.default_rng(cfg.seed + 1)
        probes = []
        for _ in range(2):
            probes.append(mx.ExtendedState(g.random_vector(grid, rng), g.random_vector(grid, rng),
                                           g.random_scalar(grid, rng), g.random_scalar(grid, rng)))
        w0 = _symplectic_form(*probes)
        moved = [mx.evolve_extended(p, dt, cfg.steps)[0] for p in probes]
        report.add("symplecticity_defect", abs(_symplectic_form(*moved) - w0) / max(abs(w0), 1e-300), 1e-10)

    if cfg.snapshots:
        for name, f in (("A", s.A), ("Y", s.Y), ("eta", s.eta), ("W", s.W)):
            report.outputs.append(str(write_snapshot(out / f"{name}.sgf", f, name, s.time)))


def _source(cfg, grid):
    src = cfg.source
    kind = src.get("kind", "oscillating_pair")
    if kind == "oscillating_pair":
        return mx.SourceSpec.oscillating_pair(grid, charge=src.get("charge", 1.0), omega=src.get("omega", 1.0),
                                             loop_current=src.get("loop_current", 0.5))
    if kind == "static_pair":
        osc = mx.SourceSpec.oscillating_pair(grid, charge=src.get("charge", 1.0))
        return mx.SourceSpec.static_charge(osc.rho_at(0.0))
    if kind == "vacuum":
        return mx.SourceSpec.vacuum(grid)
    raise ConfigError(f"source.kind: unknown source {kind!r} (oscillating_pair, static_pair, vacuum)", field="source.kind")


@register("sourced_oscillating_charge", "reduced sourced system driven by an oscillating neutral charge pair",
          "reduced", cfl=0.05, steps=200, output_every=10, source={"kind": "oscillating_pair"})
def _run_sourced(cfg, out, report):
    grid = cfg.grid()
    dt = cfg.field_dt(grid)
    src = _source(cfg, grid)
    s = mx.reduced_state(src, a_track=cfg.a_track)
    scale = s.scale()
    worst = dict(gauss=0.0, divB=0.0, faraday=0.0, ampere=0.0, lorentz=0.0)
    wave = [0.0, 0.0]
    energies, times = [], []
    window = [s]
    with CsvSeries(out / "diagnostics.csv", mx.DIAGNOSTIC_COLUMNS) as csv:
        row = mx.reduced_diagnostics(None, s, src)
        csv.write(row)
        for n in range(1, cfg.steps + 1):
            prev = s
            s = mx.step_reduced(s, src, dt)
            window = (window + [s])[-3:]
            if n % cfg.output_every == 0 or n == cfg.steps:
                row = mx.reduced_diagnostics(prev, s, src)
                csv.write(row)
                energies.append(row["H"]), times.append(row["t"])
                for key in worst:
                    if np.isfinite(row[key]):
                        worst[key] = max(worst[key], row[key])
                if cfg.a_track and len(window) == 3:
                    w = mx.wave_residuals(window, src)
                    wave = [max(wave[0], w.scalar), max(wave[1], w.vector)]
    report.outputs.append(str(out / "diagnostics.csv"))
    report.add("gauss", worst["gauss"] / scale, 1e-8)
    report.add("divB", worst["divB"] / scale, 1e-10)
    report.add("faraday", worst["faraday"] / scale, 1e-3)
    report.add("ampere", worst["ampere"] / scale, 1e-3)
    if cfg.a_track:
        report.add("lorentz_norm", worst["lorentz"] / scale, 1e-10)
        report.add("wave_scalar", wave[0] / scale, 1e-3)
        report.add("wave_vector", wave[1] / scale, 1e-3)
    report.metrics["dt"] = dt
    if cfg.snapshots:
        for name, f in (("E", s.E), ("B", s.B), ("W", s.W)):
            report.outputs.append(str(write_snapshot(out / f"{name}.sgf", f, name, s.time)))


@register("static_charge_equilibrium", "static neutral charge pair: Coulomb state must be a fixed point",
          "reduced", cfl=0.1, steps=200, output_every=20, source={"kind": "static_pair"})
def _run_static(cfg, out, report):
    grid = cfg.grid()
    dt = cfg.field_dt(grid)
    src = _source(cfg, grid)
    s0 = mx.reduced_state(src, a_track=False)
    scale = s0.scale()
    s = s0
    worst = 0.0
    with CsvSeries(out / "diagnostics.csv", ("t", "deviation")) as csv:
        csv.write([0.0, 0.0])
        for n in range(1, cfg.steps + 1):
            s = mx.step_reduced(s, src, dt)
            if n % cfg.output_every == 0 or n == cfg.steps:
                dev = max(float(np.max(np.abs(a.data - b.data)))
                          for a, b in ((s.S, s0.S), (s.B, s0.B), (s.eta, s0.eta), (s.W, s0.W), (s.F, s0.F)))
                worst = max(worst, dev)
                csv.write([s.time, dev])
    report.outputs.append(str(out / "diagnostics.csv"))
    report.add("fixed_point_deviation", worst / scale, 1e-12)


# --------------------------------------------------------------------------- particle scenarios


def _write_trajectory(out, name, traj, report):
    path = out / name
    with CsvSeries(path, traj.columns(include_u=False)) as csv:
        for row in traj.rows(include_u=False):
            csv.write(row)
    report.outputs.append(str(path))


@register("particle_constant_B", "charged particle in a uniform field: gyroradius and energy drift",
          "particle", steps=10000, initial={"b": [0.0, 0.0, 2.0], "q": [0.1, 0.2, 0.3], "p": [0.5, -0.3, 0.2],
                                             "y": 1.0, "steps_per_period": 1000})
def _run_gyro(cfg, out, report):
    ini = cfg.initial
    b = np.asarray(ini["b"], dtype=float)
    y = float(ini["y"])
    T = mech.gyro_period(np.linalg.norm(b), y)
    dt = float(cfg.dt) if cfg.dt is not None else T / ini["steps_per_period"]
    P = mech.twisted_structure(mech.constant_B(b))
    z0 = mech.PhasePoint(ini["q"], ini["p"], [0.0], [y])
    H = lambda z: 0.5 * float(z[3:6] @ z[3:6])
    grad_H = lambda z: np.concatenate([np.zeros(3), z[3:6], np.zeros(2)])
    traj = mech.integrate_particle(H, P, z0, dt, cfg.steps, grad_H=grad_H, record_every=cfg.output_every)
    _write_trajectory(out, "trajectory.csv", traj, report)
    H0 = traj.energies[0]
    report.add("gyroradius_error", mech.gyroradius_error(traj, b, y), 1e-6)
    report.add("energy_drift", np.max(np.abs(traj.energies - H0)) / H0, 1e-8)
    report.metrics["periods"] = cfg.steps * dt / T


@register("particle_nonclosed_field_jacobi", "Jacobi defect of the magnetic bracket for B(q) = q versus an exact field",
          "diagnostic", steps=200, initial={"points": 20, "y": 0.7})
def _run_jacobi(cfg, out, report):
    rng = np.random.default_rng(cfg.seed)
    y = float(cfg.initial["y"])
    radial = mech.twisted_structure(mech.radial_B())
    exact = mech.twisted_structure(mech.smooth_abelian())
    canon = mech.canonical_structure(3, 1)
    err_radial = err_exact = err_canon = err_bianchi = 0.0
    with CsvSeries(out / "jacobi.csv", ("q1", "q2", "q3", "y", "radial", "expected", "exact_field", "bianchi")) as csv:
        for _ in range(int(cfg.initial["points"])):
            z = rng.uniform(-1, 1, 8)
            z[7] = y
            r = mech.jacobi_residual(radial, z, (3, 4, 5))
            e = mech.jacobi_residual(exact, z, (3, 4, 5))
            bianchi = mech.abelian_bianchi_residual(mech.radial_B(), z[:3])[0, 1, 2]
            err_radial = max(err_radial, abs(r + 3 * y))
            err_exact = max(err_exact, abs(e))
            err_bianchi = max(err_bianchi, abs(bianchi - 3.0))
            err_canon = max(err_canon, float(np.max(np.abs(mech.jacobi_tensor(canon, z)))))
            csv.write([*z[:3], y, r, -3 * y, e, bianchi])
    report.outputs.append(str(out / "jacobi.csv"))
    report.add("radial_jacobi_error", err_radial, 1e-6, note="(cyclic sum of p1,p2,p3 vs -3y)")
    report.add("exact_field_jacobi", err_exact, 1e-8)
    report.add("canonical_jacobi", err_canon, 1e-10)
    report.add("bianchi_error", err_bianchi, 1e-8)
    # a short trajectory in the non-closed field, for the record
    P = radial
    z0 = mech.PhasePoint([0.1, 0.2, 0.3], [0.5, -0.3, 0.2], [0.0], [y])
    H = lambda z: 0.5 * float(z[3:6] @ z[3:6])
    dt = float(cfg.dt) if cfg.dt is not None else 0.01
    traj = mech.integrate_particle(H, P, z0, dt, cfg.steps, record_every=cfg.output_every)
    _write_trajectory(out, "trajectory.csv", traj, report)


@register("su2_pure_gauge", "Yang-Mills residual of a flat su(2) connection and of a perturbed curvature",
          "diagnostic", initial={"points": 50})
def _run_su2(cfg, out, report):
    rng = np.random.default_rng(cfg.seed)
    alg = mech.LieAlgebraSpec.su2()
    flat = mech.su2_pure_gauge()
    bent = mech.perturbed_curvature(flat)
    worst_flat, best_bent = 0.0, 0.0
    with CsvSeries(out / "ym_residuals.csv", ("q1", "q2", "q3", "flat", "perturbed")) as csv:
        for _ in range(int(cfg.initial["points"])):
            q = rng.uniform(-1, 1, 3)
            rf = float(np.max(np.abs(mech.ym_field_residual(flat, alg, q))))
            rb = float(np.max(np.abs(mech.ym_field_residual(bent, alg, q))))
            worst_flat, best_bent = max(worst_flat, rf), max(best_bent, rb)
            csv.write([*q, rf, rb])
    report.outputs.append(str(out / "ym_residuals.csv"))
    report.add("flat_residual", worst_flat, 1e-6)
    report.add("perturbed_residual", best_bent, 0.1, below=False)


@register("chart_equivalence_su2", "twisted versus minimally coupled canonical flow in a curved su(2) field",
          "particle", steps=1000, initial={"q": [0.1, 0.2, 0.3], "p": [0.3, -0.2, 0.4], "y": [0.5, -0.3, 0.8],
                                           "amplitude": 0.4})
def _run_chart(cfg, out, report):
    ini = cfg.initial
    field_ = mech.su2_curved(ini["amplitude"])
    z0 = mech.PhasePoint(ini["q"], ini["p"], np.zeros(3), ini["y"])
    dt = float(cfg.dt) if cfg.dt is not None else 0.01
    cmp = mech.chart_equivalence(z0, field_, None, mech.kinetic_hamiltonian, dt, cfg.steps)
    _write_trajectory(out, "twisted.csv", cmp.twisted, report)
    _write_trajectory(out, "canonical_mapped.csv", cmp.canonical, report)
    report.add("chart_deviation", cmp.max_deviation, 1e-6)
    report.metrics["y_change"] = float(np.max(np.abs(cmp.twisted.y - cmp.twisted.y[0])))


__all__ = ["ScenarioConfig", "RunReport", "Check", "run_scenario", "list_scenarios", "REGISTRY", "SymgaugeError"]
