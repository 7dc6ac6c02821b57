"""Time series, parameter sweeps and the comparisons behind the figures."""
from __future__ import annotations

import itertools
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .dynamics import (
    IntegrationError,
    IntegratorConfig,
    SteadyStateReport,
    Trajectory,
    evolve,
    ground_state,
    steady_state_from_trajectory,
)
from .model import (
    BathSpec,
    ModelError,
    ModelParams,
    Scenario,
    build_model,
    max_transmon_levels,
)

log = logging.getLogger(__name__)

SWEEP_AXES = ("g1", "g2", "F", "omega_tilde1")
SWEEP_OBSERVABLES = ("steady_ergotropy", "max_ergotropy_over_time", "max_energy_over_time", "tau_s")
JOBS_ENV = "DICKEBATTERY_JOBS"

# Horizon for steady-state runs of the cavity models. The slowest cell of
# the default (g2, F) heatmap settles at t ~ 225.
STEADY_CFG = IntegratorConfig(t_end=400.0)


@dataclass(frozen=True)
class SteadyCriteria:
    tol_residual: float = 1e-6
    tol_obs: float = 1e-5
    window: float = 5.0

    def __post_init__(self):
        if not (self.tol_residual > 0 and self.tol_obs > 0 and self.window > 0):
            raise ValueError("steady-state tolerances and window must be > 0")


def inclusive_grid(start: float, stop: float, step: float) -> Tuple[float, ...]:
    """``start, start+step, ..., stop`` rounded to 12 decimals."""
    if step <= 0:
        raise ValueError(f"grid step must be > 0, got {step!r}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + k * step, 12) for k in range(n))


def provenance(params: Optional[ModelParams] = None, cfg: Optional[IntegratorConfig] = None,
               steady: Optional[SteadyCriteria] = None, **extra) -> Dict[str, object]:
    out: Dict[str, object] = {"code_version": f"dickebattery {__version__}"}
    if params is not None:
        out.update(params.as_dict())
    if cfg is not None:
        out.update({
            "integrator.dt": cfg.dt,
            "integrator.t_end": cfg.t_end,
            "integrator.record_stride": cfg.record_stride,
            "integrator.hermitize_every": cfg.hermitize_every,
            "integrator.record_interval": cfg.dt * cfg.record_stride,
        })
    if steady is not None:
        out.update({
            "steady.tol_residual": steady.tol_residual,
            "steady.tol_obs": steady.tol_obs,
            "steady.window": steady.window,
        })
    out.update(extra)
    return out


def run_time_series(params: ModelParams, cfg: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    model = build_model(params)
    return evolve(ground_state(model), model, cfg)


def steady_report(params: ModelParams, cfg: IntegratorConfig = STEADY_CFG,
                  steady: SteadyCriteria = SteadyCriteria(),
                  observable: str = "battery_ergotropy") -> SteadyStateReport:
    traj = run_time_series(params, cfg)
    return steady_state_from_trajectory(traj, observable, steady.tol_residual, steady.tol_obs,
                                        steady.window)


def _upto_tau(traj: Trajectory, report: SteadyStateReport, name: str) -> np.ndarray:
    y = traj.column(name)
    if report.tau_s is None:
        return y
    return y[traj.times <= report.tau_s + 1e-9]


# -- sweeps -----------------------------------------------------------------

@dataclass(frozen=True)
class SweepSpec:
    base: ModelParams
    axes: Tuple[Tuple[str, Tuple[float, ...]], ...]
    observable: str = "steady_ergotropy"
    integrator: IntegratorConfig = STEADY_CFG
    steady: SteadyCriteria = SteadyCriteria()

    def __post_init__(self):
        axes = tuple((str(n), tuple(float(x) for x in g)) for n, g in self.axes)
        object.__setattr__(self, "axes", axes)
        if not 1 <= len(axes) <= 2:
            raise ValueError(f"a sweep needs one or two axes, got {len(axes)}")
        names = [n for n, _ in axes]
        if len(set(names)) != len(names):
            raise ValueError(f"sweep axes must be distinct, got {names}")
        for name, grid in axes:
            if name not in SWEEP_AXES:
                raise ValueError(f"cannot sweep {name!r}; choose from {SWEEP_AXES}")
            if not grid:
                raise ValueError(f"grid for {name} is empty")
            d = np.diff(grid)
            if not (np.all(d > 0) or np.all(d < 0)):
                raise ValueError(f"grid for {name} must be strictly monotone")
        if self.observable not in SWEEP_OBSERVABLES:
            raise ValueError(f"unknown observable {self.observable!r}; choose from {SWEEP_OBSERVABLES}")

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(len(g) for _, g in self.axes)

    def points(self):
        names = [n for n, _ in self.axes]
        for idx in itertools.product(*(range(len(g)) for _, g in self.axes)):
            yield idx, {n: self.axes[k][1][i] for k, (n, i) in enumerate(zip(names, idx))}


@dataclass
class CellResult:
    index: Tuple[int, ...]
    point: Dict[str, float]
    value: float
    tau_s: Optional[float]
    residual: float
    status: str = "ok"
    message: str = ""
    # integrator health (trace drift, hermiticity drift, min eigenvalue)
    diagnostics: Dict[str, float] = field(default_factory=dict)


@dataclass
class SweepResult:
    spec: SweepSpec
    values: np.ndarray
    cells: List[CellResult]
    header: Dict[str, object] = field(default_factory=dict)

    @property
    def axis_names(self) -> List[str]:
        return [n for n, _ in self.spec.axes]

    def grid(self, name: str) -> Tuple[float, ...]:
        return dict(self.spec.axes)[name]

    def value_at(self, **point) -> float:
        idx = tuple(self.grid(n).index(point[n]) for n in self.axis_names)
        return float(self.values[idx])


def _observable_value(traj: Trajectory, report: SteadyStateReport, observable: str) -> float:
    if observable == "steady_ergotropy":
        return float("nan") if report.steady_value is None else report.steady_value
    if observable == "tau_s":
        return float("nan") if report.tau_s is None else report.tau_s
    if observable == "max_ergotropy_over_time":
        return float(np.max(_upto_tau(traj, report, "battery_ergotropy")))
    if observable == "max_energy_over_time":
        return float(np.max(_upto_tau(traj, report, "battery_energy")))
    raise ValueError(observable)


def evaluate_point(base: ModelParams, point: Dict[str, float], observable: str,
                   cfg: IntegratorConfig, steady: SteadyCriteria,
                   index: Tuple[int, ...] = ()) -> CellResult:
    try:
        params = base.with_(**point)
        report = steady_report(params, cfg, steady)
    except (ModelError, IntegrationError) as exc:
        return CellResult(index, point, float("nan"), None, float("nan"), "error", str(exc))
    value = _observable_value(report.trajectory, report, observable)
    status = "ok" if report.reached else "not_steady"
    return CellResult(index, point, value, report.tau_s, report.residual, status,
                      diagnostics=dict(report.trajectory.diagnostics))


def _cell_task(args):
    return evaluate_point(*args)


def parallelism(default: int = 1) -> int:
    raw = os.environ.get(JOBS_ENV)
    if raw is None:
        return default
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{JOBS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


def run_sweep(spec: SweepSpec, jobs: Optional[int] = None) -> SweepResult:
    """Evaluate ``spec.observable`` on every grid cell.

    Cells are independent; with ``jobs > 1`` they run in worker processes.
    Results are placed by cell index, so output does not depend on
    completion order. A failing cell is recorded and the sweep continues.
    """
    jobs = parallelism() if jobs is None else jobs
    tasks = [(spec.base, point, spec.observable, spec.integrator, spec.steady, idx)
             for idx, point in spec.points()]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(_cell_task, tasks))
    else:
        cells = [_cell_task(t) for t in tasks]
    values = np.full(spec.shape, np.nan)
    for c in cells:
        values[c.index] = c.value
        if c.status != "ok":
            log.warning("cell %s: %s %s", c.point, c.status, c.message)
    header = provenance(spec.base, spec.integrator, spec.steady,
                        **{"sweep.observable": spec.observable},
                        **{f"sweep.{n}": ",".join(repr(x) for x in g) for n, g in spec.axes})
    return SweepResult(spec, values, cells, header)


# -- comparisons ------------------------------------------------------------

@dataclass
class BaselineReport:
    F: float
    g1: float
    g2: float
    direct: SteadyStateReport
    linear: SteadyStateReport
    nonlinear: SteadyStateReport

    @property
    def values(self) -> Tuple[float, float, float]:
        return tuple(
            float("nan") if r.steady_value is None else r.steady_value
            for r in (self.direct, self.linear, self.nonlinear)
        )

    @property
    def ordered(self) -> bool:
        e0, e1, e2 = self.values
        return bool(e0 < e1 < e2)

    def rows(self):
        labels = ("direct_drive", "linear", "nonlinear")
        for label, r in zip(labels, (self.direct, self.linear, self.nonlinear)):
            yield label, r


def compare_baselines(F: float, g1: float, g2: float, cfg: IntegratorConfig = STEADY_CFG,
                      steady: SteadyCriteria = SteadyCriteria(), **base) -> BaselineReport:
    """Steady battery ergotropy with no cavity, linear and nonlinear coupling.

    ``ordered`` on the result reports whether the three values increase
    strictly; a violation is a finding, not an error.
    """
    common = dict(base)
    p_direct = ModelParams(scenario=Scenario.DIRECT_DRIVE, F=F, **common)
    p_lin = ModelParams(scenario=Scenario.NONLINEAR_DICKE, F=F, g1=g1, g2=0.0, **common)
    p_non = p_lin.with_(g2=g2)
    r0 = steady_report(p_direct, cfg, steady)
    r1 = steady_report(p_lin, cfg, steady)
    r2 = r1 if g2 == 0 else steady_report(p_non, cfg, steady)
    report = BaselineReport(F, g1, g2, r0, r1, r2)
    if not report.ordered:
        log.warning("baseline ordering violated: %s", report.values)
    return report


@dataclass
class AnharmonicRow:
    omega_tilde1: float
    n_cavity: int
    max_ergotropy: float
    max_energy: float
    tau_s: Optional[float]
    harmonic_max_ergotropy: float
    harmonic_max_energy: float
    diagnostics: Dict[str, float] = field(default_factory=dict)

    @property
    def advantage(self) -> bool:
        return self.max_ergotropy > self.harmonic_max_ergotropy


def anharmonic_advantage_scan(F: float, g: float, omega_tilde0: float,
                              omega_tilde1_grid: Sequence[float], alpha_tilde: float,
                              cfg: IntegratorConfig = IntegratorConfig(t_end=2000.0, record_stride=1000),
                              steady: SteadyCriteria = SteadyCriteria(),
                              n_cavity: int = 10, beta: float = 1.0,
                              **extra) -> List[AnharmonicRow]:
    """Maximum battery ergotropy and energy over ``[0, tau_s]`` per anharmonicity.

    The harmonic reference (``omega_tilde1 = 0``) is integrated once. Where
    the transmon ladder would invert inside ``n_cavity`` levels the
    truncation is reduced to the largest valid one.
    """
    bath = BathSpec(alpha=alpha_tilde, beta=beta)
    base = ModelParams(scenario=Scenario.ANHARMONIC_LINEAR, F=F, g1=g, n_cavity=n_cavity,
                       omega_tilde0=omega_tilde0, omega_tilde1=0.0, bath=bath, **extra)

    def maxima(params):
        rep = steady_report(params, cfg, steady)
        tr = rep.trajectory
        return (float(np.max(_upto_tau(tr, rep, "battery_ergotropy"))),
                float(np.max(_upto_tau(tr, rep, "battery_energy"))), rep.tau_s, tr.diagnostics)

    h_erg, h_en, h_tau, h_diag = maxima(base)
    rows = []
    for w1 in omega_tilde1_grid:
        w1 = float(w1)
        if w1 == 0:
            rows.append(AnharmonicRow(0.0, n_cavity, h_erg, h_en, h_tau, h_erg, h_en, dict(h_diag)))
            continue
        cap = max_transmon_levels(omega_tilde0, w1)
        n = n_cavity if cap is None else min(n_cavity, cap)
        if n != n_cavity:
            log.info("omega_tilde1=%g: truncation reduced to %d levels", w1, n)
        erg, en, tau, diag = maxima(base.with_(omega_tilde1=w1, n_cavity=n))
        rows.append(AnharmonicRow(w1, n, erg, en, tau, h_erg, h_en, dict(diag)))
    return rows


@dataclass
class CavityReport:
    """Steady ergotropies when the cavity itself is accessible."""
    scenario: str
    battery_linear: float
    battery_nonlinear: float
    cavity_linear: float
    cavity_nonlinear: float

    @property
    def delta_linear(self) -> float:
        return self.cavity_linear - self.battery_linear

    @property
    def delta_nonlinear(self) -> float:
        return self.cavity_nonlinear - self.battery_nonlinear


def cavity_report(F: float, g1: float, g2: float,
                  scenario: Scenario = Scenario.NONLINEAR_DICKE,
                  cfg: IntegratorConfig = STEADY_CFG,
                  steady: SteadyCriteria = SteadyCriteria()) -> CavityReport:
    out = {}
    for label, gg in (("linear", 0.0), ("nonlinear", g2)):
        params = ModelParams(scenario=scenario, F=F, g1=g1, g2=gg)
        rb = steady_report(params, cfg, steady, "battery_ergotropy")
        ra = steady_state_from_trajectory(rb.trajectory, "aux_ergotropy", steady.tol_residual,
                                          steady.tol_obs, steady.window)
        out[f"battery_{label}"] = rb.steady_value if rb.reached else rb.final_value
        out[f"cavity_{label}"] = ra.steady_value if ra.reached else ra.final_value
    return CavityReport(Scenario(scenario).value, **out)


def truncation_check(params: ModelParams, cfg: IntegratorConfig = STEADY_CFG,
                     observable: str = "battery_ergotropy") -> Tuple[float, float, float]:
    """Final value of ``observable`` at ``N`` and ``N + 2`` levels and their gap."""
    a = run_time_series(params, cfg).column(observable)[-1]
    b = run_time_series(params.with_(n_cavity=params.n_cavity + 2), cfg).column(observable)[-1]
    return float(a), float(b), float(abs(a - b))
