"""GKSL time evolution, an exact small-system propagator, steady states.

Density matrices are vectorised column-wise (``vec(A X B) = (B^T x A) vec(X)``).
The fixed-step integrator is classic fourth-order Runge-Kutta. Because the
generator is linear and time independent, one RK4 step is exactly the
matrix polynomial ``I + hL + (hL)^2/2 + (hL)^3/6 + (hL)^4/24``; the
integrator applies that step propagator (and its powers between records)
instead of re-evaluating the right-hand side four times per step.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .linalg import expm
from .model import LindbladModel
from .operators import DimensionError, Operator, projector
from .thermo import DensityMatrix, ergotropy, mean_energy, partial_trace

log = logging.getLogger(__name__)

TRACE_DRIFT_TOL = 1e-6
NEGATIVITY_TOL = 1e-6
EXACT_MAX_DIM = 16

OBSERVABLES = ("aux_energy", "aux_ergotropy", "battery_energy", "battery_ergotropy", "purity")


class IntegrationError(RuntimeError):
    """The integrated state left the set of density matrices."""

    def __init__(self, message: str, step: int):
        super().__init__(f"step {step}: {message}")
        self.step = step


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    t_end: float = 200.0
    record_stride: int = 100
    hermitize_every: int = 100
    keep_snapshots: bool = False

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be > 0, got {self.dt!r}")
        if not self.t_end >= self.dt:
            raise ValueError(f"t_end must be >= dt, got {self.t_end!r}")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValueError(f"record_stride must be an integer >= 1, got {self.record_stride!r}")
        if int(self.hermitize_every) != self.hermitize_every or self.hermitize_every < 1:
            raise ValueError(f"hermitize_every must be an integer >= 1, got {self.hermitize_every!r}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass
class Trajectory:
    times: np.ndarray
    battery_energy: np.ndarray
    battery_ergotropy: np.ndarray
    aux_energy: np.ndarray
    aux_ergotropy: np.ndarray
    purity: np.ndarray
    residual: np.ndarray
    final_state: DensityMatrix
    snapshots: Optional[List[np.ndarray]] = None
    diagnostics: Dict[str, float] = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    def column(self, name: str) -> np.ndarray:
        if name not in OBSERVABLES + ("residual",):
            raise KeyError(f"unknown observable {name!r}")
        return getattr(self, name)


@dataclass
class SteadyStateReport:
    tau_s: Optional[float]
    residual: float
    steady_value: Optional[float]
    observable: str = "battery_ergotropy"
    final_value: float = float("nan")
    trajectory: Optional[Trajectory] = field(default=None, repr=False)

    @property
    def reached(self) -> bool:
        return self.tau_s is not None


def gksl_rhs(rho, model: LindbladModel) -> np.ndarray:
    """``-i[H, rho] + sum_k r_k (L rho L^dag - {L^dag L, rho}/2)``."""
    r = rho.data if isinstance(rho, Operator) else np.asarray(rho, dtype=complex)
    if r.shape != (model.dim, model.dim):
        raise DimensionError(f"state shape {r.shape} does not match model dim {model.dim}")
    H = model.hamiltonian.data
    out = -1j * (H @ r - r @ H)
    for rate, L in model.channels:
        if rate == 0:
            continue
        Ld = L.data.conj().T
        LdL = Ld @ L.data
        out += rate * (L.data @ r @ Ld - 0.5 * (LdL @ r + r @ LdL))
    return out


def vec(rho) -> np.ndarray:
    r = rho.data if isinstance(rho, Operator) else np.asarray(rho)
    return r.reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    d = int(round(math.sqrt(v.size)))
    return v.reshape(d, d, order="F")


def liouvillian(model: LindbladModel) -> np.ndarray:
    """Superoperator matrix of :func:`gksl_rhs` acting on ``vec(rho)``."""
    d = model.dim
    ident = np.eye(d)
    H = model.hamiltonian.data
    S = -1j * (np.kron(ident, H) - np.kron(H.T, ident))
    for rate, L in model.channels:
        if rate == 0:
            continue
        A = L.data
        LdL = A.conj().T @ A
        S += rate * (np.kron(A.conj(), A) - 0.5 * np.kron(ident, LdL) - 0.5 * np.kron(LdL.T, ident))
    return S


def rk4_step(rho: np.ndarray, model: LindbladModel, dt: float) -> np.ndarray:
    """One classic RK4 step evaluated stage by stage."""
    k1 = gksl_rhs(rho, model)
    k2 = gksl_rhs(rho + 0.5 * dt * k1, model)
    k3 = gksl_rhs(rho + 0.5 * dt * k2, model)
    k4 = gksl_rhs(rho + dt * k3, model)
    return rho + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4_propagator(L: np.ndarray, dt: float) -> np.ndarray:
    X = dt * L
    ident = np.eye(L.shape[0], dtype=complex)
    # Horner form of I + X + X^2/2 + X^3/6 + X^4/24
    P = ident + X / 4.0
    P = ident + (X @ P) / 3.0
    P = ident + (X @ P) / 2.0
    return ident + X @ P


def ground_state(model: LindbladModel) -> DensityMatrix:
    p = projector(model.space, [0] * len(model.space))
    return DensityMatrix(p.data, model.space)


def exact_propagate(rho0, model: LindbladModel, t: float) -> DensityMatrix:
    """``exp(t L) rho0`` via the in-house Pade exponential; small systems only."""
    if model.dim > EXACT_MAX_DIM:
        raise DimensionError(
            f"exact propagation is limited to dim <= {EXACT_MAX_DIM}, model has {model.dim}"
        )
    v0 = vec(rho0)
    if t == 0:
        return DensityMatrix(unvec(v0.copy()), model.space)
    v = expm(t * liouvillian(model)) @ v0
    return DensityMatrix(unvec(v), model.space)


def liouvillian_steady_state(model: LindbladModel) -> DensityMatrix:
    """Unit-trace null vector of the Liouvillian (direct linear solve)."""
    d = model.dim
    S = liouvillian(model)
    # replace one equation by the trace condition
    A = S.copy()
    A[0, :] = 0.0
    A[0, :: d + 1] = 1.0
    b = np.zeros(d * d, dtype=complex)
    b[0] = 1.0
    r = unvec(np.linalg.solve(A, b))
    r = 0.5 * (r + r.conj().T)
    return DensityMatrix(r / np.trace(r).real, model.space)


class _Observer:
    def __init__(self, model: LindbladModel, battery_H, aux_H):
        self.dims = model.space.factor_dims
        self.bf = model.battery_factor
        self.battery_H = battery_H if battery_H is not None else model.battery_H
        self.aux_H = aux_H if aux_H is not None else model.aux_H
        self.two = len(self.dims) == 2
        if self.two:
            self.h_b = partial_trace_operator(self.battery_H, self.bf, self.dims)
            self.h_a = (
                partial_trace_operator(self.aux_H, 1 - self.bf, self.dims)
                if self.aux_H is not None else None
            )
        else:
            self.h_b = self.battery_H.data
            self.h_a = None

    def __call__(self, r: np.ndarray):
        if self.two:
            t = r.reshape(self.dims + self.dims)
            r0, r1 = np.einsum("ajbj->ab", t), np.einsum("jajb->ab", t)
            rb, ra = (r1, r0) if self.bf == 1 else (r0, r1)
        else:
            rb, ra = r, None
        eb, wb = mean_energy(rb, self.h_b), ergotropy(rb, self.h_b)
        if self.h_a is not None:
            ea, wa = mean_energy(ra, self.h_a), ergotropy(ra, self.h_a)
        else:
            ea = wa = 0.0
        pur = float(np.real(np.vdot(r.conj().T, r)))
        return eb, wb, ea, wa, pur


def partial_trace_operator(H, factor: int, dims) -> np.ndarray:
    """Local Hamiltonian recovered from its embedding ``I x h`` or ``h x I``."""
    data = H.data if isinstance(H, Operator) else np.asarray(H)
    if data.shape[0] == dims[factor]:
        return data
    other = dims[1 - factor]
    return partial_trace(data, factor, dims).data / other


def evolve(rho0, model: LindbladModel, cfg: IntegratorConfig = IntegratorConfig(),
           battery_H=None, aux_H=None) -> Trajectory:
    """Integrate the master equation with fixed-step RK4 and record observables.

    The state is projected onto its Hermitian part every
    ``cfg.hermitize_every`` steps. Trace is never renormalised; a trace drift
    above 1e-6 or an eigenvalue below -1e-6 raises :class:`IntegrationError`.
    """
    if rho0 is None:
        rho0 = ground_state(model)
    r0 = rho0.data if isinstance(rho0, Operator) else np.asarray(rho0, dtype=complex)
    if r0.shape != (model.dim, model.dim):
        raise DimensionError(f"initial state shape {r0.shape} does not match model dim {model.dim}")
    d = model.dim
    observe = _Observer(model, battery_H, aux_H)
    S = liouvillian(model)
    P1 = rk4_propagator(S, cfg.dt)
    chunk = math.gcd(int(cfg.record_stride), int(cfg.hermitize_every))
    P_chunk = np.linalg.matrix_power(P1, chunk)
    n_steps = cfg.n_steps

    rows = []
    residuals = []
    snapshots = [] if cfg.keep_snapshots else None
    max_trace_drift = 0.0
    max_herm_drift = 0.0
    min_eig = np.inf

    def record(step: int, r: np.ndarray, v: np.ndarray):
        nonlocal min_eig
        lo = float(np.linalg.eigvalsh(r)[0])
        min_eig = min(min_eig, lo)
        if lo < -NEGATIVITY_TOL:
            raise IntegrationError(f"negative eigenvalue {lo:.3e}", step)
        rows.append((step * cfg.dt,) + observe(r))
        residuals.append(float(np.linalg.norm(S @ v)))
        if snapshots is not None:
            snapshots.append(r.copy())

    v = vec(r0).astype(complex).copy()
    record(0, unvec(v), v)
    step = 0
    while step < n_steps:
        k = min(chunk, n_steps - step)
        v = (P_chunk if k == chunk else np.linalg.matrix_power(P1, k)) @ v
        step += k
        r = unvec(v)
        drift = abs(np.trace(r) - 1.0)
        max_trace_drift = max(max_trace_drift, drift)
        if not np.isfinite(drift) or drift > TRACE_DRIFT_TOL:
            raise IntegrationError(f"trace drift {drift:.3e}", step)
        if step % cfg.hermitize_every == 0 or step == n_steps:
            herm = float(np.max(np.abs(r - r.conj().T)))
            max_herm_drift = max(max_herm_drift, herm)
            r = 0.5 * (r + r.conj().T)
            v = vec(r).copy()
        if step % cfg.record_stride == 0 or step == n_steps:
            record(step, r, v)

    arr = np.array(rows)
    final = DensityMatrix(unvec(v).copy(), model.space)
    return Trajectory(
        times=arr[:, 0],
        battery_energy=arr[:, 1],
        battery_ergotropy=arr[:, 2],
        aux_energy=arr[:, 3],
        aux_ergotropy=arr[:, 4],
        purity=arr[:, 5],
        residual=np.array(residuals),
        final_state=final,
        snapshots=snapshots,
        diagnostics={
            "max_trace_drift": max_trace_drift,
            "max_hermiticity_drift": max_herm_drift,
            "min_eigenvalue": float(min_eig),
        },
    )


def steady_state_from_trajectory(traj: Trajectory, observable: str = "battery_ergotropy",
                                 tol_residual: float = 1e-6, tol_obs: float = 1e-5,
                                 window: float = 5.0) -> SteadyStateReport:
    """Earliest recorded time from which the state stays stationary.

    A sample ``t_k`` is stationary when the Liouvillian residual is below
    ``tol_residual`` and the observable varies by less than ``tol_obs``
    over ``[t_k - window, t_k]``. ``tau_s`` is the first sample after which
    every later sample is stationary.
    """
    if window <= 0:
        raise ValueError(f"window must be > 0, got {window!r}")
    t = traj.times
    y = traj.column(observable)
    res = traj.residual
    ok = np.empty(len(t), dtype=bool)
    lo = 0
    for k in range(len(t)):
        while t[lo] < t[k] - window - 1e-9:
            lo += 1
        seg = y[lo:k + 1]
        ok[k] = res[k] < tol_residual and (seg.max() - seg.min()) < tol_obs
    bad = np.flatnonzero(~ok)
    if len(bad) == 0:
        idx = 0
    elif bad[-1] == len(t) - 1:
        idx = None
    else:
        idx = int(bad[-1] + 1)
    return SteadyStateReport(
        tau_s=None if idx is None else float(t[idx]),
        residual=float(res[-1]),
        steady_value=None if idx is None else float(y[idx]),
        observable=observable,
        final_value=float(y[-1]),
        trajectory=traj,
    )


def detect_steady_state(model: LindbladModel, rho0=None, cfg: IntegratorConfig = IntegratorConfig(),
                        observable: str = "battery_ergotropy", tol_residual: float = 1e-6,
                        tol_obs: float = 1e-5, window: float = 5.0) -> SteadyStateReport:
    traj = evolve(rho0, model, cfg)
    report = steady_state_from_trajectory(traj, observable, tol_residual, tol_obs, window)
    if not report.reached:
        log.info("no steady state by t=%g (residual %.3e)", cfg.t_end, report.residual)
    return report
