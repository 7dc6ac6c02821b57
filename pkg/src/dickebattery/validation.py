"""Invariant and oracle checks run by ``dickebattery validate``."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, List

import numpy as np

from .dynamics import (
    IntegratorConfig,
    Trajectory,
    evolve,
    exact_propagate,
    ground_state,
)
from .model import (
    ModelParams,
    Scenario,
    build_model,
    charger_interaction,
    linear_interaction,
    local_energy_commutator,
)
from .thermo import (
    ergotropy,
    gibbs_state,
    mean_energy,
    partial_trace,
    passive_state,
    trace_distance,
)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def random_density_matrix(dim: int, rng: np.random.Generator) -> np.ndarray:
    G = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    G = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (G + G.conj().T)


def haar_unitaries(n: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    Z = (rng.normal(size=(n, dim, dim)) + 1j * rng.normal(size=(n, dim, dim))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R, axis1=1, axis2=2)
    return Q * (d / np.abs(d))[:, None, :]


def structural_check(trajectories: Iterable, name="structural") -> Check:
    """Integrator health over anything carrying a ``diagnostics`` dict.

    Accepts trajectories as well as sweep cells and scan rows.
    """
    worst_tr = worst_h = 0.0
    lowest = np.inf
    count = 0
    for tr in trajectories:
        d = tr.diagnostics
        if not d:  # a cell that failed before integrating
            continue
        worst_tr = max(worst_tr, d["max_trace_drift"])
        worst_h = max(worst_h, d["max_hermiticity_drift"])
        lowest = min(lowest, d["min_eigenvalue"])
        count += 1
    ok = count > 0 and worst_tr < 1e-6 and worst_h < 1e-8 and lowest > -1e-6
    return Check(name, ok, f"{count} runs, trace drift {worst_tr:.2e}, "
                           f"hermiticity drift {worst_h:.2e}, min eigenvalue {lowest:.2e}")


class Suite:
    def __init__(self, seed: int = 20240101, mc_samples: int = 10_000):
        self.rng = np.random.default_rng(seed)
        self.mc_samples = mc_samples
        self.trajectories: List[Trajectory] = []

    def _evolve(self, params: ModelParams, cfg: IntegratorConfig) -> Trajectory:
        m = build_model(params)
        tr = evolve(ground_state(m), m, cfg)
        self.trajectories.append(tr)
        return tr

    def thermal_fixed_point(self) -> Check:
        cfg = IntegratorConfig(t_end=50.0)
        cases = {
            "harmonic": ModelParams(scenario=Scenario.NONLINEAR_DICKE),
            "transmon": ModelParams(scenario=Scenario.ANHARMONIC_LINEAR,
                                    omega_tilde0=1.06, omega_tilde1=0.06),
        }
        worst = 0.0
        parts = []
        for label, p in cases.items():
            m = build_model(p)
            tr = self._evolve(p, cfg)
            rho_a = partial_trace(tr.final_state, 0)
            h_a = partial_trace(m.aux_H, 0).data / 2
            dist = trace_distance(rho_a, gibbs_state(h_a, p.bath.beta))
            worst = max(worst, dist)
            parts.append(f"{label} {dist:.2e}")
        return Check("thermal fixed point", worst < 1e-6, ", ".join(parts))

    def no_drive_no_ergotropy(self) -> Check:
        cfg = IntegratorConfig(t_end=50.0)
        cases = [
            ModelParams(scenario=Scenario.NONLINEAR_DICKE, g1=0.1, g2=0.1),
            ModelParams(scenario=Scenario.COMMUTING_CHARGER, g1=0.1, g2=0.1),
            ModelParams(scenario=Scenario.DIRECT_DRIVE),
            ModelParams(scenario=Scenario.ANHARMONIC_LINEAR, g1=0.1,
                        omega_tilde0=1.06, omega_tilde1=0.06),
        ]
        worst = max(float(np.max(self._evolve(p, cfg).battery_ergotropy)) for p in cases)
        return Check("no drive, no ergotropy", worst < 1e-8, f"max battery ergotropy {worst:.2e}")

    def oracle_equivalence(self) -> Check:
        cfg = IntegratorConfig(dt=1e-3, t_end=10.0)
        cases = [
            ModelParams(scenario=Scenario.NONLINEAR_DICKE, n_cavity=3, F=0.5, g1=0.1, g2=0.1),
            ModelParams(scenario=Scenario.COMMUTING_CHARGER, n_cavity=3, F=0.5, g1=0.1, g2=0.1),
            ModelParams(scenario=Scenario.DIRECT_DRIVE, F=0.5),
            ModelParams(scenario=Scenario.ANHARMONIC_LINEAR, n_cavity=3, F=0.5, g1=0.1,
                        omega_tilde0=1.06, omega_tilde1=0.06),
        ]
        errs = []
        for p in cases:
            m = build_model(p)
            rk = self._evolve(p, cfg).final_state.data
            ex = exact_propagate(ground_state(m), m, cfg.t_end).data
            errs.append(float(np.linalg.norm(rk - ex)))
        return Check("RK4 vs exact propagator", max(errs) < 1e-6,
                     "Frobenius errors " + ", ".join(f"{e:.1e}" for e in errs))

    def ergotropy_kernel(self, dim: int = 4, instances: int = 5) -> Check:
        problems = []
        for _ in range(instances):
            rho = random_density_matrix(dim, self.rng)
            H = random_hermitian(dim, self.rng)
            w = ergotropy(rho, H)
            rp = passive_state(rho, H)
            if w < 0:
                problems.append(f"negative ergotropy {w}")
            if ergotropy(rp.data, H) > 1e-10:
                problems.append("passive state has ergotropy")
            if np.max(np.abs(rp.data @ H - H @ rp.data)) > 1e-10:
                problems.append("passive state does not commute with H")
            if ergotropy(gibbs_state(H, 0.7).data, H) > 1e-10:
                problems.append("Gibbs state has ergotropy")
            if np.max(np.abs(np.linalg.eigvalsh(rp.data) - np.linalg.eigvalsh(rho))) > 1e-10:
                problems.append("passive state changed the spectrum")
            U = haar_unitaries(self.mc_samples, dim, self.rng)
            rotated = np.einsum("nij,jk,nlk->nil", U, rho, U.conj())
            energies = np.einsum("nij,ji->n", rotated, H).real
            if energies.min() < mean_energy(rp.data, H) - 1e-10:
                problems.append("a random unitary beat the passive state")
        return Check("ergotropy kernel", not problems,
                     "; ".join(problems) or f"{instances} random {dim}x{dim} instances, "
                                             f"{self.mc_samples} unitaries each")

    def commutators(self) -> Check:
        p = ModelParams(scenario=Scenario.COMMUTING_CHARGER, g1=0.1, g2=0.1)
        lin = local_energy_commutator(p, linear_interaction(p))
        full = local_energy_commutator(p, linear_interaction(p) + charger_interaction(p))
        a, b = float(np.max(np.abs(lin.data))), float(np.max(np.abs(full.data)))
        return Check("local-energy commutators", max(a, b) < 1e-12,
                     f"linear {a:.1e}, linear + charger {b:.1e}")

    def step_halving(self) -> Check:
        p = ModelParams(scenario=Scenario.NONLINEAR_DICKE, n_cavity=3, F=0.5, g1=0.1, g2=0.1)
        m = build_model(p)
        finals = []
        for dt in (0.2, 0.1, 0.05):
            n = int(round(10.0 / dt))
            cfg = IntegratorConfig(dt=dt, t_end=10.0, record_stride=n, hermitize_every=n)
            finals.append(evolve(ground_state(m), m, cfg).final_state.data)
        e1 = np.linalg.norm(finals[0] - finals[1])
        e2 = np.linalg.norm(finals[1] - finals[2])
        ratio = float(e1 / e2)
        return Check("RK4 step-halving order", 12 <= ratio <= 20, f"ratio {ratio:.2f}")

    def structural(self) -> Check:
        return structural_check(self.trajectories)

    def checks(self) -> List[Callable[[], Check]]:
        # structural last: it inspects every trajectory produced before it
        return [self.thermal_fixed_point, self.no_drive_no_ergotropy, self.oracle_equivalence,
                self.ergotropy_kernel, self.commutators, self.step_halving, self.structural]


def run_validation(quick: bool = False, extra_trajectories: Iterable[Trajectory] = ()) -> List[Check]:
    """Run the property suite; ``quick`` lowers the Monte-Carlo sample count."""
    suite = Suite(mc_samples=1000 if quick else 10_000)
    suite.trajectories.extend(extra_trajectories)
    results = []
    for check in suite.checks():
        try:
            results.append(check())
        except Exception as exc:  # a crashing check is a failed check
            results.append(Check(check.__name__, False, f"raised {type(exc).__name__}: {exc}"))
    return results
