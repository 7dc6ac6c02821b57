"""Lindblad models for the four cavity/battery scenarios.

All Hamiltonians are written in the frame co-rotating with the local
energies, so they are time independent. The auxiliary (cavity or transmon)
is factor 0 and the qubit battery is factor 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from .operators import (
    HilbertSpace,
    Operator,
    annihilation,
    commutator,
    embed,
    identity,
    number,
    qubit_ops,
)

TWO_PI = 2.0 * math.pi


class ModelError(ValueError):
    """Invalid model parameters."""


class Scenario(str, Enum):
    NONLINEAR_DICKE = "nonlinear_dicke"
    COMMUTING_CHARGER = "commuting_charger"
    DIRECT_DRIVE = "direct_drive"
    ANHARMONIC_LINEAR = "anharmonic_linear"


class RateMode(str, Enum):
    DETAILED_BALANCE = "detailed_balance"
    LITERAL_EQ25 = "literal_eq25"


class DriveConvention(str, Enum):
    # H = (F/2) sigma_x: F is the Rabi frequency
    RABI = "rabi"
    # H = F (sigma_+ + sigma_-)
    LITERAL = "literal"


@dataclass(frozen=True)
class BathSpec:
    alpha: float = 1.0
    omega_max: float = 1000.0
    beta: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "omega_max", "beta"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ModelError(f"bath.{name} must be a positive number, got {v!r}")


@dataclass(frozen=True)
class ModelParams:
    scenario: Scenario = Scenario.NONLINEAR_DICKE
    omega0: float = 1.0
    F: float = 0.0
    g1: float = 0.0
    g2: float = 0.0
    n_cavity: int = 10
    bath: BathSpec = field(default_factory=BathSpec)
    omega_tilde0: float = 1.06
    omega_tilde1: float = 0.0
    rate_mode: RateMode = RateMode.DETAILED_BALANCE
    # None selects the scenario's own constant: 1 for the harmonic-cavity
    # and direct-drive equations, 2*pi for the transmon equation.
    rate_prefactor: Optional[float] = None
    drive_convention: DriveConvention = DriveConvention.RABI
    # Sum transmon transitions that share a Bohr frequency into one jump
    # operator. False keeps one channel per level pair even when degenerate.
    merge_degenerate: bool = True

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        object.__setattr__(self, "rate_mode", RateMode(self.rate_mode))
        object.__setattr__(self, "drive_convention", DriveConvention(self.drive_convention))
        self.validate()

    def validate(self):
        for name in ("F", "g1", "g2", "omega_tilde1"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ModelError(f"{name} must be >= 0, got {v!r}")
        if not (math.isfinite(self.omega0) and self.omega0 > 0):
            raise ModelError(f"omega0 must be > 0, got {self.omega0!r}")
        if int(self.n_cavity) != self.n_cavity or self.n_cavity < 2:
            raise ModelError(f"n_cavity must be an integer >= 2, got {self.n_cavity!r}")
        if self.rate_prefactor is not None and not self.rate_prefactor > 0:
            raise ModelError(f"rate_prefactor must be > 0, got {self.rate_prefactor!r}")
        if self.scenario is Scenario.ANHARMONIC_LINEAR:
            if not self.omega_tilde0 > 0:
                raise ModelError(f"omega_tilde0 must be > 0, got {self.omega_tilde0!r}")
            transmon_spectrum(self.omega_tilde0, self.omega_tilde1, self.n_cavity)

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, BathSpec):
                for g in fields(v):
                    out[f"bath.{g.name}"] = getattr(v, g.name)
            elif isinstance(v, Enum):
                out[f.name] = v.value
            else:
                out[f.name] = v
        return out


@dataclass(frozen=True)
class LindbladModel:
    space: HilbertSpace
    hamiltonian: Operator
    channels: Tuple[Tuple[float, Operator], ...]
    # Lab-frame local Hamiltonians, used for energy and ergotropy.
    battery_H: Operator
    aux_H: Optional[Operator] = None
    battery_factor: int = 1
    params: Optional[ModelParams] = None

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple((float(r), L) for r, L in self.channels))
        if self.hamiltonian.space != self.space:
            raise ModelError("Hamiltonian does not act on the model space")
        if not self.hamiltonian.is_hermitian(1e-12):
            raise ModelError("Hamiltonian is not Hermitian")
        for rate, L in self.channels:
            if not (math.isfinite(rate) and rate >= 0):
                raise ModelError(f"channel rate must be >= 0, got {rate!r}")
            if L.space != self.space:
                raise ModelError("jump operator does not act on the model space")

    @property
    def dim(self) -> int:
        return self.space.total_dim


def ohmic_J(omega: float, bath: BathSpec) -> float:
    """Ohmic spectral density ``alpha * omega * exp(-omega / omega_max)``."""
    if not omega > 0:
        raise ModelError(f"spectral density needs omega > 0, got {omega!r}")
    return bath.alpha * omega * math.exp(-omega / bath.omega_max)


def bose_einstein(omega: float, beta: float) -> float:
    if not omega > 0:
        raise ModelError(f"Bose-Einstein occupation needs omega > 0, got {omega!r}")
    if not beta > 0:
        raise ModelError(f"beta must be > 0, got {beta!r}")
    return 1.0 / math.expm1(beta * omega)


def _prefactor(params: ModelParams, default: float) -> float:
    return default if params.rate_prefactor is None else params.rate_prefactor


def _thermal_rates(omega: float, bath: BathSpec, prefactor: float) -> Tuple[float, float]:
    """(down, up) rates ``c J (1 + n)``, ``c J n`` at a positive frequency."""
    j = ohmic_J(omega, bath)
    n = bose_einstein(omega, bath.beta)
    return prefactor * j * (1.0 + n), prefactor * j * n


def _require(params: ModelParams, scenario: Scenario):
    if params.scenario is not scenario:
        raise ModelError(f"expected scenario {scenario.value}, got {params.scenario.value}")


def _cavity_parts(params: ModelParams):
    space = HilbertSpace((params.n_cavity, 2))
    a = embed(annihilation(params.n_cavity), 0, space)
    _, sp, sm = qubit_ops()
    return space, a, embed(sp, 1, space), embed(sm, 1, space)


def local_hamiltonians(params: ModelParams):
    """Lab-frame ``(H_A, H_B)`` embedded on the joint space."""
    space = HilbertSpace((params.n_cavity, 2))
    if params.scenario is Scenario.ANHARMONIC_LINEAR:
        eps = transmon_spectrum(params.omega_tilde0, params.omega_tilde1, params.n_cavity)
        h_a = Operator(np.diag(eps))
        gap = battery_gap(params)
    else:
        h_a = params.omega0 * number(params.n_cavity)
        gap = params.omega0
    sz, _, _ = qubit_ops()
    h_b = gap * 0.5 * (sz + identity(2))
    return embed(h_a, 0, space), embed(h_b, 1, space)


def _harmonic_model(params: ModelParams, interaction: Operator, parts) -> LindbladModel:
    space, a, sp, sm = parts
    ad = a.dag()
    H = interaction + params.F * (ad + a)
    down, up = _thermal_rates(params.omega0, params.bath, _prefactor(params, 1.0))
    h_a, h_b = local_hamiltonians(params)
    return LindbladModel(
        space=space,
        hamiltonian=H,
        channels=((down, a), (up, ad)),
        battery_H=h_b,
        aux_H=h_a,
        params=params,
    )


def linear_interaction(params: ModelParams, parts=None) -> Operator:
    _, a, sp, sm = parts or _cavity_parts(params)
    return params.g1 * (a @ sp + a.dag() @ sm)


def two_photon_interaction(params: ModelParams, parts=None) -> Operator:
    _, a, sp, sm = parts or _cavity_parts(params)
    ad = a.dag()
    return params.g2 * (a @ a @ sp + ad @ ad @ sm)


def charger_interaction(params: ModelParams, parts=None) -> Operator:
    """Nonlinear coupling ``a^dag a^2 s+ + h.c.`` that conserves local energy."""
    _, a, sp, sm = parts or _cavity_parts(params)
    ad = a.dag()
    return params.g2 * (ad @ a @ a @ sp + ad @ ad @ a @ sm)


def build_nonlinear_dicke(params: ModelParams) -> LindbladModel:
    """Driven cavity with one- and two-photon Jaynes-Cummings coupling.

    ``g2 = 0`` gives the linear battery.
    """
    _require(params, Scenario.NONLINEAR_DICKE)
    parts = _cavity_parts(params)
    H_int = linear_interaction(params, parts) + two_photon_interaction(params, parts)
    return _harmonic_model(params, H_int, parts)


def build_commuting_charger(params: ModelParams) -> LindbladModel:
    _require(params, Scenario.COMMUTING_CHARGER)
    parts = _cavity_parts(params)
    H_int = linear_interaction(params, parts)
    if params.g2 != 0:
        H_int = H_int + charger_interaction(params, parts)
    return _harmonic_model(params, H_int, parts)


def build_direct_drive(params: ModelParams) -> LindbladModel:
    """Qubit driven on resonance and damped by the bath, with no cavity.

    ``params.F`` is the drive strength; see :class:`DriveConvention`.
    """
    _require(params, Scenario.DIRECT_DRIVE)
    space = HilbertSpace((2,))
    sz, sp, sm = qubit_ops()
    amp = 0.5 * params.F if params.drive_convention is DriveConvention.RABI else params.F
    H = amp * (sp + sm)
    down, up = _thermal_rates(params.omega0, params.bath, _prefactor(params, 1.0))
    h_b = params.omega0 * 0.5 * (sz + identity(2))
    return LindbladModel(
        space=space,
        hamiltonian=H,
        channels=((down, sm), (up, sp)),
        battery_H=h_b,
        aux_H=None,
        battery_factor=0,
        params=params,
    )


def max_transmon_levels(omega_tilde0: float, omega_tilde1: float) -> Optional[int]:
    """Largest truncation with a strictly increasing transmon ladder.

    Returns None when every truncation is valid (``omega_tilde1 == 0``).
    """
    if omega_tilde1 <= 0:
        return None
    # eps_{n+1} - eps_n = w0 - w1 (2n + 1) > 0  <=>  n < (w0/w1 - 1) / 2
    n_max = math.ceil((omega_tilde0 / omega_tilde1 - 1.0) / 2.0) - 1
    return n_max + 2


def transmon_spectrum(omega_tilde0: float, omega_tilde1: float, n_levels: int) -> np.ndarray:
    """Levels ``eps_n = w0 n - w1 n^2`` for ``n < n_levels``."""
    n = np.arange(n_levels, dtype=float)
    eps = omega_tilde0 * n - omega_tilde1 * n ** 2
    if np.any(np.diff(eps) <= 0):
        raise ModelError(
            f"transmon ladder (w0={omega_tilde0}, w1={omega_tilde1}) is not increasing "
            f"within {n_levels} levels; use at most "
            f"{max_transmon_levels(omega_tilde0, omega_tilde1)}"
        )
    return eps


def transition_frequencies(omega_tilde0: float, omega_tilde1: float, n_levels: int) -> np.ndarray:
    """Downward gaps ``eps_{n+1} - eps_n`` for ``n = 0 .. n_levels-2``."""
    n = np.arange(n_levels - 1, dtype=float)
    return omega_tilde0 - 2.0 * omega_tilde1 * n - omega_tilde1


def battery_gap(params: ModelParams) -> float:
    """Battery level spacing.

    For the transmon scenario the battery is tuned to the 0-1 transmon gap
    ``w0 - w1``; otherwise it is ``omega0``.
    """
    if params.scenario is Scenario.ANHARMONIC_LINEAR:
        return params.omega_tilde0 - params.omega_tilde1
    return params.omega0


def transmon_channels(params: ModelParams) -> List[Tuple[float, Operator]]:
    """Jump operators for the adjacent-level transmon transitions.

    Returns ``[(rate_down, T_down), (rate_up, T_up), ...]`` ordered by level,
    with ``T_down_n = sqrt(n+1)|n><n+1|`` on the auxiliary factor.
    Transitions sharing a Bohr frequency are summed into one jump operator,
    so at ``omega_tilde1 = 0`` the single pair is ``(a, a^dag)``.
    """
    _require(params, Scenario.ANHARMONIC_LINEAR)
    N = params.n_cavity
    transmon_spectrum(params.omega_tilde0, params.omega_tilde1, N)
    space = HilbertSpace((N, 2))
    c = _prefactor(params, TWO_PI)
    groups: List[Tuple[float, np.ndarray]] = []
    for n, w in enumerate(transition_frequencies(params.omega_tilde0, params.omega_tilde1, N)):
        w = float(w)
        for k, (w_k, _) in enumerate(groups):
            if params.merge_degenerate and abs(w_k - w) <= 1e-12:
                break
        else:
            groups.append((w, np.zeros((N, N))))
            k = len(groups) - 1
        groups[k][1][n, n + 1] = math.sqrt(n + 1)
    out = []
    for w, t_down in groups:
        T_down = embed(Operator(t_down), 0, space)
        down, up = _thermal_rates(w, params.bath, c)
        if params.rate_mode is RateMode.LITERAL_EQ25:
            up = down
        out.append((down, T_down))
        out.append((up, T_down.dag()))
    return out


def build_anharmonic_model(params: ModelParams) -> LindbladModel:
    """Driven transmon linearly coupled to the battery.

    In the frame rotating at the battery gap ``w_B = w0 - w1`` the transmon
    keeps the residual ``(w0 - w_B) n - w1 n^2``, which vanishes on the
    0-1 doublet.
    """
    _require(params, Scenario.ANHARMONIC_LINEAR)
    N = params.n_cavity
    space = HilbertSpace((N, 2))
    b = embed(annihilation(N), 0, space)
    n_op = embed(number(N), 0, space)
    _, sp, sm = qubit_ops()
    sp, sm = embed(sp, 1, space), embed(sm, 1, space)
    detuning = params.omega_tilde0 - battery_gap(params)
    H = (
        detuning * n_op
        - params.omega_tilde1 * (n_op @ n_op)
        + params.g1 * (b @ sp + b.dag() @ sm)
        + params.F * (b.dag() + b)
    )
    h_a, h_b = local_hamiltonians(params)
    return LindbladModel(
        space=space,
        hamiltonian=H,
        channels=tuple(transmon_channels(params)),
        battery_H=h_b,
        aux_H=h_a,
        params=params,
    )


_BUILDERS = {
    Scenario.NONLINEAR_DICKE: build_nonlinear_dicke,
    Scenario.COMMUTING_CHARGER: build_commuting_charger,
    Scenario.DIRECT_DRIVE: build_direct_drive,
    Scenario.ANHARMONIC_LINEAR: build_anharmonic_model,
}


def build_model(params: ModelParams) -> LindbladModel:
    return _BUILDERS[params.scenario](params)


def local_energy_commutator(params: ModelParams, interaction: Operator) -> Operator:
    """``[H_int, H_A + H_B]`` in the lab frame; zero for charger couplings."""
    h_a, h_b = local_hamiltonians(params)
    return commutator(interaction, h_a + h_b)
