"""Emitter-specific Liouvillians and saturation algebra.

Two models are provided: the effective incoherently driven two-level system
(dissipators sigma at rate G1, sigma^dag at rate S*G1, sigma^dag sigma at
rate 2*gamma_pd) and the coherently driven three-level system it derives
from, where a fast-decaying pump level at rate beta is driven with Rabi
frequency Omega and the saturation parameter is S = Omega^2 / (beta * G1).

Basis orderings are fixed: two levels as (|e>, |g>); three levels as
(|v>, |e>, |g>) with |v> the pump level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .lindblad import LiouvillianSpec

# Two-level basis indices.
E2, G2 = 0, 1
# Three-level basis indices.
V3, E3, G3 = 0, 1, 2


def sigma_2ls() -> np.ndarray:
    """Dipole lowering operator |g><e| for the two-level basis."""
    op = np.zeros((2, 2), dtype=complex)
    op[G2, E2] = 1.0
    return op


def sigma_3ls() -> np.ndarray:
    """Dipole lowering operator |g><e| for the three-level basis."""
    op = np.zeros((3, 3), dtype=complex)
    op[G3, E3] = 1.0
    return op


def _sigma_ev() -> np.ndarray:
    op = np.zeros((3, 3), dtype=complex)
    op[E3, V3] = 1.0
    return op


def _sigma_vg() -> np.ndarray:
    op = np.zeros((3, 3), dtype=complex)
    op[V3, G3] = 1.0
    return op


@dataclass(frozen=True)
class TwoLevelParams:
    """Rates of the effective two-level emitter.

    gamma1: spontaneous decay rate (rad/s equivalent, 1/s).
    gamma_pd: excess pure dephasing gamma, so gamma2 = gamma1/2 + gamma_pd.
    s: dimensionless saturation parameter (incoherent drive rate s*gamma1).
    """

    gamma1: float
    gamma_pd: float = 0.0
    s: float = 0.0

    def __post_init__(self):
        if self.gamma1 <= 0:
            raise ValidationError(f"gamma1 must be positive, got {self.gamma1}")
        if self.gamma_pd < 0:
            raise ValidationError(f"gamma_pd must be nonnegative, got {self.gamma_pd}")
        if self.s < 0:
            raise ValidationError(f"saturation parameter must be nonnegative, got {self.s}")

    @property
    def gamma2(self) -> float:
        return self.gamma1 / 2.0 + self.gamma_pd

    def steady_excited_population(self) -> float:
        return self.s / (1.0 + self.s)


@dataclass(frozen=True)
class ThreeLevelParams:
    """Rates of the coherently pumped three-level emitter.

    Exactly one of ``rabi`` (Omega, rad/s) or ``s`` may be given; the other
    is derived through S = Omega^2 / (beta * gamma1).
    """

    gamma1: float
    beta: float
    gamma_pd: float = 0.0
    rabi: float | None = None
    s: float | None = None

    def __post_init__(self):
        if self.gamma1 <= 0:
            raise ValidationError(f"gamma1 must be positive, got {self.gamma1}")
        if self.beta <= 0:
            raise ValidationError(f"beta must be positive, got {self.beta}")
        if self.gamma_pd < 0:
            raise ValidationError(f"gamma_pd must be nonnegative, got {self.gamma_pd}")
        if (self.rabi is None) == (self.s is None):
            raise ValidationError("give exactly one of rabi or s")
        known = self.rabi if self.rabi is not None else self.s
        if known < 0:
            raise ValidationError("driving strength must be nonnegative")

    @property
    def omega(self) -> float:
        if self.rabi is not None:
            return self.rabi
        return math.sqrt(self.s * self.beta * self.gamma1)

    @property
    def saturation(self) -> float:
        if self.s is not None:
            return self.s
        return self.rabi**2 / (self.beta * self.gamma1)

    @property
    def gamma2(self) -> float:
        return self.gamma1 / 2.0 + self.gamma_pd

    def steady_excited_population(self) -> float:
        """Exact three-level steady state S / (1 + S(1 + 2*gamma1/beta))."""
        s = self.saturation
        return s / (1.0 + s * (1.0 + 2.0 * self.gamma1 / self.beta))


def two_level_liouvillian(params: TwoLevelParams) -> LiouvillianSpec:
    """Master-equation spec for the incoherently driven two-level system."""
    sig = sigma_2ls()
    return LiouvillianSpec(
        dim=2,
        hamiltonian=np.zeros((2, 2), dtype=complex),
        dissipators=[
            (sig, params.gamma1),
            (sig.conj().T, params.s * params.gamma1),
            (sig.conj().T @ sig, 2.0 * params.gamma_pd),
        ],
    )


def three_level_liouvillian(params: ThreeLevelParams) -> LiouvillianSpec:
    """Master-equation spec for coherent pumping through the |v> level.

    H = (Omega/2)(|v><g| + |g><v|) drives the ground-pump transition; the
    pump relaxes to |e> at rate beta, |e> decays at gamma1, and pure
    dephasing 2*gamma_pd acts on the excited-state population operator.
    """
    sig = sigma_3ls()
    svg = _sigma_vg()
    omega = params.omega
    h = (omega / 2.0) * (svg + svg.conj().T)
    return LiouvillianSpec(
        dim=3,
        hamiltonian=h,
        dissipators=[
            (sig, params.gamma1),
            (_sigma_ev(), params.beta),
            (sig.conj().T @ sig, 2.0 * params.gamma_pd),
        ],
    )


def saturation_convert(
    gamma1: float,
    beta: float | None = None,
    omega: float | None = None,
    s: float | None = None,
    power: float | None = None,
    p_sat: float | None = None,
) -> tuple[float, float]:
    """Convert between Rabi frequency and saturation parameter.

    Exactly one of ``omega``, ``s``, or (``power`` and ``p_sat``) must be
    given.  Returns (omega, s); ``omega`` requires ``beta``.  Round trips are
    exact to floating point.
    """
    given = [omega is not None, s is not None, power is not None]
    if sum(given) != 1:
        raise ValidationError("give exactly one of omega, s, or power")
    if omega is not None:
        if omega < 0:
            raise ValidationError("omega must be nonnegative")
        if beta is None:
            raise ValidationError("beta is required to convert from omega")
        s_val = omega**2 / (beta * gamma1)
        return omega, s_val
    if s is not None:
        if s < 0:
            raise ValidationError("s must be nonnegative")
        s_val = s
    else:
        if p_sat is None or p_sat <= 0:
            raise ValidationError("power conversion requires positive p_sat")
        if power < 0:
            raise ValidationError("power must be nonnegative")
        s_val = power / p_sat
    if beta is None:
        return float("nan"), s_val
    return math.sqrt(s_val * beta * gamma1), s_val


@dataclass(frozen=True)
class AdiabaticityReport:
    """Ratios governing the pump-level elimination and the verdict.

    ratio_drive = beta / (S * gamma1) and ratio_dephase = beta / gamma2 must
    both be large for the effective two-level description to hold.
    """

    ratio_drive: float
    ratio_dephase: float
    valid: bool
    in_warn_band: bool


def adiabatic_validity(
    params: ThreeLevelParams,
    threshold: float = 50.0,
    warn_threshold: float = 10.0,
) -> AdiabaticityReport:
    """Check beta >> S*gamma1 and beta >> gamma2.

    ``valid`` requires both ratios at or above ``threshold`` (default 50,
    which keeps the analytic extraction formula good to well under one
    percent); ratios in [warn_threshold, threshold) set ``in_warn_band``.
    """
    s = params.saturation
    ratio_drive = math.inf if s == 0 else params.beta / (s * params.gamma1)
    ratio_dephase = math.inf if params.gamma2 == 0 else params.beta / params.gamma2
    smallest = min(ratio_drive, ratio_dephase)
    return AdiabaticityReport(
        ratio_drive=ratio_drive,
        ratio_dephase=ratio_dephase,
        valid=smallest >= threshold,
        in_warn_band=warn_threshold <= smallest < threshold,
    )
