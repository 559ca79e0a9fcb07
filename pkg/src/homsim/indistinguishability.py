"""Photon-wavepacket indistinguishability extraction.

Two measurement pipelines are implemented.  For pulsed excitation the
indistinguishability is the normalised difference of time-integrated
parallel and perpendicular coincidence densities over the central feature,

    I = (int G2_perp - int G2_par) / int G2_perp,

with side features removed from the denominator by subtracting a fitted
side model.  For cw excitation the divergent integrals are regularised by
subtracting the asymptote first,

    I_tilde(S) = [int (1 - g2_par) - int (1 - g2_perp)] / int (1 - g2_perp),

which depends on the driving strength S and extrapolates to the true
indistinguishability at S = 0 through the closed form
I_tilde(S) = M G1 (1+S) / (G1 (1+S) + 2 gamma).
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from .correlations import CorrelationCurve
from .errors import DegenerateDataError, ExtractionError, ValidationError


class ExtractionMethod(str, enum.Enum):
    PULSED_INTEGRAL = "pulsed_integral"
    CW_INTEGRAL = "cw_integral"
    CW_EXTRAPOLATED = "cw_extrapolated"
    ANALYTIC = "analytic"


@dataclass(frozen=True)
class IndistinguishabilityResult:
    """Extracted indistinguishability with its provenance.

    ``value`` may exceed the physical range only within its uncertainty;
    negative noise-driven values are reported as-is so that averages over
    repeated runs stay unbiased.
    """

    value: float
    uncertainty: float
    method: ExtractionMethod
    s_at_measurement: float | None = None
    corrections_applied: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.uncertainty < 0:
            raise ValidationError("uncertainty must be nonnegative")
        if self.value > 1.0 + self.uncertainty + 1e-12:
            raise ValidationError(
                f"value {self.value} exceeds 1 beyond its uncertainty {self.uncertainty}"
            )

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "uncertainty": self.uncertainty,
            "method": self.method.value,
            "s_at_measurement": self.s_at_measurement,
            "corrections_applied": list(self.corrections_applied),
            "details": dict(self.details),
        }


def _trapezoid_weights(n: int, spacing: float) -> np.ndarray:
    w = np.full(n, spacing)
    w[0] = w[-1] = spacing / 2.0
    return w


def _integral_with_variance(
    values: np.ndarray, spacing: float, sigma: np.ndarray | None
) -> tuple[float, float]:
    w = _trapezoid_weights(values.size, spacing)
    integral = float(np.dot(w, values))
    if sigma is None:
        return integral, 0.0
    return integral, float(np.dot(w**2, np.asarray(sigma) ** 2))


def pulsed_extract(
    par: CorrelationCurve,
    perp: CorrelationCurve,
    central_window: float,
    side_model: CorrelationCurve | None = None,
    par_sigma: np.ndarray | None = None,
    perp_sigma: np.ndarray | None = None,
) -> IndistinguishabilityResult:
    """Time-integrated pulsed extraction over the central feature.

    ``central_window`` is the full width of the integration window centred
    on tau = 0.  Side-feature tails cancel in the numerator difference but
    not in the denominator; pass their fitted contribution as ``side_model``
    (same grid) to subtract them from the perpendicular data first.
    """
    if not par.same_grid(perp):
        raise ValidationError("parallel and perpendicular curves must share a grid")
    if side_model is not None and not par.same_grid(side_model):
        raise ValidationError("side model must share the data grid")
    mask = np.abs(par.tau) <= central_window / 2.0
    if not np.any(mask):
        raise ValidationError("central window contains no grid points")
    spacing = par.spacing
    diff = perp.values[mask] - par.values[mask]
    den_values = perp.values[mask]
    if side_model is not None:
        den_values = den_values - side_model.values[mask]
    num, num_var = _integral_with_variance(
        diff,
        spacing,
        None
        if par_sigma is None and perp_sigma is None
        else np.hypot(
            np.zeros(mask.sum()) if par_sigma is None else np.asarray(par_sigma)[mask],
            np.zeros(mask.sum()) if perp_sigma is None else np.asarray(perp_sigma)[mask],
        ),
    )
    den, den_var = _integral_with_variance(
        den_values,
        spacing,
        None if perp_sigma is None else np.asarray(perp_sigma)[mask],
    )
    if den <= 0:
        raise ExtractionError("perpendicular central integral is nonpositive after subtraction")
    value = num / den
    variance = num_var / den**2 + (num**2 / den**4) * den_var
    return IndistinguishabilityResult(
        value=value,
        uncertainty=float(np.sqrt(variance)),
        method=ExtractionMethod.PULSED_INTEGRAL,
        details={"numerator": num, "denominator": den, "window": central_window},
    )


def cw_integral_extract(
    par: CorrelationCurve,
    perp: CorrelationCurve,
    s_at_measurement: float | None = None,
    par_sigma: np.ndarray | None = None,
    perp_sigma: np.ndarray | None = None,
    edge_tolerance: float = 5e-3,
) -> IndistinguishabilityResult:
    """Driving-strength-dependent cw quantity I_tilde by trapezoidal quadrature.

    Both curves must approach one at the grid edges (within
    ``edge_tolerance``, else a truncation warning is emitted).  The
    antibunching visibility cancels exactly between numerator and
    denominator.
    """
    if not par.same_grid(perp):
        raise ValidationError("parallel and perpendicular curves must share a grid")
    for name, curve in (("parallel", par), ("perpendicular", perp)):
        edge_dev = max(abs(curve.values[0] - 1.0), abs(curve.values[-1] - 1.0))
        if edge_dev > edge_tolerance:
            warnings.warn(
                f"{name} curve deviates from 1 by {edge_dev:.2e} at the grid edge; "
                "the integration window may truncate the dip",
                RuntimeWarning,
                stacklevel=2,
            )
    spacing = par.spacing
    num, num_var = _integral_with_variance(
        perp.values - par.values,
        spacing,
        None
        if par_sigma is None and perp_sigma is None
        else np.hypot(
            np.zeros(par.tau.size) if par_sigma is None else np.asarray(par_sigma),
            np.zeros(par.tau.size) if perp_sigma is None else np.asarray(perp_sigma),
        ),
    )
    den, den_var = _integral_with_variance(1.0 - perp.values, spacing, perp_sigma)
    if den <= 0:
        raise ExtractionError("integral of (1 - g2_perp) is nonpositive")
    value = num / den
    # num and den share the perpendicular curve; the dominant correlation
    # term cancels in first order for deep dips, so treat them independent.
    variance = num_var / den**2 + (num**2 / den**4) * den_var
    return IndistinguishabilityResult(
        value=value,
        uncertainty=float(np.sqrt(variance)),
        method=ExtractionMethod.CW_INTEGRAL,
        s_at_measurement=s_at_measurement,
        details={"numerator": num, "denominator": den},
    )


def i_tilde_analytic(s, gamma1: float, gamma_pd: float, mode_overlap: float = 1.0):
    """Closed form I_tilde(S) = M G1 (1+S) / (G1 (1+S) + 2 gamma)."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValidationError("s must be nonnegative")
    a = gamma1 * (1.0 + s)
    out = mode_overlap * a / (a + 2.0 * gamma_pd)
    return float(out) if out.ndim == 0 else out


def i_tilde_mismatched(s1: float, s2: float, gamma1: float, gamma_pd: float) -> float:
    """I_tilde for different driving strengths in the two interferometer arms.

    s1 applies to the parallel measurement and s2 to the perpendicular one.
    """
    if s1 < 0 or s2 < 0:
        raise ValidationError("driving strengths must be nonnegative")
    first = gamma1 * (1.0 + s2) / (gamma1 * (1.0 + s1) + 2.0 * gamma_pd)
    return first + (s2 - s1) / (1.0 + s1)


def delay_mismatch_correction(
    i_raw: float, gamma1: float, delta_tau: float
) -> tuple[float, float]:
    """Undo the interference loss from a repetition/delay mismatch.

    Returns (corrected value, factor) with factor = exp(-G1 * delta_tau);
    the raw value is divided by the factor.  A factor below 0.5 means the
    mismatch is comparable to the emitter lifetime and the exponential
    correction is no longer a small perturbation, so a warning is emitted.
    """
    if delta_tau < 0:
        raise ValidationError("delta_tau must be nonnegative")
    factor = float(np.exp(-gamma1 * delta_tau))
    if factor < 0.5:
        warnings.warn(
            f"delay-mismatch factor {factor:.3f} < 0.5; correction regime questionable",
            RuntimeWarning,
            stacklevel=2,
        )
    return i_raw / factor, factor


@dataclass(frozen=True)
class SidebandSpec:
    """Phonon-sideband influence on the interference term.

    Either a scalar Debye-Waller-like factor ``dw`` (the constant value of
    the bath coherence, squared in the numerator) or a tabulated complex
    bath correlation function on a tau grid.
    """

    mode: str = "debye_waller_scalar"
    dw: float = 1.0
    g_tau: np.ndarray | None = None
    g_values: np.ndarray | None = None

    def __post_init__(self):
        if self.mode == "debye_waller_scalar":
            if not 0.0 < self.dw <= 1.0:
                raise ValidationError("dw must lie in (0, 1]")
        elif self.mode == "tabulated_phonon_correlator":
            if self.g_tau is None or self.g_values is None:
                raise ValidationError("tabulated mode needs g_tau and g_values")
            g_tau = np.asarray(self.g_tau, dtype=float)
            g_vals = np.asarray(self.g_values, dtype=complex)
            if g_tau.shape != g_vals.shape or g_tau.ndim != 1:
                raise ValidationError("g_tau and g_values must be matching 1-d arrays")
            mags = np.abs(g_vals)
            i0 = int(np.argmin(np.abs(g_tau)))
            if np.any(mags > mags[i0] + 1e-12):
                raise ValidationError("|G(tau)| must not exceed |G(0)|")
        else:
            raise ValidationError(f"unknown sideband mode '{self.mode}'")


def i_tilde_sideband(s: float, gamma1: float, gamma_pd: float, sb: SidebandSpec) -> float:
    """I_tilde with the interference term weighted by the bath coherence.

    The numerator integrand |g1|^2 acquires |G(tau)|^2; the denominator is
    unchanged.  In scalar mode this reduces to dw^2 times the M = 1 closed
    form; tabulated correlators are integrated numerically and must cover
    the coherence decay of the emitter.
    """
    if s < 0:
        raise ValidationError("s must be nonnegative")
    a = gamma1 * (1.0 + s)
    b = a + 2.0 * gamma_pd
    if sb.mode == "debye_waller_scalar":
        return sb.dw**2 * i_tilde_analytic(s, gamma1, gamma_pd, mode_overlap=1.0)
    tau = np.asarray(sb.g_tau, dtype=float)
    gvals = np.asarray(sb.g_values, dtype=complex)
    if tau[0] >= 0:  # one-sided table: mirror
        tau = np.concatenate([-tau[:0:-1], tau])
        gvals = np.concatenate([gvals[:0:-1].conj(), gvals])
    coverage = b * max(abs(tau[0]), abs(tau[-1]))
    if coverage < 10.0:
        raise ExtractionError(
            "tabulated phonon correlator does not cover the emitter coherence time "
            f"(b*tau_max = {coverage:.2f} < 10)"
        )
    numerator = np.trapezoid(np.abs(gvals) ** 2 * np.exp(-b * np.abs(tau)), tau)
    denominator = 2.0 / a
    return float(numerator / denominator)


def extrapolate_to_zero(
    points: list[tuple],
    gamma1: float,
    gamma_pd: float,
    fit_gamma_pd: bool = False,
    sigma_gamma1: float = 0.0,
    sigma_gamma_pd: float = 0.0,
) -> IndistinguishabilityResult:
    """Fit the closed I_tilde(S) form through measured points and read off S = 0.

    ``points`` holds (s, i_tilde, sigma_itilde[, sigma_s]) tuples.  The mode
    overlap M is always free (the model is linear in M, so the weighted
    least-squares solution is closed form); set ``fit_gamma_pd`` to float the
    dephasing as well when it was not measured independently, which needs at
    least two distinct S values.  Uncertainties on S, gamma1 and gamma_pd
    propagate to the result in first order.
    """
    if len(points) == 0:
        raise DegenerateDataError("need at least one (s, i_tilde) point")
    s_arr = np.array([p[0] for p in points], dtype=float)
    y = np.array([p[1] for p in points], dtype=float)
    sig_y = np.array([p[2] if len(p) > 2 else 0.0 for p in points], dtype=float)
    sig_s = np.array([p[3] if len(p) > 3 else 0.0 for p in points], dtype=float)
    if np.any(s_arr < 0):
        raise ValidationError("driving strengths must be nonnegative")

    if fit_gamma_pd:
        if np.unique(s_arr).size < 2:
            raise DegenerateDataError(
                "fitting M and gamma_pd needs at least two distinct S values"
            )
        gamma_pd_fit, m_fit, sig_m, sig_gpd = _fit_m_and_gamma(
            s_arr, y, sig_y, gamma1
        )
        gamma_pd_eff, sigma_gpd_eff = gamma_pd_fit, sig_gpd
    else:
        # Linear in M: weighted least squares in closed form.  Fold sigma_s
        # and rate uncertainties into effective point weights first.
        f = i_tilde_analytic(s_arr, gamma1, gamma_pd, mode_overlap=1.0)
        dfds = _didS(s_arr, gamma1, gamma_pd)
        eff_var = sig_y**2 + (dfds * sig_s) ** 2
        if np.all(eff_var == 0):
            weights = np.ones_like(f)
        elif np.any(eff_var == 0):
            raise ValidationError("mix of zero and nonzero point uncertainties")
        else:
            weights = 1.0 / eff_var
        denom = float(np.sum(weights * f * f))
        if denom == 0:
            raise DegenerateDataError("all model values vanish; cannot constrain M")
        m_fit = float(np.sum(weights * f * y)) / denom
        sig_m = (1.0 / np.sqrt(denom)) if np.any(eff_var > 0) else 0.0
        gamma_pd_eff, sigma_gpd_eff = gamma_pd, sigma_gamma_pd

    value = m_fit * gamma1 / (gamma1 + 2.0 * gamma_pd_eff)
    # First-order propagation through I = M G1 / (G1 + 2 gamma).
    di_dm = gamma1 / (gamma1 + 2.0 * gamma_pd_eff)
    di_dg1 = m_fit * 2.0 * gamma_pd_eff / (gamma1 + 2.0 * gamma_pd_eff) ** 2
    di_dgpd = -2.0 * m_fit * gamma1 / (gamma1 + 2.0 * gamma_pd_eff) ** 2
    variance = (
        (di_dm * sig_m) ** 2
        + (di_dg1 * sigma_gamma1) ** 2
        + (di_dgpd * sigma_gpd_eff) ** 2
    )
    return IndistinguishabilityResult(
        value=value,
        uncertainty=float(np.sqrt(variance)),
        method=ExtractionMethod.CW_EXTRAPOLATED,
        details={
            "mode_overlap": m_fit,
            "mode_overlap_sigma": sig_m,
            "gamma_pd": gamma_pd_eff,
            "n_points": len(points),
            "fit_gamma_pd": fit_gamma_pd,
        },
    )


def _didS(s, gamma1: float, gamma_pd: float):
    a = gamma1 * (1.0 + np.asarray(s, dtype=float))
    return gamma1 * 2.0 * gamma_pd / (a + 2.0 * gamma_pd) ** 2


def _fit_m_and_gamma(s_arr, y, sig_y, gamma1) -> tuple[float, float, float, float]:
    """Two-parameter (M, gamma_pd) weighted fit of the I_tilde closed form."""
    from .fitting import fit_curve  # deferred: fitting imports correlations

    def model(s, m, gamma_pd):
        return i_tilde_analytic(s, gamma1, abs(gamma_pd), mode_overlap=m)

    weights = None if np.all(sig_y == 0) else 1.0 / sig_y**2
    p0 = np.array([min(1.0, max(y.max(), 0.1)), gamma1 / 4.0])
    result = fit_curve(model, s_arr, y, weights=weights, p0=p0,
                       param_names=["m", "gamma_pd"])
    if not result.converged:
        raise ExtractionError("extrapolation fit did not converge")
    m_fit = result.params["m"]
    gpd_fit = abs(result.params["gamma_pd"])
    return gpd_fit, m_fit, result.sigmas["m"], result.sigmas["gamma_pd"]
