"""Weighted nonlinear least squares for correlation and characterisation data.

A thin Levenberg-Marquardt layer (trust-region reflective when bounds are
active) over a set of named model families: Lorentzian linescans, the HBT
and cw HOM closed forms, the four-term interferometer curves for both
regimes, power broadening, and saturation.  Built-in families carry analytic
Jacobians; arbitrary callables fall back to finite differences.  Histogram
fits use Poisson weights 1/max(counts, 1) and may be convolved with a
detector response before comparison with data.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .correlations import DetectorIRF, InterferometerParams
from .errors import DegenerateDataError, ValidationError

_RANK_TOL = 1e-10


@dataclass
class FitResult:
    """Parameter estimates with Gauss-Newton covariance.

    ``sigmas`` are square roots of the covariance diagonal; the covariance
    is the inverse weighted normal matrix scaled by the reduced chi-square.
    """

    params: dict
    sigmas: dict
    covariance: np.ndarray
    param_names: list
    residual_norm: float
    n_iter: int
    converged: bool
    rank_deficient: bool = False
    message: str = ""
    stages: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "params": {k: float(v) for k, v in self.params.items()},
            "sigmas": {k: float(v) for k, v in self.sigmas.items()},
            "covariance": np.asarray(self.covariance).tolist(),
            "param_names": list(self.param_names),
            "residual_norm": float(self.residual_norm),
            "n_iter": int(self.n_iter),
            "converged": bool(self.converged),
            "rank_deficient": bool(self.rank_deficient),
            "message": self.message,
        }


def fit_curve(
    model,
    x: np.ndarray,
    y: np.ndarray,
    weights: np.ndarray | None = None,
    p0: np.ndarray | None = None,
    bounds: tuple | None = None,
    param_names: list | None = None,
    jac=None,
    max_nfev: int = 2000,
) -> FitResult:
    """Weighted least-squares fit of ``model(x, *params)`` to ``y``.

    ``weights`` are inverse variances (Poisson: 1/max(counts, 1)).  ``jac``
    may supply an analytic Jacobian of the unweighted model with shape
    (len(x), n_params).  Non-convergence returns the best point found with
    ``converged=False`` instead of raising.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValidationError("x and y must have the same length")
    if p0 is None:
        raise ValidationError("p0 is required")
    p0 = np.atleast_1d(np.asarray(p0, dtype=float))
    n_par = p0.size
    if param_names is None:
        param_names = [f"p{i}" for i in range(n_par)]
    if len(param_names) != n_par:
        raise ValidationError("param_names length does not match p0")
    if weights is None:
        sqrt_w = np.ones_like(y)
    else:
        weights = np.asarray(weights, dtype=float)
        if np.any(weights < 0):
            raise ValidationError("weights must be nonnegative")
        sqrt_w = np.sqrt(weights)

    def residual(p):
        return sqrt_w * (model(x, *p) - y)

    jac_arg = "2-point"
    if jac is not None:
        def jac_arg(p):  # noqa: F811 - scipy accepts a callable here
            return sqrt_w[:, None] * jac(x, *p)

    method = "lm"
    ls_bounds = (-np.inf, np.inf)
    if bounds is not None:
        lo, hi = bounds
        if np.any(np.isfinite(lo)) or np.any(np.isfinite(hi)):
            method = "trf"
            ls_bounds = bounds
    res = least_squares(
        residual,
        p0,
        jac=jac_arg,
        method=method,
        bounds=ls_bounds,
        xtol=1e-12,
        ftol=1e-12,
        gtol=1e-12,
        max_nfev=max_nfev,
    )
    converged = bool(res.status > 0)
    jac_opt = np.atleast_2d(res.jac)
    cov, rank_deficient = _covariance(jac_opt, 2.0 * res.cost, x.size, n_par)
    if rank_deficient:
        warnings.warn(
            "Jacobian is rank deficient at the optimum; some parameters are "
            "unconstrained by the data",
            RuntimeWarning,
            stacklevel=2,
        )
    sigmas = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return FitResult(
        params={n: float(v) for n, v in zip(param_names, res.x)},
        sigmas={n: float(s) for n, s in zip(param_names, sigmas)},
        covariance=cov,
        param_names=list(param_names),
        residual_norm=float(np.linalg.norm(res.fun)),
        n_iter=int(res.nfev),
        converged=converged,
        rank_deficient=rank_deficient,
        message=str(res.message),
    )


def _covariance(jac: np.ndarray, chi2: float, n_data: int, n_par: int):
    jtj = jac.T @ jac
    svals = np.linalg.svd(jtj, compute_uv=False)
    rank_deficient = bool(svals.size and svals.min() < _RANK_TOL * max(svals.max(), 1e-300))
    dof = max(n_data - n_par, 1)
    scale = chi2 / dof
    if rank_deficient:
        cov = np.linalg.pinv(jtj) * scale
    else:
        cov = np.linalg.inv(jtj) * scale
    return cov, rank_deficient


# ---------------------------------------------------------------------------
# Built-in model families with analytic Jacobians.


class CurveModel:
    """A named parametric curve with analytic partial derivatives.

    Subclasses define ``param_names``, ``values`` and ``jacobian`` (columns
    ordered as ``param_names``).  ``fd_params`` lists parameters whose
    Jacobian column is taken by central finite differences instead.
    """

    name = "base"
    param_names: tuple = ()
    fd_params: tuple = ()

    def values(self, x: np.ndarray, params: dict) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, x: np.ndarray, params: dict) -> np.ndarray:
        raise NotImplementedError

    def _fd_column(self, x, params, name):
        step = max(abs(params[name]), 1.0) * 1e-6
        hi = dict(params)
        lo = dict(params)
        hi[name] = params[name] + step
        lo[name] = params[name] - step
        return (self.values(x, hi) - self.values(x, lo)) / (2.0 * step)


class LorentzianModel(CurveModel):
    """L(x) = amplitude (G/2)^2 / ((x - center)^2 + (G/2)^2) + offset."""

    name = "lorentzian"
    param_names = ("center", "fwhm", "amplitude", "offset")

    def values(self, x, params):
        hw = params["fwhm"] / 2.0
        return params["amplitude"] * hw**2 / ((x - params["center"]) ** 2 + hw**2) + params[
            "offset"
        ]

    def jacobian(self, x, params):
        hw = params["fwhm"] / 2.0
        dx = x - params["center"]
        denom = dx**2 + hw**2
        cols = np.empty((x.size, 4))
        cols[:, 0] = params["amplitude"] * hw**2 * 2.0 * dx / denom**2
        cols[:, 1] = params["amplitude"] * (hw / 2.0) * 2.0 * dx**2 / denom**2
        cols[:, 2] = hw**2 / denom
        cols[:, 3] = 1.0
        return cols


class HbtModel(CurveModel):
    """amplitude * [1 - V exp(-gamma1 (1+s) |tau|)]."""

    name = "hbt_eq9"
    param_names = ("amplitude", "visibility", "gamma1", "s")

    def values(self, x, params):
        rate = params["gamma1"] * (1.0 + params["s"])
        return params["amplitude"] * (1.0 - params["visibility"] * np.exp(-rate * np.abs(x)))

    def jacobian(self, x, params):
        a, v = params["amplitude"], params["visibility"]
        g1, s = params["gamma1"], params["s"]
        at = np.abs(x)
        e = np.exp(-g1 * (1.0 + s) * at)
        cols = np.empty((x.size, 4))
        cols[:, 0] = 1.0 - v * e
        cols[:, 1] = -a * e
        cols[:, 2] = a * v * (1.0 + s) * at * e
        cols[:, 3] = a * v * g1 * at * e
        return cols


class CwHomModel(CurveModel):
    """amplitude * [1 - (V/2) e^{-a|tau|} (1 + M e^{-2 gamma_pd |tau|})]."""

    name = "cw_eq7"
    param_names = ("amplitude", "visibility", "mode_overlap", "gamma1", "gamma_pd", "s")

    def values(self, x, params):
        a = params["gamma1"] * (1.0 + params["s"])
        at = np.abs(x)
        e_a = np.exp(-a * at)
        e_b = np.exp(-(a + 2.0 * params["gamma_pd"]) * at)
        return params["amplitude"] * (
            1.0 - (params["visibility"] / 2.0) * (e_a + params["mode_overlap"] * e_b)
        )

    def jacobian(self, x, params):
        amp, v, m = params["amplitude"], params["visibility"], params["mode_overlap"]
        g1, gpd, s = params["gamma1"], params["gamma_pd"], params["s"]
        at = np.abs(x)
        e_a = np.exp(-g1 * (1.0 + s) * at)
        e_b = np.exp(-(g1 * (1.0 + s) + 2.0 * gpd) * at)
        cols = np.empty((x.size, 6))
        cols[:, 0] = 1.0 - (v / 2.0) * (e_a + m * e_b)
        cols[:, 1] = -(amp / 2.0) * (e_a + m * e_b)
        cols[:, 2] = -(amp * v / 2.0) * e_b
        cols[:, 3] = (amp * v / 2.0) * (1.0 + s) * at * (e_a + m * e_b)
        cols[:, 4] = amp * v * m * at * e_b
        cols[:, 5] = (amp * v / 2.0) * g1 * at * (e_a + m * e_b)
        return cols


class InterferometerCwModel(CurveModel):
    """Four-term unbalanced-interferometer cw curve times an amplitude."""

    name = "interferometer_cw"
    param_names = (
        "amplitude", "visibility", "mode_overlap", "gamma1", "gamma_pd", "s",
        "delay", "r0sq", "r1sq",
    )
    fd_params = ("r0sq", "r1sq")

    @staticmethod
    def _coeffs(params):
        ifp = InterferometerParams(
            delay=params["delay"],
            r0sq=params["r0sq"], t0sq=1.0 - params["r0sq"],
            r1sq=params["r1sq"], t1sq=1.0 - params["r1sq"],
        )
        return ifp._term_coefficients()

    def _pieces(self, x, params):
        a = params["gamma1"] * (1.0 + params["s"])
        b = a + 2.0 * params["gamma_pd"]
        d = params["delay"]
        e_a = np.exp(-a * np.abs(x))
        e_b = np.exp(-b * np.abs(x))
        e_l = np.exp(-a * np.abs(x - d))
        e_r = np.exp(-a * np.abs(x + d))
        return a, b, d, e_a, e_b, e_l, e_r

    def values(self, x, params):
        norm, c1, c2, c3, c4 = self._coeffs(params)
        _, _, _, e_a, e_b, e_l, e_r = self._pieces(x, params)
        t = c1 * e_a + params["mode_overlap"] * c2 * e_b + c3 * e_l + c4 * e_r
        return params["amplitude"] * (1.0 - params["visibility"] * t / norm)

    def jacobian(self, x, params):
        amp, v, m = params["amplitude"], params["visibility"], params["mode_overlap"]
        g1, s = params["gamma1"], params["s"]
        norm, c1, c2, c3, c4 = self._coeffs(params)
        a, b, d, e_a, e_b, e_l, e_r = self._pieces(x, params)
        at = np.abs(x)
        t = c1 * e_a + m * c2 * e_b + c3 * e_l + c4 * e_r
        # d(t)/da with b = a + 2 gamma_pd riding along.
        dt_da = -(c1 * at * e_a + m * c2 * at * e_b
                  + c3 * np.abs(x - d) * e_l + c4 * np.abs(x + d) * e_r)
        cols = np.empty((x.size, len(self.param_names)))
        cols[:, 0] = 1.0 - v * t / norm
        cols[:, 1] = -amp * t / norm
        cols[:, 2] = -amp * v * c2 * e_b / norm
        cols[:, 3] = -amp * v / norm * (1.0 + s) * dt_da
        cols[:, 4] = -amp * v / norm * (-2.0 * at * m * c2 * e_b)
        cols[:, 5] = -amp * v / norm * g1 * dt_da
        cols[:, 6] = -amp * v / norm * a * (
            c3 * np.sign(x - d) * e_l - c4 * np.sign(x + d) * e_r
        )
        cols[:, 7] = self._fd_column(x, params, "r0sq")
        cols[:, 8] = self._fd_column(x, params, "r1sq")
        return cols


class InterferometerPulsedModel(CurveModel):
    """Pulse-train comb minus the four interferometer terms, times an amplitude."""

    name = "interferometer_pulsed"
    param_names = (
        "amplitude", "visibility", "mode_overlap", "gamma1", "gamma_pd",
        "rep_period", "delay", "r0sq", "r1sq",
    )
    fd_params = ("r0sq", "r1sq")

    def __init__(self, n_side_peaks: int = 12):
        self.n_side_peaks = n_side_peaks

    def _comb(self, x, g1, rep):
        total = np.exp(-g1 * np.abs(x))
        d_dg1 = -np.abs(x) * total
        d_drep = np.zeros_like(x)
        for i in range(1, self.n_side_peaks + 1):
            for sgn in (1.0, -1.0):
                arg = x - sgn * i * rep
                e = np.exp(-g1 * np.abs(arg))
                total += e
                d_dg1 += -np.abs(arg) * e
                d_drep += g1 * sgn * i * np.sign(arg) * e
        return total, d_dg1, d_drep

    def values(self, x, params):
        norm, c1, c2, c3, c4 = InterferometerCwModel._coeffs(params)
        g1, gpd, d = params["gamma1"], params["gamma_pd"], params["delay"]
        comb, _, _ = self._comb(x, g1, params["rep_period"])
        t = (
            c1 * np.exp(-g1 * np.abs(x))
            + params["mode_overlap"] * c2 * np.exp(-(g1 + 2.0 * gpd) * np.abs(x))
            + c3 * np.exp(-g1 * np.abs(x - d))
            + c4 * np.exp(-g1 * np.abs(x + d))
        )
        return params["amplitude"] * (comb - params["visibility"] * t / norm)

    def jacobian(self, x, params):
        amp, v, m = params["amplitude"], params["visibility"], params["mode_overlap"]
        g1, gpd, d = params["gamma1"], params["gamma_pd"], params["delay"]
        norm, c1, c2, c3, c4 = InterferometerCwModel._coeffs(params)
        at = np.abs(x)
        e_a = np.exp(-g1 * at)
        e_b = np.exp(-(g1 + 2.0 * gpd) * at)
        e_l = np.exp(-g1 * np.abs(x - d))
        e_r = np.exp(-g1 * np.abs(x + d))
        comb, dcomb_dg1, dcomb_drep = self._comb(x, g1, params["rep_period"])
        t = c1 * e_a + m * c2 * e_b + c3 * e_l + c4 * e_r
        dt_dg1 = -(c1 * at * e_a + m * c2 * at * e_b
                   + c3 * np.abs(x - d) * e_l + c4 * np.abs(x + d) * e_r)
        cols = np.empty((x.size, len(self.param_names)))
        cols[:, 0] = comb - v * t / norm
        cols[:, 1] = -amp * t / norm
        cols[:, 2] = -amp * v * c2 * e_b / norm
        cols[:, 3] = amp * (dcomb_dg1 - v * dt_dg1 / norm)
        cols[:, 4] = -amp * v / norm * (-2.0 * at * m * c2 * e_b)
        cols[:, 5] = amp * dcomb_drep
        cols[:, 6] = -amp * v / norm * g1 * (
            c3 * np.sign(x - d) * e_l - c4 * np.sign(x + d) * e_r
        )
        cols[:, 7] = self._fd_column(x, params, "r0sq")
        cols[:, 8] = self._fd_column(x, params, "r1sq")
        return cols


class PowerBroadeningModel(CurveModel):
    """FWHM(P) = (gamma2 / pi) sqrt(1 + P / p_sat)."""

    name = "power_broadening"
    param_names = ("gamma2", "p_sat")

    def values(self, x, params):
        return params["gamma2"] / np.pi * np.sqrt(1.0 + x / params["p_sat"])

    def jacobian(self, x, params):
        root = np.sqrt(1.0 + x / params["p_sat"])
        cols = np.empty((x.size, 2))
        cols[:, 0] = root / np.pi
        cols[:, 1] = -params["gamma2"] / np.pi * x / params["p_sat"] ** 2 / (2.0 * root)
        return cols


class SaturationModel(CurveModel):
    """R(P) = r_inf * (P / p_sat) / (1 + P / p_sat)."""

    name = "saturation"
    param_names = ("r_inf", "p_sat")

    def values(self, x, params):
        return params["r_inf"] * x / (params["p_sat"] + x)

    def jacobian(self, x, params):
        ps = params["p_sat"]
        cols = np.empty((x.size, 2))
        cols[:, 0] = x / (ps + x)
        cols[:, 1] = -params["r_inf"] * x / (ps + x) ** 2
        return cols


MODEL_FAMILIES = {
    m.name: m
    for m in (
        LorentzianModel(),
        HbtModel(),
        CwHomModel(),
        InterferometerCwModel(),
        PowerBroadeningModel(),
        SaturationModel(),
    )
}
MODEL_FAMILIES["interferometer_pulsed"] = InterferometerPulsedModel()


class ConvolvedModel(CurveModel):
    """A model family convolved with a detector response on a uniform grid."""

    def __init__(self, base: CurveModel, irf: DetectorIRF, spacing: float):
        self.base = base
        self.name = base.name + "+irf"
        self.param_names = base.param_names
        self.kernel = irf.kernel(spacing)

    def _smooth(self, arr):
        half = self.kernel.size // 2
        padded = np.concatenate([np.full(half, arr[0]), arr, np.full(half, arr[-1])])
        return np.convolve(padded, self.kernel, mode="valid")

    def values(self, x, params):
        return self._smooth(self.base.values(x, params))

    def jacobian(self, x, params):
        raw = self.base.jacobian(x, params)
        return np.column_stack([self._smooth(raw[:, j]) for j in range(raw.shape[1])])


def _check_uniform(x: np.ndarray) -> float:
    d = np.diff(x)
    if np.any(d <= 0) or np.max(np.abs(d - d[0])) > 1e-9 * abs(d[0]):
        raise ValidationError("IRF convolution requires a uniform, increasing grid")
    return float(d[0])


def fit_model_family(
    model: CurveModel,
    x: np.ndarray,
    y: np.ndarray,
    fixed: dict,
    free: dict,
    weights: np.ndarray | None = None,
    bounds: dict | None = None,
    irf: DetectorIRF | None = None,
    mask: np.ndarray | None = None,
) -> FitResult:
    """Fit the ``free`` parameters of a named family with the rest ``fixed``.

    ``free`` maps parameter names to initial guesses; ``bounds`` optionally
    maps names to (lo, hi).  ``mask`` restricts the residuals to a subset of
    points while the model (and any IRF convolution) is still evaluated on
    the full grid.  Unknown or colliding names raise.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if irf is not None:
        model = ConvolvedModel(model, irf, _check_uniform(x))
    if mask is None:
        mask = np.ones(x.shape, dtype=bool)
    all_names = set(model.param_names)
    overlap = set(fixed) & set(free)
    if overlap:
        raise ValidationError(f"parameters both fixed and free: {sorted(overlap)}")
    unknown = (set(fixed) | set(free)) - all_names
    if unknown:
        raise ValidationError(f"unknown parameters for {model.name}: {sorted(unknown)}")
    missing = all_names - set(fixed) - set(free)
    if missing:
        raise ValidationError(f"parameters neither fixed nor free: {sorted(missing)}")
    free_names = [n for n in model.param_names if n in free]

    def assemble(p):
        params = dict(fixed)
        params.update({n: v for n, v in zip(free_names, p)})
        return params

    def func(x_masked, *p):
        return model.values(x, assemble(p))[mask]

    def jac(x_masked, *p):
        full = model.jacobian(x, assemble(p))
        idx = [model.param_names.index(n) for n in free_names]
        return full[np.nonzero(mask)[0][:, None], idx]

    ls_bounds = None
    if bounds:
        lo = np.array([bounds.get(n, (-np.inf, np.inf))[0] for n in free_names])
        hi = np.array([bounds.get(n, (-np.inf, np.inf))[1] for n in free_names])
        ls_bounds = (lo, hi)
    p0 = np.array([free[n] for n in free_names], dtype=float)
    w = weights[mask] if weights is not None else None
    return fit_curve(
        func, x[mask], y[mask], weights=w, p0=p0, bounds=ls_bounds,
        param_names=free_names, jac=jac,
    )


def fit_g2_dataset(
    x: np.ndarray,
    counts: np.ndarray,
    model_family: str,
    fixed: dict,
    free: dict,
    irf: DetectorIRF | None = None,
    bounds: dict | None = None,
    weights: np.ndarray | None = None,
    protocol: str = "joint",
    n_side_peaks: int | None = None,
) -> FitResult:
    """Fit a correlation histogram with one of the g2 model families.

    ``x`` are bin centres (s) and ``counts`` raw coincidences; Poisson
    weights 1/max(counts, 1) are applied unless ``weights`` is given.  The
    "staged" protocol first fits the outer region (|tau| >= delay/2, or
    rep_period/2 for pulse trains) for amplitude/visibility/rate-type
    parameters, then the central feature for the remaining ones, mirroring
    side-dip-first fitting of measured interferograms.
    """
    if model_family not in MODEL_FAMILIES:
        raise ValidationError(f"unknown model family '{model_family}'")
    model = MODEL_FAMILIES[model_family]
    if model_family == "interferometer_pulsed" and n_side_peaks is not None:
        model = InterferometerPulsedModel(n_side_peaks=n_side_peaks)
    x = np.asarray(x, dtype=float)
    counts = np.asarray(counts, dtype=float)
    if weights is None:
        weights = 1.0 / np.maximum(counts, 1.0)
    if protocol == "joint":
        return fit_model_family(
            model, x, counts, fixed=fixed, free=free,
            weights=weights, bounds=bounds, irf=irf,
        )
    if protocol != "staged":
        raise ValidationError(f"unknown protocol '{protocol}'")

    outer_names = {"amplitude", "visibility", "s", "gamma1", "rep_period", "delay"}
    stage1_free = {n: v for n, v in free.items() if n in outer_names}
    stage2_free = {n: v for n, v in free.items() if n not in outer_names}
    if not stage1_free or not stage2_free:
        raise ValidationError("staged protocol needs free parameters in both stages")
    half = None
    for key in ("delay", "rep_period"):
        if key in fixed:
            half = fixed[key] / 2.0
            break
        if key in free:
            half = free[key] / 2.0
            break
    if half is None:
        raise ValidationError("staged protocol needs a delay or rep_period scale")
    outer = np.abs(x) >= half
    inner = ~outer
    if not np.any(outer) or not np.any(inner):
        raise ValidationError("staged protocol: a region contains no data")

    stage1 = fit_model_family(
        model, x, counts,
        fixed={**fixed, **stage2_free}, free=stage1_free,
        weights=weights, bounds=bounds, irf=irf, mask=outer,
    )
    fixed_after = dict(fixed)
    fixed_after.update(stage1.params)
    stage2 = fit_model_family(
        model, x, counts,
        fixed=fixed_after, free=stage2_free,
        weights=weights, bounds=bounds, irf=irf, mask=inner,
    )
    merged_params = dict(stage1.params)
    merged_params.update(stage2.params)
    merged_sigmas = dict(stage1.sigmas)
    merged_sigmas.update(stage2.sigmas)
    return FitResult(
        params=merged_params,
        sigmas=merged_sigmas,
        covariance=stage2.covariance,
        param_names=list(stage1.param_names) + list(stage2.param_names),
        residual_norm=stage2.residual_norm,
        n_iter=stage1.n_iter + stage2.n_iter,
        converged=stage1.converged and stage2.converged,
        rank_deficient=stage1.rank_deficient or stage2.rank_deficient,
        message=f"stage1: {stage1.message}; stage2: {stage2.message}",
        stages=[stage1, stage2],
    )


def fit_lorentzian(x: np.ndarray, y: np.ndarray, weights=None) -> FitResult:
    """Lorentzian line fit with automatic initial guesses."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    offset0 = float(np.min(y))
    amp0 = float(np.max(y) - offset0)
    if amp0 <= 0:
        raise DegenerateDataError("no peak above the baseline")
    center0 = float(x[np.argmax(y)])
    above = x[y > offset0 + amp0 / 2.0]
    fwhm0 = float(above.max() - above.min()) if above.size >= 2 else float(
        (x[-1] - x[0]) / 10.0
    )
    fwhm0 = max(fwhm0, np.diff(np.sort(x)).min())
    return fit_model_family(
        MODEL_FAMILIES["lorentzian"], x, y,
        fixed={},
        free={"center": center0, "fwhm": fwhm0, "amplitude": amp0, "offset": offset0},
        weights=weights,
    )


def _check_power_points(power: np.ndarray, y: np.ndarray, minimum: int) -> None:
    if power.size < minimum:
        raise DegenerateDataError(f"need at least {minimum} points")
    if np.unique(power).size < 2:
        raise DegenerateDataError("all points share the same power")


def fit_linewidth_vs_power(points, weights=None) -> FitResult:
    """Recover (gamma2, p_sat) from linewidth-versus-power data.

    ``points`` is an iterable of (power, fwhm_hz) pairs; the model is
    FWHM = (gamma2/pi) sqrt(1 + P/p_sat).
    """
    pts = np.asarray(list(points), dtype=float)
    power, dn = pts[:, 0], pts[:, 1]
    _check_power_points(power, dn, 3)
    gamma2_0 = np.pi * float(dn.min())
    ratio = (float(dn.max()) / float(dn.min())) ** 2 - 1.0
    p_sat0 = float(power.max()) / ratio if ratio > 0.1 else float(np.median(power))
    return fit_model_family(
        MODEL_FAMILIES["power_broadening"], power, dn,
        fixed={}, free={"gamma2": gamma2_0, "p_sat": p_sat0},
        weights=weights,
    )


def fit_saturation(points, weights=None) -> FitResult:
    """Recover (r_inf, p_sat) from count-rate saturation data."""
    pts = np.asarray(list(points), dtype=float)
    power, rate = pts[:, 0], pts[:, 1]
    _check_power_points(power, rate, 3)
    r_inf0 = 1.5 * float(rate.max())
    half = r_inf0 / 2.0
    above = power[rate >= half]
    p_sat0 = float(above.min()) if above.size else float(np.median(power))
    return fit_model_family(
        MODEL_FAMILIES["saturation"], power, rate,
        fixed={}, free={"r_inf": r_inf0, "p_sat": p_sat0},
        weights=weights,
    )
