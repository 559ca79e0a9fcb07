"""Synthetic measurements and instrument-physics formulas.

Poisson coincidence histograms drawn from model correlation curves with
deterministic seeding, the power-broadening and saturation relations used
for emitter characterisation, and the spectral-filtering model that yields
the coherent (ZPL) fraction of the collected emission.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .correlations import CorrelationCurve, CurveRegime
from .errors import ExtractionError, ValidationError


@dataclass(frozen=True)
class CoincidenceHistogram:
    """Binned coincidence counts versus delay."""

    bin_edges: np.ndarray
    counts: np.ndarray
    total_counts: int
    normalization: str = "raw"
    seed: int | None = None

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=float)
        counts = np.asarray(self.counts)
        if edges.ndim != 1 or edges.size != counts.size + 1:
            raise ValidationError("need len(bin_edges) == len(counts) + 1")
        widths = np.diff(edges)
        if np.any(widths <= 0):
            raise ValidationError("bin edges must be strictly increasing")
        if np.max(np.abs(widths - widths[0])) > 1e-9 * widths[0]:
            raise ValidationError("bins must be uniform")
        if np.any(counts < 0):
            raise ValidationError("counts must be nonnegative")
        if int(np.sum(counts)) != int(self.total_counts):
            raise ValidationError("total_counts does not match the sum of counts")
        if self.normalization not in ("raw", "asymptote_normalized"):
            raise ValidationError(f"unknown normalization '{self.normalization}'")
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "counts", counts)

    @property
    def bin_centers(self) -> np.ndarray:
        return (self.bin_edges[:-1] + self.bin_edges[1:]) / 2.0

    @property
    def bin_width(self) -> float:
        return float(self.bin_edges[1] - self.bin_edges[0])


def synth_histogram(
    model: CorrelationCurve,
    total_counts: float,
    bin_width: float,
    seed: int,
) -> CoincidenceHistogram:
    """Draw Poisson counts whose per-bin means follow the model curve.

    Means are proportional to the model integrated across each bin and
    scaled so they sum to ``total_counts``; the realised sum fluctuates
    around that.  Bins tile the model grid span.  Sampling is a single
    vectorised Poisson draw from a generator seeded with ``seed``, so equal
    seeds give identical histograms.
    """
    if np.any(model.values < 0):
        raise ValidationError("model curve must be nonnegative for sampling")
    if bin_width < model.spacing * (1.0 - 1e-9):
        raise ValidationError("bin_width must be at least the model grid spacing")
    if total_counts <= 0:
        raise ValidationError("total_counts must be positive")
    n_bins = int(math.floor(model.span / bin_width + 1e-9))
    if n_bins < 1:
        raise ValidationError("grid span shorter than one bin")
    start = model.tau[0]
    edges = start + bin_width * np.arange(n_bins + 1)
    # Integrate the curve across each bin from its cumulative integral.
    cumulative = np.concatenate(
        [[0.0], np.cumsum((model.values[1:] + model.values[:-1]) / 2.0 * model.spacing)]
    )
    cum_at = np.interp(edges, model.tau, cumulative)
    per_bin = np.diff(cum_at)
    total_weight = per_bin.sum()
    if total_weight <= 0:
        raise ValidationError("model integrates to zero over the grid")
    means = per_bin * (total_counts / total_weight)
    rng = np.random.default_rng(seed)
    counts = rng.poisson(means)
    return CoincidenceHistogram(
        bin_edges=edges,
        counts=counts,
        total_counts=int(counts.sum()),
        normalization="raw",
        seed=seed,
    )


def histogram_to_curve(
    hist: CoincidenceHistogram,
    asymptote_counts: float,
    regime: CurveRegime = CurveRegime.CW,
) -> tuple[CorrelationCurve, np.ndarray]:
    """Normalise a histogram by its asymptotic counts-per-bin level.

    Returns the normalised curve plus per-bin Poisson sigmas on the same
    scale.  ``asymptote_counts`` is the mean counts per bin where the
    correlation equals one (typically from a fit); for pulsed data use the
    far-peak height instead.
    """
    if asymptote_counts <= 0:
        raise ValidationError("asymptote_counts must be positive")
    values = hist.counts / asymptote_counts
    sigma = np.sqrt(np.maximum(hist.counts, 1.0)) / asymptote_counts
    curve = CorrelationCurve(
        tau=hist.bin_centers,
        values=values,
        regime=regime,
        labels={"normalized_by": asymptote_counts},
    )
    return curve, sigma


def power_broadened_linewidth(gamma2: float, s) -> float | np.ndarray:
    """FWHM linewidth in Hz: (gamma2 / pi) sqrt(1 + S), gamma2 in rad/s."""
    if gamma2 <= 0:
        raise ValidationError("gamma2 must be positive")
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValidationError("saturation parameter must be nonnegative")
    out = gamma2 / np.pi * np.sqrt(1.0 + s)
    return float(out) if out.ndim == 0 else out


def saturation_rate(r_inf: float, s) -> float | np.ndarray:
    """Detected count rate R_inf * S / (1 + S)."""
    if r_inf < 0:
        raise ValidationError("r_inf must be nonnegative")
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValidationError("saturation parameter must be nonnegative")
    out = r_inf * s / (1.0 + s)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Emission spectrum and filtering.


@dataclass(frozen=True)
class SpectralLine:
    """A Lorentzian component: centre and FWHM in nm, fractional weight."""

    center_nm: float
    fwhm_nm: float
    weight: float

    def __post_init__(self):
        if self.fwhm_nm <= 0:
            raise ValidationError("line width must be positive")
        if self.weight < 0:
            raise ValidationError("line weight must be nonnegative")

    def band_fraction(self, lo: float, hi: float) -> float:
        """Fraction of the line's area inside [lo, hi] (closed form)."""
        hw = self.fwhm_nm / 2.0
        return (math.atan((hi - self.center_nm) / hw)
                - math.atan((lo - self.center_nm) / hw)) / math.pi


@dataclass(frozen=True)
class SpectrumModel:
    """Lorentzian ZPL plus a Poissonian-weighted phonon sideband and vibronic lines.

    The sideband is a ladder of lines red-shifted from the ZPL at multiples
    of ``mode_spacing_nm`` with Poissonian weights of mean ``poisson_mean``,
    carrying total weight ``sideband_weight``.  All component weights must
    sum to one.
    """

    zpl: SpectralLine
    sideband_weight: float = 0.0
    poisson_mean: float = 1.0
    mode_spacing_nm: float = 1.0
    sideband_fwhm_nm: float = 0.5
    n_sideband_lines: int = 8
    vibronic_lines: tuple = ()

    def __post_init__(self):
        total = self.zpl.weight + self.sideband_weight + sum(
            line.weight for line in self.vibronic_lines
        )
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(f"component weights sum to {total}, expected 1")
        if self.sideband_weight > 0 and self.mode_spacing_nm <= 0:
            raise ValidationError("mode spacing must be positive")

    def components(self) -> list[SpectralLine]:
        lines = [self.zpl]
        if self.sideband_weight > 0:
            ks = np.arange(1, self.n_sideband_lines + 1)
            pmf = np.exp(-self.poisson_mean) * self.poisson_mean**ks / np.array(
                [math.factorial(int(k)) for k in ks]
            )
            pmf = pmf / pmf.sum() * self.sideband_weight
            for k, w in zip(ks, pmf):
                lines.append(
                    SpectralLine(
                        center_nm=self.zpl.center_nm + k * self.mode_spacing_nm,
                        fwhm_nm=self.sideband_fwhm_nm,
                        weight=float(w),
                    )
                )
        lines.extend(self.vibronic_lines)
        return lines


@dataclass(frozen=True)
class FilterModel:
    """Bandpass (reflective notch) filter or a tabulated transmission curve."""

    shape: str = "notch"
    center_nm: float | None = None
    width_nm: float = 0.15
    depth: float = 1.0
    wavelength_nm: np.ndarray | None = None
    transmission: np.ndarray | None = None

    def __post_init__(self):
        if self.shape == "notch":
            if self.center_nm is None:
                raise ValidationError("notch filter needs a center wavelength")
            if self.width_nm <= 0:
                raise ValidationError("filter width must be positive")
            if not 0.0 <= self.depth <= 1.0:
                raise ValidationError("transmission depth must lie in [0, 1]")
        elif self.shape == "tabulated":
            if self.wavelength_nm is None or self.transmission is None:
                raise ValidationError("tabulated filter needs wavelength and transmission")
            t = np.asarray(self.transmission, dtype=float)
            if np.any(t < 0) or np.any(t > 1):
                raise ValidationError("transmission must lie in [0, 1]")
        else:
            raise ValidationError(f"unknown filter shape '{self.shape}'")

    def transmitted_fraction(self, line: SpectralLine) -> float:
        """Fraction of a Lorentzian line's power passing the filter."""
        if self.shape == "notch":
            lo = self.center_nm - self.width_nm / 2.0
            hi = self.center_nm + self.width_nm / 2.0
            return self.depth * line.band_fraction(lo, hi)
        wl = np.asarray(self.wavelength_nm, dtype=float)
        tr = np.asarray(self.transmission, dtype=float)
        hw = line.fwhm_nm / 2.0

        def integrand(lam):
            t = np.interp(lam, wl, tr, left=0.0, right=0.0)
            return t * hw / math.pi / ((lam - line.center_nm) ** 2 + hw**2)

        lo, hi = wl[0], wl[-1]
        pts = [line.center_nm] if lo < line.center_nm < hi else None
        val, _ = quad(integrand, lo, hi, points=pts, limit=200)
        return float(val)


@dataclass(frozen=True)
class CoherentFraction:
    alpha: float
    alpha_squared: float


def coherent_fraction(spectrum: SpectrumModel, filt: FilterModel) -> CoherentFraction:
    """Ratio of transmitted ZPL power to total transmitted power.

    alpha feeds the indistinguishability budget through alpha^2, the
    probability that both interfering photons are ZPL photons.
    """
    lines = spectrum.components()
    transmitted = [line.weight * filt.transmitted_fraction(line) for line in lines]
    total = sum(transmitted)
    if total <= 0:
        raise ExtractionError("filter transmits no power from the spectrum")
    alpha = transmitted[0] / total
    return CoherentFraction(alpha=alpha, alpha_squared=alpha**2)
