"""Photon correlation and Hong-Ou-Mandel indistinguishability toolkit.

Simulates first- and second-order photon correlation functions of driven
two- and three-level emitters, models the unbalanced-interferometer
measurements used to characterise single-photon sources under pulsed and cw
excitation, and extracts the full photon-wavepacket indistinguishability
from either regime.
"""

__version__ = "0.1.0"

from .correlations import (
    CorrelationCurve,
    CurveRegime,
    DetectorIRF,
    InterferometerParams,
    Polarization,
    convolve_irf,
    cw_g2_analytic,
    cw_g2_numeric,
    hbt_g2_analytic,
    interferometer_g2_cw,
    interferometer_g2_pulsed,
    pulsed_g2,
)
from .emitters import (
    AdiabaticityReport,
    ThreeLevelParams,
    TwoLevelParams,
    adiabatic_validity,
    saturation_convert,
    three_level_liouvillian,
    two_level_liouvillian,
)
from .errors import (
    DegenerateDataError,
    ExtractionError,
    SteadyStateError,
    ValidationError,
)
from .experiment import (
    CoherentFraction,
    CoincidenceHistogram,
    FilterModel,
    SpectralLine,
    SpectrumModel,
    coherent_fraction,
    histogram_to_curve,
    power_broadened_linewidth,
    saturation_rate,
    synth_histogram,
)
from .fitting import (
    FitResult,
    fit_curve,
    fit_g2_dataset,
    fit_linewidth_vs_power,
    fit_lorentzian,
    fit_model_family,
    fit_saturation,
)
from .indistinguishability import (
    ExtractionMethod,
    IndistinguishabilityResult,
    SidebandSpec,
    cw_integral_extract,
    delay_mismatch_correction,
    extrapolate_to_zero,
    i_tilde_analytic,
    i_tilde_mismatched,
    i_tilde_sideband,
    pulsed_extract,
)
from .lindblad import (
    DensityMatrix,
    LiouvillianSpec,
    Superoperator,
    build_superoperator,
    propagate,
    steady_state,
    two_time_correlator,
)

__all__ = [name for name in dir() if not name.startswith("_")]
