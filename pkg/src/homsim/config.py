"""Run configuration: a JSON document with explicit units.

Rates carry an explicit unit key, either ``MHz_over_2pi`` (the value is the
rate divided by 2 pi in MHz, the way linewidths are usually reported) or
``per_second`` (plain angular 1/s); times accept s/ms/us/ns/ps.  Validation
errors name the offending field path so the CLI can point at the exact key.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .correlations import DetectorIRF, InterferometerParams
from .emitters import ThreeLevelParams, TwoLevelParams
from .errors import ValidationError

RATE_UNITS = {
    "MHz_over_2pi": 2.0 * math.pi * 1e6,
    "per_second": 1.0,
}
TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9, "ps": 1e-12}


class ConfigError(ValidationError):
    """Configuration problem; carries the field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def _get(doc: dict, path: str, required: bool = True, default=None):
    node = doc
    walked = []
    for key in path.split("."):
        walked.append(key)
        if not isinstance(node, dict) or key not in node:
            if required:
                raise ConfigError(".".join(walked), "missing required field")
            return default
        node = node[key]
    return node


def parse_rate(doc: dict, path: str, required: bool = True, default=None) -> float | None:
    node = _get(doc, path, required=required)
    if node is None:
        return default
    if not isinstance(node, dict) or "value" not in node or "unit" not in node:
        raise ConfigError(path, "rates need {value, unit} with an explicit unit key")
    if node["unit"] not in RATE_UNITS:
        raise ConfigError(path, f"unknown rate unit '{node['unit']}' "
                                f"(use one of {sorted(RATE_UNITS)})")
    try:
        value = float(node["value"])
    except (TypeError, ValueError):
        raise ConfigError(path, "rate value must be a number") from None
    return value * RATE_UNITS[node["unit"]]


def parse_time(doc: dict, path: str, required: bool = True, default=None) -> float | None:
    node = _get(doc, path, required=required)
    if node is None:
        return default
    if not isinstance(node, dict) or "value" not in node or "unit" not in node:
        raise ConfigError(path, "times need {value, unit} with an explicit unit key")
    if node["unit"] not in TIME_UNITS:
        raise ConfigError(path, f"unknown time unit '{node['unit']}' "
                                f"(use one of {sorted(TIME_UNITS)})")
    try:
        value = float(node["value"])
    except (TypeError, ValueError):
        raise ConfigError(path, "time value must be a number") from None
    return value * TIME_UNITS[node["unit"]]


@dataclass(frozen=True)
class IdealInterferometer:
    """Interferometer reduced to its overlap factors (no delay structure)."""

    visibility: float = 1.0
    mode_overlap: float = 1.0
    mode_overlap_perp: float = 0.0


@dataclass(frozen=True)
class AcquisitionConfig:
    total_counts: float
    bin_width: float
    seed: int


@dataclass(frozen=True)
class PulsedConfig:
    rep_period: float
    n_side_peaks: int = 12
    delay_mismatch: float = 0.0


@dataclass(frozen=True)
class ExtractionConfig:
    window: float | None = None
    s_values: tuple = ()
    delay_mismatch_delta_tau: float | None = None
    sideband_dw: float | None = None


@dataclass(frozen=True)
class FitConfig:
    model_family: str | None = None
    free: dict = field(default_factory=dict)
    protocol: str = "joint"


@dataclass(frozen=True)
class RunConfig:
    regime: str
    emitter: TwoLevelParams | ThreeLevelParams
    interferometer: InterferometerParams | IdealInterferometer
    detector: DetectorIRF | None = None
    acquisition: AcquisitionConfig | None = None
    pulsed: PulsedConfig | None = None
    extraction: ExtractionConfig = ExtractionConfig()
    fit: FitConfig = FitConfig()
    grid_points: int = 4001
    grid_window: float | None = None
    raw: dict = field(default_factory=dict)

    def emitter_with_s(self, s: float) -> TwoLevelParams | ThreeLevelParams:
        if isinstance(self.emitter, TwoLevelParams):
            return TwoLevelParams(
                gamma1=self.emitter.gamma1, gamma_pd=self.emitter.gamma_pd, s=s
            )
        return ThreeLevelParams(
            gamma1=self.emitter.gamma1, beta=self.emitter.beta,
            gamma_pd=self.emitter.gamma_pd, s=s,
        )

    def default_window(self, s: float) -> float:
        """Half-width +-20/(G1(1+S)) bounding cw truncation error below 1e-8."""
        return 20.0 / (self.emitter.gamma1 * (1.0 + s))


def _parse_emitter(doc: dict) -> TwoLevelParams | ThreeLevelParams:
    model = _get(doc, "emitter.model", required=False, default="two_level")
    gamma1 = parse_rate(doc, "emitter.gamma1")
    gamma_pd = parse_rate(doc, "emitter.gamma_pd", required=False, default=0.0)
    s = _get(doc, "emitter.s", required=False, default=0.0)
    try:
        if model == "two_level":
            return TwoLevelParams(gamma1=gamma1, gamma_pd=gamma_pd, s=float(s))
        if model == "three_level":
            beta = parse_rate(doc, "emitter.beta")
            return ThreeLevelParams(
                gamma1=gamma1, beta=beta, gamma_pd=gamma_pd, s=float(s)
            )
    except ValidationError as exc:
        raise ConfigError("emitter", str(exc)) from None
    raise ConfigError("emitter.model", f"unknown emitter model '{model}'")


def _parse_interferometer(doc: dict) -> InterferometerParams | IdealInterferometer:
    node = _get(doc, "interferometer", required=False)
    if node is None:
        return IdealInterferometer()
    common = {
        "visibility": float(node.get("visibility", 1.0)),
        "mode_overlap": float(node.get("mode_overlap", 1.0)),
        "mode_overlap_perp": float(node.get("mode_overlap_perp", 0.0)),
    }
    try:
        if "delay" not in node:
            ideal = IdealInterferometer(**common)
            for key in ("r0sq", "t0sq", "r1sq", "t1sq"):
                if key in node:
                    raise ConfigError(
                        "interferometer", "splitter coefficients need a delay as well"
                    )
            return ideal
        delay = parse_time(doc, "interferometer.delay")
        return InterferometerParams(
            delay=delay,
            r0sq=float(node.get("r0sq", 0.5)),
            t0sq=float(node.get("t0sq", 1.0 - float(node.get("r0sq", 0.5)))),
            r1sq=float(node.get("r1sq", 0.5)),
            t1sq=float(node.get("t1sq", 1.0 - float(node.get("r1sq", 0.5)))),
            **common,
        )
    except ValidationError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("interferometer", str(exc)) from None


def _parse_detector(doc: dict) -> DetectorIRF | None:
    node = _get(doc, "detector", required=False)
    if node is None:
        return None
    shape = node.get("shape", "gaussian")
    if shape != "gaussian":
        raise ConfigError("detector.shape", "only gaussian IRFs are configurable here")
    sigma = parse_time(doc, "detector.sigma")
    try:
        return DetectorIRF(shape="gaussian", sigma=sigma)
    except ValidationError as exc:
        raise ConfigError("detector", str(exc)) from None


def _parse_acquisition(doc: dict) -> AcquisitionConfig | None:
    node = _get(doc, "acquisition", required=False)
    if node is None:
        return None
    total = _get(doc, "acquisition.total_counts")
    bin_width = parse_time(doc, "acquisition.bin_width")
    seed = _get(doc, "acquisition.seed", required=False, default=0)
    if not isinstance(seed, int):
        raise ConfigError("acquisition.seed", "seed must be an integer")
    if float(total) <= 0:
        raise ConfigError("acquisition.total_counts", "must be positive")
    return AcquisitionConfig(total_counts=float(total), bin_width=bin_width, seed=seed)


def _parse_pulsed(doc: dict, regime: str) -> PulsedConfig | None:
    node = _get(doc, "pulsed", required=False)
    if node is None:
        if regime == "pulsed":
            raise ConfigError("pulsed.rep_period", "missing required field")
        return None
    rep = parse_time(doc, "pulsed.rep_period")
    n_side = node.get("n_side_peaks", 12)
    if not isinstance(n_side, int) or n_side < 0:
        raise ConfigError("pulsed.n_side_peaks", "must be a nonnegative integer")
    mismatch = parse_time(doc, "pulsed.delay_mismatch", required=False, default=0.0)
    return PulsedConfig(rep_period=rep, n_side_peaks=n_side, delay_mismatch=mismatch)


def _parse_extraction(doc: dict) -> ExtractionConfig:
    node = _get(doc, "extraction", required=False)
    if node is None:
        return ExtractionConfig()
    window = parse_time(doc, "extraction.window", required=False)
    s_values = node.get("s_values", [])
    if not isinstance(s_values, list) or any(
        not isinstance(v, (int, float)) or v < 0 for v in s_values
    ):
        raise ConfigError("extraction.s_values", "must be a list of nonnegative numbers")
    corrections = node.get("corrections", {})
    delta_tau = None
    dw = None
    if "delay_mismatch" in corrections:
        delta_tau = parse_time(doc, "extraction.corrections.delay_mismatch.delta_tau")
    if "sideband" in corrections:
        dw = corrections["sideband"].get("dw")
        if not isinstance(dw, (int, float)) or not 0.0 < dw <= 1.0:
            raise ConfigError("extraction.corrections.sideband.dw", "must lie in (0, 1]")
    return ExtractionConfig(
        window=window,
        s_values=tuple(float(v) for v in s_values),
        delay_mismatch_delta_tau=delta_tau,
        sideband_dw=dw,
    )


def _parse_fit(doc: dict) -> FitConfig:
    node = _get(doc, "fit", required=False)
    if node is None:
        return FitConfig()
    free = node.get("free", {})
    if not isinstance(free, dict):
        raise ConfigError("fit.free", "must map parameter names to initial guesses")
    protocol = node.get("protocol", "joint")
    if protocol not in ("joint", "staged"):
        raise ConfigError("fit.protocol", f"unknown protocol '{protocol}'")
    return FitConfig(
        model_family=node.get("model_family"),
        free={str(k): v for k, v in free.items()},
        protocol=protocol,
    )


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("<document>", f"invalid JSON: {exc}") from None
    return parse_config(doc)


def parse_config(doc: dict) -> RunConfig:
    regime = _get(doc, "regime")
    if regime not in ("cw", "pulsed", "hbt"):
        raise ConfigError("regime", f"unknown regime '{regime}'")
    grid = _get(doc, "grid", required=False, default={})
    points = grid.get("points", 4001) if isinstance(grid, dict) else 4001
    if not isinstance(points, int) or points < 3:
        raise ConfigError("grid.points", "must be an integer >= 3")
    window = parse_time(doc, "grid.window", required=False)
    return RunConfig(
        regime=regime,
        emitter=_parse_emitter(doc),
        interferometer=_parse_interferometer(doc),
        detector=_parse_detector(doc),
        acquisition=_parse_acquisition(doc),
        pulsed=_parse_pulsed(doc, regime),
        extraction=_parse_extraction(doc),
        fit=_parse_fit(doc),
        grid_points=points,
        grid_window=window,
        raw=doc,
    )
