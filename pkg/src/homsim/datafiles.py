"""CSV and JSON file formats with provenance headers and atomic writes.

Curves serialise as ``tau_s,value`` and histograms as ``tau_s,counts``
(UTF-8, LF newlines, '.' decimals), preceded by ``#`` comment lines carrying
the tool version, a config hash, and the seed.  Files are written to a
temporary name and renamed into place.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile

import numpy as np

from . import __version__
from .correlations import CorrelationCurve, CurveRegime
from .errors import ValidationError
from .experiment import CoincidenceHistogram

_FLOAT_FMT = "{:.12g}"


def sha256_of_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_of_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _provenance_lines(provenance: dict | None) -> list[str]:
    lines = [f"# homsim {__version__}"]
    for key, value in (provenance or {}).items():
        lines.append(f"# {key}: {value}")
    return lines


def write_curve_csv(path: str, curve: CorrelationCurve, provenance: dict | None = None) -> None:
    lines = _provenance_lines(provenance)
    lines.append(f"# regime: {curve.regime.value}")
    lines.append("tau_s,value")
    for t, v in zip(curve.tau, curve.values):
        lines.append(f"{_FLOAT_FMT.format(t)},{_FLOAT_FMT.format(v)}")
    _atomic_write(path, "\n".join(lines) + "\n")


def write_histogram_csv(
    path: str, hist: CoincidenceHistogram, provenance: dict | None = None
) -> None:
    lines = _provenance_lines(provenance)
    lines.append(f"# bin_width_s: {_FLOAT_FMT.format(hist.bin_width)}")
    if hist.seed is not None:
        lines.append(f"# seed: {hist.seed}")
    lines.append("tau_s,counts")
    for t, c in zip(hist.bin_centers, hist.counts):
        lines.append(f"{_FLOAT_FMT.format(t)},{int(c)}")
    _atomic_write(path, "\n".join(lines) + "\n")


def _read_rows(path: str, expected_header: str) -> tuple[list, dict]:
    rows = []
    meta = {}
    header_seen = False
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    key, _, value = body.partition(":")
                    meta[key.strip()] = value.strip()
                continue
            if not header_seen:
                if line != expected_header:
                    raise ValidationError(
                        f"{path}:{lineno}: expected header '{expected_header}', got '{line}'"
                    )
                header_seen = True
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValidationError(f"{path}:{lineno}: expected two comma-separated fields")
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from None
    if not header_seen:
        raise ValidationError(f"{path}: missing header '{expected_header}'")
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    return rows, meta


def read_curve_csv(path: str) -> CorrelationCurve:
    rows, meta = _read_rows(path, "tau_s,value")
    arr = np.asarray(rows, dtype=float)
    regime = CurveRegime(meta.get("regime", CurveRegime.CW.value))
    return CorrelationCurve(tau=arr[:, 0], values=arr[:, 1], regime=regime, labels=meta)


def read_histogram_csv(path: str) -> CoincidenceHistogram:
    rows, meta = _read_rows(path, "tau_s,counts")
    arr = np.asarray(rows, dtype=float)
    centers = arr[:, 0]
    counts = arr[:, 1]
    if np.any(counts < 0) or np.any(np.abs(counts - np.round(counts)) > 1e-9):
        raise ValidationError(f"{path}: counts must be nonnegative integers")
    if centers.size < 2:
        raise ValidationError(f"{path}: need at least two bins")
    width = centers[1] - centers[0]
    edges = np.concatenate([centers - width / 2.0, [centers[-1] + width / 2.0]])
    seed = meta.get("seed")
    return CoincidenceHistogram(
        bin_edges=edges,
        counts=counts.astype(np.int64),
        total_counts=int(counts.sum()),
        normalization="raw",
        seed=int(seed) if seed is not None else None,
    )


def write_json(path: str, payload: dict, provenance: dict | None = None) -> None:
    doc = dict(payload)
    doc["_provenance"] = {"tool": f"homsim {__version__}", **(provenance or {})}
    _atomic_write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")
