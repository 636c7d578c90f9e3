"""
Capture files: '#'-prefixed header lines carrying the sampling metadata and
channel labels, then one comma-separated row per sample instant.
A JSON sidecar (<path>.meta.json) may supply the metadata instead.
"""
from __future__ import annotations

import io
import json
import logging
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import pandas as pd

from .errors import CaptureParseError
from .waveform import SamplingSpec, Waveform, WaveformSet, default_unit

logger = logging.getLogger(__name__)

DELIMITER = ","
FLOAT_FORMAT = "%.17g"
SIDECAR_SUFFIX = ".meta.json"


def sidecar_path(path: str | Path) -> Path:
    p = Path(path)
    return p.with_name(p.name + SIDECAR_SUFFIX)


def save_capture(capture: WaveformSet, path: str | Path) -> Path:
    """Write capture with header metadata; 17 significant digits, so floats round-trip."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    header = (
        f"# system_freq_hz={capture.spec.system_freq_hz!r}\n"
        f"# samples_per_cycle={capture.spec.samples_per_cycle}\n"
        f"# labels={','.join(capture.labels)}\n"
        f"# units={','.join(capture.units)}\n"
    )
    frame = pd.DataFrame(capture.as_matrix().T, columns=list(capture.labels))
    with p.open("w", encoding="utf-8", newline="") as fh:
        fh.write(header)
        frame.to_csv(fh, header=False, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return p


def _parse_header(lines: list[str]) -> dict[str, str]:
    meta: dict[str, str] = {}
    for line in lines:
        body = line.lstrip("#").strip()
        if "=" in body:
            key, value = body.split("=", 1)
            meta[key.strip()] = value.strip()
    return meta


def _read_sidecar(path: Path) -> dict[str, str]:
    side = sidecar_path(path)
    if not side.exists():
        return {}
    try:
        data = json.loads(side.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise CaptureParseError(f"sidecar {side.name} is not valid JSON: {e}") from e
    out: dict[str, str] = {}
    for key, value in data.items():
        out[key] = ",".join(value) if isinstance(value, list) else str(value)
    return out


def _sampling_from(meta: Mapping[str, str]) -> SamplingSpec:
    try:
        return SamplingSpec(
            system_freq_hz=float(meta["system_freq_hz"]),
            samples_per_cycle=int(meta["samples_per_cycle"]),
        )
    except KeyError as e:
        raise CaptureParseError(f"missing sampling metadata {e.args[0]!r} in header or sidecar") from e
    except ValueError as e:
        raise CaptureParseError(f"bad sampling metadata: {e}") from e


def _parse_column(raw: pd.Series) -> np.ndarray:
    """Correctly rounded parse; unparseable cells come back as NaN."""
    try:
        return raw.astype(float).to_numpy()
    except ValueError:
        # pd.to_numeric's fast path is not correctly rounded; used only to find the bad cell.
        coerced = pd.to_numeric(raw, errors="coerce").to_numpy(dtype=float)
        values = np.full(raw.shape[0], np.nan)
        for i, (cell, parsed) in enumerate(zip(raw, coerced)):
            if np.isnan(parsed):
                break
            values[i] = float(cell)
        return values


def load_capture(
    path: str | Path,
    column_map: Mapping[str, int] | None = None,
    spec: SamplingSpec | None = None,
) -> WaveformSet:
    """
    Read a capture file into a WaveformSet.
    column_map maps channel label -> 0-based column; default uses the header labels in order.
    Errors name the offending file line and column.
    """
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError as e:
        raise CaptureParseError(f"capture file not found: {p}") from e

    header_lines: list[str] = []
    data_lines: list[str] = []
    line_numbers: list[int] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.startswith("#"):
            header_lines.append(line)
        elif line.strip():
            data_lines.append(line)
            line_numbers.append(lineno)
    if not data_lines:
        raise CaptureParseError(f"{p.name}: no data rows")

    meta = {**_read_sidecar(p), **_parse_header(header_lines)}
    sampling = spec or _sampling_from(meta)

    # Ragged rows are reported before pandas pads or rejects them.
    n_fields = data_lines[0].count(DELIMITER) + 1
    for line, lineno in zip(data_lines, line_numbers):
        count = line.count(DELIMITER) + 1
        if count != n_fields:
            raise CaptureParseError(f"ragged row: expected {n_fields} fields, found {count}", row=lineno)

    header_labels = [l for l in meta.get("labels", "").split(",") if l]
    if column_map is None:
        labels = header_labels or [f"x{i}" for i in range(n_fields)]
        column_map = {label: i for i, label in enumerate(labels)}
    for label, col in column_map.items():
        if not 0 <= col < n_fields:
            raise CaptureParseError(f"missing column {col} (file has {n_fields})", column=label)

    frame = pd.read_csv(
        io.StringIO("\n".join(data_lines)),
        header=None,
        dtype=str,
        keep_default_na=False,
        skipinitialspace=True,
    )
    units_by_label = dict(zip(header_labels, meta.get("units", "").split(","))) if meta.get("units") else {}

    channels: list[Waveform] = []
    for label, col in column_map.items():
        raw = frame[col].str.strip()
        values = _parse_column(raw)
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            idx = int(bad[0])
            cell = raw.iloc[idx]
            kind = "non-finite value" if cell.lower().lstrip("+-") in ("nan", "inf", "infinity") else "non-numeric cell"
            raise CaptureParseError(f"{kind} {cell!r}", row=line_numbers[idx], column=label)
        unit = units_by_label.get(label) or default_unit(label)
        channels.append(Waveform(values, sampling, label, unit))

    capture = WaveformSet(tuple(channels))
    logger.debug("loaded %s: %d channels x %d samples", p.name, capture.n_channels, capture.n_samples)
    return capture


def write_sidecar(path: str | Path, spec: SamplingSpec, labels: list[str], extra: dict[str, Any] | None = None) -> Path:
    """Sidecar metadata for capture files written by other tools without a header."""
    side = sidecar_path(path)
    payload = {**spec.to_dict(), "labels": labels, **(extra or {})}
    side.write_text(json.dumps(payload, indent=2), encoding="utf-8")
    return side
