"""CSV and manifest output.

Columns are written in full double precision (shortest round-trip repr).
Files are written atomically: temp file in the target directory, then
rename, so readers never observe a partial file.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path


def atomic_write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _fmt(value) -> str:
    return repr(float(value))


def write_csv(path: str | Path, header: list[str], rows) -> Path:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if not isinstance(v, (int, str)) else str(v) for v in row))
    return atomic_write_text(path, "\n".join(lines) + "\n")


def write_lines_csv(path, line_rows) -> Path:
    """line_rows: iterable of (frequency_hz, weight, label)."""
    return write_csv(path, ["frequency_hz", "weight", "label"], line_rows)


def write_profile_csv(path, detunings, mz, mxy) -> Path:
    return write_csv(path, ["detuning_hz", "mz", "mxy"], zip(detunings, mz, mxy))


def write_sweep_csv(path, carriers, signal) -> Path:
    return write_csv(path, ["carrier_hz", "signal"], zip(carriers, signal))


def write_rabi_csv(path, times, signal) -> Path:
    return write_csv(path, ["time_s", "signal"], zip(times, signal))


def write_multiflip_csv(path, flip_index, selected, spectator) -> Path:
    return write_csv(
        path,
        ["flip", "selected_population", "spectator_population"],
        zip(flip_index, selected, spectator),
    )


def write_manifest(path, manifest: dict) -> Path:
    return atomic_write_text(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
