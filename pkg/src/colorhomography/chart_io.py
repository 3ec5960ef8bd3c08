"""Chart CSV ingestion, gray-chart shading removal, and ΔE statistics.

Patch CSV layout::

    # comment lines start with '#'
    patch_id,R,G,B[,X,Y,Z][,grayR,grayG,grayB][,X_<method>,Y_<method>,Z_<method>...]

The trailing ``X_<method>`` groups hold corrected XYZs written by
``apply``; each method's group is evaluated separately.
"""
import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from .colorimetry import D65, delta_e, xyz_to_lab, xyz_to_luv
from .exceptions import DegenerateSample, MissingColumn, MissingGrayReference, ParseError

RGB_COLUMNS = ("R", "G", "B")
XYZ_COLUMNS = ("X", "Y", "Z")
GRAY_COLUMNS = ("grayR", "grayG", "grayB")
STATS_HEADER = ("method", "space", "mean", "median", "q95", "max")
SPACES = {"lab": "Lab", "luv": "Luv"}


@dataclass
class PatchRecord:
    patch_id: str
    rgb: np.ndarray
    xyz: Optional[np.ndarray] = None
    gray_rgb: Optional[np.ndarray] = None
    corrected: Dict[str, np.ndarray] = field(default_factory=dict)


@dataclass(frozen=True)
class DeltaEStats:
    mean: float
    median: float
    q95: float
    max: float
    space: str

    def as_row(self, method):
        return [method, self.space] + [f"{v:.2f}" for v in (self.mean, self.median, self.q95, self.max)]


def _open_text(source):
    if isinstance(source, (str, Path)):
        return open(source, newline="", encoding="utf-8")
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode("utf-8"), newline="")
    if isinstance(source, io.RawIOBase) or isinstance(source, io.BufferedIOBase):
        return io.TextIOWrapper(source, encoding="utf-8", newline="")
    return source


def _corrected_methods(header):
    methods = []
    for name in header:
        if name.startswith("X_"):
            method = name[2:]
            if f"Y_{method}" in header and f"Z_{method}" in header:
                methods.append(method)
    return methods


def _group(header, cols, required=False):
    present = [c in header for c in cols]
    if all(present):
        return [header.index(c) for c in cols]
    if any(present) or required:
        missing = [c for c, p in zip(cols, present) if not p]
        raise MissingColumn(f"missing column(s): {', '.join(missing)}")
    return None


def load_patches(source):
    """Parse a patch CSV from a path, bytes, or a text/binary stream.

    Raises
    ------
    ParseError
        Malformed rows; carries the 1-based line number.
    MissingColumn
        Required columns absent, or an optional group only partly present.
    """
    handle = _open_text(source)
    close = handle is not source
    try:
        rows = [(lineno, row) for lineno, row in enumerate(csv.reader(handle), start=1)]
    finally:
        if close:
            handle.close()

    rows = [(ln, r) for ln, r in rows if r and not r[0].lstrip().startswith("#") and any(c.strip() for c in r)]
    if not rows:
        raise ParseError("no header row found")
    header_line, header = rows[0]
    header = [h.strip() for h in header]
    if "patch_id" not in header:
        raise MissingColumn("missing column(s): patch_id")
    pid = header.index("patch_id")
    rgb_idx = _group(header, RGB_COLUMNS, required=True)
    xyz_idx = _group(header, XYZ_COLUMNS)
    gray_idx = _group(header, GRAY_COLUMNS)
    methods = _corrected_methods(header)
    corr_idx = {m: [header.index(f"{c}_{m}") for c in XYZ_COLUMNS] for m in methods}

    def floats(lineno, row, idx):
        try:
            vals = np.array([float(row[i]) for i in idx])
        except ValueError:
            raise ParseError(f"non-numeric value in {[row[i] for i in idx]}", lineno) from None
        if not np.all(np.isfinite(vals)):
            raise ParseError("non-finite value", lineno)
        return vals

    records = []
    for lineno, row in rows[1:]:
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", lineno)
        rec = PatchRecord(row[pid].strip(), floats(lineno, row, rgb_idx))
        if xyz_idx:
            rec.xyz = floats(lineno, row, xyz_idx)
        if gray_idx:
            rec.gray_rgb = floats(lineno, row, gray_idx)
            if rec.gray_rgb.sum() <= 0:
                raise ParseError("gray reference must have a positive sum", lineno)
        rec.corrected = {m: floats(lineno, row, idx) for m, idx in corr_idx.items()}
        records.append(rec)
    return records


def _fmt(v):
    return repr(float(v))


def write_patches(records, dest, comments=()):
    """Write records in the patch CSV layout. Values round-trip exactly."""
    has_xyz = any(r.xyz is not None for r in records)
    has_gray = any(r.gray_rgb is not None for r in records)
    methods = []
    for r in records:
        for m in r.corrected:
            if m not in methods:
                methods.append(m)
    header = ["patch_id", *RGB_COLUMNS]
    if has_xyz:
        header += XYZ_COLUMNS
    if has_gray:
        header += GRAY_COLUMNS
    for m in methods:
        header += [f"{c}_{m}" for c in XYZ_COLUMNS]

    out = io.StringIO()
    for line in comments:
        out.write(f"# {line}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for r in records:
        row = [r.patch_id, *map(_fmt, r.rgb)]
        if has_xyz:
            if r.xyz is None:
                raise MissingColumn(f"patch {r.patch_id} has no XYZ")
            row += map(_fmt, r.xyz)
        if has_gray:
            if r.gray_rgb is None:
                raise MissingGrayReference(f"patch {r.patch_id} has no gray reference")
            row += map(_fmt, r.gray_rgb)
        for m in methods:
            row += map(_fmt, r.corrected[m])
        writer.writerow(row)
    text = out.getvalue()
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text, encoding="utf-8")
    elif dest is not None:
        dest.write(text)
    return text


def stack(records, attr):
    values = [getattr(r, attr) for r in records]
    if any(v is None for v in values):
        raise MissingColumn(f"not every record has {attr}")
    return np.array(values, dtype=float).reshape(-1, 3)


def remove_shading(records):
    """Divide each RGB by its gray-capture brightness, keeping the mean brightness.

    Brightness is the component sum of the gray capture at the same chart
    position.  The output is rescaled by the mean gray brightness so values
    stay in the input range.
    """
    if not records:
        return np.zeros((0, 3))
    if any(r.gray_rgb is None for r in records):
        raise MissingGrayReference("every patch needs a gray reference to remove shading")
    rgb = stack(records, "rgb")
    brightness = stack(records, "gray_rgb").sum(axis=1)
    if np.any(~np.isfinite(brightness) | (brightness <= 0)):
        raise DegenerateSample("gray reference brightness must be positive")
    return rgb * (brightness.mean() / brightness)[:, None]


def _quantile(values, q):
    return float(np.quantile(values, q, method="linear"))


def delta_e_rows(corrected, reference, white=D65, space="lab"):
    key = space.lower()
    if key not in SPACES:
        raise ValueError(f"space must be 'lab' or 'luv', got {space!r}")
    convert = xyz_to_lab if key == "lab" else xyz_to_luv
    corrected = np.asarray(corrected, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if corrected.shape != reference.shape:
        raise ValueError(f"row count mismatch: {corrected.shape} vs {reference.shape}")
    return delta_e(convert(corrected, white), convert(reference, white))


def evaluate(corrected, reference, white=D65, space="lab"):
    """Mean, median, 95% quantile (linear interpolation) and max of per-row ΔE."""
    de = delta_e_rows(corrected, reference, white, space)
    if de.size == 0:
        raise ValueError("cannot evaluate an empty chart")
    return DeltaEStats(
        mean=float(de.mean()),
        median=_quantile(de, 0.5),
        q95=_quantile(de, 0.95),
        max=float(de.max()),
        space=SPACES[space.lower()],
    )


def format_stats(rows):
    """CSV text for ``[(method, DeltaEStats), ...]`` with 2-decimal values."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(STATS_HEADER)
    for method, stats in rows:
        writer.writerow(stats.as_row(method))
    return out.getvalue()
