"""Color representations: RGI rays, chromaticities, CIE L*a*b* / L*u*v*, and ΔE.

All functions operate on arrays whose last axis holds the three components,
so a single triple and an ``(n, 3)`` table go through the same code path.
Matrices follow the row-vector convention ``out = triple @ matrix``.
"""
from typing import NamedTuple

import numpy as np

from .exceptions import DegenerateSample, InvalidWhitePoint

# (6/29)^3 and the slope/offset of the linear toe of the CIE lightness curve
_EPSILON = (6.0 / 29.0) ** 3
_KAPPA = (29.0 / 3.0) ** 3

_RGI = np.array(
    [
        [1.0, 0.0, 1.0],
        [0.0, 1.0, 1.0],
        [0.0, 0.0, 1.0],
    ]
)
_RGI.setflags(write=False)


class WhitePoint(NamedTuple):
    """Reference white in XYZ, conventionally with ``Yn = 100``."""

    Xn: float
    Yn: float
    Zn: float

    @classmethod
    def from_value(cls, value):
        """Build a white point from a name (``"d65"``), a triple, or a WhitePoint."""
        if isinstance(value, WhitePoint):
            return value.validated()
        if value is None:
            return D65
        if isinstance(value, str):
            key = value.strip().lower()
            if key in NAMED_WHITES:
                return NAMED_WHITES[key]
            try:
                parts = [float(p) for p in key.split(",")]
            except ValueError:
                raise InvalidWhitePoint(f"unknown white point {value!r}") from None
            value = parts
        arr = np.asarray(value, dtype=float).ravel()
        if arr.shape != (3,):
            raise InvalidWhitePoint(f"white point needs 3 components, got {arr.size}")
        return cls(*map(float, arr)).validated()

    def validated(self):
        arr = np.asarray(self, dtype=float)
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise InvalidWhitePoint(f"white point components must be finite and > 0, got {tuple(self)}")
        return self

    @property
    def uv_prime(self):
        denom = self.Xn + 15.0 * self.Yn + 3.0 * self.Zn
        return 4.0 * self.Xn / denom, 9.0 * self.Yn / denom


D65 = WhitePoint(95.047, 100.0, 108.883)
NAMED_WHITES = {"d65": D65}


def rgi_matrix():
    """Return the matrix taking ``[R, G, B]`` to ``[R, G, R+G+B]`` (row vectors)."""
    return _RGI.copy()


def to_rgi(triples):
    return np.asarray(triples, dtype=float) @ _RGI


def to_chromaticity(triples):
    """First two components divided by the component sum.

    Works for camera RGB (giving rg) and XYZ (giving xy) alike.

    Raises
    ------
    DegenerateSample
        If any triple has a non-positive or non-finite sum.
    """
    t = np.asarray(triples, dtype=float)
    if t.shape[-1] != 3:
        raise ValueError(f"expected trailing dimension 3, got shape {t.shape}")
    total = t.sum(axis=-1)
    bad = ~np.isfinite(total) | (total <= 0)
    if np.any(bad):
        raise DegenerateSample(f"{int(np.count_nonzero(bad))} sample(s) have no chromaticity (sum <= 0 or non-finite)")
    return t[..., :2] / total[..., None]


def chromaticity_to_ray(chroma):
    """Lift ``(p, q)`` to the XYZ-like ray ``[p, q, 1 - p - q]`` (unit sum)."""
    c = np.asarray(chroma, dtype=float)
    return np.concatenate([c, 1.0 - c.sum(axis=-1, keepdims=True)], axis=-1)


def _lightness(y_rel):
    return np.where(y_rel > _EPSILON, 116.0 * np.cbrt(y_rel) - 16.0, _KAPPA * y_rel)


def _f(t):
    return np.where(t > _EPSILON, np.cbrt(t), (_KAPPA * t + 16.0) / 116.0)


def _prepare(xyz, white):
    white = WhitePoint.from_value(white)
    t = np.asarray(xyz, dtype=float)
    if t.shape[-1] != 3:
        raise ValueError(f"expected trailing dimension 3, got shape {t.shape}")
    # CIE formulas are undefined for negative tristimulus values
    return np.clip(t, 0.0, None), white


def xyz_to_lab(xyz, white=D65):
    """CIE 1976 L*a*b*. Negative components are clamped to zero first."""
    t, white = _prepare(xyz, white)
    fx = _f(t[..., 0] / white.Xn)
    fy = _f(t[..., 1] / white.Yn)
    fz = _f(t[..., 2] / white.Zn)
    return np.stack([116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)], axis=-1)


def xyz_to_luv(xyz, white=D65):
    """CIE 1976 L*u*v*. Black (zero denominator) maps to ``(0, 0, 0)``."""
    t, white = _prepare(xyz, white)
    X, Y, Z = t[..., 0], t[..., 1], t[..., 2]
    L = _lightness(Y / white.Yn)
    denom = X + 15.0 * Y + 3.0 * Z
    safe = np.where(denom > 0, denom, 1.0)
    un, vn = white.uv_prime
    u = np.where(denom > 0, 13.0 * L * (4.0 * X / safe - un), 0.0)
    v = np.where(denom > 0, 13.0 * L * (9.0 * Y / safe - vn), 0.0)
    return np.stack([L, u, v], axis=-1)


def delta_e(x, y):
    """CIE ΔE*76: Euclidean distance between two colors in the same space."""
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    return np.sqrt(np.sum(diff * diff, axis=-1))


def luminance_align(candidate, reference):
    """Scale ``candidate`` so its Y matches ``reference``'s Y.

    Chromaticity of the candidate is unchanged. This is what makes a
    residual shading-free when the fitted color is only known up to scale.
    """
    cand = np.asarray(candidate, dtype=float)
    ref = np.asarray(reference, dtype=float)
    cy = cand[..., 1]
    if np.any(~np.isfinite(cy) | (cy <= 0)):
        raise DegenerateSample("candidate luminance must be positive")
    return cand * (ref[..., 1] / cy)[..., None]
