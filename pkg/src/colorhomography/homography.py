"""3x3 ray homographies between chromaticity planes.

Row-vector convention throughout: a chromaticity ``(p, q)`` is lifted to
``[p, q, 1]``, right-multiplied by ``H`` and dehomogenized.  Under this
convention a linear RGB map ``M`` (``rgb' = rgb @ M``) acts on rg
chromaticities through ``inv(C) @ M @ C`` with ``C = rgi_matrix()``.
"""
import numpy as np

from .colorimetry import rgi_matrix
from .exceptions import (
    DegenerateConfiguration,
    InsufficientPoints,
    PointAtInfinity,
    SingularMatrix,
)

INFINITY_TOL = 1e-12
SINGULAR_TOL = 1e-12
# ratio of the second-smallest to largest singular value of the DLT system
# below which the null space is treated as more than one-dimensional
RANK_TOL = 1e-9

_C = rgi_matrix()
_C_INV = np.linalg.inv(_C)


def _as_matrix(H):
    H = np.asarray(H, dtype=float)
    if H.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise ValueError("matrix has non-finite entries")
    return H


def is_singular(H):
    H = np.asarray(H, dtype=float)
    norm = np.linalg.norm(H, axis=(-2, -1))
    return ~(np.abs(np.linalg.det(H)) >= SINGULAR_TOL * norm**3)


def check_invertible(H):
    H = _as_matrix(H)
    if is_singular(H):
        raise SingularMatrix("matrix is singular (|det| below tolerance relative to norm^3)")
    return H


def normalize(H):
    """Canonical representative: unit Frobenius norm, largest-magnitude entry positive.

    Works on a single matrix or a stack ``(..., 3, 3)``.
    """
    H = np.asarray(H, dtype=float)
    flat = H.reshape(H.shape[:-2] + (9,))
    norm = np.linalg.norm(flat, axis=-1)
    if np.any(norm == 0) or not np.all(np.isfinite(norm)):
        raise SingularMatrix("cannot normalize a zero or non-finite matrix")
    pivot = np.take_along_axis(flat, np.argmax(np.abs(flat), axis=-1)[..., None], axis=-1)[..., 0]
    scale = np.sign(pivot) / norm
    return H * scale[..., None, None]


def homogeneous(chroma):
    c = np.asarray(chroma, dtype=float)
    return np.concatenate([c, np.ones(c.shape[:-1] + (1,))], axis=-1)


def _project(H, chroma):
    """Map without the infinity check; returns (mapped, third_component)."""
    h = homogeneous(chroma) @ H
    w = h[..., 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        return h[..., :2] / w[..., None], w


def apply_homography(H, chroma):
    """Map chromaticities ``(..., 2)`` through ``H``.

    Raises
    ------
    PointAtInfinity
        If a mapped third homogeneous component is below 1e-12 in magnitude.
    """
    H = _as_matrix(H)
    mapped, w = _project(H, chroma)
    if np.any(np.abs(w) < INFINITY_TOL):
        raise PointAtInfinity("chromaticity maps to the line at infinity")
    return mapped


def _hartley(points):
    """Similarity transforms (column form) moving each set to centroid 0, mean radius sqrt(2)."""
    centroid = points.mean(axis=-2)
    dist = np.linalg.norm(points - centroid[..., None, :], axis=-1).mean(axis=-1)
    with np.errstate(divide="ignore"):
        s = np.where(dist > 0, np.sqrt(2.0) / dist, np.nan)
    T = np.zeros(points.shape[:-2] + (3, 3))
    T[..., 0, 0] = s
    T[..., 1, 1] = s
    T[..., 0, 2] = -s * centroid[..., 0]
    T[..., 1, 2] = -s * centroid[..., 1]
    T[..., 2, 2] = 1.0
    return T, s


def dlt_batch(src, dst):
    """Normalized DLT on a stack of correspondence sets.

    Parameters
    ----------
    src, dst : ndarray, shape (T, k, 2)

    Returns
    -------
    H : ndarray, shape (T, 3, 3)
        Normalized row-convention homographies (garbage where ``ok`` is False).
    ok : ndarray of bool, shape (T,)
        False where the configuration is degenerate.
    """
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    n_sets = src.shape[0]
    Ts, s_src = _hartley(src)
    Td, s_dst = _hartley(dst)
    finite = np.isfinite(s_src) & np.isfinite(s_dst)
    Ts = np.where(finite[:, None, None], Ts, np.eye(3))
    Td = np.where(finite[:, None, None], Td, np.eye(3))
    ps = homogeneous(src) @ np.swapaxes(Ts, -1, -2)
    pd = homogeneous(dst) @ np.swapaxes(Td, -1, -2)

    x, y = ps[..., 0], ps[..., 1]
    u, v = pd[..., 0], pd[..., 1]
    zero = np.zeros_like(x)
    one = np.ones_like(x)
    rows_u = np.stack([-x, -y, -one, zero, zero, zero, u * x, u * y, u], axis=-1)
    rows_v = np.stack([zero, zero, zero, -x, -y, -one, v * x, v * y, v], axis=-1)
    design = np.concatenate([rows_u, rows_v], axis=1)

    _, sv, vt = np.linalg.svd(design, full_matrices=True)
    G_norm = vt[:, -1, :].reshape(n_sets, 3, 3)
    ok = finite & (sv[:, 7] > RANK_TOL * sv[:, 0]) & ~is_singular(G_norm)

    # undo the normalization: dst ~ inv(Td) G_norm Ts src (column form)
    G = np.linalg.solve(Td, G_norm @ Ts)
    H = np.swapaxes(G, -1, -2)
    good = ok & np.all(np.isfinite(H), axis=(-2, -1)) & (np.linalg.norm(H, axis=(-2, -1)) > 0)
    H = np.where(good[:, None, None], H, np.eye(3))
    return normalize(H), good


def solve_dlt(src, dst):
    """Estimate the homography taking ``src`` chromaticities to ``dst``.

    Parameters
    ----------
    src, dst : array_like, shape (n, 2), n >= 4

    Returns
    -------
    ndarray, shape (3, 3)
        Normalized homography in row convention.

    Raises
    ------
    InsufficientPoints
        Fewer than 4 correspondences.
    DegenerateConfiguration
        The design matrix is rank deficient or the solution is singular.
    """
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    if src.ndim != 2 or src.shape[1] != 2 or src.shape != dst.shape:
        raise ValueError(f"src and dst must both be (n, 2), got {src.shape} and {dst.shape}")
    if len(src) < 4:
        raise InsufficientPoints(f"need at least 4 correspondences, got {len(src)}")
    if not (np.all(np.isfinite(src)) and np.all(np.isfinite(dst))):
        raise ValueError("correspondences must be finite")
    H, ok = dlt_batch(src[None], dst[None])
    if not ok[0]:
        raise DegenerateConfiguration("correspondences do not determine a unique invertible homography")
    return H[0]


def rgb_map_to_chroma_homography(M):
    """The chromaticity homography induced by the RGB-ray map ``M``."""
    M = check_invertible(M)
    return normalize(_C_INV @ M @ _C)


def chroma_homography_to_rgb_map(H):
    """Inverse of :func:`rgb_map_to_chroma_homography`, up to scale."""
    H = check_invertible(H)
    return normalize(_C @ H @ _C_INV)
