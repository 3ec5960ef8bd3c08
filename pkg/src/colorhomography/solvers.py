"""RGB -> XYZ correction solvers: least squares, ALS, and RANSAC color homography.

Every solver takes the source camera RGBs ``A`` and target XYZs ``B`` as
``(n, 3)`` arrays and returns a :class:`FitResult`.  The fitted matrix is
used as ``xyz = rgb @ result.matrix``.
"""
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .colorimetry import D65, WhitePoint, chromaticity_to_ray, to_chromaticity, xyz_to_luv
from .exceptions import (
    DegenerateSample,
    InsufficientPoints,
    NoValidSample,
    RankDeficient,
)
from .homography import (
    INFINITY_TOL,
    _project,
    chroma_homography_to_rgb_map,
    dlt_batch,
    normalize,
)
from .validation import check_correspondences, check_triples

# trials per vectorized RANSAC batch; results do not depend on it
_RANSAC_CHUNK = 256


@dataclass(frozen=True)
class AlsConfig:
    epsilon: float = 1e-10
    max_iters: int = 1000

    def __post_init__(self):
        if not (np.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ValueError(f"max_iters must be a positive integer, got {self.max_iters}")


@dataclass(frozen=True)
class RansacConfig:
    inlier_threshold: float = 2.0
    max_trials: int = 2000
    min_consensus_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.inlier_threshold) and self.inlier_threshold > 0):
            raise ValueError(f"inlier_threshold must be > 0, got {self.inlier_threshold}")
        if int(self.max_trials) != self.max_trials or self.max_trials < 1:
            raise ValueError(f"max_trials must be a positive integer, got {self.max_trials}")
        if not 0 < self.min_consensus_fraction <= 1:
            raise ValueError(f"min_consensus_fraction must be in (0, 1], got {self.min_consensus_fraction}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an integer in [0, 2**64), got {self.seed}")


@dataclass
class FitResult:
    """Output of a correction solver.

    ``H_rgb`` is the normalized (unit Frobenius norm) RGB->XYZ map and
    ``gain`` restores its scale, so ``matrix = gain * H_rgb``.  For the
    shading-aware solvers the gain is chosen so the estimated relative
    shading ``1 / shading`` averages to one over the fitted rows.
    """

    method: str
    H_rgb: np.ndarray
    gain: float
    shading: Optional[np.ndarray] = None
    inliers: Optional[np.ndarray] = None
    residual_history: List[float] = field(default_factory=list)
    n_iter: int = 0
    converged: bool = True
    H_chroma: Optional[np.ndarray] = None
    residuals: Optional[np.ndarray] = None
    n_trials: int = 0

    @property
    def matrix(self):
        return self.gain * self.H_rgb


def _split_scale(H):
    """Return (normalized H, signed scale) with ``H == scale * normalized``."""
    Hn = normalize(H)
    return Hn, float(np.sum(H * Hn))


def apply_correction(H_rgb, rgbs):
    """Row-wise ``rgb @ H``. Negative outputs are kept as-is."""
    H = np.asarray(H_rgb, dtype=float)
    if H.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {H.shape}")
    X = np.asarray(rgbs, dtype=float)
    if X.shape[-1] != 3:
        raise ValueError(f"expected trailing dimension 3, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("input contains non-finite values")
    return X @ H


def _lstsq(A, B):
    H, _, rank, _ = np.linalg.lstsq(A, B, rcond=None)
    if rank < 3:
        raise RankDeficient(f"source matrix has rank {rank} < 3")
    return H


def solve_least_squares(A, B):
    """Plain least-squares map minimizing ``||A H - B||_F``, no shading model."""
    A, B = check_correspondences(A, B, positive_sum=False)
    H = _lstsq(A, B)
    Hn, gain = _split_scale(H)
    res = float(np.linalg.norm(A @ H - B))
    return FitResult(method="ls", H_rgb=Hn, gain=gain, residual_history=[res], n_iter=1)


def solve_diagonal(A, B):
    """Per-row scalar least squares: ``d_i = (a_i . b_i) / (a_i . a_i)``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    aa = np.einsum("ij,ij->i", A, A)
    if np.any(aa == 0):
        raise DegenerateSample("zero source row has no shading factor")
    return np.einsum("ij,ij->i", A, B) / aa


def solve_als(A, B, config=None):
    """Alternating least squares for ``diag(d) A H ~ B``.

    Each iteration fits the shading diagonal with the map held fixed, then
    the map with the shading held fixed, and replaces the working copy of
    ``A`` by the fitted product.  Per-iteration factors are accumulated:
    shading multiplicatively, maps in iteration order ``H1 @ H2 @ ...``.
    """
    config = config or AlsConfig()
    A, B = check_correspondences(A, B, positive_sum=False)
    if np.linalg.matrix_rank(A) < 3:
        raise RankDeficient("source matrix has rank < 3")

    current = A
    d_total = np.ones(len(A))
    H_total = np.eye(3)
    history = []
    converged = False
    for it in range(1, int(config.max_iters) + 1):
        d = solve_diagonal(current, B)
        shaded = d[:, None] * current
        H = _lstsq(shaded, B)
        nxt = shaded @ H
        history.append(float(np.linalg.norm(nxt - B)))
        d_total = d_total * d
        H_total = H_total @ H
        step = np.linalg.norm(nxt - current)
        current = nxt
        if step < config.epsilon:
            converged = True
            break

    with np.errstate(divide="ignore"):
        mean_shade = np.mean(1.0 / d_total)
    if np.isfinite(mean_shade) and mean_shade > 0:
        d_total = d_total * mean_shade
        H_total = H_total / mean_shade
    Hn, gain = _split_scale(H_total)
    return FitResult(
        method="als",
        H_rgb=Hn,
        gain=gain,
        shading=d_total,
        residual_history=history,
        n_iter=it,
        converged=converged,
    )


def _residuals_from_mapped(mapped, w, b_luv, b_y, white):
    """ΔE*uv between luminance-aligned fitted rays and the targets.

    ``mapped``/``w`` come from projecting source chromaticities, with any
    leading batch axes.  Points at infinity or with non-positive fitted
    luminance get an infinite residual.
    """
    ray = chromaticity_to_ray(mapped)
    ray_y = ray[..., 1]
    valid = (np.abs(w) >= INFINITY_TOL) & np.isfinite(ray_y) & (ray_y > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        fitted = ray * (b_y / np.where(valid, ray_y, 1.0))[..., None]
    de = np.sqrt(np.sum((xyz_to_luv(np.where(valid[..., None], fitted, 0.0), white) - b_luv) ** 2, axis=-1))
    return np.where(valid, de, np.inf)


def ransac_residual(H_chroma, a, b, white=D65):
    """Shading-free ΔE*uv of target ``b`` against source ``a`` mapped by ``H_chroma``.

    ``a``'s rg chromaticity is mapped to an xy chromaticity, lifted to an
    XYZ ray, scaled to ``b``'s luminance and compared in L*u*v*.  Accepts a
    single pair of triples or ``(n, 3)`` tables.
    """
    white = WhitePoint.from_value(white)
    H = np.asarray(H_chroma, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mapped, w = _project(H, to_chromaticity(a))
    res = _residuals_from_mapped(mapped, w, xyz_to_luv(b, white), b[..., 1], white)
    return float(res) if res.ndim == 0 else res


def _trial_sample(seed, trial, n):
    return np.random.default_rng([seed, trial]).choice(n, 4, replace=False)


def solve_ransac(A, B, config=None, white=D65):
    """RANSAC over minimal 4-correspondence chromaticity homographies.

    Trial ``t`` draws its sample from a generator seeded by ``(seed, t)``,
    so the outcome does not depend on how trials are batched.  Stops at the
    first trial whose consensus reaches ``min_consensus_fraction`` of the
    rows; otherwise keeps the largest consensus (ties: lower mean inlier
    residual, then lower trial index).  The winner is refit on all of its
    inliers.
    """
    config = config or RansacConfig()
    white = WhitePoint.from_value(white)
    A = check_triples(A, "A", positive_sum=True)
    B = check_triples(B, "B")
    if len(A) != len(B):
        raise ValueError(f"A and B row counts differ: {len(A)} vs {len(B)}")
    n = len(A)
    if n < 4:
        raise InsufficientPoints(f"RANSAC needs at least 4 correspondences, got {n}")
    B_ok = np.isfinite(B.sum(axis=1)) & (B.sum(axis=1) > 0)
    if not np.all(B_ok):
        raise DegenerateSample("every target row needs a positive sum to have a chromaticity")

    src = to_chromaticity(A)
    dst = to_chromaticity(B)
    src_h = np.concatenate([src, np.ones((n, 1))], axis=1)
    b_luv = xyz_to_luv(B, white)
    b_y = B[:, 1]
    needed = config.min_consensus_fraction * n
    seed = int(config.seed)

    best = None  # (count, mean_residual, trial, H, mask)
    trials_run = 0
    done = False
    for start in range(0, int(config.max_trials), _RANSAC_CHUNK):
        stop = min(start + _RANSAC_CHUNK, int(config.max_trials))
        idx = np.stack([_trial_sample(seed, t, n) for t in range(start, stop)])
        Hs, ok = dlt_batch(src[idx], dst[idx])
        h = np.einsum("nk,tkj->tnj", src_h, Hs)
        w = h[..., 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            mapped = h[..., :2] / w[..., None]
        res = _residuals_from_mapped(mapped, w, b_luv, b_y, white)
        masks = res < config.inlier_threshold
        counts = masks.sum(axis=1)
        with np.errstate(invalid="ignore"):
            means = np.where(counts > 0, np.where(masks, res, 0.0).sum(axis=1) / np.maximum(counts, 1), np.inf)
        for j, t in enumerate(range(start, stop)):
            trials_run = t + 1
            if not ok[j]:
                continue
            key = (-int(counts[j]), float(means[j]), t)
            if best is None or key < best[0]:
                best = (key, Hs[j], masks[j])
            if counts[j] >= needed:
                done = True
                break
        if done:
            break

    if best is None:
        raise NoValidSample(f"all {trials_run} RANSAC trials drew degenerate samples")

    _, H_best, mask = best
    if mask.sum() >= 4:
        H_refit, ok = dlt_batch(src[mask][None], dst[mask][None])
        if ok[0]:
            H_best = H_refit[0]
    inliers = np.flatnonzero(mask)
    residuals = ransac_residual(H_best, A, B, white)

    H_rgb = chroma_homography_to_rgb_map(H_best)
    gain = _homography_gain(H_rgb, A[inliers], B[inliers])
    return FitResult(
        method="ransac",
        H_rgb=H_rgb,
        gain=gain,
        inliers=inliers,
        n_iter=trials_run,
        n_trials=trials_run,
        converged=done,
        H_chroma=H_best,
        residuals=residuals,
    )


def _homography_gain(H_rgb, A, B):
    """Scale for a ray map so that estimated relative shading averages to one."""
    fitted = A @ H_rgb
    d = np.einsum("ij,ij->i", fitted, B) / np.einsum("ij,ij->i", fitted, fitted)
    good = np.isfinite(d) & (d > 0)
    if np.any(good):
        gain = 1.0 / np.mean(1.0 / d[good])
        if np.isfinite(gain) and gain > 0:
            return float(gain)
    # fall back to a single global least-squares scale
    return float(np.sum(fitted * B) / np.sum(fitted * fitted))
