"""Seeded Mondrian-world charts with known map, shading, noise and outliers."""
import json
from dataclasses import asdict, dataclass, field
from typing import Tuple

import numpy as np

from .chart_io import PatchRecord

MAX_CONDITION = 20.0


@dataclass(frozen=True)
class SynthConfig:
    """Parameters of a synthetic chart.

    ``noise_sigma`` is the per-component Gaussian standard deviation added
    to each target row, as a fraction of that row's norm.  ``xyz_scale``
    converts the unit-range patches into the 0-100 range the Lab/Luv
    white point expects.
    """

    n_patches: int = 24
    seed: int = 0
    shading_range: Tuple[float, float] = (0.2, 1.0)
    noise_sigma: float = 0.0
    outlier_fraction: float = 0.0
    xyz_scale: float = 50.0

    def __post_init__(self):
        if int(self.n_patches) != self.n_patches or self.n_patches < 4:
            raise ValueError(f"n_patches must be an integer >= 4, got {self.n_patches}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed}")
        lo, hi = self.shading_range
        if not (0 < lo <= hi and np.isfinite(hi)):
            raise ValueError(f"shading_range must satisfy 0 < lo <= hi, got {self.shading_range}")
        if not (np.isfinite(self.noise_sigma) and self.noise_sigma >= 0):
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if not 0 <= self.outlier_fraction < 1:
            raise ValueError(f"outlier_fraction must be in [0, 1), got {self.outlier_fraction}")
        if not (np.isfinite(self.xyz_scale) and self.xyz_scale > 0):
            raise ValueError(f"xyz_scale must be > 0, got {self.xyz_scale}")


@dataclass
class SynthInstance:
    A: np.ndarray
    B: np.ndarray
    M_true: np.ndarray
    d_true: np.ndarray
    A_clean: np.ndarray
    B_clean: np.ndarray
    outlier_indices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    config: SynthConfig = None

    def to_records(self, include_gray=True):
        """Chart rows; the gray capture at patch i is ``d_true[i] * [1, 1, 1]``."""
        records = []
        for i in range(len(self.A)):
            gray = self.d_true[i] * np.ones(3) if include_gray else None
            records.append(PatchRecord(f"P{i + 1:02d}", self.A[i].copy(), self.B[i].copy(), gray))
        return records

    def truth(self):
        return {
            "M_true": self.M_true.tolist(),
            "d_true": self.d_true.tolist(),
            "outlier_indices": self.outlier_indices.tolist(),
            "config": asdict(self.config) if self.config is not None else None,
            "convention": "xyz = rgb * M_true; A = diag(d_true) * A_clean",
        }

    def truth_json(self):
        return json.dumps(self.truth(), indent=2) + "\n"


def _draw_map(rng, A_clean):
    # reject maps that would produce non-physical (non-positive) XYZ targets
    while True:
        M = np.eye(3) + rng.uniform(-0.3, 0.3, size=(3, 3))
        if np.linalg.cond(M) < MAX_CONDITION and np.all(A_clean @ M > 0):
            return M


def generate(cfg=None):
    """Draw a chart: ``B = A_clean @ M_true``, ``A = diag(s) @ A_clean``, then noise and outliers."""
    cfg = cfg or SynthConfig()
    rng = np.random.default_rng(cfg.seed)
    n = int(cfg.n_patches)
    A_clean = cfg.xyz_scale * rng.uniform(0.05, 1.0, size=(n, 3))
    M = _draw_map(rng, A_clean)
    s = rng.uniform(*cfg.shading_range, size=n)
    B_clean = A_clean @ M
    A = s[:, None] * A_clean

    B = B_clean.copy()
    if cfg.noise_sigma > 0:
        norms = np.linalg.norm(B, axis=1, keepdims=True)
        B = B + cfg.noise_sigma * norms * rng.standard_normal(size=B.shape)
    n_out = int(np.floor(cfg.outlier_fraction * n))
    outliers = np.sort(rng.choice(n, size=n_out, replace=False)) if n_out else np.zeros(0, dtype=int)
    if n_out:
        B[outliers] = rng.uniform(0.05, 1.0, size=(n_out, 3)) * B_clean.max()
    return SynthInstance(
        A=A,
        B=B,
        M_true=M,
        d_true=s,
        A_clean=A_clean,
        B_clean=B_clean,
        outlier_indices=outliers,
        config=cfg,
    )
