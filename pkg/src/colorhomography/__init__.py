"""Shading-independent color correction via color homographies."""
from .chart_io import DeltaEStats, PatchRecord, evaluate, load_patches, remove_shading, write_patches
from .colorimetry import (
    D65,
    WhitePoint,
    delta_e,
    luminance_align,
    rgi_matrix,
    to_chromaticity,
    xyz_to_lab,
    xyz_to_luv,
)
from .estimators import (
    AlternatingLeastSquaresCorrection,
    LeastSquaresCorrection,
    RansacHomographyCorrection,
    make_corrector,
)
from .exceptions import (
    ColorHomographyError,
    DegenerateSample,
    InvalidWhitePoint,
    PointAtInfinity,
    SingularMatrix,
    DegenerateConfiguration,
    InsufficientPoints,
    RankDeficient,
    NoValidSample,
    ParseError,
    MissingColumn,
    MissingGrayReference,
)
from .homography import (
    apply_homography,
    chroma_homography_to_rgb_map,
    normalize,
    rgb_map_to_chroma_homography,
    solve_dlt,
)
from .solvers import (
    AlsConfig,
    FitResult,
    RansacConfig,
    apply_correction,
    ransac_residual,
    solve_als,
    solve_diagonal,
    solve_least_squares,
    solve_ransac,
)
from .synthdata import SynthConfig, SynthInstance, generate

__version__ = "0.1.0"

__all__ = [
    "AlsConfig",
    "AlternatingLeastSquaresCorrection",
    "ColorHomographyError",
    "D65",
    "DegenerateConfiguration",
    "DegenerateSample",
    "DeltaEStats",
    "FitResult",
    "InsufficientPoints",
    "InvalidWhitePoint",
    "LeastSquaresCorrection",
    "MissingColumn",
    "MissingGrayReference",
    "NoValidSample",
    "ParseError",
    "PatchRecord",
    "PointAtInfinity",
    "RankDeficient",
    "RansacConfig",
    "RansacHomographyCorrection",
    "SingularMatrix",
    "SynthConfig",
    "SynthInstance",
    "WhitePoint",
    "apply_correction",
    "apply_homography",
    "chroma_homography_to_rgb_map",
    "delta_e",
    "evaluate",
    "generate",
    "load_patches",
    "luminance_align",
    "make_corrector",
    "normalize",
    "ransac_residual",
    "remove_shading",
    "rgb_map_to_chroma_homography",
    "rgi_matrix",
    "solve_als",
    "solve_diagonal",
    "solve_dlt",
    "solve_least_squares",
    "solve_ransac",
    "to_chromaticity",
    "write_patches",
    "xyz_to_lab",
    "xyz_to_luv",
]
