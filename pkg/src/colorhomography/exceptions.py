"""Exception hierarchy shared by every module in the package."""


class ColorHomographyError(Exception):
    """Base class for all package errors."""


class DegenerateSample(ColorHomographyError, ValueError):
    """A color sample has no chromaticity (non-positive or non-finite sum)."""


class InvalidWhitePoint(ColorHomographyError, ValueError):
    pass


class PointAtInfinity(ColorHomographyError, ArithmeticError):
    """A homography sent a chromaticity to the line at infinity."""


class SingularMatrix(ColorHomographyError, ValueError):
    pass


class DegenerateConfiguration(ColorHomographyError, ValueError):
    """The point configuration does not determine a unique homography."""


class InsufficientPoints(ColorHomographyError, ValueError):
    pass


class RankDeficient(ColorHomographyError, ValueError):
    pass


class NoValidSample(ColorHomographyError, RuntimeError):
    """Every RANSAC trial drew a degenerate minimal sample."""


class ParseError(ColorHomographyError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MissingColumn(ColorHomographyError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "missing column"


class MissingGrayReference(ColorHomographyError, ValueError):
    pass
