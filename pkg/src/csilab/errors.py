"""Exception types shared across the package."""


class CsilabError(Exception):
    """Base class for all csilab errors."""


class ZeroChannel(CsilabError):
    """A channel matrix (or every candidate reference row) is identically zero."""

    def __init__(self, msg="zero channel matrix", subband=None):
        super().__init__(msg if subband is None else f"{msg} (subband {subband})")
        self.subband = subband


class DegenerateProjection(CsilabError):
    """Reference vector is (numerically) orthogonal to the dominant eigenspace."""


class BenchmarkAmbiguous(CsilabError):
    """Benchmark row/column sum vector has a non-unique maximum."""


class RangeViolation(CsilabError):
    """Quantizer input outside the [0, 1] contract."""


class DimensionMismatch(CsilabError):
    """Tensor shape inconsistent with the model or configuration."""


class ZeroRow(CsilabError):
    """SGCS received a matrix with an all-zero row."""


class ConstantInput(CsilabError):
    """Pearson correlation received a constant magnitude field."""


class EmptyInput(CsilabError):
    """An operation received an empty sample collection."""


class NonFiniteLoss(CsilabError):
    """Training loss became NaN/Inf; carries diagnostics."""

    def __init__(self, msg, epoch=None, step=None):
        super().__init__(msg)
        self.epoch = epoch
        self.step = step


class VersionMismatch(CsilabError):
    """File format version or configuration hash does not match expectations."""


class CorruptRecord(CsilabError):
    """Dataset/checkpoint file is truncated or structurally invalid."""
