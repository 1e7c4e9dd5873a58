"""Exception hierarchy shared across the package.

Each class names one contract violation so callers can catch precisely
what they can recover from.
"""


class UmclustError(Exception):
    """Base class for all package errors."""


# --- numerics ---

class NormZero(UmclustError):
    """L2 normalization of a zero-norm vector (degenerate embedding)."""


class DimMismatch(UmclustError):
    """Operands have incompatible dimensions."""


class GradNonFinite(UmclustError):
    """A gradient check produced NaN or infinite gradients."""


# --- data io ---

class BadContainer(UmclustError):
    """Feature container has a bad magic/version or truncated payload."""


class CountMismatch(UmclustError):
    """Modality containers disagree on the number of samples."""


class CorruptData(UmclustError):
    """Non-finite value encountered in a feature payload."""


class LabelOutOfRange(UmclustError):
    """A label value falls outside [0, num_classes)."""


class SpecTooSmall(UmclustError):
    """Synthetic dataset spec too small to be meaningful."""


class IoError(UmclustError):
    """Output path is missing or unwritable."""


# --- encoders ---

class EmptySequence(UmclustError):
    """A sequence input consists entirely of padding."""


# --- contrastive ---

class BatchTooSmall(UmclustError):
    """Contrastive batch has fewer than two distinct samples (no negatives)."""


class NoPositives(UmclustError):
    """Every anchor in a supervised contrastive batch has an empty positive set."""


class BadRate(UmclustError):
    """Dropout rate outside the open interval (0, 1)."""


# --- clustering ---

class TooFewPoints(UmclustError):
    """Fewer points than requested clusters."""


# --- selection ---

class ClusterTooSmall(UmclustError):
    """Density needs at least two points in a cluster."""


class SubsetTooSmall(UmclustError):
    """Cohesion needs at least two selected points."""


# --- metrics ---

class TooFewSamples(UmclustError):
    """Pair-counting metrics need at least two samples."""


class BadK(UmclustError):
    """Cluster/class count inconsistent with the label values present."""


# --- cli ---

class BadGrid(UmclustError):
    """A sweep grid is empty."""
