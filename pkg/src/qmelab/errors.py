"""Exception types shared across the package."""


class QmeError(Exception):
    """Base class for all package errors."""


class InvalidSample(QmeError, ValueError):
    """Empty, non-finite, or wrongly shaped data."""


class DimensionMismatch(QmeError, ValueError):
    pass


class TruncationError(QmeError, ValueError):
    """Requested Fock cutoff cannot hold a state within tolerance."""


class OverlapTooSmall(QmeError, RuntimeError):
    """The reference state barely overlaps the embedding, so the normalization
    quotient is ill-conditioned. Pick a reference closer to the data."""

    def __init__(self, overlap: float, floor: float, x_ref: float):
        self.overlap = overlap
        self.floor = floor
        self.x_ref = x_ref
        super().__init__(
            f"reference overlap {overlap:.3g} at x_ref={x_ref:.6g} is below "
            f"the floor {floor:.3g} or not resolved from zero"
        )
