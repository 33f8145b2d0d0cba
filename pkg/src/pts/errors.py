class PtsError(ValueError):
    """Base class for invalid-input errors raised by this package."""


class UnsupportedDimensionError(PtsError):
    pass


class SeriesTooShortError(PtsError):
    def __init__(self, length, required):
        super().__init__(
            f"series has {length} samples; at least {required} are required"
        )
        self.length = length
        self.required = required


class RankDeficientError(PtsError):
    def __init__(self, requested, rank, what="stack"):
        super().__init__(
            f"requested subspace dimension {requested} but the {what} only "
            f"has numerical rank {rank}"
        )
        self.requested = requested
        self.rank = rank
