"""Exception hierarchy shared across the pipeline."""


class GalmorphError(Exception):
    """Base class for all pipeline errors."""


class RasterError(GalmorphError):
    """Image file could not be read or written."""

    def __init__(self, message, path=None, offset=None):
        self.path = path
        self.offset = offset
        where = []
        if path is not None:
            where.append(f"path={path}")
        if offset is not None:
            where.append(f"byte offset {offset}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class DegenerateInputError(GalmorphError):
    """Input carries no usable structure (constant image, empty mask)."""


class OrientationError(GalmorphError):
    """Principal axis is undefined."""


class DegenerateMeasureError(GalmorphError):
    """Box measure is identically zero at some box size."""


class LadderError(GalmorphError):
    """Box-size ladder violates its invariants."""


class PcaError(GalmorphError):
    """PCA fit or projection failed."""


class TrainingError(GalmorphError):
    """Classifier training failed (e.g. optimizer did not converge)."""


class ManifestError(GalmorphError):
    """Manifest CSV could not be parsed."""
