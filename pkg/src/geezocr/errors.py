"""Exception types shared across the pipeline."""


class GeezOcrError(Exception):
    """Base class for all library errors."""


class DimensionError(GeezOcrError):
    """Shape, bounds, or size mismatch in raster data."""


class ParameterError(GeezOcrError):
    """Invalid configuration or operation parameter."""


class ParseError(GeezOcrError):
    """Malformed input file (netpbm, manifest, class map, model)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MappingError(GeezOcrError):
    """Class id with no Unicode mapping."""


class TrainingError(GeezOcrError):
    """Invalid training set or solver failure."""


class LayoutError(GeezOcrError):
    """Synthetic page layout cannot place glyphs without overlap."""


class PipelineError(GeezOcrError):
    """Stage failure in the end-to-end recognition pipeline."""

    def __init__(self, stage, message):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
