"""Domain exception hierarchy.

Every error that callers are expected to catch derives from QuantforgeError.
The CLI maps QuantforgeError to exit code 1 and the service maps it to 422;
anything else is a bug and propagates.
"""


class QuantforgeError(Exception):
    """Base class for all domain errors."""

    code = "error"

    def payload(self) -> dict:
        return {"error": self.code, "detail": str(self)}


class ShapeMismatch(QuantforgeError):
    code = "shape-mismatch"


class CycleDetected(QuantforgeError):
    code = "cycle-detected"


class MultipleInputs(QuantforgeError):
    code = "multiple-inputs"


class TopologySyntaxError(QuantforgeError):
    code = "syntax-error"


class UnsupportedLayerKind(QuantforgeError):
    code = "unsupported-layer-kind"


class MissingPrecision(QuantforgeError):
    code = "missing-precision"


class SizeMismatch(QuantforgeError):
    code = "size-mismatch"


class EmptyWeights(QuantforgeError):
    code = "empty-weights"


class ZeroScale(QuantforgeError):
    code = "zero-scale"


class UnknownPass(QuantforgeError):
    code = "unknown-pass"


class UnstreamlinedScale(QuantforgeError):
    code = "unstreamlined-scale"


class IndivisibleFolding(QuantforgeError):
    code = "indivisible-folding"


class DegenerateFit(QuantforgeError):
    code = "degenerate-fit"


class MissingParameters(QuantforgeError):
    code = "missing-parameters"


class EngineTooSmall(QuantforgeError):
    code = "engine-too-small"


class UnknownPlatform(QuantforgeError):
    code = "unknown-platform"
