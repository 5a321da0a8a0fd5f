"""Exception types raised by the library."""


class SanlocError(Exception):
    """Base class for all library errors."""


class DegenerateGeometryError(SanlocError, ValueError):
    """Two points that must be distinct coincide (zero-length path leg)."""


class ScenarioConfigError(SanlocError, ValueError):
    """A scenario or experiment configuration violates an invariant."""


class SpatialFrequencyError(SanlocError, ValueError):
    """Normalized spatial frequency d*sin(theta)/lambda outside (-1/2, 1/2]."""


class KeyTooLargeError(SanlocError, ValueError):
    """Fake-path angle shift pushes sin(theta) outside [-1, 1]."""


class DerivativeSingularityError(SanlocError, ValueError):
    """Angle derivative undefined because |sin(theta)| = 1 (cos = 0)."""


class SeparationUndefinedError(SanlocError, ValueError):
    """Minimal separation needs at least two coordinates."""


class ThresholdUndefinedError(SanlocError, ValueError):
    """Resolvability threshold has a zero floor (grid too small)."""


class CalibrationError(SanlocError, ValueError):
    """Noise calibration impossible (zero signal energy)."""


class LplUndefinedError(SanlocError, ValueError):
    """Leakage metric undefined because the reference RMSE is zero."""
