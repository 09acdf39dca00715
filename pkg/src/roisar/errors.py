"""Exception types shared across the package."""


class RoisarError(Exception):
    """Base class for all package errors."""


class ConfigError(RoisarError):
    """Invalid radar configuration, scenario parameters, or input file."""


class ConstraintViolationError(RoisarError):
    """A physical sampling constraint is violated (e.g. platform too fast)."""


class OdometryError(RoisarError):
    """Ego-motion estimation failed."""


class DegenerateGeometryError(OdometryError):
    """Detections span too little angle to solve for a 2D velocity."""


class EstimationFailedError(OdometryError):
    """No usable consensus set was found."""
