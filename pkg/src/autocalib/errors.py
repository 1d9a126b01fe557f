"""Exception hierarchy shared by all calibration stages.

Every failure mode the pipeline can signal has its own class so callers
(and the CLI error reporter) can branch on type instead of parsing
messages.  All of them derive from :class:`CalibrationError`.
"""


class CalibrationError(Exception):
    """Base class for every error raised by this package."""


# --- geometry ---------------------------------------------------------------

class NonPositiveDepth(CalibrationError):
    """A world point has depth <= 0 in the camera frame and cannot be projected."""


class BeyondHemisphere(CalibrationError):
    """A distorted radius maps to a view angle at or past 90 deg; tan() has no value there."""


class DegenerateHomography(CalibrationError):
    """The ground-plane homography is singular (camera edge-on to the plane)."""


class PointAtHorizon(CalibrationError):
    """Back-projection of a pixel meets the ground plane at infinity."""


# --- track loading / fitting -------------------------------------------------

class ParseError(CalibrationError):
    """An input file does not match its schema; message carries field context."""


class SchemaVersionMismatch(ParseError):
    """The file declares a schema tag this version does not understand."""


class DegeneratePoints(CalibrationError):
    """All points coincide; no line can be fitted."""


# --- intrinsic stage ----------------------------------------------------------

class NoTracks(CalibrationError):
    """The focal search was given an empty track list."""


class DegenerateObjective(CalibrationError):
    """The straightness objective is flat; the data carries no curvature signal."""


class RankDeficient(CalibrationError):
    """Distortion design matrix is ill-conditioned (radius range too narrow)."""


# --- extrinsic stage ----------------------------------------------------------

class Unimodal(CalibrationError):
    """The orientation histogram has no second mode; one motion direction only."""


class EmptyCluster(CalibrationError):
    """No segment falls within the angular window around a histogram peak."""


class EmptyGrid(CalibrationError):
    """The vote accumulator received no votes."""


class InconsistentVPs(CalibrationError):
    """The two vanishing points do not admit a real focal length (non-orthogonal)."""


class ParallelVPs(CalibrationError):
    """The two vanishing directions are (nearly) parallel; no rotation can be built."""


class SingularInput(CalibrationError):
    """Matrix handed to the rotation projector is singular."""


class HorizontalCamera(CalibrationError):
    """Optical axis lies in the ground plane; height cannot anchor translation."""


# --- synthetic scenes ----------------------------------------------------------

class CameraSeesNothing(CalibrationError):
    """No generated trajectory projects inside the image."""


# --- CLI -----------------------------------------------------------------------

class ConfigError(CalibrationError):
    """Pipeline configuration is missing or invalid."""
