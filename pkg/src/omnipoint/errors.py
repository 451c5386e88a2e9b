"""Exception types raised across the package."""


class PipelineError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateCircle(PipelineError):
    """Two directions too close or antipodal to define a great circle."""


class MeridianCircle(PipelineError):
    """Circle passes through the poles; latitude is not a function of longitude."""


class OutOfGrid(PipelineError):
    """Pixel coordinate outside the equirectangular grid."""


class BehindView(PipelineError):
    """Direction on or behind the perspective camera plane."""


class DegenerateBox(PipelineError):
    """Bounding box without positive width and height."""


class TooFewVertices(PipelineError):
    """Spherical polygon with fewer than three distinct vertices."""


class MissingKeypoints(PipelineError):
    """Skeleton lacks a keypoint required by the requested operation."""


class NoArmDetected(PipelineError):
    """Neither arm has the keypoints needed to pick a pointing arm."""


class SingleClass(PipelineError):
    """Training labels contain only one class."""


class NotConverged(PipelineError):
    """Solver hit its iteration cap before reaching the requested tolerance."""


class EmptyCorpus(PipelineError):
    """Frequency table requested over zero detections."""


class TooFewSamples(PipelineError):
    """Standardizer needs at least two samples."""


class NoPositives(PipelineError):
    """No training scene produced a ground-truth-matched candidate."""


class InvalidParams(PipelineError):
    """Synthetic scene parameters outside their documented ranges."""


class MissingFixture(PipelineError):
    """Scene lacks a fixture required by the selected mode."""
