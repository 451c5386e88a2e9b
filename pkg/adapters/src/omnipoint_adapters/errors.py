"""Adapter error hierarchy: everything user-facing derives from AdapterError."""


class AdapterError(Exception):
    """Base class for all adapter failures surfaced through the CLI."""


class InvalidConfig(AdapterError):
    """Adapter configuration value out of range or unparseable."""


class MissingInput(AdapterError):
    """An input file, directory, or palette the adapter needs is absent."""


class NoPersonFound(AdapterError):
    """Person detection produced no box above the confidence threshold."""


class NoSkeleton(AdapterError):
    """Pose estimation found no usable keypoints in the view."""
