"""Exception types raised across the pipeline.

Every error carries a short machine-readable code (the class name) so the
CLI can emit structured error JSON on stderr.
"""


class LipsyncError(Exception):
    """Base class for all pipeline errors."""


class OutOfFrame(LipsyncError):
    """A generated landmark falls outside the image bounds."""


class DegenerateFace(LipsyncError):
    """Landmarks admit no similarity frame (coincident mouth corners or zero scale)."""


class DegenerateData(LipsyncError):
    """Sample matrix carries no usable variance."""


class BadRank(LipsyncError):
    """Requested component count is outside 1..40."""


class UnsupportedRate(LipsyncError):
    """Waveform sample rate outside the supported 8 kHz..192 kHz range."""


class TooShort(LipsyncError):
    """Waveform shorter than one analysis window."""


class DelayTooLarge(LipsyncError):
    """Time delay is not smaller than the sequence length."""


class EmptyDataset(LipsyncError):
    """Training requested on an empty dataset."""


class ShapeMismatch(LipsyncError):
    """Tensor shapes inconsistent with the model configuration."""


class SizeMismatch(LipsyncError):
    """Image size inconsistent with the model configuration."""


class EmptyBox(LipsyncError):
    """Mouth bounding box collapsed after clamping to the image."""


class EmptyText(LipsyncError):
    """Text-to-speech called with empty text."""


class AlignmentError(LipsyncError):
    """Audio frame count and video frame count differ by more than one."""


class MissingFile(LipsyncError):
    """A manifest-referenced file is absent or unparseable."""


class InsufficientTargetFrames(LipsyncError):
    """Target clip is shorter than the audio to be rendered."""


class VerificationFailed(LipsyncError):
    """Render outputs violate one or more manifest invariants."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
