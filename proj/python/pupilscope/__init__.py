"""Iris and pupil detection for low-resolution eye images."""

from ._pupilscope import (
    EyeRegion,
    Frame,
    IrisEstimate,
    PupilEstimate,
    PupilscopeError,
    Side,
    circle_overlap,
    confidence,
    detect_iris,
    detect_pupil,
    equality_factor,
    load_frame,
    mask_codes,
    pupil_prf,
    render_mask,
    score_candidate,
    synth_eye,
    to_luma_satv,
    tolerance_accuracy,
)

__all__ = [
    "EyeRegion",
    "Frame",
    "IrisEstimate",
    "PupilEstimate",
    "PupilscopeError",
    "Side",
    "circle_overlap",
    "confidence",
    "detect_iris",
    "detect_pupil",
    "equality_factor",
    "load_frame",
    "mask_codes",
    "pupil_prf",
    "render_mask",
    "score_candidate",
    "synth_eye",
    "to_luma_satv",
    "tolerance_accuracy",
]
