"""Audio front end for catds: WAV files to CATF feature files."""

from .extract import (
    ExtractConfig,
    Extractor,
    check_layer,
    expected_frames,
    load_waveform,
)

__all__ = [
    "ExtractConfig",
    "Extractor",
    "check_layer",
    "expected_frames",
    "load_waveform",
]
