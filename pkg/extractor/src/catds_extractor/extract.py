"""Feature extraction from audio with a wav2vec2-family encoder.

Audio goes in as WAV files, features come out as CATF files that the
catds pipeline reads directly. The frame count of every output is
checked against the encoder's convolutional stride arithmetic before
anything is written, so a CATF file is either exactly right or absent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import torch
from scipy.io import wavfile
from scipy.signal import resample_poly
from transformers import Wav2Vec2Config, Wav2Vec2Model

from catds import write_feature_file


@dataclass
class ExtractConfig:
    """Where the encoder lives and which of its layers to tap."""

    model: str
    layer: int = 12
    expected_dim: int = 1024
    sample_rate: int = 16000
    batch_size: int = 8

    def __post_init__(self):
        if self.layer < 1:
            raise ValueError("layer must be >= 1")
        if self.expected_dim < 1:
            raise ValueError("expected_dim must be >= 1")
        if self.sample_rate < 1:
            raise ValueError("sample_rate must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def check_layer(encoder_config, layer: int) -> None:
    """Reject a tap point outside the encoder depth.

    Runs on the model configuration alone so a bad layer index fails
    before any weights are downloaded or loaded.
    """
    depth = int(encoder_config.num_hidden_layers)
    if not 1 <= layer <= depth:
        raise ValueError(
            f"layer {layer} is out of range for a {depth}-layer encoder")


def expected_frames(n_samples: int, kernels, strides) -> int:
    """Frame count after the convolutional front end.

    Applies the standard length recurrence t -> floor((t - kernel) /
    stride) + 1 once per conv layer.
    """
    t = int(n_samples)
    for kernel, stride in zip(kernels, strides):
        t = (t - int(kernel)) // int(stride) + 1
        if t < 1:
            raise ValueError(
                f"audio too short: {n_samples} samples do not survive the"
                " convolutional front end")
    return t


def load_waveform(path, target_rate: int) -> np.ndarray:
    """Decode a WAV file into mono float32 at the target sample rate.

    Integer PCM is scaled to [-1, 1); multi-channel audio is averaged;
    other rates are polyphase-resampled.
    """
    try:
        rate, data = wavfile.read(path)
    except Exception as exc:
        raise ValueError(f"{path}: cannot decode audio ({exc})") from exc
    if data.size == 0:
        raise ValueError(f"{path}: empty audio")
    if data.dtype == np.uint8:
        x = (data.astype(np.float32) - 128.0) / 128.0
    elif np.issubdtype(data.dtype, np.integer):
        x = data.astype(np.float32) / float(-np.iinfo(data.dtype).min)
    else:
        x = data.astype(np.float32)
    if x.ndim == 2:
        x = x.mean(axis=1)
    elif x.ndim != 1:
        raise ValueError(f"{path}: expected 1-D or 2-D samples, got shape {data.shape}")
    if rate != target_rate:
        g = math.gcd(int(rate), int(target_rate))
        x = resample_poly(x, target_rate // g, rate // g).astype(np.float32)
    return x


class Extractor:
    """Loaded encoder plus the frame-count contract it must satisfy."""

    def __init__(self, config: ExtractConfig):
        self.config = config
        encoder_config = Wav2Vec2Config.from_pretrained(config.model)
        check_layer(encoder_config, config.layer)
        if int(encoder_config.hidden_size) != config.expected_dim:
            raise ValueError(
                f"model emits {encoder_config.hidden_size}-dimensional states,"
                f" expected {config.expected_dim}")
        self.kernels = tuple(int(k) for k in encoder_config.conv_kernel)
        self.strides = tuple(int(s) for s in encoder_config.conv_stride)
        self.model = Wav2Vec2Model.from_pretrained(config.model).eval()

    def features(self, waveform: np.ndarray) -> np.ndarray:
        """Hidden states of the configured layer for one waveform.

        The returned array is float32 [n_frames, dim], with n_frames
        checked against the stride arithmetic and all values finite.
        """
        waveform = np.asarray(waveform, dtype=np.float32)
        if waveform.ndim != 1:
            raise ValueError("waveform must be 1-D")
        want = expected_frames(waveform.shape[0], self.kernels, self.strides)
        batch = torch.from_numpy(waveform).unsqueeze(0)
        with torch.inference_mode():
            out = self.model(batch, output_hidden_states=True)
        states = out.hidden_states[self.config.layer][0]
        frames = states.cpu().numpy().astype(np.float32)
        if frames.shape != (want, self.config.expected_dim):
            raise ValueError(
                f"encoder produced {frames.shape}, expected"
                f" ({want}, {self.config.expected_dim})")
        if not np.isfinite(frames).all():
            raise ValueError("encoder produced non-finite activations")
        return frames

    def extract_file(self, audio_path, out_path) -> int:
        """Audio file in, CATF file out. Returns the frame count."""
        waveform = load_waveform(audio_path, self.config.sample_rate)
        frames = self.features(waveform)
        write_feature_file(out_path, frames)
        return frames.shape[0]
