"""Shared fixtures: a small on-disk encoder and WAV writers."""

import numpy as np
import pytest
import torch
from scipy.io import wavfile
from transformers import Wav2Vec2Config, Wav2Vec2Model


@pytest.fixture(scope="session")
def model_dir(tmp_path_factory):
    """Randomly initialized encoder with the standard conv front end.

    hidden_size matches the production contract (1024) so the dimension
    checks are exercised for real; two transformer layers keep it small.
    """
    config = Wav2Vec2Config(
        hidden_size=1024,
        num_hidden_layers=2,
        num_attention_heads=16,
        intermediate_size=2048,
    )
    torch.manual_seed(0)
    model = Wav2Vec2Model(config)
    path = tmp_path_factory.mktemp("encoder")
    model.save_pretrained(path)
    return str(path)


@pytest.fixture(scope="session")
def config_only_dir(tmp_path_factory):
    """A 24-layer encoder configuration with no weights alongside it."""
    path = tmp_path_factory.mktemp("config_only")
    Wav2Vec2Config(hidden_size=1024, num_hidden_layers=24).save_pretrained(path)
    return str(path)


def write_wav(path, seconds, rate=16000, channels=1, seed=0, silent=False):
    rng = np.random.default_rng(seed)
    n = int(round(seconds * rate))
    if silent:
        data = np.zeros((n, channels))
    else:
        t = np.arange(n) / rate
        tone = 0.3 * np.sin(2 * np.pi * 220.0 * t)
        data = tone[:, None] + 0.05 * rng.standard_normal((n, channels))
    pcm = np.clip(data * 32768.0, -32768, 32767).astype(np.int16)
    if channels == 1:
        pcm = pcm[:, 0]
    wavfile.write(path, rate, pcm)
    return str(path)
