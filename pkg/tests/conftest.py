"""Shared fixture helpers for the test suite."""

from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from catds import LanguageSpec


def dirichlet_spec(alphabet_size, seed, length_min, length_max, conc=0.6):
    """Markov spec with Dirichlet-sampled rows; skewed enough that clips
    of the same language look alike but different languages do not."""
    rng = np.random.default_rng(seed)
    transition = rng.dirichlet(np.full(alphabet_size, conc), size=alphabet_size)
    initial = rng.dirichlet(np.full(alphabet_size, conc))
    return LanguageSpec(
        alphabet_size=alphabet_size,
        transition=transition,
        initial=initial,
        length_min=length_min,
        length_max=length_max,
        seed=seed + 777,
    )


def half_support_spec(alphabet_size, lo, hi, seed, length_min=60, length_max=200):
    """Spec whose chains never leave the symbol band [lo, hi).

    Rows outside the band still get valid distributions (over the band)
    so the transition matrix is stochastic everywhere.
    """
    rng = np.random.default_rng(seed)
    transition = np.zeros((alphabet_size, alphabet_size))
    span = hi - lo
    for i in range(alphabet_size):
        transition[i, lo:hi] = rng.dirichlet(np.full(span, 0.8))
    initial = np.zeros(alphabet_size)
    initial[lo:hi] = rng.dirichlet(np.full(span, 0.8))
    return LanguageSpec(
        alphabet_size=alphabet_size,
        transition=transition,
        initial=initial,
        length_min=length_min,
        length_max=length_max,
        seed=seed,
    )


def reseed(spec, seed):
    """Same language statistics, fresh sampling stream."""
    return dataclasses.replace(spec, seed=seed)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
