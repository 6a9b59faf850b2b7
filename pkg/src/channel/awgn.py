"""
Complex AWGN channel with carrier phase offset.

Noise convention: unit-magnitude signal samples, symbol energy Es = k,
Eb = k / log2(M) and N0 = 2*sigma^2, sigma being the per-dimension
standard deviation of each sample's noise.

Randomness comes from numpy Generators seeded per frame. Seeds are
derived from (master seed, Eb/N0 point, frame index, purpose), so a frame
is reproducible no matter which worker processes it or in which order.
"""

import logging
from enum import Enum
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.schema.errors import ParameterError
from src.waveforms.modulator import IqFrame
from src.waveforms.schemes import Scheme

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


class PhaseMode(str, Enum):
    KNOWN_ZERO = "KNOWN_ZERO"
    EXPLICIT = "EXPLICIT"
    UNIFORM_RANDOM = "UNIFORM_RANDOM"


class SeedPurpose(int, Enum):
    """Stream labels mixed into per-frame seeds."""
    SYMBOLS = 0
    CHANNEL = 1


class ChannelConfig(BaseModel):
    """Channel settings for one frame."""

    model_config = ConfigDict(frozen=True)

    ebn0_db: float = 10.0
    phase_mode: PhaseMode = PhaseMode.KNOWN_ZERO
    phase: float = Field(0.0, description="carrier phase in radians, used by EXPLICIT")
    seed: int = Field(0, ge=0)
    noiseless: bool = False

    @field_validator("phase")
    @classmethod
    def phase_in_range(cls, v: float) -> float:
        if not 0.0 <= v < TWO_PI:
            raise ValueError(f"phase must lie in [0, 2*pi), got {v}")
        return v


def noise_sigma(ebn0_db: float, scheme: Scheme, k: int) -> float:
    """Per-dimension, per-sample noise standard deviation for the given Eb/N0."""
    return noise_sigma_for(ebn0_db, scheme.bits_per_symbol, k)


def noise_sigma_for(ebn0_db: float, bits_per_symbol: int, k: int) -> float:
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    ebn0 = 10.0 ** (ebn0_db / 10.0)
    return float(np.sqrt(k / (2.0 * bits_per_symbol * ebn0)))


def derive_seed(master_seed: int, *keys: int) -> int:
    """64-bit seed for the stream identified by (master_seed, *keys)."""
    seq = np.random.SeedSequence([int(master_seed), *[int(key) for key in keys]])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def draw_phase(cfg: ChannelConfig, rng: np.random.Generator) -> float:
    if cfg.phase_mode == PhaseMode.UNIFORM_RANDOM:
        return float(rng.uniform(0.0, TWO_PI))
    if cfg.phase_mode == PhaseMode.EXPLICIT:
        return cfg.phase
    return 0.0


def apply_channel(frame: IqFrame, cfg: ChannelConfig, scheme: Scheme) -> Tuple[IqFrame, float]:
    """
    Rotate a frame by the carrier phase and add complex Gaussian noise.

    The phase is drawn before the noise from the same generator, so a
    given seed always yields the same (phase, noise) pair.

    Returns:
        (received frame, carrier phase in radians)
    """
    rng = np.random.default_rng(cfg.seed)
    v = draw_phase(cfg, rng)
    rotation = 1.0 if v == 0.0 else np.exp(1j * v)
    out = frame.samples * rotation
    if not cfg.noiseless:
        sigma = noise_sigma(cfg.ebn0_db, scheme, frame.k)
        noise = rng.normal(0.0, sigma, size=(2, len(out)))
        out = out + (noise[0] + 1j * noise[1])
    return IqFrame(out, frame.k, frame.n_symbols), v


def antipodal_ber(ebn0_db: float, n_bits: int, k: int = 4, seed: int = 0) -> Tuple[int, int]:
    """
    Calibration check for the noise convention.

    Sends n_bits antipodal bits, each as k unit samples, through noise of the
    binary sigma and decides by the sign of the summed real part. The
    error rate should match Q(sqrt(2*Eb/N0)).

    Returns:
        (bit errors, bits)
    """
    rng = np.random.default_rng(seed)
    signs = 1 - 2 * rng.integers(0, 2, size=n_bits)
    sigma = noise_sigma_for(ebn0_db, 1, k)
    noise = rng.normal(0.0, sigma, size=(n_bits, k))
    received = signs[:, None] + noise
    decided = np.where(received.sum(axis=1) >= 0, 1, -1)
    errors = int(np.count_nonzero(decided != signs))
    logger.debug(f"Antipodal check at {ebn0_db} dB: {errors}/{n_bits} errors")
    return errors, n_bits
