"""
Frequency and phase pulse tables.

Time is in units of the symbol duration T. A PulseTable holds g and q
sampled at k points per symbol over [0, LT], endpoints included
(L*k + 1 samples). q is the running integral of g, normalized so that
q(LT) = 1/2.

Integration is done on an internal fine grid (at least 64 points per T)
and the result is downsampled to k, so tables built for different k agree
at common time instants.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Tuple

import numpy as np
import pandas as pd
from scipy import signal
from scipy.integrate import cumulative_trapezoid, trapezoid

from src.schema.errors import ParameterError
from src.waveforms.schemes import PulseKind, Scheme

logger = logging.getLogger(__name__)

FINE_POINTS_PER_SYMBOL = 64

# -3 dB premodulation cutoff for PCM/FM, as a multiple of the bit rate
PCMFM_CUTOFF = 0.7
PCMFM_FILTER_ORDER = 6


@dataclass(frozen=True, eq=False)
class PulseTable:
    """Sampled frequency pulse g and phase pulse q over [0, LT]."""

    k: int
    L: int
    g: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        expected = self.L * self.k + 1
        if len(self.g) != expected or len(self.q) != expected:
            raise ParameterError(f"pulse tables must have L*k+1={expected} samples")
        self.g.setflags(write=False)
        self.q.setflags(write=False)

    @property
    def t(self) -> np.ndarray:
        """Sample instants in units of T."""
        return np.arange(self.L * self.k + 1) / self.k

    @property
    def dt(self) -> float:
        return 1.0 / self.k

    def window_matrix(self) -> np.ndarray:
        """q arranged as [l, j] = q((L-1-l)T + jT/k), oldest symbol first.

        Row l weights the symbol l positions into an L-symbol window whose
        newest symbol starts at the current interval.
        """
        rows = [self.q[(self.L - 1 - l) * self.k:(self.L - l) * self.k] for l in range(self.L)]
        return np.vstack(rows)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t_over_T": self.t, "g": self.g, "q": self.q})


def _validate(L: int, k: int):
    if not isinstance(L, (int, np.integer)) or L < 1:
        raise ParameterError(f"pulse length L must be an integer >= 1, got {L!r}")
    if not isinstance(k, (int, np.integer)) or k < 2:
        raise ParameterError(f"oversampling k must be an integer >= 2, got {k!r}")


def _fine_factor(k: int) -> int:
    """Fine-grid points per symbol: a multiple of k and at least 64."""
    return k * int(np.ceil(FINE_POINTS_PER_SYMBOL / k))


def _integrate_and_downsample(g_fine: np.ndarray, L: int, k: int, fine: int) -> PulseTable:
    dt = 1.0 / fine
    area = trapezoid(g_fine, dx=dt)
    g_fine = g_fine * (0.5 / area)
    q_fine = cumulative_trapezoid(g_fine, dx=dt, initial=0.0)
    q_fine = q_fine * (0.5 / q_fine[-1])
    stride = fine // k
    g = np.ascontiguousarray(g_fine[::stride])
    q = np.ascontiguousarray(q_fine[::stride])
    return PulseTable(k=k, L=L, g=g, q=q)


def build_rc3_pulse(L: int = 3, k: int = 4) -> PulseTable:
    """Raised-cosine frequency pulse g(t) = (1 - cos(2 pi t / LT)) / (2LT) on [0, LT]."""
    _validate(L, k)
    fine = _fine_factor(k)
    t = np.arange(L * fine + 1) / fine
    g_fine = (1.0 - np.cos(2.0 * np.pi * t / L)) / (2.0 * L)
    return _integrate_and_downsample(g_fine, L, k, fine)


def build_pcmfm_pulse(k: int = 4, L: int = 3, cutoff: float = PCMFM_CUTOFF,
                      order: int = PCMFM_FILTER_ORDER) -> PulseTable:
    """
    PCM/FM frequency pulse: NRZ rectangle of duration T through a Bessel low-pass.

    The response is the filter step response minus its copy delayed by T,
    truncated to [0, LT]. The Bessel step response overshoots slightly, so
    the truncated pulse is clipped at zero before area renormalization.

    Args:
        k: samples per symbol of the returned table
        L: support in symbols
        cutoff: -3 dB cutoff in multiples of the bit rate
        order: Bessel filter order

    Returns:
        PulseTable with q(LT) = 1/2
    """
    _validate(L, k)
    if cutoff <= 0:
        raise ParameterError(f"cutoff must be positive, got {cutoff}")
    fine = _fine_factor(k)
    t = np.arange(L * fine + 1) / fine
    b, a = signal.bessel(order, 2.0 * np.pi * cutoff, btype="low", analog=True, norm="mag")
    _, step = signal.step((b, a), T=t)
    delayed = np.concatenate([np.zeros(fine), step[:-fine]])
    g_fine = np.clip(step - delayed, 0.0, None)
    return _integrate_and_downsample(g_fine, L, k, fine)


@lru_cache(maxsize=None)
def _cached_pulse(kind: PulseKind, L: int, k: int) -> PulseTable:
    if kind == PulseKind.RC3:
        return build_rc3_pulse(L, k)
    return build_pcmfm_pulse(k, L)


def pulse_for(scheme: Scheme, k: int = 4) -> PulseTable:
    """Pulse table for a scheme, built once per (pulse kind, L, k)."""
    return _cached_pulse(scheme.pulse_kind, scheme.L, k)


def dump_pulse_csv(pulse: PulseTable, path, column: str = "q") -> Path:
    """Write a two-column CSV (t/T, value) of the frequency ('g') or phase ('q') pulse."""
    if column not in ("g", "q"):
        raise ParameterError(f"column must be 'g' or 'q', got {column!r}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pulse.to_frame()[["t_over_T", column]]
    frame.to_csv(path, index=False, lineterminator="\n")
    logger.debug(f"Wrote {len(frame)} pulse samples to {path}")
    return path


def peak_time(pulse: PulseTable) -> Tuple[float, float]:
    """(t/T, g) at the maximum of the frequency pulse."""
    idx = int(np.argmax(pulse.g))
    return float(pulse.t[idx]), float(pulse.g[idx])
