"""
CPM baseband synthesis.

Sample j of symbol interval n (t = nT + jT/k) carries the phase

    phi = (2*pi/p) * theta_{n-L} + 2*pi * sum_{l=0..L-1} h_i * alpha_i * q((L-1-l)T + jT/k)

with i = n-L+1+l. theta_{n-L} is the integer cumulative phase of every
symbol whose pulse has completed by nT, so the only floating-point part
of the phase is bounded by the current window.

Frames start with L-1 pilot symbols of +1 so detectors start from one
known trellis state, and end with L-1 tail symbols of +1 so the pulses of
the last data symbols are observed in full and the trellis ends in a known
state. Symbols before the first one of a frame do not exist
(their pulse contribution is zero) unless a history is passed in.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.schema.errors import FrameMismatchError, ParameterError
from src.waveforms.pulses import PulseTable, pulse_for
from src.waveforms.schemes import Scheme

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class IqFrame:
    """Complex baseband samples, k per symbol. The sample array is read-only."""

    samples: np.ndarray
    k: int
    n_symbols: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        if samples.ndim != 1 or len(samples) != self.k * self.n_symbols:
            raise FrameMismatchError(
                f"frame holds {samples.size} samples, expected k*n_symbols = {self.k * self.n_symbols}"
            )
        if samples is self.samples:
            samples = samples.copy()
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return len(self.samples)

    def interval(self, n: int) -> np.ndarray:
        """The k samples of symbol interval n."""
        if not 0 <= n < self.n_symbols:
            raise FrameMismatchError(f"symbol index {n} outside frame of {self.n_symbols} symbols")
        return self.samples[n * self.k:(n + 1) * self.k]

    def by_interval(self) -> np.ndarray:
        """Samples reshaped to (n_symbols, k)."""
        return self.samples.reshape(self.n_symbols, self.k)

    def rotated(self, v: float) -> "IqFrame":
        """Frame multiplied by exp(j*v)."""
        return IqFrame(self.samples * np.exp(1j * v), self.k, self.n_symbols)

    def __add__(self, other: "IqFrame") -> "IqFrame":
        if self.k != other.k or self.n_symbols != other.n_symbols:
            raise FrameMismatchError("cannot add frames of different shape")
        return IqFrame(self.samples + other.samples, self.k, self.n_symbols)

    def scaled(self, a: complex) -> "IqFrame":
        return IqFrame(self.samples * a, self.k, self.n_symbols)


def frame_symbols(scheme: Scheme, data: Sequence[int]) -> Tuple[int, ...]:
    """Pilots, the data symbols, then the tail."""
    return tuple(scheme.pilot_symbols) + tuple(int(s) for s in data) + tuple(scheme.tail_symbols)


def _check_phase_index(scheme: Scheme, index) -> np.ndarray:
    arr = np.asarray(index, dtype=np.int64)
    if np.any(arr < 0) or np.any(arr >= scheme.p):
        raise ParameterError(f"initial phase index must lie in [0, {scheme.p}), got {index}")
    return arr


def modulate_batch(
    scheme: Scheme,
    symbols: np.ndarray,
    k: int = 4,
    initial_phase_index=0,
    history: Optional[np.ndarray] = None,
    start_index: int = 0,
    pulse: Optional[PulseTable] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Modulate B symbol rows at once.

    Args:
        scheme: modulation scheme
        symbols: (B, N) array of alphabet symbols, first one at absolute index start_index
        k: samples per symbol
        initial_phase_index: scalar or (B,) cumulative phase index including the history's steps
        history: optional (B, H) symbols immediately preceding `symbols`; only the last L-1 matter
        start_index: absolute symbol index of symbols[:, 0], selects the h-cycle position
        pulse: pulse table, defaults to the scheme's pulse at k

    Returns:
        (samples of shape (B, N*k), final phase indices of shape (B,))
    """
    if pulse is None:
        pulse = pulse_for(scheme, k)
    elif pulse.k != k or pulse.L != scheme.L:
        raise FrameMismatchError(f"pulse table (k={pulse.k}, L={pulse.L}) does not fit k={k}, L={scheme.L}")

    syms = np.atleast_2d(np.asarray(symbols, dtype=np.int64))
    B, N = syms.shape
    L = scheme.L
    initial = np.broadcast_to(_check_phase_index(scheme, initial_phase_index), (B,))
    if N == 0:
        return np.zeros((B, 0), dtype=np.complex128), initial.copy()

    if history is None or L == 1:
        hist = np.zeros((B, 0), dtype=np.int64)
    else:
        hist = np.atleast_2d(np.asarray(history, dtype=np.int64))[:, -(L - 1):]
    n_hist = hist.shape[1]

    full = np.concatenate([hist, syms], axis=1)
    ranks = scheme.ranks(full)
    absolute = start_index - n_hist + np.arange(n_hist + N)
    parity = absolute % scheme.n_parities

    h_alpha = scheme.h_values[parity] * full
    padded = np.concatenate([np.zeros((B, L - 1 - n_hist)), h_alpha], axis=1)
    windows = sliding_window_view(padded, L, axis=1)
    frac = 2.0 * np.pi * np.einsum("bnl,lj->bnj", windows, pulse.window_matrix())

    steps = scheme.step_table[parity, ranks]
    cum = np.concatenate([np.zeros((B, 1), dtype=np.int64), np.cumsum(steps, axis=1)], axis=1)
    base0 = initial - cum[:, n_hist]
    completed = np.maximum(n_hist + np.arange(N) - L + 1, 0)
    base = (base0[:, None] + cum[:, completed]) % scheme.p

    samples = scheme.phasors[base][:, :, None] * np.exp(1j * frac)
    final = (base0 + cum[:, -1]) % scheme.p
    return samples.reshape(B, N * k), final


def modulate(
    scheme: Scheme,
    symbols: Sequence[int],
    k: int = 4,
    initial_phase_index: int = 0,
    history: Optional[Sequence[int]] = None,
    start_index: int = 0,
) -> Tuple[IqFrame, int]:
    """
    Synthesize the constant-envelope CPM waveform of a symbol sequence.

    Returns the frame and the final cumulative phase index, i.e. the initial
    index plus the increment of every symbol passed in. To continue a
    sequence, pass that final index along with the previous symbols as
    `history` and the next absolute index as `start_index`.
    """
    syms = np.asarray(symbols, dtype=np.int64).reshape(1, -1)
    hist = None if history is None or len(history) == 0 else np.asarray(history, dtype=np.int64).reshape(1, -1)
    samples, final = modulate_batch(scheme, syms, k, initial_phase_index, hist, start_index)
    n = syms.shape[1]
    logger.debug(f"Modulated {n} {scheme.name.value} symbols at k={k}")
    return IqFrame(samples[0], k, n), int(final[0])


def boundary_phases(
    scheme: Scheme, symbols: Sequence[int], initial_phase_index: int = 0, start_index: int = 0
) -> np.ndarray:
    """Cumulative phase index after each symbol is completed, as integers mod p."""
    syms = np.asarray(symbols, dtype=np.int64)
    if syms.size == 0:
        return np.zeros(0, dtype=np.int64)
    ranks = scheme.ranks(syms)
    parity = (start_index + np.arange(len(syms))) % scheme.n_parities
    steps = scheme.step_table[parity, ranks]
    return (initial_phase_index + np.cumsum(steps)) % scheme.p
