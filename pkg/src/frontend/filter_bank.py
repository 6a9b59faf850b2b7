"""
Matched-filter bank and per-symbol correlations.

Each bank holds M^L local waveforms of k samples, one per combination of
the L symbols whose pulses overlap the current interval. Locals are
indexed by the mixed-radix code

    c = sum_l rank(alpha_{n-L+1+l}) * M^(L-1-l)

so the oldest symbol is the most significant digit, with ranks taken in
ascending alphabet order. For multi-h schemes there is one bank per
h-parity of the newest symbol.

Correlations are plain sample sums z_c = sum_m r[m] * conj(local_c[m]);
the cumulative-phase rotation exp(-j*theta) is left to the detectors.
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from src.schema.errors import FrameMismatchError, ParameterError
from src.waveforms.modulator import IqFrame
from src.waveforms.pulses import PulseTable
from src.waveforms.schemes import Scheme

logger = logging.getLogger(__name__)


def combo_digits(scheme: Scheme) -> np.ndarray:
    """Alphabet ranks of every combo code, shape (M^L, L), oldest symbol first."""
    M, L = scheme.M, scheme.L
    codes = np.arange(M ** L)
    powers = M ** np.arange(L - 1, -1, -1)
    return (codes[:, None] // powers[None, :]) % M


def combo_code(scheme: Scheme, symbols: Sequence[int]) -> int:
    """Code of an L-symbol combination given oldest first."""
    ranks = scheme.ranks(symbols)
    if len(ranks) != scheme.L:
        raise FrameMismatchError(f"a combination has L={scheme.L} symbols, got {len(ranks)}")
    code = 0
    for r in ranks:
        code = code * scheme.M + int(r)
    return code


@dataclass(frozen=True, eq=False)
class FilterBank:
    """Local waveforms for one h-parity, shape (M^L, k), read-only."""

    parity: int
    k: int
    locals: np.ndarray

    @property
    def size(self) -> int:
        return self.locals.shape[0]


@dataclass(frozen=True, eq=False)
class CorrelationRow:
    symbol_index: int
    values: np.ndarray


def build_filter_bank(scheme: Scheme, pulse: PulseTable, parity: int) -> FilterBank:
    """Bank of M^L unit-magnitude local waveforms for intervals whose newest symbol has this parity."""
    if not 0 <= parity < scheme.n_parities:
        raise ParameterError(f"parity must lie in [0, {scheme.n_parities}), got {parity}")
    if pulse.L != scheme.L:
        raise FrameMismatchError(f"pulse length {pulse.L} does not match scheme L={scheme.L}")

    L = scheme.L
    digits = combo_digits(scheme)
    position_parity = (parity - (L - 1) + np.arange(L)) % scheme.n_parities
    h_alpha = scheme.h_values[position_parity][None, :] * scheme.alphabet_array[digits]
    phase = 2.0 * np.pi * (h_alpha @ pulse.window_matrix())
    locals_ = np.exp(1j * phase)
    locals_.setflags(write=False)

    logger.debug(f"Built {scheme.name.value} filter bank parity={parity}: {locals_.shape[0]} locals")
    return FilterBank(parity=parity, k=pulse.k, locals=locals_)


def build_filter_banks(scheme: Scheme, pulse: PulseTable) -> Tuple[FilterBank, ...]:
    """One bank per h-parity (1 for PCM/FM, 2 for ARTM CPM)."""
    return tuple(build_filter_bank(scheme, pulse, par) for par in range(scheme.n_parities))


def correlate_symbol(frame: IqFrame, symbol_index: int, bank: FilterBank, n_parities: int = 1) -> CorrelationRow:
    """Correlations of one symbol interval against every local of the bank."""
    if bank.k != frame.k:
        raise FrameMismatchError(f"bank built for k={bank.k}, frame has k={frame.k}")
    if symbol_index % n_parities != bank.parity:
        raise FrameMismatchError(
            f"symbol {symbol_index} has parity {symbol_index % n_parities}, bank parity is {bank.parity}"
        )
    r = frame.interval(symbol_index)
    return CorrelationRow(symbol_index=symbol_index, values=bank.locals.conj() @ r)


def correlate_frame(frame: IqFrame, banks: Sequence[FilterBank]) -> np.ndarray:
    """
    Correlations of every symbol interval, shape (n_symbols, M^L).

    Row n uses banks[n % len(banks)].
    """
    if not banks:
        raise ParameterError("at least one filter bank is required")
    for bank in banks:
        if bank.k != frame.k:
            raise FrameMismatchError(f"bank built for k={bank.k}, frame has k={frame.k}")
    intervals = frame.by_interval()
    n_par = len(banks)
    out = np.empty((frame.n_symbols, banks[0].size), dtype=np.complex128)
    for bank in banks:
        rows = slice(bank.parity, None, n_par)
        out[rows] = intervals[rows] @ bank.locals.conj().T
    return out
