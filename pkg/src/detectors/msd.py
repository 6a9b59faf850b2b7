"""
Noncoherent multi-symbol detection baseline.

For every data symbol a window of `window` intervals centered on it is
searched exhaustively. The L-1 symbols preceding the window come from
earlier decisions (the pilots at the frame start). Window positions on
the known tail are fixed to +1 and the window is truncated at the frame
end. Defined for PCM/FM only. A hypothesis is scored by

    | sum_w exp(-j*(2*pi/p)*rel_w) * z_{c_w}[s0 + w] |

where rel_w is the cumulative phase accumulated since the window start,
and the middle symbol of the best hypothesis is decided.
"""

import logging
from functools import lru_cache
from typing import List, Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.detectors.trellis import Decision, frame_correlations
from src.frontend.filter_bank import FilterBank, build_filter_banks
from src.schema.errors import ParameterError
from src.waveforms.modulator import IqFrame
from src.waveforms.pulses import pulse_for
from src.waveforms.schemes import Scheme, SchemeName

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = 5


@lru_cache(maxsize=None)
def hypotheses(M: int, width: int) -> np.ndarray:
    """Every rank sequence of the given width, shape (M^width, width), lexicographic order."""
    codes = np.arange(M ** width)
    powers = M ** np.arange(width - 1, -1, -1)
    out = (codes[:, None] // powers[None, :]) % M
    out.setflags(write=False)
    return out


def _check_window(window: int):
    if not isinstance(window, (int, np.integer)) or window < 1 or window % 2 == 0:
        raise ParameterError(f"MSD window must be an odd integer >= 1, got {window!r}")


def msd_noncoherent(
    frame: IqFrame,
    scheme: Scheme,
    window: int = DEFAULT_WINDOW,
    banks: Optional[Sequence[FilterBank]] = None,
) -> Decision:
    """
    Decide each data symbol from a noncoherent window search.

    Decision.final_metric holds the winning metric of the last window.

    Raises:
        ParameterError: even or nonpositive window, or a scheme other than PCM/FM
    """
    _check_window(window)
    if scheme.name != SchemeName.PCMFM:
        raise ParameterError("the MSD baseline is only defined for PCM/FM")
    if banks is None:
        banks = build_filter_banks(scheme, pulse_for(scheme, frame.k))
    Z = frame_correlations(frame, scheme, banks)

    M, L, p = scheme.M, scheme.L, scheme.p
    n_pilots = scheme.n_pilots
    N = frame.n_symbols
    n_data = scheme.n_data(N)
    last_data = n_pilots + n_data - 1
    half = window // 2
    powers = M ** np.arange(L - 1, -1, -1)
    pilot_rank = int(scheme.ranks([1])[0])

    # pilots and tail are +1, so untouched entries already hold the known ranks
    decided = np.full(N, pilot_rank, dtype=np.int64)
    metric = 0.0
    for n0 in range(n_pilots, last_data + 1):
        s0 = max(n0 - half, n_pilots)
        end = min(n0 + half, N - 1)
        width = end - s0 + 1
        n_unknown = min(end, last_data) - s0 + 1

        hyp = hypotheses(M, n_unknown)
        feedback = np.broadcast_to(decided[s0 - L + 1:s0], (hyp.shape[0], L - 1))
        tail = np.broadcast_to(decided[s0 + n_unknown:end + 1], (hyp.shape[0], width - n_unknown))
        ext = np.concatenate([feedback, hyp, tail], axis=1)

        codes = sliding_window_view(ext, L, axis=1) @ powers
        parity = (s0 - L + 1 + np.arange(L - 1 + width)) % scheme.n_parities
        steps = scheme.step_table[parity, ext]
        rel = np.concatenate(
            [np.zeros((hyp.shape[0], 1), dtype=np.int64), np.cumsum(steps[:, :width - 1], axis=1)], axis=1
        ) % p

        z = Z[s0 + np.arange(width)[None, :], codes]
        score = np.abs(np.sum(scheme.phasors[rel].conj() * z, axis=1))
        best = int(np.argmax(score))
        decided[n0] = hyp[best, n0 - s0]
        metric = float(score[best])

    symbols: List[int] = [scheme.alphabet[r] for r in decided[n_pilots:last_data + 1]]
    logger.debug(f"MSD (window={window}) decided {len(symbols)} symbols")
    return Decision(symbols=tuple(symbols), final_metric=metric)
