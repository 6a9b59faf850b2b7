"""
Exhaustive-search reference detectors.

Every data sequence is synthesized with the modulator (pilots prepended,
tail appended) and scored over the data and tail intervals:

    coherent:     Re[ exp(-j*assumed_phase) * sum r * conj(s) ]
    noncoherent:  | sum r * conj(s) |

Sequences are enumerated in lexicographic rank order and the first
maximum wins.
"""

import logging
from typing import Callable

import numpy as np

from src.detectors.trellis import Decision
from src.schema.errors import FrameMismatchError, OracleRefusalError
from src.waveforms.modulator import IqFrame, modulate_batch
from src.waveforms.schemes import Scheme

logger = logging.getLogger(__name__)

MAX_ORACLE_SYMBOLS = 12
CHUNK = 4096


def _search(frame: IqFrame, scheme: Scheme, score: Callable[[np.ndarray], np.ndarray]) -> Decision:
    n_pilots = scheme.n_pilots
    n_data = scheme.n_data(frame.n_symbols)
    if n_data < 0:
        raise FrameMismatchError(f"frame of {frame.n_symbols} symbols is shorter than its pilots and tail")
    if n_data > MAX_ORACLE_SYMBOLS:
        raise OracleRefusalError(
            f"exhaustive search over {scheme.M}^{n_data} sequences refused; limit is {MAX_ORACLE_SYMBOLS} data symbols"
        )
    M, k = scheme.M, frame.k
    received = frame.samples[n_pilots * k:]
    powers = M ** np.arange(n_data - 1, -1, -1)
    pilots = np.array(scheme.pilot_symbols, dtype=np.int64)
    tail = np.array(scheme.tail_symbols, dtype=np.int64)
    total = M ** n_data

    best_index, best_score = -1, -np.inf
    for start in range(0, total, CHUNK):
        codes = np.arange(start, min(start + CHUNK, total))
        ranks = (codes[:, None] // powers[None, :]) % M
        data = scheme.alphabet_array[ranks]
        syms = np.concatenate(
            [np.broadcast_to(pilots, (len(codes), n_pilots)), data, np.broadcast_to(tail, (len(codes), len(tail)))],
            axis=1,
        )
        waves, _ = modulate_batch(scheme, syms, k)
        correlation = waves[:, n_pilots * k:].conj() @ received
        scores = score(correlation)
        i = int(np.argmax(scores))
        if scores[i] > best_score:
            best_index, best_score = start + i, float(scores[i])

    ranks = (best_index // powers) % M
    symbols = tuple(int(scheme.alphabet[r]) for r in ranks)
    logger.debug(f"Oracle searched {total} sequences, best metric {best_score:.4f}")
    return Decision(symbols=symbols, final_metric=best_score)


def oracle_coherent(frame: IqFrame, scheme: Scheme, assumed_phase: float = 0.0) -> Decision:
    """Exhaustive coherent ML decision."""
    rotation = np.exp(-1j * assumed_phase)
    return _search(frame, scheme, lambda c: np.real(rotation * c))


def oracle_noncoherent(frame: IqFrame, scheme: Scheme) -> Decision:
    """Exhaustive noncoherent ML decision."""
    return _search(frame, scheme, np.abs)
