"""
Distance spectrum by brute-force enumeration and the estimated union bound.

Pairs of data sequences leave a common state (the pilot state, phase 0)
with different first symbols and are followed until their coherent
trellis states first coincide. The merge state after symbol j is

    (cumulative phase of symbols up to j-L+1, last L-1 symbols)

and the pair's squared distance is accumulated over the intervals up to
the merge, normalized per bit energy:

    d^2 = log2(M) / (2k) * sum |s1 - s2|^2

so two antipodal one-bit signals are at d^2 = 2. Event multiplicities
stand in for the error coefficients of the bound.
"""

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Sequence, Tuple

import numpy as np

from src.analysis.stats import q_function
from src.schema.errors import OracleRefusalError, ParameterError
from src.waveforms.modulator import modulate_batch
from src.waveforms.schemes import Scheme

logger = logging.getLogger(__name__)

MAX_DEPTH = 8
MAX_PAIR_SPACE = 1 << 16
ROUND_DECIMALS = 8


@dataclass(frozen=True)
class DistanceSpectrum:
    """(d^2, multiplicity) entries sorted by ascending d^2."""

    entries: Tuple[Tuple[float, int], ...]
    depth: int

    def __iter__(self) -> Iterator[Tuple[float, int]]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def d2_min(self) -> float:
        if not self.entries:
            raise ParameterError("empty distance spectrum")
        return self.entries[0][0]


def _merge_keys(scheme: Scheme, ranks: np.ndarray, start_parity: int) -> np.ndarray:
    """Coherent-trellis state after each data symbol, for sequences preceded by the pilots."""
    M, L = scheme.M, scheme.L
    n_pilots = scheme.n_pilots
    pilot_rank = int(scheme.ranks([1])[0])
    n, depth = ranks.shape
    full = np.concatenate([np.full((n, n_pilots), pilot_rank), ranks], axis=1)
    parity = (start_parity + np.arange(n_pilots + depth)) % scheme.n_parities
    cum = np.cumsum(scheme.step_table[parity, full], axis=1) % scheme.p

    keys = np.empty((n, depth), dtype=np.int64)
    for j in range(depth):
        last = n_pilots + j
        recent = 0
        for i in range(last - L + 2, last + 1):
            recent = recent * M + full[:, i]
        completed = last - L + 1
        theta = cum[:, completed] if completed >= 0 else 0
        keys[:, j] = theta * M ** (L - 1) + recent
    return keys


def sequence_distance(scheme: Scheme, a: Sequence[int], b: Sequence[int], k: int = 4) -> float:
    """Normalized squared distance between the data intervals of two equal-length sequences."""
    if len(a) != len(b):
        raise ParameterError(f"sequences differ in length: {len(a)} vs {len(b)}")
    pilots = list(scheme.pilot_symbols)
    waves, _ = modulate_batch(scheme, np.array([pilots + list(a), pilots + list(b)], dtype=np.int64), k)
    data = waves[:, scheme.n_pilots * k:]
    return float(scheme.bits_per_symbol / (2.0 * k) * np.sum(np.abs(data[0] - data[1]) ** 2))


def pair_distances(scheme: Scheme, depth: int, k: int = 4, start_parity: int = 0):
    """
    First-merge events up to `depth` symbols.

    Returns:
        (index pairs (i, j) with i < j into the sequence list, d^2 of each, sequences as symbols)
    """
    if not 1 <= depth <= MAX_DEPTH:
        raise ParameterError(f"depth must lie in [1, {MAX_DEPTH}], got {depth}")
    if scheme.M ** (2 * depth) > MAX_PAIR_SPACE:
        raise OracleRefusalError(
            f"distance enumeration over {scheme.M}^{2 * depth} pairs refused; limit is {MAX_PAIR_SPACE}"
        )
    M, n_pilots = scheme.M, scheme.n_pilots
    codes = np.arange(M ** depth)
    ranks = (codes[:, None] // (M ** np.arange(depth - 1, -1, -1))[None, :]) % M
    symbols = scheme.alphabet_array[ranks]
    pilots = np.broadcast_to(np.array(scheme.pilot_symbols, dtype=np.int64), (len(codes), n_pilots))

    # pilots start at start_parity so the data symbols see the requested h-cycle position
    waves, _ = modulate_batch(scheme, np.concatenate([pilots, symbols], axis=1), k,
                              start_index=start_parity)
    waves = waves[:, n_pilots * k:].reshape(len(codes), depth, k)
    keys = _merge_keys(scheme, ranks, start_parity)

    i_idx, j_idx = np.triu_indices(len(codes), k=1)
    split = ranks[i_idx, 0] != ranks[j_idx, 0]
    i_idx, j_idx = i_idx[split], j_idx[split]

    same = keys[i_idx] == keys[j_idx]
    merged = same.any(axis=1)
    first = np.argmax(same, axis=1)
    i_idx, j_idx, first = i_idx[merged], j_idx[merged], first[merged]

    diff = np.sum(np.abs(waves[i_idx] - waves[j_idx]) ** 2, axis=2)
    upto = np.arange(depth)[None, :] <= first[:, None]
    d2 = scheme.bits_per_symbol / (2.0 * k) * np.sum(diff * upto, axis=1)
    return np.stack([i_idx, j_idx], axis=1), d2, symbols


def distance_spectrum(scheme: Scheme, depth: int = 6, k: int = 4, start_parity: int = 0) -> DistanceSpectrum:
    """Spectrum of first-merge events within `depth` symbols."""
    _, d2, _ = pair_distances(scheme, depth, k, start_parity)
    counts = Counter(np.round(d2, ROUND_DECIMALS).tolist())
    entries = tuple(sorted((float(d), int(c)) for d, c in counts.items()))
    logger.debug(f"{scheme.name.value} spectrum depth={depth}: {len(entries)} distinct distances")
    return DistanceSpectrum(entries=entries, depth=depth)


def union_bound(spectrum: DistanceSpectrum, ebn0_db: float, terms: int = 2) -> float:
    """Estimated union bound sum C_l * Q(sqrt(d_l^2 * Eb/N0)) over the leading terms."""
    if terms < 1:
        raise ParameterError(f"terms must be >= 1, got {terms}")
    ebn0 = 10.0 ** (ebn0_db / 10.0)
    total = 0.0
    for d2, multiplicity in spectrum.entries[:terms]:
        total += multiplicity * float(q_function(np.sqrt(d2 * ebn0)))
    return total
