"""
Coherent maximum-likelihood sequence detection.

Viterbi over the p * M^(L-1) coherent states with the real branch metric

    Re[ exp(-j*assumed_phase) * exp(-j*(2*pi/p)*theta_{n-L}) * z_c ]

Data and tail intervals contribute; the trellis starts from the single state
implied by the pilots with metric 0 and only tail-consistent branches are
kept during the tail.
"""

import logging
from typing import List, Optional, Sequence

import numpy as np

from src.detectors.trellis import CoherentState, CoherentTrellis, Decision, frame_correlations
from src.frontend.filter_bank import FilterBank
from src.waveforms.modulator import IqFrame
from src.waveforms.schemes import Scheme

logger = logging.getLogger(__name__)


class CoherentMlsd:
    """
    Coherent MLSD for one scheme.

    An instance keeps the trellis of its last decode and must not be
    shared between concurrent decodes.
    """

    def __init__(self, scheme: Scheme, banks: Sequence[FilterBank]):
        self.scheme = scheme
        self.banks = tuple(banks)
        self.trellis = CoherentTrellis(scheme)
        self._metric: Optional[np.ndarray] = None
        self._last_bp: Optional[np.ndarray] = None

    def detect(self, frame: IqFrame, assumed_phase: float = 0.0) -> Decision:
        scheme, trellis = self.scheme, self.trellis
        Z = frame_correlations(frame, scheme, self.banks)
        n_pilots = scheme.n_pilots
        n_data = scheme.n_data(frame.n_symbols)
        n_steps = frame.n_symbols - n_pilots

        metric = np.full(trellis.n_states, -np.inf)
        metric[trellis.initial_state] = 0.0
        derotate = np.exp(-1j * assumed_phase) * scheme.phasors[trellis.theta].conj()
        back = np.empty((n_steps, trellis.n_states), dtype=np.int64)
        rows = np.arange(trellis.n_states)

        for step, n in enumerate(range(n_pilots, frame.n_symbols)):
            parity = (n - scheme.L + 1) % scheme.n_parities
            pred = trellis.predecessors[parity]
            branch = np.real(derotate[:, None] * Z[n][trellis.codes])
            candidates = metric[pred] + branch[pred, trellis.entering_rank[:, None]]
            best = np.argmax(candidates, axis=1)
            back[step] = pred[rows, best]
            metric = candidates[rows, best]
            if step >= n_data:
                metric = np.where(trellis.tail_states, metric, -np.inf)

        state = int(np.argmax(metric))
        final_metric = float(metric[state])
        symbols: List[int] = [0] * n_data
        for step in range(n_steps - 1, -1, -1):
            if step < n_data:
                symbols[step] = scheme.alphabet[state % scheme.M]
            state = int(back[step, state])

        self._metric = metric
        self._last_bp = back[-1]
        logger.debug(f"Coherent MLSD decided {n_data} symbols, metric {final_metric:.4f}")
        return Decision(symbols=tuple(symbols), final_metric=final_metric)

    def states(self) -> List[CoherentState]:
        """Reachable terminal states of the last decode, best first."""
        if self._metric is None:
            return []
        order = np.argsort(-self._metric, kind="stable")
        return [
            self.trellis.describe(int(s), self._metric[s], self._last_bp[s])
            for s in order if np.isfinite(self._metric[s])
        ]


def mlsd_coherent(
    frame: IqFrame, scheme: Scheme, banks: Sequence[FilterBank], assumed_phase: float = 0.0
) -> Decision:
    """Coherent MLSD with the receiver's carrier-phase estimate `assumed_phase`."""
    return CoherentMlsd(scheme, banks).detect(frame, assumed_phase)
