"""
Noncoherent MLSD with survived phases.

The trellis has only the M^L combo states. Each state keeps up to N_p
survivors, each carrying a complex path metric D and an integer survived
phase P. A branch from predecessor survivor (P, D) into state d at
interval n adds

    exp(-j*(2*pi/p)*P) * z_d

to D. P is the cumulative phase theta_{n-L} carried into the branch. The
kept survivor's phase then advances by the step of d's oldest symbol, the
symbol that leaves the window at the next interval, so it is
theta_{n-L+1} when carried into the following branch. Survivors are
ranked by |D|; the decision is the terminal survivor with the largest |D|.

Scaling every correlation by exp(j*v) scales every D by the same factor,
so the decisions do not depend on the carrier phase.

Ties in |D| go to the lowest predecessor state, then the lowest slot.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.detectors.trellis import Decision, PhasedState, PhasedTrellis, SurvivorEntry, frame_correlations
from src.frontend.filter_bank import FilterBank
from src.schema.errors import ParameterError
from src.waveforms.modulator import IqFrame
from src.waveforms.schemes import Scheme

logger = logging.getLogger(__name__)

MAX_SURVIVORS = 4


@dataclass(frozen=True)
class Candidate:
    """One transition into a state, before selection.

    exiting_symbol is the oldest symbol of the destination combo, whose
    phase step the survivor carries into the next interval.
    """

    prev_phase: int
    prev_metric: complex
    exiting_symbol: int
    correlation: complex
    pred_state: int = 0
    slot: int = 0


@dataclass(frozen=True)
class Survivor:
    phase: int
    metric: complex
    pred_state: int
    slot: int


@dataclass(frozen=True)
class SurvivorTable:
    """Survivors of every state after one interval, shape (states, N_p) each."""

    metric: np.ndarray
    phase: np.ndarray
    alive: np.ndarray


def _check_survivors(n_survivors: int):
    if not 1 <= n_survivors <= MAX_SURVIVORS:
        raise ParameterError(f"n_survivors must lie in [1, {MAX_SURVIVORS}], got {n_survivors}")


def select_survivors(magnitude: np.ndarray, pred: np.ndarray, slot: np.ndarray, n_keep: int) -> np.ndarray:
    """
    Indices of the n_keep best candidates along the last axis.

    Order: descending magnitude, then ascending predecessor state, then
    ascending slot. Dead candidates must carry magnitude -1.
    """
    order = np.lexsort((slot, pred, -magnitude), axis=-1)
    return order[..., :n_keep]


def add_compare_select(
    scheme: Scheme,
    prev_metric: np.ndarray,
    prev_phase: np.ndarray,
    correlation: np.ndarray,
    steps: np.ndarray,
    dead: np.ndarray,
    pred: np.ndarray,
    slot: np.ndarray,
    n_keep: int,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Survivor update along the last axis of the candidate arrays.

    Returns:
        (kept metrics, kept phases, kept magnitudes with -1 for dead, kept candidate indices)
    """
    metric = prev_metric + scheme.phasors[prev_phase].conj() * correlation
    magnitude = np.where(dead, -1.0, np.abs(metric))
    keep = select_survivors(magnitude, pred, slot, n_keep)
    phase = (np.take_along_axis(prev_phase, keep, axis=-1) + np.take_along_axis(steps, keep, axis=-1)) % scheme.p
    return (
        np.take_along_axis(metric, keep, axis=-1),
        phase,
        np.take_along_axis(magnitude, keep, axis=-1),
        keep,
    )


def update_state(
    candidates: Sequence[Candidate], scheme: Scheme, n_survivors: int, parity: int = 0
) -> List[Survivor]:
    """
    Add-compare-select for one state.

    Each candidate's metric becomes prev_metric + exp(-j*(2*pi/p)*prev_phase) * correlation
    and its phase prev_phase plus the step of the exiting symbol. The
    n_survivors candidates with the largest |metric| are kept, best first.
    """
    _check_survivors(n_survivors)
    if not candidates:
        raise ParameterError("update_state needs at least one candidate")
    prev_phase = np.array([c.prev_phase for c in candidates], dtype=np.int64) % scheme.p
    prev_metric = np.array([c.prev_metric for c in candidates], dtype=np.complex128)
    correlation = np.array([c.correlation for c in candidates], dtype=np.complex128)
    pred = np.array([c.pred_state for c in candidates], dtype=np.int64)
    slot = np.array([c.slot for c in candidates], dtype=np.int64)
    steps = np.array([scheme.phase_step(parity, c.exiting_symbol) for c in candidates], dtype=np.int64)

    metric, phase, _, keep = add_compare_select(
        scheme, prev_metric, prev_phase, correlation, steps, np.zeros(len(candidates), dtype=bool),
        pred, slot, min(n_survivors, len(candidates)),
    )
    return [
        Survivor(int(phase[i]), complex(metric[i]), int(pred[keep[i]]), int(slot[keep[i]]))
        for i in range(len(keep))
    ]


class ProposedDetector:
    """
    Survived-phase noncoherent Viterbi detector.

    Not safe to share between concurrent decodes; construct one per worker.
    """

    def __init__(self, scheme: Scheme, banks: Sequence[FilterBank], n_survivors: int = 1):
        _check_survivors(n_survivors)
        self.scheme = scheme
        self.banks = tuple(banks)
        self.n_survivors = n_survivors
        self.trellis = PhasedTrellis(scheme)
        M, Np = scheme.M, n_survivors
        self._pred = np.repeat(self.trellis.predecessors, Np, axis=1)
        self._slot = np.ascontiguousarray(np.broadcast_to(np.tile(np.arange(Np), M), self._pred.shape))
        self._terminal: Optional[tuple] = None

    def initial_table(self) -> SurvivorTable:
        """One live survivor with zero metric and phase in the pilot state."""
        S, Np = self.trellis.n_states, self.n_survivors
        alive = np.zeros((S, Np), dtype=bool)
        alive[self.trellis.initial_state, 0] = True
        return SurvivorTable(
            metric=np.zeros((S, Np), dtype=np.complex128), phase=np.zeros((S, Np), dtype=np.int64), alive=alive,
        )

    def advance(
        self, table: SurvivorTable, correlations: np.ndarray, parity: int, tail: bool = False
    ) -> Tuple[SurvivorTable, np.ndarray, np.ndarray]:
        """
        One trellis interval.

        Args:
            table: survivors after the previous interval
            correlations: the M^L filter outputs of this interval
            parity: h-cycle position of the destination combos' oldest symbol
            tail: keep only states whose newest symbol is the +1 tail symbol

        Returns:
            (survivors after this interval, back-pointer states, back-pointer slots)
        """
        trellis, pred, slot = self.trellis, self._pred, self._slot
        dead = ~table.alive[pred, slot]
        if tail:
            dead = dead | ~trellis.tail_states[:, None]
        steps = np.broadcast_to(trellis.phase_increments(parity)[:, None], pred.shape)
        metric, phase, magnitude, keep = add_compare_select(
            self.scheme, table.metric[pred, slot], table.phase[pred, slot],
            np.asarray(correlations)[:, None], steps, dead, pred, slot, self.n_survivors,
        )
        kept = SurvivorTable(metric=metric, phase=phase, alive=magnitude >= 0.0)
        return kept, np.take_along_axis(pred, keep, axis=1), np.take_along_axis(slot, keep, axis=1)

    def detect(self, frame: IqFrame) -> Decision:
        scheme, M, Np = self.scheme, self.scheme.M, self.n_survivors
        S = self.trellis.n_states
        Z = frame_correlations(frame, scheme, self.banks)
        n_pilots = scheme.n_pilots
        n_data = scheme.n_data(frame.n_symbols)
        n_steps = frame.n_symbols - n_pilots

        table = self.initial_table()
        bp_state = np.empty((n_steps, S, Np), dtype=np.int64)
        bp_slot = np.empty((n_steps, S, Np), dtype=np.int64)
        for step, n in enumerate(range(n_pilots, frame.n_symbols)):
            parity = (n - scheme.L + 1) % scheme.n_parities
            table, bp_state[step], bp_slot[step] = self.advance(table, Z[n], parity, tail=step >= n_data)

        final = np.where(table.alive, np.abs(table.metric), -1.0)
        best = int(np.argmax(final))
        state, s = divmod(best, Np)
        final_metric = float(final[state, s])

        symbols: List[int] = [0] * n_data
        for step in range(n_steps - 1, -1, -1):
            if step < n_data:
                symbols[step] = scheme.alphabet[state % M]
            state, s = int(bp_state[step, state, s]), int(bp_slot[step, state, s])

        self._terminal = (table.metric, table.phase, table.alive, bp_state[-1], bp_slot[-1])
        logger.debug(f"Proposed detector (Np={Np}) decided {n_data} symbols, |metric| {final_metric:.4f}")
        return Decision(symbols=tuple(symbols), final_metric=final_metric)

    def states(self) -> List[PhasedState]:
        """Terminal states of the last decode with their live survivors, sorted by descending |metric|."""
        if self._terminal is None:
            return []
        metric, phase, alive, bp_state, bp_slot = self._terminal
        out = []
        for d in range(self.trellis.n_states):
            entries = [
                SurvivorEntry(int(phase[d, s]), complex(metric[d, s]), (int(bp_state[d, s]), int(bp_slot[d, s])))
                for s in range(self.n_survivors) if alive[d, s]
            ]
            if entries:
                out.append(self.trellis.describe(d, entries))
        return out


def nc_mlsd_proposed(
    frame: IqFrame, scheme: Scheme, banks: Sequence[FilterBank], n_survivors: int = 1
) -> Decision:
    """Noncoherent MLSD keeping n_survivors survived phases per state."""
    return ProposedDetector(scheme, banks, n_survivors).detect(frame)
