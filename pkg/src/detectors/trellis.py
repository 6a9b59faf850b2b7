"""
Trellis structures shared by the sequence detectors.

Coherent trellis: after interval n the state is (theta_{n-L+1}, alpha_{n-L+2..n}),
indexed as theta * M^(L-1) + code(recent), p * M^(L-1) states.

Phased trellis: after interval n the state is the combo code of the last L
symbols alpha_{n-L+1..n}, M^L states; the cumulative phase rides along each
survivor instead of being a state coordinate.

Both trellises start in the state implied by the pilots. During the tail
intervals only branches entering with a +1 symbol are allowed, so every
surviving path ends with the tail as its newest symbols.

Both trellises are time-varying with the h-cycle. Transition tables are
built per parity of the oldest symbol of the destination combo, i.e. the
symbol at absolute index n-L+1 for interval n.
"""

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import List, Sequence, Tuple

import numpy as np

from src.frontend.filter_bank import FilterBank, correlate_frame
from src.schema.errors import FrameMismatchError, ParameterError
from src.waveforms.modulator import IqFrame
from src.waveforms.schemes import Scheme

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Decision:
    """Decided data symbols (pilots and tail stripped) and the winning metric."""

    symbols: Tuple[int, ...]
    final_metric: float

    def __len__(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class CoherentState:
    phase_index: int
    recent: Tuple[int, ...]
    metric: float
    back_pointer: int


@dataclass(frozen=True)
class SurvivorEntry:
    survived_phase: int
    metric: complex
    back_pointer: Tuple[int, int]


@dataclass(frozen=True)
class PhasedState:
    recent: Tuple[int, ...]
    survivors: Tuple[SurvivorEntry, ...]


def _require_memory(scheme: Scheme):
    if scheme.L < 2:
        raise ParameterError(f"trellis detectors need L >= 2, got L={scheme.L}")


def digits_of(scheme: Scheme, code: int, width: int) -> Tuple[int, ...]:
    """Symbols of a mixed-radix code of `width` digits, oldest first."""
    out = []
    for _ in range(width):
        out.append(scheme.alphabet[code % scheme.M])
        code //= scheme.M
    return tuple(reversed(out))


def pilot_code(scheme: Scheme, width: int) -> int:
    """Code of `width` pilot (+1) symbols."""
    rank = int(scheme.ranks([1])[0])
    code = 0
    for _ in range(width):
        code = code * scheme.M + rank
    return code


def frame_correlations(frame: IqFrame, scheme: Scheme, banks: Sequence[FilterBank]) -> np.ndarray:
    """Validate a frame against scheme and banks and return its correlation matrix."""
    if len(banks) != scheme.n_parities:
        raise FrameMismatchError(f"{scheme.name.value} needs {scheme.n_parities} filter banks, got {len(banks)}")
    for par, bank in enumerate(banks):
        if bank.parity != par or bank.size != scheme.M ** scheme.L:
            raise FrameMismatchError(f"filter bank {par} does not belong to {scheme.name.value}")
    if scheme.n_data(frame.n_symbols) < 0:
        raise FrameMismatchError(
            f"frame of {frame.n_symbols} symbols is shorter than its {scheme.n_pilots} pilot and "
            f"{scheme.n_tail} tail symbols"
        )
    return correlate_frame(frame, banks)


class CoherentTrellis:
    """State/branch tables of the coherent MLSD trellis."""

    def __init__(self, scheme: Scheme):
        _require_memory(scheme)
        self.scheme = scheme
        M, L, p = scheme.M, scheme.L, scheme.p
        self.n_recent = M ** (L - 1)
        self.n_states = p * self.n_recent
        self.n_branches = self.n_states * M

        states = np.arange(self.n_states)
        self.theta = states // self.n_recent
        recent = states % self.n_recent
        # combo code of interval n for each (source state, new symbol rank)
        self.codes = recent[:, None] * M + np.arange(M)[None, :]

        dest_recent = states % self.n_recent
        self.entering_rank = dest_recent % M
        dropped = np.arange(M)
        self.predecessors = []
        for par in range(scheme.n_parities):
            theta_prev = (self.theta[:, None] - scheme.step_table[par][None, :]) % p
            pred = theta_prev * self.n_recent + dropped[None, :] * (self.n_recent // M) + (dest_recent // M)[:, None]
            self.predecessors.append(np.sort(pred, axis=1))

        self.initial_state = pilot_code(scheme, L - 1)
        # destination states reachable in a tail interval: newest symbol +1
        self.tail_states = self.entering_rank == int(scheme.ranks([1])[0])
        self._check_structure()

    def _check_structure(self):
        scheme = self.scheme
        assert self.n_states == scheme.p * scheme.M ** (scheme.L - 1)
        assert self.n_branches == self.n_states * scheme.M
        for pred in self.predecessors:
            assert pred.shape == (self.n_states, scheme.M)
            # every source state leaves on exactly M branches
            assert np.all(np.bincount(pred.ravel(), minlength=self.n_states) == scheme.M)
        logger.debug(
            f"{scheme.name.value} coherent trellis: {self.n_states} states, {self.n_branches} branches"
        )

    def describe(self, state: int, metric: float = 0.0, back_pointer: int = -1) -> CoherentState:
        return CoherentState(
            phase_index=int(self.theta[state]),
            recent=digits_of(self.scheme, int(state % self.n_recent), self.scheme.L - 1),
            metric=float(metric),
            back_pointer=int(back_pointer),
        )


class PhasedTrellis:
    """State/branch tables of the survived-phase trellis (M^L states, M^(L+1) branches)."""

    def __init__(self, scheme: Scheme):
        _require_memory(scheme)
        self.scheme = scheme
        M, L = scheme.M, scheme.L
        self.n_states = M ** L
        self.n_branches = M ** (L + 1)

        states = np.arange(self.n_states)
        self.oldest_rank = states // (M ** (L - 1))
        # predecessor of state d that dropped rank m: m * M^(L-1) + d // M, ascending in m
        self.predecessors = np.arange(M)[None, :] * (M ** (L - 1)) + (states // M)[:, None]
        self.initial_state = pilot_code(scheme, L)
        self.tail_states = states % M == int(scheme.ranks([1])[0])
        self._check_structure()

    def _check_structure(self):
        scheme = self.scheme
        assert self.n_states == scheme.M ** scheme.L
        assert self.predecessors.size == self.n_branches
        assert np.all(np.bincount(self.predecessors.ravel(), minlength=self.n_states) == scheme.M)
        logger.debug(
            f"{scheme.name.value} phased trellis: {self.n_states} states, {self.n_branches} branches"
        )

    def phase_increments(self, parity: int) -> np.ndarray:
        """Survived-phase increment into each destination state: step of its oldest symbol."""
        return self.scheme.step_table[parity, self.oldest_rank]

    def entering_exit_pairs(self) -> List[Tuple[int, int, int]]:
        """(state, exiting symbol 1, exiting symbol 2) for every pair of branches merging into a state."""
        pairs = []
        for d in range(self.n_states):
            exits = [self.scheme.alphabet[int(pred // self.scheme.M ** (self.scheme.L - 1))]
                     for pred in self.predecessors[d]]
            pairs.extend((d, a, b) for a, b in combinations(exits, 2))
        return pairs

    def has_same_sign_merges(self) -> bool:
        """True when two branches entering one state can carry exiting symbols of the same sign."""
        return any(a * b > 0 for _, a, b in self.entering_exit_pairs())

    def describe(self, state: int, survivors: Sequence[SurvivorEntry] = ()) -> PhasedState:
        return PhasedState(recent=digits_of(self.scheme, int(state), self.scheme.L), survivors=tuple(survivors))
