"""
Modulation schemes for aeronautical telemetry CPM.

Two schemes are defined:
- PCMFM: binary, h = 7/10, 6th-order Bessel premodulation filter (L = 3), p = 20
- ARTM_CPM: quaternary multi-h, h alternating 4/16, 5/16, 3RC pulse, p = 32

All cumulative phases are integers modulo p in units of 2*pi/p. The
per-symbol phase increment pi*h*alpha is therefore the integer
alpha * h.numerator * p / (2 * h.denominator).
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Dict, Sequence, Tuple

import numpy as np

from src.schema.errors import AlphabetError, ParameterError


class SchemeName(str, Enum):
    PCMFM = "PCMFM"
    ARTM_CPM = "ARTM_CPM"


class PulseKind(str, Enum):
    RC3 = "RC3"
    BESSEL6 = "BESSEL6"


@dataclass(frozen=True)
class Scheme:
    """Full CPM parameterization (alphabet, modulation-index cycle, pulse, memory, phase modulus)."""

    name: SchemeName
    M: int
    alphabet: Tuple[int, ...]
    h_cycle: Tuple[Fraction, ...]
    L: int
    p: int
    pulse_kind: PulseKind

    def __post_init__(self):
        if len(self.alphabet) != self.M:
            raise ParameterError(f"{self.name.value}: alphabet has {len(self.alphabet)} symbols, M={self.M}")
        if list(self.alphabet) != sorted(self.alphabet) or any(a % 2 == 0 for a in self.alphabet):
            raise ParameterError(f"{self.name.value}: alphabet must be ascending odd integers")
        if self.L < 1 or not self.h_cycle:
            raise ParameterError(f"{self.name.value}: L must be >= 1 and h_cycle nonempty")
        for h in self.h_cycle:
            if (h.numerator * self.p) % (2 * h.denominator) != 0:
                raise ParameterError(
                    f"{self.name.value}: h={h} does not give integer phase steps on modulus p={self.p}"
                )
        reachable = reachable_phase_count(self)
        if reachable != self.p:
            raise ParameterError(
                f"{self.name.value}: {reachable} reachable cumulative phases, modulus p={self.p}"
            )

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.M))

    @property
    def n_parities(self) -> int:
        """Period of the modulation-index cycle."""
        return len(self.h_cycle)

    @property
    def n_pilots(self) -> int:
        return self.L - 1

    @property
    def pilot_symbols(self) -> Tuple[int, ...]:
        return (1,) * (self.L - 1)

    @property
    def n_tail(self) -> int:
        """Known +1 symbols closing a frame, so every data pulse is observed in full."""
        return self.L - 1

    @property
    def tail_symbols(self) -> Tuple[int, ...]:
        return (1,) * (self.L - 1)

    def n_data(self, n_symbols: int) -> int:
        """Data symbols in a frame of n_symbols (pilots and tail excluded)."""
        return n_symbols - self.n_pilots - self.n_tail

    def h(self, index: int) -> Fraction:
        """Modulation index applied to the symbol at `index`."""
        return self.h_cycle[index % len(self.h_cycle)]

    def step_units(self, parity: int) -> int:
        h = self.h_cycle[parity % len(self.h_cycle)]
        return h.numerator * self.p // (2 * h.denominator)

    def phase_step(self, index: int, symbol: int) -> int:
        """Cumulative-phase increment of a completed symbol, as an integer mod p."""
        if symbol not in self.alphabet:
            raise AlphabetError(f"symbol {symbol} not in {self.name.value} alphabet {self.alphabet}")
        return (symbol * self.step_units(index)) % self.p

    @cached_property
    def step_table(self) -> np.ndarray:
        """Phase increments indexed by [parity, alphabet rank]."""
        return np.array(
            [[(a * self.step_units(par)) % self.p for a in self.alphabet] for par in range(self.n_parities)],
            dtype=np.int64,
        )

    @cached_property
    def h_values(self) -> np.ndarray:
        return np.array([float(h) for h in self.h_cycle])

    @cached_property
    def alphabet_array(self) -> np.ndarray:
        return np.array(self.alphabet, dtype=np.int64)

    @cached_property
    def phasors(self) -> np.ndarray:
        """exp(j*2*pi*m/p) for m = 0..p-1."""
        table = np.exp(2j * np.pi * np.arange(self.p) / self.p)
        table.setflags(write=False)
        return table

    @cached_property
    def bit_table(self) -> np.ndarray:
        """Natural-binary bits of each alphabet rank, shape (M, bits_per_symbol), MSB first."""
        nbits = self.bits_per_symbol
        ranks = np.arange(self.M)
        return ((ranks[:, None] >> np.arange(nbits - 1, -1, -1)) & 1).astype(np.uint8)

    def ranks(self, symbols: Sequence[int]) -> np.ndarray:
        """Map symbols to their alphabet rank (alphabet sorted ascending)."""
        arr = np.asarray(symbols, dtype=np.int64)
        idx = np.searchsorted(self.alphabet_array, arr)
        idx = np.clip(idx, 0, self.M - 1)
        bad = self.alphabet_array[idx] != arr
        if np.any(bad):
            offending = sorted(set(arr[bad].ravel().tolist()))
            raise AlphabetError(f"symbols {offending} not in {self.name.value} alphabet {self.alphabet}")
        return idx


def reachable_phase_count(scheme: Scheme) -> int:
    """Number of distinct cumulative phases (pi * sum h_i alpha_i) mod 2*pi reachable from zero."""
    n_par = len(scheme.h_cycle)
    steps = [
        [(a * scheme.h_cycle[par].numerator * scheme.p // (2 * scheme.h_cycle[par].denominator)) % scheme.p
         for a in scheme.alphabet]
        for par in range(n_par)
    ]
    seen = {(0, 0)}
    frontier = [(0, 0)]
    while frontier:
        phase, par = frontier.pop()
        for step in steps[par]:
            nxt = ((phase + step) % scheme.p, (par + 1) % n_par)
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return len({phase for phase, _ in seen})


PCMFM = Scheme(
    name=SchemeName.PCMFM,
    M=2,
    alphabet=(-1, 1),
    h_cycle=(Fraction(7, 10),),
    L=3,
    p=20,
    pulse_kind=PulseKind.BESSEL6,
)

# h_0 = 4/16 at symbol index 0, alternating thereafter
ARTM_CPM = Scheme(
    name=SchemeName.ARTM_CPM,
    M=4,
    alphabet=(-3, -1, 1, 3),
    h_cycle=(Fraction(4, 16), Fraction(5, 16)),
    L=3,
    p=32,
    pulse_kind=PulseKind.RC3,
)

SCHEMES: Dict[SchemeName, Scheme] = {
    SchemeName.PCMFM: PCMFM,
    SchemeName.ARTM_CPM: ARTM_CPM,
}


def get_scheme(name) -> Scheme:
    """Look up a scheme by name (enum member or string such as 'PCMFM')."""
    try:
        return SCHEMES[SchemeName(name)]
    except ValueError:
        raise ParameterError(f"unknown scheme {name!r}; expected one of {[s.value for s in SchemeName]}")
