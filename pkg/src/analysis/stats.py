"""Error-rate statistics."""

from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import erfc

from src.schema.errors import ParameterError

Z_95 = 1.96


def q_function(x):
    """Gaussian tail probability Q(x)."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


def ber_confint(errors: int, bits: int) -> Tuple[float, float, float]:
    """
    BER estimate with a 95% interval.

    Normal approximation; with zero errors the upper limit is 3/bits
    (rule of three).
    """
    if bits < 1:
        raise ParameterError(f"bits must be >= 1, got {bits}")
    if not 0 <= errors <= bits:
        raise ParameterError(f"errors must lie in [0, bits={bits}], got {errors}")
    if errors == 0:
        return 0.0, 0.0, 3.0 / bits
    ber = errors / bits
    half = Z_95 * np.sqrt(ber * (1.0 - ber) / bits)
    return ber, max(0.0, ber - half), min(1.0, ber + half)


def antipodal_theory(ebn0_db: float) -> float:
    """Bit error probability of antipodal signalling, Q(sqrt(2*Eb/N0))."""
    return float(q_function(np.sqrt(2.0 * 10.0 ** (ebn0_db / 10.0))))


def ebn0_at_ber(points: Sequence[Tuple[float, float]], target: float) -> Optional[float]:
    """
    Eb/N0 in dB where a BER curve crosses `target`, interpolating log10(BER) linearly.

    Args:
        points: (ebn0_db, ber) pairs in any order
        target: BER level in (0, 1)

    Returns:
        The crossing, or None when no pair of adjacent points brackets the target
    """
    if not 0.0 < target < 1.0:
        raise ParameterError(f"target BER must lie in (0, 1), got {target}")
    curve = sorted((float(x), float(y)) for x, y in points if y > 0.0)
    goal = np.log10(target)
    for (x0, y0), (x1, y1) in zip(curve, curve[1:]):
        l0, l1 = np.log10(y0), np.log10(y1)
        if l0 >= goal >= l1 and l0 != l1:
            return float(x0 + (l0 - goal) * (x1 - x0) / (l0 - l1))
    return None
