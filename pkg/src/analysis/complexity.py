"""
Per-symbol complexity and storage accounting of the detectors.

With X = N_s * N_p * M (fixed at 128 for the MSD baseline, which has no
trellis states):

    N_mul = 4 * N_mf * k + 4 * X + 2 * X * delta
    N_add = N_mf * (5k - 2) + 3 * X + X * (1 + 2 * delta)

delta is 0 for coherent MLSD and 1 for the noncoherent methods, whose
metrics are complex and compared by magnitude.
"""

import logging
from enum import Enum
from typing import List, Optional, Tuple

import pandas as pd
from pydantic import BaseModel, ConfigDict

from src.schema.errors import ParameterError
from src.waveforms.schemes import ARTM_CPM, PCMFM, Scheme, SchemeName

logger = logging.getLogger(__name__)

MSD_BRANCH_PRODUCT = 128
MAX_SURVIVORS = 4


class Method(str, Enum):
    MSD = "MSD"
    MLSD = "MLSD"
    PROPOSED = "PROPOSED"


class ComplexityRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: Method
    scheme: SchemeName
    k: int
    N_mf: int
    N_s: Optional[int]
    N_p: int
    N_mul: int
    N_add: int
    delta: int


class StorageRecord(BaseModel):
    """Storage per detector in sample values; path storage scales with the traceback length N."""

    model_config = ConfigDict(frozen=True)

    method: Method
    scheme: SchemeName
    local_signal: int
    rotation_angle: int
    survived_path_per_n: Optional[int]
    survived_phase: Optional[int]
    traceback_n: int = 1

    def symbolic(self) -> dict:
        return {
            "local_signal": str(self.local_signal),
            "rotation_angle": str(self.rotation_angle),
            "survived_path": "-" if self.survived_path_per_n is None else f"{self.survived_path_per_n}N",
            "survived_phase": "-" if self.survived_phase is None else str(self.survived_phase),
        }

    def evaluated(self) -> dict:
        """Entries with the path storage evaluated at traceback_n."""
        row = self.symbolic()
        if self.survived_path_per_n is not None:
            row["survived_path"] = str(self.survived_path_per_n * self.traceback_n)
        return row


def _validate(method: Method, scheme: Scheme, n_survivors: int):
    if method == Method.MSD and scheme.name != SchemeName.PCMFM:
        raise ParameterError("the MSD baseline is only defined for PCM/FM")
    if method != Method.PROPOSED and n_survivors != 1:
        raise ParameterError(f"{method.value} keeps one path per state, got N_p={n_survivors}")
    if not 1 <= n_survivors <= MAX_SURVIVORS:
        raise ParameterError(f"N_p must lie in [1, {MAX_SURVIVORS}], got {n_survivors}")


def state_count(method: Method, scheme: Scheme) -> Optional[int]:
    if method == Method.MLSD:
        return scheme.p * scheme.M ** (scheme.L - 1)
    if method == Method.PROPOSED:
        return scheme.M ** scheme.L
    return None


def complexity(method, scheme: Scheme, k: int = 4, n_survivors: int = 1) -> ComplexityRecord:
    """Multiplications and additions per detected symbol."""
    method = Method(method)
    _validate(method, scheme, n_survivors)
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")

    n_mf = scheme.M ** scheme.L
    n_s = state_count(method, scheme)
    delta = 0 if method == Method.MLSD else 1
    x = MSD_BRANCH_PRODUCT if n_s is None else n_s * n_survivors * scheme.M

    n_mul = 4 * n_mf * k + 4 * x + 2 * x * delta
    n_add = n_mf * (5 * k - 2) + 3 * x + x * (1 + 2 * delta)
    return ComplexityRecord(
        method=method, scheme=scheme.name, k=k, N_mf=n_mf, N_s=n_s, N_p=n_survivors,
        N_mul=n_mul, N_add=n_add, delta=delta,
    )


def storage(method, scheme: Scheme, traceback_n: int = 1, n_survivors: int = 1, k: int = 4) -> StorageRecord:
    """Storage requirement for a traceback length N; render with .symbolic() or .evaluated()."""
    method = Method(method)
    _validate(method, scheme, n_survivors)
    if traceback_n < 1:
        raise ParameterError(f"traceback length must be >= 1, got {traceback_n}")
    common = dict(method=method, scheme=scheme.name, traceback_n=traceback_n)
    local_signal = scheme.M ** scheme.L * k * 2
    n_s = state_count(method, scheme)

    if method == Method.MSD:
        return StorageRecord(**common, local_signal=local_signal,
                             rotation_angle=scheme.p // 2, survived_path_per_n=None, survived_phase=None)
    if method == Method.MLSD:
        return StorageRecord(**common, local_signal=local_signal,
                             rotation_angle=2 * scheme.p, survived_path_per_n=n_s, survived_phase=0)
    return StorageRecord(**common, local_signal=local_signal,
                         rotation_angle=2 * scheme.p, survived_path_per_n=2 * n_s * n_survivors,
                         survived_phase=n_s)


# (column label, method, scheme, N_p)
TABLE_COLUMNS: List[Tuple[str, Method, Scheme, int]] = [
    ("MSD PCM/FM", Method.MSD, PCMFM, 1),
    ("MLSD PCM/FM", Method.MLSD, PCMFM, 1),
    ("MLSD ARTM CPM (Np=1)", Method.MLSD, ARTM_CPM, 1),
    ("PROPOSED PCM/FM", Method.PROPOSED, PCMFM, 1),
    ("PROPOSED ARTM CPM (Np=1)", Method.PROPOSED, ARTM_CPM, 1),
    ("PROPOSED ARTM CPM (Np=2)", Method.PROPOSED, ARTM_CPM, 2),
]


def complexity_table(k: int = 4) -> pd.DataFrame:
    """Complexity comparison as strings, one column per detector configuration."""
    data = {"quantity": ["N_mf", "N_s", "N_mul", "N_add"]}
    for label, method, scheme, n_p in TABLE_COLUMNS:
        rec = complexity(method, scheme, k, n_p)
        data[label] = [str(rec.N_mf), "-" if rec.N_s is None else str(rec.N_s), str(rec.N_mul), str(rec.N_add)]
    return pd.DataFrame(data)


def storage_table(k: int = 4, traceback_n: Optional[int] = None) -> pd.DataFrame:
    """Storage comparison, symbolic in N unless traceback_n is given."""
    quantities = ["local_signal", "rotation_angle", "survived_path", "survived_phase"]
    data = {"quantity": quantities}
    for label, method, scheme, n_p in TABLE_COLUMNS:
        rec = storage(method, scheme, traceback_n or 1, n_p, k)
        row = rec.symbolic() if traceback_n is None else rec.evaluated()
        data[label] = [row[q] for q in quantities]
    return pd.DataFrame(data)
