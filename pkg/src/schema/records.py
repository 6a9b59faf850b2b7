"""
Result records written by the experiment harness.
"""

from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

# CSV column order of BER records; elapsed_seconds stays out so reruns are byte-identical
BER_CSV_COLUMNS = ["scheme", "detector", "ebn0_db", "bits", "errors", "ber", "ci_low", "ci_high", "seed"]
CURVE_CSV_COLUMNS = ["series", "ebn0_db", "ber", "ci_low", "ci_high"]


class BerRecord(BaseModel):
    """Monte-Carlo result of one (scheme, detector, Eb/N0) point."""

    model_config = ConfigDict(frozen=True)

    scheme: str
    detector: str
    ebn0_db: float
    bits: int = Field(..., ge=0)
    errors: int = Field(..., ge=0)
    ber: float
    ci_low: float
    ci_high: float
    elapsed_seconds: float = 0.0
    seed: int
    frames: int = 0
    early_stop: bool = False

    @model_validator(mode="after")
    def ber_matches_counts(self):
        if self.errors > self.bits:
            raise ValueError(f"errors ({self.errors}) exceed bits ({self.bits})")
        expected = self.errors / self.bits if self.bits else 0.0
        if abs(self.ber - expected) > 1e-12:
            raise ValueError(f"ber {self.ber} does not equal errors/bits {expected}")
        return self

    @property
    def series(self) -> str:
        return f"{self.scheme} {self.detector}"


class CurvePoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    series: str
    ebn0_db: float
    ber: float
    ci_low: float
    ci_high: float


class OracleReport(BaseModel):
    """Agreement counts of the detector-vs-exhaustive-search checks."""

    scheme: str
    trials: int = 0
    max_len: int
    ebn0_db: float
    seed: int
    coherent_agree: int = 0
    noncoherent_agree: int = 0
    metric_dominance: int = 0
    noncoherent_min_rate: float = 0.95
    failures: List[str] = Field(default_factory=list)

    @property
    def coherent_rate(self) -> Optional[float]:
        return self.coherent_agree / self.trials if self.trials else None

    @property
    def noncoherent_rate(self) -> Optional[float]:
        return self.noncoherent_agree / self.trials if self.trials else None

    @property
    def passed(self) -> bool:
        if self.trials == 0:
            return True
        return (
            self.coherent_agree == self.trials
            and self.metric_dominance == self.trials
            and self.noncoherent_agree >= self.noncoherent_min_rate * self.trials
        )
