"""
Detector-vs-exhaustive-search equivalence suite.

For each trial a random short frame is sent twice: once with the carrier
phase known (coherent MLSD against the coherent oracle) and once with a
random carrier phase (survived-phase detector against the noncoherent
oracle). Coherent agreement must be total; the noncoherent detector must
never beat the oracle's metric and must match its decision in most trials.
"""

import logging

import numpy as np

from src.channel.awgn import ChannelConfig, PhaseMode, SeedPurpose, apply_channel, derive_seed
from src.detectors.coherent import CoherentMlsd
from src.detectors.oracles import oracle_coherent, oracle_noncoherent
from src.detectors.proposed import ProposedDetector
from src.frontend.filter_bank import build_filter_banks
from src.harness.runner import random_data
from src.schema.errors import ParameterError
from src.schema.records import OracleReport
from src.waveforms.modulator import frame_symbols, modulate
from src.waveforms.pulses import pulse_for
from src.waveforms.schemes import Scheme

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

MAX_SUITE_LEN = 10
METRIC_TOLERANCE = 1e-9


def run_oracle_suite(
    scheme: Scheme, trials: int, max_len: int, ebn0_db: float, seed: int, k: int = 4, n_survivors: int = 1
) -> OracleReport:
    """
    Run `trials` random frames of 1..max_len data symbols through both checks.

    Returns:
        OracleReport with agreement and metric-dominance counts
    """
    if not 1 <= max_len <= MAX_SUITE_LEN:
        raise ParameterError(f"max_len must lie in [1, {MAX_SUITE_LEN}], got {max_len}")
    if trials < 0:
        raise ParameterError(f"trials must be >= 0, got {trials}")

    report = OracleReport(scheme=scheme.name.value, max_len=max_len, ebn0_db=ebn0_db, seed=seed)
    if trials == 0:
        logger.info("Oracle suite: no trials requested")
        return report

    banks = build_filter_banks(scheme, pulse_for(scheme, k))
    coherent = CoherentMlsd(scheme, banks)
    proposed = ProposedDetector(scheme, banks, n_survivors)

    for trial in range(trials):
        rng = np.random.default_rng(derive_seed(seed, trial))
        n_data = int(rng.integers(1, max_len + 1))
        data = random_data(scheme, n_data, derive_seed(seed, trial, SeedPurpose.SYMBOLS))
        frame, _ = modulate(scheme, frame_symbols(scheme, data), k)
        channel_seed = derive_seed(seed, trial, SeedPurpose.CHANNEL)

        known, _ = apply_channel(frame, ChannelConfig(ebn0_db=ebn0_db, seed=channel_seed), scheme)
        va = coherent.detect(known)
        if va.symbols == oracle_coherent(known, scheme).symbols:
            report.coherent_agree += 1
        else:
            report.failures.append(f"trial {trial}: coherent decision differs from exhaustive search")

        rotated, _ = apply_channel(
            frame, ChannelConfig(ebn0_db=ebn0_db, phase_mode=PhaseMode.UNIFORM_RANDOM, seed=channel_seed), scheme
        )
        nc = proposed.detect(rotated)
        best = oracle_noncoherent(rotated, scheme)
        if nc.symbols == best.symbols:
            report.noncoherent_agree += 1
        if nc.final_metric <= best.final_metric * (1.0 + METRIC_TOLERANCE) + METRIC_TOLERANCE:
            report.metric_dominance += 1
        else:
            report.failures.append(f"trial {trial}: detector metric exceeds the exhaustive maximum")
        report.trials += 1

    logger.info(
        f"Oracle suite {scheme.name.value}: coherent {report.coherent_agree}/{trials}, "
        f"noncoherent {report.noncoherent_agree}/{trials}, dominance {report.metric_dominance}/{trials}"
    )
    return report
