"""
Monte-Carlo BER sweeps.

Every frame is an independent work item identified by (Eb/N0 point, frame
index); its data symbols and its channel draw come from seeds derived from
the master seed and that pair. Frames run in fixed-size batches and the
early-stop rule is only checked between batches, so the result does not
depend on the execution engine or the number of workers.
"""

import logging
import time
from functools import lru_cache, partial
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.analysis.stats import ber_confint
from src.channel.awgn import ChannelConfig, PhaseMode, SeedPurpose, apply_channel, derive_seed
from src.detectors.coherent import CoherentMlsd
from src.detectors.msd import msd_noncoherent
from src.detectors.proposed import ProposedDetector
from src.detectors.trellis import Decision
from src.frontend.filter_bank import build_filter_banks
from src.harness.config import DetectorKind, DetectorSpec, ExperimentConfig
from src.schema.errors import FrameMismatchError
from src.schema.records import BerRecord
from src.waveforms.modulator import IqFrame, frame_symbols, modulate
from src.waveforms.pulses import pulse_for
from src.waveforms.schemes import Scheme, SchemeName, get_scheme

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


class LocalEngine:
    """Runs work items in-process, in order."""

    def map(self, func: Callable, items: Sequence) -> List:
        return [func(item) for item in items]

    def stop(self):
        pass


def channel_phase_mode(spec: DetectorSpec) -> PhaseMode:
    """Known zero phase for the coherent reference, a random phase per frame otherwise."""
    if spec.kind == DetectorKind.MLSD_COHERENT:
        return PhaseMode.KNOWN_ZERO
    return PhaseMode.UNIFORM_RANDOM


@lru_cache(maxsize=None)
def _detector(scheme_name: SchemeName, k: int, spec: DetectorSpec) -> Callable[[IqFrame], Decision]:
    """Per-process detector; decodes within a process run one at a time."""
    scheme = get_scheme(scheme_name)
    banks = build_filter_banks(scheme, pulse_for(scheme, k))
    if spec.coherent:
        mlsd = CoherentMlsd(scheme, banks)
        return lambda frame: mlsd.detect(frame, assumed_phase=0.0)
    if spec.kind == DetectorKind.PROPOSED:
        return ProposedDetector(scheme, banks, spec.n_survivors).detect
    return partial(msd_noncoherent, scheme=scheme, window=spec.window, banks=banks)


def count_bit_errors(scheme: Scheme, sent: Sequence[int], decided: Sequence[int]) -> int:
    """Bit errors under the natural-binary mapping of alphabet ranks."""
    if len(sent) != len(decided):
        raise FrameMismatchError(f"{len(sent)} symbols sent, {len(decided)} decided")
    if len(sent) == 0:
        return 0
    bits = scheme.bit_table
    return int(np.count_nonzero(bits[scheme.ranks(sent)] != bits[scheme.ranks(decided)]))


def random_data(scheme: Scheme, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return scheme.alphabet_array[rng.integers(0, scheme.M, size=n)]


def simulate_frame(
    config: ExperimentConfig, spec: DetectorSpec, point: int, ebn0_db: float, frame_index: int
) -> Tuple[int, int]:
    """
    Transmit and detect one frame.

    Returns:
        (bits, bit errors)
    """
    scheme = get_scheme(config.scheme)
    data = random_data(scheme, config.frame_len,
                       derive_seed(config.master_seed, point, frame_index, SeedPurpose.SYMBOLS))
    frame, _ = modulate(scheme, frame_symbols(scheme, data), config.k)
    channel = ChannelConfig(
        ebn0_db=ebn0_db,
        phase_mode=channel_phase_mode(spec),
        seed=derive_seed(config.master_seed, point, frame_index, SeedPurpose.CHANNEL),
        noiseless=config.noiseless,
    )
    received, _ = apply_channel(frame, channel, scheme)
    decision = _detector(config.scheme, config.k, spec)(received)
    errors = count_bit_errors(scheme, data, decision.symbols)
    logger.debug(f"{spec.label} point {point} frame {frame_index}: {errors} bit errors")
    return config.frame_len * scheme.bits_per_symbol, errors


def _frame_batches(n_frames: int, batch: int) -> Iterable[range]:
    for start in range(0, n_frames, batch):
        yield range(start, min(start + batch, n_frames))


def run_point(config: ExperimentConfig, spec: DetectorSpec, point: int, ebn0_db: float, engine=None) -> BerRecord:
    """Simulate one Eb/N0 point until the frame budget, the error target or the bit cap is reached."""
    engine = engine or LocalEngine()
    started = time.perf_counter()
    work = partial(simulate_frame, config, spec, point, ebn0_db)
    bits = errors = frames = 0
    stopped = False
    for batch in _frame_batches(config.n_frames, config.batch_frames):
        for frame_bits, frame_errors in engine.map(work, list(batch)):
            bits += frame_bits
            errors += frame_errors
        frames += len(batch)
        if config.min_errors is not None and errors >= config.min_errors:
            stopped = True
            break
        if config.max_bits is not None and bits >= config.max_bits:
            stopped = True
            break

    ber, low, high = ber_confint(errors, bits)
    elapsed = time.perf_counter() - started
    if stopped:
        logger.info(f"Early stop for {spec.label} at {ebn0_db} dB after {frames} frames")
    logger.info(f"{config.scheme.value} {spec.label} {ebn0_db} dB: {errors}/{bits} bit errors, BER={ber:.3e}")
    return BerRecord(
        scheme=config.scheme.value, detector=spec.label, ebn0_db=ebn0_db, bits=bits, errors=errors,
        ber=ber, ci_low=low, ci_high=high, elapsed_seconds=elapsed, seed=config.master_seed,
        frames=frames, early_stop=stopped,
    )


def make_engine(master: Optional[str]):
    if not master:
        return LocalEngine()
    try:
        from src.harness.spark_engine import SparkEngine
    except ImportError:
        logger.warning("pyspark is not installed; running frames in-process")
        return LocalEngine()
    try:
        return SparkEngine(master)
    except Exception as exc:
        logger.warning(f"Spark session on {master} failed to start ({exc}); running frames in-process")
        return LocalEngine()


def run_sweep(config: ExperimentConfig, engine=None) -> List[BerRecord]:
    """BER records for every detector and Eb/N0 point of the config."""
    own_engine = engine is None
    engine = engine or make_engine(config.master)
    records: List[BerRecord] = []
    try:
        for spec in config.detectors:
            for point, ebn0_db in enumerate(config.ebn0_grid):
                records.append(run_point(config, spec, point, ebn0_db, engine))
    finally:
        if own_engine:
            engine.stop()
    return records
