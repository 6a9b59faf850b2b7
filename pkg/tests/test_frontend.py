"""Unit tests for the matched-filter bank."""

import numpy as np
import pytest

from src.frontend.filter_bank import (
    build_filter_bank, build_filter_banks, combo_code, combo_digits, correlate_frame, correlate_symbol,
)
from src.schema.errors import FrameMismatchError, ParameterError
from src.waveforms.modulator import IqFrame, boundary_phases, frame_symbols, modulate
from src.waveforms.pulses import pulse_for
from src.waveforms.schemes import ARTM_CPM, PCMFM


def _random_frame(scheme, n_data, seed, k=4):
    rng = np.random.default_rng(seed)
    symbols = frame_symbols(scheme, scheme.alphabet_array[rng.integers(0, scheme.M, size=n_data)])
    frame, _ = modulate(scheme, symbols, k)
    return frame, symbols


def _theta_before(scheme, symbols, n):
    """Cumulative phase index of every symbol completed before interval n's window."""
    if n - scheme.L < 0:
        return 0
    return int(boundary_phases(scheme, symbols)[n - scheme.L])


def test_bank_sizes():
    assert build_filter_bank(PCMFM, pulse_for(PCMFM), 0).locals.shape == (8, 4)
    banks = build_filter_banks(ARTM_CPM, pulse_for(ARTM_CPM))
    assert len(banks) == 2
    assert all(b.locals.shape == (64, 4) for b in banks)


def test_locals_have_unit_magnitude():
    for scheme in (PCMFM, ARTM_CPM):
        for bank in build_filter_banks(scheme, pulse_for(scheme)):
            assert np.allclose(np.abs(bank.locals), 1.0, atol=1e-12)


def test_combo_code_oldest_symbol_most_significant():
    assert combo_code(PCMFM, [-1, -1, -1]) == 0
    assert combo_code(PCMFM, [1, -1, -1]) == 4
    assert combo_code(ARTM_CPM, [3, 3, 3]) == 63
    assert combo_code(ARTM_CPM, [-1, -3, 1]) == 18
    assert combo_digits(ARTM_CPM)[18].tolist() == [1, 0, 2]
    with pytest.raises(FrameMismatchError):
        combo_code(PCMFM, [1, 1])


@pytest.mark.parametrize("scheme", [PCMFM, ARTM_CPM])
def test_true_combination_correlates_to_k(scheme):
    """Derotated by the completed phase, the transmitted combination scores exactly k."""
    frame, symbols = _random_frame(scheme, 30, seed=2)
    banks = build_filter_banks(scheme, pulse_for(scheme))
    Z = correlate_frame(frame, banks)
    for n in range(scheme.L - 1, frame.n_symbols):
        true = combo_code(scheme, symbols[n - scheme.L + 1:n + 1])
        rotation = scheme.phasors[_theta_before(scheme, symbols, n)].conj()
        assert np.real(rotation * Z[n, true]) == pytest.approx(frame.k, abs=1e-9)


def test_true_combination_is_the_unique_best():
    """Over 100 PCM/FM frames only the true entry reaches k after derotation; none exceed it in magnitude."""
    banks = build_filter_banks(PCMFM, pulse_for(PCMFM))
    for seed in range(100):
        frame, symbols = _random_frame(PCMFM, 12, seed=seed)
        Z = correlate_frame(frame, banks)
        assert np.all(np.abs(Z) <= frame.k + 1e-9)
        for n in range(PCMFM.L - 1, frame.n_symbols):
            true = combo_code(PCMFM, symbols[n - PCMFM.L + 1:n + 1])
            scores = np.real(PCMFM.phasors[_theta_before(PCMFM, symbols, n)].conj() * Z[n])
            others = np.delete(scores, true)
            assert np.all(others < frame.k - 1e-9)


def test_wrong_newest_symbol_loses_magnitude():
    """A combination that differs in the newest symbol has |z| strictly below k."""
    banks = build_filter_banks(PCMFM, pulse_for(PCMFM))
    frame, symbols = _random_frame(PCMFM, 20, seed=9)
    Z = correlate_frame(frame, banks)
    for n in range(PCMFM.L - 1, frame.n_symbols):
        window = list(symbols[n - PCMFM.L + 1:n + 1])
        window[-1] = -window[-1]
        assert abs(Z[n, combo_code(PCMFM, window)]) < frame.k - 1e-9


def test_correlation_is_linear():
    frame_a, _ = _random_frame(ARTM_CPM, 10, seed=1)
    frame_b, _ = _random_frame(ARTM_CPM, 10, seed=2)
    banks = build_filter_banks(ARTM_CPM, pulse_for(ARTM_CPM))
    a, b = 0.3 - 1.2j, 2.0 + 0.5j
    mixed = frame_a.scaled(a) + frame_b.scaled(b)
    expected = a * correlate_frame(frame_a, banks) + b * correlate_frame(frame_b, banks)
    assert np.allclose(correlate_frame(mixed, banks), expected, atol=1e-9)


def test_correlate_symbol_matches_frame_row():
    frame, _ = _random_frame(ARTM_CPM, 10, seed=4)
    banks = build_filter_banks(ARTM_CPM, pulse_for(ARTM_CPM))
    Z = correlate_frame(frame, banks)
    row = correlate_symbol(frame, 5, banks[1], n_parities=2)
    assert row.symbol_index == 5
    assert np.allclose(row.values, Z[5])


def test_bank_parity_must_match_interval():
    frame, _ = _random_frame(ARTM_CPM, 10, seed=4)
    banks = build_filter_banks(ARTM_CPM, pulse_for(ARTM_CPM))
    with pytest.raises(FrameMismatchError):
        correlate_symbol(frame, 4, banks[1], n_parities=2)


def test_bank_rejects_mismatched_inputs():
    with pytest.raises(ParameterError):
        build_filter_bank(ARTM_CPM, pulse_for(ARTM_CPM), 2)
    bank8 = build_filter_banks(PCMFM, pulse_for(PCMFM, 8))
    frame = IqFrame(np.ones(12, dtype=complex), k=4, n_symbols=3)
    with pytest.raises(FrameMismatchError):
        correlate_frame(frame, bank8)
    with pytest.raises(ParameterError):
        correlate_frame(frame, [])
