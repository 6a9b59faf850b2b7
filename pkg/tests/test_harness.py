"""Unit tests for configuration, the sweep runner, reports and the CLI."""

import json
import logging
import shutil
import sys
import types
from pathlib import Path

import pytest

from src.harness.cli import build_parser, main
from src.harness.config import (
    DetectorKind, DetectorSpec, build_config, flatten_sections, load_config, full_scale, parse_detector,
)
from src.harness.oracle_suite import run_oracle_suite
from src.harness.reports import (
    dump_tables, emit_curves, parse_curves, read_records, records_frame, write_records,
)
from src.harness.runner import LocalEngine, count_bit_errors, make_engine, run_point, run_sweep, simulate_frame
from src.schema.errors import ConfigError, EmptyInputError, FrameMismatchError, ParameterError
from src.schema.records import BER_CSV_COLUMNS, BerRecord
from src.waveforms.schemes import ARTM_CPM, PCMFM, SchemeName

REPO = Path(__file__).resolve().parents[1]
GOLDEN = Path(__file__).parent / "golden"


def _small_config(tmp_path, **overrides):
    values = dict(
        scheme="PCMFM",
        detectors=["MLSD_COHERENT", "PROPOSED(1)", "MSD(5)"],
        ebn0_grid=[10.0],
        noiseless=True,
        n_frames=6,
        frame_len=30,
        master_seed=1,
        batch_frames=4,
        output_path=str(tmp_path),
    )
    values.update(overrides)
    return build_config(values)


def _record(detector, ebn0_db, errors=10, bits=1000, scheme="PCMFM"):
    return BerRecord(scheme=scheme, detector=detector, ebn0_db=ebn0_db, bits=bits, errors=errors,
                     ber=errors / bits, ci_low=0.0, ci_high=0.1, seed=0)


def test_parse_detector_labels():
    assert parse_detector("PROPOSED(2)") == DetectorSpec(kind=DetectorKind.PROPOSED, n_survivors=2)
    assert parse_detector("msd(3)").window == 3
    assert parse_detector("MSD", window=7).label == "MSD(7)"
    assert parse_detector("MLSD_PHASE_DEVIATION").coherent
    for bad in ("VITERBI", "MSD(4)", "PROPOSED(9)", "MLSD_COHERENT(2)", "PROPOSED(("):
        with pytest.raises(ConfigError):
            parse_detector(bad)


def test_smoke_config_loads():
    config = load_config(str(REPO / "configs" / "smoke.yaml"))
    assert config.scheme == SchemeName.PCMFM
    assert [d.label for d in config.detectors] == ["MLSD_COHERENT", "PROPOSED(1)", "MSD(5)"]
    assert config.noiseless
    assert config.frame_len == 50


def test_overrides_take_precedence(tmp_path):
    path = tmp_path / "exp.yaml"
    path.write_text("experiment:\n  scheme: ARTM_CPM\n  detectors: [PROPOSED(2)]\nsimulation:\n  n_frames: 5\n")
    config = load_config(str(path), {"n_frames": 3, "ebn0_grid": [9.0], "master_seed": None})
    assert config.scheme == SchemeName.ARTM_CPM
    assert config.n_frames == 3
    assert config.ebn0_grid == [9.0]
    assert config.master_seed == 0


def test_invalid_config_lists_every_field(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("simulation:\n  n_frames: 0\n  k: 1\n")
    with pytest.raises(ConfigError) as excinfo:
        load_config(str(path))
    assert "n_frames" in str(excinfo.value)
    assert "k" in str(excinfo.value)


def test_config_rejects_unknown_keys_and_bad_yaml(tmp_path):
    with pytest.raises(ConfigError):
        build_config({"frames": 10})
    with pytest.raises(ConfigError):
        build_config({"frame_len": 3})
    path = tmp_path / "broken.yaml"
    path.write_text("experiment: [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(str(path))
    with pytest.raises(OSError):
        load_config(str(tmp_path / "missing.yaml"))


def test_flatten_rejects_duplicate_keys():
    with pytest.raises(ConfigError):
        flatten_sections({"experiment": {"k": 4}, "simulation": {"k": 8}})


def test_msd_is_refused_for_artm(tmp_path):
    with pytest.raises(ConfigError) as excinfo:
        _small_config(tmp_path, scheme="ARTM_CPM", detectors=["PROPOSED(2)", "MSD(5)"])
    assert "MSD" in str(excinfo.value)
    assert _small_config(tmp_path, scheme="ARTM_CPM", detectors=["PROPOSED(2)"]).scheme == SchemeName.ARTM_CPM


def test_full_scale_disables_early_stop(tmp_path):
    config = full_scale(_small_config(tmp_path))
    assert config.n_frames == 10_000 and config.frame_len == 1_000
    assert not config.early_stop
    assert config.max_bits is None


def test_paper_scale_flag_and_alias():
    parser = build_parser()
    assert parser.parse_args(["sweep", "--paper-scale"]).full_scale
    assert parser.parse_args(["sweep", "--full-scale"]).full_scale
    assert not parser.parse_args(["sweep"]).full_scale


def test_count_bit_errors():
    assert count_bit_errors(PCMFM, [1, -1, 1], [1, 1, -1]) == 2
    assert count_bit_errors(ARTM_CPM, [-3, -1], [3, 1]) == 4
    assert count_bit_errors(ARTM_CPM, [1], [3]) == 1
    assert count_bit_errors(ARTM_CPM, [], []) == 0
    with pytest.raises(FrameMismatchError):
        count_bit_errors(PCMFM, [1], [1, 1])


def test_noiseless_sweep_has_no_errors(tmp_path):
    records = run_sweep(_small_config(tmp_path))
    assert [r.detector for r in records] == ["MLSD_COHERENT", "PROPOSED(1)", "MSD(5)"]
    for r in records:
        assert r.errors == 0
        assert r.bits == 6 * 30
        assert r.ci_high == pytest.approx(3.0 / r.bits)


def test_same_seed_same_frame():
    config = build_config({"detectors": ["PROPOSED(1)"], "frame_len": 40, "master_seed": 3})
    spec = config.detectors[0]
    assert simulate_frame(config, spec, 0, 4.0, 5) == simulate_frame(config, spec, 0, 4.0, 5)


def test_sweep_records_are_byte_identical_across_runs(tmp_path):
    config = _small_config(tmp_path, noiseless=False, ebn0_grid=[3.0, 5.0], n_frames=5,
                           detectors=["PROPOSED(1)", "MLSD_PHASE_DEVIATION"])
    first = write_records(run_sweep(config), tmp_path / "a.csv")
    second = write_records(run_sweep(config), tmp_path / "b.csv")
    assert first.read_bytes() == second.read_bytes()
    assert first.read_text().splitlines()[0] == ",".join(BER_CSV_COLUMNS)


def test_early_stop_between_batches(tmp_path):
    config = _small_config(tmp_path, noiseless=False, ebn0_grid=[0.0], n_frames=40, batch_frames=4,
                           min_errors=1, detectors=["MLSD_PHASE_DEVIATION"])
    record = run_point(config, config.detectors[0], 0, 0.0, LocalEngine())
    assert record.early_stop
    assert record.frames % 4 == 0
    assert record.frames < 40
    assert record.errors >= 1


def test_oracle_suite_with_no_trials():
    report = run_oracle_suite(PCMFM, trials=0, max_len=8, ebn0_db=10.0, seed=0)
    assert report.trials == 0
    assert report.passed
    assert report.coherent_rate is None


def test_oracle_suite_small_run():
    report = run_oracle_suite(PCMFM, trials=10, max_len=6, ebn0_db=10.0, seed=4)
    assert report.trials == 10
    assert report.coherent_agree == 10
    assert report.metric_dominance == 10


def test_oracle_suite_rejects_long_frames():
    with pytest.raises(ParameterError):
        run_oracle_suite(PCMFM, trials=1, max_len=11, ebn0_db=10.0, seed=0)


def test_tables_match_golden_files(tmp_path):
    written = dump_tables(tmp_path, traceback_n=100)
    assert written["complexity"].read_bytes() == (GOLDEN / "complexity.csv").read_bytes()
    assert written["storage"].read_bytes() == (GOLDEN / "storage.csv").read_bytes()
    assert "1600" in written["storage_evaluated"].read_text()


def test_records_round_trip(tmp_path):
    records = [_record("PROPOSED(1)", 6.0), _record("PROPOSED(1)", 8.0, errors=0)]
    path = write_records(records, tmp_path / "records.csv")
    loaded = read_records(path)
    assert [(r.detector, r.ebn0_db, r.errors, r.bits) for r in loaded] == \
        [(r.detector, r.ebn0_db, r.errors, r.bits) for r in records]
    assert list(records_frame(records).columns) == BER_CSV_COLUMNS


def test_curves_sorted_per_series(tmp_path):
    records = [
        _record("MSD(5)", 8.0), _record("PROPOSED(1)", 9.0),
        _record("MSD(5)", 6.0), _record("PROPOSED(1)", 7.0),
    ]
    path = emit_curves(records, tmp_path / "curves.csv")
    points = parse_curves(path)
    assert [(p.series, p.ebn0_db) for p in points] == [
        ("PCMFM MSD(5)", 6.0), ("PCMFM MSD(5)", 8.0),
        ("PCMFM PROPOSED(1)", 7.0), ("PCMFM PROPOSED(1)", 9.0),
    ]


def test_empty_inputs_are_refused(tmp_path):
    with pytest.raises(EmptyInputError):
        write_records([], tmp_path / "none.csv")
    with pytest.raises(EmptyInputError):
        emit_curves([], tmp_path / "none.csv")


def test_ber_record_checks_counts():
    with pytest.raises(ValueError):
        BerRecord(scheme="PCMFM", detector="MSD(5)", ebn0_db=6.0, bits=10, errors=11, ber=1.1,
                  ci_low=0.0, ci_high=1.0, seed=0)
    with pytest.raises(ValueError):
        BerRecord(scheme="PCMFM", detector="MSD(5)", ebn0_db=6.0, bits=10, errors=1, ber=0.2,
                  ci_low=0.0, ci_high=1.0, seed=0)


def test_cli_tables(tmp_path):
    assert main(["tables", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "complexity.csv").read_bytes() == (GOLDEN / "complexity.csv").read_bytes()


def test_cli_pulses(tmp_path, caplog):
    out = tmp_path / "q.csv"
    with caplog.at_level(logging.INFO):
        assert main(["pulses", "--scheme", "ARTM_CPM", "--oversample", "4", "--out", str(out)]) == 0
    info = [r for r in caplog.records if r.levelno == logging.INFO and "pulse samples" in r.getMessage()]
    assert [r.name for r in info] == ["src.harness.cli"]
    lines = out.read_text().splitlines()
    assert lines[0] == "t_over_T,q"
    assert len(lines) == 1 + 13


def test_cli_noiseless_sweep_writes_outputs(tmp_path):
    code = main(["sweep", "--config", str(REPO / "configs" / "smoke.yaml"), "--frames", "2",
                 "--frame-len", "20", "--out", str(tmp_path)])
    assert code == 0
    records = read_records(tmp_path / "ber_records.csv")
    assert all(r.errors == 0 for r in records)
    summary = json.loads((tmp_path / "run_summary.json").read_text())
    assert summary["config"]["frame_len"] == 20
    assert len(summary["points"]) == 3
    assert (tmp_path / "curves.csv").exists()


def test_cli_reports_errors_as_json(capsys):
    assert main(["oracle", "--max-len", "11"]) == 1
    err = capsys.readouterr().err.strip().splitlines()[-1]
    payload = json.loads(err)
    assert payload["error"] == "ParameterError"


def test_cli_bad_config_value(tmp_path, capsys):
    assert main(["sweep", "--frames", "0", "--out", str(tmp_path)]) == 1
    payload = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert payload["error"] == "ConfigError"


def test_spark_engine_matches_local(tmp_path):
    pytest.importorskip("pyspark")
    if shutil.which("java") is None:
        pytest.skip("Spark needs a Java runtime")
    from src.harness.spark_engine import SparkEngine

    config = _small_config(tmp_path, noiseless=False, ebn0_grid=[4.0], n_frames=8,
                           detectors=["PROPOSED(1)"])
    engine = SparkEngine("local[2]")
    try:
        spark_record = run_point(config, config.detectors[0], 0, 4.0, engine)
    finally:
        engine.stop()
    local_record = run_point(config, config.detectors[0], 0, 4.0, LocalEngine())
    assert (spark_record.bits, spark_record.errors) == (local_record.bits, local_record.errors)


def test_engine_falls_back_when_spark_cannot_start(monkeypatch, caplog):
    class NoJava:
        def __init__(self, master):
            raise RuntimeError("Java gateway process exited before sending its port number")

    fake = types.ModuleType("src.harness.spark_engine")
    fake.SparkEngine = NoJava
    monkeypatch.setitem(sys.modules, "src.harness.spark_engine", fake)
    with caplog.at_level(logging.WARNING, logger="src.harness.runner"):
        engine = make_engine("local[2]")
    assert isinstance(engine, LocalEngine)
    assert any(r.levelno == logging.WARNING and "local[2]" in r.getMessage() for r in caplog.records)


def test_engine_is_local_without_master():
    assert isinstance(make_engine(None), LocalEngine)
