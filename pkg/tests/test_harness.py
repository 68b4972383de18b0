import io
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
import pytest

from sst_shaper.errors import ConfigError
from sst_shaper.harness import (TIMING_COLUMNS, CampaignConfig, CsvRow, PathMode, RunRecord, StcRunRecord,
                                TimingConfig, aggregate, cell_inputs, emit_csv, index_table,
                                load_campaign_config, metric_table, run_campaign, run_stc_campaign,
                                summarize_stc, timing_study)
from sst_shaper.imaging import CoverModel
from sst_shaper.metrics import DistanceReport
from sst_shaper.shaping import Objective


def small_config(**overrides):
    settings = dict(models=("uniform", "smooth"), width=32, height=32, ns=(100,), ks=(0, 2),
                    repetitions=3, master_seed=17)
    settings.update(overrides)
    return CampaignConfig(**settings)


def fake_record(k, base, shaped, model="uniform", n=100):
    report = lambda value: DistanceReport(kl=value, js=value, tv=value, chi2=value, cooc_l1=value)
    return RunRecord(model=model, n=n, k=k, repetition=0, seed=0, path_mode="sequential", chosen_h=0,
                     baseline=report(base), shaped=report(shaped), search_ms=0.0)


def test_record_count_and_order():
    cfg = small_config()
    records = run_campaign(cfg)
    assert len(records) == cfg.run_count == 12
    assert [(r.model, r.k, r.repetition) for r in records[:6]] == [
        ("uniform", 0, 0), ("uniform", 0, 1), ("uniform", 0, 2),
        ("uniform", 2, 0), ("uniform", 2, 1), ("uniform", 2, 2),
    ]


def test_k0_gains_are_exactly_zero():
    records = run_campaign(small_config(ks=(0,), path_mode="keyed"))
    assert all(r.gain("kl") == 0.0 for r in records)
    assert all(r.shaped == r.baseline for r in records)
    (row,) = aggregate(records, "k")
    assert row.mean_gain == 0.0
    assert row.ci95 == 0.0
    assert row.success_rate == 0.0


def test_k_values_share_cell_inputs():
    cfg = small_config()
    records = run_campaign(cfg)
    by_key = {(r.model, r.repetition): set() for r in records}
    for r in records:
        by_key[(r.model, r.repetition)].add(r.seed)
    assert all(len(seeds) == 1 for seeds in by_key.values())
    first = cell_inputs(cfg, CoverModel.UNIFORM, 100, cfg.cell_seed(0, 0, 0))
    again = cell_inputs(cfg, CoverModel.UNIFORM, 100, cfg.cell_seed(0, 0, 0))
    assert np.array_equal(first.cover, again.cover)
    assert np.array_equal(first.message, again.message)


def test_shaped_kl_never_above_candidate_minimum():
    records = run_campaign(small_config(ks=(3,), debug=True))
    assert len(records) == 6


def test_aggregate_confidence_interval():
    rows = aggregate([fake_record(2, 1.0, 1.0), fake_record(2, 1.0, 0.0)], "k")
    (row,) = rows
    assert row.runs == 2
    assert row.mean_gain == pytest.approx(0.5)
    assert row.ci95 == pytest.approx(0.98, abs=1e-3)
    assert row.success_rate == 0.5
    assert row.mean_baseline == 1.0
    assert row.mean_shaped == 0.5


def test_aggregate_single_record():
    (row,) = aggregate([fake_record(4, 2.0, 1.5)], "k")
    assert row.mean_gain == pytest.approx(0.25)
    assert row.ci95 == 0.0
    assert row.success_rate == 1.0


def test_aggregate_groups_in_first_appearance_order():
    records = [fake_record(2, 1.0, 0.5, model="smooth"), fake_record(2, 1.0, 0.9, model="uniform"),
               fake_record(4, 1.0, 0.2, model="smooth")]
    assert [row.group for row in aggregate(records, "model")] == ["smooth", "uniform"]
    assert [row.group for row in aggregate(records, "k")] == [2, 4]


def test_aggregate_errors():
    with pytest.raises(ConfigError):
        aggregate([], "k")
    with pytest.raises(ConfigError):
        aggregate([fake_record(0, 1.0, 1.0)], "repetition")
    with pytest.raises(ConfigError):
        aggregate([fake_record(0, 1.0, 1.0)], "k", metric="hellinger")


def test_degenerate_baseline_gain_is_nan():
    assert math.isnan(fake_record(2, 0.0, 0.0).gain("kl"))


def test_metric_and_index_tables():
    records = run_campaign(small_config(ks=(0, 2, 4)))
    table = metric_table(records)
    assert [row.k for row in table] == [0, 2, 4]
    assert table[0].gain_kl == 0.0
    assert all(row.runs == 6 for row in table)

    index_rows = index_table(records)
    assert [row.k for row in index_rows] == [2, 4]
    assert all(0.0 <= row.mean_normalized_h <= 1.0 for row in index_rows)
    assert all(0.0 < row.largest_bucket_share <= 1.0 for row in index_rows)


def test_csv_is_deterministic():
    cfg = small_config(path_mode="keyed")
    first = emit_csv(run_campaign(cfg), RunRecord.csv_columns(), drop=TIMING_COLUMNS)
    second = emit_csv(run_campaign(cfg), RunRecord.csv_columns(), drop=TIMING_COLUMNS)
    assert first == second
    header = first.split(b"\r\n", 1)[0].decode()
    assert "search_ms" not in header
    assert header.startswith("model,n,k,repetition,seed,path_mode,chosen_h,base_kl,sst_kl,gain_kl")


def test_csv_parses_back():
    records = run_campaign(small_config(models=("bimodal",), repetitions=2))
    frame = pd.read_csv(io.BytesIO(emit_csv(records)))
    assert len(frame) == len(records)
    assert frame["k"].tolist() == [r.k for r in records]
    assert frame["sst_kl"].tolist() == pytest.approx([r.shaped.kl for r in records], rel=1e-15)


def test_empty_csv_is_header_only():
    assert emit_csv([], ["a", "b"]) == b"a,b\r\n"
    assert emit_csv([], RunRecord.csv_columns(), drop=TIMING_COLUMNS).count(b"\r\n") == 1


@dataclass(frozen=True)
class LabelRow(CsvRow):
    label: str
    value: float


def test_csv_quotes_commas():
    data = emit_csv([LabelRow(label="smooth, keyed", value=0.5)])
    assert data == b'label,value\r\n"smooth, keyed",0.5\r\n'


def test_config_validation():
    with pytest.raises(ConfigError):
        small_config(repetitions=0)
    with pytest.raises(ConfigError):
        small_config(ks=(25,))
    with pytest.raises(ConfigError):
        small_config(ns=(1020,), ks=(8,))
    with pytest.raises(ConfigError):
        small_config(models=("checkerboard",))
    with pytest.raises(ConfigError):
        small_config(ns=(600,), objective="syndrome_cost")
    assert small_config(path_mode="keyed").path_mode is PathMode.KEYED


def test_stc_campaign_and_summary():
    cfg = small_config(ks=(0, 2, 4), objective="syndrome_cost")
    records = run_stc_campaign(cfg)
    assert len(records) == cfg.run_count
    assert all(isinstance(r, StcRunRecord) and r.blocks == -(-(100 + r.k) // 4) for r in records)
    rows = summarize_stc(records)
    assert [row.k for row in rows] == [0, 2, 4]
    assert [row.configurations for row in rows] == [1, 4, 16]
    assert rows[0].reduction == 0.0
    assert rows[2].mean_cost <= rows[0].mean_cost
    with pytest.raises(ConfigError):
        summarize_stc([])


def test_timing_study_shape():
    rows = timing_study(TimingConfig(ks=(0, 2, 3), n=60, repetitions=1, width=16, height=16))
    assert [row.configurations for row in rows] == [1, 4, 8]
    assert all(row.runs == 2 for row in rows)
    assert all(row.mean_search_ms >= 0 for row in rows)


def test_load_campaign_config(tmp_path):
    path = tmp_path / "camp.toml"
    path.write_text(
        'models = ["smooth", "gradient"]\n'
        "width = 40\nheight = 30\n"
        "ns = [200, 300]\nks = [0, 4]\n"
        "repetitions = 2\nmaster_seed = 0x2A\n"
        'path_mode = "keyed"\noutput = "runs.csv"\n'
        "gradient_sigma = 8.0\nbimodal_means = [60, 190]\n"
    )
    cfg = load_campaign_config(path)
    assert cfg.models == (CoverModel.SMOOTH, CoverModel.GRADIENT)
    assert (cfg.width, cfg.height) == (40, 30)
    assert cfg.ns == (200, 300) and cfg.ks == (0, 4)
    assert cfg.master_seed == 42
    assert cfg.path_mode is PathMode.KEYED
    assert cfg.objective is Objective.KL_HISTOGRAM
    assert cfg.output.name == "runs.csv"
    assert cfg.cover_params.gradient_sigma == 8.0
    assert cfg.cover_params.bimodal_means == (60, 190)
    assert cfg.run_count == 2 * 2 * 2 * 2


@pytest.mark.parametrize("text", [
    "repetitons = 3\n",
    "[campaign]\nrepetitions = 3\n",
    "repetitions = \n",
    "repetitions = 0\n",
    'path_mode = "spiral"\n',
])
def test_bad_campaign_files(tmp_path, text):
    path = tmp_path / "bad.toml"
    path.write_text(text)
    with pytest.raises(ConfigError):
        load_campaign_config(path)
