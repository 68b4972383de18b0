"""
Simulation campaigns: run grids of shaping experiments, summarize them and
write the tables as CSV.

Every run is a pure function of the campaign configuration. Each
(model, N, repetition) cell derives its own seed from the master seed, and all
K values of a cell share that seed, so they see the same cover, message,
session key and path key.
"""

import logging
import math
import time

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, fields
from enum import Enum
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import ConfigError, DegenerateBaselineError, ShapingError
from .imaging import DEFAULT_COVER_PARAMS, CoverModel, CoverParams, cooccurrence, generate_cover, histogram
from .lsb import embed_lsb, sequential_path
from .metrics import METRIC_NAMES, DistanceReport, distance_report, relative_gain, smooth_normalize
from .rng import MASK64, RngState, derive_seed, keyed_path, random_bits
from .shaping import (MAX_INDEX_BITS, Objective, ShapingConfig, fair_baseline_payload,
                      index_stat, kl_histogram_objective, shape_select)
from .stc import StcConfig, stc_shape_select

logger = logging.getLogger(__name__)

CI_Z = 1.96
TIMING_COLUMNS = ("search_ms",)

# sub-stream ordinals under a cell seed
_COVER_STREAM, _MESSAGE_STREAM, _SESSION_STREAM, _PATH_STREAM = range(4)


class PathMode(str, Enum):
    SEQUENTIAL = "sequential"
    KEYED = "keyed"


@dataclass(frozen=True)
class CampaignConfig:
    models: tuple = tuple(CoverModel)
    width: int = 100
    height: int = 100
    ns: tuple = (1000,)
    ks: tuple = (0, 2, 4, 6, 8)
    repetitions: int = 10
    master_seed: int = 0
    path_mode: PathMode = PathMode.SEQUENTIAL
    objective: Objective = Objective.KL_HISTOGRAM
    output: Path = None
    debug: bool = False
    cover_params: CoverParams = DEFAULT_COVER_PARAMS

    def __post_init__(self):
        try:
            object.__setattr__(self, "models", tuple(CoverModel(m) for m in self.models))
            object.__setattr__(self, "path_mode", PathMode(self.path_mode))
            object.__setattr__(self, "objective", Objective(self.objective))
        except ValueError as e:
            raise ConfigError(str(e)) from e
        object.__setattr__(self, "ns", tuple(int(n) for n in self.ns))
        object.__setattr__(self, "ks", tuple(int(k) for k in self.ks))
        if self.output is not None:
            object.__setattr__(self, "output", Path(self.output))
        if not self.models or not self.ns or not self.ks:
            raise ConfigError("models, ns and ks must all be non-empty")
        if self.repetitions < 1:
            raise ConfigError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.width < 2 or self.height < 2:
            raise ConfigError(f"covers must be at least 2x2, got {self.width}x{self.height}")
        if any(not 0 <= k <= MAX_INDEX_BITS for k in self.ks):
            raise ConfigError(f"every K must be in [0, {MAX_INDEX_BITS}], got {self.ks}")
        if any(n < 0 for n in self.ns):
            raise ConfigError(f"message lengths must be non-negative, got {self.ns}")
        if not 0 <= self.master_seed <= MASK64:
            raise ConfigError(f"master seed must fit in 64 bits, got {self.master_seed}")
        pixels = self.width * self.height
        longest = max(self.ns) + max(self.ks)
        if self.objective is Objective.SYNDROME_COST:
            needed = StcConfig().blocks_for(longest) * StcConfig().n
            if needed > pixels:
                raise ConfigError(f"syndrome blocks need {needed} pixels, the cover has {pixels}")
        elif longest > pixels:
            raise ConfigError(f"N+K = {longest} exceeds the {pixels} cover pixels")

    @property
    def run_count(self):
        return len(self.models) * len(self.ns) * len(self.ks) * self.repetitions

    def cell_seed(self, model_index, n_index, repetition):
        ordinal = (model_index * len(self.ns) + n_index) * self.repetitions + repetition
        return derive_seed(self.master_seed, ordinal)


@dataclass(frozen=True)
class CellInputs:
    cover: np.ndarray
    message: np.ndarray
    session_seed: int
    path_key: int


def cell_inputs(cfg, model, n, seed):
    """Cover, message and keys of one campaign cell."""
    cover = generate_cover(model, cfg.width, cfg.height,
                           RngState(derive_seed(seed, _COVER_STREAM)), cfg.cover_params)
    message, _ = random_bits(RngState(derive_seed(seed, _MESSAGE_STREAM)), n)
    return CellInputs(cover=cover, message=message,
                      session_seed=derive_seed(seed, _SESSION_STREAM),
                      path_key=derive_seed(seed, _PATH_STREAM))


def _run_path(path_mode, cell, length):
    if path_mode is PathMode.KEYED:
        return keyed_path(cell.path_key, cell.cover.size, length)
    return sequential_path(length, cell.cover.size)


class CsvRow:
    """Flat CSV view of a dataclass row."""

    def to_row(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def csv_columns(cls):
        return [f.name for f in fields(cls)]


@dataclass(frozen=True)
class RunRecord(CsvRow):
    model: str
    n: int
    k: int
    repetition: int
    seed: int
    path_mode: str
    chosen_h: int
    baseline: DistanceReport
    shaped: DistanceReport
    search_ms: float

    def gain(self, metric="kl"):
        try:
            return relative_gain(getattr(self.baseline, metric), getattr(self.shaped, metric))
        except DegenerateBaselineError:
            return math.nan

    def to_row(self):
        row = {name: getattr(self, name)
               for name in ("model", "n", "k", "repetition", "seed", "path_mode", "chosen_h")}
        for metric in METRIC_NAMES:
            row[f"base_{metric}"] = getattr(self.baseline, metric)
            row[f"sst_{metric}"] = getattr(self.shaped, metric)
            row[f"gain_{metric}"] = self.gain(metric)
        row["search_ms"] = self.search_ms
        return row

    @classmethod
    def csv_columns(cls):
        columns = ["model", "n", "k", "repetition", "seed", "path_mode", "chosen_h"]
        for metric in METRIC_NAMES:
            columns += [f"base_{metric}", f"sst_{metric}", f"gain_{metric}"]
        return columns + ["search_ms"]


def _run_once(cfg, model, n, k, repetition, seed):
    cell = cell_inputs(cfg, model, n, seed)
    path = _run_path(cfg.path_mode, cell, n + k)
    cover_dist = smooth_normalize(histogram(cell.cover))
    cover_cooc = cooccurrence(cell.cover)

    baseline_stego = embed_lsb(cell.cover, fair_baseline_payload(cell.message, k), path)
    baseline = distance_report(cell.cover, baseline_stego, cover_dist, cover_cooc)

    shaping_cfg = ShapingConfig(k=k, session_seed=cell.session_seed)
    objective = kl_histogram_objective(cell.cover)
    start = time.perf_counter()
    result = shape_select(cell.cover, cell.message, shaping_cfg, path, objective_fn=objective)
    elapsed_ms = (time.perf_counter() - start) * 1e3
    shaped = distance_report(cell.cover, result.stego, cover_dist, cover_cooc)

    if cfg.debug:
        best = min(value for _, value in result.per_candidate)
        if result.objective_value != best or abs(shaped.kl - best) > 1e-12:
            raise ShapingError(f"shaped KL {shaped.kl} is not the candidate minimum {best}")
    degenerate = [m for m in METRIC_NAMES if not getattr(baseline, m) > 0]
    if degenerate:
        logger.warning("%s N=%d K=%d rep=%d: degenerate baseline for %s, gain left undefined",
                       model.value, n, k, repetition, ", ".join(degenerate))

    return RunRecord(
        model=model.value, n=n, k=k, repetition=repetition, seed=seed,
        path_mode=cfg.path_mode.value, chosen_h=result.chosen_h,
        baseline=baseline, shaped=shaped, search_ms=round(elapsed_ms, 3),
    )


def _cells(cfg):
    for model_index, model in enumerate(cfg.models):
        for n_index, n in enumerate(cfg.ns):
            logger.info("campaign cell %s N=%d (%d K values x %d repetitions)",
                        model.value, n, len(cfg.ks), cfg.repetitions)
            for k in cfg.ks:
                for repetition in range(cfg.repetitions):
                    yield model, n, k, repetition, cfg.cell_seed(model_index, n_index, repetition)


def run_campaign(cfg):
    """
    LSB / KL-histogram campaign.

    Returns:
        RunRecords in (model, N, K, repetition) enumeration order
    """
    return [_run_once(cfg, *cell) for cell in _cells(cfg)]


@dataclass(frozen=True)
class StcRunRecord(CsvRow):
    model: str
    n: int
    k: int
    repetition: int
    seed: int
    chosen_h: int
    blocks: int
    cost: float
    search_ms: float


def run_stc_campaign(cfg):
    """Syndrome-cost campaign over the same (model, N, K, repetition) grid."""
    records = []
    for model, n, k, repetition, seed in _cells(cfg):
        cell = cell_inputs(cfg, model, n, seed)
        stc_cfg = StcConfig(key=cell.path_key)
        shaping_cfg = ShapingConfig(k=k, session_seed=cell.session_seed,
                                    objective=Objective.SYNDROME_COST)
        start = time.perf_counter()
        outcome = stc_shape_select(cell.cover, cell.message, shaping_cfg, stc_cfg)
        elapsed_ms = (time.perf_counter() - start) * 1e3
        records.append(StcRunRecord(
            model=model.value, n=n, k=k, repetition=repetition, seed=seed,
            chosen_h=outcome.chosen_h, blocks=stc_cfg.blocks_for(n + k),
            cost=outcome.total_cost, search_ms=round(elapsed_ms, 3),
        ))
    return records


@dataclass(frozen=True)
class SummaryRow(CsvRow):
    group_by: str
    group: object
    metric: str
    runs: int
    mean_gain: float
    ci95: float
    success_rate: float
    mean_baseline: float
    mean_shaped: float


def _ci95(values):
    values = values.dropna()
    if len(values) < 2:
        return 0.0
    return float(CI_Z * values.std(ddof=1) / math.sqrt(len(values)))


def aggregate(records, group_by="k", metric="kl"):
    """
    Mean gain per group with a normal-approximation 95% interval and the
    share of runs where shaping strictly beat the baseline.

    Args:
        records: RunRecords
        group_by: "k", "model" or "n"
        metric: one of METRIC_NAMES

    Returns:
        SummaryRows in first-appearance order of the groups
    """
    if group_by not in ("k", "model", "n"):
        raise ConfigError(f"cannot group by {group_by!r}")
    if metric not in METRIC_NAMES:
        raise ConfigError(f"unknown metric {metric!r}")
    records = list(records)
    if not records:
        raise ConfigError("cannot aggregate an empty set of runs")
    frame = pd.DataFrame({
        "group": [getattr(r, group_by) for r in records],
        "gain": [r.gain(metric) for r in records],
        "baseline": [getattr(r.baseline, metric) for r in records],
        "shaped": [getattr(r.shaped, metric) for r in records],
    })
    rows = []
    for group, part in frame.groupby("group", sort=False):
        rows.append(SummaryRow(
            group_by=group_by,
            group=group.item() if hasattr(group, "item") else group,
            metric=metric,
            runs=len(part),
            mean_gain=float(part["gain"].mean()),
            ci95=_ci95(part["gain"]),
            success_rate=float((part["gain"] > 0).mean()),
            mean_baseline=float(part["baseline"].mean()),
            mean_shaped=float(part["shaped"].mean()),
        ))
    return rows


@dataclass(frozen=True)
class MetricTableRow(CsvRow):
    k: int
    runs: int
    gain_kl: float
    gain_js: float
    gain_tv: float
    gain_chi2: float
    gain_cooc_l1: float


def metric_table(records):
    """Per-K mean gain for every distance."""
    per_metric = {metric: aggregate(records, "k", metric) for metric in METRIC_NAMES}
    rows = []
    for i, kl_row in enumerate(per_metric["kl"]):
        rows.append(MetricTableRow(
            k=kl_row.group, runs=kl_row.runs,
            **{f"gain_{metric}": per_metric[metric][i].mean_gain for metric in METRIC_NAMES},
        ))
    return rows


@dataclass(frozen=True)
class IndexTableRow(CsvRow):
    k: int
    runs: int
    mean_normalized_h: float
    largest_bucket_share: float


def index_table(records):
    """Dispersion of the chosen index for every K >= 1."""
    by_k = {}
    for record in records:
        by_k.setdefault(record.k, []).append(record)
    rows = []
    for k, runs in by_k.items():
        if k < 1:
            continue
        stat = index_stat(runs, k)
        rows.append(IndexTableRow(k=k, runs=len(runs), mean_normalized_h=stat.mean_normalized_h,
                                  largest_bucket_share=stat.largest_bucket_share))
    return rows


@dataclass(frozen=True)
class StcSummaryRow(CsvRow):
    k: int
    configurations: int
    runs: int
    mean_cost: float
    reduction: float


def summarize_stc(records):
    """Mean minimum cost per K and its reduction against the smallest K (normally 0)."""
    records = list(records)
    if not records:
        raise ConfigError("cannot summarize an empty set of runs")
    frame = pd.DataFrame([r.to_row() for r in records])
    means = frame.groupby("k", sort=True)["cost"].agg(["mean", "size"])
    reference = float(means["mean"].iloc[0])
    return [
        StcSummaryRow(k=int(k), configurations=1 << int(k), runs=int(row["size"]),
                      mean_cost=float(row["mean"]), reduction=relative_gain(reference, float(row["mean"])))
        for k, row in means.iterrows()
    ]


@dataclass(frozen=True)
class TimingConfig:
    ks: tuple = (0, 4, 8, 10, 12)
    n: int = 1000
    repetitions: int = 3
    models: tuple = (CoverModel.SMOOTH, CoverModel.BIMODAL)
    width: int = 100
    height: int = 100
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "ks", tuple(int(k) for k in self.ks))
        object.__setattr__(self, "models", tuple(CoverModel(m) for m in self.models))
        if self.repetitions < 1:
            raise ConfigError(f"repetitions must be >= 1, got {self.repetitions}")
        if any(not 0 <= k <= MAX_INDEX_BITS for k in self.ks):
            raise ConfigError(f"every K must be in [0, {MAX_INDEX_BITS}], got {self.ks}")
        if self.n + max(self.ks) > self.width * self.height:
            raise ConfigError("N+K exceeds the cover size")


@dataclass(frozen=True)
class TimingRow(CsvRow):
    k: int
    configurations: int
    runs: int
    mean_search_ms: float
    mean_candidate_us: float


def timing_study(cfg=TimingConfig()):
    """
    Wall-clock cost of exhaustive candidate search with keyed paths.

    Only the search itself is timed; cover generation and path construction
    happen before the clock starts.
    """
    campaign = CampaignConfig(models=cfg.models, width=cfg.width, height=cfg.height,
                              ns=(cfg.n,), ks=cfg.ks, repetitions=cfg.repetitions,
                              master_seed=cfg.master_seed, path_mode=PathMode.KEYED)
    # warm-up so the first measured K does not pay for lazy initialization
    warm = cell_inputs(campaign, cfg.models[0], cfg.n, cfg.master_seed)
    shape_select(warm.cover, warm.message, ShapingConfig(k=1),
                 _run_path(PathMode.KEYED, warm, cfg.n + 1))

    rows = []
    for k in cfg.ks:
        elapsed = []
        for model_index, model in enumerate(cfg.models):
            for repetition in range(cfg.repetitions):
                cell = cell_inputs(campaign, model, cfg.n, campaign.cell_seed(model_index, 0, repetition))
                path = _run_path(PathMode.KEYED, cell, cfg.n + k)
                shaping_cfg = ShapingConfig(k=k, session_seed=cell.session_seed)
                objective = kl_histogram_objective(cell.cover)
                start = time.perf_counter()
                shape_select(cell.cover, cell.message, shaping_cfg, path, objective_fn=objective)
                elapsed.append(time.perf_counter() - start)
        mean_s = float(np.mean(elapsed))
        rows.append(TimingRow(k=k, configurations=1 << k, runs=len(elapsed),
                              mean_search_ms=round(mean_s * 1e3, 3),
                              mean_candidate_us=round(mean_s * 1e6 / (1 << k), 3)))
        logger.info("timing K=%d: %.3f ms per search", k, mean_s * 1e3)
    return rows


def emit_csv(rows, columns=None, drop=()):
    """
    Rows as RFC 4180 CSV bytes (header line, CRLF line ends, '.' decimals).

    Args:
        rows: objects with to_row()
        columns: header to use, required to emit a header for an empty row list
        drop: column names to leave out, e.g. TIMING_COLUMNS

    Returns:
        UTF-8 encoded CSV, rows in the given order
    """
    records = [row.to_row() for row in rows]
    if columns is None:
        if not records:
            return b""
        columns = list(records[0])
    columns = [c for c in columns if c not in drop]
    frame = pd.DataFrame.from_records(records, columns=columns)
    return frame.to_csv(index=False, lineterminator="\r\n").encode("utf-8")


_CONFIG_KEYS = {"models", "width", "height", "ns", "ks", "repetitions", "master_seed", "path_mode",
                "objective", "output", "debug", "blur_passes", "gradient_sigma", "bimodal_means",
                "bimodal_sigma"}
_COVER_KEYS = ("blur_passes", "gradient_sigma", "bimodal_means", "bimodal_sigma")


def load_campaign_config(path):
    """
    Read a flat key = value campaign file (TOML syntax).

    Example:
        models = ["uniform", "smooth"]
        ns = [1000]
        ks = [0, 2, 4, 6, 8]
        repetitions = 10
        path_mode = "keyed"
    """
    try:
        with open(path, "rb") as f:
            raw = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from e
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    nested = [key for key, value in raw.items() if isinstance(value, dict)]
    if nested:
        raise ConfigError(f"{path}: config must be flat, got tables {nested}")
    cover_args = {key: raw.pop(key) for key in _COVER_KEYS if key in raw}
    if "bimodal_means" in cover_args:
        cover_args["bimodal_means"] = tuple(cover_args["bimodal_means"])
    try:
        return CampaignConfig(cover_params=CoverParams(**cover_args), **raw)
    except TypeError as e:
        raise ConfigError(f"{path}: {e}") from e
