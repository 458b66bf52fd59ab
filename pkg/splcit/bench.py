"""
Benchmark protocol: seeded runs of every algorithm on every model, then
aggregation into summary, pairwise-test and correlation tables.

Every (model, algorithm, run) cell is independent. Cells run inline or in
a process pool; results are always ordered by (model, algorithm, run), so
the deterministic part of the output does not depend on scheduling.
"""

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .config import BenchmarkConfig
from .corpus import ModelDiscovery, load_gpl
from .exceptions import (
    EnumerationOverflowError,
    IncompleteCoveringArrayError,
    ModelError,
    UndefinedCorrelationError,
)
from .feature_model import FeatureModel, load_model
from .generators import GeneratorConfig, generate
from .metrics import HISTOGRAM_BUCKETS, compute_suite_metrics, variant_set
from .sat_core import (
    DEFAULT_ENUMERATION_CAP,
    CnfFormula,
    count_products,
    feature_classes,
    to_cnf,
)
from .stats import DEFAULT_ALPHA, a12_magnitude, compare, spearman
from .synthetic import synthetic_model
from .tset_engine import (
    TSetUniverse,
    enumerate_valid_tsets,
    verify_covering_array,
    write_covering_array,
)

logger = logging.getLogger(__name__)

HISTOGRAM_COLUMNS = [f"h{i}" for i in range(HISTOGRAM_BUCKETS)]
RUN_COLUMNS = [
    "model",
    "algorithm",
    "run",
    "seed",
    "size",
    "similarity",
    "mean_tuple_frequency",
] + HISTOGRAM_COLUMNS
TIMING_COLUMNS = ["model", "algorithm", "run", "seed", "generation_ms"]
TUPLE_FREQUENCY_COLUMNS = ["model", "algorithm", "run", "seed", "tset", "frequency"]
# metric name -> runs/timings column; lower is better for all three
COMPARED_METRICS = {
    "size": "size",
    "performance": "generation_ms",
    "similarity": "similarity",
}
CORRELATION_VARIABLES = ["Products", "Features", "TSSize", "Performance", "Similarity"]
PERFORMANCE_NOTE = (
    "Performance is wall-clock generation time in milliseconds; it excludes "
    "model parsing and t-set universe construction."
)


# ---------------------------------------------------------------------------
# Model analysis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelReport:
    name: str
    features: int
    products: Optional[int]
    cap: int
    tset_count: int
    core: Tuple[str, ...]
    variant: Tuple[str, ...]
    dead: Tuple[str, ...]

    @property
    def products_label(self) -> str:
        return str(self.products) if self.products is not None else f"> {self.cap}"

    def lines(self) -> List[str]:
        return [
            f"model: {self.name}",
            f"NF: {self.features}",
            f"NP: {self.products_label}",
            f"|TS| (t=2): {self.tset_count}",
            f"core ({len(self.core)}): {' '.join(self.core)}",
            f"variant ({len(self.variant)}): {' '.join(self.variant)}",
            f"dead ({len(self.dead)}): {' '.join(self.dead)}",
        ]


def analyze_model(
    model: Union[FeatureModel, str, Path], cap: int = DEFAULT_ENUMERATION_CAP
) -> ModelReport:
    """
    Size figures and feature classification of a model.

    A product count above cap is reported as ``> cap`` rather than failing.
    """
    if not isinstance(model, FeatureModel):
        model = load_model(model)
    cnf = to_cnf(model)
    try:
        products: Optional[int] = count_products(model, cap, cnf)
    except EnumerationOverflowError:
        products = None
    core, dead = feature_classes(cnf)
    variant = frozenset(range(len(model))) - core - dead
    tset_count = len(enumerate_valid_tsets(model, 2, cnf)) if len(model) >= 2 else 0
    return ModelReport(
        name=model.name,
        features=len(model),
        products=products,
        cap=cap,
        tset_count=tset_count,
        core=tuple(model.names_of(core)),
        variant=tuple(model.names_of(variant)),
        dead=tuple(model.names_of(dead)),
    )


# ---------------------------------------------------------------------------
# Corpus
# ---------------------------------------------------------------------------


@dataclass
class Corpus:
    models: List[FeatureModel] = field(default_factory=list)
    skipped: List[Tuple[str, str]] = field(default_factory=list)


def load_corpus(config: BenchmarkConfig) -> Corpus:
    """
    Collect the benchmark's models: bundled GPL, synthetic models, then files.

    Unparseable files and duplicate model names are skipped and listed.
    """
    corpus = Corpus()
    names = set()

    def add(model: FeatureModel, origin: str) -> None:
        if model.name in names:
            logger.warning(f"Skipping {origin}: duplicate model name '{model.name}'")
            corpus.skipped.append((origin, f"duplicate model name '{model.name}'"))
            return
        names.add(model.name)
        corpus.models.append(model)

    if config.include_gpl:
        add(load_gpl(), "bundled gpl.fm")
    for spec in config.synthetic:
        add(synthetic_model(spec), f"synthetic {spec.name}")
    for path in ModelDiscovery().discover(config.models):
        try:
            add(load_model(path), str(path))
        except ModelError as e:
            logger.warning(f"Skipping unparseable model {path}: {e}")
            corpus.skipped.append((str(path), str(e)))
    logger.info(
        f"Benchmark corpus: {len(corpus.models)} models, {len(corpus.skipped)} skipped"
    )
    return corpus


# ---------------------------------------------------------------------------
# Cells
# ---------------------------------------------------------------------------


@lru_cache(maxsize=32)
def _prepared(model: FeatureModel, t: int) -> Tuple[CnfFormula, TSetUniverse]:
    cnf = to_cnf(model)
    return cnf, enumerate_valid_tsets(model, t, cnf)


@dataclass(frozen=True)
class CellTask:
    model: FeatureModel
    algorithm: str
    run: int
    t: int
    config: GeneratorConfig
    archive_dir: Optional[Path] = None


@dataclass(frozen=True)
class RunRecord:
    model: str
    algorithm: str
    run: int
    seed: int
    size: int
    similarity: float
    mean_tuple_frequency: float
    histogram: Tuple[int, ...]
    generation_ms: int
    # canonical universe order
    tuple_frequencies: Tuple[float, ...] = ()

    @property
    def key(self) -> Tuple[str, str, int]:
        return (self.model, self.algorithm, self.run)


def run_cell(task: CellTask) -> RunRecord:
    """
    Generate, verify and measure one covering array.

    Raises:
        IncompleteCoveringArrayError: If the array has invalid rows or misses a t-set
    """
    model = task.model
    seed = task.config.seed
    cnf, universe = _prepared(model, task.t)
    ca = generate(task.algorithm, model, task.t, task.config, universe=universe, cnf=cnf)
    verification = verify_covering_array(model, universe, ca)
    if not verification.ok:
        detail = (
            f"{len(verification.invalid_rows)} invalid rows, "
            f"{len(verification.uncovered)} uncovered t-sets"
        )
        raise IncompleteCoveringArrayError(model.name, task.algorithm, seed, detail)
    if task.archive_dir is not None:
        write_covering_array(
            model,
            ca,
            task.archive_dir / model.name / task.algorithm / f"seed-{seed}.ca",
        )
    metrics = compute_suite_metrics(model, universe, ca)
    logger.info(
        f"Cell {model.name}/{task.algorithm}/run {task.run}: size {metrics.size}, "
        f"{metrics.generation_ms} ms"
    )
    return RunRecord(
        model=model.name,
        algorithm=task.algorithm,
        run=task.run,
        seed=seed,
        size=metrics.size,
        similarity=metrics.similarity,
        mean_tuple_frequency=metrics.mean_tuple_frequency,
        histogram=metrics.frequency_histogram,
        generation_ms=metrics.generation_ms,
        tuple_frequencies=metrics.tuple_frequencies,
    )


def _execute(tasks: Sequence[CellTask], workers: int) -> List[RunRecord]:
    if workers <= 1 or len(tasks) <= 1:
        records = [run_cell(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            records = list(executor.map(run_cell, tasks, chunksize=4))
    return sorted(records, key=lambda record: record.key)


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


@dataclass
class ComparisonReport:
    """
    Everything a benchmark produced.

    ``runs`` and ``tuple_frequencies`` hold only schedule-independent
    columns; wall-clock times live in ``timings``. ``tuple_frequencies`` is
    long-form: one row per (model, algorithm, run, t-set), with ``tset`` the
    index in canonical universe order.
    """

    runs: pd.DataFrame
    tuple_frequencies: pd.DataFrame
    timings: pd.DataFrame
    models: pd.DataFrame
    summary: pd.DataFrame
    pairwise: pd.DataFrame
    pairwise_pooled: pd.DataFrame
    correlations: pd.DataFrame
    skipped: List[Tuple[str, str]] = field(default_factory=list)
    alpha: float = DEFAULT_ALPHA


def _runs_frame(records: Sequence[RunRecord]) -> pd.DataFrame:
    rows = [
        [r.model, r.algorithm, r.run, r.seed, r.size, r.similarity, r.mean_tuple_frequency]
        + list(r.histogram)
        for r in records
    ]
    return pd.DataFrame(rows, columns=RUN_COLUMNS)


def _tuple_frequencies_frame(records: Sequence[RunRecord]) -> pd.DataFrame:
    rows = [
        [r.model, r.algorithm, r.run, r.seed, index, frequency]
        for r in records
        for index, frequency in enumerate(r.tuple_frequencies)
    ]
    return pd.DataFrame(rows, columns=TUPLE_FREQUENCY_COLUMNS)


def _timings_frame(records: Sequence[RunRecord]) -> pd.DataFrame:
    rows = [[r.model, r.algorithm, r.run, r.seed, r.generation_ms] for r in records]
    return pd.DataFrame(rows, columns=TIMING_COLUMNS)


def _models_frame(models: Sequence[FeatureModel], t: int, cap: int) -> pd.DataFrame:
    rows = []
    for model in models:
        _, universe = _prepared(model, t)
        try:
            products = count_products(model, cap)
        except EnumerationOverflowError:
            products = None
        rows.append(
            {
                "model": model.name,
                "features": len(model),
                "products": products,
                "tset_count": len(universe),
                "variant_features": len(variant_set(model)),
            }
        )
    frame = pd.DataFrame(
        rows, columns=["model", "features", "products", "tset_count", "variant_features"]
    )
    return frame.astype({"products": "Int64"})


def summarize(measured: pd.DataFrame) -> pd.DataFrame:
    """Per (model, algorithm) means of size, performance and similarity."""
    grouped = measured.groupby(["model", "algorithm"], sort=True)
    summary = grouped.agg(
        runs=("run", "count"),
        size=("size", "mean"),
        performance_ms=("generation_ms", "mean"),
        similarity=("similarity", "mean"),
        mean_tuple_frequency=("mean_tuple_frequency", "mean"),
    )
    return summary.reset_index()


def _pairwise_rows(
    frame: pd.DataFrame, algorithms: Sequence[str], alpha: float
) -> List[Dict[str, object]]:
    rows = []
    for metric, column in COMPARED_METRICS.items():
        for first, second in itertools.permutations(algorithms, 2):
            a = frame.loc[frame["algorithm"] == first, column].to_numpy(dtype=float)
            b = frame.loc[frame["algorithm"] == second, column].to_numpy(dtype=float)
            if len(a) == 0 or len(b) == 0:
                continue
            result = compare(a, b, alpha)
            rows.append(
                {
                    "metric": metric,
                    "algoA": first,
                    "algoB": second,
                    "p_value": result.p_value,
                    "significant": result.significant,
                    "a12": result.a12,
                    "magnitude": result.magnitude,
                }
            )
    return rows


PAIRWISE_COLUMNS = [
    "metric",
    "algoA",
    "algoB",
    "p_value",
    "significant",
    "a12",
    "magnitude",
]


def pairwise_tests(
    measured: pd.DataFrame, algorithms: Sequence[str], alpha: float = DEFAULT_ALPHA
) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """
    Rank-sum tests and A12 for every ordered algorithm pair.

    Returns:
        (per-model table, table pooled over all models); both are empty
        when fewer than two algorithms ran
    """
    algorithms = sorted(algorithms)
    per_model: List[Dict[str, object]] = []
    pooled: List[Dict[str, object]] = []
    if len(algorithms) >= 2:
        for model, frame in measured.groupby("model", sort=True):
            per_model.extend(
                {"model": model, **row} for row in _pairwise_rows(frame, algorithms, alpha)
            )
        pooled = _pairwise_rows(measured, algorithms, alpha)
    return (
        pd.DataFrame(per_model, columns=["model"] + PAIRWISE_COLUMNS),
        pd.DataFrame(pooled, columns=PAIRWISE_COLUMNS),
    )


def correlation_matrix(observations: pd.DataFrame) -> pd.DataFrame:
    """
    Spearman correlations between the columns of observations.

    Rows with a missing value in either column of a pair are dropped for
    that pair. Undefined correlations are NaN; the diagonal is 1.
    """
    columns = list(observations.columns)
    matrix = pd.DataFrame(np.nan, index=columns, columns=columns, dtype=float)
    for i, first in enumerate(columns):
        matrix.loc[first, first] = 1.0
        for second in columns[i + 1 :]:
            pair = observations[[first, second]].dropna()
            value = np.nan
            if len(pair) >= 2:
                try:
                    value = spearman(pair[first].to_numpy(float), pair[second].to_numpy(float))
                except UndefinedCorrelationError:
                    logger.debug(f"Correlation {first}/{second} undefined (constant data)")
            matrix.loc[first, second] = value
            matrix.loc[second, first] = value
    return matrix


def _correlation_observations(measured: pd.DataFrame, models: pd.DataFrame) -> pd.DataFrame:
    joined = measured.merge(models, on="model", how="left")
    return pd.DataFrame(
        {
            "Products": joined["products"].astype("float64"),
            "Features": joined["features"].astype("float64"),
            "TSSize": joined["size"].astype("float64"),
            "Performance": joined["generation_ms"].astype("float64"),
            "Similarity": joined["similarity"].astype("float64"),
        },
        columns=CORRELATION_VARIABLES,
    )


def build_report(
    records: Sequence[RunRecord],
    models: pd.DataFrame,
    algorithms: Sequence[str],
    skipped: Sequence[Tuple[str, str]] = (),
    alpha: float = DEFAULT_ALPHA,
) -> ComparisonReport:
    records = sorted(records, key=lambda record: record.key)
    runs = _runs_frame(records)
    timings = _timings_frame(records)
    measured = runs.merge(timings, on=["model", "algorithm", "run", "seed"])
    pairwise, pooled = pairwise_tests(measured, algorithms, alpha)
    return ComparisonReport(
        runs=runs,
        tuple_frequencies=_tuple_frequencies_frame(records),
        timings=timings,
        models=models,
        summary=summarize(measured),
        pairwise=pairwise,
        pairwise_pooled=pooled,
        correlations=correlation_matrix(_correlation_observations(measured, models)),
        skipped=list(skipped),
        alpha=alpha,
    )


def run_benchmark(
    config: BenchmarkConfig, output_dir: Optional[Union[str, Path]] = None
) -> ComparisonReport:
    """
    Run every (model, algorithm, run) cell of the benchmark.

    Args:
        config: Benchmark configuration
        output_dir: Where archived arrays go when ``config.archive`` is set

    Raises:
        IncompleteCoveringArrayError: If any generated array is incomplete
    """
    corpus = load_corpus(config)
    archive_dir = None
    if config.archive and output_dir is not None:
        archive_dir = Path(output_dir) / "arrays"
    tasks = [
        CellTask(
            model=model,
            algorithm=algorithm,
            run=run,
            t=config.t,
            config=config.generator_config(seed),
            archive_dir=archive_dir,
        )
        for model in corpus.models
        for algorithm in config.algorithms
        for run, seed in enumerate(config.seeds())
    ]
    logger.info(f"Running {len(tasks)} benchmark cells with {config.workers} worker(s)")
    records = _execute(tasks, config.workers)
    models = _models_frame(corpus.models, config.t, config.enumeration_cap)
    return build_report(records, models, config.algorithms, corpus.skipped)


# ---------------------------------------------------------------------------
# Emission
# ---------------------------------------------------------------------------


def _best_cells(summary: pd.DataFrame) -> List[str]:
    lines = []
    for model, frame in summary.groupby("model", sort=True):
        for label, column in (
            ("size", "size"),
            ("performance", "performance_ms"),
            ("similarity", "similarity"),
        ):
            best = frame[column].min()
            winners = sorted(frame.loc[frame[column] == best, "algorithm"])
            lines.append(f"  {model:<12} {label:<12} {', '.join(winners)} ({best:.4g})")
    return lines


def render_summary(report: ComparisonReport) -> str:
    lines = ["Benchmark summary", "", PERFORMANCE_NOTE, ""]
    lines.append("Models:")
    for row in report.models.itertuples(index=False):
        products = "n/a" if pd.isna(row.products) else str(row.products)
        lines.append(
            f"  {row.model:<12} NF={row.features} NP={products} |TS|={row.tset_count}"
        )
    lines.extend(["", "Best cell per metric (lower is better):"])
    lines.extend(_best_cells(report.summary))
    if not report.pairwise_pooled.empty:
        lines.extend(["", f"Pooled pairwise comparisons (alpha={report.alpha}):"])
        for row in report.pairwise_pooled.itertuples(index=False):
            marker = "*" if row.significant else " "
            lines.append(
                f"  {row.metric:<12} {row.algoA:>9} vs {row.algoB:<9} "
                f"A12={row.a12:.3f} ({a12_magnitude(row.a12)}) p={row.p_value:.4g}{marker}"
            )
    if report.skipped:
        lines.extend(["", "Skipped models:"])
        lines.extend(f"  {origin}: {reason}" for origin, reason in report.skipped)
    return "\n".join(lines) + "\n"


def emit_reports(report: ComparisonReport, directory: Union[str, Path]) -> List[Path]:
    """
    Write the report files into directory and return their paths.

    runs.csv and tuple_frequencies.csv depend only on the configuration;
    timings.csv and the files derived from it carry wall-clock measurements.
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def emit(frame: pd.DataFrame, name: str, index: bool = False) -> None:
        path = out / name
        frame.to_csv(path, index=index, lineterminator="\n")
        written.append(path)

    emit(report.runs, "runs.csv")
    emit(report.tuple_frequencies, "tuple_frequencies.csv")
    emit(report.timings, "timings.csv")
    emit(report.models, "models.csv")
    emit(report.summary, "summary.csv")
    emit(report.pairwise, "pairwise.csv")
    emit(report.pairwise_pooled, "pairwise_pooled.csv")
    emit(report.correlations, "correlations.csv", index=True)
    summary_path = out / "summary.txt"
    summary_path.write_text(render_summary(report), encoding="utf-8")
    written.append(summary_path)
    logger.info(f"Wrote {len(written)} report files to {out}")
    return written
