"""Correlation sweep, outlier exclusion, and permutation significance test.

Grid cells and permutation repetitions are independent jobs: per-repetition
seeds derive from the master seed and the repetition index alone, so the
work can fan out across processes without changing any result.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import math
import os
import statistics as pystats
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping, Optional, Sequence, Union

import numpy as np
from scipy.stats import rankdata
from scipy.stats import t as t_dist

from .centrality import MEASURES, CentralityVector, PageRankParams, compute_all, ldc_vector
from .corpus import DistanceFunctionParams, FluencyRecord, build_graph, shuffle_records
from .errors import (
    InsufficientData,
    LdcnetError,
    NoRecords,
    UndefinedActualCorrelation,
    ZeroVariance,
)
from .graph import WeightedDigraph
from .metrics import covariates

PathOrFile = Union[str, os.PathLike, IO[str]]

#: Correlated variables per grid cell: the seven measures plus covariates.
VARIABLES = MEASURES + ("log_frequency", "avg_location")

#: The full 90-cell analysis grid exposed as the "paper" preset in the CLI.
FULL_GRID_WS_VALUES = tuple(range(1, 10))
FULL_GRID_MS_VALUES = tuple(range(3, 22, 2))

#: Convention recorded in output metadata: the outlier band uses population SD.
SD_CONVENTION = "population"


# -- rank correlation -------------------------------------------------------


def spearman(x: Sequence[Optional[float]], y: Sequence[Optional[float]]) -> float:
    """Rank correlation of two paired series.

    Pairs with a missing value on either side are dropped; ties receive the
    mean of their rank range. Raises InsufficientData below 3 usable pairs
    and ZeroVariance when either side is constant.
    """
    if len(x) != len(y):
        raise ValueError("series must be paired")
    xs, ys = [], []
    for a, b in zip(x, y):
        if a is None or b is None:
            continue
        xs.append(float(a))
        ys.append(float(b))
    if len(xs) < 3:
        raise InsufficientData(f"need >= 3 paired observations, got {len(xs)}")
    if min(xs) == max(xs) or min(ys) == max(ys):
        raise ZeroVariance("a constant series has no rank correlation")
    rx = rankdata(xs, method="average")
    ry = rankdata(ys, method="average")
    rx = rx - rx.mean()
    ry = ry - ry.mean()
    return float(np.dot(rx, ry) / math.sqrt(np.dot(rx, rx) * np.dot(ry, ry)))


def spearman_pvalue(rho: float, n: int) -> float:
    """Two-sided parametric p-value via the Student-t approximation."""
    if n < 3:
        raise InsufficientData("p-value needs >= 3 observations")
    if abs(rho) >= 1.0:
        return 0.0
    t_stat = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
    return float(2.0 * t_dist.sf(abs(t_stat), n - 2))


def exclude_outliers(
    x: Mapping[str, float],
    y: Optional[Mapping[str, float]] = None,
    k: float = 2.5,
) -> set[str]:
    """Words whose values stay within mean +/- k*SD on every given series.

    The band uses population SD and is computed once from the full common
    word set, not iteratively. A zero-variance series excludes nothing.
    """
    series = [x] if y is None else [x, y]
    words = set(series[0])
    for s in series[1:]:
        words &= set(s)
    if len(words) < 2:
        raise InsufficientData(f"need >= 2 words, got {len(words)}")
    retained = set(words)
    for s in series:
        values = [s[w] for w in words]
        mean = pystats.fmean(values)
        sd = pystats.pstdev(values)
        if sd == 0.0:
            continue
        retained -= {w for w in words if abs(s[w] - mean) > k * sd}
    return retained


# -- grid sweep --------------------------------------------------------------


@dataclass(frozen=True)
class SpearmanEntry:
    """One pairwise correlation and the word count that survived exclusion."""

    rho: float
    n: int


@dataclass
class GridResult:
    """Everything computed for one (ws, ms) cell.

    ``status`` is "ok", "empty" (graph had no arcs), or "error" (a measure
    raised); ``table`` maps canonical variable pairs to entries, None where
    the correlation is undefined.
    """

    ws: int
    ms: int
    status: str
    error: Optional[str] = None
    n_vertices: int = 0
    words: tuple[str, ...] = ()
    graph: Optional[WeightedDigraph] = None
    measures: Optional[dict[str, CentralityVector]] = None
    variables: Optional[dict[str, dict[str, float]]] = None
    table: Optional[dict[tuple[str, str], Optional[SpearmanEntry]]] = None


def variable_pairs() -> list[tuple[str, str]]:
    """Canonically ordered variable pairs for tables and summary columns."""
    return list(itertools.combinations(VARIABLES, 2))


def table_entry(cell: GridResult, a: str, b: str) -> Optional[SpearmanEntry]:
    """Look up a pair in a cell's table regardless of argument order."""
    if cell.table is None:
        return None
    if a == b:
        raise ValueError("diagonal entries are 1 by definition")
    if VARIABLES.index(a) > VARIABLES.index(b):
        a, b = b, a
    return cell.table.get((a, b))


def evaluate_cell(
    records: Sequence[FluencyRecord],
    ws: int,
    ms: int,
    pagerank_params: Optional[PageRankParams] = None,
) -> GridResult:
    """Build one cell's graph, measures, covariates, and Spearman table."""
    graph = build_graph(records, DistanceFunctionParams(ws, ms))
    if graph.vertex_count == 0:
        return GridResult(ws=ws, ms=ms, status="empty")
    try:
        measures = compute_all(graph, pagerank_params)
    except LdcnetError as exc:
        return GridResult(
            ws=ws,
            ms=ms,
            status="error",
            error=f"{type(exc).__name__}: {exc}",
            n_vertices=graph.vertex_count,
            words=graph.vertices,
            graph=graph,
        )
    word_stats = covariates(records)
    words = graph.vertices
    variables: dict[str, dict[str, float]] = {
        name: dict(measures[name].scores) for name in MEASURES
    }
    variables["log_frequency"] = {w: word_stats[w].log_frequency for w in words}
    variables["avg_location"] = {w: word_stats[w].avg_location for w in words}

    table: dict[tuple[str, str], Optional[SpearmanEntry]] = {}
    for a, b in variable_pairs():
        try:
            kept = sorted(exclude_outliers(variables[a], variables[b]))
            rho = spearman([variables[a][w] for w in kept], [variables[b][w] for w in kept])
            table[(a, b)] = SpearmanEntry(rho=rho, n=len(kept))
        except (InsufficientData, ZeroVariance):
            table[(a, b)] = None
    return GridResult(
        ws=ws,
        ms=ms,
        status="ok",
        n_vertices=graph.vertex_count,
        words=words,
        graph=graph,
        measures=measures,
        variables=variables,
        table=table,
    )


def _cell_task(args: tuple) -> GridResult:
    records, ws, ms, pagerank_params = args
    return evaluate_cell(records, ws, ms, pagerank_params)


def evaluate_cells(
    records: Sequence[FluencyRecord],
    cells: Sequence[tuple[int, int]],
    pagerank_params: Optional[PageRankParams] = None,
    jobs: int = 1,
) -> list[GridResult]:
    """Evaluate an explicit cell list, in order, optionally across workers."""
    if not records:
        raise NoRecords("cannot sweep zero records")
    if jobs <= 1 or len(cells) <= 1:
        return [evaluate_cell(records, ws, ms, pagerank_params) for ws, ms in cells]
    tasks = [(records, ws, ms, pagerank_params) for ws, ms in cells]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_cell_task, tasks))


def grid_sweep(
    records: Sequence[FluencyRecord],
    ws_values: Iterable[int] = FULL_GRID_WS_VALUES,
    ms_values: Iterable[int] = FULL_GRID_MS_VALUES,
    pagerank_params: Optional[PageRankParams] = None,
    jobs: int = 1,
) -> list[GridResult]:
    """Evaluate every (ws, ms) cell; cell order is ws-major, then ms.

    Cell results are independent of evaluation order and of ``jobs``.
    """
    grid = [(ws, ms) for ws in ws_values for ms in ms_values]
    return evaluate_cells(records, grid, pagerank_params, jobs=jobs)


def correlation_distance_matrix(cell: GridResult) -> tuple[tuple[str, ...], list[list[float]]]:
    """Measure-by-measure distances 1 - |rho| for a completed cell.

    Zero diagonal, symmetric. Raises InsufficientData when any measure pair
    in the cell's table is undefined.
    """
    if cell.status != "ok" or cell.table is None:
        raise InsufficientData(f"cell ws={cell.ws} ms={cell.ms} has no Spearman table")
    size = len(MEASURES)
    rows = [[0.0] * size for _ in range(size)]
    for i, a in enumerate(MEASURES):
        for j in range(i + 1, size):
            entry = table_entry(cell, a, MEASURES[j])
            if entry is None:
                raise InsufficientData(
                    f"cell ws={cell.ws} ms={cell.ms}: pair ({a}, {MEASURES[j]}) undefined"
                )
            d = 1.0 - abs(entry.rho)
            rows[i][j] = d
            rows[j][i] = d
    return MEASURES, rows


# -- grid exports ------------------------------------------------------------


def cell_dir_name(ws: int, ms: int) -> str:
    return f"ws{ws}_ms{ms}"


def summary_columns() -> list[str]:
    return ["ws", "ms", "n_vertices", "status"] + [
        f"rho_{a}__{b}" for a, b in variable_pairs()
    ]


def summary_row(cell: GridResult) -> dict[str, str]:
    row = {
        "ws": str(cell.ws),
        "ms": str(cell.ms),
        "n_vertices": str(cell.n_vertices),
        "status": cell.status if cell.error is None else f"error: {cell.error}",
    }
    for a, b in variable_pairs():
        entry = table_entry(cell, a, b)
        row[f"rho_{a}__{b}"] = "" if entry is None else format(entry.rho, ".12g")
    return row


def write_grid_summary(cells: Sequence[GridResult], dest: PathOrFile) -> None:
    """Top-level grid summary: one row per cell in sweep order."""
    if hasattr(dest, "write"):
        _write_summary(cells, dest)  # type: ignore[arg-type]
    else:
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            _write_summary(cells, fh)


def _write_summary(cells: Sequence[GridResult], fh: IO[str]) -> None:
    columns = summary_columns()
    writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for cell in cells:
        writer.writerow(summary_row(cell))


def write_spearman_csv(cell: GridResult, dest: PathOrFile) -> None:
    """Square correlation matrix over all nine variables; blanks where undefined."""
    with _opened(dest) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("variable",) + VARIABLES)
        for a in VARIABLES:
            row: list[str] = [a]
            for b in VARIABLES:
                if a == b:
                    row.append("1")
                    continue
                entry = table_entry(cell, a, b)
                row.append("" if entry is None else format(entry.rho, ".12g"))
            writer.writerow(row)


def write_distance_csv(cell: GridResult, dest: PathOrFile) -> None:
    """Square 1 - |rho| matrix over the seven measures."""
    labels, rows = correlation_distance_matrix(cell)
    with _opened(dest) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("measure",) + labels)
        for label, row in zip(labels, rows):
            writer.writerow([label] + [format(v, ".12g") for v in row])


class _opened:
    """Context manager accepting either a path or an open text file."""

    def __init__(self, dest: PathOrFile):
        self._dest = dest
        self._own = not hasattr(dest, "write")
        self._fh: Optional[IO[str]] = None

    def __enter__(self) -> IO[str]:
        if self._own:
            self._fh = open(self._dest, "w", encoding="utf-8", newline="")
            return self._fh
        return self._dest  # type: ignore[return-value]

    def __exit__(self, *exc) -> None:
        if self._own and self._fh is not None:
            self._fh.close()


# -- permutation test --------------------------------------------------------


@dataclass(frozen=True)
class PermutationConfig:
    """Shape of one permutation run against a target retrieval statistic."""

    ws: int
    ms: int
    target: str = "dt_from"
    repetitions: int = 5000
    seed: int = 0
    alpha: float = 0.05
    alternative: str = "two-sided"
    max_retries: int = 3

    def __post_init__(self) -> None:
        if self.target not in ("dt_to", "dt_from"):
            raise ValueError(f"target must be 'dt_to' or 'dt_from', got {self.target!r}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.alternative not in ("two-sided", "greater", "less"):
            raise ValueError(f"unknown alternative {self.alternative!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")


@dataclass(frozen=True)
class PermutationOutcome:
    """Actual correlation, permutation p, and a summary of the null draws."""

    ws: int
    ms: int
    target: str
    seed: int
    alpha: float
    alternative: str
    n_words: int
    actual_rho: float
    parametric_p: float
    p_value: float
    repetitions: int
    n_effective: int
    n_failed: int
    null_mean: Optional[float]
    null_sd: Optional[float]
    null_quantiles: dict[str, float] = field(default_factory=dict)

    @property
    def significant(self) -> bool:
        return self.parametric_p <= self.alpha

    @property
    def nontrivial(self) -> bool:
        return self.p_value <= self.alpha

    @property
    def significant_and_nontrivial(self) -> bool:
        return self.significant and self.nontrivial

    def to_dict(self) -> dict:
        return {
            "ws": self.ws,
            "ms": self.ms,
            "target": self.target,
            "seed": self.seed,
            "alpha": self.alpha,
            "alternative": self.alternative,
            "n_words": self.n_words,
            "actual_rho": self.actual_rho,
            "parametric_p": self.parametric_p,
            "p_value": self.p_value,
            "repetitions": self.repetitions,
            "n_effective": self.n_effective,
            "n_failed": self.n_failed,
            "null_mean": self.null_mean,
            "null_sd": self.null_sd,
            "null_quantiles": self.null_quantiles,
            "significant": self.significant,
            "nontrivial": self.nontrivial,
            "significant_and_nontrivial": self.significant_and_nontrivial,
        }


def derive_seed(master: int, *parts: object) -> int:
    """Stable per-task seed from the master seed and task coordinates."""
    payload = ":".join([str(master)] + [str(p) for p in parts]).encode("utf-8")
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")


def ldc_dt_correlation(
    records: Sequence[FluencyRecord], ws: int, ms: int, target: str
) -> tuple[float, int]:
    """Rank correlation between the detour score and one retrieval statistic.

    Returns (rho, number of paired words). Raises the underlying error when
    the graph is empty or too few words carry both values.
    """
    graph = build_graph(records, DistanceFunctionParams(ws, ms))
    if graph.vertex_count == 0:
        raise InsufficientData(f"graph at ws={ws} ms={ms} is empty")
    scores = ldc_vector(graph).scores
    word_stats = covariates(records)
    xs: list[float] = []
    ys: list[Optional[float]] = []
    for word in graph.vertices:
        stat = word_stats.get(word)
        value = None if stat is None else getattr(stat, target)
        if value is None:
            continue
        xs.append(scores[word])
        ys.append(value)
    rho = spearman(xs, ys)
    return rho, len(xs)


def _permutation_rep(args: tuple) -> Optional[float]:
    records, ws, ms, target, master_seed, rep, max_retries = args
    for attempt in range(max_retries + 1):
        shuffled = shuffle_records(records, derive_seed(master_seed, rep, attempt))
        try:
            rho, _ = ldc_dt_correlation(shuffled, ws, ms, target)
            return rho
        except LdcnetError:
            continue
    return None


def permutation_test(
    records: Sequence[FluencyRecord],
    config: PermutationConfig,
    jobs: int = 1,
) -> PermutationOutcome:
    """Shuffle-rebuild-recorrelate significance test for the detour score.

    Each repetition shuffles every record's word order (onsets fixed),
    rebuilds the graph at (ws, ms), and recomputes the detour score and the
    target retrieval statistic on the shuffled corpus. The reported p-value
    uses the add-one estimator over the null draws; repetitions whose
    shuffled corpus cannot produce a correlation are redrawn up to
    ``max_retries`` times and counted as failed afterwards.
    """
    if not records:
        raise NoRecords("cannot run a permutation test on zero records")
    try:
        actual_rho, n_words = ldc_dt_correlation(records, config.ws, config.ms, config.target)
    except LdcnetError as exc:
        raise UndefinedActualCorrelation(
            f"actual-order correlation undefined at ws={config.ws} ms={config.ms}: {exc}"
        ) from exc
    parametric_p = spearman_pvalue(actual_rho, n_words)

    tasks = [
        (records, config.ws, config.ms, config.target, config.seed, rep, config.max_retries)
        for rep in range(config.repetitions)
    ]
    if jobs <= 1 or config.repetitions == 1:
        draws = [_permutation_rep(task) for task in tasks]
    else:
        chunk = max(1, config.repetitions // (jobs * 4))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            draws = list(pool.map(_permutation_rep, tasks, chunksize=chunk))

    null = [rho for rho in draws if rho is not None]
    n_failed = len(draws) - len(null)
    if config.alternative == "two-sided":
        extreme = sum(1 for rho in null if abs(rho) >= abs(actual_rho))
    elif config.alternative == "greater":
        extreme = sum(1 for rho in null if rho >= actual_rho)
    else:
        extreme = sum(1 for rho in null if rho <= actual_rho)
    p_value = (1 + extreme) / (len(null) + 1)

    quantiles: dict[str, float] = {}
    null_mean: Optional[float] = None
    null_sd: Optional[float] = None
    if null:
        arr = np.asarray(null)
        null_mean = float(arr.mean())
        null_sd = float(arr.std())
        for label, q in (
            ("min", 0.0),
            ("p2.5", 2.5),
            ("p25", 25.0),
            ("p50", 50.0),
            ("p75", 75.0),
            ("p97.5", 97.5),
            ("max", 100.0),
        ):
            quantiles[label] = float(np.percentile(arr, q))

    return PermutationOutcome(
        ws=config.ws,
        ms=config.ms,
        target=config.target,
        seed=config.seed,
        alpha=config.alpha,
        alternative=config.alternative,
        n_words=n_words,
        actual_rho=actual_rho,
        parametric_p=parametric_p,
        p_value=p_value,
        repetitions=config.repetitions,
        n_effective=len(null),
        n_failed=n_failed,
        null_mean=null_mean,
        null_sd=null_sd,
        null_quantiles=quantiles,
    )
