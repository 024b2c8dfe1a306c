"""Command-line front end for reproducible batch runs.

Exit codes: 0 success, 1 usage, 2 input error, 3 empty result, 4 undefined
statistic. Every command is a pure function of (inputs, flags, seed) and
writes a manifest with content digests of everything it emitted.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from typing import Optional, Sequence

from . import __version__
from .centrality import (
    MEASURES,
    PageRankParams,
    betweenness,
    closeness,
    compute_all,
    degree,
    ldc_vector,
    pagerank,
    pagerank_with_raw,
    triangles,
    write_centrality_csv,
)
from .corpus import DistanceFunctionParams, build_graph, load_corpus
from .errors import (
    EmptyGraph,
    InsufficientData,
    LdcnetError,
    MalformedLine,
    NonMonotoneTimestamp,
    NoRecords,
    UndefinedActualCorrelation,
)
from .graph import WeightedDigraph
from .manifest import RunManifest, file_digest, load_manifest, utc_now
from .metrics import covariates, write_stats_csv
from .stats import (
    FULL_GRID_MS_VALUES,
    FULL_GRID_WS_VALUES,
    PermutationConfig,
    SD_CONVENTION,
    cell_dir_name,
    evaluate_cells,
    permutation_test,
    summary_columns,
    summary_row,
    write_distance_csv,
    write_spearman_csv,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_EMPTY = 3
EXIT_UNDEFINED = 4

SEED_ENV_VAR = "LDC_SEED"

_INPUT_ERRORS = (MalformedLine, NonMonotoneTimestamp, FileNotFoundError, IsADirectoryError)


class _UsageError(Exception):
    """Command-level usage problem mapped to exit code 1."""


class _Parser(argparse.ArgumentParser):
    """ArgumentParser whose usage failures exit with code 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fail(code: int, message: str) -> int:
    print(f"ldcnet: {message}", file=sys.stderr)
    return code


def _round12(obj):
    """Round every float in a JSON-ready structure to 12 significant digits."""
    if isinstance(obj, float):
        return float(format(obj, ".12g"))
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


def _write_json(payload, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_round12(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _resolve_seed(flag_value: Optional[int]) -> int:
    if flag_value is not None:
        return flag_value
    env = os.environ.get(SEED_ENV_VAR)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ValueError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from None


def _new_manifest(command: str, parameters: dict, seed: Optional[int]) -> RunManifest:
    return RunManifest(
        command=command,
        parameters=parameters,
        seed=seed,
        version=__version__,
        started_at=utc_now(),
    )


def _parse_grid_spec(spec: str) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Grid flag: the "paper" 90-cell preset or "ws=A..B,ms=C..D" ranges."""
    if spec == "paper":
        return FULL_GRID_WS_VALUES, FULL_GRID_MS_VALUES
    values: dict[str, tuple[int, ...]] = {}
    for part in spec.split(","):
        if "=" not in part:
            raise ValueError(f"bad grid component {part!r}")
        key, _, raw = part.partition("=")
        key = key.strip()
        if key not in ("ws", "ms"):
            raise ValueError(f"grid keys are 'ws' and 'ms', got {key!r}")
        if ".." in raw:
            lo, _, hi = raw.partition("..")
            values[key] = tuple(range(int(lo), int(hi) + 1))
        else:
            values[key] = (int(raw),)
        if not values[key]:
            raise ValueError(f"empty range in {part!r}")
    if "ws" not in values or "ms" not in values:
        raise ValueError("grid spec needs both ws and ms")
    return values["ws"], values["ms"]


def _parse_measures(raw: str) -> list[str]:
    if raw == "all":
        return list(MEASURES)
    requested = [m.strip() for m in raw.split(",") if m.strip()]
    unknown = [m for m in requested if m not in MEASURES]
    if unknown:
        raise ValueError(f"unknown measure(s): {', '.join(unknown)}")
    return requested


def _single_measure(graph: WeightedDigraph, measure: str, params: PageRankParams):
    if measure == "ldc":
        return ldc_vector(graph)
    if measure == "in_degree":
        return degree(graph, "in")
    if measure == "out_degree":
        return degree(graph, "out")
    if measure == "closeness":
        return closeness(graph)
    if measure == "triangles":
        return triangles(graph)
    if measure == "pagerank":
        return pagerank(graph, params)
    if measure == "betweenness":
        return betweenness(graph)
    raise ValueError(f"unknown measure {measure!r}")


# -- commands ----------------------------------------------------------------


def _cmd_build(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args.seed)
    try:
        records = load_corpus(args.corpus, args.input_format)
    except _INPUT_ERRORS as exc:
        return _fail(EXIT_INPUT, f"cannot read corpus: {exc}")
    try:
        graph = build_graph(records, DistanceFunctionParams(args.ws, args.ms))
    except NoRecords:
        return _fail(EXIT_EMPTY, "empty graph: corpus has no records")
    if graph.vertex_count == 0:
        return _fail(EXIT_EMPTY, f"empty graph at ws={args.ws} ms={args.ms}")
    manifest = _new_manifest(
        "build",
        {"ws": args.ws, "ms": args.ms, "input_format": args.input_format},
        seed,
    )
    manifest.add_input(args.corpus)
    graph.to_csv(args.out)
    manifest.add_output(args.out)
    manifest.write(f"{args.out}.manifest.json")
    print(f"wrote {args.out}: {graph.vertex_count} vertices, {graph.arc_count} arcs")
    return EXIT_OK


def _cmd_centrality(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args.seed)
    try:
        measures = _parse_measures(args.measure)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    try:
        graph = WeightedDigraph.from_csv(args.graph)
    except _INPUT_ERRORS as exc:
        return _fail(EXIT_INPUT, f"cannot read graph: {exc}")
    params = PageRankParams(alpha=args.alpha)
    try:
        if set(measures) == set(MEASURES):
            table = compute_all(graph, params, jobs=args.jobs)
        else:
            table = {m: _single_measure(graph, m, params) for m in measures}
    except EmptyGraph as exc:
        return _fail(EXIT_EMPTY, str(exc))
    table = {m: table[m] for m in measures}
    manifest = _new_manifest(
        "centrality",
        {"measures": measures, "alpha": args.alpha, "layout": args.layout,
         "format": args.format},
        seed,
    )
    manifest.add_input(args.graph)
    if args.format == "json":
        payload = {
            word: {m: table[m].scores[word] for m in measures}
            for word in sorted(graph.vertices)
        }
        _write_json(payload, args.out)
    else:
        write_centrality_csv(table, args.out, layout=args.layout)
    manifest.add_output(args.out)
    manifest.write(f"{args.out}.manifest.json")
    if args.verbose and "pagerank" in measures:
        _, raw, iterations = pagerank_with_raw(graph, params)
        print(f"pagerank converged in {iterations} iterations; raw update per vertex:")
        for word in sorted(raw):
            print(f"  {word}\t{raw[word]:.12g}")
    return EXIT_OK


def _cell_is_complete(cell_dir: str) -> Optional[dict]:
    """Return the cached cell metadata when its files verify, else None."""
    meta_path = os.path.join(cell_dir, "cell.json")
    if not os.path.isfile(meta_path):
        return None
    try:
        meta = load_manifest(meta_path)
    except (OSError, json.JSONDecodeError):
        return None
    if "row" not in meta or "files" not in meta:
        return None
    for name, digest in meta["files"].items():
        path = os.path.join(cell_dir, name)
        if not os.path.isfile(path) or file_digest(path) != digest:
            return None
    return meta


def _write_cell(cell, out_dir: str) -> dict:
    """Write one cell's files and its cell.json; returns the metadata dict."""
    cell_dir = os.path.join(out_dir, cell_dir_name(cell.ws, cell.ms))
    os.makedirs(cell_dir, exist_ok=True)
    for name in ("graph.csv", "centrality.csv", "spearman.csv", "distance.csv"):
        stale = os.path.join(cell_dir, name)
        if os.path.isfile(stale):
            os.remove(stale)
    files: dict[str, str] = {}
    notes: list[str] = []
    if cell.status == "ok":
        cell.graph.to_csv(os.path.join(cell_dir, "graph.csv"))
        write_centrality_csv(cell.measures, os.path.join(cell_dir, "centrality.csv"))
        write_spearman_csv(cell, os.path.join(cell_dir, "spearman.csv"))
        try:
            write_distance_csv(cell, os.path.join(cell_dir, "distance.csv"))
        except InsufficientData as exc:
            notes.append(f"distance matrix skipped: {exc}")
        for name in ("graph.csv", "centrality.csv", "spearman.csv", "distance.csv"):
            path = os.path.join(cell_dir, name)
            if os.path.isfile(path):
                files[name] = file_digest(path)
    meta = {
        "ws": cell.ws,
        "ms": cell.ms,
        "status": cell.status,
        "row": summary_row(cell),
        "files": files,
        "notes": notes,
    }
    with open(os.path.join(cell_dir, "cell.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return meta


def _cmd_sweep(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args.seed)
    try:
        ws_values, ms_values = _parse_grid_spec(args.grid)
    except ValueError as exc:
        raise _UsageError(f"bad --grid value: {exc}") from None
    try:
        records = load_corpus(args.corpus, args.input_format)
    except _INPUT_ERRORS as exc:
        return _fail(EXIT_INPUT, f"cannot read corpus: {exc}")
    if not records:
        return _fail(EXIT_EMPTY, "corpus has no records")

    os.makedirs(args.out, exist_ok=True)
    grid = [(ws, ms) for ws in ws_values for ms in ms_values]
    cached: dict[tuple[int, int], dict] = {}
    pending: list[tuple[int, int]] = []
    for ws, ms in grid:
        cell_dir = os.path.join(args.out, cell_dir_name(ws, ms))
        meta = _cell_is_complete(cell_dir) if args.resume else None
        if meta is not None:
            cached[(ws, ms)] = meta
        else:
            pending.append((ws, ms))

    params = PageRankParams(alpha=args.alpha)
    computed: dict[tuple[int, int], dict] = {}
    if pending:
        for cell in evaluate_cells(records, pending, params, jobs=args.jobs):
            computed[(cell.ws, cell.ms)] = _write_cell(cell, args.out)

    rows = []
    statuses = []
    for key in grid:
        meta = cached.get(key) or computed[key]
        rows.append(meta["row"])
        statuses.append(meta["status"])
    summary_path = os.path.join(args.out, "grid_summary.csv")
    _write_summary_rows(rows, summary_path)

    manifest = _new_manifest(
        "sweep",
        {
            "grid": args.grid,
            "ws_values": list(ws_values),
            "ms_values": list(ms_values),
            "alpha": args.alpha,
            "jobs": args.jobs,
            "resume": bool(args.resume),
            "sd_convention": SD_CONVENTION,
        },
        seed,
    )
    manifest.add_input(args.corpus)
    # digest only files this run owns, so stray content in a reused output
    # directory cannot change the manifest
    for ws, ms in grid:
        cell_dir = os.path.join(args.out, cell_dir_name(ws, ms))
        for name in sorted(os.listdir(cell_dir)):
            manifest.add_output(os.path.join(cell_dir, name), root=args.out)
    manifest.add_output(summary_path, root=args.out)
    manifest.outputs = dict(sorted(manifest.outputs.items()))
    manifest.write(os.path.join(args.out, "manifest.json"))

    n_failed = sum(1 for s in statuses if s == "error")
    print(f"sweep: {len(grid)} cells, {n_failed} failed, output in {args.out}")
    if n_failed == len(grid):
        return _fail(EXIT_EMPTY, "all cells failed")
    return EXIT_OK


def _write_summary_rows(rows: list[dict], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=summary_columns(), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def _cmd_stats(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args.seed)
    if (args.ws is None) != (args.ms is None):
        raise _UsageError("--ws and --ms must be given together")
    try:
        records = load_corpus(args.corpus, args.input_format)
    except _INPUT_ERRORS as exc:
        return _fail(EXIT_INPUT, f"cannot read corpus: {exc}")
    try:
        stats = covariates(records)
    except NoRecords:
        return _fail(EXIT_EMPTY, "corpus has no records")

    ldc_scores = None
    if args.ws is not None:
        graph = build_graph(records, DistanceFunctionParams(args.ws, args.ms))
        if graph.vertex_count == 0:
            return _fail(EXIT_EMPTY, f"empty graph at ws={args.ws} ms={args.ms}")
        ldc_scores = dict(ldc_vector(graph, jobs=args.jobs).scores)

    manifest = _new_manifest(
        "stats",
        {"ws": args.ws, "ms": args.ms, "format": args.format,
         "input_format": args.input_format},
        seed,
    )
    manifest.add_input(args.corpus)
    if args.format == "json":
        payload = {}
        for word in sorted(stats):
            s = stats[word]
            entry = {
                "frequency": s.frequency,
                "log_frequency": s.log_frequency,
                "avg_location": s.avg_location,
                "dt_to": s.dt_to,
                "dt_from": s.dt_from,
                "n_to": s.n_to,
                "n_from": s.n_from,
            }
            if ldc_scores is not None:
                entry["ldc"] = ldc_scores.get(word)
            payload[word] = entry
        _write_json(payload, args.out)
    else:
        write_stats_csv(stats, args.out, ldc_scores)
    manifest.add_output(args.out)
    manifest.write(f"{args.out}.manifest.json")
    print(f"wrote {args.out}: {len(stats)} words")
    return EXIT_OK


def _cmd_permtest(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args.seed)
    try:
        records = load_corpus(args.corpus, args.input_format)
    except _INPUT_ERRORS as exc:
        return _fail(EXIT_INPUT, f"cannot read corpus: {exc}")
    if not records:
        return _fail(EXIT_EMPTY, "corpus has no records")
    config = PermutationConfig(
        ws=args.ws,
        ms=args.ms,
        target=args.target,
        repetitions=args.n,
        seed=seed,
        alpha=args.alpha,
        alternative=args.alternative,
    )
    try:
        outcome = permutation_test(records, config, jobs=args.jobs)
    except UndefinedActualCorrelation as exc:
        return _fail(EXIT_UNDEFINED, str(exc))
    manifest = _new_manifest(
        "permtest",
        {"ws": args.ws, "ms": args.ms, "target": args.target, "n": args.n,
         "alpha": args.alpha, "alternative": args.alternative},
        seed,
    )
    manifest.add_input(args.corpus)
    _write_json(outcome.to_dict(), args.out)
    manifest.add_output(args.out)
    manifest.write(f"{args.out}.manifest.json")
    print(
        f"actual rho = {outcome.actual_rho:.6g}, permutation p = {outcome.p_value:.6g} "
        f"({outcome.n_effective}/{outcome.repetitions} repetitions)"
    )
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(prog="ldcnet", description=__doc__)
    parser.add_argument("--version", action="version", version=f"ldcnet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help=f"master seed (falls back to ${SEED_ENV_VAR}, then 0)")
    common.add_argument("--jobs", type=int, default=1, help="worker process count")
    common.add_argument("--input-format", choices=("csv", "osf-json"), default="csv",
                        help="corpus file layout")

    p = sub.add_parser("build", parents=[common],
                       help="build a semantic graph from a transcript corpus")
    p.add_argument("corpus")
    p.add_argument("--ws", type=int, required=True, help="window size (max positional gap)")
    p.add_argument("--ms", type=int, required=True, help="strict minimum subject count")
    p.add_argument("-o", "--out", required=True, help="output graph CSV path")
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("centrality", parents=[common],
                       help="compute centrality measures for a graph CSV")
    p.add_argument("graph")
    p.add_argument("--measure", default="all",
                   help="'all' or comma-separated measure names")
    p.add_argument("--alpha", type=float, default=0.85, help="pagerank damping")
    p.add_argument("--layout", choices=("wide", "long"), default="wide")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--verbose", action="store_true",
                   help="also print the raw pagerank update")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=_cmd_centrality)

    p = sub.add_parser("sweep", parents=[common],
                       help="evaluate a ws x ms grid and export per-cell results")
    p.add_argument("corpus")
    p.add_argument("--grid", default="paper",
                   help="'paper' (ws 1..9 x ms 3,5,...,21) or e.g. 'ws=1..2,ms=3'")
    p.add_argument("--alpha", type=float, default=0.85, help="pagerank damping")
    p.add_argument("--resume", action="store_true",
                   help="skip cells whose outputs verify against their digests")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("stats", parents=[common],
                       help="export per-word retrieval statistics and covariates")
    p.add_argument("corpus")
    p.add_argument("--ws", type=int, default=None,
                   help="with --ms: also join the detour score at this cell")
    p.add_argument("--ms", type=int, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("permtest", parents=[common],
                       help="permutation significance test for the detour score")
    p.add_argument("corpus")
    p.add_argument("--ws", type=int, required=True)
    p.add_argument("--ms", type=int, required=True)
    p.add_argument("--target", choices=("dt_to", "dt_from"), default="dt_from")
    p.add_argument("--n", type=int, default=5000, help="number of repetitions")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--alternative", choices=("two-sided", "greater", "less"),
                   default="two-sided")
    p.add_argument("-o", "--out", required=True, help="output JSON report path")
    p.set_defaults(func=_cmd_permtest)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"ldcnet {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"ldcnet {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _INPUT_ERRORS as exc:
        return _fail(EXIT_INPUT, str(exc))
    except LdcnetError as exc:
        return _fail(EXIT_INPUT, str(exc))


def entrypoint() -> None:
    sys.exit(main())
