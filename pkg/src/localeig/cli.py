"""Command-line front end.

Every command prints a JSON report on stdout and, with ``--output-dir``,
also writes it together with CSV tables (vectors, gaps, per-node
differences). Floats are written with 12 significant digits and node ids in
lexicographic order, so repeated runs produce byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .compare import (DEFAULT_DAMPING, DEFAULT_GRID, community_eigenvector_centrality,
                      difference_report, distance, fit_power, pagerank, rescale)
from .exceptions import DegenerateSpectrum, InputError, NumericalError
from .graph import Graph, SquareMatrix, build_adjacency, planted_partition, to_mode
from .ingest import (CONTACT_WEIGHTINGS, ROAD_WEIGHTINGS, SPEED_TO_MS, STAFF_LABELS,
                     load_contacts, load_edge_list, load_road_network, write_communities,
                     write_edge_list)
from .spectral import analyze, decompose, eigengaps, select_k

EXIT_OK = 0
EXIT_INPUT = 3
EXIT_NUMERICAL = 4
EXIT_DEGENERATE = 5

MAX_REPORTED_EIGENVALUES = 100


def _fmt(obj):
    """Round every float to 12 significant digits, recursively."""
    if isinstance(obj, (float, np.floating)):
        return float(f"{float(obj):.12g}")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): _fmt(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_fmt(v) for v in obj]
    return obj


def _dumps(report) -> str:
    return json.dumps(_fmt(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _write_csv(path: Path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.12g}" if isinstance(v, (float, np.floating)) else v for v in row])


def _parse_k(text: str):
    if text == "auto":
        return "auto"
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("k must be 'auto' or a positive integer") from None
    if k < 1:
        raise argparse.ArgumentTypeError("k must be positive")
    return k


def _parse_planted(text: str):
    try:
        c, m, p_in, p_out = text.split(",")
        return int(c), int(m), float(p_in), float(p_out)
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'c,m,p_in,p_out'") from None


def load_graph(args) -> Graph:
    fmt = args.format
    if fmt == "planted":
        if args.planted is None:
            raise InputError("--format planted needs --planted c,m,p_in,p_out")
        return planted_partition(*args.planted, seed=args.seed)
    if args.input is None:
        raise InputError("--input is required")
    if fmt == "edgelist":
        return load_edge_list(args.input, directed=args.directed, delimiter=args.delimiter)
    if fmt == "contacts":
        weighting = args.weighting or "count"
        if weighting not in CONTACT_WEIGHTINGS:
            raise InputError(f"contact weighting must be one of {CONTACT_WEIGHTINGS}")
        return load_contacts(args.input, args.metadata, weighting=weighting)
    if args.nodes is None:
        raise InputError("--format road needs --nodes")
    weighting = args.weighting or "inverse-one-plus-time"
    return load_road_network(args.nodes, args.input, speed_unit=args.speed_unit, weighting=weighting)


def _matrix(args, g: Graph) -> SquareMatrix:
    return to_mode(build_adjacency(g), args.matrix)


def _base_report(args, g: Graph = None) -> dict:
    config = {k: v for k, v in vars(args).items() if k != "func"}
    report = {"tool": "localeig", "version": __version__, "command": args.command, "config": config}
    if g is not None:
        report["input"] = {
            "file": args.input, "format": args.format, "matrix": args.matrix,
            "weighting": args.weighting, "directed": g.directed,
            "n_nodes": g.n, "n_edges": len(g.edges),
            "n_communities": len(set(g.communities.values())) if g.communities else 0,
        }
    return report


def _spectrum_block(s, gaps, top: int) -> dict:
    shown = s.eigenvalues[:MAX_REPORTED_EIGENVALUES]
    block = {
        "eigenvalues": [[z.real, z.imag] for z in shown],
        "n_eigenvalues": s.size,
        "complete": s.complete,
        "defective": s.defective,
        "max_residual": float(s.residuals.max()) if s.size else 0.0,
    }
    if gaps is not None:
        block.update({
            "gaps": gaps.gaps.tolist(),
            "admissible": gaps.admissible.tolist(),
            "prominent": [list(p) for p in gaps.prominent[:top]],
            "search_bound": gaps.search_bound,
        })
    return block


def _emit(args, report: dict, tables=()):
    text = _dumps(report)
    sys.stdout.write(text)
    if args.output_dir:
        out = Path(args.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{args.command}.json").write_text(text, encoding="utf-8")
        for name, header, rows in tables:
            _write_csv(out / name, header, rows)


def cmd_eigengaps(args) -> int:
    g = load_graph(args)
    m = _matrix(args, g)
    s = decompose(m, n_components=args.n_eigs)
    gaps = eigengaps(s)
    report = _base_report(args, g)
    report["spectrum"] = _spectrum_block(s, gaps, args.top)
    code = EXIT_OK
    try:
        report["auto_k"] = select_k(gaps)
    except DegenerateSpectrum as exc:
        report["auto_k"] = None
        report["warnings"] = [f"degenerate_spectrum: {exc}"]
        code = EXIT_DEGENERATE
    rows = [(i + 1, float(gap)) for i, gap in enumerate(gaps.gaps)]
    _emit(args, report, [("eigengaps.csv", ["index", "gap"], rows)])
    return code


def _centrality_tables(g: Graph, values: np.ndarray, name: str):
    tables = [(f"{name}.csv", ["node_id", "value"], list(zip(g.node_ids, values.tolist())))]
    if g.coords:
        rows = [(g.coords[v][0], g.coords[v][1], float(c))
                for v, c in zip(g.node_ids, values) if v in g.coords]
        tables.append((f"{name}_xy.csv", ["x", "y", "value"], rows))
    return tables


def cmd_centrality(args) -> int:
    g = load_graph(args)
    m = _matrix(args, g)
    report = _base_report(args, g)
    code = EXIT_OK
    try:
        result = analyze(m, args.k, n_components=args.n_eigs)
        c = result.centrality
        report["spectrum"] = _spectrum_block(result.spectrum, result.eigengaps, args.top)
        report["selection_mode"] = "auto" if args.k == "auto" else "user"
    except DegenerateSpectrum as exc:
        c = exc.centrality
        report["degenerate"] = str(exc)
        code = EXIT_DEGENERATE
    values = np.asarray(c.values)
    normalization = c.normalization
    if args.rescale_p is not None and code == EXIT_OK:
        values = rescale(values, args.rescale_p)
        normalization = f"hadamard_power({args.rescale_p:g})"
    report.update({"k_used": c.k_used, "warnings": list(c.warnings), "method": c.method,
                   "matrix_mode": c.matrix_mode, "normalization": normalization,
                   "centrality": dict(zip(g.node_ids, values.tolist()))})
    _emit(args, report, _centrality_tables(g, values, "centrality"))
    return code


def _read_vector(path) -> dict:
    values = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for line, row in enumerate(csv.reader(fh), start=1):
            if not row or (line == 1 and row[0].strip().lower() in ("node_id", "node", "id")):
                continue
            if len(row) < 2:
                raise InputError(f"{path}: expected 'node_id,value'", line=line)
            try:
                values[row[0].strip()] = float(row[1])
            except ValueError:
                raise InputError(f"{path}: bad value {row[1]!r}", line=line) from None
    return values


def _aligned(a: dict, b: dict):
    if set(a) != set(b):
        diff = sorted(set(a) ^ set(b))
        raise InputError(f"node sets differ; offending ids: {diff[:20]}")
    ids = tuple(sorted(a))
    return ids, np.array([a[i] for i in ids]), np.array([b[i] for i in ids])


def cmd_compare(args) -> int:
    report = _base_report(args)
    vectors = {}
    if args.x_csv:
        if not args.y_csv:
            raise InputError("--x-csv needs --y-csv")
        ids, x, y = _aligned(_read_vector(args.x_csv), _read_vector(args.y_csv))
        vectors = {"x": x, "y": y}
        reference = "x"
    else:
        g = load_graph(args)
        report = _base_report(args, g)
        adj = build_adjacency(g)
        ids = g.node_ids
        methods = [s.strip() for s in args.methods.split(",") if s.strip()]
        unknown = set(methods) - {"local", "community", "pagerank"}
        if unknown:
            raise InputError(f"unknown methods {sorted(unknown)}")
        if "local" not in methods:
            methods.insert(0, "local")
        result = analyze(to_mode(adj, args.matrix), args.k, n_components=args.n_eigs)
        report["k_used"] = result.centrality.k_used
        report["warnings"] = list(result.centrality.warnings)
        vectors["local"] = np.asarray(result.centrality.values)
        if "community" in methods:
            exclude = args.exclude_label if args.exclude_label is not None else (
                list(STAFF_LABELS) if args.format == "contacts" else [])
            vectors["community"] = np.asarray(community_eigenvector_centrality(g, exclude).values)
        if "pagerank" in methods:
            vectors["pagerank"] = np.asarray(pagerank(adj, args.damping).values)
        reference = "local"
    x = vectors[reference]
    if args.rescale_p is not None:
        x = rescale(x, args.rescale_p)
    comparisons, tables = {}, []
    for name, y in vectors.items():
        if name == reference:
            continue
        rep = difference_report(x, y, args.mad, node_ids=ids)
        comparisons[name] = {"distance": rep.distance, "quartiles": rep.quartiles,
                             "fraction_within_one_mad": rep.fraction_within_one_mad,
                             "normalization": rep.normalization,
                             "x_params": rep.x_params, "y_params": rep.y_params}
        tables.append((f"diff_{name}.csv", ["node_id", "x", "y", "diff_mad"], rep.per_node_diff))
    report["reference"] = reference
    report["comparisons"] = comparisons
    if args.fit_power:
        target = "pagerank" if "pagerank" in vectors else next(k for k in vectors if k != reference)
        grid = DEFAULT_GRID
        if args.power_step:
            steps = int(round(1.0 / args.power_step))
            grid = tuple(np.round(np.arange(1, steps + 1) * args.power_step, 10).tolist())
        p, d = fit_power(vectors[reference], vectors[target], grid, args.mad)
        report["fit_power"] = {"target": target, "p": p, "distance": d,
                               "distance_p1": distance(rescale(vectors[reference], 1.0),
                                                       vectors[target], args.mad)}
    tables.append(("vectors.csv", ["node_id", *vectors],
                   [(i, *(float(v[j]) for v in vectors.values())) for j, i in enumerate(ids)]))
    _emit(args, report, tables)
    return EXIT_OK


def cmd_ingest(args) -> int:
    g = load_graph(args)
    report = _base_report(args, g)
    _emit(args, report)
    if args.output_dir:
        out = Path(args.output_dir)
        with open(out / "edges.csv", "w", encoding="utf-8", newline="") as fh:
            write_edge_list(g, fh)
        if g.communities:
            with open(out / "communities.csv", "w", encoding="utf-8", newline="") as fh:
                write_communities(g, fh)
        if g.coords:
            _write_csv(out / "nodes.csv", ["id", "x", "y"],
                       [(v, *g.coords[v]) for v in g.node_ids if v in g.coords])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="edge list, contact log, or road edge table")
    common.add_argument("--format", choices=("edgelist", "contacts", "road", "planted"), default="edgelist")
    common.add_argument("--nodes", help="road node table (id,lat,lon)")
    common.add_argument("--metadata", help="contact metadata table (node_id,community)")
    common.add_argument("--directed", action="store_true", help="treat edge lists as directed")
    common.add_argument("--delimiter", default=",")
    common.add_argument("--weighting", choices=CONTACT_WEIGHTINGS + ROAD_WEIGHTINGS + ("inverse-onepluststime",))
    common.add_argument("--speed-unit", choices=tuple(SPEED_TO_MS), default="mph")
    common.add_argument("--matrix", choices=("adjacency", "laplacian", "normalized-laplacian"),
                        default="adjacency")
    common.add_argument("--output-dir")
    common.add_argument("--k", type=_parse_k, default="auto")
    common.add_argument("--n-eigs", type=int, help="compute only this many leading eigenpairs")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--planted", type=_parse_planted, help="c,m,p_in,p_out for --format planted")
    common.add_argument("--top", type=int, default=10, help="prominent gaps to report")

    parser = argparse.ArgumentParser(prog="localeig", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"localeig {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eigengaps", parents=[common], help="eigengap sequence and automatic k")
    p.set_defaults(func=cmd_eigengaps)

    p = sub.add_parser("centrality", parents=[common], help="local eigenvector centrality")
    p.add_argument("--rescale-p", type=float, help="apply Hadamard power rescaling with this p")
    p.set_defaults(func=cmd_centrality)

    p = sub.add_parser("compare", parents=[common], help="compare local centrality with references")
    p.add_argument("--methods", default="local,community,pagerank")
    p.add_argument("--x-csv", help="precomputed reference vector (node_id,value)")
    p.add_argument("--y-csv", help="precomputed vector to compare against --x-csv")
    p.add_argument("--damping", type=float, default=DEFAULT_DAMPING)
    p.add_argument("--mad", choices=("center-scale", "scale-only"), default="center-scale")
    p.add_argument("--fit-power", action="store_true")
    p.add_argument("--power-step", type=float, help="power grid step (default 0.05)")
    p.add_argument("--rescale-p", type=float)
    p.add_argument("--exclude-label", action="append",
                   help="community label left out of per-community centrality (repeatable)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("ingest", parents=[common], help="load a dataset and export normalised tables")
    p.set_defaults(func=cmd_ingest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    codes = ((InputError, EXIT_INPUT), (NumericalError, EXIT_NUMERICAL),
             (DegenerateSpectrum, EXIT_DEGENERATE), (OSError, EXIT_INPUT))
    try:
        return args.func(args)
    except tuple(cls for cls, _ in codes) as exc:
        code = next(c for cls, c in codes if isinstance(exc, cls))
        error = {"type": type(exc).__name__, "message": str(exc), "exit_code": code}
    sys.stderr.write(_dumps({"error": error}))
    return code


if __name__ == "__main__":
    sys.exit(main())
