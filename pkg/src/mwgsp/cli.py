"""Batch command-line front end.

Exit codes: 0 success, 2 usage error, 3 bad input data, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import itertools
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .bench import run_bench
from .errors import CapacityError, DataError, InvalidArgumentError, NumericalFailure
from .filters import FilterKind, apply_filter, chebyshev_filter, parse_filter_spec
from .graph import AUTO, knn_gaussian_graph, laplacian, path_graph, ring_graph
from .product import DEFAULT_CAP, ProductStructure, cartesian_product, imwgft, mwgft
from .recovery import (
    MaskedMatrix,
    RegularizationConfig,
    completion_objective,
    compression_errors,
    graph_reg_completion,
    relative_error_on,
    smooth_tensor,
    tikhonov_residual,
    tv_tikhonov,
)
from .spectral import eigendecompose

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _load_manifest_and_tensor(args):
    manifest = io.parse_manifest(args.manifest)
    tensor_path = args.tensor or (str(manifest.resolve(manifest.tensor)) if manifest.tensor else None)
    tensor = io.read_tensor_mwt(tensor_path) if tensor_path else None
    io.validate_manifest(manifest, None if tensor is None else tensor.ndim)
    structure = ProductStructure(manifest.load_graphs())
    if tensor is not None and tensor.shape != structure.dims:
        raise DataError(f"tensor shape {tensor.shape} does not match graph sizes {structure.dims}")
    return manifest, structure, tensor


# -- subcommands -----------------------------------------------------------------

def cmd_graph(args) -> int:
    if args.kind == "knn":
        if not args.inp:
            raise UsageError("graph knn needs --in")
        rows = io.read_matrix(args.inp)
        sigma = AUTO if args.sigma == AUTO else float(args.sigma)
        g = knn_gaussian_graph(rows, args.k, sigma)
    else:
        if args.n is None:
            raise UsageError(f"graph {args.kind} needs --n")
        g = path_graph(args.n) if args.kind == "path" else ring_graph(args.n)
    io.write_graph_mm(g, args.out)
    if args.eig_out:
        io.write_eigensystem(eigendecompose(laplacian(g)), args.eig_out)
    print(f"wrote graph with {g.n} vertices and {len(g.edges())} edges to {args.out}")
    return EXIT_OK


def cmd_product(args) -> int:
    manifest = io.parse_manifest(args.manifest)
    io.validate_manifest(manifest)
    g = cartesian_product(manifest.load_graphs(), cap=args.cap)
    io.write_graph_mm(g, args.out)
    print(f"wrote product graph with {g.n} vertices to {args.out}")
    return EXIT_OK


def cmd_gft(args) -> int:
    manifest, structure, tensor = _load_manifest_and_tensor(args)
    if tensor is None:
        raise UsageError("gft needs --tensor or a tensor entry in the manifest")
    inverse = args.inverse or manifest.params.get("inverse", "false").lower() == "true"
    spectrum = structure.spectrum()
    out = imwgft(tensor, spectrum) if inverse else mwgft(tensor, spectrum)
    io.write_tensor_mwt(out, args.out)
    return EXIT_OK


def cmd_filter(args) -> int:
    manifest, structure, tensor = _load_manifest_and_tensor(args)
    if tensor is None:
        raise UsageError("filter needs --tensor or a tensor entry in the manifest")
    if args.filter:
        text = " ".join(ln.split("#", 1)[0] for ln in Path(args.filter).read_text().splitlines())
    elif "spec" in manifest.params:
        text = manifest.params["spec"]
    else:
        raise UsageError("filter needs --filter or a [filter] spec entry in the manifest")
    try:
        spec = parse_filter_spec(text)
    except InvalidArgumentError as exc:
        raise DataError(f"filter spec: {exc}") from None
    order = args.chebyshev
    if order is None and "chebyshev" in manifest.params:
        order = int(manifest.params["chebyshev"])
    if order is not None:
        if spec.kind is not FilterKind.JOINT:
            raise UsageError("--chebyshev approximates joint filters only")
        out = chebyshev_filter(structure.laplacians(sparse=True), spec.response, order, tensor)
    else:
        out = apply_filter(spec, structure.spectrum(), tensor)
    io.write_tensor_mwt(out, args.out)
    return EXIT_OK


def parse_transform(name: str, eigs) -> list:
    """``mwgft``, or ``+``-joined ``gftK`` / ``dftK`` tokens with 1-based modes."""
    if name == "mwgft":
        return list(eigs)
    entries = [None] * len(eigs)
    for token in name.split("+"):
        kind, mode = token[:3], token[3:]
        if kind not in ("gft", "dft") or not mode.isdigit() or not 1 <= int(mode) <= len(eigs):
            raise UsageError(f"bad transform {name!r}; use mwgft, gftK, dftK or joins like gft1+dft3")
        entries[int(mode) - 1] = eigs[int(mode) - 1] if kind == "gft" else "dft"
    return entries


def cmd_compress(args) -> int:
    manifest = io.parse_manifest(args.manifest)
    tensor_path = args.tensor or (str(manifest.resolve(manifest.tensor)) if manifest.tensor else None)
    io.validate_manifest(manifest)
    structure = ProductStructure(manifest.load_graphs()).with_eigs()
    if tensor_path:
        tensor = io.read_tensor_mwt(tensor_path)
        if tensor.shape != structure.dims:
            raise DataError(f"tensor shape {tensor.shape} does not match graph sizes {structure.dims}")
    else:
        rng = np.random.default_rng(args.seed)
        tensor = smooth_tensor(structure.factor_eigs, args.tau, rng)
    percentiles = _floats(args.percentiles or manifest.params.get("percentiles", "0,10,20,30,40,50,60,70,80,90"))
    names = (args.transforms or manifest.params.get("transforms", "mwgft")).split(",")
    columns = [compression_errors(tensor, parse_transform(n, structure.factor_eigs), percentiles) for n in names]
    rows = [[p, *(float(col[i]) for col in columns)] for i, p in enumerate(percentiles)]
    _write_csv(args.out, ["percentile", *names], rows)
    return EXIT_OK


def _completion_inputs(args):
    """Data, graph sources and solver settings from flags, falling back to a manifest."""
    manifest = io.parse_manifest(args.manifest) if args.manifest else None
    params = manifest.params if manifest else {}
    if manifest and len(manifest.graphs) != 2:
        raise DataError(f"a completion manifest needs 2 graphs (rows, columns), got {len(manifest.graphs)}")
    if args.values:
        data = io.read_masked_csv(args.values)
    elif args.values_mwt and args.mask_mwt:
        data = io.read_masked_mwt(args.values_mwt, args.mask_mwt)
    elif manifest and manifest.tensor:
        data = io.read_masked_csv(manifest.resolve(manifest.tensor))
    else:
        raise UsageError("complete needs --values CSV, --values-mwt with --mask-mwt, or a manifest tensor")
    sources = []
    for flag, k in ((args.rowgraph, 0), (args.colgraph, 1)):
        if flag:
            sources.append(io.load_graph_source(flag))
        elif manifest:
            sources.append(io.load_graph_source(manifest.graphs[k], manifest.base_dir))
        else:
            raise UsageError("complete needs --rowgraph and --colgraph (or a manifest)")
    lap_r, lap_c = (laplacian(g, sparse=True) for g in sources)
    gammar = args.gammar or params.get("gamma_r", "0.1")
    gammac = args.gammac or params.get("gamma_c", "0.1")
    try:
        tol = args.tol if args.tol is not None else float(params.get("tol", 1e-8))
        max_iter = int(params["max_iter"]) if "max_iter" in params else None
    except ValueError as exc:
        raise DataError(f"bad [complete] setting: {exc}") from None
    return data, lap_r, lap_c, gammar, gammac, tol, max_iter


def cmd_complete(args) -> int:
    data, lap_r, lap_c, gammar, gammac, tol, max_iter = _completion_inputs(args)
    truth = io.read_matrix(args.truth) if args.truth else None
    scored = None
    if args.hide:
        rng = np.random.default_rng(args.seed)
        observed = np.flatnonzero(data.mask)
        hidden = rng.choice(observed, int(round(args.hide * observed.size)), replace=False)
        mask = data.mask.copy()
        mask.flat[hidden] = False
        if truth is None:
            truth = np.where(data.mask, data.values, 0.0)
        scored = np.zeros_like(mask)
        scored.flat[hidden] = True
        data = MaskedMatrix(data.values, mask)
    if truth is not None and truth.shape != data.shape:
        raise DataError(f"truth shape {truth.shape} does not match data {data.shape}")
    if truth is not None and scored is None:
        scored = ~data.mask

    grid = list(itertools.product(_floats(gammar), _floats(gammac)))
    if args.out and len(grid) > 1:
        raise UsageError("--out needs a single (gammar, gammac) pair; use --report for grids")

    rows = []
    x = None
    for gr, gc in grid:
        cfg = RegularizationConfig(gr, gc, tol=tol, max_iter=max_iter)
        x = graph_reg_completion(data, lap_r, lap_c, cfg)
        err = relative_error_on(x, truth, scored) if truth is not None and scored.any() else float("nan")
        rows.append([gr, gc, completion_objective(x, data, lap_r, lap_c, cfg), err])
        print(f"gamma_r={gr:g} gamma_c={gc:g} relative_error={err:.6g}")
    if args.out:
        io.write_tensor_mwt(x, args.out)
    if args.report:
        _write_csv(args.report, ["gamma_r", "gamma_c", "objective", "relative_error_missing"], rows)
    return EXIT_OK


def cmd_tvreg(args) -> int:
    y = io.read_matrix(args.values)
    if y.ndim != 2:
        raise DataError("tvreg needs a vertex-by-time matrix")
    lap_g = laplacian(io.load_graph_source(args.graph))
    time_graph = ring_graph(y.shape[1]) if args.time == "ring" else path_graph(y.shape[1])
    lap_t = laplacian(time_graph)
    cfg = RegularizationConfig(args.gammar, args.gammac)
    x = tv_tikhonov(y, lap_g, lap_t, cfg)
    res = tikhonov_residual(x, y, lap_g, lap_t, cfg) / max(np.linalg.norm(y), np.finfo(float).tiny)
    print(f"stationarity residual (relative) {res:.3e}")
    io.write_tensor_mwt(x, args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    dims = _ints(args.dims)
    result = run_bench(dims, trials=args.trials, seed=args.seed)
    print(f"dims={','.join(map(str, dims))} trials={args.trials}")
    print(f"factor-wise: {result.factorwise_s * 1e3:.3f} ms (median)")
    print(f"dense kron build + matvec: {result.dense_total_s * 1e3:.3f} ms "
          f"(matvec alone {result.dense_matvec_s * 1e3:.3f} ms)")
    print(f"max |difference|: {result.max_abs_diff:.3e}")
    print(f"speedup: {result.speedup:.1f}x")
    if args.out:
        _write_csv(args.out, ["factorwise_s", "dense_build_s", "dense_matvec_s", "speedup"],
                   [[result.factorwise_s, result.dense_build_s, result.dense_matvec_s, result.speedup]])
    return EXIT_OK


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mwgsp", description="Multi-way graph signal processing tools.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for every random choice")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("graph", parents=[common], help="build a factor graph")
    p.add_argument("kind", choices=["knn", "path", "ring"])
    p.add_argument("--in", dest="inp", help="data rows (CSV or .mwt) for knn")
    p.add_argument("--k", type=int, default=7)
    p.add_argument("--sigma", default=AUTO, help="kernel bandwidth or 'auto'")
    p.add_argument("--n", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--eig-out", help="also export the Laplacian eigensystem")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("product", parents=[common], help="materialize a Cartesian product graph")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP)
    p.set_defaults(func=cmd_product)

    p = sub.add_parser("gft", parents=[common], help="multi-way graph Fourier transform")
    p.add_argument("--manifest", required=True)
    p.add_argument("--tensor")
    p.add_argument("--out", required=True)
    p.add_argument("--inverse", action="store_true")
    p.set_defaults(func=cmd_gft)

    p = sub.add_parser("filter", parents=[common], help="multi-way spectral filtering")
    p.add_argument("--manifest", required=True)
    p.add_argument("--filter", help="file holding a filter spec line")
    p.add_argument("--tensor")
    p.add_argument("--chebyshev", type=int, help="Chebyshev order K (joint filters)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("compress", parents=[common], help="compression error table")
    p.add_argument("--manifest", required=True)
    p.add_argument("--tensor", help="defaults to a seeded heat-smoothed tensor on the manifest graphs")
    p.add_argument("--tau", type=float, default=1.0, help="heat time for the synthetic tensor")
    p.add_argument("--percentiles")
    p.add_argument("--transforms")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("complete", parents=[common], help="dual-graph regularized matrix completion")
    p.add_argument("--values", help="CSV with NA for missing entries")
    p.add_argument("--values-mwt")
    p.add_argument("--mask-mwt")
    p.add_argument("--manifest", help="two graphs (rows, columns), a CSV tensor entry and a [complete] block")
    p.add_argument("--rowgraph", help="graph source for rows")
    p.add_argument("--colgraph", help="graph source for columns")
    p.add_argument("--gammar", help="value or comma-separated grid (default 0.1)")
    p.add_argument("--gammac", help="value or comma-separated grid (default 0.1)")
    p.add_argument("--truth", help="complete ground-truth matrix for error reporting")
    p.add_argument("--hide", type=float, help="hide this fraction of observed entries and score on them")
    p.add_argument("--tol", type=float, help="CG relative residual target (default 1e-8)")
    p.add_argument("--out")
    p.add_argument("--report")
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("tvreg", parents=[common], help="closed-form time-vertex Tikhonov denoising")
    p.add_argument("--values", required=True, help="vertex-by-time matrix (CSV or .mwt)")
    p.add_argument("--graph", required=True, help="graph source for the vertex mode")
    p.add_argument("--time", choices=["ring", "path"], default="ring")
    p.add_argument("--gammar", type=float, default=1.0)
    p.add_argument("--gammac", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tvreg)

    p = sub.add_parser("bench", parents=[common], help="factor-wise vs dense Kronecker timing")
    p.add_argument("--dims", default="16,16,16")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return parser


def _thread_cap():
    try:
        n = int(os.environ.get("MWGSP_THREADS", "1"))
    except ValueError:
        n = 1
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=max(n, 1))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        with _thread_cap():
            return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        extra = f" (residual {exc.residual:.3e})" if exc.residual is not None else ""
        print(f"numerical failure: {exc}{extra}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, InvalidArgumentError, CapacityError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
