"""Plain-text file formats: Matrix Market graphs, MWT tensors, eigensystems,
masked CSV matrices and run manifests.

All writers use 17 significant digits so that a write/read round trip
reproduces every float64 bit for bit.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DataError, InvalidArgumentError
from .graph import AUTO, Graph, knn_gaussian_graph, path_graph, ring_graph
from .recovery import MaskedMatrix
from .spectral import EigenSystem

MWT_MAGIC = "MWT1"
MM_BANNER = "%%MatrixMarket"
MISSING_TOKENS = {"NA", "na", "NaN", "nan", ""}


def _g(x: float) -> str:
    return format(float(x), ".17g")


# -- Matrix Market graphs ------------------------------------------------------

def write_graph_mm(g: Graph, path) -> None:
    """Write the lower triangle, 1-based, as ``coordinate real symmetric``."""
    lower = sp.tril(g.weights, k=-1).tocoo()
    order = np.lexsort((lower.row, lower.col))
    with open(path, "w") as fh:
        fh.write(f"{MM_BANNER} matrix coordinate real symmetric\n")
        fh.write(f"{g.n} {g.n} {lower.nnz}\n")
        for k in order:
            fh.write(f"{lower.row[k] + 1} {lower.col[k] + 1} {_g(lower.data[k])}\n")


def read_graph_mm(path, symmetry_tol: float = 1e-12) -> Graph:
    """Read a graph from a Matrix Market coordinate file.

    ``symmetric`` files may store either triangle. ``general`` files must be
    numerically symmetric within ``symmetry_tol`` (relative to the largest
    weight) and are then symmetrized exactly.
    """
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith(MM_BANNER):
        raise DataError("missing %%MatrixMarket header", line=1)
    header = lines[0].split()
    if len(header) != 5 or header[1].lower() != "matrix" or header[2].lower() != "coordinate":
        raise DataError(f"unsupported Matrix Market header {lines[0]!r}", line=1)
    field_, symmetry = header[3].lower(), header[4].lower()
    if field_ not in ("real", "integer", "pattern"):
        raise DataError(f"unsupported field type {field_!r}", line=1)
    if symmetry not in ("symmetric", "general"):
        raise DataError(f"unsupported symmetry {symmetry!r}", line=1)

    body = [(no, ln) for no, ln in enumerate(lines[1:], start=2) if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise DataError("missing size line", line=len(lines))
    size_no, size_line = body[0]
    try:
        nrows, ncols, nnz = (int(v) for v in size_line.split())
    except ValueError:
        raise DataError(f"bad size line {size_line!r}", line=size_no) from None
    if nrows != ncols:
        raise DataError(f"adjacency must be square, got {nrows}x{ncols}", line=size_no)
    entries = body[1:]
    if len(entries) != nnz:
        raise DataError(f"header declares {nnz} entries, found {len(entries)}", line=size_no)

    rows, cols, vals = [], [], []
    for no, ln in entries:
        parts = ln.split()
        want = 2 if field_ == "pattern" else 3
        if len(parts) != want:
            raise DataError(f"expected {want} fields, got {len(parts)}", line=no)
        try:
            i, j = int(parts[0]), int(parts[1])
            w = 1.0 if field_ == "pattern" else float(parts[2])
        except ValueError:
            raise DataError(f"cannot parse entry {ln!r}", line=no) from None
        if not (1 <= i <= nrows and 1 <= j <= ncols):
            raise DataError(f"index ({i}, {j}) outside {nrows}x{ncols}", line=no)
        if not np.isfinite(w):
            raise DataError("non-finite weight", line=no)
        if w < 0:
            raise DataError(f"negative weight {w}", line=no)
        if i == j and w != 0:
            raise DataError(f"self loop at vertex {i}", line=no)
        rows.append(i - 1)
        cols.append(j - 1)
        vals.append(w)

    n = nrows
    w = sp.coo_array((vals, (rows, cols)), shape=(n, n)).tocsr()
    if symmetry == "symmetric":
        strict_lower = sp.tril(w, k=-1)
        strict_upper = sp.triu(w, k=1)
        if strict_lower.nnz and strict_upper.nnz:
            both = strict_lower.multiply(strict_upper.T)
            if both.nnz:
                raise DataError("symmetric file stores an edge in both triangles")
        half = strict_lower + strict_upper.T
        w = half + half.T
    else:
        diff = (w - w.T).tocoo()
        if diff.nnz:
            k = int(np.argmax(np.abs(diff.data)))
            worst = abs(diff.data[k])
            scale = np.abs(w.data).max() if w.nnz else 1.0
            if worst > symmetry_tol * scale:
                raise DataError(
                    f"general file is not symmetric: entry ({diff.row[k] + 1}, {diff.col[k] + 1}) "
                    f"differs from its transpose by {worst:.3e}"
                )
        w = 0.5 * (w + w.T)
    try:
        return Graph(sp.csr_array(w))
    except InvalidArgumentError as exc:
        raise DataError(str(exc)) from None


# -- MWT tensors ---------------------------------------------------------------

def write_tensor_mwt(t, path) -> None:
    t = np.asarray(t, dtype=float)
    if t.ndim == 0:
        t = t.reshape(1)
    with open(path, "w") as fh:
        fh.write(f"{MWT_MAGIC}\n{t.ndim}\n{' '.join(str(n) for n in t.shape)}\n")
        fh.writelines(_g(v) + "\n" for v in t.reshape(-1, order="F"))


def read_tensor_mwt(path) -> np.ndarray:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != MWT_MAGIC:
        raise DataError(f"bad magic, expected {MWT_MAGIC}", line=1)
    if len(lines) < 3:
        raise DataError("truncated header", line=len(lines))
    try:
        order = int(lines[1])
        dims = tuple(int(v) for v in lines[2].split())
    except ValueError:
        raise DataError("malformed order or dims line", line=2) from None
    if order < 1 or len(dims) != order or any(n < 1 for n in dims):
        raise DataError(f"dims {dims} inconsistent with order {order}", line=3)
    body = [ln for ln in lines[3:] if ln.strip()]
    count = int(np.prod(dims))
    if len(body) != count:
        raise DataError(f"header declares {count} values, body has {len(body)}", line=len(lines))
    try:
        data = np.array([float(v) for v in body])
    except ValueError as exc:
        raise DataError(f"bad value: {exc}") from None
    return data.reshape(dims, order="F")


# -- eigensystems --------------------------------------------------------------

def write_eigensystem(es: EigenSystem, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{es.n}\n")
        fh.write(" ".join(_g(v) for v in es.eigenvalues) + "\n")
        for row in es.eigenvectors:
            fh.write(" ".join(_g(v) for v in row) + "\n")


def read_eigensystem(path) -> EigenSystem:
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    try:
        n = int(lines[0])
        vals = np.array([float(v) for v in lines[1].split()])
        vecs = np.array([[float(v) for v in ln.split()] for ln in lines[2 : 2 + n]])
    except (ValueError, IndexError) as exc:
        raise DataError(f"malformed eigensystem file: {exc}") from None
    if vals.size != n or vecs.shape != (n, n) or len(lines) != n + 2:
        raise DataError(f"eigensystem file does not hold {n} eigenpairs")
    return EigenSystem(vals, vecs)


# -- masked matrices -----------------------------------------------------------

def read_masked_csv(path) -> MaskedMatrix:
    """CSV of numbers where ``NA`` (or an empty cell) marks a missing entry."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise DataError("empty CSV")
    width = len(rows[0])
    values = np.zeros((len(rows), width))
    mask = np.zeros((len(rows), width), dtype=bool)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DataError(f"row has {len(row)} fields, expected {width}", line=i + 1)
        for j, cell in enumerate(row):
            cell = cell.strip()
            if cell in MISSING_TOKENS:
                continue
            try:
                values[i, j] = float(cell)
            except ValueError:
                raise DataError(f"cannot parse {cell!r}", line=i + 1) from None
            mask[i, j] = True
    return MaskedMatrix(values, mask)


def write_masked_csv(m: MaskedMatrix, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for vals, obs in zip(m.values, m.mask):
            writer.writerow([_g(v) if o else "NA" for v, o in zip(vals, obs)])


def read_masked_mwt(values_path, mask_path) -> MaskedMatrix:
    values = read_tensor_mwt(values_path)
    mask = read_tensor_mwt(mask_path)
    if values.ndim != 2 or values.shape != mask.shape:
        raise DataError(f"values {values.shape} and mask {mask.shape} must be matrices of one shape")
    if not np.all(np.isin(mask, (0.0, 1.0))):
        raise DataError("mask file must contain only 0 and 1")
    return MaskedMatrix(values, mask.astype(bool))


def read_matrix(path) -> np.ndarray:
    """Dense matrix from ``.mwt`` or a plain numeric CSV."""
    if str(path).endswith(".mwt"):
        return read_tensor_mwt(path)
    m = read_masked_csv(path)
    if not m.mask.all():
        raise DataError(f"{path} has missing entries where a full matrix is required")
    return m.values


# -- manifests -----------------------------------------------------------------

SECTIONS = {
    "transform": {"inverse"},
    "filter": {"spec", "chebyshev"},
    "compress": {"percentiles", "transforms"},
    "complete": {"gamma_r", "gamma_c", "tol", "max_iter"},
}
TOP_KEYS = {"graph", "tensor"}


@dataclass
class Manifest:
    """Factor graph sources in mode order, an optional tensor and one operation block.

    Graph sources are a Matrix Market path, ``path:n``, ``ring:n`` or
    ``knn:file,k,sigma`` (``sigma`` may be ``auto``).
    """

    graphs: list[str]
    tensor: str | None = None
    operation: str | None = None
    params: dict[str, str] = field(default_factory=dict)
    base_dir: Path = field(default_factory=Path)

    def resolve(self, p: str) -> Path:
        q = Path(p)
        return q if q.is_absolute() else self.base_dir / q

    def load_graphs(self) -> list[Graph]:
        return [load_graph_source(src, self.base_dir) for src in self.graphs]


def load_graph_source(src: str, base_dir=Path()) -> Graph:
    kind, sep, arg = src.partition(":")
    if sep and kind in ("path", "ring"):
        try:
            n = int(arg)
        except ValueError:
            raise DataError(f"bad vertex count in graph source {src!r}") from None
        return path_graph(n) if kind == "path" else ring_graph(n)
    if sep and kind == "knn":
        parts = arg.split(",")
        if len(parts) not in (2, 3):
            raise DataError(f"knn source needs file,k[,sigma]: {src!r}")
        rows = read_matrix(Path(base_dir) / parts[0])
        sigma = parts[2] if len(parts) == 3 else AUTO
        return knn_gaussian_graph(rows, int(parts[1]), AUTO if sigma == AUTO else float(sigma))
    return read_graph_mm(Path(base_dir) / src)


def parse_manifest(path, strict: bool = True) -> Manifest:
    """Parse a manifest::

        # comment
        graph = path:8
        graph = rows.mm
        tensor = x.mwt
        [compress]
        percentiles = 0,50,90
        transforms = mwgft,gft1

    Relative paths resolve against the manifest's directory. With
    ``strict`` unknown keys or sections raise :class:`DataError`.
    """
    path = Path(path)
    m = Manifest(graphs=[], base_dir=path.parent)
    section = None
    with open(path) as fh:
        for no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                name = line[1:-1].strip()
                if name not in SECTIONS:
                    raise DataError(f"unknown section [{name}]", line=no)
                if m.operation is not None:
                    raise DataError("only one operation block is allowed", line=no)
                m.operation = section = name
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or not value:
                raise DataError(f"expected key = value, got {line!r}", line=no)
            if section is None:
                if key == "graph":
                    m.graphs.append(value)
                elif key == "tensor":
                    m.tensor = value
                elif strict:
                    raise DataError(f"unknown key {key!r}", line=no)
            else:
                if key not in SECTIONS[section] and strict:
                    raise DataError(f"unknown key {key!r} in [{section}]", line=no)
                m.params[key] = value
    if not m.graphs:
        raise DataError("manifest lists no graphs")
    return m


def validate_manifest(m: Manifest, tensor_order: int | None = None) -> None:
    """Check mode count against a tensor and that referenced files exist."""
    if tensor_order is not None and tensor_order != len(m.graphs):
        raise DataError(f"manifest lists {len(m.graphs)} graphs for an order-{tensor_order} tensor")
    for src in m.graphs:
        kind, sep, arg = src.partition(":")
        if sep and kind in ("path", "ring"):
            continue
        target = arg.split(",")[0] if sep and kind == "knn" else src
        if not os.path.exists(m.resolve(target)):
            raise DataError(f"graph source file not found: {target}")
