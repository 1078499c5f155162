"""Deterministic input acquisition: generators and Matrix Market parsing.

All randomness comes from a splitmix64-seeded xoshiro256** generator
implemented with pure 64-bit integer arithmetic, so the same spec produces
bit-identical inputs on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

_M64 = (1 << 64) - 1


class MatrixMarketError(ValueError):
    """Malformed Matrix Market input; message carries the line number."""


class UnsupportedFieldError(MatrixMarketError):
    """Matrix Market field type this loader does not accept."""


class Rng:
    """xoshiro256** seeded via splitmix64."""

    def __init__(self, seed: int):
        s = seed & _M64
        state = []
        for _ in range(4):
            s = (s + 0x9E3779B97F4A7C15) & _M64
            z = s
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
            state.append(z ^ (z >> 31))
        self._s = state

    def next_u64(self) -> int:
        s = self._s
        x = (s[1] * 5) & _M64
        result = (((x << 7) | (x >> 57)) & _M64) * 9 & _M64
        t = (s[1] << 17) & _M64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        x = s[3]
        s[3] = ((x << 45) | (x >> 19)) & _M64
        return result

    def next_double(self) -> float:
        # 53 high bits -> [0, 1); exact in binary64 on every platform
        return (self.next_u64() >> 11) * 2.0 ** -53

    def next_below(self, n: int) -> int:
        """Unbiased integer in [0, n) by rejection."""
        threshold = (_M64 + 1) - (_M64 + 1) % n
        while True:
            x = self.next_u64()
            if x < threshold:
                return x % n

    def uniform_open(self) -> float:
        """Uniform in (-1, 1)."""
        return 2.0 * self.next_double() - 1.0


# -- domain types ------------------------------------------------------------


@dataclass
class CsrMatrix:
    n_rows: int
    n_cols: int
    row_ptr: np.ndarray   # int64, len n_rows + 1, non-decreasing
    col_idx: np.ndarray   # int64, len nnz, sorted within each row
    values: np.ndarray    # float64, len nnz

    @property
    def nnz(self) -> int:
        return len(self.col_idx)

    def validate(self) -> None:
        rp = self.row_ptr
        if len(rp) != self.n_rows + 1 or rp[0] != 0 or rp[-1] != self.nnz:
            raise ValueError("row_ptr endpoints inconsistent with nnz")
        if np.any(np.diff(rp) < 0):
            raise ValueError("row_ptr must be non-decreasing")
        if self.nnz and (self.col_idx.min() < 0 or self.col_idx.max() >= self.n_cols):
            raise ValueError("column index out of range")
        for i in range(self.n_rows):
            cols = self.col_idx[rp[i]:rp[i + 1]]
            if np.any(np.diff(cols) < 0):
                raise ValueError(f"columns not sorted in row {i}")
        if len(self.values) != self.nnz:
            raise ValueError("values length != nnz")


@dataclass
class Graph:
    n_nodes: int
    row_ptr: np.ndarray    # int64, len n_nodes + 1
    neighbors: np.ndarray  # int64, len n_edges, sorted within each node
    out_degree: np.ndarray

    @property
    def n_edges(self) -> int:
        return len(self.neighbors)

    def validate(self) -> None:
        if len(self.row_ptr) != self.n_nodes + 1 or self.row_ptr[0] != 0:
            raise ValueError("bad row_ptr")
        if np.any(np.diff(self.row_ptr) < 0):
            raise ValueError("row_ptr must be non-decreasing")
        if self.n_edges and (self.neighbors.min() < 0 or self.neighbors.max() >= self.n_nodes):
            raise ValueError("neighbor index out of range")
        if not np.array_equal(self.out_degree, np.diff(self.row_ptr)):
            raise ValueError("out_degree inconsistent with row_ptr")


@dataclass
class ComplexSignal:
    real: np.ndarray
    imag: np.ndarray

    @property
    def n(self) -> int:
        return len(self.real)

    def validate(self) -> None:
        n = self.n
        if len(self.imag) != n:
            raise ValueError("real/imag length mismatch")
        if n < 2 or n & (n - 1):
            raise ValueError(f"signal length must be a power of two >= 2, got {n}")


@dataclass
class GeneratorSpec:
    """Names one deterministic input: kind, size, density knob, seed."""

    kind: str           # "matrix" | "graph" | "signal"
    n: int
    density: int = 0    # nnz per row (matrix) or average degree (graph)
    seed: int = 42

    def make(self):
        if self.kind == "matrix":
            return gen_sparse_matrix(self.n, self.density, self.seed)
        if self.kind == "graph":
            return gen_graph(self.n, self.density, self.seed)
        if self.kind == "signal":
            return gen_signal(self.n, self.seed)
        raise ValueError(f"unknown generator kind {self.kind!r}")


# -- generators ------------------------------------------------------------


def gen_graph(n: int, avg_degree: int, seed: int) -> Graph:
    """Uniform random directed graph with ~avg_degree out-edges per node.

    n * avg_degree (source, target) pairs are drawn uniformly; self-loops
    are dropped and duplicate edges merged, so the final edge count is
    slightly below the nominal total.  Neighbors come out sorted.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if avg_degree < 0 or avg_degree >= n:
        raise ValueError(f"avg_degree must be in [0, n), got {avg_degree}")
    rng = Rng(seed)
    m = n * avg_degree
    keys = []
    for _ in range(m):
        u = rng.next_below(n)
        v = rng.next_below(n)
        if u != v:
            keys.append(u * n + v)
    if keys:
        uniq = np.unique(np.array(keys, dtype=np.int64))
        src = uniq // n
        dst = uniq % n
    else:
        src = dst = np.empty(0, dtype=np.int64)
    out_degree = np.bincount(src, minlength=n).astype(np.int64)
    row_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(out_degree, out=row_ptr[1:])
    return Graph(n_nodes=n, row_ptr=row_ptr, neighbors=dst, out_degree=out_degree)


def gen_sparse_matrix(n: int, nnz_per_row: int, seed: int) -> CsrMatrix:
    """Square CSR matrix with exactly min(nnz_per_row, n) entries per row.

    Column positions are distinct per row and sorted; values are uniform in
    (-1, 1).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if nnz_per_row < 0:
        raise ValueError("nnz_per_row must be >= 0")
    k = min(nnz_per_row, n)
    rng = Rng(seed)
    col_idx = np.empty(n * k, dtype=np.int64)
    values = np.empty(n * k, dtype=np.float64)
    pos = 0
    for _ in range(n):
        seen = set()
        while len(seen) < k:
            seen.add(rng.next_below(n))
        cols = sorted(seen)
        for c in cols:
            col_idx[pos] = c
            values[pos] = rng.uniform_open()
            pos += 1
    row_ptr = np.arange(0, n * k + 1, k, dtype=np.int64) if k else np.zeros(n + 1, dtype=np.int64)
    return CsrMatrix(n_rows=n, n_cols=n, row_ptr=row_ptr, col_idx=col_idx, values=values)


def gen_signal(n: int, seed: int) -> ComplexSignal:
    """Complex signal with components uniform in (-1, 1); n a power of two."""
    if n < 2 or n & (n - 1):
        raise ValueError(f"signal length must be a power of two >= 2, got {n}")
    rng = Rng(seed)
    real = np.empty(n, dtype=np.float64)
    imag = np.empty(n, dtype=np.float64)
    for i in range(n):
        real[i] = rng.uniform_open()
        imag[i] = rng.uniform_open()
    return ComplexSignal(real=real, imag=imag)


def gen_dense_vector(n: int, seed: int) -> np.ndarray:
    """Dense float64 vector, uniform in (-1, 1)."""
    rng = Rng(seed)
    return np.array([rng.uniform_open() for _ in range(n)], dtype=np.float64)


# -- Matrix Market -----------------------------------------------------------


def parse_matrix_market(text: str | Iterable[str]) -> CsrMatrix:
    """Parse coordinate-format Matrix Market text into CSR.

    Accepts ``real`` matrices with ``general`` or ``symmetric`` symmetry.
    Indices are converted to 0-based, symmetric storage is expanded,
    duplicate entries are summed, and rows come out column-sorted.
    """
    lines = text.splitlines() if isinstance(text, str) else list(text)
    if not lines:
        raise MatrixMarketError("line 1: empty input")
    header = lines[0].strip().split()
    if len(header) < 5 or header[0] != "%%MatrixMarket":
        raise MatrixMarketError("line 1: missing %%MatrixMarket header")
    obj, fmt, fieldtype, symmetry = (h.lower() for h in header[1:5])
    if obj != "matrix" or fmt != "coordinate":
        raise MatrixMarketError(f"line 1: unsupported header '{obj} {fmt}'")
    if fieldtype != "real":
        raise UnsupportedFieldError(f"line 1: unsupported field type '{fieldtype}'")
    if symmetry not in ("general", "symmetric"):
        raise MatrixMarketError(f"line 1: unsupported symmetry '{symmetry}'")

    lineno = 1
    it = iter(range(1, len(lines)))
    size = None
    for i in it:
        lineno = i + 1
        s = lines[i].strip()
        if not s or s.startswith("%"):
            continue
        parts = s.split()
        if len(parts) != 3:
            raise MatrixMarketError(f"line {lineno}: expected 'rows cols nnz'")
        try:
            size = tuple(int(p) for p in parts)
        except ValueError:
            raise MatrixMarketError(f"line {lineno}: non-integer size entry") from None
        break
    if size is None:
        raise MatrixMarketError(f"line {lineno}: missing size line")
    n_rows, n_cols, nnz = size
    if n_rows < 1 or n_cols < 1 or nnz < 0:
        raise MatrixMarketError(f"line {lineno}: bad dimensions {size}")

    rows, cols, vals = [], [], []
    seen = 0
    for i in it:
        lineno = i + 1
        s = lines[i].strip()
        if not s or s.startswith("%"):
            continue
        parts = s.split()
        if len(parts) != 3:
            raise MatrixMarketError(f"line {lineno}: expected 'row col value'")
        try:
            r, c = int(parts[0]), int(parts[1])
            v = float(parts[2])
        except ValueError:
            raise MatrixMarketError(f"line {lineno}: non-numeric entry") from None
        if not (1 <= r <= n_rows and 1 <= c <= n_cols):
            raise MatrixMarketError(
                f"line {lineno}: index ({r}, {c}) outside declared {n_rows}x{n_cols}")
        rows.append(r - 1)
        cols.append(c - 1)
        vals.append(v)
        if symmetry == "symmetric" and r != c:
            rows.append(c - 1)
            cols.append(r - 1)
            vals.append(v)
        seen += 1
    if seen != nnz:
        raise MatrixMarketError(
            f"line {lineno}: declared {nnz} entries but found {seen}")
    return csr_from_coo(n_rows, n_cols, rows, cols, vals)


def csr_from_coo(n_rows, n_cols, rows, cols, vals) -> CsrMatrix:
    """Build CSR from coordinate triples, summing duplicates."""
    if len(rows) == 0:
        return CsrMatrix(n_rows, n_cols, np.zeros(n_rows + 1, dtype=np.int64),
                         np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64))
    r = np.asarray(rows, dtype=np.int64)
    c = np.asarray(cols, dtype=np.int64)
    v = np.asarray(vals, dtype=np.float64)
    key = r * n_cols + c
    order = np.argsort(key, kind="stable")
    key, v = key[order], v[order]
    uniq, start = np.unique(key, return_index=True)
    summed = np.add.reduceat(v, start)
    rr = uniq // n_cols
    cc = uniq % n_cols
    row_ptr = np.zeros(n_rows + 1, dtype=np.int64)
    np.cumsum(np.bincount(rr, minlength=n_rows), out=row_ptr[1:])
    return CsrMatrix(n_rows, n_cols, row_ptr, cc, summed)
