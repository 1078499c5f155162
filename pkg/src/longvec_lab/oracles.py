"""Independent reference implementations used to check kernel results.

Everything here is plain numpy / stdlib and never touches the simulator, so
these stay valid oracles for the simulated kernels.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .inputs import ComplexSignal, CsrMatrix, Graph


def spmv_dense(a: CsrMatrix, x: np.ndarray) -> np.ndarray:
    """Dense mat-vec after materializing the full matrix (small n only)."""
    dense = np.zeros((a.n_rows, a.n_cols), dtype=np.float64)
    for i in range(a.n_rows):
        s, e = a.row_ptr[i], a.row_ptr[i + 1]
        dense[i, a.col_idx[s:e]] = a.values[s:e]
    return dense @ x


def spmv_rowwise(a: CsrMatrix, x: np.ndarray) -> np.ndarray:
    """Row-by-row numpy dot products; scales to large matrices."""
    y = np.empty(a.n_rows, dtype=np.float64)
    rp = a.row_ptr
    for i in range(a.n_rows):
        s, e = rp[i], rp[i + 1]
        y[i] = a.values[s:e] @ x[a.col_idx[s:e]]
    return y


def bfs_distances(g: Graph, src: int) -> np.ndarray:
    """Queue-based BFS; -1 marks unreachable nodes."""
    dist = np.full(g.n_nodes, -1, dtype=np.int64)
    dist[src] = 0
    q = deque([src])
    rp, nb = g.row_ptr, g.neighbors
    while q:
        u = q.popleft()
        for v in nb[rp[u]:rp[u + 1]]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist


def pagerank_power(g: Graph, damping: float, tol: float, max_iter: int) -> np.ndarray:
    """Power iteration on the normalized in-edge operator (numpy edge lists).

    Dangling mass is redistributed uniformly; iteration stops when the L1
    change drops to `tol`.
    """
    n = g.n_nodes
    src = np.repeat(np.arange(n, dtype=np.int64), g.out_degree)
    dst = g.neighbors
    outdeg = g.out_degree.astype(np.float64)
    dangling = np.where(g.out_degree == 0)[0]
    inv = np.zeros(n, dtype=np.float64)
    nz = outdeg > 0
    inv[nz] = 1.0 / outdeg[nz]
    r = np.full(n, 1.0 / n, dtype=np.float64)
    for _ in range(max_iter):
        contrib = r * inv
        y = np.zeros(n, dtype=np.float64)
        np.add.at(y, dst, contrib[src])
        base = (1.0 - damping) / n + damping * float(r[dangling].sum()) / n
        r_next = base + damping * y
        if float(np.abs(r_next - r).sum()) <= tol:
            return r_next
        r = r_next
    return r


def pagerank_dense(g: Graph, damping: float, tol: float, max_iter: int) -> np.ndarray:
    """Dense-matrix power iteration (small n only)."""
    n = g.n_nodes
    m = np.zeros((n, n), dtype=np.float64)
    for u in range(n):
        s, e = g.row_ptr[u], g.row_ptr[u + 1]
        if e > s:
            m[g.neighbors[s:e], u] = 1.0 / (e - s)
    dangling = g.out_degree == 0
    r = np.full(n, 1.0 / n, dtype=np.float64)
    for _ in range(max_iter):
        base = (1.0 - damping) / n + damping * float(r[dangling].sum()) / n
        r_next = base + damping * (m @ r)
        if float(np.abs(r_next - r).sum()) <= tol:
            return r_next
        r = r_next
    return r


def dft_naive(sig: ComplexSignal) -> ComplexSignal:
    """O(n^2) forward DFT straight from the definition."""
    n = sig.n
    x = sig.real + 1j * sig.imag
    k = np.arange(n)
    w = np.exp(-2j * np.pi * np.outer(k, k) / n)
    spec = w @ x
    return ComplexSignal(real=spec.real.copy(), imag=spec.imag.copy())


def idft_naive(sig: ComplexSignal) -> ComplexSignal:
    """O(n^2) inverse DFT (for round-trip checks)."""
    n = sig.n
    x = sig.real + 1j * sig.imag
    k = np.arange(n)
    w = np.exp(2j * np.pi * np.outer(k, k) / n)
    out = (w @ x) / n
    return ComplexSignal(real=out.real.copy(), imag=out.imag.copy())


def rel_l2(actual: np.ndarray, expected: np.ndarray) -> float:
    denom = float(np.linalg.norm(expected))
    if denom == 0.0:
        return float(np.linalg.norm(actual))
    return float(np.linalg.norm(actual - expected)) / denom
