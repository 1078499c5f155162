"""Scalar and long-vector kernel implementations over the simulator API.

Each kernel comes in a scalar variant (every access through scalar loads and
stores) and a vector variant written against the vector intrinsics.  Both
variants of a kernel perform bit-identical arithmetic: reductions run in
strict element order (with carry-in across strips), so results match exactly
across variants and across every effective vector length.

Address arithmetic and loop control are not charged separately; cycle costs
come from data accesses and from the ALU operations on data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ConvergenceError(RuntimeError):
    """Iterative kernel failed to converge within its iteration budget."""


@dataclass
class KernelResult:
    """Kernel output payload plus a scalar checksum over its elements."""

    payload: np.ndarray
    checksum: float


def make_result(payload: np.ndarray) -> KernelResult:
    return KernelResult(payload=payload, checksum=float(np.sum(payload)))


from .spmv import spmv_scalar, spmv_vector            # noqa: E402
from .bfs import bfs_scalar, bfs_vector               # noqa: E402
from .pagerank import pagerank                        # noqa: E402
from .fft import fft                                  # noqa: E402

__all__ = [
    "ConvergenceError", "KernelResult", "make_result",
    "spmv_scalar", "spmv_vector", "bfs_scalar", "bfs_vector",
    "pagerank", "fft",
]
