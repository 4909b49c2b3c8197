"""Tensor-product Gauss-Legendre rules on intervals and rectangle batches."""

from __future__ import annotations

from functools import lru_cache
from typing import Iterator

import numpy as np


@lru_cache(maxsize=16)
def gauss_legendre(npts: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1], cached per point count."""
    if npts < 1:
        raise ValueError(f"need at least one quadrature point, got {npts}")
    x, w = np.polynomial.legendre.leggauss(npts)
    return x, w


def interval_rule(a: float, b: float, npts: int = 5) -> tuple[np.ndarray, np.ndarray]:
    """Gauss rule mapped to [a, b]; weights sum to b - a."""
    x, w = gauss_legendre(npts)
    return 0.5 * (a + b) + 0.5 * (b - a) * x, 0.5 * (b - a) * w


def segment_rule_batch(
    x0: np.ndarray, y0: np.ndarray, x1: np.ndarray, y1: np.ndarray, npts: int = 5
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gauss points along a batch of straight segments.

    Returns (X, Y, W) of shape (n_segments, npts); the weights of each row sum
    to the segment length.
    """
    t, w = gauss_legendre(npts)
    t = 0.5 * (t + 1.0)
    x0 = np.asarray(x0, dtype=float)[:, None]
    y0 = np.asarray(y0, dtype=float)[:, None]
    dx = np.asarray(x1, dtype=float)[:, None] - x0
    dy = np.asarray(y1, dtype=float)[:, None] - y0
    X = x0 + dx * t
    Y = y0 + dy * t
    W = 0.5 * np.hypot(dx, dy) * w
    return X, Y, W


def cell_rule_batch(
    x0: np.ndarray, x1: np.ndarray, y0: np.ndarray, y1: np.ndarray, npts: int = 5
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tensor Gauss points for a batch of axis-aligned rectangles.

    Returns (X, Y, W) of shape (n_cells, npts**2); each row's weights sum to
    the cell area.
    """
    t, w = gauss_legendre(npts)
    tx = 0.5 * (t + 1.0)
    x0 = np.asarray(x0, dtype=float)[:, None]
    y0 = np.asarray(y0, dtype=float)[:, None]
    hx = np.asarray(x1, dtype=float)[:, None] - x0
    hy = np.asarray(y1, dtype=float)[:, None] - y0
    qx = x0 + hx * tx                     # (nc, npts)
    qy = y0 + hy * tx
    X = np.repeat(qx, npts, axis=1)       # x fast over blocks of npts
    Y = np.tile(qy, (1, npts))
    W2 = 0.25 * np.outer(w, w).ravel()    # reference weights, sum = 1
    W = (hx * hy) * W2
    return X, Y, W


def iter_cell_chunks(n_cells: int, chunk: int = 32768) -> Iterator[slice]:
    """Slices covering range(n_cells) in fixed-size chunks (bounds memory)."""
    for start in range(0, n_cells, chunk):
        yield slice(start, min(start + chunk, n_cells))
