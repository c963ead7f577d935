"""Vectorised adaptive Gauss-Legendre quadrature and periodic trapezoid sums.

The integrand is always called with a 1-d array of abscissae and must return
an array of the same shape (real or complex).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

FAILED_TOLERANCE = "FAILED_TOLERANCE"
OK = "OK"


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error: float
    converged: bool = True
    intervals: int = 0

    @property
    def flag(self) -> str:
        return OK if self.converged else FAILED_TOLERANCE


@lru_cache(maxsize=8)
def _gauss(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _panel_sums(f, a, b, order):
    x, w = _gauss(order)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    vals = np.asarray(f(nodes.ravel())).reshape(nodes.shape)
    return half * (vals @ w)


def _scalar(v):
    v = complex(v)
    return v.real if v.imag == 0.0 else v


def adaptive_gauss(
    f: Callable[[np.ndarray], np.ndarray],
    edges: Sequence[float],
    abs_tol: float = 1e-12,
    rel_tol: float = 1e-10,
    max_depth: int = 50,
    order: int = 10,
    max_intervals: int = 100_000,
) -> QuadResult:
    """Integrate ``f`` over [edges[0], edges[-1]] with the interior edges as breakpoints.

    Every panel is compared against the sum over its two halves; the halves'
    sum is kept and the difference is the panel's error estimate.  Panels
    are split until the summed estimate meets ``max(abs_tol, rel_tol*|I|)``.
    """
    e = np.unique(np.asarray(edges, dtype=float))
    if e.size < 2:
        return QuadResult(0.0, 0.0, True, 0)
    length = e[-1] - e[0]
    a, b = e[:-1], e[1:]
    q = _panel_sums(f, a, b, order)
    depth = np.zeros(a.size, dtype=int)

    done_val = 0.0 + 0.0j if np.iscomplexobj(q) else 0.0
    done_err = 0.0
    hit_depth = False
    n_final = 0
    while a.size:
        m = 0.5 * (a + b)
        ql = _panel_sums(f, a, m, order)
        qr = _panel_sums(f, m, b, order)
        val = ql + qr
        err = np.abs(q - val)
        err = np.where(np.isfinite(err), err, np.inf)

        total = done_val + np.sum(val)
        tol = max(abs_tol, rel_tol * abs(total))
        if done_err + np.sum(err) <= tol:
            done_val, done_err = total, done_err + float(np.sum(err))
            n_final += a.size
            break

        # panels narrower than a few ulps of their position cannot be split
        stuck = (m <= a) | (m >= b) | ((b - a) <= 4 * np.spacing(np.maximum(np.abs(a), np.abs(b))))
        accept = (err <= tol * np.maximum((b - a) / length, 1e-3)) | (depth >= max_depth) | stuck
        if a.size * 2 > max_intervals:
            accept[:] = True
        hit_depth |= bool(np.any(((depth >= max_depth) | stuck) & (err > tol * (b - a) / length)))
        done_val = done_val + np.sum(val[accept])
        done_err += float(np.sum(err[accept]))
        n_final += int(np.sum(accept))

        keep = ~accept
        a, m, b = a[keep], m[keep], b[keep]
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
        q = np.concatenate([ql[keep], qr[keep]])
        depth = np.concatenate([depth[keep] + 1, depth[keep] + 1])

    tol = max(abs_tol, rel_tol * abs(done_val))
    converged = bool(np.isfinite(done_err) and done_err <= tol and not hit_depth)
    return QuadResult(_scalar(done_val), float(done_err), converged, n_final)


def periodic_trapezoid(
    g: Callable[[np.ndarray], np.ndarray],
    abs_tol: float = 1e-12,
    rel_tol: float = 1e-10,
    start_points: int = 64,
    max_points: int = 1 << 20,
) -> QuadResult:
    """Mean of a 2*pi-periodic ``g`` over [0, 2*pi), doubling the grid until stable."""
    n = start_points
    theta = 2 * np.pi * np.arange(n) / n
    t_old = np.mean(g(theta))
    while True:
        mids = theta + np.pi / n
        t_new = 0.5 * (t_old + np.mean(g(mids)))
        n *= 2
        err = abs(t_new - t_old)
        if err <= max(abs_tol, rel_tol * abs(t_new)) or n >= max_points:
            converged = bool(err <= max(abs_tol, rel_tol * abs(t_new)))
            return QuadResult(_scalar(t_new), float(err), converged, n)
        theta = 2 * np.pi * np.arange(n) / n
        t_old = t_new


def graded_edges(a: float, b: float, points: Sequence[float], finest: float, levels: int | None = None):
    """Breakpoints on [a, b] refined geometrically toward each of ``points``."""
    out = [a, b]
    span = b - a
    if levels is None:
        levels = max(1, int(np.ceil(np.log2(max(span / max(finest, 1e-300), 2.0)))))
    for p in points:
        if not a <= p <= b:
            continue
        out.append(p)
        step = span / 4
        for _ in range(levels):
            for s in (p - step, p + step):
                if a < s < b:
                    out.append(s)
            step /= 2
    return np.unique(np.asarray(out, dtype=float))
