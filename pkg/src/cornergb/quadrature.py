"""Tensor-product quadrature over chart boxes, faces and corner faces.

Non-periodic axes use Gauss-Legendre rules; periodic axes use the equispaced
rule offset by half a step.  Neither rule places a node on an endpoint, so
coordinate singularities on the box boundary are never evaluated.

Sums are formed with :func:`math.fsum` in a fixed node order, so results do
not depend on batching or on the number of worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

MAX_ORDER = 64
BATCH = 512


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights on [-1, 1]."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray
    periodic: bool = False

    def mapped(self, lo, hi):
        half = 0.5 * (hi - lo)
        return lo + half * (self.nodes + 1.0), half * self.weights


def gl_rule(n):
    """Gauss-Legendre rule with ``n`` nodes (exact through degree 2n - 1)."""
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_ORDER:
        raise ValueError(f"quadrature order must be an integer in [1, {MAX_ORDER}], got {n!r}")
    x, w = np.polynomial.legendre.leggauss(int(n))
    return QuadratureRule(int(n), x, w)


def periodic_rule(n):
    """Equispaced midpoint rule (exact for trigonometric polynomials of degree < n)."""
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= 4 * MAX_ORDER:
        raise ValueError(f"periodic order must be a positive integer, got {n!r}")
    x = -1.0 + (2.0 * np.arange(n) + 1.0) / n
    return QuadratureRule(int(n), x, np.full(n, 2.0 / n), periodic=True)


def single_node_rule():
    """Midpoint rule with one node; exact for integrands constant along the axis."""
    return QuadratureRule(1, np.zeros(1), np.full(1, 2.0))


def tensor_rule(intervals, rules):
    """Tensor-product nodes (N, d) and weights (N,) in C order of the axes."""
    mapped = [r.mapped(lo, hi) for r, (lo, hi) in zip(rules, intervals)]
    grids = np.meshgrid(*[m[0] for m in mapped], indexing="ij")
    wgrids = np.meshgrid(*[m[1] for m in mapped], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    w = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    return pts, w


@dataclass(frozen=True)
class Region:
    """A stratum of a chart: ``kind`` is 'interior', 'face' or 'corner'.

    ``fixed`` maps axis -> side for the box faces the region lies on.
    """

    kind: str
    fixed: tuple = ()

    @property
    def fixed_axes(self):
        return tuple(a for a, _ in self.fixed)


def interior_region():
    return Region("interior")


def face_region(axis, side):
    return Region("face", ((axis, side),))


def corner_region(m_face, n_face):
    return Region("corner", (tuple(m_face), tuple(n_face)))


def region_nodes(chart, region, order, constant_axes=()):
    """Nodes (N, 4) and coordinate weights (N,) for ``region`` of ``chart``.

    Axes listed in ``constant_axes`` get a single node; callers pass the axes
    along which every integrand is known to be constant.
    """
    fixed = dict(region.fixed)
    free = [a for a in range(4) if a not in fixed]
    rules, intervals = [], []
    for a in free:
        if a in constant_axes:
            rules.append(single_node_rule())
        elif chart.periodic(a):
            rules.append(periodic_rule(order))
        else:
            rules.append(gl_rule(order))
        intervals.append(chart.box[a])
    sub, w = tensor_rule(intervals, rules)
    pts = np.empty((len(w), 4))
    pts[:, free] = sub
    for a, side in fixed.items():
        pts[:, a] = chart.face_value(a, side)
    return pts, w


def induced_volume(g, axes):
    """sqrt(det) of the metric block on ``axes`` (batched)."""
    axes = list(axes)
    return np.sqrt(np.linalg.det(g[:, axes][:, :, axes]))


def map_batches(fn, points, batch=BATCH, workers=1):
    """Apply ``fn`` to consecutive batches of ``points``; results in node order.

    ``fn`` returns a dict of 1-D arrays; the dicts are concatenated key-wise.
    """
    chunks = [points[i:i + batch] for i in range(0, len(points), batch)]
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, chunks))
    else:
        parts = [fn(c) for c in chunks]
    if not parts:
        return {}
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


def weighted_sum(values, weights):
    """Deterministic, exactly rounded sum of values * weights."""
    return math.fsum((np.asarray(values, dtype=float) * weights).tolist())


def integrate_region(f, chart, region, order=16, measure=True, omega=None,
                     constant_axes=(), batch=BATCH, workers=1):
    """Integrate a pointwise evaluator ``f(points) -> values`` over a region.

    With ``measure`` the integrand is multiplied by the volume element of the
    metric induced on the region (including the conformal factor ``omega``).
    """
    pts, w = region_nodes(chart, region, order, constant_axes)
    free = [a for a in range(4) if a not in region.fixed_axes]

    def evaluate(chunk):
        vals = np.asarray(f(chunk), dtype=float)
        vals = np.broadcast_to(vals, (len(chunk),))
        if measure:
            vals = vals * induced_volume(chart.metric_values(chunk, omega), free)
        return {"v": vals}

    out = map_batches(evaluate, pts, batch, workers)
    return weighted_sum(out["v"], w)


def chart_regions(chart):
    """All integration regions of a chart: interior, M/N faces, corners."""
    regions = [interior_region()]
    regions += [face_region(a, s) for a, s, _ in chart.boundary_faces()]
    regions += [corner_region(m, n) for m, n in chart.corners()]
    return regions


def node_count(chart, region, order, constant_axes=()):
    n = 1
    fixed = region.fixed_axes
    for a in range(4):
        if a not in fixed:
            n *= 1 if a in constant_axes else order
    return n


__all__ = ["QuadratureRule", "gl_rule", "periodic_rule", "tensor_rule", "Region",
           "interior_region", "face_region", "corner_region", "region_nodes",
           "integrate_region", "weighted_sum", "map_batches", "induced_volume",
           "chart_regions", "node_count"]
