"""Verification flows: Gauss-Bonnet assembly, conformal laws, sweeps, point dumps.

Two assemblies of ``4 pi^2 chi`` are computed from the same quadrature nodes:

* path A integrates ``|W|^2/8 + Q/2`` over the interior, ``T + L-curvature``
  over each boundary face and ``U + G`` over each corner;
* path B integrates the raw Allendoerfer-Weil densities (interior Pfaffian,
  boundary density at the outer normal, corner density integrated over the
  outer-angle arc by quadrature), scaled by ``4 pi^2``.

The two differ pointwise by divergence terms that cancel between strata, so
their agreement checks the boundary and corner bookkeeping.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from . import jets
from .boundary import (aw_boundary_density, boundary_frame, boundary_integrand,
                       l_curvature, p3_apply, t_curvature)
from .corner import (aw_corner_closed, aw_corner_quadrature, corner_frame, corner_integrand,
                     g_curvature, p2b_apply, u_curvature)
from .curvature import interior_curvature
from .expr import evaluate, format_expression, parse_expression
from .quadrature import (BATCH, corner_region, face_region, induced_volume,
                         interior_region, map_batches, region_nodes, weighted_sum)

FOUR_PI_SQ = 4.0 * math.pi ** 2
PIECES = ("interior", "M", "N", "corner")
DEFAULT_TEST_FIELD = "sin(0.7*x1 + 0.4*x2 - 0.3*x3 + 0.5*x4) + 0.2*x1*x3^2 - 0.1*x2^2*x4"
SAMPLE_MARGIN = 0.05
EXTENDED_BATCH = 128
BUDGET_PER_TOL = 1e-6
PATH_FLOOR = 1e-12
ROUNDOFF_SAFETY = 10.0


@dataclass
class Report:
    """Result of one verification run; ``to_dict`` gives the structured form."""

    scene: str
    chi: int
    quad_order: int
    theta_order: int
    target: float
    pieces_a: dict
    pieces_b: dict
    total_a: float
    total_b: float
    defect_a: float
    defect_b: float
    path_difference: float
    error_estimate_a: float = None
    error_estimate_b: float = None
    identities: dict = field(default_factory=dict)
    nodes: dict = field(default_factory=dict)
    omega: str = None
    tol: float = 1e-3
    timings: dict = None

    @property
    def passed(self):
        return self.defect_a < self.tol

    @property
    def path_tolerance(self):
        """10x the larger error estimate plus a round-off floor relative to the target."""
        est = max(self.error_estimate_a or 0.0, self.error_estimate_b or 0.0)
        return 10.0 * est + PATH_FLOOR * max(1.0, abs(self.target))

    @property
    def paths_agree(self):
        return self.path_difference <= self.path_tolerance

    def to_dict(self):
        d = {
            "scene": self.scene, "chi": self.chi, "omega": self.omega,
            "quad_order": self.quad_order, "theta_order": self.theta_order,
            "target": self.target,
            "pieces_a": dict(self.pieces_a), "pieces_b": dict(self.pieces_b),
            "total_a": self.total_a, "total_b": self.total_b,
            "defect_a": self.defect_a, "defect_b": self.defect_b,
            "path_difference": self.path_difference,
            "path_tolerance": self.path_tolerance, "paths_agree": self.paths_agree,
            "error_estimate_a": self.error_estimate_a,
            "error_estimate_b": self.error_estimate_b,
            "identities": self.identities, "nodes": self.nodes,
            "tol": self.tol, "passed": self.passed,
        }
        if self.timings is not None:
            d["timings"] = self.timings
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self):
        f = _fmt
        lines = [f"scene            {self.scene}",
                 f"chi              {self.chi}",
                 f"omega            {self.omega if self.omega else '-'}",
                 f"orders           quad {self.quad_order}, theta {self.theta_order}",
                 f"target 4pi^2chi  {f(self.target)}",
                 "",
                 f"{'piece':10s} {'path A':>24s} {'path B':>24s}"]
        for p in PIECES:
            lines.append(f"{p:10s} {f(self.pieces_a[p]):>24s} {f(self.pieces_b[p]):>24s}")
        lines += [f"{'total':10s} {f(self.total_a):>24s} {f(self.total_b):>24s}",
                  f"{'defect':10s} {f(self.defect_a):>24s} {f(self.defect_b):>24s}"]
        if self.error_estimate_a is not None:
            lines.append(f"{'err est':10s} {f(self.error_estimate_a):>24s} "
                         f"{f(self.error_estimate_b):>24s}")
        lines += ["", f"path difference  {f(self.path_difference)} "
                      f"({'within' if self.paths_agree else 'exceeds'} {f(self.path_tolerance)})",
                  "",
                  "pointwise identities (max / mean over nodes)"]
        for name, st in self.identities.items():
            lines.append(f"  {name:28s} {f(st['max'])} / {f(st['mean'])}  (n={st['count']})")
        lines += ["", "nodes " + ", ".join(f"{k}={v}" for k, v in self.nodes.items())]
        if self.timings is not None:
            lines.append("timings " + ", ".join(f"{k}={v:.3f}s" for k, v in self.timings.items()))
        lines += ["", f"result           {'PASS' if self.passed else 'FAIL'} "
                      f"(defect A {f(self.defect_a)} vs tol {f(self.tol)})"]
        return "\n".join(lines) + "\n"


def _fmt(v):
    return "-" if v is None else f"{v:.15g}"


def _stats(values):
    v = np.abs(np.asarray(values, dtype=float))
    if v.size == 0:
        return {"max": 0.0, "mean": 0.0, "count": 0}
    return {"max": float(v.max()), "mean": math.fsum(v.tolist()) / v.size, "count": int(v.size)}


# pointwise evaluators ------------------------------------------------------

def _interior_eval(chart, omega):
    def fn(pts):
        ic = interior_curvature(chart.metric_jet(pts, 4, omega))
        return {"a": (ic.W2 / 8.0 + ic.Q / 2.0) * ic.volume,
                "b": FOUR_PI_SQ * ic.psi_density * ic.volume,
                "id": ic.psi_density - ic.integrand}
    return fn


def _face_eval(chart, axis, side, omega):
    def fn(pts):
        bf = boundary_frame(chart, axis, side, pts, omega)
        vol = np.sqrt(np.linalg.det(bf.h))
        aw = aw_boundary_density(bf)
        return {"a": (t_curvature(bf) + l_curvature(bf)) * vol,
                "b": FOUR_PI_SQ * aw * vol,
                "id": aw - boundary_integrand(bf)}
    return fn


def _corner_eval(chart, m, n, omega, theta_order):
    def fn(pts):
        cf = corner_frame(chart, m, n, pts, omega)
        vol = np.sqrt(np.linalg.det(cf.k))
        closed = aw_corner_closed(cf)
        quad = aw_corner_quadrature(cf, theta_order)
        return {"a": (u_curvature(cf) + g_curvature(cf)) * vol,
                "b": FOUR_PI_SQ * quad * vol,
                "id": closed - quad,
                "id2": closed - corner_integrand(cf)}
    return fn


def roundoff_estimate(chart, omega, pts, w):
    """Per-node estimate of the float64 round-off in the weighted interior integrand.

    Fourth-order curvature quantities lose accuracy like eps * cond(g)^2 near
    coordinate singularities; the estimate multiplies that by the node's
    quadrature weight and volume factor.
    """
    g = chart.metric_values(pts, omega)
    ev = np.linalg.eigvalsh(g)
    cond = ev[:, -1] / ev[:, 0]
    return w * np.sqrt(np.linalg.det(g)) * np.finfo(float).eps * cond ** 2


def extended_mask(estimate, budget):
    """Nodes to evaluate in long double, largest estimate first, until the rest fit ``budget``."""
    mask = np.zeros(len(estimate), dtype=bool)
    if budget is None or len(estimate) == 0:
        return mask
    order = np.argsort(-estimate, kind="stable")
    remaining = estimate.sum() - np.cumsum(estimate[order])
    k = int(np.searchsorted(-remaining, -budget))
    k = min(k + 1, len(order)) if estimate.sum() > budget else 0
    mask[order[:k]] = True
    return mask


def _extended(fn):
    def run(pts):
        return {k: np.asarray(v, dtype=np.float64) for k, v in fn(pts.astype(np.longdouble)).items()}
    return run


def _evaluate_nodes(fn, pts, mask, batch, workers):
    """Evaluate ``fn`` on all nodes, long double where ``mask``; results in node order."""
    if not mask.any():
        return map_batches(fn, pts, batch, workers)
    parts = {}
    if (~mask).any():
        parts[False] = map_batches(fn, pts[~mask], batch, workers)
    parts[True] = map_batches(_extended(fn), pts[mask], EXTENDED_BATCH, workers)
    keys = next(iter(parts.values())).keys()
    out = {}
    for k in keys:
        v = np.empty(len(pts))
        for flag, res in parts.items():
            v[mask if flag else ~mask] = res[k]
        out[k] = v
    return out


def _strata(scene):
    """(chart, omega, label, region, evaluator factory) for every stratum.

    Corners come first so a degenerate corner angle is reported before the
    face and interior evaluations meet the same near-singular metric.
    """
    out = []
    for chart in scene.charts:
        omega = scene.omega_for(chart)
        out.append((chart, omega, "interior", interior_region(),
                    lambda th, c=chart, o=omega: _interior_eval(c, o)))
        for a, s, role in chart.boundary_faces():
            out.append((chart, omega, role, face_region(a, s),
                        lambda th, c=chart, o=omega, a=a, s=s: _face_eval(c, a, s, o)))
        for m, n in chart.corners():
            out.append((chart, omega, "corner", corner_region(m, n),
                        lambda th, c=chart, o=omega, m=m, n=n: _corner_eval(c, m, n, o, th)))
    return sorted(out, key=lambda s: s[2] != "corner")


def assemble(scene, order=16, theta_order=32, workers=1, batch=BATCH, timings=None,
             roundoff_budget=None, diagnostics=None):
    """Per-piece integrals for both paths plus identity residuals at the nodes.

    With ``roundoff_budget`` the interior nodes with the largest estimated
    float64 round-off are evaluated in long double until the estimate for
    the remaining nodes is below the budget.  A ``diagnostics`` dict receives
    ``interior_roundoff``, the estimate left after that promotion.
    """
    ld_ratio = float(np.finfo(np.longdouble).eps / np.finfo(np.float64).eps)
    residual = 0.0
    pieces_a = dict.fromkeys(PIECES, 0.0)
    pieces_b = dict.fromkeys(PIECES, 0.0)
    parts_a = {p: [] for p in PIECES}
    parts_b = {p: [] for p in PIECES}
    ident = {"interior: pfaffian - integrand": [],
             "boundary: aw - (T+L+lapH/3+muR/12)/4pi^2": [],
             "corner: closed - theta quadrature": [],
             "corner: closed - corner integrand": []}
    nodes = dict.fromkeys(PIECES, 0)
    nodes["interior_extended"] = 0
    for chart, omega, label, region, factory in _strata(scene):
        t0 = time.perf_counter()
        const = chart.constant_axes(omega)
        pts, w = region_nodes(chart, region, order, const)
        mask = np.zeros(len(w), dtype=bool)
        if label == "interior" and (roundoff_budget is not None or diagnostics is not None):
            est = roundoff_estimate(chart, omega, pts, w)
            mask = extended_mask(est, roundoff_budget)
            nodes["interior_extended"] += int(mask.sum())
            residual += math.fsum(est[~mask]) + ld_ratio * math.fsum(est[mask])
        out = _evaluate_nodes(factory(theta_order), pts, mask, batch, workers)
        parts_a[label].append(weighted_sum(out["a"], w))
        parts_b[label].append(weighted_sum(out["b"], w))
        nodes[label] += len(w)
        if label == "interior":
            ident["interior: pfaffian - integrand"].append(out["id"])
        elif label == "corner":
            ident["corner: closed - theta quadrature"].append(out["id"])
            ident["corner: closed - corner integrand"].append(out["id2"])
        else:
            ident["boundary: aw - (T+L+lapH/3+muR/12)/4pi^2"].append(out["id"])
        if timings is not None:
            timings[label] = timings.get(label, 0.0) + time.perf_counter() - t0
    for p in PIECES:
        pieces_a[p] = math.fsum(parts_a[p])
        pieces_b[p] = math.fsum(parts_b[p])
    if diagnostics is not None:
        diagnostics["interior_roundoff"] = residual
    identities = {k: _stats(np.concatenate(v) if v else []) for k, v in ident.items()}
    return pieces_a, pieces_b, identities, nodes


def verify_gauss_bonnet(scene, order=16, theta_order=32, tol=1e-3, estimate_error=True,
                        workers=1, timings=False, roundoff_budget="auto"):
    """Assemble both paths and compare with ``4 pi^2 chi``.

    With ``estimate_error`` the run is repeated at half the order and the
    change in each total is reported as that path's error estimate.  The
    default round-off budget is ``1e-6 * tol``; ``None`` keeps every node in
    float64.
    """
    if roundoff_budget == "auto":
        roundoff_budget = BUDGET_PER_TOL * tol
    times = {} if timings else None
    t0 = time.perf_counter()
    pa, pb, identities, nodes = assemble(scene, order, theta_order, workers, timings=times,
                                         roundoff_budget=roundoff_budget)
    total_a, total_b = math.fsum(pa.values()), math.fsum(pb.values())
    target = FOUR_PI_SQ * scene.euler_characteristic
    est_a = est_b = None
    if estimate_error:
        half = max(1, order // 2)
        qa, qb, _, _ = assemble(scene, half, theta_order, workers,
                                roundoff_budget=roundoff_budget)
        est_a = abs(total_a - math.fsum(qa.values()))
        est_b = abs(total_b - math.fsum(qb.values()))
    if times is not None:
        times["total"] = time.perf_counter() - t0
    omega = scene.omega if scene.omega is not None else _chart_omega(scene)
    return Report(
        scene=scene.name, chi=scene.euler_characteristic, quad_order=order,
        theta_order=theta_order, target=target, pieces_a=pa, pieces_b=pb,
        total_a=total_a, total_b=total_b, defect_a=abs(total_a - target),
        defect_b=abs(total_b - target), path_difference=abs(total_a - total_b),
        error_estimate_a=est_a, error_estimate_b=est_b, identities=identities,
        nodes=nodes, omega=None if omega is None else format_expression(omega), tol=tol,
        timings=times)


def _chart_omega(scene):
    for c in scene.charts:
        if c.omega is not None:
            return c.omega
    return None


# sampling -------------------------------------------------------------------

def sample_points(chart, region, count, seed=0, margin=SAMPLE_MARGIN):
    """Deterministic low-discrepancy points in ``region``, kept off the box edges."""
    if count <= 0:
        return np.empty((0, 4))
    fixed = dict(region.fixed)
    free = [a for a in range(4) if a not in fixed]
    u = qmc.Halton(d=len(free), scramble=True, seed=seed).random(count)
    pts = np.empty((count, 4))
    for j, a in enumerate(free):
        lo, hi = chart.box[a]
        pts[:, a] = lo + (hi - lo) * (margin + (1 - 2 * margin) * u[:, j])
    for a, side in fixed.items():
        pts[:, a] = chart.face_value(a, side)
    return pts


def _split(regions, count, seed):
    """Spread ``count`` samples over regions; returns [(chart, omega, region, pts)]."""
    out = []
    if not regions:
        return out
    for i, (chart, omega, region) in enumerate(regions):
        k = count // len(regions) + (1 if i < count % len(regions) else 0)
        out.append((chart, omega, region, sample_points(chart, region, k, seed + 7919 * i)))
    return out


def _regions_by_kind(scene):
    kinds = {"interior": [], "boundary": [], "corner": []}
    for chart, omega, label, region, _ in _strata(scene):
        key = "boundary" if label in ("M", "N") else label
        kinds[key].append((chart, omega, region))
    return kinds


def _jet(expr, pts, degree):
    xs = [jets.Jet.variable(i, pts[:, i], 4, degree) for i in range(4)]
    v = evaluate(expr, xs)
    if not isinstance(v, jets.Jet):
        v = jets.Jet.constant(np.broadcast_to(np.asarray(v, dtype=float), (len(pts),)), 4, degree)
    return v


def identity_suite(scene, samples=100, seed=0, theta_order=32):
    """Pointwise identities at ``samples`` deterministic points per stratum kind."""
    kinds = _regions_by_kind(scene)
    res = {"pfaffian = interior integrand": [],
           "aw boundary = boundary integrand": [],
           "aw boundary closed = raw contraction": [],
           "aw corner closed = theta quadrature": [],
           "aw corner closed = corner integrand": []}
    from .boundary import aw_boundary_raw, aw_boundary_closed
    for chart, omega, region, pts in _split(kinds["interior"], samples, seed):
        if len(pts):
            ic = interior_curvature(chart.metric_jet(pts, 4, omega))
            res["pfaffian = interior integrand"].append(ic.psi_density - ic.integrand)
    for chart, omega, region, pts in _split(kinds["boundary"], samples, seed + 1):
        if len(pts):
            (a, s), = region.fixed
            bf = boundary_frame(chart, a, s, pts, omega)
            closed = aw_boundary_closed(bf)
            res["aw boundary = boundary integrand"].append(closed - boundary_integrand(bf))
            res["aw boundary closed = raw contraction"].append(closed - aw_boundary_raw(bf))
    for chart, omega, region, pts in _split(kinds["corner"], samples, seed + 2):
        if len(pts):
            m, n = region.fixed
            cf = corner_frame(chart, m, n, pts, omega)
            closed = aw_corner_closed(cf)
            res["aw corner closed = theta quadrature"].append(
                closed - aw_corner_quadrature(cf, theta_order))
            res["aw corner closed = corner integrand"].append(closed - corner_integrand(cf))
    return {k: _stats(np.concatenate(v) if v else []) for k, v in res.items()}


def conformal_law_check(scene, omega, seed=0, samples=100, test_field=DEFAULT_TEST_FIELD):
    """Residuals of the conformal transformation laws under g -> exp(2 omega) g.

    Both metrics are run through the full pipeline at the same points.
    """
    if isinstance(omega, str):
        omega = parse_expression(omega)
    if isinstance(test_field, str):
        test_field = parse_expression(test_field)
    tilde = scene.compose_omega(omega)
    kinds = _regions_by_kind(scene)
    res = {"interior: |W~|^2 - e^-4w |W|^2": [],
           "boundary: e^3w T~ - T - P3 w": [],
           "boundary: e^3w L~ - L": [],
           "boundary: P3~ u - e^-3w P3 u": [],
           "corner: G~ - e^-2w G": [],
           "corner: e^2w U~ - U - P2b w": [],
           "corner: P2b~ u - e^-2w P2b u": [],
           "corner: theta0~ - theta0": []}
    tcharts = {c.name: c for c in tilde.charts}

    for chart, base, region, pts in _split(kinds["interior"], samples, seed):
        if not len(pts):
            continue
        tc = tcharts[chart.name]
        ic = interior_curvature(chart.metric_jet(pts, 4, base))
        it = interior_curvature(tc.metric_jet(pts, 4, tilde.omega_for(tc)))
        w = _jet(omega, pts, 0).value
        res["interior: |W~|^2 - e^-4w |W|^2"].append(it.W2 - np.exp(-4 * w) * ic.W2)

    for chart, base, region, pts in _split(kinds["boundary"], samples, seed + 1):
        if not len(pts):
            continue
        tc = tcharts[chart.name]
        (a, s), = region.fixed
        bf = boundary_frame(chart, a, s, pts, base)
        bt = boundary_frame(tc, a, s, pts, tilde.omega_for(tc))
        w = _jet(omega, pts, 3)
        u = _jet(test_field, pts, 3)
        e3 = np.exp(3 * w.value)
        res["boundary: e^3w T~ - T - P3 w"].append(
            e3 * t_curvature(bt) - t_curvature(bf) - p3_apply(bf, w))
        res["boundary: e^3w L~ - L"].append(e3 * l_curvature(bt) - l_curvature(bf))
        res["boundary: P3~ u - e^-3w P3 u"].append(p3_apply(bt, u) - p3_apply(bf, u) / e3)

    for chart, base, region, pts in _split(kinds["corner"], samples, seed + 2):
        if not len(pts):
            continue
        tc = tcharts[chart.name]
        m, n = region.fixed
        cf = corner_frame(chart, m, n, pts, base)
        ct = corner_frame(tc, m, n, pts, tilde.omega_for(tc))
        w = _jet(omega, pts, 3)
        u = _jet(test_field, pts, 3)
        e2 = np.exp(2 * w.value)
        res["corner: G~ - e^-2w G"].append(g_curvature(ct) - g_curvature(cf) / e2)
        res["corner: e^2w U~ - U - P2b w"].append(
            e2 * u_curvature(ct) - u_curvature(cf) - p2b_apply(cf, w))
        res["corner: P2b~ u - e^-2w P2b u"].append(p2b_apply(ct, u) - p2b_apply(cf, u) / e2)
        res["corner: theta0~ - theta0"].append(ct.theta0 - cf.theta0)
    return {k: _stats(np.concatenate(v) if v else []) for k, v in res.items()}


LAW_TOLERANCES = {
    "interior: |W~|^2 - e^-4w |W|^2": 1e-9,
    "boundary: e^3w T~ - T - P3 w": 1e-8,
    "boundary: e^3w L~ - L": 1e-8,
    "boundary: P3~ u - e^-3w P3 u": 1e-8,
    "corner: G~ - e^-2w G": 1e-9,
    "corner: e^2w U~ - U - P2b w": 1e-8,
    "corner: P2b~ u - e^-2w P2b u": 1e-8,
    "corner: theta0~ - theta0": 1e-12,
}


def convergence_sweep(scene, orders, theta_order=32, floor=None, workers=1,
                      roundoff_budget="auto"):
    """Totals and defects per order; flags growth of a defect above a round-off floor.

    Each row's floor is the larger of ``floor`` and ten times the estimated
    interior round-off left after long double promotion, so a coordinate
    singularity whose round-off outgrows the fixed floor is not reported as
    divergence.  The default round-off budget is a tenth of ``floor``.
    """
    orders = [int(o) for o in orders]
    if len(orders) < 2:
        raise ValueError("a sweep needs at least two orders")
    target = FOUR_PI_SQ * scene.euler_characteristic
    if floor is None:
        floor = 1e-11 * max(1.0, abs(target))
    if roundoff_budget == "auto":
        roundoff_budget = 0.1 * floor
    rows = []
    for o in orders:
        diag = {}
        pa, pb, _, _ = assemble(scene, o, theta_order, workers, roundoff_budget=roundoff_budget,
                                diagnostics=diag)
        ta, tb = math.fsum(pa.values()), math.fsum(pb.values())
        rows.append({"order": o, "total_a": ta, "total_b": tb,
                     "defect_a": abs(ta - target), "defect_b": abs(tb - target),
                     "floor": max(floor, ROUNDOFF_SAFETY * diag["interior_roundoff"])})
    flags = []
    for prev, cur in zip(rows, rows[1:]):
        for key in ("defect_a", "defect_b"):
            if cur[key] > prev[key] and cur[key] > cur["floor"]:
                flags.append(f"{key} grows from order {prev['order']} to {cur['order']}")
    return {"scene": scene.name, "target": target, "floor": floor, "rows": rows,
            "monotone": not flags, "flags": flags}


def format_sweep(sweep):
    lines = [f"scene   {sweep['scene']}", f"target  {_fmt(sweep['target'])}", "",
             f"{'order':>5s} {'total A':>22s} {'defect A':>22s} {'total B':>22s} "
             f"{'defect B':>22s} {'floor':>10s}"]
    for r in sweep["rows"]:
        lines.append(f"{r['order']:5d} {_fmt(r['total_a']):>22s} {_fmt(r['defect_a']):>22s} "
                     f"{_fmt(r['total_b']):>22s} {_fmt(r['defect_b']):>22s} "
                     f"{r['floor']:10.2e}")
    lines.append("")
    lines.append("monotone beyond round-off floor: " + ("yes" if sweep["monotone"] else "no"))
    lines += ["  " + f for f in sweep["flags"]]
    return "\n".join(lines) + "\n"


def format_laws(laws, tolerances=LAW_TOLERANCES):
    lines = [f"{'law':36s} {'max':>12s} {'mean':>12s} {'tol':>8s}  status"]
    for k, st in laws.items():
        tol = tolerances.get(k)
        ok = st["count"] == 0 or tol is None or st["max"] < tol
        lines.append(f"{k:36s} {st['max']:12.3e} {st['mean']:12.3e} "
                     f"{'-' if tol is None else f'{tol:.0e}':>8s}  {'ok' if ok else 'FAIL'}"
                     f"  (n={st['count']})")
    return "\n".join(lines) + "\n"


def laws_passed(laws, tolerances=LAW_TOLERANCES):
    return all(st["count"] == 0 or st["max"] < tolerances.get(k, math.inf)
               for k, st in laws.items())


# point dumps ----------------------------------------------------------------

def point_report(scene, point, chart=None, face=None, corner=False, theta_order=32):
    """Every pointwise quantity at one point, as a flat dict of floats/lists."""
    ch = _pick_chart(scene, chart)
    omega = scene.omega_for(ch)
    pts = np.asarray(point, dtype=float).reshape(1, 4)
    out = {"chart": ch.name, "point": pts[0].tolist()}
    if corner:
        m, n = _corner_at(ch, pts[0])
        cf = corner_frame(ch, m, n, pts, omega)
        out.update({k: float(v[0]) for k, v in cf.as_dict().items()})
        out.update({"U": float(u_curvature(cf)[0]), "G": float(g_curvature(cf)[0]),
                    "aw_corner_closed": float(aw_corner_closed(cf)[0]),
                    "aw_corner_quadrature": float(aw_corner_quadrature(cf, theta_order)[0]),
                    "corner_integrand": float(corner_integrand(cf)[0]),
                    "muM": cf.muM[0].tolist(), "muN": cf.muN[0].tolist(),
                    "nuM": cf.nuM[0].tolist(), "nuN": cf.nuN[0].tolist(),
                    "IIM": cf.IIM[0].tolist(), "IIN": cf.IIN[0].tolist()})
        return out
    if face is not None:
        a, s = face
        bf = boundary_frame(ch, a, s, pts, omega)
        out.update({k: float(v[0]) for k, v in bf.as_dict().items()})
        out.update({"role": bf.role, "T": float(t_curvature(bf)[0]),
                    "Lcal": float(l_curvature(bf)[0]),
                    "aw_boundary": float(aw_boundary_density(bf)[0]),
                    "boundary_integrand": float(boundary_integrand(bf)[0]),
                    "mu": bf.mu[0].tolist(), "L": bf.L[0].tolist(), "h": bf.h[0].tolist()})
        return out
    ic = interior_curvature(ch.metric_jet(pts, 4, omega))
    out.update({k: float(v[0]) for k, v in ic.as_dict().items()})
    out.update({"g": ic.g[0].tolist(), "Ric": ic.Ric[0].tolist()})
    return out


def _pick_chart(scene, name):
    if name is None:
        return scene.charts[0]
    for c in scene.charts:
        if c.name == name:
            return c
    from .errors import SceneError
    raise SceneError(f"no chart named {name!r}")


def _corner_at(chart, p, tol=1e-12):
    for m, n in chart.corners():
        if all(abs(p[a] - chart.face_value(a, s)) <= tol * max(1.0, abs(p[a]))
               for a, s in (m, n)):
            return m, n
    from .errors import SceneError
    raise SceneError("point does not lie on an M-N corner of the chart")
