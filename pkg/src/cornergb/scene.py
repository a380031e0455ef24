"""Scene files: charted box domains with metric expressions and face roles.

A scene file is line oriented::

    name = flat_bidisk
    chi = 1
    omega = 0.1*x1*cos(x2)          # optional, applies to every chart

    [chart polar]
    box = [0,1]x[0,2*pi]x[0,1]x[0,2*pi]
    g_11 = 1
    g_22 = x1^2
    ...                              # g_ij with i <= j; off-diagonal defaults to 0
    face x1=hi : M
    face x3=hi : N
    face x1=lo : glue
    face x3=lo : glue
    periodic x2
    periodic x4
    singular x1=lo
    omega = ...                      # optional per-chart override

Everything after ``#`` on a line is a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import jets
from .errors import NumericalError, SceneError
from .expr import (BinOp, Expr, ExpressionError, Num, evaluate, format_expression,
                   is_constant, parse_expression, variables)

ROLES = ("M", "N", "glue", "periodic")
ROLE_ALIASES = {"interior-glue": "glue"}
SIDES = ("lo", "hi")
METRIC_KEYS = tuple((i, j) for i in range(4) for j in range(i, 4))
ZERO = Num(0.0)


def face_index(axis, side):
    return 2 * axis + (0 if side == "lo" else 1)


def inward_sign(side):
    """+1 if the inward direction is increasing x_axis."""
    return 1.0 if side == "lo" else -1.0


@dataclass(frozen=True)
class Chart:
    name: str
    box: tuple                       # ((lo, hi),) * 4
    metric: tuple                    # 10 expressions, METRIC_KEYS order
    faces: tuple                     # 8 roles, face_index order
    singular: tuple = ()             # sorted ((axis, side), ...)
    omega: Optional[Expr] = None

    def role(self, axis, side):
        return self.faces[face_index(axis, side)]

    def periodic(self, axis):
        return self.faces[face_index(axis, "lo")] == "periodic"

    def face_value(self, axis, side):
        return self.box[axis][0 if side == "lo" else 1]

    def boundary_faces(self):
        """(axis, side, role) for every M or N face."""
        return [(a, s, self.role(a, s)) for a in range(4) for s in SIDES
                if self.role(a, s) in ("M", "N")]

    def corners(self):
        """((axis_M, side_M), (axis_N, side_N)) for every M/N meeting."""
        out = []
        for a, sa, ra in self.boundary_faces():
            for b, sb, rb in self.boundary_faces():
                if ra == "M" and rb == "N" and a != b:
                    out.append(((a, sa), (b, sb)))
        return out

    def constant_axes(self, omega=None):
        """Axes that no metric component (nor ``omega``) depends on."""
        used = set()
        for e in self.metric:
            used |= variables(e)
        if omega is not None:
            used |= variables(omega)
        return tuple(a for a in range(4) if a not in used)

    # metric evaluation ------------------------------------------------

    def metric_values(self, points, omega=None):
        """Plain metric matrices at ``points`` (N, 4)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        xs = [points[:, i] for i in range(4)]
        g = np.empty((len(points), 4, 4))
        for (i, j), e in zip(METRIC_KEYS, self.metric):
            v = np.broadcast_to(np.asarray(evaluate(e, xs), dtype=float), (len(points),))
            g[:, i, j] = v
            g[:, j, i] = v
        if omega is not None:
            w = np.broadcast_to(np.asarray(evaluate(omega, xs), dtype=float), (len(points),))
            g *= np.exp(2.0 * w)[:, None, None]
        return g

    def metric_jet(self, points, degree=4, omega=None):
        """Metric components as a Jet of shape (N, 4, 4) about each point."""
        points = np.atleast_2d(jets.as_float(points))
        n = len(points)
        xs = [jets.Jet.variable(i, points[:, i], 4, degree) for i in range(4)]
        comps = {}
        for key, e in zip(METRIC_KEYS, self.metric):
            v = evaluate(e, xs)
            if not isinstance(v, jets.Jet):
                v = jets.Jet.constant(np.broadcast_to(v, (n,)), 4, degree)
            comps[key] = v
        c = np.empty((jets.ncoef(4, degree), n, 4, 4),
                     dtype=np.result_type(points, *(v.c for v in comps.values())))
        for (i, j), v in comps.items():
            c[:, :, i, j] = v.c
            c[:, :, j, i] = v.c
        g = jets.Jet(c, 4, degree)
        if omega is not None:
            w = evaluate(omega, xs)
            if isinstance(w, jets.Jet):
                g = g * jets.exp(2.0 * w)[:, None, None]
            else:
                g = g * np.exp(2.0 * np.broadcast_to(w, (n,)))[:, None, None]
        check_positive_definite(g.value.astype(np.float64), points)
        return g


def check_positive_definite(g0, points=None):
    try:
        np.linalg.cholesky(g0)
    except np.linalg.LinAlgError:
        bad = [i for i in range(len(g0)) if np.any(np.linalg.eigvalsh(g0[i]) <= 0)]
        pts = None if points is None else np.asarray(points)[bad]
        raise NumericalError("metric is not positive definite", pts) from None


@dataclass(frozen=True)
class Scene:
    charts: tuple
    euler_characteristic: int
    omega: Optional[Expr] = None
    description: str = ""
    name: str = "scene"

    def omega_for(self, chart):
        return chart.omega if chart.omega is not None else self.omega

    def with_omega(self, omega):
        """Copy with a scene-wide conformal factor (per-chart overrides cleared)."""
        charts = tuple(replace(c, omega=None) for c in self.charts)
        return replace(self, charts=charts, omega=omega)

    def compose_omega(self, extra):
        """Copy whose working metric is exp(2*extra) times the current one."""
        charts = []
        for c in self.charts:
            base = self.omega_for(c)
            charts.append(replace(c, omega=extra if base is None else BinOp("+", base, extra)))
        return replace(self, charts=tuple(charts), omega=None)


# parsing ---------------------------------------------------------------

_FACE = re.compile(r"face\s+x([1-4])\s*=\s*(lo|hi)\s*:\s*(\S+)\s*$")
_PERIODIC = re.compile(r"periodic\s+x([1-4])\s*$")
_SINGULAR = re.compile(r"singular\s+x([1-4])\s*=\s*(lo|hi)\s*$")
_KEY = re.compile(r"([A-Za-z_][A-Za-z_0-9]*)\s*=\s*(.*)$")
_INTERVAL = re.compile(r"\[([^\[\]]*)\]")


def _err(msg, line):
    return SceneError(f"line {line}: {msg}")


def _constant(text, line, col):
    e = parse_expression(text.strip(), line, col)
    if not is_constant(e):
        raise _err("box bounds must be constant expressions", line)
    return float(evaluate(e, []))


def _parse_box(text, line, col):
    groups = list(_INTERVAL.finditer(text))
    rest = _INTERVAL.sub("#", text).replace(" ", "")
    if len(groups) != 4 or rest != "#x#x#x#":
        raise _err("box must look like [lo,hi]x[lo,hi]x[lo,hi]x[lo,hi]", line)
    box = []
    for m in groups:
        parts = m.group(1).split(",")
        if len(parts) != 2:
            raise _err("each box interval needs exactly two bounds", line)
        lo = _constant(parts[0], line, col + m.start(1))
        hi = _constant(parts[1], line, col + m.start(1) + len(parts[0]) + 1)
        if not hi > lo:
            raise _err("box interval must have lo < hi", line)
        box.append((lo, hi))
    return tuple(box)


class _ChartDraft:
    def __init__(self, name, line):
        self.name = name
        self.line = line
        self.box = None
        self.metric = {}
        self.faces = [None] * 8
        self.singular = set()
        self.omega = None

    def finish(self):
        if self.box is None:
            raise _err(f"chart {self.name!r} has no box", self.line)
        missing = [f"g_{i + 1}{i + 1}" for i in range(4) if (i, i) not in self.metric]
        if missing:
            raise _err(f"chart {self.name!r}: missing metric component {', '.join(missing)}",
                       self.line)
        for k, role in enumerate(self.faces):
            if role is None:
                raise _err(f"chart {self.name!r}: face role omitted for "
                           f"x{k // 2 + 1}={SIDES[k % 2]}", self.line)
        for axis in range(4):
            lo, hi = self.faces[2 * axis], self.faces[2 * axis + 1]
            if (lo == "periodic") != (hi == "periodic"):
                raise _err(f"chart {self.name!r}: periodic axis x{axis + 1} needs both faces "
                           "periodic", self.line)
        metric = tuple(self.metric.get(k, ZERO) for k in METRIC_KEYS)
        chart = Chart(self.name, self.box, metric,
                      tuple(self.faces), tuple(sorted(self.singular)), self.omega)
        bf = chart.boundary_faces()
        for a, _, ra in bf:
            for b, _, rb in bf:
                if a != b and ra == rb:
                    raise _err(f"chart {self.name!r}: faces of the same role {ra} meet "
                               f"(x{a + 1} and x{b + 1}); only M-N corners are supported",
                               self.line)
        return chart


def parse_scene(text, name=None):
    """Parse scene-file contents into a validated :class:`Scene`."""
    chi = None
    omega = None
    description = ""
    scene_name = name or "scene"
    charts = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        stripped = body.strip()
        if not stripped:
            continue
        col = len(body) - len(body.lstrip()) + 1
        m = re.fullmatch(r"\[\s*chart\s+([^\]\s]+)\s*\]", stripped)
        if m:
            if current is not None:
                charts.append(current.finish())
            current = _ChartDraft(m.group(1), lineno)
            continue
        if stripped.startswith("["):
            raise _err(f"unknown section {stripped!r}", lineno)
        if current is not None:
            fm = _FACE.match(stripped)
            if fm:
                axis, side, role = int(fm.group(1)) - 1, fm.group(2), fm.group(3)
                role = ROLE_ALIASES.get(role, role)
                if role not in ROLES:
                    raise _err(f"unknown face role {role!r}", lineno)
                k = face_index(axis, side)
                if current.faces[k] is not None:
                    raise _err(f"face x{axis + 1}={side} assigned twice", lineno)
                current.faces[k] = role
                continue
            pm = _PERIODIC.match(stripped)
            if pm:
                axis = int(pm.group(1)) - 1
                for side in SIDES:
                    k = face_index(axis, side)
                    if current.faces[k] not in (None, "periodic"):
                        raise _err(f"face x{axis + 1}={side} assigned twice", lineno)
                    current.faces[k] = "periodic"
                continue
            sm = _SINGULAR.match(stripped)
            if sm:
                current.singular.add((int(sm.group(1)) - 1, sm.group(2)))
                continue
        km = _KEY.match(stripped)
        if not km:
            raise _err(f"cannot parse {stripped!r}", lineno)
        key, value = km.group(1), km.group(2)
        vcol = col + km.start(2)
        if current is None:
            if key == "chi":
                try:
                    chi = int(value.strip())
                except ValueError:
                    raise _err("chi must be an integer", lineno) from None
            elif key == "omega":
                omega = parse_expression(value, lineno, vcol)
            elif key == "description":
                description = value.strip()
            elif key == "name":
                scene_name = value.strip()
            else:
                raise _err(f"unknown top-level key {key!r}", lineno)
            continue
        gm = re.fullmatch(r"g_([1-4])([1-4])", key)
        if gm:
            i, j = sorted((int(gm.group(1)) - 1, int(gm.group(2)) - 1))
            if (i, j) in current.metric:
                raise _err(f"metric component g_{i + 1}{j + 1} given twice", lineno)
            current.metric[(i, j)] = parse_expression(value, lineno, vcol)
        elif key == "box":
            current.box = _parse_box(value, lineno, vcol)
        elif key == "omega":
            current.omega = parse_expression(value, lineno, vcol)
        else:
            raise _err(f"unknown chart key {key!r}", lineno)
    if current is not None:
        charts.append(current.finish())
    if not charts:
        raise SceneError("scene has no charts")
    if chi is None:
        raise SceneError("scene does not declare chi")
    return Scene(tuple(charts), chi, omega, description, scene_name)


def format_scene(scene):
    """Render a scene in the file format; ``parse_scene`` inverts it."""
    lines = [f"name = {scene.name}", f"chi = {scene.euler_characteristic}"]
    if scene.description:
        lines.append(f"description = {scene.description}")
    if scene.omega is not None:
        lines.append(f"omega = {format_expression(scene.omega)}")
    for chart in scene.charts:
        lines.append("")
        lines.append(f"[chart {chart.name}]")
        lines.append("box = " + "x".join(f"[{lo!r},{hi!r}]" for lo, hi in chart.box))
        for (i, j), e in zip(METRIC_KEYS, chart.metric):
            lines.append(f"g_{i + 1}{j + 1} = {format_expression(e)}")
        for axis in range(4):
            if chart.periodic(axis):
                lines.append(f"periodic x{axis + 1}")
                continue
            for side in SIDES:
                lines.append(f"face x{axis + 1}={side} : {chart.role(axis, side)}")
        for axis, side in chart.singular:
            lines.append(f"singular x{axis + 1}={side}")
        if chart.omega is not None:
            lines.append(f"omega = {format_expression(chart.omega)}")
    return "\n".join(lines) + "\n"


def load_scene(path):
    from pathlib import Path
    p = Path(path)
    return parse_scene(p.read_text(), name=p.stem)


def metric_jet(chart, points, degree=4, omega=None):
    return chart.metric_jet(points, degree, omega)


__all__ = ["Chart", "Scene", "parse_scene", "format_scene", "load_scene", "metric_jet",
           "face_index", "inward_sign", "ExpressionError"]
