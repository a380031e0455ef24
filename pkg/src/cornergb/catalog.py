"""Reference scenes with hand-derived expectations.

Every expected value carries a note naming how it was obtained.  Integral
expectations use the normalization of the verification report, in which the
target total is ``4 pi^2 chi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from itertools import combinations_with_replacement

import numpy as np

from .errors import SceneError
from .expr import parse_expression
from .scene import Scene, parse_scene

PI = math.pi
FOUR_PI_SQ = 4.0 * PI ** 2


@dataclass(frozen=True)
class Expected:
    value: float
    tol: float
    note: str


@dataclass(frozen=True)
class CatalogEntry:
    """A scene plus reference values.

    ``expected`` holds integral values keyed by piece name ("interior", "M",
    "N", "corner", "total"); ``pointwise`` maps a stratum label ("M", "N",
    "corner") to expected frame quantities.  ``embedding`` lists expressions
    for Euclidean-like coordinates used to build smooth conformal factors.
    """

    name: str
    scene: Scene
    expected: dict = field(default_factory=dict)
    pointwise: dict = field(default_factory=dict)
    embedding: tuple = ()
    description: str = ""


FLAT_BIDISK = """\
name = flat_bidisk
chi = 1
description = unit bidisk in polar product coordinates (r1, t1, r2, t2)

[chart polar]
box = [0,1]x[0,2*pi]x[0,1]x[0,2*pi]
g_11 = 1
g_22 = x1^2
g_33 = 1
g_44 = x3^2
face x1=lo : glue
face x1=hi : M
periodic x2
face x3=lo : glue
face x3=hi : N
periodic x4
singular x1=lo
singular x3=lo
"""

HEMIBALL = """\
name = hemiball
chi = 1
description = upper half of the unit 4-ball in spherical coordinates (rho, psi, phi, chi)

[chart spherical]
box = [0,1]x[0,pi/2]x[0,pi]x[0,2*pi]
g_11 = 1
g_22 = x1^2
g_33 = x1^2*sin(x2)^2
g_44 = x1^2*sin(x2)^2*sin(x3)^2
face x1=lo : glue
face x1=hi : M
face x2=lo : glue
face x2=hi : N
face x3=lo : glue
face x3=hi : glue
periodic x4
singular x1=lo
singular x2=lo
singular x3=lo
singular x3=hi
"""

SHEARED_ALPHA = PI / 3.0


def _sheared_text(alpha):
    return f"""\
name = sheared_corner
chi = 2
description = round 2-sphere times a flat parallelogram with angle {alpha!r}

[chart sphere_x_parallelogram]
box = [0,pi]x[0,2*pi]x[0,1]x[0,1]
g_11 = 1
g_22 = sin(x1)^2
g_33 = 1
g_44 = 1
g_34 = {math.cos(alpha)!r}
face x1=lo : glue
face x1=hi : glue
periodic x2
face x3=lo : M
face x3=hi : M
face x4=lo : N
face x4=hi : N
singular x1=lo
singular x1=hi
"""


def flat_bidisk():
    scene = parse_scene(FLAT_BIDISK)
    expected = {
        "interior": Expected(0.0, 1e-12, "flat metric: W = 0 and Q = 0 pointwise"),
        "M": Expected(0.0, 1e-10, "hand computation: T = -2/9 and L-curvature = 2/9 cancel"),
        "N": Expected(0.0, 1e-10, "same as M by symmetry"),
        "corner": Expected(FOUR_PI_SQ, 1e-8,
                           "hand computation: U = G = 1/2 on the torus of area 4 pi^2"),
        "total": Expected(FOUR_PI_SQ, 1e-8, "4 pi^2 chi with chi = 1"),
    }
    pointwise = {
        "M": {"H": 1.0, "L0_2": 2.0 / 3.0, "L0_3": 2.0 / 9.0, "Rh": 0.0,
              "T": -2.0 / 9.0, "Lcal": 2.0 / 9.0, "aw_boundary": 0.0},
        "N": {"H": 1.0, "L0_2": 2.0 / 3.0, "L0_3": 2.0 / 9.0, "Rh": 0.0,
              "T": -2.0 / 9.0, "Lcal": 2.0 / 9.0, "aw_boundary": 0.0},
        "corner": {"theta0": PI / 2, "etaM": 1.0, "etaN": 1.0, "K": 0.0,
                   "greenM": 0.0, "greenN": 0.0, "U": 0.5, "G": 0.5,
                   "aw_corner": 1.0 / FOUR_PI_SQ},
    }
    embedding = ("x1*cos(x2)", "x1*sin(x2)", "x3*cos(x4)", "x3*sin(x4)")
    return CatalogEntry("flat_bidisk", scene, expected, pointwise, embedding,
                        "B2 x B2, corner T2, chi = 1")


def hemiball():
    scene = parse_scene(HEMIBALL)
    expected = {
        "interior": Expected(0.0, 1e-8,
                             "flat metric; the tolerance covers round-off at nodes next to "
                             "the polar axes, where cond(g) is large"),
        "M": Expected(2 * PI ** 2, 1e-4,
                      "T = 2, L-curvature = 0 on the half 3-sphere of volume pi^2"),
        "N": Expected(0.0, 1e-10, "equatorial 3-ball is flat and totally geodesic"),
        "corner": Expected(2 * PI ** 2, 1e-4, "U = pi/2, G = 0 on the unit 2-sphere of area 4 pi"),
        "total": Expected(FOUR_PI_SQ, 1e-4, "4 pi^2 chi with chi = 1"),
    }
    pointwise = {
        "M": {"H": 3.0, "L0_2": 0.0, "Rh": 6.0, "T": 2.0, "Lcal": 0.0,
              "aw_boundary": 1.0 / (2 * PI ** 2)},
        "N": {"H": 0.0, "L0_2": 0.0, "Rh": 0.0, "T": 0.0, "Lcal": 0.0, "aw_boundary": 0.0},
        "corner": {"theta0": PI / 2, "etaM": 0.0, "etaN": 2.0, "K": 1.0,
                   "greenM": 0.0, "greenN": 0.0, "U": PI / 2, "G": 0.0,
                   "aw_corner": (PI / 2) / FOUR_PI_SQ},
    }
    embedding = ("x1*sin(x2)*sin(x3)*cos(x4)", "x1*sin(x2)*sin(x3)*sin(x4)",
                 "x1*sin(x2)*cos(x3)", "x1*cos(x2)")
    return CatalogEntry("hemiball", scene, expected, pointwise, embedding,
                        "upper unit half-ball, corner S2, chi = 1")


def sheared_corner(alpha=SHEARED_ALPHA):
    if not 0.0 < alpha < PI:
        raise SceneError("shear angle must lie in (0, pi)")
    scene = parse_scene(_sheared_text(alpha))
    expected = {
        "interior": Expected(0.0, 1e-8,
                             "S2 x flat factor: the Euler form of a product with a flat "
                             "factor vanishes"),
        "M": Expected(0.0, 1e-10, "faces are S2 x segment: totally geodesic, constant R"),
        "N": Expected(0.0, 1e-10, "same as M"),
        "corner": Expected(2 * FOUR_PI_SQ, 1e-8,
                           "U = (pi - theta0) K with K = 1 on four unit spheres; the four "
                           "angles sum to 2 pi"),
        "total": Expected(2 * FOUR_PI_SQ, 1e-8, "4 pi^2 chi with chi = 2"),
    }
    pointwise = {
        "M": {"H": 0.0, "L0_2": 0.0, "Rh": 2.0, "T": 0.0, "Lcal": 0.0},
        "N": {"H": 0.0, "L0_2": 0.0, "Rh": 2.0, "T": 0.0, "Lcal": 0.0},
        "corner": {"K": 1.0, "etaM": 0.0, "etaN": 0.0, "G": 0.0,
                   "greenM": 0.0, "greenN": 0.0},
    }
    ca, sa = math.cos(alpha), math.sin(alpha)
    embedding = ("sin(x1)*cos(x2)", "sin(x1)*sin(x2)", "cos(x1)",
                 f"0.5*(x3 + {ca!r}*x4)", f"0.5*{sa!r}*x4")
    return CatalogEntry("sheared_corner", scene, expected, pointwise, embedding,
                        f"S2 x parallelogram (angle {alpha:.6g}), four corners, chi = 2")


BUILDERS = {"flat_bidisk": flat_bidisk, "hemiball": hemiball, "sheared_corner": sheared_corner}


def catalog_names():
    return tuple(BUILDERS)


def get(name):
    try:
        return BUILDERS[name]()
    except KeyError:
        raise SceneError(f"unknown catalog scene {name!r}; available: "
                         f"{', '.join(BUILDERS)}") from None


def random_omega(entry, seed, amplitude=0.05, max_degree=2):
    """Seeded polynomial of degree 1..max_degree in the entry's embedding coordinates.

    Coefficients are drawn from a standard normal and rescaled so that their
    absolute values sum to ``amplitude``.
    """
    if not entry.embedding:
        raise SceneError(f"catalog entry {entry.name!r} has no embedding for random omega")
    rng = np.random.default_rng(seed)
    coords = [f"({c})" for c in entry.embedding]
    monos = []
    for d in range(1, max_degree + 1):
        monos.extend(combinations_with_replacement(range(len(coords)), d))
    coef = rng.standard_normal(len(monos))
    coef *= amplitude / np.abs(coef).sum()
    terms = [f"({float(c)!r})*" + "*".join(coords[i] for i in m) for c, m in zip(coef, monos)]
    return parse_expression(" + ".join(terms))


def conformal_variant(entry, omega=None, amplitude=0.05, seed=0):
    """Copy of ``entry`` with conformal factor ``omega`` (text, tree, or seeded random).

    Per-piece expectations are dropped; the total is conformally invariant.
    """
    if omega is None:
        omega = random_omega(entry, seed, amplitude)
    elif isinstance(omega, str):
        omega = parse_expression(omega)
    _check_periodic(entry.scene, omega)
    scene = entry.scene.compose_omega(omega)
    scene = replace(scene, name=f"{entry.name}~conformal")
    expected = {"total": entry.expected["total"]}
    return CatalogEntry(scene.name, scene, expected, {}, entry.embedding,
                        entry.description + ", conformally rescaled")


def _check_periodic(scene, omega, samples=7):
    """Reject omega that does not match across the ends of a periodic axis."""
    from .expr import evaluate
    rng = np.random.default_rng(12345)
    for chart in scene.charts:
        for a in range(4):
            if not chart.periodic(a):
                continue
            pts = np.array([[rng.uniform(lo, hi) for lo, hi in chart.box] for _ in range(samples)])
            lo_pts, hi_pts = pts.copy(), pts.copy()
            lo_pts[:, a] = chart.box[a][0]
            hi_pts[:, a] = chart.box[a][1]
            vlo = evaluate(omega, [lo_pts[:, i] for i in range(4)])
            vhi = evaluate(omega, [hi_pts[:, i] for i in range(4)])
            if np.max(np.abs(np.asarray(vlo) - np.asarray(vhi))) > 1e-9:
                raise SceneError(f"omega is not periodic in x{a + 1} on chart {chart.name!r}")
