"""Metric quantities, Gauss map degree, total curvature, and boundary geometry.

Quantitative checks on the circular surfaces: the explicit conformal
factor, line containment with its scalar factor, the ray asymptotics of
the vertical parameter lines, and the total curvature of the boundary of
a half-strip image.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .analytic import NumericalError, _gl_nodes, require_finite
from .bjorling import SurfaceEvaluator, bent_helicoid_closed, circle_dphi


def conformal_factor(a: float, x, y):
    """lambda(x,y) = cosh(y) cosh(a y) - sin(a x) sinh(y); equals |F_x| = |F_y|."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.cosh(y) * np.cosh(a * y) - np.sin(a * x) * np.sinh(y)


def tangent_x0(a: float, y):
    """The tangent of y -> F(0, y): (sinh y, sinh y sinh(a y), -cosh(a y))."""
    y = np.asarray(y, dtype=float)
    return np.stack([np.sinh(y), np.sinh(y) * np.sinh(a * y), -np.cosh(a * y)], axis=-1)


# ---------------------------------------------------------------------------
# Pointwise curvature data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricSample:
    z: complex
    lam: float
    normal: np.ndarray
    mean_curv: float
    gauss_curv: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("conformal factor must be positive")
        if abs(np.linalg.norm(self.normal) - 1.0) > 1e-10:
            raise ValueError("normal must be a unit vector")


def curvature_sample(surface: SurfaceEvaluator, z, fd_step: float = 1e-4) -> MetricSample:
    """First fundamental form, normal, and curvatures at one point.

    The second fundamental form uses central differences of the exact first
    derivatives with the given step.
    """
    z = complex(z)
    require_finite(z)
    fx, fy = surface.first_derivatives(z)
    E = float(fx @ fx)
    Ff = float(fx @ fy)
    G = float(fy @ fy)
    lam = np.sqrt(0.5 * (E + G))
    if lam < 1e-12:
        raise NumericalError(f"degenerate metric at z = {z}: lambda = {lam:.3g}")
    nrm = np.cross(fx, fy)
    nrm = nrm / np.linalg.norm(nrm)

    h = fd_step
    fxp, fyp = surface.first_derivatives(z + h)
    fxm, fym = surface.first_derivatives(z - h)
    fxq, _ = surface.first_derivatives(z + 1j * h)
    fxr, _ = surface.first_derivatives(z - 1j * h)
    fxx = (fxp - fxm) / (2 * h)
    fxy = (fxq - fxr) / (2 * h)
    fyy = -fxx  # harmonic conformal immersion
    _ = (fyp, fym)

    e = float(nrm @ fxx)
    f = float(nrm @ fxy)
    g = float(nrm @ fyy)
    den = E * G - Ff * Ff
    mean = (e * G - 2 * f * Ff + g * E) / (2 * den)
    gauss = (e * g - f * f) / den
    return MetricSample(z, float(lam), nrm, float(mean), float(gauss))


def second_fundamental_norm(surface: SurfaceEvaluator, z) -> np.ndarray:
    """|A| from the exact second derivatives; broadcasts over arrays of z."""
    z = np.asarray(z, dtype=complex)
    fx, fy = surface.first_derivatives(z)
    lam2 = np.einsum("...i,...i->...", fx, fx)
    nrm = np.cross(fx, fy)
    nrm = nrm / np.linalg.norm(nrm, axis=-1, keepdims=True)
    fxx, fxy = surface.second_derivatives(z)
    e = np.einsum("...i,...i->...", nrm, fxx)
    f = np.einsum("...i,...i->...", nrm, fxy)
    return np.sqrt(2.0 * (e * e + f * f)) / lam2


# ---------------------------------------------------------------------------
# Total curvature of the integer-spin family
# ---------------------------------------------------------------------------

class TotalCurvature(NamedTuple):
    exact: float
    numeric: float
    truncation: float


def gauss_map_degree(n: int, radius: float = 2.0, panels: int = 0) -> int:
    """Degree of the Gauss map by the argument principle.

    Winds the numerator polynomial -w(w^n + i) of G around a circle that
    encloses all of its zeros; the quadrature of N'/N must come out an
    integer to 1e-6, otherwise the contour ran too close to a root.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if panels <= 0:
        panels = 16 * (n + 2)
    nodes, weights = _gl_nodes(16)
    edges = np.linspace(0.0, 2.0 * np.pi, panels + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    halves = 0.5 * (edges[1:] - edges[:-1])
    th = mids[:, None] + halves[:, None] * nodes[None, :]
    w = radius * np.exp(1j * th)
    wn = w ** n
    numer = -w * (wn + 1j)
    dnumer = -((n + 1) * wn + 1j)
    vals = dnumer / numer * 1j * w
    total = np.einsum("s,q,sq->", halves, weights, vals)
    winding = (total / (2j * np.pi)).real
    nearest = round(winding)
    if abs(winding - nearest) > 1e-6:
        raise NumericalError(f"argument-principle winding {winding} is not an integer; "
                             "the contour ran too close to a zero of the numerator")
    return int(nearest)


def total_curvature(n: int, resolution: int = 400, r_inner: float = 1e-3,
                    r_outer: float = 1e3) -> TotalCurvature:
    """Exact total curvature -4*pi*(n+1) and its mesh integral.

    exact comes from the argument-principle degree; numeric integrates the
    squared spherical derivative of G over an exponentially graded annulus
    (midpoint rule in log-polar coordinates) with a truncation estimate
    for the two ends.
    """
    deg = gauss_map_degree(n)
    exact = -4.0 * np.pi * deg

    lo, hi = np.log(r_inner), np.log(r_outer)
    rho = lo + (hi - lo) * (np.arange(resolution) + 0.5) / resolution
    th = 2.0 * np.pi * (np.arange(resolution) + 0.5) / resolution
    Rho, Th = np.meshgrid(rho, th, indexing="ij")
    w = np.exp(Rho + 1j * Th)
    wn = w ** n
    numer = -w * (wn + 1j)
    denom = 1j * wn + 1.0
    dnumer = -((n + 1) * wn + 1j)
    ddenom = 1j * n * wn / w
    sph = 2.0 * np.abs(dnumer * denom - numer * ddenom) / (np.abs(numer) ** 2 + np.abs(denom) ** 2)
    integrand = sph ** 2 * np.exp(2.0 * Rho)
    area_el = (hi - lo) / resolution * (2.0 * np.pi / resolution)
    numeric = -float(integrand.sum() * area_el)
    # near 0 and infinity G behaves like a rotation of w and 1/w: sph -> 2
    truncation = 4.0 * np.pi * (r_inner ** 2 + r_outer ** -2)
    return TotalCurvature(exact, numeric, truncation)


# ---------------------------------------------------------------------------
# Straight lines on the surface
# ---------------------------------------------------------------------------

class LineContainment(NamedTuple):
    line_residual: float
    scalar_residual: float


def line_scalar_factor(a: float, k: int, t):
    """The signed multiple of (cos t_k, sin t_k, 0) along the vertical line x = t_k."""
    t = np.asarray(t, dtype=float)
    sgn = (-1.0) ** k
    return (sgn * np.cosh(a * t) * np.sinh(t)
            + np.cosh(t) * (a * a - sgn * np.sinh(a * t) * a - 1.0)) / (a * a - 1.0)


def line_containment_check(a: float, k: int, t_samples) -> LineContainment:
    """Distance of F(t_k + t i) from the line s (cos t_k, sin t_k, 0).

    Also checks the explicit scalar factor against the computed component;
    t_k = (2k+1) pi / (2a).
    """
    if a <= 1:
        raise ValueError("a must exceed 1")
    t = np.asarray(t_samples, dtype=float)
    tk = (2 * k + 1) * np.pi / (2 * a)
    u = np.array([np.cos(tk), np.sin(tk), 0.0])
    pts = bent_helicoid_closed(a, tk + 1j * t)
    comp = pts @ u
    off = pts - comp[:, None] * u
    line_res = float(np.max(np.linalg.norm(off, axis=-1)))
    scalar_res = float(np.max(np.abs(comp - line_scalar_factor(a, k, t))))
    return LineContainment(line_res, scalar_res)


# ---------------------------------------------------------------------------
# Ray asymptotics of the vertical parameter lines
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RayAsymptotics:
    a: float
    x: float
    T_list: np.ndarray
    scaled_plus: np.ndarray       # e^{-(a+1)T} F(x + Ti), one row per T
    scaled_minus: np.ndarray      # e^{-(a+1)T} F(x - Ti)
    limit_plus: np.ndarray
    extrapolated_plus: np.ndarray
    extrapolated_minus: np.ndarray
    residual_plus: float
    minus_constant_measured: float
    minus_residual_a_plus_1: float
    minus_residual_a_minus_1: float
    decay_rate: float


def _eliminate_exponentials(T, vals, kmax):
    # Sequential elimination of e^{-kT} terms, k = 1..kmax, on a uniform T grid.
    dT = T[1] - T[0]
    cur = vals.copy()
    for k in range(1, kmax + 1):
        q = np.exp(-k * dT)
        cur = (cur[1:] - q * cur[:-1]) / (1.0 - q)
    return cur[-1]


def asymptotic_ray_check(a: float, x: float, T_list) -> RayAsymptotics:
    """Scaled points along the vertical line x + Ti and their limits.

    The +infinity limit is (1/(4(a+1))) (-sin((a+1)x), cos((a+1)x), 0); for
    -infinity the constant is measured and compared against both 1/(4(a+1))
    and 1/(4(a-1)) candidates.
    """
    T = np.asarray(T_list, dtype=float)
    if T.ndim != 1 or len(T) < 4:
        raise ValueError("need an increasing list of at least 4 T values")
    if np.any(np.diff(T) <= 0):
        raise ValueError("T_list must be increasing")
    if (a + 1) * T[-1] > 300.0:
        raise ValueError("largest T would overflow e^{(a+1)T}")
    scale = np.exp(-(a + 1) * T)
    plus = scale[:, None] * bent_helicoid_closed(a, x + 1j * T)
    minus = scale[:, None] * bent_helicoid_closed(a, x - 1j * T)

    uniform = np.allclose(np.diff(T), T[1] - T[0], rtol=1e-9)
    kmax = min(6, len(T) - 2)
    if uniform and kmax >= 1:
        ext_plus = _eliminate_exponentials(T, plus, kmax)
        ext_minus = _eliminate_exponentials(T, minus, kmax)
    else:
        ext_plus, ext_minus = plus[-1], minus[-1]

    limit_plus = np.array([-np.sin((a + 1) * x), np.cos((a + 1) * x), 0.0]) / (4 * (a + 1))
    direction_minus = np.array([np.sin((a + 1) * x), -np.cos((a + 1) * x), 0.0])
    measured = float(ext_minus @ direction_minus)
    res_p1 = float(np.max(np.abs(ext_minus - direction_minus / (4 * (a + 1)))))
    res_m1 = float(np.max(np.abs(ext_minus - direction_minus / (4 * (a - 1)))))

    errs = np.linalg.norm(plus - limit_plus, axis=1)
    good = errs > 1e-14
    rate = 0.0
    if good.sum() >= 2:
        slope = np.polyfit(T[good], np.log(errs[good]), 1)[0]
        rate = float(-slope)

    return RayAsymptotics(a, x, T, plus, minus, limit_plus, ext_plus, ext_minus,
                          float(np.max(np.abs(ext_plus - limit_plus))),
                          measured, res_p1, res_m1, rate)


# ---------------------------------------------------------------------------
# Boundary total curvature of the half-strip image
# ---------------------------------------------------------------------------

@dataclass
class BoundaryLoop:
    """Ordered arcs (sampled space curves) forming a closed loop."""

    arcs: list          # list of (label, points (m,3))
    closed: bool = True

    def validate(self, tol: float = 1e-8):
        for (la, pa), (lb, pb) in zip(self.arcs, self.arcs[1:] + self.arcs[:1]):
            gap = np.linalg.norm(pa[-1] - pb[0])
            scale = max(1.0, np.linalg.norm(pa[-1]))
            if gap > tol * scale:
                raise ValueError(f"arcs {la} -> {lb} do not share endpoints: gap {gap:.3g}")


def assemble_boundary_loop(a: float, T: float, samples: int = 400) -> BoundaryLoop:
    """The four boundary arcs of the image of [-pi/2a, pi/2a] x [0, T].

    Circular core arc, two straight rays, and the far image arc, traversed
    so that consecutive arcs share endpoints.
    """
    ta = np.pi / (2 * a)
    xs = np.linspace(-ta, ta, samples)
    ys = np.linspace(0.0, T, samples)
    core = bent_helicoid_closed(a, xs)
    ray_left = bent_helicoid_closed(a, -ta + 1j * ys)
    ray_right = bent_helicoid_closed(a, ta + 1j * ys)
    far = bent_helicoid_closed(a, xs + 1j * T)
    arcs = [
        ("core_circle", core),
        ("ray_right", ray_right),
        ("far_arc", far[::-1]),
        ("ray_left", ray_left[::-1]),
    ]
    loop = BoundaryLoop(arcs)
    loop.validate()
    return loop


def _polyline_turning(points: np.ndarray) -> float:
    seg = np.diff(points, axis=0)
    lengths = np.linalg.norm(seg, axis=1)
    keep = lengths > 0
    seg = seg[keep] / lengths[keep, None]
    dots = np.clip(np.einsum("ij,ij->i", seg[:-1], seg[1:]), -1.0, 1.0)
    return float(np.sum(np.arccos(dots)))


def _end_tangent(points: np.ndarray, at_start: bool, window: int = 5) -> np.ndarray:
    # least-squares direction over the first/last few samples
    pts = points[:window] if at_start else points[-window:]
    centered = pts - pts.mean(axis=0)
    _, _, vt = np.linalg.svd(centered)
    d = vt[0]
    ref = pts[-1] - pts[0]
    if d @ ref < 0:
        d = -d
    norm = np.linalg.norm(d)
    if norm < 1e-300:
        raise NumericalError("corner tangent estimation failed on degenerate samples")
    return d / norm


def boundary_total_curvature(a: float, T: float, R_max: float = 1e15,
                             samples: int = 400) -> float:
    """Total curvature of the boundary loop: arc turning plus corner angles.

    Approaches 2*pi/a + 3*pi for large T and stays below 4*pi for a > 2.
    """
    if a <= 2:
        raise ValueError("a must exceed 2")
    if T < 1.0:
        raise ValueError("T below the minimum (the loop degenerates toward the core arc)")
    reach = np.exp((a + 1) * T) / (4 * (a + 1))
    if reach > R_max:
        raise ValueError(f"far arc radius {reach:.3g} exceeds R_max")
    loop = assemble_boundary_loop(a, T, samples)
    total = sum(_polyline_turning(pts) for _, pts in loop.arcs)
    for (la, pa), (lb, pb) in zip(loop.arcs, loop.arcs[1:] + loop.arcs[:1]):
        d_in = _end_tangent(pa, at_start=False)
        d_out = _end_tangent(pb, at_start=True)
        total += float(np.arccos(np.clip(d_in @ d_out, -1.0, 1.0)))
    return total
