"""Tube geometry, fundamental pieces, and convergence to the disk foliation.

The solid torus around the circle of radius R is foliated by flat leaf
disks; the spinning surfaces intersect each horizontal leaf circle in a
controlled number of points, which is what the embeddedness verdict and
the convergence metrics below measure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .analytic import NumericalError
from .bjorling import bent_helicoid_closed, circle_dphi
from .diffgeo import second_fundamental_norm
from .bjorling import SurfaceEvaluator


@dataclass(frozen=True)
class TubeRegion:
    """The (R - 1/R)-neighborhood of the circle of radius R in the (x1,x2)-plane."""

    R: float

    def __post_init__(self):
        if not self.R > 1:
            raise ValueError("R must exceed 1 for a positive tube radius")

    @property
    def radius(self) -> float:
        return self.R - 1.0 / self.R

    def contains(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        rho = np.hypot(p[..., 0], p[..., 1])
        return (rho - self.R) ** 2 + p[..., 2] ** 2 < self.radius ** 2


@dataclass(frozen=True)
class TubeCoords:
    """Cylindrical coordinates: angle around the axis, leaf-disk point (xi, zeta)."""

    theta: float
    xi: float
    zeta: float
    inside: bool = True
    reason: str = ""


def tube_coords(R: float, p) -> TubeCoords:
    """Coordinates (theta, x) of a point; outside-flag past the tube boundary.

    x is the point of the leaf disk reached by rotating p into the
    (x1,x3)-plane: xi its distance from the axis, zeta its height.
    """
    tube = TubeRegion(R)
    p = np.asarray(p, dtype=float)
    rho = float(np.hypot(p[0], p[1]))
    if rho < 1e-300:
        return TubeCoords(0.0, 0.0, float(p[2]), inside=False, reason="point on the x3-axis")
    theta = float(np.arctan2(p[1], p[0])) % (2.0 * np.pi)
    xi, zeta = rho, float(p[2])
    inside = (xi - R) ** 2 + zeta ** 2 < tube.radius ** 2
    return TubeCoords(theta, xi, zeta, inside=inside,
                      reason="" if inside else "outside the tube")


def from_tube_coords(R: float, coords: TubeCoords) -> np.ndarray:
    """Inverse of tube_coords on interior points."""
    return np.array([coords.xi * np.cos(coords.theta),
                     coords.xi * np.sin(coords.theta),
                     coords.zeta])


def leaf_circle_points(x, thetas) -> np.ndarray:
    """The horizontal circle through leaf point x = (xi, zeta), sampled at thetas."""
    xi, zeta = x
    thetas = np.asarray(thetas, dtype=float)
    return np.stack([xi * np.cos(thetas), xi * np.sin(thetas),
                     np.full_like(thetas, zeta)], axis=-1)


# ---------------------------------------------------------------------------
# Fundamental piece
# ---------------------------------------------------------------------------

@dataclass
class FundamentalPiece:
    """Parameter region of one period strip whose image lies in the tube.

    mask marks grid nodes of [-pi/2a, pi/2a] x [-window, window] whose
    images lie in T_R and that connect to the core segment; the cached
    image arrays serve the intersection searches. Boundary arcs are
    labeled: two tube-boundary arcs and the two straight-line edges.
    """

    a: int
    R: float
    us: np.ndarray
    vs: np.ndarray
    mask: np.ndarray
    image: np.ndarray          # (nu, nv, 3)
    rho: np.ndarray            # planar radius of image
    arcs: dict = field(default_factory=dict)

    @property
    def order(self) -> int:
        """Size of the rotation orbit assembling the annulus."""
        return 2 * self.a

    def contains_param(self, u: float, v: float) -> bool:
        if not (self.us[0] - 1e-12 <= u <= self.us[-1] + 1e-12):
            return False
        if not (self.vs[0] <= v <= self.vs[-1]):
            return False
        i = int(np.clip(np.searchsorted(self.us, u) - 1, 0, len(self.us) - 2))
        j = int(np.clip(np.searchsorted(self.vs, v) - 1, 0, len(self.vs) - 2))
        sub = self.mask[i:i + 2, j:j + 2]
        return bool(sub.any())

    def edge_runs(self):
        """In-piece v-intervals of the two straight edges (left, right columns)."""
        out = {}
        for label, col in (("line_neg", self.mask[0]), ("line_pos", self.mask[-1])):
            j0 = int(np.argmin(np.abs(self.vs)))
            lo = j0
            while lo - 1 >= 0 and col[lo - 1]:
                lo -= 1
            hi = j0
            while hi + 1 < len(col) and col[hi + 1]:
                hi += 1
            out[label] = (self.vs[lo], self.vs[hi])
        return out


@dataclass
class OrbitAnnulus:
    """The fundamental piece together with its 2a rotation copies."""

    piece: FundamentalPiece

    @property
    def order(self) -> int:
        return self.piece.order


def extract_fundamental_piece(a: int, R: float, resolution: int = 40,
                              window_factor: float = 3.0) -> FundamentalPiece:
    """Flood-fill the tube preimage from the core segment on a graded grid.

    Grid steps are (pi/a)/resolution in x and d(a)/resolution in y; the
    sampling window is |y| <= window_factor * log(a)/a. If the component
    reaches the window's top or bottom the resolution/window is rejected.
    """
    if a < 2 or int(a) != a:
        raise ValueError("a must be an integer >= 2")
    tube = TubeRegion(R)
    a = int(a)
    d = np.log(a) / a
    half = np.pi / (2 * a)
    us = np.linspace(-half, half, resolution + 1)
    window = window_factor * d
    nv = int(np.ceil(window / (d / resolution)))
    vs = np.linspace(-window, window, 2 * nv + 1)
    U, V = np.meshgrid(us, vs, indexing="ij")
    P = bent_helicoid_closed(float(a), U + 1j * V)
    rho = np.hypot(P[..., 0], P[..., 1])
    inside = (rho - R) ** 2 + P[..., 2] ** 2 < tube.radius ** 2

    labels, _ = ndimage.label(inside)
    j0 = int(np.argmin(np.abs(vs)))
    seed_labels = set(labels[:, j0][inside[:, j0]]) - {0}
    if len(seed_labels) != 1:
        raise NumericalError("core segment is not inside a single component; "
                             "refine the resolution")
    mask = labels == seed_labels.pop()
    if mask[:, 0].any() or mask[:, -1].any():
        raise NumericalError(f"component escapes the sampling window |y| <= {window:.3g}; "
                             f"retry with window_factor > {window_factor}")

    # boundary arcs: tube-boundary cells split by the sign of v, plus edges
    boundary = mask & ~ndimage.binary_erosion(mask)
    interior_cols = boundary.copy()
    interior_cols[0, :] = False
    interior_cols[-1, :] = False
    upper = np.argwhere(interior_cols & (V > 0))
    lower = np.argwhere(interior_cols & (V < 0))
    arcs = {
        "tube_arc_upper": np.array([(us[i], vs[j]) for i, j in upper]),
        "tube_arc_lower": np.array([(us[i], vs[j]) for i, j in lower]),
        "line_neg": np.array([(us[0], vs[j]) for j in np.where(mask[0])[0]]),
        "line_pos": np.array([(us[-1], vs[j]) for j in np.where(mask[-1])[0]]),
    }
    return FundamentalPiece(a, R, us, vs, mask, P, rho, arcs)


# ---------------------------------------------------------------------------
# Leaf-circle intersections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntersectionResult:
    count: int
    params: np.ndarray          # (m, 2) parameter points of the piece's roots
    points: np.ndarray          # (count, 3) points in space (orbit included if asked)
    min_separation: float
    min_angle: float
    failures: int = 0


def _newton_leaf_root(a, u, v, xi, zeta, u_range, v_range, tol=1e-11):
    step_cap = 4.0 * max(u_range[1] - u_range[0], 1e-3)
    for _ in range(60):
        z = complex(u, v)
        p = bent_helicoid_closed(a, z)
        d = circle_dphi(a, z)
        fx, fy = d.real, -d.imag
        r = np.hypot(p[0], p[1])
        g = np.array([r - xi, p[2] - zeta])
        if np.abs(g).max() < tol:
            return u, v
        J = np.array([[(p[0] * fx[0] + p[1] * fx[1]) / r, (p[0] * fy[0] + p[1] * fy[1]) / r],
                      [fx[2], fy[2]]])
        try:
            du, dv = np.linalg.solve(J, -g)
        except np.linalg.LinAlgError:
            return None
        step = np.hypot(du, dv)
        if step > step_cap:
            du, dv = du * step_cap / step, dv * step_cap / step
        u, v = u + du, v + dv
        if not (u_range[0] - 0.2 <= u <= u_range[1] + 0.2 and
                v_range[0] - 0.1 <= v <= v_range[1] + 0.1):
            return None
    return None


def _edge_root_bisect(a, u_edge, xi, lo, hi, tol=1e-13):
    def f(v):
        p = bent_helicoid_closed(a, complex(u_edge, v))
        return np.hypot(p[0], p[1]) - xi

    flo = f(lo)
    if flo * f(hi) > 0:
        return None
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if flo * f(mid) <= 0:
            hi = mid
        else:
            lo = mid
            flo = f(lo)
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def circle_intersection_count(region, x, orbit_points: bool = True) -> IntersectionResult:
    """All intersections of the piece (or its full orbit) with the circle C_x.

    Root-finding: sign scan of the two residual components on the cached
    grid, then 2D Newton refinement; the straight-line edges are handled
    as 1D problems when the circle lies at zeta = 0 (the piece is taken
    half-open there, keeping the line_pos edge and dropping line_neg,
    which belongs to the neighboring rotation copy).
    """
    orbit = isinstance(region, OrbitAnnulus)
    piece = region.piece if orbit else region
    xi, zeta = float(x[0]), float(x[1])
    a, R = piece.a, piece.R
    if abs(xi - 1.0) < 1e-12 and abs(zeta) < 1e-12:
        raise ValueError("the core circle itself is excluded")

    r1 = piece.rho - xi
    r2 = piece.image[..., 2] - zeta
    s1 = np.signbit(r1)
    s2 = np.signbit(r2)
    cell = piece.mask[:-1, :-1] | piece.mask[1:, :-1] | piece.mask[:-1, 1:] | piece.mask[1:, 1:]
    c1 = ((s1[:-1, :-1] != s1[1:, :-1]) | (s1[:-1, :-1] != s1[:-1, 1:])
          | (s1[:-1, :-1] != s1[1:, 1:]))
    c2 = ((s2[:-1, :-1] != s2[1:, :-1]) | (s2[:-1, :-1] != s2[:-1, 1:])
          | (s2[:-1, :-1] != s2[1:, 1:]))
    candidates = np.argwhere(c1 & c2 & cell)

    us, vs = piece.us, piece.vs
    u_range = (us[0], us[-1])
    v_range = (vs[0], vs[-1])
    roots = []
    failures = 0
    for i, j in candidates:
        res = _newton_leaf_root(float(a), 0.5 * (us[i] + us[i + 1]), 0.5 * (vs[j] + vs[j + 1]),
                                xi, zeta, u_range, v_range)
        if res is None:
            failures += 1
            continue
        u, v = res
        if not (u_range[0] - 1e-9 <= u <= u_range[1] + 1e-9 and v_range[0] <= v <= v_range[1]):
            continue
        if not piece.contains_param(u, v):
            continue
        if all(np.hypot(u - u2, v - v2) > 1e-7 for u2, v2 in roots):
            roots.append((u, v))
    # half-open strip: interior roots that converged onto the left edge are
    # the neighbor copy's edge points
    edge_tol = 1e-9 * (1 + abs(u_range[0]))
    roots = [(u, v) for (u, v) in roots if u > u_range[0] + edge_tol]

    if abs(zeta) <= 1e-9:
        lo, hi = piece.edge_runs()["line_pos"]
        v_edge = _edge_root_bisect(float(a), us[-1], xi, lo, hi)
        if v_edge is not None and all(np.hypot(us[-1] - u2, v_edge - v2) > 1e-7
                                      for u2, v2 in roots):
            roots.append((us[-1], v_edge))

    params = np.array(roots) if roots else np.zeros((0, 2))
    pts = (bent_helicoid_closed(float(a), params[:, 0] + 1j * params[:, 1])
           if len(roots) else np.zeros((0, 3)))

    if orbit and len(roots):
        copies = []
        for k in range(piece.order):
            ang = k * np.pi / a
            c, s = np.cos(ang), np.sin(ang)
            Q = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])
            copies.append(pts @ Q.T)
        all_pts = np.concatenate(copies, axis=0)
    else:
        all_pts = pts

    if len(all_pts) >= 2:
        diff = all_pts[:, None, :] - all_pts[None, :, :]
        dist = np.linalg.norm(diff, axis=-1)
        np.fill_diagonal(dist, np.inf)
        min_sep = float(dist.min())
    else:
        min_sep = np.inf

    min_angle = np.inf
    for u, v in roots:
        d = circle_dphi(float(a), complex(u, v))
        fx, fy = d.real, -d.imag
        nrm = np.cross(fx, fy)
        nrm = nrm / np.linalg.norm(nrm)
        p = bent_helicoid_closed(float(a), complex(u, v))
        tau = np.array([-p[1], p[0], 0.0])
        tau = tau / np.linalg.norm(tau)
        min_angle = min(min_angle, float(np.arcsin(min(1.0, abs(tau @ nrm)))))

    return IntersectionResult(len(all_pts), params, all_pts, min_sep, min_angle, failures)


# ---------------------------------------------------------------------------
# Embeddedness verdict
# ---------------------------------------------------------------------------

@dataclass
class EmbeddednessVerdict:
    status: str                  # EMBEDDED / NOT_EMBEDDED / INCONCLUSIVE
    a: int
    R: float
    samples: int
    expected_count: int
    min_separation: float
    min_angle_outside: float
    witnesses: list
    failure_fraction: float
    resolution_note: str
    rows: list = field(default_factory=list)


def sample_leaf_points(a: int, R: float, count: int, rng) -> np.ndarray:
    """Stratified leaf-disk samples: half within radius 3/a of the core point."""
    tube = TubeRegion(R)
    near_hi = min(3.0 / a, 0.5 * tube.radius)
    out = []
    while len(out) < count:
        if len(out) % 2 == 0:
            r = rng.uniform(0.5 / a, near_hi)
        else:
            r = rng.uniform(near_hi, tube.radius * 0.97)
        beta = rng.uniform(0.0, 2.0 * np.pi)
        x = np.array([1.0 + r * np.cos(beta), r * np.sin(beta)])
        if np.hypot(x[0] - R, x[1]) < tube.radius * 0.985:
            out.append(x)
    return np.array(out)


def embeddedness_verdict(a: int, R: float, sample_count: int = 500,
                         seed: int = 2024, angle_floor: float = 1e-3,
                         failure_budget: float = 1e-3) -> EmbeddednessVerdict:
    """Sampled self-intersection test of the rotation orbit in the tube.

    EMBEDDED when every sampled leaf circle meets the orbit in exactly 2a
    distinct points with positive minimum separation, and positive
    intersection angle outside the 1/a-neighborhood of the core circle.
    This is a verdict at sampling resolution, not a proof.
    """
    piece = extract_fundamental_piece(a, R)
    orbit = OrbitAnnulus(piece)
    rng = np.random.default_rng(seed)
    xs = sample_leaf_points(a, R, sample_count, rng)

    witnesses = []
    rows = []
    failures = 0
    min_sep = np.inf
    min_angle_out = np.inf
    for idx, x in enumerate(xs):
        res = circle_intersection_count(orbit, x)
        failures += res.failures
        dist_core = np.hypot(x[0] - 1.0, x[1])
        rows.append((idx, float(x[0]), float(x[1]), res.count,
                     res.min_separation, res.min_angle))
        if res.count != orbit.order or res.min_separation <= 0:
            witnesses.append((x.tolist(), res.count))
            continue
        min_sep = min(min_sep, res.min_separation)
        if dist_core > 1.0 / a:
            min_angle_out = min(min_angle_out, res.min_angle)
            if res.min_angle < angle_floor:
                witnesses.append((x.tolist(), res.count))

    frac = failures / max(1, sample_count)
    note = (f"no self-intersection detected at resolution "
            f"du={(np.pi / a) / 40:.2e}, dv={np.log(a) / a / 40:.2e}")
    if frac > failure_budget:
        status = "INCONCLUSIVE"
    elif witnesses:
        status = "NOT_EMBEDDED"
    else:
        status = "EMBEDDED"
    return EmbeddednessVerdict(status, a, R, sample_count, orbit.order,
                               float(min_sep), float(min_angle_out),
                               witnesses, frac, note, rows)


# ---------------------------------------------------------------------------
# Convergence to the flat-disk foliation
# ---------------------------------------------------------------------------

def foliation_angle_metric(a: int, R: float, delta: float) -> float:
    """Max angle between surface tangent planes and the leaf disks.

    Measured over piece points at distance >= delta from the core circle;
    decreasing along an a-sweep certifies C^1 convergence away from it.
    """
    tube = TubeRegion(R)
    if not 0 < delta < tube.radius:
        raise ValueError("delta must lie in (0, R - 1/R)")
    piece = extract_fundamental_piece(a, R)
    P = piece.image[piece.mask]
    rho = piece.rho[piece.mask]
    dist = np.hypot(rho - 1.0, P[:, 2])
    sel = dist >= delta
    if not sel.any():
        raise NumericalError("no surface samples at the requested distance")
    U, V = np.meshgrid(piece.us, piece.vs, indexing="ij")
    Z = (U + 1j * V)[piece.mask][sel]
    d = circle_dphi(float(a), Z)
    fx, fy = d.real, -d.imag
    nrm = np.cross(fx, fy)
    nrm = nrm / np.linalg.norm(nrm, axis=-1, keepdims=True)
    theta = np.arctan2(P[sel, 1], P[sel, 0])
    leaf_normal = np.stack([-np.sin(theta), np.cos(theta), np.zeros_like(theta)], axis=-1)
    dots = np.abs(np.einsum("ij,ij->i", nrm, leaf_normal))
    return float(np.max(np.arccos(np.clip(dots, 0.0, 1.0))))


@dataclass(frozen=True)
class SingularSetEstimate:
    a: int
    cloud: np.ndarray
    hausdorff: float
    mean_radius: float


def singular_set_estimate(a_list, R: float, threshold_factor: float = 0.5):
    """Curvature blow-up locus vs the unit circle, for each spin in a_list.

    Collects piece points where the second-fundamental-form norm exceeds
    threshold_factor * a, expands by the rotation orbit, and returns the
    Hausdorff distance of the cloud to the unit circle (which shrinks like
    1/a). An empty cloud means the threshold is wrong and raises.
    """
    a_list = list(a_list)
    if any(b <= a for a, b in zip(a_list, a_list[1:])):
        raise ValueError("a_list must be increasing")
    results = []
    for a in a_list:
        piece = extract_fundamental_piece(int(a), R)
        U, V = np.meshgrid(piece.us, piece.vs, indexing="ij")
        Z = (U + 1j * V)[piece.mask]
        ev = SurfaceEvaluator.closed_circle(float(a))
        norms = second_fundamental_norm(ev, Z)
        pick = norms > threshold_factor * a
        if not pick.any():
            raise NumericalError(f"empty blow-up set at a = {a}: wrong threshold")
        base = piece.image[piece.mask][pick]
        clouds = []
        for k in range(piece.order):
            ang = k * np.pi / a
            c, s = np.cos(ang), np.sin(ang)
            Q = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])
            clouds.append(base @ Q.T)
        cloud = np.concatenate(clouds, axis=0)
        rho = np.hypot(cloud[:, 0], cloud[:, 1])
        d_cloud_to_circle = float(np.max(np.hypot(rho - 1.0, cloud[:, 2])))
        # circle -> cloud direction
        phis = np.linspace(0.0, 2.0 * np.pi, 720, endpoint=False)
        circ = np.stack([np.cos(phis), np.sin(phis), np.zeros_like(phis)], axis=-1)
        dmat = np.linalg.norm(circ[:, None, :] - cloud[None, :, :], axis=-1)
        d_circle_to_cloud = float(np.max(dmat.min(axis=1)))
        results.append(SingularSetEstimate(int(a), cloud,
                                           max(d_cloud_to_circle, d_circle_to_cloud),
                                           float(np.mean(rho))))
    return results
