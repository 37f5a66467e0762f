"""End-to-end pipeline from sampled curves to spinning minimal surfaces.

Ingest a discretely sampled curve (merely Lipschitz-tangent regularity
expected), smooth it by convolution with a compact bump, reparametrize to
unit speed, fit an analytic representative plus a rotation-minimizing
frame that closes up, and hand the data to the quadrature-backed solver.
Also: quad mesh generation and OBJ/PLY export for external viewers.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .analytic import TRIG, HolomorphicCurve, NumericalError, fit_trig_poly, fit_taylor_poly
from .bjorling import BjorlingSpec, FrameField, SurfaceEvaluator


# ---------------------------------------------------------------------------
# Sampled curves
# ---------------------------------------------------------------------------

@dataclass
class SampledCurve:
    """Discrete curve: strictly increasing parameters, positions, optional tangents.

    kappa_hat estimates the essential supremum of the tangent difference
    quotients (the curvature for smooth curves, the Lipschitz constant of
    the tangent in general). For closed curves the parameter period is
    t-span plus one step.
    """

    t: np.ndarray
    points: np.ndarray
    tangents: np.ndarray | None = None
    closed: bool = False
    kappa_hat: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.points = np.asarray(self.points, dtype=float)
        if self.t.ndim != 1 or self.points.shape != (len(self.t), 3):
            raise ValueError("need t (m,) and points (m, 3)")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("parameters must be strictly increasing")
        if self.tangents is not None:
            self.tangents = np.asarray(self.tangents, dtype=float)
            norms = np.linalg.norm(self.tangents, axis=-1)
            if np.max(np.abs(norms - 1.0)) > 1e-6:
                raise ValueError("supplied tangents must be unit vectors")

    @property
    def period(self) -> float:
        if not self.closed:
            raise ValueError("open curves have no period")
        return self.t[-1] - self.t[0] + (self.t[1] - self.t[0])


def _estimate_tangents(t, pts, closed):
    if closed:
        tp = np.roll(pts, -1, axis=0)
        tm = np.roll(pts, 1, axis=0)
        dt = np.roll(t, -1) - np.roll(t, 1)
        dt[0] += t[-1] - t[0] + (t[1] - t[0])
        dt[-1] += t[-1] - t[0] + (t[1] - t[0])
        tang = (tp - tm) / dt[:, None]
    else:
        tang = np.gradient(pts, t, axis=0)
    return tang / np.linalg.norm(tang, axis=-1, keepdims=True)


def _difference_quotient_sup(t, tangents, closed):
    dT = np.linalg.norm(np.diff(tangents, axis=0), axis=-1)
    dt = np.diff(t)
    quot = dT / dt
    if closed:
        wrap = np.linalg.norm(tangents[0] - tangents[-1]) / (t[1] - t[0])
        quot = np.append(quot, wrap)
    return float(np.max(quot)) if len(quot) else 0.0


def ingest_polyline(path) -> SampledCurve:
    """Parse a curve CSV with header t,x,y,z[,tx,ty,tz]; '#' starts a comment.

    Tangents are estimated by central differences when absent; a closing
    sample repeating the first position marks the curve closed and is
    dropped.
    """
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = None
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if header is None:
                header = [c.strip().lower() for c in line.split(",")]
                if header[:4] != ["t", "x", "y", "z"]:
                    raise ValueError(f"line {lineno}: header must start with t,x,y,z")
                if len(header) not in (4, 7):
                    raise ValueError(f"line {lineno}: expected 4 or 7 columns")
                continue
            cells = line.split(",")
            if len(cells) != len(header):
                raise ValueError(f"line {lineno}: expected {len(header)} values, got {len(cells)}")
            try:
                rows.append(([float(c) for c in cells], lineno))
            except ValueError as exc:
                raise ValueError(f"line {lineno}: malformed number ({exc})") from None
    if len(rows) < 4:
        raise ValueError("need at least 4 samples")
    data = np.array([r for r, _ in rows])
    t = data[:, 0]
    for (prev, pl), (cur, cl) in zip(rows[:-1], rows[1:]):
        if cur[0] <= prev[0]:
            raise ValueError(f"line {cl}: parameter does not increase past line {pl}")
    pts = data[:, 1:4]
    gaps = np.linalg.norm(np.diff(pts, axis=0), axis=-1)
    if np.any(gaps < 1e-14):
        bad = int(np.argmin(gaps))
        raise ValueError(f"line {rows[bad + 1][1]}: duplicate point")

    closed = bool(np.linalg.norm(pts[0] - pts[-1]) < 1e-9)
    if closed:
        t, pts = t[:-1], pts[:-1]
        data = data[:-1]
    if data.shape[1] == 7:
        tang = data[:, 4:7]
        tang = tang / np.linalg.norm(tang, axis=-1, keepdims=True)
    else:
        tang = _estimate_tangents(t, pts, closed)
    kappa = _difference_quotient_sup(t, tang, closed)
    return SampledCurve(t, pts, tang, closed, kappa)


def write_curve_csv(path, curve: SampledCurve):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,x,y,z\n")
        rows = zip(curve.t, curve.points)
        for ti, p in rows:
            fh.write(f"{ti:.17g},{p[0]:.17g},{p[1]:.17g},{p[2]:.17g}\n")
        if curve.closed:
            step = curve.t[1] - curve.t[0]
            p = curve.points[0]
            fh.write(f"{curve.t[-1] + step:.17g},{p[0]:.17g},{p[1]:.17g},{p[2]:.17g}\n")


# ---------------------------------------------------------------------------
# Mollification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MollifierSpec:
    """Quartic bump kernel (15/16)(1-u^2)^2 on [-1,1], scaled to half-width h."""

    h: float

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("kernel half-width must be positive")

    def kernel(self, u):
        u = np.asarray(u, dtype=float)
        return np.where(np.abs(u) <= 1.0, (15.0 / 16.0) * (1.0 - u ** 2) ** 2, 0.0)

    def mass_residual(self, n: int = 2001) -> float:
        u = np.linspace(-1.0, 1.0, n)
        return float(abs(np.trapezoid(self.kernel(u), u) - 1.0))


def mollify(curve: SampledCurve, spec: MollifierSpec, output_samples: int = 0) -> SampledCurve:
    """Convolve the positions with the bump kernel of half-width h.

    Closed curves convolve periodically; open curves lose a window of
    width h at each end (flagged in meta). The sup-distance to the input
    and the output difference-quotient bound are recorded in meta.
    """
    if spec.mass_residual() > 1e-10:
        raise ValueError("kernel does not integrate to one")
    span = curve.t[-1] - curve.t[0]
    if spec.h > span / 4:
        raise ValueError("kernel half-width exceeds a quarter of the parameter span")
    n = output_samples or max(4 * len(curve.t), 2048)
    m = 129  # kernel quadrature nodes
    u = np.linspace(-1.0, 1.0, m)
    wts = spec.kernel(u)
    wts = wts / np.trapezoid(wts, u)  # discrete unit mass

    if curve.closed:
        period = curve.period
        t_out = curve.t[0] + period * np.arange(n) / n
        tt = np.concatenate([curve.t, [curve.t[0] + period]])
        pp = np.concatenate([curve.points, curve.points[:1]], axis=0)

        def sample(ts):
            ts = (ts - curve.t[0]) % period + curve.t[0]
            return np.stack([np.interp(ts, tt, pp[:, k]) for k in range(3)], axis=-1)
        shrunk = False
    else:
        t_out = np.linspace(curve.t[0] + spec.h, curve.t[-1] - spec.h, n)
        shrunk = True

        def sample(ts):
            return np.stack([np.interp(ts, curve.t, curve.points[:, k]) for k in range(3)],
                            axis=-1)

    smooth = np.zeros((n, 3))
    for ui, wi in zip(u, wts):
        smooth += wi * sample(t_out - spec.h * ui)
    smooth *= 2.0 / (m - 1)

    tang = _estimate_tangents(t_out, smooth, curve.closed)
    kappa = _difference_quotient_sup(t_out, tang, curve.closed)
    sup_dist = float(np.max(np.linalg.norm(smooth - sample(t_out), axis=-1)))
    meta = dict(curve.meta)
    meta.update(mollifier_h=spec.h, sup_distance=sup_dist,
                sup_distance_bound=curve.kappa_hat * spec.h ** 2 / 2,
                window_shrunk=shrunk)
    return SampledCurve(t_out, smooth, tang, curve.closed, kappa, meta)


def arc_length_reparam(curve: SampledCurve) -> SampledCurve:
    """Resample by cumulative chord length so the tangent is unit to 1e-6.

    Total length is preserved exactly (it is the chord sum); near-stationary
    samples are rejected.
    """
    pts = curve.points
    if curve.closed:
        pts = np.concatenate([pts, pts[:1]], axis=0)
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=-1)
    dt = np.diff(curve.t)
    if curve.closed:
        dt = np.append(dt, curve.t[1] - curve.t[0])
    if np.min(seg / dt) < 1e-6:
        raise ValueError("near-stationary samples: speed below 1e-6")
    s = np.concatenate([[0.0], np.cumsum(seg)])
    total = s[-1]
    n = len(curve.t)
    s_new = total * np.arange(n) / n if curve.closed else np.linspace(0.0, total, n)
    out = np.stack([np.interp(s_new, s, pts[:, k]) for k in range(3)], axis=-1)
    tang = _estimate_tangents(s_new, out, curve.closed)
    kappa = _difference_quotient_sup(s_new, tang, curve.closed)
    meta = dict(curve.meta)
    meta.update(total_length=float(total))
    return SampledCurve(s_new, out, tang, curve.closed, kappa, meta)


# ---------------------------------------------------------------------------
# Analytic fit and frame
# ---------------------------------------------------------------------------

def fit_curve(curve: SampledCurve, degree: int) -> HolomorphicCurve:
    """Trigonometric fit (period = curve period) for closed curves,
    Taylor fit around the parameter midpoint for open ones."""
    if curve.closed:
        return fit_trig_poly(curve.t - curve.t[0], curve.points, degree, period=curve.period)
    mid = 0.5 * (curve.t[0] + curve.t[-1])
    return fit_taylor_poly(curve.t - mid, curve.points, degree)


def _rotation_minimizing_frame(points, tangents, n1_start):
    """Double-reflection transport of an initial normal along the samples."""
    n = len(points)
    n1 = np.zeros_like(points)
    n1[0] = n1_start
    for i in range(n - 1):
        v1 = points[i + 1] - points[i]
        c1 = v1 @ v1
        if c1 < 1e-30:
            n1[i + 1] = n1[i]
            continue
        rL = n1[i] - (2.0 / c1) * (v1 @ n1[i]) * v1
        tL = tangents[i] - (2.0 / c1) * (v1 @ tangents[i]) * v1
        v2 = tangents[i + 1] - tL
        c2 = v2 @ v2
        n1[i + 1] = rL if c2 < 1e-30 else rL - (2.0 / c2) * (v2 @ rL) * v2
        n1[i + 1] -= (n1[i + 1] @ tangents[i + 1]) * tangents[i + 1]
        n1[i + 1] /= np.linalg.norm(n1[i + 1])
    return n1


def analytic_frame(curve: HolomorphicCurve, degree: int | None = None,
                   samples: int = 2048, window=None,
                   residual_tol: float = 1e-6) -> FrameField:
    """Rotation-minimizing normal frame of an analytic curve, fit in its basis.

    The frame ODE is transported along a dense real grid; for closed curves
    the holonomy angle is spread uniformly as a counter-twist so the fields
    close up before fitting. Raises with a suggested degree when the fit
    residual stays above residual_tol.
    """
    closed = curve.basis == TRIG
    if degree is None:
        degree = 2 * curve.degree + 16
    if closed:
        period = curve.period
        t = period * np.arange(samples) / samples
    else:
        if window is None:
            raise ValueError("open curves need an explicit parameter window")
        if abs(window[0] + window[1]) > 1e-15:
            raise ValueError("open-curve frames expect a window centered at 0")
        t = np.linspace(window[0], window[1], samples)
    cp = curve.eval(t, 1).real
    tangents = cp / np.linalg.norm(cp, axis=-1, keepdims=True)
    pts = curve.eval(t).real

    seed = np.array([0.0, 0.0, 1.0])
    if abs(seed @ tangents[0]) > 0.9:
        seed = np.array([1.0, 0.0, 0.0])
    n1_start = seed - (seed @ tangents[0]) * tangents[0]
    n1_start /= np.linalg.norm(n1_start)
    n1 = _rotation_minimizing_frame(pts, tangents, n1_start)
    n2 = np.cross(tangents, n1)

    if closed:
        # transport once more across the wrap to measure the holonomy
        v1 = pts[0] - pts[-1]
        c1 = v1 @ v1
        rL = n1[-1] - (2.0 / c1) * (v1 @ n1[-1]) * v1 if c1 > 1e-30 else n1[-1]
        tL = tangents[-1] - (2.0 / c1) * (v1 @ tangents[-1]) * v1 if c1 > 1e-30 else tangents[-1]
        v2 = tangents[0] - tL
        c2 = v2 @ v2
        n1_wrap = rL if c2 < 1e-30 else rL - (2.0 / c2) * (v2 @ rL) * v2
        n1_wrap -= (n1_wrap @ tangents[0]) * tangents[0]
        n1_wrap /= np.linalg.norm(n1_wrap)
        holonomy = float(np.arctan2(n1_wrap @ np.cross(tangents[0], n1[0]), n1_wrap @ n1[0]))
        twist = -holonomy * t / period
        cos_tw, sin_tw = np.cos(twist)[:, None], np.sin(twist)[:, None]
        n1, n2 = cos_tw * n1 + sin_tw * n2, -sin_tw * n1 + cos_tw * n2

    if closed:
        n1_fit = fit_trig_poly(t, n1, degree, period=period)
        n2_fit = fit_trig_poly(t, n2, degree, period=period)
    else:
        n1_fit = fit_taylor_poly(t, n1, degree)
        n2_fit = fit_taylor_poly(t, n2, degree)

    residual = max(float(np.max(np.abs(n1_fit.eval(t).real - n1))),
                   float(np.max(np.abs(n2_fit.eval(t).real - n2))))
    if residual > residual_tol:
        raise NumericalError(f"frame fit residual {residual:.3g} above {residual_tol:.1g}; "
                             f"retry with degree >= {2 * degree}")
    return FrameField(n1_fit, n2_fit)


def admissible_spin(a: float, curve: HolomorphicCurve) -> float:
    """Nearest spin making the spinning normal close up over the period."""
    if curve.basis != TRIG:
        return float(a)
    period = curve.period
    m = max(1, round(a * period / (2.0 * np.pi)))
    return 2.0 * np.pi * m / period


def build_bent_helicoid(curve: HolomorphicCurve, frame: FrameField, a: float,
                        speed_tol: float = 1e-3) -> SurfaceEvaluator:
    """Assemble the data and return the quadrature-backed evaluator."""
    spec = BjorlingSpec(curve, frame, float(a), speed_tol=speed_tol)
    return SurfaceEvaluator.numeric(spec)


# ---------------------------------------------------------------------------
# Meshes
# ---------------------------------------------------------------------------

@dataclass
class Mesh:
    vertices: np.ndarray        # (m, 3)
    faces: np.ndarray           # (q, 4) quad indices
    normals: np.ndarray         # (m, 3)
    params: np.ndarray          # (m, 2) parameter (x, y) per vertex
    skipped_faces: int = 0

    def validate(self):
        if self.faces.size and self.faces.max() >= len(self.vertices):
            raise ValueError("face index out of range")
        for quad in self.faces:
            v = self.vertices[quad]
            area = 0.5 * (np.linalg.norm(np.cross(v[1] - v[0], v[2] - v[0]))
                          + np.linalg.norm(np.cross(v[2] - v[0], v[3] - v[0])))
            if area <= 1e-14:
                raise ValueError("degenerate face in mesh")


def mesh_generate(surface: SurfaceEvaluator, x_range, y_range, nx: int, ny: int) -> Mesh:
    """Regular parameter grid through the evaluator with per-vertex normals.

    Cells with a degenerate metric are flagged and left out of the face
    list rather than exported.
    """
    if nx < 2 or ny < 2:
        raise ValueError("need at least a 2x2 grid")
    xs = np.linspace(x_range[0], x_range[1], nx)
    ys = np.linspace(y_range[0], y_range[1], ny)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    Z = X + 1j * Y
    flat = Z.reshape(-1)
    verts = surface.position(flat)
    fx, fy = surface.first_derivatives(flat)
    nrm = np.cross(fx, fy)
    lam2 = np.einsum("ij,ij->i", fx, fx)
    norms = np.linalg.norm(nrm, axis=-1, keepdims=True)
    normals = nrm / np.maximum(norms, 1e-300)
    params = np.stack([X.reshape(-1), Y.reshape(-1)], axis=-1)

    faces = []
    skipped = 0
    for i in range(nx - 1):
        for j in range(ny - 1):
            idx = [i * ny + j, (i + 1) * ny + j, (i + 1) * ny + j + 1, i * ny + j + 1]
            if np.any(lam2[idx] < 1e-24):
                skipped += 1
                continue
            faces.append(idx)
    mesh = Mesh(verts, np.array(faces, dtype=int).reshape(-1, 4), normals, params, skipped)
    mesh.validate()
    return mesh


def write_obj(path, mesh: Mesh):
    """OBJ with positions, parameter texture coordinates, and normals.

    Floats carry 17 significant digits so a read-back is bit exact.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for v in mesh.vertices:
            fh.write(f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
        for p in mesh.params:
            fh.write(f"vt {p[0]:.17g} {p[1]:.17g}\n")
        for n in mesh.normals:
            fh.write(f"vn {n[0]:.17g} {n[1]:.17g} {n[2]:.17g}\n")
        for f in mesh.faces:
            fh.write("f " + " ".join(f"{i + 1}/{i + 1}/{i + 1}" for i in f) + "\n")


def read_obj(path) -> Mesh:
    verts, params, normals, faces = [], [], [], []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            cells = line.split()
            if not cells:
                continue
            if cells[0] == "v":
                verts.append([float(c) for c in cells[1:4]])
            elif cells[0] == "vt":
                params.append([float(c) for c in cells[1:3]])
            elif cells[0] == "vn":
                normals.append([float(c) for c in cells[1:4]])
            elif cells[0] == "f":
                faces.append([int(c.split("/")[0]) - 1 for c in cells[1:5]])
    return Mesh(np.array(verts), np.array(faces, dtype=int).reshape(-1, 4),
                np.array(normals), np.array(params))


def write_ply(path, mesh: Mesh):
    """Binary little-endian PLY with double-precision positions and normals."""
    with open(path, "wb") as fh:
        header = (
            "ply\nformat binary_little_endian 1.0\n"
            f"element vertex {len(mesh.vertices)}\n"
            + "".join(f"property double {c}\n" for c in
                      ("x", "y", "z", "nx", "ny", "nz", "u", "v"))
            + f"element face {len(mesh.faces)}\n"
            "property list uchar int vertex_indices\nend_header\n"
        )
        fh.write(header.encode("ascii"))
        for v, n, p in zip(mesh.vertices, mesh.normals, mesh.params):
            fh.write(struct.pack("<8d", *v, *n, *p))
        for f in mesh.faces:
            fh.write(struct.pack("<B4i", 4, *f))


def read_ply(path) -> Mesh:
    with open(path, "rb") as fh:
        line = fh.readline()
        if line.strip() != b"ply":
            raise ValueError("not a PLY file")
        nv = nf = 0
        while True:
            line = fh.readline().decode("ascii").strip()
            if line.startswith("element vertex"):
                nv = int(line.split()[-1])
            elif line.startswith("element face"):
                nf = int(line.split()[-1])
            elif line == "end_header":
                break
        verts = np.empty((nv, 3))
        normals = np.empty((nv, 3))
        params = np.empty((nv, 2))
        for i in range(nv):
            vals = struct.unpack("<8d", fh.read(64))
            verts[i] = vals[0:3]
            normals[i] = vals[3:6]
            params[i] = vals[6:8]
        faces = np.empty((nf, 4), dtype=int)
        for i in range(nf):
            cnt = struct.unpack("<B", fh.read(1))[0]
            if cnt != 4:
                raise ValueError("expected quad faces")
            faces[i] = struct.unpack("<4i", fh.read(16))
    return Mesh(verts, faces, normals, params)
