"""Ruled comparison surface and second-order closeness bounds.

The ruled surface shares the circle and the immersion's ruling directions;
for comparison of two sets of spinning-normal data that agree to second
order at a point, the surfaces stay within 6 C (log a)^2 / a^2 of each
other on a shrinking box.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analytic import HolomorphicCurve
from .bjorling import (
    BjorlingSpec,
    FrameField,
    SurfaceEvaluator,
    bent_helicoid_closed,
    circle_spec,
)


def strip_halfwidth(a: float) -> float:
    """d(a) = log(a)/a, the half-width of the useful strip."""
    if a <= 1:
        raise ValueError("a must exceed 1")
    return np.log(a) / a


@dataclass(frozen=True)
class RuledSurfaceSpec:
    """Ruled comparison surface over the unit circle at spin a > 1."""

    a: float

    def __post_init__(self):
        if self.a <= 1:
            raise ValueError("a must exceed 1")


@dataclass(frozen=True)
class StripDomain:
    x0: float
    x1: float
    halfwidth: float

    def __post_init__(self):
        if not self.halfwidth > 0:
            raise ValueError("halfwidth must be positive")

    @classmethod
    def from_spin(cls, a: float, x0: float = 0.0, x1: float = 2.0 * np.pi) -> "StripDomain":
        return cls(x0, x1, strip_halfwidth(a))


def ruling_offset(a: float, x, y):
    """t_a(x, y): the primitive of the conformal factor in y, vanishing at y = 0.

    The sin(a x) term is carried explicitly; dropping it breaks the bound.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return ((a * np.cosh(y) * np.sinh(a * y) - np.cosh(a * y) * np.sinh(y)) / (a * a - 1.0)
            - np.sin(a * x) * (np.cosh(y) - 1.0))


def ruled_eval(a: float, x, y) -> np.ndarray:
    """R(x, y) = c(x) + t_a(x, y) * u(x) with ruling u(x) = F_y(x, 0).

    In the sign convention fixed by the quadrature integral the ruling is
    u(x) = -(c' x n)(x) = -(sin(ax) cos x, sin(ax) sin x, cos(ax)); the
    opposite choice sends the rulings away from the immersion's y-curves.
    """
    if a <= 1:
        raise ValueError("a must exceed 1")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    t = ruling_offset(a, x, y)
    return np.stack([np.cos(x) - t * np.sin(a * x) * np.cos(x),
                     np.sin(x) - t * np.sin(a * x) * np.sin(x),
                     -t * np.cos(a * x)], axis=-1)


def _refine_max(fun, x0, y0, hx, hy, rounds: int = 3, n: int = 9):
    best = (fun(x0, y0), x0, y0)
    for _ in range(rounds):
        xs = np.linspace(best[1] - hx, best[1] + hx, n)
        ys = np.linspace(best[2] - hy, best[2] + hy, n)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        vals = fun(X, Y)
        i, j = np.unravel_index(np.argmax(vals), vals.shape)
        best = (float(vals[i, j]), float(X[i, j]), float(Y[i, j]))
        hx, hy = hx / 4, hy / 4
    return best[0]


def ruled_deviation_sup(a: float, nx: int = 200, ny: int = 50) -> float:
    """sup over [0, 2pi] x [-d(a), d(a)] of |R - F|, grid plus local refinement."""
    d = strip_halfwidth(a)
    xs = np.linspace(0.0, 2.0 * np.pi, nx)
    ys = np.linspace(-d, d, ny)
    X, Y = np.meshgrid(xs, ys, indexing="ij")

    def dev(x, y):
        diff = ruled_eval(a, x, y) - bent_helicoid_closed(a, x + 1j * y)
        return np.linalg.norm(diff, axis=-1)

    vals = dev(X, Y)
    i, j = np.unravel_index(np.argmax(vals), vals.shape)
    return _refine_max(dev, X[i, j], Y[i, j], xs[1] - xs[0], ys[1] - ys[0])


@dataclass(frozen=True)
class DerivativeBound:
    identity_residual: float
    bound_ratio: float


def derivative_bound_check(a: float, n_samples: int = 400, seed: int = 0,
                           fd_step: float = 1e-5) -> DerivativeBound:
    """Check |d/dy (R - F)|^2 = 4 cos^2(ax) cosh(ay) sinh^2(y/2) lambda(x,y).

    identity_residual compares the closed form against centered differences
    of R - F; bound_ratio is the measured maximum of
    |d/dy (R - F)| / (cosh(ay) |sinh y|) on the strip, which sits within a
    hair above 1 (the ratio tends to 1 at y = 0 and grows like 1 + y^2/8).
    """
    d = strip_halfwidth(a)
    rng = np.random.default_rng(seed)
    xs = rng.uniform(0.0, 2.0 * np.pi, n_samples)
    ys = rng.uniform(-d, d, n_samples)

    def RF(x, y):
        return ruled_eval(a, x, y) - bent_helicoid_closed(a, x + 1j * y)

    h = fd_step
    dRF = (RF(xs, ys + h) - RF(xs, ys - h)) / (2 * h)
    lhs = np.einsum("ij,ij->i", dRF, dRF)
    lam = np.cosh(ys) * np.cosh(a * ys) - np.sin(a * xs) * np.sinh(ys)
    rhs = 4.0 * np.cos(a * xs) ** 2 * np.cosh(a * ys) * np.sinh(ys / 2) ** 2 * lam
    identity = float(np.max(np.abs(lhs - rhs)))

    grid_x = np.linspace(0.0, 2.0 * np.pi, 400)
    grid_y = np.linspace(-d, d, 101)
    X, Y = np.meshgrid(grid_x, grid_y, indexing="ij")
    lamg = np.cosh(Y) * np.cosh(a * Y) - np.sin(a * X) * np.sinh(Y)
    num = 4.0 * np.cos(a * X) ** 2 * np.cosh(a * Y) * np.sinh(Y / 2) ** 2 * lamg
    den = (np.cosh(a * Y) * np.abs(np.sinh(Y))) ** 2
    mask = den > 1e-30
    ratio = float(np.sqrt(np.max(num[mask] / den[mask])))
    return DerivativeBound(identity, ratio)


# ---------------------------------------------------------------------------
# Second-order closeness of two data sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SecondOrderCloseness:
    """Constant C with |c - c~| <= C t^2 and |n_j - n~_j| <= C t^2 on (-eps, eps)."""

    C: float
    epsilon: float

    def __post_init__(self):
        if self.C < 0 or not np.isfinite(self.C):
            raise ValueError("C must be finite and >= 0")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")


def second_order_constant(spec_a: BjorlingSpec, spec_b: BjorlingSpec,
                          epsilon: float, n_samples: int = 2000) -> SecondOrderCloseness:
    """Measure C as the sup of max(|c-c~|, |n1-n~1|, |n2-n~2|) / t^2.

    The data must agree at t = 0 (positions, tangents, frames) to 1e-9.
    """
    for name, order, curves in (
        ("core position", 0, (spec_a.core, spec_b.core)),
        ("core tangent", 1, (spec_a.core, spec_b.core)),
        ("n1", 0, (spec_a.frame.n1, spec_b.frame.n1)),
        ("n2", 0, (spec_a.frame.n2, spec_b.frame.n2)),
    ):
        gap = np.max(np.abs(curves[0].eval(0.0, order) - curves[1].eval(0.0, order)))
        if gap > 1e-9:
            raise ValueError(f"data mismatch at t = 0 in {name}: {gap:.3g}")

    t = np.linspace(-epsilon, epsilon, n_samples)
    t = t[np.abs(t) > epsilon / n_samples / 2]
    quot = np.zeros_like(t)
    for ca, cb in ((spec_a.core, spec_b.core),
                   (spec_a.frame.n1, spec_b.frame.n1),
                   (spec_a.frame.n2, spec_b.frame.n2)):
        diff = np.linalg.norm((ca.eval(t) - cb.eval(t)).real, axis=-1)
        quot = np.maximum(quot, diff / t ** 2)
    return SecondOrderCloseness(float(np.max(quot)), float(epsilon))


def comparison_bound_check(spec_a: BjorlingSpec, spec_b: BjorlingSpec, a: float,
                           closeness: SecondOrderCloseness,
                           nx: int = 21, ny: int = 17, strict: bool = True):
    """sup |F~ - F| over the box |Re z| < pi/a, |Im z| <= d(a) vs 6 C (log a)^2 / a^2.

    Both surfaces are evaluated through the quadrature-backed route. The box
    must fit inside the closeness validity interval.
    """
    d = strip_halfwidth(a)
    box_radius = np.hypot(np.pi / a, d)
    if box_radius > closeness.epsilon:
        raise ValueError(f"comparison box (radius {box_radius:.3g}) exceeds the "
                         f"closeness validity interval {closeness.epsilon:.3g}")
    ev_a = SurfaceEvaluator.numeric(spec_a)
    ev_b = SurfaceEvaluator.numeric(spec_b)
    xs = np.linspace(-np.pi / a * (1 - 1e-9), np.pi / a * (1 - 1e-9), nx)
    ys = np.linspace(-d, d, ny)
    Z = xs[:, None] + 1j * ys[None, :]
    dev = np.linalg.norm(ev_a.position(Z) - ev_b.position(Z), axis=-1)
    i, j = np.unravel_index(np.argmax(dev), dev.shape)

    def local(x, y):
        z = np.asarray(x) + 1j * np.asarray(y)
        return np.linalg.norm(ev_a.position(z) - ev_b.position(z), axis=-1)

    sup = _refine_max(local, xs[i], ys[j], xs[1] - xs[0], ys[1] - ys[0], rounds=2, n=5)
    bound = 6.0 * closeness.C * np.log(a) ** 2 / a ** 2
    if strict and sup > bound:
        raise ValueError(f"comparison bound violated: sup {sup:.3g} > bound {bound:.3g}")
    return float(sup), float(bound)


# ---------------------------------------------------------------------------
# Osculating circle extraction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OsculatingCircle:
    """Normalization data at a curve point.

    The rigid motion + dilation place the model (unit circle through
    (1,0,0) with tangent (0,1,0) and inward normal (-1,0,0)) onto the
    curve's osculating circle: world = point + scale * Q @ (model - (1,0,0)).
    For straight points (curvature below threshold) `straight` is set and
    the comparison model is a line with constant frame instead.
    """

    kappa: float
    scale: float
    rotation: np.ndarray
    point: np.ndarray
    frame_angle: float
    straight: bool = False

    def comparison_spec(self, a: float) -> BjorlingSpec:
        if self.straight:
            core = HolomorphicCurve("taylor", np.array([[1.0, 0, 0], [0, 1.0, 0]], dtype=complex))
            n1 = HolomorphicCurve("taylor", np.array([[-1.0, 0, 0]], dtype=complex))
            n2 = HolomorphicCurve("taylor", np.array([[0, 0, 1.0]], dtype=complex))
            return BjorlingSpec(core, FrameField(n1, n2), float(a))
        return circle_spec(a)

    def normalize(self, points: np.ndarray, base_point=None) -> np.ndarray:
        """Map world points into model coordinates (inverse of the placement)."""
        base = self.point if base_point is None else np.asarray(base_point)
        rel = (np.asarray(points) - base) / self.scale
        return rel @ self.rotation + np.array([1.0, 0.0, 0.0])


def osculating_circle(curve: HolomorphicCurve, t0: float, frame: FrameField = None,
                      kappa_min: float = 1e-8) -> OsculatingCircle:
    """Curvature, placement motion, and frame alignment angle at curve(t0).

    The dilation factor is 1/kappa (the osculating radius); below the
    curvature threshold a straight flag is returned and the comparison
    model is the helicoid data. When the curve's frame is supplied,
    frame_angle is the rotation in the normal plane aligning the circle
    model's first normal with frame.n1(t0).
    """
    p = curve.eval(t0).real
    v = curve.eval(t0, 1).real
    acc = curve.eval(t0, 2).real
    speed = np.linalg.norm(v)
    if speed < 1e-12:
        raise ValueError("stationary point: cannot extract an osculating circle")
    T = v / speed
    kappa_vec = (acc - (acc @ T) * T) / speed ** 2
    kappa = float(np.linalg.norm(kappa_vec))
    if kappa < kappa_min:
        Q = np.eye(3)
        theta = 0.0
        if frame is not None:
            n1 = frame.n1.eval(t0).real
            theta = float(np.arctan2(n1 @ np.array([0.0, 0.0, 1.0]), -n1[0]))
        return OsculatingCircle(0.0, np.inf, Q, p, theta, straight=True)
    N = kappa_vec / kappa
    B = np.cross(T, N)
    # model axes: tangent (0,1,0), inward normal (-1,0,0), binormal (0,0,1)
    Q = np.stack([-N, T, B], axis=1)
    theta = 0.0
    if frame is not None:
        n1 = frame.n1.eval(t0).real
        theta = float(np.arctan2(n1 @ B, n1 @ N))
    return OsculatingCircle(kappa, 1.0 / kappa, Q, p, theta)
