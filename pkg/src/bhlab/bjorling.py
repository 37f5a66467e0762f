"""Minimal immersions from spinning-normal data over analytic curves.

Builds the quadrature-backed solver for general data, the closed form for
the circle, the rational Weierstrass data of the integer-spin family, and
the symmetry group of the circular surfaces.

Sign convention (fixed once, by the quadrature integral): the third
coordinate of the circular surface is -cos(a x) sinh(a y) / a, and the
unit normal along the core curve equals the spinning normal itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analytic import (
    TRIG,
    HolomorphicCurve,
    integrate_segment,
    require_finite,
)

SIGN_CONVENTION = ("third coordinate of the circular surface is "
                   "-cos(a x) sinh(a y) / a; surface normal along the core "
                   "equals the spinning normal")


# ---------------------------------------------------------------------------
# Björling data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrameField:
    """Pair of analytic normal fields along a core curve.

    On the real axis both are unit length, orthogonal to each other and to
    the core tangent, and n2 = c' x n1.
    """

    n1: HolomorphicCurve
    n2: HolomorphicCurve


@dataclass(frozen=True)
class BjorlingSpec:
    """Core curve + orthonormal frame + spin rate: the full input data.

    speed_tol is the unit-speed tolerance the spec is validated against;
    exact cores use the default, fitted cores carry their fit accuracy.
    """

    core: HolomorphicCurve
    frame: FrameField
    spin: float
    speed_tol: float = 1e-9

    def __post_init__(self):
        if not np.isfinite(self.spin) or self.spin < 0:
            raise ValueError("spin must be finite and >= 0")

    def validate(self, window=None, n: int = 64, frame_tol: float = 1e-9):
        """Check unit speed and frame orthonormality on a real sample grid."""
        if window is None:
            if self.core.basis == TRIG:
                window = (0.0, self.core.period)
            else:
                window = (-0.25, 0.25)
        t = np.linspace(window[0], window[1], n, endpoint=False)
        cp = self.core.eval(t, 1).real
        n1 = self.frame.n1.eval(t).real
        n2 = self.frame.n2.eval(t).real
        speed = np.linalg.norm(cp, axis=-1)
        worst_speed = float(np.max(np.abs(speed - 1.0)))
        if worst_speed > self.speed_tol:
            raise ValueError(f"core is not unit speed: |c'|-1 up to {worst_speed:.3g}")
        checks = {
            "|n1|-1": np.abs(np.linalg.norm(n1, axis=-1) - 1.0),
            "|n2|-1": np.abs(np.linalg.norm(n2, axis=-1) - 1.0),
            "n1.c'": np.abs(np.einsum("ij,ij->i", n1, cp)) / np.maximum(speed, 1e-30),
            "n2.c'": np.abs(np.einsum("ij,ij->i", n2, cp)) / np.maximum(speed, 1e-30),
            "n1.n2": np.abs(np.einsum("ij,ij->i", n1, n2)),
            "n2 - c'xn1": np.linalg.norm(n2 - np.cross(cp / speed[:, None], n1), axis=-1),
        }
        for name, vals in checks.items():
            worst = float(np.max(vals))
            if worst > frame_tol:
                raise ValueError(f"frame invariant {name} violated: {worst:.3g}")
        return worst_speed


def circle_spec(a: float) -> BjorlingSpec:
    """Unit circle in the (x1,x2)-plane with its natural frame and spin a.

    c(t) = (cos t, sin t, 0), n1 = -c, n2 = (0,0,1).
    """
    half = 0.5
    ci = 0.5j
    c_coeffs = np.array([[half, ci, 0.0],      # e^{-iz}
                         [0.0, 0.0, 0.0],
                         [half, -ci, 0.0]])    # e^{+iz}
    core = HolomorphicCurve(TRIG, c_coeffs)
    n1 = HolomorphicCurve(TRIG, -c_coeffs)
    n2 = HolomorphicCurve(TRIG, np.array([[0, 0, 0], [0, 0, 1.0], [0, 0, 0]], dtype=complex))
    return BjorlingSpec(core, FrameField(n1, n2), float(a))


def spinning_normal(spec: BjorlingSpec, z) -> np.ndarray:
    """cos(a z) n1(z) + sin(a z) n2(z); broadcasts over arrays of z."""
    z = np.asarray(z, dtype=complex)
    a = spec.spin
    return (np.cos(a * z)[..., None] * spec.frame.n1.eval(z)
            + np.sin(a * z)[..., None] * spec.frame.n2.eval(z))


def _bjorling_integrand(spec: BjorlingSpec):
    cp = spec.core.derivative()

    def g(w):
        return np.cross(spinning_normal(spec, w), cp.eval(w))

    return g


def bjorling_immersion(spec: BjorlingSpec, z) -> np.ndarray:
    """Re( c(z) - i * integral_0^z n(w) x c'(w) dw ) along a straight contour.

    Extends the core: F(t) = c(t) for real t, with the spinning normal as
    surface normal there.
    """
    require_finite(z, "evaluation point")
    g = _bjorling_integrand(spec)
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty(z_arr.shape + (3,))
    for idx, zi in np.ndenumerate(z_arr):
        integral = integrate_segment(g, 0.0, zi)
        out[idx] = (spec.core.eval(zi) - 1j * integral).real
    if np.isscalar(z) or np.asarray(z).ndim == 0:
        return out[0]
    return out


# ---------------------------------------------------------------------------
# Closed form for the circle
# ---------------------------------------------------------------------------

def _check_spin_closed(a: float):
    if a <= 0:
        raise ValueError("spin must be positive")
    if a == 1.0:
        raise ValueError("a = 1 is excluded from the closed form (denominator a^2-1); "
                         "use the numeric evaluator")


def circle_phi(a: float, z) -> np.ndarray:
    """Holomorphic curve whose real part is the circular surface, a != 1."""
    _check_spin_closed(a)
    z = np.asarray(z, dtype=complex)
    den = a * a - 1.0
    c1 = np.cos(z) - 1j * (a * np.cos(z) * np.cos(a * z) - a + np.sin(z) * np.sin(a * z)) / den
    c2 = np.sin(z) - 1j * (a * np.cos(a * z) * np.sin(z) - np.cos(z) * np.sin(a * z)) / den
    c3 = 1j * np.sin(a * z) / a
    return np.stack([c1, c2, c3], axis=-1)


def circle_dphi(a: float, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.stack([-np.sin(z) + 1j * np.cos(z) * np.sin(a * z),
                     np.cos(z) + 1j * np.sin(z) * np.sin(a * z),
                     1j * np.cos(a * z)], axis=-1)


def circle_d2phi(a: float, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    c1 = -np.cos(z) - 1j * np.sin(z) * np.sin(a * z) + 1j * a * np.cos(z) * np.cos(a * z)
    c2 = -np.sin(z) + 1j * np.cos(z) * np.sin(a * z) + 1j * a * np.sin(z) * np.cos(a * z)
    c3 = -1j * a * np.sin(a * z)
    return np.stack([c1, c2, c3], axis=-1)


def bent_helicoid_closed(a: float, z) -> np.ndarray:
    """Closed-form immersion of the circular surface with spin a (a != 1)."""
    require_finite(z, "evaluation point")
    return circle_phi(a, z).real


# ---------------------------------------------------------------------------
# Weierstrass data on the punctured w-plane (integer spin)
# ---------------------------------------------------------------------------

def weierstrass_eval(n: int, w):
    """Stereographic Gauss map G(w) and the dw-coefficient of the height form.

    G(w) = -w (w^n + i) / (i w^n + 1),  dh = (w^n + w^-n) / (2 w) dw,
    on the punctured plane w != 0.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    w = np.asarray(w, dtype=complex)
    if np.any(w == 0):
        raise ValueError("w = 0 is a puncture of the parameter domain")
    wn = w ** n
    denom = 1j * wn + 1.0
    G = np.where(denom != 0, -w * (wn + 1j) / np.where(denom == 0, 1.0, denom), np.inf)
    dh = (wn + wn ** -1 if n > 0 else 2.0 * np.ones_like(w)) / (2.0 * w)
    if np.ndim(w) == 0:
        return complex(G), complex(dh)
    return G, dh


def weierstrass_integrand(n: int, w) -> np.ndarray:
    """The representation form (1/2(1/G - G), i/2(1/G + G), 1) dh as dw-coefficients.

    With this family's data the products collapse to Laurent polynomials,
    so the only pole is the puncture w = 0:
      (1/G) dh = -i (w^n - i)^2 / (2 w^{n+2}) dw
      G dh     =  i (w^n + i)^2 / (2 w^n) dw
    """
    w = np.asarray(w, dtype=complex)
    if np.any(w == 0):
        raise ValueError("w = 0 is a puncture of the parameter domain")
    wn = w ** n
    inv_gdh = -0.5j * (wn - 1j) ** 2 / w ** (n + 2)
    gdh = 0.5j * (wn + 1j) ** 2 / w ** n
    return np.stack([0.5 * (inv_gdh - gdh),
                     0.5j * (inv_gdh + gdh),
                     (wn * wn + 1.0) / (2.0 * w ** (n + 1))], axis=-1)


def _w_plane_path(w0: complex, w1: complex):
    """Waypoints from w0 to w1 that keep straight legs away from the puncture."""
    if abs(w1 - w0) < 1e-15:
        return [w0, w1]
    # distance of the straight segment to 0
    d = w1 - w0
    t = np.clip(-(w0.conjugate() * d).real / abs(d) ** 2, 0.0, 1.0)
    if abs(w0 + t * d) > 0.3 * min(abs(w0), abs(w1)):
        return [w0, w1]
    # detour along chords of a circle at the larger radius
    r = max(abs(w0), abs(w1))
    a0, a1 = np.angle(w0), np.angle(w1)
    sweep = (a1 - a0 + np.pi) % (2 * np.pi) - np.pi
    steps = max(2, int(np.ceil(abs(sweep) / (np.pi / 4))))
    pts = [w0]
    for k in range(1, steps):
        pts.append(r * np.exp(1j * (a0 + sweep * k / steps)))
    pts.append(w1)
    return pts


class SurfaceEvaluator:
    """A conformal minimal immersion with exact first/second derivatives.

    kinds:
      "numeric":       quadrature-backed immersion from BjorlingSpec data
      "closed_circle": the explicit circular formula (spin != 1)
      "weierstrass":   the rational data on C - {0}, composed with w = e^{iz}

    Positions may involve quadrature; derivatives never do. All kinds are
    parametrized by z in C (the weierstrass kind through w = e^{iz}), and
    every instance is immutable and shareable across threads.
    """

    NUMERIC = "numeric"
    CLOSED_CIRCLE = "closed_circle"
    WEIERSTRASS = "weierstrass"

    def __init__(self, kind, spin, spec=None, offset=np.zeros(3)):
        self.kind = kind
        self.spin = float(spin)
        self.spec = spec
        self.offset = np.asarray(offset, dtype=float)

    @classmethod
    def numeric(cls, spec: BjorlingSpec) -> "SurfaceEvaluator":
        return cls(cls.NUMERIC, spec.spin, spec)

    @classmethod
    def closed_circle(cls, a: float) -> "SurfaceEvaluator":
        _check_spin_closed(a)
        return cls(cls.CLOSED_CIRCLE, a)

    @classmethod
    def weierstrass(cls, n: int) -> "SurfaceEvaluator":
        if n < 0 or int(n) != n:
            raise ValueError("weierstrass kind needs an integer n >= 0")
        ev = cls(cls.WEIERSTRASS, float(n))
        # anchor the translation so that z = 0 maps to the core point (1,0,0)
        raw = ev._weier_raw_position(np.array([0.0 + 0.0j]))[0]
        ev.offset = np.array([1.0, 0.0, 0.0]) - raw
        return ev

    # -- positions -----------------------------------------------------------

    def _weier_raw_position(self, z_arr):
        n = int(self.spin)
        out = np.empty(z_arr.shape + (3,))
        for idx, zi in np.ndenumerate(z_arr):
            w1 = np.exp(1j * zi)
            total = np.zeros(3, dtype=complex)
            pts = _w_plane_path(1.0 + 0.0j, w1)
            for p0, p1 in zip(pts[:-1], pts[1:]):
                clearance = min(abs(p0), abs(p1))
                total += integrate_segment(lambda v: weierstrass_integrand(n, v),
                                           p0, p1, panel_length=0.5 * clearance)
            out[idx] = total.real
        return out

    def position(self, z) -> np.ndarray:
        require_finite(z, "evaluation point")
        z_arr = np.asarray(z, dtype=complex)
        scalar = z_arr.ndim == 0
        z_arr = np.atleast_1d(z_arr)
        if self.kind == self.CLOSED_CIRCLE:
            out = bent_helicoid_closed(self.spin, z_arr)
        elif self.kind == self.NUMERIC:
            out = bjorling_immersion(self.spec, z_arr)
        else:
            out = self._weier_raw_position(z_arr) + self.offset
        return out[0] if scalar else out

    # -- exact derivatives ----------------------------------------------------

    def _dphi(self, z_arr):
        if self.kind == self.CLOSED_CIRCLE:
            return circle_dphi(self.spin, z_arr)
        if self.kind == self.NUMERIC:
            spec = self.spec
            cp = spec.core.eval(z_arr, 1)
            return cp - 1j * np.cross(spinning_normal(spec, z_arr), cp)
        w = np.exp(1j * z_arr)
        return weierstrass_integrand(int(self.spin), w) * (1j * w)[..., None]

    def _d2phi(self, z_arr):
        if self.kind == self.CLOSED_CIRCLE:
            return circle_d2phi(self.spin, z_arr)
        if self.kind == self.NUMERIC:
            spec = self.spec
            a = spec.spin
            cp = spec.core.eval(z_arr, 1)
            cpp = spec.core.eval(z_arr, 2)
            n1 = spec.frame.n1
            n2 = spec.frame.n2
            cos_az = np.cos(a * z_arr)[..., None]
            sin_az = np.sin(a * z_arr)[..., None]
            nrm = cos_az * n1.eval(z_arr) + sin_az * n2.eval(z_arr)
            dnrm = (-a * sin_az * n1.eval(z_arr) + cos_az * n1.eval(z_arr, 1)
                    + a * cos_az * n2.eval(z_arr) + sin_az * n2.eval(z_arr, 1))
            return cpp - 1j * (np.cross(dnrm, cp) + np.cross(nrm, cpp))
        # weierstrass: d/dz [Phi(e^{iz}) i e^{iz}]
        n = int(self.spin)
        w = np.exp(1j * z_arr)
        h = 1e-6
        dPhi = (weierstrass_integrand(n, w * np.exp(1j * h)) * (1j * w * np.exp(1j * h))[..., None]
                - weierstrass_integrand(n, w * np.exp(-1j * h)) * (1j * w * np.exp(-1j * h))[..., None]
                ) / (2 * h)
        return dPhi

    def first_derivatives(self, z):
        """(F_x, F_y) with respect to z = x + iy; exact, no quadrature."""
        z_arr = np.asarray(z, dtype=complex)
        d = self._dphi(z_arr)
        return d.real, -d.imag

    def second_derivatives(self, z):
        """(F_xx, F_xy); F_yy = -F_xx by harmonicity."""
        z_arr = np.asarray(z, dtype=complex)
        d2 = self._d2phi(z_arr)
        return d2.real, -d2.imag

    def normal(self, z) -> np.ndarray:
        fx, fy = self.first_derivatives(z)
        n = np.cross(fx, fy)
        return n / np.linalg.norm(n, axis=-1, keepdims=True)


def weierstrass_consistency(n: int, grid) -> float:
    """Max deviation between the integrated w-plane data and the closed form.

    Integrates the representation form from a base point in the w-plane,
    composes with w = e^{iz} over the grid, subtracts the closed form and
    removes the single translation fixed at the grid's base point.
    """
    if n < 2:
        raise ValueError("both forms are globally defined on the grid only for n >= 2")
    grid = np.asarray(grid, dtype=complex).reshape(-1)
    if np.any(np.abs(np.exp(1j * grid)) < 1e-12):
        raise ValueError("grid touches the puncture w = 0")
    # reject grid points at the poles/zeros of G (on |w| = 1 at special args)
    az = n * grid
    if np.any(np.abs(np.cos(az)) + np.abs(np.sin(az) - 1) < 1e-9) or \
       np.any(np.abs(np.cos(az)) + np.abs(np.sin(az) + 1) < 1e-9):
        raise ValueError("grid touches a pole or zero of the Gauss map")
    ev = SurfaceEvaluator.weierstrass(n)
    closed = bent_helicoid_closed(float(n), grid)
    integrated = ev.position(grid)
    delta = integrated - closed
    return float(np.max(np.abs(delta - delta[0])))


# ---------------------------------------------------------------------------
# Symmetries
# ---------------------------------------------------------------------------

def _rotation_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rotation_pi_about(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    return 2.0 * np.outer(u, u) - np.eye(3)


@dataclass(frozen=True)
class SymmetryElement:
    """Rigid motion of R^3 paired with the parameter-domain motion of C.

    The parameter motion is z -> mult * z + shift, with z conjugated first
    when conj is set (anti-holomorphic case).
    """

    kind: str
    spin: float
    rotation: np.ndarray
    mult: complex = 1.0
    shift: complex = 0.0
    conj: bool = False

    def param(self, z):
        z = np.asarray(z, dtype=complex)
        if self.conj:
            z = np.conj(z)
        return self.mult * z + self.shift

    def rigid(self, points):
        return np.asarray(points) @ self.rotation.T


def identity_symmetry(a: float) -> SymmetryElement:
    return SymmetryElement("identity", float(a), np.eye(3))


def translation_2pi(a: float) -> SymmetryElement:
    """F(z + 2*pi) = F(z); an honest symmetry only for integer spin."""
    if abs(a - round(a)) > 1e-12:
        raise ValueError("the 2*pi translation is a symmetry only for integer spin")
    return SymmetryElement("translation_2pi", float(a), np.eye(3), shift=2.0 * np.pi)


def axis_rotation(a: float) -> SymmetryElement:
    """Rotation by pi/a about the x3-axis.

    The matching parameter motion is the anti-holomorphic z -> conj(z) + pi/a:
    the spinning normal flips sign under the shift alone, so conjugation is
    required (determined numerically against the closed form).
    """
    return SymmetryElement("axis_rotation", float(a), _rotation_z(np.pi / a),
                           shift=np.pi / a, conj=True)


def line_rotation_180(a: float, k: int) -> SymmetryElement:
    """180-degree rotation about the line through the origin at angle k*pi/a.

    Parameter motion: the holomorphic point reflection z -> 2 t_k - z at
    t_k = k*pi/a.
    """
    tk = k * np.pi / a
    u = np.array([np.cos(tk), np.sin(tk), 0.0])
    return SymmetryElement("line_rotation_180", float(a), _rotation_pi_about(u),
                           mult=-1.0, shift=2.0 * tk)


def symmetry_residual(surface: SurfaceEvaluator, sym: SymmetryElement, grid) -> float:
    """max over the grid of |RigidMotion(F(z)) - F(ParamMotion(z))|."""
    if surface.kind not in (SurfaceEvaluator.CLOSED_CIRCLE, SurfaceEvaluator.WEIERSTRASS):
        raise ValueError("symmetry residual is defined for the circular evaluators")
    if abs(surface.spin - sym.spin) > 1e-12:
        raise ValueError(f"spin mismatch: surface {surface.spin}, symmetry {sym.spin}")
    grid = np.asarray(grid, dtype=complex).reshape(-1)
    lhs = sym.rigid(surface.position(grid))
    rhs = surface.position(sym.param(grid))
    return float(np.max(np.linalg.norm(lhs - rhs, axis=-1)))
