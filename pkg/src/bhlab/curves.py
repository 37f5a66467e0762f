"""Reference curves for tests, demos, and the comparison experiments."""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp

from .analytic import TAYLOR, HolomorphicCurve, fit_taylor_poly
from .bjorling import BjorlingSpec, FrameField


def circle_samples(n: int = 100, radius: float = 1.0):
    """Unit-speed samples of a planar circle: returns (t, points)."""
    t = np.linspace(0.0, 2.0 * np.pi * radius, n, endpoint=False)
    u = t / radius
    pts = np.stack([radius * np.cos(u), radius * np.sin(u), np.zeros_like(u)], axis=-1)
    return t, pts


def stadium_samples(n: int = 800, straight: float = 1.0):
    """Unit-speed stadium: two unit semicircles joined by straight segments.

    C^{1,1} but not C^2 (the curvature jumps between 0 and 1 at the four
    junctions). Returns (t, points) over one period of length 2*pi + 2*straight.
    """
    s = straight
    L = 2.0 * np.pi + 2.0 * s
    t = np.linspace(0.0, L, n, endpoint=False)
    pts = np.zeros((n, 3))
    for i, ti in enumerate(t):
        if ti < np.pi:  # right semicircle, from (s/2, -1) up to (s/2, 1)
            ang = ti - np.pi / 2
            pts[i] = [s / 2 + np.cos(ang), np.sin(ang), 0.0]
        elif ti < np.pi + s:  # top straight, heading -x
            pts[i] = [s / 2 - (ti - np.pi), 1.0, 0.0]
        elif ti < 2 * np.pi + s:  # left semicircle
            ang = np.pi / 2 + (ti - np.pi - s)
            pts[i] = [-s / 2 + np.cos(ang), np.sin(ang), 0.0]
        else:  # bottom straight, heading +x
            pts[i] = [-s / 2 + (ti - 2 * np.pi - s), -1.0, 0.0]
    return t, pts


def ellipse_point(u, ax: float = 1.2, ay: float = 1.0):
    u = np.asarray(u, dtype=float)
    return np.stack([ax * np.cos(u), ay * np.sin(u), np.zeros_like(u)], axis=-1)


def normalized_ellipse_spec(a_spin: float, ax: float = 1.2, ay: float = 1.0,
                            epsilon: float = 0.3, degree: int = 18) -> BjorlingSpec:
    """Ellipse arc at its major-axis vertex, normalized to curvature one.

    The vertex (ax, 0, 0) has curvature kappa = ax/ay^2; after dilating by
    kappa the arc passes through (1, 0, 0) with tangent (0, 1, 0) and its
    osculating circle is the unit circle, so the data matches the circle
    data to second order there. The arc and its planar rotation-minimizing
    frame are Taylor-fit on |t| <= epsilon (t = normalized arclength).
    """
    kappa = ax / ay ** 2

    def speed(u):
        return np.hypot(ax * np.sin(u), ay * np.cos(u))

    s_max = 1.05 * epsilon / kappa + 1e-9
    fwd = solve_ivp(lambda s, u: 1.0 / speed(u[0]), (0.0, s_max), [0.0],
                    dense_output=True, rtol=1e-12, atol=1e-14)
    bwd = solve_ivp(lambda s, u: -1.0 / speed(u[0]), (0.0, s_max), [0.0],
                    dense_output=True, rtol=1e-12, atol=1e-14)

    def u_of_s(s):
        s = np.asarray(s, dtype=float)
        out = np.empty_like(s)
        pos = s >= 0
        out[pos] = fwd.sol(s[pos])[0]
        out[~pos] = bwd.sol(-s[~pos])[0]
        return out

    t = np.linspace(-epsilon, epsilon, 4 * degree + 9)
    u = u_of_s(t / kappa)
    alpha = kappa * ellipse_point(u, ax, ay) + np.array([1.0 - kappa * ax, 0.0, 0.0])

    gp = np.stack([-ax * np.sin(u), ay * np.cos(u), np.zeros_like(u)], axis=-1)
    tang = gp / np.linalg.norm(gp, axis=-1, keepdims=True)
    # planar frame: n1 = tangent rotated +90 deg about e3, n2 = tangent x n1 = e3
    n1 = np.stack([-tang[:, 1], tang[:, 0], np.zeros_like(u)], axis=-1)
    n2 = np.cross(tang, n1)

    core = fit_taylor_poly(t, alpha, degree)
    n1_fit = fit_taylor_poly(t, n1, degree)
    n2_fit = fit_taylor_poly(t, n2, degree)
    return BjorlingSpec(core, FrameField(n1_fit, n2_fit), float(a_spin), speed_tol=1e-8)


def line_spec(a_spin: float) -> BjorlingSpec:
    """Straight line with a constant frame; its spinning surface is a helicoid."""
    core = HolomorphicCurve(TAYLOR, np.array([[1, 0, 0], [0, 1.0, 0]], dtype=complex))
    n1 = HolomorphicCurve(TAYLOR, np.array([[-1.0, 0, 0]], dtype=complex))
    n2 = HolomorphicCurve(TAYLOR, np.array([[0, 0, 1.0]], dtype=complex))
    return BjorlingSpec(core, FrameField(n1, n2), float(a_spin))
