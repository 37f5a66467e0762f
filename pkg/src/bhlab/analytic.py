"""Coefficient-based holomorphic vector curves and contour quadrature.

Everything downstream evaluates on the objects in this module: entire
C -> C^3 curves in a trigonometric or Taylor basis, with exact
differentiation, plus Gauss-Legendre quadrature along straight segments.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TRIG = "trig"
TAYLOR = "taylor"

# Quadrature defaults: order-16 Gauss-Legendre, panels no longer than 0.25.
# The integrands are entire with moderate growth on the strips we use, so
# fixed-order panels are spectrally accurate.
DEFAULT_QUAD_ORDER = 16
DEFAULT_PANEL_LENGTH = 0.25


class NumericalError(RuntimeError):
    """A numerical procedure failed to converge at the requested resolution."""


def require_finite(z, what="argument"):
    """Reject NaN/Inf scalars or arrays."""
    arr = np.asarray(z)
    if not np.all(np.isfinite(arr.view(float) if arr.dtype.kind == "c" else arr)):
        raise ValueError(f"non-finite {what}")
    return z


@dataclass(frozen=True)
class HolomorphicCurve:
    """Entire vector-valued function C -> C^3 given by coefficients.

    basis "trig":   value(z) = sum_{k=-K..K} coeffs[k+K] * exp(i*k*omega*z),
                    periodic with period 2*pi/omega in Re z.
    basis "taylor": value(z) = sum_{k=0..K} coeffs[k] * z**k.

    coeffs has shape (2K+1, 3) for trig and (K+1, 3) for taylor.
    Differentiation is exact and stays in the same basis.
    """

    basis: str
    coeffs: np.ndarray
    omega: float = 1.0

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.ndim != 2 or coeffs.shape[1] != 3:
            raise ValueError("coeffs must have shape (m, 3)")
        if self.basis == TRIG:
            if coeffs.shape[0] % 2 != 1:
                raise ValueError("trig basis needs an odd coefficient count (k = -K..K)")
            if not self.omega > 0:
                raise ValueError("omega must be positive")
        elif self.basis != TAYLOR:
            raise ValueError(f"unknown basis {self.basis!r}")
        require_finite(coeffs, "coefficients")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def degree(self) -> int:
        if self.basis == TRIG:
            return (self.coeffs.shape[0] - 1) // 2
        return self.coeffs.shape[0] - 1

    @property
    def period(self) -> float:
        if self.basis != TRIG:
            raise ValueError("only trig curves are periodic")
        return 2.0 * np.pi / self.omega

    def derivative(self, order: int = 1) -> "HolomorphicCurve":
        if order < 0:
            raise ValueError("derivative order must be >= 0")
        if self.basis == TRIG:
            K = self.degree
            k = np.arange(-K, K + 1)
            factors = (1j * k * self.omega) ** order
            return HolomorphicCurve(TRIG, self.coeffs * factors[:, None], self.omega)
        coeffs = self.coeffs
        for _ in range(order):
            if coeffs.shape[0] == 1:
                coeffs = np.zeros((1, 3), dtype=complex)
                break
            k = np.arange(1, coeffs.shape[0])
            coeffs = coeffs[1:] * k[:, None]
        return HolomorphicCurve(TAYLOR, coeffs)

    def eval(self, z, deriv_order: int = 0) -> np.ndarray:
        """Value (or exact derivative) at complex z; broadcasts over arrays.

        Returns an array of shape z.shape + (3,).
        """
        require_finite(z, "evaluation point")
        z = np.asarray(z, dtype=complex)
        curve = self if deriv_order == 0 else self.derivative(deriv_order)
        if curve.basis == TRIG:
            K = curve.degree
            k = np.arange(-K, K + 1)
            basis = np.exp(1j * curve.omega * z[..., None] * k)
        else:
            k = np.arange(curve.coeffs.shape[0])
            basis = z[..., None] ** k
        return basis @ curve.coeffs

    def conjugate_symmetric(self, tol: float = 1e-12) -> bool:
        """True when the curve is real-valued on the real axis."""
        if self.basis == TRIG:
            flipped = np.conj(self.coeffs[::-1])
        else:
            flipped = np.conj(self.coeffs)
        return bool(np.max(np.abs(self.coeffs - flipped)) <= tol)


def eval_holo(curve: HolomorphicCurve, z, deriv_order: int = 0) -> np.ndarray:
    """Evaluate the deriv_order-th derivative of curve at z (order 0, 1, or 2)."""
    if deriv_order not in (0, 1, 2):
        raise ValueError(f"unsupported derivative order {deriv_order}")
    return curve.eval(z, deriv_order)


@dataclass(frozen=True)
class ContourSpec:
    """Straight-segment contour z0 -> z1 with composite Gauss-Legendre panels."""

    z0: complex
    z1: complex
    order: int = DEFAULT_QUAD_ORDER
    subdivisions: int = 1

    def __post_init__(self):
        require_finite([self.z0, self.z1], "contour endpoints")
        if self.order < 2:
            raise ValueError("quadrature order must be >= 2")
        if self.subdivisions < 1:
            raise ValueError("subdivision count must be >= 1")

    @classmethod
    def segment(cls, z0, z1, order: int = DEFAULT_QUAD_ORDER,
                panel_length: float = DEFAULT_PANEL_LENGTH) -> "ContourSpec":
        """Contour with panels no longer than panel_length."""
        n = max(1, int(np.ceil(abs(complex(z1) - complex(z0)) / panel_length)))
        return cls(complex(z0), complex(z1), order, n)


_GL_CACHE: dict = {}


def _gl_nodes(order: int):
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


def integrate_segment(f, z0: complex, z1: complex, order: int = DEFAULT_QUAD_ORDER,
                      subdivisions: int | None = None,
                      panel_length: float = DEFAULT_PANEL_LENGTH):
    """Gauss-Legendre integral of a vectorized callable along z0 -> z1.

    f maps an array of complex points to an array (..., d) of values.
    """
    z0, z1 = complex(z0), complex(z1)
    dz = z1 - z0
    if dz == 0:
        return np.zeros(3, dtype=complex)
    if subdivisions is None:
        subdivisions = max(1, int(np.ceil(abs(dz) / panel_length)))
    nodes, weights = _gl_nodes(order)
    edges = np.linspace(0.0, 1.0, subdivisions + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    halves = 0.5 * (edges[1:] - edges[:-1])
    # all panel nodes at once: (subdivisions, order)
    ts = mids[:, None] + halves[:, None] * nodes[None, :]
    pts = z0 + dz * ts
    vals = f(pts.reshape(-1))
    vals = vals.reshape(subdivisions, len(nodes), -1)
    acc = np.einsum("s,q,sqd->d", halves, weights, vals)
    return acc * dz


def contour_integral(curve: HolomorphicCurve, contour: ContourSpec) -> np.ndarray:
    """Integral of the curve along the straight contour.

    Path independence for entire integrands is a tested property, not an
    assumption. A zero-length contour integrates to the zero vector.
    """
    return integrate_segment(curve.eval, contour.z0, contour.z1,
                             order=contour.order, subdivisions=contour.subdivisions)


def fit_trig_poly(t, values, degree: int, period: float = 2.0 * np.pi) -> HolomorphicCurve:
    """Least-squares trigonometric polynomial through real samples.

    t: (m,) parameters in [0, period); values: (m, 3) real samples.
    The result is real-valued on the real axis by construction: we solve in
    the cos/sin basis and assemble conjugate-symmetric coefficients.
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[1] != 3:
        raise ValueError("values must have shape (m, 3)")
    m = t.shape[0]
    if m != values.shape[0]:
        raise ValueError("t and values length mismatch")
    if m < 2 * degree + 1:
        raise ValueError(f"need at least {2 * degree + 1} samples for degree {degree}, got {m}")
    if np.any(t < 0) or np.any(t >= period):
        raise ValueError(f"sample parameters must lie in [0, {period})")
    omega = 2.0 * np.pi / period

    cols = [np.ones_like(t)]
    names = ["cos 0"]
    for k in range(1, degree + 1):
        cols.append(np.cos(k * omega * t))
        names.append(f"cos {k}")
        cols.append(np.sin(k * omega * t))
        names.append(f"sin {k}")
    A = np.stack(cols, axis=1)

    rank = np.linalg.matrix_rank(A, tol=1e-10 * max(1.0, float(np.abs(A).max())))
    if rank < A.shape[1]:
        _, _, vt = np.linalg.svd(A)
        worst = int(np.argmax(np.abs(vt[-1])))
        raise ValueError(f"rank-deficient trig fit: frequency term '{names[worst]}' "
                         f"is not determined by the samples")

    sol, *_ = np.linalg.lstsq(A, values, rcond=None)
    coeffs = np.zeros((2 * degree + 1, 3), dtype=complex)
    coeffs[degree] = sol[0]
    for k in range(1, degree + 1):
        ak = sol[2 * k - 1]
        bk = sol[2 * k]
        coeffs[degree + k] = 0.5 * (ak - 1j * bk)
        coeffs[degree - k] = 0.5 * (ak + 1j * bk)
    return HolomorphicCurve(TRIG, coeffs, omega)


def fit_taylor_poly(t, values, degree: int, scale: float | None = None) -> HolomorphicCurve:
    """Least-squares polynomial through real samples near t = 0.

    Solved in the scaled variable t/scale for conditioning; coefficients are
    returned in the plain monomial basis.
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if t.shape[0] < degree + 1:
        raise ValueError("not enough samples for the requested degree")
    if scale is None:
        scale = float(np.max(np.abs(t))) or 1.0
    A = (t[:, None] / scale) ** np.arange(degree + 1)
    sol, *_ = np.linalg.lstsq(A, values, rcond=None)
    coeffs = sol / scale ** np.arange(degree + 1)[:, None]
    return HolomorphicCurve(TAYLOR, coeffs.astype(complex))
