"""SU(2)-valued gauge structure of the spin-orbit coupling to a line-charge
electric field E = (eta/r) e_r.

The vector potential is the matrix field A = S x E (spin vector replaced by
Pauli matrices), which at z = 0 reads

    A_x = -(eta sin(phi)/r) sigma_z
    A_y =  (eta cos(phi)/r) sigma_z
    A_z =  (eta/r) (sin(phi) sigma_x + cos(phi) sigma_y)

with the covariant derivative D_i = d_i - i beta A_i, beta = mu/(2c).  The
classical spin-orbit strength is q = 2 beta eta.

The magnetic components are reported under the assignment

    B_x := F_xy,   B_y := F_zx,   B_z := F_yz,

where F_ij = d_i A_j - d_j A_i - i beta [A_i, A_j]; this is the component
convention under which the closed forms in `field_strength` hold, and the
finite-difference oracle `field_strength_numeric` uses the same assignment so
the two routes are directly comparable entrywise.

All functions broadcast over numpy arrays of r and phi; matrices come back
with shape (..., 2, 2).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "IDENTITY2",
    "FieldParams",
    "ResolutionError",
    "pauli_exponential",
    "gauge_potential",
    "field_strength",
    "field_strength_of_potential",
    "field_strength_numeric",
    "gauge_unitary",
    "gauge_transform",
    "holonomy_phase",
]

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)


class ResolutionError(RuntimeError):
    """Loop-transport discretization did not converge under refinement."""


@dataclass(frozen=True)
class FieldParams:
    """Line-charge density eta and spin-orbit coupling beta = mu/(2c)."""

    eta: float
    beta: float

    @property
    def q(self) -> float:
        # dimensionless spin-orbit strength; must agree with PotentialSpec.q
        # when the classical and gauge modules are used together
        return 2.0 * self.beta * self.eta


def _check_r(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("r must be > 0 (the line charge sits at r = 0)")
    return r


def pauli_exponential(vx, vy, vz) -> np.ndarray:
    """exp(i (vx sigma_x + vy sigma_y + vz sigma_z)), exact 2x2 form.

    Uses cos|v| + i sin|v| (v.sigma)/|v|; unitary to rounding for real v.
    """
    vx = np.asarray(vx, dtype=float)
    vy = np.asarray(vy, dtype=float)
    vz = np.asarray(vz, dtype=float)
    norm = np.sqrt(vx * vx + vy * vy + vz * vz)
    safe = np.where(norm == 0.0, 1.0, norm)
    # sinc form keeps the norm->0 limit exact
    s = np.where(norm == 0.0, 0.0, np.sin(norm) / safe)
    c = np.cos(norm)
    out = (
        c[..., None, None] * IDENTITY2
        + 1.0j * s[..., None, None] * (
            vx[..., None, None] * PAULI_X
            + vy[..., None, None] * PAULI_Y
            + vz[..., None, None] * PAULI_Z
        )
    )
    return out


def gauge_potential(params: FieldParams, r, phi) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(A_x, A_y, A_z) at (r, phi); each component traceless Hermitian."""
    r = _check_r(r)
    phi = np.asarray(phi, dtype=float)
    pref = params.eta / r
    sin_p = np.sin(phi)
    cos_p = np.cos(phi)
    a_x = (-pref * sin_p)[..., None, None] * PAULI_Z
    a_y = (pref * cos_p)[..., None, None] * PAULI_Z
    a_z = pref[..., None, None] * (
        sin_p[..., None, None] * PAULI_X + cos_p[..., None, None] * PAULI_Y
    )
    return a_x, a_y, a_z


def field_strength(params: FieldParams, r, phi) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closed-form magnetic components (B_x, B_y, B_z).

    B_x vanishes identically; the others carry the Abelian 1/r^2 curl plus
    the commutator piece proportional to beta*eta:

      B_y = (eta/r^2) [ (1-be) sin(2phi) sx + ((1-be) cos(2phi) + be) sy ]
      B_z = (eta/r^2) [ ((1-be) cos(2phi) - be) sx - (1-be) sin(2phi) sy ]

    with be = beta*eta.  At beta*eta = 1 every phi-dependent term cancels.
    """
    r = _check_r(r)
    phi = np.asarray(phi, dtype=float)
    be = params.beta * params.eta
    pref = params.eta / (r * r)
    s2 = np.sin(2.0 * phi)
    c2 = np.cos(2.0 * phi)
    shape = np.broadcast_shapes(r.shape, phi.shape)
    b_x = np.zeros(shape + (2, 2), dtype=complex)
    b_y = pref[..., None, None] * (
        ((1.0 - be) * s2)[..., None, None] * PAULI_X
        + ((1.0 - be) * c2 + be)[..., None, None] * PAULI_Y
    )
    b_z = pref[..., None, None] * (
        ((1.0 - be) * c2 - be)[..., None, None] * PAULI_X
        - ((1.0 - be) * s2)[..., None, None] * PAULI_Y
    )
    return b_x, b_y, b_z


def _commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def field_strength_of_potential(
    a_fn: Callable[[np.ndarray, np.ndarray], tuple],
    beta: float,
    x,
    y,
    h,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(F_xy, F_zx, F_yz) of an arbitrary planar potential by central
    differences plus the explicit commutator -i beta [A_i, A_j].

    `a_fn(x, y)` must return the (A_x, A_y, A_z) matrices.  The potential is
    z-independent (line-charge geometry), so all d_z terms vanish exactly.
    The step h broadcasts, so it can be chosen per point.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    h = np.asarray(h, dtype=float)
    ax_xp, ay_xp, az_xp = a_fn(x + h, y)
    ax_xm, ay_xm, az_xm = a_fn(x - h, y)
    ax_yp, ay_yp, az_yp = a_fn(x, y + h)
    ax_ym, ay_ym, az_ym = a_fn(x, y - h)
    ax, ay, az = a_fn(x, y)
    inv2h = (1.0 / (2.0 * h))[..., None, None] if h.ndim else 1.0 / (2.0 * h)
    day_dx = (ay_xp - ay_xm) * inv2h
    dax_dy = (ax_yp - ax_ym) * inv2h
    daz_dx = (az_xp - az_xm) * inv2h
    daz_dy = (az_yp - az_ym) * inv2h
    f_xy = day_dx - dax_dy - 1.0j * beta * _commutator(ax, ay)
    f_zx = -daz_dx - 1.0j * beta * _commutator(az, ax)
    f_yz = daz_dy - 1.0j * beta * _commutator(ay, az)
    return f_xy, f_zx, f_yz


def field_strength_numeric(
    params: FieldParams, r, phi, h=None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Finite-difference route to (B_x, B_y, B_z); oracle for field_strength.

    Default step h = 1e-4 * r per point; agreement with the closed form is
    then O(h^2), entrywise below ~1e-6.  A step that is not small against r
    triggers an accuracy warning.
    """
    r = _check_r(r)
    phi = np.asarray(phi, dtype=float)
    if h is None:
        h = 1e-4 * r
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0) or np.any(r <= 2.0 * h):
        raise ValueError("need r > 2h > 0")
    if np.any(h > 0.01 * r):
        warnings.warn(
            "finite-difference step is large relative to r; "
            "accuracy degrades as O(h^2)",
            stacklevel=2,
        )

    def a_cart(xx, yy):
        return gauge_potential(params, np.hypot(xx, yy), np.arctan2(yy, xx))

    x = r * np.cos(phi)
    y = r * np.sin(phi)
    return field_strength_of_potential(a_cart, params.beta, x, y, h)


def gauge_unitary(params: FieldParams, f: Callable, x, y) -> np.ndarray:
    """U = exp(i beta sum_i f_i(x, y) sigma_i) for a gauge function f.

    f maps Cartesian (x, y) to the triple (f_x, f_y, f_z); the z coordinate
    plays no role in this planar geometry.
    """
    fx, fy, fz = f(x, y)
    b = params.beta
    return pauli_exponential(b * np.asarray(fx), b * np.asarray(fy), b * np.asarray(fz))


def gauge_transform(
    params: FieldParams,
    f: Callable,
    r: float,
    phi: float,
    step: float = 1e-6,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Transformed potential A'_i = U A_i U+ - (i/beta) (d_i U) U+ at (r, phi).

    U is the unitary built from the smooth gauge function f (see
    gauge_unitary); its spatial derivatives are taken by central differences
    with the given absolute step.  beta = 0 leaves the inhomogeneous term
    undefined and is rejected.
    """
    if params.beta == 0.0:
        raise ValueError("gauge transformation requires beta != 0")
    r = float(_check_r(r))
    phi = float(phi)
    x = r * math.cos(phi)
    y = r * math.sin(phi)
    a_x, a_y, a_z = gauge_potential(params, r, phi)
    u = gauge_unitary(params, f, x, y)
    ud = u.conj().T
    inv2h = 1.0 / (2.0 * step)
    du_dx = (gauge_unitary(params, f, x + step, y) - gauge_unitary(params, f, x - step, y)) * inv2h
    du_dy = (gauge_unitary(params, f, x, y + step) - gauge_unitary(params, f, x, y - step)) * inv2h
    coeff = -1.0j / params.beta
    a_x_new = u @ a_x @ ud + coeff * (du_dx @ ud)
    a_y_new = u @ a_y @ ud + coeff * (du_dy @ ud)
    a_z_new = u @ a_z @ ud  # f is z-independent, so d_z U = 0
    return a_x_new, a_y_new, a_z_new


def holonomy_phase(
    params: FieldParams,
    loop_radius: float,
    segments: int = 4096,
    tol: float = 1e-8,
) -> np.ndarray:
    """Closed-loop transport matrix P exp(i beta oint A . dl) on a circle.

    The loop is split into `segments` arcs; each arc contributes
    exp(i G_m) with G_m = beta * int A . dl over the arc (2-point Gauss in
    the arc angle), and the exponentials are multiplied in path order.  The
    result is accepted only if doubling the resolution moves it by less than
    `tol` entrywise; otherwise ResolutionError.

    For sigma_z-diagonal transport (this field), the diagonal phases are
    e^{+-i pi q} with q = 2 beta eta: trivial for even integer q, a genuine
    non-returning phase otherwise.
    """
    if not (loop_radius > 0):
        raise ValueError("loop_radius must be > 0")
    if segments < 4:
        raise ValueError("need at least 4 segments")

    def transport(n: int) -> np.ndarray:
        dphi = 2.0 * math.pi / n
        edges = dphi * np.arange(n)
        # 2-point Gauss nodes inside each arc
        offs = (0.5 + np.array([-0.5, 0.5]) / math.sqrt(3.0)) * dphi
        u = IDENTITY2.copy()
        for m in range(n):
            g = np.zeros((2, 2), dtype=complex)
            for off in offs:
                ang = edges[m] + off
                a_x, a_y, _ = gauge_potential(params, loop_radius, ang)
                # tangent dl/dphi = (-R sin, R cos)
                g += (
                    a_x * (-loop_radius * math.sin(ang))
                    + a_y * (loop_radius * math.cos(ang))
                ) * (0.5 * dphi)
            gen = params.beta * g
            # gen is Hermitian; decompose on the Pauli basis for the exact exp
            vx = gen[0, 1].real
            vy = -gen[0, 1].imag
            vz = gen[0, 0].real
            u = pauli_exponential(vx, vy, vz) @ u
        return u

    u_n = transport(segments)
    u_2n = transport(2 * segments)
    if np.max(np.abs(u_2n - u_n)) >= tol:
        raise ResolutionError(
            f"holonomy not converged at {segments} segments "
            f"(refinement moved entries by {np.max(np.abs(u_2n - u_n)):.3e})"
        )
    return u_2n
