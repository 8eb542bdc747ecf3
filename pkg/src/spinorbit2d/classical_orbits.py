"""Classical dynamics of a spinning particle in the attractive power-law
potential V(r) = -rho / r^(2k+2), restricted to zero total energy.

Units: hbar = M = 1, and the potential constant enters only through the
dimensionless combination 2*M*rho/hbar^2 (`dimensionless_strength`, default 1).

The zero-energy orbit has the closed form

    r(phi)^k = a_c^k * cos[k (phi - phi0)],   a_c^(2k) = strength / gamma^2,

valid wherever the cosine is positive; gamma is the conserved kinetic angular
momentum in units of hbar.  The in-plane spin components precess about z by
the angle q*phi, where q is the dimensionless spin-orbit strength, so the spin
fails to return to itself after a full circuit whenever q is not an integer.

`integrate_motion` provides the independent check: it integrates the reduced
equations of motion (polar coordinates, angular momentum eliminated exactly)
with an adaptive high-order Runge-Kutta method and reports states at the
accepted integrator steps.  Collisions with the center (petal tips, k > 0)
and finite-time escapes (k < 0) terminate the trajectory cleanly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np
from scipy.integrate import solve_ivp

__all__ = [
    "PotentialSpec",
    "OrbitSpec",
    "SpinVector",
    "ClassicalState",
    "TrajectoryResult",
    "as_exact_fraction",
    "orbit_radius",
    "orbit_polyline",
    "spin_precession",
    "integrate_motion",
    "energy",
    "z_velocity_diagnostic",
    "initial_state",
    "CLOSED_ORBIT_PRESETS",
    "OPEN_ORBIT_PRESETS",
    "ORBIT_PRESETS",
    "preset_orbit",
]

KLike = Union[Fraction, int, str, float]


def as_exact_fraction(value: KLike) -> Optional[Fraction]:
    """Exact rational from Fraction/int/str ('7/3', '2.5'); None for floats.

    Floats are deliberately not converted: a float k is treated as a
    non-exact (irrational) power index, which downgrades orbit closure
    detection to a single petal.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a valid power index")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    return None


@dataclass(frozen=True)
class PotentialSpec:
    """Model parameters: power index k, strength 2*M*rho/hbar^2, spin-orbit
    strength q, and classical spin magnitude lambda."""

    k: KLike
    dimensionless_strength: float = 1.0
    q: float = 0.1
    spin_magnitude: float = 1.0

    def __post_init__(self):
        kf = self.k_value
        if kf == 0.0 or not math.isfinite(kf):
            raise ValueError("k must be nonzero and finite")
        if not (self.dimensionless_strength > 0):
            raise ValueError("dimensionless_strength must be > 0")
        if not (self.spin_magnitude > 0):
            raise ValueError("spin_magnitude must be > 0")

    @property
    def k_fraction(self) -> Optional[Fraction]:
        return as_exact_fraction(self.k)

    @property
    def k_value(self) -> float:
        frac = as_exact_fraction(self.k)
        return float(frac) if frac is not None else float(self.k)

    @property
    def rho(self) -> float:
        # V(r) = -rho/r^(2k+2) with 2*M*rho/hbar^2 = dimensionless_strength
        return 0.5 * self.dimensionless_strength


@dataclass(frozen=True)
class OrbitSpec:
    """A zero-energy orbit: potential plus kinetic angular momentum gamma
    (in units of hbar) and initial apex angle phi0."""

    potential: PotentialSpec
    gamma: float
    phi0: float = 0.0

    def __post_init__(self):
        if not (float(self.gamma) > 0):
            raise ValueError("gamma must be > 0")

    @property
    def a_c(self) -> float:
        """Turning radius: a_c^(2k) * gamma^2 = dimensionless_strength."""
        k = self.potential.k_value
        g = float(self.gamma)
        return (self.potential.dimensionless_strength / (g * g)) ** (1.0 / (2.0 * k))

    @property
    def angular_momentum(self) -> float:
        return float(self.gamma)  # hbar = 1


@dataclass(frozen=True)
class SpinVector:
    sx: float
    sy: float
    sz: float

    @property
    def magnitude(self) -> float:
        return math.sqrt(self.sx**2 + self.sy**2 + self.sz**2)

    def validate_magnitude(self, spin_magnitude: float) -> None:
        mag2 = self.sx**2 + self.sy**2 + self.sz**2
        lam2 = spin_magnitude * spin_magnitude
        if abs(mag2 - lam2) > 1e-12 * lam2:
            raise ValueError(
                f"spin magnitude {math.sqrt(mag2):.17g} does not match "
                f"the configured lambda {spin_magnitude:.17g}"
            )


@dataclass(frozen=True)
class ClassicalState:
    r: float
    phi: float
    r_dot: float
    phi_dot: float
    spin: SpinVector
    t: float

    def __post_init__(self):
        if not (self.r > 0):
            raise ValueError("r must be > 0")


@dataclass(frozen=True)
class TrajectoryResult:
    """Integrator output: states at accepted steps plus how the run ended.

    `terminated` is None for a run that reached t_end, "center_collision"
    when the radius hit the floor at a petal tip (the physical collision
    singularity) and "escaped" when an open orbit crossed the radius cap.
    """

    states: tuple[ClassicalState, ...]
    terminated: Optional[str]

    @property
    def truncated(self) -> bool:
        return self.terminated is not None


# --- Figure presets: (k, gamma) pairs from the closed/open orbit catalogs ---
CLOSED_ORBIT_PRESETS: dict[str, tuple[Fraction, Fraction]] = {
    "fig1-k1": (Fraction(1), Fraction(15)),
    "fig1-k7over3": (Fraction(7, 3), Fraction(35)),
    "fig1-k4": (Fraction(4), Fraction(60)),
    "fig1-k9over2": (Fraction(9, 2), Fraction(135, 2)),
    "fig1-k5": (Fraction(5), Fraction(85)),
    "fig1-k17over3": (Fraction(17, 3), Fraction(75)),
}
OPEN_ORBIT_PRESETS: dict[str, tuple[Fraction, Fraction]] = {
    "fig2-km6": (Fraction(-6), Fraction(255, 4)),
    "fig2-km17over4": (Fraction(-17, 4), Fraction(90)),
}
ORBIT_PRESETS = {**CLOSED_ORBIT_PRESETS, **OPEN_ORBIT_PRESETS}


def preset_orbit(
    name: str,
    q: float = 0.1,
    dimensionless_strength: float = 1.0,
    spin_magnitude: float = 1.0,
    phi0: float = 0.0,
    gamma: Optional[KLike] = None,
) -> OrbitSpec:
    """OrbitSpec for a named preset; gamma may be overridden."""
    if name not in ORBIT_PRESETS:
        raise KeyError(f"unknown preset {name!r}; choices: {sorted(ORBIT_PRESETS)}")
    k, g = ORBIT_PRESETS[name]
    if gamma is not None:
        gf = as_exact_fraction(gamma)
        g = gf if gf is not None else gamma
    pot = PotentialSpec(
        k=k,
        dimensionless_strength=dimensionless_strength,
        q=q,
        spin_magnitude=spin_magnitude,
    )
    return OrbitSpec(potential=pot, gamma=float(g), phi0=phi0)


# ---------------------------------------------------------------------------
# Closed-form orbit
# ---------------------------------------------------------------------------


def orbit_radius(spec: OrbitSpec, phi: float) -> Optional[float]:
    """Radius of the zero-energy orbit at polar angle phi, or None when the
    angle lies outside the petal domain (cosine non-positive).

    Never returns a non-finite number: for k < 0 the radius diverges toward
    the petal edge but stays finite at any angle strictly inside the domain.
    """
    k = spec.potential.k_value
    c = math.cos(k * (phi - spec.phi0))
    if k > 0:
        if c < 0.0:
            return None
        return spec.a_c * c ** (1.0 / k)
    if c <= 0.0:
        return None
    return spec.a_c * c ** (1.0 / k)


def closure_info(spec: OrbitSpec) -> tuple[float, int, bool]:
    """(angular span to closure, petal count, exact_rational flag).

    For exact rational k = p/s (reduced) the orbit closes after phi spans
    2*pi*s and contains p petals.  A float (non-exact) k cannot be tested
    for closure, so the span degrades to a single petal sector with a
    warning.
    """
    frac = spec.potential.k_fraction
    if frac is None:
        warnings.warn(
            "power index k was given as a float; closure range defaults to "
            "one petal (pass a Fraction or 'p/s' string for exact closure)",
            stacklevel=2,
        )
        return 2.0 * math.pi / abs(spec.potential.k_value), 1, False
    p = abs(frac.numerator)
    s = frac.denominator
    return 2.0 * math.pi * s, p, True


def orbit_polyline(
    spec: OrbitSpec,
    samples_per_petal: int = 256,
    r_max: Optional[float] = None,
) -> np.ndarray:
    """Sampled orbit locus over the full closure range.

    Returns an (N, 4) array of rows (phi, r, x, y), angle-ordered, covering
    every petal on which the orbit is defined.  Open-orbit points with
    r > r_max are clipped out (default cap: 50 * a_c).
    """
    if samples_per_petal < 2:
        raise ValueError("samples_per_petal must be >= 2")
    a_c = spec.a_c
    if r_max is None:
        r_max = 50.0 * a_c
    if not (r_max > 0):
        raise ValueError("r_max must be > 0")
    k = spec.potential.k_value
    _, petals, _ = closure_info(spec)
    half_width = 0.5 * math.pi / abs(k)
    rows = []
    for m in range(petals):
        center = spec.phi0 + m * 2.0 * math.pi / abs(k)
        phi = np.linspace(center - half_width, center + half_width, samples_per_petal)
        c = np.cos(k * (phi - spec.phi0))
        if k > 0:
            r = a_c * np.clip(c, 0.0, None) ** (1.0 / k)
            keep = np.ones_like(r, dtype=bool)
        else:
            keep = c > 0.0
            r = np.zeros_like(c)
            r[keep] = a_c * c[keep] ** (1.0 / k)
        keep &= r <= r_max
        phi, r = phi[keep], r[keep]
        rows.append(np.column_stack([phi, r, r * np.cos(phi), r * np.sin(phi)]))
    return np.vstack(rows)


# ---------------------------------------------------------------------------
# Spin precession and out-of-plane diagnostic
# ---------------------------------------------------------------------------


def spin_precession(spec: PotentialSpec, s0: SpinVector, phi: float) -> SpinVector:
    """In-plane spin rotation by the accumulated angle q*phi; S_z constant.

        S_x =  S_x(0) cos(q phi) + S_y(0) sin(q phi)
        S_y = -S_x(0) sin(q phi) + S_y(0) cos(q phi)

    The magnitude is preserved exactly up to rounding.
    """
    s0.validate_magnitude(spec.spin_magnitude)
    ang = spec.q * phi
    c, s = math.cos(ang), math.sin(ang)
    return SpinVector(
        sx=s0.sx * c + s0.sy * s,
        sy=-s0.sx * s + s0.sy * c,
        sz=s0.sz,
    )


def z_velocity_diagnostic(spec: PotentialSpec, s0: SpinVector, r: float, phi: float) -> float:
    """Out-of-plane velocity zdot = -(q / M r) [S_x(0) sin(phi) - S_y(0) cos(phi)].

    First order in q; purely diagnostic, never fed back into the planar
    motion.
    """
    if not (r > 0):
        raise ValueError("r must be > 0")
    return -(spec.q / r) * (s0.sx * math.sin(phi) - s0.sy * math.cos(phi))


# ---------------------------------------------------------------------------
# Energy and numerical integration
# ---------------------------------------------------------------------------


def energy(spec: OrbitSpec, state: ClassicalState) -> float:
    """Total mechanical energy (1/2)(rdot^2 + r^2 phidot^2) - rho/r^(2k+2).

    Exactly zero (in exact arithmetic) on the closed-form orbit.
    """
    k = spec.potential.k_value
    rho = spec.potential.rho
    r = state.r
    return 0.5 * (state.r_dot**2 + (r * state.phi_dot) ** 2) - rho * r ** (-(2.0 * k + 2.0))


def initial_state(spec: OrbitSpec, s0: SpinVector, t: float = 0.0) -> ClassicalState:
    """Apex state: r = a_c, phi = phi0, rdot = 0, phidot = gamma / a_c^2."""
    a_c = spec.a_c
    return ClassicalState(
        r=a_c,
        phi=spec.phi0,
        r_dot=0.0,
        phi_dot=spec.angular_momentum / (a_c * a_c),
        spin=s0,
        t=t,
    )


def integrate_motion(
    spec: OrbitSpec,
    s0: SpinVector,
    t_end: float,
    tol: float = 1e-11,
    r_floor_factor: float = 1e-6,
    r_cap_factor: float = 100.0,
) -> TrajectoryResult:
    """Adaptive Runge-Kutta (DOP853, embedded error control) trajectory from
    the apex, reported at the accepted integrator steps.

    State vector: (r, p_r, S_x, S_y, phi) with the conserved angular momentum
    L = gamma eliminated analytically (phidot = L/r^2) and the in-plane spin
    driven by phidot.  t_end < 0 integrates the time-reversed branch, which
    by reflection symmetry is the other half of the petal.

    The run stops early at r <= r_floor_factor * a_c (collision with the
    center at a petal tip; the potential diverges there and the closed form,
    not the integrator, defines the continuation) or at
    r >= r_cap_factor * a_c (finite-time escape of open orbits).
    """
    s0.validate_magnitude(spec.potential.spin_magnitude)
    if t_end == 0.0 or not math.isfinite(t_end):
        raise ValueError("t_end must be nonzero and finite")
    if not (tol > 0):
        raise ValueError("tol must be > 0")
    pot = spec.potential
    k = pot.k_value
    rho = pot.rho
    q = pot.q
    L = spec.angular_momentum
    a_c = spec.a_c
    r_floor = r_floor_factor * a_c
    r_cap = r_cap_factor * a_c

    def rhs(_t, y):
        r, p_r, sx, sy, _phi = y
        inv_r2 = 1.0 / (r * r)
        phidot = L * inv_r2
        force = L * L * inv_r2 / r - (2.0 * k + 2.0) * rho * r ** (-(2.0 * k + 3.0))
        return (p_r, force, q * phidot * sy, -q * phidot * sx, phidot)

    def hit_floor(_t, y):
        return y[0] - r_floor

    hit_floor.terminal = True
    hit_floor.direction = -1.0

    def hit_cap(_t, y):
        return y[0] - r_cap

    hit_cap.terminal = True
    hit_cap.direction = 1.0

    y0 = (a_c, 0.0, s0.sx, s0.sy, spec.phi0)
    lam = pot.spin_magnitude
    atol = [tol * a_c, tol * max(1.0, L / a_c), tol * lam, tol * lam, tol]
    sol = solve_ivp(
        rhs,
        (0.0, t_end),
        y0,
        method="DOP853",
        rtol=tol,
        atol=atol,
        events=(hit_floor, hit_cap),
        dense_output=False,
    )
    terminated = None
    if sol.status == -1:
        # Step-size underflow right at a petal tip is the collision-with-
        # center singularity: the accepted steps are still a valid partial
        # trajectory.  Anything else is a genuine failure.
        r_last = sol.y[0, -1] if sol.t.size else math.inf
        if sol.t.size >= 2 and r_last < 0.5 * a_c and abs(r_last) < abs(sol.y[0, -2]):
            terminated = "center_collision"
        else:
            raise RuntimeError(f"integration failed: {sol.message}")
    elif sol.status == 1:
        terminated = "center_collision" if len(sol.t_events[0]) else "escaped"

    states = []
    for i in range(sol.t.size):
        r, p_r, sx, sy, phi = sol.y[:, i]
        states.append(
            ClassicalState(
                r=float(r),
                phi=float(phi),
                r_dot=float(p_r),
                phi_dot=float(L / (r * r)),
                spin=SpinVector(float(sx), float(sy), s0.sz),
                t=float(sol.t[i]),
            )
        )
    return TrajectoryResult(states=tuple(states), terminated=terminated)
