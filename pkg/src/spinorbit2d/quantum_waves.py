"""Zero-energy quantum modes and their coherent superposition.

Separable zero-energy solutions in V(r) = -rho/r^(2k+2) (units hbar = M = 1,
2*M*rho/hbar^2 = 1):

  * angular part Y(phi) = C e^{i j phi} e^{i (q sigma_z / 2) phi} |chi> with
    C = sqrt(|k|/(2 pi)); the 2*pi/|k| rotational boundary condition forces
    j = nu |k| for integer nu >= 1, fractional whenever |k| is;
  * radial part R(r) = N * J_nu(1/(|k| r^k)), normalized against
    int R^2 r dr = 1 by the closed form

      N^2 = 2 sqrt(pi) |k|^(2/k+1) G(1/k+1) G(1/k+nu+1)
            / [ G(1/k+1/2) G(nu-1/k) ],     G = Gamma,

    which exists only for nu > 1/k (k > 0) resp. |k| > 2 (k < 0): exactly
    where the mode is square-integrable.

The macroscopic state is the binomially weighted coherent superposition of
these degenerate modes; for large n its density collapses onto the classical
zero-energy orbit locus.  By default only normalizable modes enter and the
weights are renormalized; the literal sum from nu = 0 is available behind an
explicit unsafe-modes flag that normalizes numerically on a truncated radial
domain instead.

Grid evaluation parallelizes over radial rows (SPINORBIT_THREADS caps the
worker count); per-node values are independent, so results are identical at
any thread count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .classical_orbits import KLike, PotentialSpec, as_exact_fraction
from .special_functions import (
    bessel_j,
    gamma_fn,
    integrate,
    oscillatory_tail_integral,
)

__all__ = [
    "Spinor",
    "AngularMode",
    "RadialMode",
    "PolarGrid",
    "WaveField",
    "MacroscopicState",
    "angular_wavefunction",
    "radial_wavefunction",
    "radial_norm_quadrature",
    "macroscopic_state",
    "default_grid",
    "density_grid",
    "angular_marginal",
    "cam_spectrum",
    "spin_expectation_dynamics",
    "worker_count",
]


def worker_count() -> int:
    """Parallel workers for grid evaluation: SPINORBIT_THREADS, default all."""
    raw = os.environ.get("SPINORBIT_THREADS", "")
    if raw.strip():
        try:
            n = int(raw)
        except ValueError as exc:
            raise ValueError(f"SPINORBIT_THREADS must be an integer, got {raw!r}") from exc
        return max(1, n)
    return os.cpu_count() or 1


@dataclass(frozen=True)
class Spinor:
    """Normalized 2-component spin state."""

    up: complex
    down: complex

    def __post_init__(self):
        norm = abs(self.up) ** 2 + abs(self.down) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"spinor must be normalized, got |chi|^2 = {norm!r}")

    @staticmethod
    def plus() -> "Spinor":
        return Spinor(1.0 + 0.0j, 0.0j)

    @staticmethod
    def minus() -> "Spinor":
        return Spinor(0.0j, 1.0 + 0.0j)

    @staticmethod
    def plus_x() -> "Spinor":
        s = 1.0 / math.sqrt(2.0)
        return Spinor(s + 0.0j, s + 0.0j)

    @staticmethod
    def of(up: complex, down: complex) -> "Spinor":
        norm = math.sqrt(abs(up) ** 2 + abs(down) ** 2)
        if norm == 0.0:
            raise ValueError("zero spinor")
        return Spinor(up / norm, down / norm)

    def sigma_expectations(self) -> tuple[float, float, float]:
        z = self.up.conjugate() * self.down
        return 2.0 * z.real, 2.0 * z.imag, abs(self.up) ** 2 - abs(self.down) ** 2


def _k_value(k: KLike) -> float:
    frac = as_exact_fraction(k)
    return float(frac) if frac is not None else float(k)


def _normalizable(nu: int, k: float) -> tuple[bool, str]:
    if nu < 1:
        return False, "nu must be a positive integer for a normalizable mode"
    if k > 0 and not (nu > 1.0 / k):
        return False, (
            f"mode nu={nu} is not square-integrable for k={k:g}: needs nu > 1/k "
            f"= {1.0 / k:g} (the normalization constant degenerates there)"
        )
    if k < 0 and not (abs(k) > 2.0):
        return False, (
            f"no normalizable modes for k={k:g}: the radial integral diverges "
            "at infinity unless |k| > 2"
        )
    return True, ""


@dataclass(frozen=True)
class AngularMode:
    """One angular eigenfunction: orbital eigenvalue j = nu |k| plus the
    spin-orbit phase twist e^{i q sigma_z phi / 2}."""

    nu: int
    k: KLike
    q: float = 0.1

    def __post_init__(self):
        if self.nu != int(self.nu) or self.nu < 1:
            raise ValueError("nu must be a positive integer")
        if _k_value(self.k) == 0.0:
            raise ValueError("k must be nonzero")

    @property
    def orbital_eigenvalue(self) -> float:
        """j = nu * |k|; fractional whenever |k| is."""
        return self.nu * abs(_k_value(self.k))

    @property
    def norm_constant(self) -> float:
        """C = sqrt(|k| / (2 pi)): unit norm over one 2 pi/|k| sector."""
        return math.sqrt(abs(_k_value(self.k)) / (2.0 * math.pi))


def angular_wavefunction(mode: AngularMode, chi: Spinor, phi) -> np.ndarray:
    """Y(phi) = C e^{i j phi} (e^{i q phi/2} up, e^{-i q phi/2} down).

    Broadcasts over phi; the trailing axis is the spinor component.  The
    pointwise norm is C^2 independent of phi.
    """
    phi = np.asarray(phi, dtype=float)
    j = mode.orbital_eigenvalue
    base = mode.norm_constant * np.exp(1j * j * phi)
    half = 0.5 * mode.q * phi
    out = np.empty(phi.shape + (2,), dtype=complex)
    out[..., 0] = base * np.exp(1j * half) * chi.up
    out[..., 1] = base * np.exp(-1j * half) * chi.down
    return out


@dataclass
class RadialMode:
    """Radial factor R(r) = N * J_nu(1/(|k| r^k)).

    With `unsafe_r_max` left at None the mode must be square-integrable and N
    comes from the Gamma-function closed form.  Passing a finite
    `unsafe_r_max` admits the non-normalizable orders (including nu = 0) by
    normalizing numerically on (0, r_max] instead; such modes exist only for
    exploratory superpositions and are marked `unsafe`.
    """

    nu: int
    k: KLike
    unsafe_r_max: Optional[float] = None
    norm_constant: float = field(init=False)

    def __post_init__(self):
        if self.nu != int(self.nu) or self.nu < 0:
            raise ValueError("nu must be a non-negative integer")
        kf = _k_value(self.k)
        if kf == 0.0:
            raise ValueError("k must be nonzero")
        if self.unsafe_r_max is None:
            ok, why = _normalizable(self.nu, kf)
            if not ok:
                raise ValueError(why)
            self.norm_constant = math.sqrt(_norm_constant_sq(self.nu, kf))
        else:
            if not (self.unsafe_r_max > 0):
                raise ValueError("unsafe_r_max must be > 0")
            raw = _truncated_norm_integral(self.nu, kf, self.unsafe_r_max)
            self.norm_constant = 1.0 / math.sqrt(raw)

    @property
    def unsafe(self) -> bool:
        return self.unsafe_r_max is not None

    def bessel_argument(self, r: float) -> float:
        kf = _k_value(self.k)
        return 1.0 / (abs(kf) * r**kf)


def _norm_constant_sq(nu: int, k: float) -> float:
    inv_k = 1.0 / k
    return (
        2.0
        * math.sqrt(math.pi)
        * abs(k) ** (2.0 * inv_k + 1.0)
        * gamma_fn(inv_k + 1.0)
        * gamma_fn(inv_k + nu + 1.0)
        / (gamma_fn(inv_k + 0.5) * gamma_fn(nu - inv_k))
    )


def _truncated_norm_integral(nu: int, k: float, r_max: float) -> float:
    """int_0^{r_max} J_nu(1/(|k| r^k))^2 r dr for the unsafe-mode path.

    For k > 0 the integrand oscillates with ever-shrinking period toward
    r = 0; the head below r_0 is dropped once the oscillation envelope bounds
    its mass under 1e-9: int_0^{r0} (2/(pi x(r))) r dr = (2|k|/pi) r0^(k+2)/(k+2).
    """
    if k > 0:
        r_lo = ((k + 2.0) * math.pi * 1e-9 / (2.0 * abs(k))) ** (1.0 / (k + 2.0))
        r_lo = min(r_lo, 0.5 * r_max)
    else:
        r_lo = 1e-9 * r_max

    def integrand(r: float) -> float:
        return bessel_j(nu, 1.0 / (abs(k) * r**k)) ** 2 * r

    res = integrate(integrand, r_lo, r_max, abs_tol=1e-9, rel_tol=1e-9,
                    max_evals=2_000_000)
    return res.value


def radial_wavefunction(mode: RadialMode, r) -> np.ndarray | float:
    """R(r) = N J_nu(1/(|k| r^k)); decays like r^(-k*nu) for k > 0 at large r."""
    kf = _k_value(mode.k)
    scalar = np.isscalar(r)
    rr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(rr <= 0):
        raise ValueError("r must be > 0")
    x = 1.0 / (abs(kf) * rr**kf)
    out = np.fromiter(
        (bessel_j(mode.nu, xi) for xi in x), dtype=float, count=x.size
    ).reshape(rr.shape)
    out *= mode.norm_constant
    return float(out[0]) if scalar else out


def radial_norm_quadrature(
    mode: RadialMode, abs_tol: float = 1e-7, rel_tol: float = 1e-7
) -> float:
    """int_0^inf R^2 r dr by quadrature: the independent check on the
    Gamma-function normalization.

    Evaluated after the exact substitution x = 1/(|k| r^k), under which the
    integral becomes N^2 |k|^(-2/k-1) * int_0^inf J_nu(x)^2 x^(-2/k-1) dx;
    the slowly decaying oscillatory tail is summed between Bessel zeros with
    series acceleration.  Unsafe modes integrate their truncated r-domain
    directly.
    """
    kf = _k_value(mode.k)
    nu = mode.nu
    if mode.unsafe:
        return mode.norm_constant**2 * _truncated_norm_integral(nu, kf, mode.unsafe_r_max)
    lam = 2.0 / kf + 1.0

    def integrand(x: float) -> float:
        return bessel_j(nu, x) ** 2 * x ** (-lam)

    x_cut = max(25.0, 1.1 * nu + 6.0 * max(1.0, nu) ** (1.0 / 3.0) + 10.0)
    head = integrate(integrand, 1e-300, x_cut, abs_tol=0.02 * abs_tol, rel_tol=1e-12)
    tail = oscillatory_tail_integral(
        integrand,
        x_cut,
        lambda x: bessel_j(nu, x),
        math.pi,
        abs_tol=abs_tol,
        rel_tol=rel_tol,
    )
    prefactor = mode.norm_constant**2 * abs(kf) ** (-2.0 / kf - 1.0)
    return prefactor * (head.value + tail.value)


# ---------------------------------------------------------------------------
# Macroscopic superposition
# ---------------------------------------------------------------------------


def default_nu_min(k: KLike) -> int:
    """Smallest integer strictly greater than max(0, 1/k)."""
    kf = _k_value(k)
    return max(1, math.floor(max(0.0, 1.0 / kf)) + 1)


def _binomial_weights(n: int, nus: Sequence[int]) -> np.ndarray:
    # sqrt(binom(n, nu)) / 2^(n/2), in log space to survive large n,
    # then renormalized so the squares sum to one over the kept modes
    logs = np.array(
        [0.5 * (math.lgamma(n + 1) - math.lgamma(v + 1) - math.lgamma(n - v + 1)) for v in nus]
    )
    logs -= 0.5 * n * math.log(2.0)
    w = np.exp(logs - logs.max())
    w /= math.sqrt(float(np.sum(w * w)))
    return w


class MacroscopicState:
    """Coherent superposition Psi(r, phi) = sum_nu w_nu R_nu(r) Y_nu,chi(phi).

    Callable at any (r, phi); exposes the mode table so analysis code can
    re-evaluate shifted densities cheaply.
    """

    def __init__(
        self,
        spec: PotentialSpec,
        chi: Spinor,
        n: int,
        nu_min: Optional[int] = None,
        include_unsafe_modes: bool = False,
        unsafe_r_max: float = 50.0,
    ):
        if n < 1:
            raise ValueError("n must be >= 1")
        kf = spec.k_value
        self.spec = spec
        self.chi = chi
        self.n = int(n)
        safe_start = default_nu_min(spec.k)
        if include_unsafe_modes:
            lo = 0 if nu_min is None else int(nu_min)
        else:
            lo = safe_start if nu_min is None else int(nu_min)
            if lo < safe_start:
                raise ValueError(
                    f"nu_min={lo} includes non-normalizable modes for k={kf:g}; "
                    f"smallest safe value is {safe_start} "
                    "(pass include_unsafe_modes=True to force)"
                )
        if lo > n:
            raise ValueError(f"empty mode set: nu_min={lo} exceeds n={n}")
        self.nu_values = tuple(range(lo, n + 1))
        self.weights = _binomial_weights(n, self.nu_values)
        self.radial_modes = tuple(
            RadialMode(nu=v, k=spec.k)
            if _normalizable(v, kf)[0]
            else RadialMode(nu=v, k=spec.k, unsafe_r_max=unsafe_r_max)
            for v in self.nu_values
        )
        self.includes_unsafe = any(m.unsafe for m in self.radial_modes)
        # orbital eigenvalues j = nu |k| drive all angular phases; the
        # angular norm constant sqrt(|k|/2 pi) is shared by every mode
        self.frequencies = np.array([v * abs(kf) for v in self.nu_values], dtype=float)
        self.norm_prefactor = math.sqrt(abs(kf) / (2.0 * math.pi))

    # -- evaluation ---------------------------------------------------------

    def radial_matrix(self, r: np.ndarray) -> np.ndarray:
        """Weighted radial values w_nu R_nu(r_i), shape (len(r), n_modes).

        Rows are evaluated in parallel worker chunks; the output is
        assembled by index, so the result is identical at any worker count.
        """
        r = np.asarray(r, dtype=float).ravel()
        if np.any(r <= 0):
            raise ValueError("r must be > 0")
        out = np.empty((r.size, len(self.nu_values)))
        workers = worker_count()

        def fill(rows: range) -> None:
            for i in rows:
                for m, mode in enumerate(self.radial_modes):
                    out[i, m] = self.weights[m] * radial_wavefunction(mode, r[i])

        if workers > 1 and r.size >= 8:
            chunks = np.array_split(np.arange(r.size), workers)
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(fill, [range(c[0], c[-1] + 1) for c in chunks if c.size]))
        else:
            fill(range(r.size))
        return out

    def orbital_amplitude(self, r, phi) -> np.ndarray:
        """C * sum_nu w_nu R_nu(r) e^{i nu |k| phi}, broadcast over (r, phi)."""
        r = np.asarray(r, dtype=float)
        phi = np.asarray(phi, dtype=float)
        shape = np.broadcast_shapes(r.shape, phi.shape)
        rb = np.broadcast_to(r, shape).ravel()
        pb = np.broadcast_to(phi, shape).ravel()
        r_unique, inverse = np.unique(rb, return_inverse=True)
        rm = self.radial_matrix(r_unique)[inverse]  # (N, modes)
        phases = np.exp(1j * np.outer(pb, self.frequencies))  # (N, modes)
        amp = self.norm_prefactor * np.sum(rm * phases, axis=1)
        return amp.reshape(shape)

    def amplitude(self, r, phi) -> np.ndarray:
        """Full 2-spinor amplitude; trailing axis is the spinor component."""
        orb = self.orbital_amplitude(r, phi)
        phi = np.asarray(phi, dtype=float)
        half = 0.5 * self.spec.q * phi
        out = np.empty(orb.shape + (2,), dtype=complex)
        out[..., 0] = orb * np.exp(1j * half) * self.chi.up
        out[..., 1] = orb * np.exp(-1j * half) * self.chi.down
        return out

    def density(self, r, phi) -> np.ndarray:
        """|Psi|^2 summed over the spinor components = |orbital amplitude|^2."""
        orb = self.orbital_amplitude(r, phi)
        return np.abs(orb) ** 2

    __call__ = amplitude

    # -- derived quantities ---------------------------------------------------

    def radial_peak(self) -> float:
        """Radius maximizing the largest-order mode density R_n(r)^2."""
        mode = self.radial_modes[-1]
        nu = max(mode.nu, 1)
        kf = _k_value(mode.k)
        # bracket the first (global) maximum of J_nu(x)^2 in x, then refine
        x_lo, x_hi = 0.25 * nu if nu > 1 else 0.1, nu + 12.0 * max(1.0, nu ** (1.0 / 3.0))
        xs = np.linspace(x_lo, x_hi, 600)
        vals = [bessel_j(mode.nu, x) ** 2 for x in xs]
        i = int(np.argmax(vals))
        lo, hi = xs[max(0, i - 1)], xs[min(len(xs) - 1, i + 1)]
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        a, b = lo, hi
        fa_x, fb_x = a + (1 - invphi) * (b - a), a + invphi * (b - a)
        fa, fb = -bessel_j(mode.nu, fa_x) ** 2, -bessel_j(mode.nu, fb_x) ** 2
        for _ in range(80):
            if fa < fb:
                b, fb_x, fb = fb_x, fa_x, fa
                fa_x = a + (1 - invphi) * (b - a)
                fa = -bessel_j(mode.nu, fa_x) ** 2
            else:
                a, fa_x, fa = fa_x, fb_x, fb
                fb_x = a + invphi * (b - a)
                fb = -bessel_j(mode.nu, fb_x) ** 2
            if b - a < 1e-12 * max(1.0, b):
                break
        x_star = 0.5 * (a + b)
        return (abs(kf) * x_star) ** (-1.0 / kf)

    def phi_dot_expectation(self) -> float:
        """Mean angular velocity <L_z / (M r^2)> in the superposition.

        Reduces (after the exact angular integral) to
        sum_nu w_nu^2 * nu |k| * int R_nu^2 / r dr, each radial factor
        evaluated by quadrature.
        """
        kf = self.spec.k_value
        total = 0.0
        for w, mode in zip(self.weights, self.radial_modes):
            if mode.unsafe:
                raise ValueError("phi_dot expectation undefined with unsafe modes")
            nu = mode.nu

            # int R^2 r^-1 dr maps to (N^2/|k|) int J^2 x^-1 dx
            def integrand(x: float, _nu=nu) -> float:
                return bessel_j(_nu, x) ** 2 / x

            x_cut = max(25.0, 1.1 * nu + 6.0 * max(1.0, nu) ** (1.0 / 3.0) + 10.0)
            head = integrate(integrand, 1e-300, x_cut, abs_tol=1e-10, rel_tol=1e-10)
            # report-grade accuracy: there is no closed-form target to meet
            tail = oscillatory_tail_integral(
                integrand, x_cut, lambda x, _nu=nu: bessel_j(_nu, x), math.pi,
                abs_tol=1e-7, rel_tol=1e-7,
            )
            radial = mode.norm_constant**2 * (head.value + tail.value) / abs(kf)
            total += float(w * w) * nu * abs(kf) * radial
        return total


def macroscopic_state(
    spec: PotentialSpec,
    chi: Spinor,
    n: int,
    nu_min: Optional[int] = None,
    include_unsafe_modes: bool = False,
    unsafe_r_max: float = 50.0,
) -> MacroscopicState:
    """Build the n-quantum coherent superposition (see MacroscopicState)."""
    return MacroscopicState(
        spec, chi, n,
        nu_min=nu_min,
        include_unsafe_modes=include_unsafe_modes,
        unsafe_r_max=unsafe_r_max,
    )


# ---------------------------------------------------------------------------
# Grids and fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolarGrid:
    r_min: float
    r_max: float
    n_r: int
    n_phi: int
    phi_min: float
    phi_max: float
    spacing: str = "log"

    def __post_init__(self):
        if not (0 < self.r_min < self.r_max):
            raise ValueError("need 0 < r_min < r_max")
        if self.n_r < 2 or self.n_phi < 2:
            raise ValueError("need n_r >= 2 and n_phi >= 2")
        if self.spacing not in ("log", "linear"):
            raise ValueError("spacing must be 'log' or 'linear'")
        if not (self.phi_max > self.phi_min):
            raise ValueError("need phi_max > phi_min")

    def r_values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.r_min, self.r_max, self.n_r)
        return np.linspace(self.r_min, self.r_max, self.n_r)

    def phi_values(self) -> np.ndarray:
        # half-open angular range: the endpoint duplicates phi_min by
        # periodicity of the density
        return self.phi_min + (self.phi_max - self.phi_min) * np.arange(self.n_phi) / self.n_phi


@dataclass(frozen=True)
class WaveField:
    """Spinor amplitude and density sampled on a polar grid.

    `generator` retains the producing state so analysis code can evaluate
    the exact density at off-grid angles (symmetry scans need that).
    """

    r: np.ndarray
    phi: np.ndarray
    values: np.ndarray  # (n_r, n_phi, 2) complex
    density: np.ndarray  # (n_r, n_phi)
    grid_norm: float
    generator: Optional[MacroscopicState] = None


def default_grid(
    state: MacroscopicState,
    n_r: int = 192,
    n_phi: Optional[int] = None,
    phi0: float = 0.0,
) -> PolarGrid:
    """Log-spaced radii around the largest-mode density peak, uniform angles
    over the full closure range with a node count divisible by the petal
    count."""
    r_peak = state.radial_peak()
    frac = as_exact_fraction(state.spec.k)
    if frac is not None:
        petals = abs(frac.numerator)
        sheets = frac.denominator
    else:
        petals, sheets = 1, 1
    span = 2.0 * math.pi * sheets
    if n_phi is None:
        per_petal = max(24, 512 // petals)
        n_phi = petals * per_petal
    else:
        n_phi = petals * max(2, math.ceil(n_phi / petals))
    return PolarGrid(
        r_min=1e-3 * r_peak,
        r_max=10.0 * r_peak,
        n_r=n_r,
        n_phi=n_phi,
        phi_min=phi0,
        phi_max=phi0 + span,
        spacing="log",
    )


def density_grid(state: MacroscopicState, grid: PolarGrid) -> WaveField:
    """Fill spinor values and density on the grid; deterministic."""
    r = grid.r_values()
    phi = grid.phi_values()
    rm = state.radial_matrix(r)  # (n_r, modes)
    phases = np.exp(1j * np.outer(state.frequencies, phi))  # (modes, n_phi)
    orbital = state.norm_prefactor * (rm @ phases)  # (n_r, n_phi)
    half = 0.5 * state.spec.q * phi
    values = np.empty(orbital.shape + (2,), dtype=complex)
    values[..., 0] = orbital * (np.exp(1j * half) * state.chi.up)[None, :]
    values[..., 1] = orbital * (np.exp(-1j * half) * state.chi.down)[None, :]
    density = np.abs(orbital) ** 2
    # grid share of the probability per angular period 2 pi/|k|, with the
    # polar measure r dr dphi (the state is unit-normalized on one period,
    # and grids often span several petals)
    dphi = (grid.phi_max - grid.phi_min) / grid.n_phi
    raw = float(np.trapezoid(density.mean(axis=1) * r, r) * dphi * grid.n_phi)
    periods = (grid.phi_max - grid.phi_min) * abs(state.spec.k_value) / (2.0 * math.pi)
    grid_norm = raw / max(periods, 1e-300)
    return WaveField(
        r=r, phi=phi, values=values, density=density,
        grid_norm=grid_norm, generator=state,
    )


def angular_marginal(field: WaveField) -> np.ndarray:
    """Angular probability profile int rho(r, phi) r dr per grid ray
    (trapezoid on the grid radii); shape (n_phi,)."""
    weighted = field.density * field.r[:, None]
    return np.trapezoid(weighted, field.r, axis=0)


# ---------------------------------------------------------------------------
# Spectrum and spin dynamics
# ---------------------------------------------------------------------------


def cam_spectrum(
    spec: PotentialSpec, nu_values: Iterable[int]
) -> list[tuple[int, int, float]]:
    """Total angular momentum doublets (nu, sign, Lambda) with
    Lambda = nu |k| + sign * q/2 (hbar = 1) for sigma_z eigenstates.

    Consecutive levels at fixed sign are spaced by exactly |k|; the q/2
    shift makes every level non-integer whenever q is not an even integer
    times an integer offset - the anyonic signature.
    """
    kf = spec.k_value
    out = []
    for nu in nu_values:
        ok, why = _normalizable(int(nu), kf)
        if not ok:
            raise ValueError(why)
        base = int(nu) * abs(kf)
        for sign in (+1, -1):
            out.append((int(nu), sign, base + sign * 0.5 * spec.q))
    return out


def spin_expectation_dynamics(
    state: MacroscopicState,
    chi: Optional[Spinor] = None,
    phi_span: float = 4.0 * math.pi,
    steps: int = 2048,
) -> np.ndarray:
    """Rows (phi, <sx>, <sy>, <sz>) of the spin expectation along the
    angular coordinate.

    The spatial profile factors out, so the expectations follow directly
    from the twisted spinor e^{i q sigma_z phi / 2} |chi>:
    the in-plane pair rotates by -q*phi while <sz> stays put, the exact
    quantum image of the classical precession.
    """
    if steps < 2:
        raise ValueError("steps must be >= 2")
    chi = chi if chi is not None else state.chi
    q = state.spec.q
    phi = np.linspace(0.0, phi_span, steps)
    z0 = chi.up.conjugate() * chi.down
    z = z0 * np.exp(-1j * q * phi)
    sz = abs(chi.up) ** 2 - abs(chi.down) ** 2
    return np.column_stack([phi, 2.0 * z.real, 2.0 * z.imag, np.full_like(phi, sz)])
