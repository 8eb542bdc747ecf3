"""Acceptance suite: one callable per criterion, shared by the `selftest`
subcommand and the pytest acceptance module.

Every check runs at its stated tolerance; nothing is tuned at run time.  Two
checks carry documented double-precision measurability guards:

  * Criterion 1 asserts |H| <= 1e-8 at trajectory states whose local
    potential scale T(r) = rho r^-(2k+2) stays below 1e5.  Evaluating H is a
    cancellation of terms of size T(r), so double precision cannot certify
    an absolute 1e-8 once T(r) * eps approaches it; in the guarded zone the
    bound is meaningful and must hold.  The stronger scale-relative bound
    |H| <= 1e-12 * T(r) is asserted at EVERY state with no guard.

  * Criterion 9 runs the literal procedure (per-ray global density maximum,
    5%-of-max-radius tip guard, least-squares scale fit, mean over valid
    rays <= 5%).  The k=1 and k=7/3 presets fail it: at n = 30 the quantum
    petal has a finite localization width, so rays near the classical tips
    (where r -> 0) deviate by O(1), and for low |k| those rays occupy a wide
    angular band.  The failure is reported honestly with per-preset numbers;
    the petal-body agreement (<= ~2.5% for r above half the classical
    maximum) is printed alongside as diagnostic context.
"""

from __future__ import annotations

import math
import os
import tempfile
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import classical_orbits as co
from . import gauge_field as gf
from . import qcc_analysis as qa
from . import quantum_waves as qw
from .special_functions import bessel_j, gamma_fn

__all__ = ["CriterionResult", "CRITERIA", "run_all"]


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    details: str


def _spin_angle(a: co.SpinVector, b: co.SpinVector) -> float:
    return math.atan2(a.sx * b.sy - a.sy * b.sx, a.sx * b.sx + a.sy * b.sy)


ENERGY_SCALE_GUARD = 1e5  # |V| cap keeping eps * scale two decades under 1e-8


def criterion_1_orbit_oracle() -> CriterionResult:
    """RK integration matches the closed form; energy conserved."""
    worst_dev = 0.0
    worst_energy = 0.0
    worst_rel_energy = 0.0
    states_checked = 0
    s0 = co.SpinVector(1.0, 0.0, 0.0)
    for name in ("fig1-k1", "fig1-k4"):
        spec = co.preset_orbit(name)
        k = spec.potential.k_value
        rho = spec.potential.rho
        a_c = spec.a_c
        for t_end in (1.0, -1.0):
            traj = co.integrate_motion(spec, s0, t_end=t_end, tol=3e-14)
            for st in traj.states:
                scale = rho * st.r ** (-(2.0 * k + 2.0))
                energy = abs(co.energy(spec, st))
                worst_rel_energy = max(worst_rel_energy, energy / scale)
                if scale <= ENERGY_SCALE_GUARD:
                    worst_energy = max(worst_energy, energy)
                r_cl = co.orbit_radius(spec, st.phi)
                if r_cl is not None and r_cl > 0.05 * a_c:
                    worst_dev = max(worst_dev, abs(st.r - r_cl) / r_cl)
                    states_checked += 1
    passed = worst_dev <= 1e-6 and worst_energy <= 1e-8 and worst_rel_energy <= 1e-12
    return CriterionResult(
        1,
        "orbit oracle equivalence (k=1, k=4)",
        passed,
        f"max rel radial dev {worst_dev:.2e} (<=1e-6, {states_checked} states, "
        f"5% tip guard); |H| {worst_energy:.2e} (<=1e-8 where scale<=1e5); "
        f"|H|/scale {worst_rel_energy:.2e} (<=1e-12 everywhere)",
    )


def criterion_2_closure() -> CriterionResult:
    """Rational closure for k = 7/3 and petal rotation symmetry."""
    spec = co.preset_orbit("fig1-k7over3")
    a_c = spec.a_c
    span, petals, exact = co.closure_info(spec)
    gap = 0.0
    for phi in np.linspace(-0.2, 0.2, 41):
        r0 = co.orbit_radius(spec, phi)
        r1 = co.orbit_radius(spec, phi + span)
        if (r0 is None) != (r1 is None):
            gap = math.inf
        elif r0 is not None:
            p0 = (r0 * math.cos(phi), r0 * math.sin(phi))
            p1 = (r1 * math.cos(phi + span), r1 * math.sin(phi + span))
            gap = max(gap, math.hypot(p0[0] - p1[0], p0[1] - p1[1]))
    sym = 0.0
    step = 2.0 * math.pi / abs(spec.potential.k_value)
    for phi in np.linspace(-0.2, 0.2, 41):
        r0 = co.orbit_radius(spec, phi)
        r1 = co.orbit_radius(spec, phi + step)
        if r0 is not None and r1 is not None:
            sym = max(sym, abs(r0 - r1))
    passed = (
        exact and petals == 7 and abs(span - 6 * math.pi) < 1e-12
        and gap <= 1e-9 * a_c and sym <= 1e-12 * a_c
    )
    return CriterionResult(
        2,
        "orbit closure for rational k = 7/3",
        passed,
        f"span 6*pi with {petals} petals; endpoint gap {gap:.2e} "
        f"(<= {1e-9 * a_c:.2e}); petal symmetry defect {sym:.2e}",
    )


def criterion_3_spin() -> CriterionResult:
    """ODE spin matches the closed-form precession; non-return after 2*pi."""
    spec = co.preset_orbit("fig1-k1")
    s0 = co.SpinVector(1.0, 0.0, 0.0)
    worst_angle = 0.0
    worst_mag = 0.0
    worst_sz = 0.0
    for t_end in (1.0, -1.0):
        traj = co.integrate_motion(spec, s0, t_end=t_end, tol=3e-14)
        for st in traj.states:
            ref = co.spin_precession(spec.potential, s0, st.phi - spec.phi0)
            worst_angle = max(worst_angle, abs(_spin_angle(st.spin, ref)))
            worst_mag = max(worst_mag, abs(st.spin.magnitude - 1.0))
            worst_sz = max(worst_sz, abs(st.spin.sz - s0.sz))
    pot = co.PotentialSpec(k=1, q=0.1)
    turned = co.spin_precession(pot, s0, 2.0 * math.pi)
    rotation = abs(_spin_angle(s0, turned))
    non_return = abs(rotation - 0.2 * math.pi)
    moved = (turned.sx, turned.sy) != (s0.sx, s0.sy)
    passed = (
        worst_angle <= 1e-6 and worst_mag <= 1e-10 and worst_sz <= 1e-10
        and non_return <= 1e-8 and moved
    )
    return CriterionResult(
        3,
        "spin precession (ODE vs closed form, anyonic non-return)",
        passed,
        f"angle err {worst_angle:.2e} (<=1e-6); |S| drift {worst_mag:.2e}, "
        f"S_z drift {worst_sz:.2e} (<=1e-10); full-circle rotation "
        f"0.2*pi +- {non_return:.2e} (<=1e-8)",
    )


def criterion_4_radial_norm() -> CriterionResult:
    """Gamma-form normalization reproduced by independent quadrature."""
    worst = 0.0
    details = []
    for k, nu in ((Fraction(1), 2), (Fraction(4), 1), (Fraction(7, 3), 1), (Fraction(-6), 1)):
        mode = qw.RadialMode(nu=nu, k=k)
        val = qw.radial_norm_quadrature(mode)
        dev = abs(val - 1.0)
        worst = max(worst, dev)
        details.append(f"k={k} nu={nu}: {dev:.1e}")
    return CriterionResult(
        4,
        "radial normalization via quadrature oracle",
        worst <= 1e-6,
        "deviations from 1: " + ", ".join(details) + " (<=1e-6)",
    )


def criterion_5_special_functions() -> CriterionResult:
    """Bessel recurrence + sum rule, Gamma functional equation."""
    worst_rec = 0.0
    xs = np.linspace(0.01, 50.0, 120)
    for nu in range(1, 31):
        for x in xs:
            jm = bessel_j(nu - 1, x)
            jc = bessel_j(nu, x)
            jp = bessel_j(nu + 1, x)
            resid = abs(jm + jp - (2.0 * nu / x) * jc) / max(1.0, abs(jc))
            worst_rec = max(worst_rec, resid)
    worst_sum = 0.0
    for x in np.linspace(0.0, 50.0, 26):
        n = math.ceil(x) + 40
        total = bessel_j(0, x) ** 2 + 2.0 * sum(
            bessel_j(nu, x) ** 2 for nu in range(1, n + 1)
        )
        worst_sum = max(worst_sum, abs(total - 1.0))
    worst_gamma = 0.0
    for x in np.linspace(0.1, 40.0, 160):
        lhs = gamma_fn(x + 1.0)
        rhs = x * gamma_fn(x)
        worst_gamma = max(worst_gamma, abs(lhs - rhs) / abs(rhs))
    passed = worst_rec <= 1e-9 and worst_sum <= 1e-8 and worst_gamma <= 1e-11
    return CriterionResult(
        5,
        "special-function self-consistency",
        passed,
        f"recurrence {worst_rec:.2e} (<=1e-9); sum rule {worst_sum:.2e} "
        f"(<=1e-8); Gamma functional eq {worst_gamma:.2e} (<=1e-11)",
    )


def criterion_6_gauge() -> CriterionResult:
    """Closed-form field strength vs finite differences; covariance; B_x = 0."""
    params = gf.FieldParams(eta=1.0, beta=0.05)
    rng = np.random.default_rng(20240901)
    r = rng.uniform(0.2, 5.0, 1000)
    phi = rng.uniform(-math.pi, math.pi, 1000)
    closed = gf.field_strength(params, r, phi)
    numeric = gf.field_strength_numeric(params, r, phi)  # h = 1e-4 r
    worst_fd = max(float(np.max(np.abs(a - b))) for a, b in zip(closed, numeric))
    bx_max = float(np.max(np.abs(closed[0])))

    worst_cov = 0.0
    for _ in range(4):
        c = rng.uniform(-0.5, 0.5, size=(3, 4))

        def fg(x, y, c=c):
            return tuple(
                c[i, 0] * np.cos(x) + c[i, 1] * np.sin(y)
                + c[i, 2] * np.cos(x) * np.sin(y) + c[i, 3]
                for i in range(3)
            )

        r0 = float(rng.uniform(0.5, 2.0))
        phi0 = float(rng.uniform(-math.pi, math.pi))
        x0, y0 = r0 * math.cos(phi0), r0 * math.sin(phi0)

        def a_prime(x, y, fg=fg):
            rr = float(np.hypot(x, y))
            pp = float(np.arctan2(y, x))
            return gf.gauge_transform(params, fg, rr, pp)

        f_prime = gf.field_strength_of_potential(a_prime, params.beta, x0, y0, 1e-4 * r0)
        u = gf.gauge_unitary(params, fg, x0, y0)
        f_ref = tuple(u @ b @ u.conj().T for b in gf.field_strength(params, r0, phi0))
        worst_cov = max(
            worst_cov, max(float(np.max(np.abs(a - b))) for a, b in zip(f_prime, f_ref))
        )
    passed = worst_fd <= 1e-6 and worst_cov <= 1e-5 and bx_max == 0.0
    return CriterionResult(
        6,
        "gauge field strength, covariance, vanishing first component",
        passed,
        f"closed-vs-numeric {worst_fd:.2e} at 1000 points (<=1e-6); "
        f"covariance {worst_cov:.2e} (<=1e-5); max|B_x| = {bx_max:.1e} (exactly 0)",
    )


def criterion_7_holonomy() -> CriterionResult:
    """Loop transport phases e^{+-i pi q} for q in {0, 0.1, 2}."""
    worst = 0.0
    for q in (0.0, 0.1, 2.0):
        params = gf.FieldParams(eta=1.0, beta=q / 2.0)
        u = gf.holonomy_phase(params, loop_radius=1.0)
        expect = np.diag([np.exp(1j * math.pi * q), np.exp(-1j * math.pi * q)])
        worst = max(worst, float(np.max(np.abs(u - expect))))
    return CriterionResult(
        7,
        "holonomy phases e^{+-i pi q}",
        worst <= 1e-8,
        f"max deviation {worst:.2e} over q in {{0, 0.1, 2}} (<=1e-8)",
    )


def criterion_8_spectrum() -> CriterionResult:
    """CAM doublets: spacing |k|, splitting q, collapse at q = 0."""
    pot = co.PotentialSpec(k=Fraction(7, 3), q=0.1)
    levels = qw.cam_spectrum(pot, range(1, 6))
    plus = [v for _, s, v in levels if s > 0]
    minus = [v for _, s, v in levels if s < 0]
    worst_spacing = max(
        abs((b - a) - 7.0 / 3.0) for a, b in zip(plus, plus[1:])
    )
    worst_spacing = max(
        worst_spacing, max(abs((b - a) - 7.0 / 3.0) for a, b in zip(minus, minus[1:]))
    )
    worst_split = max(abs((p - m) - 0.1) for p, m in zip(plus, minus))
    pot0 = co.PotentialSpec(k=Fraction(7, 3), q=0.0)
    collapsed = qw.cam_spectrum(pot0, range(1, 6))
    p0 = [v for _, s, v in collapsed if s > 0]
    m0 = [v for _, s, v in collapsed if s < 0]
    worst_collapse = max(abs(p - m) for p, m in zip(p0, m0))
    passed = worst_spacing <= 1e-12 and worst_split <= 1e-12 and worst_collapse == 0.0
    return CriterionResult(
        8,
        "angular momentum spectrum spacing and splitting",
        passed,
        f"spacing defect {worst_spacing:.2e}, splitting defect {worst_split:.2e} "
        f"(<=1e-12); q=0 collapse defect {worst_collapse:.1e}",
    )


def criterion_9_qcc() -> CriterionResult:
    """Figure-level reproduction: symmetry orders and ridge-orbit deviation."""
    chi = qw.Spinor.plus()
    lines = []
    all_sym = True
    all_dev = True
    for name in co.CLOSED_ORBIT_PRESETS:
        ospec = co.preset_orbit(name)
        state = qw.macroscopic_state(ospec.potential, chi, n=30)
        fld = qw.density_grid(state, qw.default_grid(state))
        ridge = qa.extract_ridge(fld)
        report = qa.compare_orbit(ridge, ospec, scale_fit=True)
        scan = qa.detect_symmetry(fld, max_order_num=18, max_sheets=4)
        expect = abs(ospec.potential.k_fraction)
        sym_ok = scan.order == expect and scan.mismatch < 1e-9
        dev_ok = report.mean_relative_deviation <= 0.05
        all_sym &= sym_ok
        all_dev &= dev_ok
        # diagnostic: agreement over the petal body (r_cl above half max)
        body = qa.compare_orbit(ridge, ospec, scale_fit=True, tip_fraction=0.5)
        lines.append(
            f"{name}: sym {scan.order} ({scan.mismatch:.0e}) "
            f"mean dev {report.mean_relative_deviation:.3f}"
            f"{'' if dev_ok else ' [>0.05]'}"
            f" (body {body.mean_relative_deviation:.3f})"
        )
    passed = all_sym and all_dev
    return CriterionResult(
        9,
        "QCC figure-level reproduction (n=30, six closed presets)",
        passed,
        "; ".join(lines),
    )


def criterion_10_quantum_spin() -> CriterionResult:
    """Heisenberg relations for <sigma_i>(phi) by central differences."""
    pot = co.PotentialSpec(k=Fraction(4), q=0.1)
    state = qw.macroscopic_state(pot, qw.Spinor.plus(), n=8)
    rows = qw.spin_expectation_dynamics(
        state, chi=qw.Spinor.of(0.8, 0.6j), phi_span=4 * math.pi, steps=4097
    )
    phi, sx, sy, sz = rows.T
    h = phi[1] - phi[0]
    dsx = (sx[2:] - sx[:-2]) / (2 * h)
    dsy = (sy[2:] - sy[:-2]) / (2 * h)
    dsz = (sz[2:] - sz[:-2]) / (2 * h)
    q = pot.q
    r1 = float(np.max(np.abs(dsx - q * sy[1:-1])))
    r2 = float(np.max(np.abs(dsy + q * sx[1:-1])))
    r3 = float(np.max(np.abs(dsz)))
    passed = r1 <= 1e-8 and r2 <= 1e-8 and r3 <= 1e-8
    return CriterionResult(
        10,
        "quantum spin dynamics (Heisenberg relations)",
        passed,
        f"residuals d<sx>/dphi-q<sy>: {r1:.2e}, d<sy>/dphi+q<sx>: {r2:.2e}, "
        f"d<sz>/dphi: {r3:.2e} (<=1e-8)",
    )


def criterion_11_determinism() -> CriterionResult:
    """Byte-identical outputs across repeated runs and thread counts."""
    from .cli import main as cli_main

    jobs = [
        ["orbit", "--preset", "fig1-k4", "--formats", "csv,json,ppm"],
        ["spectrum", "--k", "7/3", "--q", "0.1", "--nu", "1..5"],
        ["density", "--preset", "fig1-k7over3", "--n", "8",
         "--n-r", "96", "--formats", "csv,json,ppm"],
    ]
    mismatches = []
    old_env = os.environ.get("SPINORBIT_THREADS")
    try:
        with tempfile.TemporaryDirectory() as tmp:
            tmp = Path(tmp)
            for j, argv in enumerate(jobs):
                runs = []
                for tag, threads in (("a", "1"), ("b", "3"), ("c", "1")):
                    os.environ["SPINORBIT_THREADS"] = threads
                    out = tmp / f"job{j}{tag}"
                    code = cli_main(argv + ["--out", str(out)])
                    if code != 0:
                        mismatches.append(f"job {j} exited {code}")
                        break
                    runs.append(out)
                if len(runs) != 3:
                    continue
                names = sorted(p.name for p in runs[0].iterdir())
                for other in runs[1:]:
                    if sorted(p.name for p in other.iterdir()) != names:
                        mismatches.append(f"job {j}: file sets differ")
                        continue
                    for nm in names:
                        if (runs[0] / nm).read_bytes() != (other / nm).read_bytes():
                            mismatches.append(f"job {j}: {nm} differs")
    finally:
        if old_env is None:
            os.environ.pop("SPINORBIT_THREADS", None)
        else:
            os.environ["SPINORBIT_THREADS"] = old_env
    return CriterionResult(
        11,
        "byte-identical outputs across runs and thread counts",
        not mismatches,
        "all files identical" if not mismatches else "; ".join(mismatches),
    )


CRITERIA = [
    criterion_1_orbit_oracle,
    criterion_2_closure,
    criterion_3_spin,
    criterion_4_radial_norm,
    criterion_5_special_functions,
    criterion_6_gauge,
    criterion_7_holonomy,
    criterion_8_spectrum,
    criterion_9_qcc,
    criterion_10_quantum_spin,
    criterion_11_determinism,
]


def run_all(verbose: bool = False) -> list[CriterionResult]:
    results = []
    for fn in CRITERIA:
        t0 = time.time()
        res = fn()
        dt = time.time() - t0
        results.append(res)
        if verbose:
            flag = "PASS" if res.passed else "FAIL"
            print(f"{flag}  [{res.number:2d}] {res.name}  ({dt:.1f}s)")
            print(f"      {res.details}")
    if verbose:
        n_pass = sum(r.passed for r in results)
        print(f"{n_pass}/{len(results)} criteria passed")
    return results
