"""Tests for angular/radial modes, the coherent superposition, spectrum, and
quantum spin precession.

Normalization references were frozen from 40-digit evaluations of the
Gamma-function closed form; the quadrature routes here are independent of it.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from spinorbit2d.classical_orbits import PotentialSpec
from spinorbit2d.quantum_waves import (
    AngularMode,
    MacroscopicState,
    PolarGrid,
    RadialMode,
    Spinor,
    angular_marginal,
    angular_wavefunction,
    cam_spectrum,
    default_grid,
    default_nu_min,
    density_grid,
    macroscopic_state,
    radial_norm_quadrature,
    radial_wavefunction,
    spin_expectation_dynamics,
)
from spinorbit2d.special_functions import bessel_j, integrate, oscillatory_tail_integral


class TestSpinor:
    def test_normalization_enforced(self):
        with pytest.raises(ValueError):
            Spinor(1.0, 1.0)

    def test_of_normalizes(self):
        s = Spinor.of(3.0, 4.0j)
        assert abs(abs(s.up) ** 2 + abs(s.down) ** 2 - 1.0) < 1e-14

    def test_sigma_expectations(self):
        sx, sy, sz = Spinor.plus().sigma_expectations()
        assert (sx, sy, sz) == (0.0, 0.0, 1.0)
        sx, sy, sz = Spinor.plus_x().sigma_expectations()
        assert abs(sx - 1.0) < 1e-14 and abs(sy) < 1e-14 and abs(sz) < 1e-14


class TestAngularMode:
    def test_eigenvalue_and_norm_constant(self):
        m = AngularMode(nu=3, k=Fraction(7, 3), q=0.1)
        assert abs(m.orbital_eigenvalue - 7.0) < 1e-14
        assert abs(m.norm_constant**2 * 2.0 * math.pi / (7.0 / 3.0) - 1.0) < 1e-14

    def test_positive_integer_required(self):
        with pytest.raises(ValueError):
            AngularMode(nu=0, k=1)

    def test_phi_zero_is_plain_spinor(self):
        m = AngularMode(nu=1, k=4, q=0.1)
        chi = Spinor.of(0.6, 0.8)
        y = angular_wavefunction(m, chi, 0.0)
        assert abs(y[0] - m.norm_constant * chi.up) < 1e-15
        assert abs(y[1] - m.norm_constant * chi.down) < 1e-15

    def test_pointwise_norm_phi_independent(self):
        m = AngularMode(nu=2, k=Fraction(7, 3), q=0.1)
        chi = Spinor.plus_x()
        phis = np.linspace(-7.0, 7.0, 101)
        y = angular_wavefunction(m, chi, phis)
        dens = np.sum(np.abs(y) ** 2, axis=-1)
        assert np.max(np.abs(dens - m.norm_constant**2)) < 1e-14

    def test_full_turn_adds_pure_phase(self):
        # after phi -> phi + 2*pi each component gains a modulus-1 factor
        m = AngularMode(nu=1, k=1, q=0.1)
        chi = Spinor.plus()
        y0 = angular_wavefunction(m, chi, 0.3)
        y1 = angular_wavefunction(m, chi, 0.3 + 2.0 * math.pi)
        ratio = y1[0] / y0[0]
        assert abs(abs(ratio) - 1.0) < 1e-12
        expected = (1.0 + 0.1 / 2.0 / 1.0) * 2.0 * math.pi  # (j + q/2) * 2pi, j = 1
        assert abs((np.angle(ratio) - expected) % (2.0 * math.pi)) < 1e-10 or abs(
            ((np.angle(ratio) - expected) % (2.0 * math.pi)) - 2.0 * math.pi
        ) < 1e-10

    def test_sector_norm_and_orthogonality(self):
        k = Fraction(4)
        chi = Spinor.plus()
        sector = 2.0 * math.pi / 4.0
        phis = np.linspace(0.0, sector, 4097)
        modes = [AngularMode(nu=v, k=k, q=0.1) for v in (1, 2, 3)]
        ys = [angular_wavefunction(m, chi, phis) for m in modes]
        for y in ys:
            dens = np.sum(np.abs(y) ** 2, axis=-1)
            assert abs(np.trapezoid(dens, phis) - 1.0) < 1e-10
        for a in range(3):
            for b in range(a + 1, 3):
                overlap = np.trapezoid(
                    np.sum(ys[a].conj() * ys[b], axis=-1), phis
                )
                assert abs(overlap) < 1e-10


# N^2 from the closed form, frozen at 16 digits from 40-digit arithmetic
NORM_SQ_TABLE = {
    (Fraction(1), 2): 24.0,
    (Fraction(4), 1): 19.39454111741177,
    (Fraction(7, 3), 1): 11.75737750361171,
    (Fraction(-6), 1): 5.000758142269917,
    (Fraction(-17, 4), 1): 2.733497248820726,
}


class TestRadialMode:
    def test_frozen_norm_constants(self):
        for (k, nu), ref in NORM_SQ_TABLE.items():
            mode = RadialMode(nu=nu, k=k)
            assert abs(mode.norm_constant**2 - ref) <= 1e-12 * ref

    def test_non_normalizable_rejected_at_construction(self):
        with pytest.raises(ValueError):
            RadialMode(nu=1, k=Fraction(1))  # needs nu > 1/k = 1
        with pytest.raises(ValueError):
            RadialMode(nu=3, k=Fraction(-3, 2))  # |k| <= 2

    @pytest.mark.parametrize(
        "k,nu",
        [(Fraction(1), 2), (Fraction(4), 1), (Fraction(7, 3), 1), (Fraction(-6), 1)],
    )
    def test_norm_quadrature_oracle(self, k, nu):
        mode = RadialMode(nu=nu, k=k)
        assert abs(radial_norm_quadrature(mode) - 1.0) <= 1e-6

    def test_r_space_quadrature_k1(self):
        # direct r-space check: int R^2 r dr = 1 for k=1, nu=2.  The segment
        # (0, 1e-3] is dropped: its mass is bounded by the oscillation
        # envelope (2 N^2 / 3 pi) r^3 ~ 5e-9, below the tolerance.
        mode = RadialMode(nu=2, k=Fraction(1))

        def integrand(r):
            return radial_wavefunction(mode, r) ** 2 * r

        res = integrate(integrand, 1e-3, math.inf, abs_tol=1e-8, rel_tol=1e-8,
                        max_evals=2_000_000)
        assert abs(res.value - 1.0) <= 1e-6

    def test_large_r_decay_k1(self):
        # J_2(x) ~ x^2/8 for small x, so R ~ N/(8 r^2) at large r
        mode = RadialMode(nu=2, k=Fraction(1))
        r = 1e4
        expect = mode.norm_constant / (8.0 * r**2)
        assert abs(radial_wavefunction(mode, r) - expect) <= 1e-6 * expect

    def test_unsafe_mode_normalizes_on_truncated_domain(self):
        mode = RadialMode(nu=0, k=Fraction(4), unsafe_r_max=20.0)
        assert mode.unsafe
        assert abs(radial_norm_quadrature(mode) - 1.0) <= 1e-6

    def test_r_must_be_positive(self):
        mode = RadialMode(nu=1, k=Fraction(4))
        with pytest.raises(ValueError):
            radial_wavefunction(mode, 0.0)


class TestMacroscopicState:
    def test_default_nu_min(self):
        assert default_nu_min(Fraction(1)) == 2
        assert default_nu_min(Fraction(4)) == 1
        assert default_nu_min(Fraction(7, 3)) == 1
        assert default_nu_min(Fraction(-6)) == 1
        assert default_nu_min(Fraction(1, 2)) == 3

    def test_weights_renormalized(self):
        spec = PotentialSpec(k=Fraction(1), q=0.1)
        st = macroscopic_state(spec, Spinor.plus(), n=30)
        assert st.nu_values == tuple(range(2, 31))
        assert abs(float(np.sum(st.weights**2)) - 1.0) < 1e-12

    def test_empty_mode_set_rejected(self):
        spec = PotentialSpec(k=Fraction(1), q=0.1)
        with pytest.raises(ValueError):
            macroscopic_state(spec, Spinor.plus(), n=1)  # nu_min = 2 > n

    def test_unsafe_flag_required_for_low_modes(self):
        spec = PotentialSpec(k=Fraction(1), q=0.1)
        with pytest.raises(ValueError):
            macroscopic_state(spec, Spinor.plus(), n=5, nu_min=1)
        st = macroscopic_state(
            spec, Spinor.plus(), n=5, nu_min=0, include_unsafe_modes=True
        )
        assert st.includes_unsafe
        assert st.nu_values[0] == 0

    def test_single_mode_reduction(self):
        # n = 1 with one surviving mode: Psi = R * Y exactly
        spec = PotentialSpec(k=Fraction(4), q=0.1)
        chi = Spinor.plus_x()
        st = macroscopic_state(spec, chi, n=1)
        assert len(st.nu_values) == 1
        am = AngularMode(nu=1, k=Fraction(4), q=0.1)
        rm = RadialMode(nu=1, k=Fraction(4))
        for r, phi in [(0.5, 0.3), (0.7, -1.2), (1.1, 2.0)]:
            got = st.amplitude(r, phi)
            want = radial_wavefunction(rm, r) * angular_wavefunction(am, chi, phi)
            assert np.max(np.abs(got - want)) < 1e-13

    def test_norm_assembled_from_quadrature(self):
        # <Psi|Psi> over r in (0, inf), phi over one 2pi/|k| sector, by
        # iterated quadrature: exact trapezoid in phi x radial quadrature,
        # assembled from the mode overlap matrices
        k = Fraction(4)
        spec = PotentialSpec(k=k, q=0.1)
        st = macroscopic_state(spec, Spinor.plus(), n=6)
        nus = st.nu_values
        kf = 4.0
        lam = 2.0 / kf + 1.0

        def radial_overlap(nu_a, nu_b):
            f = lambda x: bessel_j(nu_a, x) * bessel_j(nu_b, x) * x ** (-lam)
            head = integrate(f, 1e-300, 30.0, abs_tol=1e-10, rel_tol=1e-10)
            tail = oscillatory_tail_integral(
                f, 30.0, lambda x: bessel_j(nu_a, x), math.pi,
                abs_tol=1e-8, rel_tol=1e-8,
            )
            na = RadialMode(nu=nu_a, k=k).norm_constant
            nb = RadialMode(nu=nu_b, k=k).norm_constant
            return na * nb * kf ** (-2.0 / kf - 1.0) * (head.value + tail.value)

        sector = 2.0 * math.pi / kf
        phis = np.linspace(0.0, sector, 257)[:-1]  # periodic trapezoid
        dphi = sector / 256
        c2 = kf / (2.0 * math.pi)
        total = 0.0
        for a, nu_a in enumerate(nus):
            for b, nu_b in enumerate(nus):
                ang = np.sum(np.exp(1j * (nu_b - nu_a) * kf * phis)) * dphi * c2
                if abs(ang) < 1e-14:
                    continue
                total += float(
                    (st.weights[a] * st.weights[b] * ang * radial_overlap(nu_a, nu_b)).real
                )
        assert abs(total - 1.0) <= 1e-5

    def test_density_chi_independent(self):
        spec = PotentialSpec(k=Fraction(4), q=0.1)
        r = np.array([0.4, 0.6, 0.9])
        phi = np.array([0.0, 0.5, 1.0])
        d1 = macroscopic_state(spec, Spinor.plus(), n=8).density(r, phi)
        d2 = macroscopic_state(spec, Spinor.minus(), n=8).density(r, phi)
        d3 = macroscopic_state(spec, Spinor.plus_x(), n=8).density(r, phi)
        assert np.max(np.abs(d1 - d2)) < 1e-15
        assert np.max(np.abs(d1 - d3)) < 1e-15

    def test_radial_peak_matches_scan(self):
        spec = PotentialSpec(k=Fraction(1), q=0.1)
        st = macroscopic_state(spec, Spinor.plus(), n=12)
        r_star = st.radial_peak()
        mode = st.radial_modes[-1]
        rs = np.geomspace(0.3 * r_star, 3.0 * r_star, 20001)
        dens = radial_wavefunction(mode, rs) ** 2
        assert abs(rs[int(np.argmax(dens))] - r_star) <= 1e-3 * r_star

    def test_phi_dot_expectation_positive(self):
        spec = PotentialSpec(k=Fraction(4), q=0.1)
        st = macroscopic_state(spec, Spinor.plus(), n=6)
        val = st.phi_dot_expectation()
        assert val > 0.0
        # single-mode closed form: <phidot> = N^2/2 for one mode
        st1 = macroscopic_state(spec, Spinor.plus(), n=1)
        v1 = st1.phi_dot_expectation()
        expect = st1.radial_modes[0].norm_constant ** 2 / 2.0
        assert abs(v1 - expect) <= 1e-6 * expect


class TestDensityGrid:
    def test_field_consistency(self):
        spec = PotentialSpec(k=Fraction(4), q=0.1)
        st = macroscopic_state(spec, Spinor.plus_x(), n=8)
        grid = default_grid(st, n_r=96, n_phi=128)
        f = density_grid(st, grid)
        dens = np.sum(np.abs(f.values) ** 2, axis=-1)
        assert np.max(np.abs(dens - f.density)) < 1e-13
        # per-period probability: 1 up to trapezoid error on this resolution
        assert 0.9 <= f.grid_norm <= 1.0 + 0.02
        assert f.generator is st

    def test_density_periodicity_on_state_level(self):
        # density(r, phi + 2pi/|k|) = density(r, phi) for the n=30 state
        spec = PotentialSpec(k=Fraction(4), q=0.1)
        st = macroscopic_state(spec, Spinor.plus(), n=30)
        r = np.geomspace(0.1, 1.0, 32)[:, None]
        phi = np.linspace(0.0, 0.4, 8)[None, :]
        d0 = st.density(r, phi)
        d1 = st.density(r, phi + 2.0 * math.pi / 4.0)
        assert np.max(np.abs(d0 - d1)) <= 1e-9 * max(1e-300, float(d0.max()))

    def test_single_mode_density_is_rings(self):
        spec = PotentialSpec(k=Fraction(4), q=0.1)
        st = macroscopic_state(spec, Spinor.plus(), n=1)
        grid = default_grid(st, n_r=96, n_phi=64)
        f = density_grid(st, grid)
        assert np.max(f.density.std(axis=1)) < 1e-15 * max(1.0, f.density.max())

    def test_thread_count_invariance(self, monkeypatch):
        spec = PotentialSpec(k=Fraction(7, 3), q=0.1)
        st = macroscopic_state(spec, Spinor.plus(), n=6)
        grid = default_grid(st, n_r=96, n_phi=63)
        monkeypatch.setenv("SPINORBIT_THREADS", "1")
        f1 = density_grid(st, grid)
        monkeypatch.setenv("SPINORBIT_THREADS", "4")
        f4 = density_grid(st, grid)
        assert np.array_equal(f1.density, f4.density)
        assert np.array_equal(f1.values, f4.values)

    def test_angular_marginal_shape_and_positivity(self):
        spec = PotentialSpec(k=Fraction(4), q=0.1)
        st = macroscopic_state(spec, Spinor.plus(), n=8)
        f = density_grid(st, default_grid(st, n_r=96, n_phi=64))
        marg = angular_marginal(f)
        assert marg.shape == (f.phi.size,)
        assert np.all(marg >= 0.0)

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            PolarGrid(r_min=0.0, r_max=1.0, n_r=10, n_phi=10, phi_min=0, phi_max=1)
        with pytest.raises(ValueError):
            PolarGrid(r_min=0.1, r_max=1.0, n_r=10, n_phi=10, phi_min=0, phi_max=1,
                      spacing="cubic")


class TestCamSpectrum:
    def test_direct_substitution(self):
        spec = PotentialSpec(k=Fraction(7, 3), q=0.1)
        levels = cam_spectrum(spec, [1])
        vals = sorted(v for _, _, v in levels)
        assert abs(vals[0] - (7.0 / 3.0 - 0.05)) < 1e-12
        assert abs(vals[1] - (7.0 / 3.0 + 0.05)) < 1e-12

    def test_doublet_collapse_at_zero_coupling(self):
        spec = PotentialSpec(k=Fraction(7, 3), q=0.0)
        levels = cam_spectrum(spec, [1, 2])
        by_nu = {}
        for nu, _, v in levels:
            by_nu.setdefault(nu, []).append(v)
        for vals in by_nu.values():
            assert vals[0] == vals[1]

    def test_spacing_is_abs_k(self):
        spec = PotentialSpec(k=Fraction(7, 3), q=0.1)
        levels = cam_spectrum(spec, range(1, 6))
        plus = [v for _, s, v in levels if s > 0]
        for a, b in zip(plus, plus[1:]):
            assert abs((b - a) - 7.0 / 3.0) < 1e-12

    def test_never_integer_for_fractional_shift(self):
        spec = PotentialSpec(k=Fraction(1), q=0.1)
        for _, _, v in cam_spectrum(spec, range(2, 8)):
            assert abs(v - round(v)) > 1e-3

    def test_non_normalizable_nu_rejected(self):
        spec = PotentialSpec(k=Fraction(1), q=0.1)
        with pytest.raises(ValueError):
            cam_spectrum(spec, [1, 2])


class TestSpinDynamics:
    def test_sigma_z_eigenstate_static(self):
        spec = PotentialSpec(k=Fraction(4), q=0.1)
        st = macroscopic_state(spec, Spinor.plus(), n=4)
        rows = spin_expectation_dynamics(st, steps=64)
        assert np.max(np.abs(rows[:, 1])) < 1e-15
        assert np.max(np.abs(rows[:, 2])) < 1e-15
        assert np.max(np.abs(rows[:, 3] - 1.0)) < 1e-15

    def test_transverse_state_precesses(self):
        spec = PotentialSpec(k=Fraction(4), q=0.1)
        st = macroscopic_state(spec, Spinor.plus(), n=4)
        rows = spin_expectation_dynamics(st, chi=Spinor.plus_x(),
                                         phi_span=4 * math.pi, steps=513)
        phi = rows[:, 0]
        assert np.max(np.abs(rows[:, 1] - np.cos(0.1 * phi))) < 1e-13
        assert np.max(np.abs(rows[:, 2] + np.sin(0.1 * phi))) < 1e-13
        assert np.max(np.abs(rows[:, 3])) < 1e-15

    def test_heisenberg_relations_by_central_differences(self):
        spec = PotentialSpec(k=Fraction(4), q=0.1)
        st = macroscopic_state(spec, Spinor.plus(), n=4)
        rows = spin_expectation_dynamics(st, chi=Spinor.of(0.8, 0.6j),
                                         phi_span=4 * math.pi, steps=4097)
        phi, sx, sy, sz = rows.T
        h = phi[1] - phi[0]
        dsx = (sx[2:] - sx[:-2]) / (2 * h)
        dsy = (sy[2:] - sy[:-2]) / (2 * h)
        dsz = (sz[2:] - sz[:-2]) / (2 * h)
        q = 0.1
        assert np.max(np.abs(dsx - q * sy[1:-1])) <= 1e-8
        assert np.max(np.abs(dsy + q * sx[1:-1])) <= 1e-8
        assert np.max(np.abs(dsz)) <= 1e-15

    def test_matches_classical_precession_form(self):
        # <sigma>(phi) follows the same rotation law as the classical spin
        spec = PotentialSpec(k=Fraction(4), q=0.1)
        st = macroscopic_state(spec, Spinor.plus(), n=4)
        chi = Spinor.of(0.6, 0.8)
        rows = spin_expectation_dynamics(st, chi=chi, phi_span=3.0, steps=33)
        sx0, sy0, _ = chi.sigma_expectations()
        phi = rows[:, 0]
        assert np.max(np.abs(rows[:, 1] - (sx0 * np.cos(0.1 * phi) + sy0 * np.sin(0.1 * phi)))) < 1e-13
        assert np.max(np.abs(rows[:, 2] - (-sx0 * np.sin(0.1 * phi) + sy0 * np.cos(0.1 * phi)))) < 1e-13
