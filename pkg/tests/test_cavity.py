"""Tests for transmon-resonator coupling, spectra, and dispersive readout."""
import math
import warnings

import numpy as np
import pytest

from cqed.cavity import (
    CoupledSystemSpec,
    CouplingParams,
    DispersiveValidityWarning,
    ResonatorParams,
    build_full_interaction,
    build_jc_hamiltonian,
    coupling_for_g1,
    coupling_strengths,
    derive_coupling,
    dispersive_shift,
    divider_beta,
    excitation_number_operator,
    ladder_operators,
    readout_peak_ghz,
    transmission_spectrum,
    vacuum_rabi_trace,
)
from cqed.charge_qubit import QubitParams, spectrum, transition_energy
from cqed.numerics import hermitian_eigensolve
from cqed.units import ghz_to_rad_ns, rad_ns_to_ghz

from oracles import jc_dressed_shift

Q50 = QubitParams(ej_ghz=12.5, ec_ghz=0.25)
F01 = transition_energy(Q50, 0, 1)  # about 4.7355 GHz


def bare_coupling(*g):
    return CouplingParams(beta=None, v_rms_volts=None, g_ghz=g)


def resonant_system(g1_ghz, n_transmon=2, n_fock=3):
    """System with the resonator exactly on the 0-1 transition."""
    return CoupledSystemSpec(
        qubit=Q50,
        resonator=ResonatorParams(f_r_ghz=F01),
        coupling=bare_coupling(g1_ghz, g1_ghz * math.sqrt(2.0)),
        n_transmon=n_transmon,
        n_fock=n_fock,
    )


def detuned_system(g1_ghz, detuning_ghz=1.0, n_transmon=2, n_fock=3):
    """System with the resonator detuning_ghz above the 0-1 transition."""
    return CoupledSystemSpec(
        qubit=Q50,
        resonator=ResonatorParams(f_r_ghz=F01 + detuning_ghz),
        coupling=bare_coupling(g1_ghz, g1_ghz * math.sqrt(2.0)),
        n_transmon=n_transmon,
        n_fock=n_fock,
    )


class TestLadderOperators:
    def test_two_level_annihilator(self):
        a, a_dag = ladder_operators(2)
        assert a.tolist() == [[0.0, 1.0], [0.0, 0.0]]
        assert a_dag.tolist() == [[0.0, 0.0], [1.0, 0.0]]

    def test_subdiagonal_is_sqrt_k(self):
        a, _ = ladder_operators(6)
        for k in range(1, 6):
            assert a[k - 1, k] == math.sqrt(k)
        assert np.count_nonzero(a) == 5

    def test_commutator_is_identity_except_last_level(self):
        n = 5
        a, a_dag = ladder_operators(n)
        comm = a @ a_dag - a_dag @ a
        diag = np.diag(comm)
        np.testing.assert_allclose(diag[:-1], 1.0, rtol=1e-12)
        # the truncated top level absorbs the trace: tr[a, adag] = 0
        assert diag[-1] == pytest.approx(-(n - 1), rel=1e-12)
        off = comm - np.diag(diag)
        assert np.all(off == 0.0)

    def test_number_operator_from_product(self):
        a, a_dag = ladder_operators(4)
        np.testing.assert_allclose(a_dag @ a, np.diag([0.0, 1.0, 2.0, 3.0]),
                                   rtol=1e-12, atol=1e-15)

    def test_rejects_empty_space(self):
        with pytest.raises(ValueError):
            ladder_operators(0)


class TestResonatorParams:
    def test_frequency_from_lc(self):
        r = ResonatorParams(c_r_ff=400.0, l_r_nh=1.7)
        want = 1e-9 / (2.0 * math.pi * math.sqrt(1.7e-9 * 400e-15))
        assert r.f_r_ghz == pytest.approx(want, rel=1e-12)

    def test_consistent_triple_accepted(self):
        derived = 1e-9 / (2.0 * math.pi * math.sqrt(1.7e-9 * 400e-15))
        r = ResonatorParams(f_r_ghz=derived, c_r_ff=400.0, l_r_nh=1.7)
        assert r.f_r_ghz == derived

    def test_inconsistent_triple_rejected(self):
        with pytest.raises(ValueError, match="inconsistent"):
            ResonatorParams(f_r_ghz=6.0, c_r_ff=400.0, l_r_nh=1.7)

    def test_needs_some_frequency_information(self):
        with pytest.raises(ValueError):
            ResonatorParams(c_r_ff=400.0)

    def test_kappa_default_and_validation(self):
        assert ResonatorParams(f_r_ghz=6.0).kappa_mhz == 1.0
        with pytest.raises(ValueError, match="kappa"):
            ResonatorParams(f_r_ghz=6.0, kappa_mhz=0.0)

    def test_rejects_nonpositive_circuit_values(self):
        with pytest.raises(ValueError):
            ResonatorParams(f_r_ghz=-6.0)
        with pytest.raises(ValueError):
            ResonatorParams(c_r_ff=0.0, l_r_nh=1.7)

    def test_v_rms_magnitude(self):
        # sqrt(hbar w / 2C) at 6 GHz, 400 fF lands in the few-uV range
        r = ResonatorParams(f_r_ghz=6.0, c_r_ff=400.0)
        v = r.v_rms_volts()
        assert 1e-6 < v < 1e-5

    def test_v_rms_requires_capacitance(self):
        with pytest.raises(ValueError, match="c_r_ff"):
            ResonatorParams(f_r_ghz=6.0).v_rms_volts()

    def test_doubling_capacitance_scales_v_rms_by_inverse_sqrt2(self):
        v1 = ResonatorParams(f_r_ghz=6.0, c_r_ff=400.0).v_rms_volts()
        v2 = ResonatorParams(f_r_ghz=6.0, c_r_ff=800.0).v_rms_volts()
        assert v2 / v1 == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-12)


class TestCouplingStrengths:
    def test_zero_divider_kills_all_couplings(self):
        r = ResonatorParams(f_r_ghz=6.0, c_r_ff=400.0)
        g = coupling_strengths(Q50, 0.0, r, 3)
        assert np.all(g == 0.0)

    def test_doubling_resonator_capacitance_scales_by_inverse_sqrt2(self):
        r1 = ResonatorParams(f_r_ghz=6.0, c_r_ff=400.0)
        r2 = ResonatorParams(f_r_ghz=6.0, c_r_ff=800.0)
        g1 = coupling_strengths(Q50, 0.2, r1, 2)
        g2 = coupling_strengths(Q50, 0.2, r2, 2)
        np.testing.assert_allclose(g2 / g1, 1.0 / math.sqrt(2.0), rtol=1e-12)

    def test_transmon_ladder_ratio_near_sqrt2(self):
        r = ResonatorParams(f_r_ghz=6.0, c_r_ff=400.0)
        g = coupling_strengths(Q50, 0.15, r, 2)
        assert g[1] / g[0] == pytest.approx(math.sqrt(2.0), rel=0.05)

    def test_rejects_divider_outside_unit_interval(self):
        r = ResonatorParams(f_r_ghz=6.0, c_r_ff=400.0)
        with pytest.raises(ValueError, match="beta"):
            coupling_strengths(Q50, 1.2, r, 2)

    def test_divider_beta(self):
        assert divider_beta(10.0, 90.0) == pytest.approx(0.1, rel=1e-12)
        with pytest.raises(ValueError):
            divider_beta(-1.0, 50.0)

    def test_derive_coupling_carries_circuit_quantities(self):
        r = ResonatorParams(f_r_ghz=6.0, c_r_ff=400.0)
        cp = derive_coupling(Q50, 0.25, r, 3)
        assert cp.beta == 0.25
        assert cp.v_rms_volts == r.v_rms_volts()
        assert len(cp.g_ghz) == 3
        np.testing.assert_array_equal(
            np.asarray(cp.g_ghz), coupling_strengths(Q50, 0.25, r, 3)
        )

    def test_coupling_for_g1_hits_target_exactly(self):
        cp = coupling_for_g1(Q50, 0.1, j_max=3)
        assert cp.g_ghz[0] == 0.1
        assert cp.g_ghz[1] / cp.g_ghz[0] == pytest.approx(math.sqrt(2.0),
                                                          rel=0.05)

    def test_coupling_for_g1_fails_on_vanishing_element(self):
        # at E_J = 0 the 0-1 charge matrix element is exactly zero
        quiet = QubitParams(ej_ghz=0.0, ec_ghz=0.25, ng=0.0)
        with pytest.raises(ValueError, match="vanishes"):
            coupling_for_g1(quiet, 0.1)

    def test_coupling_params_validation(self):
        with pytest.raises(ValueError):
            CouplingParams(beta=1.5, v_rms_volts=1e-6, g_ghz=(0.1,))
        with pytest.raises(ValueError):
            CouplingParams(beta=None, v_rms_volts=None, g_ghz=())
        with pytest.raises(ValueError):
            CouplingParams(beta=None, v_rms_volts=None, g_ghz=(-0.1,))


class TestCoupledSystemSpec:
    def test_dimension(self):
        assert resonant_system(0.1, n_transmon=3, n_fock=5).dim == 15

    def test_rejects_single_level_transmon(self):
        with pytest.raises(ValueError, match="n_transmon"):
            resonant_system(0.1, n_transmon=1)

    def test_rejects_tiny_fock_space(self):
        with pytest.raises(ValueError, match="n_fock"):
            resonant_system(0.1, n_fock=1)

    def test_rejects_missing_couplings(self):
        with pytest.raises(ValueError, match="couplings"):
            CoupledSystemSpec(
                qubit=Q50,
                resonator=ResonatorParams(f_r_ghz=6.0),
                coupling=bare_coupling(0.1),
                n_transmon=3,
                n_fock=4,
            )


class TestJaynesCummings:
    def test_uncoupled_spectrum_is_sum_of_parts(self):
        spec = CoupledSystemSpec(
            qubit=Q50,
            resonator=ResonatorParams(f_r_ghz=6.0),
            coupling=bare_coupling(0.0, 0.0),
            n_transmon=3,
            n_fock=4,
        )
        h = build_jc_hamiltonian(spec)
        got = hermitian_eigensolve(h).values
        levels = spectrum(Q50, levels=3).levels_ghz
        want = np.sort([
            ghz_to_rad_ns(levels[j] - levels[0]) + k * ghz_to_rad_ns(6.0)
            for j in range(3)
            for k in range(4)
        ])
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-12)

    def test_resonant_doublet_splits_by_twice_g1(self):
        g1 = 0.1
        spec = resonant_system(g1, n_transmon=2, n_fock=3)
        values = hermitian_eigensolve(build_jc_hamiltonian(spec)).values
        split = values[2] - values[1]
        want = 2.0 * ghz_to_rad_ns(g1)
        assert abs(split - want) <= 1e-12 * want

    def test_ground_state_is_unshifted(self):
        spec = resonant_system(0.1)
        values = hermitian_eigensolve(build_jc_hamiltonian(spec)).values
        assert values[0] == 0.0

    def test_hermitian(self):
        spec = resonant_system(0.1, n_transmon=3, n_fock=4)
        h = build_jc_hamiltonian(spec)
        assert np.array_equal(h, h.conj().T)

    def test_cross_sector_elements_exactly_zero(self):
        spec = resonant_system(0.15, n_transmon=3, n_fock=4)
        h = build_jc_hamiltonian(spec)
        sector = np.array([
            j + k for j in range(spec.n_transmon) for k in range(spec.n_fock)
        ])
        cross = sector[:, np.newaxis] != sector[np.newaxis, :]
        assert np.all(h[cross] == 0.0)

    def test_commutes_with_excitation_number_exactly(self):
        spec = resonant_system(0.15, n_transmon=3, n_fock=4)
        h = build_jc_hamiltonian(spec)
        n_exc = excitation_number_operator(spec)
        comm = h @ n_exc - n_exc @ h
        assert np.all(comm == 0.0)

    def test_fock_truncation_leaves_low_sectors_untouched(self):
        # sectors with fewer excitations than n_fock are complete, so
        # enlarging the photon space must not move the low eigenvalues
        small = resonant_system(0.1, n_transmon=3, n_fock=8)
        large = resonant_system(0.1, n_transmon=3, n_fock=16)
        e_small = hermitian_eigensolve(build_jc_hamiltonian(small)).values[:6]
        e_large = hermitian_eigensolve(build_jc_hamiltonian(large)).values[:6]
        np.testing.assert_allclose(e_small, e_large, rtol=0.0, atol=1e-12)


class TestFullInteraction:
    def test_zero_divider_reduces_to_uncoupled(self):
        r = ResonatorParams(f_r_ghz=6.0, c_r_ff=400.0)
        coupling = CouplingParams(
            beta=0.0, v_rms_volts=r.v_rms_volts(), g_ghz=(0.0, 0.0)
        )
        spec = CoupledSystemSpec(
            qubit=Q50, resonator=r, coupling=coupling, n_transmon=3, n_fock=4
        )
        assert np.array_equal(
            build_full_interaction(spec), build_jc_hamiltonian(spec)
        )

    def test_requires_circuit_quantities(self):
        spec = resonant_system(0.1)
        with pytest.raises(ValueError, match="beta"):
            build_full_interaction(spec)

    def test_hermitian(self):
        r = ResonatorParams(f_r_ghz=F01, c_r_ff=400.0)
        coupling = coupling_for_g1(Q50, 0.2, j_max=2)
        spec = CoupledSystemSpec(
            qubit=Q50, resonator=r, coupling=coupling, n_transmon=3, n_fock=6
        )
        h = build_full_interaction(spec)
        assert np.abs(h - h.conj().T).max() == 0.0

    def _doublet_splittings(self, g_over_wr, n_fock):
        r = ResonatorParams(f_r_ghz=F01, c_r_ff=400.0)
        coupling = coupling_for_g1(Q50, g_over_wr * F01, j_max=2)
        spec = CoupledSystemSpec(
            qubit=Q50, resonator=r, coupling=coupling,
            n_transmon=3, n_fock=n_fock,
        )
        ev_jc = hermitian_eigensolve(build_jc_hamiltonian(spec)).values
        ev_full = hermitian_eigensolve(build_full_interaction(spec)).values
        return ev_jc[2] - ev_jc[1], ev_full[2] - ev_full[1]

    def test_rotating_wave_matches_at_weak_coupling(self):
        jc, full = self._doublet_splittings(1e-3, n_fock=16)
        assert abs(full - jc) / jc < 0.005

    def test_rotating_wave_breaks_down_at_strong_coupling(self):
        jc, full = self._doublet_splittings(0.2, n_fock=16)
        assert abs(full - jc) / jc > 0.01

    def test_fock_space_convergence(self):
        r = ResonatorParams(f_r_ghz=F01 + 1.0, c_r_ff=400.0)
        coupling = coupling_for_g1(Q50, 0.1, j_max=2)
        values = {}
        for n_fock in (8, 16):
            spec = CoupledSystemSpec(
                qubit=Q50, resonator=r, coupling=coupling,
                n_transmon=3, n_fock=n_fock,
            )
            h = build_full_interaction(spec)
            values[n_fock] = hermitian_eigensolve(h).values[:6]
        scale = np.abs(values[16]).max()
        assert np.abs(values[8] - values[16]).max() < 1e-8 * scale


class TestDispersiveShift:
    def test_textbook_numbers(self):
        # detuning 1 GHz, g1 = 0.1 GHz: chi = g^2/Delta = 10 MHz
        result = dispersive_shift(detuned_system(0.1))
        assert result.chi_ghz == pytest.approx(0.01, rel=1e-12)
        assert result.delta_ghz == pytest.approx(1.0, rel=1e-12)
        assert result.validity == pytest.approx(10.0, rel=1e-12)

    def test_rejects_zero_detuning(self):
        with pytest.raises(ValueError, match="resonant"):
            dispersive_shift(resonant_system(0.1))

    def test_zero_coupling_gives_zero_shift(self):
        result = dispersive_shift(detuned_system(0.0))
        assert result.chi_ghz == 0.0
        assert result.validity == math.inf

    def _dressed_shift_from_matrix(self, g1):
        spec = detuned_system(g1, n_transmon=2, n_fock=3)
        values = hermitian_eigensolve(build_jc_hamiltonian(spec)).values
        w_r = ghz_to_rad_ns(spec.resonator.f_r_ghz)
        one_excitation = values[1:3]
        photon_like = one_excitation[np.argmin(np.abs(one_excitation - w_r))]
        return rad_ns_to_ghz(photon_like - w_r)

    def test_matrix_shift_matches_two_level_formula(self):
        for g1 in (0.05, 0.025):
            got = self._dressed_shift_from_matrix(g1)
            delta = dispersive_shift(detuned_system(g1)).delta_ghz
            assert got == pytest.approx(jc_dressed_shift(delta, g1),
                                        rel=1e-10)

    def test_perturbative_shift_error_is_quadratic_in_coupling(self):
        errors = {}
        for g1 in (0.05, 0.025):
            exact = self._dressed_shift_from_matrix(g1)
            chi = dispersive_shift(detuned_system(g1)).chi_ghz
            errors[g1] = abs(chi - exact) / abs(exact)
        assert errors[0.05] < 0.01
        assert errors[0.025] < 0.0025
        # halving g/Delta should cut the relative error about fourfold
        assert errors[0.05] / errors[0.025] == pytest.approx(4.0, rel=0.15)


class TestVacuumRabi:
    def test_initial_state_is_excited_transmon_in_vacuum(self):
        spec = resonant_system(0.1, n_transmon=3, n_fock=4)
        trace = vacuum_rabi_trace(spec, np.array([0.0, 0.1]))
        assert trace.p_excited[0] == pytest.approx(1.0, abs=1e-12)
        assert trace.p_one_photon[0] == pytest.approx(0.0, abs=1e-12)

    def test_full_swap_at_quarter_period(self):
        g1 = 0.1
        spec = resonant_system(g1, n_transmon=3, n_fock=4)
        t_swap = math.pi / (2.0 * ghz_to_rad_ns(g1))
        trace = vacuum_rabi_trace(spec, np.array([0.0, t_swap, 2.0 * t_swap]))
        assert abs(trace.p_one_photon[1] - 1.0) < 1e-12
        assert abs(trace.p_excited[2] - 1.0) < 1e-12

    def test_populations_follow_cosine_squared(self):
        g1 = 0.08
        g_rad = ghz_to_rad_ns(g1)
        spec = resonant_system(g1, n_transmon=3, n_fock=4)
        times = np.linspace(0.0, 2.0 * math.pi / g_rad, 401)
        trace = vacuum_rabi_trace(spec, times)
        np.testing.assert_allclose(trace.p_excited, np.cos(g_rad * times) ** 2,
                                   rtol=0.0, atol=1e-12)
        np.testing.assert_allclose(trace.p_one_photon,
                                   np.sin(g_rad * times) ** 2,
                                   rtol=0.0, atol=1e-12)

    def test_population_is_conserved(self):
        spec = resonant_system(0.1, n_transmon=3, n_fock=4)
        times = np.linspace(0.0, 20.0, 101)
        trace = vacuum_rabi_trace(spec, times)
        totals = trace.populations.sum(axis=1)
        np.testing.assert_allclose(totals, 1.0, rtol=0.0, atol=1e-12)

    def test_rejects_detuned_resonator(self):
        spec = detuned_system(0.1, detuning_ghz=0.5)
        with pytest.raises(ValueError, match="resonance"):
            vacuum_rabi_trace(spec, np.array([0.0, 1.0]))


class TestTransmissionSpectrum:
    def _grid_with_peaks(self, spec):
        chi = dispersive_shift(spec).chi_ghz
        f_r = spec.resonator.f_r_ghz
        return np.sort(np.concatenate([
            np.linspace(f_r - 0.05, f_r + 0.05, 201),
            [f_r - chi, f_r + chi],
        ]))

    def test_peak_positions_split_by_twice_chi(self):
        spec = detuned_system(0.1)
        chi = dispersive_shift(spec).chi_ghz
        grid = self._grid_with_peaks(spec)
        ground = transmission_spectrum(spec, "ground", grid)
        excited = transmission_spectrum(spec, "excited", grid)
        peak_g = ground[np.argmax(ground[:, 1]), 0]
        peak_e = excited[np.argmax(excited[:, 1]), 0]
        separation = peak_g - peak_e
        assert abs(separation - 2.0 * chi) <= 1e-12 * (2.0 * chi)

    def test_peak_positions_match_readout_helper(self):
        spec = detuned_system(0.1)
        chi = dispersive_shift(spec).chi_ghz
        f_r = spec.resonator.f_r_ghz
        assert readout_peak_ghz(spec, "ground") == f_r + chi
        assert readout_peak_ghz(spec, "excited") == f_r - chi

    def test_peak_transmission_is_unity(self):
        spec = detuned_system(0.1)
        grid = self._grid_with_peaks(spec)
        ground = transmission_spectrum(spec, "ground", grid)
        assert ground[:, 1].max() == 1.0

    def test_half_power_at_half_kappa_off_peak(self):
        spec = detuned_system(0.1)
        peak = readout_peak_ghz(spec, "ground")
        half_kappa = 0.5 * spec.resonator.kappa_mhz * 1e-3
        grid = np.array([peak - half_kappa, peak, peak + half_kappa])
        table = transmission_spectrum(spec, "ground", grid)
        assert table[1, 1] == 1.0
        np.testing.assert_allclose(table[[0, 2], 1], 0.5, rtol=1e-9)

    def test_zero_shift_makes_states_indistinguishable(self):
        spec = detuned_system(0.0)
        grid = np.linspace(F01 + 0.9, F01 + 1.1, 101)
        ground = transmission_spectrum(spec, "ground", grid)
        excited = transmission_spectrum(spec, "excited", grid)
        assert np.array_equal(ground, excited)

    def test_quiet_when_dispersive_assumption_holds(self):
        spec = detuned_system(0.1)  # validity 10
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            transmission_spectrum(spec, "ground", np.linspace(5.0, 7.0, 11))

    def test_warns_when_detuning_is_not_large(self):
        spec = detuned_system(0.5)  # validity 2
        with pytest.warns(DispersiveValidityWarning):
            transmission_spectrum(spec, "ground", np.linspace(5.0, 7.0, 11))

    def test_rejects_unknown_qubit_state(self):
        spec = detuned_system(0.1)
        with pytest.raises(ValueError, match="qubit_state"):
            transmission_spectrum(spec, "superposed", np.linspace(5.0, 7.0, 5))

    def test_rejects_empty_grid(self):
        spec = detuned_system(0.1)
        with pytest.raises(ValueError, match="grid"):
            transmission_spectrum(spec, "ground", np.array([]))
