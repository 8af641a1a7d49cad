import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.integrate import quad

from src.models.parameters import PhysicalParams
from src.models.spectrum import SecularProblem
from src.services.bogoliubov_service import build_coefficients
from src.services.core_model import (build_problem, derive_scales, first_principles_gammas,
                                     solve_tension_for_coupling, solve_wavenumbers)
from src.services.observables_service import (ContinuumFunctions, bead_variance, continuum_functions, decay_rate,
                                              default_time_grid, displacement_trace, emission_spectrum, fit_envelope,
                                              occupation_numbers, quadrature_covariance, relative_variance,
                                              spectral_density)
from src.services.spectrum_solver import solve_spectrum
from src.utils.exceptions import DomainError, ResonanceNotFoundError, SingularMatrixError

UNCOUPLED = SecularProblem(omega_0=1.0, omega=np.array([0.77, 1.31]), gamma=np.zeros(2))


def _solved(params):
    scales, _, problem = build_problem(params)
    spectrum = solve_spectrum(problem)
    return scales, problem, spectrum, build_coefficients(problem, spectrum)


def _decay_params(nu, n_modes=400, omega_c_ratio=0.9, omega_d_ratio=1.5):
    # nu = tau/2 with tau = r kappa_c d and d = pi/omega_d
    tension_ratio = 2.0 * nu * omega_d_ratio / (math.pi * omega_c_ratio ** 2)
    return PhysicalParams.from_dimensionless(omega_c_ratio, tension_ratio, n_modes, omega_d_ratio=omega_d_ratio)


@pytest.fixture(scope="module")
def default_model():
    return _solved(PhysicalParams.from_dimensionless(omega_c_ratio=0.95, tension_ratio=1.0, n_modes=15))


@pytest.fixture(scope="module")
def strong_model():
    # g = 0.7 reached through the smallest tension ratio, as the figure data does
    ratio = solve_tension_for_coupling(0.7, omega_c_ratio=0.95, n_modes=15, omega_d_ratio=3.0)
    return _solved(PhysicalParams.from_dimensionless(0.95, ratio, 15, omega_d_ratio=3.0))


@pytest.fixture
def uncoupled_model():
    spectrum = solve_spectrum(UNCOUPLED)
    return spectrum, build_coefficients(UNCOUPLED, spectrum)


class TestGroundState:
    """Tests for occupations and the bead variance."""

    def test_uncoupled_vacuum_is_empty(self, uncoupled_model):
        report = occupation_numbers(uncoupled_model[1])
        assert np.allclose(report.n_occ, 0.0, atol=1e-28)
        assert report.total_occ < 1e-28

    def test_occupations_of_default_model(self, default_model):
        _, _, _, coeffs = default_model
        report = occupation_numbers(coeffs)
        assert report.n_occ.shape == (16,)
        assert report.bead_occupation > 0
        assert report.total_occ == pytest.approx(np.trace(coeffs.N_mat @ coeffs.N_mat.T))
        assert report.string_balance == pytest.approx(report.string_occupation / report.bead_occupation)

    def test_bead_variance_forms_agree(self, default_model):
        scales, _, spectrum, coeffs = default_model
        result = bead_variance(coeffs, spectrum, scales)
        assert result.form_residual < 1e-10
        assert result.variance == pytest.approx(result.ratio / (2.0 * scales.omega_0))

    def test_uncoupled_variance_ratio_is_one(self, uncoupled_model):
        spectrum, coeffs = uncoupled_model
        scales = derive_scales(PhysicalParams.from_dimensionless(0.5, 1.0, 2))
        result = bead_variance(coeffs, spectrum, scales)
        assert result.ratio == pytest.approx(1.0, rel=1e-14)

    def test_quadrature_covariance_is_pure_state(self, default_model):
        _, _, _, coeffs = default_model
        covariance = quadrature_covariance(coeffs)
        assert np.allclose(covariance, covariance.T, atol=1e-14)
        sign, logdet = np.linalg.slogdet(covariance)
        assert sign == 1
        assert logdet == pytest.approx(-coeffs.size * math.log(4.0), rel=1e-8)

    def test_quadrature_covariance_of_vacuum(self, uncoupled_model):
        assert np.allclose(quadrature_covariance(uncoupled_model[1]), 0.5 * np.eye(6), atol=1e-14)


class TestRelativeVariance:
    """Tests for the continuum variance ratio R."""

    @pytest.mark.parametrize("omega_d_bar", [1.5, 3.5, 30.0])
    def test_undamped_limit(self, omega_d_bar):
        assert relative_variance(0.0, omega_d_bar) == pytest.approx(1.0)

    def test_decreases_with_damping(self):
        values = [relative_variance(nu, 7.0) for nu in np.linspace(0.0, 2.0, 21)]
        assert np.all(np.diff(values) < 0)
        assert 0 < values[-1] < 1

    def test_matches_arctangent_form(self):
        expected = (math.atan(48.0 / 1.0) + math.atan(1.0)) / math.pi
        assert relative_variance(0.5, 7.0) == pytest.approx(expected)

    @pytest.mark.parametrize("nu", [0.005, 0.02])
    def test_matches_discrete_string(self, nu):
        scales, _, spectrum, coeffs = _solved(_decay_params(nu))
        omega_r = math.sqrt(continuum_functions(scales).resonance())
        discrete = bead_variance(coeffs, spectrum, scales).ratio * omega_r / scales.omega_0
        continuum = relative_variance(scales.nu / omega_r, scales.omega_d / omega_r)
        assert discrete == pytest.approx(continuum, rel=0.05)

    @pytest.mark.parametrize("nu_bar, omega_d_bar", [(-0.1, 3.0), (0.5, 1.0), (0.5, 0.5)])
    def test_domain(self, nu_bar, omega_d_bar):
        with pytest.raises(DomainError):
            relative_variance(nu_bar, omega_d_bar)


class TestSpectralDensity:
    """Tests for the bead spectral density and its width."""

    def test_sum_rule(self, default_model):
        density = spectral_density(default_model[3])
        assert density.sum_rule_residual < 1e-10
        assert np.all(density.rho > 0)

    def test_uncoupled_density_sits_on_bead(self, uncoupled_model):
        density = spectral_density(uncoupled_model[1])
        assert density.sum_rule_residual < 1e-14
        assert density.peak_Omega == pytest.approx(1.0)
        assert math.isnan(density.fwhm)

    def test_width_grows_with_coupling(self):
        widths = []
        for g in (0.4, 0.6):
            ratio = solve_tension_for_coupling(g, omega_c_ratio=0.95, n_modes=200, omega_d_ratio=3.0)
            params = PhysicalParams.from_dimensionless(0.95, ratio, 200, omega_d_ratio=3.0)
            density = spectral_density(_solved(params)[3])
            assert density.hwhm == pytest.approx(0.5 * density.fwhm)
            widths.append(density.hwhm)
        assert 0 < widths[0] < widths[1]

    @pytest.mark.parametrize("nu", [0.02, 0.05])
    def test_half_width_is_decay_rate(self, nu):
        scales, _, _, coeffs = _solved(_decay_params(nu))
        density = spectral_density(coeffs)
        rate = decay_rate(scales).Gamma_closed
        assert density.hwhm == pytest.approx(rate, rel=0.2)
        assert density.fwhm == pytest.approx(2.0 * rate, rel=0.2)

    def test_coupling_signs_do_not_change_observables(self):
        params = PhysicalParams.from_dimensionless(omega_c_ratio=0.9, tension_ratio=1.0, n_modes=12)
        scales, problem, spectrum, coeffs = _solved(params)
        signed = problem.with_gamma(first_principles_gammas(params, scales, solve_wavenumbers(params)))
        signed_coeffs = build_coefficients(signed, solve_spectrum(signed))
        assert np.allclose(spectral_density(signed_coeffs).rho, spectral_density(coeffs).rho, rtol=1e-8, atol=1e-14)
        assert np.allclose(emission_spectrum(signed_coeffs).p1, emission_spectrum(coeffs).p1, rtol=1e-8, atol=1e-14)


class TestDisplacementTrace:
    """Tests for the mean bead displacement."""

    def test_starts_at_initial_displacement(self, default_model):
        scales, _, spectrum, coeffs = default_model
        trace = displacement_trace(coeffs, spectrum, 0.3, default_time_grid(scales, 64))
        assert trace[0] == pytest.approx(0.3, rel=1e-10)
        assert np.all(np.abs(trace) <= 0.3 * (1 + 1e-10))

    def test_default_grid_span(self, default_model):
        scales = default_model[0]
        grid = default_time_grid(scales, 11)
        assert grid[0] == 0.0
        assert grid[-1] == pytest.approx(10.0 / scales.nu)
        assert default_time_grid(scales, 5, t_max=2.0)[-1] == 2.0

    def test_rejects_descending_grid(self, default_model):
        _, _, spectrum, coeffs = default_model
        with pytest.raises(DomainError):
            displacement_trace(coeffs, spectrum, 1.0, np.array([1.0, 0.5]))

    def test_uncoupled_bead_oscillates_freely(self, uncoupled_model):
        spectrum, coeffs = uncoupled_model
        t_grid = np.linspace(0.0, 20.0, 101)
        assert np.allclose(displacement_trace(coeffs, spectrum, 1.0, t_grid), np.cos(t_grid), atol=1e-12)


class TestEnvelopeFit:
    """Tests for the exponential envelope fit."""

    def test_recovers_damped_cosine_rate(self):
        t_grid = np.linspace(0.0, 60.0, 6001)
        fit = fit_envelope(t_grid, np.exp(-0.05 * t_grid) * np.cos(2.0 * t_grid))
        assert fit.Gamma == pytest.approx(0.05, rel=1e-3)
        assert fit.n_points >= 30

    def test_window_limits_points(self):
        t_grid = np.linspace(0.0, 60.0, 6001)
        values = np.exp(-0.05 * t_grid) * np.cos(2.0 * t_grid)
        full = fit_envelope(t_grid, values)
        windowed = fit_envelope(t_grid, values, t_window=20.0)
        assert windowed.n_points < full.n_points
        assert windowed.t_window == 20.0

    def test_too_few_extrema(self, caplog):
        t_grid = np.linspace(0.0, 5.0, 100)
        assert fit_envelope(t_grid, np.exp(-t_grid)) is None
        assert "envelope not fitted" in caplog.text


class TestContinuumFunctions:
    """Tests for the quasicontinuum closed forms."""

    @pytest.fixture
    def functions(self):
        return ContinuumFunctions(omega_0=1.0, nu=0.1, omega_s=0.8, omega_d=2.0)

    @pytest.mark.parametrize("x", [0.2, 0.9, 2.5])
    def test_g_matches_principal_value_integral(self, functions, x):
        root = math.sqrt(x)

        def numerator(omega):
            return 4.0 * functions.omega_0 * functions.density(omega) * omega / (root + omega)

        principal, _ = quad(numerator, 0.0, functions.omega_d, weight="cauchy", wvar=root)
        assert float(functions.g(x)) == pytest.approx(functions.omega_0 ** 2 - principal, rel=1e-8)

    @pytest.mark.parametrize("x", [0.3, 1.0, 3.0])
    def test_g_prime_matches_finite_difference(self, functions, x):
        step = 1e-6
        difference = (functions.g(x + step) - functions.g(x - step)) / (2.0 * step)
        assert float(functions.g_prime(x)) == pytest.approx(float(difference), rel=1e-6)

    def test_h_is_golden_rule_density(self, functions):
        assert float(functions.h(0.64)) == pytest.approx(2.0 * math.pi * float(functions.density(0.8)))

    def test_density_matches_binned_couplings(self):
        params = PhysicalParams.from_dimensionless(omega_c_ratio=0.9, tension_ratio=1.0, n_modes=800)
        scales, modes, _ = build_problem(params)
        density = continuum_functions(scales).density
        width = 50
        for start in range(0, modes.omega.size - width, width):
            stop = start + width
            binned = np.sum(modes.gamma[start:stop] ** 2) / (modes.omega[stop] - modes.omega[start])
            assert binned == pytest.approx(np.mean(density(modes.omega[start:stop])), rel=0.05)

    def test_undamped_string_leaves_bead_alone(self):
        functions = ContinuumFunctions(omega_0=1.0, nu=0.0, omega_s=1.0, omega_d=3.0)
        assert float(functions.g(0.5)) == 1.0
        assert float(functions.g_prime(0.5)) == 0.0
        assert float(functions.h(0.5)) == 0.0
        assert functions.resonance() == pytest.approx(1.0, rel=1e-11)

    @pytest.mark.parametrize("x", [0.0, -1.0, 4.0, 5.0])
    def test_domain(self, functions, x):
        with pytest.raises(DomainError):
            functions.g(x)

    def test_resonance_outside_band(self):
        functions = ContinuumFunctions(omega_0=2.0, nu=0.01, omega_s=1.0, omega_d=1.0)
        with pytest.raises(ResonanceNotFoundError):
            functions.resonance()

    def test_resonance_solves_fixed_point(self, functions):
        x_r = functions.resonance()
        assert float(functions.g(x_r)) == pytest.approx(x_r, rel=1e-11)
        assert 1.0 - float(functions.g_prime(x_r)) > 0


class TestDecayRate:
    """Tests for the decay of the bead vibration."""

    @pytest.mark.parametrize("nu", [0.005, 0.02, 0.05])
    def test_envelope_fit_matches_closed_form(self, nu):
        params = _decay_params(nu)
        scales, _, spectrum, coeffs = _solved(params)
        assert scales.nu == pytest.approx(nu)
        report = decay_rate(scales, coeffs, spectrum)
        assert report.Gamma_fit is not None
        assert report.fit_points >= 3
        assert report.Gamma_fit == pytest.approx(report.Gamma_closed, rel=0.1)
        assert report.Gamma_fit == pytest.approx(nu, rel=0.1)
        assert report.Gamma_gr / report.Gamma_fit == pytest.approx(2.0, abs=0.2)

    def test_rates_are_ordered(self):
        scales = derive_scales(_decay_params(0.02))
        report = decay_rate(scales)
        assert report.Gamma_fit is None
        assert report.Gamma_gr == pytest.approx(0.04)
        assert 0 < report.Gamma_closed < report.Gamma_gr
        assert report.Gamma_r == pytest.approx(math.sqrt(report.h_r))
        assert 0 < report.theta_0 < math.pi / 2
        assert report.x_r == pytest.approx(report.omega_r ** 2)

    def test_weak_damping_follows_golden_rule(self):
        functions = continuum_functions(derive_scales(_decay_params(0.001)))
        report = decay_rate(derive_scales(_decay_params(0.001)))
        assert report.Gamma_closed == pytest.approx(report.h_r / (2.0 * report.omega_r), rel=1e-3)
        assert report.omega_r == pytest.approx(math.sqrt(functions.resonance()))


class TestEmissionSpectrum:
    """Tests for single-bogoliubon emission."""

    def test_default_total_probability(self, default_model):
        assert default_model[2].g == pytest.approx(0.670, abs=1e-3)
        emission = emission_spectrum(default_model[3])
        assert emission.total_p1 == pytest.approx(0.852, abs=0.01)
        assert emission.multi_quantum_weight == pytest.approx(1.0 - emission.total_p1)
        assert np.all(emission.p1 >= 0)

    def test_strong_coupling_emission(self, strong_model):
        _, problem, spectrum, coeffs = strong_model
        assert problem.coupling_strength == pytest.approx(0.7, rel=1e-10)
        emission = emission_spectrum(coeffs)
        assert emission.total_p1 == pytest.approx(0.845, abs=0.01)
        assert 0.15 < emission.multi_quantum_weight < 0.16
        # The line sits on the mode just above the bead frequency
        assert 1.0 < emission.peak_Omega < 1.03
        assert emission.peak_Omega == pytest.approx(spectrum.Omega[emission.peak_alpha])

    @pytest.mark.parametrize("model", ["default_model", "strong_model"])
    def test_emission_has_a_single_peak(self, model, request):
        emission = emission_spectrum(request.getfixturevalue(model)[3])
        steps = np.diff(emission.p1)
        assert np.all(steps[:emission.peak_alpha] > 0)
        assert np.all(steps[emission.peak_alpha:] < 0)

    def test_uncoupled_emission_is_certain(self, uncoupled_model):
        emission = emission_spectrum(uncoupled_model[1])
        assert np.allclose(emission.p1, [0.0, 1.0, 0.0], atol=1e-14)
        assert emission.peak_alpha == 1
        assert emission.peak_Omega == pytest.approx(1.0)

    def test_singular_matrix_rejected(self, default_model):
        with pytest.raises(SingularMatrixError):
            emission_spectrum(replace(default_model[3], lu_piv=None))
