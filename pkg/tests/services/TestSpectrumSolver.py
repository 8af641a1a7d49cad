import math

import numpy as np
import pytest

from src.models.parameters import PhysicalParams
from src.models.spectrum import SecularProblem
from src.services.core_model import build_problem, derive_scales
from src.services.oracle import quadrature_form, quadrature_spectrum
from src.services.spectrum_solver import (TOL_SECULAR, excitation_energy, ground_state_energy, secular_eval,
                                          solve_spectrum, yurke_check, yurke_special_coupling)
from src.utils.exceptions import InstabilityError, PoleProximityError

SMALL_PROBLEM = SecularProblem(omega_0=1.0, omega=np.array([0.77, 1.31]), gamma=np.array([0.14, 0.16]))


@pytest.fixture
def default_problem():
    params = PhysicalParams.from_dimensionless(omega_c_ratio=0.95, tension_ratio=1.0, n_modes=15)
    return build_problem(params)[2]


def test_small_problem_matches_direct_diagonalization():
    spectrum = solve_spectrum(SMALL_PROBLEM)
    assert np.allclose(spectrum.Omega, quadrature_spectrum(SMALL_PROBLEM), rtol=1e-12, atol=0)
    assert spectrum.g == pytest.approx(SMALL_PROBLEM.coupling_strength)


def test_default_spectrum_invariants(default_problem):
    spectrum = solve_spectrum(default_problem)
    assert spectrum.size == default_problem.n_modes + 1
    assert spectrum.max_residual <= TOL_SECULAR
    assert spectrum.is_interlaced(default_problem.omega)
    assert np.allclose(spectrum.Omega, quadrature_spectrum(default_problem), rtol=1e-10, atol=0)


def test_roots_sit_in_their_brackets(default_problem):
    spectrum = solve_spectrum(default_problem)
    assert np.all(spectrum.brackets[:, 0] <= spectrum.x)
    assert np.all(spectrum.x <= spectrum.brackets[:, 1])


def test_gap_matrix_matches_frequencies(default_problem):
    spectrum = solve_spectrum(default_problem)
    expected = spectrum.x[:, None] - default_problem.omega[None, :] ** 2
    assert np.allclose(spectrum.gap, expected, rtol=1e-9, atol=1e-13)


def test_secular_function_vanishes_at_roots():
    spectrum = solve_spectrum(SMALL_PROBLEM)
    for x in spectrum.x:
        value, derivative = secular_eval(SMALL_PROBLEM, float(x))
        assert abs(value) < 1e-12
        assert derivative > 1.0


def test_secular_eval_refuses_pole():
    with pytest.raises(PoleProximityError) as excinfo:
        secular_eval(SMALL_PROBLEM, 0.77 ** 2)
    assert excinfo.value.distance == 0.0


def test_unstable_coupling_rejected(caplog):
    problem = SecularProblem(omega_0=1.0, omega=np.array([0.5, 1.5]), gamma=np.array([0.4, 0.4]))
    assert problem.coupling_strength >= 1
    with pytest.raises(InstabilityError) as excinfo:
        solve_spectrum(problem)
    assert excinfo.value.g == pytest.approx(problem.coupling_strength)
    assert "stability bound" in caplog.text


def test_uncoupled_problem_returns_bare_frequencies():
    problem = SMALL_PROBLEM.with_gamma(np.zeros(2))
    spectrum = solve_spectrum(problem)
    assert np.allclose(spectrum.Omega, [0.77, 1.0, 1.31], rtol=1e-14)
    assert list(spectrum.decoupled_mode) == [0, -1, 1]
    assert spectrum.is_interlaced(problem.omega, strict=False)


def test_single_decoupled_mode_keeps_frequency():
    problem = SMALL_PROBLEM.with_gamma(np.array([0.14, 0.0]))
    spectrum = solve_spectrum(problem)
    assert 1.31 in spectrum.Omega
    assert np.allclose(spectrum.Omega, quadrature_spectrum(problem), rtol=1e-12)


def test_sign_of_coupling_does_not_matter():
    flipped = SMALL_PROBLEM.with_gamma(np.array([0.14, -0.16]))
    assert np.array_equal(solve_spectrum(flipped).Omega, solve_spectrum(SMALL_PROBLEM).Omega)


def test_ground_state_energy_is_zero_point_shift():
    spectrum = solve_spectrum(SMALL_PROBLEM)
    expected = 0.5 * (np.sum(quadrature_spectrum(SMALL_PROBLEM)) - 1.0 - 0.77 - 1.31)
    assert ground_state_energy(SMALL_PROBLEM, spectrum) == pytest.approx(expected, abs=1e-13)
    assert ground_state_energy(SMALL_PROBLEM, spectrum) < 0


def test_excitation_energy():
    spectrum = solve_spectrum(SMALL_PROBLEM)
    energy = excitation_energy(SMALL_PROBLEM, spectrum, [1, 0, 2])
    expected = spectrum.Omega[0] + 2.0 * spectrum.Omega[2] + ground_state_energy(SMALL_PROBLEM, spectrum)
    assert energy == pytest.approx(expected)
    with pytest.raises(ValueError):
        excitation_energy(SMALL_PROBLEM, spectrum, [1, 0])


def test_yurke_diagnostics():
    params = PhysicalParams.from_dimensionless(omega_c_ratio=0.9, tension_ratio=1.0, n_modes=50)
    scales, _, problem = build_problem(params)
    assert yurke_special_coupling(scales) == pytest.approx(math.sqrt(4.0 / math.pi * scales.nu * scales.omega_d))
    residuals = yurke_check(derive_scales(params), solve_spectrum(problem))
    assert residuals.shape == (51,)
    assert np.all(np.isfinite(residuals))


def _scaled_to(problem, g):
    return problem.with_gamma(problem.gamma * math.sqrt(g / problem.coupling_strength))


def test_lowest_frequency_softens_towards_stability_bound(default_problem):
    lowest = []
    for g in (0.9, 0.99, 0.999, 0.9999):
        problem = _scaled_to(default_problem, g)
        spectrum = solve_spectrum(problem)
        assert spectrum.max_residual <= TOL_SECULAR
        # S(0) = -(1 - g) omega_0^2 and S' >= 1 bound the lowest root
        assert spectrum.x[0] <= (1.0 - g) * problem.omega_0 ** 2 * (1.0 + 1e-9)
        lowest.append(spectrum.Omega[0])
    assert np.all(np.diff(lowest) < 0)
    assert lowest[-1] < 1e-2


@pytest.mark.parametrize("g", [1.0001, 1.01, 1.5])
def test_coupling_beyond_bound_is_unstable(default_problem, g):
    problem = _scaled_to(default_problem, g)
    assert not quadrature_form(problem).is_positive_definite
    with pytest.raises(InstabilityError):
        solve_spectrum(problem)
