import numpy as np
import pytest

from src.models.parameters import PhysicalParams
from src.models.spectrum import SecularProblem
from src.services.bogoliubov_service import build_coefficients
from src.services.core_model import build_problem, derive_scales
from src.services.observables_service import (bead_variance, emission_spectrum, occupation_numbers,
                                              quadrature_covariance)
from src.services.oracle import (FockTruncation, coefficient_system_residuals, fock_ground_state, quadrature_form,
                                 quadrature_spectrum, verify_coefficient_system)
from src.services.spectrum_solver import ground_state_energy, solve_spectrum
from src.utils.exceptions import InstabilityError, ParameterError

FOCK_PROBLEM = SecularProblem(omega_0=1.0, omega=np.array([0.77, 1.31]), gamma=np.array([0.14, 0.16]))
FOCK_CUTOFF = 12


@pytest.fixture(scope="module")
def analytic():
    spectrum = solve_spectrum(FOCK_PROBLEM)
    return spectrum, build_coefficients(FOCK_PROBLEM, spectrum)


@pytest.fixture(scope="module")
def fock():
    return fock_ground_state(FockTruncation.from_problem(FOCK_PROBLEM, cutoff=FOCK_CUTOFF))


@pytest.fixture
def default_problem():
    params = PhysicalParams.from_dimensionless(omega_c_ratio=0.95, tension_ratio=1.0, n_modes=15)
    return build_problem(params)[2]


class TestQuadratureForm:
    """Tests for the direct diagonalization of the stiffness matrix."""

    def test_stiffness_matrix(self):
        K = quadrature_form(FOCK_PROBLEM).K
        assert np.array_equal(K, K.T)
        assert np.allclose(np.diag(K), [1.0, 0.77 ** 2, 1.31 ** 2])
        assert K[0, 1] == pytest.approx(-2.0 * 0.14 * np.sqrt(0.77))
        assert K[1, 2] == 0.0

    def test_stable_problem_is_positive_definite(self, default_problem):
        form = quadrature_form(default_problem)
        assert form.is_positive_definite
        assert np.all(np.diff(quadrature_spectrum(default_problem)) > 0)

    def test_unstable_problem(self):
        problem = SecularProblem(omega_0=1.0, omega=np.array([0.5, 1.5]), gamma=np.array([0.4, 0.4]))
        assert not quadrature_form(problem).is_positive_definite
        with pytest.raises(InstabilityError):
            quadrature_spectrum(problem)


class TestCoefficientSystem:
    """Tests for substituting the coefficients back into their defining equations."""

    def test_default_coefficients_satisfy_system(self, default_problem):
        spectrum = solve_spectrum(default_problem)
        coeffs = build_coefficients(default_problem, spectrum)
        residuals = coefficient_system_residuals(default_problem, spectrum, coeffs)
        assert set(residuals) == {"M_bead", "N_bead", "M_string", "N_string"}
        assert verify_coefficient_system(default_problem, spectrum, coeffs) < 1e-9

    def test_shifted_frequency_is_detected(self, default_problem):
        shifted = solve_spectrum(default_problem).with_shift(0, 1e-4)
        coeffs = build_coefficients(default_problem, shifted)
        assert verify_coefficient_system(default_problem, shifted, coeffs) > 1e-7


class TestFockTruncation:
    """Tests for the truncated Fock-space Hamiltonian."""

    @pytest.mark.parametrize("omega, gamma, cutoff", [
        ([0.5, 1.0, 1.5, 2.0], [0.1, 0.1, 0.1, 0.1], 4),
        ([1.0, 2.0], [0.1], 4),
        ([1.0], [0.1], 0),
        ([0.5, 1.0, 1.5], [0.1, 0.1, 0.1], 20),
    ])
    def test_rejects_invalid_truncation(self, omega, gamma, cutoff):
        with pytest.raises(ParameterError):
            FockTruncation(omega_0=1.0, omega=np.array(omega), gamma=np.array(gamma), cutoff=cutoff)

    def test_basis_layout(self):
        trunc = FockTruncation(omega_0=1.0, omega=np.array([2.0]), gamma=np.array([0.0]), cutoff=3)
        assert trunc.dimension == 16
        assert np.array_equal(trunc.occupations()[4], [1, 0])
        assert np.array_equal(trunc.frequencies, [1.0, 2.0])
        number = trunc.number(0).diagonal()
        assert np.allclose(number, trunc.occupations()[:, 0], atol=1e-12)

    def test_hamiltonian_is_symmetric(self):
        H = FockTruncation.from_problem(FOCK_PROBLEM, cutoff=4).hamiltonian()
        assert abs(H - H.T).max() < 1e-15

    def test_uncoupled_ground_state_is_vacuum(self):
        trunc = FockTruncation(omega_0=1.0, omega=np.array([0.77]), gamma=np.array([0.0]), cutoff=3)
        ground = fock_ground_state(trunc)
        assert ground.energy == pytest.approx(0.0, abs=1e-14)
        assert ground.vacuum_overlap() == pytest.approx(1.0)
        assert np.allclose(ground.occupations(), 0.0, atol=1e-14)


class TestFockAgainstAnalytic:
    """The Fock diagonalization reproduces every Bogoliubov observable."""

    def test_cutoff_is_converged(self, fock):
        assert fock.top_occupancy < 1e-8

    def test_ground_energy(self, fock, analytic):
        spectrum, _ = analytic
        assert fock.energy == pytest.approx(ground_state_energy(FOCK_PROBLEM, spectrum), abs=1e-6)

    def test_single_excitation_energies(self, fock, analytic):
        spectrum, _ = analytic
        indices = fock.single_excitations(3)
        assert np.allclose(fock.excitation_energies()[indices], spectrum.Omega, rtol=0, atol=1e-6)

    def test_occupations(self, fock, analytic):
        _, coeffs = analytic
        assert np.allclose(fock.occupations(), occupation_numbers(coeffs).n_occ, rtol=0, atol=1e-5)

    def test_bead_variance(self, fock, analytic):
        spectrum, coeffs = analytic
        scales = derive_scales(PhysicalParams.from_dimensionless(0.5, 1.0, 2))
        assert fock.bead_variance() == pytest.approx(bead_variance(coeffs, spectrum, scales).variance, abs=1e-5)

    def test_vacuum_overlap(self, fock, analytic):
        assert fock.vacuum_overlap() == pytest.approx(analytic[1].ground_norm, abs=1e-5)

    def test_quadrature_covariance(self, fock, analytic):
        assert np.allclose(fock.quadrature_covariance(), quadrature_covariance(analytic[1]), rtol=0, atol=1e-5)

    def test_ground_state_has_even_parity(self, fock):
        assert fock.parity_residual() < 1e-10

    def test_emission_overlaps(self, fock, analytic):
        p1 = emission_spectrum(analytic[1]).p1
        assert np.allclose(fock.emission_overlaps(), p1, rtol=0, atol=1e-5)

    def test_smaller_cutoff_changes_little(self, fock):
        coarse = fock_ground_state(FockTruncation.from_problem(FOCK_PROBLEM, cutoff=FOCK_CUTOFF - 2))
        assert coarse.energy == pytest.approx(fock.energy, abs=1e-8)
