"""
Oracle Module

This module holds brute-force cross-checks for the analytic pipeline. None of
them shares code with the secular-equation solver or the coefficient
formulas, so agreement certifies both.

* The quadrature form diagonalizes the mass-weighted stiffness matrix of the
  coupled oscillators directly.
* The coefficient system substitutes M and N back into the Heisenberg
  equations [b_beta, H] = Omega_beta b_beta, one equation per uncoupled
  operator a_alpha and a_alpha^dagger.
* The Fock truncation builds the Hamiltonian
  H = sum_alpha omega_alpha a_alpha^dagger a_alpha - (a_0 + a_0^dagger) sum_n gamma_n (a_n + a_n^dagger)
  on a truncated product Fock space and diagonalizes it exactly.

Classes:
    QuadratureForm: Stiffness matrix K of the coupled normal-mode problem
    FockTruncation: Small-system Hamiltonian on a truncated Fock space
    FockGroundState: Ground state and low-lying eigenstates with expectation evaluators

Functions:
    quadrature_form: Build K for a secular problem
    quadrature_spectrum: Normal-mode frequencies from the eigenvalues of K
    coefficient_system_residuals: Residual of each family of defining equations
    verify_coefficient_system: Largest residual of the defining equations
    fock_ground_state: Diagonalize a FockTruncation
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List

import numpy as np
from scipy import sparse
from scipy.linalg import eigh
from scipy.sparse.linalg import eigsh

from ..models.bogoliubov import CoefficientSet
from ..models.spectrum import BogoliubovSpectrum, SecularProblem
from ..utils.exceptions import InstabilityError, ParameterError

MAX_FOCK_DIMENSION = 100_000
# Above this dimension only the lowest eigenpairs are computed, with ARPACK
DENSE_FOCK_LIMIT = 6000
MAX_FOCK_STRING_MODES = 3
# Probability of the cutoff occupation above which the truncation is reported as too small
CUTOFF_WARNING_LEVEL = 1e-8

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadratureForm:
    """
    Mass-weighted stiffness matrix of the coupled oscillators.

    K_aa = omega_a^2, K_0n = K_n0 = -2 gamma_n sqrt(omega_0 omega_n), zero elsewhere.
    The squared normal-mode frequencies are its eigenvalues.

    Attributes:
        K (np.ndarray): Symmetric (N+1, N+1) matrix
    """

    K: np.ndarray

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.K)

    @property
    def smallest_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def is_positive_definite(self) -> bool:
        return self.smallest_eigenvalue > 0


def quadrature_form(problem: SecularProblem) -> QuadratureForm:
    """Build the stiffness matrix K of a secular problem."""
    size = problem.n_modes + 1
    K = np.zeros((size, size))
    K[0, 0] = problem.omega_0 ** 2
    K[np.arange(1, size), np.arange(1, size)] = problem.omega ** 2
    K[0, 1:] = -2.0 * problem.gamma * np.sqrt(problem.omega_0 * problem.omega)
    K[1:, 0] = K[0, 1:]
    return QuadratureForm(K=K)


def quadrature_spectrum(problem: SecularProblem) -> np.ndarray:
    """
    Normal-mode frequencies from a direct diagonalization of K.

    Args:
        problem: Secular problem

    Returns:
        Ascending frequencies sqrt(eig K).

    Raises:
        InstabilityError: If K has a negative eigenvalue
    """
    form = quadrature_form(problem)
    if form.smallest_eigenvalue < 0:
        raise InstabilityError(problem.coupling_strength,
                               f"smallest eigenvalue of K is {form.smallest_eigenvalue:.6g}")
    return np.sqrt(form.eigenvalues)


def coefficient_system_residuals(
    problem: SecularProblem, spectrum: BogoliubovSpectrum, coeffs: CoefficientSet
) -> Dict[str, float]:
    """
    Substitute M and N into the defining equations of each Bogoliubov row.

    With s_b = sum_q gamma_q (N_bq - M_bq):

        (Omega_b - omega_0) M_b0 = s_b
        (Omega_b + omega_0) N_b0 = s_b
        (Omega_b - omega_q) M_bq = gamma_q (N_b0 - M_b0)
        (Omega_b + omega_q) N_bq = gamma_q (N_b0 - M_b0)

    Args:
        problem: Secular problem
        spectrum: Its solved spectrum
        coeffs: Coefficient set to check

    Returns:
        Dict mapping each equation family to its max absolute residual.
    """
    Omega = spectrum.Omega[:, None]
    M, N_mat = coeffs.M, coeffs.N_mat
    gamma = problem.gamma[None, :]
    omega = problem.omega[None, :]
    string_sum = np.sum(gamma * (N_mat[:, 1:] - M[:, 1:]), axis=1)
    bead_difference = (N_mat[:, 0] - M[:, 0])[:, None]
    return {
        "M_bead": float(np.max(np.abs((spectrum.Omega - problem.omega_0) * M[:, 0] - string_sum))),
        "N_bead": float(np.max(np.abs((spectrum.Omega + problem.omega_0) * N_mat[:, 0] - string_sum))),
        "M_string": float(np.max(np.abs((Omega - omega) * M[:, 1:] - gamma * bead_difference))),
        "N_string": float(np.max(np.abs((Omega + omega) * N_mat[:, 1:] - gamma * bead_difference))),
    }


def verify_coefficient_system(problem: SecularProblem, spectrum: BogoliubovSpectrum, coeffs: CoefficientSet) -> float:
    """Largest residual over all rows of the four defining equations."""
    return max(coefficient_system_residuals(problem, spectrum, coeffs).values())


def _ladder(cutoff: int) -> sparse.csr_matrix:
    return sparse.diags(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1, format="csr")


@dataclass(frozen=True)
class FockTruncation:
    """
    Bead plus a few string modes on a truncated product Fock space.

    Mode 0 is the bead and is the slowest-varying factor of the basis index.

    Attributes:
        omega_0 (float): Bead frequency
        omega (np.ndarray): String frequencies (1 to 3 modes)
        gamma (np.ndarray): Couplings
        cutoff (int): Largest occupation kept per mode
    """

    omega_0: float
    omega: np.ndarray
    gamma: np.ndarray
    cutoff: int = 12
    _operators: List[sparse.csr_matrix] = field(default_factory=list, init=False, repr=False, compare=False)

    def __post_init__(self):
        """
        Validate the truncation and build the ladder operators.

        Raises:
            ParameterError: If the mode count, cutoff or dimension is out of range
        """
        omega = np.atleast_1d(np.asarray(self.omega, dtype=float))
        gamma = np.atleast_1d(np.asarray(self.gamma, dtype=float))
        if not 1 <= omega.size <= MAX_FOCK_STRING_MODES:
            raise ParameterError("n_modes", omega.size, f"must be between 1 and {MAX_FOCK_STRING_MODES}")
        if gamma.shape != omega.shape:
            raise ParameterError("gamma", gamma, f"must have length {omega.size}")
        if self.cutoff < 1:
            raise ParameterError("cutoff", self.cutoff, "must be at least 1")
        dimension = (self.cutoff + 1) ** (omega.size + 1)
        if dimension > MAX_FOCK_DIMENSION:
            raise ParameterError("cutoff", self.cutoff, f"gives dimension {dimension} above {MAX_FOCK_DIMENSION}")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "gamma", gamma)

        single = _ladder(self.cutoff)
        identity = sparse.identity(self.cutoff + 1, format="csr")
        operators = []
        for mode in range(self.n_total):
            factors = [single if i == mode else identity for i in range(self.n_total)]
            operator = factors[0]
            for factor in factors[1:]:
                operator = sparse.kron(operator, factor, format="csr")
            operators.append(operator)
        self._operators.extend(operators)

    @classmethod
    def from_problem(cls, problem: SecularProblem, cutoff: int = 12) -> "FockTruncation":
        return cls(omega_0=problem.omega_0, omega=problem.omega, gamma=problem.gamma, cutoff=cutoff)

    @property
    def n_total(self) -> int:
        """Bead plus string modes."""
        return int(self.omega.size) + 1

    @property
    def dimension(self) -> int:
        return (self.cutoff + 1) ** self.n_total

    @property
    def frequencies(self) -> np.ndarray:
        """Uncoupled frequencies in mode order, bead first."""
        return np.concatenate(([self.omega_0], self.omega))

    def annihilation(self, mode: int) -> sparse.csr_matrix:
        return self._operators[mode]

    def number(self, mode: int) -> sparse.csr_matrix:
        a = self._operators[mode]
        return (a.T @ a).tocsr()

    def occupations(self) -> np.ndarray:
        """(dimension, n_total) array of the occupation of each mode in each basis state."""
        return np.array(np.unravel_index(np.arange(self.dimension), (self.cutoff + 1,) * self.n_total)).T

    def hamiltonian(self) -> sparse.csr_matrix:
        """H = sum omega a^dagger a - X_0 sum gamma_n X_n with X = a + a^dagger."""
        H = sparse.csr_matrix((self.dimension, self.dimension))
        for mode, frequency in enumerate(self.frequencies):
            H = H + frequency * self.number(mode)
        bead = self._operators[0] + self._operators[0].T
        string = sparse.csr_matrix((self.dimension, self.dimension))
        for n, coupling in enumerate(self.gamma, start=1):
            string = string + coupling * (self._operators[n] + self._operators[n].T)
        return (H - bead @ string).tocsr()


@dataclass(frozen=True)
class FockGroundState:
    """
    Low-lying eigenpairs of a FockTruncation.

    Attributes:
        trunc (FockTruncation): The truncation diagonalized
        energies (np.ndarray): Ascending eigenvalues (all of them, or the lowest few)
        vectors (np.ndarray): Matching eigenvectors as columns
        top_occupancy (float): Ground-state probability of any mode sitting at the cutoff
    """

    trunc: FockTruncation
    energies: np.ndarray
    vectors: np.ndarray
    top_occupancy: float

    @property
    def energy(self) -> float:
        return float(self.energies[0])

    @property
    def vector(self) -> np.ndarray:
        return self.vectors[:, 0]

    def _expectation(self, operator) -> float:
        return float(self.vector @ (operator @ self.vector))

    def occupations(self) -> np.ndarray:
        """<a_alpha^dagger a_alpha> per uncoupled mode, bead first."""
        return np.array([self._expectation(self.trunc.number(mode)) for mode in range(self.trunc.n_total)])

    def bead_variance(self, mass: float = 1.0) -> float:
        """<u_0^2> = <(a_0 + a_0^dagger)^2> / (2 m omega_0)."""
        x = self.trunc.annihilation(0) + self.trunc.annihilation(0).T
        return self._expectation(x @ x) / (2.0 * mass * self.trunc.omega_0)

    def vacuum_overlap(self) -> float:
        """|<uncoupled vacuum|ground state>|."""
        return abs(float(self.vector[0]))

    def parity_residual(self) -> float:
        """Norm of the ground state on odd total-excitation basis states."""
        odd = np.sum(self.trunc.occupations(), axis=1) % 2 == 1
        return float(np.linalg.norm(self.vector[odd]))

    def quadrature_covariance(self) -> np.ndarray:
        """Symmetrized covariance of (x_0..x_N, p_0..p_N) with x = (a + a^dagger)/sqrt2."""
        n_total = self.trunc.n_total
        xs = [(self.trunc.annihilation(m) + self.trunc.annihilation(m).T) / math.sqrt(2.0) for m in range(n_total)]
        # p = -i P with P real antisymmetric, so <p_i p_j> = -<P_i P_j>
        ps = [(self.trunc.annihilation(m) - self.trunc.annihilation(m).T) / math.sqrt(2.0) for m in range(n_total)]
        x_states = [x @ self.vector for x in xs]
        p_states = [p @ self.vector for p in ps]
        covariance = np.zeros((2 * n_total, 2 * n_total))
        for i in range(n_total):
            for j in range(n_total):
                covariance[i, j] = float(x_states[i] @ x_states[j])
                covariance[n_total + i, n_total + j] = float(p_states[i] @ p_states[j])
        return covariance

    def excitation_energies(self) -> np.ndarray:
        return self.energies - self.energy

    def single_excitations(self, n_states: int) -> np.ndarray:
        """
        Column indices of the n_states lowest odd-parity eigenstates.

        One-quantum Bogoliubov states are the lowest states of odd total parity
        as long as three quanta cost more than the largest single frequency.
        """
        odd = np.sum(self.trunc.occupations(), axis=1) % 2 == 1
        weights = np.sum(self.vectors[odd] ** 2, axis=0)
        candidates = np.flatnonzero(weights > 0.5)
        if candidates.size < n_states:
            raise ParameterError("n_states", n_states, f"only {candidates.size} odd-parity eigenstates available")
        return candidates[:n_states]

    def emission_overlaps(self) -> np.ndarray:
        """
        |<1_alpha| a_0^dagger |uncoupled vacuum>|^2 for each one-quantum eigenstate, ascending in energy.
        """
        created = np.zeros(self.trunc.dimension)
        created[(self.trunc.cutoff + 1) ** (self.trunc.n_total - 1)] = 1.0
        indices = self.single_excitations(self.trunc.n_total)
        return (self.vectors[:, indices].T @ created) ** 2


def fock_ground_state(trunc: FockTruncation) -> FockGroundState:
    """
    Diagonalize the truncated Hamiltonian.

    Dense diagonalization is used up to DENSE_FOCK_LIMIT basis states; above
    it the lowest eigenpairs come from ARPACK.

    Args:
        trunc: Fock truncation

    Returns:
        FockGroundState: Eigenpairs and the cutoff diagnostic.
    """
    H = trunc.hamiltonian()
    if trunc.dimension <= DENSE_FOCK_LIMIT:
        energies, vectors = eigh(H.toarray())
    else:
        n_states = min(trunc.dimension - 2, 6 * trunc.n_total)
        energies, vectors = eigsh(H, k=n_states, which="SA")
        order = np.argsort(energies)
        energies, vectors = energies[order], vectors[:, order]
    ground = vectors[:, 0]
    at_cutoff = np.any(trunc.occupations() == trunc.cutoff, axis=1)
    top_occupancy = float(np.sum(ground[at_cutoff] ** 2))
    if top_occupancy > CUTOFF_WARNING_LEVEL:
        logger.warning(f"Fock cutoff {trunc.cutoff} may be too small: "
                       f"cutoff occupation probability {top_occupancy:.3e}")
    logger.info(f"Diagonalized Fock truncation of dimension {trunc.dimension}, E_0 = {energies[0]:.12g}")
    return FockGroundState(trunc=trunc, energies=energies, vectors=vectors, top_occupancy=top_occupancy)
