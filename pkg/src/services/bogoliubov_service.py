"""
Bogoliubov Service Module

This module builds the Bogoliubov transformation of the coupled bead and
string from the solved spectrum, derives the squeeze matrix of the ground
state and checks the symplectic identities the transformation must obey.

Row alpha of M and N belongs to the Bogoliubov mode with frequency Omega_alpha:

    M_a0 = (Omega + omega_0) / (sqrt(4 omega_0 Omega) D)
    N_a0 = (Omega - omega_0) / (sqrt(4 omega_0 Omega) D)
    M_ak = -2 omega_0 gamma_k (Omega + omega_k) / ((Omega^2 - omega_k^2) sqrt(4 omega_0 Omega) D)
    N_ak = -2 omega_0 gamma_k / ((Omega + omega_k) sqrt(4 omega_0 Omega) D)

with D^2 = 1 + 4 omega_0 sum_q gamma_q^2 omega_q / (Omega^2 - omega_q^2)^2.

Functions:
    build_coefficients: Matrices M, N with det M and the ground-state norm
    check_symplectic: Residuals of the symplectic identities
    squeeze_matrix: xi = M^-1 N with its symmetry, Schur and determinant checks
    symplectic_form: The matrix J used by the symplectic condition
"""

import logging
import math

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from ..models.bogoliubov import CoefficientSet, SqueezeMatrix, SymplecticReport
from ..models.spectrum import BogoliubovSpectrum, SecularProblem
from ..utils.exceptions import SingularMatrixError

# Bogoliubov frequencies closer than this to a coupled string frequency (in units of omega_0) are logged
CONDITIONING_LIMIT = 1e-8

logger = logging.getLogger(__name__)


def _coefficient_row(problem: SecularProblem, Omega: float, gap: np.ndarray):
    """M row, N row and D for one coupled Bogoliubov mode."""
    omega_0 = problem.omega_0
    gamma = problem.gamma
    omega = problem.omega
    coupled = gamma != 0
    safe_gap = np.where(coupled, gap, 1.0)
    d_squared = 1.0 + 4.0 * omega_0 * np.sum(np.where(coupled, gamma ** 2 * omega / safe_gap ** 2, 0.0))
    norm = math.sqrt(d_squared)
    common = 1.0 / (math.sqrt(4.0 * omega_0 * Omega) * norm)

    m_row = np.empty(problem.n_modes + 1)
    n_row = np.empty(problem.n_modes + 1)
    m_row[0] = (Omega + omega_0) * common
    n_row[0] = (Omega - omega_0) * common
    m_row[1:] = np.where(coupled, -2.0 * omega_0 * gamma * (Omega + omega) / safe_gap, 0.0) * common
    n_row[1:] = -2.0 * omega_0 * gamma / (Omega + omega) * common
    return m_row, n_row, norm


def build_coefficients(problem: SecularProblem, spectrum: BogoliubovSpectrum) -> CoefficientSet:
    """
    Build the Bogoliubov coefficient matrices from the solved spectrum.

    Rows that are exactly decoupled string modes are unit vectors with an
    infinite norm factor. det M is taken from the LU factorisation of M; its
    magnitude and sign are stored separately because the sign depends on the
    row labelling and on the sign convention of the couplings.

    Args:
        problem: Secular problem
        spectrum: Its solved spectrum

    Returns:
        CoefficientSet: M, N, D_alpha, |det M|, sign of det M and the ground-state norm.
    """
    size = problem.n_modes + 1
    M = np.zeros((size, size))
    N_mat = np.zeros((size, size))
    norm_factors = np.empty(size)
    for alpha in range(size):
        q = spectrum.decoupled_mode[alpha]
        if q >= 0:
            M[alpha, q + 1] = 1.0
            norm_factors[alpha] = math.inf
            continue
        M[alpha], N_mat[alpha], norm_factors[alpha] = _coefficient_row(
            problem, spectrum.Omega[alpha], spectrum.gap[alpha]
        )

    coupled_gap = np.abs(spectrum.gap[:, problem.gamma != 0])
    if coupled_gap.size:
        closest = coupled_gap / (spectrum.Omega[:, None] + problem.omega[problem.gamma != 0][None, :])
        closest = closest[spectrum.decoupled_mode < 0]
        if closest.size and np.min(closest) < CONDITIONING_LIMIT * problem.omega_0:
            logger.warning(
                f"Bogoliubov frequency within {np.min(closest):.3e} of a string frequency; "
                "coefficients are poorly conditioned"
            )

    lu, piv = lu_factor(M, check_finite=True)
    diagonal = np.diag(lu)
    if np.any(diagonal == 0):
        logger.warning("M is singular; the ground state is not normalisable")
        return CoefficientSet(M=M, N_mat=N_mat, norm_factors=norm_factors, det_M=0.0, det_sign=0,
                              ground_norm=math.inf, Omega=spectrum.Omega, lu_piv=None)
    swaps = int(np.sum(piv != np.arange(size)))
    det_sign = int((-1) ** swaps * np.prod(np.sign(diagonal)))
    det_M = math.exp(float(np.sum(np.log(np.abs(diagonal)))))
    if det_sign < 0:
        logger.info("det M is negative in the ascending-frequency labelling; its magnitude is used")
    logger.debug(f"Built {size}x{size} Bogoliubov coefficients, |det M| = {det_M:.12g}")
    return CoefficientSet(
        M=M,
        N_mat=N_mat,
        norm_factors=norm_factors,
        det_M=det_M,
        det_sign=det_sign,
        ground_norm=1.0 / math.sqrt(det_M),
        Omega=spectrum.Omega,
        lu_piv=(lu, piv),
    )


def symplectic_form(size: int) -> np.ndarray:
    """J = [[0, I], [-I, 0]] for size modes, with J^2 = -I."""
    identity = np.eye(size)
    zero = np.zeros((size, size))
    return np.block([[zero, identity], [-identity, zero]])


def check_symplectic(coeffs: CoefficientSet) -> SymplecticReport:
    """
    Max-norm residuals of the identities a Bogoliubov transformation satisfies.

    The report is diagnostic; callers decide which tolerance to hold it to.

    Args:
        coeffs: Coefficient set

    Returns:
        SymplecticReport: Residuals of TJT^T - J, MM^T - NN^T - I, UU^T - VV^T - I,
        the antisymmetric parts of NM^T and UV^T, det T - 1 and the row normalisation.
    """
    M, N_mat, U, V = coeffs.M, coeffs.N_mat, coeffs.U, coeffs.V
    size = coeffs.size
    identity = np.eye(size)
    J = symplectic_form(size)
    T = coeffs.T

    nm = N_mat @ M.T
    uv = U @ V.T
    sign_plus, log_plus = np.linalg.slogdet(M + N_mat)
    sign_minus, log_minus = np.linalg.slogdet(M - N_mat)
    det_t = sign_plus * sign_minus * math.exp(log_plus + log_minus)

    report = SymplecticReport(
        tjt=float(np.max(np.abs(T @ J @ T.T - J))),
        mm_nn=float(np.max(np.abs(M @ M.T - N_mat @ N_mat.T - identity))),
        uu_vv=float(np.max(np.abs(U @ U.T - V @ V.T - identity))),
        sym_nm=float(np.max(np.abs(nm - nm.T))),
        sym_uv=float(np.max(np.abs(uv - uv.T))),
        det_t=abs(det_t - 1.0),
        row_norm=float(np.max(np.abs(np.sum(M ** 2 - N_mat ** 2, axis=1) - 1.0))),
    )
    logger.debug(f"Symplectic residuals: {report.as_dict()}")
    return report


def squeeze_matrix(coeffs: CoefficientSet) -> SqueezeMatrix:
    """
    Squeeze matrix xi = M^-1 N of the coupled ground state.

    xi comes from the LU factorisation of M, never from an explicit inverse.
    The symmetry of xi, the Schur identity (M^T)^-1 = M - N M^-1 N and
    det(1 - xi^2) = (det M)^-2 are evaluated alongside.

    Args:
        coeffs: Coefficient set

    Returns:
        SqueezeMatrix: xi and its residuals.

    Raises:
        SingularMatrixError: If M is singular
    """
    if coeffs.lu_piv is None or coeffs.det_M == 0:
        raise SingularMatrixError("M is singular; the coupling strength is at or beyond the stability bound.")
    M, N_mat = coeffs.M, coeffs.N_mat
    size = coeffs.size
    xi = lu_solve(coeffs.lu_piv, N_mat)
    inverse_transpose = lu_solve(coeffs.lu_piv, np.eye(size), trans=1)
    schur = M - N_mat @ xi

    symmetric = 0.5 * (xi + xi.T)
    spectral_radius = float(np.max(np.abs(np.linalg.eigvalsh(symmetric)))) if size else 0.0
    if spectral_radius >= 1:
        logger.warning(f"Squeeze matrix spectral radius {spectral_radius:.6g} >= 1; "
                       "the ground state is not normalisable")

    sign, logdet = np.linalg.slogdet(np.eye(size) - xi @ xi)
    det_residual = abs(sign * math.exp(logdet + 2.0 * math.log(coeffs.det_M)) - 1.0)
    return SqueezeMatrix(
        xi=xi,
        symmetry_residual=float(np.max(np.abs(xi - xi.T))),
        schur_residual=float(np.max(np.abs(inverse_transpose - schur))),
        spectral_radius=spectral_radius,
        det_residual=det_residual,
    )
