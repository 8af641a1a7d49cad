"""
Bogoliubov Models Module

This module holds the matrices of the Bogoliubov transformation and the
diagnostic reports built from them.

Rows are indexed by the Bogoliubov mode alpha (ascending frequency), columns
by the uncoupled mode: 0 for the bead, 1..N for the string.

Classes:
    CoefficientSet: Matrices M and N with derived U, V, det M and the ground-state norm
    SqueezeMatrix: Squeeze matrix xi = M^-1 N with its identity residuals
    SymplecticReport: Max-norm residuals of the symplectic identities
"""

from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..utils.exceptions import ParameterError

# Max-norm tolerance for identity residuals
TOL_IDENTITY = 1e-10


@dataclass(frozen=True)
class CoefficientSet:
    """
    Coefficients of b_alpha = sum_beta (M_ab a_beta + N_ab a_beta^dagger).

    Attributes:
        M (np.ndarray): (N+1, N+1) matrix M
        N_mat (np.ndarray): (N+1, N+1) matrix N
        norm_factors (np.ndarray): D_alpha per row; infinite for decoupled string rows
        det_M (float): |det M|
        det_sign (int): Sign of det M, which depends on labelling and coupling signs
        ground_norm (float): Overlap of the coupled ground state with the uncoupled vacuum, |det M|^-1/2
        Omega (np.ndarray): Bogoliubov frequencies labelling the rows
        lu_piv (Optional[Tuple]): LU factorisation of M, reused by the linear solves
    """

    M: np.ndarray
    N_mat: np.ndarray
    norm_factors: np.ndarray
    det_M: float
    det_sign: int
    ground_norm: float
    Omega: np.ndarray
    lu_piv: Optional[Tuple[np.ndarray, np.ndarray]] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if np.shape(self.M) != np.shape(self.N_mat) or np.ndim(self.M) != 2 or self.M.shape[0] != self.M.shape[1]:
            raise ParameterError("N_mat", np.shape(self.N_mat), f"must match the square shape of M {np.shape(self.M)}")

    @property
    def size(self) -> int:
        return int(self.M.shape[0])

    @property
    def U(self) -> np.ndarray:
        """Inverse-transformation matrix U = M^T."""
        return self.M.T

    @property
    def V(self) -> np.ndarray:
        """Inverse-transformation matrix V = -N^T."""
        return -self.N_mat.T

    @property
    def T(self) -> np.ndarray:
        """Block matrix [[M, N], [N, M]]."""
        return np.block([[self.M, self.N_mat], [self.N_mat, self.M]])


@dataclass(frozen=True)
class SqueezeMatrix:
    """
    Squeeze matrix of the coupled ground state.

    Attributes:
        xi (np.ndarray): Symmetric matrix M^-1 N
        symmetry_residual (float): max |xi - xi^T|
        schur_residual (float): max |(M^T)^-1 - (M - N M^-1 N)|
        spectral_radius (float): Largest |eigenvalue| of xi
        det_residual (float): Relative error of det(1 - xi^2) against (det M)^-2
    """

    xi: np.ndarray
    symmetry_residual: float
    schur_residual: float
    spectral_radius: float
    det_residual: float


@dataclass(frozen=True)
class SymplecticReport:
    """
    Max-norm residuals of the symplectic identities of one coefficient set.

    Attributes:
        tjt: T J T^T - J
        mm_nn: M M^T - N N^T - I
        uu_vv: U U^T - V V^T - I
        sym_nm: N M^T - (N M^T)^T
        sym_uv: U V^T - (U V^T)^T
        det_t: det T - 1
        row_norm: per-row sum (M^2 - N^2) - 1
    """

    tjt: float
    mm_nn: float
    uu_vv: float
    sym_nm: float
    sym_uv: float
    det_t: float
    row_norm: float

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)

    @property
    def max_residual(self) -> float:
        return max(self.as_dict().values())

    def failures(self, tolerance: float = TOL_IDENTITY) -> List[str]:
        """Names of the identities whose residual exceeds tolerance."""
        return [name for name, value in self.as_dict().items() if not value <= tolerance]
