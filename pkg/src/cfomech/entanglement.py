"""Gaussian entanglement measures on quadrature covariance matrices.

Convention: quadratures carry vacuum variance 1/2, so a physical state has
every symplectic eigenvalue >= 1/2, separability after partial transposition
means nu_min >= 1/2, and the logarithmic negativity is max(0, -ln(2*nu_min)).
"""

from __future__ import annotations

import numpy as np

from .errors import PhysicalityError

#: Uncertainty-principle slack used by the physicality gates.
PHYSICALITY_TOL = 1e-8

#: Log-negativity values below this are numerical dust and report as 0.
NEGATIVITY_CLAMP = 1e-12

#: Partial transposition of the second mechanical mode (momentum flip).
MOMENTUM_FLIP = np.diag([1.0, 1.0, 1.0, -1.0])


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form, one [[0, 1], [-1, 0]] block per mode."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _check_symmetric(V: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    V = np.asarray(V, dtype=float)
    if V.ndim != 2 or V.shape[0] != V.shape[1] or V.shape[0] % 2:
        raise ValueError("covariance matrix must be square with even dimension")
    scale = max(1.0, float(np.abs(V).max()))
    if float(np.abs(V - V.T).max()) > tol * scale:
        raise ValueError("covariance matrix is not symmetric within tolerance")
    return V


def symplectic_eigenvalues(V: np.ndarray) -> np.ndarray:
    """Symplectic spectrum of a symmetric 2n x 2n matrix, ascending.

    The eigenvalues of Omega V come in pairs +-i*nu for symmetric positive
    semidefinite V; the nu are recovered from the absolute imaginary parts,
    matching near-degenerate pairs by sorting.
    """
    V = _check_symmetric(V)
    n = V.shape[0] // 2
    vals = np.linalg.eigvals(symplectic_form(n) @ V)
    return np.sort(np.abs(vals.imag))[::2].copy()


def physicality_check(V: np.ndarray, tol: float = PHYSICALITY_TOL) -> bool:
    """True iff the minimum symplectic eigenvalue is >= 1/2 - tol."""
    return bool(symplectic_eigenvalues(V)[0] >= 0.5 - tol)


def mechanical_submatrix(V6: np.ndarray) -> np.ndarray:
    """Top-left 4x4 block: the reduced state of the two mechanical modes."""
    V6 = _check_symmetric(V6)
    if V6.shape[0] < 4:
        raise ValueError("expected at least a two-mode covariance matrix")
    return V6[:4, :4].copy()


def min_symplectic_eigenvalue_pt(V4: np.ndarray) -> float:
    """Minimum symplectic eigenvalue after partial transposition.

    The input must be a physical two-mode covariance matrix; the momentum of
    the second mode is flipped and the smaller symplectic eigenvalue of the
    transposed matrix is returned.  Values below 1/2 witness entanglement.
    """
    V4 = _check_symmetric(V4)
    if V4.shape != (4, 4):
        raise ValueError("expected a 4x4 two-mode covariance matrix")
    if not physicality_check(V4):
        raise PhysicalityError(
            "covariance matrix violates the uncertainty principle")
    V_pt = MOMENTUM_FLIP @ V4 @ MOMENTUM_FLIP
    return float(symplectic_eigenvalues(V_pt)[0])


def log_negativity_from_nu(nu_min: float) -> float:
    """Map a post-transposition minimum symplectic eigenvalue to E_N."""
    value = -np.log(2.0 * nu_min)
    if value < NEGATIVITY_CLAMP:
        return 0.0
    return float(value)


def log_negativity(V4: np.ndarray) -> float:
    """Logarithmic negativity max(0, -ln(2*nu_min)) of a two-mode state."""
    return log_negativity_from_nu(min_symplectic_eigenvalue_pt(V4))


def initial_covariance(nbar1: float, nbar2: float) -> np.ndarray:
    """Separable start: each resonator thermal, the cavity in vacuum."""
    if nbar1 < 0 or nbar2 < 0:
        raise ValueError("thermal occupancies must be nonnegative")
    return np.diag([nbar1 + 0.5, nbar1 + 0.5, nbar2 + 0.5, nbar2 + 0.5, 0.5, 0.5])


def two_mode_squeezed_covariance(r: float, nbar: float = 0.0) -> np.ndarray:
    """Two-mode squeezed (thermal) state with squeezing parameter r.

    Diagonal blocks (nbar + 1/2)*cosh(2r)*I, off-diagonal
    (nbar + 1/2)*sinh(2r)*diag(1, -1); the vacuum case has E_N = 2r.
    """
    c = (nbar + 0.5) * np.cosh(2.0 * r)
    s = (nbar + 0.5) * np.sinh(2.0 * r)
    return np.array([
        [c, 0.0, s, 0.0],
        [0.0, c, 0.0, -s],
        [s, 0.0, c, 0.0],
        [0.0, -s, 0.0, c],
    ])
