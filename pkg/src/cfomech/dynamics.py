"""State-space form of the linearized dynamics and covariance propagation.

The quadrature vector is ordered (dq1, dp1, dq2, dp2, dX, dY): two mechanical
modes then the cavity.  The first moments obey du/dt = A u + n with drift A and
a diagonal diffusion matrix D for the noise vector n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import (
    DivergenceError,
    NumericalError,
    StabilityError,
    UnsupportedRegimeError,
)
from .params import EffectiveModel

#: Relative spectral-abscissa band inside which a system is reported marginal.
STABILITY_TOL = 1e-9

#: Relative residual contract for the steady-state solve.
LYAPUNOV_RTOL = 1e-10

#: Norm cap per elementary propagation substep, ||A||*h <= this.
STEP_NORM_CAP = 0.1


@dataclass(frozen=True)
class StateSpace:
    """Drift and diffusion matrices of one model instance."""

    A: np.ndarray
    D: np.ndarray


def drift_matrix(m: EffectiveModel) -> np.ndarray:
    """6x6 drift matrix in the (dq1, dp1, dq2, dp2, dX, dY) ordering."""
    g1h, g2h = m.gamma1 / 2.0, m.gamma2 / 2.0
    G1, G2 = m.G1, m.G2
    kt, dt = m.kappa_tilde, m.delta_tilde
    return np.array([
        [-g1h, 0.0, 0.0, 0.0, 0.0, -G1],
        [0.0, -g1h, 0.0, 0.0, -G1, 0.0],
        [0.0, 0.0, -g2h, 0.0, 0.0, G2],
        [0.0, 0.0, 0.0, -g2h, -G2, 0.0],
        [0.0, -G1, 0.0, G2, -kt, dt],
        [-G1, 0.0, -G2, 0.0, -dt, -kt],
    ])


def diffusion_matrix(m: EffectiveModel) -> np.ndarray:
    """Diagonal 6x6 diffusion matrix: gamma_j*(nbar_j + 1/2) twice per
    mechanical mode, kappa_tilde twice for the cavity."""
    d1 = m.gamma1 * (m.nbar1 + 0.5)
    d2 = m.gamma2 * (m.nbar2 + 0.5)
    return np.diag([d1, d1, d2, d2, m.kappa_tilde, m.kappa_tilde])


def state_space(m: EffectiveModel) -> StateSpace:
    return StateSpace(A=drift_matrix(m), D=diffusion_matrix(m))


def spectral_abscissa(A: np.ndarray) -> float:
    """Largest real part of the spectrum of A."""
    return float(np.linalg.eigvals(A).real.max())


def stability_eigen(A: np.ndarray, tol: float = STABILITY_TOL) -> bool:
    """Eigenvalue stability test: true iff the spectral abscissa is below
    -tol*||A||.  Systems inside the band count as marginal, not stable."""
    return spectral_abscissa(A) < -tol * float(np.linalg.norm(A))


def stability_analytic(m: EffectiveModel) -> bool:
    """Closed-form stability test for equal mechanical dampings:

        G2^2 > G1^2 - (kappa_tilde*gamma/2) * [1 + 4*delta_tilde^2 /
                                                   (gamma + 2*kappa_tilde)^2]

    Raises UnsupportedRegimeError for gamma1 != gamma2; use stability_eigen
    there.
    """
    if m.gamma1 != m.gamma2:
        raise UnsupportedRegimeError(
            "closed-form stability assumes equal mechanical dampings; "
            "use stability_eigen instead")
    return stability_margin(m) > 0.0


def stability_margin(m: EffectiveModel) -> float:
    """Signed gap of the closed-form stability inequality (positive = stable)."""
    if m.gamma1 != m.gamma2:
        raise UnsupportedRegimeError(
            "closed-form stability assumes equal mechanical dampings")
    gamma = m.gamma1
    kt, dt = m.kappa_tilde, m.delta_tilde
    if kt * gamma == 0.0:
        correction = 0.0
    else:
        correction = 0.5 * kt * gamma * (1.0 + 4.0 * dt * dt / (gamma + 2.0 * kt) ** 2)
    return m.G2 ** 2 - m.G1 ** 2 + correction


def _lyapunov_operator(A: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    eye = np.eye(n)
    return np.kron(eye, A) + np.kron(A, eye)


def _solve_lyapunov_once(op: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    n = rhs.shape[0]
    x = np.linalg.solve(op, -rhs.flatten(order="F"))
    V = x.reshape((n, n), order="F")
    return 0.5 * (V + V.T)


def steady_state_covariance(ss: StateSpace) -> np.ndarray:
    """Stationary covariance V solving A V + V A^T = -D.

    Solved through the dense linearization of the Lyapunov equation (kron form,
    36 unknowns for the full system) with one iterative-refinement pass.  The
    relative residual ||A V + V A^T + D||_F / ||D||_F must come out below the
    contract value, or below the double-precision floor eps*||A||*||V||/||D||
    for strongly amplifying systems; otherwise a NumericalError carrying a
    condition estimate is raised.
    """
    A, D = ss.A, ss.D
    if not stability_eigen(A):
        raise StabilityError(
            "drift matrix is not strictly stable "
            f"(spectral abscissa {spectral_abscissa(A):.6g})")
    op = _lyapunov_operator(A)
    try:
        V = _solve_lyapunov_once(op, D)
        residual = A @ V + V @ A.T + D
        V = V + _solve_lyapunov_once(op, residual)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"Lyapunov linear system is singular (cond ~ {np.linalg.cond(op):.3g})"
        ) from exc
    norm_D = float(np.linalg.norm(D))
    rel = float(np.linalg.norm(A @ V + V @ A.T + D)) / norm_D
    eps = np.finfo(float).eps
    floor = 100.0 * eps * float(np.linalg.norm(A)) * float(np.linalg.norm(V)) / norm_D
    if rel >= max(LYAPUNOV_RTOL, floor):
        raise NumericalError(
            f"Lyapunov residual {rel:.3g} above tolerance "
            f"(cond ~ {np.linalg.cond(op):.3g})")
    return V


def transition_and_noise(A: np.ndarray, D: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact one-step map of the covariance recursion V -> M V M^T + Q.

    M = exp(A dt) and Q = int_0^dt exp(A s) D exp(A^T s) ds are read off a
    single exponential of the augmented block matrix

        [[-A, D], [0, A^T]] * dt

    whose top-right block, left-multiplied by M, is the noise integral.  Q is
    symmetrized; it is positive semidefinite up to rounding.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = A.shape[0]
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = -A
    block[:n, n:] = D
    block[n:, n:] = A.T
    F = expm(block * dt)
    M = F[n:, n:].T
    Q = M @ F[:n, n:]
    return M, 0.5 * (Q + Q.T)


def _interval_map(A: np.ndarray, D: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Map covering a full grid interval, assembled by squaring the elementary
    map so the elementary step obeys the norm cap.  Squaring is the exact
    semigroup composition, so the interval map stays exact up to rounding."""
    norm_A = float(np.linalg.norm(A))
    doublings = 0
    if norm_A * dt > STEP_NORM_CAP:
        doublings = int(math.ceil(math.log2(norm_A * dt / STEP_NORM_CAP)))
    # overflow here means the system diverges over this interval; the caller
    # turns the resulting non-finite entries into a DivergenceError
    with np.errstate(over="ignore", invalid="ignore"):
        M, Q = transition_and_noise(A, D, dt / 2 ** doublings)
        for _ in range(doublings):
            Q = M @ Q @ M.T + Q
            Q = 0.5 * (Q + Q.T)
            M = M @ M
    return M, Q


def propagate(ss: StateSpace, V0: np.ndarray, t_grid) -> list[np.ndarray]:
    """Covariance matrices at the requested times, starting from V0 at t = 0.

    The grid must be strictly increasing and start at or after 0.  Each grid
    point is reached exactly through the interval map; symmetry is re-enforced
    after every application.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise ValueError("t_grid must be a nonempty 1-d sequence")
    if t_grid[0] < 0 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing and start at >= 0")
    V0 = np.asarray(V0, dtype=float)
    if V0.shape != ss.A.shape:
        raise ValueError("V0 shape does not match the drift matrix")

    out: list[np.ndarray] = []
    V = 0.5 * (V0 + V0.T)
    t_prev = 0.0
    cache: dict[float, tuple[np.ndarray, np.ndarray]] = {}
    for step, t in enumerate(t_grid):
        dt = float(t - t_prev)
        if dt > 0.0:
            if dt not in cache:
                cache[dt] = _interval_map(ss.A, ss.D, dt)
            M, Q = cache[dt]
            with np.errstate(over="ignore", invalid="ignore"):
                V = M @ V @ M.T + Q
            V = 0.5 * (V + V.T)
        if not np.all(np.isfinite(V)):
            raise DivergenceError(
                f"non-finite covariance at t = {t:.6g} (grid index {step})",
                step=step)
        out.append(V.copy())
        t_prev = float(t)
    return out
