"""Time integration of the covariance equation ``d sigma/dt = A sigma + sigma A^T + D``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, StiffnessError
from .models import ModelParams
from .ss_qfim import check_hurwitz, drift_diffusion, lyapunov_operator, unvech, vech

CONVERGENCE_TOL = 1e-10


@dataclass(frozen=True)
class MomentTrajectory:
    times: np.ndarray
    covariances: np.ndarray  # shape (n_times, 2n, 2n)
    residuals: np.ndarray
    converged_at: float | None


def integrate_moments(params: ModelParams, model="dm", sigma0=None, t_final: float = 100.0,
                      dt_control: float | None = None, *, n_samples: int = 201,
                      rtol: float = 1e-10, atol: float = 1e-12,
                      tol: float = CONVERGENCE_TOL) -> MomentTrajectory:
    """Integrate the covariance from ``sigma0`` (identity by default) with RK45.

    The state vector holds only the independent entries of the symmetric
    covariance, so symmetry is exact at every step.

    Parameters
    ----------
    dt_control : float, optional
        Maximum internal step.
    n_samples : int
        Number of equally spaced output times in ``[0, t_final]``.
    tol : float
        Residual level defining ``converged_at``.
    """
    dd = drift_diffusion(params, model)
    A, D = dd.drift, dd.diffusion
    n = A.shape[0]
    s0 = np.eye(n) if sigma0 is None else np.asarray(sigma0, float)
    if s0.shape != (n, n):
        raise DomainError(f"sigma0 must be {n}x{n}")
    if t_final <= 0:
        raise DomainError("t_final must be positive")
    L = lyapunov_operator(A)
    d = vech(D)

    def rhs(_t, y):
        return L @ y + d

    times = np.linspace(0.0, t_final, n_samples)
    sol = solve_ivp(rhs, (0.0, t_final), vech(0.5 * (s0 + s0.T)), method="RK45",
                    t_eval=times, rtol=rtol, atol=atol,
                    max_step=np.inf if dt_control is None else dt_control)
    if sol.status != 0:
        raise StiffnessError(f"integration failed: {sol.message}")
    covs = np.array([unvech(y, n) for y in sol.y.T])
    res = np.array([np.abs(A @ s + s @ A.T + D).max() for s in covs])
    hit = np.nonzero(res < tol)[0]
    return MomentTrajectory(times=sol.t, covariances=covs, residuals=res,
                            converged_at=float(sol.t[hit[0]]) if hit.size else None)


def empirical_relaxation_time(params: ModelParams, model="dm") -> float:
    """``1 / min |Re lambda(A)|`` from the numerical drift spectrum."""
    A = drift_diffusion(params, model).drift
    return -1.0 / check_hurwitz(A)
