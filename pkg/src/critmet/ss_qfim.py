"""Dissipative steady states and their QFIM.

Quadratures are ordered ``(q_a, p_a, q_b, p_b)`` per cavity-atom pair and
the vacuum has unit covariance. Under photon loss the moments obey
``d sigma/dt = A sigma + sigma A^T + D``; the steady state and every
parameter derivative of it solve continuous Lyapunov equations, which are
linearised with Kronecker products and solved directly on the space of
symmetric matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as sla

from .errors import DomainError, InstabilityError, PurityError
from .gs_qfim import QFIMatrix, _subset
from .models import (
    G, KAPPA, OMEGA_A, OMEGA_C, XI, Model, ModelParams, as_model, mode_frequencies,
    mode_frequency_jacobian,
)

KERNEL_COND_MAX = 1e12
LYAPUNOV_RTOL = 1e-12


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal ``Omega`` with blocks ``[[0, 1], [-1, 0]]``."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def symplectic_eigenvalues(sigma: np.ndarray) -> np.ndarray:
    """Williamson spectrum, sorted ascending (each value listed once)."""
    n = sigma.shape[0] // 2
    ev = np.abs(np.linalg.eigvals(1j * symplectic_form(n) @ sigma))
    return np.sort(ev)[::2]


@dataclass(frozen=True)
class GaussianState:
    """Zero-mean-capable Gaussian state in the unit-vacuum convention."""

    covariance: np.ndarray
    first_moments: np.ndarray | None = None
    n_modes: int = field(init=False)
    symplectic_form: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        s = np.asarray(self.covariance, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape[0] % 2:
            raise DomainError("covariance must be a square matrix of even size")
        s = 0.5 * (s + s.T)
        n = s.shape[0] // 2
        d = np.zeros(2 * n) if self.first_moments is None else np.asarray(self.first_moments, float)
        object.__setattr__(self, "covariance", s)
        object.__setattr__(self, "first_moments", d)
        object.__setattr__(self, "n_modes", n)
        object.__setattr__(self, "symplectic_form", symplectic_form(n))

    def is_physical(self, tol: float = 1e-10) -> bool:
        """Uncertainty principle ``sigma + i Omega >= 0``."""
        return bool(np.linalg.eigvalsh(self.covariance + 1j * self.symplectic_form).min() >= -tol)

    def symplectic_eigenvalues(self) -> np.ndarray:
        return symplectic_eigenvalues(self.covariance)


@dataclass(frozen=True)
class DriftDiffusion:
    """Drift ``A``, diffusion ``D`` and their analytic parameter derivatives."""

    drift: np.ndarray
    diffusion: np.ndarray
    param_partials: dict  # index -> (dA, dD)


def _pair_blocks(w, g, a, k):
    A = np.array([[-k, w, 0, 0], [-w, -k, -2 * g, 0], [0, 0, 0, a], [-2 * g, 0, -a, 0]], float)
    D = np.diag([2 * k, 2 * k, 0.0, 0.0])
    return A, D


def drift_diffusion(params: ModelParams, model="dm") -> DriftDiffusion:
    """Moment-equation generator of the lossy model.

    The dimer is written in its normal-mode basis, so both matrices are
    direct sums of two single-cavity blocks with renormalised cavity
    frequency.
    """
    m = as_model(model)
    freqs = mode_frequencies(params, m)
    blocks = [_pair_blocks(w, params.g, params.omega_a, params.kappa) for w in freqs]
    A = sla.block_diag(*[b[0] for b in blocks])
    D = sla.block_diag(*[b[1] for b in blocks])
    rot = np.array([[0.0, 1.0], [-1.0, 0.0]])
    partials = {}
    for mu in (OMEGA_C, G, OMEGA_A, KAPPA) + ((XI,) if m is Model.DD else ()):
        dA_blocks, dD_blocks = [], []
        for n in range(1, len(freqs) + 1):
            dA, dD = np.zeros((4, 4)), np.zeros((4, 4))
            if mu in (OMEGA_C, XI):
                dA[:2, :2] = mode_frequency_jacobian(m, n, mu) * rot
            elif mu == G:
                dA[1, 2] = dA[3, 0] = -2.0
            elif mu == OMEGA_A:
                dA[2:, 2:] = rot
            else:
                dA[0, 0] = dA[1, 1] = -1.0
                dD[0, 0] = dD[1, 1] = 2.0
            dA_blocks.append(dA)
            dD_blocks.append(dD)
        partials[mu] = (sla.block_diag(*dA_blocks), sla.block_diag(*dD_blocks))
    return DriftDiffusion(drift=A, diffusion=D, param_partials=partials)


@lru_cache(maxsize=8)
def _sym_basis(n: int):
    """Duplication and elimination matrices for column-stacked vec/vech."""
    idx = [(i, j) for j in range(n) for i in range(j, n)]
    m = len(idx)
    dup = np.zeros((n * n, m))
    elim = np.zeros((m, n * n))
    for k, (i, j) in enumerate(idx):
        dup[i + j * n, k] = 1.0
        dup[j + i * n, k] = 1.0
        elim[k, i + j * n] = 1.0
    return dup, elim, idx


def vech(S: np.ndarray) -> np.ndarray:
    """Lower-triangular entries of a symmetric matrix, column by column."""
    _, elim, _ = _sym_basis(S.shape[0])
    return elim @ S.reshape(-1, order="F")


def unvech(v: np.ndarray, n: int) -> np.ndarray:
    dup, _, _ = _sym_basis(n)
    return (dup @ v).reshape(n, n, order="F")


def lyapunov_operator(A: np.ndarray) -> np.ndarray:
    """Matrix of ``X -> A X + X A^T`` restricted to symmetric ``X`` (vech coordinates)."""
    n = A.shape[0]
    dup, elim, _ = _sym_basis(n)
    eye = np.eye(n)
    return elim @ (np.kron(eye, A) + np.kron(A, eye)) @ dup


def check_hurwitz(A: np.ndarray) -> float:
    """Return the spectral abscissa, raising if ``A`` is not strictly stable."""
    abscissa = float(np.linalg.eigvals(A).real.max())
    if abscissa >= -1e-14 * max(1.0, np.abs(A).max()):
        raise InstabilityError(
            f"drift matrix is not Hurwitz (spectral abscissa {abscissa:.3e}); "
            "no unique steady state exists"
        )
    return abscissa


class LyapunovSolver:
    """Factorised solver for ``A X + X A^T + C = 0`` with a fixed drift ``A``."""

    def __init__(self, A: np.ndarray, *, refine: int = 2):
        check_hurwitz(A)
        self.A = np.asarray(A, float)
        self.n = A.shape[0]
        self._lu = sla.lu_factor(lyapunov_operator(self.A))
        self.refine = refine

    def residual(self, X: np.ndarray, C: np.ndarray) -> np.ndarray:
        return self.A @ X + X @ self.A.T + C

    def solve(self, C: np.ndarray) -> np.ndarray:
        C = 0.5 * (C + C.T)
        X = unvech(sla.lu_solve(self._lu, -vech(C)), self.n)
        for _ in range(self.refine):
            R = self.residual(X, C)
            X = X + unvech(sla.lu_solve(self._lu, -vech(R)), self.n)
        return 0.5 * (X + X.T)


def solve_lyapunov(A: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Solve ``A X + X A^T + C = 0`` for symmetric ``X``."""
    return LyapunovSolver(A).solve(C)


def _residual_scale(A, X, C) -> float:
    return max(np.abs(C).max(), np.abs(A).max() * np.abs(X).max(), np.finfo(float).tiny)


def steady_state(params: ModelParams, model="dm") -> GaussianState:
    """Unique steady state of the lossy model.

    Raises
    ------
    InstabilityError
        If the drift matrix is not Hurwitz (outside the normal phase, or no
        damping reaches the atoms).
    """
    dd = drift_diffusion(params, model)
    sigma = LyapunovSolver(dd.drift).solve(dd.diffusion)
    return GaussianState(sigma)


def steady_state_partials(params: ModelParams, model="dm", subset=None, *,
                          state: GaussianState | None = None) -> list[np.ndarray]:
    """Derivatives of the steady-state covariance, one per index in ``subset``.

    Each solves ``A X + X A^T + (dA sigma + sigma dA^T + dD) = 0``.
    """
    m = as_model(model)
    allowed = (OMEGA_C, G, OMEGA_A) + ((XI,) if m is Model.DD else ()) + (KAPPA,)
    sub = _subset(subset or allowed, allowed)
    dd = drift_diffusion(params, m)
    solver = LyapunovSolver(dd.drift)
    sigma = solver.solve(dd.diffusion) if state is None else state.covariance
    out = []
    for mu in sub:
        dA, dD = dd.param_partials[mu]
        out.append(solver.solve(dA @ sigma + sigma @ dA.T + dD))
    return out


def intrinsic_kernel_condition(sigma: np.ndarray) -> float:
    """Condition number of ``sigma (x) sigma - Omega (x) Omega`` in the Williamson frame.

    With symplectic eigenvalues ``nu_i`` the kernel is congruent to a block
    matrix with eigenvalues ``nu_i nu_j +- 1``. The ratio of the extreme
    values is independent of squeezing and diverges only when two
    symplectic eigenvalues reach one, i.e. for (partially) pure states.
    """
    nu = symplectic_eigenvalues(sigma)
    prods = np.outer(nu, nu)
    low = float((prods - 1.0).min())
    if low <= 0:
        return np.inf
    return float((prods + 1.0).max() / low)


def gaussian_qfim(state: GaussianState, partials, subset=None) -> QFIMatrix:
    """QFIM of a zero-mean mixed Gaussian family from covariance derivatives.

    ``Q_mn = 1/2 vec(d_m sigma)^T (sigma (x) sigma - Omega (x) Omega)^-1 vec(d_n sigma)``.

    Raises
    ------
    PurityError
        If the kernel is numerically singular, which happens for pure
        states; use the closed ground-state formula there.
    """
    partials = [np.asarray(p, float) for p in partials]
    sub = tuple(range(1, len(partials) + 1)) if subset is None else tuple(subset)
    if len(sub) != len(partials):
        raise DomainError("subset and partials differ in length")
    s, om = state.covariance, state.symplectic_form
    if not partials:
        return QFIMatrix(sub, np.zeros((0, 0)))
    kernel = np.kron(s, s) - np.kron(om, om)
    cond = intrinsic_kernel_condition(s)
    if not np.isfinite(cond) or cond > KERNEL_COND_MAX:
        raise PurityError(
            f"QFIM kernel condition number {cond:.2e} exceeds {KERNEL_COND_MAX:.0e}; "
            "the state is numerically pure"
        )
    V = np.column_stack([p.reshape(-1, order="F") for p in partials])
    try:
        X = np.linalg.solve(kernel, V)
    except np.linalg.LinAlgError as exc:
        raise PurityError("QFIM kernel is singular; the state is pure") from exc
    Q = 0.5 * V.T @ X
    return QFIMatrix(sub, Q)


def ss_qfim(params: ModelParams, model="dm", subset=None) -> QFIMatrix:
    """Steady-state QFIM for parameters the lossy model depends on."""
    m = as_model(model)
    allowed = (OMEGA_C, G, OMEGA_A) + ((XI,) if m is Model.DD else ()) + (KAPPA,)
    sub = _subset(subset or allowed, allowed)
    state = steady_state(params, m)
    return gaussian_qfim(state, steady_state_partials(params, m, sub, state=state), sub)


def lyapunov_residual(params: ModelParams, model="dm") -> float:
    """Relative max-norm residual of the steady-state solve."""
    dd = drift_diffusion(params, model)
    sigma = steady_state(params, model).covariance
    R = dd.drift @ sigma + sigma @ dd.drift.T + dd.diffusion
    return float(np.abs(R).max() / np.abs(dd.diffusion).max())
