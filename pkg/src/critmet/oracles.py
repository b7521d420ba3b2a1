"""Independent cross-checks of the QFIM routes.

Three oracles that share no code path with the closed forms:

* pure ground-state covariances, both from the symplectic construction and
  from the quadratic Hamiltonian directly;
* a QFIM from finite differences of the Gaussian Uhlmann fidelity;
* exact diagonalisation of the two-mode bosonic Hamiltonian in a truncated
  Fock space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import ConfigError, DomainError, OracleError, PhaseError
from .gs_qfim import QFIMatrix
from .models import (
    G, OMEGA_A, OMEGA_C, ModelParams, as_model, critical_coupling, mode_frequencies,
    mode_spectrum,
)
from .ss_qfim import GaussianState, symplectic_form


# ---------------------------------------------------------------------------
# ground-state covariances

def _pair_covariance(spec, omega_a: float) -> np.ndarray:
    w = spec.omega_c_bar
    root = np.sqrt(w * omega_a)
    c_plus = spec.theta * (omega_a + w) / root
    c_minus = spec.theta * (omega_a - w) / root
    M = np.zeros((4, 4))
    M[0, 3] = M[3, 0] = 0.5 * (c_minus + c_plus)
    M[1, 2] = M[2, 1] = 0.5 * (c_minus - c_plus)
    rot = sla.expm(-symplectic_form(2) @ M)
    sq = np.diag(np.exp([-spec.r_A, spec.r_A, -spec.r_B, spec.r_B]))
    S = rot @ sq
    return S @ S.T


def gs_covariance(params: ModelParams, model="dm") -> GaussianState:
    """Ground state built by squeezing the vacuum and applying the mode-mixing rotation.

    For the dimer the quadratures are those of the two normal modes,
    ordered ``(q_A1, p_A1, q_B1, p_B1, q_A2, ...)``.
    """
    m = as_model(model)
    blocks = [_pair_covariance(mode_spectrum(params, m, n), params.omega_a)
              for n in range(1, m.n_cavity_modes + 1)]
    return GaussianState(sla.block_diag(*blocks))


def hamiltonian_matrix(params: ModelParams, model="dm") -> np.ndarray:
    """Quadratic form ``H`` with ``H_op = x^T H x / 4 + const`` in unit-vacuum quadratures."""
    blocks = []
    for w in mode_frequencies(params, model):
        H = np.diag([w, w, params.omega_a, params.omega_a])
        H[0, 2] = H[2, 0] = 2 * params.g
        blocks.append(H)
    return sla.block_diag(*blocks)


def gs_covariance_direct(params: ModelParams, model="dm") -> GaussianState:
    """Ground-state covariance straight from the quadratic Hamiltonian.

    Uses ``sigma = H^-1/2 |i H^1/2 Omega H^1/2| H^-1/2``, built from
    symmetric eigendecompositions only, so it is independent of the
    mixing-angle parametrisation.
    """
    if params.g >= critical_coupling(params, model):
        raise PhaseError("coupling is not below the critical value")
    H = hamiltonian_matrix(params, model)
    om = symplectic_form(H.shape[0] // 2)
    h_val, h_vec = np.linalg.eigh(H)
    if h_val.min() <= 0:
        raise PhaseError("Hamiltonian is not positive definite")
    h_half = (h_vec * np.sqrt(h_val)) @ h_vec.T
    h_inv_half = (h_vec / np.sqrt(h_val)) @ h_vec.T
    J = h_half @ om @ h_half
    j_val, j_vec = np.linalg.eigh(-J @ J)
    abs_J = (j_vec * np.sqrt(np.clip(j_val, 0, None))) @ j_vec.T
    sigma = h_inv_half @ abs_J @ h_inv_half
    return GaussianState(0.5 * (sigma + sigma.T))


# ---------------------------------------------------------------------------
# Gaussian fidelity

def gaussian_fidelity(sigma1: np.ndarray, sigma2: np.ndarray) -> float:
    """Root Uhlmann fidelity ``Tr sqrt(sqrt(rho1) rho2 sqrt(rho1))`` of zero-mean Gaussian states.

    Covariances use the unit-vacuum convention. Implements the general
    mixed-state formula of Banchi, Braunstein and Pirandola (PRL 115, 260501).
    """
    s1 = np.asarray(sigma1, float)
    s2 = np.asarray(sigma2, float)
    n = s1.shape[0] // 2
    om = symplectic_form(n)
    V1, V2 = s1 / 2, s2 / 2
    Vs = V1 + V2
    V_aux = om.T @ np.linalg.solve(Vs, om / 4 + V2 @ om @ V1)
    # V_aux Omega has eigenvalues +-i x_k, and F_tot = prod_k sqrt(2 x_k + sqrt(4 x_k^2 - 1))
    x = np.sort(np.abs(np.linalg.eigvals(V_aux @ om).imag))[::2]
    terms = 2 * x + np.sqrt(np.clip(4 * x * x - 1, 0, None))
    _, logdet = np.linalg.slogdet(Vs)
    return float(np.exp(0.5 * np.sum(np.log(terms)) - 0.25 * logdet))


def pure_gaussian_fidelity(sigma1: np.ndarray, sigma2: np.ndarray) -> float:
    """Root fidelity ``|<psi1|psi2>|`` of zero-mean pure Gaussian states."""
    _, logdet = np.linalg.slogdet((np.asarray(sigma1) + np.asarray(sigma2)) / 2)
    return float(np.exp(-0.25 * logdet))


def fidelity_qfim_oracle(state_fn: Callable[[ModelParams], GaussianState], params: ModelParams,
                         subset, step: float = 1e-4, *, pure: bool = False,
                         target_deficit: float | None = 1e-4) -> QFIMatrix:
    """QFIM from the Bures metric, ``F(p - d, p + d) ~ 1 - d^T Q d / 2``.

    Displacements are symmetric about ``params``; each quadratic form is
    evaluated at ``d``, ``d/2`` and ``d/4`` and Richardson-extrapolated in
    ``d**2``. Off-diagonal entries follow from polarisation.

    Parameters
    ----------
    state_fn : callable
        Maps parameters to a :class:`GaussianState`.
    step : float
        Relative pilot step; the absolute step is ``step * max(|value|, 0.1)``.
    pure : bool
        Use the pure-state fidelity shortcut.
    target_deficit : float or None
        If set, each pilot step is rescaled so that ``1 - F`` is about this
        value. Fidelities of nearly pure mixed states carry errors of order
        the square root of machine precision, so a fixed tiny step loses
        most digits; ``None`` keeps the pilot step.
    """
    sub = tuple(int(i) for i in subset)
    fid = pure_gaussian_fidelity if pure else gaussian_fidelity

    def deficit(d: np.ndarray) -> float:
        lo, hi = params, params
        for i, di in zip(sub, d):
            lo = lo.with_value(i, lo.value(i) - di)
            hi = hi.with_value(i, hi.value(i) + di)
        F = fid(state_fn(lo).covariance, state_fn(hi).covariance)
        if not np.isfinite(F) or F > 1 + 1e-10:
            raise OracleError(f"fidelity {F} out of range")
        return 1.0 - F

    def quad_form(d: np.ndarray) -> float:
        # 2 (1 - F) / |d|^2 = Q + c d^2 + e d^4 along the fixed direction
        e = [2.0 * deficit(d * s) / s**2 for s in (1.0, 0.5, 0.25)]
        r1 = [(4 * e[1] - e[0]) / 3, (4 * e[2] - e[1]) / 3]
        return (16 * r1[1] - r1[0]) / 15

    k = len(sub)
    h = np.array([step * max(abs(params.value(i)), 0.1) for i in sub])
    if target_deficit is not None:
        for n in range(k):
            pilot = deficit(np.eye(k)[n] * h[n])
            if pilot > 0:
                h[n] *= min(np.sqrt(target_deficit / pilot), 1e3)
    diag = np.array([quad_form(np.eye(k)[n] * h[n]) for n in range(k)]) / h**2
    Q = np.diag(diag)
    for i in range(k):
        for j in range(i + 1, k):
            d = np.zeros(k)
            d[i], d[j] = h[i], h[j]
            both = quad_form(d)
            Q[i, j] = Q[j, i] = (both - diag[i] * h[i] ** 2 - diag[j] * h[j] ** 2) / (2 * h[i] * h[j])
    return QFIMatrix(sub, Q)


# ---------------------------------------------------------------------------
# truncated Fock space

@dataclass(frozen=True)
class FockConfig:
    """Truncation settings for the two-mode exact diagonalisation.

    Attributes
    ----------
    cutoff : int
        Highest occupation kept per mode.
    modes : int
        Number of bosonic modes (cavity and collective atom).
    convergence_margin : int
        Cutoff increment used by :func:`fock_cutoff_convergence`.
    tail_tol : float
        Maximum ground-state weight on the highest occupation of either mode.
    max_cutoff : int
        Ceiling for the adaptive cutoff increase.
    step : float
        Relative finite-difference step for state derivatives.
    """

    cutoff: int = 40
    modes: int = 2
    convergence_margin: int = 5
    tail_tol: float = 1e-10
    max_cutoff: int = 60
    step: float = 1e-4

    def __post_init__(self):
        if self.cutoff < 10:
            raise ConfigError("cutoff must be at least 10")
        if self.modes != 2:
            raise ConfigError("only the two-mode single-cavity Hamiltonian is supported")


def _fock_hamiltonian(params: ModelParams, cutoff: int):
    n = np.arange(cutoff + 1)
    a = sp.diags(np.sqrt(n[1:]), 1)
    x = a + a.T
    num = sp.diags(n.astype(float))
    eye = sp.identity(cutoff + 1)
    H = (params.omega_c * sp.kron(num, eye) + params.omega_a * sp.kron(eye, num)
         + params.g * sp.kron(x, x))
    return H.toarray()


def fock_ground_state(params: ModelParams, cutoff: int) -> tuple[np.ndarray, float]:
    """Ground state of the truncated Hamiltonian and its weight on the truncation edge."""
    H = _fock_hamiltonian(params, cutoff)
    _, vec = sla.eigh(H, subset_by_index=[0, 0])
    psi = vec[:, 0].reshape(cutoff + 1, cutoff + 1)
    tail = float(np.sum(psi[-1, :] ** 2) + np.sum(psi[:, -1] ** 2))
    return vec[:, 0], tail


def _adaptive_cutoff(params: ModelParams, config: FockConfig) -> int:
    cutoff = config.cutoff
    while True:
        _, tail = fock_ground_state(params, cutoff)
        if tail < config.tail_tol:
            return cutoff
        cutoff += 10
        if cutoff > config.max_cutoff:
            raise ConfigError(f"Fock truncation not converged below cutoff {config.max_cutoff}")


def fock_ground_state_qfi(params: ModelParams, subset=(OMEGA_C, G), config: FockConfig | None = None) -> QFIMatrix:
    """Pure-state QFIM of the truncated single-cavity ground state.

    ``Q = 4 Re(<d psi|d psi> - <d psi|psi><psi|d psi>)`` with central
    finite-difference derivatives; the sign of each displaced eigenvector is
    fixed by a positive overlap with the undisplaced one.
    """
    config = config or FockConfig()
    sub = tuple(int(i) for i in subset)
    if any(i not in (OMEGA_C, G, OMEGA_A) for i in sub):
        raise DomainError("the Fock oracle covers omega_c, g and omega_a only")
    if params.g >= critical_coupling(params):
        raise PhaseError("coupling is not below the critical value")
    cutoff = _adaptive_cutoff(params, config)
    psi0, _ = fock_ground_state(params, cutoff)
    derivs = []
    for i in sub:
        value = params.value(i)
        h = config.step * max(abs(value), 0.1)

        def state(offset):
            psi, _ = fock_ground_state(params.with_value(i, value + offset), cutoff)
            return psi if psi @ psi0 >= 0 else -psi

        if value - h < 0 and i == G:
            # second-order one-sided difference at the g = 0 boundary
            derivs.append((-3 * psi0 + 4 * state(h) - state(2 * h)) / (2 * h))
        else:
            derivs.append((state(h) - state(-h)) / (2 * h))
    D = np.array(derivs)
    overlap = D @ psi0
    Q = 4 * (D @ D.T - np.outer(overlap, overlap))
    return QFIMatrix(sub, Q)


def fock_cutoff_convergence(params: ModelParams, subset=(OMEGA_C, G), config: FockConfig | None = None) -> float:
    """Largest relative change of the Fock QFIM when the cutoff grows by the margin."""
    config = config or FockConfig()
    q1 = fock_ground_state_qfi(params, subset, config).entries
    bigger = FockConfig(cutoff=config.cutoff + config.convergence_margin, modes=config.modes,
                        convergence_margin=config.convergence_margin, tail_tol=config.tail_tol,
                        max_cutoff=config.max_cutoff + config.convergence_margin, step=config.step)
    q2 = fock_ground_state_qfi(params, subset, bigger).entries
    return float(np.abs(q1 - q2).max() / np.abs(q2).max())


def fock_photon_number(params: ModelParams, config: FockConfig | None = None) -> float:
    """Cavity occupation ``<a^dag a>`` of the truncated ground state."""
    config = config or FockConfig()
    cutoff = _adaptive_cutoff(params, config)
    psi, _ = fock_ground_state(params, cutoff)
    p = psi.reshape(cutoff + 1, cutoff + 1) ** 2
    return float(np.arange(cutoff + 1) @ p.sum(axis=1))


def photon_number(state: GaussianState, mode: int = 0) -> float:
    """``<a^dag a>`` of quadrature pair ``mode`` from a unit-vacuum covariance."""
    s = state.covariance
    return float((s[2 * mode, 2 * mode] + s[2 * mode + 1, 2 * mode + 1]) / 4 - 0.5)
