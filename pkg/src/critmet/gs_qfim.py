"""Closed-form ground-state QFIM of the single-cavity model and the dimer.

Each normal mode contributes three rank-one terms built from the partial
derivatives of its squeezing parameters and of the mode-mixing generator.
All derivatives are analytic; finite differences live only in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, DomainError, ExtrapolationError
from .models import (
    G, OMEGA_A, OMEGA_C, XI, Model, ModelParams, as_model, check_off_resonance,
    critical_coupling, mode_frequency_jacobian, mode_spectrum,
)

__all__ = [
    "QFIMatrix", "ChiDerivatives", "AsymptoticPair", "chi_derivatives", "gs_qfim",
    "gs_qfim_dm", "gs_qfim_dd", "leading_order_qfim", "asymptotic_pair",
    "asymptotic_prefactor", "delta_chi", "prefactor_T12", "richardson_limit",
]


@dataclass(frozen=True)
class QFIMatrix:
    """Symmetric Fisher-information matrix labelled by parameter indices."""

    subset: tuple[int, ...]
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=float)
        if m.shape != (len(self.subset), len(self.subset)):
            raise DomainError("entries shape does not match subset")
        if len(set(self.subset)) != len(self.subset):
            raise DomainError("subset contains duplicates")
        m = 0.5 * (m + m.T)
        m.setflags(write=False)
        object.__setattr__(self, "subset", tuple(int(i) for i in self.subset))
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return len(self.subset)

    def entry(self, mu: int, nu: int) -> float:
        return float(self.entries[self.subset.index(mu), self.subset.index(nu)])


def _subset(subset, allowed) -> tuple[int, ...]:
    sub = tuple(int(i) for i in subset)
    bad = [i for i in sub if i not in allowed]
    if bad or not sub:
        raise DomainError(f"subset {sub} must be a non-empty selection of {tuple(allowed)}")
    if len(set(sub)) != len(sub):
        raise DomainError(f"subset {sub} has duplicates")
    return sub


# ---------------------------------------------------------------------------
# per-mode kernel: everything as gradients w.r.t. (wbar, g, omega_a)

@dataclass
class _ModeData:
    theta: float
    r_a: float
    r_b: float
    w_plus: float
    w_minus: float
    c_plus: float
    c_minus: float
    grad: dict  # name -> length-3 gradient in (wbar, g, omega_a)


def _mixing_gradients(w, g, a):
    x = w * w - a * a
    y = -4.0 * g * math.sqrt(w * a)
    theta = 0.5 * math.atan2(y, x)
    dx = np.array([2 * w, 0.0, -2 * a])
    dy = np.array([-2 * g * math.sqrt(a / w), -4 * math.sqrt(w * a), -2 * g * math.sqrt(w / a)])
    R2 = x * x + y * y
    dtheta = (x * dy - y * dx) / (2 * R2)
    u, v = math.sqrt(a / w), math.sqrt(w / a)
    du = np.array([-u / (2 * w), 0.0, u / (2 * a)])
    dv = np.array([v / (2 * w), 0.0, -v / (2 * a)])
    s_p, s_m, ds_p, ds_m = u + v, u - v, du + dv, du - dv
    return theta, dtheta, s_p, s_m, ds_p, ds_m, x, y, dx, dy


def _mode_data(w: float, g: float, a: float) -> _ModeData:
    theta, dtheta, s_p, s_m, ds_p, ds_m, x, y, dx, dy = _mixing_gradients(w, g, a)
    R = math.hypot(x, y)
    dR = (x * dx + y * dy) / R
    total = w * w + a * a
    dtotal = np.array([2 * w, 0.0, 2 * a])
    wp2 = 0.5 * (total + R)
    dwp2 = 0.5 * (dtotal + dR)
    gcm = math.sqrt(w * a)
    prod = w * a * (gcm - 2 * g) * (gcm + 2 * g)  # = w^2 a^2 - 4 g^2 w a
    dprod = np.array([2 * w * a * a - 4 * g * g * a, -8 * g * w * a, 2 * w * w * a - 4 * g * g * w])
    wm2 = prod / wp2
    dwm2 = (dprod - wm2 * dwp2) / wp2
    wp, wm = math.sqrt(wp2), math.sqrt(wm2)
    dwp, dwm = dwp2 / (2 * wp), dwm2 / (2 * wm)
    dr_a = 0.5 * (dwp / wp - np.array([1 / w, 0.0, 0.0]))
    dr_b = 0.5 * (dwm / wm - np.array([0.0, 0.0, 1 / a]))

    c_p, c_m = theta * s_p, theta * s_m
    dc_p = dtheta * s_p + theta * ds_p
    dc_m = dtheta * s_m + theta * ds_m
    # delta = c_+ dc_- - dc_+ c_- = theta^2 * wr; the theta-derivative terms cancel
    wr = s_p * ds_m - s_m * ds_p
    t2 = 2 * theta
    chi_ab = -wr * (1 - math.cos(t2)) / 8
    f = (t2 - math.sin(t2)) / 8
    chi_p = dc_p - wr * s_m * f
    chi_m = dc_m - wr * s_p * f
    return _ModeData(
        theta=theta, r_a=0.5 * math.log(wp / w), r_b=0.5 * math.log(wm / a),
        w_plus=wp, w_minus=wm, c_plus=c_p, c_minus=c_m,
        grad=dict(dr_a=dr_a, dr_b=dr_b, dc_p=dc_p, dc_m=dc_m, delta=theta**2 * wr,
                  chi_ab=chi_ab, chi_p=chi_p, chi_m=chi_m, dw_minus=dwm, dw_plus=dwp),
    )


def _chain(model, mode_index, subset) -> np.ndarray:
    """3 x len(subset) Jacobian of (wbar, g, omega_a) w.r.t. the parameters."""
    J = np.zeros((3, len(subset)))
    for j, mu in enumerate(subset):
        J[0, j] = mode_frequency_jacobian(model, mode_index, mu)
        J[1, j] = 1.0 if mu == G else 0.0
        J[2, j] = 1.0 if mu == OMEGA_A else 0.0
    return J


def _prepare_mode(params: ModelParams, model, mode_index: int) -> _ModeData:
    spec = mode_spectrum(params, model, mode_index)  # phase and resonance checks
    return _mode_data(spec.omega_c_bar, params.g, params.omega_a)


@dataclass(frozen=True)
class ChiDerivatives:
    """Mixing coefficients and their parameter responses for one mode and one parameter."""

    c_plus: float
    c_minus: float
    delta_mu: float
    chi_ab: float
    chi_plus: float
    chi_minus: float
    dr_A: float
    dr_B: float


def chi_derivatives(params: ModelParams, model="dm", mode_index: int = 1,
                    param_index: int = G) -> ChiDerivatives:
    """Analytic parameter responses of one normal mode.

    Parameters
    ----------
    params : ModelParams
    model : {'dm', 'dd'}
    mode_index : int
        Normal mode, 1 or 2 for the dimer.
    param_index : int
        Parameter to differentiate by (1..3, or 1..4 for the dimer).
    """
    allowed = (OMEGA_C, G, OMEGA_A) + ((XI,) if as_model(model) is Model.DD else ())
    (mu,) = _subset((param_index,), allowed)
    d = _prepare_mode(params, model, mode_index)
    jac = _chain(model, mode_index, (mu,))[:, 0]
    gr = {k: float(v @ jac) for k, v in d.grad.items()}
    return ChiDerivatives(
        c_plus=d.c_plus, c_minus=d.c_minus, delta_mu=gr["delta"], chi_ab=gr["chi_ab"],
        chi_plus=gr["chi_p"], chi_minus=gr["chi_m"], dr_A=gr["dr_a"], dr_B=gr["dr_b"],
    )


def _mode_qfim(params, model, mode_index, subset) -> np.ndarray:
    d = _prepare_mode(params, model, mode_index)
    J = _chain(model, mode_index, subset)
    gr = d.grad
    eta = d.r_b - d.r_a
    v1 = (gr["dr_a"] + gr["chi_ab"]) @ J
    v2 = (gr["dr_b"] - gr["chi_ab"]) @ J
    v3 = (math.cosh(eta) * gr["chi_m"] + math.sinh(eta) * gr["chi_p"]) @ J
    return 2 * np.outer(v1, v1) + 2 * np.outer(v2, v2) + np.outer(v3, v3)


def gs_qfim_dm(params: ModelParams, subset=(OMEGA_C, G, OMEGA_A)) -> QFIMatrix:
    """Ground-state QFIM of the single-cavity model for a subset of ``{1, 2, 3}``."""
    sub = _subset(subset, (OMEGA_C, G, OMEGA_A))
    return QFIMatrix(sub, _mode_qfim(params, Model.DM, 1, sub))


def gs_qfim_dd(params: ModelParams, subset=(OMEGA_C, G, OMEGA_A, XI)) -> QFIMatrix:
    """Ground-state QFIM of the dimer, the sum of both normal-mode contributions."""
    sub = _subset(subset, (OMEGA_C, G, OMEGA_A, XI))
    Q = _mode_qfim(params, Model.DD, 1, sub) + _mode_qfim(params, Model.DD, 2, sub)
    return QFIMatrix(sub, Q)


def gs_qfim(params: ModelParams, model="dm", subset=None) -> QFIMatrix:
    """Dispatch to :func:`gs_qfim_dm` or :func:`gs_qfim_dd`."""
    if as_model(model) is Model.DM:
        return gs_qfim_dm(params, subset or (OMEGA_C, G, OMEGA_A))
    return gs_qfim_dd(params, subset or (OMEGA_C, G, OMEGA_A, XI))


def leading_order_qfim(params: ModelParams, model="dm", subset=None) -> QFIMatrix:
    """Leading singular part, ``sum_n d omega_-n d omega_-n / (2 omega_-n^2)``."""
    m = as_model(model)
    allowed = (OMEGA_C, G, OMEGA_A) + ((XI,) if m is Model.DD else ())
    sub = _subset(subset or allowed, allowed)
    Q = np.zeros((len(sub), len(sub)))
    for n in range(1, m.n_cavity_modes + 1):
        d = _prepare_mode(params, m, n)
        grad = d.grad["dw_minus"] @ _chain(m, n, sub)
        Q += np.outer(grad, grad) / (2 * d.w_minus**2)
    return QFIMatrix(sub, Q)


# ---------------------------------------------------------------------------
# asymptotics of the single-cavity model

def richardson_limit(values, steps, powers, rtol: float = 1e-6):
    """Extrapolate ``values[i] = L + sum_j c_j steps[i]**powers[j]`` to ``steps -> 0``.

    Parameters
    ----------
    values : array_like, shape (n, ...)
        Samples on a grid of decreasing step sizes with constant ratio.
    steps : array_like, shape (n,)
    powers : sequence of float
        Correction exponents, eliminated in order.
    rtol : float
        Required relative agreement of the last two extrapolants.

    Returns
    -------
    limit : ndarray
    error : float
        Relative difference between the last two extrapolants.
    """
    T = [np.asarray(v, dtype=float) for v in values]
    h = np.asarray(steps, dtype=float)
    ratio = h[1] / h[0]
    if not np.allclose(h[1:] / h[:-1], ratio, rtol=1e-12):
        raise DomainError("steps must form a geometric sequence")
    diag = [T[-1]]
    for p in powers[: len(T) - 1]:
        fac = ratio ** (-p)
        T = [(fac * T[i + 1] - T[i]) / (fac - 1) for i in range(len(T) - 1)]
        diag.append(T[-1])
    cur, prev = diag[-1], diag[-2]
    scale = max(np.max(np.abs(cur)), np.finfo(float).tiny)
    err = float(np.max(np.abs(cur - prev)) / scale)
    if err > rtol:
        raise ExtrapolationError(f"limit extrapolation did not converge (rel. change {err:.2e})")
    return cur, err


def asymptotic_prefactor(omega_c: float, omega_a: float) -> float:
    """Scalar prefactor of the next-to-leading correction matrix."""
    return omega_a**2 * (omega_a**2 + omega_c**2) / (8 * (omega_a * omega_c) ** 1.75)


def delta_chi(params: ModelParams, subset=(OMEGA_C, G, OMEGA_A)) -> np.ndarray:
    """Difference ``chi_- - chi_+`` of the rotation responses at the critical point."""
    sub = _subset(subset, (OMEGA_C, G, OMEGA_A))
    w, a = params.omega_c, params.omega_a
    check_off_resonance(w, a)
    gc = critical_coupling(params, "dm")
    theta, dtheta, s_p, s_m, ds_p, ds_m, *_ = _mixing_gradients(w, gc, a)
    dc = theta * (s_m - s_p)
    d_dc = dtheta * (s_m - s_p) + theta * (ds_m - ds_p)
    wr = s_p * ds_m - s_m * ds_p
    t2 = 2 * theta
    out = d_dc + wr * dc * (t2 - math.sin(t2)) / (8 * theta)
    return out @ _chain(Model.DM, 1, sub)


@dataclass(frozen=True)
class AsymptoticPair:
    """Leading and next-to-leading coefficient matrices near the critical point.

    ``Q ~ A / eps**2 + B / sqrt(eps)`` on the kernel of ``A`` with ``eps = g_c - g``.
    """

    A_matrix: np.ndarray
    B_matrix: np.ndarray
    prefactor_B: float
    delta_chi: np.ndarray
    subset: tuple[int, ...]
    extrapolation_error: float


def asymptotic_pair(params: ModelParams, subset=(OMEGA_C, G), *, eps_start: float = 1e-3,
                    n_points: int = 8, rtol: float = 1e-6) -> AsymptoticPair:
    """Leading matrix by extrapolating ``eps^2 Q`` and the analytic correction matrix.

    ``eps`` runs over ``eps_start * g_c * 2**-j``. Corrections to ``eps^2 Q``
    come in powers ``1, 3/2, 2, ...`` of ``eps``, which is what the
    extrapolation removes.
    """
    sub = _subset(subset, (OMEGA_C, G, OMEGA_A))
    gc = critical_coupling(params, "dm")
    eps = eps_start * gc * 0.5 ** np.arange(n_points)
    vals = [gs_qfim_dm(params.replace(g=gc - e), sub).entries * e**2 for e in eps]
    A, err = richardson_limit(vals, eps, [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0], rtol=rtol)
    dchi = delta_chi(params, sub)
    pref = asymptotic_prefactor(params.omega_c, params.omega_a)
    return AsymptoticPair(A_matrix=0.5 * (A + A.T), B_matrix=pref * np.outer(dchi, dchi),
                          prefactor_B=pref, delta_chi=dchi, subset=sub, extrapolation_error=err)


def prefactor_T12(params: ModelParams) -> float:
    """Coefficient of ``sqrt(g_c - g)`` in ``Tr[Q^-1]`` for the pair (omega_c, g).

    Raises
    ------
    ResonanceError
        At ``omega_c == omega_a``, where the mixing angle jumps.
    DivergenceError
        When the denominator vanishes.
    """
    w, a = params.omega_c, params.omega_a
    dchi_w, dchi_g = delta_chi(params, (OMEGA_C, G))
    denom = asymptotic_prefactor(w, a) * (math.sqrt(a) * abs(dchi_g) - 4 * math.sqrt(w) * abs(dchi_w)) ** 2
    if denom <= 1e-14 * (a + 16 * w):
        raise DivergenceError("prefactor denominator vanishes")
    return (a + 16 * w) / denom
