"""Time costs of preparing the probe state and the time-normalised scaling classes.

Closed systems are prepared by an adiabatic sweep whose duration grows as
``eps**-1/2``; lossy systems need a relaxation time growing as ``eps**-1``.
Combining these with a fitted ``C_S ~ eps**alpha`` gives
``C_S ~ T**(-alpha/beta)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoDissipationError, NumericError, PhaseError
from .metrology import ScalingFit
from .models import G, XI, Model, ModelParams, as_model, critical_coupling, k_max, triple_point
from .ss_qfim import drift_diffusion

SNAP_VALUES = (0.0, 0.5, 1.0, 2.0)
SNAP_TOL = 0.05


@dataclass(frozen=True)
class TimeCost:
    kind: str  # 'adiabatic' or 'relaxation'
    value: float
    gamma: float | None
    delta: float | None
    model: str


def gap_coefficient(params: ModelParams, model="dm", slope: float | None = None, mode: int = 1) -> float:
    """Coefficient of ``sqrt(eps)`` in twice the lower polariton gap.

    Single cavity: ``4 (omega_a omega_c)^(3/4) / sqrt(omega_a^2 + omega_c^2)``.
    Dimer on a trajectory of slope ``k``: mode ``j`` has
    ``2 sqrt2 sqrt(omega_a omega_c (2 sqrt(omega_a omega_c) + (-1)^j k omega_a) / (omega_a^2 + omega_c^2))``.
    """
    w, a = params.omega_c, params.omega_a
    if as_model(model) is Model.DM:
        return 4 * (a * w) ** 0.75 / math.sqrt(a * a + w * w)
    if slope is None:
        raise DomainError("the dimer gap coefficient needs the trajectory slope")
    inner = a * w * (2 * math.sqrt(a * w) + (-1) ** mode * slope * a) / (a * a + w * w)
    if inner <= 0:
        raise DomainError(f"slope {slope} closes the gap of mode {mode} (k >= k_max)")
    return 2 * math.sqrt(2) * math.sqrt(inner)


def _closed_distance(params: ModelParams, model, slope):
    m = as_model(model)
    if m is Model.DM:
        eps = critical_coupling(params, m) - params.g
    else:
        eps = triple_point(params)[1] - params.g
        if slope is None:
            slope = params.xi / eps if eps > 0 else 0.0
    if eps <= 0:
        raise PhaseError("coupling is not below the critical value")
    return eps, slope


def adiabatic_time(params: ModelParams, model="dm", gamma: float = 0.1,
                   slope: float | None = None) -> TimeCost:
    """Sweep duration ``2 / (gamma Delta sqrt(eps))`` to reach ``params`` adiabatically.

    For the dimer ``eps = g_t - g`` along the trajectory and ``Delta`` is the
    gap coefficient of the softer mode; ``slope`` defaults to ``xi / eps``.
    """
    if gamma <= 0:
        raise DomainError("gamma must be positive")
    eps, slope = _closed_distance(params, model, slope)
    delta = gap_coefficient(params, model, slope, 1)
    return TimeCost("adiabatic", 2.0 / (gamma * delta * math.sqrt(eps)), gamma, delta, as_model(model).value)


def velocity_profile(params: ModelParams, model="dm", gamma: float = 0.1, g: float | None = None,
                     slope: float | None = None) -> float:
    """Sweep speed ``gamma Delta (g_c - g)^(3/2)`` at coupling ``g``."""
    g = params.g if g is None else g
    m = as_model(model)
    g_ref = critical_coupling(params, m) if m is Model.DM else triple_point(params)[1]
    if g > g_ref:
        raise PhaseError("coupling above the critical value")
    if m is Model.DD and slope is None:
        raise DomainError("the dimer velocity profile needs the trajectory slope")
    return gamma * gap_coefficient(params, m, slope, 1) * (g_ref - g) ** 1.5


def adiabaticity_ratio(params: ModelParams, gamma: float = 0.1) -> float:
    """``|f'/f| / |R'|`` for the single cavity under :func:`velocity_profile`.

    ``f`` is the lower-gap log-derivative driving excitations and ``R`` the
    accumulated dynamical phase; the ratio tends to ``gamma`` at criticality.
    """
    w, a, g = params.omega_c, params.omega_a, params.g
    gc = critical_coupling(params)
    if g >= gc:
        raise PhaseError("coupling is not below the critical value")
    # u = omega_-^2 = (S - R)/2 with R = sqrt((w^2-a^2)^2 + 16 g^2 w a)
    c = 16 * w * a
    R = math.sqrt((w * w - a * a) ** 2 + c * g * g)
    u = w * a * (w * a - 4 * g * g) / (0.5 * (w * w + a * a + R))
    du = -0.5 * c * g / R
    d2u = -0.5 * (c / R - (c * g) ** 2 / R**3)
    dlogf = d2u / du - du / u
    dR_phase = 2 * math.sqrt(u) / velocity_profile(params, "dm", gamma, g)
    return abs(dlogf) / dR_phase


def relaxation_gap_slope(params: ModelParams) -> float:
    """``d min|Re lambda| / d eps`` of the single-cavity drift at the lossy critical point."""
    w, a, k = params.omega_c, params.omega_a, params.kappa
    if k <= 0:
        raise NoDissipationError("relaxation requires kappa > 0")
    return 2 * math.sqrt(w * (k * k + w * w) / a) / k


def kernel_perturbation_closed_form(params: ModelParams, slope: float) -> tuple[float, float]:
    """First-order gap slopes ``(|lambda_1|, |lambda_2|)`` of the dimer drift on a trajectory.

    Both soft modes start from the single-cavity slope ``L`` and split
    symmetrically by ``k (omega_c/kappa - kappa/omega_c)``, so that
    ``|lambda_{1,2}| = L (1 -+ k / k_max)``.
    """
    L = relaxation_gap_slope(params)
    w, k = params.omega_c, params.kappa
    split = slope * (w / k - k / w)
    return L - split, L + split


def kernel_matrices(params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Right (``V``) and left (``U``) kernels of the dimer drift at the lossy triple point."""
    w, a, k = params.omega_c, params.omega_a, params.kappa
    if k <= 0:
        raise NoDissipationError("relaxation requires kappa > 0")
    x = -math.sqrt(w / k) / math.sqrt(2)
    y = -k / (math.sqrt(2) * math.sqrt(k * w))
    z = 1 / (math.sqrt(2) * math.sqrt(k * a / (k * k + w * w)))
    V = np.array([[0, 0, 0, 0, x, y, z, 0], [x, y, z, 0, 0, 0, 0, 0]], float).T
    U = np.array([[0, 0, 0, 0, y, x, 0, z], [y, x, 0, z, 0, 0, 0, 0]], float).T
    return U, V


def kernel_perturbation_eigenvalues(params: ModelParams, slope: float) -> tuple[float, float]:
    """Gap slopes from the projected perturbation ``C = U^T B V``.

    ``B = dA/d eps`` along ``g = g_t - eps, xi = slope * eps``. Returns the
    moduli sorted ascending.

    Raises
    ------
    NumericError
        If the kernel vectors do not annihilate the critical drift.
    """
    _, g_t = triple_point(params, dissipative=True)
    at_tp = params.replace(g=g_t, xi=0.0)
    dd = drift_diffusion(at_tp, "dd")
    U, V = kernel_matrices(params)
    scale = np.abs(dd.drift).max() * np.abs(V).max()
    if np.abs(dd.drift @ V).max() > 1e-10 * scale or np.abs(dd.drift.T @ U).max() > 1e-10 * scale:
        raise NumericError("kernel vectors do not annihilate the critical drift matrix")
    B = -dd.param_partials[G][0] + slope * dd.param_partials[XI][0]
    C = np.linalg.solve(U.T @ V, U.T @ B @ V)
    lam = np.sort(np.abs(np.linalg.eigvals(C).real))
    if abs(lam[1] - lam[0]) <= 1e-12 * lam[1]:
        warnings.warn("degenerate gap slopes; ordering is arbitrary", RuntimeWarning, stacklevel=2)
    return float(lam[0]), float(lam[1])


def relaxation_time(params: ModelParams, model="dm", slope: float | None = None) -> TimeCost:
    """Perturbative relaxation time ``1 / (|lambda| eps)`` near the lossy critical point.

    Single cavity: ``eps = g_c - g`` and ``|lambda|`` is
    :func:`relaxation_gap_slope`. Dimer: ``eps = g_t - g`` on the trajectory
    (``slope`` defaults to ``xi / eps``) and ``|lambda|`` is the smaller
    kernel-perturbation slope.
    """
    if params.kappa <= 0:
        raise NoDissipationError("relaxation requires kappa > 0")
    m = as_model(model)
    if m is Model.DM:
        eps = critical_coupling(params, m, dissipative=True) - params.g
        lam = relaxation_gap_slope(params)
    else:
        eps = triple_point(params, dissipative=True)[1] - params.g
        if slope is None:
            slope = params.xi / eps if eps > 0 else 0.0
        if slope >= k_max(params, dissipative=True):
            raise DomainError("slope at or beyond k_max")
        lam = kernel_perturbation_closed_form(params, slope)[0]
    if eps <= 0:
        raise PhaseError("coupling is not below the critical value")
    return TimeCost("relaxation", 1.0 / (lam * eps), None, lam, m.value)


# ---------------------------------------------------------------------------
# time-normalised classification

@dataclass(frozen=True)
class TimeScaling:
    """``C_S ~ T**t_exponent`` obtained from ``C_S ~ eps**alpha`` and ``T ~ eps**-beta``."""

    alpha_raw: float
    alpha: float
    beta: float
    t_exponent: float
    label: str
    snapped: bool
    warning: str | None = None


def snap_exponent(alpha: float, values=SNAP_VALUES, tol: float = SNAP_TOL) -> tuple[float, bool]:
    nearest = min(values, key=lambda v: abs(v - alpha))
    if abs(nearest - alpha) <= tol:
        return float(nearest), True
    return float(alpha), False


def time_exponent_label(t_exponent: float) -> str:
    if t_exponent == 0:
        return "O(1)"
    n = -t_exponent
    txt = f"{n:g}" if float(n).is_integer() else f"{n:.3g}"
    return f"T^-{txt}" if n > 0 else f"T^{-n:g}"


def time_normalized_scaling(cs_fit: ScalingFit, time_cost_kind: str) -> TimeScaling:
    """Convert a fitted ``eps`` exponent to an exponent in the time resource.

    Parameters
    ----------
    cs_fit : ScalingFit
        Fit of ``C_S`` against the distance to the critical point.
    time_cost_kind : {'adiabatic', 'relaxation'}
        ``T ~ eps**-1/2`` or ``T ~ eps**-1``.
    """
    beta = {"adiabatic": 0.5, "relaxation": 1.0}.get(time_cost_kind)
    if beta is None:
        raise DomainError(f"unknown time cost kind {time_cost_kind!r}")
    alpha, snapped = snap_exponent(cs_fit.exponent)
    warn = None
    if not snapped:
        warn = f"exponent {cs_fit.exponent:.4f} is not within {SNAP_TOL} of {SNAP_VALUES}"
        warnings.warn(warn, RuntimeWarning, stacklevel=2)
    t_exp = -alpha / beta
    t_exp = 0.0 if t_exp == 0 else t_exp
    return TimeScaling(alpha_raw=cs_fit.exponent, alpha=alpha, beta=beta, t_exponent=t_exp,
                       label=time_exponent_label(t_exp) if snapped else f"T^{t_exp:.3f}",
                       snapped=snapped, warning=warn)
