"""Parameter space, phase boundaries and normal-mode spectra.

Parameters are addressed by integer index throughout the package::

    1 -> omega_c   cavity frequency
    2 -> g         light-matter coupling
    3 -> omega_a   atomic frequency
    4 -> xi        photon hopping (dimer only)
    5 -> kappa     photon loss rate

The dimer decouples into two normal modes with renormalised cavity
frequencies ``omega_c - 2 xi`` (mode 1) and ``omega_c + 2 xi`` (mode 2),
each behaving as an independent single-cavity model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import DomainError, PhaseError, ResonanceError, TrajectoryError

OMEGA_C, G, OMEGA_A, XI, KAPPA = 1, 2, 3, 4, 5
PARAM_NAMES = {OMEGA_C: "omega_c", G: "g", OMEGA_A: "omega_a", XI: "xi", KAPPA: "kappa"}
RESONANCE_RTOL = 1e-9


class Model(str, Enum):
    """Single cavity (``dm``) or coupled-cavity dimer (``dd``)."""

    DM = "dm"
    DD = "dd"

    @property
    def n_cavity_modes(self) -> int:
        return 1 if self is Model.DM else 2


def as_model(model) -> Model:
    """Coerce a string or :class:`Model` to :class:`Model`."""
    try:
        return Model(str(getattr(model, "value", model)).lower())
    except ValueError:
        raise DomainError(f"unknown model {model!r}; expected 'dm' or 'dd'") from None


@dataclass(frozen=True)
class ModelParams:
    """The five physical parameters, all dimensionless.

    ``xi`` is ignored by the single-cavity model and ``kappa = 0`` means a
    closed system.
    """

    omega_c: float = 1.0
    omega_a: float = 0.7
    g: float = 0.0
    xi: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        for name in ("omega_c", "omega_a", "g", "xi", "kappa"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v}")
        if self.omega_c <= 0 or self.omega_a <= 0:
            raise DomainError("frequencies must be positive")
        if self.kappa < 0:
            raise DomainError("kappa must be non-negative")
        if self.g < 0:
            raise DomainError("g must be non-negative")
        if abs(self.xi) >= self.omega_c / 2:
            raise DomainError("|xi| must stay below omega_c/2 so both normal modes are positive")

    def value(self, index: int) -> float:
        """Return the parameter with the given index."""
        return getattr(self, PARAM_NAMES[_check_index(index)])

    def with_value(self, index: int, value: float) -> "ModelParams":
        """Copy with one parameter replaced."""
        return replace(self, **{PARAM_NAMES[_check_index(index)]: float(value)})

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)


def _check_index(index: int) -> int:
    if index not in PARAM_NAMES:
        raise DomainError(f"unknown parameter index {index}; valid indices are 1..5")
    return int(index)


def model_parameters(model, dissipative: bool) -> tuple[int, ...]:
    """Indices the state of ``model`` depends on."""
    base = (OMEGA_C, G, OMEGA_A) + ((XI,) if as_model(model) is Model.DD else ())
    return base + ((KAPPA,) if dissipative else ())


def mode_frequencies(params: ModelParams, model) -> tuple[float, ...]:
    """Renormalised cavity frequency of each normal mode."""
    if as_model(model) is Model.DM:
        return (params.omega_c,)
    return (params.omega_c - 2 * params.xi, params.omega_c + 2 * params.xi)


def mode_frequency_jacobian(model, mode_index: int, index: int) -> float:
    """Derivative of the mode's cavity frequency with respect to parameter ``index``."""
    if index == OMEGA_C:
        return 1.0
    if index == XI and as_model(model) is Model.DD:
        return 2.0 * (-1) ** mode_index
    return 0.0


def _mode_gc(wbar: float, omega_a: float, kappa: float, dissipative: bool) -> float:
    if dissipative:
        return 0.5 * math.sqrt(omega_a * wbar * (1 + kappa**2 / wbar**2))
    return 0.5 * math.sqrt(wbar * omega_a)


def critical_coupling(params: ModelParams, model="dm", dissipative: bool = False) -> float:
    """Critical coupling of the lowest-lying normal mode.

    Parameters
    ----------
    params : ModelParams
    model : {'dm', 'dd'}
    dissipative : bool
        Use the loss-shifted critical coupling.

    Returns
    -------
    float
        ``g_c``; for the dimer the minimum over both normal modes.
    """
    return min(
        _mode_gc(w, params.omega_a, params.kappa, dissipative)
        for w in mode_frequencies(params, model)
    )


def in_normal_phase(params: ModelParams, model="dm", dissipative: bool = False) -> bool:
    """True when ``g`` lies strictly below the critical coupling."""
    return params.g < critical_coupling(params, model, dissipative)


@dataclass(frozen=True)
class ModeSpectrum:
    """Ground-state data of one normal mode."""

    omega_c_bar: float
    theta: float
    r_A: float
    r_B: float
    omega_plus: float
    omega_minus: float


def mixing_angle(wbar: float, g: float, omega_a: float) -> float:
    """Polariton mixing angle.

    Uses the branch of ``tan(2 theta) = -4 g sqrt(wbar omega_a)/(wbar^2 - omega_a^2)``
    that is continuous in ``g`` on both sides of resonance, so that the
    upper polariton is always paired with the photonic squeeze ``r_A``.
    Above resonance this is the principal branch.
    """
    return 0.5 * math.atan2(-4.0 * g * math.sqrt(wbar * omega_a), wbar * wbar - omega_a * omega_a)


def polariton_frequencies(wbar: float, g: float, omega_a: float) -> tuple[float, float]:
    """Upper and lower polariton frequencies ``(omega_plus, omega_minus)``.

    The lower branch is evaluated through the determinant identity to avoid
    cancellation close to the critical point.
    """
    total = wbar * wbar + omega_a * omega_a
    root = math.hypot(wbar * wbar - omega_a * omega_a, 4.0 * g * math.sqrt(wbar * omega_a))
    wp2 = 0.5 * (total + root)
    gc_m = math.sqrt(wbar * omega_a)
    prod = wbar * omega_a * (gc_m - 2 * g) * (gc_m + 2 * g)
    return math.sqrt(wp2), math.sqrt(max(prod, 0.0) / wp2)


def check_off_resonance(wbar: float, omega_a: float) -> None:
    if abs(wbar - omega_a) <= RESONANCE_RTOL * max(wbar, omega_a):
        raise ResonanceError(f"mode frequency {wbar} is resonant with omega_a={omega_a}")


def mode_spectrum(params: ModelParams, model="dm", mode_index: int = 1) -> ModeSpectrum:
    """Mixing angle, squeezing parameters and polariton frequencies of a mode.

    Raises
    ------
    PhaseError
        If ``g`` is at or above the mode's closed-system critical coupling.
    ResonanceError
        If the mode's cavity frequency equals ``omega_a``.
    """
    freqs = mode_frequencies(params, model)
    if mode_index not in range(1, len(freqs) + 1):
        raise DomainError(f"mode_index must be in 1..{len(freqs)}")
    wbar = freqs[mode_index - 1]
    a, g = params.omega_a, params.g
    if g >= _mode_gc(wbar, a, 0.0, False):
        raise PhaseError(f"g={g} is not below the critical coupling of mode {mode_index}")
    check_off_resonance(wbar, a)
    wp, wm = polariton_frequencies(wbar, g, a)
    return ModeSpectrum(
        omega_c_bar=wbar,
        theta=mixing_angle(wbar, g, a),
        r_A=0.5 * math.log(wp / wbar),
        r_B=0.5 * math.log(wm / a),
        omega_plus=wp,
        omega_minus=wm,
    )


def _lower_mode_gc_slope(params: ModelParams, dissipative: bool) -> float:
    """d g_c / d|xi| of the softer dimer mode at xi = 0."""
    w, a, k = params.omega_c, params.omega_a, params.kappa
    if not dissipative:
        return -0.5 * math.sqrt(a / w)
    # g_c = sqrt(a (w + k^2/w))/2 with w -> w -+ 2 xi; the softer mode lowers g_c
    slope = a * (1 - k**2 / w**2) / (2 * math.sqrt(a * (w + k**2 / w)))
    return -abs(slope)


def k_max(params: ModelParams, dissipative: bool = False) -> float:
    """Largest trajectory slope that keeps ``g = g_t - eps, xi = k eps`` in the normal phase."""
    slope = _lower_mode_gc_slope(params, dissipative)
    if slope == 0:
        return math.inf
    return 1.0 / abs(slope)


def triple_point(params: ModelParams, dissipative: bool = False) -> tuple[float, float]:
    """Coordinates ``(xi_t, g_t)`` of the dimer triple point."""
    return 0.0, critical_coupling(params.replace(xi=0.0), "dm", dissipative)


def critical_line_expansion(params: ModelParams, xi: float, dissipative: bool = False) -> float:
    """First-order expansion of the dimer critical coupling around ``xi = 0``."""
    _, g_t = triple_point(params, dissipative)
    return g_t + _lower_mode_gc_slope(params, dissipative) * abs(xi)


@dataclass(frozen=True)
class Trajectory:
    """Straight approach to the triple point, ``g = g_t - eps`` and ``xi = slope * eps``.

    Build one with :meth:`through_triple_point`.
    """

    g_t: float
    xi_t: float
    slope: float
    epsilon: float | None = None
    base: ModelParams = field(default_factory=ModelParams)
    dissipative: bool = False

    @classmethod
    def through_triple_point(
        cls, params: ModelParams, slope: float, dissipative: bool = False, epsilon=None
    ) -> "Trajectory":
        xi_t, g_t = triple_point(params, dissipative)
        return cls(g_t=g_t, xi_t=xi_t, slope=float(slope), epsilon=epsilon,
                   base=params, dissipative=dissipative)


def trajectory_point(traj: Trajectory, epsilon: float | None = None) -> ModelParams:
    """Parameters at distance ``epsilon`` from the triple point along ``traj``.

    Raises
    ------
    TrajectoryError
        If the slope is not below ``k_max``.
    PhaseError
        If the point is past the critical line (possible for slopes close to
        ``k_max`` at finite ``epsilon``).
    """
    eps = traj.epsilon if epsilon is None else epsilon
    if eps is None:
        raise DomainError("epsilon must be given")
    kmax = k_max(traj.base, traj.dissipative)
    if not (0 <= traj.slope < kmax):
        raise TrajectoryError(f"slope {traj.slope} outside [0, k_max={kmax:.6g})")
    if not (0 < eps < traj.g_t):
        raise DomainError(f"epsilon must lie in (0, g_t); got {eps}")
    point = traj.base.replace(g=traj.g_t - eps, xi=traj.xi_t + traj.slope * eps)
    # the critical line is concave, so a straight approach can still cross it at finite eps
    if not in_normal_phase(point, Model.DD, traj.dissipative):
        raise PhaseError(f"epsilon={eps} with slope {traj.slope} leaves the normal phase")
    return point
