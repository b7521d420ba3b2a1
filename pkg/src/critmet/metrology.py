"""Scalar precision bounds, sloppiness diagnostics and power-law fits."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import DegenerateExpansionError, DomainError, SloppinessError
from .gs_qfim import QFIMatrix

SLOPPY_THRESHOLD = 1e-8
RANK_RTOL = 1e-10


@dataclass(frozen=True)
class SloppinessReport:
    determinant: float
    normalized_determinant: float
    numerical_rank: int
    is_sloppy: bool
    dimension: int


@dataclass(frozen=True)
class ScalarBound:
    value: float
    weight: np.ndarray
    subset: tuple[int, ...]
    condition: float


def _entries(Q) -> np.ndarray:
    return np.asarray(Q.entries if isinstance(Q, QFIMatrix) else Q, dtype=float)


def numerical_rank(M: np.ndarray, rtol: float = RANK_RTOL) -> int:
    s = np.linalg.svd(np.asarray(M, float), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def sloppiness(Q, threshold: float = SLOPPY_THRESHOLD, rtol: float = RANK_RTOL) -> SloppinessReport:
    """Determinant diagnostics of a QFIM.

    The normalised determinant ``det Q / prod Q_ii`` is the determinant of
    the correlation matrix, so it lies in ``[0, 1]`` for PSD input and is
    insensitive to parameter units.
    """
    M = _entries(Q)
    d = M.shape[0]
    det = float(np.linalg.det(M)) if d else 1.0
    diag = np.diag(M)
    if np.any(diag <= 0):
        norm_det = 0.0
    else:
        s = 1.0 / np.sqrt(diag)
        norm_det = float(np.linalg.det(M * np.outer(s, s))) if d else 1.0
    norm_det = max(norm_det, 0.0)
    return SloppinessReport(
        determinant=det,
        normalized_determinant=norm_det,
        numerical_rank=numerical_rank(M, rtol),
        is_sloppy=bool(norm_det < threshold),
        dimension=d,
    )


def scalar_bound(Q, W=None, *, threshold: float = SLOPPY_THRESHOLD, check: bool = True) -> ScalarBound:
    """Weighted total-variance bound ``Tr[W Q^-1]``.

    Parameters
    ----------
    Q : QFIMatrix or array_like
    W : array_like, optional
        Positive weight matrix; identity by default.
    threshold : float
        Normalised-determinant level below which ``Q`` counts as sloppy.
        Pass 0 to invert any full-rank matrix regardless.
    check : bool
        Set to False to skip the sloppiness and rank tests and invert
        whatever is given (ill-conditioned but invertible matrices in fits).

    Raises
    ------
    SloppinessError
        If ``Q`` is sloppy; the error carries the :class:`SloppinessReport`.
    """
    M = _entries(Q)
    d = M.shape[0]
    Wm = np.eye(d) if W is None else np.asarray(W, float)
    if Wm.shape != (d, d):
        raise DomainError("weight matrix shape does not match Q")
    report = sloppiness(M, threshold=threshold)
    if check and (report.is_sloppy or report.numerical_rank < d):
        raise SloppinessError(
            f"QFIM is sloppy (normalised determinant {report.normalized_determinant:.3e})", report
        )
    # invert in correlation form for better conditioning
    s = 1.0 / np.sqrt(np.diag(M))
    inv = np.outer(s, s) * np.linalg.inv(M * np.outer(s, s))
    subset = Q.subset if isinstance(Q, QFIMatrix) else tuple(range(1, d + 1))
    return ScalarBound(value=float(np.trace(Wm @ inv)), weight=Wm, subset=subset,
                       condition=float(np.linalg.cond(M)))


def subset_qfim(Q_full: QFIMatrix, subset) -> QFIMatrix:
    """Principal submatrix for the given parameter indices, in the given order."""
    try:
        pos = [Q_full.subset.index(int(i)) for i in subset]
    except ValueError:
        raise DomainError(f"subset {tuple(subset)} not contained in {Q_full.subset}") from None
    return QFIMatrix(tuple(int(i) for i in subset), Q_full.entries[np.ix_(pos, pos)])


# ---------------------------------------------------------------------------
# small-parameter expansion Q = eps^-k (A + eps^m B)

def pinv(M: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    return sla.pinv(np.asarray(M, float), rtol=rtol)


def kernel_projector(A: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthogonal projector ``I - A^+ A`` onto the kernel of ``A``."""
    A = np.asarray(A, float)
    P = np.eye(A.shape[1]) - pinv(A, rtol) @ A
    return 0.5 * (P + P.T)


@dataclass(frozen=True)
class EpsilonExpansion:
    order_k: float
    A_lead: np.ndarray
    B_next: np.ndarray
    projector: np.ndarray
    cs_coefficient: float
    correction_order: float = 1.0

    def bound(self, epsilon: float) -> float:
        return epsilon ** (self.order_k - self.correction_order) * self.cs_coefficient


def epsilon_expansion(A, B, order_k: float, correction_order: float = 1.0) -> EpsilonExpansion:
    """Leading behaviour of ``Tr[Q^-1]`` for ``Q = eps^-k (A + eps^m B)`` with singular ``A``.

    Returns ``Tr[(P B P)^+]`` with ``P`` the projector onto ``ker A``; the
    bound is ``eps^(k - m)`` times that coefficient. ``m = 1`` is the plain
    first-order perturbation.

    Raises
    ------
    DegenerateExpansionError
        If ``P B P`` vanishes.
    """
    A = np.asarray(A, float)
    B = np.asarray(B, float)
    P = kernel_projector(A)
    PBP = P @ B @ P
    scale = max(np.abs(B).max(), np.finfo(float).tiny)
    if np.abs(PBP).max() <= 1e-12 * scale:
        raise DegenerateExpansionError("correction matrix vanishes on the kernel of the leading term")
    coef = float(np.trace(pinv(0.5 * (PBP + PBP.T))))
    return EpsilonExpansion(order_k=order_k, A_lead=A, B_next=B, projector=P,
                            cs_coefficient=coef, correction_order=correction_order)


def epsilon_expansion_bound(A, B, k: float, epsilon: float, correction_order: float = 1.0) -> float:
    """``eps^(k - m) Tr[(P B P)^+]``; see :func:`epsilon_expansion`."""
    return epsilon_expansion(A, B, k, correction_order).bound(epsilon)


def first_order_determinant(A, B) -> float:
    """Coefficient of ``eps`` in ``det(A + eps B)``: sum of row replacements of ``A`` by ``B``."""
    A = np.asarray(A, float)
    B = np.asarray(B, float)
    total = 0.0
    for i in range(A.shape[0]):
        M = A.copy()
        M[i, :] = B[i, :]
        total += np.linalg.det(M)
    return float(total)


def sloppiness_asymptote(A, B, k: float, epsilon: float) -> float:
    """Leading ``1/det Q`` for ``Q = eps^-k (A + eps B)`` with corank-one ``A``.

    ``det Q = eps^(1 - d k) * c1 + ...`` where ``c1`` is
    :func:`first_order_determinant`, so ``1/det Q ~ eps^(d k - 1) / c1``.
    """
    d = np.asarray(A).shape[0]
    c1 = first_order_determinant(A, B)
    if c1 == 0:
        raise DegenerateExpansionError("first-order determinant coefficient vanishes")
    return epsilon ** (d * k - 1) / c1


# ---------------------------------------------------------------------------
# power-law fits

@dataclass(frozen=True)
class ScalingFit:
    exponent: float
    prefactor: float
    r_squared: float
    window: tuple[float, float]
    n_points: int
    warning: str | None = None
    correction: dict = field(default_factory=dict)


def _validate_points(points):
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DomainError("points must be a sequence of (epsilon, value) pairs")
    if arr.shape[0] < 5:
        raise DomainError("at least five points are required")
    eps, val = arr[:, 0], arr[:, 1]
    if np.any(eps <= 0) or np.any(val <= 0) or not np.all(np.isfinite(arr)):
        raise DomainError("epsilon and value must be positive and finite")
    if not np.all(np.diff(eps) < 0):
        raise DomainError("epsilon must be strictly decreasing")
    return eps, val


def _r_squared(y: np.ndarray, resid: np.ndarray) -> float:
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    # variation at round-off level carries no information about fit quality
    noise = len(y) * (64 * np.finfo(float).eps * max(1.0, float(np.abs(y).max()))) ** 2
    if ss_tot <= noise:
        return 1.0
    return max(0.0, 1.0 - float(np.sum(resid**2)) / ss_tot)


def fit_scaling(points) -> ScalingFit:
    """Least-squares line through ``(log eps, log value)``.

    Returns
    -------
    ScalingFit
        ``value ~ prefactor * eps**exponent``. A ``warning`` is attached when
        ``r_squared < 0.99``.
    """
    eps, val = _validate_points(points)
    x, y = np.log(eps), np.log(val)
    X = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(X, y, rcond=None)
    r2 = _r_squared(y, y - X @ np.array([slope, intercept]))
    warn = None
    if r2 < 0.99:
        warn = f"poor power-law fit (r^2 = {r2:.4f})"
        warnings.warn(warn, RuntimeWarning, stacklevel=2)
    return ScalingFit(exponent=float(slope), prefactor=float(math.exp(intercept)), r_squared=r2,
                      window=(float(eps.min()), float(eps.max())), n_points=len(eps), warning=warn)


def fit_prefactor(points, exponent: float, correction_power: float) -> ScalingFit:
    """Prefactor of a known power law with one subleading correction.

    Fits ``value / eps**exponent = p + q * eps**correction_power`` by least
    squares and reports ``p`` as the prefactor.
    """
    eps, val = _validate_points(points)
    y = val / eps**exponent
    X = np.column_stack([np.ones_like(eps), eps**correction_power])
    (p, q), *_ = np.linalg.lstsq(X, y, rcond=None)
    r2 = _r_squared(y, y - X @ np.array([p, q]))
    return ScalingFit(exponent=float(exponent), prefactor=float(p), r_squared=r2,
                      window=(float(eps.min()), float(eps.max())), n_points=len(eps),
                      correction={"power": correction_power, "coefficient": float(q)})


def geometric_window(g_c: float, start: float = 1e-3, n_points: int = 8, ratio: float = 0.5) -> np.ndarray:
    """Default approach distances ``start * g_c * ratio**j``."""
    return start * g_c * ratio ** np.arange(n_points)
