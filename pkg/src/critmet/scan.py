"""Parameter scans towards criticality and the time-normalised classification grid."""

from __future__ import annotations

import csv
import io
import itertools
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, CritmetError, DomainError, NumericError, PhaseError
from .gs_qfim import QFIMatrix, gs_qfim
from .metrology import fit_scaling, geometric_window, scalar_bound, sloppiness
from .models import PARAM_NAMES, Model, ModelParams, as_model, critical_coupling, k_max, triple_point
from .resources import time_normalized_scaling
from .ss_qfim import ss_qfim

# row-level error codes in the ``err`` column
ERR_OK = 0
ERR_SLOPPY = 1
ERR_PHASE = 2
ERR_DOMAIN = 3
ERR_NUMERIC = 4

GRID_KINDS = ("fixed-xi", "trajectory")
DEFAULT_RANGE = (0.9, 1.0 - 1e-5)
DEFAULT_POINTS = 60


@dataclass(frozen=True)
class ScanConfig:
    """Everything needed to reproduce one scan.

    ``g_range`` holds ``g / g_ref`` limits, where ``g_ref`` is the critical
    coupling for ``fixed-xi`` grids and the triple-point coupling for
    ``trajectory`` grids. Points are log-spaced in ``1 - g / g_ref``.
    """

    model: str = "dm"
    state: str = "gs"
    params: ModelParams = field(default_factory=ModelParams)
    subset: tuple[int, ...] = (1, 2)
    grid: str = "fixed-xi"
    g_range: tuple[float, float] = DEFAULT_RANGE
    n_points: int = DEFAULT_POINTS
    slope: float = 1.0
    dump_qfim: bool = False
    output: str | None = None

    def __post_init__(self):
        try:
            m = as_model(self.model)
        except (ValueError, DomainError) as exc:
            raise ConfigError(str(exc)) from None
        object.__setattr__(self, "model", m.value)
        object.__setattr__(self, "subset", tuple(int(i) for i in self.subset))
        if self.state not in ("gs", "ss"):
            raise ConfigError(f"state must be 'gs' or 'ss', got {self.state!r}")
        if self.grid not in GRID_KINDS:
            raise ConfigError(f"grid must be one of {GRID_KINDS}, got {self.grid!r}")
        if self.n_points < 2:
            raise ConfigError("n_points must be at least 2")
        lo, hi = self.g_range
        if not (0 < lo < hi < 1):
            raise ConfigError(f"g range {self.g_range} must satisfy 0 < lo < hi < 1")
        if not self.subset or len(set(self.subset)) != len(self.subset):
            raise ConfigError("subset must be non-empty without repeats")
        if any(i not in allowed_parameters(m, self.state) for i in self.subset):
            raise ConfigError(f"subset {self.subset} not available for {self.state} {m.value}")
        if self.grid == "trajectory":
            if m is not Model.DD:
                raise ConfigError("trajectory grids need the dimer")
            if not 0 < self.slope < k_max(self.params, self.state == "ss"):
                raise ConfigError("trajectory slope must lie in (0, k_max)")
        if self.state == "ss" and self.params.kappa <= 0:
            raise ConfigError("steady-state scans need kappa > 0")

    @property
    def dissipative(self) -> bool:
        return self.state == "ss"


def allowed_parameters(model, state: str) -> tuple[int, ...]:
    """Parameter indices the state depends on."""
    out = [1, 2, 3]
    if as_model(model) is Model.DD:
        out.append(4)
    if state == "ss":
        out.append(5)
    return tuple(out)


def reference_coupling(config: ScanConfig) -> float:
    if config.grid == "trajectory":
        return triple_point(config.params, config.dissipative)[1]
    return critical_coupling(config.params, config.model, config.dissipative)


def grid_distances(config: ScanConfig) -> np.ndarray:
    """Decreasing distances ``eps = g_ref - g``."""
    lo, hi = config.g_range
    frac = np.geomspace(1 - lo, 1 - hi, config.n_points)
    return reference_coupling(config) * frac


def point_params(config: ScanConfig, epsilon: float) -> ModelParams:
    g_ref = reference_coupling(config)
    if config.grid == "trajectory":
        return config.params.replace(g=g_ref - epsilon, xi=config.slope * epsilon)
    return config.params.replace(g=g_ref - epsilon)


def point_qfim(config: ScanConfig, params: ModelParams) -> QFIMatrix:
    if config.state == "gs":
        return gs_qfim(params, config.model, config.subset)
    return ss_qfim(params, config.model, config.subset)


def evaluate_point(config: ScanConfig, epsilon: float) -> dict:
    """One CSV row; failures are recorded in ``err`` instead of raised."""
    g_ref = reference_coupling(config)
    params = point_params(config, epsilon)
    row = {"g": params.g, "xi": params.xi, "g_over_gc": params.g / g_ref, "epsilon": epsilon,
           "C_S": np.nan, "sloppy": 0, "det_norm": np.nan, "rank": -1, "err": ERR_OK}
    k = len(config.subset)
    entries = np.full((k, k), np.nan)
    try:
        Q = point_qfim(config, params)
        entries = Q.entries
        report = sloppiness(Q)
        row.update(det_norm=report.normalized_determinant, rank=report.numerical_rank,
                   sloppy=int(report.is_sloppy))
        # a small determinant alone still leaves an invertible matrix
        if report.numerical_rank < k:
            row["err"] = ERR_SLOPPY
        else:
            row["C_S"] = scalar_bound(Q, check=False).value
    except PhaseError:
        row["err"] = ERR_PHASE
    except DomainError:
        row["err"] = ERR_DOMAIN
    except NumericError:
        row["err"] = ERR_NUMERIC
    if config.dump_qfim:
        for a, b in itertools.combinations_with_replacement(range(k), 2):
            row[f"Q_{config.subset[a]}{config.subset[b]}"] = entries[a, b]
    return row


def worker_count(n_tasks: int) -> int:
    cap = os.environ.get("CRITMET_THREADS")
    limit = os.cpu_count() or 1
    if cap:
        try:
            limit = max(1, int(cap))
        except ValueError:
            raise ConfigError(f"CRITMET_THREADS must be an integer, got {cap!r}") from None
    return max(1, min(limit, n_tasks))


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    return "nan" if np.isnan(v) else format(v, ".17g")


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(rows[0])
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row[h]) for h in header])
    return buf.getvalue()


def run_scan(config: ScanConfig) -> list[dict]:
    """Evaluate the grid in a worker pool and write the CSV to ``config.output`` if set.

    Rows come back in grid order whatever the completion order, so the CSV
    is byte-identical for identical configurations.
    """
    eps = grid_distances(config)
    with ThreadPoolExecutor(max_workers=worker_count(len(eps))) as pool:
        rows = list(pool.map(lambda e: evaluate_point(config, float(e)), eps))
    if config.output:
        with open(config.output, "w", newline="") as fh:
            fh.write(rows_to_csv(rows))
    return rows


# ---------------------------------------------------------------------------
# classification grid

@dataclass(frozen=True)
class Strategy:
    """One column of the classification grid."""

    label: str
    state: str
    model: str
    grid: str

    @property
    def time_cost(self) -> str:
        return "adiabatic" if self.state == "gs" else "relaxation"


STRATEGIES = (
    Strategy("GS DM", "gs", "dm", "fixed-xi"),
    Strategy("GS DD", "gs", "dd", "fixed-xi"),
    Strategy("GS DD (TP)", "gs", "dd", "trajectory"),
    Strategy("SS DM", "ss", "dm", "fixed-xi"),
    Strategy("SS DD", "ss", "dd", "fixed-xi"),
    Strategy("SS DD (TP)", "ss", "dd", "trajectory"),
)

# rows in the order of the published grid
TABLE_ROWS = (
    (1, 2), (1, 3), (1, 4), (1, 5), (3, 2), (3, 4), (3, 5), (2, 4), (2, 5), (4, 5),
    (1, 2, 3), (1, 2, 4), (1, 2, 5), (1, 3, 4), (1, 3, 5), (1, 4, 5), (3, 2, 4), (3, 2, 5),
    (3, 4, 5), (2, 4, 5),
    (1, 2, 3, 4), (1, 2, 3, 5), (1, 2, 4, 5), (1, 3, 4, 5), (2, 3, 4, 5),
    (1, 2, 3, 4, 5),
)

SLOPPY_GRID = np.linspace(0.1, 0.999, 20)


@dataclass(frozen=True)
class CellResult:
    label: str
    alpha: float = np.nan
    r_squared: float = np.nan
    diagnostic: str = ""


@dataclass(frozen=True)
class Table1:
    rows: tuple[tuple[int, ...], ...]
    columns: tuple[str, ...]
    cells: tuple[tuple[CellResult, ...], ...]

    def labels(self) -> list[list[str]]:
        return [[c.label for c in row] for row in self.cells]

    def to_text(self) -> str:
        names = {1: "omega_c", 2: "g", 3: "omega_a", 4: "xi", 5: "kappa"}
        first = [",".join(names[i] for i in r) for r in self.rows]
        width0 = max(len(s) for s in first + ["parameters"])
        widths = [max(len(c), 6) for c in self.columns]
        lines = ["  ".join(["parameters".ljust(width0)] + [c.ljust(w) for c, w in zip(self.columns, widths)])]
        for name, row in zip(first, self.cells):
            lines.append("  ".join([name.ljust(width0)] + [c.label.ljust(w) for c, w in zip(row, widths)]))
        return "\n".join(line.rstrip() for line in lines) + "\n"


def _cell_config(strategy: Strategy, subset, base: ModelParams, slope: float, fixed_xi: float) -> ScanConfig:
    params = base.replace(xi=fixed_xi if (strategy.model == "dd" and strategy.grid == "fixed-xi") else 0.0)
    return ScanConfig(model=strategy.model, state=strategy.state, params=params, subset=tuple(subset),
                      grid=strategy.grid, slope=slope)


def classify_cell(strategy: Strategy, subset, base: ModelParams, *, slope: float = 1.0,
                  fixed_xi: float = 0.4, window_start: float = 1e-3, window_points: int = 8) -> CellResult:
    """Scaling class of ``C_S`` against preparation time for one subset and strategy.

    ``-`` if the state does not depend on every parameter, ``S`` if the
    normalised determinant is below threshold on the whole coarse grid
    ``g / g_ref`` in ``[0.1, 0.999]``, otherwise the snapped time exponent
    from a power-law fit over a geometric window approaching ``g_ref``.
    """
    if any(i not in allowed_parameters(strategy.model, strategy.state) for i in subset):
        return CellResult("-")
    config = _cell_config(strategy, subset, base, slope, fixed_xi)
    g_ref = reference_coupling(config)
    if all(sloppiness(point_qfim(config, point_params(config, g_ref * (1 - x)))).is_sloppy
           for x in SLOPPY_GRID):
        return CellResult("S")
    window = geometric_window(g_ref, window_start, window_points)
    values = [scalar_bound(point_qfim(config, point_params(config, e)), check=False).value for e in window]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        fit = fit_scaling(list(zip(window, values)))
        scaling = time_normalized_scaling(fit, strategy.time_cost)
    if not scaling.snapped:
        return CellResult("?", fit.exponent, fit.r_squared, scaling.warning or "")
    return CellResult(scaling.label, fit.exponent, fit.r_squared, fit.warning or "")


def run_table1(base_params: ModelParams | None = None, gamma: float = 0.1, slope: float = 1.0, *,
               fixed_xi: float = 0.4, output: str | None = None, rows=TABLE_ROWS,
               strategies=STRATEGIES) -> Table1:
    """Classify every subset row under every strategy column.

    ``gamma`` sets the adiabatic sweep constant; it rescales preparation
    times without changing exponents. Failing cells become ``?`` with the
    error message as diagnostic.
    """
    if gamma <= 0:
        raise ConfigError("gamma must be positive")
    base = base_params or ModelParams(omega_c=1.0, omega_a=0.7, kappa=0.1)
    if base.kappa <= 0:
        raise ConfigError("the classification grid needs kappa > 0 for the steady-state columns")

    def one(job):
        subset, strategy = job
        try:
            return classify_cell(strategy, subset, base, slope=slope, fixed_xi=fixed_xi)
        except (CritmetError, ValueError, ArithmeticError) as exc:
            return CellResult("?", diagnostic=f"{type(exc).__name__}: {exc}")

    jobs = [(r, s) for r in rows for s in strategies]
    with ThreadPoolExecutor(max_workers=worker_count(len(jobs))) as pool:
        flat = list(pool.map(one, jobs))
    n = len(strategies)
    cells = tuple(tuple(flat[i * n:(i + 1) * n]) for i in range(len(rows)))
    table = Table1(rows=tuple(tuple(r) for r in rows), columns=tuple(s.label for s in strategies), cells=cells)
    if output:
        with open(output, "w") as fh:
            fh.write(table.to_text())
    return table


__all__ = [
    "ScanConfig", "Strategy", "STRATEGIES", "TABLE_ROWS", "Table1", "CellResult",
    "run_scan", "run_table1", "classify_cell", "evaluate_point", "rows_to_csv", "allowed_parameters",
    "ERR_OK", "ERR_SLOPPY", "ERR_PHASE", "ERR_DOMAIN", "ERR_NUMERIC", "PARAM_NAMES",
]
