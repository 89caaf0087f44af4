"""Parameter sweeps, asymptote extraction and the figure datasets."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .dynamics import (
    ADIABATIC_MEASUREMENT,
    DIABATIC_MEASUREMENT,
    ConvergenceWarning,
    Protocol,
    SimConfig,
    Trajectory,
    integrate,
)
from .lz_model import LzParams
from .quantum_core import ADIABATIC, BASES

TAIL_FRACTION = 0.1


def extract_asymptote(traj: Trajectory, basis: str = ADIABATIC, index: int = 2) -> tuple[float, float]:
    """Mean of a population over the last 10% of the window, and half its max-min spread there."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    t0, t1 = traj.t[0], traj.t[-1]
    pop = traj.populations(basis, index)
    tail = pop[traj.t >= t1 - TAIL_FRACTION * (t1 - t0)]
    if tail.size == 0:
        tail = pop[-1:]
    return float(tail.mean()), float(0.5 * (tail.max() - tail.min()))


def population_difference(traj: Trajectory) -> np.ndarray:
    """Diabatic ``rho11 - rho22``, positive for a run started in diabatic state 1."""
    return traj.p1_dia - traj.p2_dia


def fit_decay_rate(traj: Trajectory, t_window: tuple[float, float]) -> float:
    """Exponential decay rate of the diabatic population difference over ``t_window``."""
    lo, hi = t_window
    mask = (traj.t >= lo) & (traj.t <= hi)
    if mask.sum() < 2:
        raise ValueError(f"fewer than two samples in window {t_window}")
    diff = population_difference(traj)[mask]
    if np.any(diff <= 0) and np.any(diff >= 0):
        raise ValueError("population difference changes sign inside the fit window")
    slope = np.polyfit(traj.t[mask], np.log(np.abs(diff)), 1)[0]
    return float(-slope)


def time_to_threshold(traj: Trajectory, threshold: float = 0.1) -> float:
    """First sampled time at which ``|rho11 - rho22|`` (diabatic) drops below ``threshold``."""
    below = np.nonzero(np.abs(population_difference(traj)) < threshold)[0]
    return float(traj.t[below[0]]) if below.size else math.inf


def oscillation_range(traj: Trajectory, window=(-5.0, 5.0), basis: str = ADIABATIC, index: int = 2) -> float:
    mask = (traj.t >= window[0]) & (traj.t <= window[1])
    pop = traj.populations(basis, index)[mask]
    return float(pop.max() - pop.min())


def oscillation_amplitude(traj: Trajectory, window=(-5.0, 5.0), basis: str = ADIABATIC, index: int = 2) -> float:
    """Total variation of a population over ``window`` minus its net change.

    Zero for a monotone curve; unlike max-min it does not count the smooth
    population transfer itself as oscillation.
    """
    mask = (traj.t >= window[0]) & (traj.t <= window[1])
    pop = traj.populations(basis, index)[mask]
    if pop.size < 2:
        return 0.0
    return float(np.sum(np.abs(np.diff(pop))) - abs(pop[-1] - pop[0]))


# ----------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepSpec:
    z_values: tuple[float, ...]
    lambda_values: tuple[float, ...]
    protocol: Protocol = ADIABATIC_MEASUREMENT
    t_start: float | None = None
    t_end: float | None = None
    dt: float | None = None
    report_basis: str = ADIABATIC

    def __post_init__(self) -> None:
        object.__setattr__(self, "z_values", tuple(float(v) for v in self.z_values))
        object.__setattr__(self, "lambda_values", tuple(float(v) for v in self.lambda_values))
        if not self.z_values or not self.lambda_values:
            raise ValueError("sweep grids must be non-empty")
        if any(not z > 0 for z in self.z_values):
            raise ValueError("all z values must be positive")
        if any(not lam >= 0 for lam in self.lambda_values):
            raise ValueError("all lambda values must be non-negative")
        if self.report_basis not in BASES:
            raise ValueError(f"unknown report basis {self.report_basis!r}")
        if self.protocol.kind == "static":
            raise ValueError("sweeps cover the Landau-Zener protocols only")

    @property
    def report_index(self) -> int:
        """Index of the initially populated state in the report basis."""
        return 2 if self.report_basis == ADIABATIC else 1

    def config(self, z: float, lam: float) -> SimConfig:
        # Without measurement the two protocols describe the same evolution;
        # both are computed identically so the lambda=0 edges coincide exactly.
        protocol = ADIABATIC_MEASUREMENT if lam == 0 else self.protocol
        kwargs = {}
        if self.dt is not None:
            kwargs["dt"] = self.dt
        return SimConfig(LzParams(z, lam), protocol, t_start=self.t_start, t_end=self.t_end, **kwargs)


@dataclass(frozen=True)
class SweepCell:
    z: float
    lambda_tilde: float
    survival: float
    spread: float
    converged: bool
    freeze_time: float
    error: str | None = None


@dataclass
class SweepResult:
    spec: SweepSpec
    cells: list[SweepCell] = field(default_factory=list)

    def surface(self) -> np.ndarray:
        """Survival as an array indexed ``[lambda, z]``."""
        zs, ls = sorted(set(self.spec.z_values)), sorted(set(self.spec.lambda_values))
        out = np.full((len(ls), len(zs)), np.nan)
        for c in self.cells:
            out[ls.index(c.lambda_tilde), zs.index(c.z)] = c.survival
        return out

    def cell(self, z: float, lam: float) -> SweepCell:
        for c in self.cells:
            if c.z == z and c.lambda_tilde == lam:
                return c
        raise KeyError((z, lam))


def run_cell(spec: SweepSpec, z: float, lam: float) -> SweepCell:
    freeze = lam / z
    try:
        config = spec.config(z, lam)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            traj = integrate(config)
        value, spread = extract_asymptote(traj, spec.report_basis, spec.report_index)
        return SweepCell(z, lam, value, spread, traj.converged, freeze)
    except Exception as exc:  # a failed cell must not abort the sweep
        return SweepCell(z, lam, math.nan, math.nan, False, freeze, f"{type(exc).__name__}: {exc}")


def _run_cell_args(args):
    return run_cell(*args)


def sweep(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    """Asymptotic survival on the ``z x lambda`` grid; output order is independent of ``jobs``."""
    keys = sorted({(z, lam) for z in spec.z_values for lam in spec.lambda_values})
    work = [(spec, z, lam) for z, lam in keys]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(_run_cell_args, work))
    else:
        cells = [run_cell(*w) for w in work]
    return SweepResult(spec, cells)


def find_nonmonotonicity(z: float, lambda_grid, protocol: Protocol = ADIABATIC_MEASUREMENT,
                         tol: float = 0.005, jobs: int = 1):
    """Locate a dip of the asymptotic survival below its unmeasured value.

    Returns ``(lambda_at_minimum, dip_depth)`` or ``None`` if no grid point
    falls more than ``tol`` below the ``lambda=0`` survival.
    """
    grid = sorted(set(float(v) for v in lambda_grid))
    if len(grid) < 2:
        return None
    if grid[0] != 0.0:
        grid = [0.0] + grid
    result = sweep(SweepSpec((z,), tuple(grid), protocol), jobs=jobs)
    base = result.cell(z, 0.0).survival
    rest = [c for c in result.cells if c.lambda_tilde > 0 and not math.isnan(c.survival)]
    if not rest:
        return None
    low = min(rest, key=lambda c: c.survival)
    dip = base - low.survival
    if dip > tol:
        return low.lambda_tilde, dip
    return None


# ----------------------------------------------------------------------------
# figure datasets

FIG1_LAMBDAS = (0.0, 0.2, 0.5, 1.0, 2.0, 5.0)
FIG2_LAMBDAS = (0.0, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0)
FIG1C_LAMBDAS = (0.0, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0)
FIG1C_Z = (0.05, 0.5, 5.0)
FIG1_VIEW = (-20.0, 20.0)
FIG2_WINDOW = (-100.0, 100.0)
SERIES_HEADER = ("lambda",) + io.TRAJECTORY_HEADER

FIGURES = ("1a", "1b", "1c", "2a", "2b", "2c", "3a", "3b")


def fig3_grid(fast: bool = False) -> tuple[tuple[float, ...], tuple[float, ...]]:
    n = 10 if fast else 20
    zs = tuple(float(v) for v in np.geomspace(0.02, 5.0, n))
    ls = (0.0,) + tuple(float(v) for v in np.geomspace(0.01, 50.0, n))
    return zs, ls


def figure_series(fig: str) -> list[tuple[float, Trajectory]]:
    """Time series behind Figs. 1a/b (adiabatic measurement) and 2a-c (diabatic measurement)."""
    if fig in ("1a", "1b"):
        z = 0.05 if fig == "1a" else 0.5
        configs = [SimConfig(LzParams(z, lam), ADIABATIC_MEASUREMENT, t_start=-200.0, t_end=200.0)
                   for lam in FIG1_LAMBDAS]
    elif fig in ("2a", "2b", "2c"):
        z = {"2a": 0.05, "2b": 0.5, "2c": 5.0}[fig]
        configs = [SimConfig(LzParams(z, lam), DIABATIC_MEASUREMENT, t_start=FIG2_WINDOW[0], t_end=FIG2_WINDOW[1])
                   for lam in FIG2_LAMBDAS]
    else:
        raise ValueError(f"figure {fig!r} is not a time series")
    out = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        for cfg in configs:
            out.append((cfg.params.lambda_tilde, integrate(cfg)))
    return out


def figure_sweep_spec(fig: str, fast: bool = False) -> SweepSpec:
    if fig == "1c":
        return SweepSpec(FIG1C_Z, FIG1C_LAMBDAS, ADIABATIC_MEASUREMENT)
    zs, ls = fig3_grid(fast)
    protocol = ADIABATIC_MEASUREMENT if fig == "3a" else DIABATIC_MEASUREMENT
    return SweepSpec(zs, ls, protocol, t_start=-200.0, t_end=200.0)


def reproduce_figure(fig: str, out_dir, fast: bool = False, jobs: int = 1) -> list[Path]:
    """Write the dataset(s) for one figure panel into ``out_dir``; returns the CSV paths."""
    if fig not in FIGURES:
        raise ValueError(f"unknown figure {fig!r}; choose from {FIGURES}")
    out_dir = Path(out_dir)
    path = out_dir / f"fig{fig}.csv"
    if fig in ("1c", "3a", "3b"):
        spec = figure_sweep_spec(fig, fast)
        io.write_sweep(path, sweep(spec, jobs=jobs))
        return [path]
    view = FIG1_VIEW if fig.startswith("1") else FIG2_WINDOW
    rows = []
    for lam, traj in figure_series(fig):
        block = io.trajectory_rows(traj)
        block = block[(traj.t >= view[0]) & (traj.t <= view[1])]
        rows.extend(np.column_stack([np.full(len(block), lam), block]))
    io.write_csv(path, SERIES_HEADER, rows)
    return [path]
