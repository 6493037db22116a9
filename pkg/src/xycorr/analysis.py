"""Sweeps over the coupling, derivative peaks, the ETCP power-law fit and
finite-versus-infinite fidelity scans."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import finite, measures, thermo
from .errors import DegenerateFit, GridTooCoarse, PeakAtBoundary, PointFailure, XYCorrError

log = logging.getLogger(__name__)

# The infinite-chain formulas use tanh(omega/T) with omega half the
# quasiparticle energy of the explicit Hamiltonian, so a finite-ring Gibbs
# state at temperature 2T corresponds to the infinite chain at T.
FINITE_TEMPERATURE_SCALE = 2.0

_FLIP = np.kron(measures.SX, measures.SX)

MEASURES: dict[str, Callable[[measures.TwoQubitState], float]] = {
    "discord": lambda s: measures.discord(s).discord,
    "eof": measures.entanglement_of_formation,
    "concurrence": measures.concurrence,
    "mutual_info": measures.mutual_information,
}


def worker_count() -> int:
    env = os.environ.get("XYCORR_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def parallel_map(fn, items: Sequence, workers: int | None = None) -> list:
    """``map`` in input order, fanned out over processes when more than one worker is available."""
    workers = worker_count() if workers is None else workers
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def finite_to_thermo_frame(state) -> measures.TwoQubitState:
    """Conjugate a finite-ring pair state by sx x sx.

    The explicit Hamiltonian favours sz = +1 while the infinite-chain
    magnetisation is negative; the global spin flip maps one onto the other
    and leaves every correlation measure unchanged.
    """
    rho = np.asarray(state)
    return measures.as_state(_FLIP @ rho @ _FLIP)


@dataclass(frozen=True)
class SweepSeries:
    grid: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.shape != values.shape or grid.ndim != 1:
            raise ValueError("grid and values must be 1-D arrays of equal length")
        if len(grid) > 1 and np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly ascending")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])


def _thermo_point(args):
    lam, gamma, temperature, rs, names = args
    point = {"lambda": lam, "gamma": gamma, "T": temperature}
    try:
        model = thermo.ModelPoint(lam, gamma, temperature)
        gt = thermo.GTable.build(model, max(rs) + 1)
        out = []
        for r in rs:
            point["r"] = r
            state = thermo.reduced_state(model, r, gt)
            out.append([MEASURES[name](state) for name in names])
    except XYCorrError as exc:
        raise PointFailure(point, exc) from exc
    return out


def thermo_sweep(
    gamma: float,
    temperature: float,
    rs: Iterable[int],
    lambdas,
    names: Sequence[str] = ("discord",),
    workers: int | None = None,
) -> dict[tuple[str, int], SweepSeries]:
    """Evaluate correlation measures of the infinite chain over a lambda grid.

    One G-table per lambda is shared by every separation in ``rs``.
    """
    rs = [int(r) for r in rs]
    lambdas = np.asarray(lambdas, dtype=float)
    for name in names:
        if name not in MEASURES:
            raise KeyError(f"unknown measure {name!r}; choose from {sorted(MEASURES)}")
    rows = parallel_map(
        _thermo_point, [(float(l), gamma, temperature, rs, tuple(names)) for l in lambdas], workers
    )
    arr = np.array(rows)  # (lambda, r, measure)
    return {
        (name, r): SweepSeries(
            lambdas, arr[:, i, j], {"gamma": gamma, "temperature": temperature, "r": r, "measure": name}
        )
        for i, r in enumerate(rs)
        for j, name in enumerate(names)
    }


def derivative_lambda(series: SweepSeries) -> SweepSeries:
    """Central differences in the interior, one-sided at the two ends."""
    g = series.grid
    if len(g) < 3:
        raise GridTooCoarse("need at least 3 grid points")
    d = np.diff(g)
    if not np.allclose(d, d[0], rtol=1e-6, atol=0):
        raise GridTooCoarse("grid is not uniform")
    deriv = np.gradient(series.values, d[0], edge_order=1)
    meta = dict(series.meta)
    meta["measure"] = f"d{meta.get('measure', 'value')}/dlambda"
    return SweepSeries(g, deriv, meta)


def parabolic_peak(x: np.ndarray, y: np.ndarray, i: int) -> float:
    """Vertex of the parabola through points i-1, i, i+1 of a uniform grid."""
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    denom = y0 - 2 * y1 + y2
    h = x[i + 1] - x[i]
    if denom == 0:
        return float(x[i])
    return float(x[i] + 0.5 * h * (y0 - y2) / denom)


def locate_etcp(series: SweepSeries) -> float:
    """Coupling at the maximum of d(series)/dlambda, refined parabolically."""
    deriv = derivative_lambda(series).values
    i = int(np.argmax(deriv))
    if i == 0 or i == len(deriv) - 1:
        side = "left" if i == 0 else "right"
        raise PeakAtBoundary(f"derivative maximum at the {side} edge of the grid", side=side)
    return parabolic_peak(series.grid, deriv, i)


@dataclass(frozen=True)
class EtcpSeries:
    temperatures: np.ndarray
    lambda_tc: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.temperatures, dtype=float)
        l = np.asarray(self.lambda_tc, dtype=float)
        if t.shape != l.shape:
            raise ValueError("temperatures and lambda_tc differ in length")
        if np.any(np.diff(t) <= 0):
            raise ValueError("temperatures must be strictly ascending")
        object.__setattr__(self, "temperatures", t)
        object.__setattr__(self, "lambda_tc", l)


@dataclass(frozen=True)
class FitResult:
    alpha: float
    nu: float
    residual: float


def _rmse(alpha, nu, t, l):
    return float(np.sqrt(np.mean((alpha * t**nu + 1 - l) ** 2)))


def fit_ansatz(series: EtcpSeries) -> FitResult:
    """Fit lambda_Tc = alpha T^nu + 1.

    Linear regression of log(lambda_Tc - 1) on log T, followed by one
    Gauss-Newton step on the untransformed residual (kept only if it helps).
    """
    t, l = series.temperatures, series.lambda_tc
    if len(t) < 4:
        raise DegenerateFit("need at least 4 samples")
    if np.any(l <= 1) or np.any(t <= 0):
        raise DegenerateFit("every lambda_Tc must exceed 1 and every T must be positive")
    nu, log_alpha = np.polyfit(np.log(t), np.log(l - 1), 1)
    alpha = float(np.exp(log_alpha))
    nu = float(nu)
    rmse = _rmse(alpha, nu, t, l)

    tn = t**nu
    jac = np.column_stack([tn, alpha * tn * np.log(t)])
    resid = alpha * tn + 1 - l
    delta, *_ = np.linalg.lstsq(jac, -resid, rcond=None)
    a2, n2 = alpha + delta[0], nu + delta[1]
    if a2 > 0 and np.isfinite(a2) and np.isfinite(n2):
        r2 = _rmse(a2, n2, t, l)
        if r2 < rmse:
            alpha, nu, rmse = float(a2), float(n2), r2
    return FitResult(alpha=alpha, nu=nu, residual=rmse)


DEFAULT_WINDOW = (0.8, 2.5)
DEFAULT_TEMPERATURES = tuple(np.round(np.arange(1, 11) * 0.05, 10))


def _sweep_discord(gamma, temperature, rs, grid, workers):
    return thermo_sweep(gamma, temperature, rs, grid, ("discord",), workers)


def etcp(
    gamma: float,
    temperature: float,
    rs: Iterable[int],
    *,
    window: tuple[float, float] = DEFAULT_WINDOW,
    coarse_step: float = 1e-2,
    fine_step: float = 1e-3,
    fine_halfwidth: float = 0.03,
    full_grid: bool = False,
    workers: int | None = None,
) -> dict[int, float]:
    """Estimated thermal critical point for each separation in ``rs``.

    With ``full_grid`` the whole window is swept at ``fine_step``.  Otherwise
    the window is swept at ``coarse_step`` and the peak is re-located on a
    ``fine_step`` grid around the coarse estimate.  Either way the window is
    widened whenever the peak lands on its edge.
    """
    rs = [int(r) for r in rs]
    lo, hi = window
    step = fine_step if full_grid else coarse_step
    pending = list(rs)
    coarse: dict[int, float] = {}
    while pending:
        grid = np.round(np.arange(lo, hi + step / 2, step), 12)
        sweeps = _sweep_discord(gamma, temperature, pending, grid, workers)
        still = []
        for r in pending:
            try:
                coarse[r] = locate_etcp(sweeps[("discord", r)])
            except PeakAtBoundary as exc:
                still.append(r)
                if exc.side == "right":
                    hi += 1.0
                else:
                    lo = max(0.0, lo - 0.5)
                log.info("gamma=%g T=%g r=%d: widening window to [%g, %g]", gamma, temperature, r, lo, hi)
        if still and hi > 50:
            raise PeakAtBoundary(f"no interior peak up to lambda={hi}", side="right")
        pending = still
    if full_grid:
        return coarse

    result = {}
    for r in rs:
        centre = coarse[r]
        for _ in range(20):
            grid = np.round(
                np.arange(centre - fine_halfwidth, centre + fine_halfwidth + fine_step / 2, fine_step), 12
            )
            grid = grid[grid >= 0]
            try:
                result[r] = locate_etcp(_sweep_discord(gamma, temperature, [r], grid, workers)[("discord", r)])
                break
            except PeakAtBoundary as exc:
                centre += fine_halfwidth if exc.side == "right" else -fine_halfwidth
        else:
            raise PeakAtBoundary(f"fine search for r={r} did not settle")
    return result


def etcp_series(
    gamma: float,
    rs: Iterable[int],
    temperatures: Sequence[float] = DEFAULT_TEMPERATURES,
    **kwargs,
) -> dict[int, EtcpSeries]:
    """ETCP at every temperature for each separation; one EtcpSeries per r."""
    rs = [int(r) for r in rs]
    temps = sorted(float(t) for t in temperatures)
    points = [etcp(gamma, t, rs, **kwargs) for t in temps]
    return {
        r: EtcpSeries(np.array(temps), np.array([p[r] for p in points]), {"gamma": gamma, "r": r})
        for r in rs
    }


def _finite_point(args):
    lam, n, gamma, temperature, rs = args
    try:
        spectrum = finite.diagonalize(finite.ChainSpec(n, thermo.ModelPoint(lam, gamma)))
        pairs = finite.pair_states(spectrum, FINITE_TEMPERATURE_SCALE * temperature, rs)
        model = thermo.ModelPoint(lam, gamma, temperature)
        gt = thermo.GTable.build(model, max(rs) + 1)
        return [
            measures.fidelity(thermo.reduced_state(model, r, gt), finite_to_thermo_frame(pairs[r]))
            for r in rs
        ]
    except XYCorrError as exc:
        raise PointFailure({"lambda": lam, "gamma": gamma, "T": temperature, "n": n}, exc) from exc


def _finite_measure_point(args):
    lam, n, gamma, temperature, rs, names = args
    try:
        spectrum = finite.diagonalize(finite.ChainSpec(n, thermo.ModelPoint(lam, gamma)))
        pairs = finite.pair_states(spectrum, temperature, rs)
        return [[MEASURES[name](pairs[r]) for name in names] for r in rs]
    except XYCorrError as exc:
        raise PointFailure({"lambda": lam, "gamma": gamma, "T": temperature, "n": n}, exc) from exc


def finite_sweep(
    n: int,
    gamma: float,
    temperature: float,
    rs: Iterable[int],
    lambdas,
    names: Sequence[str] = ("discord",),
    workers: int | None = None,
) -> dict[tuple[str, int], SweepSeries]:
    """Pair-state measures of the n-site ring over a lambda grid.

    ``temperature`` is the Gibbs temperature of the ring Hamiltonian itself
    (no rescaling to the infinite-chain convention).
    """
    rs = [int(r) for r in rs]
    lambdas = np.asarray(lambdas, dtype=float)
    rows = parallel_map(
        _finite_measure_point,
        [(float(l), n, gamma, temperature, rs, tuple(names)) for l in lambdas],
        workers,
    )
    arr = np.array(rows)
    return {
        (name, r): SweepSeries(
            lambdas, arr[:, i, j],
            {"gamma": gamma, "temperature": temperature, "r": r, "measure": name, "n": n},
        )
        for i, r in enumerate(rs)
        for j, name in enumerate(names)
    }


def compare_finite_infinite(
    n: int,
    gamma: float,
    temperature: float,
    r,
    lambda_grid,
    workers: int | None = None,
) -> np.ndarray:
    """Fidelity between ring and infinite-chain pair states along ``lambda_grid``.

    ``r`` may be one separation (1-D result) or a sequence (rows follow ``r``).
    """
    scalar = np.ndim(r) == 0
    rs = [int(x) for x in np.atleast_1d(r)]
    if any(x < 1 or x > n // 2 for x in rs):
        raise ValueError(f"separations must lie in [1, {n // 2}] for n={n}")
    lams = np.asarray(lambda_grid, dtype=float)
    rows = parallel_map(_finite_point, [(float(l), n, gamma, temperature, rs) for l in lams], workers)
    out = np.array(rows).T
    return out[0] if scalar else out
