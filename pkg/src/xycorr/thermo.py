"""Two-spin reduced state of the infinite anisotropic XY chain.

The pair state at separation r is assembled from the magnetisation and the
xx/yy/zz two-point functions; the xx and yy functions are Toeplitz
determinants of the G_k integrals over [0, pi].

Temperatures here follow the convention of the quasiparticle formulas,
tanh(omega/T) with omega = sqrt((lam gam sin phi)^2 + (1 + lam cos phi)^2)/2.
The magnetisation is negative (spins anti-aligned with the field term), the
mirror image of the explicit finite-chain Hamiltonian; see
``xycorr.analysis.finite_to_thermo_frame``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.integrate import IntegrationWarning, quad, quad_vec

from .errors import InsufficientGTable, NoFactorization, QuadratureNotConverged
from .measures import SX, SY, SZ, ID2, TwoQubitState, as_state

QUAD_TOL = 1e-10
QUAD_LIMIT = 10_000

_XX = np.kron(SX, SX)
_YY = np.kron(SY, SY)
_ZZ = np.kron(SZ, SZ)
_ZI = np.kron(SZ, ID2) + np.kron(ID2, SZ)


@dataclass(frozen=True)
class ModelPoint:
    """Coupling ``lam``, anisotropy ``gamma`` and temperature (0 = ground state)."""

    lam: float
    gamma: float
    temperature: float = 0.0

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not self.temperature >= 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")

    @property
    def is_ground_state(self) -> bool:
        return self.temperature == 0


def dispersion(model: ModelPoint, phi):
    """Quasiparticle energy omega_phi; accepts scalar or array ``phi``."""
    lam, gam = model.lam, model.gamma
    return 0.5 * np.hypot(lam * gam * np.sin(phi), 1.0 + lam * np.cos(phi))


def _thermal_weight(model: ModelPoint, phi):
    """tanh(omega/T) / (2 pi omega), with the T = 0 branch taken exactly."""
    w = dispersion(model, phi)
    if model.is_ground_state:
        return 1.0 / (2 * np.pi * w)
    t = model.temperature
    # tanh(w/T)/w -> 1/T as w -> 0
    safe = np.where(w > 1e-300, w, 1.0)
    return np.where(w > 1e-12 * t, np.tanh(safe / t) / safe, 1.0 / t) / (2 * np.pi)


def _breakpoints(model: ModelPoint) -> list[float]:
    """Angle where 1 + lam cos phi vanishes, if it lies inside (0, pi)."""
    if model.lam > 1.0:
        return [math.acos(-1.0 / model.lam)]
    return []


def _quad_scalar(f, model: ModelPoint) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            val, err, info = quad(
                f, 0.0, math.pi, epsabs=QUAD_TOL, epsrel=0.0, limit=QUAD_LIMIT,
                points=_breakpoints(model) or None, full_output=1,
            )[:3]
        except IntegrationWarning as exc:
            raise QuadratureNotConverged(f"{model}: {exc}") from exc
    if err > QUAD_TOL:
        raise QuadratureNotConverged(f"{model}: error estimate {err:.2e} above {QUAD_TOL:g}")
    return float(val)


def _g_integrand(model: ModelPoint, k):
    lam, gam = model.lam, model.gamma

    def f(phi):
        return _thermal_weight(model, phi) * (
            np.cos(k * phi) * (1 + lam * np.cos(phi)) - lam * gam * np.sin(k * phi) * np.sin(phi)
        )

    return f


def g_function(model: ModelPoint, k: int) -> float:
    """Single G_k by adaptive Gauss-Kronrod quadrature."""
    return _quad_scalar(_g_integrand(model, int(k)), model)


def magnetization(model: ModelPoint) -> float:
    lam = model.lam
    return -_quad_scalar(lambda phi: (1 + lam * np.cos(phi)) * _thermal_weight(model, phi), model)


@dataclass(frozen=True)
class GTable:
    """G_k for |k| <= r_max plus the magnetisation, computed in one vector quadrature."""

    model: ModelPoint
    r_max: int
    values: np.ndarray = field(repr=False)
    sigma_z_mean: float = 0.0

    def __getitem__(self, k: int) -> float:
        if abs(k) > self.r_max:
            raise InsufficientGTable(f"G_{k} not in table (r_max={self.r_max})")
        return float(self.values[k + self.r_max])

    def covers(self, lo: int, hi: int) -> bool:
        return -self.r_max <= lo and hi <= self.r_max

    @classmethod
    def build(cls, model: ModelPoint, r_max: int) -> "GTable":
        if r_max < 1:
            raise ValueError("r_max must be a positive integer")
        ks = np.arange(-r_max, r_max + 1)
        lam, gam = model.lam, model.gamma

        def f(phi):
            wt = _thermal_weight(model, phi)
            c = 1 + lam * np.cos(phi)
            g = wt * (np.cos(ks * phi) * c - lam * gam * np.sin(ks * phi) * np.sin(phi))
            return np.append(g, -c * wt)

        pts = _breakpoints(model)
        intervals = [0.0, *pts, math.pi]
        total = np.zeros(len(ks) + 1)
        for lo, hi in zip(intervals[:-1], intervals[1:]):
            val, err, info = quad_vec(
                f, lo, hi, epsabs=QUAD_TOL / len(intervals), epsrel=0.0, norm="max",
                limit=QUAD_LIMIT, full_output=True,
            )
            if not info.success or err > QUAD_TOL:
                raise QuadratureNotConverged(
                    f"{model}: vector quadrature on [{lo:.4f}, {hi:.4f}] err={err:.2e} ({info.message})"
                )
            total += val
        values = total[:-1]
        values.setflags(write=False)
        return cls(model=model, r_max=int(r_max), values=values, sigma_z_mean=float(total[-1]))


def lu_determinant(matrix) -> float:
    """Determinant from a partially pivoted LU factorisation."""
    a = np.asarray(matrix, dtype=float)
    if a.size == 0:
        return 1.0
    with warnings.catch_warnings():
        # an exactly singular matrix is a legitimate zero determinant
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=True)
    sign = -1.0 if np.count_nonzero(piv != np.arange(len(piv))) % 2 else 1.0
    return float(sign * np.prod(np.diag(lu)))


def _toeplitz(gtable: GTable, r: int, offset: int) -> np.ndarray:
    i = np.arange(1, r + 1)
    idx = i[:, None] - i[None, :] + offset
    lo, hi = int(idx.min()), int(idx.max())
    if not gtable.covers(lo, hi):
        raise InsufficientGTable(f"need G_k for k in [{lo}, {hi}], table has r_max={gtable.r_max}")
    return gtable.values[idx + gtable.r_max]


def xx_correlator(gtable: GTable, r: int) -> float:
    """<sx_0 sx_r>: det of the r x r Toeplitz matrix with entries G_{i-j-1}."""
    if r < 1:
        raise ValueError("r must be >= 1")
    return lu_determinant(_toeplitz(gtable, r, -1))


def yy_correlator(gtable: GTable, r: int) -> float:
    """<sy_0 sy_r>: det of the r x r Toeplitz matrix with entries G_{i-j+1}."""
    if r < 1:
        raise ValueError("r must be >= 1")
    return lu_determinant(_toeplitz(gtable, r, +1))


def zz_correlator(gtable: GTable, sigma_z_mean: float, r: int) -> float:
    return sigma_z_mean**2 - gtable[r] * gtable[-r]


@dataclass(frozen=True)
class CorrelatorSet:
    r: int
    sigma_z_mean: float
    xx: float
    yy: float
    zz: float


def correlators(model_or_table, r: int) -> CorrelatorSet:
    """All pair correlators at separation ``r``; pass a GTable to reuse quadratures."""
    gt = model_or_table
    if isinstance(gt, ModelPoint):
        gt = GTable.build(gt, r + 1)
    sz = gt.sigma_z_mean
    return CorrelatorSet(
        r=r,
        sigma_z_mean=sz,
        xx=xx_correlator(gt, r),
        yy=yy_correlator(gt, r),
        zz=zz_correlator(gt, sz, r),
    )


def state_from_correlators(c: CorrelatorSet) -> np.ndarray:
    """Unclamped 4x4 matrix 1/4 [1 + <sz>(sz x 1 + 1 x sz) + sum_i <s_i s_i> s_i x s_i]."""
    return 0.25 * (np.eye(4) + c.sigma_z_mean * _ZI + c.xx * _XX + c.yy * _YY + c.zz * _ZZ)


def reduced_state(model: ModelPoint, r: int, gtable: GTable | None = None) -> TwoQubitState:
    """Two-spin reduced density matrix at separation ``r`` in the infinite chain."""
    if r < 1:
        raise ValueError("r must be >= 1")
    if gtable is None:
        gtable = GTable.build(model, r + 1)
    return as_state(state_from_correlators(correlators(gtable, r)))


def factorization_field(gamma: float) -> float:
    """Coupling at which the ground state is fully factorised, 1/sqrt(1 - gamma^2)."""
    if not 0.0 <= gamma < 1.0:
        raise NoFactorization(f"no factorization field for gamma={gamma}")
    return 1.0 / math.sqrt(1.0 - gamma * gamma)
