"""Entropic and entanglement measures for two-qubit density matrices.

All entropies are in bits.  The computational basis is ordered
|uu>, |ud>, |du>, |dd> with sigma_z|u> = +|u>, i.e. the usual ``np.kron``
ordering with qubit A as the most significant factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np
from .errors import NotPositive, OptimizerStalled

PSD_CLAMP = 1e-9
PSD_ERROR = 1e-6
PROB_FLOOR = 1e-14

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
ID2 = np.eye(2, dtype=complex)
PAULIS = (SX, SY, SZ)
_YY = np.kron(SY, SY)


class Side(str, Enum):
    """Which qubit is measured in the discord optimisation."""

    A = "A"
    B = "B"


@dataclass(frozen=True)
class TwoQubitState:
    """Validated 4x4 density matrix.

    Use :func:`as_state` to build one from a matrix that may carry small
    negative eigenvalues from quadrature or rounding.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise ValueError(f"expected a 4x4 matrix, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise ValueError("matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-12:
            raise ValueError(f"trace {np.trace(m).real!r} is not 1")
        if np.linalg.eigvalsh(m)[0] < -PSD_CLAMP:
            raise NotPositive("matrix has a negative eigenvalue below -1e-9")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.matrix
        return self.matrix.astype(dtype)


StateLike = Union[TwoQubitState, np.ndarray]


def clamp_psd(matrix, *, clamp=PSD_CLAMP, error=PSD_ERROR):
    """Symmetrise, clip negative eigenvalues above ``-error`` and renormalise.

    Raises NotPositive if the smallest eigenvalue is below ``-error``.
    """
    m = np.asarray(matrix, dtype=complex)
    m = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(m)
    if w[0] < -error:
        raise NotPositive(f"eigenvalue {w[0]:.3e} below -{error:g}")
    if w[0] >= 0 and abs(w.sum() - 1.0) < 1e-14:
        return m
    w = np.clip(w, 0.0, None)
    w /= w.sum()
    return (v * w) @ v.conj().T


def as_state(matrix) -> TwoQubitState:
    """Wrap ``matrix`` as a TwoQubitState after PSD clamping."""
    m = clamp_psd(matrix)
    # eigen-reconstruction leaves ~1e-17 anti-Hermitian noise
    m = 0.5 * (m + m.conj().T)
    return TwoQubitState(m / np.trace(m).real)


def _matrix(state) -> np.ndarray:
    return np.asarray(state, dtype=complex)


def _eigs(rho) -> np.ndarray:
    w = np.linalg.eigvalsh(rho)
    if w[0] < -PSD_ERROR:
        raise NotPositive(f"eigenvalue {w[0]:.3e} below -{PSD_ERROR:g}")
    return np.clip(w, 0.0, None)


def _h2(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def binary_entropy(x):
    """h(x) = -x log2 x - (1-x) log2(1-x), with 0 log 0 = 0. Vectorised."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = (x > 0) & (x < 1)
    xm = x[m]
    out[m] = -xm * np.log2(xm) - (1 - xm) * np.log2(1 - xm)
    return out if out.ndim else float(out)


def von_neumann_entropy(state) -> float:
    """-Tr[rho log2 rho] for a density matrix of any dimension."""
    w = _eigs(_matrix(state))
    w = w[w > 0]
    return float(max(0.0, -np.sum(w * np.log2(w))))


def partial_trace(state, keep: Side | str) -> np.ndarray:
    """Single-qubit marginal of a two-qubit state; ``keep`` names the qubit retained."""
    t = _matrix(state).reshape(2, 2, 2, 2)
    if Side(keep) is Side.A:
        return np.einsum("ijkj->ik", t)
    return np.einsum("ijil->jl", t)


def mutual_information(state) -> float:
    rho = _matrix(state)
    s_a = von_neumann_entropy(partial_trace(rho, Side.A))
    s_b = von_neumann_entropy(partial_trace(rho, Side.B))
    return max(0.0, s_a + s_b - von_neumann_entropy(rho))


_PAULI4 = (ID2, SX, SY, SZ)
# _BASIS[i, j] = s_i x s_j, with s_0 the identity
_BASIS = np.array([[np.kron(p, q) for q in _PAULI4] for p in _PAULI4])


def bloch_decomposition(state):
    """Return (a, b, T) with rho = 1/4 [1 + a.s x 1 + 1 x b.s + sum T_ij s_i x s_j]."""
    rho = _matrix(state)
    c = np.einsum("ijkl,lk->ij", _BASIS, rho).real
    return c[1:, 0], c[0, 1:], c[1:, 1:]


@dataclass(frozen=True)
class MeasurementDirection:
    """Bloch direction of a rank-1 projective qubit measurement."""

    theta: float
    phi: float

    @property
    def vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])

    def projectors(self):
        n_sigma = sum(c * p for c, p in zip(self.vector, PAULIS))
        return 0.5 * (ID2 + n_sigma), 0.5 * (ID2 - n_sigma)

    def canonical(self) -> "MeasurementDirection":
        """Same measurement with theta in [0, pi] and phi in [0, 2 pi)."""
        x, y, z = self.vector
        theta = math.acos(max(-1.0, min(1.0, z)))
        phi = math.atan2(y, x) % (2 * math.pi) if math.hypot(x, y) > 1e-15 else 0.0
        return MeasurementDirection(theta, phi)


def _measured_frame(state, side: Side):
    """(Bloch vector of unmeasured qubit, of measured qubit, T oriented as T[unmeasured, measured])."""
    a, b, t = bloch_decomposition(state)
    if Side(side) is Side.B:
        return a, b, t
    return b, a, t.T


def conditional_entropy(state, direction: MeasurementDirection, side: Side | str = Side.B) -> float:
    """Average entropy of the unmeasured qubit after measuring ``side`` along ``direction``."""
    rho = _matrix(state)
    side = Side(side)
    total = 0.0
    for proj in direction.projectors():
        op = np.kron(ID2, proj) if side is Side.B else np.kron(proj, ID2)
        post = op @ rho @ op
        p = np.trace(post).real
        if p < PROB_FLOOR:
            continue
        keep = Side.A if side is Side.B else Side.B
        total += p * von_neumann_entropy(partial_trace(post / p, keep))
    return total


def _cond_entropy_grid(u, m, t, theta, phi):
    """Vectorised conditional entropy over arrays of angles (Bloch-vector form)."""
    st = np.sin(theta)
    n = np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)
    bn = n @ m
    tn = n @ t.T
    out = np.zeros(np.shape(theta))
    for sgn in (1.0, -1.0):
        p = 0.5 * (1 + sgn * bn)
        ok = p > PROB_FLOOR
        vec = (u + sgn * tn) / np.where(ok, 2 * p, 1.0)[..., None]
        r = np.minimum(np.linalg.norm(vec, axis=-1), 1.0)
        out += np.where(ok, p * binary_entropy(0.5 * (1 + r)), 0.0)
    return out


def _cond_entropy_scalar(u, m, t, x):
    theta, phi = x
    st = math.sin(theta)
    n0, n1, n2 = st * math.cos(phi), st * math.sin(phi), math.cos(theta)
    bn = m[0] * n0 + m[1] * n1 + m[2] * n2
    tn = [t[i][0] * n0 + t[i][1] * n1 + t[i][2] * n2 for i in range(3)]
    total = 0.0
    for sgn in (1.0, -1.0):
        p = 0.5 * (1 + sgn * bn)
        if p < PROB_FLOOR:
            continue
        r = math.sqrt(sum((u[i] + sgn * tn[i]) ** 2 for i in range(3))) / (2 * p)
        total += p * _h2(0.5 * (1 + min(r, 1.0)))
    return total


def nelder_mead(f, x0, steps, *, fatol=1e-12, xatol=1e-9, maxiter=2000):
    """Minimise ``f`` over a few real variables with the downhill simplex method.

    Standard reflection/expansion/contraction/shrink coefficients (1, 2, 1/2, 1/2).
    Returns ``(x, f(x), converged)``; ``x`` is a tuple.
    """
    dim = len(x0)
    simplex = [list(x0)]
    for i, h in enumerate(steps):
        v = list(x0)
        v[i] += h
        simplex.append(v)
    fs = [f(v) for v in simplex]
    for _ in range(maxiter):
        order = sorted(range(dim + 1), key=fs.__getitem__)
        simplex = [simplex[i] for i in order]
        fs = [fs[i] for i in order]
        spread_x = max(abs(v[k] - simplex[0][k]) for v in simplex[1:] for k in range(dim))
        if fs[-1] - fs[0] <= fatol and spread_x <= xatol:
            return tuple(simplex[0]), fs[0], True
        centroid = [sum(v[k] for v in simplex[:-1]) / dim for k in range(dim)]
        worst = simplex[-1]
        xr = [c + (c - w) for c, w in zip(centroid, worst)]
        fr = f(xr)
        if fr < fs[0]:
            xe = [c + 2 * (c - w) for c, w in zip(centroid, worst)]
            fe = f(xe)
            simplex[-1], fs[-1] = (xe, fe) if fe < fr else (xr, fr)
        elif fr < fs[-2]:
            simplex[-1], fs[-1] = xr, fr
        else:
            if fr < fs[-1]:
                xc = [c + 0.5 * (r - c) for c, r in zip(centroid, xr)]
            else:
                xc = [c + 0.5 * (w - c) for c, w in zip(centroid, worst)]
            fc = f(xc)
            if fc < min(fr, fs[-1]):
                simplex[-1], fs[-1] = xc, fc
            else:
                best = simplex[0]
                simplex = [best] + [[b + 0.5 * (v[k] - b) for k, b in enumerate(best)] for v in simplex[1:]]
                fs = [fs[0]] + [f(v) for v in simplex[1:]]
    i = min(range(dim + 1), key=fs.__getitem__)
    return tuple(simplex[i]), fs[i], False


@dataclass(frozen=True)
class DiscordResult:
    discord: float
    classical: float
    mutual_info: float
    argmin: MeasurementDirection
    measured_side: Side
    min_conditional_entropy: float


GRID_THETA = np.linspace(0.0, np.pi, 61)
GRID_PHI = np.arange(60) * (np.pi / 30)


def discord(state, side: Side | str = Side.B, *, n_starts: int = 3, tol: float = 1e-9) -> DiscordResult:
    """Quantum discord with projective measurements on ``side``.

    The conditional entropy is scanned on a (pi/60, pi/30) angular grid and the
    best ``n_starts`` cells are polished with Nelder-Mead.
    """
    rho = _matrix(state)
    side = Side(side)
    u, m, t = _measured_frame(rho, side)

    th, ph = np.meshgrid(GRID_THETA, GRID_PHI, indexing="ij")
    vals = _cond_entropy_grid(u, m, t, th, ph)
    flat = np.argsort(vals, axis=None, kind="stable")[:n_starts]
    best_x = (float(th.flat[flat[0]]), float(ph.flat[flat[0]]))
    best_f = float(vals.flat[flat[0]])

    u_l, m_l, t_l = u.tolist(), m.tolist(), t.tolist()
    converged = False
    for idx in flat:
        x0 = (float(th.flat[idx]), float(ph.flat[idx]))
        x, f, ok = nelder_mead(
            lambda x: _cond_entropy_scalar(u_l, m_l, t_l, x),
            x0,
            steps=(np.pi / 120, np.pi / 60),
            fatol=tol * 1e-3,
            xatol=1e-9,
        )
        converged |= ok
        if f < best_f:
            best_f, best_x = f, x
    if not converged:
        raise OptimizerStalled("Nelder-Mead did not converge from any grid seed")

    s_ab = von_neumann_entropy(rho)
    s_meas = von_neumann_entropy(partial_trace(rho, side))
    s_other = von_neumann_entropy(partial_trace(rho, Side.A if side is Side.B else Side.B))
    mi = max(0.0, s_meas + s_other - s_ab)
    d = s_meas - s_ab + best_f
    if d < -1e-8:
        raise NotPositive(f"negative discord {d:.3e}")
    d = max(d, 0.0)
    return DiscordResult(
        discord=d,
        classical=mi - d,
        mutual_info=mi,
        argmin=MeasurementDirection(*best_x).canonical(),
        measured_side=side,
        min_conditional_entropy=best_f,
    )


def concurrence(state) -> float:
    """Wootters concurrence from the spin-flipped product rho (Y x Y) rho* (Y x Y)."""
    rho = _matrix(state)
    r = rho @ _YY @ rho.conj() @ _YY
    w = np.sort(np.linalg.eigvals(r).real)[::-1]
    if w[-1] < -1e-8:
        raise NotPositive(f"spin-flipped product has eigenvalue {w[-1]:.3e}")
    s = np.sqrt(np.clip(w, 0.0, None))
    return float(min(1.0, max(0.0, s[0] - s[1] - s[2] - s[3])))


def eof_from_concurrence(c: float) -> float:
    c = min(max(c, 0.0), 1.0)
    return _h2(0.5 * (1 + math.sqrt(1 - c * c)))


def entanglement_of_formation(state) -> float:
    return eof_from_concurrence(concurrence(state))


def _sqrtm_psd(m):
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    if w[0] < -PSD_ERROR:
        raise NotPositive(f"eigenvalue {w[0]:.3e} below -{PSD_ERROR:g}")
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def fidelity(a, b) -> float:
    """Uhlmann fidelity Tr sqrt(sqrt(a) b sqrt(a)) (not squared).

    Evaluated as the nuclear norm of sqrt(a) sqrt(b), which is the same number
    and symmetric in its arguments up to rounding.
    """
    a = _matrix(a)
    b = _matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    s = np.linalg.svd(_sqrtm_psd(a) @ _sqrtm_psd(b), compute_uv=False)
    return float(min(1.0, max(0.0, s.sum())))
