"""Exact diagonalisation of the periodic anisotropic XY ring.

Sites are numbered 0..n-1 and site 0 is the most significant bit of the
basis index; bit value 0 is spin up (sigma_z = +1).  The Hamiltonian is

    H = -sum_i [ lam/2 ((1+gam) sx_i sx_{i+1} + (1-gam) sy_i sy_{i+1}) + sz_i ]

with site n-1 coupled back to site 0.  For n = 2 the single bond appears
twice in the sum and is kept that way.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import BadSites, DimensionTooLarge, EigensolverFailed, NoCrossingFound, NoFactorization
from .measures import TwoQubitState, as_state
from .thermo import ModelPoint, factorization_field

MAX_SITES = 12
DEGENERACY_TOL = 1e-9


@dataclass(frozen=True)
class ChainSpec:
    n: int
    model: ModelPoint

    def __post_init__(self):
        if self.n > MAX_SITES:
            raise DimensionTooLarge(f"n={self.n} exceeds {MAX_SITES} sites")
        if self.n < 2:
            raise ValueError(f"need at least 2 sites, got {self.n}")

    @property
    def dim(self) -> int:
        return 1 << self.n


def _bits(n: int) -> np.ndarray:
    """bits[s, i] = occupation (0 up, 1 down) of site i in basis state s."""
    s = np.arange(1 << n)
    return (s[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1


def _hamiltonian_parts(n: int):
    """(field, flip_equal, flip_opposite) so that H = field + lam*gam*flip_equal + lam*flip_opposite."""
    if n > MAX_SITES:
        raise DimensionTooLarge(f"n={n} exceeds {MAX_SITES} sites")
    dim = 1 << n
    bits = _bits(n)
    field_diag = -(n - 2 * bits.sum(axis=1)).astype(float)
    same = np.zeros((dim, dim))
    opposite = np.zeros((dim, dim))
    s = np.arange(dim)
    for i in range(n):
        j = (i + 1) % n
        mask = (1 << (n - 1 - i)) | (1 << (n - 1 - j))
        t = s ^ mask
        eq = bits[:, i] == bits[:, j]
        # (1+g) sx sx + (1-g) sy sy flips both spins: amplitude 2g if aligned, 2 if not
        np.add.at(same, (t[eq], s[eq]), -1.0)
        np.add.at(opposite, (t[~eq], s[~eq]), -1.0)
    return np.diag(field_diag), same, opposite


def build_hamiltonian(spec: ChainSpec) -> np.ndarray:
    """Dense real-symmetric Hamiltonian of the ring in the computational basis."""
    fld, same, opposite = _hamiltonian_parts(spec.n)
    lam, gam = spec.model.lam, spec.model.gamma
    return fld + lam * gam * same + lam * opposite


def parity_operator(n: int) -> np.ndarray:
    """Diagonal of P = exp(i pi/2 (sum sz + n)) = (-1)^(number of up spins).

    Returned as a 1-D array of +-1; ``np.diag`` it for the full matrix.
    """
    if n > MAX_SITES:
        raise DimensionTooLarge(f"n={n} exceeds {MAX_SITES} sites")
    ups = n - _bits(n).sum(axis=1)
    return np.where(ups % 2 == 0, 1.0, -1.0)


@dataclass(frozen=True)
class SpectrumResult:
    energies: np.ndarray
    states: np.ndarray = field(repr=False)
    degeneracy_tol: float = DEGENERACY_TOL
    spec: ChainSpec | None = None

    @property
    def gap(self) -> float:
        return float(self.energies[1] - self.energies[0])

    @property
    def ground_multiplicity(self) -> int:
        return int(np.count_nonzero(self.energies - self.energies[0] < self.degeneracy_tol))


def diagonalize(spec: ChainSpec, degeneracy_tol: float = DEGENERACY_TOL) -> SpectrumResult:
    h = build_hamiltonian(spec)
    try:
        e, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailed(f"{spec}: {exc}") from exc
    return SpectrumResult(energies=e, states=v, degeneracy_tol=degeneracy_tol, spec=spec)


def thermal_state(spectrum: SpectrumResult, temperature: float) -> np.ndarray:
    """Gibbs state exp(-H/T)/Z; at T = 0 the equal mixture over the ground manifold."""
    e = spectrum.energies - spectrum.energies[0]
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    if temperature == 0:
        w = (e < spectrum.degeneracy_tol).astype(float)
    else:
        w = np.exp(-e / temperature)
    w /= w.sum()
    keep = w > 0
    v = spectrum.states[:, keep]
    return (v * w[keep]) @ v.conj().T


def reduce_to_pair(state, site_a: int, site_b: int) -> TwoQubitState:
    """Reduced state of sites ``site_a < site_b``; ``state`` is a density matrix or a state vector."""
    state = np.asarray(state)
    dim = state.shape[0]
    n = dim.bit_length() - 1
    if (1 << n) != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    if not (0 <= site_a < site_b < n):
        raise BadSites(f"need 0 <= site_a < site_b < {n}, got ({site_a}, {site_b})")
    others = [k for k in range(n) if k not in (site_a, site_b)]
    if state.ndim == 1:
        psi = np.transpose(state.reshape((2,) * n), [site_a, site_b, *others]).reshape(4, -1)
        rho = psi @ psi.conj().T
    else:
        t = state.reshape((2,) * (2 * n))
        perm = [site_a, site_b, *others]
        t = np.transpose(t, perm + [n + k for k in perm]).reshape(4, dim // 4, 4, dim // 4)
        rho = np.einsum("ikjk->ij", t)
    return as_state(rho)


def numerical_rank(state, rel_tol: float = 1e-5) -> int:
    """Number of eigenvalues above ``rel_tol`` times the largest one."""
    w = np.linalg.eigvalsh(np.asarray(state))
    return int(np.count_nonzero(w > rel_tol * w[-1]))


@dataclass(frozen=True)
class CrossingReport:
    gamma: float
    n: int
    crossings: list[float]
    min_gaps: list[float]

    @property
    def count(self) -> int:
        return len(self.crossings)


class _GapFunction:
    """E_1 - E_0 of the ring as a function of lam, using the parity blocks."""

    def __init__(self, n: int, gamma: float):
        fld, same, opposite = _hamiltonian_parts(n)
        p = parity_operator(n)
        self.blocks = []
        for sign in (1.0, -1.0):
            idx = np.flatnonzero(p == sign)
            ix = np.ix_(idx, idx)
            self.blocks.append((fld[ix], gamma * same[ix] + opposite[ix]))

    def lowest_pairs(self, lams) -> np.ndarray:
        lams = np.asarray(lams, dtype=float)
        lows = []
        for base, coupling in self.blocks:
            stack = base[None] + lams[:, None, None] * coupling[None]
            lows.append(np.linalg.eigvalsh(stack)[:, :2])
        e = np.sort(np.concatenate(lows, axis=1), axis=1)
        return e[:, :2]

    def __call__(self, lam) -> np.ndarray:
        e = self.lowest_pairs(np.atleast_1d(lam))
        return e[:, 1] - e[:, 0]


def find_crossings(
    gamma: float,
    n: int,
    lambda_max: float | None = None,
    *,
    step: float = 1e-3,
    zero_tol: float = 1e-6,
    xtol: float = 1e-10,
) -> CrossingReport:
    """Locate the couplings where the two lowest levels of the ring cross.

    Scans the gap on a uniform grid, brackets every local minimum and refines
    it with a bounded scalar minimisation; minima below ``zero_tol`` count as
    crossings.  The default scan range is (n + 2) times the factorization field.
    """
    if lambda_max is None:
        try:
            lambda_max = (n + 2) * factorization_field(gamma)
        except NoFactorization as exc:
            raise NoCrossingFound(f"gamma={gamma}: no factorization field, no crossings") from exc
    ChainSpec(n, ModelPoint(0.0, gamma))
    gap = _GapFunction(n, gamma)
    grid = np.arange(0.0, lambda_max + step / 2, step)
    chunk = max(1, 2**20 // (1 << n) ** 2 * 8)
    gaps = np.concatenate([gap(grid[i : i + chunk]) for i in range(0, len(grid), chunk)])

    crossings, minima = [], []
    interior = np.flatnonzero((gaps[1:-1] <= gaps[:-2]) & (gaps[1:-1] <= gaps[2:])) + 1
    for i in interior:
        if crossings and grid[i] - crossings[-1] < 2 * step:
            continue
        res = minimize_scalar(
            lambda x: float(gap(x)[0]), bounds=(grid[i - 1], grid[i + 1]),
            method="bounded", options={"xatol": xtol},
        )
        if res.fun < zero_tol:
            crossings.append(float(res.x))
            minima.append(float(res.fun))
    if not crossings:
        raise NoCrossingFound(f"no level crossing for n={n}, gamma={gamma} on [0, {lambda_max:g}]")
    return CrossingReport(gamma=gamma, n=n, crossings=crossings, min_gaps=minima)


def pair_states(spectrum: SpectrumResult, temperature: float, separations) -> dict[int, TwoQubitState]:
    """Reduced states of sites (0, r) for each r, sharing one thermal state."""
    rho = thermal_state(spectrum, temperature)
    return {int(r): reduce_to_pair(rho, 0, int(r)) for r in separations}


def ground_parity(spectrum: SpectrumResult, tol: float = 1e-8) -> int:
    """+1/-1 parity of the ground vector, 0 if it is not a parity eigenstate to ``tol``."""
    v = spectrum.states[:, 0]
    p = parity_operator(spectrum.spec.n) if spectrum.spec else None
    if p is None:
        raise ValueError("spectrum carries no ChainSpec")
    for sign in (1, -1):
        if np.linalg.norm(p * v - sign * v) < tol:
            return sign
    return 0


def energy_levels(n: int, gamma: float, lams, levels: int = 4) -> np.ndarray:
    """Lowest ``levels`` energies for each coupling in ``lams`` (rows follow ``lams``)."""
    fld, same, opposite = _hamiltonian_parts(n)
    out = []
    for lam in np.atleast_1d(lams):
        out.append(np.linalg.eigvalsh(fld + lam * gamma * same + lam * opposite)[:levels])
    return np.array(out)


def expected_crossing_count(n: int) -> int:
    """n/2 crossings for even n, (n-1)/2 for odd n."""
    return n // 2


__all__ = [
    "ChainSpec",
    "CrossingReport",
    "SpectrumResult",
    "build_hamiltonian",
    "diagonalize",
    "energy_levels",
    "expected_crossing_count",
    "find_crossings",
    "ground_parity",
    "numerical_rank",
    "pair_states",
    "parity_operator",
    "reduce_to_pair",
    "thermal_state",
]
