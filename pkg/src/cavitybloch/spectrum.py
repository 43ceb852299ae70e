"""Plane-wave band structure of the standing-wave coupling.

At fixed quasi momentum k the Hamiltonian restricted to one excitation
manifold is a tridiagonal matrix over the momentum ladder k+mu,
|mu| <= M: diagonal entries (k+mu)^2 + s_mu*delta/2 with s_mu = +1 for
odd mu (upper internal state) and -1 for even mu, off-diagonal
couplings v0/2 between neighbouring mu.  Diagonalising it yields the
band energies E_nu(k) and the dressed-state coefficients c_nu^mu(k).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import (
    GaussianSpec,
    GridError,
    InternalState,
    InvalidParameterError,
    ScaledParams,
    SpatialGrid,
    SpinorWavefunction,
    gaussian_profile,
)

DEFAULT_M = 12


class TruncationError(ValueError):
    """The plane-wave truncation cannot support the request."""


def mu_range(m: int) -> np.ndarray:
    return np.arange(-m, m + 1)


def parity_sign(mu: np.ndarray | int) -> np.ndarray | int:
    """Detuning sign of ladder state mu: +1 for odd mu, -1 for even."""
    return np.where(np.asarray(mu) % 2 == 0, -1, 1)


def _bloch_matrices(k: np.ndarray, v0: float, delta: float, m: int,
                    manifold: int = -1) -> np.ndarray:
    """Stack of plane-wave Hamiltonians, one per quasi momentum.

    manifold=-1 is the set seeded by the lower internal state (even mu
    <-> MINUS); manifold=+1 flips the parity assignment.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    mu = mu_range(m)
    dim = 2 * m + 1
    sign = np.where(mu % 2 == 0, manifold, -manifold)
    h = np.zeros((k.size, dim, dim))
    diag = (k[:, None] + mu[None, :]) ** 2 + sign[None, :] * delta / 2.0
    idx = np.arange(dim)
    h[:, idx, idx] = diag
    h[:, idx[:-1], idx[:-1] + 1] = v0 / 2.0
    h[:, idx[:-1] + 1, idx[:-1]] = v0 / 2.0
    return h


def build_bloch_matrix(k: float, params: ScaledParams, m: int = DEFAULT_M,
                       t: float = 0.0) -> np.ndarray:
    """Plane-wave Hamiltonian at quasi momentum k, basis mu = -m..m.

    For time-dependent schedules the instantaneous detuning/coupling at
    time t are used.
    """
    if m < 1:
        raise TruncationError("plane-wave truncation requires m >= 1")
    if not -1.0 < k <= 1.0:
        raise InvalidParameterError("quasi momentum must lie in (-1, 1]")
    if params.n < 1:
        raise InvalidParameterError(
            "the excitation manifold requires at least one photon (n >= 1)")
    return _bloch_matrices(np.array([k]), params.coupling(t), params.delta(t), m)[0]


@dataclass(frozen=True)
class BandSolution:
    """Eigenvalues and dressed coefficients at one quasi momentum.

    energies are sorted ascending (band index nu = 1, 2, ... maps to
    column nu-1 of coefficients); coefficients[i, nu-1] is c_nu^mu with
    mu = mus[i].  The phase of each eigenvector is fixed so that its
    largest-magnitude entry is real and positive.
    """

    k: float
    energies: np.ndarray
    coefficients: np.ndarray
    mus: np.ndarray

    def coefficient(self, nu: int, mu: int) -> complex:
        return self.coefficients[mu + (len(self.mus) - 1) // 2, nu - 1]


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Rotate each eigenvector so its largest entry is real positive."""
    lead = np.argmax(np.abs(vecs), axis=-2)
    cols = np.take_along_axis(vecs, lead[..., None, :], axis=-2)[..., 0, :]
    phase = np.where(np.abs(cols) > 0, cols / np.where(np.abs(cols) > 0, np.abs(cols), 1.0), 1.0)
    return vecs * np.conj(phase)[..., None, :]


def solve_bands(k: float, params: ScaledParams, m: int = DEFAULT_M,
                t: float = 0.0) -> BandSolution:
    """Diagonalise the plane-wave Hamiltonian at quasi momentum k."""
    h = build_bloch_matrix(k, params, m, t)
    energies, vecs = np.linalg.eigh(h)
    return BandSolution(k=k, energies=energies, coefficients=_fix_phases(vecs),
                        mus=mu_range(m))


def _solve_bands_stack(k: np.ndarray, v0: float, delta: float, m: int):
    """Batched eigendecomposition over an array of quasi momenta."""
    h = _bloch_matrices(k, v0, delta, m)
    energies, vecs = np.linalg.eigh(h)
    return energies, _fix_phases(vecs)


@dataclass(frozen=True)
class DispersionTable:
    """Band energies sampled on a quasi-momentum grid."""

    k: np.ndarray
    energies: np.ndarray            # shape (len(k), nu_max)
    params: ScaledParams

    @property
    def nu_max(self) -> int:
        return self.energies.shape[1]

    def band(self, nu: int) -> np.ndarray:
        return self.energies[:, nu - 1]


def dispersion(params: ScaledParams, k_grid: np.ndarray, nu_max: int = 5,
               m: int = DEFAULT_M, t: float = 0.0) -> DispersionTable:
    """Tabulate the lowest nu_max bands over a quasi-momentum grid."""
    if nu_max > 2 * m + 1:
        raise TruncationError(f"nu_max={nu_max} exceeds basis size {2*m+1}")
    k_grid = np.asarray(k_grid, dtype=float)
    if np.any(k_grid <= -1.0) or np.any(k_grid > 1.0):
        raise InvalidParameterError("k grid must lie in (-1, 1]")
    energies, _ = _solve_bands_stack(k_grid, params.coupling(t), params.delta(t), m)
    return DispersionTable(k=k_grid, energies=energies[:, :nu_max], params=params)


def effective_parameters(params: ScaledParams, nu: int, k0: float,
                         m: int = DEFAULT_M, h: float = 1e-4) -> tuple[float, float]:
    """Group velocity and inverse effective mass of band nu at k0.

    Central finite differences of E_nu(k); warns when k0 sits close to
    a band degeneracy where the derivatives are ill conditioned.
    """
    ks = np.array([k0 - h, k0, k0 + h])
    energies, _ = _solve_bands_stack(ks, params.v0, params.delta0, m)
    e = energies[:, nu - 1]
    gaps = []
    if nu > 1:
        gaps.append(np.min(energies[:, nu - 1] - energies[:, nu - 2]))
    if nu < energies.shape[1]:
        gaps.append(np.min(energies[:, nu] - energies[:, nu - 1]))
    if gaps and min(gaps) < 10.0 * h:
        warnings.warn(f"band {nu} nearly degenerate near k={k0}; "
                      "finite differences are ill conditioned", RuntimeWarning)
    v_g = (e[2] - e[0]) / (2.0 * h)
    m2_inv = (e[2] - 2.0 * e[1] + e[0]) / h**2
    return float(v_g), float(m2_inv)


# ---------------------------------------------------------------------------
# bare-curve crossings


@dataclass(frozen=True)
class Crossing:
    """Intersection point of bare dispersion curves."""

    k: float
    energy: float
    mus: tuple[int, ...]
    kind: str                   # "bragg" | "doppleron" | "triple"


def _bare_energy(k: float, mu: int, delta: float) -> float:
    return (k + mu) ** 2 + (1 if mu % 2 else -1) * delta / 2.0


def classify_crossings(delta: float, mu_max: int = 4,
                       tol: float = 1e-9) -> list[Crossing]:
    """Enumerate bare-curve intersections within the closed zone [-1, 1].

    Pairwise intersections are solved in closed form and clustered by
    (k, E); a cluster of two same-parity curves is a Bragg resonance,
    two opposite-parity curves a Doppleron, and three or more
    coinciding curves a triple crossing.
    """
    points: dict[tuple[float, float], tuple[float, float, set[int]]] = {}
    mus = mu_range(mu_max)
    for i, mu1 in enumerate(mus):
        for mu2 in mus[i + 1:]:
            s1 = 1 if mu1 % 2 else -1
            s2 = 1 if mu2 % 2 else -1
            # (k+mu1)^2 - (k+mu2)^2 = (s2 - s1) delta / 2
            rhs = (s2 - s1) * delta / 2.0
            k_c = (rhs / (mu1 - mu2) - (mu1 + mu2)) / 2.0
            if not -1.0 - tol <= k_c <= 1.0 + tol:
                continue
            k_c = float(np.clip(k_c, -1.0, 1.0))
            e_c = _bare_energy(k_c, int(mu1), delta)
            key = (round(k_c / tol), round(e_c / tol))
            _, _, mu_set = points.setdefault(key, (k_c, e_c, set()))
            mu_set.update((int(mu1), int(mu2)))
    crossings = []
    for _, (k_c, e_c, mu_set) in sorted(points.items()):
        parities = {mu % 2 for mu in mu_set}
        if len(mu_set) >= 3:
            kind = "triple"
        elif len(parities) == 1:
            kind = "bragg"
        else:
            kind = "doppleron"
        crossings.append(Crossing(k=k_c, energy=e_c,
                                  mus=tuple(sorted(mu_set)), kind=kind))
    return crossings


def crossing_gap(params: ScaledParams, crossing: Crossing,
                 m: int = DEFAULT_M) -> float:
    """Dressed-band splitting at a crossing point (smallest local gap)."""
    sol = solve_bands(crossing.k if crossing.k > -1.0 else 1.0, params, m)
    diffs = np.abs(sol.energies - crossing.energy)
    order = np.argsort(diffs)
    lo, hi = sorted(sol.energies[order[:2]])
    return float(hi - lo)


# ---------------------------------------------------------------------------
# Bloch decomposition of grid states

_FFT_NORM_TOL = 1e-9


def _momentum_amplitudes(state: SpinorWavefunction):
    """Continuum-normalised momentum amplitudes on the grid bins."""
    scale = state.grid.dx / np.sqrt(2.0 * np.pi) * state.grid.fft_sign
    return (np.fft.fft(state.psi_plus) * scale,
            np.fft.fft(state.psi_minus) * scale)


def _quasi_layout(grid: SpatialGrid, p_offset: float):
    """Mapping between momentum bins and (quasi momentum, ladder) labels.

    Returns the group index of every bin for each internal component,
    the quasi momentum of every group (in [-1, 1)) and the ladder
    offset mu of every bin.
    """
    n_cells = grid.n_cells
    n_groups = 2 * n_cells
    jt = np.rint(grid.p / grid.dp).astype(int)
    g_minus = jt % n_groups
    g_plus = (jt - n_cells) % n_groups
    k_red = ((grid.dp * np.arange(n_groups) + p_offset + 1.0) % 2.0) - 1.0
    mu_minus = np.rint(grid.p + p_offset - k_red[g_minus]).astype(int)
    mu_plus = np.rint(grid.p + p_offset - k_red[g_plus]).astype(int)
    return g_minus, g_plus, k_red, mu_minus, mu_plus


def quasimomentum_distribution(state: SpinorWavefunction):
    """Weight of the state in each quasi-momentum bin of the zone.

    Returns (k values sorted ascending in [-1, 1), weights summing to
    the squared norm).
    """
    psit_p, psit_m = _momentum_amplitudes(state)
    g_minus, g_plus, k_red, _, _ = _quasi_layout(state.grid, state.p_offset)
    w = np.bincount(g_minus, weights=np.abs(psit_m) ** 2, minlength=k_red.size)
    w += np.bincount(g_plus, weights=np.abs(psit_p) ** 2, minlength=k_red.size)
    order = np.argsort(k_red)
    return k_red[order], w[order] * state.grid.dp


def _bloch_amplitudes(state: SpinorWavefunction, m: int):
    """Amplitude matrix A[group, mu+m] of the state in the bare basis."""
    psit_p, psit_m = _momentum_amplitudes(state)
    g_minus, g_plus, k_red, mu_minus, mu_plus = _quasi_layout(state.grid, state.p_offset)
    a = np.zeros((k_red.size, 2 * m + 1), dtype=complex)
    mask_m = np.abs(mu_minus) <= m
    mask_p = np.abs(mu_plus) <= m
    a[g_minus[mask_m], mu_minus[mask_m] + m] = psit_m[mask_m]
    a[g_plus[mask_p], mu_plus[mask_p] + m] = psit_p[mask_p]
    return a, k_red


def band_populations(state: SpinorWavefunction, params: ScaledParams,
                     nu_list: tuple[int, ...] = (1, 2, 3), m: int = DEFAULT_M,
                     t: float | None = None,
                     weight_floor: float = 1e-14) -> np.ndarray:
    """Populations of the requested bands, integrated over the zone.

    The state is expanded in the bare ladder at each occupied quasi
    momentum and projected on the dressed eigenvectors there.
    """
    a, k_red = _bloch_amplitudes(state, m)
    weights = np.sum(np.abs(a) ** 2, axis=1)
    active = weights > weight_floor * max(weights.max(), 1e-300)
    if not np.any(active):
        return np.zeros(len(nu_list))
    tt = state.t if t is None else t
    _, vecs = _solve_bands_stack(k_red[active], params.coupling(tt),
                                 params.delta(tt), m)
    b = np.einsum("gij,gi->gj", np.conj(vecs), a[active])
    pops = np.sum(np.abs(b) ** 2, axis=0) * state.grid.dp
    return np.array([pops[nu - 1] for nu in nu_list])


def project_band(state: SpinorWavefunction, params: ScaledParams, nu: int,
                 m: int = DEFAULT_M) -> float:
    """Probability of finding the state in band nu."""
    return float(band_populations(state, params, (nu,), m)[0])


# ---------------------------------------------------------------------------
# packet construction


def bare_gaussian(k0: float, width_x2: float, internal: InternalState,
                  grid: SpatialGrid, x0: float = 0.0) -> SpinorWavefunction:
    """Gaussian packet with mean momentum k0 in a single internal state."""
    spec = GaussianSpec(k0=k0, width_x2=width_x2, x0=x0)
    if spec.width_k2 >= 1.0:
        raise InvalidParameterError("momentum spread exceeds the Brillouin zone")
    chi = gaussian_profile(spec, grid)
    zero = np.zeros_like(chi)
    if internal is InternalState.PLUS:
        return SpinorWavefunction(grid, chi, zero)
    return SpinorWavefunction(grid, zero, chi)


def dressed_gaussian(params: ScaledParams, nu: int, k0: float, width_x2: float,
                     grid: SpatialGrid, m: int = DEFAULT_M) -> SpinorWavefunction:
    """Gaussian superposition of band-nu dressed states centred at k0.

    The quasi-momentum envelope is a Gaussian of variance 1/(4 width_x2)
    whose support must fit well inside one zone.
    """
    width_k2 = 0.25 / width_x2
    if 6.0 * np.sqrt(width_k2) >= 1.0:
        raise InvalidParameterError(
            "quasi-momentum envelope does not fit inside one Brillouin zone")
    g_minus, g_plus, k_red, mu_minus, mu_plus = _quasi_layout(grid, 0.0)
    dk_wrapped = ((k_red - k0 + 1.0) % 2.0) - 1.0
    phi = np.exp(-dk_wrapped**2 / (4.0 * width_k2))
    active = phi > 1e-12
    _, vecs = _solve_bands_stack(k_red[active], params.v0, params.delta0, m)
    a = np.zeros((k_red.size, 2 * m + 1), dtype=complex)
    a[active] = phi[active, None] * vecs[:, :, nu - 1]
    psit_m = np.zeros(grid.n_points, dtype=complex)
    psit_p = np.zeros(grid.n_points, dtype=complex)
    mask_m = np.abs(mu_minus) <= m
    mask_p = np.abs(mu_plus) <= m
    psit_m[mask_m] = a[g_minus[mask_m], mu_minus[mask_m] + m]
    psit_p[mask_p] = a[g_plus[mask_p], mu_plus[mask_p] + m]
    scale = grid.dx / np.sqrt(2.0 * np.pi) * grid.fft_sign
    state = SpinorWavefunction(grid,
                               np.fft.ifft(psit_p / scale),
                               np.fft.ifft(psit_m / scale))
    nrm = state.norm()
    if nrm == 0.0:
        raise GridError("dressed packet has no support on this grid")
    state.psi_plus /= nrm
    state.psi_minus /= nrm
    return state
