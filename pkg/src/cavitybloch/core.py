"""Scaled units, internal-state bookkeeping, grids and Gaussian packets.

Everything downstream works in recoil units: the photon recoil energy
E_R = hbar^2 q^2 / 2m sets the energy scale, 1/q the length scale and
hbar/E_R the time scale.  In these units the Hamiltonian of the coupled
atom-mode system (restricted to one excitation manifold) reads

    H = p^2 + (delta/2) sigma_z + V0 cos(x) sigma_x  [+ F x]

with a standing-wave period of 2*pi and the first Brillouin zone
-1 < k <= 1.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import hbar as HBAR


class InvalidParameterError(ValueError):
    """A physical or scaled parameter violates its constraints."""


class GridError(ValueError):
    """The spatial grid cannot represent the requested state."""


class InternalState(enum.Enum):
    """Internal label of the excitation doublet.

    PLUS is the atom in its upper state with one photon absorbed,
    MINUS the lower state with the photon still in the mode.  sigma_z
    is +1 on PLUS and -1 on MINUS.
    """

    PLUS = +1
    MINUS = -1

    @property
    def sigma_z(self) -> int:
        return self.value


def bare_internal_state(mu: int) -> InternalState:
    """Internal state of the bare ladder state with momentum offset mu.

    The manifold seeded by the lower internal state alternates: even
    photon-exchange counts return to MINUS, odd ones sit in PLUS.
    """
    return InternalState.MINUS if mu % 2 == 0 else InternalState.PLUS


@dataclass(frozen=True)
class PhysicalParams:
    """Laboratory-frame parameters (SI units)."""

    atomic_mass: float        # kg
    wavenumber: float         # 1/m
    coupling: float           # single-photon coupling g0, rad/s
    detuning: float = 0.0     # rad/s, any sign
    force: float = 0.0        # N, any sign

    def __post_init__(self):
        if self.atomic_mass <= 0:
            raise InvalidParameterError("atomic mass must be positive")
        if self.wavenumber <= 0:
            raise InvalidParameterError("wavenumber must be positive")
        if self.coupling < 0:
            raise InvalidParameterError("coupling must be nonnegative")


@dataclass(frozen=True)
class ScaledParams:
    """Dimensionless model parameters in recoil units.

    v0 is the full effective coupling amplitude, i.e. the off-diagonal
    matrix elements of the plane-wave Hamiltonian are v0/2.  Any
    photon-number factor from a Fock state is assumed to be absorbed
    into v0; n is kept only for bookkeeping.
    """

    v0: float
    delta0: float = 0.0
    force: float = 0.0
    n: int = 1
    kappa: float = 0.0          # coupling decay rate, v(t) = v0 exp(-kappa t)
    omega: float = 0.0          # chirp frequency for delta(t) = delta0 cos(omega t)
    chirped: bool = False

    def __post_init__(self):
        if self.v0 < 0:
            raise InvalidParameterError("v0 must be nonnegative")
        if self.n < 0 or self.n != int(self.n):
            raise InvalidParameterError("photon number must be a nonnegative integer")
        if self.kappa < 0:
            raise InvalidParameterError("kappa must be nonnegative")
        if self.omega < 0:
            raise InvalidParameterError("omega must be nonnegative")

    def delta(self, t: float | np.ndarray = 0.0):
        """Detuning at scaled time t."""
        if self.chirped:
            return self.delta0 * np.cos(self.omega * np.asarray(t, dtype=float))
        return self.delta0 if np.isscalar(t) else np.full_like(np.asarray(t, float), self.delta0)

    def coupling(self, t: float | np.ndarray = 0.0):
        """Effective coupling amplitude at scaled time t."""
        if self.kappa == 0.0:
            return self.v0 if np.isscalar(t) else np.full_like(np.asarray(t, float), self.v0)
        return self.v0 * np.exp(-self.kappa * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class ScaleFactors:
    """Conversion constants between SI and recoil units."""

    recoil_energy: float      # J
    time_unit: float          # s, one scaled time unit
    length_unit: float        # m, one scaled length unit (1/q)


def scale_parameters(p: PhysicalParams) -> tuple[ScaledParams, ScaleFactors]:
    """Convert laboratory parameters to recoil units.

    Returns the dimensionless parameters together with the scale
    factors (recoil energy in J, the time unit hbar/E_R in s and the
    length unit 1/q in m) for reporting.
    """
    e_r = HBAR**2 * p.wavenumber**2 / (2.0 * p.atomic_mass)
    scaled = ScaledParams(
        v0=2.0 * HBAR * p.coupling / e_r,
        delta0=HBAR * p.detuning / e_r,
        force=p.force / (p.wavenumber * e_r),
    )
    factors = ScaleFactors(
        recoil_energy=e_r,
        time_unit=HBAR / e_r,
        length_unit=1.0 / p.wavenumber,
    )
    return scaled, factors


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform periodic grid over n_cells standing-wave periods.

    The extent is L = 2*pi*n_cells with n_points samples (a power of
    two for the spectral transforms), centred on x = 0 so that packets
    start on a field antinode.
    """

    n_cells: int
    n_points: int
    x: np.ndarray = field(init=False, repr=False, compare=False)
    p: np.ndarray = field(init=False, repr=False, compare=False)
    fft_sign: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_points <= 0 or self.n_points & (self.n_points - 1):
            raise GridError("n_points must be a power of two")
        if self.n_cells <= 0:
            raise GridError("n_cells must be positive")
        length = 2.0 * np.pi * self.n_cells
        dx = length / self.n_points
        object.__setattr__(self, "x", (np.arange(self.n_points) - self.n_points // 2) * dx)
        object.__setattr__(self, "p", 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=dx))
        # x starts at -L/2, so the plane-wave amplitude of bin j carries a
        # phase exp(i p_j L/2) = (-1)^j relative to a plain FFT
        signs = np.where(np.arange(self.n_points) % 2 == 0, 1.0, -1.0)
        object.__setattr__(self, "fft_sign", signs)

    @property
    def length(self) -> float:
        return 2.0 * np.pi * self.n_cells

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @property
    def dp(self) -> float:
        return 1.0 / self.n_cells

    @property
    def p_max(self) -> float:
        return np.pi / self.dx


@dataclass
class SpinorWavefunction:
    """Two-component wave function on a spatial grid.

    psi_plus / psi_minus are the PLUS / MINUS amplitudes.  p_offset is
    the shift between grid momenta and physical momenta; it is zero in
    the laboratory frame and -F*t in the accelerated frame used to
    absorb a linear force.
    """

    grid: SpatialGrid
    psi_plus: np.ndarray
    psi_minus: np.ndarray
    t: float = 0.0
    p_offset: float = 0.0

    def copy(self) -> "SpinorWavefunction":
        return SpinorWavefunction(self.grid, self.psi_plus.copy(),
                                  self.psi_minus.copy(), self.t, self.p_offset)

    def norm(self) -> float:
        dens = np.abs(self.psi_plus) ** 2 + np.abs(self.psi_minus) ** 2
        return float(np.sqrt(np.sum(dens) * self.grid.dx))

    def components(self, internal: InternalState) -> np.ndarray:
        return self.psi_plus if internal is InternalState.PLUS else self.psi_minus


@dataclass(frozen=True)
class GaussianSpec:
    """Description of a Gaussian packet: centre momentum and x-variance."""

    k0: float
    width_x2: float
    x0: float = 0.0

    def __post_init__(self):
        if self.width_x2 <= 0:
            raise InvalidParameterError("width_x2 must be positive")
        if not -1.0 < self.k0 <= 1.0:
            raise InvalidParameterError("k0 must lie in the first Brillouin zone (-1, 1]")

    @property
    def width_k2(self) -> float:
        """Momentum-space variance, 1/(4 width_x2)."""
        return 0.25 / self.width_x2


def gaussian_profile(spec: GaussianSpec, grid: SpatialGrid,
                     truncation_tol: float = 1e-8) -> np.ndarray:
    """Normalised Gaussian profile exp(-(x-x0)^2/4w + i k0 x) on the grid.

    Raises GridError when the grid truncates more than truncation_tol
    of the continuum norm (the packet does not fit).
    """
    x = grid.x - spec.x0
    chi = (2.0 * np.pi * spec.width_x2) ** -0.25 * np.exp(
        -x**2 / (4.0 * spec.width_x2) + 1j * spec.k0 * grid.x)
    raw_norm = np.sum(np.abs(chi) ** 2) * grid.dx
    if abs(raw_norm - 1.0) > truncation_tol:
        raise GridError(
            f"grid truncates {abs(raw_norm - 1.0):.2e} of the packet norm "
            f"(> {truncation_tol:.0e}); enlarge the grid")
    return chi / np.sqrt(raw_norm)
