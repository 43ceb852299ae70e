"""Measurement functionals on spinor states."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import InternalState, InvalidParameterError, SpinorWavefunction


def inversion(state: SpinorWavefunction) -> float:
    """Population difference <sigma_z> between the internal states."""
    dx = state.grid.dx
    p_plus = np.sum(np.abs(state.psi_plus) ** 2) * dx
    p_minus = np.sum(np.abs(state.psi_minus) ** 2) * dx
    return float(p_plus - p_minus)


def center_of_mass(state: SpinorWavefunction, edge_tol: float = 1e-6) -> float:
    """Mean position of the total density.

    Warns when the density touches the grid boundary, where the
    periodic wrap makes <x> meaningless.
    """
    dens = np.abs(state.psi_plus) ** 2 + np.abs(state.psi_minus) ** 2
    edge = max(dens[0], dens[-1]) * state.grid.dx
    if edge > edge_tol:
        warnings.warn("density reaches the grid boundary; <x> may wrap",
                      RuntimeWarning)
    return float(np.sum(state.grid.x * dens) * state.grid.dx)


def position_densities(state: SpinorWavefunction):
    """|psi_plus|^2 and |psi_minus|^2 on the spatial grid."""
    return np.abs(state.psi_plus) ** 2, np.abs(state.psi_minus) ** 2


def momentum_densities(state: SpinorWavefunction):
    """Momentum axis (sorted) and the two momentum densities on it.

    The axis is the physical momentum, i.e. the grid momenta shifted by
    the state's frame offset.
    """
    dx = state.grid.dx
    scale = dx / np.sqrt(2.0 * np.pi)
    dens_p = np.abs(np.fft.fft(state.psi_plus) * scale) ** 2
    dens_m = np.abs(np.fft.fft(state.psi_minus) * scale) ** 2
    p = state.grid.p + state.p_offset
    order = np.argsort(p)
    return p[order], dens_p[order], dens_m[order]


def densities(state: SpinorWavefunction):
    """Position and momentum densities of both components.

    Returns ((|psi_+|^2, |psi_-|^2), (p axis, |psit_+|^2, |psit_-|^2)).
    """
    return position_densities(state), momentum_densities(state)


@dataclass(frozen=True)
class MomentumWindow:
    """Half-open momentum window [p_lo, p_hi) on one internal component."""

    internal: InternalState
    p_lo: float
    p_hi: float

    def __post_init__(self):
        if not self.p_lo < self.p_hi:
            raise InvalidParameterError("window requires p_lo < p_hi")


def momentum_window_probability(state: SpinorWavefunction,
                                window: MomentumWindow) -> float:
    """Probability of the chosen component inside [p_lo, p_hi).

    Momentum bins are counted when their centre falls in the half-open
    window (left-closed convention).
    """
    p = state.grid.p + state.p_offset
    p_min, p_max = p.min(), p.max() + state.grid.dp
    if window.p_hi <= p_min or window.p_lo > p_max:
        raise InvalidParameterError(
            f"window [{window.p_lo}, {window.p_hi}) lies outside the grid "
            f"momentum range [{p_min:.3f}, {p_max:.3f})")
    psi = state.components(window.internal)
    dens = np.abs(np.fft.fft(psi) * state.grid.dx / np.sqrt(2.0 * np.pi)) ** 2
    mask = (p >= window.p_lo) & (p < window.p_hi)
    return float(np.sum(dens[mask]) * state.grid.dp)
