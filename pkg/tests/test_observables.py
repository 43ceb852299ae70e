"""Tests of the measurement functionals."""

import numpy as np
import pytest

from cavitybloch.core import (
    GaussianSpec,
    InternalState,
    InvalidParameterError,
    ScaledParams,
    SpatialGrid,
    SpinorWavefunction,
    gaussian_profile,
)
from cavitybloch.observables import (
    MomentumWindow,
    center_of_mass,
    densities,
    inversion,
    momentum_window_probability,
)
from cavitybloch.spectrum import bare_gaussian, dressed_gaussian

GRID = SpatialGrid(16, 512)


def test_inversion_pure_states():
    st = bare_gaussian(0.0, 50.0, InternalState.MINUS, GRID)
    assert inversion(st) == pytest.approx(-1.0, abs=1e-12)
    st = bare_gaussian(0.0, 50.0, InternalState.PLUS, GRID)
    assert inversion(st) == pytest.approx(1.0, abs=1e-12)


def test_inversion_balanced_superposition():
    chi = gaussian_profile(GaussianSpec(0.0, 50.0), GRID) / np.sqrt(2)
    st = SpinorWavefunction(GRID, chi.copy(), chi.copy())
    assert inversion(st) == pytest.approx(0.0, abs=1e-12)


def test_center_of_mass_displaced_gaussian():
    x0 = 4 * np.pi
    chi = gaussian_profile(GaussianSpec(0.0, 9.0, x0=x0), GRID)
    st = SpinorWavefunction(GRID, np.zeros_like(chi), chi)
    assert center_of_mass(st) == pytest.approx(x0, abs=1e-8)
    st0 = bare_gaussian(0.0, 9.0, InternalState.MINUS, GRID)
    assert center_of_mass(st0) == pytest.approx(0.0, abs=1e-10)


def test_center_of_mass_warns_on_boundary_wrap():
    chi = gaussian_profile(GaussianSpec(0.0, 9.0, x0=GRID.x[0] + 1.0), GRID,
                           truncation_tol=1.0)
    st = SpinorWavefunction(GRID, np.zeros_like(chi), chi / np.linalg.norm(chi))
    with pytest.warns(RuntimeWarning):
        center_of_mass(st)


def test_densities_normalisation():
    st = bare_gaussian(0.3, 50.0, InternalState.PLUS, GRID)
    (dp, dm), (p, mp, mm) = densities(st)
    assert (dp.sum() + dm.sum()) * GRID.dx == pytest.approx(1.0, abs=1e-10)
    assert (mp.sum() + mm.sum()) * GRID.dp == pytest.approx(1.0, abs=1e-10)


def test_momentum_window_wrong_component_empty():
    st = bare_gaussian(0.0, 50.0, InternalState.MINUS, GRID)
    w = MomentumWindow(InternalState.PLUS, -1.0, 1.0)
    assert momentum_window_probability(st, w) == pytest.approx(0.0, abs=1e-14)


def test_momentum_windows_partition_to_one():
    chi = gaussian_profile(GaussianSpec(0.2, 20.0), GRID) / np.sqrt(2)
    st = SpinorWavefunction(GRID, chi.copy(), chi.copy())
    edges = np.linspace(-GRID.p_max, GRID.p_max, 9)
    total = 0.0
    for internal in InternalState:
        for lo, hi in zip(edges[:-1], edges[1:]):
            total += momentum_window_probability(
                st, MomentumWindow(internal, lo, hi))
    assert total == pytest.approx(1.0, abs=1e-10)


def test_momentum_window_additive_over_disjoint_parts():
    st = bare_gaussian(0.1, 20.0, InternalState.MINUS, GRID)
    w_full = MomentumWindow(InternalState.MINUS, -0.5, 0.7)
    w_a = MomentumWindow(InternalState.MINUS, -0.5, 0.1)
    w_b = MomentumWindow(InternalState.MINUS, 0.1, 0.7)
    assert momentum_window_probability(st, w_full) == pytest.approx(
        momentum_window_probability(st, w_a)
        + momentum_window_probability(st, w_b), abs=1e-12)


def test_momentum_window_outside_grid_rejected():
    st = bare_gaussian(0.0, 50.0, InternalState.MINUS, GRID)
    with pytest.raises(InvalidParameterError):
        momentum_window_probability(
            st, MomentumWindow(InternalState.MINUS, 100.0, 101.0))
    with pytest.raises(InvalidParameterError):
        MomentumWindow(InternalState.MINUS, 1.0, -1.0)


def test_momentum_density_respects_frame_offset():
    st = bare_gaussian(0.0, 50.0, InternalState.MINUS, GRID)
    st.p_offset = 0.25
    _, (p, _, dm) = None, densities(st)[1]
    assert p[np.argmax(dm)] == pytest.approx(0.25, abs=GRID.dp)
    w = MomentumWindow(InternalState.MINUS, 0.25 - 0.2, 0.25 + 0.2)
    assert momentum_window_probability(st, w) > 0.99


def test_dressed_inversion_between_bounds():
    st = dressed_gaussian(ScaledParams(v0=0.6, delta0=0.3), nu=2, k0=0.4,
                          width_x2=50.0, grid=GRID)
    assert -1.0 <= inversion(st) <= 1.0
