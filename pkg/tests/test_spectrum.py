"""Band-structure tests: matrix elements, eigenstructure, crossings, packets."""

import numpy as np
import pytest

from cavitybloch.core import InternalState, InvalidParameterError, ScaledParams, SpatialGrid
from cavitybloch.spectrum import (
    TruncationError,
    _bloch_matrices,
    band_populations,
    bare_gaussian,
    build_bloch_matrix,
    classify_crossings,
    dispersion,
    dressed_gaussian,
    effective_parameters,
    project_band,
    solve_bands,
)

P02 = ScaledParams(v0=0.2)


def test_matrix_m1_example():
    h = build_bloch_matrix(0.0, P02, m=1)
    assert np.allclose(np.diag(h), [1.0, 0.0, 1.0])
    assert h[0, 1] == h[1, 2] == pytest.approx(0.1)
    assert h[0, 2] == 0.0


def test_matrix_zero_coupling_is_diagonal():
    h = build_bloch_matrix(0.3, ScaledParams(v0=0.0, delta0=0.4), m=3)
    assert np.allclose(h, np.diag(np.diag(h)))


def test_matrix_detuning_sign_on_even_mu():
    h = build_bloch_matrix(0.5, ScaledParams(v0=0.2, delta0=0.7), m=2)
    # centre entry is mu=0: (0.5)^2 - 0.7/2
    assert h[2, 2] == pytest.approx(0.25 - 0.35)
    # odd mu carries +delta/2
    assert h[3, 3] == pytest.approx((0.5 + 1) ** 2 + 0.35)


def test_matrix_is_hermitian():
    h = build_bloch_matrix(0.3, ScaledParams(v0=0.7, delta0=-1.3), m=8)
    assert np.array_equal(h, h.T.conj())


def test_truncation_error():
    with pytest.raises(TruncationError):
        build_bloch_matrix(0.0, P02, m=0)
    with pytest.raises(TruncationError):
        dispersion(P02, np.array([0.0]), nu_max=10, m=3)


def test_manifold_requires_a_photon():
    with pytest.raises(InvalidParameterError):
        build_bloch_matrix(0.0, ScaledParams(v0=0.2, n=0), m=4)


def test_solve_bands_m1_eigenvalues():
    sol = solve_bands(0.0, P02, m=1)
    expected = [(1 - np.sqrt(1.08)) / 2, 1.0, (1 + np.sqrt(1.08)) / 2]
    assert np.allclose(sol.energies, expected, atol=1e-12)


def test_solve_bands_zero_coupling_permutation():
    sol = solve_bands(0.3, ScaledParams(v0=0.0, delta0=0.0), m=4)
    mus = np.arange(-4, 5)
    assert np.allclose(sol.energies, np.sort((0.3 + mus) ** 2))
    # eigenvector matrix is a permutation
    assert np.allclose(np.abs(sol.coefficients) @ np.abs(sol.coefficients).T,
                       np.eye(9), atol=1e-12)


def test_coefficients_unitary_and_phase_fixed():
    for k in (-0.7, 0.0, 0.31, 1.0):
        sol = solve_bands(k, ScaledParams(v0=0.8, delta0=0.7), m=10)
        c = sol.coefficients
        assert np.linalg.norm(c @ c.conj().T - np.eye(c.shape[0])) < 1e-10
        lead = np.argmax(np.abs(c), axis=0)
        vals = c[lead, np.arange(c.shape[1])]
        assert np.all(vals.real > 0)
        assert np.allclose(vals.imag, 0.0, atol=1e-12)


def test_zone_periodicity_with_ladder_shift():
    # E(k) equals E(k - 2) once mu is relabelled by two; with equal
    # truncation the low bands agree to rounding
    p = ScaledParams(v0=0.5, delta0=0.3)
    a = solve_bands(0.4, p, m=14).energies[:5]
    h = _bloch_matrices(np.array([0.4 - 2.0]), p.v0, p.delta0, 16)[0]
    b = np.sort(np.linalg.eigvalsh(h))[:5]
    assert np.allclose(a, b, atol=1e-10)


def test_manifold_spectra_degenerate_at_zero_detuning():
    k = 0.37
    h_minus = _bloch_matrices(np.array([k]), 0.6, 0.0, 10, manifold=-1)[0]
    h_plus = _bloch_matrices(np.array([k]), 0.6, 0.0, 10, manifold=+1)[0]
    e1 = np.linalg.eigvalsh(h_minus)
    e2 = np.linalg.eigvalsh(h_plus)
    assert np.allclose(e1, e2, atol=1e-10)


def test_truncation_convergence():
    p = ScaledParams(v0=1.0, delta0=0.7)
    for k in (0.0, 0.5, 1.0):
        e8 = solve_bands(k, p, m=8).energies[:5]
        e10 = solve_bands(k, p, m=10).energies[:5]
        assert np.max(np.abs(e8 - e10)) < 1e-10


def _scalar_bands(q, v0, n_basis=16):
    """Independent scalar solver for p^2 + v0*cos(x), quasi momentum q."""
    ms = np.arange(-n_basis, n_basis + 1)
    h = np.diag((q + ms) ** 2.0)
    idx = np.arange(len(ms) - 1)
    h[idx, idx + 1] = v0 / 2.0
    h[idx + 1, idx] = v0 / 2.0
    return np.sort(np.linalg.eigvalsh(h))


def test_zero_detuning_matches_scalar_problem():
    # the coupled problem at delta=0 separates into p^2 +- v0 cos x
    for v0 in (0.2, 0.5):
        for k in (-0.6, 0.25, 1.0):
            spinor = solve_bands(k, ScaledParams(v0=v0), m=14).energies[:6]
            q = ((k + 0.5) % 1.0) - 0.5
            plus = _scalar_bands(q, v0)[:6]
            minus = _scalar_bands(q, -v0)[:6]
            assert np.max(np.abs(spinor - plus)) < 1e-8
            assert np.max(np.abs(spinor - minus)) < 1e-8


def test_dispersion_shapes_and_order():
    k = np.linspace(-0.99, 1.0, 41)
    table = dispersion(P02, k, nu_max=4)
    assert table.energies.shape == (41, 4)
    assert np.all(np.diff(table.energies, axis=1) >= 0)


def test_dispersion_gap_at_half_k_zero_detuning():
    k = np.linspace(-0.999, 1.0, 401)
    table = dispersion(P02, k, nu_max=2)
    gap = table.band(2) - table.band(1)
    k_min = k[np.argmin(gap)]
    assert abs(abs(k_min) - 0.5) < 0.01
    assert gap.min() == pytest.approx(0.2, abs=0.02)


def test_dispersion_pronounced_crossing_moves_up_at_large_detuning():
    # the direct one-photon crossing carries the full-v0 gap.  For
    # 0 < delta < 1 it sits between bands 1 and 2 (at k = (1+delta)/2);
    # for delta > 1 it has moved up between bands 2 and 3 (at
    # k = (3-delta)/2) and bands 1-2 only meet in an indirect
    # same-internal-state crossing with a far smaller gap.
    delta = 1.8
    k_dopp = (3.0 - delta) / 2.0
    table = dispersion(ScaledParams(v0=0.2, delta0=delta),
                       np.array([k_dopp, 1.0]), nu_max=3)
    gap23 = table.band(3)[0] - table.band(2)[0]
    gap12_bragg = table.band(2)[1] - table.band(1)[1]
    assert gap23 == pytest.approx(0.2, abs=0.02)
    assert gap23 > 5 * gap12_bragg

    delta = 0.7
    k_dopp = (1.0 + delta) / 2.0
    table = dispersion(ScaledParams(v0=0.2, delta0=delta),
                       np.array([k_dopp]), nu_max=2)
    gap12 = table.band(2)[0] - table.band(1)[0]
    assert gap12 == pytest.approx(0.2, abs=0.02)


def test_dispersion_bare_limit_parabolas():
    k = np.linspace(-0.9, 0.9, 19)
    table = dispersion(ScaledParams(v0=0.0, delta0=0.8), k, nu_max=2)
    expected_low = np.minimum(k**2 - 0.4, (np.abs(k) - 1) ** 2 + 0.4)
    assert np.allclose(table.band(1), expected_low, atol=1e-12)


def test_effective_parameters_free_limit():
    v_g, m2_inv = effective_parameters(ScaledParams(v0=0.0), nu=1, k0=0.3)
    assert v_g == pytest.approx(0.6, abs=1e-6)
    assert m2_inv == pytest.approx(2.0, abs=1e-4)


def test_effective_parameters_symmetry_point():
    v_g, _ = effective_parameters(P02, nu=1, k0=0.0)
    assert abs(v_g) < 1e-8


def test_effective_parameters_warns_near_degeneracy():
    with pytest.warns(RuntimeWarning):
        effective_parameters(ScaledParams(v0=1e-12), nu=1, k0=0.5)


def test_classify_crossings_examples():
    tri = [c for c in classify_crossings(-1.0) if c.kind == "triple"]
    assert len(tri) == 1
    assert tri[0].k == pytest.approx(0.0)
    assert tri[0].energy == pytest.approx(0.5)
    assert tri[0].mus == (-1, 0, 1)

    tri = [c for c in classify_crossings(1.0) if c.kind == "triple"]
    assert sorted(c.k for c in tri) == [-1.0, 1.0]

    zero = classify_crossings(0.0)
    dopp = {(c.k, c.mus) for c in zero if c.kind == "doppleron"}
    assert (0.5, (-1, 0)) in dopp
    assert (-0.5, (0, 1)) in dopp
    bragg = {(c.k, c.mus) for c in zero if c.kind == "bragg"}
    assert (0.0, (-1, 1)) in bragg


def test_classify_crossings_energy_consistency():
    for delta in (-3.0, -1.0, 0.0, 0.7, 1.0, 3.0):
        for c in classify_crossings(delta):
            energies = [(c.k + mu) ** 2 + (1 if mu % 2 else -1) * delta / 2
                        for mu in c.mus]
            assert max(energies) - min(energies) < 1e-12


def test_bare_gaussian_single_component():
    grid = SpatialGrid(16, 512)
    st = bare_gaussian(0.0, 50.0, InternalState.MINUS, grid)
    assert np.all(st.psi_plus == 0)
    assert st.norm() == pytest.approx(1.0, abs=1e-10)


def test_bare_gaussian_ground_band_overlap():
    grid = SpatialGrid(16, 512)
    st = bare_gaussian(0.0, 50.0, InternalState.MINUS, grid)
    p1 = project_band(st, P02, 1)
    assert 0.95 < p1 < 1.0
    assert 1.0 - p1 < 0.05          # only a few percent in higher bands


def test_dressed_gaussian_band_projection_one():
    grid = SpatialGrid(16, 512)
    st = dressed_gaussian(P02, nu=1, k0=0.3, width_x2=50.0, grid=grid)
    assert st.norm() == pytest.approx(1.0, abs=1e-10)
    assert project_band(st, P02, 1) == pytest.approx(1.0, abs=1e-8)


def test_dressed_gaussian_reduces_to_bare_at_zero_coupling():
    grid = SpatialGrid(32, 512)
    weak = ScaledParams(v0=1e-12)
    st = dressed_gaussian(weak, nu=1, k0=0.3, width_x2=200.0, grid=grid)
    ref = bare_gaussian(0.3, 200.0, InternalState.MINUS, grid)
    overlap = abs(np.vdot(st.psi_minus, ref.psi_minus) * grid.dx)
    assert overlap == pytest.approx(1.0, abs=1e-5)


def test_dressed_gaussian_rejects_wide_packet():
    grid = SpatialGrid(16, 512)
    with pytest.raises(InvalidParameterError):
        dressed_gaussian(P02, nu=1, k0=0.0, width_x2=0.5, grid=grid)


def test_band_populations_complete():
    grid = SpatialGrid(16, 512)
    st = bare_gaussian(0.2, 50.0, InternalState.PLUS, grid)
    pops = band_populations(st, ScaledParams(v0=0.6, delta0=0.9),
                            nu_list=tuple(range(1, 26)), m=12)
    assert pops.sum() == pytest.approx(1.0, abs=1e-8)


def test_dressed_gaussian_momentum_side_peaks():
    # real-momentum weights around k0 +- 1 match |c_1^{+-1}|^2 once the
    # quasi-momentum envelope is narrow enough that c barely varies
    grid = SpatialGrid(64, 1024)
    k0 = 0.2
    st = dressed_gaussian(P02, nu=1, k0=k0, width_x2=400.0, grid=grid)
    sol = solve_bands(k0, P02)
    scale = grid.dx / np.sqrt(2 * np.pi)
    dens_plus = np.abs(np.fft.fft(st.psi_plus) * scale) ** 2
    p = grid.p
    for mu in (-1, 1):
        mask = np.abs(p - (k0 + mu)) < 0.5
        weight = np.sum(dens_plus[mask]) * grid.dp
        assert weight == pytest.approx(abs(sol.coefficient(1, mu)) ** 2,
                                       rel=0.05)
