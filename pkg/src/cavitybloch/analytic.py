"""Closed-form and low-dimensional reference models.

Two- and three-level avoided-crossing (Landau-Zener) dynamics, the
adiabatic solution for a cosine-chirped detuning, the effective
coupling of a driven three-level Lambda scheme, and photon-number
averaging over a coherent-state distribution.  These provide the
independent checks for the full wave-packet simulations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.special import ellipeinc
from scipy.stats import poisson

from .core import InvalidParameterError

_ODE_RTOL = 1e-10
_ODE_ATOL = 1e-12


def adiabaticity(v0: float, force: float) -> float:
    """Adiabaticity parameter pi*v0^2/(4F) of a linear crossing."""
    if force <= 0:
        raise InvalidParameterError("force must be positive")
    return np.pi * v0**2 / (4.0 * force)


@dataclass(frozen=True)
class LZParams:
    """Linear two-level crossing: coupling v0, sweep rate F, window tau."""

    v0: float
    force: float
    tau: float | None = None
    k0: float = -0.5

    def __post_init__(self):
        if self.force <= 0:
            raise InvalidParameterError("force must be positive")
        if self.tau is not None and self.tau <= 0:
            raise InvalidParameterError("tau must be positive")

    @property
    def window(self) -> float:
        # default integration half-window: one zone of the sweep
        return self.tau if self.tau is not None else 0.5 / self.force

    @property
    def adiabaticity(self) -> float:
        return adiabaticity(self.v0, self.force)


def lz2_asymptotic(v0: float, force: float) -> float:
    """Asymptotic transfer probability 1 - exp(-pi v0^2 / 4F)."""
    return 1.0 - np.exp(-adiabaticity(v0, force))


def _integrate_schrodinger(hamiltonian, y0, t_span, t_eval=None):
    def rhs(t, y):
        n = y.size // 2
        psi = y[:n] + 1j * y[n:]
        dpsi = -1j * (hamiltonian(t) @ psi)
        return np.concatenate([dpsi.real, dpsi.imag])

    y0 = np.asarray(y0, dtype=complex)
    sol = solve_ivp(rhs, t_span, np.concatenate([y0.real, y0.imag]),
                    method="DOP853", rtol=_ODE_RTOL, atol=_ODE_ATOL,
                    t_eval=t_eval, dense_output=False)
    if not sol.success:
        raise RuntimeError(f"ODE integration failed: {sol.message}")
    n = y0.size
    return sol.t, sol.y[:n] + 1j * sol.y[n:]


def _endpoint_states(h, tau: float, initial_level: int, final_level: int,
                     frame: str):
    """Initial amplitude vector at -tau and measurement vector at +tau.

    frame="bare" uses the diabatic basis vectors themselves;
    frame="instantaneous" uses the eigenvectors of H(-tau)/H(+tau)
    closest to those bare levels, which is how a wave packet prepared
    in a single band enters and leaves a crossing.
    """
    dim = h(0.0).shape[0]
    e_init = np.zeros(dim)
    e_init[initial_level - 1] = 1.0
    e_fin = np.zeros(dim)
    e_fin[final_level - 1] = 1.0
    if frame == "bare":
        return e_init.astype(complex), e_fin.astype(complex)
    if frame != "instantaneous":
        raise InvalidParameterError("frame must be 'instantaneous' or 'bare'")
    _, v0 = np.linalg.eigh(h(-tau))
    _, v1 = np.linalg.eigh(h(tau))
    y0 = v0[:, np.argmax(np.abs(v0[initial_level - 1, :]))]
    meas = v1[:, np.argmax(np.abs(v1[final_level - 1, :]))]
    return y0.astype(complex), meas.astype(complex)


def lz2_integrate(params: LZParams, linearized: bool = True,
                  frame: str = "instantaneous") -> float:
    """Transfer probability of the two-level sweep over [-tau, tau].

    Starts in the upper diabatic branch (amplitude ordering
    (d_{mu+1}, d_mu)) and returns the final weight on the lower one.
    With linearized=False the full quadratic diagonal (k+1)^2, k^2 with
    k = k0 - F t is used instead of the linearised +-F t form.  The
    default frame prepares and measures in the instantaneous eigenbasis
    at the window edges (see _endpoint_states); frame="bare" uses the
    diabatic vectors literally.
    """
    v = params.v0 / 2.0
    f = params.force
    tau = params.window

    if linearized:
        def h(t):
            return np.array([[f * t, v], [v, -f * t]])
    else:
        # centre the sweep so the bare crossing (k = -1/2) sits at t = 0
        t_cross = (params.k0 + 0.5) / f

        def h(t):
            k = params.k0 - f * (t + t_cross)
            return np.array([[(k + 1.0) ** 2, v], [v, k**2]])

    y0, meas = _endpoint_states(h, tau, initial_level=1, final_level=2, frame=frame)
    _, psi = _integrate_schrodinger(h, y0, (-tau, tau))
    return float(np.abs(np.conj(meas) @ psi[:, -1]) ** 2)


def lz3_transition_matrix(v0: float, force: float) -> np.ndarray:
    """Probability transition matrix of the symmetric three-level crossing.

    Built from the single-crossing probability P = exp(-Lambda/2);
    doubly stochastic and symmetric for every P in [0, 1].
    """
    p = np.exp(-adiabaticity(v0, force) / 2.0)
    q = 1.0 - p
    return np.array([
        [p**2, 2 * p * q, q**2],
        [2 * p * q, (1 - 2 * p) ** 2, 2 * p * q],
        [q**2, 2 * p * q, p**2],
    ])


def lz3_integrate(v0: float, force: float, tau: float | None = None,
                  initial_level: int = 3,
                  frame: str = "instantaneous") -> np.ndarray:
    """Integrate the three-level crossing over [-tau, tau].

    Hamiltonian diag(2Ft, 0, -2Ft) with couplings v0/2 between
    neighbouring levels.  Returns the three final populations for a
    system starting purely in ``initial_level`` (1, 2 or 3).  The
    default window tau = 1/(2F) is the half-zone sweep of the
    wave-packet experiments (quasi momentum from -1/2 to 1/2 at rate
    F); the default frame prepares and measures in the instantaneous
    eigenbasis at the window edges.
    """
    if initial_level not in (1, 2, 3):
        raise InvalidParameterError("initial_level must be 1, 2 or 3")
    if force <= 0:
        raise InvalidParameterError("force must be positive")
    tau = 0.5 / force if tau is None else tau
    v = v0 / 2.0

    def h(t):
        return np.array([[2 * force * t, v, 0.0],
                         [v, 0.0, v],
                         [0.0, v, -2 * force * t]])

    y0 = np.zeros(3, dtype=complex)
    y0[initial_level - 1] = 1.0
    meas = np.eye(3, dtype=complex)
    if frame == "instantaneous":
        _, v_lo = np.linalg.eigh(h(-tau))
        _, v_hi = np.linalg.eigh(h(tau))
        y0 = v_lo[:, np.argmax(np.abs(v_lo[initial_level - 1, :]))].astype(complex)
        meas = np.stack([v_hi[:, np.argmax(np.abs(v_hi[lv, :]))] for lv in range(3)])
        meas = meas.astype(complex)
    elif frame != "bare":
        raise InvalidParameterError("frame must be 'instantaneous' or 'bare'")
    _, psi = _integrate_schrodinger(h, y0, (-tau, tau))
    return np.abs(np.conj(meas) @ psi[:, -1]) ** 2


# ---------------------------------------------------------------------------
# chirped detuning


def chirped_phase(t: float, v0: float, delta0: float, omega: float) -> float:
    """Accumulated gap phase int_0^t sqrt(v0^2 + delta0^2 cos^2(w t')) dt'.

    Adaptive quadrature, subdivided at the quarter-periods of the chirp
    for robustness on long intervals.
    """
    if t < 0:
        raise InvalidParameterError("t must be nonnegative")
    if t == 0.0:
        return 0.0

    def integrand(tp):
        d = delta0 * np.cos(omega * tp)
        return np.sqrt(v0**2 + d * d)

    if omega > 0:
        quarter = 0.5 * np.pi / omega
        edges = np.arange(0.0, t, quarter)
        points = edges[1:] if edges.size > 1 else None
    else:
        points = None
    val, _ = quad(integrand, 0.0, t, points=points, limit=200)
    return float(val)


def chirped_phase_elliptic(t, v0: float, delta0: float, omega: float):
    """Gap phase via the incomplete elliptic integral of the second kind.

    Equals sqrt(v0^2+delta0^2)/omega * E(omega t | m) with
    m = delta0^2/(v0^2+delta0^2), valid for all amplitudes; used as the
    fast path and cross-checked against the quadrature.
    """
    if omega == 0.0:
        return np.sqrt(v0**2 + delta0**2) * np.asarray(t, dtype=float)
    m = delta0**2 / (v0**2 + delta0**2)
    return np.sqrt(v0**2 + delta0**2) / omega * ellipeinc(omega * np.asarray(t, float), m)


def chirped_inversion_adiabatic(t, v0: float, delta0: float, omega: float):
    """Adiabatic-limit inversion for delta(t) = delta0 cos(omega t).

    Evaluates 1 - [delta^2(t) + v0^2 cos(phi(t))] /
    (sqrt(v0^2+delta0^2) sqrt(v0^2+delta^2(t))) with the accumulated
    gap phase phi(t).  Note the value lies in [0, 2]: it measures the
    population exchanged relative to the initial adiabatic state, not a
    bare sigma_z expectation.
    """
    t = np.asarray(t, dtype=float)
    delta_t = delta0 * np.cos(omega * t)
    root0 = np.sqrt(v0**2 + delta0**2)
    root_t = np.sqrt(v0**2 + delta_t**2)
    phi = chirped_phase_elliptic(t, v0, delta0, omega)
    return 1.0 - delta_t**2 / (root0 * root_t) - v0**2 * np.cos(phi) / (root0 * root_t)


def chirped_integrate(v0: float, delta0: float, omega: float, t_final: float,
                      n_samples: int = 2000):
    """Integrate the chirped two-level system from the lower state.

    Returns (t, <sigma_z>(t)) for the Hamiltonian with diagonal
    +-delta(t)/2 and coupling v0/2, starting in (0, 1).
    """
    if t_final <= 0:
        raise InvalidParameterError("t_final must be positive")

    def h(t):
        d = delta0 * np.cos(omega * t) / 2.0
        return np.array([[d, v0 / 2.0], [v0 / 2.0, -d]])

    t_eval = np.linspace(0.0, t_final, n_samples)
    ts, psi = _integrate_schrodinger(h, [0.0, 1.0], (0.0, t_final), t_eval=t_eval)
    sigma_z = np.abs(psi[0]) ** 2 - np.abs(psi[1]) ** 2
    return ts, sigma_z


def lambda_effective_coupling(omega13: float, omega23: float,
                              big_delta: float) -> float:
    """Effective two-level coupling of a driven Lambda scheme.

    After eliminating the far-detuned upper level, the two lower levels
    couple with strength omega13*omega23/big_delta.
    """
    if big_delta == 0:
        raise InvalidParameterError(
            "elimination of the upper level requires a nonzero detuning")
    return omega13 * omega23 / big_delta


# ---------------------------------------------------------------------------
# photon-number averaging


def poisson_weights(n_bar: float, n_cut: tuple[int, int] | None = None,
                    coverage: float = 1.0 - 1e-6):
    """Photon numbers and weights of a truncated coherent-state distribution.

    Raises when the requested truncation covers less than ``coverage``
    of the Poisson mass; weights are renormalised over the support.
    """
    if n_bar <= 0:
        raise InvalidParameterError("n_bar must be positive")
    if n_cut is None:
        residual = (1.0 - coverage) / 4.0
        n_lo = int(poisson.ppf(residual, n_bar))
        n_hi = int(poisson.ppf(1.0 - residual, n_bar)) + 1
    else:
        n_lo, n_hi = n_cut
    ns = np.arange(max(n_lo, 0), n_hi + 1)
    weights = poisson.pmf(ns, n_bar)
    mass = weights.sum()
    if mass < coverage:
        raise InvalidParameterError(
            f"truncation [{n_lo}, {n_hi}] covers only {mass:.8f} "
            f"of the Poisson mass (< {coverage})")
    return ns, weights / mass


def poisson_average(n_bar: float, per_n_runner,
                    n_cut: tuple[int, int] | None = None,
                    batched: bool = False) -> np.ndarray:
    """Photon-number-averaged inversion series.

    ``per_n_runner(scale)`` must return the inversion series for the
    coupling rescaled by ``scale`` = sqrt(n/n_bar); with batched=True it
    is called once with the full array of scales and must return a
    matrix of series (one row per scale).
    """
    ns, weights = poisson_weights(n_bar, n_cut)
    scales = np.sqrt(ns / n_bar)
    if batched:
        series = np.asarray(per_n_runner(scales))
    else:
        series = np.array([np.asarray(per_n_runner(s)) for s in scales])
    return weights @ series
