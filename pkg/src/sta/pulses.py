"""Drive schedules for the decaying two-level atom.

A schedule bundles detuning Delta(t), Rabi frequency Omega_R(t) and decay
rate Gamma(t) together with their time derivatives, all in angular units
(rad/ns, time in ns).  The chirped Gaussian pulse

    Delta(t) = -2 b t,        Omega_R(t) = Omega_0 exp(-a t^2)

swept across resonance realizes rapid adiabatic passage.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ZeroGap

__all__ = [
    "PulseSchedule",
    "ChirpedGaussianParams",
    "chirped_gaussian",
    "constant_schedule",
    "complex_rabi",
    "adiabaticity_ratio",
    "generic_adiabaticity_ratio",
]


@dataclass(frozen=True)
class PulseSchedule:
    """Time-dependent drive parameters and their derivatives.

    All callables accept scalar or ndarray time and broadcast.  Within the
    window rabi(t) >= 0 and gamma(t) >= 0 are assumed; the shipped
    constructors guarantee it.
    """

    delta: Callable
    delta_dot: Callable
    rabi: Callable
    rabi_dot: Callable
    gamma: Callable
    gamma_dot: Callable
    window: tuple[float, float]

    def __post_init__(self):
        t0, t1 = self.window
        if not t1 > t0:
            raise ValueError(f"window must increase, got ({t0}, {t1})")

    def grid(self, dt: float) -> np.ndarray:
        """Uniform sample grid covering the window with step close to dt."""
        if dt <= 0:
            raise ValueError("dt must be positive")
        t0, t1 = self.window
        n = max(2, int(round((t1 - t0) / dt)))
        return np.linspace(t0, t1, n + 1)


@dataclass(frozen=True)
class ChirpedGaussianParams:
    """Parameters of the chirped Gaussian pulse, angular units.

    rabi_peak : peak Rabi frequency Omega_0 (rad/ns), >= 0
    width_a   : Gaussian envelope coefficient a (1/ns^2), > 0
    chirp_b   : chirp rate b in Delta(t) = -2 b t (rad/ns^2)
    gamma     : decay rate of the upper level (rad/ns), >= 0
    """

    rabi_peak: float
    width_a: float
    chirp_b: float
    gamma: float

    def __post_init__(self):
        if self.width_a <= 0:
            raise ValueError("width_a must be positive")
        if self.rabi_peak < 0:
            raise ValueError("rabi_peak must be non-negative")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")


def _const(c: float) -> Callable:
    return lambda t: np.full(np.shape(t), c) if np.ndim(t) else c


def chirped_gaussian(params: ChirpedGaussianParams, window_factor: float = 5.0) -> PulseSchedule:
    """Chirped Gaussian schedule on the window [-w, w], w = window_factor / sqrt(a).

    The default window_factor of 5 leaves a relative envelope of exp(-25)
    at the edges, so the pulse is effectively over.
    """
    if window_factor <= 0:
        raise ValueError("window_factor must be positive")
    o0, a, b, g = params.rabi_peak, params.width_a, params.chirp_b, params.gamma
    w = window_factor / np.sqrt(a)

    def rabi(t):
        return o0 * np.exp(-a * np.asarray(t) ** 2)

    def rabi_dot(t):
        t = np.asarray(t)
        return -2.0 * a * t * o0 * np.exp(-a * t**2)

    return PulseSchedule(
        delta=lambda t: -2.0 * b * np.asarray(t),
        delta_dot=_const(-2.0 * b),
        rabi=rabi,
        rabi_dot=rabi_dot,
        gamma=_const(g),
        gamma_dot=_const(0.0),
        window=(-w, w),
    )


def constant_schedule(delta: float, rabi: float, gamma: float, window=(0.0, 1.0)) -> PulseSchedule:
    """Time-independent schedule, mostly for tests and static checks."""
    if rabi < 0 or gamma < 0:
        raise ValueError("rabi and gamma must be non-negative")
    return PulseSchedule(
        delta=_const(delta),
        delta_dot=_const(0.0),
        rabi=_const(rabi),
        rabi_dot=_const(0.0),
        gamma=_const(gamma),
        gamma_dot=_const(0.0),
        window=tuple(window),
    )


def complex_rabi(s: PulseSchedule, t):
    """Complex gap frequency Omega(t) = sqrt(-(Gamma + 2i Delta)^2 + 4 Omega_R^2).

    E_+ - E_- = Omega / 2, so |Omega| measures the spectral splitting.
    """
    g, d, o = s.gamma(t), s.delta(t), s.rabi(t)
    return np.sqrt(-((g + 2j * d) ** 2) + 4.0 * o**2)


def adiabaticity_ratio(s: PulseSchedule, t):
    """Local adiabaticity monitor r(t) = 2 |Omega_a| / |Omega|.

    Omega_a = -alpha_dot/2 is the rate at which the mixing angle turns and
    Omega the complex gap frequency; r << 1 means the bare drive follows a
    single spectral branch, r >~ 1 flags non-adiabatic leakage.

    Raises
    ------
    ZeroGap
        If |Omega| vanishes at some requested time (eigenvalue coalescence).
    """
    from .counterdiabatic import alpha_dot

    gap = np.abs(complex_rabi(s, t))
    if np.any(gap <= 0.0):
        raise ZeroGap("spectral gap vanished; adiabaticity ratio undefined")
    return np.abs(alpha_dot(s, t)) / gap


def generic_adiabaticity_ratio(hfun, t: float, h: float = 1e-4, tol: float = 1e-9) -> float:
    """Textbook adiabaticity criterion evaluated on a generic Hamiltonian.

    Returns max over branch pairs n != m of |<l_n|d/dt r_m>| / |E_n - E_m|
    with eigenvector derivatives taken by central differences of the
    gauge-aligned instantaneous eigenbasis.  Agrees with adiabaticity_ratio
    for the two-level atom but needs nothing beyond an H(t) callable.
    """
    from .biortho import eigensystem_2x2
    from .counterdiabatic import eigenvector_derivative

    basis = eigensystem_2x2(hfun(t), tol=tol)
    deriv = eigenvector_derivative(hfun, t, h=h, tol=tol)
    out = 0.0
    for n in range(2):
        for m in range(2):
            if n == m:
                continue
            gap = abs(basis.values[n] - basis.values[m])
            if gap == 0.0:
                raise ZeroGap("degenerate eigenvalues in adiabaticity check")
            out = max(out, abs(np.vdot(basis.left[n], deriv[m])) / gap)
    return out
