"""Mode decomposition of the doubly resonant pair-source spectrum.

Under monochromatic pumping the joint spectrum collapses onto the energy
conservation line and, within the main cluster, splits into discrete joint
modes indexed k = -M..M.  Each mode carries an unnormalised signal (idler)
amplitude: the principal square root of the product of its own resonance
amplitude and the energy-conservation partner resonance evaluated at the
mirrored frequency.  The squared moduli of these amplitudes integrate to the
normalisation constants C_{S,k}, C_{I,k}, whose products set the per-mode
squeezing weights used downstream.

All integrals run over frequency in Hz.  The absolute scale of the
normalisation constants therefore depends on that convention, but only
ratios of constants enter any derived quantity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .cavity import CavityParams, airy_normalized

# Total relative error budget for each normalisation integral.
QUADRATURE_REL_TOL = 1e-6
# Per-panel adaptive tolerance, well under the total budget.
_PANEL_REL_TOL = 1e-10
# Half-window of the integration domain in units of the larger linewidth.
_WINDOW_WIDTHS = 1e6


class QuadratureError(RuntimeError):
    """A normalisation integral missed its relative error target."""

    def __init__(self, mode: int, achieved: float, target: float):
        self.mode = mode
        self.achieved = achieved
        self.target = target
        super().__init__(
            f"normalisation quadrature for mode k={mode}: achieved relative "
            f"error {achieved:.3e} exceeds target {target:.3e}"
        )


@dataclass(frozen=True)
class SourceSpec:
    """Pump and resonator description of the source around its main cluster.

    ``k_s``/``k_i`` are the resonance orders of the centre joint mode and
    ``side_modes`` the number of modes kept on each side of it (total
    2 * side_modes + 1).
    """

    nu_p0: float
    sig: CavityParams
    idl: CavityParams
    k_s: int
    k_i: int
    side_modes: int

    def __post_init__(self) -> None:
        if self.nu_p0 <= 0.0:
            raise ValueError(f"nu_p0={self.nu_p0}: pump frequency must be positive")
        if self.side_modes < 0:
            raise ValueError(f"side_modes={self.side_modes}: must be non-negative")
        residual = abs(self.k_s * self.sig.fsr + self.k_i * self.idl.fsr - self.nu_p0)
        if residual > 0.5 * self.idl.fsr:
            raise ValueError(
                f"(k_s, k_i)=({self.k_s}, {self.k_i}) misses the pump by "
                f"{residual:.6g} Hz, more than half an idler FSR"
            )

    @property
    def mode_indices(self) -> np.ndarray:
        """Mode indices -M..M in ascending order."""
        return np.arange(-self.side_modes, self.side_modes + 1)

    def signal_center(self, k):
        return (self.k_s + np.asarray(k)) * self.sig.fsr

    def idler_center(self, k):
        return (self.k_i - np.asarray(k)) * self.idl.fsr


@dataclass(frozen=True)
class ModeTable:
    """Per-mode decomposition data in ascending mode order.

    ``ratio`` is (C_S,k C_I,k) / (C_S,0 C_I,0); ``mu_k`` stays ``None`` until
    a mean photon number assignment fills it.
    """

    k: np.ndarray
    delta: np.ndarray
    c_s: np.ndarray
    c_i: np.ndarray
    ratio: np.ndarray
    mu_k: np.ndarray | None = None

    def __post_init__(self) -> None:
        n = self.k.size
        if any(arr.size != n for arr in (self.delta, self.c_s, self.c_i, self.ratio)):
            raise ValueError("mode table columns must share one length")
        if np.any(self.c_s <= 0.0) or np.any(self.c_i <= 0.0):
            raise ValueError("normalisation constants must be positive")
        if self.ratio[self.center_index] != 1.0:
            raise ValueError("centre-mode ratio must be exactly 1")

    @property
    def center_index(self) -> int:
        return self.k.size // 2

    def index_of(self, k: int) -> int:
        i = int(k) - int(self.k[0])
        if not 0 <= i < self.k.size:
            raise IndexError(f"mode k={k} outside table range {self.k[0]}..{self.k[-1]}")
        return i

    def envelope_argmax(self) -> int:
        """Mode index with the smallest |detuning|; lower k wins ties."""
        return int(self.k[np.argmin(np.abs(self.delta))])


def cluster_detuning(spec: SourceSpec, k):
    """Residual (K_S + k) FSR_S + (K_I - k) FSR_I - nu_p0 of joint mode k."""
    return spec.signal_center(k) + spec.idler_center(k) - spec.nu_p0


def _lorentzian_amplitude(x, gamma):
    # complex unit-peak resonance amplitude, 1 / (1 - 2i x / gamma)
    return 1.0 / (1.0 - 2j * x / gamma)


def mode_amplitude_signal(spec: SourceSpec, k: int, nu_s):
    """Unnormalised signal amplitude of joint mode k at frequency ``nu_s``.

    Principal square root of the product of the signal resonance amplitude
    and the idler resonance amplitude evaluated at the energy-conserving
    partner frequency; modulus never exceeds 1.
    """
    nu = np.asarray(nu_s, dtype=float)
    own = _lorentzian_amplitude(nu - spec.signal_center(k), spec.sig.fwhm)
    partner = _lorentzian_amplitude(
        spec.nu_p0 - nu - spec.idler_center(k), spec.idl.fwhm
    )
    out = np.sqrt(own * partner)
    return complex(out) if np.ndim(nu_s) == 0 else out


def mode_amplitude_idler(spec: SourceSpec, k: int, nu_i):
    """Unnormalised idler amplitude of joint mode k; mirror of the signal case."""
    nu = np.asarray(nu_i, dtype=float)
    partner = _lorentzian_amplitude(
        spec.nu_p0 - nu - spec.signal_center(k), spec.sig.fwhm
    )
    own = _lorentzian_amplitude(nu - spec.idler_center(k), spec.idl.fwhm)
    out = np.sqrt(partner * own)
    return complex(out) if np.ndim(nu_i) == 0 else out


def _sqrt_lorentzian_pair_integral(delta: float, g_a: float, g_b: float):
    """Integral of [1+(2x/g_a)^2]^(-1/2) [1+(2(x+delta)/g_b)^2]^(-1/2) dx.

    Splits the window [-W, W], W = 1e6 max(g_a, g_b), into an adaptive core
    around the two peaks plus 1/x-substituted tail panels; the analytic bound
    g_a g_b / (2 W) for the truncated tails joins the error estimate.
    Returns (value, error_estimate).
    """

    def f(x):
        return (1.0 + (2.0 * x / g_a) ** 2) ** -0.5 * (
            1.0 + (2.0 * (x + delta) / g_b) ** 2
        ) ** -0.5

    core_half = 100.0 * (abs(delta) + g_a + g_b)
    window = max(_WINDOW_WIDTHS * max(g_a, g_b), 10.0 * core_half)
    core, core_err = quad(
        f,
        -core_half,
        core_half,
        points=sorted({0.0, -delta}),
        limit=300,
        epsabs=0.0,
        epsrel=_PANEL_REL_TOL,
    )

    def f_reciprocal(u):
        # x = 1/u maps the smooth 1/x^2 tails onto finite panels
        x = 1.0 / u
        return f(x) / u**2

    hi, hi_err = quad(
        f_reciprocal, 1.0 / window, 1.0 / core_half,
        limit=100, epsabs=0.0, epsrel=_PANEL_REL_TOL,
    )
    lo, lo_err = quad(
        f_reciprocal, -1.0 / core_half, -1.0 / window,
        limit=100, epsabs=0.0, epsrel=_PANEL_REL_TOL,
    )
    beyond_window = g_a * g_b / (2.0 * window)
    return core + hi + lo, core_err + hi_err + lo_err + beyond_window


def normalization_constants(spec: SourceSpec, k: int) -> tuple[float, float]:
    """Quadrature normalisation constants (C_S, C_I) of joint mode k.

    Each constant is the square root of the integral of the corresponding
    squared mode amplitude over frequency, evaluated to a relative error of
    at most ``QUADRATURE_REL_TOL``; a :class:`QuadratureError` carries the
    achieved estimate otherwise.
    """
    delta = float(cluster_detuning(spec, k))
    g_s, g_i = spec.sig.fwhm, spec.idl.fwhm
    c2_s, err_s = _sqrt_lorentzian_pair_integral(delta, g_s, g_i)
    c2_i, err_i = _sqrt_lorentzian_pair_integral(delta, g_i, g_s)
    for c2, err in ((c2_s, err_s), (c2_i, err_i)):
        if not math.isfinite(c2) or c2 <= 0.0 or err / c2 > QUADRATURE_REL_TOL:
            achieved = err / c2 if (math.isfinite(c2) and c2 > 0.0) else math.inf
            raise QuadratureError(k, achieved, QUADRATURE_REL_TOL)
    return math.sqrt(c2_s), math.sqrt(c2_i)


def mode_table(spec: SourceSpec) -> ModeTable:
    """Detunings, normalisation constants and squeeze ratios for all modes.

    Per-mode work is independent; results collect in ascending mode order.
    """
    ks = spec.mode_indices
    delta = np.asarray(cluster_detuning(spec, ks), dtype=float)
    c_s = np.empty(ks.size)
    c_i = np.empty(ks.size)
    for i, k in enumerate(ks):
        c_s[i], c_i[i] = normalization_constants(spec, int(k))
    center = ks.size // 2
    ratio = (c_s * c_i) / (c_s[center] * c_i[center])
    return ModeTable(k=ks, delta=delta, c_s=c_s, c_i=c_i, ratio=ratio)


def xi(spec: SourceSpec, m_s: int, m_i: int, nu_s, nu_i):
    """Product of unit-peak Lorentzians centred at m_s FSR_S and m_i FSR_I."""
    ls = 1.0 / (1.0 + (2.0 * (np.asarray(nu_s) - m_s * spec.sig.fsr) / spec.sig.fwhm) ** 2)
    li = 1.0 / (1.0 + (2.0 * (np.asarray(nu_i) - m_i * spec.idl.fsr) / spec.idl.fwhm) ** 2)
    out = ls * li
    return float(out) if (np.ndim(nu_s) == 0 and np.ndim(nu_i) == 0) else out


def pump_envelope(nu_s, nu_i, nu_p0: float, sigma_p: float):
    """Gaussian stand-in exp[-(nu_s + nu_i - nu_p0)^2 / (2 sigma_p^2)].

    Figure-reproduction device only; the physical CW pump is treated as
    monochromatic everywhere else.
    """
    if sigma_p <= 0.0:
        raise ValueError(f"sigma_p={sigma_p}: must be positive")
    detuning = np.asarray(nu_s, dtype=float) + np.asarray(nu_i, dtype=float) - nu_p0
    return np.exp(-(detuning**2) / (2.0 * sigma_p**2))


def jsa_approx(spec: SourceSpec, nu_s, nu_i):
    """Joint spectral amplitude summed over the 2M+1 joint modes.

    Each summand is the product of the principal square roots of the signal
    and idler Lorentzian amplitude pairs of one mode.  Scalars broadcast
    against arrays in the usual way.
    """
    ns = np.asarray(nu_s, dtype=float)
    ni = np.asarray(nu_i, dtype=float)
    out = np.zeros(np.broadcast(ns, ni).shape, dtype=complex)
    g_s, g_i = spec.sig.fwhm, spec.idl.fwhm
    for k in range(-spec.side_modes, spec.side_modes + 1):
        a = spec.signal_center(k)
        b = spec.idler_center(k)
        u_s = 1.0 / (1.0 + 2j * (ns - a) / g_s)
        v_s = 1.0 / (1.0 + 2j * (spec.nu_p0 - ns - b) / g_i)
        u_i = 1.0 / (1.0 + 2j * (spec.nu_p0 - ni - a) / g_s)
        v_i = 1.0 / (1.0 + 2j * (ni - b) / g_i)
        out = out + np.sqrt(u_s * v_s) * np.sqrt(u_i * v_i)
    return complex(out) if out.ndim == 0 else out


def jsi_approx(spec: SourceSpec, nu_s, nu_i, sigma_p: float | None = None):
    """Joint spectral intensity summed over the 2M+1 joint modes.

    Each summand is the square-rooted product of the four real Lorentzians of
    one mode, i.e. the squared modulus of the signal amplitude times that of
    the idler amplitude.  ``sigma_p`` optionally multiplies in the Gaussian
    pump envelope for figure reproduction.
    """
    ns = np.asarray(nu_s, dtype=float)
    ni = np.asarray(nu_i, dtype=float)
    out = np.zeros(np.broadcast(ns, ni).shape)
    g_s, g_i = spec.sig.fwhm, spec.idl.fwhm
    for k in range(-spec.side_modes, spec.side_modes + 1):
        a = spec.signal_center(k)
        b = spec.idler_center(k)
        w_s = (
            (1.0 + (2.0 * (ns - a) / g_s) ** 2)
            * (1.0 + (2.0 * (spec.nu_p0 - ns - b) / g_i) ** 2)
        ) ** -0.5
        w_i = (
            (1.0 + (2.0 * (spec.nu_p0 - ni - a) / g_s) ** 2)
            * (1.0 + (2.0 * (ni - b) / g_i) ** 2)
        ) ** -0.5
        out = out + w_s * w_i
    if sigma_p is not None:
        out = out * pump_envelope(ns, ni, spec.nu_p0, sigma_p)
    return float(out) if out.ndim == 0 else out


def signal_spectrum_samples(
    spec: SourceSpec, k_window: tuple[int, int] = (-1, 1), n_points: int = 2001
):
    """Uniform sweep of the signal spectrum across a mode window.

    Returns ``(nu, airy_product, xi_center)``: the exact normalised Airy
    product A0_S(nu) A0_I(nu_p0 - nu) and the centre-mode Lorentzian pair
    evaluated on the energy conservation line, sampled from half an FSR below
    mode ``k_window[0]`` to half an FSR above mode ``k_window[1]``.
    """
    k_lo, k_hi = k_window
    if k_lo > k_hi:
        raise ValueError(f"empty mode window: {k_lo} > {k_hi}")
    if n_points < 2:
        raise ValueError(f"n_points={n_points}: need at least 2 samples")
    lo = spec.signal_center(k_lo) - 0.5 * spec.sig.fsr
    hi = spec.signal_center(k_hi) + 0.5 * spec.sig.fsr
    nu = np.linspace(lo, hi, n_points)
    airy_product = airy_normalized(nu, spec.sig) * airy_normalized(
        spec.nu_p0 - nu, spec.idl
    )
    xi_center = xi(spec, spec.k_s, spec.k_i, nu, spec.nu_p0 - nu)
    return nu, airy_product, xi_center
