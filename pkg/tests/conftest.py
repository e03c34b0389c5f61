import numpy as np
import pytest

from cspdclink.cavity import C_VACUUM, CavityParams, find_main_cluster
from cspdclink.spectral import SourceSpec, mode_table

PUMP_WAVELENGTH_NM = 435.5359
SIGNAL_SEED_NM = 606.0
FSR_SIGNAL_HZ = 121.120e6
FSR_IDLER_HZ = 121.189e6
HF_FINESSE = (61.0, 83.0)
LF_FINESSE = (30.0, 30.0)
SIDE_MODES = 50


def make_source(finesse_sig, finesse_idl, side_modes=SIDE_MODES):
    sig = CavityParams(fsr=FSR_SIGNAL_HZ, finesse=finesse_sig)
    idl = CavityParams(fsr=FSR_IDLER_HZ, finesse=finesse_idl)
    nu_p0 = C_VACUUM / (PUMP_WAVELENGTH_NM * 1e-9)
    k_s, k_i = find_main_cluster(C_VACUUM / (SIGNAL_SEED_NM * 1e-9), nu_p0, sig, idl)
    return SourceSpec(nu_p0=nu_p0, sig=sig, idl=idl, k_s=k_s, k_i=k_i,
                      side_modes=side_modes)


def make_degenerate_source(gamma_hz, side_modes=0, fsr=100e6):
    """Zero centre detuning with equal linewidths: the mode profile is an
    exact Lorentzian, so its norm integral is pi * gamma / 2."""
    cav = CavityParams(fsr=fsr, finesse=fsr / gamma_hz)
    return SourceSpec(nu_p0=2_000_000 * fsr, sig=cav, idl=cav,
                      k_s=1_000_000, k_i=1_000_000, side_modes=side_modes)


@pytest.fixture(scope="session")
def hf_spec():
    return make_source(*HF_FINESSE)


@pytest.fixture(scope="session")
def hf_modes(hf_spec):
    return mode_table(hf_spec)


@pytest.fixture(scope="session")
def lf_spec():
    return make_source(*LF_FINESSE)


@pytest.fixture(scope="session")
def lf_modes(lf_spec):
    return mode_table(lf_spec)


def normalized_mode_overlap(spec, k, j, span_fsr=30.0, step_hz=4e3):
    """|integral of conj(psi_k) psi_j| / (C_k C_j) by dense trapezoid;
    independent of the package quadrature."""
    from cspdclink.spectral import mode_amplitude_signal, normalization_constants

    lo = float(spec.signal_center(min(k, j))) - span_fsr * spec.sig.fsr
    hi = float(spec.signal_center(max(k, j))) + span_fsr * spec.sig.fsr
    nu = np.arange(lo, hi, step_hz)
    fk = mode_amplitude_signal(spec, k, nu)
    fj = mode_amplitude_signal(spec, j, nu)
    overlap = np.trapezoid(np.conj(fk) * fj, nu)
    c_k = normalization_constants(spec, k)[0]
    c_j = normalization_constants(spec, j)[0]
    return float(abs(overlap)) / (c_k * c_j)


def trapezoid_mode_norm(spec, k, widths=3000.0, points=400_001):
    """Mode-norm integral by the trapezoid rule plus analytic 1/x^2 tails;
    independent of the package quadrature."""
    from cspdclink.spectral import cluster_detuning, mode_amplitude_signal

    delta = float(cluster_detuning(spec, k))
    g_max = max(spec.sig.fwhm, spec.idl.fwhm)
    center = float(spec.signal_center(k)) - delta / 2.0
    half = widths * g_max + abs(delta)
    nu = np.linspace(center - half, center + half, points)
    values = np.abs(mode_amplitude_signal(spec, k, nu)) ** 2
    tails = spec.sig.fwhm * spec.idl.fwhm / (2.0 * half)
    return float(np.trapezoid(values, nu)) + tails
