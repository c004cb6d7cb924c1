"""Spectral and time-domain stability laboratory for the delayed wave
equation with Kelvin-Voigt damping.

The abstract system ``u'' + a BB* u' + BB* u(t - tau) = 0`` is studied mode by
mode: every eigenvalue ``lambda_k`` of ``BB*`` contributes the characteristic
quasi-polynomial ``lambda**2 + a*lambda_k*lambda + lambda_k*exp(-lambda*tau)``,
and the essential part of the spectrum is the zero set of
``a*lambda + exp(-lambda*tau)``.
"""

from delaykv.core import (
    DelayKVError,
    ModeSet,
    NumericalError,
    SystemParams,
    ValidationError,
    dirichlet_modes_1d,
    make_modes,
    make_params,
)
from delaykv.quasipoly import (
    ModalCharacteristic,
    Root,
    SigmaCharacteristic,
    Window,
    char_fn,
    find_roots,
    lambert_w,
    sigma_fn,
    winding_count,
)
from delaykv.spectrum import (
    InstabilityPair,
    ModeSpectrum,
    RegionMap,
    Verdict,
    default_window,
    instability_pair,
    mode_spectrum,
    region_map,
    sigma_spectrum,
    singular_residual,
    spectral_abscissa,
    stability_verdict,
)
from delaykv.simulate import (
    DecayFit,
    DelayHistory,
    DissipativityReport,
    EnergyTrace,
    ModalTrajectory,
    WaveField,
    check_dissipativity,
    energy_trace,
    fit_decay_rate,
    simulate_mode,
    synthesize_wave,
)
from delaykv.freqresp import (
    NearSpectrumError,
    SweepResult,
    axis_sweep,
    sweep_grid,
    tail_threshold,
    transfer,
)

__all__ = [
    "DecayFit",
    "DelayHistory",
    "DelayKVError",
    "DissipativityReport",
    "EnergyTrace",
    "InstabilityPair",
    "ModalCharacteristic",
    "ModalTrajectory",
    "ModeSet",
    "ModeSpectrum",
    "NearSpectrumError",
    "NumericalError",
    "RegionMap",
    "Root",
    "SigmaCharacteristic",
    "SweepResult",
    "SystemParams",
    "ValidationError",
    "Verdict",
    "WaveField",
    "Window",
    "axis_sweep",
    "char_fn",
    "check_dissipativity",
    "default_window",
    "dirichlet_modes_1d",
    "energy_trace",
    "find_roots",
    "fit_decay_rate",
    "instability_pair",
    "lambert_w",
    "make_modes",
    "make_params",
    "mode_spectrum",
    "region_map",
    "sigma_fn",
    "sigma_spectrum",
    "simulate_mode",
    "singular_residual",
    "spectral_abscissa",
    "stability_verdict",
    "sweep_grid",
    "synthesize_wave",
    "tail_threshold",
    "transfer",
    "winding_count",
]

__version__ = "0.1.0"
