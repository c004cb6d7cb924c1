"""Modal transfer functions on the imaginary axis.

Solving the resolvent equation for the displacement component of mode
``lambda_k`` gives the factor ``H_k(lam) = 1 / (lam² + (a lam + exp(-lam tau))
lambda_k)``. Bounded ``|H_k(i w)|`` over all ``w`` and all modes is the
computable core of the resolvent bound on the closed right half-plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from delaykv.core import SystemParams, ValidationError
from delaykv.quasipoly import char_fn
from delaykv.spectrum import mode_spectrum

SINGULAR_EPS = 1e-14


class NearSpectrumError(ValidationError):
    """The evaluation point is (numerically) a characteristic root."""

    def __init__(self, lam):
        self.lam = complex(lam)
        super().__init__(f"near-spectrum: transfer function is singular at lam={self.lam}")


def transfer(lam, lambda_k, p: SystemParams) -> complex:
    """``H_k(lam)``; raises :class:`NearSpectrumError` near a root."""
    lam = complex(lam)
    den = complex(char_fn(lam, lambda_k, p))
    if not abs(den) > SINGULAR_EPS * (1.0 + abs(lam) ** 2):
        raise NearSpectrumError(lam)
    return 1.0 / den


def tail_threshold(lambda_k, p: SystemParams) -> float:
    """Frequency beyond which ``|H_k(i w)| <= 2 / w²``.

    From ``|g(i w)| >= w² - lambda_k (a w + 1)``, the bound holds once
    ``w²/2 >= lambda_k (a w + 1)``.
    """
    al = p.a * lambda_k
    return al + math.sqrt(al * al + 2.0 * lambda_k)


@dataclass(frozen=True)
class SweepResult:
    omegas: np.ndarray
    magnitudes: np.ndarray
    sup_value: float
    sup_omega: float
    lambda_k: float

    @property
    def singular(self) -> bool:
        return math.isinf(self.sup_value)


def sweep_grid(omega_max: float, n: int, focus: Optional[float] = None) -> np.ndarray:
    """Symmetric frequency grid on ``[-omega_max, omega_max]``.

    Half of the positive samples are log-spaced from ``omega_max * 1e-4``,
    the rest cluster geometrically around ``focus`` (when given and inside
    the range), which is included exactly. Contains ``0`` and is mirrored.
    """
    if int(n) != n or n < 64:
        raise ValidationError(f"n must be an integer >= 64, got {n!r}")
    if not (omega_max > 0 and math.isfinite(omega_max)):
        raise ValidationError(f"omega_max must be positive, got {omega_max!r}")
    half = (int(n) - 1) // 2
    pos = [np.logspace(math.log10(omega_max) - 4.0, math.log10(omega_max), half - half // 2)]
    if focus is not None and 0 < abs(focus) <= omega_max:
        f = abs(focus)
        k = half // 2
        offs = np.logspace(-12, 0, k // 2) * 0.5 * f
        pos.append(np.concatenate([[f], f - offs, np.minimum(f + offs, omega_max)]))
    else:
        pos.append(np.linspace(0.0, omega_max, half // 2 + 2)[1:-1])
    pos = np.unique(np.concatenate(pos))
    pos = pos[pos > 0]
    return np.concatenate([-pos[::-1], [0.0], pos])


def axis_sweep(lambda_k, p: SystemParams, omega_max: float, n: int = 1024,
               focus: Optional[float] = None) -> SweepResult:
    """Sample ``|H_k(i w)|`` on :func:`sweep_grid`.

    ``focus`` is the frequency to resolve densely; by default the imaginary
    part of the dominant root of the mode. A sample that hits the spectrum
    is reported as ``sup_value = inf`` at that frequency.
    """
    if focus is None:
        dom = mode_spectrum(lambda_k, p).dominant
        focus = abs(dom.im) if dom is not None else None
    omegas = sweep_grid(omega_max, n, focus)
    lam = 1j * omegas
    den = np.asarray(char_fn(lam, lambda_k, p))
    mags = np.empty(omegas.size)
    near = ~(np.abs(den) > SINGULAR_EPS * (1.0 + omegas ** 2))
    mags[~near] = 1.0 / np.abs(den[~near])
    mags[near] = np.inf
    i = int(np.argmax(mags))
    return SweepResult(omegas, mags, float(mags[i]), float(omegas[i]), float(lambda_k))
