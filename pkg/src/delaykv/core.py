"""Parameter validation and mode sets shared by every analysis."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


class DelayKVError(Exception):
    """Base class for all package errors."""


class ValidationError(DelayKVError, ValueError):
    """Inputs violate a documented precondition or constraint."""


class NumericalError(DelayKVError, ArithmeticError):
    """A numerical procedure failed (non-convergence, blow-up, ...)."""


def _positive(name, value):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be a real number, got {value!r}") from None
    if not math.isfinite(value) or value <= 0.0:
        raise ValidationError(f"{name} must be a finite positive number, got {value!r}")
    return value


@dataclass(frozen=True)
class SystemParams:
    """Kelvin-Voigt coefficient ``a``, delay ``tau`` and history weight ``xi``.

    ``a_star`` is the dissipativity constant ``(1/a + xi/(2 tau))**-1``; the
    shifted operator ``A - a_star**-1 I`` is dissipative in the xi-weighted
    energy space. Build instances with :func:`make_params`.
    """

    a: float
    tau: float
    xi: float
    a_star: float = field(init=False)

    def __post_init__(self):
        a = _positive("a", self.a)
        tau = _positive("tau", self.tau)
        xi = float(self.xi)
        bound = 2.0 * tau / a
        if not (math.isfinite(xi) and xi > bound):
            raise ValidationError(f"xi must exceed 2τ/a = {bound:g} (got xi={xi:g})")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "a_star", 1.0 / (1.0 / a + xi / (2.0 * tau)))

    @property
    def xi_bound(self) -> float:
        return 2.0 * self.tau / self.a

    @property
    def certified_stable(self) -> bool:
        """True when the delay does not exceed the damping coefficient."""
        return self.tau <= self.a

    def with_values(self, a=None, tau=None, xi=None) -> "SystemParams":
        """Copy with some values replaced; ``xi`` defaults to ``4 tau / a``."""
        return make_params(self.a if a is None else a, self.tau if tau is None else tau, xi)


def make_params(a, tau, xi=None) -> SystemParams:
    """Validate ``(a, tau, xi)`` and compute ``a_star``.

    When ``xi`` is omitted it is set to ``4 tau / a``, twice the admissibility
    bound, so that ``xi/(2 tau) - 1/a`` is strictly positive.

    >>> make_params(1, 1).a_star
    0.3333333333333333
    """
    a = _positive("a", a)
    tau = _positive("tau", tau)
    if xi is None:
        xi = 4.0 * tau / a
    return SystemParams(a, tau, xi)


@dataclass(frozen=True)
class ModeSet:
    """Sorted positive eigenvalues of ``BB*``.

    ``origin`` is ``"user"`` for explicit lists and ``"dirichlet-1d"`` for the
    closed-form interval spectrum, in which case ``length`` is the interval
    length ``L``.
    """

    lambdas: tuple
    origin: str = "user"
    length: Optional[float] = None

    def __post_init__(self):
        vals = tuple(float(v) for v in self.lambdas)
        if not vals:
            raise ValidationError("a mode set needs at least one eigenvalue")
        for v in vals:
            if not math.isfinite(v) or v <= 0.0:
                raise ValidationError(f"mode eigenvalues must be finite and positive, got {v!r}")
        if any(b < a for a, b in zip(vals, vals[1:])):
            raise ValidationError("mode eigenvalues must be sorted non-decreasing")
        if self.origin not in ("user", "dirichlet-1d"):
            raise ValidationError(f"unknown mode-set origin {self.origin!r}")
        if self.origin == "dirichlet-1d":
            _positive("L", self.length)
        object.__setattr__(self, "lambdas", vals)

    def __len__(self):
        return len(self.lambdas)

    def __iter__(self):
        return iter(self.lambdas)

    def __getitem__(self, i):
        return self.lambdas[i]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.lambdas, dtype=float)

    def union(self, extra: Sequence[float]) -> "ModeSet":
        return ModeSet(tuple(sorted(self.lambdas + tuple(float(v) for v in extra))))


def make_modes(lambdas: Sequence[float]) -> ModeSet:
    """User-supplied eigenvalue list; sorted before validation."""
    try:
        vals = sorted(float(v) for v in lambdas)
    except (TypeError, ValueError):
        raise ValidationError(f"mode eigenvalues must be real numbers, got {lambdas!r}") from None
    return ModeSet(tuple(vals))


def dirichlet_modes_1d(L, K) -> ModeSet:
    """First ``K`` Dirichlet eigenvalues ``(k pi / L)**2`` of ``-d²/dx²`` on ``(0, L)``."""
    L = _positive("L", L)
    if isinstance(K, bool) or int(K) != K or K < 1:
        raise ValidationError(f"K must be a positive integer, got {K!r}")
    k = np.arange(1, int(K) + 1, dtype=float)
    return ModeSet(tuple((k * math.pi / L) ** 2), origin="dirichlet-1d", length=L)
