"""Method-of-steps integration of the modal delay equations and energies.

Each mode obeys ``u'' + a lambda_k u' + lambda_k u(t - tau) = 0``. The step
``h = tau / m`` divides the delay, so the delayed argument of every full RK4
stage is a stored grid value; the half-step stages read the delayed value
from the cubic Hermite interpolant of the stored ``(u, u')`` samples.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline

from delaykv.core import ModeSet, NumericalError, SystemParams, ValidationError

BLOWUP = 1e100
# explicit RK4 is stable for real negative h*mu down to about -2.785
RK4_STIFF_LIMIT = 2.7


def _check_m(m):
    if isinstance(m, bool) or int(m) != m or m < 8:
        raise ValidationError(f"m (steps per delay) must be an integer >= 8, got {m!r}")
    return int(m)


@dataclass(frozen=True)
class DelayHistory:
    """Samples of the modal history on ``[-tau, 0]`` at step ``tau / m``.

    ``values[j]`` and ``derivs[j]`` are taken at ``t = -tau + j tau/m``.
    Prefer the constructors; ``func``/``dfunc`` are kept when the history
    came from a closed form so it can be resampled exactly.
    """

    tau: float
    values: np.ndarray
    derivs: np.ndarray
    func: Optional[Callable] = None
    dfunc: Optional[Callable] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        derivs = np.asarray(self.derivs, dtype=float)
        if values.ndim != 1 or values.shape != derivs.shape:
            raise ValidationError("history values and derivatives must be 1-D of equal length")
        _check_m(values.size - 1)
        if not (np.all(np.isfinite(values)) and np.all(np.isfinite(derivs))):
            raise ValidationError("history samples must be finite")
        if not self.tau > 0:
            raise ValidationError(f"tau must be positive, got {self.tau!r}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "derivs", derivs)

    @property
    def m(self) -> int:
        return self.values.size - 1

    @property
    def times(self) -> np.ndarray:
        return np.linspace(-self.tau, 0.0, self.m + 1)

    @classmethod
    def from_function(cls, func, tau, m, dfunc=None) -> "DelayHistory":
        """Sample ``func`` on the delay grid.

        Without ``dfunc`` the derivative is taken from a not-a-knot cubic
        spline through the samples.
        """
        m = _check_m(m)
        t = np.linspace(-tau, 0.0, m + 1)
        values = np.array([func(s) for s in t], dtype=float)
        if dfunc is not None:
            derivs = np.array([dfunc(s) for s in t], dtype=float)
        else:
            derivs = CubicSpline(t, values)(t, 1)
        return cls(float(tau), values, derivs, func, dfunc)

    @classmethod
    def from_samples(cls, values, tau, derivs=None) -> "DelayHistory":
        values = np.asarray(values, dtype=float)
        m = _check_m(values.size - 1)
        if derivs is None:
            derivs = CubicSpline(np.linspace(-tau, 0.0, m + 1), values)(
                np.linspace(-tau, 0.0, m + 1), 1)
        return cls(float(tau), values, np.asarray(derivs, dtype=float))

    @classmethod
    def constant(cls, c, tau, m) -> "DelayHistory":
        c = float(c)
        return cls.from_function(lambda s: c, tau, m, lambda s: 0.0)

    @classmethod
    def cosine(cls, omega, tau, m, amplitude=1.0, phase=0.0) -> "DelayHistory":
        """``amplitude * cos(omega t + phase)``."""
        return cls.from_function(
            lambda s: amplitude * math.cos(omega * s + phase), tau, m,
            lambda s: -amplitude * omega * math.sin(omega * s + phase),
        )

    def resample(self, m) -> "DelayHistory":
        m = _check_m(m)
        if m == self.m:
            return self
        if self.func is not None:
            return DelayHistory.from_function(self.func, self.tau, m, self.dfunc)
        spline = CubicHermiteSpline(self.times, self.values, self.derivs)
        t = np.linspace(-self.tau, 0.0, m + 1)
        return DelayHistory(self.tau, spline(t), spline(t, 1))


@dataclass(frozen=True)
class ModalTrajectory:
    """Samples ``u(t_n)``, ``u'(t_n)`` at ``t_n = n h`` plus the history."""

    times: np.ndarray
    u: np.ndarray
    v: np.ndarray
    history: DelayHistory
    lambda_k: float
    h: float

    @property
    def m(self) -> int:
        return self.history.m

    def extended(self) -> np.ndarray:
        """``u`` on ``t = -tau, ..., T``; the sample at ``t = 0`` is ``u0``."""
        return np.concatenate([self.history.values[:-1], self.u])

    def delayed(self) -> np.ndarray:
        """``u(t_n - tau)`` for every output time."""
        return self.extended()[: self.u.size]


def _stage_delays(history: DelayHistory, u, v, j):
    """Delayed values at the left end, midpoint and right end of interval ``j``.

    Interval ``j`` is ``[t_j, t_{j+1}]``; negative ``j`` lies in the history.
    """
    m = history.m
    if j < 0:
        i = j + m
        y0, y1 = history.values[i], history.values[i + 1]
        d0, d1 = history.derivs[i], history.derivs[i + 1]
    else:
        y0, y1, d0, d1 = u[j], u[j + 1], v[j], v[j + 1]
    return y0, y1, d0, d1


def simulate_mode(lambda_k, p: SystemParams, history: DelayHistory, u0, v0, T,
                  m: Optional[int] = None) -> ModalTrajectory:
    """Integrate one mode on ``[0, T]`` with classical RK4 and ``h = tau/m``.

    Parameters
    ----------
    lambda_k : float
        Eigenvalue of the mode.
    history : DelayHistory
        ``u`` on ``[-tau, 0]``; resampled to ``m`` if needed.
    u0, v0 : float
        ``u(0)`` and ``u'(0)``. A mismatch between ``u0`` and the history
        at ``0`` only triggers a warning.
    T : float
        Final time; the grid runs to the first multiple of ``h`` at or
        beyond ``T``.
    m : int, optional
        Steps per delay (>= 8); defaults to ``history.m``.

    Raises
    ------
    ValidationError
        Bad inputs, or ``h * a * lambda_k`` beyond the RK4 stability limit.
    NumericalError
        ``|u|`` exceeded ``1e100``; the message carries the blow-up time.
    """
    lambda_k = float(lambda_k)
    if not lambda_k > 0:
        raise ValidationError(f"lambda_k must be positive, got {lambda_k!r}")
    if not (T > 0 and math.isfinite(T)):
        raise ValidationError(f"T must be positive, got {T!r}")
    if abs(history.tau - p.tau) > 1e-12 * p.tau:
        raise ValidationError(f"history delay {history.tau} differs from tau={p.tau}")
    m = history.m if m is None else _check_m(m)
    history = history.resample(m)
    h = p.tau / m
    a = p.a
    if h * a * lambda_k > RK4_STIFF_LIMIT:
        need = math.ceil(p.tau * a * lambda_k / RK4_STIFF_LIMIT)
        raise ValidationError(
            f"step h={h:.3g} is outside the explicit RK4 stability region for "
            f"a*lambda_k={a * lambda_k:.3g}; use m >= {need}"
        )
    u0, v0 = float(u0), float(v0)
    if abs(history.values[-1] - u0) > 1e-8 * max(1.0, abs(u0)):
        warnings.warn(
            f"history value at t=0 ({history.values[-1]:.6g}) differs from u0={u0:.6g}",
            stacklevel=2,
        )

    n_steps = int(math.ceil(T / h - 1e-9))
    u = np.empty(n_steps + 1)
    v = np.empty(n_steps + 1)
    u[0], v[0] = u0, v0
    c = a * lambda_k
    for n in range(n_steps):
        y0, y1, d0, d1 = _stage_delays(history, u, v, n - m)
        ymid = 0.5 * (y0 + y1) + 0.125 * h * (d0 - d1)
        un, vn = u[n], v[n]
        k1u, k1v = vn, -c * vn - lambda_k * y0
        k2u = vn + 0.5 * h * k1v
        k2v = -c * k2u - lambda_k * ymid
        k3u = vn + 0.5 * h * k2v
        k3v = -c * k3u - lambda_k * ymid
        k4u = vn + h * k3v
        k4v = -c * k4u - lambda_k * y1
        u[n + 1] = un + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        v[n + 1] = vn + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        if not abs(u[n + 1]) <= BLOWUP:
            raise NumericalError(f"solution diverged (|u| > 1e100) at t = {(n + 1) * h:.6g}")
    times = np.arange(n_steps + 1) * h
    return ModalTrajectory(times, u, v, history, lambda_k, h)


@dataclass(frozen=True)
class EnergyTrace:
    times: np.ndarray
    kinetic: np.ndarray
    potential: np.ndarray
    history: np.ndarray

    @property
    def E(self) -> np.ndarray:
        return self.kinetic + self.potential + self.history

    def __add__(self, other: "EnergyTrace") -> "EnergyTrace":
        if self.times.shape != other.times.shape or not np.allclose(self.times, other.times):
            raise ValidationError("energy traces must share the time grid")
        return EnergyTrace(self.times, self.kinetic + other.kinetic,
                           self.potential + other.potential, self.history + other.history)


def energy_trace(traj: ModalTrajectory, p: SystemParams, lambda_k=None) -> EnergyTrace:
    """Modal energy ``½(v² + λ_k u² + ξ λ_k ∫₀¹ u(t - τρ)² dρ)``.

    The ``rho`` integral is the composite trapezoid rule on ``rho_j = j/m``,
    which is exactly the stored delay grid.
    """
    lk = traj.lambda_k if lambda_k is None else float(lambda_k)
    m = traj.m
    ext = traj.extended()
    w = np.ones(m + 1)
    w[0] = w[-1] = 0.5
    integral = np.convolve(ext * ext, w, mode="valid") / m
    return EnergyTrace(
        traj.times.copy(),
        0.5 * traj.v * traj.v,
        0.5 * lk * traj.u * traj.u,
        0.5 * p.xi * lk * integral,
    )


class DecayFit(NamedTuple):
    omega: float
    residual: float
    poor_fit: bool


# RMS misfit of log E above which a fit is flagged; the xi-weighted energy of
# an oscillating mode ripples by O(1) in log scale around its envelope
POOR_FIT_RMS = 1.0


def fit_decay_rate(trace: EnergyTrace, t_start: float, t_end: Optional[float] = None) -> DecayFit:
    """Least-squares slope of ``log E`` on ``[t_start, t_end]``.

    Returns ``omega = -slope`` and the RMS residual of the log fit; fits
    with RMS above ``POOR_FIT_RMS`` are flagged ``poor_fit``.
    """
    t = trace.times
    t_end = t[-1] if t_end is None else t_end
    sel = (t >= t_start - 1e-12) & (t <= t_end + 1e-12)
    if sel.sum() < 3:
        raise ValidationError(f"fewer than 3 samples in [{t_start}, {t_end}]")
    E = trace.E[sel]
    if not np.all(E > 0):
        raise ValidationError("energy must be strictly positive on the fitting interval")
    ts = t[sel]
    logE = np.log(E)
    coef = np.polyfit(ts, logE, 1)
    rms = float(np.sqrt(np.mean((logE - np.polyval(coef, ts)) ** 2)))
    return DecayFit(float(-coef[0]), rms, rms > POOR_FIT_RMS)


@dataclass(frozen=True)
class DissipativityReport:
    max_violation: float  # beyond slack, >= 0
    max_excess: float  # max of dE/dt - bound before slack; negative means margin
    fd_defect: float  # max |central difference - exact energy identity|
    max_slack: float
    n_violations: int
    n_checked: int

    @property
    def ok(self) -> bool:
        return self.n_violations == 0


def check_dissipativity(traj: ModalTrajectory, trace: EnergyTrace, p: SystemParams,
                        lambda_k=None, tol_scale: float = 2.0) -> DissipativityReport:
    """Check the modal energy inequality at interior samples.

    The bound is

        dE/dt <= -(a/2) λ_k v² + (1/a - ξ/(2τ)) λ_k u(t-τ)² + λ_k u² / a_*

    with ``dE/dt`` from central differences. Each sample gets the additive
    slack ``tol_scale * h²/6 * |E'''|``, ``E'''`` estimated from third
    differences around the sample, which bounds the difference error.
    ``fd_defect`` compares the central difference with the exact identity
    ``dE/dt = -a λ_k v² - λ_k v u(t-τ) + λ_k u v + ξ λ_k (u² - u(t-τ)²)/(2τ)``.
    """
    lk = traj.lambda_k if lambda_k is None else float(lambda_k)
    E = trace.E
    n = E.size
    if n < 5:
        raise ValidationError("need at least 5 samples")
    h = traj.h
    a, tau, xi = p.a, p.tau, p.xi
    u, v, ud = traj.u, traj.v, traj.delayed()
    dE = (E[2:] - E[:-2]) / (2.0 * h)
    sl = slice(1, n - 1)
    bound = (-0.5 * a * lk * v[sl] ** 2 + (1.0 / a - xi / (2.0 * tau)) * lk * ud[sl] ** 2
             + lk * u[sl] ** 2 / p.a_star)
    exact = (-a * lk * v[sl] ** 2 - lk * v[sl] * ud[sl] + lk * u[sl] * v[sl]
             + xi * lk * (u[sl] ** 2 - ud[sl] ** 2) / (2.0 * tau))
    d3 = np.abs(np.diff(E, 3)) / h ** 3  # centred between samples i+1 and i+2
    third = np.zeros(n)
    third[1:-2] = np.maximum(third[1:-2], d3)
    third[2:-1] = np.maximum(third[2:-1], d3)
    slack = tol_scale * h * h / 6.0 * third[sl]
    excess = dE - bound
    viol = np.maximum(excess - slack, 0.0)
    return DissipativityReport(
        max_violation=float(viol.max()),
        max_excess=float(excess.max()),
        fd_defect=float(np.abs(dE - exact).max()),
        max_slack=float(slack.max()),
        n_violations=int(np.count_nonzero(viol > 0)),
        n_checked=int(dE.size),
    )


@dataclass(frozen=True)
class WaveField:
    """``u(x, t)`` and ``u_t(x, t)`` on a grid of ``[0, L]`` at snapshot times."""

    x: np.ndarray
    times: np.ndarray
    u: np.ndarray  # shape (len(times), len(x))
    ut: np.ndarray

    def energy(self, i: int) -> float:
        """``½ ∫ (u_x² + u_t²) dx`` at snapshot ``i`` by finite differences."""
        ux = np.gradient(self.u[i], self.x, edge_order=2)
        return 0.5 * float(np.trapezoid(ux * ux + self.ut[i] ** 2, self.x))


def synthesize_wave(trajs: Sequence[ModalTrajectory], modes: ModeSet, x_n: int,
                    snapshot_times: Sequence[float]) -> WaveField:
    """Superpose modal trajectories with ``sqrt(2/L) sin(k pi x / L)``.

    Snapshot times are snapped to the nearest sample of the shared time
    grid.
    """
    if modes.origin != "dirichlet-1d":
        raise ValidationError("wave synthesis needs a dirichlet-1d mode set")
    if len(trajs) != len(modes):
        raise ValidationError(f"{len(trajs)} trajectories for {len(modes)} modes")
    if int(x_n) != x_n or x_n < 3:
        raise ValidationError(f"x_n must be an integer >= 3, got {x_n!r}")
    L = modes.length
    grid = trajs[0].times
    for tr in trajs[1:]:
        if tr.times.shape != grid.shape or not np.allclose(tr.times, grid):
            raise ValidationError("all trajectories must share the time grid")
    for k, (tr, lk) in enumerate(zip(trajs, modes), start=1):
        if abs(tr.lambda_k - lk) > 1e-12 * lk:
            raise ValidationError(f"trajectory {k} has lambda_k={tr.lambda_k}, mode set has {lk}")
    snaps = np.atleast_1d(np.asarray(snapshot_times, dtype=float))
    h = grid[1] - grid[0] if grid.size > 1 else 1.0
    if np.any(snaps < -0.5 * h) or np.any(snaps > grid[-1] + 0.5 * h):
        raise ValidationError("snapshot times must lie within the simulated interval")
    idx = np.clip(np.rint(snaps / h).astype(int), 0, grid.size - 1)
    x = np.linspace(0.0, L, int(x_n))
    k = np.arange(1, len(modes) + 1)
    phi = math.sqrt(2.0 / L) * np.sin(np.outer(k, x) * math.pi / L)
    phi[:, [0, -1]] = 0.0
    U = np.array([[tr.u[i] for tr in trajs] for i in idx]).reshape(idx.size, len(trajs))
    V = np.array([[tr.v[i] for tr in trajs] for i in idx]).reshape(idx.size, len(trajs))
    return WaveField(x, grid[idx], U @ phi, V @ phi)
