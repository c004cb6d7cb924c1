"""Characteristic functions, Lambert W and certified rectangle root finding.

Two characteristic families are handled: the modal quasi-polynomial

    g(lam) = lam**2 + a*lambda_k*lam + lambda_k*exp(-lam*tau)

(``lambda_k`` times ``exp(-lam tau) + lam**2/lambda_k + a lam``, so the zero
sets coincide) and the essential-spectrum function

    s(lam) = a*lam + exp(-lam*tau).

Roots inside a rectangle are counted with the argument principle and located
by sign-change seeding on a grid followed by damped Newton polishing. The
count certifies the search: ``find_roots`` either returns exactly as many
roots as the winding number or raises.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from delaykv.core import NumericalError, SystemParams, ValidationError

# deepest admissible left edge, in units of 1/tau: |exp(-lam tau)| <= e**30 there
RE_MIN_CAP = 30.0

_INV_E = math.exp(-1.0)
_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Root:
    """A located zero ``value`` of a characteristic function.

    ``residual`` is ``|f(value)|`` divided by ``max(1, scale)``, where
    ``scale`` is the sum of the moduli of the terms of ``f``; it is the
    absolute residual for the O(1) roots near the imaginary axis and stays
    meaningful deep in the left half-plane where ``exp(-lam tau)`` is huge.
    ``source`` is ``"mode:k"`` or ``"sigma"`` / ``"sigma:j"``.
    """

    value: complex
    residual: float
    source: str
    iterations: int = 0

    @property
    def re(self) -> float:
        return self.value.real

    @property
    def im(self) -> float:
        return self.value.imag


@dataclass(frozen=True)
class Window:
    """Closed rectangle ``[re_min, re_max] x [im_min, im_max]``."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    grid_n: int = 64

    def __post_init__(self):
        vals = [float(v) for v in (self.re_min, self.re_max, self.im_min, self.im_max)]
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError("window bounds must be finite")
        if not (vals[0] < vals[1] and vals[2] < vals[3]):
            raise ValidationError(
                f"window needs re_min < re_max and im_min < im_max, got {tuple(vals)}"
            )
        if int(self.grid_n) != self.grid_n or self.grid_n < 16:
            raise ValidationError(f"grid_n must be an integer >= 16, got {self.grid_n!r}")
        for name, v in zip(("re_min", "re_max", "im_min", "im_max"), vals):
            object.__setattr__(self, name, v)
        object.__setattr__(self, "grid_n", int(self.grid_n))

    @property
    def width(self) -> float:
        return self.re_max - self.re_min

    @property
    def height(self) -> float:
        return self.im_max - self.im_min

    def contains(self, z, slack=0.0) -> bool:
        return (
            self.re_min - slack <= z.real <= self.re_max + slack
            and self.im_min - slack <= z.imag <= self.im_max + slack
        )

    def split(self):
        """Halve along the longer side."""
        if self.width >= self.height:
            mid = 0.5 * (self.re_min + self.re_max)
            return (
                Window(self.re_min, mid, self.im_min, self.im_max, self.grid_n),
                Window(mid, self.re_max, self.im_min, self.im_max, self.grid_n),
            )
        mid = 0.5 * (self.im_min + self.im_max)
        return (
            Window(self.re_min, self.re_max, self.im_min, mid, self.grid_n),
            Window(self.re_min, self.re_max, mid, self.im_max, self.grid_n),
        )

    def shifted(self, dre=0.0, dim=0.0) -> "Window":
        return Window(self.re_min + dre, self.re_max + dre, self.im_min + dim,
                      self.im_max + dim, self.grid_n)


def char_fn(lam, lambda_k, p: SystemParams):
    """Modal characteristic function ``lam² + a λ_k lam + λ_k exp(-lam τ)``.

    Vectorised over ``lam``.
    """
    lam = np.asarray(lam, dtype=complex) if np.ndim(lam) else complex(lam)
    exp = np.exp if isinstance(lam, np.ndarray) else cmath.exp
    return lam * lam + p.a * lambda_k * lam + lambda_k * exp(-lam * p.tau)


def sigma_fn(lam, p: SystemParams):
    """``a lam + exp(-lam τ)``; its zeros form the essential spectrum."""
    lam = np.asarray(lam, dtype=complex) if np.ndim(lam) else complex(lam)
    exp = np.exp if isinstance(lam, np.ndarray) else cmath.exp
    return p.a * lam + exp(-lam * p.tau)


class ModalCharacteristic:
    """Callable handle for :func:`char_fn` at a fixed mode, with derivative."""

    def __init__(self, lambda_k, p: SystemParams, mode_index: Optional[int] = None):
        if not lambda_k > 0:
            raise ValidationError(f"lambda_k must be positive, got {lambda_k!r}")
        self.lambda_k = float(lambda_k)
        self.p = p
        self.tau = p.tau
        self.source = "mode" if mode_index is None else f"mode:{mode_index}"

    def __call__(self, lam):
        return char_fn(lam, self.lambda_k, self.p)

    def derivative(self, lam):
        lk, a, tau = self.lambda_k, self.p.a, self.p.tau
        return 2.0 * lam + a * lk - tau * lk * np.exp(-lam * tau)

    def scale(self, lam):
        mod = np.abs(lam)
        return mod * mod + self.p.a * self.lambda_k * mod + self.lambda_k * np.exp(
            -self.tau * np.real(lam))


class SigmaCharacteristic:
    """Callable handle for :func:`sigma_fn`, with derivative."""

    def __init__(self, p: SystemParams):
        self.p = p
        self.tau = p.tau
        self.source = "sigma"

    def __call__(self, lam):
        return sigma_fn(lam, self.p)

    def derivative(self, lam):
        return self.p.a - self.p.tau * np.exp(-lam * self.p.tau)

    def scale(self, lam):
        return self.p.a * np.abs(lam) + np.exp(-self.tau * np.real(lam))


# ---------------------------------------------------------------------------
# Lambert W
# ---------------------------------------------------------------------------

def _branch_point_series(z, sign):
    p = sign * cmath.sqrt(2.0 * (math.e * z + 1.0))
    return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p ** 3


def _asymptotic(z, k):
    l1 = cmath.log(z) + 2j * math.pi * k
    l2 = cmath.log(l1)
    return l1 - l2 + l2 / l1 + l2 * (l2 - 2.0) / (2.0 * l1 * l1)


def _initial_guess(z, k):
    near = abs(z + _INV_E) < 0.3
    if k == 0:
        if abs(z + _INV_E) < 0.7:
            return _branch_point_series(z, 1.0)
        if abs(z) <= 2.5 and z.real > -0.3:
            # Winitzki-type start, accurate to a few percent on this region
            lz = cmath.log(1.0 + z)
            return lz * (1.0 - cmath.log(1.0 + lz) / (2.0 + lz))
        return _asymptotic(z, 0)
    if near and ((k == -1 and z.imag >= 0.0) or (k == 1 and z.imag < 0.0)):
        return _branch_point_series(z, -1.0)
    return _asymptotic(z, k)


def lambert_w(branch: int, z, maxiter: int = 50) -> complex:
    """Branch ``branch`` of the Lambert W function: ``w * exp(w) == z``.

    Branch cuts follow the usual convention: ``W_0`` is real on
    ``[-1/e, inf)`` and has its cut along ``(-inf, -1/e)``; the other
    branches are cut along the negative real axis. On a cut the value is
    taken from the upper side, so for real ``x < -1/e`` one gets
    ``W_{-1}(x) == conj(W_0(x))``.

    The starting value comes from the branch-point Puiseux series near
    ``-1/e``, a logarithmic approximation for small ``|z|`` on the principal
    branch, or the asymptotic series ``L1 - ln L1 + ...`` with
    ``L1 = ln z + 2 pi i k``, and is refined by Halley's method.

    Raises
    ------
    ValidationError
        ``z == 0`` on a non-principal branch (the value is -inf there).
    NumericalError
        Halley's iteration did not converge within ``maxiter`` steps.
    """
    if isinstance(branch, bool) or int(branch) != branch:
        raise ValidationError(f"branch must be an integer, got {branch!r}")
    k = int(branch)
    z = complex(z)
    # fold signed zeros so that the cut is approached from above
    z = complex(z.real + 0.0, z.imag + 0.0)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValidationError(f"z must be finite, got {z!r}")
    if z == 0:
        if k == 0:
            return 0j
        raise ValidationError(f"W_{k}(0) is unbounded; z must be nonzero off the principal branch")
    if k in (0, -1) and abs(z + _INV_E) <= 4.0 * np.finfo(float).eps:
        return complex(-1.0, 0.0)

    w = _initial_guess(z, k)
    tol_z = 1e-12 * max(1.0, abs(z))
    for it in range(maxiter):
        ew = cmath.exp(w)
        f = w * ew - z
        wp1 = w + 1.0
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        if denom == 0:
            break
        step = f / denom
        w = w - step
        if abs(step) <= 4.0 * np.finfo(float).eps * (1.0 + abs(w)):
            break
    res = abs(w * cmath.exp(w) - z)
    if not res <= tol_z:
        # one Newton step can recover the last digits near the branch point
        ew = cmath.exp(w)
        if ew * (w + 1.0) != 0:
            w2 = w - (w * ew - z) / (ew * (w + 1.0))
            res2 = abs(w2 * cmath.exp(w2) - z)
            if res2 < res:
                w, res = w2, res2
    if not res <= tol_z or not (math.isfinite(w.real) and math.isfinite(w.imag)):
        raise NumericalError(
            f"Lambert W_{k}({z}) did not converge: last iterate {w}, residual {res:.3e}"
        )
    return w


# ---------------------------------------------------------------------------
# Argument principle
# ---------------------------------------------------------------------------

# a boundary sample with |f| <= this fraction of the term scale counts as a zero
BOUNDARY_REL_EPS = 1e-9
_MAX_DARG = 0.5
_MAX_REFINE = 40


def _scale(f, z):
    s = getattr(f, "scale", None)
    if s is None:
        return np.ones(np.shape(z))
    return np.maximum(1.0, s(z))


def _edge_samples(z0, z1, n):
    t = np.linspace(0.0, 1.0, n + 1)
    return z0 + (z1 - z0) * t


def _boundary(f, w: Window):
    """Counter-clockwise boundary samples, dense enough for the delay term."""
    tau = getattr(f, "tau", 0.0) or 0.0
    corners = [
        complex(w.re_min, w.im_min), complex(w.re_max, w.im_min),
        complex(w.re_max, w.im_max), complex(w.re_min, w.im_max),
    ]
    pieces = []
    for i in range(4):
        z0, z1 = corners[i], corners[(i + 1) % 4]
        length = abs(z1 - z0)
        n = max(w.grid_n, int(math.ceil(length * tau / 0.25)), int(math.ceil(length / 0.25)))
        pieces.append(_edge_samples(z0, z1, n)[:-1])
    pieces.append(np.array([corners[0]]))
    return np.concatenate(pieces)


def _indeterminate(z, w):
    return ValidationError(
        f"indeterminate window {w}: characteristic function vanishes (numerically) "
        f"on the boundary near {z:.6g}; perturb the window"
    )


def winding_count(f: Callable, w: Window) -> int:
    """Number of zeros of ``f`` inside ``w`` (with multiplicity).

    The boundary is sampled counter-clockwise and adaptively bisected until
    the argument of ``f`` changes by less than 0.5 rad between neighbouring
    samples; the accumulated change divided by ``2 pi`` is rounded to the
    nearest integer.

    Raises
    ------
    ValidationError
        If a boundary sample is numerically a zero of ``f`` ("indeterminate
        window").
    """
    z = _boundary(f, w)
    fz = np.asarray(f(z), dtype=complex)
    for _ in range(_MAX_REFINE):
        small = np.abs(fz) <= BOUNDARY_REL_EPS * _scale(f, z)
        if small.any():
            raise _indeterminate(z[np.argmax(small)], w)
        darg = np.angle(fz[1:] / fz[:-1])
        bad = np.abs(darg) > _MAX_DARG
        if not bad.any():
            total = darg.sum() / _TWO_PI
            count = int(round(total))
            if abs(total - count) > 1e-6 or count < 0:
                raise NumericalError(
                    f"argument principle returned non-integer {total!r} on {w}"
                )
            return count
        idx = np.nonzero(bad)[0]
        mids = 0.5 * (z[idx] + z[idx + 1])
        fm = np.asarray(f(mids), dtype=complex)
        z = np.insert(z, idx + 1, mids)
        fz = np.insert(fz, idx + 1, fm)
    raise _indeterminate(z[np.argmax(np.abs(np.diff(np.unwrap(np.angle(fz)))))], w)


# ---------------------------------------------------------------------------
# Root finding
# ---------------------------------------------------------------------------

def _derivative(f):
    d = getattr(f, "derivative", None)
    if d is not None:
        return d

    def fd(z, h=1e-7):
        hz = h * (1.0 + abs(z))
        return (f(z + hz) - f(z - hz)) / (2.0 * hz)
    return fd


def _rel_residual(f, z):
    return float(abs(f(z)) / _scale(f, z))


def newton_polish(f, z0, tol, maxiter=60):
    """Damped Newton iteration from ``z0``.

    Each accepted step strictly decreases ``|f|`` (backtracking halves the
    step up to 30 times); iteration stops when the relative residual is at
    most ``tol`` and the step has stalled, or nothing improves.

    Returns ``(z, relative residual, iterations)``.
    """
    df = _derivative(f)
    z = complex(z0)
    fz = complex(f(z))
    it = 0
    for it in range(1, maxiter + 1):
        d = complex(df(z))
        if d == 0 or not cmath.isfinite(d):
            break
        step = fz / d
        accepted = False
        t = 1.0
        for _ in range(30):
            zn = z - t * step
            fn = complex(f(zn))
            if cmath.isfinite(fn) and abs(fn) < abs(fz):
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        z, fz = zn, fn
        if abs(t * step) <= 8.0 * np.finfo(float).eps * (1.0 + abs(z)):
            break
    return z, _rel_residual(f, z), it


def _seed_grid(f, w: Window, refine: int):
    """Cell centres where both Re f and Im f change sign (QPmR-style)."""
    tau = getattr(f, "tau", 0.0) or 0.0
    mult = 2 ** refine
    nx = max(w.grid_n, int(math.ceil(w.width * tau * 4)), int(math.ceil(w.width * 4)))
    ny = max(w.grid_n, int(math.ceil(w.height * tau * 4)), int(math.ceil(w.height * 4)))
    nx, ny = min(nx * mult, 4096), min(ny * mult, 8192)
    xs = np.linspace(w.re_min, w.re_max, nx + 1)
    ys = np.linspace(w.im_min, w.im_max, ny + 1)
    Z = xs[None, :] + 1j * ys[:, None]
    F = np.asarray(f(Z), dtype=complex)
    # normalise away the exponential growth so signs are not swamped by inf
    F = F / _scale(f, Z)
    re_s, im_s = np.signbit(F.real), np.signbit(F.imag)

    def changes(s):
        c = s[:-1, :-1]
        return (c != s[1:, :-1]) | (c != s[:-1, 1:]) | (c != s[1:, 1:])

    cells = changes(re_s) & changes(im_s)
    iy, ix = np.nonzero(cells)
    dx, dy = xs[1] - xs[0], ys[1] - ys[0]
    return xs[ix] + 0.5 * dx + 1j * (ys[iy] + 0.5 * dy)


def _dedupe_insert(roots, z, radius):
    for r in roots:
        if abs(r - z) <= radius:
            return False
    roots.append(z)
    return True


def find_roots(f, w: Window, tol: float = 1e-10, max_refine: int = 2) -> List[Root]:
    """All zeros of ``f`` in the closed window ``w``.

    Seeds come from cells of a grid where both the real and the imaginary
    part of ``f`` change sign; each seed is polished by damped Newton.
    Roots are deduplicated with radius ``10 tol (1 + |lam|)``. The result is
    checked against :func:`winding_count`; on a shortfall the grid is
    refined (``max_refine`` doublings) and then the window is bisected
    recursively around the missing roots.

    Results are sorted by (Re, Im).

    Raises
    ------
    NumericalError
        "incomplete root capture" when the located roots never match the
        certified count.
    """
    if not tol > 0:
        raise ValidationError(f"tol must be positive, got {tol!r}")
    tau = getattr(f, "tau", 0.0) or 0.0
    if tau > 0 and w.re_min < -RE_MIN_CAP / tau:
        raise ValidationError(
            f"window re_min={w.re_min:g} is below the conditioning cap -{RE_MIN_CAP:g}/tau"
        )
    expected = winding_count(f, w)
    source = getattr(f, "source", "f")
    found = {}  # value -> (residual, iterations)
    values: List[complex] = []
    # roots just outside the window are neither expected nor kept
    slack = 1e-12 * (1.0 + max(abs(w.re_min), abs(w.re_max), abs(w.im_min), abs(w.im_max)))

    def consider(seed):
        z, res, it = newton_polish(f, seed, tol)
        if res <= tol and w.contains(z, slack):
            if _dedupe_insert(values, z, 10.0 * tol * (1.0 + abs(z))):
                found[z] = (res, it)

    if expected:
        for refine in range(max_refine + 1):
            for seed in _seed_grid(f, w, refine):
                consider(seed)
            if len(values) >= expected:
                break
        if len(values) < expected:
            _bisect_search(f, w, values, consider, depth=0)
    if len(values) != expected:
        raise NumericalError(
            f"incomplete root capture in {w}: argument principle counts {expected}, "
            f"located {len(values)}"
        )
    roots = [Root(z, found[z][0], source, found[z][1]) for z in values]
    roots.sort(key=lambda r: (r.re, r.im))
    return roots


def _bisect_search(f, w, values, consider, depth):
    if depth > 12:
        return
    inside = sum(1 for z in values if w.contains(z))
    try:
        n = winding_count(f, w)
    except ValidationError:
        # a root sits on this sub-boundary: seed from it directly
        n = inside + 1
    if n <= inside:
        return
    for seed in _seed_grid(f, w, 1):
        consider(seed)
    consider(complex(0.5 * (w.re_min + w.re_max), 0.5 * (w.im_min + w.im_max)))
    if sum(1 for z in values if w.contains(z)) >= n:
        return
    for sub in w.split():
        _bisect_search(f, sub, values, consider, depth + 1)
