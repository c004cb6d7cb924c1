"""Per-mode spectra, the essential spectrum, abscissae and stability maps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from delaykv.core import (
    DelayKVError,
    ModeSet,
    NumericalError,
    SystemParams,
    ValidationError,
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
)

VERDICT_MARGIN = 1e-8
DEFAULT_TOL = 1e-10
DEFAULT_BRANCHES = 5

# small irrational offsets tried when a default window edge hits a root
_NUDGES = ((0.0, 0.0), (0.0137, 0.0291), (-0.0219, 0.0173), (0.0311, -0.0407))


@dataclass(frozen=True)
class ModeSpectrum:
    mode_index: int
    lambda_k: float
    roots: Tuple[Root, ...]
    window: Window

    @property
    def abscissa(self) -> float:
        """Largest real part, ``-inf`` when the window holds no root."""
        if not self.roots:
            return -math.inf
        return max(r.re for r in self.roots)

    @property
    def dominant(self) -> Optional[Root]:
        if not self.roots:
            return None
        return max(self.roots, key=lambda r: (r.re, abs(r.im)))


def right_half_plane_bounds(lambda_k, p: SystemParams):
    """Box that contains every characteristic root with ``Re >= 0``.

    For such a root ``x + iy`` the imaginary part of the characteristic
    equation gives ``a <= tau exp(-tau x)``, hence
    ``x <= max(0, ln(tau/a)/tau)``; the real part then bounds
    ``y**2 <= x**2 + lambda_k (1 + a x)``.
    """
    x_max = max(0.0, math.log(p.tau / p.a) / p.tau)
    y_max = math.sqrt(x_max * x_max + lambda_k * (1.0 + p.a * x_max))
    return x_max, y_max


def default_window(lambda_k, p: SystemParams, grid_n: int = 64) -> Window:
    """Search rectangle for one mode.

    ``Re`` in ``[-min(30, 10/tau), 2]`` and ``|Im| <= max(4 sqrt(lambda_k),
    8 pi / tau)``, enlarged where needed so that it encloses the box of
    :func:`right_half_plane_bounds` with a margin; every unstable or
    marginal root is therefore inside.
    """
    x_max, y_max = right_half_plane_bounds(lambda_k, p)
    re_max = max(2.0, x_max + 1.0)
    height = max(4.0 * math.sqrt(lambda_k), 8.0 * math.pi / p.tau, y_max + 1.0)
    return Window(-min(30.0, 10.0 / p.tau), re_max, -height, height, grid_n)


def _nudged(w: Window, dre, dim) -> Window:
    # keep the left edge inside the conditioning cap
    return Window(w.re_min + abs(dre), w.re_max + dre, w.im_min - dim, w.im_max + dim, w.grid_n)


def mode_spectrum(lambda_k, p: SystemParams, w: Optional[Window] = None,
                  tol: float = DEFAULT_TOL, mode_index: int = 1) -> ModeSpectrum:
    """Characteristic roots of one mode inside ``w``.

    With ``w=None`` the :func:`default_window` is used; if one of its edges
    happens to pass through a root the window is nudged by a small offset and
    the search repeated. An explicit window is used as given.
    """
    f = ModalCharacteristic(lambda_k, p, mode_index)
    if w is not None:
        return ModeSpectrum(mode_index, f.lambda_k, tuple(find_roots(f, w, tol)), w)
    base = default_window(f.lambda_k, p)
    err: Optional[Exception] = None
    for dre, dim in _NUDGES:
        win = _nudged(base, dre, dim)
        try:
            return ModeSpectrum(mode_index, f.lambda_k, tuple(find_roots(f, win, tol)), win)
        except ValidationError as exc:
            if "indeterminate" not in str(exc):
                raise
            err = exc
    raise err


def sigma_spectrum(p: SystemParams, n_branches: int = DEFAULT_BRANCHES) -> List[Root]:
    """Zeros of ``a lam + exp(-lam tau)`` on Lambert branches ``-n..n``.

    ``a lam exp(lam tau) = -1`` is ``(lam tau) exp(lam tau) = -tau/a``, so
    branch ``j`` gives ``lam_j = W_j(-tau/a) / tau``. Sorted by (Re, Im).
    """
    if isinstance(n_branches, bool) or int(n_branches) != n_branches or n_branches < 1:
        raise ValidationError(f"n_branches must be a positive integer, got {n_branches!r}")
    z = -p.tau / p.a
    f = SigmaCharacteristic(p)
    roots = []
    for j in range(-int(n_branches), int(n_branches) + 1):
        lam = lambert_w(j, z) / p.tau
        absres = abs(sigma_fn(lam, p))
        if not absres <= 1e-10 * max(1.0, float(f.scale(lam))):
            raise NumericalError(f"sigma root on branch {j} has residual {absres:.3e}")
        roots.append(Root(lam, absres / max(1.0, float(f.scale(lam))), f"sigma:{j}", 0))
    roots.sort(key=lambda r: (r.re, r.im))
    return roots


def spectral_abscissa(modes: ModeSet, p: SystemParams, w: Optional[Window] = None,
                      n_branches: int = DEFAULT_BRANCHES,
                      tol: float = DEFAULT_TOL) -> Tuple[float, Optional[Root]]:
    """Largest real part over all mode roots and the essential-spectrum roots.

    Returns the abscissa and the root attaining it.
    """
    if len(modes) == 0:
        raise ValidationError("modes must be nonempty")
    best: Optional[Root] = None
    for k, lk in enumerate(modes, start=1):
        for r in mode_spectrum(lk, p, w, tol, mode_index=k).roots:
            if best is None or r.re > best.re:
                best = r
    for r in sigma_spectrum(p, n_branches):
        if best is None or r.re > best.re:
            best = r
    return (best.re if best is not None else -math.inf), best


@dataclass(frozen=True)
class Verdict:
    certified: bool
    reason: str
    abscissa: float
    verdict: str
    root: Optional[Root] = None


def classify(abscissa: float, margin: float = VERDICT_MARGIN) -> str:
    if not math.isfinite(abscissa) and not abscissa < 0:
        return "indeterminate"
    if abscissa < -margin:
        return "stable"
    if abscissa > margin:
        return "unstable"
    return "indeterminate"


def stability_verdict(p: SystemParams, modes: ModeSet, w: Optional[Window] = None,
                      n_branches: int = DEFAULT_BRANCHES) -> Verdict:
    """Exponential-stability verdict.

    ``tau <= a`` is a sufficient condition and is reported as a certificate;
    the numerical abscissa is still computed and must agree. Otherwise the
    verdict follows the sign of the abscissa with margin ``1e-8``.

    Raises
    ------
    NumericalError
        ``tau <= a`` but the computed abscissa exceeds the margin.
    """
    absc, root = spectral_abscissa(modes, p, w, n_branches)
    verdict = classify(absc)
    if p.certified_stable:
        if absc > VERDICT_MARGIN:
            raise NumericalError(
                f"internal inconsistency: tau={p.tau:g} <= a={p.a:g} but the computed "
                f"spectral abscissa is {absc:.3e} at {root.value if root else None}"
            )
        return Verdict(True, "tau <= a: exponentially stable", absc, "stable", root)
    return Verdict(False, "tau > a: numerical abscissa", absc, verdict, root)


@dataclass(frozen=True)
class InstabilityPair:
    """Damping/delay pair ``a < tau`` with a root ``i y`` on the imaginary axis.

    Parametrised by ``theta = tau y`` in ``(0, pi/2)``: ``y = sqrt(lambda_k
    cos theta)``, ``a = sin(theta)/y``, ``tau = theta/y``. Then
    ``cos(tau y) = y²/lambda_k`` and ``sin(tau y) = a y`` hold by
    construction, and ``a/tau = sin(theta)/theta < 1``.
    """

    lambda_k: float
    theta: float
    y: float
    a: float
    tau: float

    @property
    def params(self) -> SystemParams:
        return make_params(self.a, self.tau)

    @property
    def residual(self) -> float:
        """``|g(i y)|`` for the modal characteristic function."""
        return abs(char_fn(1j * self.y, self.lambda_k, self.params))

    @property
    def closed_form_y(self) -> float:
        """Positive root of ``y**4/lambda_k**2 + a**2 y**2 = 1``."""
        a2l2 = self.a ** 2 * self.lambda_k ** 2
        return math.sqrt((-a2l2 + math.sqrt(a2l2 ** 2 + 4.0 * self.lambda_k ** 2)) / 2.0)

    def as_dict(self) -> Dict[str, float]:
        return {
            "lambda_k": self.lambda_k,
            "theta": self.theta,
            "y": self.y,
            "a": self.a,
            "tau": self.tau,
            "a_lt_tau": self.a < self.tau,
            "residual": self.residual,
            "closed_form_y": self.closed_form_y,
        }


def instability_pair(lambda_k, theta) -> InstabilityPair:
    lambda_k = float(lambda_k)
    theta = float(theta)
    if not (math.isfinite(lambda_k) and lambda_k > 0):
        raise ValidationError(f"lambda_k must be positive, got {lambda_k!r}")
    if not 0.0 < theta < math.pi / 2:
        raise ValidationError(f"theta must lie in the open interval (0, pi/2), got {theta!r}")
    y = math.sqrt(lambda_k * math.cos(theta))
    return InstabilityPair(lambda_k, theta, y, math.sin(theta) / y, theta / y)


@dataclass
class RegionMap:
    """Stability chart over an ``(a, tau)`` grid.

    ``abscissa[i, j]`` and ``verdict[i, j]`` belong to ``a_values[i]``,
    ``tau_values[j]``. Failed cells carry ``nan`` / ``"indeterminate"`` and an
    entry in ``errors``.
    """

    a_values: np.ndarray
    tau_values: np.ndarray
    abscissa: np.ndarray
    verdict: np.ndarray
    errors: Dict[Tuple[int, int], str] = field(default_factory=dict)

    def cells(self):
        for i, a in enumerate(self.a_values):
            for j, tau in enumerate(self.tau_values):
                yield float(a), float(tau), float(self.abscissa[i, j]), str(self.verdict[i, j])


def _axis(name, values):
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size < 1 or not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise ValidationError(f"{name} axis must hold at least one finite positive value")
    return arr


def region_map(a_values: Sequence[float], tau_values: Sequence[float], modes: ModeSet,
               w: Optional[Window] = None, n_branches: int = DEFAULT_BRANCHES) -> RegionMap:
    """Spectral abscissa and verdict on every ``(a, tau)`` cell.

    ``xi`` is re-derived per cell as ``4 tau / a``. Per-cell failures are
    recorded, not raised.
    """
    a_arr = _axis("a", a_values)
    t_arr = _axis("tau", tau_values)
    absc = np.full((a_arr.size, t_arr.size), np.nan)
    verdict = np.full((a_arr.size, t_arr.size), "indeterminate", dtype=object)
    errors = {}
    for i, a in enumerate(a_arr):
        for j, tau in enumerate(t_arr):
            try:
                p = make_params(a, tau)
                x, _ = spectral_abscissa(modes, p, w, n_branches)
            except DelayKVError as exc:
                errors[(i, j)] = str(exc)
                continue
            absc[i, j] = x
            verdict[i, j] = classify(x)
    return RegionMap(a_arr, t_arr, absc, verdict, errors)


def singular_residual(lam, mode_index: int, modes: ModeSet, p: SystemParams) -> float:
    """Defect ``|lam|² / sqrt(lambda_k)`` of the singular sequence at ``lam``.

    For ``lam`` in the essential spectrum the vectors
    ``U_k = (u_k, lam u_k, B*u_k exp(-lam tau rho))`` with
    ``u_k = phi_k / sqrt(lambda_k)`` satisfy
    ``(lam I - A) U_k = lam² (0, u_k, 0)``, whose norm is returned.
    ``mode_index`` is 1-based.
    """
    lam = complex(lam)
    if not abs(sigma_fn(lam, p)) <= 1e-8:
        raise ValidationError(
            f"lam={lam} is not in the essential spectrum: |a lam + exp(-lam tau)| = "
            f"{abs(sigma_fn(lam, p)):.3e} > 1e-8"
        )
    if not 1 <= mode_index <= len(modes):
        raise ValidationError(f"mode_index must lie in 1..{len(modes)}, got {mode_index}")
    return abs(lam) ** 2 / math.sqrt(modes[mode_index - 1])
