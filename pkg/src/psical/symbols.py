"""Gelfand-Shilov seminorms, STFT decay fits, class diagnostics and regularization."""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import InputError, InsufficientDataError, OrderError, ShapeError
from .grid import FORWARD, INVERSE, SPACE, Field, fourier
from .stft import StftData, gaussian_window, stft, stft_rows
from .weights import Unit, WeightSpec

MAX_ORDER = 8
MIN_FIT_NODES = 100
X_GROWTH = "x-growth"
XI_GROWTH = "xi-growth"


# -- derivative-based norms ------------------------------------------------------------


def _space_function(f: Field) -> Field:
    if any(r != SPACE for r in f.roles):
        raise ShapeError("seminorms act on functions with space axes only")
    return f


def _multi_indices(d: int, M: int):
    return [m for m in itertools.product(range(M + 1), repeat=d) if sum(m) <= M]


def _derivatives(f: Field, M: int) -> dict[tuple[int, ...], np.ndarray]:
    """Spectral derivatives ``d^alpha f`` for ``|alpha| <= M``."""
    if M > MAX_ORDER or M < 0:
        raise OrderError(f"derivative order must be in [0, {MAX_ORDER}], got {M}")
    F = fourier(f, sign=FORWARD)
    freqs = np.meshgrid(*F.grid.axes, indexing="ij")
    # the Nyquist mode has no symmetric partner; dropping it keeps real data real
    nyq = np.zeros(F.grid.shape, dtype=bool)
    for k in range(f.dim):
        nyq |= np.isclose(freqs[k], -F.grid.halfwidth[k])
    out = {}
    for alpha in _multi_indices(f.dim, M):
        if not any(alpha):
            out[alpha] = f.values
            continue
        mult = np.ones(F.grid.shape, dtype=complex)
        for k, n in enumerate(alpha):
            mult = mult * (1j * freqs[k]) ** n
        mult[nyq] = 0
        out[alpha] = fourier(F.with_values(F.values * mult), sign=INVERSE, center=f.grid.center).values
    return out


def _factorial(m: Sequence[int]) -> float:
    return float(np.prod([math.factorial(n) for n in m]))


@dataclass
class SeminormReport:
    s: float
    t: float
    h: float
    M: int
    value: float
    table: dict = field(default_factory=dict)


def gs_seminorm(f: Field, s: float, t: float, h: float, M: int) -> SeminormReport:
    """``sup_{alpha, beta} sup_x |x^beta d^alpha f| / (h^(|alpha|+|beta|) alpha!^s beta!^t)``, ``|alpha|, |beta| <= M``."""
    f = _space_function(f)
    if not (s > 0 and t > 0 and h > 0):
        raise InputError("s, t and h must be positive")
    ders = _derivatives(f, M)
    mesh = np.meshgrid(*f.grid.axes, indexing="ij")
    table = {}
    for beta in _multi_indices(f.dim, M):
        mono = np.ones(f.grid.shape)
        for k, n in enumerate(beta):
            mono = mono * mesh[k] ** n
        for alpha, der in ders.items():
            denom = h ** (sum(alpha) + sum(beta)) * _factorial(alpha) ** s * _factorial(beta) ** t
            table[(alpha, beta)] = float(np.max(np.abs(mono * der))) / denom
    return SeminormReport(s, t, h, M, max(table.values()), table)


def gamma_norm(f: Field, s: float, h: float, r: float, M: int) -> float:
    """``sup_{|alpha| <= M} |exp(-r |x|^(1/s)) d^alpha f|_inf / (alpha!^s h^|alpha|)``."""
    f = _space_function(f)
    if not (s > 0 and h > 0):
        raise InputError("s and h must be positive")
    ders = _derivatives(f, M)
    radius = np.sqrt(np.sum(f.grid.mesh() ** 2, axis=-1))
    damp = np.exp(-r * radius ** (1.0 / s))
    best = 0.0
    for alpha, der in ders.items():
        val = float(np.max(np.abs(damp * der))) / (_factorial(alpha) ** s * h ** sum(alpha))
        best = max(best, val)
    return best


def regularize(f: Field, eps1: float = 0.0, eps2: float = 0.0) -> Field:
    """Multiply by ``exp(-eps1 |x|^2 - eps2 |xi|^2)``; space axes use ``eps1``, frequency axes ``eps2``."""
    if eps1 < 0 or eps2 < 0:
        raise InputError("regularization parameters must be nonnegative")
    mesh = f.grid.mesh()
    expo = np.zeros(f.grid.shape)
    for k, role in enumerate(f.roles):
        expo = expo + (eps1 if role == SPACE else eps2) * mesh[..., k] ** 2
    return f.with_values(f.values * np.exp(-expo))


# -- STFT decay fits -------------------------------------------------------------------


@dataclass
class DecayFit:
    """Fit ``log|V| = logC + a |x|^(1/s) + b |xi|^(1/s)`` mapped to ``(h, eps)``.

    x-growth: ``|V| ~ exp(h |x|^(1/s) - eps |xi|^(1/s))`` so ``h = a, eps = -b``.
    xi-growth: ``|V| ~ exp(eps |x|^(1/s) - h |xi|^(1/s))`` so ``eps = a, h = -b``.
    """

    s: float
    h: float
    eps: float
    logC: float
    residual: float
    floor: float
    a: float
    b: float
    orientation: str
    n_used: int
    radius: float | None = None

    def to_row(self) -> dict:
        return asdict(self)


def _fit_arrays(V: StftData):
    d = V.dim
    mesh = V.values.grid.mesh()
    rx = np.sqrt(np.sum(mesh[..., :d] ** 2, axis=-1))
    rxi = np.sqrt(np.sum(mesh[..., d:] ** 2, axis=-1))
    return np.abs(V.values.values), rx, rxi


def fit_stft_decay(
    V: StftData,
    s: float,
    orientation: str = X_GROWTH,
    floor: float | None = None,
    radius: float | None = None,
) -> DecayFit:
    """Least-squares decay fit over supra-floor samples.

    ``floor`` defaults to ``max(eps_mach * max|V|, 1e-14)``. ``radius``
    restricts the fit to ``|x| <= radius`` and ``|xi| <= radius``.
    """
    if not s > 0:
        raise InputError("s must be positive")
    if orientation not in (X_GROWTH, XI_GROWTH):
        raise InputError(f"orientation must be {X_GROWTH!r} or {XI_GROWTH!r}")
    mag, rx, rxi = _fit_arrays(V)
    peak = float(mag.max())
    if floor is None:
        floor = max(np.finfo(float).eps * peak, 1e-14)
    keep = mag > floor
    if radius is not None:
        keep &= (rx <= radius) & (rxi <= radius)
    n = int(keep.sum())
    if n < MIN_FIT_NODES:
        raise InsufficientDataError(f"only {n} samples above the floor {floor:.3g}; need {MIN_FIT_NODES}")
    e = 1.0 / s
    design = np.column_stack([np.ones(n), rx[keep] ** e, rxi[keep] ** e])
    y = np.log(mag[keep])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    logC, a, b = (float(c) for c in coef)
    if orientation == X_GROWTH:
        h, eps = a, -b
    else:
        eps, h = a, -b
    return DecayFit(
        s=s, h=h, eps=eps, logC=logC, residual=float(np.sqrt(np.mean(resid**2))),
        floor=float(floor), a=a, b=b, orientation=orientation, n_used=n, radius=radius,
    )


@dataclass
class MembershipReport:
    s: float
    verdict: str
    radii: list
    x_fits: list
    xi_fits: list
    h_trend: list
    eps_trend: list

    def to_dict(self) -> dict:
        out = asdict(self)
        return out


def _stable(vals: Sequence[float], rtol: float) -> bool:
    vals = np.asarray(vals)
    scale = max(float(np.max(np.abs(vals))), 1e-300)
    return float(np.ptp(vals)) <= rtol * scale


def classify(
    f: Field,
    phi: Field | None,
    s: float,
    radii: Sequence[float],
    rtol: float = 0.25,
) -> MembershipReport:
    """Decay-fit ``V_phi f`` on nested restriction radii and label the pattern.

    Verdicts are diagnostics ("consistent with"), never proofs:

    * ``decay in both variables``: fitted ``a < 0`` and ``b < 0`` on every radius;
    * ``Gamma_1,s-consistent``: x-growth ``h > 0`` and ``eps > 0``, both stable;
    * ``Gamma_0,s-consistent``: ``h`` stable while ``eps`` keeps growing with the radius;
    * ``Gamma_s-consistent``: in the xi-growth orientation the decay rate ``h``
      is stable while the x-growth rate ``eps`` keeps shrinking (growth slower
      than every exponential);
    * ``inconclusive`` otherwise.
    """
    radii = sorted(float(r) for r in radii)
    if len(radii) < 2:
        raise InputError("classify needs a ladder of at least two radii")
    if phi is None:
        phi = gaussian_window(f.grid)
    V = stft(f, phi)
    x_fits = [fit_stft_decay(V, s, X_GROWTH, radius=r) for r in radii]
    xi_fits = [fit_stft_decay(V, s, XI_GROWTH, radius=r) for r in radii]
    a = np.array([ft.a for ft in x_fits])
    b = np.array([ft.b for ft in x_fits])
    h = [ft.h for ft in x_fits]
    eps = [ft.eps for ft in x_fits]
    verdict = "inconclusive"
    if np.all(a < 0) and np.all(b < 0):
        verdict = "decay in both variables"
    elif np.all(a > 0) and np.all(b < 0):
        xi_h = [ft.h for ft in xi_fits]
        xi_eps = [ft.eps for ft in xi_fits]
        if _stable(h, rtol) and _stable(eps, rtol):
            verdict = "Gamma_1,s-consistent"
        elif _stable(h, rtol) and np.all(np.diff(eps) > 0):
            verdict = "Gamma_0,s-consistent"
        elif _stable(xi_h, rtol) and np.all(np.diff(xi_eps) < 0):
            verdict = "Gamma_s-consistent"
    return MembershipReport(s, verdict, radii, x_fits, xi_fits, h, eps)


# -- symbol-class margin ---------------------------------------------------------------


def s_omega_margin(
    a: Field,
    phi: Field | None,
    omega: WeightSpec | None,
    s: float,
    R: float,
    stride: int = 1,
    floor: float = 1e-12,
) -> float:
    """``sup |V_phi a(X, Xi)| exp(R |Xi|^(1/s)) / omega(X)`` over the phase-space STFT.

    ``a`` is treated as a function on its ``2d`` axes; ``X`` runs over every
    ``stride``-th node per axis and ``Xi`` over the full dual grid. Samples with
    ``|V|`` below ``floor`` times the Cauchy-Schwarz bound
    ``|a|_2 |phi|_2 (2 pi)^(-d)`` are FFT roundoff and are skipped, since the
    exponential factor would amplify them without bound.
    """
    if a.dim % 2:
        raise ShapeError("symbols have 2d axes")
    F = a.as_function()
    if phi is None:
        phi = gaussian_window(F.grid)
    phi = phi.as_function()
    omega = Unit() if omega is None else omega
    grid = F.grid
    if not np.any(F.values):
        return 0.0
    threshold = floor * F.l2_norm() * phi.l2_norm() * (2 * math.pi) ** (-grid.dim / 2)
    per_axis = [range(0, grid.count[k], stride) for k in range(grid.dim)]
    shifts = list(itertools.product(*per_axis))
    gain = R * np.sqrt(np.sum(grid.dual().mesh() ** 2, axis=-1)) ** (1.0 / s)
    axes = grid.axes
    best = -math.inf
    batch = 64
    for start in range(0, len(shifts), batch):
        part = shifts[start : start + batch]
        mag = np.abs(stft_rows(F, phi, part))
        X = np.array([[axes[k][i[k]] for k in range(grid.dim)] for i in part])
        logw = omega.log(X).reshape((-1,) + (1,) * grid.dim)
        keep = mag > threshold
        if not np.any(keep):
            continue
        vals = np.log(np.where(keep, mag, 1.0)) + gain[None] - logw
        best = max(best, float(np.max(vals[keep])))
    return math.exp(best)
