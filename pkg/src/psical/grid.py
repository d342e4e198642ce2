"""Uniform grids, sampled fields, the unitary Fourier convention and shears.

Conventions
-----------
* A grid axis with center ``c``, halfwidth ``L`` and even count ``N`` holds the
  points ``c - L + j*dx`` for ``j = 0..N-1`` with ``dx = 2L/N``.
* The dual axis has spacing ``2*pi/(N*dx)``, the same count, and is centered at
  zero; as a :class:`Grid` axis it is ``(0, pi/dx, N)``, so its points are
  ``(k - N/2) * dxi``. Storage order is ascending on every axis.
* The forward transform approximates
  ``(2 pi)^(-k/2) * integral f(x) exp(-i <x, xi>) dx`` over the ``k`` selected
  axes by a Riemann sum; the inverse is its exact discrete inverse.
* Fields are periodic on the box. Operations that move data (shears, window
  shifts) wrap around.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import fft as sfft

from .errors import (
    AxisRoleError,
    InvalidExponentError,
    InvalidGridError,
    OffGridError,
    ShapeError,
)

SPACE = "space"
FREQUENCY = "frequency"
ROLES = (SPACE, FREQUENCY)

FORWARD = "forward"
INVERSE = "inverse"


def fft_workers() -> int:
    """Worker count for scipy.fft, taken from ``PSICAL_THREADS`` (default 1)."""
    raw = os.environ.get("PSICAL_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(n, 1)


def _as_tuple(value, dim: int | None = None, cast=float) -> tuple:
    if np.ndim(value) == 0:
        value = [value] * (dim or 1)
    return tuple(cast(v) for v in value)


@dataclass(frozen=True)
class Grid:
    """Tensor-product lattice on a box, one entry per axis in each tuple."""

    center: tuple[float, ...]
    halfwidth: tuple[float, ...]
    count: tuple[int, ...]

    def __post_init__(self):
        if not (len(self.center) == len(self.halfwidth) == len(self.count)):
            raise InvalidGridError("center, halfwidth and count must have equal length")
        if len(self.count) == 0:
            raise InvalidGridError("a grid needs at least one axis")
        for n in self.count:
            if int(n) != n or n < 4 or n % 2:
                raise InvalidGridError(f"axis count must be an even integer >= 4, got {n}")
        for L in self.halfwidth:
            if not (L > 0 and math.isfinite(L)):
                raise InvalidGridError(f"halfwidth must be positive and finite, got {L}")

    @property
    def dim(self) -> int:
        return len(self.count)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(int(n) for n in self.count)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(2.0 * L / n for L, n in zip(self.halfwidth, self.count))

    @property
    def dual_spacing(self) -> tuple[float, ...]:
        return tuple(2.0 * math.pi / (n * dx) for n, dx in zip(self.count, self.spacing))

    @property
    def cell_measure(self) -> float:
        return float(np.prod(self.spacing))

    def axis(self, k: int) -> np.ndarray:
        c, L, n = self.center[k], self.halfwidth[k], self.count[k]
        return c - L + np.arange(n) * (2.0 * L / n)

    @property
    def axes(self) -> tuple[np.ndarray, ...]:
        return tuple(self.axis(k) for k in range(self.dim))

    def mesh(self) -> np.ndarray:
        """Coordinates of all nodes, shape ``grid.shape + (dim,)``."""
        return np.stack(np.meshgrid(*self.axes, indexing="ij"), axis=-1)

    def dual(self) -> "Grid":
        return Grid(
            center=(0.0,) * self.dim,
            halfwidth=tuple(math.pi / dx for dx in self.spacing),
            count=self.count,
        )

    def select(self, axes: Iterable[int]) -> "Grid":
        axes = list(axes)
        return Grid(
            center=tuple(self.center[k] for k in axes),
            halfwidth=tuple(self.halfwidth[k] for k in axes),
            count=tuple(self.count[k] for k in axes),
        )

    def replace_axes(self, axes: Sequence[int], other: "Grid") -> "Grid":
        center, halfwidth, count = list(self.center), list(self.halfwidth), list(self.count)
        for j, k in enumerate(axes):
            center[k], halfwidth[k], count[k] = other.center[j], other.halfwidth[j], other.count[j]
        return Grid(tuple(center), tuple(halfwidth), tuple(count))

    def product(self, other: "Grid") -> "Grid":
        return Grid(
            self.center + other.center,
            self.halfwidth + other.halfwidth,
            self.count + other.count,
        )

    def zero_index(self, k: int) -> int:
        """Index of the coordinate 0 on axis ``k``; raises if 0 is off-grid."""
        return self.index_of(k, 0.0)

    def index_of(self, k: int, value: float) -> int:
        dx = self.spacing[k]
        pos = (value - (self.center[k] - self.halfwidth[k])) / dx
        j = int(round(pos))
        if abs(pos - j) > 1e-9 or not 0 <= j < self.count[k]:
            raise OffGridError(f"coordinate {value} is not a node of axis {k}")
        return j

    def is_dual_of(self, other: "Grid", rtol: float = 1e-12) -> bool:
        if self.dim != other.dim or self.count != other.count:
            return False
        d = other.dual()
        return all(
            abs(a) <= rtol * b and math.isclose(b, e, rel_tol=rtol)
            for a, b, e in zip(self.center, self.halfwidth, d.halfwidth)
        )


def make_grid(center, halfwidth, count) -> Grid:
    """Build a :class:`Grid`; scalar arguments are broadcast to the common dimension.

    >>> g = make_grid(0, 8, 16)
    >>> g.spacing, g.axis(0)[:2]
    ((1.0,), array([-8., -7.]))
    """
    dims = [len(v) for v in (center, halfwidth, count) if np.ndim(v) > 0]
    dim = dims[0] if dims else 1
    if any(n != dim for n in dims):
        raise InvalidGridError("center, halfwidth and count must have equal length")
    counts = _as_tuple(count, dim, cast=float)
    for n in counts:
        if n != int(n):
            raise InvalidGridError(f"axis count must be an integer, got {n}")
    return Grid(_as_tuple(center, dim), _as_tuple(halfwidth, dim), tuple(int(n) for n in counts))


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples on a :class:`Grid` with a role label per axis."""

    grid: Grid
    values: np.ndarray
    roles: tuple[str, ...] = field(default=())

    def __post_init__(self):
        roles = tuple(self.roles) if self.roles else (SPACE,) * self.grid.dim
        if len(roles) != self.grid.dim:
            raise ShapeError(f"{len(roles)} axis roles for a {self.grid.dim}-axis grid")
        for r in roles:
            if r not in ROLES:
                raise AxisRoleError(f"unknown axis role {r!r}")
        values = np.asarray(self.values, dtype=complex)
        if values.size != self.grid.size:
            raise ShapeError(f"{values.size} values for a grid of size {self.grid.size}")
        values = np.array(values.reshape(self.grid.shape), dtype=complex)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "roles", roles)

    @property
    def dim(self) -> int:
        return self.grid.dim

    def with_values(self, values) -> "Field":
        return Field(self.grid, values, self.roles)

    def as_function(self) -> "Field":
        """The same samples with every axis relabelled as a space axis."""
        return Field(self.grid, self.values, (SPACE,) * self.dim)

    def axes_with_role(self, role: str) -> tuple[int, ...]:
        return tuple(k for k, r in enumerate(self.roles) if r == role)

    def l2_norm(self) -> float:
        return float(math.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.cell_measure))

    def _check_compatible(self, other: "Field"):
        if other.grid != self.grid or other.roles != self.roles:
            raise ShapeError("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, Field):
            self._check_compatible(other)
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + other)

    def __sub__(self, other):
        if isinstance(other, Field):
            self._check_compatible(other)
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - other)

    def __mul__(self, other):
        if isinstance(other, Field):
            self._check_compatible(other)
            return self.with_values(self.values * other.values)
        return self.with_values(self.values * other)

    __rmul__ = __mul__
    __radd__ = __add__

    def __neg__(self):
        return self.with_values(-self.values)

    def __repr__(self) -> str:
        return f"Field(shape={self.grid.shape}, roles={self.roles})"


def sample(grid: Grid, func, roles: Sequence[str] | None = None) -> Field:
    """Evaluate ``func(*coordinate_arrays)`` on the nodes of ``grid``."""
    coords = np.meshgrid(*grid.axes, indexing="ij")
    return Field(grid, np.broadcast_to(func(*coords), grid.shape), tuple(roles or ()))


# -- Fourier transform -----------------------------------------------------------------


def _normalize_axes(axes, dim: int) -> tuple[int, ...]:
    if axes is None:
        return tuple(range(dim))
    if np.ndim(axes) == 0:
        axes = [axes]
    out = []
    for k in axes:
        k = int(k)
        if not -dim <= k < dim:
            raise ShapeError(f"axis {k} out of range for a {dim}-axis field")
        out.append(k % dim)
    return tuple(sorted(set(out)))


def fourier(f: Field, axes=None, sign: str = FORWARD, center=None) -> Field:
    """Unitary partial Fourier transform of ``f`` along ``axes``.

    Forward transforms require space axes and return samples on the dual grid;
    inverse transforms require frequency axes. ``center`` sets the centers of
    the space axes produced by an inverse transform (default 0); it is ignored
    for forward transforms.
    """
    axes = _normalize_axes(axes, f.dim)
    if sign not in (FORWARD, INVERSE):
        raise ValueError(f"sign must be {FORWARD!r} or {INVERSE!r}")
    need = SPACE if sign == FORWARD else FREQUENCY
    for k in axes:
        if f.roles[k] != need:
            raise AxisRoleError(f"{sign} transform along axis {k} needs role {need!r}, got {f.roles[k]!r}")
    centers = _as_tuple(0.0 if center is None else center, len(axes))
    if len(centers) != len(axes):
        raise ShapeError("one center per transformed axis")

    values = f.values
    grid = f.grid
    roles = list(f.roles)
    workers = fft_workers()
    for j, k in enumerate(axes):
        n = grid.count[k]
        shape = [1] * f.dim
        shape[k] = n
        alt = np.where(np.arange(n) % 2, -1.0, 1.0).reshape(shape)
        if sign == FORWARD:
            dx = grid.spacing[k]
            x0 = grid.center[k] - grid.halfwidth[k]
            new_axis = Grid((0.0,), (math.pi / dx,), (n,))
            xi = new_axis.axis(0).reshape(shape)
            spec = sfft.fft(values * alt, axis=k, workers=workers)
            values = spec * (np.exp(-1j * x0 * xi) * dx / math.sqrt(2 * math.pi))
            roles[k] = FREQUENCY
        else:
            dxi = grid.spacing[k]
            xi = grid.axis(k).reshape(shape)
            dx = 2 * math.pi / (n * dxi)
            new_axis = Grid((centers[j],), (math.pi / dxi,), (n,))
            x0 = centers[j] - math.pi / dxi
            body = sfft.ifft(values * np.exp(1j * x0 * xi), axis=k, workers=workers)
            values = body * alt * (n * dxi / math.sqrt(2 * math.pi))
            roles[k] = SPACE
        grid = grid.replace_axes([k], new_axis)
    return Field(grid, values, tuple(roles))


def angular_frequencies(grid: Grid, k: int) -> np.ndarray:
    """FFT-ordered angular frequencies of axis ``k`` (Nyquist mode at ``-pi/dx``)."""
    return 2 * math.pi * sfft.fftfreq(grid.count[k], grid.spacing[k])


def shear(F: Field, A, sign: int = 1) -> Field:
    """Samples of ``(x, y) -> F(x + sign*A y, y)`` for a field on ``2d`` axes.

    The first ``d`` axes form the x-block and are shifted by Fourier phase
    ramps (exact for band-limited data, periodic wrap otherwise); the last
    ``d`` axes form the y-block and only supply the shift amounts.
    """
    if F.dim % 2:
        raise ShapeError("shear needs an even number of axes (x-block, y-block)")
    d = F.dim // 2
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape != (d, d):
        raise ShapeError(f"shear matrix must be {d}x{d}, got {A.shape}")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    for k in range(d):
        if F.roles[k] != SPACE:
            raise AxisRoleError("the shifted x-block must consist of space axes")
    if not np.any(A):
        return F

    grid = F.grid
    ys = np.meshgrid(*[grid.axis(k) for k in range(d, 2 * d)], indexing="ij")
    shifts = sign * np.einsum("ab,b...->a...", A, np.stack(ys))  # (d, *y_shape)
    phase = np.zeros(grid.shape)
    for a in range(d):
        u = angular_frequencies(grid, a)
        u_shape = [1] * F.dim
        u_shape[a] = u.size
        phase = phase + u.reshape(u_shape) * shifts[a].reshape((1,) * d + shifts[a].shape)
    x_axes = tuple(range(d))
    workers = fft_workers()
    spec = sfft.fftn(F.values, axes=x_axes, workers=workers)
    out = sfft.ifftn(spec * np.exp(1j * phase), axes=x_axes, workers=workers)
    return F.with_values(out)


def fourier_interpolation_matrix(grid: Grid, k: int, points) -> np.ndarray:
    """Rows evaluating the trigonometric interpolant of axis-``k`` samples at ``points``.

    Uses the same mode set as :func:`shear`, so both give identical values.
    """
    points = np.asarray(points, dtype=float)
    n = grid.count[k]
    x0 = grid.center[k] - grid.halfwidth[k]
    u = angular_frequencies(grid, k)
    # E @ samples = (1/n) sum_m exp(i u_m (p - x0)) * DFT(samples)_m
    modes = np.exp(1j * np.multiply.outer(points - x0, u)) / n
    dft = np.exp(-2j * math.pi * np.outer(np.arange(n), np.arange(n)) / n)
    return modes @ dft


# -- mixed norms -----------------------------------------------------------------------


def _check_exponent(p) -> float:
    p = float(p)
    if not (p == math.inf or p >= 1):
        raise InvalidExponentError(f"exponent must be in [1, inf], got {p}")
    return p


@dataclass(frozen=True)
class MixedNormSpec:
    """Exponents and axis split for an iterated weighted Lebesgue norm.

    ``inner_axes`` are integrated first with exponent ``p``; the remaining axes
    are integrated afterwards with exponent ``q``. ``weight`` is any object with
    an ``on_grid(grid) -> ndarray`` method, or ``None`` for the unit weight.
    """

    p: float = 2.0
    q: float = 2.0
    inner_axes: tuple[int, ...] = (0,)
    weight: object = None

    def __post_init__(self):
        object.__setattr__(self, "p", _check_exponent(self.p))
        object.__setattr__(self, "q", _check_exponent(self.q))
        object.__setattr__(self, "inner_axes", tuple(int(k) for k in self.inner_axes))


def _lp_reduce(values: np.ndarray, p: float, axes: tuple[int, ...], measure: float) -> np.ndarray:
    # numpy sums contiguous float data pairwise, which fixes the reduction order
    if not axes:
        return values
    if p == math.inf:
        return np.max(values, axis=axes)
    if p == 1:
        return np.sum(values, axis=axes) * measure
    return (np.sum(values**p, axis=axes) * measure) ** (1.0 / p)


def mixed_norm(F: Field, spec: MixedNormSpec) -> float:
    """Riemann-sum value of ``( int ( int |F w|^p d(inner) )^(q/p) d(outer) )^(1/q)``."""
    inner = _normalize_axes(spec.inner_axes, F.dim)
    outer = tuple(k for k in range(F.dim) if k not in inner)
    mag = np.abs(F.values)
    if spec.weight is not None:
        mag = mag * spec.weight.on_grid(F.grid)
    dx = F.grid.spacing
    m_in = float(np.prod([dx[k] for k in inner])) if inner else 1.0
    m_out = float(np.prod([dx[k] for k in outer])) if outer else 1.0
    partial = _lp_reduce(mag, spec.p, inner, m_in)
    # remaining array has the outer axes in their original order
    total = _lp_reduce(partial, spec.q, tuple(range(partial.ndim)), m_out)
    return float(total)


def lp_norm(F: Field, p: float = 2.0) -> float:
    """Plain quadrature L^p norm of all samples."""
    p = _check_exponent(p)
    return float(_lp_reduce(np.abs(F.values), p, tuple(range(F.dim)), F.grid.cell_measure))


def interior_mask(grid: Grid, fraction: float = 1.0 / 3.0, axes=None) -> np.ndarray:
    """Boolean mask of nodes with ``|coord - center| <= fraction * halfwidth`` on ``axes``."""
    axes = _normalize_axes(axes, grid.dim)
    mask = np.ones(grid.shape, dtype=bool)
    mesh = np.meshgrid(*grid.axes, indexing="ij")
    for k in axes:
        mask &= np.abs(mesh[k] - grid.center[k]) <= fraction * grid.halfwidth[k] + 1e-12
    return mask


def symbol_grid(L: float, N: int, d: int = 1) -> Grid:
    """Phase-space grid: ``d`` space axes on ``[-L, L)`` followed by their dual axes."""
    g = make_grid([0.0] * d, [L] * d, [N] * d)
    return g.product(g.dual())


def symbol_roles(d: int = 1) -> tuple[str, ...]:
    return (SPACE,) * d + (FREQUENCY,) * d
