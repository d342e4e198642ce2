"""Quantization ``op_A(a)`` of phase-space symbols on periodic grids.

A symbol lives on ``2d`` axes: a space block ``x`` followed by a frequency
block ``xi`` that is the dual of the space block. The operator acts by

``(op_A(a) f)(x) = (2 pi)^(-d) int int a(x - A(x - y), xi) f(y) exp(i <x - y, xi>) dy dxi``,

which equals ``int K(x, y) f(y) dy`` with
``K(x, y) = (2 pi)^(-d/2) (F_2^{-1} a)(x - A(x - y), x - y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InputError, ShapeError
from .grid import (
    FORWARD,
    FREQUENCY,
    INVERSE,
    SPACE,
    Field,
    Grid,
    fourier,
    fourier_interpolation_matrix,
    shear,
)

PRESETS = {"kn": 0.0, "weyl": 0.5, "one": 1.0}


@dataclass(frozen=True, eq=False)
class QuantizationMatrix:
    """Real ``d x d`` matrix ``A``; ``A = t I`` gives ``op_t``."""

    A: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ShapeError(f"quantization matrix must be square, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise InputError("quantization matrix entries must be finite")
        A = A.copy()
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    @classmethod
    def from_t(cls, t: float, d: int = 1) -> "QuantizationMatrix":
        return cls(float(t) * np.eye(d))

    @classmethod
    def preset(cls, name: str, d: int = 1) -> "QuantizationMatrix":
        try:
            return cls.from_t(PRESETS[name], d)
        except KeyError:
            raise InputError(f"unknown quantization preset {name!r}; use one of {sorted(PRESETS)}") from None

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def __eq__(self, other):
        return isinstance(other, QuantizationMatrix) and np.array_equal(self.A, other.A)

    def __hash__(self):
        return hash(self.A.tobytes())

    def __repr__(self):
        return f"QuantizationMatrix({self.A.tolist()})"


QuantLike = Union[QuantizationMatrix, float, str, np.ndarray]


def as_quantization(A: QuantLike, d: int) -> QuantizationMatrix:
    """Accept a :class:`QuantizationMatrix`, a preset name, a scalar ``t`` or a matrix."""
    if isinstance(A, QuantizationMatrix):
        q = A
    elif isinstance(A, str):
        try:
            q = QuantizationMatrix.from_t(float(A), d)
        except ValueError:
            q = QuantizationMatrix.preset(A, d)
    elif np.ndim(A) == 0:
        q = QuantizationMatrix.from_t(float(A), d)
    else:
        q = QuantizationMatrix(A)
    if q.dim != d:
        raise ShapeError(f"quantization matrix is {q.dim}x{q.dim} but the symbol has d = {d}")
    return q


def check_symbol(a: Field) -> tuple[int, Grid]:
    """Validate the (space block, dual frequency block) layout; return ``(d, x_grid)``."""
    if a.dim % 2:
        raise ShapeError("a symbol needs 2d axes")
    d = a.dim // 2
    if a.roles != (SPACE,) * d + (FREQUENCY,) * d:
        raise ShapeError("symbol axes must be (space x d, frequency x d)")
    xg = a.grid.select(range(d))
    if not a.grid.select(range(d, 2 * d)).is_dual_of(xg):
        raise ShapeError("the frequency block of a symbol must be the dual of its space block")
    return d, xg


@dataclass(frozen=True, eq=False)
class OperatorKernel:
    """Samples of ``K(x_i, y_j)`` on the ``(x, y)`` product grid.

    ``apply(K, f)(x) = sum_y K(x, y) f(y) dy`` realizes the operator; the
    ``(2 pi)^(-d/2)`` factor is included in ``values``.
    """

    values: Field
    A: QuantizationMatrix

    def __post_init__(self):
        g = self.values.grid
        d = g.dim // 2
        if g.dim % 2 or g.select(range(d)) != g.select(range(d, 2 * d)):
            raise ShapeError("kernel x and y blocks must share one grid")
        if self.A.dim != d:
            raise ShapeError("kernel dimension does not match the quantization matrix")

    @property
    def grid(self) -> Grid:
        g = self.values.grid
        return g.select(range(g.dim // 2))


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense matrix ``M[i, j] = K(x_i, y_j) dy`` so that ``op f = M @ f``."""

    matrix: np.ndarray
    source: Grid
    target: Grid

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=complex)
        if M.shape != (self.target.size, self.source.size):
            raise ShapeError(f"matrix shape {M.shape} does not match grids ({self.target.size}, {self.source.size})")
        object.__setattr__(self, "matrix", M)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if self.source != other.target:
            raise ShapeError("incompatible grids in operator composition")
        return OperatorMatrix(self.matrix @ other.matrix, other.source, self.target)

    def apply(self, f: Field) -> Field:
        if f.grid != self.source:
            raise ShapeError("function is not on the operator's source grid")
        out = self.matrix @ f.values.reshape(-1)
        return Field(self.target, out.reshape(self.target.shape))


def _difference_index(grid: Grid) -> tuple[np.ndarray, ...]:
    """Broadcast index arrays ``m_k[i, j] = (i_k - j_k + N_k/2) mod N_k`` over ``x.shape + y.shape``."""
    d = grid.dim
    out = []
    for k in range(d):
        n = grid.count[k]
        m = (np.arange(n)[:, None] - np.arange(n)[None, :] + n // 2) % n
        shape = [1] * (2 * d)
        shape[k] = n
        shape[d + k] = n
        out.append(m.reshape(shape))
    return tuple(out)


def _x_index(grid: Grid) -> tuple[np.ndarray, ...]:
    d = grid.dim
    out = []
    for k in range(d):
        shape = [1] * (2 * d)
        shape[k] = grid.count[k]
        out.append(np.arange(grid.count[k]).reshape(shape))
    return tuple(out)


def kernel_from_symbol(a: Field, A: QuantLike) -> OperatorKernel:
    """Kernel of ``op_A(a)``.

    ``H(x, v) = (F_2^{-1} a)(x - A v, v)`` is built by one shear; the kernel then
    reads ``H`` at ``v = x - y``, which on the grid is the exact cyclic index
    difference ``i - j``.
    """
    d, xg = check_symbol(a)
    q = as_quantization(A, d)
    b = fourier(a, axes=range(d, 2 * d), sign=INVERSE)
    H = shear(b, q.A, sign=-1).values
    K = H[_x_index(xg) + _difference_index(xg)] * (2 * math.pi) ** (-d / 2)
    return OperatorKernel(Field(xg.product(xg), K, (SPACE,) * (2 * d)), q)


def symbol_from_kernel(K: OperatorKernel, A: QuantLike | None = None) -> Field:
    """Inverse of :func:`kernel_from_symbol` (reads ``K`` at quantization ``A``)."""
    xg = K.grid
    d = xg.dim
    q = K.A if A is None else as_quantization(A, d)
    vg = Grid((0.0,) * d, xg.halfwidth, xg.count)
    H = np.empty(xg.shape + xg.shape, dtype=complex)
    # H[i, m] = K[i, j] with m = i - j + N/2 (mod N)
    H[_x_index(xg) + _difference_index(xg)] = K.values.values
    Hf = Field(xg.product(vg), H * (2 * math.pi) ** (d / 2), (SPACE,) * (2 * d))
    G = shear(Hf, q.A, sign=1)
    return fourier(G, axes=range(d, 2 * d), sign=FORWARD)


def kernel_matrix(K: OperatorKernel) -> OperatorMatrix:
    g = K.grid
    return OperatorMatrix(K.values.values.reshape(g.size, g.size) * g.cell_measure, g, g)


def kernel_from_matrix(M: OperatorMatrix, A: QuantLike) -> OperatorKernel:
    """Kernel samples ``M / dy`` of a matrix on one square grid."""
    if M.source != M.target:
        raise ShapeError("kernel_from_matrix needs equal source and target grids")
    g = M.source
    q = as_quantization(A, g.dim)
    vals = (M.matrix / g.cell_measure).reshape(g.shape + g.shape)
    return OperatorKernel(Field(g.product(g), vals, (SPACE,) * (2 * g.dim)), q)


def apply(K: OperatorKernel, f: Field) -> Field:
    """Riemann sum ``sum_y K(x, y) f(y) dy``."""
    if f.grid != K.grid or any(r != SPACE for r in f.roles):
        raise ShapeError("function is not on the kernel's source grid")
    return kernel_matrix(K).apply(f)


def op_matrix(a: Field, A: QuantLike) -> OperatorMatrix:
    """Dense matrix of ``op_A(a)`` with the quadrature weight ``dy`` included."""
    return kernel_matrix(kernel_from_symbol(a, A))


def direct_apply(a: Field, A: QuantLike, f: Field) -> Field:
    """Slow double quadrature of the oscillatory integral (d = 1).

    The first argument ``x - A(x - y)`` uses true coordinate differences and is
    evaluated by trigonometric interpolation in ``x``; no kernel factorization
    is involved.
    """
    d, xg = check_symbol(a)
    if d != 1:
        raise ShapeError("direct_apply is implemented for d = 1")
    q = as_quantization(A, d)
    if f.grid != xg:
        raise ShapeError("function is not on the symbol's space grid")
    t = float(q.A[0, 0])
    x = xg.axis(0)
    xi = a.grid.axis(1)
    dx, dxi = xg.spacing[0], a.grid.spacing[1]
    av = a.values
    fv = f.values
    out = np.empty(x.size, dtype=complex)
    for i in range(x.size):
        diff = x[i] - x
        arg = x[i] - t * diff
        if t == 0:
            rows = np.broadcast_to(av[i], av.shape)
        else:
            rows = fourier_interpolation_matrix(xg, 0, arg) @ av
        phase = np.exp(1j * np.multiply.outer(diff, xi))
        out[i] = np.sum(np.sum(rows * phase, axis=1) * fv)
    return Field(xg, out * dx * dxi / (2 * math.pi))
