"""Quantization transfer, quantization change, sharp products and trace maps.

``D = -i d`` throughout. The transfer operator ``e^{i sign <A D_xi, D_x>}``
is ``F_2 U_{-sign A} F_2^{-1}`` with ``(U_A F)(x, y) = F(x + A y, y)``, and

``op_0(transfer(a, A, +1)) = op_A(a)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import InputError, MemoryGuardError, ShapeError, TruncationError
from .grid import FORWARD, INVERSE, Field, Grid, fourier, shear, symbol_roles
from .quantize import QuantLike, as_quantization, check_symbol, kernel_from_matrix, op_matrix, symbol_from_kernel
from .weights import Box, WeightSpec, kappa

MAX_DEGREE = 12
TENSOR_MAX_N = 32

Monomial = tuple[tuple[int, ...], tuple[int, ...]]


# -- polynomial symbols ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PolySymbol:
    """``sum c_{alpha beta} x^alpha xi^beta``, optionally times ``exp(-(|x|^2+|xi|^2)/(2 sigma^2))``.

    ``coeffs`` maps ``(alpha, beta)`` multi-index pairs to complex numbers.
    Inputs are capped at total degree :data:`MAX_DEGREE`; results of the damped
    transfer series may exceed it (``check=False``).
    """

    coeffs: Mapping[Monomial, complex]
    d: int = 1
    sigma: float | None = None
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        clean = {}
        for key, c in dict(self.coeffs).items():
            alpha, beta = key
            alpha, beta = _multi(alpha, self.d), _multi(beta, self.d)
            if min(alpha + beta) < 0:
                raise InputError("monomial exponents must be nonnegative")
            if self.check and sum(alpha) + sum(beta) > MAX_DEGREE:
                raise InputError(f"polynomial degree exceeds {MAX_DEGREE}")
            c = complex(c)
            if c != 0:
                clean[(alpha, beta)] = clean.get((alpha, beta), 0) + c
        object.__setattr__(self, "coeffs", clean)
        if self.sigma is not None and not self.sigma > 0:
            raise InputError("sigma must be positive")

    @classmethod
    def monomial(cls, alpha, beta, coeff: complex = 1.0, sigma: float | None = None) -> "PolySymbol":
        alpha, beta = np.atleast_1d(alpha), np.atleast_1d(beta)
        return cls({(tuple(alpha), tuple(beta)): coeff}, d=len(alpha), sigma=sigma)

    @property
    def degree(self) -> int:
        return max((sum(a) + sum(b) for a, b in self.coeffs), default=0)

    def _like(self, coeffs) -> "PolySymbol":
        return PolySymbol(coeffs, self.d, self.sigma, check=False)

    def __add__(self, other: "PolySymbol") -> "PolySymbol":
        if (self.d, self.sigma) != (other.d, other.sigma):
            raise ShapeError("cannot add polynomial symbols with different d or damping")
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) + c
        return self._like(out)

    def scale(self, lam: complex) -> "PolySymbol":
        return self._like({k: lam * c for k, c in self.coeffs.items()})

    def derivative(self, axis: int) -> "PolySymbol":
        """Derivative in coordinate ``axis`` of ``(x, xi)`` (damping factor included)."""
        block, j = divmod(axis, self.d)
        out: dict = {}
        for (alpha, beta), c in self.coeffs.items():
            e = [list(alpha), list(beta)]
            n = e[block][j]
            if n:
                lower = [list(alpha), list(beta)]
                lower[block][j] -= 1
                key = (tuple(lower[0]), tuple(lower[1]))
                out[key] = out.get(key, 0) + n * c
            if self.sigma is not None:
                upper = [list(alpha), list(beta)]
                upper[block][j] += 1
                key = (tuple(upper[0]), tuple(upper[1]))
                out[key] = out.get(key, 0) - c / self.sigma**2
        return self._like(out)

    def sup_bound(self) -> float:
        """Upper bound of the sup norm on phase space (on a unit box when undamped)."""
        total = 0.0
        for (alpha, beta), c in self.coeffs.items():
            b = abs(c)
            if self.sigma is not None:
                for n in alpha + beta:
                    if n:
                        b *= (n * self.sigma**2 / math.e) ** (n / 2)
            total += b
        return total

    def evaluate(self, x, xi) -> np.ndarray:
        """Values at points with the coordinate index last (``x``, ``xi`` of size ``d``)."""
        x = np.asarray(x, dtype=float)
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(np.broadcast_shapes(x.shape[:-1], xi.shape[:-1]), dtype=complex)
        for (alpha, beta), c in self.coeffs.items():
            term = np.full(out.shape, c, dtype=complex)
            for j in range(self.d):
                term = term * x[..., j] ** alpha[j] * xi[..., j] ** beta[j]
            out = out + term
        if self.sigma is not None:
            r2 = np.sum(x * x, axis=-1) + np.sum(xi * xi, axis=-1)
            out = out * np.exp(-r2 / (2 * self.sigma**2))
        return out

    def render(self, grid: Grid) -> Field:
        """Samples on a symbol grid (space block then frequency block)."""
        d = self.d
        if grid.dim != 2 * d:
            raise ShapeError(f"a d = {d} polynomial symbol renders on a {2 * d}-axis grid")
        if d == 1:
            # separable: sum c x^a xi^b = X C Xi^T with Vandermonde factors
            x, xi = grid.axis(0), grid.axis(1)
            na = max((a[0] for a, _ in self.coeffs), default=0) + 1
            nb = max((b[0] for _, b in self.coeffs), default=0) + 1
            C = np.zeros((na, nb), dtype=complex)
            for (a, b), c in self.coeffs.items():
                C[a[0], b[0]] += c
            X = np.vander(x, na, increasing=True)
            Xi = np.vander(xi, nb, increasing=True)
            vals = X @ C @ Xi.T
            if self.sigma is not None:
                vals = vals * np.exp(-np.add.outer(x * x, xi * xi) / (2 * self.sigma**2))
            return Field(grid, vals, symbol_roles(1))
        mesh = grid.mesh()
        return Field(grid, self.evaluate(mesh[..., :d], mesh[..., d:]), symbol_roles(d))

    def __repr__(self) -> str:
        return f"PolySymbol({self.coeffs!r}, d={self.d}, sigma={self.sigma})"


def _multi(m, d: int) -> tuple[int, ...]:
    m = tuple(int(v) for v in np.atleast_1d(m))
    if len(m) != d:
        raise ShapeError(f"multi-index {m} does not have length {d}")
    return m


def _pairing(p: PolySymbol, A: np.ndarray) -> PolySymbol:
    """``<A D_xi, D_x> p = -sum_jk A_jk d_{x_j} d_{xi_k} p``."""
    d = p.d
    out = p._like({})
    for j, k in itertools.product(range(d), range(d)):
        if A[j, k] != 0:
            out = out + p.derivative(d + k).derivative(j).scale(-A[j, k])
    return out


def transfer_series(p: PolySymbol, A, sign: int = 1, tol: float = 1e-16, max_terms: int = 400) -> PolySymbol:
    """``sum_k (i sign)^k / k! <A D_xi, D_x>^k p``.

    Undamped polynomials terminate after ``deg/2`` terms. For damped symbols
    the pairing acts on ``p * gaussian`` and the series is summed until a
    term's sup bound falls below ``tol`` times the running bound.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape != (p.d, p.d):
        raise ShapeError(f"transfer matrix must be {p.d}x{p.d}")
    total = p._like(p.coeffs)
    term = total
    scale = max(total.sup_bound(), np.finfo(float).tiny)
    for k in range(1, max_terms + 1):
        term = _pairing(term, A).scale(1j * sign / k)
        # drop coefficients far below rounding of the leading term
        term = term._like({m: c for m, c in term.coeffs.items() if abs(c) > 0})
        total = total + term
        size = term.sup_bound()
        if size == 0 or (p.sigma is not None and size < tol * scale):
            return total._like({m: c for m, c in total.coeffs.items() if c != 0})
        scale = max(scale, total.sup_bound())
    raise TruncationError(f"transfer series did not converge in {max_terms} terms")


# -- spectral transfer -----------------------------------------------------------------


def transfer(a: Field, A, sign: int = 1) -> Field:
    """``e^{i sign <A D_xi, D_x>} a = F_2 U_{-sign A} F_2^{-1} a``."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    d, _ = check_symbol(a)
    A = as_quantization(A, d).A
    if not np.any(A):
        return a
    b = fourier(a, axes=range(d, 2 * d), sign=INVERSE)
    return fourier(shear(b, A, sign=-sign), axes=range(d, 2 * d), sign=FORWARD)


def quantization_change(a: Field, A, B) -> Field:
    """Symbol ``b`` with ``op_B(b) = op_A(a)``: one shear by ``B - A`` inside ``F_2``.

    ``op_0(e^{i <A D_xi, D_x>} a) = op_A(a)`` gives
    ``b = e^{-i <B D_xi, D_x>} e^{i <A D_xi, D_x>} a = F_2 U_{B-A} F_2^{-1} a``.
    """
    d, _ = check_symbol(a)
    C = as_quantization(B, d).A - as_quantization(A, d).A
    return transfer(a, C, sign=-1)


# -- trace and sharp products ----------------------------------------------------------


def trace_restrict(F: Field, x0="diagonal") -> Field:
    """``F(., x0)`` on the first half of the axes, or the diagonal ``F(z, z)``.

    The axes split into two equal blocks; ``x0`` must be a node of the second
    block (no interpolation).
    """
    if F.dim % 2:
        raise ShapeError("trace_restrict needs two equal axis blocks")
    n = F.dim // 2
    first = F.grid.select(range(n))
    second = F.grid.select(range(n, 2 * n))
    if isinstance(x0, str):
        if x0 != "diagonal":
            raise InputError(f"unknown restriction mode {x0!r}")
        if first != second:
            raise ShapeError("diagonal restriction needs equal paired grids")
        idx = np.indices(first.shape)
        vals = F.values[tuple(idx) + tuple(idx)]
        return Field(first, vals, F.roles[:n])
    point = np.atleast_1d(np.asarray(x0, dtype=float))
    if point.shape != (n,):
        raise ShapeError(f"x0 must have {n} coordinates")
    index = tuple(second.index_of(k, point[k]) for k in range(n))
    return Field(first, F.values[(Ellipsis,) + index], F.roles[:n])


def sharp_kernel(a1: Field, a2: Field, A: QuantLike) -> Field:
    """``a1 #_A a2`` as the symbol of ``op_A(a1) op_A(a2)`` (dense matrix route)."""
    _check_pair(a1, a2)
    M = op_matrix(a1, A) @ op_matrix(a2, A)
    return symbol_from_kernel(kernel_from_matrix(M, A))


def sharp_zero_tensor(b1: Field, b2: Field) -> Field:
    """Kohn-Nirenberg product ``(e^{i D_xi D_y} b1(x, xi) b2(y, eta))|_{(y, eta) = (x, xi)}`` (d = 1).

    Builds the 4-axis tensor field, applies ``exp(-i v eta')`` after a partial
    inverse transform in ``xi`` (to ``v``) and a forward transform in ``y``
    (to ``eta'``), transforms back and restricts to the diagonal.
    """
    _check_pair(b1, b2)
    d, xg = check_symbol(b1)
    if d != 1:
        raise ShapeError("the tensor route is implemented for d = 1")
    n = xg.count[0]
    if n > TENSOR_MAX_N:
        raise MemoryGuardError(f"tensor route refuses N = {n} > {TENSOR_MAX_N}")
    g = b1.grid
    T = Field(g.product(g), np.multiply.outer(b1.values, b2.values), symbol_roles(1) * 2)
    T = fourier(T, axes=1, sign=INVERSE)
    T = fourier(T, axes=2, sign=FORWARD)
    v = T.grid.axis(1)
    eta = T.grid.axis(2)
    T = T.with_values(T.values * np.exp(-1j * np.multiply.outer(v, eta))[None, :, :, None])
    T = fourier(T, axes=1, sign=FORWARD)
    T = fourier(T, axes=2, sign=INVERSE, center=xg.center)
    return trace_restrict(T, "diagonal")


def sharp_tensor(a1: Field, a2: Field, A: QuantLike) -> Field:
    """``a1 #_A a2 = e^{-i <A D_xi, D_x>}((e^{i ..} a1) #_0 (e^{i ..} a2))``, d = 1, N <= 32."""
    _check_pair(a1, a2)
    d, _ = check_symbol(a1)
    q = as_quantization(A, d)
    b1, b2 = transfer(a1, q.A, +1), transfer(a2, q.A, +1)
    return transfer(sharp_zero_tensor(b1, b2), q.A, -1)


def sharp(a1: Field, a2: Field, A: QuantLike, route: str = "kernel") -> Field:
    """Sharp product ``a1 #_A a2``; ``route`` is ``"kernel"`` or ``"tensor"``."""
    if route == "kernel":
        return sharp_kernel(a1, a2, A)
    if route == "tensor":
        return sharp_tensor(a1, a2, A)
    raise InputError(f"unknown sharp route {route!r}")


def _check_pair(a1: Field, a2: Field):
    check_symbol(a1)
    check_symbol(a2)
    if a1.grid != a2.grid:
        raise ShapeError("both symbols must share one grid")


# -- weight estimate for composition ---------------------------------------------------


@dataclass(frozen=True)
class SharpWeightResult:
    R0: float
    margin: float
    ladder: tuple[tuple[float, float], ...]


def _default_ladder(s: float, R: float) -> list[float]:
    k = kappa(1.0 / s)
    cs = sorted({1.0, k, 2.0 * k})
    c0s = (0.0, 0.5, 1.0, 2.0, 4.0, 8.0)
    return sorted({c * R + c0 for c in cs for c0 in c0s})


def sharp_weight_check(
    w1: WeightSpec,
    w2: WeightSpec,
    s: float,
    R: float,
    box: Box,
    ladder: Sequence[float] | None = None,
    tol: float = 1e-12,
) -> SharpWeightResult:
    """Empirical constant of ``1/w_{0,R}(X,Y) <= C / (w_{1,R0}(X-Y+Z,Z) w_{2,R0}(X+Z,Y-Z))``.

    ``w_{j,R}(X, Y) = w_j(X) exp(-R |Y|^(1/s))`` and ``w_0 = w_1 w_2``; X, Y, Z
    run over the nodes of ``box`` (whose ``dim`` is the phase-space dimension).
    R0 is scanned along ``ladder`` (default ``c R + c0`` for a few ``c, c0``);
    the first R0 whose margin is within ``tol`` of 1 is returned, otherwise the
    last (largest) one. ``ladder`` in the result lists the scanned
    ``(R0, margin)`` pairs.
    """
    pts = box.points().reshape(-1, box.dim)
    X = pts[:, None, None, :]
    Y = pts[None, :, None, :]
    Z = pts[None, None, :, :]
    e = 1.0 / s
    norm = lambda P: np.sqrt(np.sum(P * P, axis=-1)) ** e  # noqa: E731
    base = R * norm(Y) - w1.log(X) - w2.log(X) + w1.log(X - Y + Z) + w2.log(X + Z)
    penalty = norm(Z) + norm(Y - Z)
    r0s = list(_default_ladder(s, R) if ladder is None else ladder)
    if not r0s:
        raise InputError("empty R0 ladder")
    scanned = []
    for r0 in r0s:
        margin = math.exp(float(np.max(base - r0 * penalty)))
        scanned.append((float(r0), margin))
        if margin <= 1.0 + tol:
            break
    return SharpWeightResult(float(r0), margin, tuple(scanned))
