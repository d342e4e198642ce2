"""Test functions and symbol presets sampled on grids."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import ShapeError
from .grid import SPACE, Field, Grid, symbol_roles


def gaussian(grid: Grid, width: float = 1.0, center=0.0, frequency=0.0) -> Field:
    """``exp(-|x - c|^2 / (2 width^2) + i <frequency, x>)`` on a space grid."""
    mesh = grid.mesh()
    c = np.broadcast_to(np.asarray(center, dtype=float), (grid.dim,))
    w = np.broadcast_to(np.asarray(frequency, dtype=float), (grid.dim,))
    r2 = np.sum((mesh - c) ** 2, axis=-1)
    return Field(grid, np.exp(-r2 / (2 * width**2) + 1j * mesh @ w))


def hermite_functions(grid: Grid, n_max: int) -> list[Field]:
    """First ``n_max + 1`` Hermite functions on a one-axis grid.

    Uses the three-term recurrence
    ``psi_n = sqrt(2/n) x psi_{n-1} - sqrt((n-1)/n) psi_{n-2}`` and then
    rescales each sample vector to unit quadrature L2 norm.
    """
    if grid.dim != 1:
        raise ShapeError("hermite_functions samples d = 1 grids")
    x = grid.axis(0)
    psi = [math.pi**-0.25 * np.exp(-(x**2) / 2)]
    if n_max >= 1:
        psi.append(math.sqrt(2.0) * x * psi[0])
    for n in range(2, n_max + 1):
        psi.append(math.sqrt(2.0 / n) * x * psi[n - 1] - math.sqrt((n - 1) / n) * psi[n - 2])
    out = []
    for p in psi[: n_max + 1]:
        nrm = math.sqrt(np.sum(p * p) * grid.cell_measure)
        out.append(Field(grid, p / nrm, (SPACE,)))
    return out


def gaussian_symbol(grid: Grid, x0=0.0, xi0=0.0, wx: float = 1.0, wxi: float = 1.0, phase=0.0) -> Field:
    """Phase-space Gaussian ``exp(-(x-x0)^2/(2wx^2) - (xi-xi0)^2/(2wxi^2) + i phase*x*xi)`` (d = 1)."""
    x, xi = np.meshgrid(grid.axis(0), grid.axis(1), indexing="ij")
    vals = np.exp(-((x - x0) ** 2) / (2 * wx**2) - (xi - xi0) ** 2 / (2 * wxi**2) + 1j * phase * x * xi)
    return Field(grid, vals, symbol_roles(1))


def constant_symbol(grid: Grid, value: complex = 1.0) -> Field:
    return Field(grid, np.full(grid.shape, value, dtype=complex), symbol_roles(grid.dim // 2))


def damped_monomial(grid: Grid, alpha: int, beta: int, sigma: float) -> Field:
    """``x^alpha xi^beta exp(-(x^2 + xi^2) / (2 sigma^2))`` on a d = 1 symbol grid."""
    x, xi = np.meshgrid(grid.axis(0), grid.axis(1), indexing="ij")
    vals = x**alpha * xi**beta * np.exp(-(x**2 + xi**2) / (2 * sigma**2))
    return Field(grid, vals, symbol_roles(1))


def growth_symbol(grid: Grid, h: float, s: float, cutoff: float | None = None, along: str = "x") -> Field:
    """``exp(h <t>^(1/s))`` along ``t = x`` or ``t = xi`` with a smooth boundary cutoff.

    The cutoff ``exp(-(t/cutoff)^16)`` (default ``cutoff`` = 0.8 of the axis
    halfwidth) keeps the periodic extension smooth.
    """
    k = 0 if along == "x" else 1
    t = grid.axis(k)
    if cutoff is None:
        cutoff = 0.8 * grid.halfwidth[k]
    profile = np.exp(h * (1 + t**2) ** (0.5 / s) - (t / cutoff) ** 16)
    vals = profile[:, None] * np.ones(grid.count[1 - k])[None, :]
    if k == 1:
        vals = vals.T
    return Field(grid, vals, symbol_roles(1))


def bump_at(grid: Grid, position: Sequence[float], width: float = 0.5) -> Field:
    """Narrow Gaussian bump at ``position`` (used for boundary-supported examples)."""
    return gaussian(grid, width=width, center=position)
