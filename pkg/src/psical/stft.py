"""Short-time Fourier transform with the unitary convention, its inverse, and
modulation-space norms.

``V_phi f(x, xi) = (2 pi)^(-d/2) sum_y f(y) conj(phi(y - x)) exp(-i <y, xi>) dy``
for every node ``x`` of the function grid and every node ``xi`` of its dual
grid. Window shifts are cyclic index rolls, matching the periodic model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ConsistencyError, MemoryGuardError, ShapeError, WindowError
from .grid import (
    FORWARD,
    INVERSE,
    SPACE,
    Field,
    Grid,
    MixedNormSpec,
    fourier,
    mixed_norm,
)

#: largest number of STFT samples materialized at once
MAX_STFT_SAMPLES = 2**25


def gaussian_window(grid: Grid) -> Field:
    """``pi^(-d/4) exp(-|x|^2 / 2)`` on a space grid."""
    r2 = np.sum(grid.mesh() ** 2, axis=-1)
    return Field(grid, math.pi ** (-grid.dim / 4) * np.exp(-r2 / 2))


@dataclass(frozen=True, eq=False)
class StftData:
    """``V_phi f`` on the product of the function grid and its dual grid."""

    values: Field
    window: Field
    window_l2: float

    def __post_init__(self):
        g = self.window.grid
        expected = g.product(g.dual())
        if self.values.grid != expected:
            raise ConsistencyError("STFT grid must be the window grid times its dual grid")
        d = g.dim
        if self.values.roles != (SPACE,) * d + ("frequency",) * d:
            raise ConsistencyError("STFT axes must be (space x d, frequency x d)")
        if not self.window_l2 > 0:
            raise ConsistencyError("window_l2 must be positive")
        if not math.isclose(self.window_l2, self.window.l2_norm(), rel_tol=1e-10):
            raise ConsistencyError("window_l2 does not match the stored window")

    @property
    def dim(self) -> int:
        return self.window.grid.dim


def _check_pair(f: Field, phi: Field):
    if f.grid != phi.grid:
        raise ShapeError("function and window must share one grid")
    if any(r != SPACE for r in f.roles + phi.roles):
        raise ShapeError("STFT inputs must have space axes only")
    if not np.any(phi.values):
        raise WindowError("window is identically zero")


def _shift_indices(grid: Grid) -> list[np.ndarray]:
    """Per axis, ``idx[i, j] = (j - i + i0) mod N`` so ``phi[idx] = phi(y_j - x_i)``."""
    out = []
    for k in range(grid.dim):
        n = grid.count[k]
        i0 = grid.zero_index(k)
        out.append((np.arange(n)[None, :] - np.arange(n)[:, None] + i0) % n)
    return out


def shifted_windows(phi: Field, shifts: Iterable[tuple[int, ...]] | None = None) -> np.ndarray:
    """``phi(y - x)`` for the given shift node indices (all nodes when ``None``).

    Returns an array of shape ``(n_shifts,) + grid.shape`` or, for all nodes,
    ``grid.shape + grid.shape``.
    """
    grid = phi.grid
    d = grid.dim
    idx = _shift_indices(grid)
    if shifts is None:
        if grid.size**2 > MAX_STFT_SAMPLES:
            raise MemoryGuardError(f"full STFT of a grid of size {grid.size} is too large")
        parts = []
        for k in range(d):
            shape = [1] * (2 * d)
            shape[k] = grid.count[k]
            shape[d + k] = grid.count[k]
            parts.append(idx[k].reshape(shape))
        return phi.values[tuple(parts)]
    shifts = [tuple(s) for s in shifts]
    parts = [np.stack([idx[k][s[k]] for s in shifts]).reshape((len(shifts),) + (1,) * k + (grid.count[k],) + (1,) * (d - k - 1)) for k in range(d)]
    return phi.values[tuple(parts)]


def stft(f: Field, phi: Field) -> StftData:
    """Full STFT of ``f`` against ``phi`` on all grid shifts."""
    _check_pair(f, phi)
    grid = f.grid
    d = grid.dim
    windows = shifted_windows(phi)
    prod = f.values.reshape((1,) * d + grid.shape) * np.conj(windows)
    pair = Field(grid.product(grid), prod, (SPACE,) * (2 * d))
    V = fourier(pair, axes=range(d, 2 * d), sign=FORWARD)
    return StftData(values=V, window=phi, window_l2=phi.l2_norm())


def stft_rows(f: Field, phi: Field, shifts: Iterable[tuple[int, ...]]) -> np.ndarray:
    """STFT restricted to the listed shift node indices.

    Returns ``(n_shifts,) + grid.shape`` values on the dual grid. Used for
    phase-space symbols whose full STFT does not fit in memory.
    """
    _check_pair(f, phi)
    grid = f.grid
    shifts = list(shifts)
    windows = shifted_windows(phi, shifts)
    out = np.empty((len(shifts),) + grid.shape, dtype=complex)
    for n in range(len(shifts)):
        row = Field(grid, f.values * np.conj(windows[n]))
        out[n] = fourier(row, sign=FORWARD).values
    return out


def istft(V: StftData) -> Field:
    """Quadrature inversion ``(2 pi)^(-d/2) |phi|^-2 sum V(y, eta) phi(x - y) exp(i <x, eta>)``."""
    grid = V.window.grid
    d = grid.dim
    if V.values.grid != grid.product(grid.dual()):
        raise ConsistencyError("STFT grid does not match its window")
    if not np.any(V.values.values):
        return Field(grid, np.zeros(grid.shape))
    back = fourier(V.values, axes=range(d, 2 * d), sign=INVERSE, center=grid.center)
    if back.grid != grid.product(grid):
        raise ConsistencyError("inverse transform did not land on the window grid")
    windows = shifted_windows(V.window)
    total = np.sum(back.values * windows, axis=tuple(range(d))) * grid.cell_measure
    return Field(grid, total / V.window_l2**2)


def mod_norm(f: Field, phi: Field, spec: MixedNormSpec) -> float:
    """Weighted mixed norm of ``V_phi f`` with x integrated first, then xi.

    The weight in ``spec`` is evaluated on the ``(x, xi)`` grid; ``spec.inner_axes``
    is replaced by the space block.
    """
    V = stft(f, phi)
    d = f.grid.dim
    inner = MixedNormSpec(spec.p, spec.q, tuple(range(d)), spec.weight)
    return mixed_norm(V.values, inner)
