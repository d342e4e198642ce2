import math

import numpy as np
import pytest

from psical.acceptance import series_spectral_gap
from psical.calculus import (
    MAX_DEGREE,
    PolySymbol,
    quantization_change,
    sharp,
    sharp_weight_check,
    trace_restrict,
    transfer,
    transfer_series,
)
from psical.errors import InputError, MemoryGuardError, ShapeError, TruncationError
from psical.functions import constant_symbol, damped_monomial, gaussian_symbol
from psical.grid import Field, interior_mask, make_grid, symbol_grid
from psical.quantize import op_matrix
from psical.weights import Box, Radial, Unit


def _coeffs(p):
    return {k: complex(round(c.real, 12), round(c.imag, 12)) for k, c in p.coeffs.items()}


@pytest.mark.parametrize(
    "alpha, beta, t, expected",
    [
        (1, 1, 0.5, {((1,), (1,)): 1, ((0,), (0,)): -0.5j}),
        (2, 2, 1.0, {((2,), (2,)): 1, ((1,), (1,)): -4j, ((0,), (0,)): -2}),
        (2, 0, 0.7, {((2,), (0,)): 1}),
        (1, 2, 1.0, {((1,), (2,)): 1, ((0,), (1,)): -2j}),
    ],
)
def test_series_on_polynomials(alpha, beta, t, expected):
    assert _coeffs(transfer_series(PolySymbol.monomial(alpha, beta), t, +1)) == expected


def test_series_sign_inverts():
    p = PolySymbol.monomial(3, 2, sigma=None)
    back = transfer_series(transfer_series(p, 0.5, +1), 0.5, -1)
    assert _coeffs(back) == {((3,), (2,)): 1}


def test_polysymbol_validation():
    with pytest.raises(InputError):
        PolySymbol.monomial(MAX_DEGREE, 1)
    with pytest.raises(InputError):
        PolySymbol.monomial(-1, 0)
    with pytest.raises(InputError):
        PolySymbol.monomial(1, 1, sigma=0.0)
    with pytest.raises(ShapeError):
        PolySymbol.monomial(1, 1) + PolySymbol.monomial(1, 1, sigma=2.0)
    with pytest.raises(ShapeError):
        transfer_series(PolySymbol.monomial(1, 1), np.eye(2))


def test_damped_derivative_matches_samples(sgrid):
    p = PolySymbol.monomial(2, 1, sigma=1.5)
    dx = p.derivative(0).render(sgrid).values
    x, xi = np.meshgrid(sgrid.axis(0), sgrid.axis(1), indexing="ij")
    g = np.exp(-(x**2 + xi**2) / (2 * 1.5**2))
    exact = (2 * x * xi - x**3 * xi / 1.5**2) * g
    assert np.max(np.abs(dx - exact)) < 1e-12
    assert np.allclose(p.render(sgrid).values, damped_monomial(sgrid, 2, 1, 1.5).values)


def test_sup_bound_dominates(sgrid):
    p = PolySymbol({((2,), (1,)): 1.0, ((0,), (3,)): -2.0}, sigma=1.2)
    assert np.max(np.abs(p.render(sgrid).values)) <= p.sup_bound()


def test_series_truncation_guard():
    with pytest.raises(TruncationError):
        transfer_series(PolySymbol.monomial(2, 2, sigma=0.3), 1.0, +1, max_terms=3)


@pytest.mark.parametrize("t", [0.25, 0.5, 1.0])
def test_transfer_inverts(sgrid, t):
    a = gaussian_symbol(sgrid, 0.4, -0.3, 1.1, 0.9)
    back = transfer(transfer(a, t, +1), t, -1)
    assert np.max(np.abs(back.values - a.values)) < 1e-13


def test_transfer_gaussian_closed_form():
    sg = symbol_grid(12.0, 128)
    sigma, t = 1.5, 0.5
    a = gaussian_symbol(sg, wx=sigma, wxi=sigma)
    x, xi = np.meshgrid(sg.axis(0), sg.axis(1), indexing="ij")
    alpha = t**2 / sigma**2 + sigma**2
    exact = sigma / np.sqrt(alpha) * np.exp(-(x**2) / (2 * sigma**2) + (x * t / sigma**2 - 1j * xi) ** 2 / (2 * alpha))
    got = transfer(a, t, +1).values
    mask = interior_mask(sg)
    assert np.max(np.abs(got - exact)[mask]) < 1e-12


@pytest.mark.parametrize("t", [0.5, 1.0])
def test_transfer_moves_quantization(sgrid, t):
    a = gaussian_symbol(sgrid, 0.5, 0.2, 1.3, 1.0, phase=0.1)
    lhs = op_matrix(transfer(a, t, +1), 0.0).matrix
    rhs = op_matrix(a, t).matrix
    assert np.max(np.abs(lhs - rhs)) < 1e-13


@pytest.mark.parametrize("A, B", [(0.0, 0.5), (0.5, 1.0), (1.0, 0.0), (0.3, 0.3)])
def test_quantization_change(sgrid, A, B):
    a = gaussian_symbol(sgrid, -0.2, 0.4, 0.9, 1.2)
    b = quantization_change(a, A, B)
    assert np.max(np.abs(op_matrix(b, B).matrix - op_matrix(a, A).matrix)) < 1e-13


def test_series_matches_spectral_on_a_fine_grid():
    # companion to the N = 256 acceptance run: periodic truncation vanishes once the box holds the symbol
    gaps = series_spectral_gap(2048, 8.0)
    assert max(gaps.values()) < 1e-6


def test_trace_restrict():
    g = make_grid((0.0, 0.0), (4.0, 4.0), (8, 8))
    vals = np.arange(64.0).reshape(8, 8)
    F = Field(g, vals)
    assert np.array_equal(trace_restrict(F).values, np.diag(vals))
    col = trace_restrict(F, [0.0])
    assert np.array_equal(col.values, vals[:, g.zero_index(1)])
    with pytest.raises(InputError):
        trace_restrict(F, "antidiagonal")
    with pytest.raises(ShapeError):
        trace_restrict(F, [0.0, 1.0])
    with pytest.raises(ShapeError):
        trace_restrict(Field(make_grid(0.0, 1.0, 8), np.zeros(8)))


@pytest.mark.parametrize("t", [0.0, 0.5, 1.0])
def test_constant_is_the_sharp_unit(sgrid, t):
    a = gaussian_symbol(sgrid, 0.3, 0.1, 1.2, 1.0)
    one = constant_symbol(sgrid)
    assert np.max(np.abs(sharp(one, a, t).values - a.values)) < 1e-12
    assert np.max(np.abs(sharp(a, one, t).values - a.values)) < 1e-12


@pytest.mark.parametrize("t", [0.0, 0.5, 1.0])
def test_sharp_routes_agree(t):
    sg = symbol_grid(6.0, 32)
    a1 = gaussian_symbol(sg, 0.3, -0.2, 1.0, 1.2)
    a2 = gaussian_symbol(sg, -0.4, 0.5, 1.3, 0.9, phase=0.2)
    k = sharp(a1, a2, t, "kernel").values
    s = sharp(a1, a2, t, "tensor").values
    assert np.max(np.abs(k - s)[interior_mask(sg)]) < 1e-10


@pytest.mark.parametrize("t", [0.5, 1.0])
def test_sharp_of_x_and_xi(t):
    # x #_t xi = x xi + i t, read at the origin where the damping is flat
    sg = symbol_grid(20.0, 256)
    ax = PolySymbol.monomial(1, 0, sigma=3.0).render(sg)
    axi = PolySymbol.monomial(0, 1, sigma=3.0).render(sg)
    c = sharp(ax, axi, t)
    i0, j0 = sg.zero_index(0), sg.zero_index(1)
    assert abs(c.values[i0, j0] - 1j * t) < 0.05 * t


def test_sharp_guards(sgrid):
    a = constant_symbol(sgrid)
    with pytest.raises(MemoryGuardError):
        sharp(a, a, 0.0, "tensor")
    with pytest.raises(InputError):
        sharp(a, a, 0.0, "matrix")
    with pytest.raises(ShapeError):
        sharp(a, constant_symbol(symbol_grid(5.0, 16)), 0.0)


def test_sharp_weight_check_unit_weights():
    res = sharp_weight_check(Unit(), Unit(), 1.0, 1.0, Box(3.0, 7, 2))
    assert res.margin <= 1 + 1e-12
    assert res.R0 == 1.0
    assert res.ladder[-1] == (res.R0, res.margin)


def test_sharp_weight_check_growth():
    w = Radial(0.5, 1.0, (1, 1))
    res = sharp_weight_check(w, w, 1.0, 1.0, Box(2.0, 5, 2))
    assert res.margin <= 1 + 1e-12
    assert all(m > 1 for _, m in res.ladder[:-1])
    with pytest.raises(InputError):
        sharp_weight_check(w, w, 1.0, 1.0, Box(2.0, 5, 2), ladder=[])
    assert math.isfinite(sharp_weight_check(w, w, 1.0, 1.0, Box(0.0, 1, 2)).margin)
