import math

import numpy as np
import pytest

from psical.errors import InputError, ShapeError
from psical.functions import constant_symbol, damped_monomial, gaussian, gaussian_symbol
from psical.grid import Field, make_grid, symbol_grid, symbol_roles
from psical.quantize import (
    OperatorMatrix,
    QuantizationMatrix,
    apply,
    as_quantization,
    check_symbol,
    direct_apply,
    kernel_from_matrix,
    kernel_from_symbol,
    op_matrix,
    symbol_from_kernel,
)


@pytest.mark.parametrize("spec, t", [("kn", 0.0), ("weyl", 0.5), ("one", 1.0), ("0.25", 0.25), (0.7, 0.7)])
def test_as_quantization(spec, t):
    assert as_quantization(spec, 1) == QuantizationMatrix.from_t(t)


def test_quantization_errors():
    with pytest.raises(InputError):
        QuantizationMatrix.preset("left")
    with pytest.raises(ShapeError):
        as_quantization(np.eye(2), 1)
    with pytest.raises(ShapeError):
        QuantizationMatrix(np.ones((2, 3)))
    with pytest.raises(InputError):
        QuantizationMatrix([[np.nan]])


def test_check_symbol_layout(sgrid):
    assert check_symbol(constant_symbol(sgrid))[0] == 1
    with pytest.raises(ShapeError):
        check_symbol(Field(sgrid, np.ones(sgrid.shape)))
    with pytest.raises(ShapeError):
        check_symbol(Field(make_grid((0, 0), (4, 4), (16, 16)), np.ones((16, 16)), symbol_roles(1)))


@pytest.mark.parametrize("t", [0.0, 0.5, 1.0, 0.3])
def test_constant_symbol_is_identity(sgrid, t):
    M = op_matrix(constant_symbol(sgrid), t).matrix
    assert np.max(np.abs(M - np.eye(M.shape[0]))) < 1e-13


@pytest.mark.parametrize("t", [0.0, 0.5, 1.0])
def test_x_only_symbol_is_multiplication(sgrid, t):
    x = sgrid.axis(0)
    a = Field(sgrid, np.exp(-(x[:, None] ** 2) / 4) * np.ones(sgrid.count[1]), symbol_roles(1))
    M = op_matrix(a, t).matrix
    assert np.max(np.abs(M - np.diag(np.exp(-(x**2) / 4)))) < 1e-13


def test_xi_symbol_differentiates():
    g = symbol_grid(10.0, 128)
    xi = g.axis(1)
    a = Field(g, np.ones(g.count[0])[:, None] * xi[None, :], symbol_roles(1))
    f = gaussian(g.select([0]))
    x = g.axis(0)
    # op(xi) = -i d/dx, and -i d/dx exp(-x^2/2) = i x exp(-x^2/2)
    out = op_matrix(a, 0.0).apply(f).values
    assert np.max(np.abs(out - 1j * x * f.values)) < 1e-12


@pytest.mark.parametrize("t", [0.0, 0.25, 0.5, 1.0, -0.5])
def test_kernel_symbol_roundtrip(sgrid, rng, t):
    a = gaussian_symbol(sgrid, 0.5, -1.0, 1.2, 0.8, phase=0.3)
    back = symbol_from_kernel(kernel_from_symbol(a, t))
    assert back.roles == a.roles
    assert np.max(np.abs(back.values - a.values)) < 1e-13


def test_weyl_real_symbol_is_hermitian(sgrid):
    a = damped_monomial(sgrid, 2, 1, 1.0)
    M = op_matrix(a, "weyl").matrix
    assert np.max(np.abs(M - M.conj().T)) < 1e-13 * np.max(np.abs(M))


def test_kn_adjoint_is_one_quantization_of_conjugate(sgrid):
    a = gaussian_symbol(sgrid, 1.0, 0.5, phase=0.4)
    M = op_matrix(a, 0.0).matrix
    Ms = op_matrix(a.with_values(np.conj(a.values)), 1.0).matrix
    assert np.max(np.abs(M.conj().T - Ms)) < 1e-12


@pytest.mark.parametrize("t", [0.0, 0.5, 1.0])
def test_direct_quadrature_agrees(t):
    # the grid must hold f well inside it, since direct quadrature uses true differences
    g = symbol_grid(10.0, 64)
    a = gaussian_symbol(g, 0.3, 0.2, 1.0, 1.1)
    f = gaussian(g.select([0]), 1.2, center=0.4)
    fast = op_matrix(a, t).apply(f).values
    slow = direct_apply(a, t, f).values
    assert np.max(np.abs(fast - slow)) < 1e-9


def test_kernel_and_matrix_views_agree(sgrid):
    a = gaussian_symbol(sgrid, wx=2.0)
    K = kernel_from_symbol(a, 0.5)
    f = gaussian(sgrid.select([0]), 1.0)
    M = op_matrix(a, 0.5)
    assert np.allclose(apply(K, f).values, M.apply(f).values)
    assert np.allclose(kernel_from_matrix(M, 0.5).values.values, K.values.values)


def test_operator_matrix_checks(sgrid):
    xg = sgrid.select([0])
    M = OperatorMatrix(np.eye(xg.size), xg, xg)
    other = make_grid(0.0, 5.0, 16)
    with pytest.raises(ShapeError):
        OperatorMatrix(np.eye(3), xg, xg)
    with pytest.raises(ShapeError):
        M @ OperatorMatrix(np.eye(16), other, other)
    with pytest.raises(ShapeError):
        M.apply(gaussian(other))
    with pytest.raises(ShapeError):
        direct_apply(gaussian_symbol(sgrid), 0.0, gaussian(other))


def test_two_dimensional_identity():
    g = symbol_grid(5.0, 8, d=2)
    M = op_matrix(constant_symbol(g), np.diag([0.0, 1.0])).matrix
    assert np.max(np.abs(M - np.eye(64))) < 1e-12
    assert math.isclose(float(np.trace(M).real), 64.0)
