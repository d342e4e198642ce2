import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psical.errors import ConsistencyError, MemoryGuardError, ShapeError, WindowError
from psical.functions import gaussian, hermite_functions
from psical.grid import Field, MixedNormSpec, interior_mask, make_grid
from psical.stft import StftData, gaussian_window, istft, mod_norm, shifted_windows, stft, stft_rows
from psical.weights import Radial


def test_window_is_normalized(line):
    assert math.isclose(gaussian_window(line).l2_norm(), 1.0, rel_tol=1e-12)


def test_gaussian_closed_form(line):
    phi = gaussian_window(line)
    V = stft(phi, phi)
    x, xi = np.meshgrid(line.axis(0), line.dual().axis(0), indexing="ij")
    exact = np.exp(-(x**2) / 4 - xi**2 / 4 - 0.5j * x * xi) / math.sqrt(2 * math.pi)
    mask = interior_mask(V.values.grid)
    assert np.max(np.abs(V.values.values - exact)[mask]) < 1e-13


@pytest.mark.parametrize("center, freq", [(0.0, 0.0), (1.5, -2.0), (-2.0, 1.0)])
def test_inversion_roundtrip(line, center, freq):
    f = gaussian(line, width=0.8, center=center, frequency=freq)
    back = istft(stft(f, gaussian_window(line)))
    assert np.max(np.abs(back.values - f.values)) < 1e-12


def test_moyal_identity(line):
    # |V_phi f|_2 = |f|_2 |phi|_2
    f = hermite_functions(line, 3)[3]
    phi = gaussian(line, width=1.3)
    V = stft(f, phi)
    assert math.isclose(V.values.l2_norm(), f.l2_norm() * phi.l2_norm(), rel_tol=1e-12)


def test_rows_match_full_transform(line, rng):
    f = Field(line, rng.standard_normal(line.shape) * gaussian(line, 2.0).values)
    phi = gaussian_window(line)
    full = stft(f, phi).values.values
    picks = [(0,), (17,), (128,), (255,)]
    rows = stft_rows(f, phi, picks)
    for n, (i,) in enumerate(picks):
        assert np.allclose(rows[n], full[i])


def test_shifted_windows_center_row(line):
    phi = gaussian_window(line)
    W = shifted_windows(phi)
    i0 = line.zero_index(0)
    assert np.array_equal(W[i0], phi.values)


def test_two_dimensional_closed_form():
    g = make_grid((0.0, 0.0), (6.0, 6.0), (32, 32))
    phi = gaussian_window(g)
    V = stft(phi, phi).values
    i0 = g.zero_index(0)
    assert math.isclose(abs(V.values[i0, i0, 16, 16]), 1 / (2 * math.pi), rel_tol=1e-10)


def test_memory_guard():
    g = make_grid((0.0, 0.0), (6.0, 6.0), (128, 128))
    with pytest.raises(MemoryGuardError):
        stft(gaussian_window(g), gaussian_window(g))


def test_input_checks(line):
    phi = gaussian_window(line)
    with pytest.raises(WindowError):
        stft(phi, phi.with_values(np.zeros(line.shape)))
    other = gaussian_window(make_grid(0.0, 10.0, 128))
    with pytest.raises(ShapeError):
        stft(phi, other)


def test_stft_data_invariants(line):
    V = stft(gaussian_window(line), gaussian_window(line))
    with pytest.raises(ConsistencyError):
        StftData(V.values, V.window, 2.0)
    with pytest.raises(ConsistencyError):
        StftData(V.values.as_function(), V.window, V.window_l2)


def test_zero_stft_inverts_to_zero(line):
    phi = gaussian_window(line)
    V = stft(phi.with_values(np.zeros(line.shape)), phi)
    assert not np.any(istft(V).values)


@pytest.mark.parametrize("h", [0.0, 0.05, 0.1])
def test_weighted_mod_norm_closed_form(h):
    # |V phi|^2 = exp(-(x^2+xi^2)/2)/(2 pi), so the weighted L2 norm is (1-4h)^(-1/2)
    g = make_grid(0.0, math.sqrt(math.pi * 64 / 2), 64)
    phi = gaussian_window(g)
    val = mod_norm(phi, phi, MixedNormSpec(2, 2, (0,), Radial(h, 0.5, (1, 1))))
    assert math.isclose(val, math.sqrt(1 / (1 - 4 * h)), rel_tol=1e-8)


@settings(max_examples=15, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_translation_moves_the_peak(c, w):
    g = make_grid(0.0, 10.0, 128)
    V = np.abs(stft(gaussian(g, 1.0, c, w), gaussian_window(g)).values.values)
    i, j = np.unravel_index(np.argmax(V), V.shape)
    assert abs(g.axis(0)[i] - c) <= 2 * g.spacing[0]
    assert abs(g.dual().axis(0)[j] - w) <= 2 * g.dual_spacing[0]
