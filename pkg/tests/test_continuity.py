import math

import numpy as np
import pytest

from psical.continuity import bounded_map_check, infinite_order_smoothing_check, norm_ladder, phase_weight
from psical.errors import InputError
from psical.functions import constant_symbol, gaussian, gaussian_symbol
from psical.grid import Field, make_grid, symbol_grid
from psical.stft import gaussian_window


@pytest.fixture
def coarse():
    # a coarse grid keeps FFT roundoff out of reach of the exponential weights
    return make_grid(0.0, math.sqrt(math.pi * 64 / 2), 64)


def test_phase_weight_values():
    w = phase_weight(0.5, 1.0)
    assert math.isclose(w((2.0, -1.0)), math.exp(1.5))


def test_norm_ladder_closed_form(coarse):
    phi = gaussian_window(coarse)
    ladder = [0.0, 0.05, 0.1]
    rep = norm_ladder(phi, phi, 0.5, 2, 2, ladder)
    exact = [math.sqrt(1 / (1 - 4 * h)) for h in ladder]
    assert np.allclose(rep.norms, exact, rtol=1e-8)
    assert rep.finite_for_all and rep.N == 64


def test_norm_ladder_flags_blow_up(coarse):
    phi = gaussian_window(coarse)
    rep = norm_ladder(phi, phi, 0.5, 2, 2, [0.1, 0.6, 1.0], threshold=1e3)
    assert rep.finite_for_some and not rep.finite_for_all


def test_norm_ladder_guards(coarse):
    phi = gaussian_window(coarse)
    with pytest.raises(InputError):
        norm_ladder(phi, phi, 0.5, 2, 2, [])
    with pytest.raises(InputError):
        norm_ladder(phi, phi, 0.5, 2, 2, [0.2, 0.1])


def test_identity_is_bounded_between_equal_weights():
    sg = symbol_grid(8.0, 64)
    xg = sg.select([0])
    tests = [gaussian(xg, 1.0, c) for c in (-1.0, 0.0, 2.0)]
    rep = bounded_map_check(constant_symbol(sg), 0.0, 1.0, 0.1, 0.1, 2, 2, tests, r1=0.2, r2=0.05)
    assert np.allclose(rep.ratios, 1.0, atol=1e-12)
    assert rep.rhocond is not None and len(rep.rhocond) == 2


def test_smoothing_operator_shrinks_weighted_norms():
    sg = symbol_grid(8.0, 64)
    xg = sg.select([0])
    tests = [gaussian(xg, 0.7, c, w) for c, w in ((0.0, 0.0), (1.5, 1.0), (-2.0, -1.5))]
    rep = bounded_map_check(gaussian_symbol(sg), 0.5, 1.0, 0.1, 0.3, 2, 2, tests)
    assert rep.ratio == max(rep.ratios)
    assert math.isfinite(rep.ratio) and rep.ratio < 10


def test_bounded_map_guards():
    sg = symbol_grid(8.0, 32)
    xg = sg.select([0])
    with pytest.raises(InputError):
        bounded_map_check(constant_symbol(sg), 0.0, 1.0, 0.1, 0.1, 2, 2, [])
    with pytest.raises(InputError):
        bounded_map_check(constant_symbol(sg), 0.0, 1.0, 0.1, 0.1, 2, 2, [Field(xg, np.zeros(32))])


def test_infinite_order_smoothing():
    sg = symbol_grid(16.0, 256)
    xg = sg.select([0])
    x = xg.axis(0)
    f = Field(xg, (1 + x**2) * np.exp(-((x / 13) ** 16)))
    rep = infinite_order_smoothing_check(gaussian_symbol(sg), f, 0.5, 0.0, radius=5.0)
    assert rep.source.a > 0
    assert rep.decays
    assert set(rep.to_dict()) == {"source", "image", "decays"}
