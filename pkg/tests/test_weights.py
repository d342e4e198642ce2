import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psical.errors import DomainError, ShapeError, TruncationError
from psical.weights import (
    Box,
    Extended,
    MultiplierParams,
    Product,
    Radial,
    Split,
    Unit,
    bracket,
    eval_weight,
    kappa,
    log_m_s,
    m_s_tau,
    moderateness_margin,
    paola_check,
    proof_constants,
    report_rows_csv,
    rhocond_slack,
    weight_from_dict,
    weight_from_json,
    weight_ratio_check,
)


@pytest.mark.parametrize("r, expected", [(0.3, 1.0), (1.0, 1.0), (2.0, 2.0), (3.0, 4.0), (1.5, 2**0.5)])
def test_kappa_values(r, expected):
    assert kappa(r) == expected


@pytest.mark.parametrize("r", [0.0, -1.0])
def test_kappa_domain(r):
    with pytest.raises(DomainError):
        kappa(r)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 4.0), st.floats(0, 50), st.floats(0, 50))
def test_kappa_subadditivity(r, a, b):
    assert (a + b) ** r <= kappa(r) * (a**r + b**r) * (1 + 1e-12) + 1e-300


def test_bracket():
    assert bracket([0.0]) == 1.0
    assert math.isclose(float(bracket([3.0, 4.0])), math.sqrt(26))


def test_weight_values():
    assert eval_weight(Unit(), [1.0, 2.0]) == 1.0
    w = Radial(0.5, 1.0)
    assert math.isclose(eval_weight(w, [2.0]), math.e)
    split = Split(1.0, 0.5, 1.0)
    assert math.isclose(eval_weight(split, [1.0, 2.0]), math.exp(1.0 - 1.0))
    prod = Product((Radial(0.5, 1.0, (1, 1)), Split(1.0, 0.5, 1.0)))
    assert math.isclose(eval_weight(prod, [1.0, 2.0]), math.exp(1.5) * 1.0)


def test_weight_dimension_mismatch():
    with pytest.raises(ShapeError):
        eval_weight(Radial(1.0, 1.0), [1.0, 2.0])


@pytest.mark.parametrize(
    "w",
    [Unit(), Radial(0.3, 0.7, (1, 1)), Split(0.2, 0.4, 2.0), Product((Unit(), Radial(1.0, 1.0))),
     Extended(Radial(0.5, 1.0, (1, 1)), 2.0, 1.0)],
)
def test_weight_json_roundtrip(w):
    back = weight_from_json(w.to_json())
    pts = np.linspace(-2, 2, 24).reshape(-1, 2) if w.dim in (None, 2) else np.linspace(-2, 2, 24).reshape(-1, 4)
    if w.dim == 1:
        pts = pts[:, :1]
    assert np.allclose(back.log(pts), w.log(pts))
    assert json.loads(w.to_json())["kind"] == w.kind


def test_weight_from_dict_unknown():
    with pytest.raises(Exception):
        weight_from_dict({"kind": "mystery"})


def test_moderateness_of_radial_weight():
    # |x+y| <= |x| + |y| gives margin exactly 1 when c = h and s = 1
    assert math.isclose(moderateness_margin(Radial(1.0, 1.0), 1.0, 1.0, Box(5.0, 21)), 1.0)
    # a weaker penalty leaves a margin that grows with the box
    small = moderateness_margin(Radial(1.0, 1.0), 0.5, 1.0, Box(5.0, 21))
    large = moderateness_margin(Radial(1.0, 1.0), 0.5, 1.0, Box(10.0, 41))
    assert 1.0 < small < large


def test_split_weight_is_moderate_blockwise():
    w = Split(1.0, 0.5, 1.0)
    assert math.isclose(moderateness_margin(w, 1.0, 1.0, Box(5.0, 21, 2), blocks=(1, 1)), 1.0)


def test_multiplier_half_is_exponential():
    x = np.linspace(-5, 5, 101)[:, None]
    got = m_s_tau(MultiplierParams(0.5, 0.7), x)
    assert np.max(np.abs(got / np.exp(0.7 * (1 + x[:, 0] ** 2)) - 1)) < 1e-12


def test_multiplier_trivial_cases():
    assert math.isclose(float(m_s_tau(MultiplierParams(0.5, 1.0), np.zeros((1, 1)))[0]), math.e, rel_tol=1e-14)
    p = MultiplierParams(1.0, 1.0, J=0)
    assert float(log_m_s(p, 3.0, check=False)) == 0.0
    with pytest.raises(TruncationError):
        log_m_s(MultiplierParams(0.5, 1.0, J=5), 50.0)


def test_multiplier_domain():
    with pytest.raises(DomainError):
        MultiplierParams(0.4, 1.0)
    with pytest.raises(DomainError):
        MultiplierParams(1.0, 0.0)


def test_multiplier_sandwich_bounded():
    c_low, c_high = paola_check(MultiplierParams(0.75, 1.0), 1.0, 0.1, Box(10.0, 41))
    assert c_low < 10 and c_high < 10
    direct = m_s_tau(MultiplierParams(0.75, 1.0), np.array([[2.0]]))[0]
    assert math.isclose(direct, 32.12, rel_tol=1e-3)


def test_sandwich_at_half_is_exp_minus_eps():
    lo, hi = paola_check(MultiplierParams(0.5, 1.0), 1.0, 0.1, Box(6.0, 25))
    assert math.isclose(lo, math.exp(-0.1), rel_tol=1e-12)
    assert math.isclose(hi, math.exp(-0.1), rel_tol=1e-12)


@pytest.mark.parametrize("s, h, eps", [(1.0, 0.2, 0.6), (1.5, 0.3, 1.0), (2.0, 0.1, 0.5), (3.0, 0.2, 0.8)])
def test_proof_constants_satisfy_scalar_inequality(s, h, eps):
    c = proof_constants(s, h, eps)
    assert c["h2"] > 0
    # the scalar inequality is the Weyl (A = 1/2) form of the weight condition
    rep = weight_ratio_check(c["h1"], c["h2"], c["r1"], c["r2"], s, 0.5, Box(8.0, 33))
    assert rep.pointwise_ok
    assert rep.worst_gap <= 1e-12
    assert rep.max_ratio <= 1 + 1e-12


@pytest.mark.parametrize("s", [0.6, 0.75, 0.9])
def test_proof_constants_below_one_break_the_inequality(s):
    # documented defect: the displayed h1 is too small once kappa(1/s) > 1
    c = proof_constants(s, 0.2, 0.6)
    rep = weight_ratio_check(c["h1"], c["h2"], c["r1"], c["r2"], s, 0.0, Box(8.0, 33))
    assert not rep.pointwise_ok
    k = kappa(1 / s)
    fixed_h1 = k * (c["h2"] + k * 0.2)
    fixed = weight_ratio_check(fixed_h1, c["h2"], c["r1"], c["r2"], s, 0.0, Box(8.0, 33))
    assert fixed.pointwise_ok


def test_rhocond_slack_signs():
    a, b = rhocond_slack(1.0, 0.1, 0.2, 1.0, 1.0)
    assert math.isclose(a, 1.0 - 0.1 - 0.1)
    assert math.isclose(b, 1.0 - 0.3)


def test_box_validation():
    with pytest.raises(ShapeError):
        Box(1.0, 1)
    assert Box(0.0, 1).nodes.tolist() == [0.0]
    assert Box(8.0, 33).step == 0.5


def test_report_rows_csv():
    text = report_rows_csv([{"a": 1, "b": 2.5}, {"a": 3, "b": 4.0}])
    assert text.splitlines() == ["a,b", "1,2.5", "3,4.0"]
