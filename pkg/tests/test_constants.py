import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from epsrank.bounds import TowerSpec
from epsrank.constants import (
    Astronomical,
    EpsilonParams,
    closed_correction,
    compose_constant,
    log_c_closed,
    log_c_raw_primes,
    log_c_sharp,
    log_factorial,
    n0,
    tower_constant,
    x_of_n,
    y_of_n,
)

LOG2 = math.log(2)


def brute_sharp(p, d, eps, r, hi=None):
    """Oracle: scan every N in [0, hi] with lgamma log-factorials."""
    if hi is None:
        hi = math.ceil(math.exp(2 * r * d * math.log(p) / eps)) + 1
    vals = [r * (p - 1) * (N + 2) * d * math.log(p) - eps * (p - 1) / 2 * math.lgamma(N + 1)
            for N in range(hi + 1)]
    best = max(vals)
    arg = [N for N, v in enumerate(vals) if best - v <= 1e-10 * max(1.0, abs(best))]
    return best, arg


def P(p=2, d=1, eps=1.0, r=1):
    return EpsilonParams(p, d, eps, r)


def test_params_validation():
    for bad in [dict(p=4), dict(d=0), dict(eps=0.0), dict(eps=-1.0), dict(r=0), dict(eps=math.inf)]:
        with pytest.raises(ValueError):
            P(**bad)


def test_x_of_n():
    assert x_of_n(P(), 0, 0.0) == pytest.approx(2 * LOG2)
    assert x_of_n(P(eps=2.0), 10, 15.10441257307551529) == pytest.approx(12 * LOG2 - 15.10441257307551529)
    assert x_of_n(P(eps=2.0), 10, 15.10441257307551529) == pytest.approx(-6.786647, abs=1e-6)
    x3 = x_of_n(P(), 3, math.log(6))
    x4 = x_of_n(P(), 4, math.log(24))
    assert x3 == pytest.approx(2.569856168, abs=1e-9)
    assert x3 == pytest.approx(x4, rel=1e-15)
    with pytest.raises(ValueError):
        x_of_n(P(), 3, -1.0)


def test_y_of_n():
    assert y_of_n(P(), 4) == pytest.approx(2.0, rel=1e-15)
    assert y_of_n(P(p=3, d=2, eps=0.7, r=2), 1) == pytest.approx(2 * 2 * 2 * math.log(3) + 0.7)
    assert y_of_n(P(p=3), 9) == pytest.approx(9.0, rel=1e-14)
    with pytest.raises(ValueError):
        y_of_n(P(), 0)


def test_n0():
    assert n0(P(eps=2.0)) == 2.0
    assert n0(P()) == 4.0
    assert n0(P(p=3, d=2)) == 81.0
    big = n0(P(eps=0.001))
    assert isinstance(big, Astronomical)
    assert big.log_value == pytest.approx(2 * LOG2 / 0.001)


def test_n0_is_stationary_point_of_y():
    for params in (P(), P(p=3, d=2, eps=1.3), P(p=5, eps=2.5, r=2)):
        N = n0(params)
        h = 1e-6 * N
        deriv = (y_of_n(params, N + h) - y_of_n(params, N - h)) / (2 * h)
        assert abs(deriv) < 1e-6 * max(1.0, y_of_n(params, N))


def test_log_c_closed():
    assert log_c_closed(P()) == 2.0
    assert log_c_closed(P(eps=2.0)) == 2.0
    assert log_c_closed(P(p=3)) == 9.0
    assert isinstance(log_c_closed(P(eps=0.001)), Astronomical)


@pytest.mark.parametrize("params,value,argmax", [
    (P(), 2.569856168185699, [3, 4]),
    (P(eps=2.0), 3 * LOG2, [1, 2]),
    (P(r=2), 9.617368447117695, [15, 16]),
    (P(d=2), 9.617368447117695, [15, 16]),
    (P(p=3), 11.367642870616947, [8, 9]),
    (P(p=3, d=2, eps=1.5), 33.29581528139921, [18]),
])
def test_log_c_sharp_frozen(params, value, argmax):
    res = log_c_sharp(params)
    assert res.value == pytest.approx(value, rel=1e-13)
    assert res.argmax == argmax
    assert not res.bound_only


def test_log_c_sharp_search_range():
    res = log_c_sharp(P())
    assert res.search_range == (0, 5)
    assert log_c_sharp(P(r=2)).search_range == (0, 17)


def test_log_c_sharp_bound_only():
    res = log_c_sharp(P(eps=0.05), cap=1000)
    assert res.bound_only
    assert res.value == log_c_closed(P(eps=0.05))


@settings(max_examples=60, deadline=None)
@given(p=st.sampled_from([2, 3, 5, 7]), d=st.integers(1, 3), r=st.integers(1, 3),
       eps=st.sampled_from([0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0, 1 / 3]))
def test_sharp_matches_brute_force(p, d, r, eps):
    params = EpsilonParams(p, d, eps, r)
    hi = math.ceil(n0(params)) + 1
    if hi > 20000:
        return
    value, arg = brute_sharp(p, d, eps, r, hi)
    res = log_c_sharp(params)
    assert res.value == pytest.approx(value, rel=1e-12)
    assert res.argmax == arg
    assert res.value >= x_of_n(params, 0, 0.0) > 0


@settings(max_examples=40, deadline=None)
@given(p=st.sampled_from([2, 3, 5]), d=st.integers(1, 2), r=st.integers(1, 2),
       eps=st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_domination_on_search_range(p, d, r, eps):
    params = EpsilonParams(p, d, eps, r)
    N0 = n0(params)
    res = log_c_sharp(params)
    closed = log_c_closed(params)
    if N0 > 5000:
        return
    t = 0.0
    for N in range(0, 4 * math.ceil(N0) + 1):
        if N >= 2:
            t += math.log(N)
        assert x_of_n(params, N, t) <= res.value + 1e-12 * abs(res.value)
        # closed form plus the dropped 2r(p-1)d log p term bounds X as well
        assert x_of_n(params, N, t) <= closed + closed_correction(params) + 1e-9
        if N >= 1:
            assert y_of_n(params, N) <= closed * (1 + 1e-12)


def test_increments_negative_beyond_n0():
    params = P(p=3, d=2, eps=1.5)
    N0 = n0(params)
    for N in range(math.ceil(N0), math.ceil(N0) + 50):
        inc = x_of_n(params, N + 1, log_factorial(N + 1)) - x_of_n(params, N, log_factorial(N))
        assert inc < 0


def test_log_factorial():
    assert log_factorial(0) == log_factorial(1) == 0
    assert log_factorial(4) == pytest.approx(math.log(24), rel=1e-15)
    assert log_factorial(3_000_000) == pytest.approx(math.lgamma(3_000_001), rel=1e-14)


def test_raw_primes_below_factorial_variant():
    params = P()
    raw, _ = log_c_raw_primes(params, 200)
    assert raw <= log_c_sharp(params).value


def test_compose_constant():
    assert compose_constant(0, 2, 2.569856) == 2.569856
    c2 = log_c_sharp(P(d=2)).value
    assert compose_constant(2.569856, 2, c2) == pytest.approx(5.139712 + c2)
    assert compose_constant(3 * math.log(5), 5, 0) == pytest.approx(5 * 3 * math.log(5))
    assert compose_constant(1.0, 3, 2.0) < compose_constant(1.0 + 1e-9, 3, 2.0)
    assert compose_constant(1.0, 3, 2.0) < compose_constant(1.0, 3, 2.0 + 1e-9)


def test_tower_constant_base_case():
    cert = tower_constant(TowerSpec(2, 0, 1, 0), 1.0)
    assert cert.log_C_total == 0 and cert.levels == []


def test_tower_constant_one_step():
    cert = tower_constant(TowerSpec(2, 1, 1, 0), 1.0)
    assert cert.log_C_total == pytest.approx(2.569856168185699, rel=1e-14)
    lv = cert.levels[0]
    assert lv.argmax == [3, 4] and "sharp_exceeds_closed" in lv.flags
    assert lv.log_c_closed == 2.0


def test_tower_constant_nontrivial_base():
    cert = tower_constant(TowerSpec(2, 1, 2, 1), 1.0)
    assert cert.log_C_total == pytest.approx(2 * LOG2 + 9.617368447117695, rel=1e-14)


def test_tower_constant_fold_and_degrees():
    spec = TowerSpec(3, 3, 1, 2)
    cert = tower_constant(spec, 4.0, r=2)
    assert [lv.d_k for lv in cert.levels] == [1, 3, 9]
    acc = 2 * math.log(3)
    for lv in cert.levels:
        assert lv.N0_log == pytest.approx(2 * 2 * lv.d_k * math.log(3) / 4.0)
        acc = 3 * acc + lv.log_c_used
    assert cert.log_C_total == acc == cert.refold()


def test_tower_constant_astronomical_and_bound_only():
    cert = tower_constant(TowerSpec(2, 1, 1, 0), 0.01)
    assert cert.levels[0].flags == ["bound_only", "closed_corrected"]
    assert cert.log_C_total == pytest.approx(0.005 * 2**200 + 2 * LOG2)
    cert = tower_constant(TowerSpec(2, 2, 1, 0), 0.001)
    assert cert.log_C_total is None and "astronomical" in cert.flags
    json.loads(cert.to_json())


def test_certificate_json_shape():
    d = json.loads(tower_constant(TowerSpec(2, 2, 1, 0), 1.0, 1).to_json())
    assert set(d) >= {"epsilon", "r", "base", "levels", "log_C_total"}
    assert set(d["base"]) == {"d_kappa", "rho", "logC0"}
    assert set(d["levels"][0]) >= {"i", "d_k", "N0_log", "log_c_closed", "log_c_sharp", "argmax", "flags"}
