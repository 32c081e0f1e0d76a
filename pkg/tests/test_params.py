import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from risd2d.params import SimParams, db_to_linear, dbm_to_watt, linear_to_db, noise_power, watt_to_dbm


def test_defaults_match_reference_table():
    p = SimParams()
    assert (p.W_m, p.W_c) == (2160e6, 22e6)
    assert (p.N0m, p.N0c) == (-134.0, -174.0)
    assert (p.P_m, p.P_c) == (23.0, 20.0)
    assert p.n == 2.0
    assert (p.alpha_los, p.alpha_nlos) == (2.5, 3.6)
    assert p.beta0 == -61.3849
    assert (p.G0, p.Gb) == (0.5, 14.0)
    assert p.gamma_min == 5.0
    assert p.r_max == pytest.approx(10 * math.sqrt(2), abs=1e-12)
    assert p.beta1 == 0.01
    assert (p.alpha_refl_c, p.alpha_refl_m) == (1.0, 0.8)
    assert (p.nakagami_m, p.nakagami_omega, p.rice_beta) == (3.0, 1 / 3, 4.0)
    assert p.epsilon_outer == p.epsilon_inner == 1e3
    assert p.M == 8


def test_linear_views():
    p = SimParams()
    assert p.p_max_m == pytest.approx(0.19952623, rel=1e-7)
    assert p.p_max_c == pytest.approx(0.1)
    assert p.gamma_min_linear == pytest.approx(3.16227766, rel=1e-8)
    # -174 dBm/MHz over 22 MHz
    assert p.sigma2_c == pytest.approx(10 ** (-20.4) * 22, rel=1e-12)
    assert p.sigma2_m == pytest.approx(10 ** (-16.4) * 2160, rel=1e-12)


def test_noise_power_scalar():
    assert noise_power(-30.0, 1e6) == pytest.approx(1e-6)
    assert noise_power(0.0, 2e6) == pytest.approx(2e-3)


@given(st.floats(-200, 200))
def test_db_round_trip(x):
    assert float(linear_to_db(db_to_linear(x))) == pytest.approx(x, abs=1e-9)
    assert float(watt_to_dbm(dbm_to_watt(x))) == pytest.approx(x, abs=1e-9)


@pytest.mark.parametrize(
    "bad",
    [
        {"W_m": 0.0},
        {"alpha_refl_c": 1.5},
        {"alpha_refl_m": -0.1},
        {"e": 0},
        {"N": 0},
        {"M": 4},
        {"codebook": "nope"},
        {"dual_update": "nope"},
        {"initial_modes": "nope"},
    ],
)
def test_rejects_invalid(bad):
    with pytest.raises(ValueError):
        SimParams(**bad)


def test_partial_dict_and_unknown_keys(tmp_path):
    p = SimParams.from_dict({"N": 2, "area": [10, 20]})
    assert p.N == 2 and p.area == (10.0, 20.0) and p.e == 3
    with pytest.raises(ValueError):
        SimParams.from_dict({"not_a_field": 1})
    path = tmp_path / "p.json"
    path.write_text(json.dumps(SimParams(e=5).to_dict()))
    assert SimParams.from_json(path) == SimParams(e=5)


def test_replace_keeps_validation():
    assert SimParams().replace(e=2).e == 2
    with pytest.raises(ValueError):
        SimParams().replace(e=0)


def test_db_helpers_vectorize():
    np.testing.assert_allclose(db_to_linear([0, 10, 20]), [1, 10, 100])
