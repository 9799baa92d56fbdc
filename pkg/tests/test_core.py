import math

import pytest
from hypothesis import given, strategies as st

from ringbethe.core import RapidityPair, SystemParams, energy_of, scattering_lengths

couplings = st.floats(min_value=1e-3, max_value=1e4)
lengths = st.floats(min_value=0.1, max_value=10.0)


def test_reference_scattering_lengths():
    lens = scattering_lengths(SystemParams(4.0, 2.0))
    assert lens.a == -0.5
    assert lens.a_b == -0.5
    assert lens.mu == 0.5


@given(couplings, couplings, lengths)
def test_scattering_lengths_invert_couplings(xi, xi_b, L):
    p = SystemParams(xi, xi_b, L)
    lens = scattering_lengths(p)
    # contact strengths -2/a and -2/a_b reproduce g and 2 g_B
    assert math.isclose(-2.0 / lens.a, p.g, rel_tol=1e-12)
    assert math.isclose(-2.0 / lens.a_b, 2.0 * p.g_b, rel_tol=1e-12)
    assert lens.a < 0 and lens.a_b < 0


def test_zero_coupling_has_no_scattering_length():
    with pytest.raises(ValueError, match="zero coupling"):
        scattering_lengths(SystemParams(0.0, 1.0))


@pytest.mark.parametrize("kw", [{"ring_length": 0.0}, {"ring_length": -1.0}])
def test_bad_length_rejected(kw):
    with pytest.raises(ValueError):
        SystemParams(1.0, 1.0, **kw)


def test_non_finite_coupling_rejected():
    with pytest.raises(ValueError):
        SystemParams(math.inf, 1.0)


def test_attractive_gate():
    p = SystemParams(4.0, -4.0)
    assert not p.repulsive
    with pytest.raises(ValueError, match="allow_attractive"):
        p.require_repulsive()
    p.require_repulsive(allow_attractive=True)


@given(st.floats(-50, 50), st.floats(-50, 50))
def test_energy_is_half_sum_of_squares(k1, k2):
    assert energy_of(k1, k2) == pytest.approx(0.5 * (k1 * k1 + k2 * k2))
    assert RapidityPair.from_rapidities(k1, k2).energy == energy_of(k1, k2)
