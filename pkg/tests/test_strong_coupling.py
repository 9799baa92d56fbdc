import math
import warnings

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st
from scipy.sparse.linalg import eigsh

from ringbethe.core import SystemParams
from ringbethe.strong_coupling import (
    ExpansionParams,
    expansion_coefficients,
    expansion_energy,
    fit_coefficients,
    match_orbital_pair,
    orbital_wavenumbers,
    tonks_levels,
    track_branch,
)
from ringbethe.bae import SearchWindow, scan_roots

XB = 4.0 / math.sqrt(2.0)
# frozen: lowest anti-periodic orbitals at xi_b = 4/sqrt(2)
KAPPAS = [3.14159265358979, 4.30431351, 9.42477796076938, 9.9772573, 15.70796327, 16.05669078]
EVEN_PAIR_COEFFS = (59.03638897723478, -219.6838619670684, 2951.2340613775214)


def _one_body_levels(xi_b, n, count):
    """Anti-periodic ring with an on-site barrier, -1/2 d^2 + g_B delta(x)."""
    h = 1.0 / n
    D = sp.diags([np.ones(n - 1), -2 * np.ones(n), np.ones(n - 1)], [-1, 0, 1], format="lil")
    D[0, n - 1] = D[n - 1, 0] = -1.0
    V = np.zeros(n)
    V[n // 2] = xi_b / h
    H = (-0.5 * D.tocsr() / h**2 + sp.diags(V)).tocsc()
    w = eigsh(H, k=count, sigma=-abs(xi_b) * n - 1, which="LM")[0]
    return np.sort(w)


def test_orbitals_match_finite_difference_ring():
    fine, coarse = _one_body_levels(XB, 4096, 6), _one_body_levels(XB, 2048, 6)
    ext = (4 * fine - coarse) / 3
    kap = np.sqrt(2 * ext)
    assert kap == pytest.approx(orbital_wavenumbers(XB, 6).kappas, rel=1e-6)


def test_frozen_orbitals():
    orb = orbital_wavenumbers(XB, 6)
    assert orb.kappas == pytest.approx(KAPPAS, rel=1e-8)
    assert orb.parities == ("odd", "even") * 3
    assert orb.branch("odd") == pytest.approx([math.pi, 3 * math.pi, 5 * math.pi])


@settings(max_examples=50)
@given(st.floats(-1.9, 200.0).filter(lambda x: abs(x) > 1e-6), st.integers(2, 12))
def test_even_orbitals_solve_their_equation(xi_b, count):
    orb = orbital_wavenumbers(xi_b, count)
    assert len(orb.kappas) == count
    assert np.all(np.diff(orb.kappas) >= 0)
    for k in orb.branch("even"):
        res = xi_b * math.sin(k / 2) + k * math.cos(k / 2)
        assert abs(res) < 1e-10 * (1 + abs(xi_b) + k)


def test_strong_attraction_binds_lowest_even_orbital():
    orb = orbital_wavenumbers(-3.0, 4)
    q = orb.bound_kappa
    assert q is not None
    assert math.tanh(q / 2) == pytest.approx(q / 3.0, rel=1e-12)
    assert orbital_wavenumbers(-1.0, 4).bound_kappa is None


def test_periodic_mode():
    orb = orbital_wavenumbers(XB, 4, boundary="periodic")
    for k, par in zip(orb.kappas, orb.parities):
        if par == "even":
            assert k * math.sin(k / 2) == pytest.approx(XB * math.cos(k / 2), abs=1e-10)
    with pytest.raises(ValueError):
        orbital_wavenumbers(-1.0, 4, boundary="periodic")
    with pytest.raises(ValueError):
        orbital_wavenumbers(XB, 4, boundary="twisted")


def test_tonks_ground_pair_ignores_barrier():
    for xb in (0.5, XB, 50.0):
        lv = tonks_levels(xb, 6)
        assert lv[0]["parity"] == "odd"
        assert lv[0]["energy"] == pytest.approx(5 * math.pi**2)
        assert [r["energy"] for r in lv] == sorted(r["energy"] for r in lv)


def test_frozen_expansion_coefficients():
    orb = orbital_wavenumbers(XB, 4)
    c = expansion_coefficients(orb.kappas[1], orb.kappas[3], XB)
    assert c == pytest.approx(EVEN_PAIR_COEFFS, rel=1e-8)


@given(st.floats(1.0, 30.0), st.floats(31.0, 60.0), st.floats(0.2, 100.0))
def test_leading_coefficient_is_free_fermion_energy(e1, e2, xi_b):
    c0, _, _ = expansion_coefficients(e1, e2, xi_b)
    assert c0 == pytest.approx(0.5 * (e1**2 + e2**2), rel=1e-14)
    res = expansion_energy(ExpansionParams(e1, e2, 1e4, xi_b))
    assert res.energy == pytest.approx(sum(res.orders), rel=1e-14)
    assert res.orders[1] * 1e4 == pytest.approx(expansion_coefficients(e1, e2, xi_b)[1])


def test_expansion_guards():
    with pytest.raises(ValueError, match="zero barrier"):
        expansion_coefficients(3.0, 9.0, 0.0)
    with pytest.raises(ValueError):
        ExpansionParams(3.0, 3.0, 100.0, 1.0)
    with pytest.warns(UserWarning, match="untrusted"):
        expansion_energy(ExpansionParams(3.0, 9.0, 100.0, 0.05))
    with pytest.warns(UserWarning, match="small"):
        expansion_energy(ExpansionParams(3.0, 9.0, 2.0, 1.0))
    assert ExpansionParams(3.0, 9.0, 8.0, 1.0).g_tilde == -0.5


def test_expansion_error_is_third_order_on_even_branch():
    orb = orbital_wavenumbers(XB, 4)
    e1, e2 = orb.kappas[1], orb.kappas[3]
    base = SystemParams(3200.0, XB)
    start = scan_roots(base, SearchWindow(12 * math.pi, 600))[1]
    xis = [400.0, 800.0, 1600.0, 3200.0]
    pairs = track_branch(base, start, xis, spacing=5.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        err = [abs(p.energy - expansion_energy(ExpansionParams(e1, e2, x, XB)).energy)
               for p, x in zip(pairs, xis)]
    ratios = np.array(err[:-1]) / np.array(err[1:])
    assert np.all((ratios > 6.0) & (ratios < 10.0))


def test_tracked_branch_ends_on_tonks_pair():
    base = SystemParams(1e4, XB)
    start = scan_roots(base, SearchWindow(12 * math.pi, 600))[0]
    info = match_orbital_pair(start, XB)
    assert info["parity"] == "odd"
    assert (info["eta1"], info["eta2"]) == pytest.approx((math.pi, 3 * math.pi))
    (far,) = track_branch(base, start, [1e6], spacing=5.0)
    assert far.energy == pytest.approx(info["tonks_energy"], rel=5e-6)


def test_fit_recovers_known_polynomial():
    # the ground branch c1 equals -4 E_T / xi exactly: E_T (1 - 4/xi + ...)
    fit = fit_coefficients(SystemParams(3200.0, XB), [200, 400, 800, 1600, 3200], branch=0)
    assert fit.c0 == pytest.approx(5 * math.pi**2, rel=1e-6)
    assert fit.c1 == pytest.approx(-20 * math.pi**2, rel=1e-3)
    assert fit.orbitals["parity"] == "odd"
    assert fit.residual < 1e-6


def test_fit_input_validation():
    with pytest.raises(ValueError, match="four"):
        fit_coefficients(SystemParams(1e3, XB), [200, 400, 800])
    with pytest.raises(ValueError, match="100"):
        fit_coefficients(SystemParams(1e3, XB), [50, 400, 800, 1600])
