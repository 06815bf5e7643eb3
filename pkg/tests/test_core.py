"""Scalar building blocks: gamma branch, admittances, reflections, Doppler."""

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import vacdrag as vd
from vacdrag.core import POLE_TOL


def test_gamma_static_limit():
    assert vd.gamma(1.0, 0.0, 1.0, 1.0) == pytest.approx(1.0)


def test_gamma_evanescent_below_light_line():
    g = vd.gamma(2.0, 1.0, 1.0, 1.0)
    assert g == pytest.approx(math.sqrt(3.0))
    assert g.imag == 0.0


def test_gamma_complex_branch():
    # independent check: gamma must be one of the two square roots and
    # carry a nonnegative real part
    k, om, eps = 0.5, 1 + 0.1j, 196.0
    g = vd.gamma(k, om, eps, 1.0)
    target = k * k - eps * om * om
    assert g * g == pytest.approx(target, rel=1e-14)
    root = cmath.sqrt(target)
    assert min(abs(g - root), abs(g + root)) < 1e-14 * abs(root)
    assert g.real >= 0.0


def test_gamma_outgoing_convention_on_cut():
    # real omega above the light line: Im(gamma) * Re(omega) <= 0
    g_pos = vd.gamma(1.0, 2.0, 1.0, 1.0)
    g_neg = vd.gamma(1.0, -2.0, 1.0, 1.0)
    assert g_pos.real == pytest.approx(0.0, abs=1e-15)
    assert g_pos.imag < 0.0
    assert g_neg.imag > 0.0


@given(k=st.floats(0.01, 20.0), re=st.floats(-5.0, 5.0),
       im=st.floats(-5.0, 5.0), eps=st.floats(1.0, 200.0))
@settings(max_examples=200, deadline=None)
def test_gamma_branch_consistency(k, re, im, eps):
    g = vd.gamma(k, complex(re, im), eps, 1.0)
    assert g.real >= 0.0
    target = k * k - eps * complex(re, im) ** 2
    assert abs(g * g - target) <= 1e-12 * max(1.0, abs(target))


def test_admittance_closed_forms():
    assert vd.admittance("p", 1j, 1.0, 1.0) == pytest.approx(1.0)
    assert vd.admittance("s", 1.0, 1j, 1.0) == pytest.approx(-1.0)


def test_admittance_purely_imaginary_below_light_line():
    # p polarization, real omega, real gamma: Y = eps*omega/(i*gamma*c)
    y = vd.admittance("p", 0.7, 1.2, 4.0)
    assert y.real == pytest.approx(0.0, abs=1e-15)


def test_admittance_degenerate_inputs():
    with pytest.raises(vd.DegenerateInputError):
        vd.admittance("p", 1.0, 0.0, 1.0)
    with pytest.raises(vd.DegenerateInputError):
        vd.admittance("s", 0.0, 1.0, 1.0)


def test_reflection_slab_vacuum_limit():
    # n_d = 1: slab indistinguishable from vacuum, bare PEC displaced by h
    rng = np.random.default_rng(7)
    for _ in range(100):
        pol = rng.choice(["s", "p"])
        k = rng.uniform(0.2, 5.0)
        om = rng.uniform(0.05, 0.95) * k   # below the light line
        h = rng.uniform(0.2, 3.0)
        slab = vd.SlabMedium(n_d=1.0, h=h)
        r = vd.reflection_slab(pol, om, k, 0.0, slab)
        g0 = vd.gamma(k, om, 1.0, 1.0)
        expect = -cmath.exp(-2.0 * g0 * h)
        assert abs(r - expect) < 1e-12 * abs(expect)


def test_reflection_slab_halfspace_limit():
    # h -> large: coth -> 1, Fresnel half-space coefficient
    slab = vd.SlabMedium(n_d=2.0, h=80.0)
    pol, k, om = "p", 1.0, 0.4
    r = vd.reflection_slab(pol, om, k, 0.0, slab)
    g0 = vd.gamma(k, om, 1.0, 1.0)
    gd = vd.gamma(k, om, 4.0, 1.0)
    y0 = vd.admittance(pol, om, g0, 1.0)
    yd = vd.admittance(pol, om, gd, 4.0)
    assert r == pytest.approx((y0 - yd) / (y0 + yd), rel=1e-10)


def test_reflection_slab_pole_at_guided_mode():
    # Fig.-2 anchor: the p denominator has a real zero near omega = k/10
    # at k = 1.598 (phase index 10)
    slab = vd.SlabMedium(n_d=14.0, h=1.0)
    k = 1.598
    roots = vd.find_pole_frequencies(slab, "p", k)
    assert any(abs(k / w - 10.0) < 2e-3 for w in roots)
    w0 = min(roots, key=lambda w: abs(k / w - 10.0))
    with pytest.raises(vd.PoleError):
        vd.reflection_slab("p", np.nextafter(w0, w0 + 1), k, 0.0, slab)


def test_reflection_slab_real_below_light_line():
    # lossless slab + PEC: R is real for real omega below the light line
    rng = np.random.default_rng(11)
    slab = vd.SlabMedium(n_d=14.0, h=1.0)
    for _ in range(100):
        pol = rng.choice(["s", "p"])
        k = rng.uniform(0.3, 6.0)
        om = rng.uniform(0.02, 0.98) * k
        try:
            r = vd.reflection_slab(pol, om, k, 0.0, slab)
        except vd.PoleError:
            continue
        assert abs(r.imag) < 1e-10 * max(1.0, abs(r))


def test_reflection_sheet_values():
    sheet = vd.SheetMedium(omega_sp=1.0)
    assert vd.reflection_sheet(0.0, sheet) == pytest.approx(1.0)
    assert abs(vd.reflection_sheet(1e4, sheet)) < 1e-7
    # simple-pole expansion: residue -omega_sp/2
    delta = 1e-3
    r = vd.reflection_sheet(1.0 + delta, sheet)
    assert r.real == pytest.approx(-1.0 / (2 * delta), rel=2e-3)


def test_reflection_sheet_even():
    sheet = vd.SheetMedium(omega_sp=0.7)
    for om in (0.1, 0.5 + 0.2j, 2.0, 1.3j):
        assert vd.reflection_sheet(-om, sheet) == vd.reflection_sheet(om, sheet)


def test_reflection_sheet_pole_error():
    sheet = vd.SheetMedium(omega_sp=1.0)
    with pytest.raises(vd.PoleError):
        vd.reflection_sheet(1.0 + 1e-14, sheet)


def test_doppler():
    assert vd.doppler(1.0, 2.0, 0.0) == 1.0
    wsp, v = 0.8, 0.3
    assert vd.doppler(0.0, wsp / v, v) == pytest.approx(-wsp)


@given(om=st.floats(-10, 10), kx=st.floats(-10, 10),
       v=st.floats(-0.99, 0.99))
@settings(max_examples=200, deadline=None)
def test_doppler_roundtrip(om, kx, v):
    # invertible to the ulp of the largest intermediate (exact whenever
    # the shift does not change the exponent range)
    rt = vd.doppler(vd.doppler(om, kx, v), kx, -v)
    assert abs(rt - om) <= 2.3e-16 * max(abs(om), abs(v * kx))


def test_doppler_roundtrip_exact_same_scale():
    assert vd.doppler(vd.doppler(1.25, 2.0, 0.5), 2.0, -0.5) == 1.25


def test_units_conversion_and_scaling():
    u = vd.Units(h_s_meters=1e-6)
    # hbar*c/h_s^4 anchor: 3.1615e-2 N/m^2 at h_s = 1 um
    assert u.force_to_si(1.0) == pytest.approx(3.1615e-2, rel=1e-3)
    # SI force scales as 1/h_s^4 at fixed dimensionless force
    u2 = vd.Units(h_s_meters=2e-6)
    assert u.force_to_si(1.0) / u2.force_to_si(1.0) == pytest.approx(16.0)


def test_validation_errors():
    with pytest.raises(ValueError):
        vd.SlabMedium(n_d=0.5, h=1.0)
    with pytest.raises(ValueError):
        vd.SlabMedium(n_d=2.0, h=-1.0)
    with pytest.raises(ValueError):
        vd.SheetMedium(omega_sp=0.0)
    with pytest.raises(ValueError):
        vd.MovingBody(vd.SlabMedium(2.0, 1.0), 1.5)
    slab_body = vd.MovingBody(vd.SlabMedium(2.0, 1.0), 0.1)
    sheet_body = vd.MovingBody(vd.SheetMedium(1.0), -0.1)
    with pytest.raises(ValueError):
        vd.Scenario(slab_body, sheet_body, d=1.0)
    with pytest.raises(ValueError):
        vd.Scenario(slab_body, slab_body, d=0.0)
