import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tdecoherence.coherence import (
    VISIBILITY_HEADER, Explicit, FixedHeights, FreeFallRindler, decay_model_residuals,
    decoherence_time, fit_gaussian_decay, fit_log_linear, gaussian_visibility, revival_time,
    visibility, visibility_curve, visibility_two_level,
)
from tdecoherence.errors import NonPositiveArgument, UnsupportedLaw, ValidationError
from tdecoherence.geometry import NATURAL, SI
from tdecoherence.internal import (
    EinsteinSolid, InternalSpectrum, einstein_spectrum, einstein_variance, energy_variance, two_level,
)

C, HBAR, KB = SI.c, SI.hbar, SI.k_B
# hbar c^2 / (sqrt(3) k_B 300 K * 9.8 * 1e-6), 50-digit arithmetic
TAU_DEC_300K = 134811309.2550579228
# 2 pi c^2 / (2.4e15 * 9.8 * 1e-6), 50-digit arithmetic
T_REV_OPTICAL = 24009546.487205508894


def equal_ladder(n, omega):
    return InternalSpectrum(np.arange(n) * HBAR * omega, np.full(n, 1.0 / n))


# -------------------------------------------------------------------- visibility

def test_visibility_trivial_points():
    s = two_level(2.0e15)
    assert visibility(s, 0.0) == 1.0
    assert visibility(s, math.pi / 2.0e15) == pytest.approx(0.0, abs=1e-15)


def test_three_level_cancellation():
    omega = 1e15
    s = equal_ladder(3, omega)
    assert visibility(s, 2 * math.pi / 3 / omega) == pytest.approx(0.0, abs=1e-15)


def test_two_level_special_values():
    assert visibility_two_level(1.0, 0.0) == 1.0
    assert visibility_two_level(1.0, 2 * math.pi) == pytest.approx(1.0, abs=1e-15)
    assert visibility_two_level(1.0, math.pi / 2) == pytest.approx(math.sqrt(2) / 2, rel=1e-15)
    s = two_level(1.0, 0.5, NATURAL)
    assert visibility(s, math.pi / 2, NATURAL) == pytest.approx(math.sqrt(2) / 2, rel=1e-14)


@settings(max_examples=80, deadline=None)
@given(omega=st.floats(1e10, 1e16), phase=st.floats(0.0, 1e3))
def test_general_matches_two_level(omega, phase):
    # phases beyond ~1e3 rad carry more than 1e-12 of double rounding on any route
    dtau = phase / omega
    s = two_level(omega)
    assert abs(visibility(s, dtau) - visibility_two_level(omega, dtau)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(
    energies=st.lists(st.floats(0.0, 1e-18), min_size=1, max_size=12),
    weights=st.lists(st.floats(0.0, 1.0), min_size=12, max_size=12),
    dtau=st.floats(0.0, 1e-12),
)
def test_visibility_bounded(energies, weights, dtau):
    w = np.array(weights[:len(energies)]) + 1e-3
    s = InternalSpectrum.from_weights(energies, w)
    v = visibility(s, dtau)
    assert 0.0 <= v <= 1.0 + 1e-12


def test_early_decay_strict():
    s = einstein_spectrum(EinsteinSolid(1, 1e13, 300.0), 100)
    law = FixedHeights(9.8, 1e-6)
    assert visibility(s, law(1e3)) < 1.0


# -------------------------------------------------------------------- decoherence time

def test_decoherence_time_values():
    dH = math.sqrt(3) * KB * 300.0
    assert decoherence_time(dH, 9.8, 1e-6) == pytest.approx(TAU_DEC_300K, rel=1e-14)
    assert decoherence_time(2 * dH, 9.8, 1e-6) == pytest.approx(TAU_DEC_300K / 2, rel=1e-14)
    assert decoherence_time(1.0, 1.0, 1.0, NATURAL) == 1.0
    with pytest.raises(NonPositiveArgument):
        decoherence_time(0.0, 9.8, 1e-6)


def test_gaussian_visibility_values():
    assert gaussian_visibility(1.0, 0.0, NATURAL) == 1.0
    assert gaussian_visibility(1.0, math.sqrt(2), NATURAL) == pytest.approx(math.exp(-1), rel=1e-15)


def test_gaussian_short_time_match():
    solid = EinsteinSolid(1, 1e13, 300.0)
    s = einstein_spectrum(solid, 100)
    dH = energy_variance(s)
    dtau = np.linspace(0, 0.1 * HBAR / dH, 50)
    assert np.max(np.abs(visibility(s, dtau) - gaussian_visibility(dH, dtau))) <= 1e-3


@pytest.mark.parametrize("N", [5, 20])
def test_gaussian_fit_single_term(N):
    # plain a t^2 fit on V >= 0.95; the fourth cumulant biases it by O(1/N)
    solid = EinsteinSolid(N, 1e13, 300.0)
    s = einstein_spectrum(solid, 100)
    g, dx = 9.8, 1e-6
    dH = einstein_variance(solid)
    a_pred = 0.5 * (dH * g * dx / (HBAR * C ** 2)) ** 2
    t = np.linspace(0, 0.4 / math.sqrt(a_pred), 400)
    curve = visibility_curve(s, FixedHeights(g, dx), t)
    a = fit_gaussian_decay(curve.times, curve.values, 0.95, quartic=False)
    assert a == pytest.approx(a_pred, rel=1e-2)


def test_gaussian_vs_exponential_discrimination():
    s = einstein_spectrum(EinsteinSolid(20, 1e13, 300.0), 100)
    tau = decoherence_time(energy_variance(s), 9.8, 1e-6)
    t = np.linspace(0, 2 * tau, 400)
    curve = visibility_curve(s, FixedHeights(9.8, 1e-6), t)
    r = decay_model_residuals(curve.times, curve.values, 0.5)
    assert r["linear"] >= 100 * r["quadratic"]


def test_log_linear_fit_exact():
    t = np.linspace(0, 3, 30)
    slope, icpt, r2 = fit_log_linear(t, 2.0 * np.exp(-0.7 * t))
    assert slope == pytest.approx(-0.7) and icpt == pytest.approx(math.log(2)) and r2 == pytest.approx(1.0)


# -------------------------------------------------------------------- revivals

def test_two_level_revival_period_and_scan():
    omega, g, dx = 2.4e15, 9.8, 1e-6
    law = FixedHeights(g, dx)
    s = two_level(omega)
    T = revival_time(s, law)
    assert T == pytest.approx(T_REV_OPTICAL, rel=1e-12)
    # scan oracle: first return to 1 after the initial dip
    t = np.linspace(0.5 * T, 1.5 * T, 200_001)
    v = visibility(s, law(t))
    assert t[np.argmax(v)] == pytest.approx(T, rel=1e-5)


def test_ladder_revival_periodic():
    omega, law = 2.4e15, FixedHeights(9.8, 1e-6)
    s = equal_ladder(30, omega)
    T = revival_time(s, law)
    assert T == pytest.approx(T_REV_OPTICAL, rel=1e-12)
    for k in (1, 2, 3):
        assert visibility(s, law(k * T)) >= 1 - 1e-9
    probe = np.linspace(0.01, 0.99, 25) * T
    np.testing.assert_allclose(visibility(s, law(probe + T)), visibility(s, law(probe)), atol=1e-9)


def test_perturbed_ladder_no_revival():
    rng = np.random.default_rng(7)
    omega = 2.4e15
    n = np.arange(30)
    eta = np.concatenate([[0.0], rng.uniform(-0.01, 0.01, 29)])
    s = InternalSpectrum(n * HBAR * omega * (1 + eta), np.full(30, 1 / 30))
    assert revival_time(s, FixedHeights(9.8, 1e-6)) is None


def test_revival_sentinels_and_errors():
    law = FixedHeights(9.8, 1e-6)
    assert revival_time(InternalSpectrum([1e-19], [1.0]), law) == 0.0
    assert revival_time(two_level(1e15, 0.0), law) == 0.0
    with pytest.raises(UnsupportedLaw):
        revival_time(two_level(1e15), FreeFallRindler(9.8, 1e-6))


# -------------------------------------------------------------------- curves and laws

def test_curve_edge_cases():
    s = two_level(1e15)
    empty = visibility_curve(s, FixedHeights(9.8, 1e-6), [])
    assert empty.times.size == 0 and empty.values.size == 0
    flat = visibility_curve(s, FixedHeights(9.8, 0.0), np.linspace(0, 1e9, 11))
    np.testing.assert_array_equal(flat.values, np.ones(11))
    with pytest.raises(ValidationError):
        visibility_curve(s, FixedHeights(9.8, 1e-6), [0.0, 2.0, 1.0])


def test_curve_matches_two_level_formula():
    omega = 2.4e15
    law = FixedHeights(9.8, 1e-6)
    t = np.linspace(0, 5e7, 1000)
    curve = visibility_curve(two_level(omega), law, t)
    np.testing.assert_allclose(curve.values, visibility_two_level(omega, law(t)), rtol=0, atol=1e-12)


def test_laws_agree_at_leading_order():
    s = einstein_spectrum(EinsteinSolid(1, 1e13, 300.0), 100)
    g, dx = 9.8, 1e-6
    t = np.linspace(0, 1e-3 * C / g, 50)
    a = visibility_curve(s, FixedHeights(g, dx), t).values
    b = visibility_curve(s, FreeFallRindler(g, dx), t).values
    np.testing.assert_allclose(b, a, rtol=1e-6)


def test_explicit_law_interpolates():
    law = Explicit([0.0, 1.0, 2.0], [0.0, 1e-17, 4e-17])
    assert law(1.5) == pytest.approx(2.5e-17)
    with pytest.raises(ValidationError):
        Explicit([0.0, 1.0], [1e-17, 2e-17])


def test_csv_export(tmp_path):
    curve = visibility_curve(two_level(1e15), FixedHeights(9.8, 1e-6), [0.0, 1e7])
    path = tmp_path / "v.csv"
    curve.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(VISIBILITY_HEADER)
    t, dtau, v = (float(x) for x in lines[2].split(","))
    assert t == 1e7 and dtau == curve.delta_taus[1] and v == curve.values[1]
