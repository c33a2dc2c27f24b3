import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from curlgap import periodic
from curlgap.periodic import BandStructure, PiecewisePotential1D


def _ode_monodromy(pot, nu):
    """Adaptive RK oracle, restarted at every breakpoint."""
    ends = list(pot.breakpoints[1:]) + [1.0]
    cols = []
    for y0 in ([1.0, 0.0], [0.0, 1.0]):
        y = np.array(y0)
        for a, b, v in zip(pot.breakpoints, ends, pot.values):
            sol = solve_ivp(lambda x, s: [s[1], (v - nu) * s[0]], (a, b), y,
                            method="DOP853", rtol=1e-13, atol=1e-15)
            y = sol.y[:, -1]
        cols.append(y)
    return np.column_stack(cols)


def _scan_discriminant(pot, nus):
    """Independent closed-form transfer matrices via complex square roots."""
    nus = np.asarray(nus, dtype=complex)
    m = np.broadcast_to(np.eye(2, dtype=complex), nus.shape + (2, 2)).copy()
    for v, length in zip(pot.values, pot.lengths):
        k = np.sqrt(nus - v)
        k = np.where(k == 0, 1e-300, k)
        c, s = np.cos(k * length), np.sin(k * length)
        piece = np.empty_like(m)
        piece[..., 0, 0], piece[..., 0, 1] = c, s / k
        piece[..., 1, 0], piece[..., 1, 1] = -k * s, c
        m = piece @ m
    return (m[..., 0, 0] + m[..., 1, 1]).real


def test_free_discriminant():
    free = PiecewisePotential1D.constant(0.0)
    assert periodic.discriminant(free, math.pi ** 2) == pytest.approx(-2.0, abs=1e-10)
    for nu in (-3.0, 0.0, 1e-12, 5.0, 50.0):
        ref = 2 * math.cosh(math.sqrt(-nu)) if nu < 0 else 2 * math.cos(math.sqrt(nu))
        assert periodic.discriminant(free, nu) == pytest.approx(ref, abs=1e-12)


@pytest.mark.parametrize("nu", [-4.0, 0.3, 4.4855, 11.5, 17.9, 40.0, 130.0])
def test_discriminant_against_ode(kp, nu):
    ref = np.trace(_ode_monodromy(kp, nu))
    assert periodic.discriminant(kp, nu) == pytest.approx(ref, abs=1e-8)


def test_monodromy_matches_ode_matrix():
    pot = PiecewisePotential1D([0.0, 0.2, 0.7], [3.0, -2.0, 8.0])
    assert np.allclose(periodic.monodromy(pot, 6.5), _ode_monodromy(pot, 6.5), atol=1e-9)


def test_discriminant_derivative_fd(kp):
    for nu in (1.0, 9.0, 25.0):
        h = 1e-5
        fd = (periodic.discriminant(kp, nu + h) - periodic.discriminant(kp, nu - h)) / (2 * h)
        assert periodic.discriminant_derivative(kp, nu) == pytest.approx(fd, rel=1e-6, abs=1e-8)


def test_array_discriminant_matches_scalar(kp):
    nus = np.linspace(-5, 200, 97)
    vals, derivs = periodic.discriminant_array(kp, nus)
    assert np.allclose(vals, [periodic.discriminant(kp, x) for x in nus], atol=1e-10)
    assert np.allclose(derivs, [periodic.discriminant_derivative(kp, x) for x in nus],
                       atol=1e-8, rtol=1e-8)


_piece = st.lists(st.floats(-50, 50), min_size=1, max_size=4)


@settings(max_examples=100, deadline=None)
@given(_piece, st.floats(-100, 400), st.randoms(use_true_random=False))
def test_monodromy_unimodular(values, nu, rnd):
    cuts = sorted({0.0} | {round(rnd.uniform(0.05, 0.95), 6) for _ in values[1:]})
    pot = PiecewisePotential1D(cuts, values[: len(cuts)] + [0.0] * (len(cuts) - len(values)))
    m = periodic.monodromy(pot, nu)
    scale = max(1.0, float(np.max(np.abs(m))) ** 2)
    assert abs(np.linalg.det(m) - 1.0) <= 1e-10 * scale


def test_free_bands():
    bs = periodic.band_edges(PiecewisePotential1D.constant(0.0), 5)
    assert bs.nu(1) == pytest.approx(0.0, abs=1e-8)
    for k in range(1, 5):
        assert bs.nu(2 * k) == pytest.approx(k * k * math.pi ** 2, abs=1e-8)
        assert bs.nu(2 * k + 1) == pytest.approx(k * k * math.pi ** 2, abs=1e-8)


@pytest.mark.parametrize("c", [-7.5, 3.0])
def test_constant_shift(c):
    base = periodic.band_edges(PiecewisePotential1D.constant(0.0), 4).edges
    shifted = periodic.band_edges(PiecewisePotential1D.constant(c), 4).edges
    assert np.allclose(np.array(shifted) - c, base, atol=1e-8)


def _scan_edges(pot, lo, hi, step=1e-4):
    nus = np.arange(lo, hi, step)
    d = _scan_discriminant(pot, nus)
    inside = np.abs(d) <= 2.0
    flips = np.flatnonzero(np.diff(inside.astype(int)))
    return nus[flips] + step / 2


def test_kronig_penney_edges_against_scan(kp):
    bs = periodic.band_edges(kp, 3)
    ref = _scan_edges(kp, 0.0, 45.0)
    assert len(ref) >= 5
    for mine, theirs in zip(bs.edges[:5], ref[:5]):
        assert mine == pytest.approx(theirs, abs=2e-4)
    nu2, nu3 = periodic.first_gap(kp)
    assert nu3 - nu2 > 0
    assert (nu2, nu3) == (bs.nu(2), bs.nu(3))


def test_edges_satisfy_discriminant(kp):
    bs = periodic.band_edges(kp, 6)
    for k, e in enumerate(bs.edges):
        target = 2.0 if k % 4 in (0, 3) else -2.0
        assert periodic.discriminant(kp, e) == pytest.approx(target, abs=1e-9)


def test_first_gap_closed_for_constant():
    with pytest.raises(periodic.GapClosedError):
        periodic.first_gap(PiecewisePotential1D.constant(0.0))


@settings(max_examples=25, deadline=None)
@given(st.floats(0.5, 30), st.floats(0.1, 0.9))
def test_ground_band_below_esssup(height, cut):
    pot = PiecewisePotential1D([0.0, cut], [0.0, height])
    s = periodic.spectrum_1d(pot, 3)
    assert pot.essinf < s.minimum() < pot.esssup


def test_spectrum_1d_tail_encloses_higher_bands(kp):
    s = periodic.spectrum_1d(kp, 4)
    bs = periodic.band_edges(kp, 8)
    assert s.tail == pytest.approx(bs.nu(9))
    for lo, hi in bs.bands:
        assert s.contains(0.5 * (lo + hi))
    for lo, hi in bs.gaps[:3]:
        assert not s.contains(0.5 * (lo + hi))


def test_band_structure_validation():
    with pytest.raises(ValueError):
        BandStructure((1.0, 0.0))
    with pytest.raises(ValueError):
        BandStructure((0.0, 2.0, 1.0, 3.0))
    with pytest.raises(ValueError):
        BandStructure((0.0,))


@pytest.mark.parametrize("bp,vals", [([0.1], [1.0]), ([0.0, 0.0], [1.0, 2.0]),
                                     ([0.0, 1.0], [1.0, 2.0]), ([0.0], [math.inf])])
def test_potential_validation(bp, vals):
    with pytest.raises(ValueError):
        PiecewisePotential1D(bp, vals)


def test_cell_averages_exact(kp):
    edges = np.array([0.25, 0.75, 1.5])
    assert np.allclose(kp.cell_averages(edges), [5.0, 10.0 * 0.25 / 0.75])
