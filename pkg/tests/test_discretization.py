import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st
from scipy.linalg import eigh

from curlgap import discretization as d
from curlgap.discretization import CylGrid, Field, SeparablePotential
from curlgap.radial import StepRadialPotential, radial_eigenvalue


def _gauss(a=1.0, z0=0.0):
    return lambda r, z: np.exp(-a * (r ** 2 + (z - z0) ** 2))


def test_grid_geometry():
    g = CylGrid(3.0, 2.0, 30, 40)
    assert g.hr == pytest.approx(0.1) and g.hz == pytest.approx(0.1)
    assert g.r[0] == pytest.approx(0.05) and g.z[0] == pytest.approx(-1.95)
    assert g.weights.sum() == pytest.approx(3.0 ** 4 / 4 * 4.0, rel=1e-12)
    assert CylGrid.from_spacing(30, 16, 0.02, 0.02).shape == (1500, 1600)
    with pytest.raises(ValueError):
        CylGrid(0.0, 1.0, 4, 4)
    with pytest.raises(ValueError):
        CylGrid(1.0, 1.0, 1, 4)


def test_constant_inner_product_is_volume():
    g = CylGrid(2.5, 1.5, 17, 23)
    one = Field(g, np.ones(g.shape))
    assert d.weighted_inner(one, one) == pytest.approx(2.5 ** 4 / 4 * 3.0, rel=1e-12)


def test_field_checks():
    g = CylGrid(1.0, 1.0, 4, 4)
    with pytest.raises(ValueError):
        Field(g, np.full(g.shape, np.nan))
    with pytest.raises(d.GridMismatchError):
        d.weighted_inner(Field.zeros(g), Field.zeros(CylGrid(1.0, 1.0, 4, 6)))
    f = Field.from_function(g, lambda r, z: r + z)
    with pytest.raises(ValueError):
        f.values[0, 0] = 1.0
    assert np.allclose((2 * f - f).values, f.values)


def test_monte_carlo_two_pi_factor():
    g = CylGrid(6.0, 6.0, 96, 192)
    u = Field.from_function(g, _gauss())
    rng = np.random.default_rng(7)
    half = 6.0 / math.sqrt(2.0)
    n = 400_000
    pts = np.column_stack([rng.uniform(-half, half, (n, 2)), rng.uniform(-6, 6, n)])
    vals = np.sum(d.reconstruct_field(u, pts) ** 2, axis=1)
    mc = vals.mean() * (2 * half) ** 2 * 12.0
    assert mc == pytest.approx(2 * math.pi * d.weighted_norm(u) ** 2, rel=1e-2)


def test_operator_symmetric_and_positive():
    g = CylGrid(2.0, 1.5, 12, 10)
    op = d.assemble_L(g, 0.0)
    assert op.weighted_symmetry_residual() == 0.0
    a = op.matrix.toarray()
    w = op.weights
    assert np.allclose(w[:, None] * a, (w[:, None] * a).T, atol=1e-12)
    vals = eigh(op.stiffness.toarray(), np.diag(w), eigvals_only=True)
    assert vals.min() > 0


def test_shift_invariance_exact():
    g = CylGrid(3.0, 2.0, 20, 24)
    rng = np.random.default_rng(0)
    v = rng.normal(size=g.shape)
    base = d.assemble_L(g, v)
    for c in (-3.25, 0.5, 17.0):
        diff = (base.with_shift(c).matrix - base.matrix - c * sp.identity(g.size)).tocoo()
        off = diff.row != diff.col
        diag = np.abs(base.matrix.diagonal()[diff.row]) + abs(c)
        assert np.all(np.abs(diff.data) <= 4 * np.finfo(float).eps * diag)
        assert np.all(diff.data[off] == 0.0)


def test_eigs_lowest_matches_dense():
    g = CylGrid(3.0, 2.0, 14, 12)
    op = d.assemble_L(g, lambda r, z: 0.5 * r ** 2 + z)
    ref = eigh(op.stiffness.toarray(), np.diag(op.weights), eigvals_only=True)[:4]
    got = d.eigs_lowest(op, 4)
    assert np.allclose([lam for lam, _ in got], ref, rtol=1e-9)
    for lam, f in got:
        assert d.weighted_norm(f) == pytest.approx(1.0)
        assert np.allclose(op.apply(f.flat), lam * f.flat, atol=1e-6 * max(1, abs(lam)))


def test_odd_modes_not_missed():
    g = CylGrid(3.0, 2.0, 16, 20)
    op = d.assemble_L(g, lambda r, z: np.cos(np.pi * z) ** 2 - 3 * (r < 1))
    ref = eigh(op.stiffness.toarray(), np.diag(op.weights), eigvals_only=True)[:3]
    assert np.allclose([lam for lam, _ in d.eigs_lowest(op, 3)], ref, rtol=1e-9)


def test_multilevel_agrees_with_shift_invert(monkeypatch):
    g = CylGrid(6.0, 4.0, 120, 160)
    pot = lambda r, z: np.where(r < 1.0, -20.0, 0.0) + 5 * np.cos(2 * np.pi * z) ** 2
    op = d.assemble_L(g, pot)
    direct = [lam for lam, _ in d.eigs_lowest(op, 2)]
    monkeypatch.setattr(d, "DIRECT_SIZE_LIMIT", 1000)
    multi = [lam for lam, _ in d.eigs_lowest(op, 2, potential_fn=pot)]
    assert np.allclose(direct, multi, rtol=1e-7)


def test_prolongation_reproduces_smooth_function():
    coarse, fine = CylGrid(4.0, 3.0, 40, 60), CylGrid(4.0, 3.0, 80, 120)
    f = _gauss()
    pc = d.prolongation(coarse, fine) @ Field.from_function(coarse, f).flat
    ref = Field.from_function(fine, f).flat
    assert np.max(np.abs(pc - ref)) < 5e-3


def test_constant_potential_lowest_above_shift():
    vals = []
    for size in (4.0, 8.0):
        g = CylGrid(size, size, int(8 * size), int(16 * size))
        vals.append(d.eigs_lowest(d.assemble_L(g, 2.0), 1)[0][0])
    assert vals[0] > vals[1] > 2.0


def test_radial_reduction_matches_matching_equation():
    pot = StepRadialPotential(0.0, 20.0, 1.0)
    mu0 = radial_eigenvalue(pot)
    lam = d.radial_eigenvalues(pot, 30.0, 30_000)[0]
    assert abs(lam - mu0) / abs(mu0) < 1e-3
    # 2D operator with a z-independent V on a long cylinder approaches mu0 + (pi/2Z)^2
    g = CylGrid(8.0, 4.0, 800, 8)
    lam2 = d.eigs_lowest(d.assemble_L(g, SeparablePotential(pot, _Zero())), 1)[0][0]
    kz = (math.pi / 8.0) ** 2
    assert lam2 == pytest.approx(mu0 + kz, rel=2e-3)


class _Zero:
    def __call__(self, z):
        return np.zeros_like(z)

    def cell_averages(self, edges):
        return np.zeros(len(edges) - 1)


def test_separable_cell_averages():
    pot = StepRadialPotential(-3.0, 1.0, 0.55)
    from curlgap.periodic import PiecewisePotential1D
    per = PiecewisePotential1D([0.0, 0.3], [2.0, -1.0])
    g = CylGrid(2.0, 1.0, 10, 10)
    vals = SeparablePotential(pot, per).cell_averages(g)
    w_avg = pot.cell_averages(g.r_edges)
    p_avg = per.cell_averages(g.z_edges)
    assert np.allclose(vals, w_avg[:, None] + p_avg[None, :])
    # r^3-weighted average of the cell containing the step
    lo, hi = 0.4, 0.6
    frac = (0.55 ** 4 - lo ** 4) / (hi ** 4 - lo ** 4)
    assert w_avg[2] == pytest.approx(-3.0 * frac + 1.0 * (1 - frac))


def test_hardy_examples():
    g = CylGrid(5.0, 5.0, 100, 200)
    assert d.hardy_check(Field.zeros(g)) == (0.0, 0.0)
    lhs, rhs = d.hardy_check(Field.from_function(g, lambda r, z: r * np.exp(-r ** 2 - z ** 2)))
    assert 0 < lhs <= rhs


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 3.0), st.floats(-2.0, 2.0), st.floats(0.3, 2.0), st.floats(-2, 2))
def test_hardy_random_bumps(r0, z0, width, amp):
    g = CylGrid(6.0, 5.0, 60, 100)
    f = lambda r, z: amp * np.where((s := ((r - r0) ** 2 + (z - z0) ** 2) / width ** 2) < 1,
                                    (1 - s) ** 3, 0.0)
    lhs, rhs = d.hardy_check(Field.from_function(g, f))
    assert lhs <= rhs


def test_reconstruction_tangent_and_axis():
    g = CylGrid(3.0, 3.0, 30, 60)
    u = Field.from_function(g, _gauss(z0=0.3))
    rng = np.random.default_rng(2)
    pts = rng.uniform(-2, 2, (500, 3))
    U = d.reconstruct_field(u, pts)
    dot = U[:, 0] * pts[:, 0] + U[:, 1] * pts[:, 1]
    assert np.all(np.abs(dot) <= 2 * np.finfo(float).eps * np.abs(U[:, 0] * pts[:, 0]))
    assert np.all(U[:, 2] == 0.0)
    axis = d.reconstruct_field(u, [[0.0, 0.0, 0.5], [0.0, 0.0, -1.0]])
    assert np.all(axis == 0.0)
    with pytest.raises(ValueError):
        d.reconstruct_field(u, [[3.5, 0.0, 0.0]])


def test_divergence_free():
    g = CylGrid(3.0, 3.0, 60, 120)
    u = Field.from_function(g, _gauss())
    rng = np.random.default_rng(4)
    pts = rng.uniform(-1.5, 1.5, (300, 3))
    scale = max(1.0, float(np.max(np.abs(d.reconstruct_field(u, pts)))))
    assert np.max(np.abs(d.divergence_at(u, pts))) <= 1e-6 * scale


def test_curl_identity_refinement():
    g = CylGrid(3.0, 3.0, 120, 240)
    u = Field.from_function(g, _gauss(2.0))
    assert d.curl_identity_check(Field.zeros(g), 0.1) == (0.0, 0.0)
    mism = []
    for h in (0.1, 0.05):
        full, curl_div = d.curl_identity_check(u, h, extent=(2.0, 2.5))
        mism.append(abs(full - curl_div) / full)
    assert mism[1] <= 0.02
    assert mism[1] < mism[0]
    assert math.log2(mism[0] / mism[1]) >= 1.0


def test_field_csv_round_trip(tmp_path):
    g = CylGrid(2.0, 1.0, 7, 5)
    rng = np.random.default_rng(5)
    u = Field(g, rng.normal(size=g.shape))
    path, side = d.write_field_csv(u, tmp_path / "f.csv")
    assert side.name == "f.csv.grid.json"
    back = d.read_field_csv(path)
    assert back.grid == g
    assert np.array_equal(back.values, u.values)
    assert path.read_text().splitlines()[0] == "r,x3,u"
