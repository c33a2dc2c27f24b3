"""Weighted finite differences for ``L = -(1/r^3) d_r(r^3 d_r) - d_z^2 + V`` on a cylinder.

Grid: cell-centred nodes ``r_i = (i + 1/2) hr`` and ``z_j = -z_half + (j + 1/2) hz``.
Unknowns are ordered row-major, ``k = i * nz + j``.

The operator is stored as ``A = W^{-1} S`` with ``S`` symmetric and
``W = diag(w)`` the cell volumes of the measure ``r^3 dr dz``:

    w_ij = (r_{i+1/2}^4 - r_{i-1/2}^4) / 4 * hz.

Radial fluxes carry the face weight ``r_{i+1/2}^3``; the face at ``r = 0``
has weight zero, so no condition is imposed on the axis.  Dirichlet
conditions at ``r_max`` and ``z = +-z_half`` use the ghost value ``-u``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import RectBivariateSpline
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import LinearOperator, eigsh, lobpcg, splu

Sampler = Callable[[np.ndarray, np.ndarray], np.ndarray]

DIRECT_SIZE_LIMIT = 250_000


class EigenConvergenceError(RuntimeError):
    pass


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class CylGrid:
    r_max: float
    z_half: float
    nr: int
    nz: int

    def __post_init__(self):
        if not (self.r_max > 0 and self.z_half > 0):
            raise ValueError("r_max and z_half must be positive")
        if self.nr < 2 or self.nz < 1:
            raise ValueError(f"degenerate grid nr={self.nr}, nz={self.nz}")

    @classmethod
    def from_spacing(cls, r_max: float, z_half: float, hr: float, hz: float) -> "CylGrid":
        return cls(r_max, z_half, int(round(r_max / hr)), int(round(2 * z_half / hz)))

    @property
    def hr(self) -> float:
        return self.r_max / self.nr

    @property
    def hz(self) -> float:
        return 2.0 * self.z_half / self.nz

    @property
    def shape(self) -> tuple[int, int]:
        return self.nr, self.nz

    @property
    def size(self) -> int:
        return self.nr * self.nz

    @property
    def r(self) -> np.ndarray:
        return (np.arange(self.nr) + 0.5) * self.hr

    @property
    def z(self) -> np.ndarray:
        return -self.z_half + (np.arange(self.nz) + 0.5) * self.hz

    @property
    def r_edges(self) -> np.ndarray:
        return np.arange(self.nr + 1) * self.hr

    @property
    def z_edges(self) -> np.ndarray:
        return -self.z_half + np.arange(self.nz + 1) * self.hz

    @property
    def radial_volumes(self) -> np.ndarray:
        e = self.r_edges
        return (e[1:] ** 4 - e[:-1] ** 4) / 4.0

    @property
    def weights(self) -> np.ndarray:
        """Cell volumes in the ``r^3 dr dz`` measure, shape ``(nr, nz)``."""
        return np.outer(self.radial_volumes, np.full(self.nz, self.hz))

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.r, self.z, indexing="ij")

    def scaled(self, factor: float) -> "CylGrid":
        """Same spacing on a domain enlarged by ``factor``."""
        return CylGrid(self.r_max * factor, self.z_half * factor,
                       int(round(self.nr * factor)), int(round(self.nz * factor)))

    def to_dict(self) -> dict:
        return {"r_max": self.r_max, "z_half": self.z_half, "nr": self.nr, "nz": self.nz}


@dataclass(frozen=True, eq=False)
class Field:
    grid: CylGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(self.grid.shape)
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: CylGrid, fn: Sampler) -> "Field":
        rr, zz = grid.mesh()
        return cls(grid, np.broadcast_to(fn(rr, zz), grid.shape))

    @classmethod
    def zeros(cls, grid: CylGrid) -> "Field":
        return cls(grid, np.zeros(grid.shape))

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def __add__(self, other: "Field") -> "Field":
        _same_grid(self, other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _same_grid(self, other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> "Field":
        return Field(self.grid, c * self.values)

    __rmul__ = __mul__


def _same_grid(u: Field, v: Field) -> None:
    if u.grid != v.grid:
        raise GridMismatchError(f"fields live on different grids: {u.grid} vs {v.grid}")


# -- potentials ---------------------------------------------------------------

@dataclass(frozen=True)
class SeparablePotential:
    """``V(r, z) = W(r) + P(z)`` with cell averaging for both parts."""

    radial: object
    periodic: object

    def __call__(self, r, z):
        return self.radial(r) + self.periodic(z)

    def cell_averages(self, grid: CylGrid) -> np.ndarray:
        w = self.radial.cell_averages(grid.r_edges)
        p = self.periodic.cell_averages(grid.z_edges)
        return w[:, None] + p[None, :]


def sample_potential(grid: CylGrid, V) -> np.ndarray:
    """Nodal values of ``V``: exact cell averages when available, else point samples."""
    if hasattr(V, "cell_averages"):
        vals = V.cell_averages(grid)
    elif callable(V):
        rr, zz = grid.mesh()
        vals = np.broadcast_to(V(rr, zz), grid.shape).astype(float)
    else:
        vals = np.broadcast_to(np.asarray(V, dtype=float), grid.shape)
    vals = np.array(vals, dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("potential must be finite on the grid")
    return vals


# -- operator -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """``A = W^{-1} S`` with symmetric ``S``; ``potential`` is the nodal V."""

    grid: CylGrid
    stiffness: sp.csr_matrix
    weights: np.ndarray
    potential: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def matrix(self) -> sp.csr_matrix:
        return sp.csr_matrix(sp.diags(1.0 / self.weights) @ self.stiffness)

    @property
    def size(self) -> int:
        return self.grid.size

    def apply(self, u: np.ndarray) -> np.ndarray:
        return (self.stiffness @ u) / self.weights

    def quadratic_form(self, u: np.ndarray) -> float:
        """``<A u, u>_w = u^T S u``."""
        return float(u @ (self.stiffness @ u))

    def symmetrized(self) -> sp.csr_matrix:
        """``D^{1/2} A D^{-1/2} = D^{-1/2} S D^{-1/2}``."""
        d = sp.diags(1.0 / np.sqrt(self.weights))
        return sp.csr_matrix(d @ self.stiffness @ d)

    def weighted_symmetry_residual(self) -> float:
        """max |w_k A_kl - w_l A_lk| over stored entries of ``S``."""
        diff = self.stiffness - self.stiffness.T
        return float(abs(diff).max()) if diff.nnz else 0.0

    def with_shift(self, c: float) -> "DiscreteOperator":
        return assemble_from_values(self.grid, self.potential + c, self.metadata)


def _kinetic_stiffness(grid: CylGrid) -> sp.csr_matrix:
    """Symmetric ``S_0`` of the V = 0 operator (Dirichlet form of ``-Delta_5``)."""
    nr, nz, hr, hz = grid.nr, grid.nz, grid.hr, grid.hz
    faces = grid.r_edges ** 3 / hr  # faces[0] = 0 at the axis
    m = grid.radial_volumes
    # radial part on the r-line, measure r^3 dr
    diag_r = faces[:-1] + faces[1:]
    diag_r[-1] += faces[-1]  # ghost -u at r_max doubles the boundary flux
    off_r = -faces[1:-1]
    s_r = sp.diags([off_r, diag_r, off_r], [-1, 0, 1], format="csr")
    # axial part on the z-line, measure dz
    diag_z = np.full(nz, 2.0 / hz)
    diag_z[0] += 1.0 / hz
    diag_z[-1] += 1.0 / hz
    off_z = np.full(nz - 1, -1.0 / hz)
    s_z = sp.diags([off_z, diag_z, off_z], [-1, 0, 1], format="csr")
    # S_0 = S_r (x) M_z + M_r (x) S_z
    return sp.csr_matrix(sp.kron(s_r, sp.identity(nz) * hz) + sp.kron(sp.diags(m), s_z))


def assemble_from_values(grid: CylGrid, values: np.ndarray, metadata: Optional[dict] = None
                         ) -> DiscreteOperator:
    values = np.array(values, dtype=float).reshape(grid.shape)
    w = grid.weights.ravel()
    s = _kinetic_stiffness(grid) + sp.diags(w * values.ravel())
    return DiscreteOperator(grid, sp.csr_matrix(s), w, values, dict(metadata or {}))


def assemble_L(grid: CylGrid, V) -> DiscreteOperator:
    """Discrete ``L`` for the potential ``V`` (callable, constant or nodal array)."""
    return assemble_from_values(grid, sample_potential(grid, V),
                                {"boundary": "dirichlet r_max, z=+-z_half; axis flux 0"})


def assemble_radial(W, r_max: float, nr: int):
    """1D radial operator on ``L^2(r^3 dr)``: returns ``(diag, off, weights)``
    of the symmetrised tridiagonal matrix ``D^{1/2} A D^{-1/2}``."""
    hr = r_max / nr
    edges = np.arange(nr + 1) * hr
    faces = edges ** 3 / hr
    m = (edges[1:] ** 4 - edges[:-1] ** 4) / 4.0
    if hasattr(W, "cell_averages"):
        vals = W.cell_averages(edges)
    else:
        vals = np.broadcast_to(W((np.arange(nr) + 0.5) * hr), (nr,))
    diag_s = faces[:-1] + faces[1:]
    diag_s[-1] += faces[-1]
    diag = diag_s / m + vals
    off = -faces[1:-1] / np.sqrt(m[:-1] * m[1:])
    return diag, off, m


def radial_eigenvalues(W, r_max: float, nr: int, k: int = 1) -> np.ndarray:
    diag, off, _ = assemble_radial(W, r_max, nr)
    return eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(0, k - 1))


# -- inner products -----------------------------------------------------------

def weighted_inner(u: Field, v: Field) -> float:
    _same_grid(u, v)
    return float(np.sum(u.grid.weights * u.values * v.values))


def weighted_norm(u: Field) -> float:
    return math.sqrt(weighted_inner(u, u))


# -- eigenpairs ---------------------------------------------------------------

def _lower_bound(op: DiscreteOperator) -> float:
    return float(op.potential.min())


def _coarsen(grid: CylGrid) -> CylGrid:
    return CylGrid(grid.r_max, grid.z_half, max(2, grid.nr // 2), max(1, grid.nz // 2))


def _interp_matrix_1d(src: np.ndarray, dst: np.ndarray, lo: float, hi: float,
                      neumann_lo: bool) -> sp.csr_matrix:
    """Linear interpolation from nodes ``src`` to points ``dst`` (1D).

    Beyond the outer nodes the value goes linearly to 0 at ``lo``/``hi``
    (Dirichlet), except that ``neumann_lo`` holds it constant towards ``lo``.
    """
    ax = np.concatenate(([lo], src, [hi]))
    idx = np.clip(np.searchsorted(ax, dst, side="right") - 1, 0, len(ax) - 2)
    t = (dst - ax[idx]) / (ax[idx + 1] - ax[idx])
    rows = np.repeat(np.arange(len(dst)), 2)
    cols = np.column_stack([idx - 1, idx]).ravel()  # padded index -> src index
    vals = np.column_stack([1.0 - t, t]).ravel()
    if neumann_lo:
        cols = np.where(cols < 0, 0, cols)
    keep = (cols >= 0) & (cols < len(src))
    return sp.csr_matrix((vals[keep], (rows[keep], cols[keep])), shape=(len(dst), len(src)))


def prolongation(coarse: CylGrid, fine: CylGrid) -> sp.csr_matrix:
    """Bilinear interpolation matrix from ``coarse`` nodal values to ``fine`` nodes."""
    pr = _interp_matrix_1d(coarse.r, fine.r, 0.0, coarse.r_max, neumann_lo=True)
    pz = _interp_matrix_1d(coarse.z, fine.z, -coarse.z_half, coarse.z_half, neumann_lo=False)
    return sp.csr_matrix(sp.kron(pr, pz))


def eigs_lowest(op: DiscreteOperator, k: int = 1, tol: float = 1e-8, maxiter: int = 400,
                potential_fn=None) -> list[tuple[float, Field]]:
    """``k`` smallest eigenpairs, ascending, with ``w``-orthonormal eigenvectors.

    Small problems use shift-invert Lanczos below the spectrum.  Large ones use
    LOBPCG on the symmetrised matrix, preconditioned by a sparse LU of the
    same operator on a twice coarser grid and started from its eigenvectors;
    ``potential_fn`` supplies V for the coarse grid (defaults to
    re-sampling the nodal potential).
    """
    n = op.size
    if k < 1 or k >= n - 1:
        raise ValueError(f"k must satisfy 1 <= k < n - 1, got k={k}, n={n}")
    sqw = np.sqrt(op.weights)
    b = op.symmetrized()
    sigma = _lower_bound(op) - 1.0
    if n <= DIRECT_SIZE_LIMIT:
        vals, ys = _shift_invert(b, k, sigma, tol)
    else:
        vals, ys = _lobpcg_multilevel(op, b, k, sigma, tol, maxiter, potential_fn)
    order = np.argsort(vals)
    vals, ys = vals[order], ys[:, order]
    out = []
    for lam, y in zip(vals, ys.T):
        u = y / sqw
        resid = op.apply(u) - lam * u
        rn = math.sqrt(float(np.sum(op.weights * resid ** 2)))
        un = math.sqrt(float(np.sum(op.weights * u ** 2)))
        scale = max(1.0, abs(lam))
        if rn > max(tol, 1e-8) * scale * un * 10:
            raise EigenConvergenceError(f"eigenpair {lam} residual {rn / un:.2e} above tolerance")
        out.append((float(lam), Field(op.grid, u / un)))
    return out


def _shift_invert(b: sp.csr_matrix, k: int, sigma: float, tol: float):
    n = b.shape[0]
    lu = splu(sp.csc_matrix(b - sigma * sp.identity(n)))
    opinv = LinearOperator(b.shape, matvec=lu.solve, dtype=float)
    # generic start vector: a symmetric one misses eigenvectors of the opposite parity
    v0 = np.random.default_rng(0).standard_normal(n)
    try:
        vals, ys = eigsh(b, k=k, sigma=sigma, which="LM", OPinv=opinv, tol=tol * 1e-3,
                         v0=v0, maxiter=5000)
    except Exception as exc:  # ArpackNoConvergence and friends
        raise EigenConvergenceError(str(exc)) from exc
    return vals, ys


def _lobpcg_multilevel(op, b, k, sigma, tol, maxiter, potential_fn):
    coarse_grid = _coarsen(op.grid)
    if potential_fn is not None:
        coarse_op = assemble_L(coarse_grid, potential_fn)
    else:
        coarse_vals = _restrict_potential(op.grid, coarse_grid, op.potential)
        coarse_op = assemble_from_values(coarse_grid, coarse_vals)
    coarse = eigs_lowest(coarse_op, k, tol=tol, maxiter=maxiter, potential_fn=potential_fn)
    pmat = prolongation(coarse_grid, op.grid)
    x0 = pmat @ np.column_stack([f.flat for _, f in coarse])
    x0 *= np.sqrt(op.weights)[:, None]
    bs = b - sigma * sp.identity(b.shape[0], format="csr")
    precond = _two_level_preconditioner(op.grid, coarse_grid, coarse_op, sigma, bs, pmat)
    vals, ys = lobpcg(b, x0, M=precond, tol=tol, maxiter=maxiter, largest=False)
    return vals, ys


def _restrict_potential(fine: CylGrid, coarse: CylGrid, values: np.ndarray) -> np.ndarray:
    return (prolongation(fine, coarse) @ np.ravel(values)).reshape(coarse.shape)


def _two_level_preconditioner(fine, coarse, coarse_op, sigma, bs, pmat):
    """Symmetric two-level preconditioner ``Q B_c^{-1} Q^T + omega D^{-1}``.

    ``Q`` is the prolongation in symmetrised coordinates and ``B_c`` the
    shifted coarse operator, factorised once.
    """
    cb = coarse_op.symmetrized()
    lu = splu(sp.csc_matrix(cb - sigma * sp.identity(cb.shape[0])))
    q = sp.csr_matrix(sp.diags(np.sqrt(fine.weights.ravel())) @ pmat
                      @ sp.diags(1.0 / np.sqrt(coarse.weights.ravel())))
    qt = sp.csr_matrix(q.T)
    jac = 0.5 / bs.diagonal()

    def apply(x):
        x = np.asarray(x)
        if x.ndim == 2:
            return q @ lu.solve(np.asfortranarray(qt @ x)) + jac[:, None] * x
        return q @ lu.solve(qt @ x) + jac * x

    n = bs.shape[0]
    return LinearOperator((n, n), matvec=apply, matmat=apply, dtype=float)


# -- Hardy inequality ---------------------------------------------------------

def hardy_check(u: Field) -> tuple[float, float]:
    """``(int u^2/r^2 r^3, int (u_r^2 + u_z^2) r^3)`` by the grid's own quadrature."""
    g = u.grid
    lhs = float(np.sum(g.weights * u.values ** 2 / g.r[:, None] ** 2))
    rhs = float(u.flat @ (_kinetic_stiffness(g) @ u.flat))
    return lhs, rhs


# -- reconstruction -----------------------------------------------------------

_MIRROR = 3  # reflected nodes on each side of the spline data


def _reflect(nodes: np.ndarray, vals: np.ndarray, lo: float, hi: float,
             sign_lo: float, sign_hi: float):
    """Extend nodal data across ``lo``/``hi`` by reflection with the given parity."""
    k = _MIRROR
    ax = np.concatenate((2 * lo - nodes[k - 1::-1], nodes, 2 * hi - nodes[:-k - 1:-1]))
    data = np.concatenate((sign_lo * vals[k - 1::-1], vals, sign_hi * vals[:-k - 1:-1]))
    return ax, data


def _spline(u: Field) -> RectBivariateSpline:
    """Bicubic spline: even across the axis, odd across the Dirichlet walls."""
    g = u.grid
    if g.nr < _MIRROR + 1 or g.nz < _MIRROR + 1:
        raise ValueError(f"reconstruction needs at least {_MIRROR + 1} nodes per direction")
    r_ax, vals = _reflect(g.r, u.values, 0.0, g.r_max, 1.0, -1.0)
    z_ax, vals_t = _reflect(g.z, vals.T, -g.z_half, g.z_half, -1.0, -1.0)
    return RectBivariateSpline(r_ax, z_ax, vals_t.T, kx=3, ky=3)


def _interpolate(u: Field, r: np.ndarray, z: np.ndarray) -> np.ndarray:
    """C^2 reconstruction of the scalar profile at ``(r, z)``."""
    return _spline(u).ev(np.ravel(r), np.ravel(z))


def interpolate(u: Field, r, z) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    _check_inside(u.grid, r, z)
    return _interpolate(u, r, z).reshape(np.broadcast(r, z).shape)


def _check_inside(grid: CylGrid, r, z) -> None:
    if np.any(r > grid.r_max) or np.any(np.abs(z) > grid.z_half):
        raise ValueError("points outside the cylinder r <= r_max, |x3| <= z_half")


def reconstruct_field(u: Field, pts) -> np.ndarray:
    """``U(x) = u(r, x3) (-x2, x1, 0)`` at 3D points (shape ``(n, 3)``)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if pts.shape[-1] != 3:
        raise ValueError("points must have three coordinates")
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    r = np.hypot(x, y)
    _check_inside(u.grid, r, z)
    val = _interpolate(u, r, z)
    return np.column_stack([-y * val, x * val, np.zeros_like(val)])


def _cartesian_samples(u: Field, spacing: float, extent: tuple[float, float]):
    """Reconstructed ``U`` on a vertex grid covering ``|x|,|y| <= R``, ``|z| <= Z``."""
    big_r, big_z = extent
    nxy = int(math.ceil(big_r / spacing))
    nzz = int(math.ceil(big_z / spacing))
    xs = spacing * np.arange(-nxy, nxy + 1)
    zs = spacing * np.arange(-nzz, nzz + 1)
    xx, yy = np.meshgrid(xs, xs, indexing="ij")
    r = np.hypot(xx, yy)
    inside = r <= u.grid.r_max
    vals = np.zeros(xx.shape + (zs.size,))
    rr = np.broadcast_to(r[inside][:, None], (inside.sum(), zs.size))
    zz = np.broadcast_to(zs[None, :], rr.shape)
    vals[inside] = _interpolate(u, rr.ravel(), zz.ravel()).reshape(rr.shape)
    ux = -yy[..., None] * vals
    uy = xx[..., None] * vals
    return ux, uy


def curl_identity_check(u: Field, spacing: float = 0.05,
                        extent: Optional[tuple[float, float]] = None) -> tuple[float, float]:
    """``(int sum_ij (d_j U^i)^2, int |curl U|^2 + (div U)^2)`` on a Cartesian grid.

    The full gradient uses the cell-centroid gradient of the trilinear
    interpolant; curl and divergence use central differences at the vertices.
    Both converge at second order, so their mismatch measures the
    discretisation error.
    """
    g = u.grid
    if extent is None:
        extent = (g.r_max / math.sqrt(2.0), g.z_half)
    ux, uy = _cartesian_samples(u, spacing, extent)
    h = spacing
    vol = h ** 3

    full = 0.0
    for comp in (ux, uy):
        # centroid gradient of trilinear interpolant: difference along one axis,
        # average over the other two
        for ax in range(3):
            d = np.diff(comp, axis=ax) / h
            for other in range(3):
                if other != ax:
                    d = 0.5 * (np.take(d, range(d.shape[other] - 1), axis=other)
                               + np.take(d, range(1, d.shape[other]), axis=other))
            full += float(np.sum(d ** 2)) * vol

    def cdiff(f, ax):
        return (np.take(f, range(2, f.shape[ax]), axis=ax)
                - np.take(f, range(0, f.shape[ax] - 2), axis=ax)) / (2 * h)

    def interior(f, ax):
        sl = [slice(1, -1)] * 3
        sl[ax] = slice(None)
        return f[tuple(sl)]

    # U^z = 0, so curl = (-d_z U^y, d_z U^x, d_x U^y - d_y U^x)
    dz_uy = interior(cdiff(uy, 2), 2)
    dz_ux = interior(cdiff(ux, 2), 2)
    dx_uy = interior(cdiff(uy, 0), 0)
    dy_ux = interior(cdiff(ux, 1), 1)
    dx_ux = interior(cdiff(ux, 0), 0)
    dy_uy = interior(cdiff(uy, 1), 1)
    curl2 = dz_uy ** 2 + dz_ux ** 2 + (dx_uy - dy_ux) ** 2
    div2 = (dx_ux + dy_uy) ** 2
    curl_div = float(np.sum(curl2 + div2)) * vol
    return full, curl_div


def divergence_at(u: Field, pts, h: float = 1e-5) -> np.ndarray:
    """Central-difference divergence of the reconstructed field."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    div = np.zeros(len(pts))
    for ax in range(3):
        e = np.zeros(3)
        e[ax] = h
        div += (reconstruct_field(u, pts + e)[:, ax] - reconstruct_field(u, pts - e)[:, ax]) / (2 * h)
    return div


# -- export -------------------------------------------------------------------

def write_field_csv(u: Field, path) -> tuple[Path, Path]:
    """CSV ``r,x3,u`` row-major over the grid plus sidecar ``<path>.grid.json``."""
    path = Path(path)
    rr, zz = u.grid.mesh()
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("r,x3,u\n")
        for r, z, v in zip(rr.ravel().tolist(), zz.ravel().tolist(), u.flat.tolist()):
            fh.write(f"{r!r},{z!r},{v!r}\n")
    side = path.with_suffix(path.suffix + ".grid.json")
    side.write_text(json.dumps(u.grid.to_dict()) + "\n", encoding="utf-8")
    return path, side


def read_field_csv(path) -> Field:
    path = Path(path)
    side = path.with_suffix(path.suffix + ".grid.json")
    grid = CylGrid(**json.loads(side.read_text(encoding="utf-8")))
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape != (grid.size, 3):
        raise ValueError(f"CSV has {data.shape[0]} rows, grid expects {grid.size}")
    return Field(grid, data[:, 2])
