"""Step radial wells W(r) and their single bound state.

The radial operator is ``L_r = -(1/r^3) d/dr (r^3 d/dr) + W(r)`` on
``L^2(r^3 dr)`` with

    W(r) = w0  for r < delta,      W(r) = winf  for r >= delta.

Below the essential spectrum ``[winf, inf)`` an eigenvalue ``mu`` is a root
of the C^1 matching condition ``g(mu) = h(mu)`` where

    g(mu) = alpha(sqrt(mu - w0) * delta),   h(mu) = beta(sqrt(winf - mu) * delta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import special
from .spectrum_set import SpectrumSet


class NoRootError(ValueError):
    """The matching equation has no (unique) root in the admissible bracket."""


@dataclass(frozen=True)
class StepRadialPotential:
    w0: float
    winf: float
    delta: float

    def __post_init__(self):
        if not (math.isfinite(self.w0) and math.isfinite(self.winf) and math.isfinite(self.delta)):
            raise ValueError("potential parameters must be finite")
        if self.delta <= 0.0:
            raise ValueError(f"step radius must be positive, got {self.delta}")
        if not self.w0 < self.winf:
            raise ValueError(f"need a well: w0={self.w0} must be below winf={self.winf}")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r < self.delta, self.w0, self.winf)

    def single_mode_condition(self) -> bool:
        """(j1/delta)^2 < winf - w0 < (j2'/delta)^2."""
        j1 = special.j1_zeros(1)[0]
        j2p = special.j1_prime_zeros(2)[1]
        depth = (self.winf - self.w0) * self.delta ** 2
        return j1 ** 2 < depth < j2p ** 2

    def cell_averages(self, edges) -> np.ndarray:
        """r^3-weighted averages of W over the cells ``[edges[i], edges[i+1]]``."""
        edges = np.asarray(edges, dtype=float)
        lo, hi = edges[:-1], edges[1:]
        cut = np.clip(self.delta, lo, hi)
        inner = (cut ** 4 - lo ** 4) / (hi ** 4 - lo ** 4)
        return inner * self.w0 + (1.0 - inner) * self.winf

    def to_dict(self) -> dict:
        return {"w0": self.w0, "winf": self.winf, "delta": self.delta}


@dataclass(frozen=True)
class RadialDesign:
    mu0: float
    winf: float
    eta: float
    xi: float
    delta: float
    w0: float

    @property
    def potential(self) -> StepRadialPotential:
        return StepRadialPotential(self.w0, self.winf, self.delta)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("mu0", "winf", "eta", "xi", "delta", "w0")}


def eta_bounds() -> tuple[float, float]:
    """Admissible window ``[eta_star, eta_star_upper]`` for the outer argument."""
    j1 = special.j1_zeros(1)[0]
    j1p, j2p = special.j1_prime_zeros(2)
    return math.sqrt(j1 ** 2 - j1p ** 2), math.sqrt(j2p ** 2 - j1 ** 2)


def xi_of_eta(eta: float) -> float:
    """Unique ``xi`` in (j1', j1) with ``alpha(xi) = beta(eta)``."""
    lo_eta, hi_eta = eta_bounds()
    if not (lo_eta - 1e-12 <= eta <= hi_eta + 1e-12):
        raise ValueError(f"eta={eta} outside admissible window [{lo_eta}, {hi_eta}]")
    target = special.beta(eta)
    lo = special.j1_prime_zeros(1)[0] + 1e-9
    hi = special.j1_zeros(1)[0]
    # alpha - target: negative (near the pole) at lo, positive at the zero of J1
    while hi - lo > 1e-13:
        mid = 0.5 * (lo + hi)
        if special.alpha(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def design_radial(mu0: float, winf: float, eta: float) -> RadialDesign:
    """Step well whose unique bound state sits at ``mu0``."""
    if not winf > mu0:
        raise ValueError(f"need winf > mu0, got winf={winf}, mu0={mu0}")
    xi = xi_of_eta(eta)
    delta = eta / math.sqrt(winf - mu0)
    w0 = mu0 - (xi / delta) ** 2
    return RadialDesign(mu0=mu0, winf=winf, eta=eta, xi=xi, delta=delta, w0=w0)


def _check_mu(pot: StepRadialPotential, mu: float) -> None:
    if not (pot.w0 < mu < pot.winf):
        raise ValueError(f"mu={mu} outside ({pot.w0}, {pot.winf})")


def matching_g(pot: StepRadialPotential, mu: float) -> float:
    _check_mu(pot, mu)
    return special.alpha(math.sqrt(mu - pot.w0) * pot.delta)


def matching_h(pot: StepRadialPotential, mu: float) -> float:
    _check_mu(pot, mu)
    return special.beta(math.sqrt(pot.winf - mu) * pot.delta)


def eigenvalue_bracket(pot: StepRadialPotential) -> tuple[float, float]:
    """Interval where g runs from -inf up to 0 and hence crosses h once."""
    j1 = special.j1_zeros(1)[0]
    j1p = special.j1_prime_zeros(1)[0]
    eps = 1e-9 * (pot.winf - pot.w0)
    return pot.w0 + (j1p / pot.delta) ** 2 + eps, pot.w0 + (j1 / pot.delta) ** 2


def radial_eigenvalue(pot: StepRadialPotential) -> float:
    """The unique eigenvalue of ``L_r`` below ``winf``."""
    if not pot.single_mode_condition():
        raise NoRootError(
            "single-eigenvalue condition (j1/delta)^2 < winf - w0 < (j2'/delta)^2 fails "
            f"for {pot}")
    lo, hi = eigenvalue_bracket(pot)

    def mismatch(mu):
        return matching_g(pot, mu) - matching_h(pot, mu)

    f_lo, f_hi = mismatch(lo), mismatch(hi)
    if not (f_lo < 0.0 < f_hi):
        raise NoRootError(f"matching equation not bracketed on [{lo}, {hi}]")
    return brentq(mismatch, lo, hi, xtol=1e-15 * max(1.0, abs(lo), abs(hi)), rtol=1e-15,
                  maxiter=500)


def eigenfunction_branches(pot: StepRadialPotential, mu0: float):
    """Closed-form inner (J1) and outer (K1) profiles, both equal to 1 at delta."""
    _check_mu(pot, mu0)
    k_in = math.sqrt(mu0 - pot.w0)
    k_out = math.sqrt(pot.winf - mu0)
    d = pot.delta
    j_d = special.j1(k_in * d)
    k_d = special.k1_scaled(k_out * d)

    def inner(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        for i, ri in enumerate(r):
            if ri == 0.0:
                out[i] = 0.5 * k_in * d / j_d
            else:
                out[i] = d * special.j1(k_in * ri) / (ri * j_d)
        return out

    def outer(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        for i, ri in enumerate(r):
            x = k_out * ri
            out[i] = d * special.k1_scaled(x) / (ri * k_d) * math.exp(-k_out * (ri - d))
        return out

    return inner, outer


def radial_eigenfunction(pot: StepRadialPotential, mu0: float, r):
    """Bound state profile normalised by ``u(delta) = 1``.

    ``r`` may be a scalar or an array; the return value matches its shape.
    """
    mismatch = matching_g(pot, mu0) - matching_h(pot, mu0)
    if abs(mismatch) > 1e-8:
        raise ValueError(f"mu0={mu0} is not an eigenvalue of {pot} (mismatch {mismatch:.3e})")
    inner, outer = eigenfunction_branches(pot, mu0)
    r_arr = np.asarray(r, dtype=float)
    flat = np.atleast_1d(r_arr)
    if np.any(flat < 0.0):
        raise ValueError("radius must be non-negative")
    out = np.empty_like(flat)
    mask = flat <= pot.delta
    if mask.any():
        out[mask] = inner(flat[mask])
    if (~mask).any():
        out[~mask] = outer(flat[~mask])
    return out.reshape(r_arr.shape) if r_arr.ndim else float(out[0])


def radial_spectrum(pot: StepRadialPotential) -> SpectrumSet:
    """``{mu0} U [winf, inf)``."""
    mu0 = radial_eigenvalue(pot)
    return SpectrumSet.build(points=[mu0], tail=pot.winf)
