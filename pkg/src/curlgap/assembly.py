"""Spectrum of the separable operator and certified gaps around a query point.

For ``V(r, x3) = W(r) + P(x3)`` the spectrum is the Minkowski sum of the
radial and periodic spectra.  With a single radial eigenvalue ``mu0`` below
``[winf, inf)`` it reads

    U_k [mu0 + nu_{2k-1}, mu0 + nu_{2k}]  U  [nu_1 + winf, inf).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .periodic import DEFAULT_BANDS, BandStructure, PiecewisePotential1D, band_edges
from .radial import StepRadialPotential, design_radial, radial_spectrum
from .spectrum_set import SpectrumSet, minkowski_sum

CHAIN_LABELS = ("−ν_3 < μ_0", "μ_0 < −ν_2", "−ν_2 < −ν_1", "−ν_1 < W_∞")
_MAX_BANDS = 256


class TruncationError(ValueError):
    """Bands beyond the computed ones might reach below ``nu_1 + winf``."""


class ChainViolationError(ValueError):
    def __init__(self, inequality: str, detail: str = ""):
        self.inequality = inequality
        super().__init__(f"inequality {inequality} fails" + (f": {detail}" if detail else ""))


@dataclass(frozen=True)
class ChainCheck:
    label: str
    lhs: float
    rhs: float

    @property
    def ok(self) -> bool:
        return self.lhs < self.rhs

    def to_dict(self) -> dict:
        return {"inequality": self.label, "lhs": self.lhs, "rhs": self.rhs, "ok": self.ok}


@dataclass(frozen=True)
class GapCertificate:
    query_point: float
    margin: float
    chain: tuple[ChainCheck, ...] = ()
    values: dict = field(default_factory=dict)
    positivity: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.margin > 0.0 and all(c.ok for c in self.chain)

    def to_dict(self) -> dict:
        return {
            "query_point": self.query_point,
            "margin": self.margin,
            "certified": self.certified,
            "chain": [c.to_dict() for c in self.chain],
            "values": dict(self.values),
            "positivity": dict(self.positivity),
        }


def inequality_chain(nu1: float, nu2: float, nu3: float, mu0: float,
                     winf: float) -> tuple[ChainCheck, ...]:
    """-nu_3 < mu0 < -nu_2 < -nu_1 < winf, one check per link."""
    pairs = ((-nu3, mu0), (mu0, -nu2), (-nu2, -nu1), (-nu1, winf))
    return tuple(ChainCheck(lbl, a, b) for lbl, (a, b) in zip(CHAIN_LABELS, pairs))


def assemble(rad: SpectrumSet, per: BandStructure, winf: float) -> SpectrumSet:
    """Spectrum of the separable operator from the radial set and K computed bands."""
    if len(rad.points) != 1 or rad.intervals or rad.tail is None:
        raise ValueError("radial spectrum must be one isolated point plus a half-line")
    if rad.tail != winf:
        raise ValueError(f"radial half-line starts at {rad.tail}, expected winf={winf}")
    mu0 = rad.points[0]
    edges = per.edges
    nu1, nu_top = edges[0], edges[-1]
    k = len(edges) // 2
    if mu0 + nu_top < nu1 + winf:
        raise TruncationError(
            f"mu0 + nu_{2 * k} = {mu0 + nu_top} lies below nu_1 + winf = {nu1 + winf}; "
            "request more bands")
    # everything above nu_{2K} maps into [nu_1 + winf, inf) once shifted by mu0
    per_set = SpectrumSet.build(intervals=per.bands, tail=nu_top)
    total = minkowski_sum(rad, per_set)
    note = f"computed from {k} bands; higher bands absorbed by [nu_1 + winf, inf)"
    return SpectrumSet(total.points, total.intervals, total.tail, (note,))


def gap_margin(s: SpectrumSet, x: float = 0.0, construction: Optional[dict] = None
               ) -> GapCertificate:
    """Distance from ``x`` to ``s``; ``construction`` (nu1, nu2, nu3, mu0, winf) adds the chain."""
    margin = s.distance(x)
    if margin == math.inf:
        raise ValueError("margin to the empty set is undefined")
    chain: tuple[ChainCheck, ...] = ()
    values: dict = {}
    if construction is not None:
        values = {k: float(construction[k]) for k in ("nu1", "nu2", "nu3", "mu0", "winf")}
        chain = inequality_chain(**values)
    return GapCertificate(float(x), float(margin), chain, values)


def positivity_report(per_pot: PiecewisePotential1D, winf: float, nu1: float) -> dict:
    esssup_v = winf + per_pot.esssup
    return {
        "esssup_V": esssup_v,
        "esssup_V_positive": esssup_v > 0.0,
        "nu1": nu1,
        "esssup_P": per_pot.esssup,
        "nu1_below_esssup_P": nu1 < per_pot.esssup,
    }


def design_potential(per_pot: PiecewisePotential1D, winf: float, eta: float,
                     mu0_fraction: float = 0.5, n_bands: int = DEFAULT_BANDS
                     ) -> tuple[StepRadialPotential, GapCertificate]:
    """Step well placing 0 in a gap of the separable operator.

    ``mu0 = -nu_3 + mu0_fraction * (nu_3 - nu_2)``.  ``n_bands`` is raised as
    needed until the band truncation is sound.
    """
    if not 0.0 < mu0_fraction < 1.0:
        raise ValueError(f"mu0_fraction must lie in (0, 1), got {mu0_fraction}")
    bands = band_edges(per_pot, max(n_bands, 2))
    nu1, nu2, nu3 = bands.nu(1), bands.nu(2), bands.nu(3)
    if not nu3 - nu2 > 1e-9:
        raise ChainViolationError(CHAIN_LABELS[0], f"first gap closed (nu_2={nu2}, nu_3={nu3})")
    mu0 = -nu3 + mu0_fraction * (nu3 - nu2)
    for check in inequality_chain(nu1, nu2, nu3, mu0, winf):
        if not check.ok:
            raise ChainViolationError(check.label, f"{check.lhs!r} >= {check.rhs!r}")

    pot = design_radial(mu0, winf, eta).potential
    rad = radial_spectrum(pot)
    mu0_actual = rad.points[0]
    k = len(bands.edges) // 2
    while mu0_actual + bands.edges[-1] < nu1 + winf:
        if k >= _MAX_BANDS:
            raise TruncationError(f"band truncation still unsound at K={k}")
        k *= 2
        bands = band_edges(per_pot, k)
    total = assemble(rad, bands, winf)
    construction = {"nu1": nu1, "nu2": nu2, "nu3": nu3, "mu0": mu0_actual, "winf": winf}
    cert = gap_margin(total, 0.0, construction)
    if not cert.certified:
        failing = [c.label for c in cert.chain if not c.ok]
        raise ChainViolationError(failing[0] if failing else "0 ∉ σ(L)",
                                  f"margin {cert.margin}")
    values = dict(cert.values, mu0_target=mu0, n_bands=k)
    cert = GapCertificate(cert.query_point, cert.margin, cert.chain, values,
                          positivity_report(per_pot, winf, nu1))
    return pot, cert


def separable_spectrum(pot: StepRadialPotential, per_pot: PiecewisePotential1D,
                       n_bands: int = DEFAULT_BANDS) -> SpectrumSet:
    """Assembled spectrum for a given well and periodic potential."""
    rad = radial_spectrum(pot)
    bands = band_edges(per_pot, n_bands)
    k = n_bands
    while rad.points[0] + bands.edges[-1] < bands.nu(1) + pot.winf:
        if k >= _MAX_BANDS:
            raise TruncationError(f"band truncation still unsound at K={k}")
        k *= 2
        bands = band_edges(per_pot, k)
    return assemble(rad, bands, pot.winf)
