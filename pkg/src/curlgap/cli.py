"""``curlgap`` command line: bands, design, curves, spectrum, groundstate.

Exit codes: 0 success, 1 configuration or usage error, 2 hypothesis
violation, 3 non-convergence.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from . import __version__
from .assembly import (ChainViolationError, TruncationError, design_potential, gap_margin,
                       positivity_report, separable_spectrum)
from .config import ConfigError, load_config
from .discretization import (CylGrid, EigenConvergenceError, SeparablePotential,
                             write_field_csv)
from .groundstate import (ConvergenceError, HypothesisError, Problem, solve_defocusing,
                          solve_focusing)
from .periodic import BandConvergenceError, PiecewisePotential1D, band_edges
from . import special
from .radial import NoRootError, StepRadialPotential, matching_g, matching_h, radial_eigenvalue
from .special import PoleError
from .spectrum_set import SpectrumSet

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_HYPOTHESIS = 2
EXIT_NONCONVERGENCE = 3

log = logging.getLogger("curlgap")


class CommandError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# -- output helpers -----------------------------------------------------------

def _fmt(x) -> str:
    """Shortest round-tripping decimal; empty cell for missing values."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    return repr(x) if math.isfinite(x) else ""


def write_csv(path: Path, header: list[str], rows) -> Path:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def write_json(path: Path, data) -> Path:
    path.write_text(json.dumps(data, indent=2, ensure_ascii=False, allow_nan=False) + "\n",
                    encoding="utf-8")
    return path


def _outdir(cfg: dict) -> Path:
    out = Path(cfg["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- builders -----------------------------------------------------------------

def periodic_from(cfg: dict) -> PiecewisePotential1D:
    sec = cfg["periodic"]
    try:
        return PiecewisePotential1D(sec["breakpoints"], sec["values"])
    except ValueError as exc:
        raise CommandError(f"periodic potential: {exc}", EXIT_CONFIG) from None


def _design(cfg: dict):
    per = periodic_from(cfg)
    sec = cfg["radial_design"]
    bands = band_edges(per, 2)
    winf = sec["winf"] if "winf" in sec else -bands.nu(1) + sec["winf_offset"]
    try:
        pot, cert = design_potential(per, winf, sec["eta"], sec["mu0_fraction"],
                                     cfg.get("bands", {}).get("count", 8))
    except ChainViolationError as exc:
        raise CommandError(f"chain violation: {exc}", EXIT_HYPOTHESIS) from None
    except ValueError as exc:
        raise CommandError(f"design failed: {exc}", EXIT_HYPOTHESIS) from None
    return per, winf, pot, cert


def _field_sampler(spec: dict, cfg: dict):
    """Sampler plus the certified gap margin at 0 when one is known."""
    kind = spec["kind"]
    if kind == "constant":
        c = float(spec["value"])
        return c, None
    if kind == "power":
        c, a = float(spec["coefficient"]), float(spec["exponent"])
        return (lambda r, z: c * (1.0 + np.hypot(r, z)) ** a), None
    if kind == "table":
        r_ax = np.asarray(spec["r"], dtype=float)
        z_ax = np.asarray(spec["x3"], dtype=float)
        vals = np.asarray(spec["values"], dtype=float)
        if vals.shape != (r_ax.size, z_ax.size):
            raise CommandError(f"table values must have shape {(r_ax.size, z_ax.size)}",
                               EXIT_CONFIG)
        interp = RegularGridInterpolator((r_ax, z_ax), vals)

        def table(r, z):
            rc = np.clip(r, r_ax[0], r_ax[-1])
            zc = np.clip(z, z_ax[0], z_ax[-1])
            return interp(np.stack([rc, zc], axis=-1))
        return table, None
    if kind == "designed":
        per, _, pot, cert = _design(cfg)
        return SeparablePotential(pot, per), cert.margin
    if kind == "separable":
        if "radial" not in spec:
            raise CommandError("separable potential needs a 'radial' block", EXIT_CONFIG)
        per = periodic_from(cfg)
        try:
            pot = StepRadialPotential(**spec["radial"])
            spec_set = separable_spectrum(pot, per)
        except (ValueError, TruncationError) as exc:
            raise CommandError(f"separable potential: {exc}", EXIT_HYPOTHESIS) from None
        return SeparablePotential(pot, per), spec_set.distance(0.0)
    raise CommandError(f"unknown field kind {kind!r}", EXIT_CONFIG)


def _constant_margin(v: float) -> float:
    # spectrum of -Delta + v on the symmetric subspace is [v, inf)
    return SpectrumSet.build(tail=v).distance(0.0)


def problem_from(cfg: dict, grid: CylGrid | None = None) -> Problem:
    sec = cfg["problem"]
    g = grid or CylGrid(**cfg["grid"])
    V, margin = _field_sampler(sec["potential"], cfg)
    if sec["potential"]["kind"] == "constant":
        margin = _constant_margin(V)
    gamma, _ = _field_sampler(sec["gamma"], cfg)
    return Problem(g, V, gamma, float(sec["p"]), sec["mode"], gap_margin=margin)


# -- commands -----------------------------------------------------------------

def cmd_bands(cfg: dict, require_gap: bool = False) -> dict:
    per = periodic_from(cfg)
    k = cfg["bands"].get("count", 8)
    bs = band_edges(per, k)
    out = _outdir(cfg)
    write_csv(out / "bands.csv", ["k", "nu_lo", "nu_hi"],
              [(i + 1, lo, hi) for i, (lo, hi) in enumerate(bs.bands)])
    gaps = [{"k": i + 1, "lo": lo, "hi": hi, "width": hi - lo, "open": hi - lo > 1e-9}
            for i, (lo, hi) in enumerate(bs.gaps)]
    report = {"edges": list(bs.edges), "gaps": gaps,
              "first_gap_open": bool(gaps and gaps[0]["open"])}
    write_json(out / "bands_report.json", report)
    if (require_gap or cfg["bands"].get("require_gap", False)) and not report["first_gap_open"]:
        raise CommandError(f"first gap closed: nu_2={bs.nu(2)!r}, nu_3={bs.nu(3)!r}",
                           EXIT_HYPOTHESIS)
    return report


def cmd_design(cfg: dict) -> dict:
    per, winf, pot, cert = _design(cfg)
    sec = cfg["radial_design"]
    doc = {
        "periodic": per.to_dict(),
        "radial": pot.to_dict(),
        "winf": winf,
        "eta": sec["eta"],
        "mu0_fraction": sec["mu0_fraction"],
        "certificate": cert.to_dict(),
    }
    out = _outdir(cfg)
    write_json(out / "design.json", doc)
    write_json(out / "certificate.json", cert.to_dict())
    return doc


def curve_samples(pot: StepRadialPotential, samples: int):
    """``(mu, g, h)`` on the open interval ``(w0, winf)``; ``g`` is None at poles."""
    rows = []
    width = pot.winf - pot.w0
    for k in range(samples):
        mu = pot.w0 + (k + 0.5) * width / samples
        try:
            g = matching_g(pot, mu)
        except PoleError:
            g = None
        rows.append((mu, g, matching_h(pot, mu)))
    return rows


def cmd_curves(cfg: dict) -> dict:
    try:
        pot = StepRadialPotential(**cfg["radial"])
    except ValueError as exc:
        raise CommandError(f"radial potential: {exc}", EXIT_CONFIG) from None
    n = cfg["curves"].get("samples", 2000)
    rows = curve_samples(pot, n)
    out = _outdir(cfg)
    write_csv(out / "curves.csv", ["mu", "g", "h"], rows)
    jp = special.j1_prime_zeros(3)
    jz = special.j1_zeros(3)
    d2 = pot.delta ** 2
    poles = [pot.w0 + x * x / d2 for x in jp if pot.w0 + x * x / d2 < pot.winf]
    zeros = [pot.w0 + x * x / d2 for x in jz if pot.w0 + x * x / d2 < pot.winf]
    report = {"radial": pot.to_dict(), "samples": n, "poles": poles, "zeros": zeros}
    try:
        report["eigenvalue"] = radial_eigenvalue(pot)
    except NoRootError as exc:
        report["eigenvalue"] = None
        report["eigenvalue_error"] = str(exc)
    write_json(out / "curves_report.json", report)
    return report


def cmd_spectrum(cfg: dict, design_path: str | None = None) -> dict:
    if design_path is not None:
        doc = json.loads(Path(design_path).read_text(encoding="utf-8"))
        per = PiecewisePotential1D(doc["periodic"]["breakpoints"], doc["periodic"]["values"])
        pot = StepRadialPotential(**doc["radial"])
    else:
        per, _, pot, _ = _design(cfg)
    try:
        total = separable_spectrum(pot, per, cfg.get("bands", {}).get("count", 8))
    except (NoRootError, TruncationError) as exc:
        raise CommandError(f"spectrum: {exc}", EXIT_HYPOTHESIS) from None
    bands = band_edges(per, 2)
    mu0 = radial_eigenvalue(pot)
    construction = {"nu1": bands.nu(1), "nu2": bands.nu(2), "nu3": bands.nu(3),
                    "mu0": mu0, "winf": pot.winf}
    cert = gap_margin(total, 0.0, construction)
    cert_doc = cert.to_dict()
    cert_doc["positivity"] = positivity_report(per, pot.winf, bands.nu(1))
    doc = {"spectrum": total.to_dict(), "margin": cert.margin, "certificate": cert_doc}
    write_json(_outdir(cfg) / "spectrum.json", doc)
    return doc


def cmd_groundstate(cfg: dict) -> dict:
    prob = problem_from(cfg)
    solver = cfg["solver"]
    result = _solve(prob, solver)
    doc = result.to_dict()
    doc["grid"] = prob.grid.to_dict()
    doc["p"] = prob.p
    if solver.get("sensitivity", False):
        big = problem_from(cfg, prob.grid.scaled(1.5))
        other = _solve(big, solver)
        doc["sensitivity"] = {
            "domain_factor": 1.5,
            "energy": other.energy,
            "relative_energy_change": abs(other.energy - result.energy) / max(abs(result.energy),
                                                                              1e-300),
        }
    out = _outdir(cfg)
    write_field_csv(result.u, out / "field.csv")
    write_json(out / "result.json", doc)
    return doc


def _solve(prob: Problem, solver: dict):
    try:
        if prob.mode == "focusing":
            return solve_focusing(prob, tol=solver.get("tol", 1e-8),
                                  max_iter=solver.get("max_iter", 2000),
                                  n_random=solver.get("starts", 8), seed=solver.get("seed", 0),
                                  k_neg_max=solver.get("k_neg_max", 16))
        return solve_defocusing(prob, tol_g=solver.get("tol", 1e-8),
                                max_iter=solver.get("max_iter", 5000))
    except HypothesisError as exc:
        raise CommandError(f"hypothesis violated: {exc}", EXIT_HYPOTHESIS) from None
    except (ConvergenceError, EigenConvergenceError) as exc:
        raise CommandError(f"did not converge: {exc}", EXIT_NONCONVERGENCE) from None


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curlgap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", help="JSON run configuration")
    common.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config entry (dotted key)")
    common.add_argument("-o", "--output-dir", help="shorthand for --set output_dir=...")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("bands", parents=[common], help="band edges of the periodic potential")
    p.add_argument("--require-gap", action="store_true", help="exit 2 if the first gap is closed")
    sub.add_parser("design", parents=[common], help="design a step well with a gap at 0")
    sub.add_parser("curves", parents=[common], help="sample the matching functions g and h")
    p = sub.add_parser("spectrum", parents=[common], help="assembled spectrum and margin at 0")
    p.add_argument("--design", help="design.json written by the design command")
    sub.add_parser("groundstate", parents=[common], help="compute a ground state")
    return parser


def _thread_limit():
    raw = os.environ.get("CURLGAP_THREADS")
    if not raw:
        return contextlib.nullcontext()
    try:
        n = int(raw)
    except ValueError:
        raise CommandError(f"CURLGAP_THREADS must be an integer, got {raw!r}", EXIT_CONFIG)
    if n < 1:
        raise CommandError("CURLGAP_THREADS must be >= 1", EXIT_CONFIG)
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=n)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = list(args.overrides)
    if args.output_dir:
        overrides.append(f"output_dir={json.dumps(args.output_dir)}")
    try:
        cfg = load_config(args.config, overrides, args.command)
        with _thread_limit():
            if args.command == "bands":
                result = cmd_bands(cfg, args.require_gap)
            elif args.command == "design":
                result = cmd_design(cfg)
            elif args.command == "curves":
                result = cmd_curves(cfg)
            elif args.command == "spectrum":
                result = cmd_spectrum(cfg, args.design)
            else:
                result = cmd_groundstate(cfg)
    except ConfigError as exc:
        print(f"curlgap: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CommandError as exc:
        print(f"curlgap: {exc}", file=sys.stderr)
        return exc.code
    except BandConvergenceError as exc:
        print(f"curlgap: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    print(json.dumps(_summary(args.command, result), ensure_ascii=False))
    return EXIT_OK


def _summary(command: str, result: dict) -> dict:
    if command == "groundstate":
        return {k: result[k] for k in ("mode", "energy", "relative_el_residual",
                                       "nehari_identity_residual", "nontrivial", "converged")}
    if command == "spectrum":
        return {"margin": result["margin"], "spectrum": result["spectrum"]}
    if command == "design":
        return {"radial": result["radial"], "margin": result["certificate"]["margin"]}
    return result
