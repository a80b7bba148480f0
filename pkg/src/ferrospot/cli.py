"""Command-line front end.

Exit codes: 0 success, 1 solver error, 2 no bifurcation, 3 condition
violation, 64 usage or parse error.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Iterable, Optional, Sequence

import click
import numpy as np

from . import __version__
from .coeffs import ConditionError, ResonanceError, classify_grid, compute_coeffs
from .envelope import CacheError, EnvelopeError, load_or_solve, rescale
from .profiles import ConfigurationError, PatternKind, PatternRequest, build_profile, profile_pieces
from .spectrum import (
    FerrofluidParams,
    SpectrumError,
    hopf_locus,
    locus_residual,
    m0_from_mu,
    real_spectrum,
)
from .verify import VerifyConfig, run_all

CONFIG_ENV = "FERROSPOT_CONFIG"
CACHE_ENV = "FERROSPOT_ENVELOPE_CACHE"

EXIT_SOLVER = 1
EXIT_NO_BIFURCATION = 2
EXIT_CONDITION = 3
EXIT_USAGE = 64


class CliFailure(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class RunConfig:
    rtol: float = 1e-10
    atol: float = 1e-12
    envelope_points: int = 2000
    r0_factor: float = 20.0
    delta0: float = 0.2
    delta1: float = 0.1
    delta2: float = 0.1
    envelope_cache: Optional[str] = None
    format: str = "csv"
    workers: int = 1

    def __post_init__(self) -> None:
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("tolerances must be positive")
        for name in ("delta0", "delta1", "delta2"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie in (0, 1)")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be csv or json")
        if self.envelope_points < 10 or self.workers < 1 or self.r0_factor <= 0:
            raise ValueError("grid sizes, workers and r0_factor must be positive")


def load_config(path: Optional[str] = None) -> RunConfig:
    """Defaults, then the JSON file named by ``path`` or $FERROSPOT_CONFIG."""
    path = path or os.environ.get(CONFIG_ENV)
    base: dict[str, Any] = {}
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                base = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CliFailure(f"cannot read config {path}: {exc}", EXIT_USAGE) from exc
        known = {f.name for f in fields(RunConfig)}
        unknown = set(base) - known
        if unknown:
            raise CliFailure(f"unknown config keys: {sorted(unknown)}", EXIT_USAGE)
    if "envelope_cache" not in base and os.environ.get(CACHE_ENV):
        base["envelope_cache"] = os.environ[CACHE_ENV]
    try:
        return RunConfig(**base)
    except (TypeError, ValueError) as exc:
        raise CliFailure(f"invalid config: {exc}", EXIT_USAGE) from exc


def fmt(x: Any) -> str:
    """17 significant digits for floats; everything else via str."""
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if x is None:
        return ""
    return str(x)


def _jsonable(x: Any) -> Any:
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def emit(header: dict[str, Any], columns: Sequence[str], rows: Iterable[Sequence[Any]], fmt_kind: str) -> None:
    rows = [list(r) for r in rows]
    if fmt_kind == "json":
        doc = {"meta": _jsonable(header), "columns": list(columns),
               "rows": [_jsonable(r) for r in rows]}
        click.echo(json.dumps(doc, indent=1, sort_keys=True))
        return
    buf = io.StringIO()
    for key in header:
        buf.write(f"# {key}={fmt(header[key])}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([fmt(v) for v in r])
    click.echo(buf.getvalue(), nl=False)


def _params(D: float, M0: float) -> FerrofluidParams:
    if not (D > 0 and 0 < M0 < 1):
        raise CliFailure("need D > 0 and 0 < M0 < 1", EXIT_USAGE)
    p = FerrofluidParams.from_physical(D, M0)
    if p is None:
        raise CliFailure(f"no Hamiltonian-Hopf point for D={fmt(D)}, M0={fmt(M0)}", EXIT_NO_BIFURCATION)
    return p


@click.group()
@click.version_option(__version__)
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help=f"JSON config file (default: ${CONFIG_ENV}).")
@click.option("--format", "out_format", type=click.Choice(["csv", "json"]), default=None)
@click.pass_context
def cli(ctx: click.Context, config_path: Optional[str], out_format: Optional[str]) -> None:
    """Localized ferrofluid surface patterns: spectra, coefficients, profiles."""
    cfg = load_config(config_path)
    if out_format:
        cfg = replace(cfg, format=out_format)
    ctx.obj = cfg


@cli.command()
@click.option("--D", "D", type=float, required=True, help="Scaled layer depth.")
@click.option("--mu", type=float, default=None, help="Permeability ratio (> 1).")
@click.option("--M0", "M0", type=float, default=None, help="Alternative to --mu.")
@click.option("--nmax", type=click.IntRange(1, 500), default=10)
@click.pass_obj
def spectrum(cfg: RunConfig, D: float, mu: Optional[float], M0: Optional[float], nmax: int) -> None:
    """Real eigenvalue ladder at the Hamiltonian-Hopf point."""
    if (mu is None) == (M0 is None):
        raise CliFailure("give exactly one of --mu and --M0", EXIT_USAGE)
    if mu is not None:
        if not mu > 1.0:
            raise CliFailure("mu must exceed 1", EXIT_USAGE)
        M0 = m0_from_mu(mu)
    if not D > 0:
        raise CliFailure("D must be positive", EXIT_USAGE)
    if not 0.0 < M0 < 1.0:
        raise CliFailure("M0 must lie in (0, 1)", EXIT_USAGE)
    p = _params(D, M0)
    kd = p.kD
    res = real_spectrum(p, nmax)
    rows = [(i + 1, lam, src.value, j) for i, (lam, src, j)
            in enumerate(zip(res.lambdas, res.sources, res.branch_index))]
    emit({"D": D, "M0": M0, "kD": kd}, ["n", "lambda", "source", "branch"], rows, cfg.format)


@cli.command()
@click.option("--kd", "kds", type=float, multiple=True, required=True, help="Repeatable.")
@click.pass_obj
def locus(cfg: RunConfig, kds: tuple[float, ...]) -> None:
    """Hopf locus (upsilon_H, calM_H) with its double-root residuals."""
    rows = []
    for kd in kds:
        if not kd > 0:
            raise CliFailure("kD must be positive", EXIT_USAGE)
        ups, cal_m = hopf_locus(kd)
        f, df = locus_residual(kd, kd)
        rows.append((kd, ups, cal_m, f, df))
    emit({}, ["kD", "upsilon_H", "calM_H", "f", "df"], rows, cfg.format)


@cli.command()
@click.option("--D", "D", type=float, required=True)
@click.option("--M0", "M0", type=float, required=True)
@click.pass_obj
def coeffs(cfg: RunConfig, D: float, M0: float) -> None:
    """Normal-form coefficients at the physical point (D, M0)."""
    c = compute_coeffs(_params(D, M0))
    d = asdict(c)
    emit({}, list(d), [list(d.values())], cfg.format)


def _parse_grid(spec: str) -> tuple[int, int]:
    try:
        n, m = (int(v) for v in spec.lower().split("x"))
    except ValueError as exc:
        raise CliFailure(f"grid must look like NxM, got {spec!r}", EXIT_USAGE) from exc
    if n < 1 or m < 1:
        raise CliFailure("grid sizes must be positive", EXIT_USAGE)
    return n, m


@cli.command()
@click.option("--Dmin", "dmin", type=float, default=0.5)
@click.option("--Dmax", "dmax", type=float, default=20.0)
@click.option("--M0min", "m0min", type=float, default=0.05)
@click.option("--M0max", "m0max", type=float, default=0.95)
@click.option("--grid", "grid", default="50x50", help="ND x NM points.")
@click.option("--workers", type=int, default=None)
@click.pass_obj
def classify(cfg: RunConfig, dmin: float, dmax: float, m0min: float, m0max: float, grid: str,
             workers: Optional[int]) -> None:
    """Region map over a (D, M0) grid, one row per point."""
    nd, nm = _parse_grid(grid)
    if not (0 < dmin <= dmax and 0 < m0min <= m0max < 1):
        raise CliFailure("need 0 < Dmin <= Dmax and 0 < M0min <= M0max < 1", EXIT_USAGE)
    d_vals = np.linspace(dmin, dmax, nd) if nd > 1 else np.array([dmin])
    m_vals = np.linspace(m0min, m0max, nm) if nm > 1 else np.array([m0min])
    out = classify_grid(d_vals, m_vals, workers=workers or cfg.workers)
    rows = []
    for rc in out:
        c = rc.coeffs
        rows.append((rc.D, rc.M0, rc.kD, c.nu if c else None, c.c3 if c else None,
                     "|".join(sorted(p.value for p in rc.patterns)),
                     "|".join(sorted(f.value for f in rc.flags)), rc.label))
    emit({}, ["D", "M0", "kD", "nu", "c3", "patterns", "flags", "label"], rows, cfg.format)


@cli.command()
@click.option("--c0", type=float, default=1.0)
@click.option("--c3", type=float, default=-1.0)
@click.option("--npts", type=click.IntRange(2, 10 ** 6), default=200)
@click.pass_obj
def envelope(cfg: RunConfig, c0: float, c3: float, npts: int) -> None:
    """Envelope samples (s, q, p) with q0 and q+ in the header."""
    if not c0 > 0:
        raise CliFailure("c0 must be positive", EXIT_CONDITION)
    if not c3 < 0:
        raise CliFailure("c3 >= 0: no bounded nontrivial envelope", EXIT_CONDITION)
    canon = load_or_solve(cfg.envelope_cache, n=cfg.envelope_points)
    env = canon if (c0, c3) == (1.0, -1.0) else rescale(canon, c0, c3)
    s = np.linspace(env.s[0], env.s_max, npts)
    rows = zip(s, env.q_of(s), env.p_of(s))
    emit({"c0": c0, "c3": c3, "q0": env.q0, "qplus": env.qplus}, ["s", "q", "p"], rows, cfg.format)


_PATTERN_NAMES = {k.value.lower(): k for k in PatternKind}


@cli.command()
@click.option("--pattern", required=True, help="spotA, spotAFold, spotBDown, spotBUp, ringUp, ringDown.")
@click.option("--eps", type=float, required=True)
@click.option("--D", "D", type=float, required=True)
@click.option("--M0", "M0", type=float, required=True)
@click.option("--rmax", type=float, default=None)
@click.option("--npts", type=click.IntRange(2, 10 ** 7), default=4000)
@click.pass_obj
def profile(cfg: RunConfig, pattern: str, eps: float, D: float, M0: float, rmax: Optional[float],
            npts: int) -> None:
    """Leading-order surface profile eta(r) with region tags."""
    kind = _PATTERN_NAMES.get(pattern.lower())
    if kind is None:
        raise CliFailure(f"unknown pattern {pattern!r}", EXIT_USAGE)
    if not 0 < eps < 1:
        raise CliFailure("eps must lie in (0, 1)", EXIT_USAGE)
    p = _params(D, M0)
    base = PatternRequest(kind, p, eps, r0=cfg.r0_factor / p.k, delta0=cfg.delta0, delta1=cfg.delta1,
                          delta2=cfg.delta2)
    r_end = rmax if rmax is not None else 3.0 * cfg.delta0 / math.sqrt(eps)
    # the fold profile stops at the core edge
    r_end = min(r_end, profile_pieces(base)[-1].hi)
    req = replace(base, r_grid=tuple(np.linspace(0.0, r_end, npts)))
    prof = build_profile(req)
    header = {**prof.meta, "d1": prof.amplitudes.d1, "d2": prof.amplitudes.d2,
              "pattern": kind.value, "provenance": prof.provenance}
    emit(header, ["r", "eta", "region"], zip(prof.r, prof.eta, prof.region), cfg.format)


@cli.command()
@click.option("--D", "D", type=float, default=1.0)
@click.option("--M0", "M0", type=float, default=0.6)
@click.option("--no-controls", is_flag=True, help="Skip the negative controls.")
@click.option("--core-tol", type=float, default=None, help="Override the core ODE tolerance.")
@click.pass_obj
def verify(cfg: RunConfig, D: float, M0: float, no_controls: bool, core_tol: Optional[float]) -> None:
    """Run the verification suite; JSON report, exit 0 iff everything passes."""
    vcfg = VerifyConfig() if core_tol is None else VerifyConfig(core_tol=core_tol)
    summary = run_all(_params(D, M0), with_controls=not no_controls, workers=max(cfg.workers, 4),
                      config=vcfg)
    click.echo(summary.to_json())
    if not summary.passed:
        raise CliFailure("verification failed", EXIT_SOLVER)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        rv = cli.main(args=list(argv) if argv is not None else None, prog_name="ferrospot",
                      standalone_mode=False)
        return rv if isinstance(rv, int) else 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.Abort:
        click.echo("aborted", err=True)
        return EXIT_SOLVER
    except CliFailure as exc:
        if exc.code != 0 and str(exc) != "verification failed":
            click.echo(f"error: {exc}", err=True)
        return exc.code
    except (ConditionError, ConfigurationError) as exc:
        click.echo(f"condition violated: {exc}", err=True)
        return EXIT_CONDITION
    except (SpectrumError, EnvelopeError, CacheError, ResonanceError, ArithmeticError) as exc:
        click.echo(f"solver error: {type(exc).__name__}: {exc}", err=True)
        return EXIT_SOLVER
    except ValueError as exc:
        click.echo(f"invalid input: {exc}", err=True)
        return EXIT_USAGE


def run() -> None:
    sys.exit(main())
