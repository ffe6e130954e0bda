"""paradim command line: dimension, scan, special, cylinders.

Exit codes: 0 success, 2 solver failure, 3 invalid input.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import asdict

import click
import numpy as np

from .cache import ResultCache
from .config import load_settings
from .errors import DomainError, SolverError

EXIT_SOLVER = 2
EXIT_INPUT = 3


def _levels_for(level: int | None, settings):
    if level is None:
        return tuple(settings.pressure_levels)
    if level < 4:
        raise DomainError("--level must be at least 4")
    return tuple(n for n in (level - 6, level - 4, level - 2, level) if n >= 2)


def _emit(text: str, output):
    if output is None:
        click.echo(text, nl=False)
    else:
        with open(output, "w", newline="") as fh:
            fh.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="JSON or TOML file with solver settings.")
@click.option("--workers", type=click.IntRange(min=1), default=None,
              help="Worker threads (results do not depend on this).")
@click.option("--no-cache", is_flag=True, help="Skip the result cache.")
@click.pass_context
def cli(ctx, config_path, workers, no_cache):
    """Dimension of quadratic Julia sets near parabolic parameters."""
    ctx.obj = {
        "settings": load_settings(config_path),
        "workers": workers,
        "cache": ResultCache(enabled=not no_cache),
    }


# ---------------------------------------------------------------- dimension

def _dimension_payload(c, levels, method, settings, workers):
    from .pressure import bowen_dimension

    r = bowen_dimension(c, levels=levels, method=method, bracket=settings.bowen_bracket,
                        workers=workers)
    d = asdict(r)
    d["levels"] = list(r.levels)
    return d


@cli.command()
@click.option("--c", "c", type=float, required=True, help="Real parameter of z^2 + c.")
@click.option("--level", type=int, default=None, help="Deepest tree level.")
@click.option("--method", type=click.Choice(["preimage", "periodic", "both"]), default="preimage")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@click.pass_obj
def dimension(obj, c, level, method, fmt, output):
    """Hausdorff dimension of the Julia set at c."""
    settings = obj["settings"]
    levels = _levels_for(level, settings)
    methods = ["preimage", "periodic"] if method == "both" else [method]
    results = []
    for m in methods:
        params = {"c": repr(c), "levels": list(levels), "method": m,
                  "bracket": list(settings.bowen_bracket)}
        results.append(obj["cache"].memo(
            "dimension", params,
            lambda m=m: _dimension_payload(c, levels, m, settings, obj["workers"])))
    if fmt == "csv":
        rows = [(r["c"], r["method"], r["level"], r["dimension"], r["uncertainty"]) for r in results]
        _emit(_csv(("c", "method", "level", "dimension", "uncertainty"), rows), output)
        return
    if len(results) == 1:
        payload = results[0]
    else:
        payload = {"results": results,
                   "agreement": abs(results[0]["dimension"] - results[1]["dimension"])}
    _emit(_json(payload), output)


# ---------------------------------------------------------------- scan

@cli.command()
@click.option("--c0", type=float, required=True, help="Parabolic parameter.")
@click.option("--side", type=click.Choice(["left", "right"]), required=True)
@click.option("--decades", type=click.IntRange(min=1), default=None)
@click.option("--per-decade", type=click.IntRange(min=1), default=None)
@click.option("--start", type=float, default=None, help="Smallest |c - c0|.")
@click.option("--petals", type=click.IntRange(1, 2), default=None,
              help="Petal count, required for parameters other than -3/4, -5/4, 1/4.")
@click.option("--level", type=int, default=None)
@click.option("--method", type=click.Choice(["preimage", "periodic"]), default="preimage")
@click.option("--output", type=click.Path(dir_okay=False), default=None,
              help="CSV of (c, d, dprime); the fit summary goes to stdout.")
@click.pass_obj
def scan(obj, c0, side, decades, per_decade, start, petals, level, method, output):
    """Sample d'(c) toward c0 and fit the blow-up exponent."""
    from . import scan as scan_mod
    from .pressure import bowen_dimension

    settings = obj["settings"]
    grid = settings.scan_grid
    decades = decades or int(grid.get("decades", 2))
    per_decade = per_decade or int(grid.get("per_decade", 3))
    start = start or float(grid.get("start", 1e-4))
    levels = _levels_for(level, settings)
    if petals is None and c0 not in scan_mod.PETALS:
        raise DomainError("unknown parabolic parameter; pass --petals")
    params = {"c0": repr(c0), "side": side, "decades": decades, "per_decade": per_decade,
              "start": repr(start), "petals": petals, "levels": list(levels), "method": method}

    def dim_point(c):
        key = {"c": repr(c), "levels": list(levels), "method": method}
        return obj["cache"].memo(
            "dimension-point", key,
            lambda: bowen_dimension(c, levels=levels, method=method).dimension)

    def compute():
        res = scan_mod.derivative_scan(c0, side, decades, per_decade, start, levels, method,
                                       petals, obj["workers"], dimension_fn=dim_point)
        fit = res.fit
        return {
            "c0": c0, "side": side, "petals": res.petals, "d_limit": res.d_limit,
            "regime": res.regime, "predicted_exponent": res.predicted_exponent,
            "exponent": None if fit is None else fit.exponent,
            "amplitude": None if fit is None else fit.amplitude,
            "stderr": None if fit is None else (fit.stderr if math.isfinite(fit.stderr) else None),
            "r_squared": None if fit is None else fit.r_squared,
            "rows": [[r.c, r.dimension, r.dprime] for r in res.rows],
        }

    payload = obj["cache"].memo("scan", params, compute)
    if output is not None:
        _emit(_csv(("c", "d", "dprime"), payload["rows"]), output)
    summary = {k: v for k, v in payload.items() if k != "rows"}
    summary["samples"] = len(payload["rows"])
    summary["dprime_signs"] = sorted({int(np.sign(r[2])) for r in payload["rows"]})
    _emit(_json(summary), None)


# ---------------------------------------------------------------- special

@cli.command()
@click.argument("what", type=click.Choice(["gamma", "v", "lambda", "upsilon"]))
@click.option("--from", "lo", type=float, default=-5.0)
@click.option("--to", "hi", type=float, default=5.0)
@click.option("--points", type=click.IntRange(min=2), default=101)
@click.option("--h", "hs", type=float, multiple=True, help="Exponent(s) for lambda/upsilon.")
@click.option("--eps", type=float, default=0.0)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
def special(what, lo, hi, points, hs, eps, output):
    """Tables of the profile functions (CSV)."""
    from . import special as sp

    if what in ("gamma", "v"):
        rows = sp.gamma_table(lo, hi, points)
        _emit(_csv(("x", "gamma", "v"), rows), output)
    elif what == "lambda":
        h = hs[0] if hs else 1.0
        _emit(_csv(("u", "lambda"), sp.lambda_table(h, eps, lo, hi, points)), output)
    else:
        if not hs:
            raise DomainError("upsilon needs at least one --h")
        _emit(_csv(("h", "upsilon_plus", "upsilon_minus", "err_plus", "err_minus"),
                   sp.upsilon_table(hs)), output)


# ---------------------------------------------------------------- cylinders

_PERIODS = {-0.75: 1, -1.25: 2}


@cli.command()
@click.option("--c0", type=float, required=True)
@click.option("--k", type=click.IntRange(1, 2), default=None, help="Cycle period.")
@click.option("--delta", type=float, required=True, help="Multiplier offset lam + 1.")
@click.option("--n-max", type=click.IntRange(10, 100_000), default=2000)
@click.option("--output", type=click.Path(dir_okay=False), default=None,
              help="Chain CSV; the check summary goes to stdout.")
@click.pass_obj
def cylinders(obj, c0, k, delta, n_max, output):
    """Backward cylinder chain at the normal form with the given delta."""
    from . import cylinders as cy
    from .normal_form import form_for_delta

    if k is None:
        if c0 not in _PERIODS:
            raise DomainError("pass --k for this parabolic parameter")
        k = _PERIODS[c0]
    if abs(delta) >= 0.05:
        raise DomainError("|delta| must be below 0.05")
    nf = form_for_delta(c0, k, delta)
    chain = cy.backward_chain(nf, N=n_max)
    N = chain.N
    summary = {"c0": c0, "k": k, "delta": delta, "c": nf.c, "A": nf.A,
               "n_max": N, "complete": chain.complete}
    if N > 60:
        hi = min(5000, N - 1)
        ns = np.arange(50, hi + 1)
        sizes = chain.sizes[ns - 1]
        summary["size_slope"] = float(np.polyfit(np.log(ns), np.log(sizes), 1)[0])
        summary["size_slope_range"] = [50, int(hi)]
    lo, hi = 200, min(2000, N - 1)
    if hi > lo:
        r = [cy.size_height_ratio(nf, chain, n) for n in range(lo, hi + 1)]
        summary["size_height_ratio"] = [min(r), max(r)]
    if delta != 0 and N > 100:
        hi = min(800, N)
        summary["beta_gamma_residual_max"] = max(
            cy.beta_gamma_residual(nf, chain, n) for n in range(100, hi + 1))
        dev = []
        for n in range(100, hi + 1):
            _, pred = cy.re_ratio_predictions(nf, chain, n)
            dev.append(abs(cy.dsquare_re_ratio(nf, chain, n) - pred))
        summary["re_ratio_deviation_max"] = max(dev)
    if output is not None:
        cy.write_chain_csv(output, cy.chain_rows(nf, chain))
    _emit(_json(summary), None)


def main(argv=None):
    try:
        rv = cli.main(args=argv, standalone_mode=False, prog_name="paradim")
    except click.exceptions.Exit as e:
        sys.exit(e.exit_code)
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        sys.exit(1)
    except click.ClickException as e:
        e.show()
        sys.exit(EXIT_INPUT)
    except DomainError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_INPUT)
    except SolverError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_SOLVER)
    sys.exit(rv if isinstance(rv, int) else 0)


if __name__ == "__main__":
    main()
