"""growthlab command line.

Generator sets are given with ``--gens`` as a JSON file path or the name of a
bundled fixture (sl2_st, solvable_2, unipotent_t, identity_2, upper3_zhalf).
Exit status is 0 only when every asserted invariant holds.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from growthlab.cayley import DEFAULT_BUDGET, enumerate_ball
from growthlab.finitegrp import (
    DEFAULT_GROUP_CAP,
    CapExceededError,
    InadmissiblePrimeError,
    is_injective_mod_p,
    slm_order,
    surjectivity_radius,
    value_census,
)
from growthlab.growth import KINDS, classify_growth, count_series, estimate_rate
from growthlab.harness.genset_io import GensetError, census_csv, dump_json, load_genset
from growthlab.harness.pipeline import (
    ExperimentManifest,
    run_pipeline,
    strip_timings,
    trichotomy_report,
    verify_run,
)
from growthlab.primesieve import prime_count, primes_in

SERIES_HELP = "Series CSV columns: radius,count,kind,gens_digest."
CENSUS_HELP = "Census CSV columns: value,count (charpoly values are space-separated coefficients)."


def _window(value: str | None):
    if value is None:
        return None
    try:
        lo, hi = (int(x) for x in value.split(":"))
    except ValueError:
        raise click.BadParameter("expected LO:HI") from None
    return lo, hi


def _gens(ref):
    try:
        return load_genset(ref)
    except GensetError as exc:
        click.echo(f"error [{exc.code}]: {exc}", err=True)
        sys.exit(exc.exit_code)


def _emit(obj) -> None:
    click.echo(json.dumps(obj, indent=2, sort_keys=True))


def _out_dir(out: str | None) -> Path | None:
    if out is None:
        return None
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


gens_opt = click.option("--gens", required=True, help="Generator JSON file or bundled fixture name.")
radius_opt = click.option("--radius", type=int, default=8, show_default=True)
budget_opt = click.option("--budget", type=int, default=DEFAULT_BUDGET, show_default=True,
                          help="Maximum number of ball elements.")
out_opt = click.option("--out", type=click.Path(file_okay=False), default=None, help="Output directory.")


@click.group()
def main():
    """Word, trace and characteristic-polynomial growth of matrix groups over Q."""


@main.command(help="Enumerate B(0..radius) and print |B(n)|.  " + SERIES_HELP)
@gens_opt
@radius_opt
@budget_opt
@out_opt
def ball(gens, radius, budget, out):
    g = _gens(gens)
    b = enumerate_ball(g, radius, budget)
    series = count_series(b, "element")
    if (path := _out_dir(out)) is not None:
        (path / f"{series.gens_digest}_element.csv").write_text(series.to_csv())
    _emit({"gens_digest": series.gens_digest, "counts": list(series.counts), "partial": b.partial})
    sys.exit(1 if b.partial else 0)


@main.command(help="Print a growth series as CSV.  " + SERIES_HELP)
@gens_opt
@radius_opt
@budget_opt
@click.option("--kind", type=click.Choice(KINDS), default="charpoly", show_default=True)
@out_opt
def series(gens, radius, budget, kind, out):
    b = enumerate_ball(_gens(gens), radius, budget)
    s = count_series(b, kind)
    if (path := _out_dir(out)) is not None:
        (path / f"{s.gens_digest}_{kind}.csv").write_text(s.to_csv())
    click.echo(s.to_csv(), nl=False)
    sys.exit(1 if b.partial else 0)


@main.command()
@gens_opt
@radius_opt
@budget_opt
@click.option("--kind", type=click.Choice(KINDS), default="charpoly", show_default=True)
@click.option("--window", "rate_window", default=None, help="Rate-fit window LO:HI (radii).")
def classify(gens, radius, budget, kind, rate_window):
    """Classify a series as bounded, polynomial or exponential."""
    b = enumerate_ball(_gens(gens), radius, budget)
    s = count_series(b, kind)
    cls = classify_growth(s)
    row = {"kind": kind, "counts": list(s.counts), "label": cls.label,
           "degree_estimate": cls.degree_estimate}
    if cls.rate_estimate is not None:
        row["rate"] = cls.rate_estimate.slope
    if rate_window:
        est = estimate_rate(s, _window(rate_window))
        row["window_rate"] = {"slope": est.slope, "window": list(est.window), "residual": est.residual}
    _emit(row)
    sys.exit(1 if b.partial else 0)


@main.group()
def primes():
    """Prime counting and prime windows."""


@primes.command("count")
@click.option("--x", "x", type=int, required=True)
def primes_count(x):
    n, ratio = prime_count(x)
    _emit({"x": x, "pi": n, "chebyshev_ratio": ratio})


@primes.command("window")
@click.option("--lo", type=int, default=None)
@click.option("--hi", type=int, default=None)
@click.option("--window", default=None, help="LO:HI, alternative to --lo/--hi.")
def primes_window(lo, hi, window):
    if window:
        lo, hi = _window(window)
    if lo is None or hi is None:
        raise click.UsageError("give --lo and --hi, or --window LO:HI")
    w = primes_in(lo, hi)
    _emit({"lo": w.lo, "hi": w.hi, "count": len(w), "primes": list(w.primes)})


@main.command(help="ModPReport for one prime.  " + CENSUS_HELP)
@gens_opt
@click.option("--prime", "p", type=int, required=True)
@click.option("--radius", type=int, default=None, help="Also check injectivity on B(radius).")
@click.option("--cap", type=int, default=DEFAULT_GROUP_CAP, show_default=True)
@out_opt
def modp(gens, p, radius, cap, out):
    g = _gens(gens)
    try:
        n_star, cl = surjectivity_radius(g, p, cap)
    except (InadmissiblePrimeError, CapExceededError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    tc = value_census(cl.group, "trace")
    cc = value_census(cl.group, "charpoly")
    report = {
        "schema": 1,
        "prime": p,
        "gens_digest": g.digest(),
        "group_order": cl.order,
        "sl_order": slm_order(g.dim, p) if g.dim >= 2 else 1,
        "surjectivity_radius": n_star,
        "image_ball_sizes": list(cl.ball_sizes),
        "census": {"distinct_traces": tc.distinct, "distinct_charpolys": cc.distinct,
                   "max_trace_level": tc.max_level},
    }
    ok = tc.total == cl.order
    if radius is not None:
        b = enumerate_ball(g, radius)
        report["injective_radius_checked"] = [radius, is_injective_mod_p(b, radius, p)]
    if (path := _out_dir(out)) is not None:
        stem = f"{g.digest()}_p{p}"
        dump_json(report, path / f"{stem}_modp.json")
        (path / f"{stem}_census_trace.csv").write_text(census_csv(tc))
        (path / f"{stem}_census_charpoly.csv").write_text(census_csv(cc))
    _emit(report)
    sys.exit(0 if ok else 1)


@main.command()
@click.option("--manifest", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Manifest JSON; command-line options override its fields.")
@click.option("--gens", default=None, help="Generator JSON file or bundled fixture name.")
@click.option("--radius", "k", type=int, default=None, help="Ball radius k for the injective prime.")
@click.option("--window", default=None, help="Prime window LO:HI.")
@click.option("--auto-window", is_flag=True, default=False, help="Derive the window from a fitted growth rate.")
@click.option("--budget", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", type=click.Path(file_okay=False), default=None)
def pipeline(manifest, gens, k, window, auto_window, budget, seed, out):
    """Run the six-stage trace-growth pipeline and persist every artifact."""
    fields = json.loads(Path(manifest).read_text()) if manifest else {}
    overrides = {"gens_file": gens, "k": k, "window": _window(window), "budget": budget,
                 "seed": seed, "out": out}
    fields.update({key: v for key, v in overrides.items() if v is not None})
    if auto_window:
        fields["auto_window"] = True
    if "gens_file" not in fields:
        raise click.UsageError("--gens or a manifest with gens_file is required")
    try:
        m = ExperimentManifest.from_json(fields)
        m.validate()
    except GensetError as exc:
        click.echo(f"error [{exc.code}]: {exc}", err=True)
        sys.exit(exc.exit_code)
    except (TypeError, ValueError) as exc:
        raise click.UsageError(str(exc)) from None
    report = run_pipeline(m)
    _emit(strip_timings(report.to_json()) | {"timings": report.timings})
    sys.exit(0 if report.passed else 1)


@main.command()
@click.option("--out", type=click.Path(exists=True, file_okay=False), required=True)
def verify(out):
    """Replay all checks of the pipeline run(s) stored in --out."""
    checks = verify_run(out)
    for name, ok, detail in checks:
        click.echo(f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else ""))
    sys.exit(0 if all(ok for _, ok, _ in checks) else 1)


@main.command()
@click.option("--gens", "gens_list", multiple=True, required=True,
              help="Repeatable; one table row per generator set.")
@radius_opt
@budget_opt
@out_opt
def report(gens_list, radius, budget, out):
    """Trichotomy table: growth class of element and charpoly series per generator set."""
    rows = []
    for ref in gens_list:
        _gens(ref)
        rows.append(trichotomy_report(ref, radius, budget))
    if (path := _out_dir(out)) is not None:
        dump_json({"schema": 1, "rows": rows}, path / "trichotomy.json")
    for r in rows:
        click.echo(
            f"{r['gens']:<14} n={r['radius_reached']:<3} element={r.get('element_class')!s:<12} "
            f"charpoly={r.get('charpoly_class')!s:<12} -> {r['label']}"
            + ("  [partial]" if r["partial"] else "")
        )
    sys.exit(0 if all(r["label"] not in (None, "inconsistent") and not r["partial"] for r in rows) else 1)


if __name__ == "__main__":
    main()
