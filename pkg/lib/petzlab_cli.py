"""
petzlab CLI implementation

Command structure:
- petzlab campaign        # Seeded sampling campaign over any checks
- petzlab hunt            # Conjecture-only campaign with refinement
- petzlab typicality      # Typical-mass / shell-count sweep over n
- petzlab petz-optimize   # Rotated-Petz witness search on sampled channels
- petzlab lemmas          # Fidelity lemma suite
- petzlab checks          # List every check and its status

Every option can also be set through the environment as
PETZLAB_<COMMAND>_<OPTION> (e.g. PETZLAB_CAMPAIGN_SEED).

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 a proved statement was
reported violated.
"""

import json
import sys
from pathlib import Path
from typing import Optional

import click
import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from observability import get_config, init_observability  # noqa: E402
from petzlab import __version__  # noqa: E402
from petzlab.campaign import (  # noqa: E402
    SWEEP_COLUMNS,
    CampaignConfig,
    hunt as run_hunt,
    optimize_samples,
    run_campaign,
    typicality_sweep,
    write_sweep_csv,
)
from petzlab.errors import EXIT_USAGE, InvalidConfig, PetzlabError  # noqa: E402
from petzlab.inequalities import CHECKS, CONJECTURES, InequalityId, status_of  # noqa: E402
from petzlab.inequalities.instances import FAMILIES  # noqa: E402
from petzlab.recovery import OptimizerBudget  # noqa: E402

ENV_PREFIX = "PETZLAB"

LEMMA_CHECKS = {
    "B2": InequalityId.LEMMA_B2.value,
    "B6": InequalityId.LEMMA_B6.value,
    "B7": InequalityId.LEMMA_B7.value,
}


class PetzlabGroup(click.Group):
    """Click group mapping usage errors to exit 1 and PetzlabError to its exit code."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        extra.setdefault("auto_envvar_prefix", ENV_PREFIX)
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.exceptions.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_USAGE)
        except click.ClickException as e:
            e.show()
            sys.exit(EXIT_USAGE)
        except PetzlabError as e:
            click.echo(f"Error: {e.message}", err=True)
            if e.context:
                click.echo(json.dumps(e.to_dict(), default=str), err=True)
            sys.exit(e.exit_code)
        if not standalone_mode:
            return rv
        sys.exit(rv if isinstance(rv, int) else 0)


def _int_list(ctx, param, value) -> Optional[list[int]]:
    if value is None:
        return None
    try:
        return [int(part) for part in str(value).split(",") if part.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}") from None


def _operator(value: str, name: str) -> np.ndarray:
    """A .npy file, or comma-separated diagonal entries."""
    if value.endswith(".npy"):
        try:
            return np.load(value)
        except OSError as e:
            raise click.BadParameter(f"cannot read {value}: {e}", param_hint=name) from None
    try:
        return np.diag([float(part) for part in value.split(",")])
    except ValueError:
        raise click.BadParameter(f"expected a .npy path or comma-separated numbers, got {value!r}", param_hint=name) from None


def campaign_options(default_checks: str):
    """Options shared by the sampling commands."""

    def decorator(func):
        options = [
            click.option("--checks", default=default_checks, show_default=True,
                         help="Comma-separated inequality ids, or 'all'"),
            click.option("--seed", type=int, default=0, show_default=True, help="Master seed"),
            click.option("--samples", type=int, default=1, show_default=True, help="Samples per check"),
            click.option("--dims", default="2,2,2", show_default=True, callback=_int_list,
                         help="Per-factor dimensions"),
            click.option("--family", type=click.Choice(list(FAMILIES)), default="random", show_default=True),
            click.option("--budget-restarts", type=int, default=None, help="Optimizer restarts"),
            click.option("--budget-iters", type=int, default=None, help="Optimizer iterations per restart"),
            click.option("--tolerance-scale", type=float, default=1.0, show_default=True,
                         help="Multiplier for psd/support tolerances"),
            click.option("--out", "out", default="petzlab-out", show_default=True, help="Output directory"),
            click.option("--store", default=None, help="Counterexample store (JSON lines)"),
            click.option("--jobs", type=int, default=None, help="Worker processes (default: CPU count)"),
            click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text"),
        ]
        for option in reversed(options):
            func = option(func)
        return func

    return decorator


def _budget(restarts: Optional[int], iters: Optional[int]) -> OptimizerBudget:
    base = OptimizerBudget.from_config()
    return OptimizerBudget(
        restarts=base.restarts if restarts is None else restarts,
        iterations=base.iterations if iters is None else iters,
        fd_step=base.fd_step,
    )


def _config(checks, seed, samples, dims, family, budget_restarts, budget_iters, tolerance_scale, out, store, jobs) -> CampaignConfig:
    return CampaignConfig(
        master_seed=seed,
        checks=[c.strip() for c in checks.split(",") if c.strip()],
        samples=samples,
        dims=dims,
        family=family,
        budget=_budget(budget_restarts, budget_iters),
        tolerance_scale=tolerance_scale,
        output_path=out,
        store_path=store,
        jobs=jobs,
    )


def _echo_summary(summary, fmt: str) -> None:
    if fmt == "json":
        click.echo(json.dumps(summary.to_dict(), indent=2, default=str))
        return
    click.echo(f"{'check':<22} {'holds':>7} {'violated':>9} {'inconcl.':>9} {'min gap':>12} {'cert.':>7}")
    for row in summary.rows():
        min_gap = f"{float(row['min_gap']):.3e}" if row["min_gap"] != "" else "-"
        rate = f"{float(row['certification_rate']):.2f}" if row["certification_rate"] != "" else "-"
        click.echo(
            f"{row['inequality_id']:<22} {row['holds']:>7} {row['violated']:>9} "
            f"{row['inconclusive']:>9} {min_gap:>12} {rate:>7}"
        )
    click.echo(f"\nCandidates persisted: {len(summary.candidates)}")
    click.echo(f"Wall time: {summary.wall_time:.2f}s")


@click.group(cls=PetzlabGroup)
@click.version_option(version=__version__, prog_name="petzlab")
def cli():
    """
    petzlab - numerical checks of recoverability refinements

    \b
    Quick Start:
      petzlab checks                          # List every check
      petzlab campaign --checks ssa --samples 100
      petzlab hunt --checks bures_1 --samples 1000
      petzlab typicality --rho 0.75,0.25 --sigma 0.75,0.25 --n 25,50,100,200

    Outputs: <out>/details.jsonl (one report per line) and <out>/summary.csv.
    """
    issues = get_config().validate()
    if issues:
        raise InvalidConfig("Invalid PETZLAB_* logging settings", issues=issues)
    init_observability()


@cli.command()
@campaign_options("all")
def campaign(checks, seed, samples, dims, family, budget_restarts, budget_iters, tolerance_scale, out, store, jobs, fmt):
    """Run a seeded sampling campaign.

    \b
    Examples:
      petzlab campaign --checks ssa,mono_pt --samples 100 --dims 2,2,2
      petzlab campaign --checks all --family markov --jobs 4
    """
    config = _config(checks, seed, samples, dims, family, budget_restarts, budget_iters, tolerance_scale, out, store, jobs)
    _echo_summary(run_campaign(config), fmt)


@cli.command()
@campaign_options(",".join(sorted(i.value for i in CONJECTURES)))
def hunt(checks, seed, samples, dims, family, budget_restarts, budget_iters, tolerance_scale, out, store, jobs, fmt):
    """Search for counterexamples to the open remainder statements.

    Every violated verdict is re-evaluated at tightened tolerances and
    extended precision before it is persisted.

    \b
    Examples:
      petzlab hunt --checks bures_1 --samples 10000 --dims 2,2,2
    """
    config = _config(checks, seed, samples, dims, family, budget_restarts, budget_iters, tolerance_scale, out, store, jobs)
    summary = run_hunt(config)
    _echo_summary(summary, fmt)
    for candidate in summary.candidates:
        click.echo(f"  candidate {candidate['inequality_id']} sample {candidate['sample_index']} gap {candidate['gap']}")


@cli.command()
@click.option("--rho", required=True, help="Diagonal entries (comma-separated) or a .npy file")
@click.option("--sigma", required=True, help="Diagonal entries (comma-separated) or a .npy file")
@click.option("--delta", type=float, default=0.1, show_default=True)
@click.option("--n", "n_list", default="1,10,25,50,100,200", show_default=True, callback=_int_list,
              help="Comma-separated block lengths")
@click.option("--exact/--dense", default=None, help="Force the exact (type-class) or dense path")
@click.option("--out", "out", type=click.Path(dir_okay=False), default=None, help="CSV file (default: stdout)")
def typicality(rho, sigma, delta, n_list, exact, out):
    """Typical mass, shell count and Hoeffding bound for each n.

    \b
    Examples:
      petzlab typicality --rho 0.75,0.25 --sigma 0.75,0.25 --delta 0.1 --n 25,50,100,200 --exact
    """
    rows = typicality_sweep(_operator(rho, "--rho"), _operator(sigma, "--sigma"), delta, n_list, exact=exact)
    if out:
        write_sweep_csv(rows, out)
        click.echo(f"Wrote {len(rows)} rows to {out}")
        return
    click.echo(",".join(SWEEP_COLUMNS))
    for row in rows:
        click.echo(f"{row.n},{row.typical_mass!r},{row.shell_count},{row.window_count},{row.hoeffding_bound!r},{row.path}")


@cli.command("petz-optimize")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--samples", type=int, default=1, show_default=True)
@click.option("--dims", default="2,2", show_default=True, callback=_int_list, help="Channel input,output dimensions")
@click.option("--family", type=click.Choice(list(FAMILIES)), default="random", show_default=True)
@click.option("--budget-restarts", type=int, default=None)
@click.option("--budget-iters", type=int, default=None)
def petz_optimize(seed, samples, dims, family, budget_restarts, budget_iters):
    """Search rotating unitaries for sampled channel instances.

    Prints one JSON report per sample.

    \b
    Examples:
      petzlab petz-optimize --samples 5 --dims 2,2 --budget-restarts 5
    """
    for report in optimize_samples(seed, samples, dims, family, _budget(budget_restarts, budget_iters)):
        click.echo(json.dumps(report.to_dict()))


@cli.command()
@click.option("--lemma", "lemma_names", type=click.Choice(sorted(LEMMA_CHECKS)), multiple=True,
              help="Lemma to check (repeatable; default all)")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--samples", type=int, default=100, show_default=True)
@click.option("--dims", default="3", show_default=True, callback=_int_list)
@click.option("--family", type=click.Choice(list(FAMILIES)), default="random", show_default=True)
@click.option("--out", "out", default="petzlab-out", show_default=True)
@click.option("--jobs", type=int, default=None)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def lemmas(lemma_names, seed, samples, dims, family, out, jobs, fmt):
    """Evaluate the fidelity lemmas on sampled nonnegative operators.

    \b
    Examples:
      petzlab lemmas --samples 1000 --dims 4
      petzlab lemmas --lemma B6 --samples 100
    """
    names = lemma_names or tuple(sorted(LEMMA_CHECKS))
    config = CampaignConfig(
        master_seed=seed,
        checks=[LEMMA_CHECKS[name] for name in names],
        samples=samples,
        dims=dims,
        family=family,
        output_path=out,
        jobs=jobs,
    )
    _echo_summary(run_campaign(config), fmt)


@cli.command()
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def checks(fmt):
    """List every inequality id with its status (proved, conjecture or diagnostic)."""
    entries = [
        {
            "inequality_id": spec.inequality_id.value,
            "status": status_of(spec.inequality_id),
            "instance": spec.kind.value,
            "description": spec.description,
        }
        for spec in CHECKS.values()
    ]
    if fmt == "json":
        click.echo(json.dumps({"schema_version": "1.0", "checks": entries}, indent=2))
        return
    for entry in entries:
        click.echo(f"  {entry['inequality_id']:<22} {entry['status']:<11} {entry['instance']:<11} {entry['description']}")


def main() -> None:
    cli(prog_name="petzlab")


if __name__ == "__main__":
    main()
