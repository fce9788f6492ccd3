import json
import sys
from typing import Any, Dict, List, Optional

import click
import numpy as np
from aws_lambda_powertools import Logger

from chalicelib.modules.container import container
from chalicelib.modules.errors import HypocoercivityError, VerificationError
from chalicelib.modules.matrix_io import format_number, matrix_to_json, matrix_to_triplets, to_csv
from chalicelib.services.hermite_basis import MIN_BLOCK, VARIANTS
from chalicelib.services.operator_assembly import RELAXATIONS

logger = Logger()
# artifacts own stdout
logger.registered_handler.setStream(sys.stderr)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFICATION = 2

TWO_PI = 2 * np.pi


class CertificateToolGroup(click.Group):
    """Click group with the tool's exit statuses: 1 for usage errors, 2 for failed verification."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            status = super().main(args=args, prog_name=prog_name, complete_var=complete_var,
                                  standalone_mode=False, **extra)
        except click.ClickException as error:
            error.show()
            sys.exit(EXIT_USAGE)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(EXIT_USAGE)
        except VerificationError as error:
            click.echo(f"Error: {error}", err=True)
            sys.exit(EXIT_VERIFICATION)
        except HypocoercivityError as error:
            click.echo(f"Error: {error}", err=True)
            sys.exit(EXIT_USAGE)
        sys.exit(status if isinstance(status, int) else EXIT_OK)


def default_trunc(dim: int, trunc: Optional[int]) -> int:
    return trunc if trunc is not None else 4 * MIN_BLOCK[dim]


def effective_config(ctx: click.Context, **resolved) -> Dict[str, Any]:
    config = {"subcommand": ctx.info_name, **ctx.params, **resolved, "tolerances": container.config()}
    return {key: value for key, value in config.items() if key != "out"}


def emit(ctx: click.Context, payload: Dict[str, Any], csv_header: List[str] = None, csv_rows=None,
         config: Dict[str, Any] = None):
    config = config or effective_config(ctx)
    if ctx.params.get("output_format", "json") == "csv" and csv_header is not None:
        preamble = "".join(f"# {key}={value}\n" for key, value in sorted(config.items()))
        text = preamble + to_csv(csv_header, csv_rows)
    else:
        text = json.dumps({"config": config, **payload}, sort_keys=True, indent=2) + "\n"
    out = ctx.params.get("out")
    if out:
        with open(out, "w") as handle:
            handle.write(text)
    else:
        click.echo(text, nl=False)


def dim_option(function):
    return click.option("--dim", type=click.IntRange(1, 3), default=1, show_default=True,
                        help="Spatial dimension d.")(function)


def length_option(function):
    return click.option("--L", "length", type=click.FloatRange(min=0, min_open=True), default=TWO_PI,
                        show_default="2*pi", help="Torus length L.")(function)


def out_option(function):
    return click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None,
                        help="Write the artifact to a file instead of stdout.")(function)


def format_option(default: str):
    return click.option("--format", "output_format", type=click.Choice(["csv", "json"]), default=default,
                        show_default=True)


@click.group(cls=CertificateToolGroup)
@click.pass_context
def cli(ctx: click.Context):
    """Hypocoercivity indices, Lyapunov certificates and decay rates for linearized BGK."""
    logger.append_keys(subcommand=ctx.invoked_subcommand)


@cli.command()
@dim_option
@length_option
@click.option("--basis", type=click.Choice(VARIANTS), default="tensor", show_default=True)
@click.option("--trunc", type=click.IntRange(1, 2000), default=None, help="Truncation N.")
@click.option("--kappa", type=click.FloatRange(min=0, min_open=True), default=1.0, show_default=True)
@click.option("--relaxation", type=click.Choice(RELAXATIONS), default="bgk", show_default=True)
@click.option("--tol-rank", type=click.FloatRange(min=0, min_open=True), default=None)
@out_option
@click.pass_context
def index(ctx, dim, length, basis, trunc, kappa, relaxation, tol_rank, out):
    """Hypocoercivity index of the modal pair (kappa * ell * L1, L2)."""
    trunc = default_trunc(dim, trunc)
    pair = container.operator_assembly().operator_pair(dim, basis, trunc, length, relaxation)
    report = container.hypo_index().hypocoercivity_index(kappa * pair.ell * pair.L1, pair.L2, tol=tol_rank)
    emit(ctx, report.to_dict(), config=effective_config(ctx, trunc=trunc))


@cli.command()
@dim_option
@length_option
@click.option("--basis", type=click.Choice(VARIANTS), default="tensor", show_default=True)
@click.option("--trunc", type=click.IntRange(1, 2000), default=None, help="Truncation N.")
@click.option("--kappa", type=click.FloatRange(min=0), default=1.0, show_default=True)
@click.option("--which", type=click.Choice(["L1", "L2", "C", "P"]), default="C", show_default=True,
              help="P is the BGK Lyapunov matrix at --alpha.")
@click.option("--alpha", type=click.FloatRange(min=0), default=0.1, show_default=True)
@click.option("--format", "output_format", type=click.Choice(["json", "mtx"]), default="json", show_default=True)
@out_option
@click.pass_context
def matrix(ctx, dim, length, basis, trunc, kappa, which, alpha, output_format, out):
    """Export L1, L2, the modal generator C_kappa or P_kappa."""
    trunc = default_trunc(dim, trunc)
    pair = container.operator_assembly().operator_pair(dim, basis, trunc, length)
    if which == "P":
        values = container.lyapunov_ansatz().bgk_P(dim, kappa, alpha, N=trunc)
    else:
        values = {"L1": pair.L1, "L2": pair.L2}.get(which)
        values = container.operator_assembly().modal_generator(pair, kappa).C if values is None else values
    if output_format == "mtx":
        text = matrix_to_triplets(values, tol=1e-15)
        if out:
            with open(out, "w") as handle:
                handle.write(text)
        else:
            click.echo(text, nl=False)
        return
    emit(ctx, {"matrix": which, **matrix_to_json(values)}, config=effective_config(ctx, trunc=trunc))


@cli.command()
@dim_option
@length_option
@out_option
@click.pass_context
def certificate(ctx, dim, length, out):
    """Certified decay rate mu(L) with the norm-equivalence constants."""
    result = container.decay_certifier().certify(dim, length)
    emit(ctx, result.to_dict())
    if not result.valid:
        ctx.exit(EXIT_VERIFICATION)


@cli.command()
@dim_option
@length_option
@click.option("--trunc", type=click.IntRange(1, 2000), default=None, help="Truncation N.")
@click.option("--kappa", "kappas", type=click.FloatRange(min=0), multiple=True, help="Mode modulus; repeatable.")
@click.option("--kmax", type=click.IntRange(min=1), default=5, show_default=True,
              help="Use every modulus up to kmax when no --kappa is given.")
@format_option("csv")
@out_option
@click.pass_context
def spectrum(ctx, dim, length, trunc, kappas, kmax, output_format, out):
    """Spectral gap min Re eig(C_kappa) per mode modulus."""
    trunc = default_trunc(dim, trunc)
    if not kappas:
        moduli = container.operator_assembly().mode_moduli(dim, kmax).moduli
        kappas = [kappa for kappa in moduli if kappa <= kmax]
    report = container.spectral_gap().spectral_gap(dim, length, list(kappas), trunc)
    emit(ctx, report.to_dict(), ["kappa", "N", "gap"],
         [(entry.kappa, entry.N, entry.gap) for entry in report.entries],
         config=effective_config(ctx, trunc=trunc, kappas=list(kappas)))


@cli.command()
@dim_option
@length_option
@click.option("--kappa", type=click.FloatRange(min=1), default=1.0, show_default=True)
@click.option("--alpha", type=click.FloatRange(min=0), default=0.1, show_default=True)
@format_option("json")
@out_option
@click.pass_context
def minors(ctx, dim, length, kappa, alpha, output_format, out):
    """Closed-form leading minors of C*P + PC."""
    table = container.decay_certifier().minor_table(dim, kappa, alpha, TWO_PI / length)
    emit(ctx, table.to_dict(), ["j", "delta"], [(j + 1, value) for j, value in enumerate(table.values)])


@cli.command()
@dim_option
@length_option
@click.option("--trunc", type=click.IntRange(1, 2000), default=None, help="Truncation N.")
@click.option("--kmax", type=click.IntRange(min=1), default=None,
              help="Highest wave number (1D default 128, otherwise 3).")
@click.option("--epsilon", type=click.FloatRange(0, 1, min_open=True), default=0.1, show_default=True,
              help="Container fraction of the 1D initial datum.")
@click.option("--alpha", type=click.FloatRange(min=0), default=None, help="Override the certified alpha_star.")
@click.option("--tmax", type=click.FloatRange(min=0), default=30.0, show_default=True)
@click.option("--dt", type=click.FloatRange(min=0, min_open=True), default=0.5, show_default=True)
@click.option("--gamma", type=click.FloatRange(min=0), default=0.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True, help="Seed of the 2D/3D random datum.")
@format_option("csv")
@out_option
@click.pass_context
def simulate(ctx, dim, length, trunc, kmax, epsilon, alpha, tmax, dt, gamma, seed, output_format, out):
    """Entropy, H-norm, L1 distance and decay envelope along a modal trajectory."""
    simulator = container.bgk_simulator()
    bound = container.decay_certifier().certify(dim, length)
    alpha = bound.alpha_star if alpha is None else alpha
    if dim == 1:
        kmax = kmax or 128
        trunc = trunc or 20
        state = simulator.concentrated_initial_data(epsilon, kmax, trunc, length)
    else:
        kmax = kmax or 3
        trunc = default_trunc(dim, trunc)
        state = simulator.random_initial_data(dim, length, kmax, trunc, seed)
    run = simulator.trajectory(state, tmax, dt, alpha, bound.C_d, bound.lam, gamma)
    rows = zip(*([run.times, run.entropy, run.h_norm] + ([run.l1] if run.l1 is not None else []) + [run.envelope]))
    header = ["t", "entropy", "h_norm"] + (["l1"] if run.l1 is not None else []) + ["envelope"]
    emit(ctx, run.to_dict(), header, rows,
         config=effective_config(ctx, trunc=trunc, kmax=kmax, alpha=alpha, tail_bound=state.tail_bound))


@cli.command(name="sweep-L")
@dim_option
@click.option("--from", "start", type=click.FloatRange(min=0, min_open=True), default=0.1, show_default=True)
@click.option("--to", "stop", type=click.FloatRange(min=0, min_open=True), default=50.0, show_default=True)
@click.option("--points", type=click.IntRange(min=2), default=100, show_default=True)
@format_option("csv")
@out_option
@click.pass_context
def sweep_l(ctx, dim, start, stop, points, output_format, out):
    """Certified rate 2 mu_star(L) over a logarithmic grid of torus lengths."""
    if stop <= start:
        raise click.BadParameter("--to must exceed --from.", param_hint="--to")
    certifier = container.decay_certifier()
    results = [certifier.certify(dim, float(length)) for length in np.geomspace(start, stop, points)]
    rows = [(item.L, item.alpha_plus, item.alpha_star, item.mu, 2 * item.mu) for item in results]
    emit(ctx, {"curve": [dict(zip(("L", "alpha_plus", "alpha_star", "mu", "two_mu"), row)) for row in rows]},
         ["L", "alpha_plus", "alpha_star", "mu", "two_mu"], rows)


@cli.command()
@dim_option
@length_option
@click.option("--E0", "initial_entropy", type=click.FloatRange(min=0, min_open=True), default=15.0,
              show_default=True, help="Initial entropy E(f_I).")
@click.option("--tmax", type=click.FloatRange(min=0), default=None, help="Defaults to 3 * t_init + 10.")
@click.option("--dt", type=click.FloatRange(min=0, min_open=True), default=0.5, show_default=True)
@format_option("csv")
@out_option
@click.pass_context
def envelope(ctx, dim, length, initial_entropy, tmax, dt, output_format, out):
    """Two-timescale L1 envelope min{2, sqrt(C_d E0) exp(-lambda t / 2)}."""
    simulator = container.bgk_simulator()
    bound = container.decay_certifier().certify(dim, length)
    crossover = simulator.t_init(bound.C_d, initial_entropy, bound.lam)
    tmax = tmax if tmax is not None else 3 * max(crossover, 0.0) + 10
    times = np.arange(int(round(tmax / dt)) + 1) * dt
    values = [simulator.decay_envelope(float(t), bound.C_d, initial_entropy, bound.lam) for t in times]
    emit(ctx, {"t_init": crossover, "lambda": bound.lam, "C_d": bound.C_d,
               "t": [float(t) for t in times], "envelope": values},
         ["t", "envelope"], zip((float(t) for t in times), values),
         config=effective_config(ctx, tmax=tmax, t_init=format_number(crossover)))


if __name__ == "__main__":
    cli()
