# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.
import os
import logging

import click

import spanbreaker
from spanbreaker import utils, harness, solvers
from spanbreaker.measure import CSVStore
from spanbreaker.measure.storage import SPEEDUP_FIELDS

# exit status when a run misses its target or a table row is flagged
NOT_REACHED = 2
DEFAULT_OUT = 'spanbreaker-out'
SUMMARY = 'summary.csv'


def setup_logging(loglevel, debug_epochs=False):
    log = utils.log_to_stderr(loglevel)
    utils.get_logger('epochs').setLevel(
        logging.DEBUG if debug_epochs else logging.WARNING)
    return log


def parse_ints(text, option):
    """Parse a comma separated list of integers.
    """
    try:
        values = [int(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise click.ClickException(
            "{}: expected comma separated integers, got '{}'"
            .format(option, text))
    if not values:
        raise click.ClickException("{} must list at least one value"
                                   .format(option))
    return values


def load_spec(path, seeds=None, out=None):
    """Load a `RunSpec` from a json file or from the summary csv written by
    a previous ``run``.
    """
    try:
        if path.endswith('.csv'):
            frame = CSVStore(path).read()
            if 'spec' not in frame.columns or not len(frame):
                raise click.ClickException(
                    "{} has no embedded spec".format(path))
            spec = harness.RunSpec.from_json(frame['spec'].iloc[0])
        else:
            with open(path, encoding='utf-8') as f:
                spec = harness.RunSpec.from_json(f.read())
        if seeds is not None:
            spec = spec.replace(seeds=parse_ints(seeds, '--seeds'))
        if out is not None:
            spec = spec.replace(output=out)
    except utils.ConfigurationError as err:
        raise click.ClickException("invalid spec {}: {}".format(path, err))
    return spec


def execute(spec):
    try:
        return spec.execute(threads=utils.thread_count())
    except utils.SpanbreakerError as err:
        raise click.ClickException(str(err))


def trace_name(solver, seed):
    return '{}-seed{}'.format(solver, seed)


@click.group()
@click.version_option(spanbreaker.__version__)
def cli():
    pass


@cli.command('solvers')
def list_solvers():
    """List the registered solvers.
    """
    names = list(solvers.iter_solvers())
    click.echo('Collected {} built-in solvers:\n'.format(len(names)))
    for name, func in names:
        doc = (func.__doc__ or '(No help for solver {})'.format(name))
        click.echo(' - {}: {}'.format(name, doc.strip().splitlines()[0]))


spec_option = click.option(
    '--spec', 'spec_path', required=True,
    type=click.Path(exists=True, dir_okay=False),
    help='RunSpec json file (or a summary.csv from a previous run)')
seeds_option = click.option(
    '--seeds', default=None,
    help='Comma separated seeds overriding the run spec')
debug_option = click.option(
    '--debug-epochs', is_flag=True, default=False,
    help='Log every sampled epoch length')
loglevel_option = click.option(
    '-l', '--loglevel', default='INFO',
    help='Set the Python logging level')


@cli.command()
@spec_option
@click.option('--out', default=None,
              help='Output directory (default: the run spec output or '
              '{})'.format(DEFAULT_OUT))
@seeds_option
@debug_option
@loglevel_option
@click.pass_context
def run(ctx, spec_path, out, seeds, debug_epochs, loglevel):
    """Run every (solver, seed) pair of a spec and write one trace csv per
    run plus a summary.
    """
    log = setup_logging(loglevel, debug_epochs)
    spec = load_spec(spec_path, seeds=seeds, out=out)
    outdir = spec.output or DEFAULT_OUT
    traces = execute(spec)

    paths = CSVStore.multiwrite(
        outdir,
        ((trace_name(*key), trace) for key, trace in traces.items()))
    summary = harness.summary_frame(spec, traces)
    CSVStore.write(os.path.join(outdir, SUMMARY), summary)
    click.echo('Wrote {} traces and {} to {}'.format(
        len(paths), SUMMARY, outdir))

    missed = summary[~summary['reached']]
    if len(missed):
        for _, row in missed.iterrows():
            log.warning("{} seed {} did not reach the target".format(
                row['solver'], row['seed']))
        ctx.exit(NOT_REACHED)


@cli.command()
@spec_option
@seeds_option
@click.option('--window', default=None,
              help='Epoch window "first,last" for the rate fit')
@debug_option
@loglevel_option
def rates(spec_path, seeds, window, debug_epochs, loglevel):
    """Print measured per epoch rates next to their guarantees.
    """
    setup_logging(loglevel, debug_epochs)
    spec = load_spec(spec_path, seeds=seeds)
    if window is not None:
        bounds = parse_ints(window, '--window')
        if len(bounds) != 2:
            raise click.ClickException('--window: expected "first,last"')
        window = tuple(bounds)
    traces = execute(spec)
    try:
        frame = harness.rates_frame(spec, traces, window)
    except utils.SpanbreakerError as err:
        raise click.ClickException(str(err))
    click.echo(frame.to_string(index=False, float_format='{:.6f}'.format))


@cli.command()
@click.option('--n-list', default='256,512,1024,2048,4096,8192',
              help='Comma separated, increasing instance sizes')
@click.option('--alpha', default=0.5, type=float,
              help='Accuracy exponent (eps = n^-alpha)')
@click.option('--beta', default=0.5, type=float,
              help='Conditioning exponent (kappa = n^beta)')
@click.option('--seeds', default='1,2,3,4,5', help='Comma separated seeds')
@click.option('--max-epochs', default=60, type=int,
              help='Epoch cap per run')
@click.option('--out', default='speedup.csv', help='Output csv path')
@debug_option
@loglevel_option
@click.pass_context
def speedup(ctx, n_list, alpha, beta, seeds, max_epochs, out, debug_epochs,
            loglevel):
    """Compare gradient units of SVRG and SAGA to accuracy n^-alpha on
    block instances with kappa = n^beta.
    """
    log = setup_logging(loglevel, debug_epochs)
    try:
        frame = harness.speedup_experiment(
            parse_ints(n_list, '--n-list'), alpha, beta,
            parse_ints(seeds, '--seeds'), threads=utils.thread_count(),
            max_epochs=max_epochs)
    except utils.SpanbreakerError as err:
        raise click.ClickException(str(err))
    flagged = frame.attrs.get('flagged', [])
    CSVStore.write(out, frame, fields=SPEEDUP_FIELDS)
    click.echo(frame.to_string(index=False))
    if flagged:
        log.warning("runs for n in {} did not reach eps".format(flagged))
        ctx.exit(NOT_REACHED)
