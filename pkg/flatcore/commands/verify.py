import click

from ..errors import VerificationFailure
from ..services.artifacts import write_csv
from ..services.suites import SUITES, run_suites
from . import output_path, with_run_config

SUITE_FIELDS = ('suite', 'passed', 'checks', 'failures')


@click.command()
@click.option('--suite', 'suites', multiple=True, type=click.Choice(list(SUITES)),
              help='Suite to run (repeatable, default all)')
@click.option('--perturb-lemma-constant', type=float, default=1.0, show_default=True,
              help='Scale c_min of the order inequalities to self-test the harness')
@with_run_config
def verify(lab, run_config, suites, perturb_lemma_constant):
    """Run the seeded verification suites"""
    results = run_suites(run_config.run.seed, names=list(suites) or None,
                         lower_scale=perturb_lemma_constant, slack=lab.config['LEMMA_SLACK'])
    write_csv(output_path(run_config, 'verify.csv'), 'verify', SUITE_FIELDS, [r.to_dict() for r in results])
    for result in results:
        status = 'pass' if result.passed else 'FAIL'
        click.echo(f"{result.name}: {status} ({result.checks - result.failures}/{result.checks})")
    failed = [result.name for result in results if not result.passed]
    if failed:
        raise VerificationFailure(f"suites failed: {', '.join(failed)}")
