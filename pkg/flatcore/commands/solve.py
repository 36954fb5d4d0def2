import logging

import click

from ..errors import ConvergenceFailure, InvalidArgument
from ..models.problem import ProblemSpec
from ..services.artifacts import write_csv, write_report
from ..services.deadcore import classify, detect_coincidence
from ..services.fieldio import write_field
from ..services.solver import solve_main
from . import output_path, with_run_config

logger = logging.getLogger(__name__)

COINCIDENCE_FIELDS = ('x', 'y', 'u', 'a', 'gap', 'coincident')


def single_cell(run_config):
    """(p, theta, eps) of a one-cell command; lists belong to sweep"""
    values = {'p': run_config.p_list(), 'theta': run_config.theta_list(), 'eps': run_config.eps_list()}
    for name, items in values.items():
        if len(items) != 1:
            raise InvalidArgument(f"solve takes a single {name} value, got {len(items)}; use sweep for lists")
    return values['p'][0], values['theta'][0], values['eps'][0]


@click.command()
@with_run_config
def solve(lab, run_config):
    """Solve the main problem and write the field, report and coincidence table"""
    p, theta, eps = single_cell(run_config)
    spec = ProblemSpec(run_config.mesh.build(), run_config.params_for(p, theta, eps))
    name = run_config.run.name
    try:
        u, report = solve_main(spec, run_config.solver)
    except ConvergenceFailure as e:
        if e.last_iterate is not None:
            write_field(e.last_iterate, output_path(run_config, f'{name}.partial.field'))
        if e.report is not None:
            write_report(output_path(run_config, f'{name}.partial.report'),
                         [{'report': 'solve', 'partial': True, **e.report.to_dict()}])
        raise

    coincidence = detect_coincidence(u, spec.a, report.tau_c)
    classification = classify(coincidence)
    write_field(u, output_path(run_config, f'{name}.field'))
    write_report(output_path(run_config, f'{name}.report'), [
        {'report': 'solve', **spec.params.model_dump(exclude={'slope'}), 'eps_a': spec.eps_a, **report.to_dict()},
        {'report': 'coincidence', **coincidence.to_dict(), 'classification': classification},
    ])
    gap = coincidence.gap
    rows = [(x, y, uv, av, g, bool(m)) for (x, y), uv, av, g, m
            in zip(spec.mesh.vertices, u.values, spec.a.values, gap, coincidence.mask)]
    write_csv(output_path(run_config, f'{name}-coincidence.csv'), 'coincidence', COINCIDENCE_FIELDS, rows)
    click.echo(f"{name}: {report.iterations} iterations, residual {report.residual:.2e}, "
               f"coincidence {classification} (measure {coincidence.measure:.4g})")
