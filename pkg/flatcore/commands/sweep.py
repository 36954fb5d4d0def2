import logging
import math
from collections import OrderedDict

import click

from ..errors import ConvergenceFailure, InsufficientData, NoSolutionRegime
from ..models.problem import ProblemSpec
from ..services.artifacts import svg_line_plot, write_csv
from ..services.deadcore import FAILED, NONEMPTY, ROW_FIELDS, fit_scaling, layer_constant, onset_eps
from ..services.solver import check_threshold
from . import output_path, with_run_config

logger = logging.getLogger(__name__)

FIT_FIELDS = ('p', 'theta', 'n_cells', 'n_used', 'slope', 'expected_slope', 'intercept', 'r_squared',
              'L', 'onset_eps', 'status')


def sweep_specs(run_config, mesh):
    """Cells in (p, theta, eps) order; eps_a is computed once per (p, theta)"""
    cfg = run_config.solver
    specs = []
    for p in run_config.p_list():
        for theta in run_config.theta_list():
            eps_list = run_config.eps_list()
            template = ProblemSpec(mesh, run_config.params_for(p, theta, min(eps_list)))
            try:
                check_threshold(template, cfg)
            except NoSolutionRegime:
                pass
            specs.extend(template.updated(eps=eps) for eps in eps_list)
    return specs


def group_rows(rows):
    groups = OrderedDict()
    for row in rows:
        groups.setdefault((float(row['p']), float(row['theta'])), []).append(row)
    return groups


def summarize(rows, spacing):
    """Per (p, theta) fit rows plus the fits that succeeded"""
    summary, fits = [], OrderedDict()
    for (p, theta), group in group_rows(rows).items():
        samples = [(row['eps'], row['W']) for row in group if row['classification'] == NONEMPTY]
        entry = {'p': p, 'theta': theta, 'n_cells': len(group), 'n_used': 0, 'slope': math.nan,
                 'expected_slope': 1.0 / p, 'intercept': math.nan, 'r_squared': math.nan,
                 'L': math.nan, 'onset_eps': onset_eps(group), 'status': 'ok'}
        try:
            fit = fit_scaling(samples, spacing)
        except InsufficientData as e:
            logger.warning(f"No scaling fit for p={p:g} theta={theta:g}: {e}")
            entry['status'] = 'insufficient-data'
        else:
            fits[(p, theta)] = fit
            eps_mid, width_mid = fit.used[len(fit.used) // 2]
            entry.update(n_used=len(fit.used), slope=fit.slope, intercept=fit.intercept,
                         r_squared=fit.r_squared, L=layer_constant(width_mid, eps_mid, p))
        summary.append(entry)
    return summary, fits


def write_summary(run_config, rows, spacing):
    """Sweep table, fit table and log-log plot of W against eps"""
    write_csv(output_path(run_config, 'sweep.csv'), 'sweep', ROW_FIELDS, rows)
    summary, fits = summarize(rows, spacing)
    write_csv(output_path(run_config, 'fit.csv'), 'scaling-fit', FIT_FIELDS, summary)

    series = []
    for (p, theta), group in group_rows(rows).items():
        points = [(row['eps'], row['W']) for row in group if row['classification'] == NONEMPTY and row['W'] > 0]
        if points:
            series.append((f'p={p:g} theta={theta:g}', [e for e, _ in points], [w for _, w in points]))
    if series:
        fit = next(iter(fits.values())) if len(fits) == 1 else None
        svg_line_plot(output_path(run_config, 'scaling.svg'), series, title='Layer width against eps',
                      x_label='eps', y_label='W', log_x=True, log_y=True,
                      fit=None if fit is None else (fit.slope, fit.intercept))
    return summary


@click.command()
@with_run_config
def sweep(lab, run_config):
    """Solve every (p, theta, eps) cell, then fit the layer width scaling"""
    mesh = run_config.mesh.build()
    specs = sweep_specs(run_config, mesh)
    scheduler = lab.scheduler
    scheduler.start(run_config.run.jobs)
    try:
        rows = scheduler.run_cells(specs, run_config.solver, cell_dir=output_path(run_config, 'cells'))
    finally:
        scheduler.stop()

    summary = write_summary(run_config, rows, mesh.spacing)
    failed = sum(row['classification'] == FAILED for row in rows)
    for entry in summary:
        click.echo(f"p={entry['p']:g} theta={entry['theta']:g}: slope {entry['slope']:.4f} "
                   f"(1/p = {entry['expected_slope']:.4f}), {entry['status']}")
    if failed:
        click.echo(f"{failed} of {len(rows)} cells failed", err=True)
    if failed == len(rows):
        raise ConvergenceFailure(f"all {len(rows)} sweep cells failed")
