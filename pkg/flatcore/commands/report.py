import math
import os

import click

from ..errors import InsufficientData
from ..services.artifacts import read_csv, svg_line_plot
from . import output_path, with_run_config
from .sweep import write_summary

TEXT_COLUMNS = {'classification', 'status', 'suite'}


def _typed(row):
    typed = {}
    for key, value in row.items():
        if key in TEXT_COLUMNS:
            typed[key] = value
        elif value in ('true', 'false'):
            typed[key] = value == 'true'
        else:
            typed[key] = float(value) if value else math.nan
    return typed


def load_rows(path):
    _, _, rows = read_csv(path)
    return [_typed(row) for row in rows]


@click.command()
@with_run_config
def report(lab, run_config):
    """Rebuild summaries and plots from the CSV files in the output directory"""
    out = run_config.run.out
    rebuilt = []
    sweep_csv = os.path.join(out, 'sweep.csv')
    if os.path.exists(sweep_csv):
        write_summary(run_config, load_rows(sweep_csv), run_config.mesh.build().spacing)
        rebuilt.extend(['fit.csv', 'scaling.svg'])

    aux_csv = os.path.join(out, 'aux.csv')
    if os.path.exists(aux_csv):
        series = []
        for k, row in enumerate(load_rows(aux_csv)):
            profile = load_rows(os.path.join(out, f'aux-profile-{k}.csv'))
            series.append((f"delta={row['delta']:g}", [r['rho'] for r in profile], [r['E_T'] for r in profile]))
        svg_line_plot(output_path(run_config, 'aux-profile.svg'), series, title='Total energy on B_rho',
                      x_label='rho', y_label='E_T')
        rebuilt.append('aux-profile.svg')

    eigen_csv = os.path.join(out, 'eigen.csv')
    if os.path.exists(eigen_csv):
        rows = load_rows(eigen_csv)
        svg_line_plot(output_path(run_config, 'eigen.svg'),
                      [('lambda1', [r['p'] for r in rows], [r['lambda1'] for r in rows])],
                      title='First eigenvalue against p', x_label='p', y_label='lambda1')
        rebuilt.append('eigen.svg')

    if not rebuilt:
        raise InsufficientData(f"no sweep, aux or eigen tables in {out}")
    click.echo(f"Rebuilt {', '.join(rebuilt)}")
