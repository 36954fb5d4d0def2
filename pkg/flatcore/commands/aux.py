import logging
import math

import click

from ..errors import OutOfRegime, VerificationFailure
from ..models.problem import AuxiliarySpec
from ..services.artifacts import svg_line_plot, write_csv
from ..services.deadcore import (dead_core_report, deadcore_radius, energy_profile,
                                 exponents_degenerate, exponents_nondegenerate, fit_M,
                                 predicted_radius, total_energy_bound)
from ..services.fieldio import write_field
from ..services.mesh import build_disk_mesh
from ..services.solver import local_coefficient, solve_auxiliary
from . import output_path, with_run_config
from .solve import single_cell

logger = logging.getLogger(__name__)

AUX_FIELDS = ('delta', 'theta', 'p', 'min_w', 'max_w', 'E_T', 'bound', 'bound_ok', 'radius',
              'coincidence_radius', 'predicted_radius')
PROFILE_FIELDS = ('rho', 'E_D', 'E_A', 'E_T')


def exponent_pack(params, N=2):
    try:
        if params.degenerate:
            return exponents_degenerate(params.theta, N, params.p)
        return exponents_nondegenerate(params.theta, N)
    except OutOfRegime as e:
        logger.info(f"No dead-core exponents: {e}")
        return None


def predicted_radii(rows, pack):
    """Fill predicted_radius from a least-squares M over the measured radii"""
    samples = [(row['delta'], row['radius']) for row in rows if row['radius'] > 0]
    if pack is None or not samples:
        return None
    M = fit_M(samples, pack.theta, pack.gamma, pack.tau)
    for row in rows:
        try:
            row['predicted_radius'] = predicted_radius(row['delta'], M, pack.theta, pack.gamma, pack.tau)
        except OutOfRegime:
            row['predicted_radius'] = 0.0
    return M


@click.command()
@with_run_config
def aux(lab, run_config):
    """Solve the localized absorption problem on the unit disk for every delta"""
    settings = run_config.aux
    p, theta, eps = single_cell(run_config)
    params = run_config.params_for(p, theta, eps)
    mesh = build_disk_mesh(settings.n_rings, settings.n_sectors)
    a_tilde = local_coefficient(mesh, params, settings.x0)
    solver = run_config.solver

    rows, series, failures = [], [], []
    for k, delta in enumerate(settings.delta):
        spec = AuxiliarySpec(delta=delta, Lambda=settings.Lambda, exponents=params.exponents,
                             sigma=solver.sigma, mu=solver.mu)
        w, report = solve_auxiliary(spec, a_tilde, solver)
        profile = energy_profile(w, a_tilde, spec, settings.n_rho)
        total, bound, bound_ok = total_energy_bound(profile, spec, mesh.area)
        if not bound_ok:
            failures.append(f'E_T(1)={total:.4e} exceeds {bound:.4e} at delta={delta:g}')
        write_field(w, output_path(run_config, f'aux-{k}.field'))
        write_csv(output_path(run_config, f'aux-profile-{k}.csv'), 'aux-profile', PROFILE_FIELDS,
                  profile.to_rows())
        series.append((f'delta={delta:g}', list(profile.rho), list(profile.total)))
        rows.append({
            'delta': delta, 'theta': theta, 'p': p, 'min_w': w.min(), 'max_w': w.max(),
            'E_T': total, 'bound': bound, 'bound_ok': bound_ok,
            'radius': deadcore_radius(profile, tol=1e-9 * bound),
            'coincidence_radius': deadcore_radius(dead_core_report(w, report.tau_c)),
            'predicted_radius': math.nan,
        })
        click.echo(f"delta={delta:g}: min w {w.min():.3e}, E_T(1)={total:.4e} <= {bound:.4e}: {bound_ok}, "
                   f"dead-core radius {rows[-1]['radius']:.3f}")

    M = predicted_radii(rows, exponent_pack(params))
    if M is not None:
        click.echo(f"Fitted M = {M:.4g}")
    write_csv(output_path(run_config, 'aux.csv'), 'aux', AUX_FIELDS, rows)
    svg_line_plot(output_path(run_config, 'aux-profile.svg'), series, title='Total energy on B_rho',
                  x_label='rho', y_label='E_T')
    if failures:
        raise VerificationFailure('; '.join(failures))
