import click

from ..models.problem import ProblemSpec
from ..services.artifacts import write_csv
from ..services.fieldio import write_field
from ..services.spectral import eps_threshold, first_eigenpair, weighted_first_eigenvalue
from . import output_path, with_run_config

EIGEN_FIELDS = ('p', 'q', 'lambda1', 'residual', 'iterations', 'lambda_fa', 'eps_a')


@click.command()
@with_run_config
def eigen(lab, run_config):
    """First eigenvalue of the p-Laplacian, plain and weighted by f(a), with eps_a"""
    mesh = run_config.mesh.build()
    rows = []
    for p in run_config.p_list():
        spec = ProblemSpec(mesh, run_config.params_for(p=p))
        result = first_eigenpair(mesh, p)
        lambda_fa = weighted_first_eigenvalue(mesh, p, spec.f(spec.a.values))
        eps_a = eps_threshold(p, spec.exponents.q, lambda_fa)
        write_field(result.z, output_path(run_config, f'eigen-p{p:g}.field'))
        rows.append({**result.to_dict(), 'q': spec.exponents.q, 'lambda_fa': lambda_fa, 'eps_a': eps_a})
        click.echo(f"p={p:g}: lambda1={result.lambda1:.8g}, lambda_f(a)={lambda_fa:.8g}, eps_a={eps_a:.6g}")
    write_csv(output_path(run_config, 'eigen.csv'), 'eigen', EIGEN_FIELDS, rows)
