import functools
import logging
import os

import click
from pydantic import ValidationError

from ..errors import FlatcoreError, InvalidArgument, exit_code_for
from ..models.run import load_run_config

logger = logging.getLogger(__name__)


class LabGroup(click.Group):
    """click group that turns lab errors into exit statuses"""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except (FlatcoreError, ValidationError) as e:
            logger.debug(f"Command failed: {e!r}")
            click.echo(f"Error: {e}", err=True)
            ctx.exit(exit_code_for(e))


def parse_list(value):
    """Comma separated floats, None when the flag is absent"""
    if value is None:
        return None
    try:
        return [float(v) for v in value.split(',') if v.strip()]
    except ValueError:
        raise InvalidArgument(f"expected a comma separated list of numbers, got {value!r}")


def parse_mesh(value):
    if value is None:
        return None, None
    parts = value.split(',')
    try:
        sizes = [int(v) for v in parts]
    except ValueError:
        raise InvalidArgument(f"--mesh expects NX[,NY], got {value!r}")
    if len(sizes) not in (1, 2):
        raise InvalidArgument(f"--mesh expects NX[,NY], got {value!r}")
    return sizes[0], sizes[-1]


def run_options(func):
    """Options shared by every experiment command"""
    options = [
        click.option('--config', 'config_path', type=click.Path(dir_okay=False), help='Run configuration file'),
        click.option('--out', help='Output directory'),
        click.option('--jobs', type=int, help='Concurrent sweep cells'),
        click.option('--seed', type=int, help='Seed of the random verification data'),
        click.option('--mesh', help='Rectangle cells NX[,NY]'),
        click.option('--eps', help='eps value or comma separated list'),
        click.option('--theta', help='theta value or comma separated list'),
        click.option('--p', 'p_value', type=float, help='p of the p-Laplacian'),
        click.option('--q', 'q_value', type=float, help='q of the growth term'),
        click.option('--degenerate', is_flag=True, default=None, help='Constant coefficient mode'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def load_config(lab, config_path=None, out=None, jobs=None, seed=None, mesh=None, eps=None,
                theta=None, p_value=None, q_value=None, degenerate=None, **_):
    """RunConfig with command-line flags applied over the file"""
    nx, ny = parse_mesh(mesh)
    eps_list, theta_list = parse_list(eps), parse_list(theta)
    problem = {'p': p_value, 'q': q_value, 'degenerate': degenerate}
    if eps_list and len(eps_list) == 1:
        problem['eps'] = eps_list[0]
    if theta_list and len(theta_list) == 1:
        problem['theta'] = theta_list[0]
    overrides = {
        'problem': problem,
        'mesh': {'nx': nx, 'ny': ny},
        'sweep': {'eps': eps_list, 'theta': theta_list},
        'run': {'out': out, 'jobs': jobs, 'seed': seed},
    }
    defaults = {
        'solver': lab.solver_defaults(),
        'run': {'jobs': lab.config['JOBS'], 'seed': lab.config['SEED']},
    }
    return load_run_config(config_path, overrides, defaults)


def output_path(run_config, *parts):
    directory = run_config.run.out
    os.makedirs(directory, exist_ok=True)
    return os.path.join(directory, *parts)


def with_run_config(func):
    """Pass (lab, RunConfig) built from the shared options"""
    @run_options
    @click.pass_obj
    @functools.wraps(func)
    def wrapper(lab, **options):
        keys = ('config_path', 'out', 'jobs', 'seed', 'mesh', 'eps', 'theta', 'p_value', 'q_value', 'degenerate')
        shared = {key: options.pop(key) for key in keys}
        return func(lab, load_config(lab, **shared), **options)
    return wrapper


def register_commands(cli):
    from .aux import aux
    from .eigen import eigen
    from .report import report
    from .solve import solve
    from .sweep import sweep
    from .verify import verify

    for command in (solve, sweep, eigen, aux, verify, report):
        cli.add_command(command)
