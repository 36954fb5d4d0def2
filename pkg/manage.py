#!/usr/bin/env python3
import click

from flatcore import create_app
from flatcore.commands import LabGroup, register_commands


@click.group(cls=LabGroup)
@click.option('--env', default='default', show_default=True,
              help='Configuration name (development, testing, production)')
@click.pass_context
def cli(ctx, env):
    """Numerical lab for flat cores of -eps Delta_p u = u^(q-1) f(a - u)"""
    ctx.obj = create_app(env)


register_commands(cli)

if __name__ == '__main__':
    cli()
