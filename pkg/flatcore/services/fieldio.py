import logging

import numpy as np

from ..errors import InvalidArgument
from ..models.mesh import DOMAIN_KINDS, RECTANGLE, UNIT_DISK, Mesh, ScalarField
from .artifacts import atomic_write_text

logger = logging.getLogger(__name__)

MAGIC = 'FLATCORE-FIELD'
VERSION = 1


def format_field(field):
    """Text form: header, vertex coordinates, triangles, then one value per vertex"""
    mesh = field.mesh
    lines = [f'{MAGIC} {VERSION} {mesh.domain_kind} {mesh.n_vertices} {mesh.n_triangles}']
    lines.extend('%.17g %.17g' % (x, y) for x, y in mesh.vertices)
    lines.extend('%d %d %d' % tuple(t) for t in mesh.triangles)
    lines.extend('%.17g' % v for v in field.values)
    return '\n'.join(lines) + '\n'


def write_field(field, path):
    atomic_write_text(path, format_field(field))
    logger.debug(f"Wrote field with {len(field)} values to {path}")
    return path


def _numbers(path, lineno, line, count, kind):
    tokens = line.split()
    if len(tokens) != count:
        raise InvalidArgument(f"{path}:{lineno}: expected {count} values, got {len(tokens)}")
    try:
        return [kind(t) for t in tokens]
    except ValueError:
        raise InvalidArgument(f"{path}:{lineno}: malformed number in {line.strip()!r}")


def parse_field(text, path='<field>'):
    lines = text.splitlines()
    if not lines:
        raise InvalidArgument(f"{path}:1: empty field file")
    header = lines[0].split()
    if len(header) != 5 or header[0] != MAGIC:
        raise InvalidArgument(f"{path}:1: expected '{MAGIC} <version> <kind> <n_vertices> <n_triangles>'")
    if header[1] != str(VERSION):
        raise InvalidArgument(f"{path}:1: unsupported field version {header[1]}")
    kind = header[2]
    if kind not in DOMAIN_KINDS:
        raise InvalidArgument(f"{path}:1: unknown domain kind {kind!r}")
    try:
        n_vertices, n_triangles = int(header[3]), int(header[4])
    except ValueError:
        raise InvalidArgument(f"{path}:1: vertex and triangle counts must be integers")
    expected = 1 + 2 * n_vertices + n_triangles
    if len(lines) != expected:
        raise InvalidArgument(f"{path}: expected {expected} lines, found {len(lines)}")

    offset = 1
    vertices = [_numbers(path, offset + i + 1, lines[offset + i], 2, float) for i in range(n_vertices)]
    offset += n_vertices
    triangles = [_numbers(path, offset + i + 1, lines[offset + i], 3, int) for i in range(n_triangles)]
    offset += n_triangles
    values = [_numbers(path, offset + i + 1, lines[offset + i], 1, float)[0] for i in range(n_vertices)]

    vertices = np.array(vertices, dtype=float).reshape(-1, 2)
    if kind == RECTANGLE:
        extent = (float(vertices[:, 0].max()), float(vertices[:, 1].max()))
    elif kind == UNIT_DISK:
        extent = (1.0,)
    else:
        extent = None
    mesh = Mesh(vertices, np.array(triangles, dtype=np.int64).reshape(-1, 3), kind, extent)
    return ScalarField(mesh, values)


def read_field(path):
    with open(path) as handle:
        return parse_field(handle.read(), path)
