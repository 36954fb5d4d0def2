import logging

import numpy as np
from scipy.spatial import ConvexHull
from scipy.spatial.distance import pdist

from ..errors import InvalidArgument
from ..models.mesh import (Mesh, POLYGON, RECTANGLE, UNIT_DISK, InteriorShrink,
                           boundary_distance)

logger = logging.getLogger(__name__)


def _check_count(name, value, minimum):
    if int(value) != value or value < minimum:
        raise InvalidArgument(f"{name} must be an integer >= {minimum}, got {value}")


def build_rect_mesh(lx, ly, nx, ny):
    """Uniform triangulation of [0, lx] x [0, ly], each cell cut along its diagonal"""
    if lx <= 0 or ly <= 0:
        raise InvalidArgument(f"Rectangle dimensions must be positive, got {lx} x {ly}")
    _check_count('nx', nx, 2)
    _check_count('ny', ny, 2)
    nx, ny = int(nx), int(ny)
    xs, ys = np.meshgrid(np.linspace(0.0, lx, nx + 1), np.linspace(0.0, ly, ny + 1))
    vertices = np.column_stack([xs.ravel(), ys.ravel()])

    i, j = np.meshgrid(np.arange(nx), np.arange(ny))
    v00 = (j * (nx + 1) + i).ravel()
    v10 = v00 + 1
    v01 = v00 + nx + 1
    v11 = v01 + 1
    triangles = np.concatenate([np.column_stack([v00, v10, v11]),
                                np.column_stack([v00, v11, v01])])
    mesh = Mesh(vertices, triangles, RECTANGLE, (float(lx), float(ly)))
    logger.debug(f"Built rectangle mesh {nx}x{ny}: {mesh.n_vertices} vertices")
    return mesh


def _ring_start(k, n_sectors):
    # ring k carries k * n_sectors vertices, ring 0 is the center
    return 0 if k == 0 else 1 + n_sectors * (k - 1) * k // 2


def build_disk_mesh(n_rings, n_sectors, radius=1.0):
    """Concentric-ring triangulation of the disk inscribed in the circle of given radius"""
    _check_count('n_rings', n_rings, 1)
    _check_count('n_sectors', n_sectors, 3)
    n, s = int(n_rings), int(n_sectors)

    vertices = [np.zeros((1, 2))]
    for k in range(1, n + 1):
        angles = 2.0 * np.pi * np.arange(k * s) / (k * s)
        vertices.append(radius * k / n * np.column_stack([np.cos(angles), np.sin(angles)]))
    vertices = np.concatenate(vertices)

    triangles = []
    for k in range(1, n + 1):
        inner_start, outer_start = _ring_start(k - 1, s), _ring_start(k, s)
        inner_size, outer_size = max((k - 1) * s, 1), k * s

        def inner(m, i):
            return inner_start if k == 1 else inner_start + (m * (k - 1) + i) % inner_size

        def outer(m, o):
            return outer_start + (m * k + o) % outer_size

        for m in range(s):
            i = o = 0
            while i < k - 1 or o < k:
                # advance along whichever ring has the smaller next angle
                if i == k - 1 or (o < k and (o + 1) / k <= (i + 1) / (k - 1)):
                    triangles.append((inner(m, i), outer(m, o), outer(m, o + 1)))
                    o += 1
                else:
                    triangles.append((inner(m, i), outer(m, o), inner(m, i + 1)))
                    i += 1
    triangles = np.array(triangles, dtype=np.int64)

    p0, p1, p2 = (vertices[triangles[:, c]] for c in range(3))
    signed = ((p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
              - (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1]))
    flip = signed < 0
    triangles[flip] = triangles[flip][:, [0, 2, 1]]

    mesh = Mesh(vertices, triangles, UNIT_DISK if radius == 1.0 else POLYGON, (float(radius),))
    logger.debug(f"Built disk mesh ({n} rings, {s} sectors): area {mesh.area:.6f}")
    return mesh


def dist_to_boundary(mesh, vertex_index):
    """Exact Euclidean distance from a vertex to the polygonal boundary"""
    if not 0 <= vertex_index < mesh.n_vertices:
        raise InvalidArgument(f"Vertex index {vertex_index} out of range")
    return float(mesh.distances()[vertex_index])


def point_distance(mesh, point):
    return float(boundary_distance(mesh, np.asarray(point, dtype=float)[None, :])[0])


def interior_shrink(mesh, kappa):
    return InteriorShrink(mesh, kappa)


def edge_midpoint_values(field):
    """Field values at the three edge midpoints of every triangle, shape (n_triangles, 3)"""
    v = field.values[field.mesh.triangles]
    return 0.5 * (v + np.roll(v, -1, axis=1))


def midpoint_quadrature(mesh, midpoint_values):
    """Edge-midpoint rule, exact for quadratics on each triangle"""
    return float((mesh.areas / 3.0 * midpoint_values.sum(axis=1)).sum())


def integrate(field, s=1.0):
    """Integral of |field|^s over the mesh by the 3-point edge-midpoint rule"""
    if s <= 0:
        raise InvalidArgument(f"Exponent must be positive, got {s}")
    return midpoint_quadrature(field.mesh, np.abs(edge_midpoint_values(field)) ** s)


def diameter(mesh):
    """Largest distance between two boundary vertices"""
    points = mesh.vertices[mesh.boundary]
    if len(points) > 3:
        points = points[ConvexHull(points).vertices]
    return float(pdist(points).max())


def submesh_ball(mesh, center, radius):
    """Triangles with all vertices in the closed ball; returns (Mesh, parent vertex indices)"""
    center = np.asarray(center, dtype=float)
    inside = np.sqrt(((mesh.vertices - center) ** 2).sum(axis=1)) <= radius * (1 + 1e-12)
    keep = inside[mesh.triangles].all(axis=1)
    if not keep.any():
        raise InvalidArgument(f"Ball of radius {radius:.3g} contains no triangle of the mesh")
    triangles = mesh.triangles[keep]
    parent = np.unique(triangles)
    local = np.full(mesh.n_vertices, -1, dtype=np.int64)
    local[parent] = np.arange(len(parent))
    return Mesh(mesh.vertices[parent], local[triangles], POLYGON), parent


def contains_point(mesh, point):
    """True when the point lies in the closure of some triangle"""
    offset = np.asarray(point, dtype=float) - mesh.barycenters
    bary = 1.0 / 3.0 + np.einsum('tid,td->ti', mesh.grad_lambda, offset)
    return bool((bary >= -1e-12).all(axis=1).any())
