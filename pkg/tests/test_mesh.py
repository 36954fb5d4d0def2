import math

import numpy as np
import pytest

from flatcore.errors import InvalidArgument
from flatcore.models.mesh import Mesh, ScalarField
from flatcore.services.mesh import (build_disk_mesh, build_rect_mesh, contains_point, diameter,
                                    dist_to_boundary, integrate, interior_shrink, point_distance,
                                    submesh_ball)


def test_rect_mesh_counts():
    mesh = build_rect_mesh(2.0, 1.0, 4, 2)
    assert mesh.n_vertices == 15
    assert mesh.n_triangles == 16
    assert mesh.area == pytest.approx(2.0)
    assert len(mesh.boundary) == 12
    assert len(mesh.interior) == 3


def test_rect_mesh_rejects_coarse_grids():
    with pytest.raises(InvalidArgument):
        build_rect_mesh(1.0, 1.0, 1, 4)
    with pytest.raises(InvalidArgument):
        build_rect_mesh(0.0, 1.0, 4, 4)


def test_lumped_mass_sums_to_area(unit_square):
    assert unit_square.lumped_mass.sum() == pytest.approx(1.0)
    assert unit_square.spacing == pytest.approx(math.sqrt(2) / 16)


def test_disk_mesh(unit_disk):
    assert len(unit_disk.boundary) == 144
    assert unit_disk.n_vertices == 1 + 6 * 24 * 25 // 2
    assert unit_disk.area == pytest.approx(72 * math.sin(2 * math.pi / 144), rel=1e-12)
    assert (unit_disk.areas > 0).all()
    radius = np.hypot(*unit_disk.vertices[unit_disk.boundary].T)
    assert np.allclose(radius, 1.0)


def test_dist_to_boundary(unit_square):
    assert dist_to_boundary(unit_square, 144) == pytest.approx(0.5)
    assert dist_to_boundary(unit_square, 0) == 0.0
    with pytest.raises(InvalidArgument):
        dist_to_boundary(unit_square, unit_square.n_vertices)


def test_point_distance_inside_disk(unit_disk):
    # inscribed polygon: distance from the centre is the apothem
    assert point_distance(unit_disk, (0.0, 0.0)) == pytest.approx(math.cos(math.pi / 144))


def test_interior_shrink(unit_square):
    shrink = interior_shrink(unit_square, 0.25)
    assert shrink.count == 81
    assert interior_shrink(unit_square, 0.0).count == unit_square.n_vertices
    assert interior_shrink(unit_square, 0.6).count == 0
    with pytest.raises(InvalidArgument):
        interior_shrink(unit_square, -1.0)


def test_integrate_quadratic_exactly(unit_square):
    x = ScalarField.from_function(unit_square, lambda x, y: x)
    assert integrate(x, 2.0) == pytest.approx(1.0 / 3.0, rel=1e-12)
    assert integrate(ScalarField.constant(unit_square, 2.0)) == pytest.approx(2.0)
    with pytest.raises(InvalidArgument):
        integrate(x, 0.0)


def test_diameter(unit_square, unit_disk):
    assert diameter(unit_square) == pytest.approx(math.sqrt(2))
    assert diameter(unit_disk) == pytest.approx(2.0)


def test_gradients_of_affine_field(unit_disk):
    field = ScalarField.from_function(unit_disk, lambda x, y: 1.0 + 0.3 * x - 0.2 * y)
    assert np.allclose(field.gradients(), [0.3, -0.2])


def test_field_validation(unit_square):
    with pytest.raises(InvalidArgument):
        ScalarField(unit_square, np.zeros(3))
    values = np.zeros(unit_square.n_vertices)
    values[4] = np.nan
    with pytest.raises(InvalidArgument):
        ScalarField(unit_square, values)


def test_mesh_validation():
    vertices = [(0, 0), (1, 0), (0, 1), (5, 5)]
    with pytest.raises(InvalidArgument, match='no triangle'):
        Mesh(vertices, [(0, 1, 2)])
    with pytest.raises(InvalidArgument, match='non-positive area'):
        Mesh(vertices[:3], [(0, 2, 1)])


def test_submesh_ball(fine_square):
    sub, parent = submesh_ball(fine_square, (0.5, 0.5), 0.1)
    assert np.allclose(sub.vertices, fine_square.vertices[parent])
    assert (np.hypot(*(sub.vertices - 0.5).T) <= 0.1 + 1e-12).all()
    assert len(sub.interior) > 0
    assert sub.area < math.pi * 0.01


def test_contains_point(unit_square):
    assert contains_point(unit_square, (0.3, 0.7))
    assert contains_point(unit_square, (1.0, 1.0))
    assert not contains_point(unit_square, (1.2, 0.5))


def test_transformed_rectangle_keeps_kind():
    mesh = build_rect_mesh(1.0, 1.0, 4, 4).transformed(scale=2.0)
    assert mesh.extent == (2.0, 2.0)
    assert mesh.area == pytest.approx(4.0)


def test_disk_mesh_radius():
    mesh = build_disk_mesh(4, 6, radius=2.0)
    assert mesh.domain_kind == 'polygon'
    assert np.hypot(*mesh.vertices.T).max() == pytest.approx(2.0)
