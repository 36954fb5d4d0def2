import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from ..errors import InvalidArgument

RECTANGLE = 'rectangle'
UNIT_DISK = 'unit-disk'
POLYGON = 'polygon'
DOMAIN_KINDS = (RECTANGLE, UNIT_DISK, POLYGON)


def _frozen(array, dtype):
    array = np.array(array, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


def boundary_distance(mesh, points, chunk=2048):
    """Euclidean distance from each point to the nearest boundary edge"""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    a = mesh.vertices[mesh.boundary_edges[:, 0]]
    b = mesh.vertices[mesh.boundary_edges[:, 1]]
    ab = b - a
    length2 = (ab ** 2).sum(axis=1)
    out = np.empty(len(points))
    for start in range(0, len(points), chunk):
        x = points[start:start + chunk, None, :]
        t = np.clip(((x - a) * ab).sum(axis=2) / length2, 0.0, 1.0)
        nearest = a + t[..., None] * ab
        out[start:start + chunk] = np.sqrt(((x - nearest) ** 2).sum(axis=2)).min(axis=1)
    return out


class Mesh:
    """Conforming P1 triangulation of a polygonal domain in the plane

    Derived quantities (areas, lumped masses, barycentric gradients and
    boundary edges) are computed once; every array is read-only.
    """

    def __init__(self, vertices, triangles, domain_kind=POLYGON, extent=None):
        if domain_kind not in DOMAIN_KINDS:
            raise InvalidArgument(f"Unknown domain kind: {domain_kind}")
        self.vertices = _frozen(vertices, float)
        self.triangles = _frozen(triangles, np.int64)
        self.domain_kind = domain_kind
        # (lx, ly) for rectangles, (radius,) for disks
        self.extent = extent
        self._validate()

        p0, p1, p2 = (self.vertices[self.triangles[:, k]] for k in range(3))
        twice_area = ((p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
                      - (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1]))
        if np.any(twice_area <= 0):
            bad = int(np.argmin(twice_area))
            raise InvalidArgument(f"Triangle {bad} has non-positive area")
        self.areas = _frozen(0.5 * twice_area, float)

        # grad lambda_i = rot(p_{i+2} - p_{i+1}) / (2|T|)
        grads = np.empty((self.n_triangles, 3, 2))
        for i, (pj, pk) in enumerate(((p1, p2), (p2, p0), (p0, p1))):
            grads[:, i, 0] = (pj[:, 1] - pk[:, 1]) / twice_area
            grads[:, i, 1] = (pk[:, 0] - pj[:, 0]) / twice_area
        self.grad_lambda = _frozen(grads, float)

        mass = np.bincount(self.triangles.ravel(),
                           weights=np.repeat(self.areas / 3.0, 3),
                           minlength=self.n_vertices)
        self.lumped_mass = _frozen(mass, float)

        edges = np.sort(self.triangles[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2), axis=1)
        unique, counts = np.unique(edges, axis=0, return_counts=True)
        self.edges = _frozen(unique, np.int64)
        self.boundary_edges = _frozen(unique[counts == 1], np.int64)
        flags = np.zeros(self.n_vertices, dtype=bool)
        flags[self.boundary_edges.ravel()] = True
        self.boundary_vertex_flags = _frozen(flags, bool)

        self._distances = None

    def _validate(self):
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2:
            raise InvalidArgument("Vertices must be an (n, 2) array")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise InvalidArgument("Triangles must be an (m, 3) array")
        if len(self.triangles) == 0:
            raise InvalidArgument("Mesh has no triangles")
        if self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices):
            raise InvalidArgument("Triangle index out of range")
        used = np.zeros(len(self.vertices), dtype=bool)
        used[self.triangles.ravel()] = True
        if not used.all():
            raise InvalidArgument(f"{int((~used).sum())} vertices belong to no triangle")
        rows = self.triangles[:, [0, 1, 2, 1, 2, 0]].ravel()
        cols = self.triangles[:, [1, 2, 0, 0, 1, 2]].ravel()
        graph = coo_matrix((np.ones(len(rows)), (rows, cols)),
                           shape=(len(self.vertices),) * 2)
        n_components, _ = connected_components(graph, directed=False)
        if n_components != 1:
            raise InvalidArgument(f"Mesh is not connected ({n_components} components)")

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def area(self):
        return float(self.areas.sum())

    @property
    def interior(self):
        return np.flatnonzero(~self.boundary_vertex_flags)

    @property
    def boundary(self):
        return np.flatnonzero(self.boundary_vertex_flags)

    @property
    def spacing(self):
        """Longest edge length"""
        e = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return float(np.sqrt((e ** 2).sum(axis=1)).max())

    @property
    def barycenters(self):
        return self.vertices[self.triangles].mean(axis=1)

    def distances(self):
        """Distance of every vertex to the polygonal boundary, cached"""
        if self._distances is None:
            self._distances = _frozen(boundary_distance(self, self.vertices), float)
        return self._distances

    def transformed(self, scale=1.0, shift=(0.0, 0.0)):
        """Dilated and translated copy, x -> scale * x + shift"""
        if scale <= 0:
            raise InvalidArgument("scale must be positive")
        shift = np.asarray(shift, dtype=float)
        if self.domain_kind == RECTANGLE and not shift.any():
            return Mesh(scale * self.vertices, self.triangles, RECTANGLE,
                        tuple(scale * e for e in self.extent))
        return Mesh(scale * self.vertices + shift, self.triangles, POLYGON)

    def to_dict(self):
        return {
            'domain_kind': self.domain_kind,
            'n_vertices': self.n_vertices,
            'n_triangles': self.n_triangles,
            'n_boundary_vertices': int(self.boundary_vertex_flags.sum()),
            'area': self.area,
            'spacing': self.spacing,
        }


class ScalarField:
    """Piecewise-linear field given by its vertex values"""

    def __init__(self, mesh, values):
        values = np.array(values, dtype=float, copy=True).reshape(-1)
        if values.shape[0] != mesh.n_vertices:
            raise InvalidArgument(
                f"Field has {values.shape[0]} values for {mesh.n_vertices} vertices"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidArgument("Field values must be finite")
        values.setflags(write=False)
        self.mesh = mesh
        self.values = values

    @classmethod
    def constant(cls, mesh, value):
        return cls(mesh, np.full(mesh.n_vertices, float(value)))

    @classmethod
    def from_function(cls, mesh, func):
        return cls(mesh, func(mesh.vertices[:, 0], mesh.vertices[:, 1]))

    def with_values(self, values):
        return ScalarField(self.mesh, values)

    def gradients(self):
        """Constant gradient on every triangle, shape (n_triangles, 2)"""
        return np.einsum('ti,tid->td', self.values[self.mesh.triangles], self.mesh.grad_lambda)

    def same_mesh(self, other):
        return self.mesh is other.mesh

    def __len__(self):
        return len(self.values)

    def max(self):
        return float(self.values.max())

    def min(self):
        return float(self.values.min())


class InteriorShrink:
    """Vertex mask of {x : dist(x, boundary) >= kappa}"""

    def __init__(self, mesh, kappa):
        if kappa < 0:
            raise InvalidArgument("kappa must be non-negative")
        self.kappa = float(kappa)
        mask = mesh.distances() >= self.kappa - 1e-12 * max(1.0, self.kappa)
        mask.setflags(write=False)
        self.mask = mask

    @property
    def count(self):
        return int(self.mask.sum())
