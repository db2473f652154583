"""Admissible finite-volume meshes on axis-parallel boxes.

A mesh stores cells (node, volume, bounding box) and interfaces as flat
numpy arrays. Interior interfaces join two cells; boundary interfaces
join one cell to the boundary point y = projection of its node onto the
face. Cells whose node lies on the boundary (vertex-centred 1D meshes)
are Dirichlet nodes and carry no boundary interface.
"""
from dataclasses import dataclass, field
import itertools

import numpy as np

from .errors import InvalidMeshError

_GEOM_TOL = 1e-10


@dataclass(frozen=True)
class Box:
    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        if len(lo) != len(hi) or not lo:
            raise InvalidMeshError("box bounds must have equal, nonzero length")
        if any(not (b > a) for a, b in zip(lo, hi)):
            raise InvalidMeshError(f"degenerate box {lo} x {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def from_bounds(cls, bounds):
        """From ``[(a, b)]``, ``(a, b)`` or ``[(a0, b0), (a1, b1), ...]``."""
        bounds = list(bounds)
        if len(bounds) == 2 and np.isscalar(bounds[0]):
            bounds = [tuple(bounds)]
        return cls(tuple(b[0] for b in bounds), tuple(b[1] for b in bounds))

    @property
    def dim(self):
        return len(self.lower)

    @property
    def extent(self):
        return np.subtract(self.upper, self.lower)

    @property
    def volume(self):
        return float(np.prod(self.extent))

    @property
    def diameter(self):
        return float(np.linalg.norm(self.extent))

    def on_boundary(self, points, tol=_GEOM_TOL):
        p = np.atleast_2d(points)
        scale = max(1.0, float(np.max(np.abs(self.extent))))
        lo = np.abs(p - np.asarray(self.lower)) <= tol * scale
        hi = np.abs(p - np.asarray(self.upper)) <= tol * scale
        inside = np.all((p >= np.asarray(self.lower) - tol * scale) & (p <= np.asarray(self.upper) + tol * scale), axis=1)
        return inside & np.any(lo | hi, axis=1)


@dataclass(frozen=True)
class Cell:
    index: int
    center: np.ndarray
    volume: float
    on_boundary: bool


@dataclass(frozen=True)
class Interface:
    index: int
    left: int
    right: int | None
    area: float
    node_distance: float
    sub_distances: tuple
    midpoint: np.ndarray
    unit_normal: np.ndarray

    @property
    def is_boundary(self):
        return self.right is None

    @property
    def boundary_point(self):
        return self.midpoint if self.right is None else None


_ARRAYS = (
    "centers", "volumes", "lower", "upper", "on_boundary",
    "left", "right", "area", "d_left", "d_right", "midpoint", "normal",
)


@dataclass(frozen=True, eq=False)
class Mesh:
    """Cells and interfaces; every array is read-only.

    ``right[k] == -1`` marks a boundary interface. For those, ``midpoint``
    is the boundary point y and ``d_right`` is zero.
    """

    domain: Box
    centers: np.ndarray
    volumes: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    on_boundary: np.ndarray
    left: np.ndarray
    right: np.ndarray
    area: np.ndarray
    d_left: np.ndarray
    d_right: np.ndarray
    midpoint: np.ndarray
    normal: np.ndarray
    kind: str = "general"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        for name in _ARRAYS:
            arr = np.array(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def replace(self, **arrays):
        """Copy with some arrays swapped out (used to build perturbed meshes)."""
        kind = arrays.pop("kind", self.kind)
        kw = {name: getattr(self, name) for name in _ARRAYS}
        kw.update(arrays)
        return Mesh(self.domain, kind=kind, **kw)

    @property
    def dim(self):
        return self.domain.dim

    @property
    def n_cells(self):
        return len(self.volumes)

    @property
    def n_interfaces(self):
        return len(self.area)

    @property
    def is_interior(self):
        return self.right >= 0

    @property
    def edge_length(self):
        """h_ij for interior interfaces, d_{i,sigma} for boundary ones."""
        return self.d_left + self.d_right

    @property
    def boundary_points(self):
        return self.midpoint[~self.is_interior]

    @property
    def diameter(self):
        return float(np.max(self.edge_length)) if self.n_interfaces else 0.0

    @property
    def h_min(self):
        return float(np.min(self.edge_length)) if self.n_interfaces else 0.0

    def cell(self, i):
        return Cell(int(i), self.centers[i], float(self.volumes[i]), bool(self.on_boundary[i]))

    def interface(self, k):
        r = int(self.right[k])
        return Interface(
            int(k), int(self.left[k]), None if r < 0 else r, float(self.area[k]),
            float(self.d_left[k] + self.d_right[k]), (float(self.d_left[k]), float(self.d_right[k])),
            self.midpoint[k], self.normal[k],
        )

    @property
    def cells(self):
        return [self.cell(i) for i in range(self.n_cells)]

    @property
    def interfaces(self):
        return [self.interface(k) for k in range(self.n_interfaces)]


def build_interval_mesh(domain, n=None, nodes=None):
    """Admissible 1D mesh.

    ``n``: n equal cells with centred nodes. ``nodes``: Voronoi cells of the
    given increasing nodes; a node placed at an endpoint becomes a Dirichlet
    node with a half cell (vertex-centred layout).
    """
    box = domain if isinstance(domain, Box) else Box.from_bounds(domain)
    if box.dim != 1:
        raise InvalidMeshError("interval mesh needs a 1D domain")
    a, b = box.lower[0], box.upper[0]
    if (n is None) == (nodes is None):
        raise InvalidMeshError("give exactly one of n or nodes")
    if n is not None:
        if int(n) != n or n < 1:
            raise InvalidMeshError(f"need n >= 1 cells, got {n}")
        n = int(n)
        edges = a + (b - a) * np.arange(n + 1) / n
        x = 0.5 * (edges[:-1] + edges[1:])
        kind = "interval-cell"
    else:
        x = np.asarray(nodes, dtype=float).ravel()
        if len(x) < 2:
            raise InvalidMeshError("need at least two nodes")
        if not np.all(np.isfinite(x)) or np.any(np.diff(x) <= 0):
            raise InvalidMeshError("nodes must be finite and strictly increasing")
        if x[0] < a or x[-1] > b:
            raise InvalidMeshError(f"nodes must lie in [{a}, {b}]")
        edges = np.concatenate([[a], 0.5 * (x[:-1] + x[1:]), [b]])
        kind = "interval-nodes"
    nc = len(x)
    on_b = (x == a) | (x == b)
    left = list(range(nc - 1))
    right = list(range(1, nc))
    d_l = list(edges[1:-1] - x[:-1])
    d_r = list(x[1:] - edges[1:-1])
    mids = list(edges[1:-1])
    normals = [1.0] * (nc - 1)
    if not on_b[0]:
        left.append(0); right.append(-1); d_l.append(x[0] - a); d_r.append(0.0)
        mids.append(a); normals.append(-1.0)
    if not on_b[-1]:
        left.append(nc - 1); right.append(-1); d_l.append(b - x[-1]); d_r.append(0.0)
        mids.append(b); normals.append(1.0)
    if n is None and nc >= 2 and x[0] == a and x[-1] == b and np.allclose(np.diff(x), x[1] - x[0], rtol=1e-12, atol=0):
        kind = "interval-vertex"
    return Mesh(
        box,
        centers=x[:, None], volumes=np.diff(edges), lower=edges[:-1, None], upper=edges[1:, None],
        on_boundary=on_b, left=np.array(left, dtype=np.int64), right=np.array(right, dtype=np.int64),
        area=np.ones(len(left)), d_left=np.array(d_l), d_right=np.array(d_r),
        midpoint=np.array(mids)[:, None], normal=np.array(normals)[:, None], kind=kind,
    )


def build_vertex_mesh(domain, n_nodes):
    """Equidistant nodes including both endpoints (Dirichlet nodes)."""
    box = domain if isinstance(domain, Box) else Box.from_bounds(domain)
    if n_nodes < 3:
        raise InvalidMeshError("a vertex mesh needs at least three nodes")
    return build_interval_mesh(box, nodes=np.linspace(box.lower[0], box.upper[0], int(n_nodes)))


def build_cubic_mesh(domain, h):
    """Uniform cubes of side h covering a box whose sides are multiples of h."""
    box = domain if isinstance(domain, Box) else Box.from_bounds(domain)
    h = float(h)
    if not h > 0:
        raise InvalidMeshError("cube side must be positive")
    counts = box.extent / h
    ns = np.rint(counts).astype(int)
    if np.any(ns < 1) or np.any(np.abs(counts - ns) > 1e-9 * np.maximum(counts, 1)):
        raise InvalidMeshError(f"box sides {tuple(box.extent)} are not multiples of h={h}")
    d = box.dim
    shape = tuple(int(v) for v in ns)
    idx = np.array(list(itertools.product(*[range(s) for s in shape])), dtype=np.int64).reshape(-1, d)
    lo = np.asarray(box.lower)
    lower = lo + idx * h
    upper = lower + h
    centers = lower + 0.5 * h
    nc = len(centers)
    lin = np.arange(nc).reshape(shape)
    left, right, d_l, d_r, mids, normals = [], [], [], [], [], []
    eye = np.eye(d)
    for ax in range(d):
        sl_a = [slice(None)] * d
        sl_b = [slice(None)] * d
        sl_a[ax] = slice(0, -1)
        sl_b[ax] = slice(1, None)
        ia = lin[tuple(sl_a)].ravel()
        ib = lin[tuple(sl_b)].ravel()
        left.append(ia); right.append(ib)
        d_l.append(np.full(len(ia), 0.5 * h)); d_r.append(np.full(len(ia), 0.5 * h))
        mids.append(0.5 * (centers[ia] + centers[ib]))
        normals.append(np.tile(eye[ax], (len(ia), 1)))
        for end, sign in ((0, -1.0), (shape[ax] - 1, 1.0)):
            sl = [slice(None)] * d
            sl[ax] = end
            ic = lin[tuple(sl)].ravel()
            left.append(ic); right.append(np.full(len(ic), -1, dtype=np.int64))
            d_l.append(np.full(len(ic), 0.5 * h)); d_r.append(np.zeros(len(ic)))
            mids.append(centers[ic] + sign * 0.5 * h * eye[ax])
            normals.append(np.tile(sign * eye[ax], (len(ic), 1)))
    n_if = sum(len(v) for v in left)
    return Mesh(
        box, centers=centers, volumes=np.full(nc, h ** d), lower=lower, upper=upper,
        on_boundary=np.zeros(nc, dtype=bool), left=np.concatenate(left), right=np.concatenate(right),
        area=np.full(n_if, h ** (d - 1)), d_left=np.concatenate(d_l), d_right=np.concatenate(d_r),
        midpoint=np.concatenate(mids), normal=np.concatenate(normals), kind="cubic",
    )


def _face_measure(mesh, k):
    """Measure of the face of cell left[k] on which interface k sits."""
    i = mesh.left[k]
    n = np.abs(mesh.normal[k])
    ax = int(np.argmax(n))
    lo = mesh.lower[i].copy()
    hi = mesh.upper[i].copy()
    j = mesh.right[k]
    if j >= 0:
        lo = np.maximum(lo, mesh.lower[j])
        hi = np.minimum(hi, mesh.upper[j])
    ext = np.delete(hi - lo, ax)
    return float(np.prod(ext)) if len(ext) else 1.0


def validate_mesh(mesh, tol=_GEOM_TOL):
    """Check the admissibility properties; returns a list of violation strings."""
    out = []
    box = mesh.domain
    d = mesh.dim
    nc = mesh.n_cells
    total = float(np.sum(mesh.volumes))
    if abs(total - box.volume) > tol * box.volume:
        out.append(f"cell volumes sum to {total!r}, domain volume is {box.volume!r}")
    for i in np.flatnonzero(~(mesh.volumes > 0)):
        out.append(f"cell {i}: non-positive volume {mesh.volumes[i]!r}")
    inside = np.all((mesh.centers >= mesh.lower - tol) & (mesh.centers <= mesh.upper + tol), axis=1)
    for i in np.flatnonzero(~inside):
        out.append(f"cell {i}: node outside its cell")
    flagged = box.on_boundary(mesh.centers, tol)
    for i in np.flatnonzero(flagged != mesh.on_boundary):
        out.append(f"cell {i}: boundary flag inconsistent with node position")
    seen = set()
    scale = max(1.0, float(np.max(box.extent)))
    for k in range(mesh.n_interfaces):
        i = int(mesh.left[k])
        j = int(mesh.right[k])
        nu = mesh.normal[k]
        if not (0 <= i < nc) or j >= nc or j == i:
            out.append(f"interface {k}: bad cell indices ({i}, {j})")
            continue
        if abs(np.linalg.norm(nu) - 1.0) > tol:
            out.append(f"interface {k}: normal is not a unit vector")
        area = mesh.area[k]
        face = _face_measure(mesh, k)
        if not area > 0 or abs(area - face) > tol * max(face, 1.0):
            out.append(f"interface {k}: area {area!r} does not match face measure {face!r}")
        if j >= 0:
            key = (min(i, j), max(i, j))
            if key in seen:
                out.append(f"interface {k}: duplicate interface between cells {key}")
            seen.add(key)
            diff = mesh.centers[j] - mesh.centers[i]
            hij = float(np.linalg.norm(diff))
            if hij <= 0:
                out.append(f"interface {k}: coincident nodes")
                continue
            if abs(hij - (mesh.d_left[k] + mesh.d_right[k])) > tol * scale:
                out.append(f"interface {k}: sub-distances do not add up to h={hij!r}")
            if np.max(np.abs(diff / hij - nu)) > tol:
                out.append(f"interface {k}: x_j - x_i is not parallel to the normal")
            foot = mesh.centers[i] + mesh.d_left[k] * nu
            if np.max(np.abs(foot - mesh.midpoint[k])) > tol * scale and d == 1:
                out.append(f"interface {k}: interface point not between nodes")
        else:
            if mesh.on_boundary[i]:
                out.append(f"interface {k}: boundary interface on a Dirichlet node")
            dist = mesh.d_left[k]
            if not dist > tol * scale:
                out.append(f"interface {k}: node lies on its boundary face")
                continue
            y = mesh.midpoint[k]
            if not box.on_boundary(y[None, :], tol)[0]:
                out.append(f"interface {k}: boundary point not on the domain boundary")
            if np.max(np.abs((y - mesh.centers[i]) / dist - nu)) > tol:
                out.append(f"interface {k}: boundary point is not the normal projection of the node")
    return out


def poincare_constant(mesh):
    """(diam Omega)^2 * h_sup / h_inf over neighbouring node pairs."""
    h = mesh.edge_length
    return mesh.domain.diameter ** 2 * float(np.max(h) / np.min(h))
