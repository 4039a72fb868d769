"""
Vertex-represented convex polytopes: facets, face lattice, face volumes,
normal cones and external angles, plus the built-in shape generators.

A polytope of affine dimension d < n is handled inside its own affine hull:
facets, normal cones and angles are all intrinsic to that hull.
"""

import logging
from itertools import product
from math import factorial, pi
from typing import Dict, FrozenSet, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space
from scipy.spatial import ConvexHull, Delaunay

from .errors import (
    DuplicateVertex,
    FaceNotOfPolytope,
    FacetEnumerationTooLarge,
    InvalidShapeParameters,
    NonExtremeVertex,
    NotFullDimensional,
)
from .exterior_algebra import Frame, gram_determinant
from .lab_utils.config import (
    CONE_TOLERANCE,
    HYPERPLANE_TOLERANCE,
    MAX_POLYTOPE_VERTICES,
    ORTHANT_TOLERANCE,
)
from .lab_utils.monte_carlo import MonteCarloConfig, count_cone_hits, proportion_stderr

logger = logging.getLogger(__name__)


class Facet(NamedTuple):
    normal: np.ndarray  # unit outward normal, parallel to the affine hull of P
    offset: float  # <normal, x> <= offset on P
    vertex_ids: FrozenSet[int]


class Face(NamedTuple):
    vertex_ids: Tuple[int, ...]
    dim: int
    vertices: np.ndarray
    base_point: np.ndarray
    direction_frame: Frame
    incident_facets: Tuple[int, ...]


class EstimatedAngle(NamedTuple):
    estimate: float
    standard_error: float
    method: str


class NormalConeHandle(NamedTuple):
    face: Face
    facet_normals: np.ndarray  # (c, n), one row per incident facet
    complement_frame: Frame  # orthonormal frame of the face's orthogonal complement
    offsets: np.ndarray  # vertex - base_point for every vertex of P
    tolerance: float

    def contains(self, u: np.ndarray) -> np.ndarray:
        """Membership of one direction (n,) or a batch (N, n) in the normal cone."""
        u = np.asarray(u, dtype=float)
        return np.all(u @ self.offsets.T <= self.tolerance, axis=-1)


class Polytope:
    def __init__(self, vertices: Sequence[Sequence[float]], strict: bool = True):
        """
        Convex polytope given by its vertices.

        Args:
            vertices: V x n array of points, each an extreme point of the hull
            strict: reject non-extreme points instead of dropping them
        """
        self.logger = logging.getLogger(__name__)
        pts = np.array(vertices, dtype=float)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise InvalidShapeParameters(
                f"vertices must be a non-empty V x n array, got shape {pts.shape}"
            )
        if pts.shape[0] > MAX_POLYTOPE_VERTICES:
            raise FacetEnumerationTooLarge(
                f"{pts.shape[0]} vertices exceed the limit of {MAX_POLYTOPE_VERTICES}"
            )
        pts.setflags(write=False)
        self.vertices = pts
        self.n = pts.shape[1]
        self.scale = max(1.0, float(np.max(np.abs(pts))))
        self.tolerance = HYPERPLANE_TOLERANCE * self.scale

        self._check_distinct()
        self._fit_affine_hull()
        self._relative_facets, extreme = self._compute_relative_facets()
        self._face_sets: Optional[Dict[FrozenSet[int], int]] = None

        missing = sorted(set(range(len(pts))) - extreme)
        if missing and strict:
            raise NonExtremeVertex(f"vertices {missing} are not extreme points")
        self.extreme_ids = tuple(sorted(extreme))

    @classmethod
    def from_points(cls, points: Sequence[Sequence[float]]) -> "Polytope":
        """Convex hull of a point cloud; duplicates and non-extreme points are dropped."""
        pts = np.asarray(points, dtype=float)
        tol = HYPERPLANE_TOLERANCE * max(1.0, float(np.max(np.abs(pts))))
        kept: List[np.ndarray] = []
        for p in pts:
            if all(np.max(np.abs(p - q)) > tol for q in kept):
                kept.append(p)
        loose = cls(kept, strict=False)
        if len(loose.extreme_ids) < len(kept):
            logger.warning(
                f"Dropped {len(kept) - len(loose.extreme_ids)} non-extreme points"
            )
        return cls(np.asarray(kept)[list(loose.extreme_ids)])

    def _check_distinct(self):
        diffs = self.vertices[:, None, :] - self.vertices[None, :, :]
        dist = np.max(np.abs(diffs), axis=2)
        np.fill_diagonal(dist, np.inf)
        i, j = np.unravel_index(np.argmin(dist), dist.shape)
        if dist[i, j] <= self.tolerance:
            raise DuplicateVertex(f"vertices {min(i, j)} and {max(i, j)} coincide")

    def _fit_affine_hull(self):
        self.centroid = self.vertices.mean(axis=0)
        centered = self.vertices - self.centroid
        if len(self.vertices) == 1:
            self.dim = 0
            self.hull_frame = Frame(self.n, np.zeros((0, self.n)))
        else:
            _, singular, vt = np.linalg.svd(centered)
            self.dim = int(np.sum(singular > self.tolerance))
            self.hull_frame = Frame(self.n, vt[: self.dim])
        self.local_vertices = centered @ self.hull_frame.matrix

    def _compute_relative_facets(self) -> Tuple[List[Facet], set]:
        d = self.dim
        local = self.local_vertices
        if d == 0:
            return [], {0}

        if d == 1:
            # qhull cannot handle 1-dimensional polytopes
            x = local[:, 0]
            equations = [(np.array([-1.0]), float(np.min(x))), (np.array([1.0]), -float(np.max(x)))]
            extreme = {int(np.argmin(x)), int(np.argmax(x))}
        else:
            hull = ConvexHull(local)
            equations = [(eq[:-1], float(eq[-1])) for eq in hull.equations]
            extreme = set(int(i) for i in hull.vertices)

        facets: Dict[FrozenSet[int], Facet] = {}
        for normal_local, b in equations:
            dists = local @ normal_local + b
            ids = frozenset(int(i) for i in np.flatnonzero(np.abs(dists) <= self.tolerance))
            if ids in facets:
                continue
            normal = normal_local @ self.hull_frame.vectors
            offset = float(normal @ self.centroid - b)
            facets[ids] = Facet(normal, offset, ids)

        ordered = sorted(facets.values(), key=lambda f: tuple(sorted(f.vertex_ids)))
        return ordered, extreme

    @property
    def relative_facets(self) -> List[Facet]:
        return list(self._relative_facets)

    def face_sets(self) -> Dict[FrozenSet[int], int]:
        """Vertex sets of all non-empty faces (P included) mapped to their dimension."""
        if self._face_sets is not None:
            return self._face_sets

        full = frozenset(range(len(self.vertices)))
        found = {full}
        frontier = [full]
        while frontier:
            new = []
            for current in frontier:
                for facet in self._relative_facets:
                    meet = current & facet.vertex_ids
                    if meet and meet != current and meet not in found:
                        found.add(meet)
                        new.append(meet)
            frontier = new

        self._face_sets = {ids: self._affine_rank(ids) for ids in found}
        return self._face_sets

    def _affine_rank(self, ids: FrozenSet[int]) -> int:
        pts = self.local_vertices[sorted(ids)]
        if len(pts) == 1:
            return 0
        singular = np.linalg.svd(pts - pts.mean(axis=0), compute_uv=False)
        return int(np.sum(singular > self.tolerance))

    def make_face(self, vertex_ids: Sequence[int]) -> Face:
        ids = tuple(sorted(int(i) for i in vertex_ids))
        key = frozenset(ids)
        sets = self.face_sets()
        if key not in sets:
            raise FaceNotOfPolytope(f"vertex set {ids} is not a face of this polytope")
        dim = sets[key]
        verts = self.vertices[list(ids)]
        base = verts.mean(axis=0)
        if dim == 0:
            frame = Frame(self.n, np.zeros((0, self.n)))
        else:
            _, _, vt = np.linalg.svd(verts - base)
            frame = Frame(self.n, vt[:dim])
        incident = tuple(
            j for j, facet in enumerate(self._relative_facets) if key <= facet.vertex_ids
        )
        return Face(ids, dim, verts, base, frame, incident)

    def f_vector(self) -> List[int]:
        counts = [0] * (self.dim + 1)
        for dim in self.face_sets().values():
            counts[dim] += 1
        return counts

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * c for d, c in enumerate(self.f_vector()))

    def translate(self, shift: Sequence[float]) -> "Polytope":
        return Polytope(self.vertices + np.asarray(shift, dtype=float))

    def scale_by(self, factor: float) -> "Polytope":
        if factor <= 0:
            raise InvalidShapeParameters(f"scale factor must be positive, got {factor}")
        return Polytope(self.vertices * factor)

    def __repr__(self) -> str:
        return f"Polytope(n={self.n}, dim={self.dim}, vertices={len(self.vertices)})"


def facets(P: Polytope) -> List[Facet]:
    if P.dim != P.n:
        raise NotFullDimensional(
            f"polytope has affine dimension {P.dim} in R^{P.n}; use relative_facets"
        )
    return P.relative_facets


def faces(P: Polytope, k: int) -> List[Face]:
    if not 0 <= k <= P.dim:
        raise ValueError(f"face degree {k} is not in [0, {P.dim}]")
    keys = sorted(
        (tuple(sorted(ids)) for ids, dim in P.face_sets().items() if dim == k)
    )
    return [P.make_face(ids) for ids in keys]


def simplex_volume(points: np.ndarray) -> float:
    """k-volume of the simplex spanned by k+1 points via the Gram determinant."""
    points = np.asarray(points, dtype=float)
    k = len(points) - 1
    if k == 0:
        return 1.0
    edges = points[1:] - points[0]
    return float(np.sqrt(max(gram_determinant(edges), 0.0)) / factorial(k))


def face_volume(F: Face) -> float:
    k = F.dim
    if k == 0:
        return 1.0
    local = (F.vertices - F.base_point) @ F.direction_frame.matrix
    if len(local) == k + 1:
        return simplex_volume(local)
    tri = Delaunay(local)
    return float(sum(simplex_volume(local[s]) for s in tri.simplices))


def _complement_rows(P: Polytope, F: Face) -> np.ndarray:
    hull_rows = P.hull_frame.vectors
    if F.dim == 0:
        return hull_rows
    coords = F.direction_frame.vectors @ hull_rows.T
    kernel = null_space(coords)
    return (hull_rows.T @ kernel).T


def normal_cone(P: Polytope, F: Face) -> NormalConeHandle:
    key = frozenset(F.vertex_ids)
    if key not in P.face_sets() or not np.allclose(
        F.vertices, P.vertices[list(F.vertex_ids)], atol=P.tolerance
    ):
        raise FaceNotOfPolytope(f"vertex set {F.vertex_ids} is not a face of {P!r}")
    normals = np.array([P.relative_facets[j].normal for j in F.incident_facets])
    normals = normals.reshape(len(F.incident_facets), P.n)
    return NormalConeHandle(
        face=F,
        facet_normals=normals,
        complement_frame=Frame(P.n, _complement_rows(P, F)),
        offsets=P.vertices - F.base_point,
        tolerance=CONE_TOLERANCE,
    )


def _exact_angle(cone: NormalConeHandle, codim: int) -> Optional[EstimatedAngle]:
    normals = cone.facet_normals
    if codim == 2 and len(normals) == 2:
        cos = float(np.clip(normals[0] @ normals[1], -1.0, 1.0))
        return EstimatedAngle(float(np.arccos(cos) / (2 * pi)), 0.0, "exact:dihedral")
    if len(normals) == codim:
        gram = normals @ normals.T
        if np.max(np.abs(gram - np.eye(codim))) <= ORTHANT_TOLERANCE:
            return EstimatedAngle(2.0 ** (-codim), 0.0, "exact:orthant")
    return None


def _monte_carlo_angle(
    cone: NormalConeHandle, rows: np.ndarray, mc: MonteCarloConfig, key: Sequence[int], method: str
) -> EstimatedAngle:
    hits = count_cone_hits(cone.offsets, rows, mc, key)
    p = hits / mc.samples
    return EstimatedAngle(p, proportion_stderr(p, mc.samples), method)


def external_angle(
    P: Polytope, F: Face, mc: Optional[MonteCarloConfig] = None
) -> EstimatedAngle:
    """Fraction of the unit sphere of the face's complement taken up by its normal cone."""
    mc = mc or MonteCarloConfig()
    codim = P.dim - F.dim
    if codim == 0:
        return EstimatedAngle(1.0, 0.0, "exact:full")
    if codim == 1:
        return EstimatedAngle(0.5, 0.0, "exact:facet")

    cone = normal_cone(P, F)
    if not mc.force_monte_carlo:
        exact = _exact_angle(cone, codim)
        if exact is not None:
            logger.debug(f"face {F.vertex_ids}: {exact.method}")
            return exact

    logger.debug(f"face {F.vertex_ids}: Monte Carlo with {mc.samples} samples")
    return _monte_carlo_angle(
        cone, cone.complement_frame.vectors, mc, F.vertex_ids, "monte_carlo"
    )


def restriction_invariance_check(
    P: Polytope, F: Face, mc: Optional[MonteCarloConfig] = None
) -> Tuple[EstimatedAngle, EstimatedAngle]:
    """External angle of a lower-dimensional P computed in its hull and in R^n."""
    mc = mc or MonteCarloConfig()
    if P.dim == P.n:
        raise ValueError("restriction check needs a polytope inside a proper subspace")
    intrinsic = external_angle(P, F, mc)

    if F.dim == 0:
        rows = np.eye(P.n)
    else:
        rows = null_space(F.direction_frame.vectors).T
    cone = normal_cone(P, F)
    # distinct stream family from the intrinsic estimate
    key = (P.n + 1,) + tuple(F.vertex_ids)
    ambient = _monte_carlo_angle(cone, rows, mc, key, "monte_carlo:ambient")
    return intrinsic, ambient


def random_onb(n: int, seed=None) -> Frame:
    """Haar-distributed orthonormal basis: QR of a Gaussian matrix with sign correction."""
    if n < 1:
        raise ValueError(f"dimension must be positive, got {n}")
    rng = np.random.default_rng(seed)
    gauss = rng.standard_normal((n, n))
    q, r = np.linalg.qr(gauss)
    sign = np.sign(np.diag(r))
    sign[sign == 0] = 1
    q = q * sign[np.newaxis, :]
    return Frame.from_columns(q)


def random_frame(n: int, k: int, seed=None) -> Frame:
    return Frame(n, random_onb(n, seed).vectors[:k])


def _box_vertices(lows: np.ndarray, highs: np.ndarray) -> np.ndarray:
    choices = [(lo,) if hi == lo else (lo, hi) for lo, hi in zip(lows, highs)]
    return np.array(list(product(*choices)), dtype=float)


def make_shape(kind: str, n: int, **params) -> Polytope:
    """
    Built-in shapes.

    Args:
        kind: cube, simplex, regular_simplex, cross_polytope, segment, box, simplex_S
        n: ambient dimension
        params: side / scale / length / lows, highs / basis, t
    """
    if n < 1:
        raise InvalidShapeParameters(f"dimension must be positive, got {n}")

    if kind == "cube":
        side = float(params.get("side", 1.0))
        if side <= 0:
            raise InvalidShapeParameters(f"cube side must be positive, got {side}")
        return Polytope(_box_vertices(np.zeros(n), np.full(n, side)))

    if kind == "box":
        lows = np.asarray(params.get("lows", np.zeros(n)), dtype=float)
        highs = np.asarray(params.get("highs", np.ones(n)), dtype=float)
        if lows.shape != (n,) or highs.shape != (n,):
            raise InvalidShapeParameters(f"box bounds must have {n} entries each")
        if np.any(highs < lows):
            raise InvalidShapeParameters("box needs highs >= lows in every coordinate")
        return Polytope(_box_vertices(lows, highs))

    if kind == "simplex":
        scale = float(params.get("scale", 1.0))
        return Polytope(np.vstack([np.zeros(n), scale * np.eye(n)]))

    if kind == "regular_simplex":
        scale = float(params.get("scale", 1.0))
        basis = null_space(np.ones((1, n + 1)))
        centered = np.eye(n + 1) - 1.0 / (n + 1)
        return Polytope(centered @ basis * (scale / np.sqrt(2.0)))

    if kind == "cross_polytope":
        scale = float(params.get("scale", 1.0))
        return Polytope(np.vstack([scale * np.eye(n), -scale * np.eye(n)]))

    if kind == "segment":
        length = float(params.get("length", 1.0))
        if length <= 0:
            raise InvalidShapeParameters(f"segment length must be positive, got {length}")
        direction = np.asarray(params.get("direction", np.eye(n)[0]), dtype=float)
        direction = direction / np.linalg.norm(direction)
        return Polytope(np.vstack([np.zeros(n), length * direction]))

    if kind == "simplex_S":
        t = float(params.get("t", 1.0))
        if t <= 0:
            raise InvalidShapeParameters(f"simplex_S needs t > 0, got {t}")
        basis = params.get("basis")
        if basis is None:
            basis = Frame.standard(n)
        elif not isinstance(basis, Frame):
            # row-major numbers, one basis vector per row
            entries = np.asarray(basis, dtype=float)
            if entries.size != n * n:
                raise InvalidShapeParameters(f"simplex_S basis needs {n * n} numbers, got {entries.size}")
            basis = Frame(n, entries.reshape(n, n))
        if basis.n != n or basis.k != n:
            raise InvalidShapeParameters(f"simplex_S needs {n} basis vectors in R^{n}")
        vecs = np.array(basis.vectors)
        vecs[-1] = t * vecs[-1]
        return Polytope(np.vstack([np.zeros(n), vecs]))

    raise InvalidShapeParameters(f"unknown shape kind '{kind}'")


def facet_omitting(P: Polytope, vertex_id: int) -> Facet:
    """The facet of a simplex that does not contain the given vertex."""
    for facet in P.relative_facets:
        if vertex_id not in facet.vertex_ids and len(facet.vertex_ids) == len(P.vertices) - 1:
            return facet
    raise FaceNotOfPolytope(f"no facet omits vertex {vertex_id}")
