"""Coordinates for polytope spaces.

Classification of right-hand sides against the compiled cone, canonical
(minimal) representatives, vertex realizations with facet incidence, exact
polytope Hausdorff distances, and boundary-stratum diagnosis.
"""

from dataclasses import dataclass, field

import numpy as np

from .cone import CompiledCone, DIAMOND
from .errors import EmptyPolytope, ExteriorCoordinates, NumericalFailure, UnboundedRegion
from .lp import (LinearProgram, OPTIMAL, UNBOUNDED, _combinations_array,
                 enumerate_primal_vertices, farkas_feasible, feasibility_slack,
                 solve_lp)
from .normals import NormalSystem

UNCLASSIFIED = "unclassified"
EXTERIOR = "exterior"
BOUNDARY = "boundary"
INTERIOR = "interior"


def classification_band(b) -> float:
    """Relative tolerance 1e-9 * (1 + |b|_inf); boundary is a closed band."""
    return 1e-9 * (1.0 + float(np.abs(b).max(initial=0.0)))


@dataclass
class CoordinateVector:
    """A right-hand side with its classification against the cone."""

    b: np.ndarray
    classification: str = UNCLASSIFIED
    active_columns: tuple = ()

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)


@dataclass(eq=False)
class PolytopeRealization:
    """Vertex enumeration of {x : Ax <= b} with per-facet incidence."""

    normals: NormalSystem
    b: np.ndarray
    vertices: np.ndarray
    active_sets: tuple
    facet_vertices: tuple
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def vertex_count(self) -> int:
        return self.vertices.shape[0]

    @property
    def dimension(self) -> int:
        return self.normals.dimension

    def body_norm(self) -> float:
        if self.vertex_count == 0:
            raise EmptyPolytope("realization has no vertices")
        return float(np.linalg.norm(self.vertices, axis=1).max())


def classify(b, cone: CompiledCone, *, include_pruned=False) -> CoordinateVector:
    """Classify b as exterior / boundary / interior of the coordinate cone.

    Boundary classifications record which membership columns are active.
    """
    b = np.asarray(b, dtype=float)
    mat = cone.matrix(include_pruned=include_pruned)
    idx = cone.column_indices(include_pruned=include_pruned)
    dots = mat.T @ b
    eps = classification_band(b)
    if (dots < -eps).any():
        return CoordinateVector(b, EXTERIOR)
    if (dots > eps).all():
        return CoordinateVector(b, INTERIOR)
    active = idx[np.abs(dots) <= eps]
    return CoordinateVector(b, BOUNDARY, tuple(int(i) for i in active))


def canonicalize(b_tilde, ns: NormalSystem) -> CoordinateVector:
    """Minimal right-hand side describing the same polyhedron.

    Computes b_i = max{a_i . x : Ax <= b_tilde} for every row; the result is
    the unique admissible representative and satisfies b <= b_tilde.
    """
    b_tilde = np.asarray(b_tilde, dtype=float)
    feasible, _ = farkas_feasible(ns.matrix, b_tilde)
    if not feasible:
        raise EmptyPolytope("right-hand side describes the empty set")
    b = np.empty(ns.count)
    for i in range(ns.count):
        outcome = solve_lp(LinearProgram(ns.matrix[i], ns.matrix, b_tilde))
        if outcome.status == UNBOUNDED:
            raise UnboundedRegion(
                f"support value in direction {i} is unbounded")
        if outcome.status != OPTIMAL:
            raise NumericalFailure("canonicalization subproblem failed")
        b[i] = outcome.value
    return CoordinateVector(np.minimum(b, b_tilde))


def realize(b, cone: CompiledCone, *, precomputed_class=None) -> PolytopeRealization:
    """Vertex enumeration of the polytope behind admissible coordinates."""
    b = np.asarray(b, dtype=float)
    cv = precomputed_class or classify(b, cone)
    if cv.classification == EXTERIOR:
        raise ExteriorCoordinates("coordinates lie outside the cone")
    ns = cone.normal_system
    found = enumerate_primal_vertices(ns.matrix, b, assume_bounded=True)
    if not found:
        raise NumericalFailure("admissible coordinates produced no vertices")
    vertices = np.array([v for v, _ in found])
    active_sets = tuple(act for _, act in found)
    facet_vertices = tuple(
        tuple(j for j, act in enumerate(active_sets) if k in act)
        for k in range(ns.count))
    return PolytopeRealization(ns, b, vertices, active_sets, facet_vertices)


def support_coordinates(real: PolytopeRealization) -> np.ndarray:
    """Row-wise support values max_v a_i . v of a realization."""
    if real.vertex_count == 0:
        raise EmptyPolytope("realization has no vertices")
    return (real.normals.matrix @ real.vertices.T).max(axis=1)


def _point_to_polytope(v, A, b, slack):
    """Exact Euclidean distance from a point to {x : Ax <= b} (d <= 3).

    Projects onto the affine hulls of all independent active-row subsets and
    keeps feasible candidates; the projection onto the polytope is among
    them.
    """
    if ((A @ v) <= b + slack).all():
        return 0.0
    n, d = A.shape
    best = np.inf
    for size in range(1, d + 1):
        combos = _combinations_array(n, size)
        As = A[combos]                                   # (P, s, d)
        G = As @ As.transpose(0, 2, 1)
        det = np.linalg.det(G)
        ok = det > 1e-16
        if not ok.any():
            continue
        As_ok, combos_ok = As[ok], combos[ok]
        rhs = As_ok @ v - b[combos_ok]
        lam = np.linalg.solve(G[ok], rhs[:, :, None])[:, :, 0]
        x = v[None, :] - np.einsum("psd,ps->pd", As_ok, lam)
        feas = ((A @ x.T) <= (b + slack)[:, None]).all(axis=0)
        if feas.any():
            dist = np.linalg.norm(x[feas] - v[None, :], axis=1).min()
            best = min(best, float(dist))
    if not np.isfinite(best):
        raise NumericalFailure("point projection found no feasible candidate")
    return best


def _directed_distance(source: PolytopeRealization, target: PolytopeRealization):
    A = target.normals.matrix
    b = target.b
    slack = feasibility_slack(b)
    return max(_point_to_polytope(v, A, b, slack) for v in source.vertices)


def hausdorff_polytopes(real1: PolytopeRealization,
                        real2: PolytopeRealization) -> float:
    """Exact Hausdorff distance between two realized polytopes.

    The supremum over a polytope of the (convex) distance-to-the-other-set
    function is attained at a vertex, so vertex-to-polytope projections give
    the exact value.
    """
    if real1.vertex_count == 0 or real2.vertex_count == 0:
        raise EmptyPolytope("realizations must be nonempty")
    return max(_directed_distance(real1, real2),
               _directed_distance(real2, real1))


def phi_expansion_ratio(real1: PolytopeRealization,
                        real2: PolytopeRealization) -> float:
    """Observed dist_H / |b - b'|_inf for a pair of realizations.

    A diagnostic only: the library asserts no Lipschitz constant for the
    coordinates-to-polytope direction.
    """
    gap = float(np.abs(real1.b - real2.b).max())
    dist = hausdorff_polytopes(real1, real2)
    if gap == 0.0:
        return np.inf if dist > 0 else 1.0
    return dist / gap


def facet_dimension(real: PolytopeRealization, k: int) -> int:
    """Affine dimension of facet k's vertex hull; -1 for an empty facet."""
    idx = real.facet_vertices[k]
    if not idx:
        return -1
    pts = real.vertices[list(idx)]
    if pts.shape[0] == 1:
        return 0
    diffs = pts[1:] - pts[0]
    scale = 1.0 + float(np.abs(pts).max())
    sv = np.linalg.svd(diffs, compute_uv=False)
    return int((sv > 1e-7 * scale).sum())


@dataclass
class DegeneracyReport:
    """Boundary-stratum diagnosis of admissible coordinates."""

    flat: bool
    flat_witnesses: tuple
    facet_witnesses: dict

    @property
    def degenerate_facets(self) -> tuple:
        return tuple(sorted(self.facet_witnesses))


def diagnose_boundary(b, cone: CompiledCone) -> DegeneracyReport:
    """Read the boundary strata off the active membership columns.

    An active diamond column certifies a flat polytope (dimension < d); an
    active touching column at facet k certifies a degenerate facet
    (dimension <= d-2).
    """
    cv = classify(b, cone)
    if cv.classification == EXTERIOR:
        raise ExteriorCoordinates("coordinates lie outside the cone")
    flat_witnesses = []
    facet_witnesses = {}
    for i in cv.active_columns:
        vertex = cone.columns[i].vertex
        if vertex.target == DIAMOND:
            flat_witnesses.append(vertex)
        else:
            facet_witnesses.setdefault(vertex.target, []).append(vertex)
    return DegeneracyReport(
        flat=bool(flat_witnesses),
        flat_witnesses=tuple(flat_witnesses),
        facet_witnesses={k: tuple(v) for k, v in facet_witnesses.items()})


# ---------------------------------------------------------------------------
# Realization geometry (consumed by objectives and constraints)

def _facet_tangent(a):
    return np.array([-a[1], a[0]])


def _endpoint_partner(real, vertex_index, k):
    """Most orthogonal companion row for a vertex on facet k."""
    a_k = real.normals.matrix[k]
    best, best_det = None, 0.0
    for i in real.active_sets[vertex_index]:
        if i == k:
            continue
        a_i = real.normals.matrix[i]
        det = abs(a_k[0] * a_i[1] - a_k[1] * a_i[0])
        if det > best_det:
            best, best_det = i, det
    return best, best_det


def facet_lengths_2d(real: PolytopeRealization, *, with_gradient=False):
    """Facet lengths of a planar realization, optionally with d(len)/db.

    The gradient is exact for coordinates whose facets all have two distinct
    endpoints (interior coordinates); endpoint motion follows the inverse of
    the 2x2 active system at each endpoint.
    """
    if real.dimension != 2:
        raise ValueError("facet lengths with gradients require d = 2")
    A = real.normals.matrix
    n = real.normals.count
    lengths = np.zeros(n)
    grad = np.zeros((n, n)) if with_gradient else None
    ks, partners, signs, tangents = [], [], [], []
    for k in range(n):
        idx = real.facet_vertices[k]
        if len(idx) < 2:
            continue
        t = _facet_tangent(A[k])
        proj = real.vertices[list(idx)] @ t
        lo = idx[int(np.argmin(proj))]
        hi = idx[int(np.argmax(proj))]
        lengths[k] = float(proj.max() - proj.min())
        if not with_gradient:
            continue
        for vertex_index, sign in ((hi, 1.0), (lo, -1.0)):
            partner, det = _endpoint_partner(real, vertex_index, k)
            if partner is None or det < 1e-12:
                raise NumericalFailure(
                    "degenerate facet endpoint; gradient undefined")
            ks.append(k)
            partners.append(partner)
            signs.append(sign)
            tangents.append(t)
    if with_gradient and ks:
        ak = A[ks]
        ap = A[partners]
        det = ak[:, 0] * ap[:, 1] - ak[:, 1] * ap[:, 0]
        # Columns of the inverse of rows [a_k; a_partner].
        col_k = np.column_stack([ap[:, 1], -ap[:, 0]]) / det[:, None]
        col_p = np.column_stack([-ak[:, 1], ak[:, 0]]) / det[:, None]
        t_arr = np.array(tangents)
        s_arr = np.array(signs)
        np.add.at(grad, (ks, ks), s_arr * (t_arr * col_k).sum(axis=1))
        np.add.at(grad, (ks, partners), s_arr * (t_arr * col_p).sum(axis=1))
    return (lengths, grad) if with_gradient else lengths


def ordered_vertices_2d(real: PolytopeRealization) -> np.ndarray:
    centroid = real.vertices.mean(axis=0)
    rel = real.vertices - centroid
    order = np.argsort(np.arctan2(rel[:, 1], rel[:, 0]))
    return real.vertices[order]


def polygon_area(real: PolytopeRealization) -> float:
    """Shoelace area of a planar realization."""
    if real.dimension != 2:
        raise ValueError("shoelace area requires d = 2")
    pts = ordered_vertices_2d(real)
    if pts.shape[0] < 3:
        return 0.0
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def _facet_polygon_area_3d(real, k):
    idx = real.facet_vertices[k]
    if len(idx) < 3:
        return 0.0
    pts = real.vertices[list(idx)]
    a = real.normals.matrix[k]
    seed = np.zeros(3)
    seed[int(np.argmin(np.abs(a)))] = 1.0
    u = np.cross(a, seed)
    u /= np.linalg.norm(u)
    w = np.cross(a, u)
    center = pts.mean(axis=0)
    uu = (pts - center) @ u
    ww = (pts - center) @ w
    order = np.argsort(np.arctan2(ww, uu))
    uu, ww = uu[order], ww[order]
    return 0.5 * float(np.abs(np.dot(uu, np.roll(ww, -1)) - np.dot(ww, np.roll(uu, -1))))


def facet_measures(real: PolytopeRealization) -> np.ndarray:
    """(d-1)-volume of every facet (length for d=2, polygon area for d=3)."""
    if real.dimension == 2:
        return facet_lengths_2d(real)
    if real.dimension == 3:
        return np.array([_facet_polygon_area_3d(real, k)
                         for k in range(real.normals.count)])
    raise ValueError("facet measures implemented for d in {2, 3}")


def polytope_volume(real: PolytopeRealization) -> float:
    """Volume via the support decomposition V = (1/d) sum_k b_k |facet_k|.

    Exact when b holds the attained support values, which realize()
    guarantees for admissible coordinates.  For d = 2 the shoelace value is
    used directly.
    """
    if real.dimension == 2:
        return polygon_area(real)
    measures = facet_measures(real)
    return float(real.b @ measures) / real.dimension


def perimeter_2d(real: PolytopeRealization) -> float:
    return float(facet_lengths_2d(real).sum())
