"""Offline compilation of the coordinate cone.

Enumerates the extreme points of the normalized dual slice
{p >= 0 : A^T p = 0, 1^T p = 1} and of the dual polyhedra
{p >= 0 : A^T p = a_k}, assembles the inequality matrix whose columns test
cone membership via column . b >= 0, and prunes touching conditions whose
generator cone strictly contains the cone of another condition.

Enumeration runs over index subsets: supports of dual vertices are linearly
independent sets, so each subset is checked by one small least-squares solve
(batched with numpy) and kept when the solution is strictly positive.
"""

from dataclasses import dataclass, field
import itertools

import numpy as np

from .errors import UnboundedSpace
from .normals import NormalSystem, check_bounded

RESIDUAL_TOL = 1e-9
WEIGHT_TOL = 1e-9
INDEP_TOL = 1e-10
DIAMOND = "diamond"

# Subset enumeration costs C(N, d) small solves; sizes above these bounds
# need an explicit override.
SIZE_GUARDS = {2: 512, 3: 64}
_CHUNK = 200_000


@dataclass(frozen=True)
class DualVertex:
    """A dual extreme point identified by its (linearly independent) support.

    target is DIAMOND for vertices of the normalized slice, or the facet
    index k for vertices of {p >= 0 : A^T p = a_k} other than e_k.
    """

    target: object
    support: tuple
    weights: tuple

    def vector(self, n: int) -> np.ndarray:
        p = np.zeros(n)
        p[list(self.support)] = self.weights
        return p


@dataclass(frozen=True)
class ConeColumn:
    vector: np.ndarray
    vertex: DualVertex
    pruned: bool = False


@dataclass(eq=False)
class CompiledCone:
    """Columns encoding membership: b admissible iff column . b >= 0 for all.

    Diamond columns are the slice vertices themselves; a touching column for
    vertex p at facet k stores p - e_k.  Pruned columns stay available (the
    membership test over surviving columns is equivalent).
    """

    normal_system: NormalSystem
    columns: tuple
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def count(self) -> int:
        return len(self.columns)

    @property
    def diamond_count(self) -> int:
        return sum(1 for c in self.columns if c.vertex.target == DIAMOND)

    @property
    def touching_count(self) -> int:
        return sum(1 for c in self.columns if c.vertex.target != DIAMOND)

    @property
    def pruned_count(self) -> int:
        return sum(1 for c in self.columns if c.pruned)

    def touching_for(self, k):
        return tuple(c for c in self.columns if c.vertex.target == k)

    def column_indices(self, include_pruned=False, touching_only=False):
        key = (include_pruned, touching_only)
        idx = self._cache.get(("idx", key))
        if idx is None:
            idx = np.array(
                [i for i, c in enumerate(self.columns)
                 if (include_pruned or not c.pruned)
                 and (not touching_only or c.vertex.target != DIAMOND)],
                dtype=np.intp)
            self._cache[("idx", key)] = idx
        return idx

    def matrix(self, include_pruned=False, touching_only=False):
        """Selected columns stacked as an (N, m) array."""
        key = (include_pruned, touching_only)
        mat = self._cache.get(("mat", key))
        if mat is None:
            idx = self.column_indices(include_pruned, touching_only)
            n = self.normal_system.count
            mat = np.empty((n, idx.size))
            for j, i in enumerate(idx):
                mat[:, j] = self.columns[i].vector
            mat.setflags(write=False)
            self._cache[("mat", key)] = mat
        return mat


def _size_guard(ns: NormalSystem, allow_large: bool):
    if allow_large:
        return
    limit = SIZE_GUARDS.get(ns.dimension, 32)
    if ns.count > limit:
        raise ValueError(
            f"subset enumeration over N={ns.count}, d={ns.dimension} exceeds "
            f"the guard ({limit}); pass allow_large=True to override")


def _positive_combinations(cols, rhs, pool, sizes):
    """Supports S (subsets of `pool`, |S| in `sizes`) with independent
    columns cols[:, S] and a strictly positive solution of
    cols[:, S] w = rhs.  Yields (support tuple, weights tuple)."""
    found = []
    pool = np.asarray(pool, dtype=np.intp)
    for size in sizes:
        if size < 1 or size > pool.size:
            continue
        combo_iter = itertools.combinations(range(pool.size), size)
        while True:
            block = list(itertools.islice(combo_iter, _CHUNK))
            if not block:
                break
            local = np.array(block, dtype=np.intp)
            combos = pool[local]
            E = cols.T[combos].transpose(0, 2, 1)  # (P, m, size)
            U, S, Vt = np.linalg.svd(E, full_matrices=False)
            ok = S[:, -1] > INDEP_TOL
            if not ok.any():
                continue
            U, S, Vt, combos, E = U[ok], S[ok], Vt[ok], combos[ok], E[ok]
            t = np.einsum("pms,m->ps", U, rhs) / S
            w = np.einsum("psk,ps->pk", Vt, t)
            resid = np.abs(np.einsum("pms,ps->pm", E, w) - rhs).max(axis=1)
            keep = (resid <= RESIDUAL_TOL) & (w > WEIGHT_TOL).all(axis=1)
            for c, ww in zip(combos[keep], w[keep]):
                found.append((tuple(int(i) for i in c),
                              tuple(float(x) for x in ww)))
    found.sort(key=lambda item: item[0])
    return found


def extreme_points_diamond(ns: NormalSystem, *, allow_large=False):
    """Extreme points of {p >= 0 : A^T p = 0, 1^T p = 1}.

    Supports are sets whose lifted columns (a_i, 1) are linearly
    independent, hence of size at most d+1.
    """
    _size_guard(ns, allow_large)
    cols = np.vstack([ns.matrix.T, np.ones((1, ns.count))])
    rhs = np.zeros(ns.dimension + 1)
    rhs[-1] = 1.0
    reps = _positive_combinations(cols, rhs, np.arange(ns.count),
                                  range(2, ns.dimension + 2))
    return [DualVertex(DIAMOND, s, w) for s, w in reps]


def extreme_points_touching(ns: NormalSystem, k: int, *, allow_large=False):
    """Extreme points of {p >= 0 : A^T p = a_k} other than e_k.

    Every such vertex has p_k = 0, so index k is excluded from the pool.
    """
    _size_guard(ns, allow_large)
    pool = np.array([i for i in range(ns.count) if i != k], dtype=np.intp)
    reps = _positive_combinations(ns.matrix.T, ns.matrix[k], pool,
                                  range(1, ns.dimension + 1))
    return [DualVertex(int(k), s, w) for s, w in reps]


def dual_vertices_for_direction(ns: NormalSystem, c, *, pool=None,
                                allow_large=False):
    """Extreme points of {p >= 0 : A^T p = c} for an arbitrary direction c,
    optionally restricted to supports within `pool`."""
    _size_guard(ns, allow_large)
    if pool is None:
        pool = np.arange(ns.count)
    c = np.asarray(c, dtype=float)
    reps = _positive_combinations(ns.matrix.T, c, pool,
                                  range(1, ns.dimension + 1))
    return [DualVertex(None, s, w) for s, w in reps]


def diamond_remark_holds(ns: NormalSystem, vertex: DualVertex) -> bool:
    """For each i0 in the support, the remaining normals must stay linearly
    independent (equivalent vertex characterization of the slice)."""
    support = list(vertex.support)
    for i0 in support:
        rest = [i for i in support if i != i0]
        if not rest:
            continue
        sub = ns.matrix[rest]
        rank = np.linalg.matrix_rank(sub, tol=INDEP_TOL)
        if rank < len(rest):
            return False
    return True


def compile_cone(ns: NormalSystem, *, allow_large=False) -> CompiledCone:
    """Assemble the membership-test matrix for a bounded polytope space.

    Columns are the diamond vertices followed, facet by facet, by the
    touching differences p - e_k.  Raises UnboundedSpace when the system
    admits unbounded polyhedra.
    """
    _size_guard(ns, allow_large)
    if not check_bounded(ns):
        raise UnboundedSpace("normal system spans unbounded polyhedra")
    n = ns.count
    columns = []
    for vertex in extreme_points_diamond(ns, allow_large=allow_large):
        columns.append(ConeColumn(vertex.vector(n), vertex))
    for k in range(n):
        for vertex in extreme_points_touching(ns, k, allow_large=allow_large):
            vec = vertex.vector(n)
            vec[k] -= 1.0
            columns.append(ConeColumn(vec, vertex))
    for col in columns:
        if np.abs(col.vector).max() <= WEIGHT_TOL:
            raise UnboundedSpace("zero membership column; inconsistent system")
        col.vector.setflags(write=False)
    return CompiledCone(ns, tuple(columns))


def _cone_contains(ns: NormalSystem, small: DualVertex, big: DualVertex) -> bool:
    """Whether every generator of cone({a_i : i in small.support}) is a
    nonnegative combination over big.support."""
    gens = ns.matrix[list(big.support)].T  # (d, s), independent columns
    pinv = np.linalg.pinv(gens)
    for i in small.support:
        lam = pinv @ ns.matrix[i]
        if (lam < -INDEP_TOL).any():
            return False
        if np.abs(gens @ lam - ns.matrix[i]).max() > RESIDUAL_TOL:
            return False
    return True


def _prune_group_generic(ns, vertices):
    """Indices (within the group) of vertices whose cone strictly contains
    another group member's cone.

    Each vertex gets a representability mask over all normals (one
    pseudoinverse solve against the whole matrix), so a containment test is
    a mask lookup on the candidate's support.
    """
    representable = []
    for vertex in vertices:
        gens = ns.matrix[list(vertex.support)].T
        lam = np.linalg.pinv(gens) @ ns.matrix.T          # (s, N)
        resid = np.abs(gens @ lam - ns.matrix.T).max(axis=0)
        representable.append((resid <= RESIDUAL_TOL) &
                             (lam >= -INDEP_TOL).all(axis=0))
    pruned = set()
    supports = [set(v.support) for v in vertices]
    for i_small in range(len(vertices)):
        small = list(vertices[i_small].support)
        for i_big in range(len(vertices)):
            if i_big == i_small or i_big in pruned:
                continue
            if supports[i_small] == supports[i_big]:
                continue
            if representable[i_big][small].all():
                pruned.add(i_big)
    return pruned


def _prune_group_planar(ns, k, vertices):
    """d = 2 fast path: a planar touching cone is the angular interval
    spanned by its two support normals around a_k, so containment is
    interval containment."""
    theta = np.arctan2(ns.matrix[:, 1], ns.matrix[:, 0])
    left = np.empty(len(vertices))
    right = np.empty(len(vertices))
    for j, vertex in enumerate(vertices):
        gaps = []
        for i in vertex.support:
            delta = np.mod(theta[i] - theta[k] + np.pi, 2 * np.pi) - np.pi
            gaps.append(delta)
        gaps.sort()
        if len(gaps) != 2 or not (gaps[0] < 0 < gaps[1]):
            # Unexpected support structure; fall back to the generic test.
            return None
        right[j], left[j] = -gaps[0], gaps[1]
    tol = 1e-12
    inside = (left[:, None] <= left[None, :] + tol) & \
             (right[:, None] <= right[None, :] + tol)
    strict = (left[:, None] < left[None, :] - tol) | \
             (right[:, None] < right[None, :] - tol)
    witness = inside & strict
    return set(np.nonzero(witness.any(axis=0))[0])


def prune_redundant(cone: CompiledCone) -> CompiledCone:
    """Flag touching columns whose generator cone strictly contains the
    generator cone of another touching column for the same facet.

    Strictness is decided by support inequality: supports are independent
    sets, so equal cones force equal supports.  Diamond columns are never
    pruned.  Pruning is conservative: the surviving columns test the same
    membership predicate.  No minimality claim is made for the surviving
    system; it may still contain redundancies of other kinds.
    """
    ns = cone.normal_system
    by_target = {}
    for idx, col in enumerate(cone.columns):
        if col.vertex.target != DIAMOND:
            by_target.setdefault(col.vertex.target, []).append(idx)

    pruned = set()
    for k, indices in by_target.items():
        vertices = [cone.columns[i].vertex for i in indices]
        local = None
        if ns.dimension == 2:
            local = _prune_group_planar(ns, k, vertices)
        if local is None:
            local = _prune_group_generic(ns, vertices)
        pruned.update(indices[j] for j in local)

    columns = tuple(
        ConeColumn(col.vector, col.vertex, pruned=(i in pruned) or col.pruned)
        for i, col in enumerate(cone.columns))
    return CompiledCone(ns, columns)
