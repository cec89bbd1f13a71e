"""Nested spherical-grid normal systems and approximation constants.

Grids are generated from dyadic angle indices so that coarse rows reappear
bitwise-identically in every finer level; nesting is then a plain
subsequence property.  The two constants attached to a system measure how
densely its normals cover the sphere (delta) and how efficiently dual
representations average nearby normals (kappa).
"""

from dataclasses import dataclass, field

import numpy as np

from .cone import dual_vertices_for_direction
from .coordinates import CoordinateVector, EXTERIOR, UNCLASSIFIED, canonicalize, classify
from .errors import (BadDimension, BadLevel, EmptyPolytope,
                     ExteriorCoordinates, NumericalFailure, UnboundedSpace)
from .lp import LinearProgram, OPTIMAL, _combinations_array, solve_lp
from .normals import NormalSystem, check_bounded, validate_normals
from .spheres import fibonacci_sphere, sphere_mesh_estimate

MIN_SAMPLES = {2: 1000, 3: 10_000}


def spherical_grid_normals(d: int, k: int) -> NormalSystem:
    """Normals on the dyadic spherical grid with angle step pi / 2^k.

    Poles and the azimuthal seam are deduplicated by index arithmetic, so
    rows of level k appear bitwise among rows of level k+1.
    """
    if d == 2:
        if k < 1:
            raise BadLevel("planar grids start at level 1")
        step = np.pi / 2 ** k
        angles = step * np.arange(2 ** (k + 1))
        rows = np.column_stack([np.cos(angles), np.sin(angles)])
    elif d == 3:
        if k < 2:
            raise BadLevel("spherical grids start at level 2")
        step = np.pi / 2 ** k
        rows = []
        for i1 in range(2 ** k + 1):
            theta1 = step * i1
            azimuthal = [0] if i1 in (0, 2 ** k) else range(2 ** (k + 1))
            for i2 in azimuthal:
                theta2 = step * i2
                rows.append((np.cos(theta1),
                             np.sin(theta1) * np.cos(theta2),
                             np.sin(theta1) * np.sin(theta2)))
        rows = np.array(rows)
    else:
        raise BadDimension("grid generators cover d in {2, 3}")
    ns = validate_normals(rows)
    if not check_bounded(ns):
        raise UnboundedSpace("grid produced a non-spanning normal set")
    return ns


def _subsequence_map(coarse: np.ndarray, fine: np.ndarray):
    """Positions of the coarse rows inside the fine matrix, in order;
    None when the coarse rows are not a subsequence."""
    positions = np.empty(coarse.shape[0], dtype=np.intp)
    j = 0
    for i in range(coarse.shape[0]):
        while j < fine.shape[0] and not np.array_equal(fine[j], coarse[i]):
            j += 1
        if j == fine.shape[0]:
            return None
        positions[i] = j
        j += 1
    return positions


@dataclass(eq=False)
class GalerkinSequence:
    """Nested normal systems: rows of each level reappear, in order, in the
    next one, and every level spans a space of bounded polytopes."""

    levels: tuple
    row_maps: tuple
    level_rates: list = field(default_factory=list)

    @classmethod
    def from_systems(cls, systems):
        systems = tuple(systems)
        if not systems:
            raise ValueError("sequence needs at least one level")
        maps = []
        for coarse, fine in zip(systems, systems[1:]):
            positions = _subsequence_map(coarse.matrix, fine.matrix)
            if positions is None:
                raise ValueError("levels are not nested row-subsequences")
            maps.append(positions)
        for ns in systems:
            if not check_bounded(ns):
                raise UnboundedSpace("every level must span polytopes")
        return cls(levels=systems, row_maps=tuple(maps))

    @classmethod
    def from_grid(cls, d: int, ks):
        ks = list(ks)
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise BadLevel("grid levels must be strictly increasing")
        return cls.from_systems([spherical_grid_normals(d, k) for k in ks])

    def row_map(self, from_level: int, to_level: int) -> np.ndarray:
        """Indices of the from-level rows inside the to-level matrix."""
        if not 0 <= from_level <= to_level < len(self.levels):
            raise ValueError("invalid level pair")
        positions = np.arange(self.levels[from_level].count)
        for step in range(from_level, to_level):
            positions = self.row_maps[step][positions]
        return positions


def estimate_delta(ns: NormalSystem, samples: int | None = None) -> float:
    """Covering density of the normals in the unit sphere.

    d=2: exact value from the largest angular gap (the farthest direction
    within a gap is its midpoint).  d=3: sampled supremum inflated by the
    probe mesh; an estimate, not a certificate.
    """
    d = ns.dimension
    if samples is None:
        samples = 2048 if d == 2 else MIN_SAMPLES[3]
    if d in MIN_SAMPLES and samples < MIN_SAMPLES[d]:
        raise ValueError(f"need at least {MIN_SAMPLES[d]} samples for d={d}")
    if d == 2:
        angles = np.sort(ns.angles())
        gaps = np.diff(np.append(angles, angles[0] + 2 * np.pi))
        return float(2.0 * np.sin(gaps.max() / 4.0))
    if d != 3:
        raise BadDimension("delta estimation covers d in {2, 3}")
    dirs = fibonacci_sphere(samples)
    worst = 0.0
    chunk = max(1, 2_000_000 // max(ns.count, 1))
    for start in range(0, samples, chunk):
        block = dirs[start:start + chunk]
        dots = np.clip(block @ ns.matrix.T, -1.0, 1.0)
        nearest = np.sqrt(np.maximum(0.0, 2.0 - 2.0 * dots.max(axis=1)))
        worst = max(worst, float(nearest.max()))
    mesh = sphere_mesh_estimate(dirs)
    return worst + mesh


def _representation_cost(ns, c, support, weights):
    weights = np.asarray(weights)
    shrunk = c / weights.sum()
    gaps = np.linalg.norm(ns.matrix[list(support)] - shrunk, axis=1)
    return float(weights @ gaps)


_MIX_TS = np.linspace(0.0, 1.0, 33)[1:-1]


def _mixture_minimum(ns, c, rep_a, rep_b):
    """Cheapest cost along the segment between two dual representations."""
    support = sorted(set(rep_a[0]) | set(rep_b[0]))
    index = {s: j for j, s in enumerate(support)}
    qa = np.zeros(len(support))
    qb = np.zeros(len(support))
    for s, w in zip(*rep_a):
        qa[index[s]] += w
    for s, w in zip(*rep_b):
        qb[index[s]] += w
    q = (1.0 - _MIX_TS[:, None]) * qa + _MIX_TS[:, None] * qb
    r = q.sum(axis=1)
    diffs = ns.matrix[support][None, :, :] - c[None, None, :] / r[:, None, None]
    gaps = np.linalg.norm(diffs, axis=2)
    return float((q * gaps).sum(axis=1).min())


def _pair_representations_2d(ns, c):
    """All strictly positive two-normal (and aligned one-normal)
    representations of c, batched: (supports, weights, costs)."""
    A = ns.matrix
    n = ns.count
    combos = _combinations_array(n, 2)
    ai, aj = A[combos[:, 0]], A[combos[:, 1]]
    det = ai[:, 0] * aj[:, 1] - ai[:, 1] * aj[:, 0]
    ok = np.abs(det) > 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        wi = (aj[:, 1] * c[0] - aj[:, 0] * c[1]) / det
        wj = (ai[:, 0] * c[1] - ai[:, 1] * c[0]) / det
    ok &= (wi > 1e-12) & (wj > 1e-12)
    supports = combos[ok]
    weights = np.column_stack([wi[ok], wj[ok]])
    r = weights.sum(axis=1)
    shrunk = c[None, :] / r[:, None]
    gap_i = np.linalg.norm(A[supports[:, 0]] - shrunk, axis=1)
    gap_j = np.linalg.norm(A[supports[:, 1]] - shrunk, axis=1)
    costs = weights[:, 0] * gap_i + weights[:, 1] * gap_j

    dots = A @ c
    aligned = np.linalg.norm(dots[:, None] * A - c[None, :], axis=1) <= 1e-9
    aligned &= dots > 1e-12
    for i in np.nonzero(aligned)[0]:
        supports = np.vstack([supports, [i, i]])
        weights = np.vstack([weights, [dots[i], 0.0]])
        costs = np.append(costs, dots[i] * np.linalg.norm(A[i] - c / dots[i]))
    return supports, weights, costs


def _direction_cost_2d(ns, c):
    supports, weights, costs = _pair_representations_2d(ns, c)
    if costs.size == 0:
        raise NumericalFailure("direction admits no dual representation")
    order = np.argsort(costs)
    best = float(costs[order[0]])
    leaders = []
    for idx in order[:4]:
        sup = supports[idx]
        if sup[0] == sup[1]:
            leaders.append(((int(sup[0]),), (float(weights[idx, 0]),)))
        else:
            leaders.append(((int(sup[0]), int(sup[1])),
                            tuple(float(w) for w in weights[idx])))
    for a in range(len(leaders)):
        for b in range(a + 1, len(leaders)):
            best = min(best, _mixture_minimum(ns, c, leaders[a], leaders[b]))
    return best


def _direction_cost(ns, c, pool=None):
    if ns.dimension == 2 and pool is None:
        return _direction_cost_2d(ns, c)
    vertices = dual_vertices_for_direction(ns, c, pool=pool)
    if not vertices:
        raise NumericalFailure("direction admits no dual representation")
    costs = sorted((_representation_cost(ns, c, v.support, v.weights), i)
                   for i, v in enumerate(vertices))
    best = costs[0][0]
    leaders = [(vertices[i].support, vertices[i].weights)
               for _, i in costs[:4]]
    for a in range(len(leaders)):
        for b in range(a + 1, len(leaders)):
            best = min(best, _mixture_minimum(ns, c, leaders[a], leaders[b]))
    return best


def _subset_solvers(ns):
    """Per subset size: (normals rows, equation matrix, pseudoinverse) for
    every linearly independent index subset, precomputed once."""
    from .cone import INDEP_TOL
    data = []
    for size in range(1, ns.dimension + 1):
        combos = _combinations_array(ns.count, size)
        E = ns.matrix[combos].transpose(0, 2, 1)        # (S, d, size)
        U, S, Vt = np.linalg.svd(E, full_matrices=False)
        ok = S[:, -1] > INDEP_TOL
        U, S, Vt = U[ok], S[ok], Vt[ok]
        pinv = Vt.transpose(0, 2, 1) @ (U.transpose(0, 2, 1) / S[:, :, None])
        data.append((ns.matrix[combos[ok]], E[ok], pinv))
    return data


def _vertex_cost_minima(ns, dirs, solvers, chunk=32):
    """Per direction, the cheapest cost over all dual vertices (supports of
    every independent subset), fully batched."""
    out = np.full(dirs.shape[0], np.inf)
    for start in range(0, dirs.shape[0], chunk):
        C = dirs[start:start + chunk]
        best = np.full(C.shape[0], np.inf)
        for rows, E, pinv in solvers:
            W = np.einsum("psd,cd->cps", pinv, C)
            resid = np.einsum("pds,cps->cpd", E, W) - C[:, None, :]
            valid = (np.abs(resid).max(axis=2) <= 1e-9) & \
                    (W > 1e-12).all(axis=2)
            if not valid.any():
                continue
            r = W.sum(axis=2)
            with np.errstate(divide="ignore", invalid="ignore"):
                shrunk = C[:, None, :] / r[:, :, None]
                gaps = np.linalg.norm(rows[None, :, :, :] - shrunk[:, :, None, :],
                                      axis=3)
                costs = (W * gaps).sum(axis=2)
            costs[~valid] = np.inf
            best = np.minimum(best, costs.min(axis=1))
        out[start:start + chunk] = best
    return out


def estimate_kappa(ns: NormalSystem, samples: int | None = None) -> float:
    """Sampled supremum over directions of the cheapest dual representation
    cost; minimization runs over dual vertices and two-point mixtures, so
    the per-direction value over-estimates the true infimum.  Reported as
    an estimate, not a certificate.

    d=2 sampling includes all adjacent-pair angular midpoints, where the
    supremum sits for evenly spread systems.  d=3 batches the vertex
    minima over precomputed subset solvers and refines with mixtures only
    the directions that could carry the supremum (mixtures never increase
    a per-direction value).
    """
    d = ns.dimension
    if samples is None:
        samples = 1024 if d == 2 else MIN_SAMPLES[3]
    if d in MIN_SAMPLES and samples < MIN_SAMPLES[d]:
        raise ValueError(f"need at least {MIN_SAMPLES[d]} samples for d={d}")
    if not check_bounded(ns):
        raise UnboundedSpace("kappa requires a space of polytopes")
    if d == 2:
        angles = np.sort(ns.angles())
        mids = angles + np.diff(np.append(angles, angles[0] + 2 * np.pi)) / 2.0
        thetas = np.concatenate([2 * np.pi * np.arange(samples) / samples, mids])
        dirs = np.column_stack([np.cos(thetas), np.sin(thetas)])
        return max(_direction_cost(ns, c) for c in dirs)
    if d != 3:
        raise BadDimension("kappa estimation covers d in {2, 3}")
    dirs = fibonacci_sphere(samples)
    vertex_minima = _vertex_cost_minima(ns, dirs, _subset_solvers(ns))
    if not np.isfinite(vertex_minima).all():
        raise NumericalFailure("a direction admits no dual representation")
    worst = -np.inf
    for idx in np.argsort(-vertex_minima):
        if vertex_minima[idx] <= worst:
            break
        worst = max(worst, _direction_cost(ns, dirs[idx]))
    return float(worst)


def adjacent_rho(ns: NormalSystem) -> float:
    """Minimum dot product of angularly adjacent normals (d = 2)."""
    angles = np.sort(ns.angles())
    nxt = np.roll(angles, -1)
    gaps = np.mod(nxt - angles, 2 * np.pi)
    return float(np.cos(gaps.max()))


def kappa_rho_bound(rho: float) -> float:
    """Upper bound sqrt((2 - 2 rho) / rho) valid whenever adjacent-pair
    representations exist with pairwise dot products >= rho > 0."""
    if rho <= 0.0:
        return np.inf
    return float(np.sqrt((2.0 - 2.0 * rho) / rho))


def embed_coordinates(b, seq: GalerkinSequence, from_level: int,
                      to_level: int, *, coarse_cone=None) -> CoordinateVector:
    """Coordinates of a coarse-level polytope inside a finer level.

    Shared rows are copied; each new row gets the support value of the
    coarse polytope (one LP per row).  The result always lands on the
    boundary of the fine cone.
    """
    if from_level >= to_level:
        raise ValueError("target level must be finer than the source")
    b = np.asarray(b, dtype=float)
    coarse = seq.levels[from_level]
    fine = seq.levels[to_level]
    if b.shape != (coarse.count,):
        raise ValueError("coordinate length does not match the source level")

    if coarse_cone is not None:
        if classify(b, coarse_cone).classification == EXTERIOR:
            raise ExteriorCoordinates("source coordinates are not admissible")
    else:
        try:
            canonical = canonicalize(b, coarse)
        except EmptyPolytope as exc:
            raise ExteriorCoordinates("source coordinates are infeasible") from exc
        tol = 1e-7 * (1.0 + float(np.abs(b).max()))
        if np.abs(canonical.b - b).max() > tol:
            raise ExteriorCoordinates("source coordinates are not minimal")

    mapping = seq.row_map(from_level, to_level)
    fine_b = np.empty(fine.count)
    copied = np.zeros(fine.count, dtype=bool)
    fine_b[mapping] = b
    copied[mapping] = True
    for i in np.nonzero(~copied)[0]:
        outcome = solve_lp(LinearProgram(fine.matrix[i], coarse.matrix, b))
        if outcome.status != OPTIMAL:
            raise NumericalFailure("embedding support LP did not solve")
        fine_b[i] = outcome.value
    return CoordinateVector(fine_b, UNCLASSIFIED)
