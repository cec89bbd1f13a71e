"""Linear-programming kernel.

Solves max{c.x : Ax <= b} with a two-phase primal simplex (Bland's rule) run
on the dual standard form min{b.p : A^T p = c, p >= 0}.  Every outcome carries
a certificate: an optimal dual vector, or a Farkas vector proving emptiness.
Also hosts exhaustive vertex enumeration for desk-scale H-polytopes.
"""

from dataclasses import dataclass
from functools import lru_cache
import itertools

import numpy as np

from .errors import NumericalFailure, UnboundedRegion

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_PIVOT_TOL = 1e-10
_COST_TOL = 1e-9
RANK_TOL = 1e-10
VERTEX_DEDUP_TOL = 1e-8


def feasibility_slack(rhs):
    """Per-row feasibility tolerance 1e-9 * (1 + |b_i|)."""
    return 1e-9 * (1.0 + np.abs(rhs))


@dataclass
class LinearProgram:
    """max{objective . x : constraint_matrix x <= rhs}."""

    objective: np.ndarray
    constraint_matrix: np.ndarray
    rhs: np.ndarray
    sense: str = "maximize"

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        self.constraint_matrix = np.asarray(self.constraint_matrix, dtype=float)
        self.rhs = np.asarray(self.rhs, dtype=float)
        if self.sense != "maximize":
            raise ValueError("only maximize problems are supported")
        if self.constraint_matrix.ndim != 2:
            raise ValueError("constraint matrix must be 2-dimensional")
        m, d = self.constraint_matrix.shape
        if self.objective.shape != (d,):
            raise ValueError("objective dimension mismatch")
        if self.rhs.shape != (m,):
            raise ValueError("rhs length must equal constraint row count")
        if d < 1 or m < 1:
            raise ValueError("need at least one variable and one constraint")
        for arr in (self.objective, self.constraint_matrix, self.rhs):
            if not np.isfinite(arr).all():
                raise ValueError("non-finite entries in linear program")


@dataclass
class LpOutcome:
    """Result of solve_lp with status-dependent certificate fields.

    optimal:    primal_point x, value c.x, dual_certificate p with
                p >= 0, A^T p = c, b.p = value.
    infeasible: dual_certificate p with p >= 0, A^T p = 0, b.p < 0.
    unbounded:  no certificate fields.
    """

    status: str
    primal_point: np.ndarray | None = None
    value: float | None = None
    dual_certificate: np.ndarray | None = None


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    colvals = T[:, col].copy()
    colvals[row] = 0.0
    T -= np.outer(colvals, T[row])
    basis[row] = col


def _run_simplex(T, basis, max_iter):
    """Bland-rule simplex on a canonical tableau; returns ('optimal', -1) or
    ('unbounded', entering_column)."""
    m = len(basis)
    for _ in range(max_iter):
        reduced = T[-1, :-1]
        negatives = np.nonzero(reduced < -_COST_TOL)[0]
        if negatives.size == 0:
            return OPTIMAL, -1
        j = int(negatives[0])
        col = T[:m, j]
        pos = np.nonzero(col > _PIVOT_TOL)[0]
        if pos.size == 0:
            return UNBOUNDED, j
        ratios = T[:m, -1][pos] / col[pos]
        best = ratios.min()
        ties = pos[ratios <= best + 1e-12 * (1.0 + abs(best))]
        row = int(min(ties, key=lambda i: basis[i]))
        _pivot(T, basis, row, j)
    raise NumericalFailure("simplex exceeded its iteration budget")


def _standard_form_simplex(cost, A_eq, b_eq):
    """min{cost . z : A_eq z = b_eq, z >= 0} by two-phase simplex.

    Returns (status, z, y, ray) where y are the equality multipliers
    (zero on rows found redundant in phase 1) and ray is an unbounded
    improving direction when status is 'unbounded'.
    """
    A_eq = np.asarray(A_eq, dtype=float)
    b_eq = np.asarray(b_eq, dtype=float)
    cost = np.asarray(cost, dtype=float)
    m, n = A_eq.shape
    max_iter = 2000 + 100 * (n + m)

    A = A_eq.copy()
    b = b_eq.copy()
    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0

    # Phase 1: artificial variables form the initial basis.
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    status, _ = _run_simplex(T, basis, max_iter)
    if status != OPTIMAL:
        raise NumericalFailure("phase-1 subproblem reported unbounded")
    scale = 1.0 + float(np.abs(b).max(initial=0.0))
    if -T[-1, -1] > 1e-8 * scale:
        return INFEASIBLE, None, None, None

    # Drive leftover artificials out of the basis; rows with no eligible
    # pivot are redundant equalities and get dropped.
    drop_rows = []
    for row in range(m):
        if basis[row] < n:
            continue
        eligible = np.nonzero(np.abs(T[row, :n]) > _PIVOT_TOL)[0]
        if eligible.size == 0:
            drop_rows.append(row)
        else:
            _pivot(T, basis, row, int(eligible[0]))
    keep = [i for i in range(m) if i not in drop_rows]
    if drop_rows:
        rows = keep + [m]
        T = T[rows]
    basis = [basis[i] for i in keep]
    mk = len(basis)

    # Phase 2 cost row over the original columns.
    T = np.hstack([T[:, :n], T[:, -1:]])
    T[-1, :n] = cost - cost[basis] @ T[:mk, :n]
    T[-1, -1] = -cost[basis] @ T[:mk, -1]
    status, enter = _run_simplex(T, basis, max_iter)

    orig_rows = np.array([i for i in range(m) if i not in drop_rows], dtype=int)
    B = A_eq[np.ix_(orig_rows, basis)] if mk else np.zeros((0, 0))

    if status == UNBOUNDED:
        ray = np.zeros(n)
        ray[enter] = 1.0
        if mk:
            try:
                ray[basis] = np.linalg.solve(B, -A_eq[orig_rows, enter])
            except np.linalg.LinAlgError as exc:
                raise NumericalFailure("singular basis at unbounded ray") from exc
        np.clip(ray, 0.0, None, out=ray)
        return UNBOUNDED, None, None, ray

    z = np.zeros(n)
    y = np.zeros(m)
    if mk:
        try:
            z[basis] = np.linalg.solve(B, b_eq[orig_rows])
            y[orig_rows] = np.linalg.solve(B.T, cost[basis])
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure("singular optimal basis") from exc
    np.clip(z, 0.0, None, out=z)
    residual = np.abs(A_eq @ z - b_eq).max(initial=0.0)
    if residual > 1e-6 * scale:
        raise NumericalFailure("optimal basis failed to reproduce equalities")
    return OPTIMAL, z, y, None


def solve_lp(lp: LinearProgram) -> LpOutcome:
    """Solve max{c.x : Ax <= b} with the status trichotomy and certificates."""
    A = lp.constraint_matrix
    b = lp.rhs
    c = lp.objective
    status, p, x, ray = _standard_form_simplex(cost=b, A_eq=A.T, b_eq=c)
    if status == OPTIMAL:
        return LpOutcome(OPTIMAL, primal_point=x, value=float(c @ x),
                         dual_certificate=p)
    if status == UNBOUNDED:
        # The dual decreases without bound along ray r >= 0 with A^T r = 0 and
        # b.r < 0, which is exactly a Farkas certificate for the primal.
        return LpOutcome(INFEASIBLE, dual_certificate=ray)
    feasible, certificate = farkas_feasible(A, b)
    if feasible:
        return LpOutcome(UNBOUNDED)
    return LpOutcome(INFEASIBLE, dual_certificate=certificate)


def farkas_feasible(A, b):
    """Decide whether {x : Ax <= b} is nonempty.

    Returns (True, None) or (False, p) with p >= 0, A^T p = 0 and b.p < 0.
    The certificate is found by minimizing b.p over the normalized dual
    slice {p >= 0 : A^T p = 0, 1^T p = 1}.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, d = A.shape
    A_eq = np.vstack([A.T, np.ones((1, m))])
    b_eq = np.zeros(d + 1)
    b_eq[-1] = 1.0
    status, p, _, _ = _standard_form_simplex(cost=b, A_eq=A_eq, b_eq=b_eq)
    if status == INFEASIBLE:
        # The slice is empty, so no nonnegative combination of the rows
        # vanishes and every right-hand side is feasible.
        return True, None
    if status != OPTIMAL:
        raise NumericalFailure("normalized dual slice reported unbounded")
    tol = 1e-9 * (1.0 + float(np.abs(b).max()))
    value = float(b @ p)
    if value < -tol:
        return False, p
    return True, None


@lru_cache(maxsize=64)
def _combinations_array(n, k):
    return np.array(list(itertools.combinations(range(n), k)), dtype=np.intp)


def _solve_subsystems(A, b, combos):
    """Solve the square systems A[S] x = b[S] for every index subset S,
    returning (solutions, mask of nonsingular subsets)."""
    M = A[combos]
    if A.shape[1] == 2:
        det = M[:, 0, 0] * M[:, 1, 1] - M[:, 0, 1] * M[:, 1, 0]
        ok = np.abs(det) > RANK_TOL
        r = b[combos]
        x = np.empty((combos.shape[0], 2))
        with np.errstate(divide="ignore", invalid="ignore"):
            x[:, 0] = (M[:, 1, 1] * r[:, 0] - M[:, 0, 1] * r[:, 1]) / det
            x[:, 1] = (M[:, 0, 0] * r[:, 1] - M[:, 1, 0] * r[:, 0]) / det
        return x, ok
    det = np.linalg.det(M)
    ok = np.abs(det) > RANK_TOL
    x = np.zeros((combos.shape[0], A.shape[1]))
    if ok.any():
        x[ok] = np.linalg.solve(M[ok], b[combos[ok]][:, :, None])[:, :, 0]
    return x, ok


def _recession_bounded(A):
    """True iff {x : Ax <= 0} = {0}, probed along +-e_i."""
    d = A.shape[1]
    zero = np.zeros(A.shape[0])
    for axis in range(d):
        for sign in (1.0, -1.0):
            c = np.zeros(d)
            c[axis] = sign
            if solve_lp(LinearProgram(c, A, zero)).status == UNBOUNDED:
                return False
    return True


def enumerate_primal_vertices(A, b, *, assume_bounded=False):
    """All extreme points of {x : Ax <= b} with their active index sets.

    Exhaustive d-subset enumeration: each nonsingular square subsystem is
    solved and kept when feasible.  Coincident solutions are merged (radius
    1e-8 in the max norm) and reported once with the full active set.
    Output is sorted by active index set.

    Raises UnboundedRegion when the region is nonempty but unbounded.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n, d = A.shape
    if n < d:
        raise ValueError("need at least d rows to form a vertex")
    slack = feasibility_slack(b)

    points = []
    combos_all = _combinations_array(n, d)
    chunk = 200_000
    for start in range(0, combos_all.shape[0], chunk):
        combos = combos_all[start:start + chunk]
        x, ok = _solve_subsystems(A, b, combos)
        if not ok.any():
            continue
        x = x[ok]
        feas = (A @ x.T <= (b + slack)[:, None]).all(axis=0)
        if feas.any():
            points.append(x[feas])

    merged = []
    if points:
        cand = np.vstack(points)
        cand = cand[np.lexsort(cand.T[::-1])]
        for v in cand:
            # Duplicates of one vertex agree to machine precision, so they
            # sort adjacently and a single-pass walk suffices.
            if merged and np.abs(v - merged[-1]).max() <= VERTEX_DEDUP_TOL:
                continue
            merged.append(v)

    if not merged:
        feasible, _ = farkas_feasible(A, b)
        if feasible:
            raise UnboundedRegion("feasible region has no vertex")
        return []

    if not assume_bounded and not _recession_bounded(A):
        raise UnboundedRegion("region has an unbounded direction")

    verts = np.array(merged)
    activity = np.abs(A @ verts.T - b[:, None]) <= slack[:, None]
    out = [(verts[j], tuple(np.nonzero(activity[:, j])[0].tolist()))
           for j in range(verts.shape[0])]
    out.sort(key=lambda item: item[1])
    return out
