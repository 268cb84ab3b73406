"""Dense two-phase revised simplex for small LPs.

Solves ``max c @ x  s.t.  A_ub @ x <= b_ub,  A_eq @ x == b_eq,  x >= 0``.

Pivoting follows Bland's rule (smallest eligible index enters, smallest
basic index leaves on ratio ties), so the returned basic solution is a
deterministic function of the variable order. The basis matrix is
refactorized with a dense solve every iteration: the LPs built here have
few rows (items + periods), so this costs little and avoids drift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError

PIVOT_TOL = 1e-11
COST_TOL = 1e-10
FEAS_TOL = 1e-9


@dataclass(frozen=True)
class SimplexResult:
    """Basic optimal solution in the caller's variable space."""

    x: np.ndarray
    objective: float
    basis: tuple
    iterations: int


def _scale_rows(A, b):
    norms = np.abs(A).max(axis=1) if A.size else np.zeros(A.shape[0])
    norms[norms == 0] = 1.0
    return A / norms[:, None], b / norms


def _iterate(A, b, c, basis, allowed, max_iter, it0):
    """Run primal simplex from a feasible basis; returns (basis, iterations)."""
    m, _ = A.shape
    it = it0
    cmax = max(1.0, float(np.abs(c).max()) if c.size else 1.0)
    while True:
        if it >= max_iter:
            raise NumericalError(f"simplex hit the iteration cap ({max_iter})")
        B = A[:, basis]
        try:
            xb = np.linalg.solve(B, b)
            y = np.linalg.solve(B.T, c[basis])
        except np.linalg.LinAlgError as exc:
            raise NumericalError("singular basis matrix") from exc
        d = (c - A.T @ y) / cmax
        d[basis] = 0.0
        candidates = np.flatnonzero((d > COST_TOL) & allowed)
        if candidates.size == 0:
            return basis, it
        enter = int(candidates[0])
        direction = np.linalg.solve(B, A[:, enter])
        rows = np.flatnonzero(direction > PIVOT_TOL)
        if rows.size == 0:
            raise NumericalError("LP is unbounded")
        ratios = np.maximum(xb[rows], 0.0) / direction[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * max(1.0, best)]
        leave = int(min(ties, key=lambda r: basis[r]))
        basis = basis.copy()
        basis[leave] = enter
        it += 1


def solve(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, *, max_iter: int = 50_000) -> SimplexResult:
    """Solve the LP and return a basic optimal solution.

    Raises:
        ValidationError: shapes are inconsistent or data are not finite.
        NumericalError: infeasible, unbounded, singular basis or iteration cap.
    """
    c = np.asarray(c, dtype=float)
    nv = c.size
    A_ub = np.zeros((0, nv)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, nv)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    A_eq = np.zeros((0, nv)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, nv)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    if A_ub.shape[0] != b_ub.size or A_eq.shape[0] != b_eq.size:
        raise ValidationError("constraint matrix and right-hand side disagree in length")
    for arr in (c, A_ub, b_ub, A_eq, b_eq):
        if not np.all(np.isfinite(arr)):
            raise ValidationError("LP data must be finite")

    mu, me = A_ub.shape[0], A_eq.shape[0]
    m = mu + me
    # Standard form [A_ub I; A_eq 0] [x; s] = b with b >= 0.
    A = np.zeros((m, nv + mu))
    A[:mu, :nv] = A_ub
    A[:mu, nv:] = np.eye(mu)
    A[mu:, :nv] = A_eq
    b = np.concatenate([b_ub, b_eq])
    A, b = _scale_rows(A, b)
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    # Slack columns are a ready-made basis for rows that kept their sign;
    # every other row gets an artificial.
    basis = np.empty(m, dtype=int)
    art_rows = []
    for r in range(m):
        if r < mu and not neg[r]:
            basis[r] = nv + r
        else:
            art_rows.append(r)
    n_std = nv + mu
    n_art = len(art_rows)
    A1 = np.hstack([A, np.zeros((m, n_art))])
    for k, r in enumerate(art_rows):
        A1[r, n_std + k] = 1.0
        basis[r] = n_std + k
    it = 0
    if n_art:
        c1 = np.zeros(n_std + n_art)
        c1[n_std:] = -1.0
        basis, it = _iterate(A1, b, c1, basis, np.ones(n_std + n_art, bool), max_iter, 0)
        xb = np.linalg.solve(A1[:, basis], b)
        infeas = float(sum(xb[k] for k, v in enumerate(basis) if v >= n_std))
        if infeas > FEAS_TOL * max(1.0, np.abs(b).max()):
            raise NumericalError("LP is infeasible")
        # Drive zero-level artificials out; drop rows that are redundant.
        keep = np.ones(m, bool)
        for r in range(m):
            if basis[r] < n_std:
                continue
            Binv_row = np.linalg.solve(A1[:, basis].T, np.eye(m)[r])
            row = Binv_row @ A
            nonbasic = [j for j in range(n_std) if j not in set(basis) and abs(row[j]) > 1e-9]
            if nonbasic:
                basis[r] = nonbasic[0]
            else:
                keep[r] = False
        A, b, basis = A[keep], b[keep], basis[keep]
        if np.any(basis >= n_std):
            raise NumericalError("could not remove artificial variables from the basis")

    cs = np.concatenate([c, np.zeros(mu)])
    basis, it = _iterate(A, b, cs, basis, np.ones(n_std, bool), max_iter, it)
    xb = np.linalg.solve(A[:, basis], b)
    if xb.size and xb.min() < -FEAS_TOL:
        raise NumericalError(f"basic solution is infeasible (min {xb.min():.3g})")
    full = np.zeros(n_std)
    full[basis] = np.maximum(xb, 0.0)
    x = full[:nv]
    return SimplexResult(x=x, objective=float(c @ x), basis=tuple(int(v) for v in sorted(basis)), iterations=it)
