"""Dense two-phase primal simplex.

Small, deterministic LP solver used for the DEA envelopment programs. Bland's
smallest-index rule is used for both the entering and the leaving variable,
which rules out cycling on degenerate vertices (DEA programs are highly
degenerate). Problem sizes here are a few dozen variables, so a dense tableau
is the simplest correct choice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionError, LpError, SingularBasisError

TOL = 1e-9
OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"
_SENSES = ("<=", ">=", "=")


@dataclass
class LpProblem:
    """Linear program ``min/max c @ x`` subject to ``A[i] @ x (sense_i) b[i]``.

    ``bounds`` holds one ``(lo, hi)`` pair per variable; ``None`` stands for
    an infinite bound. The default is ``(0, None)`` for every variable.
    """

    c: np.ndarray
    A: np.ndarray
    senses: Sequence[str]
    b: np.ndarray
    bounds: Sequence[tuple] | None = None
    maximize: bool = False

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        A = np.asarray(self.A, dtype=float)
        self.A = A.reshape(0, n) if A.size == 0 else A
        self.b = np.asarray(self.b, dtype=float).ravel()
        self.senses = tuple(self.senses)
        m = self.A.shape[0]
        if self.A.ndim != 2 or self.A.shape[1] != n:
            raise DimensionError(f"A must be (m, {n}), got {self.A.shape}")
        if self.b.size != m or len(self.senses) != m:
            raise DimensionError(f"b and senses must have length {m}")
        bad = [s for s in self.senses if s not in _SENSES]
        if bad:
            raise DimensionError(f"unknown constraint sense {bad[0]!r}")
        if self.bounds is None:
            self.bounds = [(0.0, None)] * n
        elif len(self.bounds) != n:
            raise DimensionError(f"bounds must have length {n}")


@dataclass
class LpSolution:
    status: str
    objective: float = float("nan")
    x: np.ndarray = field(default_factory=lambda: np.empty(0))
    iterations: int = 0


def _run(T, basis, max_iter):
    """Bland-rule pivoting on ``T`` (objective in row 0). Returns (status, pivots)."""
    it = 0
    while True:
        candidates = np.flatnonzero(T[0, :-1] < -TOL)
        if candidates.size == 0:
            return OPTIMAL, it
        j = int(candidates[0])
        col = T[1:, j]
        rows = np.flatnonzero(col > TOL)
        if rows.size == 0:
            return UNBOUNDED, it
        ratios = T[1 + rows, -1] / col[rows]
        best = ratios.min()
        tied = rows[ratios <= best + TOL * max(1.0, abs(best))]
        r = int(min(tied, key=lambda i: basis[i]))
        _pivot(T, r + 1, j)
        basis[r] = j
        it += 1
        if it > max_iter:
            raise LpError(f"simplex exceeded {max_iter} pivots")


def _pivot(T, r, j):
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    T[:, j] = 0.0
    T[r, j] = 1.0


def _standardize(p: LpProblem):
    """Map bounds and senses onto ``A_s @ z = b_s, z >= 0``.

    Returns the standard-form data plus a recovery map ``x = offset + M @ z``.
    """
    n = p.c.size
    cols = []          # for each structural z column: (original var, sign)
    offset = np.zeros(n)
    extra_rows, extra_b, extra_s = [], [], []
    for i, (lo, hi) in enumerate(p.bounds):
        lo = -np.inf if lo is None else float(lo)
        hi = np.inf if hi is None else float(hi)
        if lo > hi:
            return None
        if np.isfinite(lo):
            offset[i] = lo
            cols.append((i, 1.0))
            if np.isfinite(hi):
                row = np.zeros(n)
                row[i] = 1.0
                extra_rows.append(row)
                extra_b.append(hi)
                extra_s.append("<=")
        elif np.isfinite(hi):
            offset[i] = hi
            cols.append((i, -1.0))
        else:
            cols.append((i, 1.0))
            cols.append((i, -1.0))
    M = np.zeros((n, len(cols)))
    for k, (i, s) in enumerate(cols):
        M[i, k] = s
    A = np.vstack([p.A] + extra_rows) if extra_rows else p.A
    b = np.concatenate([p.b, extra_b]) if extra_rows else p.b.copy()
    senses = list(p.senses) + extra_s
    A_z = A @ M
    b_z = b - A @ offset
    m = A_z.shape[0]
    n_slack = sum(s != "=" for s in senses)
    A_s = np.zeros((m, A_z.shape[1] + n_slack))
    A_s[:, : A_z.shape[1]] = A_z
    slack_of_row = [-1] * m
    k = A_z.shape[1]
    for i, s in enumerate(senses):
        if s == "<=":
            A_s[i, k] = 1.0
        elif s == ">=":
            A_s[i, k] = -1.0
        if s != "=":
            slack_of_row[i] = k
            k += 1
    b_s = b_z.copy()
    neg = b_s < 0
    A_s[neg] *= -1.0
    b_s[neg] *= -1.0
    c_z = M.T @ p.c
    c_s = np.concatenate([c_z, np.zeros(n_slack)])
    if p.maximize:
        c_s = -c_s
    return A_s, b_s, c_s, M, offset, slack_of_row


def _refactor(A, b, basis):
    B = A[:, basis]
    try:
        if np.linalg.cond(B) > 1e13:
            raise np.linalg.LinAlgError
        xb = np.linalg.solve(B, b)
    except np.linalg.LinAlgError:
        raise SingularBasisError("basis matrix is numerically singular") from None
    return xb


def lp_solve(p: LpProblem, max_iter: int | None = None) -> LpSolution:
    """Solve ``p`` and return an optimal basic solution or an infeasible/unbounded status."""
    std = _standardize(p)
    if std is None:
        return LpSolution(INFEASIBLE)
    A, b, c, M, offset, slack_of_row = std
    m, ns = A.shape
    if max_iter is None:
        max_iter = 50 * (m + ns) + 100

    # phase 1: artificials only where the row has no usable +1 slack
    basis = []
    art = []
    for i in range(m):
        k = slack_of_row[i]
        if k >= 0 and A[i, k] == 1.0:
            basis.append(k)
        else:
            basis.append(ns + len(art))
            art.append(i)
    na = len(art)
    T = np.zeros((m + 1, ns + na + 1))
    T[1:, :ns] = A
    T[1:, -1] = b
    for a, i in enumerate(art):
        T[1 + i, ns + a] = 1.0
    T[0, ns:ns + na] = 1.0
    for a, i in enumerate(art):
        T[0] -= T[1 + i]
    iterations = 0
    if na:
        _, it = _run(T, basis, max_iter)
        iterations += it
        if -T[0, -1] > TOL * max(1.0, np.abs(b).max(initial=0.0)):
            return LpSolution(INFEASIBLE, iterations=iterations)
        # drive artificials out of the basis; drop redundant rows
        keep = []
        for r in range(m):
            if basis[r] >= ns:
                nz = np.flatnonzero(np.abs(T[1 + r, :ns]) > TOL)
                if nz.size:
                    _pivot(T, 1 + r, int(nz[0]))
                    basis[r] = int(nz[0])
                    keep.append(r)
            else:
                keep.append(r)
        T = np.vstack([T[:1], T[1 + np.array(keep, dtype=int)]]) if keep else T[:1]
        T = np.delete(T, np.s_[ns:ns + na], axis=1)
        basis = [basis[r] for r in keep]
        A = A[keep]
        b = b[keep]
        if keep:
            T[1:, -1] = np.maximum(_refactor(A, b, basis), 0.0)

    # phase 2
    T[0] = 0.0
    T[0, :ns] = c
    for r, j in enumerate(basis):
        T[0] -= c[j] * T[1 + r]
    status, it = _run(T, basis, max_iter)
    iterations += it
    if status == UNBOUNDED:
        return LpSolution(UNBOUNDED, iterations=iterations)

    z = np.zeros(ns)
    if basis:
        xb = _refactor(A, b, basis)
        xb[np.abs(xb) < TOL * 1e-3] = 0.0
        z[basis] = np.maximum(xb, 0.0)
    x = offset + M @ z[: M.shape[1]]
    objective = float(p.c @ x)
    return LpSolution(OPTIMAL, objective, x, iterations)
