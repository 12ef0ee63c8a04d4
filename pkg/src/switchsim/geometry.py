"""Projections onto the row/column indicator cone and Lyapunov functionals.

The cone of interest is generated by the 2n matrices E(i) (row i all
ones) and F(j) (column j all ones):

    K = { sum_i w_i E(i) + sum_j wt_j F(j) : all w_i, wt_j >= 0 }.

Members of K have entries w_i + wt_j, so K captures exactly the queue
mass explained by per-input and per-output congestion.  For a queue
matrix q, q_par is the Euclidean projection onto K and q_perp = q - q_par
is the residual; q_perp lies in the polar cone (every <q_perp, E(i)> and
<q_perp, F(j)> is <= 0) and is orthogonal to q_par.

The projection is computed by Dykstra's alternating projections applied
to the polar cone, which is the intersection of the 2n half-spaces
{z : <z, g> <= 0}.  Each Dykstra correction is a scalar multiple of its
generator, so the whole iteration reduces to the generator coefficients:
with R_i = <q, E(i)>, C_j = <q, F(j)> (row and column sums of q), one
full cycle is

    w_i  <- max(0, R_i - sum_j wt_j) / n        (all rows at once)
    wt_j <- max(0, C_j - sum_i w_i)  / n        (all columns at once)

and q_par = sum_i w_i E(i) + sum_j wt_j F(j).  This is algebraically the
standard Dykstra sweep in the constraint order E(1)..E(n), F(1)..F(n);
within a block the generators are mutually orthogonal, which is what
collapses each block to one vector update.  The reduction also vectorizes
across a batch of matrices, which the simulator uses for strided
steady-state sampling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, TooLarge

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000


def project_subspace(q) -> np.ndarray:
    """Orthogonal projection onto span{E(i), F(j)} (no sign constraints).

    Closed form: p_ij = R_i / n + C_j / n - S / n^2 with R_i, C_j, S the
    row sums, column sums and grand total of q.
    """
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {q.shape}")
    n = q.shape[0]
    rows = q.sum(axis=1)
    cols = q.sum(axis=0)
    total = q.sum()
    return rows[:, None] / n + cols[None, :] / n - total / n**2


@dataclass
class ConeDecomposition:
    """q = q_par + q_perp with q_par in the cone and q_perp in its polar."""

    q_par: np.ndarray
    q_perp: np.ndarray
    norm_par: float
    norm_perp: float
    row_weights: np.ndarray
    col_weights: np.ndarray
    iterations: int


def _dykstra_coeffs(rowsums: np.ndarray, colsums: np.ndarray,
                    tol: float, max_iter: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Generator coefficients of the cone projection, batched.

    rowsums, colsums: shape (K, n).  Returns (w, wt, cycles) with w, wt of
    shape (K, n) and all entries >= 0.  Convergence is declared when the
    implied iterate moves less than tol in Euclidean norm over a full
    cycle; the movement norm is computed exactly from the coefficient
    increments (the E/F Gram matrix has diagonal n and off-block 1).
    """
    R = np.asarray(rowsums, dtype=np.float64)
    C = np.asarray(colsums, dtype=np.float64)
    K, n = R.shape
    w = np.zeros((K, n))
    wt = np.zeros((K, n))
    active = np.arange(K)
    tol_sq = tol * tol
    cycles = 0
    while active.size:
        if cycles >= max_iter:
            raise NoConvergence(
                f"cone projection still moving >= {tol:g} after {max_iter} cycles "
                f"for {active.size} of {K} inputs")
        cycles += 1
        Ra, Ca = R[active], C[active]
        w_old, wt_old = w[active], wt[active]
        w_new = np.maximum(0.0, Ra - wt_old.sum(axis=1, keepdims=True)) / n
        wt_new = np.maximum(0.0, Ca - w_new.sum(axis=1, keepdims=True)) / n
        dw = w_new - w_old
        dwt = wt_new - wt_old
        move_sq = (n * (dw * dw).sum(axis=1) + n * (dwt * dwt).sum(axis=1)
                   + 2.0 * dw.sum(axis=1) * dwt.sum(axis=1))
        w[active] = w_new
        wt[active] = wt_new
        active = active[move_sq >= tol_sq]
    return w, wt, cycles


def project_cone(q, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> ConeDecomposition:
    """Euclidean projection of q onto the cone K, with its residual.

    Raises NoConvergence if the Dykstra sweep is still moving more than
    tol after max_iter cycles.
    """
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {q.shape}")
    w, wt, cycles = _dykstra_coeffs(q.sum(axis=1)[None, :], q.sum(axis=0)[None, :],
                                    tol, max_iter)
    w, wt = w[0], wt[0]
    q_par = w[:, None] + wt[None, :]
    q_perp = q - q_par
    return ConeDecomposition(
        q_par=q_par,
        q_perp=q_perp,
        norm_par=float(np.linalg.norm(q_par)),
        norm_perp=float(np.linalg.norm(q_perp)),
        row_weights=w,
        col_weights=wt,
        iterations=cycles,
    )


def cone_norms_from_sums(rowsums, colsums, sq_norms,
                         tol: float = DEFAULT_TOL,
                         max_iter: int = DEFAULT_MAX_ITER) -> tuple[np.ndarray, np.ndarray]:
    """Batched (norm_par, norm_perp) from row sums, column sums and ||q||^2.

    The projection depends on q only through its row and column sums, and
    the two norms follow from the generator coefficients:

        ||q_par||^2  = n ||w||^2 + n ||wt||^2 + 2 (sum w)(sum wt)
        <q, q_par>   = <w, R> + <wt, C>
        ||q_perp||^2 = ||q||^2 - 2 <q, q_par> + ||q_par||^2
    """
    R = np.asarray(rowsums, dtype=np.float64)
    C = np.asarray(colsums, dtype=np.float64)
    sq = np.asarray(sq_norms, dtype=np.float64)
    n = R.shape[1]
    w, wt, _ = _dykstra_coeffs(R, C, tol, max_iter)
    sw = w.sum(axis=1)
    swt = wt.sum(axis=1)
    par_sq = n * (w * w).sum(axis=1) + n * (wt * wt).sum(axis=1) + 2.0 * sw * swt
    inner = (w * R).sum(axis=1) + (wt * C).sum(axis=1)
    perp_sq = np.maximum(sq - 2.0 * inner + par_sq, 0.0)
    return np.sqrt(np.maximum(par_sq, 0.0)), np.sqrt(perp_sq)


def project_cone_enumeration(q, tol: float = 1e-9) -> ConeDecomposition:
    """Cone projection by exhaustive active-set least squares (test oracle).

    Enumerates every proper subset of the 2n generators, solves the
    unconstrained least squares on that subset, and keeps solutions whose
    weights are nonnegative and whose residual satisfies the polar-cone
    optimality conditions.  Any survivor is the global optimum of the
    convex program.  Guarded at n <= 3 (2^(2n) subsets).
    """
    q = np.asarray(q, dtype=np.float64)
    n = q.shape[0]
    if n > 3:
        raise TooLarge(f"enumeration oracle is limited to n <= 3, got n = {n}")
    gens = []
    for i in range(n):
        g = np.zeros((n, n))
        g[i, :] = 1.0
        gens.append(g.ravel())
    for j in range(n):
        g = np.zeros((n, n))
        g[:, j] = 1.0
        gens.append(g.ravel())
    G = np.stack(gens, axis=1)          # (n^2, 2n)
    target = q.ravel()
    m = 2 * n
    best = None
    # the single linear dependency among generators spans all of them, so
    # every proper subset is full rank and the full set can be skipped
    for mask in range(2**m - 1):
        cols = [k for k in range(m) if mask >> k & 1]
        if cols:
            sub = G[:, cols]
            coef, *_ = np.linalg.lstsq(sub, target, rcond=None)
            if (coef < -tol).any():
                continue
            p = sub @ coef
        else:
            coef = np.zeros(0)
            p = np.zeros_like(target)
        resid = target - p
        if (resid @ G > tol).any():
            continue
        dist = float(np.linalg.norm(resid))
        if best is None or dist < best[0]:
            w_full = np.zeros(m)
            for k, c in zip(cols, coef):
                w_full[k] = c
            best = (dist, p, w_full)
    if best is None:
        raise AssertionError("no subset satisfied the optimality conditions")
    _, p, w_full = best
    q_par = p.reshape(n, n)
    q_perp = q - q_par
    return ConeDecomposition(
        q_par=q_par,
        q_perp=q_perp,
        norm_par=float(np.linalg.norm(q_par)),
        norm_perp=float(np.linalg.norm(q_perp)),
        row_weights=np.maximum(w_full[:n], 0.0),
        col_weights=np.maximum(w_full[n:], 0.0),
        iterations=0,
    )


@dataclass
class LyapunovValues:
    """Quadratics of the row sums, column sums and grand total.

    v1 = sum_i (row sum)^2, v2 = sum_j (column sum)^2, v3 = total^2, and
    v4 = v1 + v2 - v3 / n.
    """

    v1: float
    v2: float
    v3: float
    v4: float


def lyapunov_values(q) -> LyapunovValues:
    """Evaluate the four quadratic functionals exactly (integer inputs)."""
    q = np.asarray(q)
    n = q.shape[0]
    rows = q.sum(axis=1)
    cols = q.sum(axis=0)
    if np.issubdtype(q.dtype, np.integer):
        v1 = int(sum(int(r) ** 2 for r in rows))
        v2 = int(sum(int(c) ** 2 for c in cols))
        v3 = int(rows.sum()) ** 2
    else:
        v1 = float((rows.astype(np.float64) ** 2).sum())
        v2 = float((cols.astype(np.float64) ** 2).sum())
        v3 = float(rows.sum()) ** 2
    v4 = v1 + v2 - v3 / n
    return LyapunovValues(v1=float(v1), v2=float(v2), v3=float(v3), v4=float(v4))
