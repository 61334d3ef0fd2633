"""Pure NumPy bounded-variable primal simplex kernel.

Dense two-phase tableau method. Variables live between (possibly infinite)
bounds; each row gets a unit slack whose bounds encode the sense, so the
slack block of the tableau stays B^-1 and duals read off directly.

The compiled kernel in ``_simplex_core.pyx`` implements the same algorithm
with the same pivot rules; ``backdoor_mip.lp`` picks one at import time.
"""

from __future__ import annotations

import numpy as np

STATUS_OPTIMAL = 0
STATUS_INFEASIBLE = 1
STATUS_UNBOUNDED = 2
STATUS_ITERATION_LIMIT = 3

# nonbasic variable states
_BASIC = 0
_AT_LOWER = 1
_AT_UPPER = 2
_FREE_AT_ZERO = 3

_PIVOT_TOL = 1e-9
_FEAS_TOL = 1e-7


def _nonbasic_value(status: int, lo: float, up: float) -> float:
    if status == _AT_LOWER:
        return lo
    if status == _AT_UPPER:
        return up
    return 0.0


def _run_phase(T, xB, basis, vstat, lo, up, cc, max_iter, bland_trigger, state):
    """Run simplex iterations for one cost vector; mutates tableau state.

    Returns (outcome, iterations) with outcome one of "optimal",
    "unbounded", "iteration_limit". `state` carries the degenerate-pivot
    counter and the Bland flag across phases.
    """
    m, N = T.shape
    it = 0
    while True:
        if it >= max_iter:
            return "iteration_limit", it
        it += 1

        d = cc - cc[basis] @ T
        # entering variable; fixed-range variables (lo == up) never enter
        stat = vstat
        eligible = np.zeros(N, dtype=bool)
        eligible[(stat == _AT_LOWER) & (d > _PIVOT_TOL)] = True
        eligible[(stat == _AT_UPPER) & (d < -_PIVOT_TOL)] = True
        eligible[(stat == _FREE_AT_ZERO) & (np.abs(d) > _PIVOT_TOL)] = True
        eligible &= ~(up - lo <= 0)
        if not eligible.any():
            return "optimal", it
        if state["bland"]:
            j = int(np.nonzero(eligible)[0][0])
        else:
            improvement = np.where(eligible, np.abs(d), -np.inf)
            j = int(np.argmax(improvement))
        direction = 1.0 if (vstat[j] == _AT_LOWER or (vstat[j] == _FREE_AT_ZERO and d[j] > 0)) else -1.0

        w = direction * T[:, j]
        # ratio test against basic variable bounds
        ratios = np.full(m, np.inf)
        dec = w > _PIVOT_TOL
        inc = w < -_PIVOT_TOL
        lo_b = lo[basis]
        up_b = up[basis]
        with np.errstate(invalid="ignore"):
            ratios[dec] = np.maximum(0.0, (xB[dec] - lo_b[dec]) / w[dec])
            ratios[inc] = np.maximum(0.0, (xB[inc] - up_b[inc]) / w[inc])
        ratios[dec & ~np.isfinite(lo_b)] = np.inf
        ratios[inc & ~np.isfinite(up_b)] = np.inf

        t_self = up[j] - lo[j] if np.isfinite(up[j]) and np.isfinite(lo[j]) else np.inf
        t_rows = ratios.min() if m else np.inf
        t = min(t_rows, t_self)
        if not np.isfinite(t):
            return "unbounded", it

        if t <= _PIVOT_TOL:
            state["degen"] += 1
            if state["degen"] > bland_trigger:
                state["bland"] = True
        else:
            state["degen"] = 0

        if t_self <= t_rows:
            # bound flip, basis unchanged
            xB -= t_self * w
            vstat[j] = _AT_UPPER if vstat[j] == _AT_LOWER else _AT_LOWER
            continue

        # leaving row: minimal ratio, ties by smallest basis variable index
        cand = np.nonzero(ratios <= t + 1e-12)[0]
        r = int(cand[np.argmin(basis[cand])])
        leave = int(basis[r])
        hit_lower = w[r] > 0
        enter_from = _nonbasic_value(vstat[j], lo[j], up[j])

        xB -= t * w
        piv = T[r, j]
        T[r, :] /= piv
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r, :])
        xB[r] = enter_from + direction * t
        vstat[leave] = _AT_LOWER if hit_lower else _AT_UPPER
        basis[r] = j
        vstat[j] = _BASIC


def solve_kernel(A, senses, b, c, lo, up, max_iter):
    """Solve max c'x s.t. A x (<=,>=,=) b, lo <= x <= up.

    senses: int8 per row, 0 '<=', 1 '>=', 2 '='.
    Returns (status, x, duals, basis_status, objective, iterations).
    """
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)

    N = n + m
    lo_all = np.empty(N)
    up_all = np.empty(N)
    lo_all[:n] = lo
    up_all[:n] = up
    for jr in range(m):
        s = senses[jr]
        if s == 0:
            lo_all[n + jr], up_all[n + jr] = 0.0, np.inf
        elif s == 1:
            lo_all[n + jr], up_all[n + jr] = -np.inf, 0.0
        else:
            lo_all[n + jr], up_all[n + jr] = 0.0, 0.0

    vstat = np.empty(n, dtype=np.int64)
    for j in range(n):
        if np.isfinite(lo_all[j]):
            vstat[j] = _AT_LOWER
        elif np.isfinite(up_all[j]):
            vstat[j] = _AT_UPPER
        else:
            vstat[j] = _FREE_AT_ZERO

    xN = np.array([_nonbasic_value(vstat[j], lo_all[j], up_all[j]) for j in range(n)])
    resid = b - A @ xN

    # slack starts basic when its clamped value matches the residual;
    # otherwise an artificial carries the infeasibility into phase 1
    art_rows = []
    art_signs = []
    slack_val = np.empty(m)
    for jr in range(m):
        clamped = min(max(resid[jr], lo_all[n + jr]), up_all[n + jr])
        slack_val[jr] = clamped
        if abs(resid[jr] - clamped) > _FEAS_TOL * max(1.0, abs(resid[jr])):
            art_rows.append(jr)
            art_signs.append(1.0 if resid[jr] > clamped else -1.0)

    k = len(art_rows)
    Ntot = N + k
    T = np.zeros((m, Ntot))
    T[:, :n] = A
    T[:, n:N] = np.eye(m)
    vstat = np.concatenate([vstat, np.zeros(m + k, dtype=np.int64)])
    lo_all = np.concatenate([lo_all, np.zeros(k)])
    up_all = np.concatenate([up_all, np.full(k, np.inf)])
    basis = np.empty(m, dtype=np.int64)
    xB = np.empty(m)
    basis[:] = np.arange(n, N)
    xB[:] = resid
    for idx, (jr, sign) in enumerate(zip(art_rows, art_signs)):
        col = N + idx
        T[jr, col] = sign
        if sign < 0:
            T[jr, :] *= -1.0  # premultiply by B^-1 so the basic column is +1
        basis[jr] = col
        vstat[n + jr] = _AT_LOWER if slack_val[jr] == lo_all[n + jr] else _AT_UPPER
        # row reads A x + s + sign*a = b with s nonbasic at slack_val
        xB[jr] = (resid[jr] - slack_val[jr]) / sign
    vstat[basis] = _BASIC

    state = {"degen": 0, "bland": False}
    bland_trigger = 10 * (n + m)
    iters_total = 0

    if k:
        c_phase = np.zeros(Ntot)
        c_phase[N:] = -1.0
        outcome, it = _run_phase(T, xB, basis, vstat, lo_all, up_all, c_phase, max_iter, bland_trigger, state)
        iters_total += it
        if outcome == "iteration_limit":
            return STATUS_ITERATION_LIMIT, None, None, None, None, iters_total
        art_level = sum(xB[r] for r in range(m) if basis[r] >= N)
        if outcome == "unbounded" or art_level > _FEAS_TOL:
            return STATUS_INFEASIBLE, None, None, None, None, iters_total
        up_all[N:] = 0.0  # lock artificials at zero for phase 2

    c_full = np.zeros(Ntot)
    c_full[:n] = c
    outcome, it = _run_phase(
        T, xB, basis, vstat, lo_all, up_all, c_full, max_iter - iters_total, bland_trigger, state
    )
    iters_total += it
    if outcome == "iteration_limit":
        return STATUS_ITERATION_LIMIT, None, None, None, None, iters_total
    if outcome == "unbounded":
        return STATUS_UNBOUNDED, None, None, None, None, iters_total

    x = np.empty(n)
    for j in range(n):
        x[j] = _nonbasic_value(vstat[j], lo_all[j], up_all[j])
    for r in range(m):
        if basis[r] < n:
            x[basis[r]] = xB[r]
    duals = c_full[basis] @ T[:, n:N]
    basis_status = np.where(vstat[:n] == _BASIC, 0, np.where(vstat[:n] == _AT_UPPER, 2, 1)).astype(np.int8)
    objective = float(c @ x)
    return STATUS_OPTIMAL, x, np.asarray(duals, dtype=float), basis_status, objective, iters_total
