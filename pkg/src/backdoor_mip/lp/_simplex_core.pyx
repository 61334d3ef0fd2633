# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled bounded-variable primal simplex kernel.

Same algorithm, tolerances, and tie-breaking as ``kernel_py``; see that
module for the commented reference implementation.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs, isfinite

cnp.import_array()

STATUS_OPTIMAL = 0
STATUS_INFEASIBLE = 1
STATUS_UNBOUNDED = 2
STATUS_ITERATION_LIMIT = 3

cdef double _PIVOT_TOL = 1e-9
cdef double _FEAS_TOL = 1e-7

cdef int _BASIC = 0
cdef int _AT_LOWER = 1
cdef int _AT_UPPER = 2
cdef int _FREE_AT_ZERO = 3

cdef int _OUT_OPTIMAL = 0
cdef int _OUT_UNBOUNDED = 1
cdef int _OUT_ITERLIMIT = 2


cdef inline double _nb_value(long status, double lo, double up) nogil:
    if status == _AT_LOWER:
        return lo
    if status == _AT_UPPER:
        return up
    return 0.0


cdef int _run_phase(double[:, ::1] T, double[::1] xB, long[::1] basis, long[::1] vstat,
                    double[::1] lo, double[::1] up, double[::1] cc,
                    long max_iter, long bland_trigger,
                    long* degen, int* bland, long* iters_out):
    cdef long m = T.shape[0]
    cdef long N = T.shape[1]
    cdef long it = 0, j, r, i, jj, leave, best_leave
    cdef double dj, best, direction, w_i, ratio, t_rows, t_self, t, piv, f, enter_from
    cdef double[::1] ccB = np.empty(m)
    cdef double[::1] w = np.empty(m)
    cdef int eligible, hit_lower

    while True:
        if it >= max_iter:
            iters_out[0] = it
            return _OUT_ITERLIMIT
        it += 1

        for r in range(m):
            ccB[r] = cc[basis[r]]

        # entering variable
        j = -1
        best = 0.0
        for jj in range(N):
            if vstat[jj] == _BASIC:
                continue
            if up[jj] - lo[jj] <= 0:
                continue
            dj = cc[jj]
            for r in range(m):
                dj -= ccB[r] * T[r, jj]
            if vstat[jj] == _AT_LOWER:
                eligible = dj > _PIVOT_TOL
            elif vstat[jj] == _AT_UPPER:
                eligible = dj < -_PIVOT_TOL
            else:
                eligible = fabs(dj) > _PIVOT_TOL
            if not eligible:
                continue
            if bland[0]:
                j = jj
                best = dj
                break
            if fabs(dj) > best:
                best = fabs(dj)
                j = jj
                direction = 1.0 if (vstat[jj] == _AT_LOWER or (vstat[jj] == _FREE_AT_ZERO and dj > 0)) else -1.0
        if j < 0:
            iters_out[0] = it
            return _OUT_OPTIMAL
        if bland[0]:
            direction = 1.0 if (vstat[j] == _AT_LOWER or (vstat[j] == _FREE_AT_ZERO and best > 0)) else -1.0

        # ratio test
        t_rows = INFINITY
        for r in range(m):
            w[r] = direction * T[r, j]
            ratio = INFINITY
            if w[r] > _PIVOT_TOL:
                if isfinite(lo[basis[r]]):
                    ratio = (xB[r] - lo[basis[r]]) / w[r]
                    if ratio < 0:
                        ratio = 0
            elif w[r] < -_PIVOT_TOL:
                if isfinite(up[basis[r]]):
                    ratio = (xB[r] - up[basis[r]]) / w[r]
                    if ratio < 0:
                        ratio = 0
            if ratio < t_rows:
                t_rows = ratio
        if isfinite(up[j]) and isfinite(lo[j]):
            t_self = up[j] - lo[j]
        else:
            t_self = INFINITY
        t = t_rows if t_rows < t_self else t_self
        if not isfinite(t):
            iters_out[0] = it
            return _OUT_UNBOUNDED

        if t <= _PIVOT_TOL:
            degen[0] += 1
            if degen[0] > bland_trigger:
                bland[0] = 1
        else:
            degen[0] = 0

        if t_self <= t_rows:
            for r in range(m):
                xB[r] -= t_self * w[r]
            vstat[j] = _AT_UPPER if vstat[j] == _AT_LOWER else _AT_LOWER
            continue

        # leaving row: minimal ratio, ties by smallest basis variable index
        r = -1
        best_leave = -1
        for i in range(m):
            ratio = INFINITY
            if w[i] > _PIVOT_TOL:
                if isfinite(lo[basis[i]]):
                    ratio = (xB[i] - lo[basis[i]]) / w[i]
                    if ratio < 0:
                        ratio = 0
            elif w[i] < -_PIVOT_TOL:
                if isfinite(up[basis[i]]):
                    ratio = (xB[i] - up[basis[i]]) / w[i]
                    if ratio < 0:
                        ratio = 0
            if ratio <= t + 1e-12:
                if best_leave < 0 or basis[i] < best_leave:
                    best_leave = basis[i]
                    r = i
        leave = basis[r]
        hit_lower = w[r] > 0
        enter_from = _nb_value(vstat[j], lo[j], up[j])

        for i in range(m):
            xB[i] -= t * w[i]
        piv = T[r, j]
        for jj in range(N):
            T[r, jj] /= piv
        for i in range(m):
            if i == r:
                continue
            f = T[i, j]
            if f != 0.0:
                for jj in range(N):
                    T[i, jj] -= f * T[r, jj]
        xB[r] = enter_from + direction * t
        vstat[leave] = _AT_LOWER if hit_lower else _AT_UPPER
        basis[r] = j
        vstat[j] = _BASIC


def solve_kernel(A, senses, b, c, lo, up, max_iter):
    """Drop-in replacement for kernel_py.solve_kernel."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    cdef long m = A.shape[0]
    cdef long n = A.shape[1]
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    senses_arr = np.asarray(senses, dtype=np.int8)

    cdef long N = n + m
    lo_all = np.empty(N)
    up_all = np.empty(N)
    lo_all[:n] = lo
    up_all[:n] = up
    cdef long jr
    for jr in range(m):
        s = senses_arr[jr]
        if s == 0:
            lo_all[n + jr], up_all[n + jr] = 0.0, np.inf
        elif s == 1:
            lo_all[n + jr], up_all[n + jr] = -np.inf, 0.0
        else:
            lo_all[n + jr], up_all[n + jr] = 0.0, 0.0

    vstat_head = np.empty(N, dtype=np.int64)
    cdef long j
    for j in range(n):
        if np.isfinite(lo_all[j]):
            vstat_head[j] = _AT_LOWER
        elif np.isfinite(up_all[j]):
            vstat_head[j] = _AT_UPPER
        else:
            vstat_head[j] = _FREE_AT_ZERO
    vstat_head[n:] = _BASIC

    xN = np.array([_nb_value(vstat_head[j], lo_all[j], up_all[j]) for j in range(n)])
    resid = b - A @ xN

    art_rows = []
    art_signs = []
    slack_val = np.empty(m)
    for jr in range(m):
        clamped = min(max(resid[jr], lo_all[n + jr]), up_all[n + jr])
        slack_val[jr] = clamped
        if abs(resid[jr] - clamped) > _FEAS_TOL * max(1.0, abs(resid[jr])):
            art_rows.append(jr)
            art_signs.append(1.0 if resid[jr] > clamped else -1.0)

    cdef long k = len(art_rows)
    cdef long Ntot = N + k
    T_np = np.zeros((m, Ntot))
    T_np[:, :n] = A
    T_np[:, n:N] = np.eye(m)
    vstat_np = np.concatenate([vstat_head, np.zeros(k, dtype=np.int64)])
    lo_np = np.concatenate([lo_all, np.zeros(k)])
    up_np = np.concatenate([up_all, np.full(k, np.inf)])
    basis_np = np.arange(n, N, dtype=np.int64)
    xB_np = resid.copy()
    cdef long idx
    for idx in range(k):
        jr = art_rows[idx]
        col = N + idx
        T_np[jr, col] = art_signs[idx]
        if art_signs[idx] < 0:
            T_np[jr, :] *= -1.0  # premultiply by B^-1 so the basic column is +1
        basis_np[jr] = col
        vstat_np[n + jr] = _AT_LOWER if slack_val[jr] == lo_np[n + jr] else _AT_UPPER
        xB_np[jr] = (resid[jr] - slack_val[jr]) / art_signs[idx]
        vstat_np[col] = _BASIC

    cdef double[:, ::1] T = np.ascontiguousarray(T_np)
    cdef double[::1] xB = np.ascontiguousarray(xB_np)
    cdef long[::1] basis = np.ascontiguousarray(basis_np)
    cdef long[::1] vstat = np.ascontiguousarray(vstat_np)
    cdef double[::1] lo_v = np.ascontiguousarray(lo_np)
    cdef double[::1] up_v = np.ascontiguousarray(up_np)

    cdef long degen = 0
    cdef int bland = 0
    cdef long bland_trigger = 10 * (n + m)
    cdef long iters_total = 0, it = 0
    cdef int outcome

    if k:
        c_phase = np.zeros(Ntot)
        c_phase[N:] = -1.0
        cph = np.ascontiguousarray(c_phase)
        outcome = _run_phase(T, xB, basis, vstat, lo_v, up_v, cph, max_iter, bland_trigger,
                             &degen, &bland, &it)
        iters_total += it
        if outcome == _OUT_ITERLIMIT:
            return STATUS_ITERATION_LIMIT, None, None, None, None, iters_total
        art_level = 0.0
        for jr in range(m):
            if basis[jr] >= N:
                art_level += xB[jr]
        if outcome == _OUT_UNBOUNDED or art_level > _FEAS_TOL:
            return STATUS_INFEASIBLE, None, None, None, None, iters_total
        for idx in range(k):
            up_v[N + idx] = 0.0

    c_full = np.zeros(Ntot)
    c_full[:n] = c
    cfu = np.ascontiguousarray(c_full)
    outcome = _run_phase(T, xB, basis, vstat, lo_v, up_v, cfu, max_iter - iters_total, bland_trigger,
                         &degen, &bland, &it)
    iters_total += it
    if outcome == _OUT_ITERLIMIT:
        return STATUS_ITERATION_LIMIT, None, None, None, None, iters_total
    if outcome == _OUT_UNBOUNDED:
        return STATUS_UNBOUNDED, None, None, None, None, iters_total

    x = np.empty(n)
    for j in range(n):
        x[j] = _nb_value(vstat[j], lo_v[j], up_v[j])
    cdef long r
    for r in range(m):
        if basis[r] < n:
            x[basis[r]] = xB[r]
    cB = np.array([c_full[basis[r]] for r in range(m)])
    duals = cB @ np.asarray(T)[:, n:N]
    varr = np.asarray(vstat)[:n]
    basis_status = np.where(varr == _BASIC, 0, np.where(varr == _AT_UPPER, 2, 1)).astype(np.int8)
    objective = float(np.asarray(c) @ x)
    return STATUS_OPTIMAL, x, np.asarray(duals, dtype=float), basis_status, objective, iters_total
