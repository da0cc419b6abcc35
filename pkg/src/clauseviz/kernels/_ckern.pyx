# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: Barnes-Hut repulsion and label-propagation rounds.

Operation-for-operation mirror of `_pykern`; compiled with FP contraction
disabled so float64 results are bit-identical to the pure-Python kernels.
"""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport int64_t, uint8_t, uint64_t

cnp.import_array()

cdef enum:
    MAX_DEPTH = 48

cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _mix64(uint64_t z) nogil:
    z = z + <uint64_t>0x9E3779B97F4A7C15
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline double _jit_x(int64_t i) nogil:
    return <double>(_mix64(<uint64_t>(2 * i + 1)) >> 11) * INV_2_53 - 0.5


cdef inline double _jit_y(int64_t i) nogil:
    return <double>(_mix64(<uint64_t>(2 * i + 2)) >> 11) * INV_2_53 - 0.5


def repulsion_forces(object xs_in, object ys_in, double theta, double coef):
    """Quadtree-approximated all-pairs repulsion; see `_pykern` for the contract."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xs_a = np.ascontiguousarray(xs_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ys_a = np.ascontiguousarray(ys_in, dtype=np.float64)
    cdef Py_ssize_t n = xs_a.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] fx_a = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] fy_a = np.zeros(n, dtype=np.float64)
    if n <= 1:
        return fx_a, fy_a

    cdef double[::1] xs = xs_a
    cdef double[::1] ys = ys_a
    cdef double[::1] fx = fx_a
    cdef double[::1] fy = fy_a

    cdef double minx = xs[0], maxx = xs[0], miny = ys[0], maxy = ys[0]
    cdef Py_ssize_t i
    cdef double x, y
    for i in range(1, n):
        x = xs[i]
        y = ys[i]
        if x < minx:
            minx = x
        elif x > maxx:
            maxx = x
        if y < miny:
            miny = y
        elif y > maxy:
            maxy = y
    cdef double root_cx = 0.5 * (minx + maxx)
    cdef double root_cy = 0.5 * (miny + maxy)
    cdef double half0 = 0.5 * (maxx - minx)
    cdef double hy = 0.5 * (maxy - miny)
    if hy > half0:
        half0 = hy
    if half0 <= 0.0:
        half0 = 1e-9

    cdef Py_ssize_t cap = 4 * n + 64
    cdef cnp.ndarray child_a = np.full(4 * cap, -1, dtype=np.int64)
    cdef cnp.ndarray leaf_a = np.zeros(cap, dtype=np.uint8)
    cdef cnp.ndarray fp_a = np.full(cap, -1, dtype=np.int64)
    cdef cnp.ndarray cx_a = np.zeros(cap, dtype=np.float64)
    cdef cnp.ndarray cy_a = np.zeros(cap, dtype=np.float64)
    cdef cnp.ndarray half_a = np.zeros(cap, dtype=np.float64)
    cdef cnp.ndarray sumx_a = np.zeros(cap, dtype=np.float64)
    cdef cnp.ndarray sumy_a = np.zeros(cap, dtype=np.float64)
    cdef cnp.ndarray mass_a = np.zeros(cap, dtype=np.float64)
    cdef cnp.ndarray nxt_a = np.full(n, -1, dtype=np.int64)

    cdef int64_t[::1] child = child_a
    cdef uint8_t[::1] is_leaf = leaf_a
    cdef int64_t[::1] first_point = fp_a
    cdef double[::1] cx = cx_a
    cdef double[::1] cy = cy_a
    cdef double[::1] half = half_a
    cdef double[::1] sumx = sumx_a
    cdef double[::1] sumy = sumy_a
    cdef double[::1] mass = mass_a
    cdef int64_t[::1] nxt = nxt_a

    is_leaf[0] = 1
    cx[0] = root_cx
    cy[0] = root_cy
    half[0] = half0
    cdef Py_ssize_t ncells = 1

    cdef Py_ssize_t cur, depth, q, c
    cdef int64_t j
    cdef double h, qx, qy

    for i in range(n):
        x = xs[i]
        y = ys[i]
        sumx[0] += x
        sumy[0] += y
        mass[0] += 1.0
        cur = 0
        depth = 0
        while True:
            if ncells + 2 > cap:
                cap = cap * 2
                child_a = _grow_i64(child_a, 4 * cap)
                leaf_a = _grow_u8(leaf_a, cap)
                fp_a = _grow_i64(fp_a, cap)
                cx_a = _grow_f64(cx_a, cap)
                cy_a = _grow_f64(cy_a, cap)
                half_a = _grow_f64(half_a, cap)
                sumx_a = _grow_f64(sumx_a, cap)
                sumy_a = _grow_f64(sumy_a, cap)
                mass_a = _grow_f64(mass_a, cap)
                child = child_a
                is_leaf = leaf_a
                first_point = fp_a
                cx = cx_a
                cy = cy_a
                half = half_a
                sumx = sumx_a
                sumy = sumy_a
                mass = mass_a
            if is_leaf[cur]:
                j = first_point[cur]
                if j == -1:
                    first_point[cur] = i
                    nxt[i] = -1
                    break
                if depth >= MAX_DEPTH or (xs[j] == x and ys[j] == y):
                    nxt[i] = j
                    first_point[cur] = i
                    break
                h = 0.5 * half[cur]
                qx = cx[cur] + (h if xs[j] >= cx[cur] else -h)
                qy = cy[cur] + (h if ys[j] >= cy[cur] else -h)
                q = (1 if xs[j] >= cx[cur] else 0) + (2 if ys[j] >= cy[cur] else 0)
                c = ncells
                ncells += 1
                is_leaf[c] = 1
                first_point[c] = j
                cx[c] = qx
                cy[c] = qy
                half[c] = h
                sumx[c] = xs[j]
                sumy[c] = ys[j]
                mass[c] = 1.0
                nxt[j] = -1
                child[4 * cur + q] = c
                first_point[cur] = -1
                is_leaf[cur] = 0
            else:
                q = (1 if x >= cx[cur] else 0) + (2 if y >= cy[cur] else 0)
                c = child[4 * cur + q]
                h = 0.5 * half[cur]
                if c == -1:
                    qx = cx[cur] + (h if x >= cx[cur] else -h)
                    qy = cy[cur] + (h if y >= cy[cur] else -h)
                    c = ncells
                    ncells += 1
                    is_leaf[c] = 1
                    first_point[c] = i
                    cx[c] = qx
                    cy[c] = qy
                    half[c] = h
                    sumx[c] = x
                    sumy[c] = y
                    mass[c] = 1.0
                    child[4 * cur + q] = c
                    nxt[i] = -1
                    break
                sumx[c] += x
                sumy[c] += y
                mass[c] += 1.0
                cur = c
                depth += 1

    cdef cnp.ndarray comx_a = np.zeros(ncells, dtype=np.float64)
    cdef cnp.ndarray comy_a = np.zeros(ncells, dtype=np.float64)
    cdef double[::1] comx = comx_a
    cdef double[::1] comy = comy_a
    for c in range(ncells):
        if mass[c] > 0.0:
            comx[c] = sumx[c] / mass[c]
            comy[c] = sumy[c] / mass[c]

    cdef double theta2 = theta * theta
    cdef int64_t[256] stack
    cdef Py_ssize_t sp, cc, base
    cdef double fxi, fyi, dx, dy, d2, s, w

    for i in range(n):
        x = xs[i]
        y = ys[i]
        fxi = 0.0
        fyi = 0.0
        stack[0] = 0
        sp = 1
        while sp:
            sp -= 1
            c = stack[sp]
            if is_leaf[c]:
                j = first_point[c]
                while j != -1:
                    if j != i:
                        dx = x - xs[j]
                        dy = y - ys[j]
                        d2 = dx * dx + dy * dy
                        if d2 <= 0.0:
                            dx = (_jit_x(i) - _jit_x(j)) * 1e-6
                            dy = (_jit_y(i) - _jit_y(j)) * 1e-6
                            d2 = dx * dx + dy * dy
                        if d2 > 0.0:
                            s = coef / d2
                            fxi += dx * s
                            fyi += dy * s
                    j = nxt[j]
            else:
                dx = x - comx[c]
                dy = y - comy[c]
                d2 = dx * dx + dy * dy
                w = 2.0 * half[c]
                if w * w < theta2 * d2:
                    s = mass[c] * coef / d2
                    fxi += dx * s
                    fyi += dy * s
                else:
                    base = 4 * c
                    for q in range(4):
                        cc = child[base + q]
                        if cc != -1:
                            stack[sp] = cc
                            sp += 1
        fx[i] = fxi
        fy[i] = fyi
    return fx_a, fy_a


cdef cnp.ndarray _grow_i64(cnp.ndarray a, Py_ssize_t size):
    cdef cnp.ndarray b = np.full(size, -1, dtype=np.int64)
    b[:a.shape[0]] = a
    return b


cdef cnp.ndarray _grow_u8(cnp.ndarray a, Py_ssize_t size):
    cdef cnp.ndarray b = np.zeros(size, dtype=np.uint8)
    b[:a.shape[0]] = a
    return b


cdef cnp.ndarray _grow_f64(cnp.ndarray a, Py_ssize_t size):
    cdef cnp.ndarray b = np.zeros(size, dtype=np.float64)
    b[:a.shape[0]] = a
    return b


def propagate_round(object indptr_in, object indices_in, object weights_in,
                    object labels_in, object order_in):
    """One weighted label-propagation round; see `_pykern` for the contract."""
    cdef cnp.ndarray[cnp.int64_t, ndim=1] indptr_a = np.ascontiguousarray(indptr_in, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] indices_a = np.ascontiguousarray(indices_in, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] weights_a = np.ascontiguousarray(weights_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] order_a = np.ascontiguousarray(order_in, dtype=np.int64)
    labels_a = labels_in

    cdef int64_t[::1] indptr = indptr_a
    cdef int64_t[::1] indices = indices_a
    cdef double[::1] weights = weights_a
    cdef int64_t[::1] labels = labels_a
    cdef int64_t[::1] order = order_a

    cdef Py_ssize_t n = labels.shape[0]
    cdef cnp.ndarray acc_a = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray int_a = np.zeros(n, dtype=np.uint8)
    cdef cnp.ndarray touched_a = np.zeros(n, dtype=np.int64)
    cdef double[::1] acc = acc_a
    cdef uint8_t[::1] in_touched = int_a
    cdef int64_t[::1] touched = touched_a

    cdef Py_ssize_t oi, e, t, ntouched
    cdef int64_t u, l, best_l
    cdef int64_t start, end
    cdef double w, best_w
    cdef int changed = 0

    for oi in range(order.shape[0]):
        u = order[oi]
        start = indptr[u]
        end = indptr[u + 1]
        if start == end:
            continue
        ntouched = 0
        for e in range(start, end):
            l = labels[indices[e]]
            if in_touched[l]:
                acc[l] += weights[e]
            else:
                in_touched[l] = 1
                touched[ntouched] = l
                ntouched += 1
                acc[l] = weights[e]
        best_l = -1
        best_w = -1.0
        for t in range(ntouched):
            l = touched[t]
            w = acc[l]
            if w > best_w or (w == best_w and l < best_l):
                best_l = l
                best_w = w
            in_touched[l] = 0
        if best_l != labels[u]:
            labels[u] = best_l
            changed += 1
    return changed
