"""Pure-Python kernels: Barnes-Hut repulsion and label-propagation rounds.

Mirror of the Cython extension `_ckern`, kept operation-for-operation
identical so both implementations produce bit-identical float64 results
(the extension is compiled with FP contraction disabled for this reason).
Used automatically when the extension is unavailable; also the baseline
for the kernel benchmark.
"""

from __future__ import annotations

import numpy as np

MAX_DEPTH = 48
_M64 = (1 << 64) - 1
_INV_2_53 = 1.0 / 9007199254740992.0


def _mix64(z: int) -> int:
    # splitmix64 finalizer; must match the C version bit for bit
    z = (z + 0x9E3779B97F4A7C15) & _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def _jit_x(i: int) -> float:
    return (_mix64(2 * i + 1) >> 11) * _INV_2_53 - 0.5


def _jit_y(i: int) -> float:
    return (_mix64(2 * i + 2) >> 11) * _INV_2_53 - 0.5


def repulsion_forces(xs, ys, theta, coef):
    """All-pairs repulsion approximated by a quadtree with opening angle theta.

    Force on node i from mass m at displacement (dx, dy), distance d:
    m * coef * (dx, dy) / d^2  (magnitude m*coef/d).  Exactly coincident
    points are separated by a deterministic jitter derived from node ids.
    Returns (fx, fy) float64 arrays.
    """
    n = len(xs)
    xs = [float(v) for v in xs]
    ys = [float(v) for v in ys]
    fx = [0.0] * n
    fy = [0.0] * n
    if n <= 1:
        return np.array(fx), np.array(fy)

    minx = maxx = xs[0]
    miny = maxy = ys[0]
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
    root_cx = 0.5 * (minx + maxx)
    root_cy = 0.5 * (miny + maxy)
    half0 = 0.5 * (maxx - minx)
    hy = 0.5 * (maxy - miny)
    if hy > half0:
        half0 = hy
    if half0 <= 0.0:
        half0 = 1e-9

    # cell arrays; children start empty (-1), leaves chain points
    child = [-1, -1, -1, -1]
    is_leaf = [True]
    first_point = [-1]
    cx = [root_cx]
    cy = [root_cy]
    half = [half0]
    sumx = [0.0]
    sumy = [0.0]
    mass = [0.0]
    nxt = [-1] * n

    def new_cell(ccx, ccy, chalf, point, px, py):
        child.extend((-1, -1, -1, -1))
        is_leaf.append(True)
        first_point.append(point)
        cx.append(ccx)
        cy.append(ccy)
        half.append(chalf)
        sumx.append(px)
        sumy.append(py)
        mass.append(1.0)
        return len(is_leaf) - 1

    for i in range(n):
        x = xs[i]
        y = ys[i]
        sumx[0] += x
        sumy[0] += y
        mass[0] += 1.0
        cur = 0
        depth = 0
        while True:
            if is_leaf[cur]:
                j = first_point[cur]
                if j == -1:  # empty root before the first insert
                    first_point[cur] = i
                    nxt[i] = -1
                    break
                if depth >= MAX_DEPTH or (xs[j] == x and ys[j] == y):
                    nxt[i] = j
                    first_point[cur] = i
                    break
                # single-point leaf: push the resident down one level
                h = 0.5 * half[cur]
                qx = cx[cur] + (h if xs[j] >= cx[cur] else -h)
                qy = cy[cur] + (h if ys[j] >= cy[cur] else -h)
                q = (1 if xs[j] >= cx[cur] else 0) + (2 if ys[j] >= cy[cur] else 0)
                c = new_cell(qx, qy, h, j, xs[j], ys[j])
                child[4 * cur + q] = c
                first_point[cur] = -1
                is_leaf[cur] = False
            else:
                q = (1 if x >= cx[cur] else 0) + (2 if y >= cy[cur] else 0)
                c = child[4 * cur + q]
                h = 0.5 * half[cur]
                if c == -1:
                    qx = cx[cur] + (h if x >= cx[cur] else -h)
                    qy = cy[cur] + (h if y >= cy[cur] else -h)
                    c = new_cell(qx, qy, h, i, x, y)
                    child[4 * cur + q] = c
                    nxt[i] = -1
                    break
                sumx[c] += x
                sumy[c] += y
                mass[c] += 1.0
                cur = c
                depth += 1

    ncells = len(is_leaf)
    comx = [0.0] * ncells
    comy = [0.0] * ncells
    for c in range(ncells):
        if mass[c] > 0.0:
            comx[c] = sumx[c] / mass[c]
            comy[c] = sumy[c] / mass[c]

    theta2 = theta * theta
    stack = [0] * 256
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
    return np.array(fx), np.array(fy)


def propagate_round(indptr, indices, weights, labels, order):
    """One label-propagation round over 0-based compact node ids.

    Visits nodes in `order`; each adopts the label with the largest total
    incident edge weight among its neighbors' current labels (updates are
    visible within the round), ties broken by the smallest label id.
    Isolated nodes keep their label.  Returns the number of changes;
    `labels` is updated in place.
    """
    n = len(labels)
    indptr_l = [int(v) for v in indptr]
    indices_l = [int(v) for v in indices]
    weights_l = [float(v) for v in weights]
    labels_l = [int(v) for v in labels]
    acc = [0.0] * n
    in_touched = bytearray(n)
    touched = [0] * n
    changed = 0
    for u in order:
        u = int(u)
        start = indptr_l[u]
        end = indptr_l[u + 1]
        if start == end:
            continue
        ntouched = 0
        for e in range(start, end):
            l = labels_l[indices_l[e]]
            if in_touched[l]:
                acc[l] += weights_l[e]
            else:
                in_touched[l] = 1
                touched[ntouched] = l
                ntouched += 1
                acc[l] = weights_l[e]
        best_l = -1
        best_w = -1.0
        for t in range(ntouched):
            l = touched[t]
            w = acc[l]
            if w > best_w or (w == best_w and l < best_l):
                best_l = l
                best_w = w
            in_touched[l] = 0
        if best_l != labels_l[u]:
            labels_l[u] = best_l
            changed += 1
    labels[:] = labels_l
    return changed
