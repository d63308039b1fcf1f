"""Compiled grid kernels shared by the lattice, cluster and topology modules.

All grids are indexed ``[ix, iy]`` relative to a bounding box. For a grid of
shape ``(W, H)``, ``hor[i, j]`` is the edge ``(i, j)-(i+1, j)`` and
``ver[i, j]`` the edge ``(i, j)-(i, j+1)``; entries past the last column/row
are ignored.
"""

import numba as nb
import numpy as np

from ._rng import edge_open, edge_uniform


@nb.njit(cache=True, nogil=True)
def fill_states(key, p, x0, y0, hvalid, vvalid):
    W, H = hvalid.shape
    h = np.zeros((W, H), np.bool_)
    v = np.zeros((W, H), np.bool_)
    for i in range(W):
        for j in range(H):
            if hvalid[i, j]:
                h[i, j] = edge_open(key, x0 + i, y0 + j, 0, p)
            if vvalid[i, j]:
                v[i, j] = edge_open(key, x0 + i, y0 + j, 1, p)
    return h, v


@nb.njit(cache=True, nogil=True)
def flood(hor, ver, node_mask, seeds):
    """Nodes reachable from ``seeds`` through usable edges inside ``node_mask``."""
    W, H = node_mask.shape
    reached = np.zeros((W, H), np.bool_)
    stack = np.empty(W * H, np.int64)
    top = 0
    for i in range(W):
        for j in range(H):
            if seeds[i, j] and node_mask[i, j]:
                reached[i, j] = True
                stack[top] = i * H + j
                top += 1
    while top > 0:
        top -= 1
        c = stack[top]
        i = c // H
        j = c - i * H
        if i + 1 < W and hor[i, j] and node_mask[i + 1, j] and not reached[i + 1, j]:
            reached[i + 1, j] = True
            stack[top] = c + H
            top += 1
        if i > 0 and hor[i - 1, j] and node_mask[i - 1, j] and not reached[i - 1, j]:
            reached[i - 1, j] = True
            stack[top] = c - H
            top += 1
        if j + 1 < H and ver[i, j] and node_mask[i, j + 1] and not reached[i, j + 1]:
            reached[i, j + 1] = True
            stack[top] = c + 1
            top += 1
        if j > 0 and ver[i, j - 1] and node_mask[i, j - 1] and not reached[i, j - 1]:
            reached[i, j - 1] = True
            stack[top] = c - 1
            top += 1
    return reached


@nb.njit(cache=True, nogil=True)
def _find(parent, a):
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


@nb.njit(cache=True, nogil=True)
def _union(parent, size, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra == rb:
        return ra
    if size[ra] < size[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    size[ra] += size[rb]
    return ra


@nb.njit(cache=True, nogil=True)
def label(hor, ver, node_mask):
    """Union-find labelling; returns the flat root index per node, -1 outside."""
    W, H = node_mask.shape
    n = W * H
    parent = np.arange(n)
    size = np.ones(n, np.int64)
    for i in range(W):
        for j in range(H):
            if not node_mask[i, j]:
                continue
            c = i * H + j
            if i + 1 < W and hor[i, j] and node_mask[i + 1, j]:
                _union(parent, size, c, c + H)
            if j + 1 < H and ver[i, j] and node_mask[i, j + 1]:
                _union(parent, size, c, c + 1)
    out = np.full((W, H), -1, np.int64)
    for i in range(W):
        for j in range(H):
            if node_mask[i, j]:
                out[i, j] = _find(parent, i * H + j)
    return out


@nb.njit(cache=True, nogil=True)
def origin_radius(key, p, n):
    """Largest sup-norm reached by the open cluster of O inside Lambda_n.

    Edge states are drawn lazily from the counter-based generator, so the
    result is identical to exploring a fully sampled configuration.
    Exploration stops as soon as radius ``n`` is reached.
    """
    if n == 0:
        return 0
    side = 2 * n + 1
    seen = np.zeros((side, side), np.bool_)
    stack = np.empty(side * side, np.int64)
    seen[n, n] = True
    stack[0] = n * side + n
    top = 1
    best = 0
    while top > 0:
        top -= 1
        c = stack[top]
        i = c // side
        j = c - i * side
        x = i - n
        y = j - n
        for d in range(4):
            if d == 0:
                ni, nj, ex, ey, vert = i + 1, j, x, y, 0
            elif d == 1:
                ni, nj, ex, ey, vert = i - 1, j, x - 1, y, 0
            elif d == 2:
                ni, nj, ex, ey, vert = i, j + 1, x, y, 1
            else:
                ni, nj, ex, ey, vert = i, j - 1, x, y - 1, 1
            if ni < 0 or nj < 0 or ni >= side or nj >= side or seen[ni, nj]:
                continue
            if not edge_open(key, ex, ey, vert, p):
                continue
            seen[ni, nj] = True
            r = max(abs(ni - n), abs(nj - n))
            if r > best:
                best = r
                if best == n:
                    return n
            stack[top] = ni * side + nj
            top += 1
    return best


@nb.njit(cache=True, nogil=True)
def rect_states(key, p, x0, y0, W, H):
    """States of every edge of the full rectangle of W x H sites at (x0, y0)."""
    h = np.zeros((W, H), np.bool_)
    v = np.zeros((W, H), np.bool_)
    for i in range(W):
        for j in range(H):
            if i + 1 < W:
                h[i, j] = edge_open(key, x0 + i, y0 + j, 0, p)
            if j + 1 < H:
                v[i, j] = edge_open(key, x0 + i, y0 + j, 1, p)
    return h, v


@nb.njit(cache=True, nogil=True)
def max_label_size(labels):
    n = labels.size
    counts = np.zeros(n, np.int64)
    flat = labels.ravel()
    best = 0
    for c in range(n):
        r = flat[c]
        if r >= 0:
            counts[r] += 1
            if counts[r] > best:
                best = counts[r]
    return best


@nb.njit(cache=True, nogil=True)
def uniforms(key, rows, cols):
    """Counter-based uniforms: entry (i, j) is a pure function of (key, i, j)."""
    out = np.empty((rows, cols))
    for i in range(rows):
        for j in range(cols):
            out[i, j] = edge_uniform(key, i, j, 0)
    return out


@nb.njit(cache=True, nogil=True)
def _rect_edge_uniforms(key, x0, y0, W, H):
    m = (W - 1) * H + W * (H - 1)
    u = np.empty(m)
    a = np.empty(m, np.int64)
    b = np.empty(m, np.int64)
    k = 0
    for i in range(W):
        for j in range(H):
            if i + 1 < W:
                u[k] = edge_uniform(key, x0 + i, y0 + j, 0)
                a[k] = i * H + j
                b[k] = (i + 1) * H + j
                k += 1
            if j + 1 < H:
                u[k] = edge_uniform(key, x0 + i, y0 + j, 1)
                a[k] = i * H + j
                b[k] = i * H + j + 1
                k += 1
    return u, a, b


@nb.njit(cache=True, nogil=True)
def sweep_threshold(key, x0, y0, W, H, source, target, nodes):
    """Newman-Ziff sweep over a W x H rectangle of sites.

    Edges are added in increasing order of their uniforms, so after ``k``
    additions the open set is exactly ``{u_e < u_(k)}``. ``source`` and
    ``target`` are boolean masks glued to two virtual nodes; edges touching a
    site outside ``nodes`` are never used. The result is the number of edges
    added when the virtual nodes first become connected (edge count + 1 if
    never).
    """
    u, a, b = _rect_edge_uniforms(key, x0, y0, W, H)
    order = np.argsort(u)
    n = W * H
    parent = np.arange(n + 2)
    size = np.ones(n + 2, np.int64)
    S, T = n, n + 1
    flat_s = source.ravel()
    flat_t = target.ravel()
    flat_n = nodes.ravel()
    for c in range(n):
        if not flat_n[c]:
            continue
        if flat_s[c]:
            _union(parent, size, c, S)
        if flat_t[c]:
            _union(parent, size, c, T)
    if _find(parent, S) == _find(parent, T):
        return 0
    for k in range(len(order)):
        e = order[k]
        if not (flat_n[a[e]] and flat_n[b[e]]):
            continue
        _union(parent, size, a[e], b[e])
        if _find(parent, S) == _find(parent, T):
            return k + 1
    return len(order) + 1
