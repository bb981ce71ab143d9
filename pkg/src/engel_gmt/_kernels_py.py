"""Pure numpy versions of the hot loops. Same arithmetic order as the Cython module."""
import numpy as np

BISECT_ITERS = 60


def _horner(c, x):
    # c: (N, d+1) ascending coefficients; x: (N, P)
    d = c.shape[1] - 1
    acc = np.broadcast_to(c[:, d:d + 1], x.shape).copy()
    for j in range(d - 1, -1, -1):
        acc = acc * x + c[:, j:j + 1]
    return acc


def _roots(c, lo, hi):
    """Real roots in (lo, hi], sorted, padded with hi. Shape (N, d)."""
    n, d1 = c.shape
    d = d1 - 1
    if d == 0:
        return np.empty((n, 0))
    dc = c[:, 1:] * np.arange(1, d1, dtype=float)
    crit = _roots(dc, lo, hi)
    a = np.concatenate([np.full((n, 1), lo), crit], axis=1)
    b = np.concatenate([crit, np.full((n, 1), hi)], axis=1)
    sa = np.sign(_horner(c, a))
    sb = np.sign(_horner(c, b))
    has = (sa != 0) & (sa != sb)
    for _ in range(BISECT_ITERS):
        m = 0.5 * (a + b)
        fm = np.sign(_horner(c, m))
        left = fm == sa
        a = np.where(left, m, a)
        b = np.where(left, b, m)
    r = np.where(has, 0.5 * (a + b), hi)
    return np.sort(r, axis=1)


def row_intervals(coef, bounds, s, t_lo, t_hi):
    """Pieces of {t in [t_lo, t_hi] : |p_k(s, t)| <= bounds[k] for all k} per row s.

    coef[k, i, j] is the coefficient of s^i t^j of p_k. Returns (starts, ends)
    of shape (len(s), P); pieces outside the set have start == end.
    """
    coef = np.ascontiguousarray(coef, dtype=float)
    s = np.ascontiguousarray(s, dtype=float)
    K, I, J = coef.shape
    n = s.shape[0]
    d = J - 1
    # row polynomials in t, Horner in s
    a = np.empty((K, n, J))
    for k in range(K):
        acc = np.broadcast_to(coef[k, I - 1], (n, J)).copy()
        for i in range(I - 2, -1, -1):
            acc = acc * s[:, None] + coef[k, i][None, :]
        a[k] = acc
    pts = [np.full((n, 1), t_lo)]
    if d > 0:
        # all 2K shifted polynomials in one batch: (K, 2, n, J) -> (2Kn, J)
        c = np.repeat(a[:, None], 2, axis=1)
        c[:, 0, :, 0] = c[:, 0, :, 0] + (-1.0 * np.asarray(bounds, dtype=float))[:, None]
        c[:, 1, :, 0] = c[:, 1, :, 0] + (1.0 * np.asarray(bounds, dtype=float))[:, None]
        r = _roots(c.reshape(2 * K * n, J), t_lo, t_hi).reshape(2 * K, n, d)
        pts.extend(r)
    pts.append(np.full((n, 1), t_hi))
    pts = np.sort(np.concatenate(pts, axis=1), axis=1)
    p = pts[:, :-1]
    q = pts[:, 1:]
    m = 0.5 * (p + q)
    inside = q > p
    for k in range(K):
        v = _horner(a[k], m)
        inside &= np.abs(v) <= bounds[k]
    ends = np.where(inside, q, p)
    return p, ends


def bch_quasinorm(x, y, xi12, xi13, xi23, k3, k4):
    """||x . y|| for rows of x, y (shape (n, 4))."""
    x1, x2, x3, x4 = x[:, 0], x[:, 1], x[:, 2], x[:, 3]
    y1, y2, y3, y4 = y[:, 0], y[:, 1], y[:, 2], y[:, 3]
    b3 = xi12 * (x1 * y2 - x2 * y1)
    b4 = xi13 * (x1 * y3 - x3 * y1) + xi23 * (x2 * y3 - x3 * y2)
    # step-3 part: [x,[x,y]] - [y,[x,y]] fourth components
    t4 = xi13 * (x1 * b3) + xi23 * (x2 * b3) - (xi13 * (y1 * b3) + xi23 * (y2 * b3))
    z1 = x1 + y1
    z2 = x2 + y2
    z3 = x3 + y3 + 0.5 * b3
    z4 = x4 + y4 + 0.5 * b4 + t4 / 12.0
    out = np.maximum(np.abs(z1), np.abs(z2))
    out = np.maximum(out, np.sqrt(np.abs(z3) / k3))
    return np.maximum(out, np.cbrt(np.abs(z4) / k4))
