# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the row-interval solver and the batch BCH + quasi-norm."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, cbrt

cnp.import_array()

cdef enum:
    MAXD = 40
    BISECT_ITERS = 60


cdef inline double _sgn(double v) noexcept nogil:
    if v > 0:
        return 1.0
    if v < 0:
        return -1.0
    return 0.0


cdef inline double _horner(const double* c, int d, double x) noexcept nogil:
    cdef double acc = c[d]
    cdef int j
    for j in range(d - 1, -1, -1):
        acc = acc * x + c[j]
    return acc


cdef void _sort(double* v, int n) noexcept nogil:
    cdef int i, j
    cdef double key
    for i in range(1, n):
        key = v[i]
        j = i - 1
        while j >= 0 and v[j] > key:
            v[j + 1] = v[j]
            j -= 1
        v[j + 1] = key


cdef void _roots(const double* c, int d, double lo, double hi, double* out) noexcept nogil:
    # roots in (lo, hi], sorted, padded with hi; writes d values
    cdef double dc[MAXD]
    cdef double crit[MAXD]
    cdef int i, j, it
    cdef double a, b, m, sa, sb, fm
    if d == 0:
        return
    for j in range(d):
        dc[j] = c[j + 1] * <double>(j + 1)
    _roots(dc, d - 1, lo, hi, crit)
    for i in range(d):
        a = lo if i == 0 else crit[i - 1]
        b = crit[i] if i < d - 1 else hi
        sa = _sgn(_horner(c, d, a))
        sb = _sgn(_horner(c, d, b))
        if sa != 0 and sa != sb:
            for it in range(BISECT_ITERS):
                m = 0.5 * (a + b)
                fm = _sgn(_horner(c, d, m))
                if fm == sa:
                    a = m
                else:
                    b = m
            out[i] = 0.5 * (a + b)
        else:
            out[i] = hi
    _sort(out, d)


def row_intervals(coef, bounds, s, double t_lo, double t_hi):
    cdef cnp.ndarray[cnp.float64_t, ndim=3] C = np.ascontiguousarray(coef, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] B = np.ascontiguousarray(bounds, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] S = np.ascontiguousarray(s, dtype=np.float64)
    cdef int K = C.shape[0], I = C.shape[1], J = C.shape[2]
    cdef int d = J - 1
    cdef Py_ssize_t n = S.shape[0]
    if d + 1 > MAXD:
        raise ValueError("polynomial degree too large for the compiled kernel")
    cdef int npts = 2 + 2 * K * d
    cdef int P = npts - 1
    cdef cnp.ndarray[cnp.float64_t, ndim=2] starts = np.empty((n, P))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ends = np.empty((n, P))
    cdef double[:, ::1] a = np.empty((K, J))
    cdef double[::1] pts = np.empty(npts)
    cdef double[::1] cbuf = np.empty(J)
    cdef double[::1] rbuf = np.empty(max(d, 1))
    cdef Py_ssize_t row
    cdef int k, i, j, sg, pos, l
    cdef double acc, sv, p, q, m, v, sign
    cdef bint inside
    with nogil:
        for row in range(n):
            sv = S[row]
            for k in range(K):
                for j in range(J):
                    acc = C[k, I - 1, j]
                    for i in range(I - 2, -1, -1):
                        acc = acc * sv + C[k, i, j]
                    a[k, j] = acc
            pos = 0
            pts[pos] = t_lo
            pos += 1
            if d > 0:
                for k in range(K):
                    for sg in range(2):
                        sign = -1.0 if sg == 0 else 1.0
                        for j in range(J):
                            cbuf[j] = a[k, j]
                        cbuf[0] = cbuf[0] + sign * B[k]
                        _roots(&cbuf[0], d, t_lo, t_hi, &rbuf[0])
                        for l in range(d):
                            pts[pos] = rbuf[l]
                            pos += 1
            pts[pos] = t_hi
            pos += 1
            _sort(&pts[0], npts)
            for l in range(P):
                p = pts[l]
                q = pts[l + 1]
                m = 0.5 * (p + q)
                inside = q > p
                if inside:
                    for k in range(K):
                        v = _horner(&a[k, 0], d, m)
                        if not (fabs(v) <= B[k]):
                            inside = False
                            break
                starts[row, l] = p
                ends[row, l] = q if inside else p
    return starts, ends


def bch_quasinorm(x, y, double xi12, double xi13, double xi23, double k3, double k4):
    cdef const double[:, :] X = np.asarray(x, dtype=np.float64)
    cdef const double[:, :] Y = np.asarray(y, dtype=np.float64)
    cdef Py_ssize_t n = X.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n)
    cdef double x1, x2, x3, x4, y1, y2, y3, y4, b3, b4, t4, z, best
    with nogil:
        for i in range(n):
            x1 = X[i, 0]; x2 = X[i, 1]; x3 = X[i, 2]; x4 = X[i, 3]
            y1 = Y[i, 0]; y2 = Y[i, 1]; y3 = Y[i, 2]; y4 = Y[i, 3]
            b3 = xi12 * (x1 * y2 - x2 * y1)
            b4 = xi13 * (x1 * y3 - x3 * y1) + xi23 * (x2 * y3 - x3 * y2)
            t4 = xi13 * (x1 * b3) + xi23 * (x2 * b3) - (xi13 * (y1 * b3) + xi23 * (y2 * b3))
            best = fabs(x1 + y1)
            z = fabs(x2 + y2)
            if z > best:
                best = z
            z = sqrt(fabs(x3 + y3 + 0.5 * b3) / k3)
            if z > best:
                best = z
            z = cbrt(fabs(x4 + y4 + 0.5 * b4 + t4 / 12.0) / k4)
            if z > best:
                best = z
            out[i] = best
    return out
