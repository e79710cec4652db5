# cython: language_level=3
"""Compiled hot loops; see ``fallback.py`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, log, sqrt, cos, sin, isfinite, NAN
from scipy.linalg.cython_blas cimport zgemv

cnp.import_array()


cdef inline void _matvec(double complex* a, double complex* x, double complex* y,
                         int n) noexcept nogil:
    # row-major a is column-major a.T, so ask BLAS for the transpose
    cdef char trans = b'T'
    cdef int inc = 1
    cdef double complex one = 1.0
    cdef double complex zero = 0.0
    zgemv(&trans, &n, &n, &one, a, &n, x, &inc, &zero, y, &inc)


cdef inline double _tail(double complex* v, Py_ssize_t start, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i
    cdef double s = 0.0
    for i in range(start, n):
        s += v[i].real * v[i].real + v[i].imag * v[i].imag
    return s


def propagate(step_u, step_p, psi_u, psi_p, photon, Py_ssize_t kicks,
              Py_ssize_t stride, Py_ssize_t leak_start):
    cdef double complex[:, ::1] su = np.ascontiguousarray(step_u, dtype=np.complex128)
    cdef double complex[:, ::1] sp = np.ascontiguousarray(step_p, dtype=np.complex128)
    cdef double[::1] nvec = np.ascontiguousarray(photon, dtype=np.float64)
    cdef Py_ssize_t dim = su.shape[0]
    # two ping-pong buffers per branch
    bu_arr = np.zeros((2, dim), dtype=np.complex128)
    bp_arr = np.zeros((2, dim), dtype=np.complex128)
    bu_arr[0] = psi_u
    bp_arr[0] = psi_p
    cdef double complex[:, ::1] bu = bu_arr
    cdef double complex[:, ::1] bp = bp_arr
    cdef Py_ssize_t nrec = kicks // stride + 1
    fid_arr = np.empty(nrec)
    fidn_arr = np.empty(nrec)
    mean_arr = np.empty(nrec)
    leak_arr = np.empty(nrec)
    cdef double[::1] fid = fid_arr
    cdef double[::1] fidn = fidn_arr
    cdef double[::1] mean_n = mean_arr
    cdef double[::1] leak = leak_arr
    cdef Py_ssize_t k, i, rec = 0, cur = 0
    cdef double complex* u
    cdef double complex* p
    cdef double complex ov, ovn, cp
    cdef double pn, lk, lk2, leak_max = 0.0, pu
    cdef int n = <int>dim

    with nogil:
        k = 0
        while True:
            u = &bu[cur, 0]
            p = &bp[cur, 0]
            if k % stride == 0:
                ov = 0.0
                ovn = 0.0
                pn = 0.0
                for i in range(dim):
                    cp = p[i].conjugate() * u[i]
                    ov = ov + cp
                    ovn = ovn + nvec[i] * cp
                    pu = u[i].real * u[i].real + u[i].imag * u[i].imag
                    pn += nvec[i] * pu
                fid[rec] = sqrt(ov.real * ov.real + ov.imag * ov.imag)
                fidn[rec] = sqrt(ovn.real * ovn.real + ovn.imag * ovn.imag)
                mean_n[rec] = pn
                lk = _tail(u, leak_start, dim)
                lk2 = _tail(p, leak_start, dim)
                leak[rec] = lk if lk > lk2 else lk2
                if leak[rec] > leak_max:
                    leak_max = leak[rec]
                rec += 1
            if k == kicks:
                break
            _matvec(&su[0, 0], u, &bu[1 - cur, 0], n)
            _matvec(&sp[0, 0], p, &bp[1 - cur, 0], n)
            cur = 1 - cur
            k += 1
            lk = _tail(&bu[cur, 0], leak_start, dim)
            lk2 = _tail(&bp[cur, 0], leak_start, dim)
            if lk2 > lk:
                lk = lk2
            if lk > leak_max:
                leak_max = lk
    return (fid_arr, fidn_arr, mean_arr, leak_arr, float(leak_max),
            bu_arr[cur].copy(), bp_arr[cur].copy())


cdef inline void _kerr_map(double re, double im, double eps, double chi_t,
                           double* ore, double* oim) noexcept nogil:
    cdef double bre = re
    cdef double bim = im - eps
    cdef double ph = -chi_t * (bre * bre + bim * bim)
    cdef double c = cos(ph)
    cdef double s = sin(ph)
    ore[0] = c * bre - s * bim
    oim[0] = s * bre + c * bim


def classical_energies(eps, double chi_t, alpha0, Py_ssize_t transient,
                       Py_ssize_t samples, double blowup):
    cdef double[::1] ev = np.ascontiguousarray(eps, dtype=np.float64)
    cdef Py_ssize_t ne = ev.shape[0]
    out_arr = np.empty((ne, samples))
    div_arr = np.zeros(ne, dtype=bool)
    cdef double[:, ::1] out = out_arr
    cdef cnp.npy_bool[::1] div = div_arr
    cdef double a0re = complex(alpha0).real
    cdef double a0im = complex(alpha0).imag
    cdef Py_ssize_t j, k
    cdef double re, im, nre, nim, e, lim2 = blowup * blowup
    with nogil:
        for j in range(ne):
            re = a0re
            im = a0im
            e = ev[j]
            for k in range(transient + samples):
                _kerr_map(re, im, e, chi_t, &nre, &nim)
                re = nre
                im = nim
                if not (isfinite(re) and isfinite(im)) or re * re + im * im > lim2:
                    div[j] = True
                    break
                if k >= transient:
                    out[j, k - transient] = re * re + im * im
            if div[j]:
                for k in range(samples):
                    out[j, k] = NAN
    return out_arr, div_arr


def classical_divergence(eps, double chi_t, alpha0, Py_ssize_t transient,
                         Py_ssize_t steps, double d0):
    cdef double[::1] ev = np.ascontiguousarray(eps, dtype=np.float64)
    cdef Py_ssize_t ne = ev.shape[0]
    rate_arr = np.empty(ne)
    cdef double[::1] rate = rate_arr
    cdef double a0re = complex(alpha0).real
    cdef double a0im = complex(alpha0).imag
    cdef Py_ssize_t j, k
    cdef double re, im, bre, bim, t1, t2, d, acc, e
    with nogil:
        for j in range(ne):
            e = ev[j]
            re = a0re
            im = a0im
            for k in range(transient):
                _kerr_map(re, im, e, chi_t, &t1, &t2)
                re = t1
                im = t2
            bre = re + d0
            bim = im
            acc = 0.0
            for k in range(steps):
                _kerr_map(re, im, e, chi_t, &t1, &t2)
                re = t1
                im = t2
                _kerr_map(bre, bim, e, chi_t, &t1, &t2)
                bre = t1 - re
                bim = t2 - im
                d = sqrt(bre * bre + bim * bim)
                if d <= 0.0:
                    d = d0 * 1e-300
                acc += log(d / d0)
                bre = re + bre * (d0 / d)
                bim = im + bim * (d0 / d)
            rate[j] = acc / steps
    return rate_arr


def kantz_curve(x, Py_ssize_t m, Py_ssize_t tau, Py_ssize_t theiler,
                double radius, Py_ssize_t smax, Py_ssize_t chunk=0):
    cdef double[::1] xs = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t count = xs.shape[0] - (m - 1) * tau - smax
    total_arr = np.zeros(smax + 1)
    if count <= 0:
        return total_arr, 0
    cdef double[::1] total = total_arr
    # sort references by their first delay coordinate to prune the search
    order_arr = np.argsort(np.asarray(xs[:count]), kind="stable").astype(np.intp)
    cdef Py_ssize_t[::1] order = order_arr
    cdef double[::1] key = np.ascontiguousarray(np.asarray(xs[:count])[order_arr])
    cdef double[::1] acc = np.zeros(smax + 1)
    cdef Py_ssize_t last = (m - 1) * tau
    cdef Py_ssize_t pos, i, q, j, c, s, nnb, lo, used = 0
    cdef double xi, dmax, dd
    cdef bint close
    with nogil:
        for pos in range(count):
            i = order[pos]
            xi = key[pos]
            lo = pos
            while lo > 0 and xi - key[lo - 1] <= radius:
                lo -= 1
            nnb = 0
            for s in range(smax + 1):
                acc[s] = 0.0
            q = lo
            while q < count and key[q] - xi <= radius:
                j = order[q]
                q += 1
                if j - i > theiler or i - j > theiler:
                    close = True
                    for c in range(1, m):
                        dd = fabs(xs[i + c * tau] - xs[j + c * tau])
                        if dd > radius:
                            close = False
                            break
                    if not close:
                        continue
                    nnb += 1
                    for s in range(smax + 1):
                        acc[s] += fabs(xs[i + last + s] - xs[j + last + s])
            if nnb == 0:
                continue
            used += 1
            for s in range(smax + 1):
                dd = acc[s] / nnb
                if dd < 1e-300:
                    dd = 1e-300
                total[s] += log(dd)
        if used > 0:
            for s in range(smax + 1):
                total[s] /= used
    return total_arr, used
