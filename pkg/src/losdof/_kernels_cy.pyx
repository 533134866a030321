# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels.

Mirrors losdof._kernels_py; the backend module picks whichever import
succeeds.  Phase arguments are reduced modulo one turn before multiplying
by 2*pi, matching the numpy implementations operation for operation so the
two backends agree to rounding error.
"""

import numpy as np

from libc.math cimport cos, floor, sin, sqrt

cdef double TWO_PI = 6.283185307179586


def distance_matrix(const double[::1] x, const double[::1] w, const double[::1] y, const double[::1] z,
                    double distance, double area):
    """Internode distances sqrt((d + sqrt(A)(x_j+w_k))^2 + A (y_j-z_k)^2)."""
    cdef Py_ssize_t rows = x.shape[0], cols = w.shape[0], j, l
    cdef double sa = sqrt(area), horiz, vert
    out = np.empty((rows, cols), dtype=np.float64)
    cdef double[:, ::1] r = out
    for j in range(rows):
        for l in range(cols):
            horiz = distance + sa * (x[j] + w[l])
            vert = y[j] - z[l]
            r[j, l] = sqrt(horiz * horiz + area * (vert * vert))
    return out


def los_matrix(const double[:, ::1] r, double wavelength):
    """Line-of-sight fading entries exp(2*pi*i*r/wavelength)/r."""
    cdef Py_ssize_t rows = r.shape[0], cols = r.shape[1], j, l
    cdef double turns, frac, ang
    out = np.empty((rows, cols), dtype=np.complex128)
    cdef double complex[:, ::1] h = out
    for j in range(rows):
        for l in range(cols):
            turns = r[j, l] / wavelength
            frac = turns - floor(turns)
            ang = TWO_PI * frac
            h[j, l] = (cos(ang) + 1j * sin(ang)) / r[j, l]
    return out


def g_matrix(const double[::1] y, const double[::1] z, double m):
    """Separable-phase entries exp(-2*pi*i*m*y_j*z_k)."""
    cdef Py_ssize_t rows = y.shape[0], cols = z.shape[0], j, l
    cdef double my, turns, frac, ang
    out = np.empty((rows, cols), dtype=np.complex128)
    cdef double complex[:, ::1] g = out
    for j in range(rows):
        my = m * y[j]
        for l in range(cols):
            turns = my * z[l]
            frac = turns - floor(turns)
            ang = TWO_PI * frac
            g[j, l] = cos(ang) - 1j * sin(ang)
    return out


def phase_factored_matrix(const double[::1] u, const double[::1] v, const double[::1] y,
                          const double[::1] z, double m):
    """Unimodular entries exp(2*pi*i*(u_j + v_k - m*y_j*z_k))."""
    cdef Py_ssize_t rows = u.shape[0], cols = v.shape[0], j, l
    cdef double fu, fv, my, turns, ft, ang
    out = np.empty((rows, cols), dtype=np.complex128)
    cdef double complex[:, ::1] h = out
    for j in range(rows):
        fu = u[j] - floor(u[j])
        my = m * y[j]
        for l in range(cols):
            fv = v[l] - floor(v[l])
            turns = my * z[l]
            ft = turns - floor(turns)
            ang = TWO_PI * (fu + fv - ft)
            h[j, l] = cos(ang) + 1j * sin(ang)
    return out


def sinc_matrix(const double[::1] nodes, const double[::1] sqrt_weights, double m):
    """Symmetrized Nystrom matrix sqrt(w_i) K(x_i, x_j) sqrt(w_j).

    K(x, y) = sin(pi*m*(x - y))/(pi*(x - y)) with diagonal value m.
    """
    cdef Py_ssize_t n = nodes.shape[0], i, j
    cdef double pi = 3.141592653589793
    cdef double diff, val
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] k = out
    for i in range(n):
        for j in range(n):
            diff = nodes[i] - nodes[j]
            if diff == 0.0:
                val = m
            else:
                val = sin(pi * m * diff) / (pi * diff)
            k[i, j] = (sqrt_weights[i] * sqrt_weights[j]) * val
    return out


def g_phase_batch(const double[:, ::1] y, const double[:, ::1] z, double m):
    """Batched separable-phase matrices for Monte Carlo trials."""
    cdef Py_ssize_t trials = y.shape[0], k = y.shape[1], t, j, l
    cdef double my, turns, frac, ang
    out = np.empty((trials, k, k), dtype=np.complex128)
    cdef double complex[:, :, ::1] g = out
    for t in range(trials):
        for j in range(k):
            my = m * y[t, j]
            for l in range(k):
                turns = my * z[t, l]
                frac = turns - floor(turns)
                ang = TWO_PI * frac
                g[t, j, l] = cos(ang) - 1j * sin(ang)
    return out


def absdet2_batch(const double complex[:, :, ::1] mats):
    """|det|^2 of each (k, k) slice, via Gaussian elimination with partial
    pivoting.  The determinant's sign flips under row swaps cancel in the
    squared modulus, so swaps are not tracked."""
    cdef Py_ssize_t trials = mats.shape[0], k = mats.shape[1], t, col, row, piv, i
    cdef double best, mag
    cdef double complex factor, det
    out = np.empty(trials, dtype=np.float64)
    cdef double[::1] res = out
    scratch = np.empty((k, k), dtype=np.complex128)
    cdef double complex[:, ::1] a = scratch
    for t in range(trials):
        for row in range(k):
            for col in range(k):
                a[row, col] = mats[t, row, col]
        det = 1.0 + 0j
        for col in range(k):
            piv = col
            best = a[col, col].real * a[col, col].real + a[col, col].imag * a[col, col].imag
            for row in range(col + 1, k):
                mag = a[row, col].real * a[row, col].real + a[row, col].imag * a[row, col].imag
                if mag > best:
                    best = mag
                    piv = row
            if best == 0.0:
                det = 0.0
                break
            if piv != col:
                for i in range(col, k):
                    factor = a[col, i]
                    a[col, i] = a[piv, i]
                    a[piv, i] = factor
            for row in range(col + 1, k):
                factor = a[row, col] / a[col, col]
                for i in range(col, k):
                    a[row, i] = a[row, i] - factor * a[col, i]
            det = det * a[col, col]
        res[t] = det.real * det.real + det.imag * det.imag
    return out
