"""NumPy implementations of the hot kernels.

This is the fallback used when the compiled extension ``losdof._kernels_cy``
is unavailable; signatures and argument conventions mirror the .pyx file
exactly.  All phase arguments are reduced modulo one full turn *before*
multiplying by 2*pi, because several builders carry phase offsets of a few
thousand turns and would otherwise lose digits.
"""

import numpy as np

TWO_PI = 2.0 * np.pi


def distance_matrix(x, w, y, z, distance, area):
    """Internode distances sqrt((d + sqrt(A)(x_j+w_k))^2 + A (y_j-z_k)^2)."""
    sa = np.sqrt(area)
    horiz = distance + sa * (x[:, None] + w[None, :])
    vert = y[:, None] - z[None, :]
    return np.sqrt(horiz * horiz + area * (vert * vert))


def los_matrix(r, wavelength):
    """Line-of-sight fading entries exp(2*pi*i*r/wavelength)/r."""
    turns = r / wavelength
    frac = turns - np.floor(turns)
    ang = TWO_PI * frac
    return (np.cos(ang) + 1j * np.sin(ang)) / r


def g_matrix(y, z, m):
    """Separable-phase entries exp(-2*pi*i*m*y_j*z_k)."""
    turns = np.outer(m * y, z)
    frac = turns - np.floor(turns)
    ang = TWO_PI * frac
    return np.cos(ang) - 1j * np.sin(ang)


def phase_factored_matrix(u, v, y, z, m):
    """Unimodular entries exp(2*pi*i*(u_j + v_k - m*y_j*z_k))."""
    fu = u - np.floor(u)
    fv = v - np.floor(v)
    turns = np.outer(m * y, z)
    ft = turns - np.floor(turns)
    ang = TWO_PI * (fu[:, None] + fv[None, :] - ft)
    return np.cos(ang) + 1j * np.sin(ang)


def sinc_matrix(nodes, sqrt_weights, m):
    """Symmetrized Nystrom matrix sqrt(w_i) K(x_i, x_j) sqrt(w_j).

    K(x, y) = sin(pi*m*(x - y))/(pi*(x - y)) with diagonal value m.
    """
    diff = nodes[:, None] - nodes[None, :]
    kern = m * np.sinc(m * diff)
    return np.outer(sqrt_weights, sqrt_weights) * kern


def g_phase_batch(y, z, m):
    """Batched separable-phase matrices for Monte Carlo trials.

    y, z have shape (trials, k); the result has shape (trials, k, k) with
    entries exp(-2*pi*i*m*y[t, j]*z[t, l]).
    """
    turns = (m * y)[:, :, None] * z[:, None, :]
    frac = turns - np.floor(turns)
    ang = TWO_PI * frac
    return np.cos(ang) - 1j * np.sin(ang)


def absdet2_batch(mats):
    """|det|^2 of each (k, k) slice, via LU with partial pivoting."""
    det = np.linalg.det(mats)
    return det.real * det.real + det.imag * det.imag
