"""Channel-matrix builders.

Provides the line-of-sight matrix H, its power-normalized version, the
separable-phase comparison matrix G with entries exp(-2*pi*i*m*y_j*z_k),
the quadratic-Taylor phase factorization that links the two, and the
Vandermonde / random-DFT variants.  All builders are deterministic
functions of their inputs and return immutable matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .backend import kernels
from .errors import InvalidParameterError, MatrixKindError
from .model import ClusterParams, DerivedParams, NodePositions, Seed, derive, distance_matrix, rng_from


class MatrixKind(str, Enum):
    """Construction provenance tag carried by every matrix."""

    LOS = "LOS"
    LOS_NORMALIZED = "LOS_NORMALIZED"
    PHASE_FACTORED = "PHASE_FACTORED"
    KERNEL_G = "KERNEL_G"
    VANDERMONDE = "VANDERMONDE"
    RANDOM_DFT = "RANDOM_DFT"


# Kinds whose entries are unimodular by construction.
UNIMODULAR_KINDS = frozenset(
    {MatrixKind.PHASE_FACTORED, MatrixKind.KERNEL_G, MatrixKind.VANDERMONDE, MatrixKind.RANDOM_DFT}
)


@dataclass(frozen=True)
class ComplexMatrix:
    """Dense complex matrix plus the tag saying how it was built."""

    entries: np.ndarray
    kind: MatrixKind

    def __post_init__(self):
        arr = np.ascontiguousarray(self.entries, dtype=np.complex128)
        if arr.ndim != 2:
            raise InvalidParameterError("entries must be a 2-d array")
        if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
            raise InvalidParameterError("matrix entries must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)
        object.__setattr__(self, "kind", MatrixKind(self.kind))

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class PhaseFactors:
    """Per-node phase offsets, in whole turns (multiples of 2*pi).

    u holds the receiver-side offsets and v the transmitter-side ones.  The
    values are kept unreduced; only their fractional parts matter.
    """

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.ascontiguousarray(self.u, dtype=np.float64)
        v = np.ascontiguousarray(self.v, dtype=np.float64)
        if u.shape != v.shape or u.ndim != 1:
            raise InvalidParameterError("u and v must be 1-d arrays of equal length")
        u.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)


def build_los_matrix(pos: NodePositions, params: ClusterParams) -> ComplexMatrix:
    """Line-of-sight fading matrix h_jk = exp(2*pi*i*r_jk/wavelength)/r_jk."""
    r = distance_matrix(pos, params)
    return ComplexMatrix(kernels.los_matrix(r, params.wavelength), MatrixKind.LOS)


def normalize_los(mat: ComplexMatrix, derived: DerivedParams, n: int) -> ComplexMatrix:
    """Scale a LOS matrix by sqrt(n*power).

    The Gram spectrum of the result equals n*power times the spectrum of
    the unscaled Gram matrix.
    """
    if mat.kind is not MatrixKind.LOS:
        raise MatrixKindError(f"normalize_los expects kind LOS, got {mat.kind.value}")
    scale = math.sqrt(n * derived.power)
    return ComplexMatrix(mat.entries * scale, MatrixKind.LOS_NORMALIZED)


def g_from_coords(y: np.ndarray, z: np.ndarray, m: float) -> ComplexMatrix:
    """Separable-phase matrix g_jk = exp(-2*pi*i*m*y_j*z_k) from raw coordinates."""
    if not (math.isfinite(m) and m >= 0.0):
        # m = 0 is the degenerate all-ones matrix, useful as a sanity case.
        raise InvalidParameterError(f"m must be finite and >= 0, got {m!r}")
    y = np.ascontiguousarray(y, dtype=np.float64)
    z = np.ascontiguousarray(z, dtype=np.float64)
    return ComplexMatrix(kernels.g_matrix(y, z, m), MatrixKind.KERNEL_G)


def build_g_matrix(pos: NodePositions, m: float) -> ComplexMatrix:
    """Separable-phase comparison matrix on sampled vertical coordinates."""
    return g_from_coords(pos.y, pos.z, m)


def build_phase_factored(pos: NodePositions, params: ClusterParams) -> tuple[ComplexMatrix, PhaseFactors]:
    """Quadratic-Taylor approximation of the LOS phase.

    Entries are exp(2*pi*i*(u_j + v_k - m*y_j*z_k)) with

        u_j = (d/2 + sqrt(A)*x_j + (A/d)*y_j^2/2) / wavelength,
        v_k = (d/2 + sqrt(A)*w_k + (A/d)*z_k^2/2) / wavelength,

    so the matrix equals diag(exp(2*pi*i*u)) @ G @ diag(exp(2*pi*i*v)).
    The unimodular diagonals leave the Gram spectrum of G untouched.
    """
    d, a, lam = params.distance, params.area, params.wavelength
    m = derive(params).m
    sa = math.sqrt(a)
    u = (d / 2.0 + sa * pos.x + (a / d) * pos.y**2 / 2.0) / lam
    v = (d / 2.0 + sa * pos.w + (a / d) * pos.z**2 / 2.0) / lam
    entries = kernels.phase_factored_matrix(u, v, pos.y, pos.z, m)
    return ComplexMatrix(entries, MatrixKind.PHASE_FACTORED), PhaseFactors(u=u, v=v)


def build_vandermonde_variant(z: np.ndarray, m: float, n: int | None = None) -> ComplexMatrix:
    """Vandermonde-type variant: rows use the deterministic grid y_j = j/n.

    Entries are exp(-2*pi*i*m*(j/n)*z_k) for j = 0..n-1 (index origin 0).
    """
    z = np.ascontiguousarray(z, dtype=np.float64)
    if n is None:
        n = z.size
    elif n != z.size:
        raise InvalidParameterError(f"n={n} does not match len(z)={z.size}")
    if not (math.isfinite(m) and m > 0.0):
        raise InvalidParameterError(f"m must be finite and > 0, got {m!r}")
    grid = np.arange(n, dtype=np.float64) / n
    return ComplexMatrix(kernels.g_matrix(grid, z, m), MatrixKind.VANDERMONDE)


def build_random_dft_variant(n: int, m_count: int, seed: Seed) -> ComplexMatrix:
    """Random column subset of the n-point DFT pattern.

    Draws column indices l_1..l_{m_count} uniformly without replacement from
    {1..n}; entries are exp(-2*pi*i*j*l_k/n) for j = 0..n-1, giving an
    n x m_count matrix.
    """
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    if not 1 <= m_count <= n:
        raise InvalidParameterError(f"m_count must be in [1, {n}], got {m_count}")
    rng = rng_from(seed)
    cols = rng.choice(n, size=m_count, replace=False) + 1
    rows = np.arange(n, dtype=np.float64)
    entries = kernels.g_matrix(rows, cols.astype(np.float64) / n, 1.0)
    return ComplexMatrix(entries, MatrixKind.RANDOM_DFT)
