"""Sinc-kernel operator numerics.

The integral operator on [0, 1] with kernel sin(pi*m*(x-y))/(pi*(x-y)) is
compact with eigenvalues in [0, 1]: roughly m of them sit near 1, then the
rest fall off exponentially.  This module discretizes it by Gauss-Legendre
quadrature (Nystrom), extracts eigenvalues, iterated traces A_p = sum mu_i^p,
and the determinant-expansion coefficients d_k, fits the exponential tail,
and evaluates the resulting upper bound on log det(I + GG*).

Convention note: the bandwidth enters the sine as pi*m, which makes the
trace of the operator exactly m and matches the expected-subdeterminant
identity E[det(G_kxk G_kxk*)] = (k!)^2 m^-k d_k checked in the montecarlo
module.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .backend import kernels
from .errors import DecayViolationError, DiscretizationTooCoarseError, InvalidParameterError

# Allowed escape of discretized eigenvalues outside the operator range [0, 1].
EIG_RANGE_TOL = 1e-6

# Tail window for the decay fit: eigenvalues in (FIT_FLOOR, FIT_CEILING) are
# past the plunge but still well above eigensolver noise (~1e-13 for the
# matrix sizes used here).
FIT_FLOOR = 1e-10
FIT_CEILING = 1e-2
FIT_MIN_POINTS = 5


@dataclass(frozen=True)
class SincKernel:
    """Bandwidth-m sinc kernel on [0, 1]^2; diagonal value is m."""

    m: float

    def __post_init__(self):
        if not (math.isfinite(self.m) and self.m > 0.0):
            raise InvalidParameterError(f"kernel bandwidth must be finite and > 0, got {self.m!r}")


def kernel_value(kernel: SincKernel, x: float, y: float) -> float:
    """K(x, y) = sin(pi*m*(x-y))/(pi*(x-y)), continued by m on the diagonal."""
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        raise InvalidParameterError("kernel arguments must lie in [0, 1]")
    return float(kernel.m * np.sinc(kernel.m * (x - y)))


@dataclass(frozen=True)
class NystromDiscretization:
    """Gauss-Legendre discretization of a sinc kernel on [0, 1].

    The matrix is the symmetrized form sqrt(w_i) K(x_i, x_j) sqrt(w_j), whose
    eigenvalues approximate the operator eigenvalues.
    """

    m: float
    nodes: np.ndarray
    weights: np.ndarray
    matrix: np.ndarray

    def __post_init__(self):
        for name in ("nodes", "weights", "matrix"):
            arr = getattr(self, name)
            arr.setflags(write=False)

    @property
    def size(self) -> int:
        return self.nodes.size


def default_quadrature_n(m: float) -> int:
    """Default node count: 40 per unit bandwidth, at least 400, capped at 2000.

    The kernel oscillates at scale 1/m, so the rule keeps tens of nodes per
    oscillation for every bandwidth in routine use.
    """
    return max(400, min(2000, 40 * math.ceil(m)))


def discretize(kernel: SincKernel, n_quad: int | None = None) -> NystromDiscretization:
    """Build the symmetrized Nystrom matrix on Gauss-Legendre nodes in [0, 1]."""
    if n_quad is None:
        n_quad = default_quadrature_n(kernel.m)
    if n_quad < 2:
        raise InvalidParameterError(f"quadrature size must be >= 2, got {n_quad}")
    raw_nodes, raw_weights = np.polynomial.legendre.leggauss(n_quad)
    nodes = np.ascontiguousarray((raw_nodes + 1.0) / 2.0)
    weights = np.ascontiguousarray(raw_weights / 2.0)
    matrix = kernels.sinc_matrix(nodes, np.sqrt(weights), kernel.m)
    return NystromDiscretization(m=kernel.m, nodes=nodes, weights=weights, matrix=matrix)


def operator_eigenvalues(disc: NystromDiscretization) -> np.ndarray:
    """Descending eigenvalue estimates of the discretized operator.

    Raises DiscretizationTooCoarseError when any estimate escapes
    [-EIG_RANGE_TOL, 1 + EIG_RANGE_TOL]; the operator spectrum lies in [0, 1],
    so an escape means the quadrature cannot be trusted.
    """
    mu = np.linalg.eigvalsh(disc.matrix)[::-1].copy()
    if mu[0] > 1.0 + EIG_RANGE_TOL or mu[-1] < -EIG_RANGE_TOL:
        raise DiscretizationTooCoarseError(
            f"eigenvalues in [{mu[-1]:.3e}, {mu[0]:.6f}] escape [0, 1] beyond "
            f"tolerance {EIG_RANGE_TOL}; increase the quadrature size"
        )
    mu.setflags(write=False)
    return mu


def iterated_traces(mu: np.ndarray, p_max: int) -> np.ndarray:
    """Traces of operator powers, A_p = sum_i mu_i^p for p = 1..p_max."""
    if p_max < 1:
        raise InvalidParameterError(f"p_max must be >= 1, got {p_max}")
    mu = np.asarray(mu, dtype=np.float64)
    powers = np.arange(1, p_max + 1)
    return (mu[None, :] ** powers[:, None]).sum(axis=1)


def fredholm_coefficients(traces: np.ndarray, k_max: int) -> np.ndarray:
    """Determinant-expansion coefficients d_0..d_k_max from iterated traces.

    Uses the recurrence k d_k = sum_{p=1}^{k} (-1)^(p-1) A_p d_{k-p} with
    d_0 = 1 (O(k^2), numerically stable for eigenvalues in [0, 1]).  By the
    Newton identities the result equals the elementary symmetric functions of
    the eigenvalues behind the traces.
    """
    if k_max < 0:
        raise InvalidParameterError(f"k_max must be >= 0, got {k_max}")
    traces = np.asarray(traces, dtype=np.float64)
    if traces.size < k_max:
        raise InvalidParameterError(f"need traces up to p={k_max}, got {traces.size}")
    d = np.zeros(k_max + 1)
    d[0] = 1.0
    for k in range(1, k_max + 1):
        signs = (-1.0) ** np.arange(k)  # p = 1..k gives (-1)^(p-1)
        d[k] = float(signs @ (traces[:k] * d[k - 1 :: -1])) / k
    return d


def elementary_symmetric(mu: np.ndarray, k: int) -> float:
    """Elementary symmetric polynomial e_k(mu) by the one-pass recurrence.

    Returns 0 for k > len(mu) (empty sum) and 1 for k = 0.  This is the
    direct cross-check for fredholm_coefficients.
    """
    if k < 0:
        raise InvalidParameterError(f"k must be >= 0, got {k}")
    return float(elementary_symmetric_all(mu, k)[k])


def elementary_symmetric_all(mu: np.ndarray, k_max: int) -> np.ndarray:
    """All of e_0(mu)..e_k_max(mu) in one sweep."""
    mu = np.asarray(mu, dtype=np.float64)
    e = np.zeros(k_max + 1)
    e[0] = 1.0
    top = 0
    for value in mu:
        top = min(top + 1, k_max)
        for j in range(top, 0, -1):
            e[j] += value * e[j - 1]
    return e


class DecayFit(NamedTuple):
    """Exponential tail bound mu_k <= exp(-delta*(k - c*m)) (k is 1-based)."""

    c: float
    delta: float


def decay_fit(
    mu: np.ndarray,
    m: float,
    floor: float = FIT_FLOOR,
    ceiling: float = FIT_CEILING,
    min_points: int = FIT_MIN_POINTS,
) -> DecayFit:
    """Fit the exponential decay of the eigenvalue tail.

    The slope -delta comes from least squares of log mu_k against k over the
    tail window (eigenvalues in (floor, ceiling) past rank m); the offset is
    then raised so exp(-delta*(k - c*m)) majorizes every fitted point, which
    is what makes the returned pair usable as a certified bound on the
    window.  Raises DecayViolationError when the window is too thin or the
    fitted slope is not negative.
    """
    mu = np.asarray(mu, dtype=np.float64)
    if mu.size <= 2 * m:
        raise InvalidParameterError(f"need more than 2*m={2 * m:.0f} eigenvalues, got {mu.size}")
    rank = np.arange(1, mu.size + 1, dtype=np.float64)
    window = (mu > floor) & (mu < ceiling) & (rank > m)
    if window.sum() < min_points:
        raise DecayViolationError(
            f"only {int(window.sum())} tail eigenvalues in ({floor:.0e}, {ceiling:.0e}); "
            "cannot fit a decay rate"
        )
    k_sel = rank[window]
    log_mu = np.log(mu[window])
    slope, intercept = np.polyfit(k_sel, log_mu, 1)
    delta = -float(slope)
    if not delta > 0.0:
        raise DecayViolationError(f"fitted decay rate {delta!r} is not positive")
    # Shift the line up to the tightest majorant with the fitted slope.
    offset = float(np.max(log_mu + delta * k_sel))
    return DecayFit(c=offset / (delta * m), delta=delta)


def dk_tail_bound(k: int, m: float, c: float, delta: float, prefactor: float) -> float:
    """Piecewise bound on d_k: 1 up to rank c*m, Gaussian-type decay beyond.

    Returns 1 for k <= c*m and prefactor^k * exp(-delta*(k - c*m)^2/2)
    otherwise.
    """
    if min(c, delta, prefactor) <= 0.0:
        raise InvalidParameterError("c, delta, prefactor must all be > 0")
    if k <= c * m:
        return 1.0
    excess = k - c * m
    return float(prefactor**k * math.exp(-delta * excess * excess / 2.0))


def logdet_upper_bound(n: int, m: float, c: float) -> float:
    """Leading term (c*m + 1) * log(n) of the capacity upper bound.

    The additive O(1) remainder is omitted; callers compare trends, not
    absolute offsets.
    """
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    return (c * m + 1.0) * math.log(n)


@dataclass(frozen=True)
class FredholmTable:
    """Everything the operator route produces for one bandwidth m.

    decay_c/decay_delta are None when the tail window was too thin to fit
    (tiny bandwidths); every other field is always populated.
    """

    m: float
    quadrature_n: int
    mu: np.ndarray
    traces: np.ndarray
    dk: np.ndarray
    decay_c: float | None
    decay_delta: float | None


def build_table(
    m: float,
    n_quad: int | None = None,
    k_max: int | None = None,
    fit_decay: bool = True,
) -> FredholmTable:
    """Discretize, decompose, and tabulate traces, d_k, and the decay fit."""
    kernel = SincKernel(m=m)
    disc = discretize(kernel, n_quad)
    mu = operator_eigenvalues(disc)
    if k_max is None:
        k_max = min(mu.size, max(20, 4 * math.ceil(m)))
    if k_max > mu.size:
        raise InvalidParameterError(f"k_max={k_max} exceeds the {mu.size} available eigenvalues")
    traces = iterated_traces(mu, max(k_max, 1))
    dk = fredholm_coefficients(traces, k_max)
    decay_c = decay_delta = None
    if fit_decay:
        try:
            fit = decay_fit(mu, m)
            decay_c, decay_delta = fit.c, fit.delta
        except (DecayViolationError, InvalidParameterError) as exc:
            warnings.warn(f"decay fit unavailable for m={m}: {exc}", stacklevel=2)
    return FredholmTable(
        m=m,
        quadrature_n=disc.size,
        mu=mu,
        traces=traces,
        dk=dk,
        decay_c=decay_c,
        decay_delta=decay_delta,
    )
