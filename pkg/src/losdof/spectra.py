"""Gram spectra, log-det capacities, and effective degrees of freedom."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ComplexMatrix
from .errors import EigensolverError, InconsistentSpectrumError, InvalidParameterError

# Eigenvalues of a Gram matrix below -PSD_REL_TOL * lambda_max signal a broken
# computation; negatives inside that band are solver noise and get clamped.
PSD_REL_TOL = 1e-8
TRACE_REL_TOL = 1e-8


@dataclass(frozen=True)
class Spectrum:
    """Descending real eigenvalues of a Gram matrix M @ M*.

    max_residual is the largest ||A v - lambda v|| over the computed pairs,
    a cheap a-posteriori quality check on the decomposition.  source_kind
    names the matrix construction the spectrum came from.
    """

    eigenvalues: np.ndarray
    max_residual: float
    source_kind: str

    def __post_init__(self):
        eig = np.ascontiguousarray(self.eigenvalues, dtype=np.float64)
        if eig.ndim != 1 or eig.size == 0:
            raise InvalidParameterError("eigenvalues must be a non-empty 1-d array")
        if np.any(np.diff(eig) > 0):
            raise InvalidParameterError("eigenvalues must be sorted descending")
        eig.setflags(write=False)
        object.__setattr__(self, "eigenvalues", eig)

    @property
    def size(self) -> int:
        return self.eigenvalues.size


def _psd_floor(eigenvalues: np.ndarray) -> float:
    lam_max = float(eigenvalues[0]) if eigenvalues.size else 0.0
    return PSD_REL_TOL * max(lam_max, 0.0)


def gram_spectrum(mat: ComplexMatrix) -> Spectrum:
    """Eigenvalues of the Hermitian Gram matrix M @ M*, descending.

    Raises EigensolverError when the decomposition fails to converge and
    InconsistentSpectrumError when the result violates positive
    semidefiniteness or trace preservation beyond tolerance.
    """
    m = mat.entries
    gram = m @ m.conj().T
    gram = (gram + gram.conj().T) / 2.0
    try:
        eigvals, vecs = np.linalg.eigh(gram)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"eigendecomposition failed for kind={mat.kind.value}: {exc}") from exc
    residual = float(np.linalg.norm(gram @ vecs - vecs * eigvals, axis=0).max())
    eigvals = eigvals[::-1].copy()

    if eigvals[-1] < -_psd_floor(eigvals):
        raise InconsistentSpectrumError(
            f"Gram spectrum has eigenvalue {eigvals[-1]:.3e} below the PSD tolerance"
        )
    trace = float(np.trace(gram).real)
    total = float(eigvals.sum())
    if abs(total - trace) > TRACE_REL_TOL * max(abs(trace), 1e-300):
        raise InconsistentSpectrumError(
            f"eigenvalue sum {total!r} deviates from trace {trace!r} beyond tolerance"
        )
    return Spectrum(eigenvalues=eigvals, max_residual=residual, source_kind=mat.kind.value)


def scaled_spectrum(spec: Spectrum, factor: float, source_kind: str | None = None) -> Spectrum:
    """Spectrum of c*M given the spectrum of M's Gram matrix (c = factor >= 0).

    Eigenvalues and residual scale linearly; this avoids re-decomposing a
    matrix that only changed by a scalar.
    """
    if not factor >= 0.0:
        raise InvalidParameterError(f"factor must be >= 0, got {factor!r}")
    return Spectrum(
        eigenvalues=spec.eigenvalues * factor,
        max_residual=spec.max_residual * factor,
        source_kind=source_kind if source_kind is not None else spec.source_kind,
    )


def log_det_capacity(spec: Spectrum) -> float:
    """Sum of log(1 + lambda_k) in nats.

    Negative eigenvalues within the PSD tolerance band are clamped to zero;
    anything lower raises InconsistentSpectrumError.
    """
    eig = spec.eigenvalues
    floor = _psd_floor(eig)
    if eig[-1] < -floor:
        raise InconsistentSpectrumError(
            f"eigenvalue {eig[-1]:.3e} below -{floor:.3e}; spectrum is not a Gram spectrum"
        )
    return float(np.log1p(np.clip(eig, 0.0, None)).sum())


def effective_dof(spec: Spectrum, threshold: float = 1.0) -> int:
    """Number of eigenvalues at or above the significance threshold."""
    if not threshold > 0.0:
        raise InvalidParameterError(f"threshold must be > 0, got {threshold!r}")
    return int(np.count_nonzero(spec.eigenvalues >= threshold))


@dataclass(frozen=True)
class ComparisonReport:
    """Side-by-side view of two Gram spectra of equal dimension."""

    eigenvalues_a: np.ndarray
    eigenvalues_b: np.ndarray
    capacity_a: float
    capacity_b: float
    capacity_ratio: float
    dof_a: int
    dof_b: int
    threshold: float
    max_eig_deviation: float  # max |a_i - b_i| relative to the larger lambda_max


def compare_spectra(a: Spectrum, b: Spectrum, threshold: float = 1.0) -> ComparisonReport:
    """Compare two spectra: capacities, their ratio, and dof counts."""
    if a.size != b.size:
        raise InvalidParameterError(f"spectrum dimensions differ: {a.size} vs {b.size}")
    cap_a = log_det_capacity(a)
    cap_b = log_det_capacity(b)
    if cap_b != 0.0:
        ratio = cap_a / cap_b
    else:
        ratio = 1.0 if cap_a == 0.0 else float("inf")
    scale = max(a.eigenvalues[0], b.eigenvalues[0], 1e-300)
    deviation = float(np.abs(a.eigenvalues - b.eigenvalues).max() / scale)
    return ComparisonReport(
        eigenvalues_a=a.eigenvalues,
        eigenvalues_b=b.eigenvalues,
        capacity_a=cap_a,
        capacity_b=cap_b,
        capacity_ratio=ratio,
        dof_a=effective_dof(a, threshold),
        dof_b=effective_dof(b, threshold),
        threshold=threshold,
        max_eig_deviation=deviation,
    )
