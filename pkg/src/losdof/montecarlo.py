"""Randomized experiments tying the matrix and operator routes together.

Each experiment is deterministic given (arguments, seed): replica r of an
experiment seeded s draws from the stream keyed by (s, r), so adding
replicas never reshuffles earlier ones.  Estimates always carry a standard
error; agreement checks are phrased in standard-error units.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .channel import build_g_matrix, build_los_matrix, build_phase_factored, g_from_coords, normalize_los
from .errors import InvalidParameterError
from .fredholm import FredholmTable, build_table
from .model import ClusterParams, Seed, derive, rng_from, sample_network
from .spectra import Spectrum, effective_dof, gram_spectrum, log_det_capacity, scaled_spectrum

# Trials are generated and reduced in fixed-size blocks so results do not
# depend on how the work is batched.
_CHUNK = 4096

# Agreement finer than this relative level is treated as exact when a Monte
# Carlo standard error underflows it; the analytic side carries quadrature
# and eigensolver noise of roughly this size.
_ANALYTIC_REL_TOL = 1e-12


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo mean with its standard error."""

    mean: float
    std_error: float
    trials: int
    seed: Seed


def expected_subdeterminant_mc(order: int, m: float, trials: int, seed: Seed) -> McEstimate:
    """Estimate E[det(G_kxk @ G_kxk*)] for k = order.

    Each trial draws fresh y_1..y_k, z_1..z_k uniform on [0, 1] from the
    stream keyed by (seed, trial), forms the k x k separable-phase matrix,
    and evaluates |det|^2 by dense pivoted elimination.  Single-trial
    estimates report zero standard error.
    """
    if order < 1:
        raise InvalidParameterError(f"order must be >= 1, got {order}")
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")
    if not (math.isfinite(m) and m >= 0.0):
        raise InvalidParameterError(f"m must be finite and >= 0, got {m!r}")
    values = np.empty(trials)
    draws = np.empty((_CHUNK, 2 * order))
    for start in range(0, trials, _CHUNK):
        stop = min(start + _CHUNK, trials)
        block = draws[: stop - start]
        for i, trial in enumerate(range(start, stop)):
            block[i] = rng_from((_as_entropy(seed)) + (trial,)).random(2 * order)
        y = np.ascontiguousarray(block[:, :order])
        z = np.ascontiguousarray(block[:, order:])
        mats = kernels.g_phase_batch(y, z, m)
        values[start:stop] = kernels.absdet2_batch(mats)
    mean = float(values.mean())
    std_error = float(values.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return McEstimate(mean=mean, std_error=std_error, trials=trials, seed=seed)


def _as_entropy(seed: Seed) -> tuple[int, ...]:
    return seed if isinstance(seed, tuple) else (seed,)


@dataclass(frozen=True)
class IdentityCheck:
    """Monte Carlo vs analytic value of the expected subdeterminant.

    The analytic side is (k!)^2 m^-k d_k from the operator route.  violated
    means |z| exceeded the flag level, which signals a bug rather than bad
    luck at any reasonable trial count.
    """

    order: int
    m: float
    estimate: McEstimate
    analytic: float
    z_score: float
    violated: bool


def fredholm_identity_check(
    order: int,
    m: float,
    trials: int,
    seed: Seed,
    table: FredholmTable | None = None,
    z_flag: float = 5.0,
) -> IdentityCheck:
    """Check E[det(G_kxk G_kxk*)] = (k!)^2 m^-k d_k at k = order."""
    if not m > 0.0:
        raise InvalidParameterError(f"the identity requires m > 0, got {m!r}")
    if table is None:
        table = build_table(m, k_max=max(order, 1), fit_decay=False)
    elif table.m != m:
        raise InvalidParameterError(f"table was built for m={table.m}, expected {m}")
    if order >= table.dk.size:
        raise InvalidParameterError(f"table holds d_k up to k={table.dk.size - 1}, need {order}")
    analytic = math.factorial(order) ** 2 * m ** (-order) * float(table.dk[order])
    estimate = expected_subdeterminant_mc(order, m, trials, seed)
    scale = max(estimate.std_error, _ANALYTIC_REL_TOL * max(1.0, abs(analytic)))
    z = (estimate.mean - analytic) / scale
    return IdentityCheck(
        order=order,
        m=m,
        estimate=estimate,
        analytic=analytic,
        z_score=float(z),
        violated=abs(z) > z_flag,
    )


@dataclass(frozen=True)
class ClaimTrial:
    """One replica of the H-vs-G comparison on shared positions."""

    logdet_h: float
    logdet_g: float
    ratio: float
    dof_h: int
    dof_g: int


@dataclass(frozen=True)
class ClaimReport:
    """Replicated comparison of log det(I + nP HH*) with log det(I + GG*)."""

    params: ClusterParams
    m: float
    power: float
    trials: int
    seed: Seed
    threshold: float
    matrix: str
    in_regime: bool
    records: list[ClaimTrial]
    spectrum_h: Spectrum  # from the first replica, for eigenvalue overlays
    spectrum_g: Spectrum
    ratio_mean: float


def claim_sim_experiment(
    params: ClusterParams,
    trials: int,
    seed: Seed,
    threshold: float = 1.0,
    matrix: str = "los",
) -> ClaimReport:
    """Compare the normalized line-of-sight spectrum against its separable
    approximation on shared node positions.

    matrix="los" uses sqrt(nP) H; matrix="phase_factored" substitutes the
    quadratic-Taylor matrix, whose Gram spectrum matches G's exactly, which
    turns the comparison into a solver-tolerance identity.
    """
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")
    if matrix not in ("los", "phase_factored"):
        raise InvalidParameterError(f"matrix must be 'los' or 'phase_factored', got {matrix!r}")
    if not params.in_regime:
        warnings.warn(
            f"parameters are outside the regime sqrt(A) <= d <= A/wavelength: {params}",
            stacklevel=2,
        )
    derived = derive(params)
    records: list[ClaimTrial] = []
    spectrum_h = spectrum_g = None
    for trial in range(trials):
        pos = sample_network(params, _as_entropy(seed) + (trial,))
        if matrix == "los":
            h_mat = normalize_los(build_los_matrix(pos, params), derived, params.n)
        else:
            h_mat, _ = build_phase_factored(pos, params)
        spec_h = gram_spectrum(h_mat)
        spec_g = gram_spectrum(build_g_matrix(pos, derived.m))
        cap_h = log_det_capacity(spec_h)
        cap_g = log_det_capacity(spec_g)
        ratio = cap_h / cap_g if cap_g != 0.0 else (1.0 if cap_h == 0.0 else float("inf"))
        records.append(
            ClaimTrial(
                logdet_h=cap_h,
                logdet_g=cap_g,
                ratio=ratio,
                dof_h=effective_dof(spec_h, threshold),
                dof_g=effective_dof(spec_g, threshold),
            )
        )
        if trial == 0:
            spectrum_h, spectrum_g = spec_h, spec_g
    return ClaimReport(
        params=params,
        m=derived.m,
        power=derived.power,
        trials=trials,
        seed=seed,
        threshold=threshold,
        matrix=matrix,
        in_regime=params.in_regime,
        records=records,
        spectrum_h=spectrum_h,
        spectrum_g=spectrum_g,
        ratio_mean=float(np.mean([r.ratio for r in records])),
    )


@dataclass(frozen=True)
class ConcentrationPoint:
    """Spread of log det(I + GG*) at one matrix size."""

    n: int
    m: float
    logdets: np.ndarray
    mean: float
    std: float


@dataclass(frozen=True)
class ConcentrationReport:
    """Empirical growth of std(log det(I + GG*)) across matrix sizes.

    exponent is the least-squares slope of log std against log n, or NaN
    when any point has zero spread (degenerate setups).
    """

    points: list[ConcentrationPoint]
    exponent: float
    trials: int
    seed: Seed
    m_exponent: float | None


def concentration_experiment(
    n_values: list[int],
    trials: int,
    seed: Seed,
    m_exponent: float | None = 0.6,
    m_fixed: float | None = None,
    vary_positions: bool = True,
) -> ConcentrationReport:
    """Measure how the spread of log det(I + GG*) grows with n.

    The bandwidth at size n is n**m_exponent unless m_fixed pins it.  With
    vary_positions=False every replica reuses the first replica's positions,
    which must produce zero spread (the log-det is a deterministic function
    of positions).
    """
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")
    if not n_values:
        raise InvalidParameterError("n_values must be non-empty")
    if m_fixed is None and m_exponent is None:
        raise InvalidParameterError("either m_exponent or m_fixed must be given")
    points = []
    for index, n in enumerate(n_values):
        m = float(m_fixed) if m_fixed is not None else float(n) ** m_exponent
        logdets = np.empty(trials)
        for trial in range(trials):
            key = _as_entropy(seed) + (index, trial if vary_positions else 0)
            rng = rng_from(key)
            y = rng.random(n)
            z = rng.random(n)
            spec = gram_spectrum(g_from_coords(y, z, m))
            logdets[trial] = log_det_capacity(spec)
        points.append(
            ConcentrationPoint(
                n=n, m=m, logdets=logdets, mean=float(logdets.mean()), std=float(logdets.std(ddof=1)) if trials > 1 else 0.0
            )
        )
    stds = np.array([p.std for p in points])
    if len(points) >= 2 and np.all(stds > 0.0):
        exponent = float(np.polyfit(np.log([p.n for p in points]), np.log(stds), 1)[0])
    else:
        exponent = float("nan")
    return ConcentrationReport(
        points=points,
        exponent=exponent,
        trials=trials,
        seed=seed,
        m_exponent=None if m_fixed is not None else m_exponent,
    )


def grid_from_m_law(
    n_values: list[int],
    m_exponent: float,
    wavelength: float = 0.1,
    d_factor: float = 4.0,
) -> list[ClusterParams]:
    """Scenario grid with bandwidth law m = n**m_exponent.

    Geometry is chosen so every point sits inside the separation regime:
    d = d_factor * m * wavelength and A = m * wavelength * d, which gives
    sqrt(A) = sqrt(d_factor) m wavelength <= d and d <= A/wavelength for
    d_factor >= 1.
    """
    if d_factor < 1.0:
        raise InvalidParameterError(f"d_factor must be >= 1 to stay in regime, got {d_factor}")
    grid = []
    for n in n_values:
        m = float(n) ** m_exponent
        distance = d_factor * m * wavelength
        area = m * wavelength * distance
        grid.append(ClusterParams(n=int(n), area=area, distance=distance, wavelength=wavelength))
    return grid


@dataclass(frozen=True)
class SweepRecord:
    """One (grid point, replica) row of a bound sweep."""

    point: int
    trial: int
    n: int
    area: float
    distance: float
    wavelength: float
    m: float
    power: float
    in_regime: bool
    logdet_p_h: float  # log det(I + P HH*)
    logdet_np_h: float  # log det(I + nP HH*)
    logdet_g: float  # log det(I + GG*)
    dof_h: int  # significant eigenvalues of nP HH*
    dof_g: int
    envelope_lower: float  # min(n, m/log m); NaN when m <= 1
    envelope_upper: float  # min(n, m) log n; NaN when n < 2
    k1_implied: float  # logdet_p_h / envelope_lower
    k2_implied: float  # logdet_g / envelope_upper


@dataclass(frozen=True)
class SweepResult:
    """All rows of a bound sweep plus the settings that produced them."""

    records: list[SweepRecord]
    threshold: float
    trials: int
    seed: Seed


def bound_sweep(grid: list[ClusterParams], threshold: float, trials: int, seed: Seed) -> SweepResult:
    """Evaluate capacities, dof counts, and envelope constants over a grid.

    Per point and replica this computes the Gram spectrum of H once and
    rescales it for the P and nP capacities (eigenvalues scale exactly),
    plus the spectrum of G.
    """
    if not grid:
        raise InvalidParameterError("grid must be non-empty")
    if trials < 1:
        raise InvalidParameterError(f"trials must be >= 1, got {trials}")
    records = []
    for index, params in enumerate(grid):
        derived = derive(params)
        n, m = params.n, derived.m
        envelope_lower = min(n, m / math.log(m)) if m > 1.0 else float("nan")
        envelope_upper = min(n, m) * math.log(n) if n >= 2 else float("nan")
        for trial in range(trials):
            pos = sample_network(params, _as_entropy(seed) + (index, trial))
            spec_h = gram_spectrum(build_los_matrix(pos, params))
            spec_p = scaled_spectrum(spec_h, derived.power)
            spec_np = scaled_spectrum(spec_h, params.n * derived.power, source_kind="LOS_NORMALIZED")
            spec_g = gram_spectrum(build_g_matrix(pos, m))
            logdet_p_h = log_det_capacity(spec_p)
            logdet_g = log_det_capacity(spec_g)
            records.append(
                SweepRecord(
                    point=index,
                    trial=trial,
                    n=n,
                    area=params.area,
                    distance=params.distance,
                    wavelength=params.wavelength,
                    m=m,
                    power=derived.power,
                    in_regime=params.in_regime,
                    logdet_p_h=logdet_p_h,
                    logdet_np_h=log_det_capacity(spec_np),
                    logdet_g=logdet_g,
                    dof_h=effective_dof(spec_np, threshold),
                    dof_g=effective_dof(spec_g, threshold),
                    envelope_lower=envelope_lower,
                    envelope_upper=envelope_upper,
                    k1_implied=logdet_p_h / envelope_lower if envelope_lower > 0 else float("nan"),
                    k2_implied=logdet_g / envelope_upper if envelope_upper > 0 else float("nan"),
                )
            )
    return SweepResult(records=records, threshold=threshold, trials=trials, seed=seed)
