"""Scenario parameters, derived quantities, and seeded node sampling.

The geometry is two square clusters of area ``area`` facing each other at
distance ``distance``, one holding ``n`` transmitters and the other ``n``
receivers, every node placed uniformly at random.  Coordinates are stored
normalized to [0, 1] within each cluster; physical lengths are SI meters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .errors import InvalidParameterError

# A seed is either a plain integer or a composite (seed, index, ...) key used
# to derive independent sub-streams for replicated experiments.
Seed = int | tuple[int, ...]


@dataclass(frozen=True)
class ClusterParams:
    """Physical scenario: node count, cluster area, separation, wavelength."""

    n: int
    area: float
    distance: float
    wavelength: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise InvalidParameterError(f"n must be an integer >= 1, got {self.n!r}")
        for name in ("area", "distance", "wavelength"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float, np.floating)) and math.isfinite(value) and value > 0):
                raise InvalidParameterError(f"{name} must be a finite positive number, got {value!r}")

    @property
    def in_regime(self) -> bool:
        """True when sqrt(area) <= distance <= area/wavelength.

        This is the separation regime the asymptotic statements assume.
        Out-of-regime parameters are allowed everywhere (exploration is
        useful); experiments tag their results with this flag and warn.
        """
        return math.sqrt(self.area) <= self.distance <= self.area / self.wavelength


@dataclass(frozen=True)
class DerivedParams:
    """Quantities derived from a scenario, stored once and never recomputed.

    m is the spatial bandwidth area/(wavelength*distance); it sets the scale
    at which Gram eigenvalues drop off.  power is the per-node transmit power
    (distance+sqrt(area))^2/n that makes the received SNR order one.
    """

    m: float
    power: float


def derive(params: ClusterParams) -> DerivedParams:
    """Derive (m, power) from the scenario parameters."""
    m = params.area / (params.wavelength * params.distance)
    power = (params.distance + math.sqrt(params.area)) ** 2 / params.n
    return DerivedParams(m=m, power=power)


@dataclass(frozen=True)
class NodePositions:
    """Normalized node coordinates, immutable once sampled.

    x, y are the receiver coordinates and w, z the transmitter coordinates,
    all in [0, 1].  The seed that produced them is recorded so any result
    derived from these positions can be reproduced bit for bit.
    """

    x: np.ndarray
    y: np.ndarray
    w: np.ndarray
    z: np.ndarray
    seed: Seed

    def __post_init__(self):
        arrays = {}
        for name in ("x", "y", "w", "z"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if arr.ndim != 1:
                raise InvalidParameterError(f"{name} must be one-dimensional")
            if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
                raise InvalidParameterError(f"{name} coordinates must lie in [0, 1]")
            arr.setflags(write=False)
            arrays[name] = arr
        lengths = {a.size for a in arrays.values()}
        if len(lengths) != 1:
            raise InvalidParameterError("coordinate arrays must share one length")
        for name, arr in arrays.items():
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.x.size


def rng_from(seed: Seed) -> np.random.Generator:
    """PCG64 generator keyed by a seed or composite seed tuple.

    SeedSequence hashes the entropy, so (seed, i) and (seed, j) give
    independent streams; the same key always reproduces the same stream,
    on every platform.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def sample_network(params: ClusterParams, seed: Seed) -> NodePositions:
    """Sample i.i.d. uniform [0, 1] coordinates for both clusters.

    Draw order is fixed (x, y, w, z) so the result is a pure function of
    (params.n, seed).
    """
    rng = rng_from(seed)
    x = rng.random(params.n)
    y = rng.random(params.n)
    w = rng.random(params.n)
    z = rng.random(params.n)
    return NodePositions(x=x, y=y, w=w, z=z, seed=seed)


def pairwise_distance(pos: NodePositions, params: ClusterParams, j: int, k: int) -> float:
    """Distance between receiver j and transmitter k.

    r_jk = sqrt((d + sqrt(A)(x_j + w_k))^2 + A (y_j - z_k)^2) >= d.
    """
    n = pos.n
    if not (0 <= j < n and 0 <= k < n):
        raise IndexError(f"node indices ({j}, {k}) out of range for n={n}")
    sa = math.sqrt(params.area)
    horiz = params.distance + sa * (pos.x[j] + pos.w[k])
    vert = pos.y[j] - pos.z[k]
    return float(np.sqrt(horiz * horiz + params.area * (vert * vert)))


def distance_matrix(pos: NodePositions, params: ClusterParams) -> np.ndarray:
    """All pairwise receiver-transmitter distances as an (n, n) array."""
    return kernels.distance_matrix(pos.x, pos.w, pos.y, pos.z, params.distance, params.area)
