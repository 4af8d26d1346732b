"""Random displacement kernel over one short time step and the hbar/2 product.

Over a step dt, a particle of mass m picks up a random displacement w with
Gaussian law

    p(w) = exp(-(m/(hbar*dt)) * w**2) / Z,   Z = sqrt(pi*hbar*dt/m),

i.e. mean zero and variance <w**2> = hbar*dt/(2m). Identifying the velocity
with w/dt gives the momentum spread Dp = m*std(w)/dt, whose product with
Dx = std(w) is exactly hbar/2 at the analytic moments.

Sampling is done with numpy's Philox counter-based bit generator and the
Generator.standard_normal ziggurat method. Streams are keyed by
(seed, stream) so independent blocks can be drawn concurrently and
reproducibly in any order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class KernelSpec:
    """Mass, hbar, and step size fixing one displacement kernel."""

    mass: float
    hbar: float
    dt: float

    def __post_init__(self):
        if not (self.mass > 0 and self.hbar > 0 and self.dt > 0):
            raise ValueError("mass, hbar, dt must all be positive")

    @property
    def variance(self) -> float:
        """<w**2> = hbar*dt/(2m)."""
        return self.hbar * self.dt / (2.0 * self.mass)

    @property
    def sigma(self) -> float:
        return float(np.sqrt(self.variance))


def kernel_pdf(spec: KernelSpec, w) -> np.ndarray:
    """Normalized transition density in the displacement w."""
    z = np.sqrt(np.pi * spec.hbar * spec.dt / spec.mass)
    return np.exp(-(spec.mass / (spec.hbar * spec.dt)) * np.asarray(w, dtype=np.float64) ** 2) / z


def stream_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for block `stream` of the root seed."""
    key = np.array([np.uint64(seed), np.uint64(stream)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample(spec: KernelSpec, count: int, seed: int, stream: int = 0) -> np.ndarray:
    """i.i.d. draws from the kernel; deterministic under (seed, stream)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = stream_rng(seed, stream)
    return spec.sigma * rng.standard_normal(count)


def analytic_uncertainty_product(spec: KernelSpec) -> float:
    """Dx*Dp at the exact kernel moments: sqrt(var) * m*sqrt(var)/dt = hbar/2."""
    dx = spec.sigma
    dp = spec.mass * spec.sigma / spec.dt
    return dx * dp


def uncertainty_product(spec: KernelSpec, samples: np.ndarray) -> float:
    """Dx*Dp from sampled displacements, with Dp = m*std(w)/dt."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.size < 1000:
        raise ValueError("need at least 1000 samples")
    std = float(np.std(samples))
    return std * (spec.mass * std / spec.dt)
