"""Information functionals of gridded densities and the Bohm quantum potential.

The central object is the cumulative relative entropy picked up by a density
trajectory when each configuration axis is randomly displaced by the
fluctuation kernel of `fluctuations` (variance hbar*dt/2m per axis, axes
independent):

    I_f = sum_j < D_KL( rho(., t_j) || rho(. + w, t_j) ) >_w

As dt -> 0 this converges to the time integral of the Fisher rate

    (hbar/4m) * integral (grad rho)**2 / rho dx        (one term per axis)

and the functional derivative of (hbar/2) * Fisher rate is the Bohm quantum
potential

    Q = - (hbar**2/2m) * laplacian(sqrt(rho)) / sqrt(rho)   (one term per axis).

`i_f_discrete` Monte-Carlo-averages the kernel displacement (counter-based
Philox streams, one per time step, so results are reproducible under any
evaluation order), `i_f_continuum` integrates the Fisher rate, and
`functional_gradient_check` verifies the Q identity with central differences
of the functional.

Densities may underflow in far tails, so integrand denominators are clamped
at a relative floor (1e-14 of the peak); every result that applied the floor
says so via its `floored` flag.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Tuple, Union

import numpy as np
import scipy.fft as _fft

from .core import DensityField, PreconditionError, SpatialGrid, second_derivative, gradient
from .fluctuations import stream_rng

FLOOR_REL = 1e-14

Masses = Union[float, Tuple[float, float]]


class MetricScalar(float):
    """A float that remembers whether the density floor was applied."""

    floored: bool

    def __new__(cls, value: float, floored: bool = False):
        obj = super().__new__(cls, value)
        obj.floored = bool(floored)
        return obj


def _axis_masses(grid: SpatialGrid, masses: Masses) -> Tuple[float, ...]:
    if grid.axes == 1:
        if np.ndim(masses) != 0:
            raise ValueError("1D density takes a single mass")
        return (float(masses),)
    try:
        ma, mb = masses  # type: ignore[misc]
    except TypeError:
        raise ValueError("2D density takes masses (m_a, m_b)") from None
    return (float(ma), float(mb))


def _check_unit_mass(rho: DensityField, what: str) -> None:
    m = rho.mass()
    if abs(m - 1.0) > 1e-6:
        raise ValueError(f"{what} expects a normalized density (mass={m!r})")


def kl_divergence(p: DensityField, q: DensityField) -> MetricScalar:
    """sum p*ln(p/q)*dx**axes, nonnegative, zero iff p equals q on the grid.

    q is clamped at the relative floor inside the logarithm; if p carries
    more than 1e-9 of its mass where q sits at or below the floor the
    densities are not absolutely continuous on the grid and a ValueError is
    raised instead.
    """
    if p.grid != q.grid:
        raise ValueError("kl_divergence needs densities on the same grid")
    _check_unit_mass(p, "kl_divergence")
    _check_unit_mass(q, "kl_divergence")
    w = p.grid.weight
    pv, qv = p.values, q.values
    qfloor = FLOOR_REL * float(qv.max())
    violating = (qv <= qfloor) & (pv > 0.0)
    if float(pv[violating].sum()) * w > 1e-9:
        raise ValueError("absolute continuity violated: p has mass where q vanishes")
    floored = bool(np.any(qv < qfloor) or np.any((pv < qfloor) & (pv > 0.0)))
    q_eff = np.maximum(qv, qfloor)
    mask = pv > 0.0
    # the same floor clamps p inside the log ratio, so p == q gives exactly 0
    p_eff = np.maximum(pv[mask], qfloor)
    val = float(np.sum(pv[mask] * (np.log(p_eff) - np.log(q_eff[mask]))) * w)
    return MetricScalar(val, floored)


def fisher_rate(rho: DensityField, masses: Masses, hbar: float, method: str = "fd") -> MetricScalar:
    """Instantaneous information rate, sum over axes of (hbar/4m)*int (grad rho)**2/rho.

    Gradients are centered differences with periodic wrap by default;
    method="spectral" uses Fourier derivatives instead.
    """
    _check_unit_mass(rho, "fisher_rate")
    ms = _axis_masses(rho.grid, masses)
    dx = rho.grid.spacing
    w = rho.grid.weight
    floor = FLOOR_REL * float(rho.values.max())
    denom = np.maximum(rho.values, floor)
    floored = bool(np.any(rho.values < floor))
    total = 0.0
    for axis, m in enumerate(ms):
        g = gradient(rho.values, dx, axis=axis, method=method)
        total += (hbar / (4.0 * m)) * float(np.sum(g * g / denom) * w)
    return MetricScalar(total, floored)


@dataclass(frozen=True)
class DensityTrajectory:
    """Normalized density frames at uniformly spaced, strictly increasing times."""

    times: np.ndarray
    frames: Sequence[DensityField]
    masses: Masses
    hbar: float

    def __post_init__(self):
        times = np.asarray(self.times, dtype=np.float64)
        object.__setattr__(self, "times", times)
        if len(times) != len(self.frames):
            raise ValueError("times and frames length mismatch")
        if len(self.frames) == 0:
            raise ValueError("empty trajectory")
        grid = self.frames[0].grid
        for f in self.frames:
            if f.grid != grid:
                raise ValueError("all frames must share one grid")
            _check_unit_mass(f, "DensityTrajectory")
        if len(times) > 1:
            steps = np.diff(times)
            if np.any(steps <= 0):
                raise ValueError("times must be strictly increasing")
            if np.max(np.abs(steps - steps[0])) > 1e-9 * abs(steps[0]):
                raise ValueError("times must be uniformly spaced")
        _axis_masses(grid, self.masses)

    @property
    def grid(self) -> SpatialGrid:
        return self.frames[0].grid

    @property
    def dt(self) -> float:
        if len(self.times) < 2:
            raise ValueError("single-frame trajectory has no step")
        return float(self.times[1] - self.times[0])


def i_f_continuum(traj: DensityTrajectory, method: str = "fd") -> float:
    """Trapezoid time integral of the Fisher rate over the trajectory."""
    if len(traj.frames) < 2:
        raise ValueError("need >= 2 frames")
    rates = [fisher_rate(f, traj.masses, traj.hbar, method=method) for f in traj.frames]
    return float(np.trapezoid(np.asarray(rates, dtype=np.float64), traj.times))


@dataclass(frozen=True)
class DiscreteMetricResult:
    """Monte Carlo estimate of the step-summed relative entropy."""

    value: float
    std_error: float
    steps: int
    samples_per_step: int
    seed: int
    floored: bool


def _shift_batch(spectrum, k_axes, shifts, real_shape):
    """Densities displaced by each row of `shifts`, via Fourier phase shifts."""
    if len(k_axes) == 1:
        phase = np.exp(1j * shifts[:, 0:1] * k_axes[0][None, :])
        out = _fft.ifft(spectrum[None, :] * phase, axis=1, workers=-1).real
    else:
        pa = np.exp(1j * shifts[:, 0:1] * k_axes[0][None, :])
        pb = np.exp(1j * shifts[:, 1:2] * k_axes[1][None, :])
        phase = pa[:, :, None] * pb[:, None, :]
        out = _fft.ifft2(spectrum[None, :, :] * phase, axes=(1, 2), workers=-1).real
    return out.reshape(shifts.shape[0], *real_shape)


def i_f_discrete(
    traj: DensityTrajectory,
    samples_per_step: int,
    seed: int,
    max_chunk_elems: int = 1 << 22,
) -> DiscreteMetricResult:
    """Step-summed < D_KL(rho(.) || rho(. + w)) >_w with per-axis kernel draws.

    The sum runs over the N-1 steps between the N frames, each step using the
    frame at its left endpoint, so the estimator converges to the continuum
    time integral over [t_0, t_{N-1}]. Displacements are drawn from one
    Philox stream per step keyed (seed, step index).
    """
    if samples_per_step < 1:
        raise ValueError("samples_per_step must be >= 1")
    if len(traj.frames) < 2:
        return DiscreteMetricResult(0.0, 0.0, 0, samples_per_step, seed, False)
    grid = traj.grid
    ms = _axis_masses(grid, traj.masses)
    dt = traj.dt
    dx = grid.spacing
    sigmas = np.array([np.sqrt(traj.hbar * dt / (2.0 * m)) for m in ms])
    if np.any(sigmas < 2.0 * dx):
        raise PreconditionError(
            "dt/grid mismatch: kernel width {} below 2*dx = {}; refine dt upward "
            "or the grid downward".format(sigmas.min(), 2.0 * dx)
        )
    w = grid.weight
    k = grid.wavenumbers()
    k_axes = [k] * grid.axes
    chunk = max(1, int(max_chunk_elems // np.prod(grid.shape)))
    total = 0.0
    var_sum = 0.0
    floored = False
    for j in range(len(traj.frames) - 1):
        rho = traj.frames[j].values
        floor = FLOOR_REL * float(rho.max())
        spectrum = _fft.fftn(rho, workers=-1)
        mask = rho > 0.0
        p_masked = rho[mask]
        plogp = float(np.sum(p_masked * np.log(p_masked)) * w)
        rng = stream_rng(seed, j)
        shifts = rng.standard_normal((samples_per_step, grid.axes)) * sigmas[None, :]
        kls = np.empty(samples_per_step)
        for lo in range(0, samples_per_step, chunk):
            batch = shifts[lo : lo + chunk]
            q = _shift_batch(spectrum, k_axes, batch, grid.shape)
            if np.any(q < floor):
                floored = True
            np.maximum(q, floor, out=q)
            qm = q.reshape(len(batch), -1)[:, mask.ravel()]
            kls[lo : lo + len(batch)] = plogp - np.log(qm) @ p_masked * w
        total += float(kls.mean())
        if samples_per_step > 1:
            var_sum += float(kls.var(ddof=1)) / samples_per_step
    return DiscreteMetricResult(
        total, float(np.sqrt(var_sum)), len(traj.frames) - 1, samples_per_step, seed, floored
    )


@dataclass(frozen=True)
class BohmPotential:
    """Quantum potential field plus the floor flag of its evaluation."""

    grid: SpatialGrid
    values: np.ndarray
    floored: bool


def bohm_potential(
    rho: DensityField, masses: Masses, hbar: float, method: str = "fd"
) -> BohmPotential:
    """-(hbar**2/2m) * (second derivative of sqrt(rho)) / sqrt(rho), summed over axes."""
    ms = _axis_masses(rho.grid, masses)
    dx = rho.grid.spacing
    floor = FLOOR_REL * float(rho.values.max())
    floored = bool(np.any(rho.values < floor))
    s = np.sqrt(np.maximum(rho.values, floor))
    q = np.zeros_like(s)
    for axis, m in enumerate(ms):
        q -= (hbar**2 / (2.0 * m)) * second_derivative(s, dx, axis=axis, method=method) / s
    return BohmPotential(rho.grid, q, floored)


@dataclass(frozen=True)
class GradientCheckReport:
    """Comparison of central differences of (hbar/2)*Fisher rate against the
    Bohm-potential pairing integral(eta * Q) for random mass-preserving eta.

    max_rel_deviation is the headline number: the largest (over
    perturbations) relative deviation of the Richardson-extrapolated
    difference quotient from the pairing. raw_deviations holds the
    per-epsilon deviations, slopes their log2 decay rates (2 = clean
    second-order central differences).
    """

    max_rel_deviation: float
    raw_deviations: np.ndarray
    epsilons: np.ndarray
    slopes: np.ndarray
    converged: bool
    method: str


def _random_modulation(grid: SpatialGrid, rng: np.random.Generator) -> np.ndarray:
    """Smooth random field with values in [-1, 1] on the grid."""
    out = np.zeros(grid.shape)
    coords = grid.mesh()
    for x in coords:
        scaled = np.pi * x / grid.half_width
        for mode in range(1, 4):
            amp = rng.uniform(-1.0, 1.0)
            phase = rng.uniform(0.0, 2.0 * np.pi)
            out = out + amp * np.cos(mode * scaled + phase)
    peak = np.max(np.abs(out))
    if peak == 0.0:
        return out
    return out / peak


def functional_gradient_check(
    rho: DensityField,
    masses: Masses,
    hbar: float,
    perturbation_scale: float = 0.05,
    n_perturbations: int = 16,
    seed: int = 0,
    n_epsilons: int = 3,
    method: str = "fd",
) -> GradientCheckReport:
    """Verify that the functional gradient of (hbar/2)*fisher_rate is bohm_potential.

    For each random mass-preserving perturbation eta (shaped like rho, so
    rho +/- eps*eta stays positive for eps < 1/2) the central difference
    [F(rho+eps*eta) - F(rho-eps*eta)]/(2*eps) is compared with
    integral(eta*Q); the quotient is Richardson-extrapolated over the
    epsilon ladder perturbation_scale / 2**j.
    """
    if np.any(rho.values <= 0.0):
        raise ValueError("functional_gradient_check needs a strictly positive density")
    _check_unit_mass(rho, "functional_gradient_check")
    grid = rho.grid
    w = grid.weight
    q = bohm_potential(rho, masses, hbar, method=method).values
    eps_ladder = perturbation_scale / 2.0 ** np.arange(n_epsilons)
    rng = stream_rng(seed)

    def func(values: np.ndarray) -> float:
        return 0.5 * hbar * fisher_rate(DensityField(grid, values), masses, hbar, method=method)

    devs = np.empty((n_perturbations, n_epsilons))
    extrapolated = np.empty(n_perturbations)
    skipped = False
    for i in range(n_perturbations):
        mod = _random_modulation(grid, rng)
        eta = rho.values * mod
        eta = eta - rho.values * (float(np.sum(eta)) * w)
        pairing = float(np.sum(eta * q) * w)
        quotients = np.full(n_epsilons, np.nan)
        for j, eps in enumerate(eps_ladder):
            if np.any(rho.values - eps * np.abs(eta) <= 0.0):
                skipped = True
                continue
            fp = func(rho.values + eps * eta)
            fm = func(rho.values - eps * eta)
            quotients[j] = (fp - fm) / (2.0 * eps)
        devs[i] = np.abs(quotients - pairing) / abs(pairing)
        q_ext = (4.0 * quotients[-1] - quotients[-2]) / 3.0
        extrapolated[i] = abs(q_ext - pairing) / abs(pairing)
    with np.errstate(divide="ignore", invalid="ignore"):
        slopes = np.log2(devs[:, :-1] / devs[:, 1:])
    decreasing = bool(np.all(np.nan_to_num(np.diff(devs, axis=1), nan=0.0) <= 0.0))
    converged = decreasing and not skipped and bool(np.all(np.isfinite(extrapolated)))
    return GradientCheckReport(
        max_rel_deviation=float(np.max(extrapolated)),
        raw_deviations=devs,
        epsilons=eps_ladder,
        slopes=slopes,
        converged=converged,
        method=method,
    )


def write_rate_csv(traj: DensityTrajectory, path, method: str = "fd") -> None:
    """CSV of (t, fisher_rate, cumulative I_f) rows plus a summary block."""
    rates = np.array([fisher_rate(f, traj.masses, traj.hbar, method=method) for f in traj.frames])
    cumulative = np.concatenate(
        [[0.0], np.cumsum(0.5 * (rates[1:] + rates[:-1]) * np.diff(traj.times))]
    )
    lines = ["t,fisher_rate,cumulative_i_f"]
    for t, r, c in zip(traj.times, rates, cumulative):
        lines.append(f"{float(t)!r},{float(r)!r},{float(c)!r}")
    lines.append(f"# frames={len(traj.frames)} total_i_f={float(cumulative[-1])!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
