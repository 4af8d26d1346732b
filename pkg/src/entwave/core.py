"""Grids, fields, and quadrature: the numerical substrate shared by all modules.

Space is a finite periodic box [-L, L) sampled on n uniform nodes per axis,
x_k = -L + k*dx with dx = 2L/n. The node at +L is identified with -L, the
standard layout for discrete Fourier transforms. The quadrature rule is the
plain Riemann sum sum(f) * dx**axes, which on a periodic grid coincides with
the trapezoid rule and with the spectral inner product.

Complex amplitudes live in WaveField (psi, units length**(-axes/2)),
nonnegative probability densities in DensityField (rho, units
length**(-axes)). Both are immutable once constructed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np
import scipy.fft as _fft


class PreconditionError(RuntimeError):
    """A numerical precondition (stability or resolution bound) is violated."""


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform periodic sampling of [-half_width, half_width) on 1 or 2 axes."""

    half_width: float
    points: int
    axes: int = 1

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("nonpositive half_width")
        if self.points < 8:
            raise ValueError("tiny point count: need points >= 8")
        if self.points % 2 != 0:
            raise ValueError("odd point count")
        if self.axes not in (1, 2):
            raise ValueError("axes must be 1 or 2")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points

    @property
    def weight(self) -> float:
        """Quadrature weight per node, dx**axes."""
        return self.spacing**self.axes

    @property
    def shape(self) -> tuple:
        return (self.points,) * self.axes

    def nodes(self) -> np.ndarray:
        """Node coordinates along one axis (endpoint +L excluded)."""
        return -self.half_width + self.spacing * np.arange(self.points)

    def mesh(self) -> tuple:
        """Coordinate arrays, one per axis, broadcastable to self.shape."""
        x = self.nodes()
        if self.axes == 1:
            return (x,)
        return (x[:, None], x[None, :])

    def wavenumbers(self) -> np.ndarray:
        """FFT angular wavenumbers along one axis."""
        return 2.0 * np.pi * np.fft.fftfreq(self.points, d=self.spacing)

    def axis_grid(self) -> "SpatialGrid":
        """The 1D grid of a single axis of this grid."""
        return SpatialGrid(self.half_width, self.points, 1)


def _freeze(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


@dataclass(frozen=True)
class WaveField:
    """Complex amplitudes psi on a grid; norm**2 = sum(|psi|**2) * dx**axes."""

    grid: SpatialGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "values", _freeze(v))

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.weight))

    def normalize(self) -> "WaveField":
        n = self.norm()
        if n == 0.0:
            raise ValueError("null field")
        return WaveField(self.grid, self.values / n)

    def density(self) -> "DensityField":
        return DensityField(self.grid, np.abs(self.values) ** 2)


@dataclass(frozen=True)
class DensityField:
    """Nonnegative density rho on a grid; unit mass means sum(rho)*dx**axes = 1."""

    grid: SpatialGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        if np.any(v < 0.0):
            raise ValueError("negative density values")
        object.__setattr__(self, "values", _freeze(v))

    def mass(self) -> float:
        return float(np.sum(self.values) * self.grid.weight)

    def normalize(self) -> "DensityField":
        m = self.mass()
        if m == 0.0:
            raise ValueError("null field")
        return DensityField(self.grid, self.values / m)


Field = Union[WaveField, DensityField]


@dataclass(frozen=True)
class PacketParams:
    """Physical parameters of one free Gaussian packet.

    alpha is the momentum-width parameter (units 1/momentum); the momentum
    spread is 1/(sqrt(2)*alpha). Derived scales: beta = alpha*hbar is the
    initial position width, tau = mass*hbar*alpha**2 the spreading time on
    which the width grows by sqrt(2).
    """

    mass: float
    hbar: float
    alpha: float
    p0: float = 0.0

    def __post_init__(self):
        if not (self.mass > 0 and self.hbar > 0 and self.alpha > 0):
            raise ValueError("mass, hbar, alpha must all be positive")

    @property
    def beta(self) -> float:
        return self.alpha * self.hbar

    @property
    def tau(self) -> float:
        return self.mass * self.hbar * self.alpha**2


def make_grid(half_width: float, points: int, axes: int = 1) -> SpatialGrid:
    """Build a uniform periodic grid; rejects odd or tiny point counts."""
    return SpatialGrid(float(half_width), int(points), int(axes))


def normalize(field: Field) -> Field:
    """Unit L2 norm for WaveField, unit mass for DensityField."""
    return field.normalize()


def marginal(joint: DensityField, axis: str) -> DensityField:
    """Marginal density of a 2D joint: axis 'a' keeps x_a (integrates x_b).

    The integral over the traced axis is the grid Riemann sum, so
    marginal-then-integrate equals integrating the joint directly.
    """
    if joint.grid.axes != 2:
        raise ValueError("marginal requires a 2D joint density")
    if axis not in ("a", "b"):
        raise ValueError("axis must be 'a' or 'b'")
    traced = 1 if axis == "a" else 0
    values = joint.values.sum(axis=traced) * joint.grid.spacing
    return DensityField(joint.grid.axis_grid(), values)


# ---------------------------------------------------------------------------
# Derivatives on the periodic grid
# ---------------------------------------------------------------------------

def fd_gradient(values: np.ndarray, spacing: float, axis: int = 0) -> np.ndarray:
    """Second-order centered first difference with periodic wrap."""
    return (np.roll(values, -1, axis=axis) - np.roll(values, 1, axis=axis)) / (2.0 * spacing)


def fd_second(values: np.ndarray, spacing: float, axis: int = 0) -> np.ndarray:
    """Second-order centered second difference with periodic wrap."""
    return (
        np.roll(values, -1, axis=axis) - 2.0 * values + np.roll(values, 1, axis=axis)
    ) / spacing**2


def _spectral_apply(values: np.ndarray, spacing: float, axis: int, symbol_fn) -> np.ndarray:
    n = values.shape[axis]
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=spacing)
    shape = [1] * values.ndim
    shape[axis] = n
    sym = symbol_fn(k).reshape(shape)
    out = _fft.ifft(sym * _fft.fft(values, axis=axis, workers=-1), axis=axis, workers=-1)
    if not np.iscomplexobj(values):
        return out.real
    return out


def spectral_gradient(values: np.ndarray, spacing: float, axis: int = 0) -> np.ndarray:
    """Fourier first derivative; exact for band-limited periodic data."""
    return _spectral_apply(values, spacing, axis, lambda k: 1j * k)


def spectral_second(values: np.ndarray, spacing: float, axis: int = 0) -> np.ndarray:
    """Fourier second derivative."""
    return _spectral_apply(values, spacing, axis, lambda k: -(k**2))


def gradient(values: np.ndarray, spacing: float, axis: int = 0, method: str = "fd") -> np.ndarray:
    if method == "fd":
        return fd_gradient(values, spacing, axis)
    if method == "spectral":
        return spectral_gradient(values, spacing, axis)
    raise ValueError(f"unknown derivative method {method!r}")


def second_derivative(
    values: np.ndarray, spacing: float, axis: int = 0, method: str = "fd"
) -> np.ndarray:
    if method == "fd":
        return fd_second(values, spacing, axis)
    if method == "spectral":
        return spectral_second(values, spacing, axis)
    raise ValueError(f"unknown derivative method {method!r}")


# ---------------------------------------------------------------------------
# CSV serialization
#
# All numbers are written with repr(float(x)), the shortest digit string that
# round-trips exactly in IEEE-754 double precision, so files are bit-exact
# and reproducible.
#
#   1D wave:    header "x,re,im", one row per node
#   1D density: header "x,rho",   one row per node
#   2D density: two comment lines describing the grid and layout, then the
#               row-major matrix block (row index = x_a node, column = x_b)
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def write_wave_csv(field: WaveField, path) -> None:
    if field.grid.axes != 1:
        raise ValueError("CSV wave export is 1D only; use checkpoints for 2D")
    x = field.grid.nodes()
    lines = ["x,re,im"]
    for xi, v in zip(x, field.values):
        lines.append(f"{_fmt(xi)},{_fmt(v.real)},{_fmt(v.imag)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_wave_csv(path, grid: SpatialGrid) -> WaveField:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    return WaveField(grid, data[:, 1] + 1j * data[:, 2])


def write_density_csv(field: DensityField, path) -> None:
    if field.grid.axes == 1:
        x = field.grid.nodes()
        lines = ["x,rho"]
        for xi, v in zip(x, field.values):
            lines.append(f"{_fmt(xi)},{_fmt(v)}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        return
    g = field.grid
    lines = [
        f"# density-matrix axes=2 points={g.points} half_width={_fmt(g.half_width)}"
        f" spacing={_fmt(g.spacing)}",
        "# layout: row i = x_a node i, column j = x_b node j, nodes x_k = -L + k*dx",
    ]
    for row in field.values:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_density_csv(path) -> DensityField:
    with open(path) as fh:
        first = fh.readline()
    if first.startswith("# density-matrix"):
        fields = dict(tok.split("=") for tok in first[1:].split() if "=" in tok)
        grid = SpatialGrid(float(fields["half_width"]), int(fields["points"]), 2)
        values = np.loadtxt(path, delimiter=",", comments="#")
        return DensityField(grid, values)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    x = data[:, 0]
    n = len(x)
    spacing = x[1] - x[0]
    grid = SpatialGrid(n * spacing / 2.0, n, 1)
    return DensityField(grid, data[:, 1])
