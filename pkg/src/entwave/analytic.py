"""Closed-form states: free Gaussian packets, entangled pairs, mixtures, plane waves.

A free Gaussian packet with momentum-width parameter alpha and central
momentum p0 (initial center x=0) has

    psi(x,t) = [sqrt(pi)*beta*(1+i*t/tau)]**(-1/2)
               * exp(i*(p0*x - E0*t)/hbar)
               * exp(-(x - p0*t/m)**2 / (2*beta**2*(1+i*t/tau)))

with beta = alpha*hbar, tau = m*hbar*alpha**2, E0 = p0**2/(2*m). Its density
is a Gaussian of width beta_t = beta*sqrt(1+(t/tau)**2) riding the classical
trajectory x = p0*t/m.

The entangled pair is the symmetric superposition

    Psi(xa, xb, t) = (N/sqrt(2)) * [psi_A(xa, t) + psi_B(xb, t)]

whose joint density carries the interference cross term
2*sqrt(rho_A*rho_B)*cos(theta) with theta the phase difference of the two
packets. Dropping the cross term gives the classical two-packet mixture.
The plane-wave pair superposes two product momentum branches.

None of the two-particle forms is square integrable on the infinite plane
(psi_A(xa) is constant along xb), so every grid-evaluated state here is
renormalized on the periodic box; the infinite-domain normalization constant
N = 1/sqrt(1+exp(-(alpha_a*p0/2)**2)) is still computed and reported for
comparison.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import DensityField, PacketParams, SpatialGrid, WaveField

SCENARIO_KINDS = ("entangled", "mixture", "plane_wave")


def gaussian_width(params: PacketParams, t: float) -> float:
    """Dispersed width beta_t = beta*sqrt(1+(t/tau)**2)."""
    return params.beta * np.sqrt(1.0 + (t / params.tau) ** 2)


def gaussian_center(params: PacketParams, t: float) -> float:
    """Classical trajectory of the packet center, p0*t/m."""
    return params.p0 * t / params.mass


def gaussian_packet(params: PacketParams, x, t: float) -> np.ndarray:
    """Complex amplitude of the free packet at positions x and time t."""
    beta = params.beta
    tau = params.tau
    e0 = params.p0**2 / (2.0 * params.mass)
    spread = 1.0 + 1j * t / tau
    xc = np.asarray(x, dtype=np.float64) - gaussian_center(params, t)
    pre = 1.0 / np.sqrt(np.sqrt(np.pi) * beta * spread)
    return pre * np.exp(1j * (params.p0 * np.asarray(x) - e0 * t) / params.hbar) * np.exp(
        -(xc**2) / (2.0 * beta**2 * spread)
    )


def gaussian_density(params: PacketParams, x, t: float) -> np.ndarray:
    """|psi|**2 of the free packet: Gaussian of width beta_t, unit mass on R."""
    bt = gaussian_width(params, t)
    xc = np.asarray(x, dtype=np.float64) - gaussian_center(params, t)
    return np.exp(-(xc**2) / bt**2) / (np.sqrt(np.pi) * bt)


def gaussian_phase(params: PacketParams, x, t: float) -> np.ndarray:
    """Single-valued phase S/hbar of the packet (no 2*pi wrapping).

    Contains the carrier (p0*x - E0*t)/hbar, the dispersive chirp, and the
    -arctan(t/tau)/2 spreading phase of the complex prefactor.
    """
    tau = params.tau
    bt = gaussian_width(params, t)
    e0 = params.p0**2 / (2.0 * params.mass)
    xc = np.asarray(x, dtype=np.float64) - gaussian_center(params, t)
    return (
        (params.p0 * np.asarray(x) - e0 * t) / params.hbar
        + xc**2 * t / (2.0 * tau * bt**2)
        - 0.5 * np.arctan(t / tau)
    )


@dataclass(frozen=True)
class BipartiteScenario:
    """Two free packets on a 2D grid plus the kind of joint state built from them.

    For kind="plane_wave" the four momenta (p_a1, p_a2, p_b1, p_b2) must be
    integer multiples of pi*hbar/L so each branch is periodic on the box.
    """

    packet_a: PacketParams
    packet_b: PacketParams
    grid: SpatialGrid
    kind: str = "entangled"
    momenta: Optional[Tuple[float, float, float, float]] = None

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.grid.axes != 2:
            raise ValueError("scenario grid must be 2D")
        if self.kind == "plane_wave":
            if self.momenta is None or len(self.momenta) != 4:
                raise ValueError("plane_wave scenario needs momenta (p_a1, p_a2, p_b1, p_b2)")
            for p in self.momenta:
                _momentum_index(p, self.packet_a.hbar, self.grid)

    @property
    def paper_norm_factor(self) -> float:
        """Infinite-domain normalization 1/sqrt(1+exp(-(alpha_a*p0/2)**2))."""
        a = self.packet_a.alpha * self.packet_a.p0 / 2.0
        return 1.0 / np.sqrt(1.0 + np.exp(-(a**2)))


def _momentum_index(p: float, hbar: float, grid: SpatialGrid) -> int:
    """Integer j with p = j*pi*hbar/L, rejecting non-periodic or aliased momenta."""
    unit = np.pi * hbar / grid.half_width
    j = p / unit
    if abs(j - round(j)) > 1e-9:
        raise ValueError("momentum not periodic on box")
    j = int(round(j))
    if abs(j) > grid.points // 2 - 1:
        raise ValueError("momentum not representable on grid (beyond Nyquist)")
    return j


def entangled_joint_wavefunction(scn: BipartiteScenario, xa, xb, t: float) -> np.ndarray:
    """(N/sqrt(2)) * [psi_A(xa,t) + psi_B(xb,t)]; renormalize on the box before use."""
    if scn.kind != "entangled":
        raise ValueError("scenario kind is not 'entangled'")
    n = scn.paper_norm_factor
    return (n / np.sqrt(2.0)) * (
        gaussian_packet(scn.packet_a, xa, t) + gaussian_packet(scn.packet_b, xb, t)
    )


def entangled_joint_density(scn: BipartiteScenario, xa, xb, t: float) -> np.ndarray:
    """(N**2/2) * [rho_A + rho_B + 2*sqrt(rho_A*rho_B)*cos(theta)].

    theta is the full phase difference of the two packets, including the
    -arctan(t/tau)/2 prefactor phases; these cancel when tau_a = tau_b.
    """
    if scn.kind != "entangled":
        raise ValueError("scenario kind is not 'entangled'")
    ra = gaussian_density(scn.packet_a, xa, t)
    rb = gaussian_density(scn.packet_b, xb, t)
    theta = gaussian_phase(scn.packet_a, xa, t) - gaussian_phase(scn.packet_b, xb, t)
    n2 = scn.paper_norm_factor**2
    return (n2 / 2.0) * (ra + rb + 2.0 * np.sqrt(ra * rb) * np.cos(theta))


def mixed_joint_density(scn: BipartiteScenario, xa, xb, t: float) -> np.ndarray:
    """The entangled density without its interference term: the classical mixture."""
    if scn.kind != "mixture":
        raise ValueError("scenario kind is not 'mixture'")
    ra = gaussian_density(scn.packet_a, xa, t)
    rb = gaussian_density(scn.packet_b, xb, t)
    n2 = scn.paper_norm_factor**2
    return (n2 / 2.0) * (ra + rb)


@functools.lru_cache(maxsize=32)
def _planewave_box_norm(scn: BipartiteScenario) -> float:
    """Z with integral of |(b1+b2)|**2 / (2Z) over the box equal to 1, by grid sum."""
    xa, xb = scn.grid.mesh()
    b1, b2 = _planewave_branches(scn, xa, xb, 0.0)
    total = float(np.sum(np.abs(b1 + b2) ** 2) * scn.grid.weight)
    return total / 2.0


def _planewave_branches(scn: BipartiteScenario, xa, xb, t: float):
    pa1, pa2, pb1, pb2 = scn.momenta
    hbar = scn.packet_a.hbar
    ma, mb = scn.packet_a.mass, scn.packet_b.mass
    e1 = pa1**2 / (2.0 * ma) + pb1**2 / (2.0 * mb)
    e2 = pa2**2 / (2.0 * ma) + pb2**2 / (2.0 * mb)
    b1 = np.exp(1j * (pa1 * np.asarray(xa) + pb1 * np.asarray(xb) - e1 * t) / hbar)
    b2 = np.exp(1j * (pa2 * np.asarray(xa) + pb2 * np.asarray(xb) - e2 * t) / hbar)
    return b1, b2


def planewave_state(scn: BipartiteScenario, xa, xb, t: float) -> np.ndarray:
    """Superposition of two momentum branches, unit norm on the box.

    Branch energies use E = p**2/(2m), matching the solver's kinetic operator.
    """
    if scn.kind != "plane_wave":
        raise ValueError("scenario kind is not 'plane_wave'")
    b1, b2 = _planewave_branches(scn, xa, xb, t)
    z = _planewave_box_norm(scn)
    return (b1 + b2) / np.sqrt(2.0 * z)


def planewave_density(scn: BipartiteScenario, xa, xb, t: float) -> np.ndarray:
    """(1/Z)*(1 + cos(theta')) with theta' = ((pa1-pa2)*xa + (pb1-pb2)*xb - dE*t)/hbar."""
    if scn.kind != "plane_wave":
        raise ValueError("scenario kind is not 'plane_wave'")
    pa1, pa2, pb1, pb2 = scn.momenta
    hbar = scn.packet_a.hbar
    ma, mb = scn.packet_a.mass, scn.packet_b.mass
    de = (pa1**2 - pa2**2) / (2.0 * ma) + (pb1**2 - pb2**2) / (2.0 * mb)
    theta = ((pa1 - pa2) * np.asarray(xa) + (pb1 - pb2) * np.asarray(xb) - de * t) / hbar
    z = _planewave_box_norm(scn)
    return (1.0 + np.cos(theta)) / z


# ---------------------------------------------------------------------------
# Grid-evaluated fields
# ---------------------------------------------------------------------------

def packet_wavefield(params: PacketParams, grid: SpatialGrid, t: float = 0.0) -> WaveField:
    """The packet sampled on a 1D grid and renormalized on the box."""
    if grid.axes != 1:
        raise ValueError("packet_wavefield needs a 1D grid")
    return WaveField(grid, gaussian_packet(params, grid.nodes(), t)).normalize()


def uniform_wavefield(grid: SpatialGrid) -> WaveField:
    """The constant (zero-momentum) mode, 1/sqrt(2L) per node on a 1D grid."""
    if grid.axes != 1:
        raise ValueError("uniform_wavefield needs a 1D grid")
    amp = 1.0 / np.sqrt(2.0 * grid.half_width)
    return WaveField(grid, np.full(grid.points, amp, dtype=np.complex128))


def scenario_wavefield(scn: BipartiteScenario, t: float = 0.0) -> WaveField:
    """The scenario's pure state on its grid, renormalized on the box.

    Not defined for kind="mixture" (not a pure state); use mixture_branches.
    """
    xa, xb = scn.grid.mesh()
    if scn.kind == "entangled":
        values = entangled_joint_wavefunction(scn, xa, xb, t)
    elif scn.kind == "plane_wave":
        values = planewave_state(scn, xa, xb, t)
    else:
        raise ValueError("mixture has no single wavefunction; use mixture_branches")
    return WaveField(scn.grid, values).normalize()


def joint_density_field(scn: BipartiteScenario, t: float = 0.0) -> DensityField:
    """The scenario's joint density on its grid, renormalized on the box."""
    xa, xb = scn.grid.mesh()
    if scn.kind == "entangled":
        values = entangled_joint_density(scn, xa, xb, t)
    elif scn.kind == "mixture":
        values = mixed_joint_density(scn, xa, xb, t)
    else:
        values = planewave_density(scn, xa, xb, t)
    return DensityField(scn.grid, values).normalize()


def mixture_branches(scn: BipartiteScenario, t: float = 0.0):
    """The classical mixture as an explicit ensemble of two product pure states.

    Returns [(1/2, psi_A(t) x uniform_b), (1/2, uniform_a x psi_B(t))]; the
    uniform factor is the box-normalized zero-momentum mode, so the weighted
    branch densities sum to the box-renormalized mixture density.
    """
    if scn.kind != "mixture":
        raise ValueError("mixture_branches needs a mixture scenario")
    g1 = scn.grid.axis_grid()
    psi_a = packet_wavefield(scn.packet_a, g1, t).values
    psi_b = packet_wavefield(scn.packet_b, g1, t).values
    unif = uniform_wavefield(g1).values
    branch1 = WaveField(scn.grid, np.outer(psi_a, unif))
    branch2 = WaveField(scn.grid, np.outer(unif, psi_b))
    return [(0.5, branch1), (0.5, branch2)]
