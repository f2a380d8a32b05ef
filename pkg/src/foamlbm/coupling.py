"""Coupling of the melt and gas lattices through a shared interaction field.

Both phases feel the pseudopotential of the combined density, so the melt
and the gas of one bubble cohere while distinct bubbles still repel through
the melt film between them.  The oxide-network barrier is realized by
masking: while a film's rupture switch is up, each bubble's force is
evaluated on a view of the domain with the other bubble's gas removed, so
the two interfaces of the film stop attracting each other and the film
cannot snap on its own.  Ruptured films drop their masks and the plain
attraction completes the merge.

The per-phase update is a velocity shift: collide each lattice against an
equilibrium at u_total + tau * F / rho_total.  Shifting the equilibrium
velocity leaves the zeroth moment untouched, so coupling exchanges momentum
between the phases but never mass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from foamlbm.interaction import (InteractionParams, eos_pressure,
                                 pseudopotential, shan_chen_force)
from foamlbm.lattice import Lattice

# Cells with essentially no mass get no velocity shift instead of a 0/0.
DENSITY_FLOOR = 1e-12


@dataclass
class PhasePair:
    """The two lattices plus the interaction parameters that couple them."""

    melt: Lattice
    gas: Lattice
    params: InteractionParams
    velocity_mixing: str = "momentum"

    def __post_init__(self):
        if self.melt.grid_shape != self.gas.grid_shape:
            raise ValueError("melt and gas lattices must share a grid")
        if self.melt.boundary != self.gas.boundary:
            raise ValueError("melt and gas lattices must share a boundary kind")
        if isinstance(self.params, (int, float)):
            self.params = InteractionParams(G=float(self.params))
        if self.velocity_mixing not in ("momentum", "literal"):
            raise ValueError(f"unknown velocity_mixing {self.velocity_mixing!r}")

    @property
    def boundary(self) -> str:
        return self.melt.boundary

    def densities(self):
        rho_m, u_m = self.melt.moments()
        rho_g, u_g = self.gas.moments()
        return rho_m, u_m, rho_g, u_g


def shared_velocity(rho_melt, u_melt, rho_gas, u_gas, mode: str = "momentum"):
    """Common interface velocity both phases relax toward.

    The momentum mode mixes by mass, (rho_m u_m + rho_g u_g) / (rho_m +
    rho_g).  The literal mode divides the plain velocity sum by the combined
    density instead, (u_m + u_g) / (rho_m + rho_g).  Cells with no mass get
    the zero vector.
    """
    total = rho_melt + rho_gas
    safe = np.where(total < DENSITY_FLOOR, 1.0, total)
    if mode == "momentum":
        num = rho_melt * u_melt + rho_gas * u_gas
    elif mode == "literal":
        num = u_melt + u_gas
    else:
        raise ValueError(f"unknown velocity mixing mode {mode!r}")
    return np.where(total < DENSITY_FLOOR, 0.0, num / safe)


def interaction_potential(rho, G: float):
    """Per-phase potential xi; same expression as the bulk pressure."""
    return eos_pressure(rho, G)


def select_bubble_potential(xis) -> float:
    """Collapse candidate per-bubble potentials at a cell to one value.

    All-zero candidates give zero; otherwise the winner is Max when the
    largest-magnitude candidate is positive and Min when it is negative.
    The selection only looks at the values, so it is permutation invariant.
    """
    xis = [float(x) for x in xis]
    if not xis or all(x == 0.0 for x in xis):
        return 0.0
    top = max(xis, key=abs)
    return max(xis) if top > 0 else min(xis)


def interface_cells(rho_melt, rho_gas, bulk_melt: float, bulk_gas: float,
                    threshold: float = 0.05):
    """Cells where both phases are present above a fraction of their bulks."""
    return (rho_melt > threshold * bulk_melt) & (rho_gas > threshold * bulk_gas)


@dataclass
class BarrierState:
    """Ownership map, dilated interaction zones, and per-film switches."""

    owner: np.ndarray
    centroids: dict[int, tuple[float, float]]
    zones: dict[int, np.ndarray] = field(default_factory=dict)
    films: dict[tuple[int, int], int] = field(default_factory=dict)
    barrier: np.ndarray | None = None
    wall_rho: float | None = None  # what a cell behind a wall reads as

    def active_films(self):
        return [pair for pair, eta in self.films.items() if eta == 1]

    def blocked(self, bubble: int) -> set[int]:
        """Ids whose gas this bubble must not see."""
        out = set()
        for (a, b), eta in self.films.items():
            if eta != 1:
                continue
            if a == bubble:
                out.add(b)
            elif b == bubble:
                out.add(a)
        return out


def barrier_zones(owner: np.ndarray, centroids: dict, films: dict,
                  r_z: int = 3, wall_rho: float | None = None) -> BarrierState:
    """Dilate each bubble's cells into its interaction zone and flag overlaps.

    A cell is a barrier cell when at least two zones cover it and that
    pair's film switch is still up.  Pairs are registered in `films` by the
    caller (tracking); pairs absent from the dict are treated as up (a fresh
    contact starts barricaded).  `wall_rho` is the density a bubble reads
    behind a standing wall, normally the bulk melt value.
    """
    state = BarrierState(owner=owner, centroids=dict(centroids),
                         films=dict(films), wall_rho=wall_rho)
    ids = sorted(state.centroids)
    for b in ids:
        # Euclidean distance threshold == dilation by a radius-r_z disc,
        # but linear in grid size instead of O(grid * r_z^2)
        dist = ndimage.distance_transform_edt(owner != b)
        state.zones[b] = dist <= r_z
    barrier = np.zeros(owner.shape, dtype=bool)
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            overlap = state.zones[a] & state.zones[b]
            if not overlap.any():
                continue
            eta = state.films.setdefault((a, b), 1)
            if eta == 1:
                barrier |= overlap
    state.barrier = barrier
    return state


def _nearest_owner_map(shape, candidates: dict[int, np.ndarray],
                       centroids: dict) -> np.ndarray:
    """Per-cell id of the nearest-centroid candidate zone covering the cell.

    Cells covered by no zone get 0.  Distance ties go to the lower id.
    """
    nx, ny = shape
    X, Y = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    best = np.zeros(shape, dtype=np.int64)
    best_d = np.full(shape, np.inf)
    for b in sorted(candidates):
        cx, cy = centroids[b]
        d = (X - cx) ** 2 + (Y - cy) ** 2
        mask = candidates[b] & (d < best_d)
        best[mask] = b
        best_d[mask] = d[mask]
    return best


@dataclass
class CouplingResult:
    u_total: np.ndarray
    u_eq_melt: np.ndarray
    u_eq_gas: np.ndarray
    force: np.ndarray
    rho_total: np.ndarray


def coupled_update(pair: PhasePair, barrier: BarrierState | None = None,
                   f_ext_melt=None, f_ext_gas=None) -> CouplingResult:
    """One coupling pass: shared velocity, interaction force, velocity shifts.

    With no barrier (or no active films) this is the unmodified coupling: a
    single force field from the combined density.  With active films, each
    involved bubble gets a force evaluated on its masked view and every cell
    in a zone takes the force of the nearest involved bubble.

    Returns the equilibrium velocities to pass to the next collide of each
    lattice; masses are untouched by construction.
    """
    rho_m, u_m, rho_g, u_g = pair.densities()
    G = pair.params.G
    bc = pair.boundary
    rho_t = rho_m + rho_g
    u_total = shared_velocity(rho_m, u_m, rho_g, u_g, pair.velocity_mixing)

    psi_t = pair.params.psi(rho_t)
    force = shan_chen_force(psi_t, G, bc)

    if barrier is not None and barrier.active_films():
        involved = sorted({b for pair_ids in barrier.active_films()
                           for b in pair_ids})
        zones = {b: barrier.zones[b] for b in involved}
        # nearest involved bubble per covered cell; doubles as the gas
        # attribution map (which side of a film a cell's gas belongs to)
        nearest = _nearest_owner_map(rho_t.shape, zones, barrier.centroids)
        wall = barrier.wall_rho if barrier.wall_rho is not None \
            else float(rho_m.max())
        for b in involved:
            sel = nearest == b
            if not sel.any():
                continue
            view = rho_t.copy()
            for other in barrier.blocked(b):
                # the wall hides the far bubble entirely: this side sees
                # liquid continuing instead of the other cavity, so the
                # coalescence suction across the film vanishes and the
                # film melt keeps its cohesion against drainage
                view[nearest == other] = wall
            psi_b = pair.params.psi(view)
            force_b = shan_chen_force(psi_b, G, bc)
            force[:, sel] = force_b[:, sel]

    safe = np.where(rho_t < DENSITY_FLOOR, 1.0, rho_t)
    shift = np.where(rho_t < DENSITY_FLOOR, 0.0, force / safe)
    u_eq_m = u_total + pair.melt.tau * shift
    u_eq_g = u_total + pair.gas.tau * shift

    if f_ext_melt is not None:
        safe_m = np.where(rho_m < DENSITY_FLOOR, 1.0, rho_m)
        u_eq_m = u_eq_m + np.where(rho_m < DENSITY_FLOOR, 0.0,
                                   pair.melt.tau * f_ext_melt / safe_m)
    if f_ext_gas is not None:
        safe_g = np.where(rho_g < DENSITY_FLOOR, 1.0, rho_g)
        u_eq_g = u_eq_g + np.where(rho_g < DENSITY_FLOOR, 0.0,
                                   pair.gas.tau * f_ext_gas / safe_g)

    return CouplingResult(u_total=u_total, u_eq_melt=u_eq_m, u_eq_gas=u_eq_g,
                          force=force, rho_total=rho_t)
