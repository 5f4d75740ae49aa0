"""Von Neumann pointer measurements on a one-dimensional grid.

The interaction is impulsive: a pointer prepared in a Gaussian of standard
deviation ``width`` (in position) is displaced by ``coupling * lambda_k`` in
the branch where the measured observable has eigenvalue ``lambda_k``. After
post-selection the pointer amplitude is::

    Phi(x) = sum_k <post|P_k|pre> * G(x - coupling * lambda_k)

with ``G`` the initial Gaussian amplitude. ``width >> coupling`` gives a weak
measurement whose center approaches ``coupling * Re(weak value)``;
``width << coupling`` reproduces the ABL mixture of separated peaks.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import GridTooNarrow, VanishingPostSelection
from .qcore import DEFAULT_MERGE_TOL, as_operator, spectral
from .tsvf import VANISHING_TOL, TwoStateVector

DEFAULT_POINTS = 4096
EDGE_SIGMAS = 6.0
AUTO_SIGMAS = 8.0


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    n_points: int = DEFAULT_POINTS

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)) or self.x_min >= self.x_max:
            raise ValueError(f"need finite x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if int(self.n_points) < 64:
            raise ValueError(f"n_points must be >= 64, got {self.n_points}")
        object.__setattr__(self, "n_points", int(self.n_points))

    def points(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    def refined(self, factor=2) -> "GridSpec":
        return GridSpec(self.x_min, self.x_max, factor * (self.n_points - 1) + 1)


@dataclass(frozen=True)
class PointerConfig:
    width: float
    coupling: float = 1.0

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError(f"pointer width must be positive, got {self.width}")
        if self.coupling == 0 or not np.isfinite(self.coupling):
            raise ValueError("coupling must be finite and non-zero")


@dataclass(frozen=True, eq=False)
class PointerDensity:
    grid: GridSpec
    density: np.ndarray
    post_selection_probability: float

    def __post_init__(self):
        d = np.array(self.density, dtype=float)
        if d.shape != (self.grid.n_points,):
            raise ValueError("density length does not match the grid")
        if np.any(d < 0):
            raise ValueError("density must be non-negative")
        mass = np.trapezoid(d, self.grid.points())
        if abs(mass - 1.0) > 1e-6:
            raise ValueError(f"density integrates to {mass!r}, not 1")
        d.setflags(write=False)
        object.__setattr__(self, "density", d)

    @property
    def x(self) -> np.ndarray:
        return self.grid.points()


class SweepEntry(NamedTuple):
    width: float
    center: float
    post_selection_probability: float


def gaussian_amplitude(x, width):
    """Real Gaussian amplitude whose square is a normal density of std ``width``."""
    return (2.0 * np.pi * width ** 2) ** -0.25 * np.exp(-(x ** 2) / (4.0 * width ** 2))


def auto_grid(centers, width, coupling, n_points=DEFAULT_POINTS) -> GridSpec:
    """Grid covering every displaced peak by 8 effective widths.

    The effective width is floored at ``0.1 * |coupling|`` so that very
    narrow pointers still get a sensible span.
    """
    pad = AUTO_SIGMAS * max(width, 0.1 * abs(coupling))
    return GridSpec(float(np.min(centers)) - pad, float(np.max(centers)) + pad, n_points)


def _branch_amplitudes(tsv, observable, tol):
    dec = spectral(observable, tol)
    pre, post = tsv.pre.amps, tsv.post.amps
    amps = np.array([np.vdot(post, p.matrix @ pre) for p in dec.projectors])
    return dec.eigenvalues, amps


def pointer_distribution(tsv: TwoStateVector, observable, cfg: PointerConfig,
                         grid: Optional[GridSpec] = None, tol=DEFAULT_MERGE_TOL,
                         n_points: int = DEFAULT_POINTS) -> PointerDensity:
    """Post-selected pointer density for a measurement of ``observable``.

    Parameters
    ----------
    tsv : TwoStateVector
    observable : HermitianOperator
    cfg : PointerConfig
        Initial pointer width and coupling strength.
    grid : GridSpec, optional
        Defaults to :func:`auto_grid` with ``n_points`` points.

    Raises
    ------
    GridTooNarrow
        If some displaced peak lies within 6 widths of a grid edge.
    VanishingPostSelection
        If the integrated post-selected pointer weight is below 1e-20.
    """
    observable = as_operator(observable)
    eigenvalues, amps = _branch_amplitudes(tsv, observable, tol)
    centers = cfg.coupling * eigenvalues
    if grid is None:
        grid = auto_grid(centers, cfg.width, cfg.coupling, n_points)
    lo = float(np.min(centers)) - EDGE_SIGMAS * cfg.width
    hi = float(np.max(centers)) + EDGE_SIGMAS * cfg.width
    if lo < grid.x_min or hi > grid.x_max:
        raise GridTooNarrow(
            f"grid [{grid.x_min:g}, {grid.x_max:g}] does not cover peaks +-6 widths [{lo:g}, {hi:g}]"
        )

    x = grid.points()
    phi = np.zeros_like(x, dtype=complex)
    for c, a in zip(centers, amps):
        phi += a * gaussian_amplitude(x - c, cfg.width)
    rho = np.abs(phi) ** 2
    weight = float(np.trapezoid(rho, x))
    if weight < VANISHING_TOL:
        raise VanishingPostSelection(f"post-selected pointer weight {weight:.3g} vanishes")
    return PointerDensity(grid, rho / weight, min(weight, 1.0))


def distribution_center(d: PointerDensity) -> float:
    """Mean pointer position."""
    return float(np.trapezoid(d.x * d.density, d.x))


def peak_areas(d: PointerDensity, centers: Sequence[float]) -> np.ndarray:
    """Mass of ``d`` attributed to each peak, splitting the grid at midpoints.

    Areas are returned in the order of ``centers``. Only meaningful when the
    peaks are well separated.
    """
    centers = np.asarray(centers, dtype=float)
    order = np.argsort(centers)
    cuts = (centers[order][1:] + centers[order][:-1]) / 2.0
    x, rho = d.x, d.density
    edges = np.concatenate([[x[0]], cuts, [x[-1]]])
    areas = np.empty(len(centers))
    for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        # include the exact cut points so adjacent segments tile the grid
        inside = (x > a) & (x < b)
        xs = np.concatenate([[a], x[inside], [b]])
        ys = np.interp(xs, x, rho)
        areas[order[i]] = np.trapezoid(ys, xs)
    return areas


def coupling_sweep(tsv: TwoStateVector, observable, widths: Sequence[float],
                   grid: Optional[GridSpec] = None, coupling: float = 1.0,
                   max_workers: Optional[int] = None, n_points: int = DEFAULT_POINTS) -> list:
    """Pointer center and post-selection probability for each width.

    With ``grid=None`` each width gets its own auto-sized grid. Widths may be
    evaluated in threads; every entry is computed exactly as in a serial run.
    """
    def one(width):
        d = pointer_distribution(tsv, observable, PointerConfig(float(width), coupling), grid,
                                 n_points=n_points)
        return SweepEntry(float(width), distribution_center(d), d.post_selection_probability)

    widths = list(widths)
    if max_workers and max_workers > 1 and len(widths) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(one, widths))
    return [one(w) for w in widths]
