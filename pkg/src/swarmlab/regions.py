"""Convergence-region predicates and the diagonal (phi1 = phi2) grid scanner.

All predicates accept scalars or broadcasting arrays and use strict
inequalities as stated; the scanner samples cell centres (half-cell offset)
so exact boundaries are never evaluated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .moments import f_one

__all__ = [
    "RegionVerdict",
    "in_deterministic_region",
    "in_lyapunov_region",
    "in_mean_square_region",
    "in_noisy_fht_region",
    "in_pbest_convergence_region",
    "region_verdict",
    "RegionGrid",
    "scan_regions",
    "write_regions_csv",
    "render_regions_svg",
    "REGIONS_CSV_HEADER",
]


def in_deterministic_region(omega, phi1, phi2):
    """|omega| < 1 and 0 < phi1 + phi2 < 4 (1 + omega)."""
    s = phi1 + phi2
    return (np.abs(omega) < 1) & (s > 0) & (s < 4.0 * (1.0 + omega))


def in_lyapunov_region(omega, phi1, phi2):
    """|omega| < 1, omega != 0, and phi1 + phi2 < 2 (1 - 2|omega| + omega^2) / (1 + omega)."""
    s = phi1 + phi2
    bound = 2.0 * (1.0 - 2.0 * np.abs(omega) + omega * omega) / (1.0 + omega)
    return (np.abs(omega) < 1) & (omega != 0) & (s < bound)


def in_mean_square_region(omega, phi1, phi2):
    """0 <= omega < 1, phi1 + phi2 > 0, and f(1) > 0.

    The positivity of phi1 + phi2 (rather than >= 0) keeps the process
    nondegenerate; it is also required by the mean-limit conditions.
    """
    s = phi1 + phi2
    return (omega >= 0) & (omega < 1) & (s > 0) & (f_one(omega, phi1, phi2) > 0)


def in_noisy_fht_region(omega, phi1, phi2):
    """Mean-square and deterministic conditions plus f(1) > 1/3.

    The remaining hypothesis of the finite-hitting-time result (delta <=
    epsilon) involves run-time quantities and is checked at experiment level.
    """
    return (in_mean_square_region(omega, phi1, phi2)
            & in_deterministic_region(omega, phi1, phi2)
            & (f_one(omega, phi1, phi2) > 1.0 / 3.0))


def in_pbest_convergence_region(omega, phi1, phi2):
    """Conditions under which every positively-initialised personal best
    approaches the global best: the mean-square and deterministic conditions
    plus f(1) > max(phi1^2, phi2^2) (1 + omega) / 6.
    """
    bound = np.maximum(phi1 * phi1, phi2 * phi2) * (1.0 + omega) / 6.0
    return (in_mean_square_region(omega, phi1, phi2)
            & in_deterministic_region(omega, phi1, phi2)
            & (f_one(omega, phi1, phi2) > bound))


@dataclass(frozen=True)
class RegionVerdict:
    deterministic: bool
    lyapunov: bool
    mean_square: bool
    noisy_fht: bool
    pbest_convergence: bool
    f1: float


def region_verdict(omega: float, phi1: float, phi2: float) -> RegionVerdict:
    """All region memberships for a single parameter triple."""
    return RegionVerdict(
        deterministic=bool(in_deterministic_region(omega, phi1, phi2)),
        lyapunov=bool(in_lyapunov_region(omega, phi1, phi2)),
        mean_square=bool(in_mean_square_region(omega, phi1, phi2)),
        noisy_fht=bool(in_noisy_fht_region(omega, phi1, phi2)),
        pbest_convergence=bool(in_pbest_convergence_region(omega, phi1, phi2)),
        f1=float(f_one(omega, phi1, phi2)),
    )


@dataclass(frozen=True)
class RegionGrid:
    """Dense diagonal scan: phi1 = phi2 = phi, omega on the x axis."""

    omega: np.ndarray        # (res_omega,)
    phi: np.ndarray          # (res_phi,)
    f1: np.ndarray           # (res_omega, res_phi)
    deterministic: np.ndarray
    lyapunov: np.ndarray
    mean_square: np.ndarray
    noisy_fht: np.ndarray
    pbest_convergence: np.ndarray


def scan_regions(omega_range=(0.0, 1.0), phi_range=(0.0, 4.0), resolution=400) -> RegionGrid:
    """Region memberships on a resolution x resolution grid of cell centres."""
    if resolution < 2:
        raise ValueError("resolution must be >= 2 per axis")
    o_lo, o_hi = omega_range
    p_lo, p_hi = phi_range
    if not (o_hi > o_lo and p_hi > p_lo):
        raise ValueError("ranges must be increasing")
    omega = o_lo + (np.arange(resolution) + 0.5) * (o_hi - o_lo) / resolution
    phi = p_lo + (np.arange(resolution) + 0.5) * (p_hi - p_lo) / resolution
    OM, PH = np.meshgrid(omega, phi, indexing="ij")
    return RegionGrid(
        omega=omega,
        phi=phi,
        f1=f_one(OM, PH, PH),
        deterministic=in_deterministic_region(OM, PH, PH),
        lyapunov=in_lyapunov_region(OM, PH, PH),
        mean_square=in_mean_square_region(OM, PH, PH),
        noisy_fht=in_noisy_fht_region(OM, PH, PH),
        pbest_convergence=in_pbest_convergence_region(OM, PH, PH),
    )


REGIONS_CSV_HEADER = "omega,phi,f1,deterministic,lyapunov,mean_square,noisy_fht,pbest_convergence"


def write_regions_csv(grid: RegionGrid, path) -> None:
    """One row per cell (omega-major), reals at 9 significant digits,
    booleans as 0/1."""
    lines = [REGIONS_CSV_HEADER]
    for i, w in enumerate(grid.omega):
        for j, p in enumerate(grid.phi):
            lines.append("%.9g,%.9g,%.9g,%d,%d,%d,%d,%d" % (
                w, p, grid.f1[i, j],
                grid.deterministic[i, j], grid.lyapunov[i, j],
                grid.mean_square[i, j], grid.noisy_fht[i, j],
                grid.pbest_convergence[i, j]))
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


_SVG_LAYERS = [
    # (field, fill, label) painted large to small
    ("deterministic", "#c6dbef", "deterministic"),
    ("mean_square", "#9ecae1", "mean square"),
    ("noisy_fht", "#fdae6b", "noisy finite FHT"),
    ("pbest_convergence", "#a1d99b", "personal-best convergence"),
    ("lyapunov", "#756bb1", "Lyapunov"),
]


def _column_runs(mask_col: np.ndarray, phi: np.ndarray, cell: float):
    """Contiguous true runs of one grid column as (phi_lo, phi_hi) spans."""
    runs = []
    start = None
    for j, flag in enumerate(mask_col):
        if flag and start is None:
            start = phi[j] - cell / 2
        elif not flag and start is not None:
            runs.append((start, phi[j - 1] + cell / 2))
            start = None
    if start is not None:
        runs.append((start, phi[-1] + cell / 2))
    return runs


def render_regions_svg(grid: RegionGrid, path, width=640, height=480) -> None:
    """Filled nested-region rendering with labelled omega/phi axes."""
    margin = 50
    o_lo = grid.omega[0] - (grid.omega[1] - grid.omega[0]) / 2
    o_hi = grid.omega[-1] + (grid.omega[1] - grid.omega[0]) / 2
    p_lo = grid.phi[0] - (grid.phi[1] - grid.phi[0]) / 2
    p_hi = grid.phi[-1] + (grid.phi[1] - grid.phi[0]) / 2

    def sx(w):
        return margin + (w - o_lo) / (o_hi - o_lo) * (width - 2 * margin)

    def sy(p):
        return height - margin - (p - p_lo) / (p_hi - p_lo) * (height - 2 * margin)

    cell_o = grid.omega[1] - grid.omega[0]
    cell_p = grid.phi[1] - grid.phi[0]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for field, fill, _label in _SVG_LAYERS:
        mask = getattr(grid, field)
        rects = []
        for i, w in enumerate(grid.omega):
            for lo, hi in _column_runs(mask[i], grid.phi, cell_p):
                x = sx(w - cell_o / 2)
                y = sy(hi)
                rects.append(f'<rect x="{x:.2f}" y="{y:.2f}" '
                             f'width="{sx(w + cell_o / 2) - x:.2f}" '
                             f'height="{sy(lo) - y:.2f}" fill="{fill}" fill-opacity="0.85"/>')
        parts.append(f'<g>{"".join(rects)}</g>')
    ax = (f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
          f'y2="{height - margin}" stroke="black"/>'
          f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" '
          f'stroke="black"/>')
    parts.append(ax)
    parts.append(f'<text x="{width / 2:.0f}" y="{height - 12}" font-size="16" '
                 f'text-anchor="middle">&#969;</text>')
    parts.append(f'<text x="16" y="{height / 2:.0f}" font-size="16" '
                 f'text-anchor="middle">&#966;</text>')
    for k, (field, fill, label) in enumerate(_SVG_LAYERS):
        y = margin + 18 * k
        parts.append(f'<rect x="{width - margin - 170}" y="{y}" width="12" height="12" '
                     f'fill="{fill}"/>')
        parts.append(f'<text x="{width - margin - 152}" y="{y + 11}" font-size="12">'
                     f'{label}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")
