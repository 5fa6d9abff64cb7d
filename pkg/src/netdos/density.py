"""Spectral histograms and mollified densities from Chebyshev moments.

Bin masses use the closed-form integral of the weighted Chebyshev dual basis
over each bin: with theta = arccos(x),

    int_a^b w_0(x) T_0(x) dx = (theta_a - theta_b) / pi
    int_a^b w_m(x) T_m(x) dx = (2/pi) (sin(m theta_a) - sin(m theta_b)) / m

The 1/sqrt(1-x^2) weight makes pointwise sampling of the series unstable at
the endpoints, while these integrals are exact; per-bin masses also telescope
so the total mass is d_0 regardless of damping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kpm import MODE_GLOBAL, MODE_PER_NODE, ChebMoments, jackson_coefficients


@dataclass
class SpectralHistogram:
    """Bin edges in original eigenvalue units plus bin masses.

    masses is (B,) for a global density or (n, B) for per-node rows;
    normalization is the corresponding total mass (scalar or per-row array).
    """

    edges: np.ndarray
    masses: np.ndarray
    normalization: object = 1.0

    @property
    def bins(self) -> int:
        return int(self.edges.shape[0] - 1)

    def l1_distance(self, other: "SpectralHistogram") -> float:
        if not np.allclose(self.edges, other.edges):
            raise ValueError("histograms use different bin edges")
        return float(np.abs(self.masses - other.masses).sum())


def bin_index(edges, lam) -> int:
    """Bin receiving a point mass at lam (matches np.histogram conventions)."""
    i = int(np.searchsorted(edges, lam, side="right")) - 1
    return min(max(i, 0), len(edges) - 2)


def cheb_bin_masses(m_max, scaled_edges) -> np.ndarray:
    """Closed-form table W[m, b] = integral of the dual basis over bin b."""
    theta = np.arccos(np.clip(scaled_edges, -1.0, 1.0))
    out = np.empty((m_max + 1, len(scaled_edges) - 1))
    out[0] = (theta[:-1] - theta[1:]) / np.pi
    if m_max >= 1:
        m = np.arange(1, m_max + 1, dtype=np.float64)[:, None]
        s = np.sin(m * theta[None, :])
        out[1:] = (2.0 / np.pi) * (s[:, :-1] - s[:, 1:]) / m
    return out


def histogram_from_moments(moments: ChebMoments, bins=50, damping=True,
                           filter_adjustment=None, edges=None,
                           negativity_tol=None) -> SpectralHistogram:
    """Integrate the (optionally Jackson-damped) moment series over bins.

    Default edges split the operator's scaled domain [-1, 1] into equal bins,
    reported in original eigenvalue units. filter_adjustment rescales the
    masses to the deflated dimension and re-inserts the removed spike mass at
    its eigenvalues, so displayed mass still totals the normalization.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    smap = moments.scale_map
    if edges is None:
        edges = smap.from_scaled(np.linspace(-1.0, 1.0, bins + 1))
    else:
        edges = np.asarray(edges, dtype=np.float64)
        if edges.ndim != 1 or edges.shape[0] < 2 or np.any(np.diff(edges) <= 0):
            raise ValueError("edges must be ascending with at least two entries")
    table = cheb_bin_masses(moments.m_max, smap.to_scaled(edges))
    coef = moments.values.copy()
    if damping:
        coef = coef * jackson_coefficients(moments.m_max)
    masses = coef @ table

    if moments.mode == MODE_GLOBAL:
        normalization = float(coef[0])
    else:
        normalization = coef[..., 0].copy()

    if filter_adjustment is not None and filter_adjustment.deflated_dim:
        if moments.mode != MODE_GLOBAL:
            raise ValueError("spike re-insertion applies to global moments only")
        n_total = filter_adjustment.total_dim
        r = filter_adjustment.deflated_dim
        masses = masses * ((n_total - r) / n_total)
        for lam, count in sorted(filter_adjustment.removed.items()):
            masses[bin_index(edges, lam)] += count / n_total

    if negativity_tol is None and damping:
        negativity_tol = 1e-3
    if negativity_tol is not None and masses.min() < -negativity_tol:
        raise ValueError(
            f"bin mass {masses.min():.3e} below -{negativity_tol:g}; "
            "series is not a valid density at this resolution")
    return SpectralHistogram(edges=edges, masses=masses, normalization=normalization)


@dataclass
class SmoothedDensity:
    """Moment series convolved with a Gaussian mollifier of width sigma."""

    moments: ChebMoments
    sigma: float
    kernel: str = "gaussian"
    damping: bool = True

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.kernel != "gaussian":
            raise ValueError(f"unsupported kernel {self.kernel!r}")
        if self.moments.mode != MODE_GLOBAL:
            raise ValueError("smoothed densities are defined for global moments")


def evaluate_density(sd: SmoothedDensity, at, quad_points=None) -> np.ndarray:
    """Evaluate (K_sigma * mu)(lambda) at the given original-unit points.

    Substituting x = cos(theta) removes the endpoint weight singularity, so
    the series integrand is smooth and Gauss-Legendre quadrature in theta
    converges quickly; the node count scales with the series degree.
    """
    moments = sd.moments
    m_max = moments.m_max
    if quad_points is None:
        quad_points = max(4 * (m_max + 1), 512)
    coef = moments.values.copy()
    if sd.damping:
        coef = coef * jackson_coefficients(m_max)
    coef *= 2.0 / np.pi
    coef[0] = moments.values[0] / np.pi

    nodes, weights = np.polynomial.legendre.leggauss(quad_points)
    theta = 0.5 * np.pi * (nodes + 1.0)
    weights = 0.5 * np.pi * weights
    series = coef @ np.cos(np.arange(m_max + 1)[:, None] * theta[None, :])

    smap = moments.scale_map
    lam_nodes = smap.from_scaled(np.cos(theta))
    at = np.atleast_1d(np.asarray(at, dtype=np.float64))
    diff = (at[:, None] - lam_nodes[None, :]) / sd.sigma
    kern = np.exp(-0.5 * diff * diff) / (sd.sigma * np.sqrt(2.0 * np.pi))
    return kern @ (weights * series)
