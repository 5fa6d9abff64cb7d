"""Gauss quadrature via Lanczos: per-probe tridiagonalization whose Ritz
values and first-row weights form a Gauss rule for z^T f(H) z.

Full reorthogonalization is always on: desk-scale step counts make the
O(n M^2) cost acceptable and it eliminates the ghost eigenvalues that would
otherwise corrupt spike estimates. A vanishing residual is treated as an
exhausted Krylov space (the truncated rule is then exact), not a failure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .density import SpectralHistogram
from .errors import SpectralRangeError
from .kpm import MODE_GLOBAL, ChebMoments, chebyshev_values
from .operators import IDENTITY_MAP
from .probes import ProbeMatrix

BREAKDOWN_RTOL = 1e-12


@dataclass
class LanczosFactorization:
    """Tridiagonal coefficients of H restricted to a Krylov space."""

    alphas: np.ndarray
    betas: np.ndarray
    z_norm: float
    basis: np.ndarray | None
    exhausted: bool

    @property
    def steps(self) -> int:
        return int(self.alphas.shape[0])

    def ritz_values(self) -> np.ndarray:
        if self.steps == 1:
            return self.alphas.copy()
        return eigh_tridiagonal(self.alphas, self.betas, eigvals_only=True)


def lanczos_factorize(op, z, steps, keep_basis=False, threads=1) -> LanczosFactorization:
    """Run `steps` Lanczos iterations from z with full reorthogonalization."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    z = np.asarray(z, dtype=np.float64)
    z_norm = float(np.linalg.norm(z))
    if z_norm == 0.0:
        raise ValueError("starting vector must be nonzero")

    n = z.shape[0]
    steps = min(steps, n)
    basis = np.empty((n, steps))
    basis[:, 0] = z / z_norm
    alphas = np.empty(steps)
    betas = np.empty(max(steps - 1, 0))
    exhausted = False
    hnorm = 0.0
    k = 0
    for j in range(steps):
        q = basis[:, j]
        w = op.apply(q, threads=threads)
        alphas[j] = float(q @ w)
        if not np.isfinite(alphas[j]):
            raise SpectralRangeError("NaN in Lanczos coefficients", iterations=j + 1)
        hnorm = max(hnorm, abs(alphas[j]) + (betas[j - 1] if j > 0 else 0.0))
        k = j + 1
        if j == steps - 1:
            break
        # Two classical Gram-Schmidt passes against the whole basis.
        q_block = basis[:, : j + 1]
        for _ in range(2):
            w -= q_block @ (q_block.T @ w)
        beta = float(np.linalg.norm(w))
        if not np.isfinite(beta):
            raise SpectralRangeError("NaN in Lanczos residual", iterations=j + 1)
        if beta <= BREAKDOWN_RTOL * max(hnorm, 1e-300):
            exhausted = True
            break
        betas[j] = beta
        hnorm = max(hnorm, beta)
        basis[:, j + 1] = w / beta

    return LanczosFactorization(alphas=alphas[:k].copy(), betas=betas[: k - 1].copy(),
                                z_norm=z_norm,
                                basis=basis[:, :k].copy() if keep_basis else None,
                                exhausted=exhausted)


@dataclass
class RitzQuadrature:
    """Gauss rule: z^T f(H) z ~= z_norm_sq * sum_i weights_i f(nodes_i)."""

    nodes: np.ndarray
    weights: np.ndarray
    z_norm_sq: float
    exhausted: bool = False


def lanczos_quadrature(op, z, steps, threads=1) -> RitzQuadrature:
    """M-step Gauss rule for the spectral measure of H weighted by z.

    Exact for polynomials of degree <= 2M - 1; on breakdown the truncated
    rule is returned (exact, Krylov space exhausted).
    """
    fact = lanczos_factorize(op, z, steps, keep_basis=False, threads=threads)
    if fact.steps == 1:
        nodes = fact.alphas.copy()
        weights = np.ones(1)
    else:
        nodes, vecs = eigh_tridiagonal(fact.alphas, fact.betas)
        weights = vecs[0, :] ** 2
    return RitzQuadrature(nodes=nodes, weights=weights,
                          z_norm_sq=fact.z_norm ** 2, exhausted=fact.exhausted)


def gql_dos(op, probes: ProbeMatrix, steps, bins=50, spectral_range=None,
            threads=1) -> SpectralHistogram:
    """Average per-probe Ritz point masses into a histogram of the density."""
    if op.n != probes.n:
        raise ValueError("probe dimension does not match operator")
    all_nodes = []
    all_weights = []
    for j in range(probes.nz):
        quad = lanczos_quadrature(op, probes.columns[:, j], steps, threads=threads)
        all_nodes.append(quad.nodes)
        all_weights.append(quad.weights / probes.nz)
    nodes = np.concatenate(all_nodes)
    weights = np.concatenate(all_weights)
    if spectral_range is None:
        lo, hi = float(nodes.min()), float(nodes.max())
        pad = 1e-9 * max(hi - lo, 1.0)
        spectral_range = (lo - pad, hi + pad)
    edges = np.linspace(spectral_range[0], spectral_range[1], bins + 1)
    masses, _ = np.histogram(nodes, bins=edges, weights=weights)
    return SpectralHistogram(edges=edges, masses=masses,
                             normalization=float(weights.sum()))


def gql_pdos(op, node, steps, threads=1) -> RitzQuadrature:
    """Quadrature for the per-node density (start vector e_node)."""
    if not 0 <= node < op.n:
        raise ValueError(f"node {node} out of range")
    z = np.zeros(op.n)
    z[node] = 1.0
    return lanczos_quadrature(op, z, steps, threads=threads)


def quadrature_to_cheb_moments(quad: RitzQuadrature, m_max, scale_map=None,
                               tol=1e-8) -> ChebMoments:
    """Convert a Ritz rule to Chebyshev moments d_m = sum_i w_i T_m(x_i)."""
    smap = scale_map if scale_map is not None else IDENTITY_MAP
    x = smap.to_scaled(quad.nodes)
    if np.any(x < -1.0 - tol) or np.any(x > 1.0 + tol):
        worst = float(x[np.argmax(np.abs(x))])
        raise ValueError(f"quadrature node {worst} outside [-1, 1] after scaling")
    values = chebyshev_values(m_max, np.clip(x, -1.0, 1.0)) @ quad.weights
    return ChebMoments(mode=MODE_GLOBAL, values=values, scale_map=smap,
                       probe_meta={"kind": "gql", "nodes": int(quad.nodes.shape[0])})
