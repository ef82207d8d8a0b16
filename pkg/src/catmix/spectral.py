"""Spectral distributions: the probability view of Fourier mass.

P_phi({k}) = |c_k|^2 / ||phi||^2 turns a field into a law on Z^2; its mean
(spectral centroid) and variance quantify how localized the field is around a
single wavenumber, which is the whole game for pulse tracking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import ScalarField, SparseField
from .torusmaps import IntMatrix2, PerturbedCatMap
from .transfer import cat_transfer, iterate_pulses

__all__ = [
    "SpectralDistribution",
    "spectral_distribution",
    "centroid_pushforward_check",
    "chebyshev_tail",
    "pulse_sequence",
    "TrackRow",
    "centroid_variance_track",
]


@dataclass(frozen=True)
class SpectralDistribution:
    total_mass: float
    modes: np.ndarray      # (m, 2) integer wavenumbers carrying mass
    pmf: np.ndarray        # (m,)
    centroid: np.ndarray   # (2,)
    variance: float

    def second_moment_about(self, z) -> float:
        z = np.asarray(z, dtype=float)
        d = self.modes.astype(float) - z
        return float(np.sum(np.sum(d * d, axis=1) * self.pmf))


def _mass_table(phi) -> tuple[np.ndarray, np.ndarray]:
    """(modes, |c|^2) over populated wavenumbers, for dense or sparse fields."""
    if isinstance(phi, SparseField):
        ks, cs = phi.mode_arrays()
        return ks, np.abs(cs) ** 2
    K = phi.max_mode
    idx = np.argwhere(phi.coeffs != 0)
    w = np.abs(phi.coeffs[idx[:, 0], idx[:, 1]]) ** 2
    return idx - K, w


def spectral_distribution(phi) -> SpectralDistribution:
    """Empirical law of the Fourier mass; rejects the zero field."""
    modes, w = _mass_table(phi)
    total = float(np.sum(w))
    if total <= 0.0:
        raise ValueError("spectral distribution of the zero field is undefined")
    pmf = w / total
    centroid = modes.astype(float).T @ pmf
    d = modes.astype(float) - centroid
    variance = float(np.sum(np.sum(d * d, axis=1) * pmf))
    return SpectralDistribution(total, modes, pmf, centroid, variance)


def centroid_pushforward_check(phi: ScalarField, m: IntMatrix2):
    """(centroid after exact relabeling, A^{-T} centroid before); equal in
    exact arithmetic since the relabeling is a mass-preserving permutation."""
    lhs = spectral_distribution(cat_transfer(phi, m)).centroid
    B = m.inv_transpose().as_array()
    rhs = B @ spectral_distribution(phi).centroid
    return lhs, rhs


def chebyshev_tail(phi, a: float):
    """(observed tail P(|X - EX| > a), Chebyshev bound Var/a^2)."""
    if a <= 0:
        raise ValueError("a must be positive")
    dist = spectral_distribution(phi)
    d = dist.modes.astype(float) - dist.centroid
    r = np.sqrt(np.sum(d * d, axis=1))
    observed = float(np.sum(dist.pmf[r > a]))
    return observed, dist.variance / (a * a)


def pulse_sequence(m: IntMatrix2, k0: tuple[int, int], n_max: int) -> list[tuple[int, int]]:
    """Exact integer iterates k_n = (A^{-T})^n k_0 (arbitrary-precision ints)."""
    kx, ky = int(k0[0]), int(k0[1])
    if kx == 0 and ky == 0:
        raise ValueError("k0 must be nonzero")
    B = m.inv_transpose()
    out = [(kx, ky)]
    k = (kx, ky)
    for _ in range(n_max):
        k = B.apply_int(k)
        out.append(k)
    return out


@dataclass(frozen=True)
class TrackRow:
    n: int
    drift: float       # |E X_n - k_n|
    variance: float
    l2: float
    h1: float
    hm1: float


def centroid_variance_track(k0: tuple[int, int], pcm: PerturbedCatMap, kappa: float,
                            n_max: int, max_mode: int = 128,
                            unbounded: bool | None = None) -> list[TrackRow]:
    """Per-step centroid drift off the exact pulse k_n and spectral variance,
    starting from the pure mode e_{k0}.

    Shear-free maps default to the exact sparse path (no mode-square bound);
    perturbed maps run the dense pipeline at ``max_mode`` and the track stops
    early if the pulse leaves the square.
    """
    from .fields import new_pure_mode
    if unbounded is None:
        unbounded = pcm.is_pure
    b = new_pure_mode(k0, max_mode)
    track = iterate_pulses(b, pcm, kappa, n_max, on_overflow="abort",
                           keep_fields=True, unbounded=unbounded)
    ks = pulse_sequence(pcm.matrix, k0, len(track.records) - 1)
    rows = []
    lost_cum = 0.0
    for rec, f, k in zip(track.records, track.fields, ks):
        lost_cum += rec.lost
        if rec.l2 == 0.0 or lost_cum > 1e-6:
            break  # pulse dissipated, or the square has materially truncated it
        dist = spectral_distribution(f)
        drift = float(np.hypot(dist.centroid[0] - k[0], dist.centroid[1] - k[1]))
        rows.append(TrackRow(rec.n, drift, dist.variance, rec.l2, rec.h1, rec.hm1))
    return rows
