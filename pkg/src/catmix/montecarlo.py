"""Stochastic validation of the deterministic series.

Samples the forced chain g_{n+1} = L_{f,kappa} g_n + omega_{n+1} b with
counter-based randomness (Philox keyed by (seed, stream), block-counter per
step), so every draw is reproducible independent of scheduling or chunking.
Also houses the random-shift realization of the heat semigroup: averaging
phi(x + omega) over omega ~ Normal(0, 2 kappa I) converges to e^{kappa Delta} phi.
"""

from __future__ import annotations

import numpy as np

from .fields import ScalarField, _mode_grids, make_field, selector_mask, zero_field
from .torusmaps import PerturbedCatMap
from .transfer import HEAT_CONSTANT, pulsed_step, relabel_indices

__all__ = [
    "omega_normal",
    "sample_chain",
    "mc_expected_projection",
    "random_shift_heat",
]


def omega_normal(seed: int, stream: int, step: int, size=None):
    """Standard normals from a Philox block keyed by (seed, stream) at block
    counter ``step``; identical values for identical arguments, always."""
    bg = np.random.Philox(key=np.array([seed % 2**64, stream % 2**64], dtype=np.uint64),
                          counter=np.array([0, 0, 0, step % 2**64], dtype=np.uint64))
    return np.random.Generator(bg).standard_normal(size)


def sample_chain(b: ScalarField, pcm: PerturbedCatMap, kappa: float,
                 n_steps: int, seed: int, stream: int = 0) -> ScalarField:
    """Run the forced chain from g_0 = 0 for n_steps; deterministic in (seed, stream).

    Mass pushed beyond the stored square is truncated (the usual documented
    loss); with the forcing at low modes this does not touch low-mode statistics
    for shear-free maps.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    if kappa <= 0:
        raise ValueError("the sampled chain requires kappa > 0")
    g = zero_field(b.max_mode, b.grid_size)
    for n in range(1, n_steps + 1):
        g, _ = pulsed_step(g, pcm, kappa, on_overflow="accept")
        g = g + float(omega_normal(seed, stream, n)) * b
    return g


def _batched_pure_chain_proj2(b: ScalarField, pcm: PerturbedCatMap, kappa: float,
                              sel_mask: np.ndarray, n_samples: int, n_steps: int,
                              seed: int, chunk: int = 200) -> np.ndarray:
    """||project(g_i, sel)||^2 for n_samples independent chains of a shear-free
    map, run as batched exact relabeling.  Matches sample_chain stream i."""
    K = b.max_mode
    n = 2 * K + 1
    src, dst, _ = relabel_indices(K, pcm.matrix.inv_transpose())
    _, _, _, R2 = _mode_grids(K)
    mult = np.exp(-HEAT_CONSTANT * kappa * R2).ravel()
    bflat = b.coeffs.ravel()
    mflat = sel_mask.ravel()
    out = np.empty(n_samples)
    for lo in range(0, n_samples, chunk):
        hi = min(lo + chunk, n_samples)
        m = hi - lo
        om = np.empty((m, n_steps + 1))
        for i in range(m):
            for step in range(1, n_steps + 1):
                om[i, step] = omega_normal(seed, lo + i, step)
        state = np.zeros((m, n * n), dtype=complex)
        for step in range(1, n_steps + 1):
            new = np.zeros_like(state)
            new[:, dst] = state[:, src]
            new *= mult
            new += om[:, step, None] * bflat
            state = new
        out[lo:hi] = np.sum(np.abs(state[:, mflat]) ** 2, axis=1)
    return out


def mc_expected_projection(b: ScalarField, pcm: PerturbedCatMap, kappa: float,
                           sel, n_samples: int, n_steps: int, seed: int,
                           chunk: int = 200):
    """Sample mean and standard error of ||project(g, sel)||^2 over independent
    chains (stream = sample index)."""
    if n_samples < 2:
        raise ValueError("need at least two samples for a standard error")
    mask = selector_mask(sel, b.max_mode)
    if pcm.is_pure:
        vals = _batched_pure_chain_proj2(b, pcm, kappa, mask, n_samples, n_steps,
                                         seed, chunk)
    else:
        vals = np.empty(n_samples)
        mflat = mask.ravel()
        for i in range(n_samples):
            g = sample_chain(b, pcm, kappa, n_steps, seed, stream=i)
            vals[i] = np.sum(np.abs(g.coeffs.ravel()[mflat]) ** 2)
    mean = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / np.sqrt(n_samples))
    return mean, stderr


def random_shift_heat(phi: ScalarField, kappa: float, n_samples: int,
                      seed: int, stream: int = 0) -> ScalarField:
    """Average of phi shifted by omega_j ~ Normal(0, 2 kappa I_2).

    Each shift multiplies c_k by the unimodular phase e^{2 pi i k.omega}, so a
    single sample is an L^2 isometry and the sample mean estimates the heat
    multiplier e^{-4 pi^2 kappa |k|^2} unbiasedly, mode by mode.
    """
    if kappa <= 0:
        raise ValueError("random-shift realization requires kappa > 0")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    K = phi.max_mode
    KX, KY, _, _ = _mode_grids(K)
    acc = np.zeros_like(phi.coeffs)
    scale = np.sqrt(2.0 * kappa)
    for j in range(n_samples):
        w = omega_normal(seed, stream, j, size=2) * scale
        acc = acc + np.exp(2j * np.pi * (KX * w[0] + KY * w[1]))
    return make_field(phi.coeffs * (acc / n_samples), K, phi.grid_size)
