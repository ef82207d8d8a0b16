"""The pulsed-diffusion step: heat semigroup composed with a transfer operator.

Two implementations of the advection half:

* ``cat_transfer`` -- exact integer relabeling c_k -> c at A^{-T}k, valid for
  shear-free maps; an isometry up to modes escaping the stored square.
* ``general_transfer`` -- for shear-perturbed maps.  The linear part is the
  same exact relabeling into an enlarged mode square; each sine shear is then
  a *constant shift per physical row*, i.e. an exact phase multiplication in a
  mixed (spectral x physical) representation; the result is Galerkin-truncated
  back to the stored square with the discarded mass reported.

Both halves preserve the mean mode exactly.  The heat semigroup acts as the
Fourier multiplier exp(-4 pi^2 kappa |k|^2), the constant fixed by the
e^{2 pi i k.x} basis convention (so the random-shift realization with
Normal(0, 2 kappa I) shifts reproduces it exactly).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.fft import next_fast_len

from .fields import ScalarField, SparseField, make_field, _mode_grids
from .torusmaps import IntMatrix2, PerturbedCatMap, ShearStep

__all__ = [
    "HEAT_CONSTANT",
    "TruncationOverflow",
    "heat",
    "cat_transfer",
    "general_transfer",
    "pulsed_step",
    "PulseRecord",
    "PulseTrack",
    "iterate_pulses",
]

HEAT_CONSTANT = 4.0 * np.pi ** 2  # multiplier exponent: exp(-HEAT_CONSTANT * kappa * |k|^2)


class TruncationOverflow(RuntimeError):
    """A transfer pushed modes out of the stored square.

    Carries the truncated field and the lost L^2 mass so the caller can either
    enlarge the square or accept the documented truncation.
    """

    def __init__(self, lost_mass: float, field: ScalarField, step: int | None = None):
        msg = f"transfer lost {lost_mass:.3e} of squared mass beyond the stored square"
        if step is not None:
            msg += f" at step {step}"
        super().__init__(msg)
        self.lost_mass = lost_mass
        self.field = field
        self.step = step


# ---------------------------------------------------------------------------
# heat semigroup

def heat(phi: ScalarField, kappa: float) -> ScalarField:
    """Apply exp(kappa * Laplacian): scale c_k by exp(-4 pi^2 kappa |k|^2)."""
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    if kappa == 0:
        return phi
    _, _, _, R2 = _mode_grids(phi.max_mode)
    return make_field(phi.coeffs * np.exp(-HEAT_CONSTANT * kappa * R2),
                      phi.max_mode, phi.grid_size)


def _heat_sparse(modes: dict, kappa: float) -> dict:
    if kappa == 0:
        return dict(modes)
    return {k: c * np.exp(-HEAT_CONSTANT * kappa * (k[0] * k[0] + k[1] * k[1]))
            for k, c in modes.items()}


# ---------------------------------------------------------------------------
# exact relabeling for the linear part

@lru_cache(maxsize=64)
def relabel_indices(K: int, B: IntMatrix2):
    """Flat gather/scatter indices for c_k -> c at B k within one square.

    Returns (src_flat, dst_flat, lost_flat): in-square source indices, their
    destinations, and the sources whose images escape.
    """
    KX, KY, _, _ = _mode_grids(K)
    dx = B.a * KX + B.b * KY
    dy = B.c * KX + B.d * KY
    inb = (np.abs(dx) <= K) & (np.abs(dy) <= K)
    src = np.flatnonzero(inb)
    n = 2 * K + 1
    dst = (dx.ravel()[src] + K) * n + (dy.ravel()[src] + K)
    lost = np.flatnonzero(~inb)
    return src, dst, lost


def _relabel_lossy(phi: ScalarField, m: IntMatrix2) -> tuple[ScalarField, float]:
    K = phi.max_mode
    B = m.inv_transpose()
    src, dst, lostidx = relabel_indices(K, B)
    flat = phi.coeffs.ravel()
    out = np.zeros_like(flat)
    out[dst] = flat[src]
    lost = float(np.sum(np.abs(flat[lostidx]) ** 2))
    return make_field(out.reshape(phi.coeffs.shape), K, phi.grid_size), lost


def cat_transfer(phi: ScalarField, m: IntMatrix2) -> ScalarField:
    """Exact mode relabeling c_k -> c at A^{-T}k (an L^2 isometry).

    Raises :class:`TruncationOverflow` if any populated mode maps outside the
    stored square; the exception carries the truncated field.
    """
    out, lost = _relabel_lossy(phi, m)
    if lost > 0.0:
        raise TruncationOverflow(lost, out)
    return out


# ---------------------------------------------------------------------------
# shears in the mixed (spectral x physical) representation

def _sideband_margin(z: float) -> int:
    # Bessel sidebands J_n(z) are below double precision past ~1.15 z + 64
    return int(np.ceil(1.15 * abs(z))) + 64


def _apply_shear_spectral(C: np.ndarray, cx: int, cy: int, s: ShearStep):
    """Exact action of L_S = (. o S^{-1}) on a centered coefficient block.

    For a horizontal shear the x-shift is constant on each physical row y, so
    in the (kx, y) representation the operator is the unimodular phase
    exp(-2 pi i kx a sin(2 pi m y)) -- exact for band-limited input, with the
    y-grid sized to hold every numerically relevant sideband.
    """
    a, m = s.amplitude, s.frequency
    if a == 0.0:
        return C, cx, cy
    if s.axis == "horizontal":
        z = 2.0 * np.pi * cx * abs(a)
        cy2 = cy + m * _sideband_margin(z)
        Ny = next_fast_len(2 * cy2 + 1)
        idx_in = np.arange(-cy, cy + 1) % Ny
        Z = np.zeros((2 * cx + 1, Ny), dtype=complex)
        Z[:, idx_in] = C
        mixed = np.fft.ifft(Z, axis=1) * Ny
        y = np.arange(Ny) / Ny
        kx = np.arange(-cx, cx + 1)[:, None]
        mixed *= np.exp(-2j * np.pi * kx * a * np.sin(2.0 * np.pi * m * y)[None, :])
        Z = np.fft.fft(mixed, axis=1) / Ny
        idx_out = np.arange(-cy2, cy2 + 1) % Ny
        return Z[:, idx_out], cx, cy2
    else:
        z = 2.0 * np.pi * cy * abs(a)
        cx2 = cx + m * _sideband_margin(z)
        Nx = next_fast_len(2 * cx2 + 1)
        idx_in = np.arange(-cx, cx + 1) % Nx
        Z = np.zeros((Nx, 2 * cy + 1), dtype=complex)
        Z[idx_in, :] = C
        mixed = np.fft.ifft(Z, axis=0) * Nx
        x = np.arange(Nx) / Nx
        ky = np.arange(-cy, cy + 1)[None, :]
        mixed *= np.exp(-2j * np.pi * ky * a * np.sin(2.0 * np.pi * m * x)[:, None])
        Z = np.fft.fft(mixed, axis=0) / Nx
        idx_out = np.arange(-cx2, cx2 + 1) % Nx
        return Z[idx_out, :], cx2, cy


def general_transfer(phi: ScalarField, pcm: PerturbedCatMap) -> tuple[ScalarField, float]:
    """Galerkin truncation of phi o f^{-1}; returns (field, lost squared mass).

    The linear part relabels into a mode square large enough to hold the full
    image, shears act exactly as mixed-representation phases, and only the
    final truncation back to |k| <= K discards mass.
    """
    K = phi.max_mode
    B = pcm.matrix.inv_transpose()
    if not np.any(phi.coeffs):
        return phi, 0.0
    Wx = (abs(B.a) + abs(B.b)) * K
    Wy = (abs(B.c) + abs(B.d)) * K
    KX, KY, _, _ = _mode_grids(K)
    dx = (B.a * KX + B.b * KY).ravel()
    dy = (B.c * KX + B.d * KY).ravel()
    work = np.zeros((2 * Wx + 1, 2 * Wy + 1), dtype=complex)
    work[dx + Wx, dy + Wy] = phi.coeffs.ravel()
    cx, cy = Wx, Wy
    total_before = float(np.sum(np.abs(phi.coeffs) ** 2))
    for s in pcm.shears:
        work, cx, cy = _apply_shear_spectral(work, cx, cy, s)
    out = work[cx - K:cx + K + 1, cy - K:cy + K + 1]
    kept = float(np.sum(np.abs(out) ** 2))
    lost = max(total_before - kept, 0.0)
    return make_field(out, K, phi.grid_size), lost


# ---------------------------------------------------------------------------
# pulsed step and pulse iteration

def pulsed_step(phi: ScalarField, pcm: PerturbedCatMap, kappa: float,
                on_overflow: str = "raise") -> tuple[ScalarField, float]:
    """One step of e^{kappa Delta} o L_f; returns (field, lost squared mass).

    Shear-free maps use the exact relabeling fast path and, with
    ``on_overflow='raise'``, surface escaping modes as TruncationOverflow.
    """
    if pcm.is_pure:
        out, lost = _relabel_lossy(phi, pcm.matrix)
        if lost > 0.0 and on_overflow == "raise":
            raise TruncationOverflow(lost, heat(out, kappa))
    else:
        out, lost = general_transfer(phi, pcm)
    return heat(out, kappa), lost


@dataclass(frozen=True)
class PulseRecord:
    n: int
    l2: float
    h1: float
    hm1: float
    lost: float


@dataclass
class PulseTrack:
    records: list
    aborted: bool
    fields: list | None = None

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


def _record(n: int, f, lost: float) -> PulseRecord:
    if isinstance(f, SparseField):
        return PulseRecord(n, f.l2_norm(), f.sobolev_seminorm(1.0),
                           f.sobolev_seminorm(-1.0), lost)
    from .fields import l2_norm, sobolev_seminorm
    return PulseRecord(n, l2_norm(f), sobolev_seminorm(f, 1.0),
                       sobolev_seminorm(f, -1.0), lost)


def _sparse_relabel(modes: dict, B: IntMatrix2) -> dict:
    return {B.apply_int(k): c for k, c in modes.items()}


def iterate_pulses(b: ScalarField, pcm: PerturbedCatMap, kappa: float, n_max: int,
                   on_overflow: str = "abort", keep_fields: bool = False,
                   unbounded: bool = False) -> PulseTrack:
    """Iterate phi_0 = b, phi_{n+1} = pulsed_step(phi_n), recording norms.

    ``on_overflow='abort'`` stops at the last step that fit in the square
    (track.aborted marks the cut); ``'accept'`` continues with the truncated
    field and accounts the loss.  ``unbounded=True`` switches shear-free maps
    to an exact sparse relabeling with no mode bound at all.
    """
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    if unbounded and not pcm.is_pure:
        raise ValueError("unbounded iteration is exact only for shear-free maps")
    records, fields = [], [] if keep_fields else None
    if unbounded:
        B = pcm.matrix.inv_transpose()
        K = b.max_mode
        cur = SparseField({(int(i) - K, int(j) - K): complex(b.coeffs[i, j])
                           for i, j in np.argwhere(b.coeffs != 0)})
        for n in range(n_max + 1):
            records.append(_record(n, cur, 0.0))
            if keep_fields:
                fields.append(cur)
            if n == n_max:
                break
            cur = SparseField(_heat_sparse(_sparse_relabel(cur.modes, B), kappa))
        return PulseTrack(records, aborted=False, fields=fields)

    cur = b
    aborted = False
    lost = 0.0
    for n in range(n_max + 1):
        records.append(_record(n, cur, lost))
        if keep_fields:
            fields.append(cur)
        if n == n_max:
            break
        try:
            cur, lost = pulsed_step(cur, pcm, kappa,
                                    on_overflow="raise" if on_overflow == "abort" else "accept")
        except TruncationOverflow:
            aborted = True
            break
    return PulseTrack(records, aborted=aborted, fields=fields)
