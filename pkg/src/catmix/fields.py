"""Fourier-space scalar fields on the 2-torus.

A field is a mean-zero trigonometric polynomial

    phi(x) = sum_k c_k e^{2 pi i (k . x)},    k in Z^2,

stored as a dense coefficient square over |kx|, |ky| <= K.  This module owns
the field type, every norm and seminorm used downstream (L^2, homogeneous
H^s, the cone-anisotropic norm and its dyadic-block variant), spectral
projections, grid transforms and the portable CSV/JSON serialization.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Union

import numpy as np

__all__ = [
    "ScalarField",
    "SparseField",
    "Ball",
    "Annulus",
    "ExpShell",
    "Sector",
    "PulseSet",
    "Complement",
    "HighPass",
    "ModeSelector",
    "make_field",
    "zero_field",
    "new_pure_mode",
    "random_field",
    "l2_norm",
    "sobolev_seminorm",
    "anisotropic_norm",
    "dyadic_cone_norm",
    "selector_mask",
    "project",
    "sample_on_grid",
    "field_from_grid",
    "save_field",
    "load_field",
]

FLOAT_FMT = "%.17g"


def _default_grid(max_mode: int) -> int:
    # smallest even grid with dealiasing headroom
    return 2 * max_mode + 2


@dataclass(frozen=True)
class ScalarField:
    """Dense mean-zero spectral field; ``coeffs[kx + K, ky + K]`` is c_(kx,ky)."""

    max_mode: int
    grid_size: int
    coeffs: np.ndarray

    def __post_init__(self):
        K = self.max_mode
        if K < 1:
            raise ValueError("max_mode must be a positive integer")
        n = self.grid_size
        if n % 2 != 0 or n < 2 * K + 2:
            raise ValueError(f"grid_size must be even and >= 2K+2, got {n} for K={K}")
        if self.coeffs.shape != (2 * K + 1, 2 * K + 1):
            raise ValueError("coefficient array must have shape (2K+1, 2K+1)")

    def __add__(self, other: "ScalarField") -> "ScalarField":
        if other.max_mode != self.max_mode:
            raise ValueError("fields must share max_mode")
        return make_field(self.coeffs + other.coeffs, self.max_mode,
                          max(self.grid_size, other.grid_size))

    def __mul__(self, c: complex) -> "ScalarField":
        return make_field(self.coeffs * c, self.max_mode, self.grid_size)

    __rmul__ = __mul__

    def coefficient(self, kx: int, ky: int) -> complex:
        K = self.max_mode
        if abs(kx) > K or abs(ky) > K:
            return 0.0 + 0.0j
        return complex(self.coeffs[kx + K, ky + K])


class SparseField:
    """Sparse mode table used by the exact relabeling path for shear-free maps.

    Holds {(kx, ky): coefficient} with no bound on |k|; only the handful of
    norms the pulse diagnostics need are provided.
    """

    __slots__ = ("modes",)

    def __init__(self, modes: dict):
        self.modes = {k: v for k, v in modes.items() if v != 0 and k != (0, 0)}

    def mode_arrays(self):
        if not self.modes:
            return np.zeros((0, 2), dtype=np.int64), np.zeros(0, dtype=complex)
        ks = np.array(list(self.modes.keys()), dtype=np.int64)
        cs = np.array(list(self.modes.values()), dtype=complex)
        return ks, cs

    def l2_norm(self) -> float:
        _, cs = self.mode_arrays()
        return float(np.sqrt(np.sum(np.abs(cs) ** 2)))

    def sobolev_seminorm(self, s: float) -> float:
        ks, cs = self.mode_arrays()
        if len(cs) == 0:
            return 0.0
        r2 = np.sum(ks.astype(float) ** 2, axis=1)
        return float(np.sqrt(np.sum(r2 ** s * np.abs(cs) ** 2)))


@lru_cache(maxsize=32)
def _mode_grids(K: int):
    """(KX, KY, |k|, |k|^2) over the coefficient square, cached per K."""
    rng = np.arange(-K, K + 1)
    KX, KY = np.meshgrid(rng, rng, indexing="ij")
    R2 = (KX.astype(float)) ** 2 + (KY.astype(float)) ** 2
    return KX, KY, np.sqrt(R2), R2


def make_field(coeffs: np.ndarray, max_mode: int, grid_size: int | None = None) -> ScalarField:
    """Build a field from a coefficient square, hard-zeroing the mean mode."""
    c = np.array(coeffs, dtype=complex)
    c[max_mode, max_mode] = 0.0
    c.setflags(write=False)
    return ScalarField(max_mode, grid_size or _default_grid(max_mode), c)


def zero_field(max_mode: int, grid_size: int | None = None) -> ScalarField:
    return make_field(np.zeros((2 * max_mode + 1, 2 * max_mode + 1), dtype=complex),
                      max_mode, grid_size)


def new_pure_mode(k: tuple[int, int], max_mode: int, grid_size: int | None = None) -> ScalarField:
    """Unit-amplitude single mode e_k; rejects k = 0 and modes outside the square."""
    kx, ky = int(k[0]), int(k[1])
    if kx == 0 and ky == 0:
        raise ValueError("k = (0,0) is not allowed: fields are mean-zero")
    if abs(kx) > max_mode or abs(ky) > max_mode:
        raise ValueError(f"mode {k} outside the stored square |k| <= {max_mode}")
    c = np.zeros((2 * max_mode + 1, 2 * max_mode + 1), dtype=complex)
    c[kx + max_mode, ky + max_mode] = 1.0
    return make_field(c, max_mode, grid_size)


def random_field(max_mode: int, rng: np.random.Generator, smooth: bool = False,
                 grid_size: int | None = None) -> ScalarField:
    """Mean-zero field with iid complex-normal coefficients (|k|^-2 damped if smooth)."""
    n = 2 * max_mode + 1
    c = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if smooth:
        _, _, R, _ = _mode_grids(max_mode)
        c = c / (1.0 + R) ** 2
    return make_field(c, max_mode, grid_size)


# ---------------------------------------------------------------------------
# norms

def l2_norm(phi: ScalarField) -> float:
    """Parseval L^2 norm, sqrt(sum |c_k|^2)."""
    return float(np.linalg.norm(phi.coeffs))


def sobolev_seminorm(phi: ScalarField, s: float) -> float:
    """Homogeneous H^s seminorm sqrt(sum_{k != 0} |k|^{2s} |c_k|^2)."""
    K = phi.max_mode
    _, _, _, R2 = _mode_grids(K)
    w = np.zeros_like(R2)
    nz = R2 > 0
    w[nz] = R2[nz] ** s
    return float(np.sqrt(np.sum(w * np.abs(phi.coeffs) ** 2)))


def _cone_mask(K: int, hyp) -> np.ndarray:
    """True where k lies in the closed expanding cone |a_s| <= |a_u| of the
    transposed matrix's eigenbasis (k = a_u v_uT + a_s v_sT)."""
    basis = np.column_stack([hyp.v_uT, hyp.v_sT])
    det = np.linalg.det(basis)
    if abs(det) < 1e-12:
        raise ValueError("degenerate eigenvector pair: cone is undefined")
    inv = np.linalg.inv(basis)
    KX, KY, _, _ = _mode_grids(K)
    a_u = inv[0, 0] * KX + inv[0, 1] * KY
    a_s = inv[1, 0] * KX + inv[1, 1] * KY
    return np.abs(a_s) <= np.abs(a_u)


def anisotropic_norm(phi: ScalarField, p: float, hyp) -> float:
    """Cone-weighted Sobolev norm: weight |k|^{2p} inside the expanding cone,
    |k|^{-2p} outside, |c_0|^2 for the (always zero) mean mode."""
    if p <= 0:
        raise ValueError("p must be positive")
    K = phi.max_mode
    cone = _cone_mask(K, hyp)
    _, _, _, R2 = _mode_grids(K)
    w = np.ones_like(R2)
    nz = R2 > 0
    w[nz & cone] = R2[nz & cone] ** p
    w[nz & ~cone] = R2[nz & ~cone] ** (-p)
    return float(np.sqrt(np.sum(w * np.abs(phi.coeffs) ** 2)))


def dyadic_cone_norm(phi: ScalarField, p: float, hyp) -> float:
    """Littlewood-Paley variant of :func:`anisotropic_norm`.

    Modes with |k| in the half-open block [2^{N-1}, 2^N) carry weight 2^{2pN}
    inside the expanding cone and 2^{-2pN} outside; uniformly equivalent to the
    direct norm up to a p-dependent factor.
    """
    if p <= 0:
        raise ValueError("p must be positive")
    K = phi.max_mode
    cone = _cone_mask(K, hyp)
    _, _, _, R2 = _mode_grids(K)
    nz = R2 > 0
    # block index from the integer |k|^2: |k| in [2^{N-1}, 2^N) iff |k|^2 in [4^{N-1}, 4^N)
    N = np.zeros_like(R2)
    N[nz] = np.floor(np.log2(R2[nz]) / 2.0) + 1
    w = np.ones_like(R2)
    w[nz & cone] = 2.0 ** (2 * p * N[nz & cone])
    w[nz & ~cone] = 2.0 ** (-2 * p * N[nz & ~cone])
    return float(np.sqrt(np.sum(w * np.abs(phi.coeffs) ** 2)))


# ---------------------------------------------------------------------------
# mode selectors and projections

@dataclass(frozen=True)
class Ball:
    radius: float


@dataclass(frozen=True)
class Annulus:
    lo: float
    hi: float


@dataclass(frozen=True)
class ExpShell:
    base: float
    ell: int


@dataclass(frozen=True)
class Sector:
    axis: tuple[float, float]
    min_angle: float


@dataclass(frozen=True)
class PulseSet:
    modes: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class HighPass:
    cutoff: float


@dataclass(frozen=True)
class Complement:
    inner: "ModeSelector"


ModeSelector = Union[Ball, Annulus, ExpShell, Sector, PulseSet, HighPass, Complement]


def selector_mask(sel: ModeSelector, K: int) -> np.ndarray:
    """Boolean keep-mask over the coefficient square for a selector."""
    KX, KY, R, _ = _mode_grids(K)
    if isinstance(sel, Ball):
        if sel.radius < 0:
            raise ValueError("ball radius must be nonnegative")
        return R <= sel.radius
    if isinstance(sel, Annulus):
        if sel.lo < 0 or sel.hi < 0:
            raise ValueError("annulus radii must be nonnegative")
        return (R >= sel.lo) & (R <= sel.hi)
    if isinstance(sel, ExpShell):
        lo, hi = sel.base ** sel.ell, sel.base ** (sel.ell + 1)
        return (R >= lo) & (R <= hi)
    if isinstance(sel, Sector):
        ax = np.asarray(sel.axis, dtype=float)
        nrm = np.hypot(*ax)
        if nrm == 0:
            raise ValueError("sector axis must be nonzero")
        if not (0 < sel.min_angle < np.pi / 2):
            raise ValueError("min_angle must lie in (0, pi/2)")
        ax = ax / nrm
        with np.errstate(invalid="ignore", divide="ignore"):
            cosang = np.abs(KX * ax[0] + KY * ax[1]) / np.where(R > 0, R, 1.0)
        ang = np.arccos(np.clip(cosang, -1.0, 1.0))
        return (R > 0) & (ang >= sel.min_angle)
    if isinstance(sel, PulseSet):
        mask = np.zeros((2 * K + 1, 2 * K + 1), dtype=bool)
        for kx, ky in sel.modes:
            if abs(kx) <= K and abs(ky) <= K:
                mask[kx + K, ky + K] = True
        return mask
    if isinstance(sel, HighPass):
        return R >= sel.cutoff
    if isinstance(sel, Complement):
        return ~selector_mask(sel.inner, K)
    raise TypeError(f"unknown selector {sel!r}")


def project(phi: ScalarField, sel: ModeSelector) -> ScalarField:
    """Zero every coefficient outside the selected mode set (idempotent)."""
    mask = selector_mask(sel, phi.max_mode)
    return make_field(np.where(mask, phi.coeffs, 0.0), phi.max_mode, phi.grid_size)


# ---------------------------------------------------------------------------
# grid transforms

def sample_on_grid(phi: ScalarField, grid_size: int | None = None) -> np.ndarray:
    """Evaluate the field on the uniform n x n grid x_j = j/n (complex values)."""
    K = phi.max_mode
    n = grid_size or phi.grid_size
    if n < 2 * K + 2:
        raise ValueError(f"grid of size {n} cannot hold modes up to {K}")
    idx = np.arange(-K, K + 1) % n
    C = np.zeros((n, n), dtype=complex)
    C[np.ix_(idx, idx)] = phi.coeffs
    return np.fft.ifft2(C) * n * n


def field_from_grid(grid: np.ndarray, max_mode: int, grid_size: int | None = None) -> ScalarField:
    """Recover Fourier coefficients from grid samples; the grid mean is removed."""
    g = np.asarray(grid, dtype=complex)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError("grid must be square")
    n = g.shape[0]
    if n < 2 * max_mode + 2:
        raise ValueError(f"grid of size {n} cannot resolve modes up to {max_mode}")
    C = np.fft.fft2(g) / (n * n)
    idx = np.arange(-max_mode, max_mode + 1) % n
    coeffs = C[np.ix_(idx, idx)]
    out_grid = grid_size or (n if n % 2 == 0 else n + 1)
    return make_field(coeffs, max_mode, out_grid)


# ---------------------------------------------------------------------------
# serialization: <stem>.csv rows (kx, ky, re, im) + <stem>.json header

def save_field(phi: ScalarField, stem: "Path | str") -> None:
    stem = Path(stem)
    header = {"max_mode": phi.max_mode, "grid_size": phi.grid_size}
    stem.with_suffix(".json").write_text(json.dumps(header, sort_keys=True) + "\n")
    K = phi.max_mode
    lines = ["kx,ky,re,im"]
    nz = np.argwhere(phi.coeffs != 0)
    for i, j in nz:
        c = phi.coeffs[i, j]
        lines.append(f"{i - K},{j - K},{FLOAT_FMT % c.real},{FLOAT_FMT % c.imag}")
    stem.with_suffix(".csv").write_text("\n".join(lines) + "\n")


def load_field(stem: "Path | str") -> ScalarField:
    stem = Path(stem)
    header = json.loads(stem.with_suffix(".json").read_text())
    K = int(header["max_mode"])
    c = np.zeros((2 * K + 1, 2 * K + 1), dtype=complex)
    body = stem.with_suffix(".csv").read_text().strip().splitlines()
    for line in body[1:]:
        sx, sy, sre, sim = line.split(",")
        c[int(sx) + K, int(sy) + K] = float(sre) + 1j * float(sim)
    return make_field(c, K, int(header["grid_size"]))
