"""Stationary second moments of the pulsed-diffusion chain.

For kappa > 0 the chain g_{n+1} = L_{f,kappa} g_n + omega_{n+1} b has a unique
stationary law, and for any bounded linear A the stationary expectation
E ||A g||^2 equals sum_n ||A L^n b||^2 (the cross terms vanish under the iid
forcing).  Everything here is that series made concrete: per-wavenumber power
accumulated until a certified geometric tail bound drops below tolerance, and
the cumulative / shell / sector / pulse aggregations over the result.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fields import ScalarField, l2_norm, sobolev_seminorm
from .torusmaps import HyperbolicData, PerturbedCatMap
from .transfer import PulseRecord, pulsed_step

__all__ = [
    "NumericalError",
    "StationarySpectrum",
    "stationary_spectrum",
    "cumulative_curve",
    "shell_masses",
    "sector_profile",
    "offpulse_mass",
    "dissipative_mass",
]


class NumericalError(RuntimeError):
    """A run that produced no certifiable result (tail, fit window, ...)."""


@dataclass
class StationarySpectrum:
    """Accumulated per-wavenumber power sum_n |phi_n-hat(k)|^2 over |k| <= K."""

    max_mode: int
    kx: np.ndarray          # populated wavenumbers
    ky: np.ndarray
    power: np.ndarray
    n_used: int
    tail_bound: float
    lost_mass: float        # squared mass truncated beyond the square, total
    gamma_est: float | None
    per_pulse: list

    @property
    def radii(self) -> np.ndarray:
        return np.hypot(self.kx.astype(float), self.ky.astype(float))

    @property
    def total_power(self) -> float:
        return float(np.sum(self.power))

    def mass_where(self, mask: np.ndarray) -> float:
        return float(np.sum(self.power[mask]))


def _fit_rate(ns: np.ndarray, vals: np.ndarray) -> float | None:
    """Least-squares slope of -log(vals) against n; None if underdetermined."""
    good = vals > 0
    if np.sum(good) < 2:
        return None
    x = ns[good].astype(float)
    y = -np.log(vals[good])
    slope = np.polyfit(x, y, 1)[0]
    return float(slope)


def stationary_spectrum(b: ScalarField, pcm: PerturbedCatMap, kappa: float,
                        tol: float = 1e-6, n_cap: int = 500) -> StationarySpectrum:
    """Accumulate the power series until the certified tail is below tol.

    The tail certificate is K^2 ||phi_n||_{H^{-1}}^2 / (1 - e^{-2 gamma}),
    the Bernstein bound on everything the remaining pulses can still deposit
    inside the square, with gamma refit every 10 steps from the trailing
    window of measured H^{-1} decay.  Mass that leaves the square is recorded
    in ``lost_mass`` and the truncated pulse keeps running.
    """
    if kappa <= 0:
        raise ValueError("stationary series requires kappa > 0 (the kappa = 0 "
                         "series diverges in L^2)")
    if tol <= 0:
        raise ValueError("tol must be positive")
    K = b.max_mode
    P = np.zeros_like(b.coeffs, dtype=float)
    per_pulse: list[PulseRecord] = []
    hm1_hist: list[float] = []
    cur = b
    lost_total = 0.0
    gamma = None
    tail = np.inf
    n = 0
    while True:
        P += np.abs(cur.coeffs) ** 2
        rec = PulseRecord(n, l2_norm(cur), sobolev_seminorm(cur, 1.0),
                          sobolev_seminorm(cur, -1.0), lost_total)
        per_pulse.append(rec)
        hm1_hist.append(rec.hm1)

        if rec.l2 == 0.0:
            tail = 0.0
            break
        if n >= 10 and n % 10 == 0 or gamma is None and n >= 5:
            win = np.array(hm1_hist[max(0, n - 11):])
            g = _fit_rate(np.arange(len(win)), win)
            if g is not None and g > 0:
                gamma = g
        if gamma is not None and gamma > 0:
            tail = K * K * rec.hm1 ** 2 / (1.0 - np.exp(-2.0 * gamma))
            if tail < tol:
                break
        if n >= n_cap:
            raise NumericalError(
                f"stationary tail failed to certify below tol={tol:g} within "
                f"{n_cap} pulses; increase kappa or tol")
        nxt, lost = pulsed_step(cur, pcm, kappa, on_overflow="accept")
        lost_total += lost
        cur = nxt
        n += 1

    nz = np.argwhere(P > 0)
    return StationarySpectrum(
        max_mode=K,
        kx=nz[:, 0] - K,
        ky=nz[:, 1] - K,
        power=P[nz[:, 0], nz[:, 1]],
        n_used=n,
        tail_bound=float(tail),
        lost_mass=lost_total,
        gamma_est=gamma,
        per_pulse=per_pulse,
    )


def cumulative_curve(spec: StationarySpectrum, n_list) -> np.ndarray:
    """Partial sums of power over |k| <= N for each N; nondecreasing in N."""
    ns = list(n_list)
    if ns != sorted(ns):
        raise ValueError("N_list must be sorted")
    r = spec.radii
    out = []
    for N in ns:
        if not (2 <= N <= spec.max_mode):
            raise ValueError(f"N={N} outside [2, K={spec.max_mode}]")
        out.append(spec.mass_where(r <= N))
    return np.array(out)


def shell_masses(spec: StationarySpectrum, L: float, ell_max: int) -> np.ndarray:
    """Power in the closed exponential shells [L^l, L^{l+1}], l = 0..ell_max."""
    if L <= 1:
        raise ValueError("shell base L must exceed 1")
    if L ** (ell_max + 1) > spec.max_mode:
        raise ValueError(f"shell {ell_max} reaches beyond the stored square "
                         f"(L^{ell_max + 1} > K={spec.max_mode})")
    r = spec.radii
    return np.array([spec.mass_where((r >= L ** ell) & (r <= L ** (ell + 1)))
                     for ell in range(ell_max + 1)])


@dataclass
class SectorProfile:
    radii: np.ndarray        # bin left edges [r, r+1)
    max_power: np.ndarray    # 0 in empty or massless bins
    occupied: np.ndarray     # whether the sector meets the bin at all
    skipped: int


def sector_profile(spec: StationarySpectrum, hyp: HyperbolicData,
                   min_angle: float, r_max: int | None = None) -> SectorProfile:
    """Per-radial-bin maximum power over modes at angle >= min_angle from the
    contracting eigenline (where the pulses accumulate)."""
    if not (0 < min_angle < np.pi / 2):
        raise ValueError("min_angle must lie in (0, pi/2)")
    r_hi = int(r_max or spec.max_mode)
    r = spec.radii
    k = np.stack([spec.kx, spec.ky], axis=1).astype(float)
    with np.errstate(invalid="ignore"):
        cosang = np.abs(k @ hyp.v_s) / np.where(r > 0, r, 1.0)
    ang = np.arccos(np.clip(cosang, -1.0, 1.0))
    in_sector = (r > 0) & (ang >= min_angle)
    edges = np.arange(1, r_hi + 1)
    maxp = np.zeros(len(edges))
    occ = np.zeros(len(edges), dtype=bool)
    for i, lo in enumerate(edges):
        m = in_sector & (r >= lo) & (r < lo + 1)
        occ[i] = bool(np.any(m))
        if occ[i]:
            maxp[i] = float(np.max(spec.power[m]))
    return SectorProfile(edges.astype(float), maxp, occ, int(np.sum(~occ)))


def fit_sector_decay(profile: SectorProfile, r_lo: float, r_hi: float) -> float:
    """Log-log slope of max power against radius over occupied, massy bins."""
    sel = (profile.radii >= r_lo) & (profile.radii <= r_hi) & (profile.max_power > 0)
    if np.sum(sel) < 2:
        raise NumericalError("sector fit window has fewer than two populated bins")
    return float(np.polyfit(np.log(profile.radii[sel]), np.log(profile.max_power[sel]), 1)[0])


def offpulse_mass(spec: StationarySpectrum, pulses, R: float) -> float:
    """Power below radius R carried by modes outside the pulse set."""
    if R > spec.max_mode:
        raise ValueError(f"R={R} beyond the stored square K={spec.max_mode}")
    pulse_set = {(int(k[0]), int(k[1])) for k in pulses}
    r = spec.radii
    on_pulse = np.array([(int(x), int(y)) in pulse_set
                         for x, y in zip(spec.kx, spec.ky)])
    return spec.mass_where((r <= R) & ~on_pulse)


def dissipative_mass(spec: StationarySpectrum, kappa: float) -> float:
    """Power at or beyond the dissipative wavenumber kappa^{-1/2}."""
    thresh = kappa ** -0.5
    if thresh > spec.max_mode:
        raise ValueError("dissipative threshold lies beyond the stored square")
    return spec.mass_where(spec.radii >= thresh)
