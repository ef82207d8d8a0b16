"""Empirical rate probes: H^{-1} decay, anisotropic-norm contraction, critical scales.

These measure the handful of constants that the structural results quantify
over but never pin numerically: the advective mixing rate gamma (fitted from
the H^{-1} trajectory at kappa = 0, where diffusion cannot pollute the
window), the inverse-Jacobian exponent Lambda, the anisotropic contraction
factor r, and the derived crossover scales N_crit / R_crit / ell_crit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import ScalarField, anisotropic_norm, sobolev_seminorm
from .stationary import NumericalError
from .torusmaps import PerturbedCatMap, analyze_matrix
from .transfer import iterate_pulses

__all__ = [
    "DecayFit",
    "h_minus1_decay_rate",
    "AnisoProbe",
    "anisotropic_decay_probe",
    "enhanced_dissipation_time",
    "CriticalScales",
    "critical_scales",
]

FIT_SKIP = 3        # transient steps excluded from every rate fit
FIT_FLOOR = 1e-9    # precision floor for fitted norms
FIT_CAP = 0.5


@dataclass(frozen=True)
class DecayFit:
    gamma_est: float
    fit_quality: float   # R^2 of the log-linear fit
    n_window: int


def _lsq_rate(ns, vals):
    x = np.asarray(ns, dtype=float)
    y = -np.log(np.asarray(vals))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


def _truncation_cut(track, rel_tol: float = 1e-6) -> np.ndarray:
    """Steps still untouched by square truncation (cumulative loss < rel_tol
    of the initial squared mass); fits past the cut see artifacts, not dynamics."""
    lost = np.cumsum(track.series("lost"))
    total0 = track.records[0].l2 ** 2
    return lost <= rel_tol * max(total0, 1e-300)


def h_minus1_decay_rate(b: ScalarField, pcm: PerturbedCatMap, kappa: float,
                        n_max: int, unbounded: bool | None = None) -> DecayFit:
    """Fitted exponential decay rate of ||phi_n||_{H^{-1}}.

    The fit window keeps steps past the initial transient whose norm lies in
    [1e-9, 0.5] and which precede any material square truncation; fewer than
    two such steps is an error.
    """
    if n_max < 10:
        raise ValueError("n_max must be at least 10")
    if unbounded is None:
        unbounded = pcm.is_pure
    track = iterate_pulses(b, pcm, kappa, n_max,
                           on_overflow="abort" if pcm.is_pure else "accept",
                           unbounded=unbounded)
    hm1 = track.series("hm1")
    ns = track.series("n")
    keep = (ns >= FIT_SKIP) & (hm1 >= FIT_FLOOR) & (hm1 <= FIT_CAP) & _truncation_cut(track)
    if np.sum(keep) < 2:
        raise NumericalError("H^{-1} fit window is empty (fewer than two usable steps)")
    slope, r2 = _lsq_rate(ns[keep], hm1[keep])
    return DecayFit(slope, r2, int(np.sum(keep)))


@dataclass
class AnisoProbe:
    ns: np.ndarray
    hp: np.ndarray      # anisotropic H^p norms
    hmL: np.ndarray     # homogeneous H^{-L} seminorms, L = p + 2
    r_fit: float        # fitted per-step contraction factor of the H^p sequence


def anisotropic_decay_probe(phi: ScalarField, pcm: PerturbedCatMap, kappa: float,
                            p: float, n_max: int) -> AnisoProbe:
    """Trajectories of the cone norm and the weak H^{-(p+2)} norm under the
    pulsed step, with a fitted asymptotic rate for the strong norm."""
    if p <= 0:
        raise ValueError("p must be positive")
    hyp = analyze_matrix(pcm.matrix)
    L = p + 2.0
    track = iterate_pulses(phi, pcm, kappa, n_max,
                           on_overflow="abort" if pcm.is_pure else "accept",
                           keep_fields=True, unbounded=False)
    clean = _truncation_cut(track)
    hp, hmL, ns = [], [], []
    for i, (rec, f) in enumerate(zip(track.records, track.fields)):
        if not clean[i]:
            break  # square truncation has begun; later norms are artifacts
        v = anisotropic_norm(f, p, hyp)
        if not np.isfinite(v):
            break  # overflow: keep the finite prefix
        ns.append(rec.n)
        hp.append(v)
        hmL.append(sobolev_seminorm(f, -L))
    ns, hp, hmL = np.array(ns), np.array(hp), np.array(hmL)
    keep = (ns >= FIT_SKIP) & (hp > FIT_FLOOR ** 2)
    if np.sum(keep) < 2:
        keep = (ns >= 1) & (hp > 0)
    if np.sum(keep) < 2:
        raise NumericalError("anisotropic fit window is empty")
    slope, _ = _lsq_rate(ns[keep], hp[keep])
    return AnisoProbe(ns, hp, hmL, float(np.exp(-slope)))


def enhanced_dissipation_time(b: ScalarField, pcm: PerturbedCatMap, kappa: float,
                              n_cap: int = 200, unbounded: bool | None = None) -> int:
    """First step at which the undriven pulse loses half its squared mass."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if unbounded is None:
        unbounded = pcm.is_pure
    from .fields import l2_norm
    from .transfer import pulsed_step
    if unbounded:
        track = iterate_pulses(b, pcm, kappa, n_cap, unbounded=True)
        l2 = track.series("l2")
        below = np.flatnonzero(l2 ** 2 < 0.5 * l2[0] ** 2)
        if len(below) == 0:
            raise NumericalError(f"pulse kept more than half its mass through {n_cap} steps")
        return int(track.records[below[0]].n)
    half = 0.5 * l2_norm(b) ** 2
    cur = b
    for n in range(1, n_cap + 1):
        cur, _ = pulsed_step(cur, pcm, kappa, on_overflow="accept")
        if l2_norm(cur) ** 2 < half:
            return n
    raise NumericalError(f"pulse kept more than half its mass through {n_cap} steps")


@dataclass(frozen=True)
class CriticalScales:
    n_crit: float
    zeta: float
    r_crit: float
    delta: float
    gamma: float
    too_coarse: bool

    def ell_crit(self, L: float) -> float:
        """Largest exponential-shell index the pulse estimates control."""
        if L <= 1:
            raise ValueError("L must exceed 1")
        return self.n_crit * self.gamma / np.log(L)


def critical_scales(eps: float, kappa: float, gamma_est: float, m_fit: float,
                    delta: float = 0.5) -> CriticalScales:
    """Crossover scales from the measured rates.

    With eta = max(eps, kappa): N_crit = (1 - delta) |log eta| / log M,
    zeta = gamma/(2 log M) - (delta/2)(1 + gamma/log M), R_crit = eta^{-zeta}.
    """
    eta = max(eps, kappa)
    if not (0 < eta < 1):
        raise ValueError("max(eps, kappa) must lie in (0, 1)")
    if m_fit <= 1:
        raise ValueError("M must exceed 1")
    logM = np.log(m_fit)
    n_crit = (1.0 - delta) * abs(np.log(eta)) / logM
    zeta = gamma_est / (2.0 * logM) - (delta / 2.0) * (1.0 + gamma_est / logM)
    if zeta <= 0:
        err = NumericalError(
            f"zeta={zeta:.4f} <= 0 at delta={delta}: no controlled radius; "
            "retry with a smaller delta")
        # the timescale part is still well defined; let callers inspect it
        err.n_crit = float(n_crit)
        err.too_coarse = bool(np.floor(n_crit) < 2)
        raise err
    return CriticalScales(
        n_crit=float(n_crit),
        zeta=float(zeta),
        r_crit=float(eta ** -zeta),
        delta=delta,
        gamma=gamma_est,
        too_coarse=bool(np.floor(n_crit) < 2),
    )
