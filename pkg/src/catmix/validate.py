"""Self-contained property battery behind `catmix validate`.

Each check returns (name, passed, detail).  These are quick desk checks of the
library invariants on the configured map, not a replacement for the test
suite; they are the ones cheap enough to run on every configuration.
"""

from __future__ import annotations

import numpy as np

from .config import ExperimentConfig
from .fields import (Ball, Complement, PulseSet, l2_norm, new_pure_mode, project,
                     random_field, sample_on_grid, sobolev_seminorm)
from .montecarlo import mc_expected_projection
from .probes import h_minus1_decay_rate
from .spectral import pulse_sequence, spectral_distribution
from .stationary import stationary_spectrum
from .torusmaps import analyze_matrix, jacobian_forward, jacobian_inverse_sup, map_forward, map_inverse
from .transfer import HEAT_CONSTANT, general_transfer, heat, iterate_pulses, pulsed_step

__all__ = ["run_validation"]


def run_validation(cfg: ExperimentConfig):
    rng = np.random.default_rng(cfg.seed)
    pcm = cfg.map_object()
    hyp = analyze_matrix(pcm.matrix)
    results = []

    def check(name, ok, detail=""):
        results.append((name, bool(ok), detail))

    # Parseval against grid quadrature
    phi = random_field(24, rng)
    g = sample_on_grid(phi, 64)
    quad = np.sqrt(np.mean(np.abs(g) ** 2))
    check("parseval-quadrature", abs(quad - l2_norm(phi)) <= 1e-10 * l2_norm(phi),
          f"|grid-parseval|={abs(quad - l2_norm(phi)):.2e}")

    # projection contraction
    ok = all(l2_norm(project(phi, s)) <= l2_norm(phi) * (1 + 1e-14)
             for s in (Ball(5.0), Ball(0.0), Complement(Ball(9.0))))
    check("projection-contraction", ok)

    # interpolation inequality over random fields
    worst = 0.0
    for _ in range(200):
        p = random_field(12, rng, smooth=True)
        lhs = l2_norm(p) ** 2
        rhs = sobolev_seminorm(p, 1.0) * sobolev_seminorm(p, -1.0)
        worst = max(worst, lhs / rhs)
    check("interpolation-inequality", worst <= 1.0 + 1e-12, f"max ratio {worst:.6f}")

    # inverse map round trip
    pts = rng.random((2000, 2))
    err = float(np.max(np.abs(map_forward(pcm, map_inverse(pcm, pts)) - pts) % 1.0))
    err = min(err, 1 - err)
    check("map-roundtrip", err < 1e-12, f"max err {err:.2e}")

    # volume preservation
    J = jacobian_forward(pcm, rng.random((500, 2)))
    det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    derr = float(np.max(np.abs(det - pcm.matrix.det)))
    check("volume-preservation", derr < 1e-12, f"max |det-detA| {derr:.2e}")

    # heat dissipation identity
    ok, detail = True, ""
    for _ in range(20):
        p = random_field(16, rng)
        kap = 10 ** rng.uniform(-5, -2)
        drop = l2_norm(p) ** 2 - l2_norm(heat(p, kap)) ** 2
        cap = 2 * HEAT_CONSTANT * kap * sobolev_seminorm(p, 1.0) ** 2
        if not (-1e-12 <= drop <= cap * (1 + 1e-12)):
            ok, detail = False, f"drop {drop:.3e} cap {cap:.3e}"
    check("heat-dissipation-identity", ok, detail)

    # transfer H^1 growth bound
    Lam = hyp.Lambda if pcm.is_pure else jacobian_inverse_sup(pcm, grid=128)
    ok = True
    for _ in range(5):
        p = random_field(24, rng, smooth=True)
        o, _ = general_transfer(p, pcm)
        if sobolev_seminorm(o, 1.0) > np.exp(Lam) * sobolev_seminorm(p, 1.0) * 1.02:
            ok = False
    check("h1-growth-bound", ok)

    # mean preservation through pulsed steps
    p = project(random_field(32, rng, smooth=True), Ball(10.0))
    worst0 = 0.0
    for _ in range(50):
        p, _ = pulsed_step(p, pcm, max(cfg.kappa, 1e-4), on_overflow="accept")
        worst0 = max(worst0, abs(p.coefficient(0, 0)))
    check("mean-preservation", worst0 < 1e-12, f"max |c0| {worst0:.2e}")

    # stationary series consistency and energy balance
    kap = cfg.kappa if cfg.kappa > 0 else 1e-3
    b = new_pure_mode(cfg.k0, min(cfg.max_mode, 64))
    spec = stationary_spectrum(b, pcm, kap, max(cfg.tol, 1e-9))
    series = sum(r.l2 ** 2 for r in spec.per_pulse)
    check("series-consistency",
          abs(spec.total_power - series) <= 1e-10 + spec.tail_bound,
          f"sum_k power={spec.total_power:.12f} sum_n |phi|^2={series:.12f}")
    energy = kap * sum(r.h1 ** 2 for r in spec.per_pulse[1:])
    check("energy-balance", energy <= 1.05 * l2_norm(b) ** 2, f"kappa*sum H1^2 = {energy:.4f}")

    # exact relabeling oracle on the shear-free base matrix
    pure_b = new_pure_mode(cfg.k0, min(cfg.max_mode, 64))
    from .torusmaps import PerturbedCatMap
    pure = PerturbedCatMap.pure(pcm.matrix)
    ps = stationary_spectrum(pure_b, pure, kap, max(cfg.tol, 1e-9))
    ks = pulse_sequence(pcm.matrix, cfg.k0, ps.n_used)
    ok, worst1 = True, 0.0
    acc = 0.0
    for n, k in enumerate(ks):
        if abs(k[0]) > ps.max_mode or abs(k[1]) > ps.max_mode:
            break
        if n > 0:
            acc += float(k[0] * k[0] + k[1] * k[1])
        expect = np.exp(-2 * HEAT_CONSTANT * kap * acc)
        sel = (ps.kx == k[0]) & (ps.ky == k[1])
        got = float(ps.power[sel][0]) if np.any(sel) else 0.0
        if expect > 1e-300:
            worst1 = max(worst1, abs(got - expect) / expect)
    check("cat-oracle", worst1 < 1e-10, f"max rel err {worst1:.2e}")

    # gamma vs Lambda ordering
    fit = h_minus1_decay_rate(new_pure_mode(cfg.k0, cfg.max_mode), pcm, 0.0, 12)
    check("gamma-le-Lambda", fit.gamma_est <= Lam + 0.05,
          f"gamma={fit.gamma_est:.4f} Lambda={Lam:.4f}")

    # Monte Carlo vs series, quick
    sel = Ball(10.0)
    b32 = new_pure_mode(cfg.k0, 32)
    spec32 = stationary_spectrum(b32, pcm, kap, max(cfg.tol, 1e-9))
    ref = spec32.mass_where(spec32.radii <= 10.0)
    mean, se = mc_expected_projection(b32, pcm, kap, sel, 200, 40, cfg.seed)
    check("mc-consistency", abs(mean - ref) <= 4 * se + 1e-9,
          f"mc={mean:.4f}+-{se:.4f} series={ref:.4f}")

    return results
