"""End-to-end acceptance criteria.

One test per criterion, each asserting its stated tolerance and runtime
budget and printing a PASS line with the measured values (visible with
``pytest -v -s``).  Criterion 11 (figure rendering) lives with the plotting
package under plots/.
"""

import time

import numpy as np
import pytest

from catmix import (
    ARNOLD,
    Ball,
    PerturbedCatMap,
    anisotropic_decay_probe,
    centroid_pushforward_check,
    centroid_variance_track,
    cumulative_curve,
    dissipative_mass,
    enhanced_dissipation_time,
    fit_sector_decay,
    h_minus1_decay_rate,
    jacobian_inverse_sup,
    l2_norm,
    mc_expected_projection,
    new_pure_mode,
    offpulse_mass,
    project,
    pulse_sequence,
    random_field,
    random_shift_heat,
    sector_profile,
    shell_masses,
    spectral_distribution,
    stationary_spectrum,
)
from catmix import analyze_matrix, cat_transfer
from conftest import LAMBDA, LOG_LAMBDA, perturbed
from oracle_cat import pulse_modes, stationary_pulse_power


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *a):
        self.elapsed = time.perf_counter() - self.t0


def report(n, detail):
    print(f"ACCEPTANCE {n:02d} PASS: {detail}")


def test_criterion_01_exact_cat_oracle():
    # stationary power at the travelling pulse equals the closed-form heat
    # product to 1e-10 relative; off-pulse power identically zero; < 1 s
    kappa = 1e-3
    with Timer() as t:
        spec = stationary_spectrum(new_pure_mode((1, 0), 128),
                                   PerturbedCatMap.pure(), kappa, tol=1e-10)
    ks = pulse_modes(2, 1, 1, 1, (1, 0), 5)
    worst = 0.0
    for n, k in enumerate(ks):
        expect = stationary_pulse_power(kappa, ks, n)
        sel = (spec.kx == k[0]) & (spec.ky == k[1])
        got = float(spec.power[sel][0]) if np.any(sel) else 0.0
        if expect > 1e-280:
            worst = max(worst, abs(got - expect) / expect)
    assert worst < 1e-10
    on_pulse = set(pulse_modes(2, 1, 1, 1, (1, 0), 10))
    off = [1 for x, y in zip(spec.kx, spec.ky) if (int(x), int(y)) not in on_pulse]
    assert not off
    assert t.elapsed < 1.0
    report(1, f"max rel err {worst:.2e}, off-pulse mass 0, {t.elapsed:.2f}s")


def test_criterion_02_cumulative_law():
    # fitted slope at kappa = 1e-6 within [1/(2 Lambda) - .05, 2/gamma + .05];
    # pulse-count plateaus 4/5/6 at N = 10/25/65 in the kappa -> 0 regime
    # (1e-9, where the 0.02 tolerance is attainable); < 10 s
    b = new_pure_mode((1, 0), 128)
    pure = PerturbedCatMap.pure()
    with Timer() as t:
        spec6 = stationary_spectrum(b, pure, 1e-6, tol=1e-9)
        Ns = np.arange(10, 65)
        slope = np.polyfit(np.log(Ns), cumulative_curve(spec6, list(Ns)), 1)[0]
        gamma = h_minus1_decay_rate(b, pure, 0.0, 12).gamma_est
        Lam = analyze_matrix(ARNOLD).Lambda
        spec9 = stationary_spectrum(b, pure, 1e-9, tol=1e-9)
        vals = cumulative_curve(spec9, [10, 25, 65])
    lo, hi = 1 / (2 * Lam) - 0.05, 2 / gamma + 0.05
    assert lo <= slope <= hi
    assert vals == pytest.approx([4.0, 5.0, 6.0], abs=0.02)
    assert t.elapsed < 10.0
    report(2, f"slope {slope:.3f} in [{lo:.3f}, {hi:.3f}], "
              f"counts {np.round(vals, 4)}, {t.elapsed:.1f}s")


def test_criterion_03_dissipative_range():
    # E ||P_{>= kappa^{-1/2}} g||^2 <= 2 ||b||^2 on pure and eps=1e-3 maps; < 30 s
    b = new_pure_mode((1, 0), 128)
    worst = 0.0
    with Timer() as t:
        for pcm in (PerturbedCatMap.pure(), perturbed(1e-3)):
            for kappa in (1e-2, 1e-3, 1e-4):
                spec = stationary_spectrum(b, pcm, kappa, tol=1e-6)
                mass = dissipative_mass(spec, kappa)
                assert mass <= 2.0 * l2_norm(b) ** 2
                worst = max(worst, mass)
    assert t.elapsed < 30.0
    report(3, f"max dissipative mass {worst:.4f} <= 2.0, {t.elapsed:.1f}s")


def test_criterion_04_pulse_localization():
    # off-pulse fraction below R = 20 under 10%, decreasing when eps and kappa
    # are each cut 10x; < 2 min
    b = new_pure_mode((1, 0), 128)
    ks = pulse_sequence(ARNOLD, (1, 0), 12)

    def offpulse_fraction(eps, kappa):
        spec = stationary_spectrum(b, perturbed(eps), kappa, tol=1e-6)
        off = offpulse_mass(spec, ks, 20.0)
        below = spec.mass_where(spec.radii <= 20.0)
        return off / below

    with Timer() as t:
        base = offpulse_fraction(1e-3, 1e-4)
        reduced = offpulse_fraction(1e-4, 1e-5)
    assert base < 0.10
    assert reduced < base
    assert t.elapsed < 120.0
    report(4, f"fraction {base:.2e} -> {reduced:.2e} after 10x reduction, "
              f"{t.elapsed:.1f}s")


def test_criterion_05_exponential_shell_law():
    # complete shells (above the forcing wavenumber, below K/2) at L = lambda^2
    # hold two pulses: 2.0 +- 0.05 pure, +- 1.0 with eps = 1e-3 shears; < 30 s
    L = LAMBDA ** 2
    with Timer() as t:
        pure_spec = stationary_spectrum(new_pure_mode((1, 0), 768),
                                        PerturbedCatMap.pure(), 1e-9, tol=1e-9)
        pure_masses = shell_masses(pure_spec, L, 2)
        pert_spec = stationary_spectrum(new_pure_mode((1, 0), 384),
                                        perturbed(1e-3), 1e-9, tol=1e-6)
        pert_masses = shell_masses(pert_spec, L, 1)
    # pure run: shells 1 and 2 are complete below K/2 = 384
    assert pure_masses[1] == pytest.approx(2.0, abs=0.05)
    assert pure_masses[2] == pytest.approx(2.0, abs=0.05)
    # perturbed run at K = 384: shell 1 is the complete one below K/2
    assert pert_masses[1] == pytest.approx(2.0, abs=1.0)
    assert t.elapsed < 30.0
    report(5, f"pure shells {np.round(pure_masses[1:], 4)}, "
              f"perturbed shell {pert_masses[1]:.3f}, {t.elapsed:.1f}s")


def test_criterion_06_sector_sparsity(hyp):
    # max power at angle >= 0.3 from the contracting line falls off with a
    # log-log slope <= -2 over |k| in [8, 64]; < 1 min
    with Timer() as t:
        spec = stationary_spectrum(new_pure_mode((1, 0), 128), perturbed(1e-3),
                                   1e-6, tol=1e-6)
        prof = sector_profile(spec, hyp, 0.3)
        exponent = fit_sector_decay(prof, 8.0, 64.0)
    assert exponent <= -2.0
    assert t.elapsed < 60.0
    report(6, f"sector decay exponent {exponent:.2f} <= -2, {t.elapsed:.1f}s")


def test_criterion_07_centroid_variance(rng, pure_map):
    # exact pushforward identity, operator-norm variance contraction, and the
    # kappa = 0 pure track staying a point mass through n = 10
    worst = 0.0
    for _ in range(100):
        f = project(random_field(32, rng), Ball(12.0))
        lhs, rhs = centroid_pushforward_check(f, ARNOLD)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    assert worst < 1e-12

    opnorm2 = np.linalg.norm(ARNOLD.as_array(), 2) ** 2
    violations = 0
    for i in range(100):
        f = project(random_field(24, rng, smooth=(i % 2 == 0)), Ball(9.0))
        v0 = spectral_distribution(f).variance
        v1 = spectral_distribution(cat_transfer(f, ARNOLD)).variance
        if v1 > opnorm2 * v0 * (1 + 1e-10) + 1e-10:
            violations += 1
    assert violations == 0

    rows = centroid_variance_track((1, 0), pure_map, 0.0, 10)
    assert len(rows) == 11
    assert all(r.drift == 0.0 and r.variance == 0.0 for r in rows)
    report(7, f"pushforward err {worst:.2e}, 0 contraction violations, "
              f"drift/variance exactly 0 through n=10")


def test_criterion_08_monte_carlo_consistency(pure_map):
    # 1000-sample MC of ||P_{<=10} g||^2 within 3 stderr of the series value
    # (4.0 in the pulse-count regime); random-shift heat multiplier within
    # 4 stderr at 3 modes x 3 kappas; < 2 min
    with Timer() as t:
        b = new_pure_mode((1, 0), 32)
        spec = stationary_spectrum(b, pure_map, 1e-6, tol=1e-9)
        series = spec.mass_where(spec.radii <= 10.0)
        mean, se = mc_expected_projection(b, pure_map, 1e-6, Ball(10.0),
                                          n_samples=1000, n_steps=60, seed=7)
        assert series == pytest.approx(4.0, abs=0.02)
        assert abs(mean - series) <= 3 * se

        worst_pull = 0.0
        for mode in ((1, 0), (2, -3), (0, 4)):
            phi = new_pure_mode(mode, 8)
            k2 = mode[0] ** 2 + mode[1] ** 2
            for kappa in (3e-3, 1e-3, 3e-4):
                n = 2000
                out = random_shift_heat(phi, kappa, n, seed=17)
                target = np.exp(-4 * np.pi ** 2 * kappa * k2)
                stderr = np.sqrt(max(1 - target ** 2, 1e-30) / n)
                pull = abs(out.coefficient(*mode) - target) / stderr
                worst_pull = max(worst_pull, pull)
        assert worst_pull <= 4.0
    assert t.elapsed < 120.0
    report(8, f"mc {mean:.3f}+-{se:.3f} vs series {series:.3f}; "
              f"worst shift-multiplier pull {worst_pull:.2f} sigma, {t.elapsed:.1f}s")


def test_criterion_09_decay_rate_ordering(pure_map):
    # gamma_est = log lambda +- 0.02 (pure); gamma_est <= Lambda_est + 0.05 on
    # every configuration; tau_kappa >= |log kappa|/(2 Lambda) - 5
    b = new_pure_mode((1, 0), 128)
    fit = h_minus1_decay_rate(b, pure_map, 0.0, 12)
    assert fit.gamma_est == pytest.approx(LOG_LAMBDA, abs=0.02)

    pairs = []
    for pcm in (pure_map, perturbed(1e-3), perturbed(1e-2)):
        g = h_minus1_decay_rate(b, pcm, 0.0, 12).gamma_est
        Lam = jacobian_inverse_sup(pcm, grid=128)
        assert g <= Lam + 0.05
        pairs.append((g, Lam))

    taus = []
    for kappa in (1e-2, 1e-3, 1e-4, 1e-5):
        tau = enhanced_dissipation_time(new_pure_mode((1, 0), 64), pure_map, kappa)
        bound = abs(np.log(kappa)) / (2 * pairs[0][1]) - 5
        assert tau >= bound
        taus.append(tau)
    report(9, f"gamma {fit.gamma_est:.4f} vs log lambda {LOG_LAMBDA:.4f}; "
              f"gamma<=Lambda+0.05 on {len(pairs)} maps; taus {taus}")


def test_criterion_10_anisotropic_decay(pure_map):
    # contraction factor below 1 across p, eps, kappa; improves with p; pure
    # rate within 10% of lambda^{-p}
    b = new_pure_mode((1, 0), 128)
    fits = {}
    for p in (1.0, 2.0):
        for eps in (0.0, 1e-3, 1e-2):
            for kappa in (0.0, 1e-4):
                pcm = perturbed(eps) if eps else pure_map
                r = anisotropic_decay_probe(b, pcm, kappa, p, 6).r_fit
                assert r < 1.0
                fits[(p, eps, kappa)] = r
    for p in (1.0, 2.0):
        assert fits[(p, 0.0, 0.0)] == pytest.approx(LAMBDA ** -p, rel=0.10)
    assert fits[(2.0, 0.0, 0.0)] < fits[(1.0, 0.0, 0.0)]
    report(10, "r_fit " + ", ".join(
        f"p={p:g}: {fits[(p, 0.0, 0.0)]:.4f} (target {LAMBDA ** -p:.4f})"
        for p in (1.0, 2.0)))
