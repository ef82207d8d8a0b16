"""Command-line experiments: one subcommand per spectrum law.

Every run reads one TOML config, writes deterministic CSV/JSON artifacts into
--out, and finishes with a summary.json carrying the derived constants
(lambda, Lambda_est, gamma_est, pulse list, tail bookkeeping).  Exit codes:
0 ok, 2 config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, DEFAULTS, ExperimentConfig, load_config, serialize_config
from .fields import Ball, HighPass, PulseSet, Sector, l2_norm, new_pure_mode
from .montecarlo import mc_expected_projection, random_shift_heat
from .probes import (anisotropic_decay_probe, enhanced_dissipation_time,
                     h_minus1_decay_rate)
from .spectral import centroid_variance_track, pulse_sequence
from .stationary import (NumericalError, cumulative_curve, dissipative_mass,
                         fit_sector_decay, offpulse_mass, sector_profile,
                         shell_masses, stationary_spectrum)
from .torusmaps import analyze_matrix, jacobian_inverse_sup
from .transfer import TruncationOverflow

G = "%.17g"


def _csv(path: Path, header: str, rows) -> None:
    lines = [header]
    for row in rows:
        lines.append(",".join(G % v if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _write_summary(out: Path, payload: dict) -> None:
    (out / "summary.json").write_text(
        json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n")


def _base_summary(cfg: ExperimentConfig, command: str) -> dict:
    pcm = cfg.map_object()
    hyp = analyze_matrix(pcm.matrix)
    Lambda_est = hyp.Lambda if pcm.is_pure else jacobian_inverse_sup(pcm, grid=256)
    ks = []
    k = cfg.k0
    B = pcm.matrix.inv_transpose()
    while abs(k[0]) <= cfg.max_mode and abs(k[1]) <= cfg.max_mode:
        ks.append([int(k[0]), int(k[1])])
        k = B.apply_int((int(k[0]), int(k[1])))
    return {
        "command": command,
        "matrix": list(cfg.matrix),
        "shears": [dict(s) for s in cfg.shears],
        "eps": pcm.eps,
        "k0": list(cfg.k0),
        "kappa": cfg.kappa,
        "max_mode": cfg.max_mode,
        "tol": cfg.tol,
        "seed": cfg.seed,
        "lambda": hyp.lambda_,
        "Lambda_est": Lambda_est,
        "v_u": hyp.v_u,
        "v_s": hyp.v_s,
        "pulses": ks,
        "version": __version__,
    }


def _map_gamma(cfg: ExperimentConfig) -> float:
    """The map's advective H^{-1} rate, fitted at kappa = 0."""
    pcm = cfg.map_object()
    b = new_pure_mode(cfg.k0, cfg.max_mode)
    fit = h_minus1_decay_rate(b, pcm, 0.0, max(12, cfg.param("n_max", 12)))
    return fit.gamma_est


def _stationary(cfg: ExperimentConfig):
    if cfg.kappa <= 0:
        raise ConfigError("run.kappa must be positive for stationary experiments")
    b = new_pure_mode(cfg.k0, cfg.max_mode, cfg.grid_size)
    return stationary_spectrum(b, cfg.map_object(), cfg.kappa, cfg.tol,
                               n_cap=int(cfg.param("n_cap", 500)))


def cmd_pulses(cfg: ExperimentConfig, out: Path) -> None:
    n_max = int(cfg.param("n_max", 12))
    rows = centroid_variance_track(cfg.k0, cfg.map_object(), cfg.kappa, n_max,
                                   max_mode=cfg.max_mode)
    _csv(out / "track.csv", "n,drift,variance,l2,h1,hminus1",
         [(r.n, r.drift, r.variance, r.l2, r.h1, r.hm1) for r in rows])
    s = _base_summary(cfg, "pulses")
    s["n_rows"] = len(rows)
    _write_summary(out, s)


def cmd_stationary(cfg: ExperimentConfig, out: Path) -> None:
    spec = _stationary(cfg)
    order = np.lexsort((spec.ky, spec.kx))
    _csv(out / "spectrum.csv", "kx,ky,power",
         [(int(spec.kx[i]), int(spec.ky[i]), float(spec.power[i])) for i in order])
    s = _base_summary(cfg, "stationary")
    s.update(n_used=spec.n_used, tail_bound=spec.tail_bound, lost_mass=spec.lost_mass,
             gamma_est=_map_gamma(cfg), gamma_run=spec.gamma_est,
             total_power=spec.total_power)
    _write_summary(out, s)


def cmd_cumulative(cfg: ExperimentConfig, out: Path) -> None:
    n_list = [int(v) for v in cfg.param("n_list", [10, 25, 65])]
    spec = _stationary(cfg)
    vals = cumulative_curve(spec, n_list)
    gamma = _map_gamma(cfg)
    s = _base_summary(cfg, "cumulative")
    Lam = s["Lambda_est"]
    _csv(out / "cumulative.csv", "N,value,lower_ref,upper_ref",
         [(N, float(v), float(np.log(N) / (2 * Lam)), float(2 * np.log(N) / gamma))
          for N, v in zip(n_list, vals)])
    s.update(n_used=spec.n_used, tail_bound=spec.tail_bound, lost_mass=spec.lost_mass,
             gamma_est=gamma)
    _write_summary(out, s)


def cmd_shells(cfg: ExperimentConfig, out: Path) -> None:
    s = _base_summary(cfg, "shells")
    L = float(cfg.param("L", s["lambda"] ** 2))
    ell_max = cfg.param("ell_max")
    if ell_max is None:
        ell_max = max(int(np.floor(np.log(cfg.max_mode) / np.log(L))) - 1, 0)
    spec = _stationary(cfg)
    masses = shell_masses(spec, L, int(ell_max))
    ref = np.log(L) / np.log(s["lambda"])
    _csv(out / "shells.csv", "ell,mass,reference",
         [(ell, float(m), float(ref)) for ell, m in enumerate(masses)])
    s.update(L=L, ell_max=int(ell_max), n_used=spec.n_used, tail_bound=spec.tail_bound,
             lost_mass=spec.lost_mass, gamma_est=_map_gamma(cfg))
    _write_summary(out, s)


def cmd_sector(cfg: ExperimentConfig, out: Path) -> None:
    min_angle = float(cfg.param("min_angle", 0.3))
    spec = _stationary(cfg)
    hyp = analyze_matrix(cfg.map_object().matrix)
    prof = sector_profile(spec, hyp, min_angle)
    occ = prof.occupied & (prof.max_power > 0)
    _csv(out / "sector.csv", "radius_bin,max_power",
         [(int(r), float(p)) for r, p, o in zip(prof.radii, prof.max_power, occ) if o])
    s = _base_summary(cfg, "sector")
    fit_lo = float(cfg.param("fit_lo", 8.0))
    fit_hi = float(cfg.param("fit_hi", cfg.max_mode / 2))
    try:
        s["sector_fit_exponent"] = fit_sector_decay(prof, fit_lo, fit_hi)
    except NumericalError:
        s["sector_fit_exponent"] = None
    s.update(min_angle=min_angle, skipped_bins=prof.skipped, n_used=spec.n_used,
             tail_bound=spec.tail_bound)
    _write_summary(out, s)


def cmd_offpulse(cfg: ExperimentConfig, out: Path) -> None:
    R = float(cfg.param("R", 20.0))
    spec = _stationary(cfg)
    lam = analyze_matrix(cfg.map_object().matrix).lambda_
    n_pulse = int(2 * np.log(max(cfg.max_mode, 2)) / np.log(lam)) + 4
    ks = pulse_sequence(cfg.map_object().matrix, cfg.k0, n_pulse)
    off = offpulse_mass(spec, ks, R)
    below = spec.mass_where(spec.radii <= R)
    _csv(out / "offpulse.csv", "R,offpulse_mass,total_below_R,fraction",
         [(R, float(off), float(below), float(off / below if below > 0 else 0.0))])
    s = _base_summary(cfg, "offpulse")
    s.update(R=R, offpulse=off, total_below=below, n_used=spec.n_used,
             tail_bound=spec.tail_bound, lost_mass=spec.lost_mass)
    _write_summary(out, s)


def cmd_dissipative(cfg: ExperimentConfig, out: Path) -> None:
    kappas = [float(v) for v in cfg.param("kappas", [1e-2, 1e-3, 1e-4])]
    pcm = cfg.map_object()
    b = new_pure_mode(cfg.k0, cfg.max_mode, cfg.grid_size)
    rows = []
    for kap in kappas:
        if kap ** -0.5 > cfg.max_mode:
            raise ConfigError(f"dissipative threshold for kappa={kap:g} is beyond K")
        spec = stationary_spectrum(b, pcm, kap, cfg.tol)
        rows.append((kap, kap ** -0.5, dissipative_mass(spec, kap),
                     2.0 * l2_norm(b) ** 2))
    _csv(out / "dissipative.csv", "kappa,threshold,mass,bound", rows)
    s = _base_summary(cfg, "dissipative")
    s["kappas"] = kappas
    _write_summary(out, s)


def cmd_decay(cfg: ExperimentConfig, out: Path) -> None:
    pcm = cfg.map_object()
    b = new_pure_mode(cfg.k0, cfg.max_mode, cfg.grid_size)
    n_max = int(cfg.param("n_max", 12))
    p = float(cfg.param("p", 2.0))
    fit = h_minus1_decay_rate(b, pcm, cfg.kappa, max(n_max, 10))
    probe = anisotropic_decay_probe(b, pcm, cfg.kappa, p, n_max)
    from .transfer import iterate_pulses
    track = iterate_pulses(b, pcm, cfg.kappa, n_max, on_overflow="abort",
                           unbounded=pcm.is_pure)
    recs = {r.n: r for r in track.records}
    rows = []
    for i, n in enumerate(probe.ns):
        r = recs.get(int(n))
        if r is None:
            break
        rows.append((int(n), r.l2, r.h1, r.hm1, float(probe.hp[i]), float(probe.hmL[i])))
    _csv(out / "probes.csv", "n,l2,h1,hminus1,hp,hmL", rows)
    s = _base_summary(cfg, "decay")
    tau = None
    if cfg.kappa > 0:
        try:
            tau = enhanced_dissipation_time(b, pcm, cfg.kappa)
        except NumericalError:
            tau = None
    s.update(gamma_est=_map_gamma(cfg), gamma_run=fit.gamma_est,
             fit_quality=fit.fit_quality, r_fit=probe.r_fit, p=p, tau_kappa=tau)
    _write_summary(out, s)


def _selector_from_params(cfg: ExperimentConfig):
    sel = cfg.param("selector", {"kind": "ball", "radius": 10.0})
    kind = sel.get("kind", "ball")
    if kind == "ball":
        return Ball(float(sel.get("radius", 10.0)))
    if kind == "highpass":
        return HighPass(float(sel["cutoff"]))
    if kind == "sector":
        return Sector(tuple(sel["axis"]), float(sel["min_angle"]))
    if kind == "pulse_complement":
        ks = pulse_sequence(cfg.map_object().matrix, cfg.k0, int(sel.get("n_max", 12)))
        from .fields import Complement
        return Complement(PulseSet(tuple((int(a), int(b)) for a, b in ks)))
    raise ConfigError(f"unknown selector kind {kind!r}")


def cmd_mc(cfg: ExperimentConfig, out: Path) -> None:
    if cfg.kappa <= 0:
        raise ConfigError("run.kappa must be positive for mc")
    n_samples = int(cfg.param("n_samples", 1000))
    n_steps = int(cfg.param("n_steps", 60))
    sel = _selector_from_params(cfg)
    pcm = cfg.map_object()
    b = new_pure_mode(cfg.k0, cfg.max_mode, cfg.grid_size)
    mean, stderr = mc_expected_projection(b, pcm, cfg.kappa, sel, n_samples,
                                          n_steps, cfg.seed)
    spec = stationary_spectrum(b, pcm, cfg.kappa, cfg.tol)
    from .fields import selector_mask
    mask = selector_mask(sel, cfg.max_mode)
    dense = np.zeros((2 * cfg.max_mode + 1, 2 * cfg.max_mode + 1))
    dense[spec.kx + cfg.max_mode, spec.ky + cfg.max_mode] = spec.power
    series = float(np.sum(dense[mask]))
    payload = {
        "selector": _jsonable(cfg.param("selector", {"kind": "ball", "radius": 10.0})),
        "mean": mean,
        "stderr": stderr,
        "n_samples": n_samples,
        "n_steps": n_steps,
        "seed": cfg.seed,
        "series_reference": series,
    }
    (out / "mc_report.json").write_text(
        json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n")
    s = _base_summary(cfg, "mc")
    s.update(payload)
    _write_summary(out, s)


def cmd_validate(cfg: ExperimentConfig, out: Path) -> None:
    from .validate import run_validation
    results = run_validation(cfg)
    lines = []
    n_fail = 0
    for name, ok, detail in results:
        lines.append(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        n_fail += 0 if ok else 1
    text = "\n".join(lines)
    print(text)
    (out / "validate.txt").write_text(text + "\n")
    s = _base_summary(cfg, "validate")
    s.update(n_checks=len(results), n_failed=n_fail)
    _write_summary(out, s)
    if n_fail:
        raise NumericalError(f"{n_fail} validation checks failed")


COMMANDS = {
    "pulses": cmd_pulses,
    "stationary": cmd_stationary,
    "cumulative": cmd_cumulative,
    "shells": cmd_shells,
    "sector": cmd_sector,
    "offpulse": cmd_offpulse,
    "dissipative": cmd_dissipative,
    "decay": cmd_decay,
    "mc": cmd_mc,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="catmix",
        description="Pulsed-diffusion passive-scalar experiments on the 2-torus. "
                    "Config defaults: " + "; ".join(
                        f"{k}={v}" for k, v in (
                            ("matrix", list(DEFAULTS.matrix)), ("k0", list(DEFAULTS.k0)),
                            ("max_mode", DEFAULTS.max_mode), ("kappa", DEFAULTS.kappa),
                            ("tol", DEFAULTS.tol), ("seed", DEFAULTS.seed))))
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="TOML experiment config")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override run.seed")
    sub.add_parser("print-config", help="dump the default config as TOML")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "print-config":
        sys.stdout.write(serialize_config(DEFAULTS))
        return 0
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](cfg, out)
    except (ConfigError, ValueError) as e:
        # precondition violations are configuration problems
        print(f'catmix-error code=2 command={args.command} message="{e}"', file=sys.stderr)
        return 2
    except (NumericalError, TruncationOverflow) as e:
        print(f'catmix-error code=3 command={args.command} message="{e}"', file=sys.stderr)
        return 3
    return 0
