"""Paper-style figures from catmix run directories.

Strictly file-based: each kind reads the CSVs/summary.json a catmix
subcommand wrote and emits one PNG.  Rendering is deterministic (fixed style,
no timestamps) so reruns are byte-identical.

    catmix-render --kind {cumulative|heatmap|shells|sector|drift} --in DIR --out FILE.png
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render", "main", "RenderError", "KINDS"]

FIGSIZE = (6.4, 4.4)
DPI = 130


class RenderError(RuntimeError):
    """Missing or malformed inputs for a figure."""


def _read_csv(path: Path, columns: list[str]) -> dict[str, np.ndarray]:
    if not path.exists():
        raise RenderError(f"missing input file: {path}")
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in columns:
            if col not in header:
                raise RenderError(f"missing column '{col}' in {path}")
        rows = list(reader)
    if not rows:
        raise RenderError(f"no data rows in {path}")
    return {c: np.array([float(r[c]) for r in rows]) for c in columns}


def _read_summary(indir: Path) -> dict:
    path = indir / "summary.json"
    if not path.exists():
        raise RenderError(f"missing input file: {path}")
    return json.loads(path.read_text())


def _new_axes(title: str):
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.25, linewidth=0.5)
    return fig, ax


def _save(fig, out: Path) -> None:
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, metadata={"Software": None})
    plt.close(fig)


def render_cumulative(indir: Path, out: Path) -> None:
    data = _read_csv(indir / "cumulative.csv", ["N", "value", "lower_ref", "upper_ref"])
    s = _read_summary(indir)
    fig, ax = _new_axes("Cumulative spectral mass")
    logN = np.log(data["N"])
    ax.plot(logN, data["value"], "o-", color="k", label="measured")
    lam_slope = 1.0 / (2.0 * s["Lambda_est"])
    gam_slope = 2.0 / s["gamma_est"]
    ax.plot(logN, data["lower_ref"], "--", color="tab:blue",
            label=f"slope 1/(2$\\Lambda$) = {lam_slope:.3f}")
    ax.plot(logN, data["upper_ref"], "--", color="tab:red",
            label=f"slope 2/$\\gamma$ = {gam_slope:.3f}")
    ax.set_xlabel("log N")
    ax.set_ylabel("mass below N")
    ax.legend(loc="upper left", fontsize=8)
    _save(fig, out)


def render_heatmap(indir: Path, out: Path) -> None:
    data = _read_csv(indir / "spectrum.csv", ["kx", "ky", "power"])
    s = _read_summary(indir)
    K = int(s["max_mode"])
    grid = np.full((2 * K + 1, 2 * K + 1), np.nan)
    kx = data["kx"].astype(int)
    ky = data["ky"].astype(int)
    grid[kx + K, ky + K] = np.log10(np.maximum(data["power"], 1e-300))
    fig, ax = _new_axes("Stationary power spectrum (log10)")
    im = ax.imshow(grid.T, origin="lower", extent=(-K, K, -K, K),
                   cmap="magma", vmin=-16, vmax=0.5, interpolation="nearest")
    fig.colorbar(im, ax=ax, shrink=0.85)
    # contracting eigenline and circled pulse sites from the run summary
    vs = s.get("v_s")
    if vs:
        tt = np.linspace(-K, K, 3)
        denom = vs[0] if abs(vs[0]) > 1e-12 else 1e-12
        ax.plot(tt, tt * vs[1] / denom, color="cyan", linewidth=0.8, alpha=0.8)
    for kxp, kyp in s.get("pulses", []):
        ax.add_patch(plt.Circle((kxp, kyp), max(K / 60, 1.2), fill=False,
                                color="lime", linewidth=0.9))
    ax.set_xlim(-K, K)
    ax.set_ylim(-K, K)
    ax.set_xlabel("kx")
    ax.set_ylabel("ky")
    _save(fig, out)


def render_shells(indir: Path, out: Path) -> None:
    data = _read_csv(indir / "shells.csv", ["ell", "mass", "reference"])
    fig, ax = _new_axes("Exponential shell masses")
    ax.bar(data["ell"], data["mass"], color="tab:blue", width=0.6, label="shell mass")
    ax.axhline(data["reference"][0], color="k", linestyle="--",
               label="log L / log $\\lambda$")
    ax.set_xlabel("shell index $\\ell$  ($L^\\ell \\leq |k| \\leq L^{\\ell+1}$)")
    ax.set_ylabel("mass")
    ax.legend(fontsize=8)
    _save(fig, out)


def render_sector(indir: Path, out: Path) -> None:
    data = _read_csv(indir / "sector.csv", ["radius_bin", "max_power"])
    s = _read_summary(indir)
    pos = data["max_power"] > 0
    if not np.any(pos):
        raise RenderError("sector.csv has no positive-power bins")
    fig, ax = _new_axes("Sector max power vs radius")
    ax.loglog(data["radius_bin"][pos], data["max_power"][pos], "o",
              color="k", markersize=3.5, label="bin max")
    expo = s.get("sector_fit_exponent")
    if expo is not None:
        r = data["radius_bin"][pos]
        anchor = data["max_power"][pos][0] * (r / r[0]) ** expo
        ax.loglog(r, anchor, "--", color="tab:red",
                  label=f"fit slope {expo:.2f}")
    ax.set_xlabel("|k|")
    ax.set_ylabel("max power in sector")
    ax.legend(fontsize=8)
    _save(fig, out)


def render_drift(indir: Path, out: Path) -> None:
    data = _read_csv(indir / "track.csv",
                     ["n", "drift", "variance", "l2", "h1", "hminus1"])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 4.0), dpi=DPI)
    ax1.plot(data["n"], data["drift"], "o-", color="tab:blue")
    ax1.set_xlabel("n")
    ax1.set_ylabel("|centroid $-$ $k_n$|")
    ax1.set_title("Centroid drift")
    ax1.grid(alpha=0.25, linewidth=0.5)
    ax2.semilogy(data["n"], np.maximum(data["variance"], 1e-18), "s-",
                 color="tab:red")
    ax2.set_xlabel("n")
    ax2.set_ylabel("spectral variance")
    ax2.set_title("Variance growth")
    ax2.grid(alpha=0.25, linewidth=0.5)
    fig.tight_layout()
    _save(fig, out)


KINDS = {
    "cumulative": render_cumulative,
    "heatmap": render_heatmap,
    "shells": render_shells,
    "sector": render_sector,
    "drift": render_drift,
}


def render(kind: str, indir: "Path | str", out: "Path | str") -> None:
    if kind not in KINDS:
        raise RenderError(f"unknown figure kind '{kind}'")
    KINDS[kind](Path(indir), Path(out))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="catmix-render",
                                 description="Render catmix run outputs to PNG.")
    ap.add_argument("--kind", required=True, choices=sorted(KINDS))
    ap.add_argument("--in", dest="indir", required=True,
                    help="directory holding the run's CSV/JSON outputs")
    ap.add_argument("--out", required=True, help="output PNG path")
    args = ap.parse_args(argv)
    try:
        render(args.kind, args.indir, args.out)
    except RenderError as e:
        print(f"catmix-render-error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
