"""Report figures: final-size histograms with their asymptotic normal
overlays, and finite-n convergence plots for the table reproduction.

matplotlib is imported lazily with the Agg backend so the CLI stays usable
on headless machines and figure rendering stays opt-in.
"""

from __future__ import annotations

import math

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def save_histogram(
    values,
    n: int,
    path: str,
    clt_mean: float | None = None,
    sigma2: float | None = None,
    weight: float = 1.0,
    title: str = "",
    xlabel: str = "final size",
):
    """Histogram of outcome counts with an optional N(n*mean, n*sigma2) overlay.

    weight scales the overlay density (e.g. the major-outbreak probability
    when the normal approximates only the major-outbreak component).
    """
    plt = _pyplot()
    values = np.asarray(values)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    lo, hi = int(values.min()), int(values.max())
    span = max(hi - lo, 1)
    binwidth = max(1, int(math.ceil(span / 80)))
    bins = np.arange(lo - 0.5, hi + binwidth + 0.5, binwidth)
    ax.hist(values, bins=bins, density=True, color="#7da7d9", edgecolor="none")
    if clt_mean is not None and sigma2 is not None and sigma2 > 0:
        mu = n * clt_mean
        sd = math.sqrt(n * sigma2)
        xs = np.linspace(max(lo, mu - 4 * sd), min(hi + binwidth, mu + 4 * sd), 400)
        pdf = weight * np.exp(-0.5 * ((xs - mu) / sd) ** 2) / (sd * math.sqrt(2 * math.pi))
        ax.plot(xs, pdf, "k-", lw=1.5, label="asymptotic normal")
        ax.legend(frameon=False)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("density")
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_convergence_plot(rows, label: str, path: str):
    """Finite-n means/variances against their asymptotes for one degree family.

    rows: list of dicts with keys n, rho_const, sigma2_const, rho_zeroinf,
    sigma2_zeroinf; the row with n == 'inf' supplies the asymptotes.
    """
    plt = _pyplot()
    finite = [r for r in rows if r["n"] != "inf"]
    asym = next((r for r in rows if r["n"] == "inf"), None)
    ns = [r["n"] for r in finite]
    fig, axes = plt.subplots(1, 2, figsize=(9.6, 3.8))
    for ax, stat in zip(axes, ("rho", "sigma2")):
        for variant, marker in (("const", "o"), ("zeroinf", "s")):
            ax.plot(
                ns,
                [r[f"{stat}_{variant}"] for r in finite],
                marker=marker,
                ms=4,
                label=f"I {'constant' if variant == 'const' else '0-or-inf'}",
            )
            if asym is not None:
                ax.axhline(asym[f"{stat}_{variant}"], color="k", lw=0.8, ls="--")
        ax.set_xscale("log")
        ax.set_xlabel("n")
        ax.set_ylabel("mean fraction" if stat == "rho" else "scaled variance")
        ax.legend(frameon=False, fontsize=8)
    fig.suptitle(label, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
