"""Figure output for sweep and distance reports. Files only, no interactive display."""

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

golden_mean = (np.sqrt(5) - 1.0) / 2.0
fig_width = 5.0

params = {
    "axes.labelsize": 10,
    "font.size": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 9,
    "ytick.labelsize": 9,
    "figure.figsize": [fig_width, fig_width * golden_mean],
    "figure.dpi": 150,
    "lines.markersize": 4,
    "lines.linewidth": 1.2,
    "axes.grid": True,
    "grid.alpha": 0.3,
}


def plot_ber(curves, path, title=None):
    """Semilog BER against Eb/N0; ``curves`` maps a legend label to a list of BerPoint."""
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        for label, points in curves.items():
            pts = [p for p in points if p.bit_errors > 0]
            if not pts:
                continue
            ax.semilogy([p.ebn0_db for p in pts], [p.ber for p in pts], "o-", label=label)
        ax.set_xlabel(r"$E_b/N_0$ (dB)")
        ax.set_ylabel("BER")
        if title:
            ax.set_title(title)
        if ax.lines:
            ax.legend()
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def plot_distance(profile, path, title=None):
    """Minimum inter-class distance against window length."""
    with plt.rc_context(params):
        fig, ax = plt.subplots()
        ax.plot([n for n, _ in profile], [d for _, d in profile], "s-")
        ax.set_xlabel(r"window length $N_p$")
        ax.set_ylabel("minimum class distance $d$")
        if title:
            ax.set_title(title)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
