"""Figure rendering for the CLI report paths.

Figures are rendered headlessly to files next to the delimited output;
nothing is ever shown interactively.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def _finish(fig, path: str) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_witness(rows, path: str) -> None:
    """Ratio curve r_n (log scale) over witness levels."""
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    levels = [r.level for r in rows]
    ax.semilogy(levels, [r.ratio for r in rows], "o-", color="tab:red")
    ax.set_xlabel("level n")
    ax.set_ylabel(r"$r_n = \|\nabla f_n\|^2 / (\|f_n\|^2 + \|Hf_n\|^2)$")
    ax.set_title(f"blow-up witness, lambda = {rows[0].lam:g}")
    ax.grid(True, which="both", alpha=0.3)
    _finish(fig, path)


def plot_spectrum(eigenvalues, path: str, paired=None) -> None:
    """Eigenvalue ladder; optionally a Dirichlet/Neumann pair of ladders."""
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    series = [("spectrum", eigenvalues, "tab:blue")] if paired is None else [
        ("dirichlet", eigenvalues, "tab:blue"), ("kirchhoff", paired, "tab:green")]
    for label, evs, colour in series:
        lams = []
        for ev in evs:
            lams.extend([ev.lam] * ev.multiplicity)
        ax.plot(range(1, len(lams) + 1), lams, "o-", ms=4, label=label, color=colour)
    ax.set_xlabel("index")
    ax.set_ylabel("eigenvalue")
    if paired is not None:
        ax.legend()
    ax.grid(True, alpha=0.3)
    _finish(fig, path)


def plot_components(counts, path: str) -> None:
    """Ball-complement component counts against the radius."""
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    radii = [r for r, _ in counts]
    values = [c for _, c in counts]
    if max(values) / max(1, min(values)) > 50:
        ax.semilogy(radii, values, "s-", color="tab:purple")
    else:
        ax.plot(radii, values, "s-", color="tab:purple")
    ax.set_xlabel("radius R")
    ax.set_ylabel("components beyond the R-ball")
    ax.grid(True, which="both", alpha=0.3)
    _finish(fig, path)


def plot_kernels(data, kernel_rows, path: str, layers: int = 8,
                 samples_per_layer: int = 24) -> None:
    """Kernel profiles g_n over [t_n, L) plus the step weight."""
    from .radial import kernel_g

    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(5.4, 5.2), sharex=True)
    upto = min(layers, max(row[0] for row in kernel_rows) + 3)
    sw = data.step_weight(upto)
    xs, ys = [], []
    for i, value in enumerate(sw.values):
        xs += [float(sw.breakpoints[i]), float(sw.breakpoints[i + 1])]
        ys += [float(value), float(value)]
    ax0.semilogy(xs, ys, color="tab:gray")
    ax0.set_ylabel("step weight")
    ax0.grid(True, which="both", alpha=0.3)

    for n, _, _, _ in kernel_rows[: min(len(kernel_rows), 6)]:
        g = kernel_g(data, n)
        pts_x, pts_y = [], []
        for j in range(n, upto):
            t0, t1 = float(data.t(j)), float(data.t(j + 1))
            for i in range(samples_per_layer):
                x = t0 + (t1 - t0) * i / samples_per_layer
                pts_x.append(x)
                pts_y.append(g.value(x))
        ax1.plot(pts_x, pts_y, label=f"n={n}")
    ax1.set_xlabel("distance from the root")
    ax1.set_ylabel("kernel value")
    ax1.legend(fontsize=8)
    ax1.grid(True, alpha=0.3)
    _finish(fig, path)
