"""Static plots of flow traces and curves.

matplotlib is imported lazily; without it the plotting functions print an
installation hint and return False instead of raising.
"""

from pathlib import Path

import numpy as np
import pandas as pd

from .geometry.models import Polyline


def plot_trace(
    df: pd.DataFrame,
    filepath: str | Path,
    show: bool = False,
) -> bool:
    """Plot energy and projected gradient norm against the iteration.

    Args:
        df: Trace table with ``iter``, ``energy`` and ``grad_norm_J`` columns
        filepath: Output image path
        show: Display the figure interactively after saving

    Returns:
        bool: True if the plot was written, False if matplotlib is missing
    """
    try:
        import matplotlib.pyplot as plt
    except ImportError:
        print(
            "Error: matplotlib is required for plotting. "
            "Install with 'pixi install matplotlib'"
        )
        return False

    fig, (ax_energy, ax_grad) = plt.subplots(2, 1, figsize=(10, 8), sharex=True)
    ax_energy.plot(df["iter"], df["energy"], "b-", linewidth=1)
    ax_energy.set_ylabel("Energy")
    ax_energy.set_title("Projected Sobolev gradient flow")
    ax_energy.grid(True, alpha=0.3)

    # zero norms (critical row) cannot be shown on a log axis
    grad = df["grad_norm_J"].to_numpy(dtype=float)
    ax_grad.semilogy(df["iter"], np.where(grad > 0.0, grad, np.nan), "r-")
    ax_grad.set_xlabel("Iteration")
    ax_grad.set_ylabel("‖g‖_J")
    ax_grad.grid(True, alpha=0.3)

    output_path = Path(filepath)
    fig.savefig(output_path, dpi=150, bbox_inches="tight")
    print(f"Plot saved as '{output_path}'")
    if show:
        plt.show()
    else:
        plt.close(fig)
    return True


def plot_curve(P: Polyline, filepath: str | Path, show: bool = False) -> bool:
    """Draw a closed polyline in 3D (planar curves are drawn at z = 0)."""
    try:
        import matplotlib.pyplot as plt
    except ImportError:
        print(
            "Error: matplotlib is required for plotting. "
            "Install with 'pixi install matplotlib'"
        )
        return False

    points = P.points
    if P.ambient_dim == 2:
        points = np.column_stack([points, np.zeros(P.n_vertices)])
    closed = np.vstack([points[:, :3], points[:1, :3]])

    fig = plt.figure(figsize=(8, 8))
    ax = fig.add_subplot(projection="3d")
    ax.plot(closed[:, 0], closed[:, 1], closed[:, 2], "b-", linewidth=1.5)
    ax.scatter(points[:, 0], points[:, 1], points[:, 2], s=4, c="k")
    ax.set_box_aspect(np.ptp(closed, axis=0) + 1e-12)
    ax.set_axis_off()

    output_path = Path(filepath)
    fig.savefig(output_path, dpi=150, bbox_inches="tight")
    print(f"Plot saved as '{output_path}'")
    if show:
        plt.show()
    else:
        plt.close(fig)
    return True
