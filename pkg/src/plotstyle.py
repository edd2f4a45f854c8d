# --- central plotting style helper ---
def apply_plot_style(rc_overrides: dict | None = None):
    """Set a project-wide Matplotlib style with sensible defaults.

    Parameters
    ----------
    rc_overrides : dict | None
        Optional dictionary of rcParams to override the defaults here.
    """
    import matplotlib as mpl
    import matplotlib.pyplot as plt  # noqa: F401  (backend init; also gives plt.cycler)

    rc = {
        # --- Export / typography ---
        "pdf.fonttype": 42,
        "ps.fonttype": 42,
        "savefig.bbox": "tight",
        "figure.dpi": 150,
        "savefig.dpi": 150,

        # --- Grid & spines ---
        "axes.grid": True,
        "grid.linestyle": ":",
        "grid.alpha": 0.25,
        "axes.spines.top": False,
        "axes.spines.right": False,

        # --- Titles & labels ---
        "axes.titlesize": 12,
        "axes.labelsize": "medium",
        "lines.linewidth": 1.4,
        "legend.frameon": False,
        "legend.fontsize": "small",
        "xtick.labelsize": "small",
        "ytick.labelsize": "small",

        "axes.prop_cycle": plt.cycler("color", list(LABEL_COLORS.values())),
    }

    if rc_overrides:
        rc.update(rc_overrides)
    mpl.rcParams.update(rc)


# one colour per traffic class; attack types share the red/orange/purple end
LABEL_COLORS = {
    "Benign": "#2ca02c",
    "TcpSynFlood": "#d62728",
    "IcmpFlood": "#ff7f0e",
    "TcpSeqPrediction": "#8c564b",
    "HulkGet": "#e377c2",
    "Slowloris": "#9467bd",
    "SlowBody": "#bcbd22",
    "SlowRead": "#17becf",
    "SlowRange": "#1f77b4",
    "BruteForce": "#7f0000",
    "Heartbleed": "#ff9896",
    "Infrastructure": "#7f7f7f",
}


def label_color(name: str) -> str:
    """Colour of a label class (attack type, "Benign" or "Infrastructure")."""
    return LABEL_COLORS.get(name, "#000000")
