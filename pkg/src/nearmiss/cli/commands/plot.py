"""Plot command implementation."""

from argparse import Namespace

from nearmiss.cli.utils import prepare_run, require, write_run_info
from nearmiss.core.logger import get_logger
from nearmiss.train.curve import TrainingCurve
from nearmiss.train.plot import plot_curves

logger = get_logger(__name__)


def cmd_plot(args: Namespace) -> None:
    """Handle 'nearmiss plot' command."""
    cfg, layout = prepare_run(args)
    curve = TrainingCurve.read(
        require(layout.curve, "run 'nearmiss train' first"),
        layout.validation_curve,
    )
    window = args.window or cfg.train.smoothing_window
    paths = plot_curves(curve, layout.plots_dir, window=window)
    write_run_info(
        layout, cfg, "plot", {"plots": [path.name for path in paths]}
    )
