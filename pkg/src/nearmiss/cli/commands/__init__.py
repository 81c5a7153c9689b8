"""CLI command implementations, one module per sub-command."""

from nearmiss.cli.commands.evaluate import cmd_eval
from nearmiss.cli.commands.explain import cmd_explain
from nearmiss.cli.commands.plot import cmd_plot
from nearmiss.cli.commands.prepare import cmd_prepare
from nearmiss.cli.commands.synth import cmd_synth
from nearmiss.cli.commands.train import cmd_train

__all__ = [
    "cmd_eval",
    "cmd_explain",
    "cmd_plot",
    "cmd_prepare",
    "cmd_synth",
    "cmd_train",
]
