"""Tests for nearmiss.main module."""

from pathlib import Path
from unittest.mock import Mock

import pytest

from nearmiss.core.errors import MissingArtifactError
from nearmiss.main import command_handlers, main


class TestMain:
    """Tests for main function."""

    @pytest.mark.parametrize(
        "command", ["synth", "prepare", "train", "eval", "explain", "plot"]
    )
    def test_dispatch(
        self, monkeypatch: pytest.MonkeyPatch, command: str
    ) -> None:
        """Test that each sub-command reaches its handler."""
        handler = Mock()
        monkeypatch.setitem(command_handlers, command, handler)

        result = main([command, "--set", "train.max_epochs=1"])

        assert result == 0
        handler.assert_called_once()
        assert handler.call_args.args[0].set == ["train.max_epochs=1"]

    @pytest.mark.parametrize("argv", [["--help"], ["--version"]])
    def test_info_flags_exit_zero(self, argv: list[str]) -> None:
        """Test that help and version are successful runs."""
        assert main(argv) == 0

    @pytest.mark.parametrize("argv", [[], ["bogus"], ["eval", "--nope"]])
    def test_usage_errors(self, argv: list[str]) -> None:
        """Test that usage errors exit with 1."""
        assert main(argv) == 1

    def test_command_failure(
        self,
        monkeypatch: pytest.MonkeyPatch,
        capsys: pytest.CaptureFixture[str],
    ) -> None:
        """Test that a failing command prints one error line and exits 2."""
        handler = Mock(
            side_effect=MissingArtifactError(
                Path("runs/x/splits.json"), "run 'nearmiss prepare' first"
            )
        )
        monkeypatch.setitem(command_handlers, "train", handler)

        result = main(["train"])

        assert result == 2
        err = capsys.readouterr().err
        assert err.startswith("error: MissingArtifactError: missing artifact")
        assert "nearmiss prepare" in err

    def test_missing_artifact_end_to_end(
        self, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """Test that training before prepare names the missing file."""
        result = main(["train", "--set", f"io.output_dir={tmp_path}"])

        assert result == 2
        err = capsys.readouterr().err
        assert "error: MissingArtifactError" in err
        assert "run 'nearmiss synth' first" in err

    def test_invalid_config(
        self, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """Test that config problems fail before any work."""
        result = main(
            [
                "prepare",
                "--set",
                f"io.output_dir={tmp_path}",
                "--set",
                "data.bogus=1",
            ]
        )

        assert result == 2
        assert "unknown key data.bogus" in capsys.readouterr().err
