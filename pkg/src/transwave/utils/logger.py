import atexit
import csv
from datetime import datetime
from pathlib import Path
from typing import Any, Sequence

import jax
from loguru import logger
from rich.console import Console
from rich.markup import escape
from rich.progress import Progress, SpinnerColumn, TimeElapsedColumn
from rich.table import Table


def init_working_directory(experiment_name: str, wd_name: str | None = None, root: Path | None = None) -> Path:
    """Creates a timestamped output directory ``<root>/outputs/<day>/<experiment_name>/<time or wd_name>``.

    Args:
        experiment_name (str): Name of the experiment
        wd_name (str | None, optional): Specific name for the working directory. If None, uses the time of day.
        root (Path | None, optional): Parent directory. Defaults to the current working directory.

    Returns:
        Path: Created working directory path
    """
    cur_time = datetime.now().strftime("%Y-%m-%d_%H-%M-%S.%f")
    day, daytime = cur_time.split("_")
    base = Path.cwd() if root is None else root
    new_cwd = base / "outputs" / day / experiment_name / (daytime if wd_name is None else wd_name)
    new_cwd.mkdir(parents=True)
    return new_cwd


_LEVEL_COLORS = {
    "TRACE": "dim blue",
    "DEBUG": "cyan",
    "INFO": "bold",
    "SUCCESS": "bold green",
    "WARNING": "yellow",
    "ERROR": "bold red",
    "CRITICAL": "bold white on red",
}


def _log_formatter(record: Any) -> str:
    """Rich markup template for the console sink."""
    color = _LEVEL_COLORS.get(record["level"].name, "cyan")
    # messages may contain braces, so they go through extra instead of the template
    record["extra"]["markup"] = escape(record["message"])
    return (
        "[green]{time:HH:mm:ss.SSS}[/green] {level: <7} | {name}:{line} - "
        + f"[{color}]{{extra[markup]}}[/{color}]"
    )


class Logger:
    """Routes loguru output to a rich console and a log file, and records scalar metrics.

    Everything a command produces lands in one output directory: ``logs.log`` with the full log,
    ``metrics.csv`` with an optional ``#`` header and the scalars passed to :meth:`write`, and whatever data files the command writes
    into :attr:`cwd`.

    Args:
        output_dir (Path | None): Directory for all outputs, created if needed. If None, a timestamped
            directory below ``outputs/`` is created.
        experiment_name (str, optional): Name used for timestamped directories. Defaults to "transwave".
        level (str, optional): Console log level. Defaults to "INFO".
    """

    def __init__(self, output_dir: Path | None = None, experiment_name: str = "transwave", level: str = "INFO"):
        if output_dir is None:
            self.cwd = init_working_directory(experiment_name)
        else:
            self.cwd = Path(output_dir)
            self.cwd.mkdir(parents=True, exist_ok=True)
        self.console = Console(stderr=True)
        self.progress = Progress(
            SpinnerColumn(),
            *Progress.get_default_columns(),
            TimeElapsedColumn(),
            console=self.console,
            transient=True,
        ).__enter__()
        atexit.register(self.progress.stop)
        logger.remove()
        logger.add(
            self.console.print,
            level=level,
            format=_log_formatter,
            colorize=True,
        )
        self._file_sink = logger.add(
            self.cwd / "logs.log",
            level="TRACE",
            format="{time:DD.MM.YYYY HH:mm:ss:ssss} | {level} - {message}",
        )
        logger.info(f"Writing outputs to {self.cwd}")
        self.fieldnames: list[str] | None = None
        self.writer = None
        self.csvfile = open(self.cwd / "metrics.csv", "w", newline="")
        atexit.register(self.csvfile.close)

    def path(self, filename: str) -> Path:
        """Path of an output file inside the working directory."""
        return self.cwd / filename

    def write_header(self, lines: Sequence[str]):
        """Write ``#`` comment lines at the top of ``metrics.csv``; only allowed before the first :meth:`write`."""
        if self.fieldnames is not None:
            raise RuntimeError("metrics.csv already has rows, the header must come first")
        for line in lines:
            self.csvfile.write(line if line.startswith("#") else f"# {line}")
            self.csvfile.write("\n")
        self.csvfile.flush()

    def write(self, stats: dict, do_print: bool = True):
        """Write scalar statistics to ``metrics.csv`` and optionally print them as a table.

        Non-scalar entries are ignored. The CSV header is fixed by the first call.

        Args:
            stats (dict): Dictionary of statistics to record
            do_print (bool, optional): Whether to print stats to console. Defaults to true.
        """
        stats = {
            k: v.item() if isinstance(v, jax.Array) else v
            for k, v in stats.items()
            if isinstance(v, (int, float, str)) or (isinstance(v, jax.Array) and v.size == 1)
        }
        if self.fieldnames is None:
            self.fieldnames = list(stats.keys())
            self.writer = csv.DictWriter(self.csvfile, fieldnames=self.fieldnames, extrasaction="ignore")
            self.writer.writeheader()
        assert self.writer is not None
        self.writer.writerow(stats)
        self.csvfile.flush()
        if do_print:
            table = Table(box=None)
            table.add_column("metric")
            table.add_column("value")
            for k, v in stats.items():
                table.add_row(k, str(v))
            self.console.print(table)

    def close(self):
        """Stops the progress display, closes the metrics file and detaches the log file sink."""
        self.progress.stop()
        if not self.csvfile.closed:
            self.csvfile.close()
        try:
            logger.remove(self._file_sink)
        except ValueError:
            pass
