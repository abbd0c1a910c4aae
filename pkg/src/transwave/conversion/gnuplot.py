"""Gnuplot scripts for the CSV outputs.

Plots are emitted as data plus script rather than rendered images; run ``gnuplot <script>`` in the output
directory to produce a PNG next to the data. Every script starts with the same ``#`` header as its data.
"""

from pathlib import Path

from transwave.config import SystemConfig
from transwave.conversion.json import header_lines

_PREAMBLE = """set datafile separator ','
set datafile commentschars '#'
set key top right
set grid
set terminal pngcairo size 1000,700
"""


def _write(path: Path, body: str, cfg: SystemConfig, settings: dict | None) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    header = "\n".join(header_lines(cfg, settings)) + "\n"
    path.write_text(header + _PREAMBLE + body)
    return path


def spectrum_script(csv_name: str, path: str | Path, cfg: SystemConfig, settings: dict | None = None) -> Path:
    """Scatter plot of the eigenvalues in the complex plane."""
    path = Path(path)
    stem = Path(csv_name).stem
    body = f"""set output '{stem}.png'
set xlabel 'Re {{/Symbol l}}'
set ylabel 'Im {{/Symbol l}}'
set title 'Spectrum of the discrete generator'
plot '{csv_name}' every ::1 using 1:2 with points pt 7 ps 0.5 title 'eigenvalues'
"""
    return _write(path, body, cfg, settings)


def resolvent_script(
    csv_name: str,
    path: str | Path,
    cfg: SystemConfig,
    settings: dict | None = None,
    exponent: float | None = None,
    envelope_csv: str | None = None,
) -> Path:
    """Log-log plot of the sampled resolvent norm with the refined envelope peaks on top."""
    path = Path(path)
    stem = Path(csv_name).stem
    title = "Resolvent norm along the imaginary axis"
    if exponent is not None:
        title += f" (envelope exponent {exponent:.3f})"
    plots = [f"'{csv_name}' every ::1 using 1:2 with lines title 'norm'"]
    if envelope_csv is None:
        plots.append(f"'{csv_name}' every ::1 using 1:($3 > 0 ? $2 : 1/0) with points pt 7 title 'envelope'")
    else:
        plots.append(f"'{envelope_csv}' every ::1 using 1:2 with points pt 6 title 'refined peaks'")
        plots.append(f"'{envelope_csv}' every ::1 using 1:($4 > 0 ? $2 : 1/0) with points pt 7 title 'fitted'")
    joined = ", \\\n     ".join(plots)
    body = f"""set output '{stem}.png'
set logscale xy
set xlabel '{{/Symbol l}}'
set ylabel '||(i{{/Symbol l}} - A_h)^{{-1}}||_H'
set title '{title}'
plot {joined}
"""
    return _write(path, body, cfg, settings)


def trace_script(
    csv_name: str, path: str | Path, cfg: SystemConfig, settings: dict | None = None, loglog: bool = False
) -> Path:
    """Energy trace in semi-log (exponential decay) or log-log (polynomial decay) axes."""
    path = Path(path)
    stem = Path(csv_name).stem
    scale = "set logscale xy" if loglog else "set logscale y"
    suffix = "loglog" if loglog else "semilog"
    body = f"""set output '{stem}_{suffix}.png'
{scale}
set xlabel 't'
set ylabel 'E(t)'
set title 'Energy decay'
plot '{csv_name}' every ::1 using 1:($2 > 0 ? $2 : 1/0) with lines title 'E(t)'
"""
    return _write(path, body, cfg, settings)
