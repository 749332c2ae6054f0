"""Command-line entry points.

Exit codes: 0 success, 1 conversion/verification failure, 2 usage error.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .convert import ConversionError, convert as run_convert
from .summary import summarize as run_summarize


@click.group()
def main():
    """Episode dataset conversion and inspection."""


@main.command()
@click.argument("src", type=click.Path())
@click.argument("out_path", type=click.Path())
@click.option("--chunk-rows", type=int, default=None,
              help="Rows per chunk along the time axis (default: one chunk).")
def convert(src, out_path, chunk_rows):
    """Convert an episode file or directory to a Zarr store at OUT_PATH."""
    if chunk_rows is not None and chunk_rows < 1:
        click.echo("error: --chunk-rows must be >= 1", err=True)
        sys.exit(2)
    try:
        report = run_convert(src, out_path, chunk_rows)
    except ConversionError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(2)
    click.echo(report.to_text())
    sys.exit(0 if report.ok else 1)


@main.command()
@click.argument("path", type=click.Path())
def summarize(path):
    """Print a per-layout summary table for episodes under PATH."""
    if not Path(path).exists():
        click.echo(f"error: path not found: {path}", err=True)
        sys.exit(2)
    click.echo(run_summarize(path))


if __name__ == "__main__":
    main()
