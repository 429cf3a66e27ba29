"""Command-line interface: render, validate, census and bind.

Exit status: 0 success, 1 usage error, 2 parse or validation errors,
3 binding errors, 4 asset errors. Diagnostics go to standard error; data
goes to standard output unless ``-o`` names a file.
"""

from __future__ import annotations

import logging
import os
import sys
from pathlib import Path

import click

from . import __version__
from .analyzer import census_table
from .assets import AssetError, AssetStore, Policy
from .binder import AccountFileError, BindError, bind, parse_account
from .model import Account, InfographicModel
from .parser import Diagnostic, canonicalize, parse, validate
from .render import FontCatalog, RenderError, render_png

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_BIND, EXIT_ASSET = 0, 1, 2, 3, 4
DEFAULT_ASSETS = "./assets-cache"
ENV_ASSETS = "INFOGLYPH_ASSETS"
ENV_FONTS = "INFOGLYPH_FONTS"


class Failure(Exception):
    def __init__(self, code: int, message: str | None = None):
        super().__init__(message)
        self.code = code
        self.message = message


def _err(message: str) -> None:
    click.echo(message, err=True)


def _report(path: str, diags: list[Diagnostic]) -> None:
    for d in diags:
        where = f" {d.key_path}:" if d.key_path else ""
        _err(f"{path}:{d.line}: {d.severity.value}:{where} {d.message}")


def _read_text(path: str, code: int) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise Failure(code, f"{path}: no such file") from None
    except UnicodeDecodeError as e:
        raise Failure(code, f"{path}: not valid UTF-8 ({e.reason} at byte {e.start})") from None
    except OSError as e:
        raise Failure(code, f"{path}: {e.strerror or e}") from None


def _load_model(path: str, check: bool = True) -> InfographicModel:
    model, diags = parse(_read_text(path, EXIT_PARSE))
    if model is not None and check:
        diags = diags + validate(model)
    _report(path, diags)
    if model is None or any(d.is_error for d in diags):
        raise Failure(EXIT_PARSE, f"{path}: model has errors")
    return model


def _load_bound(path: str, account: str) -> InfographicModel:
    """Parse, bind, then validate, so placeholders about to be filled are not reported."""
    model = _bind(_load_model(path, check=False), _load_account(account), path)
    diags = validate(model)
    _report(path, diags)
    if any(d.is_error for d in diags):
        raise Failure(EXIT_PARSE, f"{path}: model has errors")
    return model


def _load_account(path: str) -> Account:
    try:
        return parse_account(_read_text(path, EXIT_BIND))
    except AccountFileError as e:
        _report(path, e.diagnostics)
        raise Failure(EXIT_BIND, f"{path}: account has errors") from None


def _bind(model: InfographicModel, account: Account, path: str) -> InfographicModel:
    try:
        return bind(model, account)
    except BindError as e:
        for issue in e.issues:
            _err(f"{path}: {issue}")
        raise Failure(EXIT_BIND, f"{path}: binding failed") from None


def _write(out: str | None, data: bytes | str) -> None:
    if isinstance(data, str):
        data = data.encode("utf-8")
    if out is None or out == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    try:
        Path(out).write_bytes(data)
    except OSError as e:
        raise Failure(EXIT_USAGE, f"{out}: cannot write: {e.strerror or e}") from None


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="infoglyph")
@click.option("-q", "--quiet", is_flag=True, help="Suppress warnings.")
def cli(quiet: bool) -> None:
    """Compile infographic models to PNG, check them, and count their components."""
    logging.basicConfig(level=logging.ERROR if quiet else logging.WARNING, format="warning: %(message)s",
                        stream=sys.stderr, force=True)


@cli.command("render")
@click.argument("model")
@click.option("-o", "--output", "out", required=True, help="PNG file to write.")
@click.option("--data", "account", help="Account file to bind before rendering.")
@click.option("--assets", help=f"Asset cache directory [env {ENV_ASSETS}; default {DEFAULT_ASSETS}].")
@click.option("--fonts", help=f"Font directory with a fonts.tsv alias table [env {ENV_FONTS}].")
@click.option("--offline", is_flag=True, help="Never download; fail on cache misses.")
def render_cmd(model: str, out: str, account: str | None, assets: str | None, fonts: str | None,
               offline: bool) -> None:
    """Render MODEL to a PNG image."""
    m = _load_bound(model, account) if account is not None else _load_model(model)
    store = AssetStore(assets or os.environ.get(ENV_ASSETS) or DEFAULT_ASSETS)
    font_dirs = [fonts] if fonts else [d for d in os.environ.get(ENV_FONTS, "").split(os.pathsep) if d]
    try:
        png = render_png(m, store, FontCatalog(font_dirs), Policy.OFFLINE if offline else Policy.ONLINE)
    except AssetError as e:
        raise Failure(EXIT_ASSET, f"{model}: asset {e}") from None
    except RenderError as e:
        raise Failure(EXIT_BIND, f"{model}: {e}") from None
    _write(out, png)


@cli.command("validate")
@click.argument("model")
def validate_cmd(model: str) -> None:
    """Check MODEL; diagnostics go to standard error."""
    _load_model(model)


@cli.command("census")
@click.argument("models", nargs=-1, required=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "tsv"]), default="csv", show_default=True)
@click.option("-o", "--output", "out", help="File to write instead of standard output.")
def census_cmd(models: tuple[str, ...], fmt: str, out: str | None) -> None:
    """Tabulate component types of one or more MODELS."""
    loaded = [(Path(p).stem, _load_model(p, check=False)) for p in models]
    _write(out, census_table(loaded, fmt))


@cli.command("bind")
@click.argument("model")
@click.option("--data", "account", required=True, help="Account file with values and formulas.")
@click.option("-o", "--output", "out", help="File to write instead of standard output.")
def bind_cmd(model: str, account: str, out: str | None) -> None:
    """Resolve placeholders in MODEL and print the canonical bound model."""
    _write(out, canonicalize(_load_bound(model, account)))


def run(args: list[str] | None = None) -> int:
    """Run the CLI on ``args`` and return the exit status instead of exiting."""
    try:
        cli.main(args=args, prog_name="infoglyph", standalone_mode=False)
    except Failure as e:
        if e.message:
            _err(f"error: {e.message}")
        return e.code
    except click.exceptions.Exit as e:  # --help, --version
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        _err("aborted")
        return EXIT_USAGE
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
