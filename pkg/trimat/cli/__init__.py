import logging
import sys

import click
import typer

from trimat.cli.data import app as data_app
from trimat.cli.experiment import app as experiment_app
from trimat.cli.system import app as system_app
from trimat.cli.training import app as training_app
from trimat.cli.utils import json_error, json_out
from trimat.errors import EXIT_CONFIG, EXIT_SYSTEM, TrimatError


def _click_exception_types(name: str) -> tuple[type[Exception], ...]:
    """The named click exception, plus typer's vendored copy when it ships one."""
    types: list[type[Exception]] = [getattr(click.exceptions, name)]
    try:
        from typer._click import exceptions as vendored  # type: ignore[import-not-found]
    except ImportError:
        return tuple(types)
    extra = getattr(vendored, name, None)
    if extra is not None and extra not in types:
        types.append(extra)
    return tuple(types)


CLICK_ERRORS = _click_exception_types("ClickException")
MISSING_PARAMETER_ERRORS = _click_exception_types("MissingParameter")
ABORT_ERRORS = _click_exception_types("Abort")

app = typer.Typer(
    name="trimat",
    help="Context-aware tri-matrix factorization experiments. All output is JSON",
    add_completion=False,
)

# Subcommands stay at the top level
app.add_typer(data_app, name="")
app.add_typer(training_app, name="")
app.add_typer(experiment_app, name="")
app.add_typer(system_app, name="")


@app.callback()
def root(
    verbose: bool = typer.Option(False, "-v", "--verbose", help="Log run progress to stderr"),
    debug: bool = typer.Option(False, "--debug", help="Log per-epoch losses to stderr"),
) -> None:
    """Configure stderr logging; stdout stays machine-readable."""
    level = logging.DEBUG if debug else logging.INFO if verbose else logging.WARNING
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _usage_error_payload(exc: Exception) -> dict[str, object]:
    """Convert Click/Typer usage errors into structured JSON."""
    if isinstance(exc, MISSING_PARAMETER_ERRORS):
        param = getattr(exc, "param", None)
        option = None
        if param is not None and getattr(param, "opts", None):
            long_opts = [opt for opt in param.opts if opt.startswith("--")]
            option = long_opts[-1] if long_opts else param.opts[-1]
        label = option or getattr(param, "name", None) or "required argument"
        return {
            "error": True,
            "code": "MISSING_FIELD",
            "message": str(exc),
            "recovery": [f"Provide required option {label}" if option else "Provide the missing required argument"],
            "context": {"missing": label},
        }
    return {
        "error": True,
        "code": "INVALID_ARGUMENT",
        "message": exc.format_message() if hasattr(exc, "format_message") else str(exc),
        "recovery": ["Run with --help to inspect arguments and options"],
        "context": {},
    }


def main() -> None:
    """CLI entry point."""
    try:
        result = app(standalone_mode=False)
        if isinstance(result, int):
            sys.exit(result)
        sys.exit(0)
    except typer.Exit as e:
        sys.exit(e.exit_code)
    except ABORT_ERRORS:
        sys.exit(EXIT_SYSTEM)
    except CLICK_ERRORS as exc:
        sys.exit(json_out(_usage_error_payload(exc), EXIT_CONFIG))
    except TrimatError as exc:
        sys.exit(json_error(exc))
    except Exception as exc:
        if isinstance(exc, SystemExit):
            raise
        sys.exit(json_out({
            "error": True,
            "code": "UNEXPECTED_ERROR",
            "message": str(exc),
            "recovery": ["This is an unexpected error, please report it"],
        }, EXIT_SYSTEM))


if __name__ == "__main__":
    main()
