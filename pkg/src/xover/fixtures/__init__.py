"""Bundled reference designs, loadable by name."""

from __future__ import annotations

from importlib import resources

from ..design import Design, parse_design

_SUFFIX = ".design"


def names() -> list[str]:
    """Names of the bundled reference designs."""
    found = []
    for entry in resources.files(__name__).iterdir():
        if entry.name.endswith(_SUFFIX):
            found.append(entry.name[: -len(_SUFFIX)])
    return sorted(found)


def load(name: str) -> Design:
    """Load a bundled reference design by name (see :func:`names`)."""
    path = resources.files(__name__).joinpath(name + _SUFFIX)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise KeyError(
            f"unknown reference design {name!r}; available: {', '.join(names())}"
        ) from None
    return parse_design(text)
