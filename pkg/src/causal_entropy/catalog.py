"""Built-in causal structures."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

from .graph import CausalStructure, StructureError, parse_structure, post_select

NAMES = (
    "instrumental",
    "fig2",
    "fig3a",
    "fig3b",
    "bilocal",
    "bilocal_postselected",
    "ic",
    "ic_postselected",
    "triangle",
)


class UnknownCatalogEntry(StructureError, KeyError):
    def __str__(self):
        return ValueError.__str__(self)


def _load(name: str) -> CausalStructure:
    text = resources.files(__package__).joinpath("data", f"{name}.cg").read_text("utf-8")
    return parse_structure(text)


@lru_cache(maxsize=None)
def catalog(name: str) -> CausalStructure:
    if name not in NAMES:
        raise UnknownCatalogEntry(
            f"unknown catalog entry {name!r}; choose from {', '.join(NAMES)}")
    if name == "bilocal_postselected":
        s = _load("bilocal")
        for pivot in ("A", "B", "C"):
            s, _ = post_select(s, pivot, ["0", "1"], naming="{node}{value}")
        return s
    if name == "ic_postselected":
        s, _ = post_select(_load("ic"), "R", ["1", "2"], naming="{node}{value}")
        return s
    return _load(name)
