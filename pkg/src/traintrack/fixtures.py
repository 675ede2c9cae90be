"""Bundled example inputs.

Six small files ship with the package: five automorphisms (identity,
fib, fib_inverse, plas, poly) and one graph map (broken) whose top
stratum violates the first direction condition.  They double as CLI
demo inputs and as regression anchors for the test suite.
"""

from __future__ import annotations

from importlib import resources

from .formats import parse_automorphism, parse_graph_map
from .graphs import GraphMap
from .words import Automorphism

FIXTURE_FILES = {
    "identity": "identity.aut",
    "fib": "fib.aut",
    "fib_inverse": "fib_inverse.aut",
    "plas": "plas.aut",
    "poly": "poly.aut",
    "broken": "broken.gm",
}


def fixture_text(name: str) -> str:
    try:
        fname = FIXTURE_FILES[name]
    except KeyError:
        known = ", ".join(sorted(FIXTURE_FILES))
        raise ValueError(f"unknown fixture {name!r} (known: {known})") from None
    return (resources.files(__package__) / "fixtures" / fname).read_text()


def load_fixture(name: str) -> Automorphism | GraphMap:
    text = fixture_text(name)
    fname = FIXTURE_FILES[name]
    if fname.endswith(".gm"):
        return parse_graph_map(text, source=fname, label=name)
    return parse_automorphism(text, source=fname, label=name)
