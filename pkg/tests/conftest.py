"""Shared fixtures: cached benchmark problems and reference solutions.

References are expensive (tight-tolerance solves cross-checked between two
method families), so they are computed at most once per session and shared
by every test that needs one.
"""

import pytest

from parex.bench import make_reference
from parex.problems import get_problem

_problems: dict = {}
_references: dict = {}


def _named(name):
    if name not in _problems:
        _problems[name] = get_problem(name)
    return _problems[name]


@pytest.fixture(scope="session")
def problems():
    """Callable returning the (cached) NamedProblem for a name."""
    return _named


@pytest.fixture(scope="session")
def references():
    """Callable returning the (cached) cross-checked reference for a problem."""

    def get(name):
        if name not in _references:
            _references[name] = make_reference(_named(name))
        return _references[name]

    return get
