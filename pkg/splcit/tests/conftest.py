"""
Shared fixtures: the bundled GPL model and the eight reference products
used throughout the metric and coverage tests.
"""

import pytest

from splcit.corpus import load_gpl
from splcit.feature_model import feature_set_from_names
from splcit.sat_core import to_cnf
from splcit.tset_engine import enumerate_valid_tsets

GPL_FEATURES = [
    "GPL",
    "Driver",
    "Benchmark",
    "GraphType",
    "Directed",
    "Undirected",
    "Weight",
    "Search",
    "DFS",
    "BFS",
    "Algorithms",
    "Num",
    "CC",
    "SCC",
    "Cycle",
    "Shortest",
    "Prim",
    "Kruskal",
]

_BASE = ["GPL", "Driver", "GraphType", "Algorithms", "Benchmark"]

REFERENCE_SUITE = [
    _BASE + ["Weight", "Undirected", "Prim"],
    _BASE + ["Weight", "Search", "Undirected", "DFS", "CC", "Kruskal"],
    _BASE + ["Search", "Directed", "DFS", "Num", "Cycle"],
    _BASE + ["Weight", "Search", "Directed", "BFS", "Num", "Shortest"],
    _BASE + ["Weight", "Search", "Directed", "DFS", "Num", "SCC", "Cycle", "Shortest"],
    _BASE + ["Weight", "Search", "Undirected", "DFS", "Num", "CC", "Cycle", "Prim"],
    _BASE + ["Weight", "Search", "Undirected", "BFS", "Num", "CC", "Kruskal"],
    _BASE + ["Weight", "Search", "Undirected", "DFS", "Num", "CC", "Cycle"],
]


@pytest.fixture(scope="session")
def gpl():
    return load_gpl()


@pytest.fixture(scope="session")
def gpl_cnf(gpl):
    return to_cnf(gpl)


@pytest.fixture(scope="session")
def gpl_universe(gpl, gpl_cnf):
    return enumerate_valid_tsets(gpl, 2, gpl_cnf)


@pytest.fixture(scope="session")
def reference_suite(gpl):
    return [feature_set_from_names(gpl, names) for names in REFERENCE_SUITE]


@pytest.fixture
def model_file(tmp_path):
    """Write .fm text to a temporary file and return its path."""

    def write(text, name="model.fm"):
        path = tmp_path / name
        path.write_text(text)
        return path

    return write
