import pytest

from vorhom.homology import homology_of_complex
from vorhom.voronoi import build_cell_complex, enumerate_perfect_forms

RINGS = ("gaussian", "eisenstein")


@pytest.fixture(scope="session")
def perfect():
    return {(r, n): enumerate_perfect_forms(r, n) for r in RINGS for n in (2, 3)}


@pytest.fixture(scope="session")
def complexes(perfect):
    return {key: build_cell_complex(key[0], key[1], perfect_forms=forms)
            for key, forms in perfect.items()}


@pytest.fixture(scope="session")
def homology(complexes):
    return {key: homology_of_complex(cx) for key, cx in complexes.items()}


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
