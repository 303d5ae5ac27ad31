import numpy as np
import pytest

from polyperiods import build_square_tiled, builtin_spec, compute_periods, flat_torus


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def surfaces():
    """Small test surfaces of genus 1 and 2, keyed by name."""
    return {
        "torus-4x4": flat_torus(4, 4),
        "torus-3x5": flat_torus(3, 5),
        "omega1-n1": build_square_tiled(builtin_spec("omega1"), 1),
        "omega1-n3": build_square_tiled(builtin_spec("omega1"), 3),
        "omega2-n4": build_square_tiled(builtin_spec("omega2"), 4),
        "omega3-n2": build_square_tiled(builtin_spec("omega3"), 2),
    }


@pytest.fixture(scope="session")
def periods(surfaces):
    return {k: compute_periods(g, return_parts=True) for k, g in surfaces.items()}


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
