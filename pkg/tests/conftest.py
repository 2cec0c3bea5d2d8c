from fractions import Fraction

import numpy as np
import pytest

from lfsr.synthetic import Layer, SyntheticSceneSpec, generate_synthetic_lf

_ACCEPTANCE = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Collects one (criterion, passed, detail) line per acceptance check."""
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def flat_scene():
    return SyntheticSceneSpec([Layer(0, {"kind": "noise", "amplitude": 120})], seed=7)


@pytest.fixture(scope="session")
def flat_lf_9x9(flat_scene):
    return generate_synthetic_lf(flat_scene, 9, 9, 32, 32)


@pytest.fixture(scope="session")
def plane_scene():
    # smooth periodic texture, integer disparity: exact oracle for shift interpolation
    return SyntheticSceneSpec([Layer(Fraction(2), {"kind": "sinusoid"})], seed=0)
