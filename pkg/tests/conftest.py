import json

import numpy as np
import pytest

from effdyn.robotfile import from_document, load_preset


@pytest.fixture(scope="session")
def leg():
    return load_preset("leg2dof")


@pytest.fixture(scope="session")
def fixed_leg(leg):
    """The same leg bolted to the world (no floating base)."""
    doc = json.loads(json.dumps(leg.document))
    doc["floating"] = False
    doc["configuration"]["q_b"] = []
    return from_document(doc)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


_CRITERIA = {}


@pytest.fixture
def criterion(capsys):
    """``criterion(n, ok, detail)`` records and prints one PASS/FAIL line."""

    def report(n, ok, detail=""):
        line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        _CRITERIA[n] = line
        with capsys.disabled():
            print("\n" + line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[n])
