from pathlib import Path

import numpy as np
import pytest

from edmnet.edm import TailPolicy, edm_matrix
from edmnet.ingest import load_panel, log_returns

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "edmnet" / "fixtures"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def fixture_panel():
    return load_panel(FIXTURES / "prices_2023.csv")


@pytest.fixture(scope="session")
def fixture_returns(fixture_panel):
    return log_returns(fixture_panel)


@pytest.fixture(scope="session")
def fixture_edm(fixture_returns):
    return edm_matrix(fixture_returns, TailPolicy())


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, text, detail = results[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {text}  {detail}")
