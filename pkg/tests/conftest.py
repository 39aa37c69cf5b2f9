from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from dfbench.api import create_app
from dfbench.evaluate import Evaluator
from dfbench.store import Store
from dfbench.synthetic import build_corpus, load_corpus

DATA = Path(__file__).parent / "data"

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    return build_corpus(tmp_path_factory.mktemp("corpus"))


@pytest.fixture
def store():
    s = Store()
    yield s
    s.close()


@pytest.fixture
def loaded_store(corpus):
    s = Store()
    load_corpus(s, corpus)
    yield s
    s.close()


@pytest.fixture
def evaluator(loaded_store):
    return Evaluator(loaded_store)


@pytest.fixture
def client(evaluator):
    return TestClient(create_app(evaluator, max_upload_bytes=256 * 1024))


def read_fixture(name: str) -> bytes:
    return (DATA / name).read_bytes()
