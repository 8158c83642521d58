import os
from pathlib import Path

import pytest

from seslemma.corpus_io import parse_conllu, read_conllu

import synth

DATA = Path(__file__).parent / "data"

ACCEPTANCE_RESULTS = []


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def en_fixture():
    return read_conllu(DATA / "en_fixture-um.conllu")


@pytest.fixture(scope="session")
def ru_fixture():
    return read_conllu(DATA / "ru_sample-um.conllu")


@pytest.fixture(scope="session")
def ud_fixture():
    return read_conllu(DATA / "ud_fixture.conllu", "ud")


@pytest.fixture(scope="session")
def fixture_corpora(en_fixture, ru_fixture, ud_fixture):
    return [en_fixture, ru_fixture, ud_fixture]


@pytest.fixture(scope="session")
def synth_train():
    return parse_conllu(synth.to_conllu(synth.sentences(400, seed=1)), source="synth-train")


@pytest.fixture(scope="session")
def synth_dev():
    return parse_conllu(synth.to_conllu(synth.sentences(150, seed=2)), source="synth-dev")


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        ACCEPTANCE_RESULTS.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in ACCEPTANCE_RESULTS:
        word = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[outcome]
        terminalreporter.write_line(f"{word:4}  {name}")
