from importlib import resources
from pathlib import Path

import pytest

from arithqsm.number_field import load_field

DATA = Path(str(resources.files("arithqsm") / "data"))
CORPUS = ["q", "gauss", "m2", "k8_3", "k8_48", "k8_18", "k8_288"]


def field(name: str):
    return load_field(DATA / f"{name}.field")


@pytest.fixture(scope="session")
def fields():
    return {name: field(name) for name in CORPUS}


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    setattr(item, f"rep_{rep.when}", rep)
