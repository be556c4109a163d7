import json
from pathlib import Path

import pytest

from skillchain.bim import load_task_model
from skillchain.skill_kb import builtin_library_path, load_library

DATA = Path(builtin_library_path()).parent

DRYWALL_CHAIN = ["start", "prepare", "plan", "cut", "install", "finish"]


@pytest.fixture(scope="session")
def drywall_lib():
    return load_library(DATA / "drywall_library.json")


@pytest.fixture(scope="session")
def drywall_lib_doc():
    return json.loads((DATA / "drywall_library.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def drywall_task():
    return load_task_model((DATA / "drywall_task.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def drywall_tutorial_text():
    return (DATA / "drywall_tutorial.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def edh_csv_path():
    return DATA / "edh_sample.csv"
