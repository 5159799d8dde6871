"""Session-wide fixtures shared across the test modules."""

import pytest

from careflow import compile_bpmn, parse_bpmn

from util import STAKOB_PATH


@pytest.fixture(scope="session")
def stakob_model():
    with STAKOB_PATH.open("rb") as handle:
        return parse_bpmn(handle)


@pytest.fixture(scope="session")
def stakob_net(stakob_model):
    return compile_bpmn(stakob_model)
