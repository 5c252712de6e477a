import pytest

import _util


@pytest.fixture
def ex1():
    return _util.example1()


@pytest.fixture
def ex1_document():
    return _util.example1_document()
