import importlib
import warnings

import pytest

from pgmseg import _numba


@pytest.fixture(name="reload_numba")
def fixture_reload_numba(monkeypatch):
    yield lambda: importlib.reload(_numba)
    monkeypatch.undo()
    importlib.reload(_numba)


@pytest.mark.parametrize("value", ["1", "true", "yes"])
def test_disable_numba(monkeypatch, reload_numba, value):
    monkeypatch.setenv("PGMSEG_DISABLE_NUMBA", value)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        module = reload_numba()
    assert not module.USE_NUMBA


def test_njit_fallback_decorators():
    def add(a, b):
        return a + b

    assert _numba.njit(add)(1, 2) == 3
    assert _numba.njit()(add)(1, 2) == 3
