import importlib

import pytest

from linboltz import _backend


def test_use_backend_restores():
    before = _backend.get_backend()
    with _backend.use_backend("numpy"):
        assert _backend.get_backend() == "numpy"
    assert _backend.get_backend() == before


def test_use_backend_restores_after_error():
    before = _backend.get_backend()
    with pytest.raises(RuntimeError):
        with _backend.use_backend("numpy"):
            raise RuntimeError("boom")
    assert _backend.get_backend() == before


def test_invalid_backend_name():
    with pytest.raises(ValueError):
        _backend.set_backend("cuda")


def test_env_selects_backend(monkeypatch):
    monkeypatch.setenv(_backend.BACKEND_ENV, "numpy")
    assert _backend._from_env() == "numpy"
    monkeypatch.setenv(_backend.BACKEND_ENV, "NUMBA")
    assert _backend._from_env() == ("numba" if _backend.HAVE_NUMBA else "numpy")
    monkeypatch.setenv(_backend.BACKEND_ENV, "fortran")
    with pytest.raises(ValueError):
        _backend._from_env()


def test_module_reads_env_on_import(monkeypatch):
    monkeypatch.setenv(_backend.BACKEND_ENV, "numpy")
    mod = importlib.reload(_backend)
    try:
        assert mod.get_backend() == "numpy"
    finally:
        monkeypatch.delenv(_backend.BACKEND_ENV)
        importlib.reload(_backend)


def test_debug_flag(monkeypatch):
    monkeypatch.setenv(_backend.DEBUG_ENV, "1")
    assert _backend.debug_enabled()
    monkeypatch.setenv(_backend.DEBUG_ENV, "0")
    assert not _backend.debug_enabled()


def test_thread_cap(monkeypatch):
    assert _backend.set_threads(1) == 1
    monkeypatch.setenv(_backend.THREADS_ENV, "1")
    assert _backend.set_threads(None) == 1
    assert _backend.set_threads(10_000) >= 1
