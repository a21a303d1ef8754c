import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("specx", max_examples=60, deadline=None, derandomize=True)
settings.load_profile("specx")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def fallback_backend(monkeypatch):
    """Route specx.eig through the pure-Python kernels for one test."""
    import specx.eig as eig
    from specx.eig import _fallback

    monkeypatch.setattr(eig, "kernels", _fallback)
    return _fallback


_ACCEPTANCE: list[str] = []


@pytest.fixture
def acceptance():
    """Record one status line per acceptance criterion and fail the test if it did not pass.

    The lines are echoed again in the terminal summary.
    """

    def record(number: int, ok: bool, title: str, detail: str, seconds: float, budget: float):
        ok = bool(ok and seconds < budget)
        line = (f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}  |  {detail}  "
                f"|  {seconds:.2f} s (budget {budget:g} s)")
        _ACCEPTANCE.append(line)
        print(line)
        if not ok:
            pytest.fail(line, pytrace=False)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
