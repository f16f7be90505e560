import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def disc_points(n: int):
    """Hypothesis strategy: n points of the closed unit disc."""
    pt = st.tuples(st.floats(0.0, 1.0), st.floats(0.0, 2 * np.pi)).map(lambda rt: rt[0] * np.exp(1j * rt[1]))
    return st.lists(pt, min_size=n, max_size=n).map(np.array)


def torus_points(n: int):
    return st.lists(st.floats(0.0, 2 * np.pi), min_size=n, max_size=n).map(lambda a: np.exp(1j * np.array(a)))


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


# ------------------------------------------------------------ acceptance report

ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


class _Criterion:
    def __init__(self, number: int, title: str):
        self.number, self.title, self.detail = number, title, ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        ok = exc_type is None
        detail = self.detail if ok else f"{exc_type.__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
        ACCEPTANCE[self.number] = (self.title, ok, detail)
        return False


@pytest.fixture
def criterion():
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {k:2d}. {title}: {detail}")
