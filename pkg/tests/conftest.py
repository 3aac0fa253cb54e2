from pathlib import Path

import numpy as np
import pytest

from sympent import states as st

CORPUS = Path(__file__).parent / "corpus" / "states.stx"


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def bell():
    return st.ghz(2)


@pytest.fixture
def ghz3():
    return st.ghz(3)


@pytest.fixture
def w3():
    return st.w(3)


@pytest.fixture
def zero3():
    return st.basis_state((0, 0, 0), (2, 2, 2))


# -- acceptance summary -------------------------------------------------------

_ACCEPTANCE: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    crit, title = marker.args
    entry = _ACCEPTANCE.setdefault(crit, {"title": title, "parts": []})
    entry["parts"].append((item.name, rep.passed))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(_ACCEPTANCE, key=lambda c: (int("".join(filter(str.isdigit, c)) or 0), c)):
        entry = _ACCEPTANCE[crit]
        ok = all(p for _, p in entry["parts"])
        failed = [name for name, p in entry["parts"] if not p]
        note = f"  (failed: {', '.join(failed)})" if failed else ""
        tr.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'}  {entry['title']}{note}")
