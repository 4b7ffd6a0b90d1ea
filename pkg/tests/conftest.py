import os
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture(scope="session", autouse=True)
def oracle_cache(request):
    """Keep oracle results between runs unless the caller chose a directory."""
    if not os.environ.get("TNSVD_ORACLE_CACHE"):
        os.environ["TNSVD_ORACLE_CACHE"] = str(request.config.cache.mkdir("tnsvd-oracle"))
    yield os.environ["TNSVD_ORACLE_CACHE"]


settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


def pytest_terminal_summary(terminalreporter):
    from _report import LINES
    if LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(LINES):
            terminalreporter.write_line(LINES[k])
