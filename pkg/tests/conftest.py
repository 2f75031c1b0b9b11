import pytest

ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(ident, title): acceptance criterion")


@pytest.fixture
def report(request):
    """Dict for a short measured-value summary shown in the acceptance lines."""
    detail = {}
    request.node._acceptance_detail = detail
    return detail


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when != "call":
        return
    ident, title = marker.args
    detail = getattr(item, "_acceptance_detail", {})
    ACCEPTANCE[ident] = (title, rep.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for ident in sorted(ACCEPTANCE, key=lambda s: int(s[2:])):
        title, passed, detail = ACCEPTANCE[ident]
        extra = ", ".join(f"{k}={v}" for k, v in detail.items())
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} {ident} {title}" + (f" [{extra}]" if extra else ""))
