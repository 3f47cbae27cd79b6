import pytest

RESULTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(number, title, limit): acceptance criterion with a time limit in seconds")
    config.stash[RESULTS] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and not rep.failed):
        return
    number, title, limit = mark.args
    rep.user_properties.append(("criterion", number))
    results = item.config.stash[RESULTS]
    ok, elapsed, _, _ = results.get(number, (True, 0.0, title, limit))
    results[number] = (ok and rep.passed, elapsed + rep.duration, title, limit)


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash[RESULTS]
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, elapsed, title, limit = results[number]
        terminalreporter.write_line(
            f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}  ({elapsed:.2f} s, limit {limit} s)")
