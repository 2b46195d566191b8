import pytest

from design_gradcode import affine_geometry, code_from_design, dual, projective_geometry


@pytest.fixture(scope="session")
def fano():
    return projective_geometry(2, 2)


@pytest.fixture(scope="session")
def fano_code(fano):
    return code_from_design(fano)


@pytest.fixture(scope="session")
def ag23():
    return affine_geometry(2, 3)


@pytest.fixture(scope="session")
def ag_code(ag23):
    design, res = ag23
    return code_from_design(design, res)


@pytest.fixture(scope="session")
def dual_ag_code(ag23):
    return code_from_design(ag23[0], dual=True)


_criteria: dict[int, tuple[str, str]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.failed):
        _criteria[number] = (title, "PASS" if report.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, status = _criteria[number]
        terminalreporter.write_line(f"criterion {number:2d} {status}: {title}")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
