import pytest

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.fixture
def measure(request):
    """Attach a measured quantity to the running test for the summary line."""
    def add(text):
        request.node.user_properties.append(("measured", text))
    return add


def pytest_runtest_logreport(report):
    number = dict(report.user_properties).get("criterion")
    if number is None:
        return
    entry = _criteria.setdefault(number, {"title": dict(report.user_properties)["title"],
                                          "passed": True, "measured": []})
    if report.failed:
        entry["passed"] = False
    if report.when == "call":
        entry["measured"].extend(v for k, v in report.user_properties if k == "measured")


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker is not None:
            item.user_properties.append(("criterion", marker.args[0]))
            item.user_properties.append(("title", marker.args[1]))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        status = "PASS" if entry["passed"] else "FAIL"
        detail = "; ".join(entry["measured"])
        terminalreporter.write_line(f"{status} criterion {number:2d}: {entry['title']}"
                                    + (f" [{detail}]" if detail else ""))
