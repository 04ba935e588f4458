import pytest

_criteria: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            num, title = mark.args
            _criteria.setdefault(num, {"title": title, "nodes": set(), "failed": False,
                                       "ran": False, "notes": []})["nodes"].add(item.nodeid)


@pytest.fixture
def note(request):
    """Attach a measured value to the criterion line in the summary."""
    mark = request.node.get_closest_marker("criterion")

    def add(text: str) -> None:
        if mark is not None:
            _criteria[mark.args[0]]["notes"].append(text)
    return add


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    entry = _criteria[mark.args[0]]
    if rep.when == "call":
        entry["ran"] = True
    if rep.failed:
        entry["failed"] = True


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        entry = _criteria[num]
        if entry["failed"]:
            status = "FAIL"
        elif entry["ran"]:
            status = "PASS"
        else:
            status = "NOT RUN"
        terminalreporter.write_line(f"{status}  criterion {num:2d}: {entry['title']}")
        for text in entry["notes"]:
            terminalreporter.write_line(f"      {text}")
