import pytest

from qsrisk.synthgen import default_config, generate_portfolio


@pytest.fixture(scope="session")
def default_portfolio():
    return generate_portfolio(default_config())


@pytest.fixture(scope="session")
def small_portfolio():
    return generate_portfolio(default_config(n_policyholders=2000, seed=99))


_acceptance = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _acceptance.append(report)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    import importlib

    mod = importlib.import_module("test_acceptance")
    terminalreporter.section("acceptance criteria")
    for rep in _acceptance:
        name = rep.nodeid.split("::")[-1]
        doc = (getattr(mod, name).__doc__ or name).strip()
        terminalreporter.write_line(f"{'PASS' if rep.passed else 'FAIL'}  {doc}")
