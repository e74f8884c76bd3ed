from __future__ import annotations

from pathlib import Path

import pytest

from repgraph.ingest import parse_accounts

DATA = Path(__file__).parent / "data"
SAMPLE_ACCOUNTS = DATA / "sample_accounts.jsonl"

BOTS = ("Bot_1", "Bot_2", "Bot_3", "Bot_4", "Bot_5")
PARTIES = ("CiudadanosCs", "PODEMOS", "PSOE", "populares", "vox_es")

# Reference sample, 2-decimal features in the order user, content, sentiment,
# temporal, bot, followed by the 2-decimal active reputation.
SAMPLE_FEATURES = {
    "Bot_5": (0.02, 0.04, 0.13, 0.04, 0.02, 0.04),
    "Bot_4": (0.04, 0.13, 0.06, 0.09, 0.02, 0.05),
    "Bot_2": (0.04, 0.30, 0.05, 0.09, 0.02, 0.06),
    "Bot_3": (0.03, 0.10, 0.15, 0.07, 0.04, 0.06),
    "Bot_1": (0.04, 0.29, 0.87, 0.09, 0.02, 0.11),
    "CiudadanosCs": (0.93, 0.96, 0.95, 0.87, 0.86, 0.91),
    "PODEMOS": (0.97, 0.93, 0.95, 0.87, 0.96, 0.94),
    "PSOE": (0.94, 0.97, 0.96, 0.91, 0.92, 0.94),
    "populares": (0.97, 0.93, 0.95, 0.94, 0.95, 0.95),
    "vox_es": (0.98, 0.95, 0.95, 0.93, 0.97, 0.96),
}

# Reference reputation values: R_A, R_P^O, R_P^I, R_P, R.
SAMPLE_REPUTATION = {
    "Bot_5": (0.0384, 0.4885, 0.7702, 0.6998, 0.2368),
    "Bot_4": (0.0542, 0.5001, 0.7961, 0.7221, 0.2545),
    "Bot_3": (0.0639, 0.2399, 0.8656, 0.7092, 0.2575),
    "Bot_2": (0.0606, 0.2960, 0.9067, 0.7540, 0.2686),
    "Bot_1": (0.1118, 0.3423, 0.8862, 0.7502, 0.3033),
    "CiudadanosCs": (0.9130, 0.2837, 0.7775, 0.6540, 0.8353),
    "PSOE": (0.9381, 0.3513, 0.7108, 0.6209, 0.8429),
    "PODEMOS": (0.9362, 0.3352, 0.8189, 0.6980, 0.8648),
    "vox_es": (0.9561, 0.3465, 0.7673, 0.6621, 0.8679),
    "populares": (0.9481, 0.3158, 0.8446, 0.7124, 0.8774),
}


@pytest.fixture(scope="session")
def sample_records():
    with open(SAMPLE_ACCOUNTS, encoding="utf-8") as fh:
        result = parse_accounts(fh, source=str(SAMPLE_ACCOUNTS))
    assert result.ok, result.errors
    return result.records


# -- acceptance summary --------------------------------------------------------------

_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    failed = call.excinfo is not None and not call.excinfo.errisinstance(pytest.skip.Exception)
    if call.when == "call" or failed:
        previous = _CRITERIA.get(number, (title, "PASS"))[1]
        _CRITERIA[number] = (title, "FAIL" if failed or previous == "FAIL" else "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, outcome = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number} {outcome}: {title}")
