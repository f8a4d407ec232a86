from __future__ import annotations

import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent
FIXTURES = TESTS_DIR / "fixtures"

sys.path.insert(0, str(TESTS_DIR))  # makes fixture_specs importable


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def subjects_root() -> Path:
    return FIXTURES / "subjects"


@pytest.fixture(scope="session")
def pairs_manifest() -> Path:
    return FIXTURES / "pairs_manifest.jsonl"


@pytest.fixture(scope="session")
def zoo_root() -> Path:
    return FIXTURES / "subjects" / "zoo" / "main"


@pytest.fixture(scope="session")
def pyproj_root() -> Path:
    return FIXTURES / "pyproj"


@pytest.fixture()
def scripted_config_dict(tmp_path: Path):
    """Baseline configuration dict for scripted runs; tests adjust as needed."""

    def make(playbook_dir: Path, **overrides):
        config = {
            "subject_language": "minilang",
            "provider": {
                "kind": "scripted",
                "model": "scripted",
                "temperature": 0.0,
                "scripted": {"mode": "playbook", "dir": str(playbook_dir)},
            },
            "limits": {"per_test_timeout": 5.0, "build_timeout": 60.0},
            "report_dir": str(tmp_path / "runs"),
        }
        config.update(overrides)
        return config

    return make


# One visible verdict line per acceptance criterion at the end of the run.
def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes = {}
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" in nodeid:
                name = nodeid.split("::")[-1]
                outcomes[name] = status.upper()
    if outcomes:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name in sorted(outcomes):
            terminalreporter.write_line(f"{outcomes[name]:6s}  {name}")
