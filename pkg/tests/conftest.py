import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from blottojam.cli import parse_config

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def load(name, **overrides):
    """CliConfig for ``configs/<name>.json`` with keyword overrides."""
    cfg = parse_config(CONFIGS / f"{name}.json")
    if overrides:
        from dataclasses import replace
        cfg = replace(cfg, **overrides)
    return cfg


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
        terminalreporter.write_line(line)
