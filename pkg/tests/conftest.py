import os
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


@pytest.fixture
def load_mm():
    from metakernel.syntax_io import parse_metamodel

    return lambda name: parse_metamodel(fixture_text(name))


@pytest.fixture
def load_model():
    from metakernel.syntax_io import parse_model

    return lambda name, mm=None: parse_model(fixture_text(name), mm)


@pytest.fixture
def signalflow(load_mm):
    return load_mm("signalflow.mm")
