import time
from pathlib import Path

import pytest

from intentgate.config import fixture_path
from intentgate.firewall import Firewall
from intentgate.policy import AuthoritativeStore, PolicyEngine, load_policies_file
from intentgate.registry import load_registry_file

DATA_DIR = Path(__file__).parent / "data"

_SUITE_STARTED = time.perf_counter()
SUITE_SPEED_BUDGET_SECONDS = 10.0


@pytest.fixture(scope="session")
def registry():
    return load_registry_file(fixture_path("tools.json"))


@pytest.fixture(scope="session")
def firewall():
    return Firewall.from_file(fixture_path("firewall_patterns.txt"))


@pytest.fixture(scope="session")
def rules():
    return load_policies_file(fixture_path("policy.yaml"))


@pytest.fixture(scope="session")
def policy_engine(rules, registry):
    return PolicyEngine(rules, registry)


@pytest.fixture
def store():
    # fresh copy per test: executors mutate it
    return AuthoritativeStore.from_file(fixture_path("store.json"))


class CountingPlanner:
    """Wraps a planner to count invocations (cache assertions)."""

    def __init__(self, inner):
        self.inner = inner
        self.calls = 0

    def plan(self, intent_text, routed_tools):
        self.calls += 1
        return self.inner.plan(intent_text, routed_tools)


@pytest.fixture
def gateway_factory():
    from intentgate.config import GatewayConfig, build_gateway

    def make(**overrides):
        gateway = build_gateway(GatewayConfig(**overrides))
        gateway.planner = CountingPlanner(gateway.planner)
        return gateway

    return make


@pytest.fixture(scope="session")
def injection_corpus():
    return [l for l in (DATA_DIR / "injections.txt").read_text().splitlines() if l.strip()]


@pytest.fixture(scope="session")
def clean_corpus():
    return [l for l in (DATA_DIR / "clean.txt").read_text().splitlines() if l.strip()]


def pytest_sessionfinish(session, exitstatus):
    # suite-speed acceptance criterion: the whole suite must finish offline
    # in under the budget; overruns fail the session
    elapsed = time.perf_counter() - _SUITE_STARTED
    if elapsed >= SUITE_SPEED_BUDGET_SECONDS and exitstatus == 0:
        session.exitstatus = 1


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    elapsed = time.perf_counter() - _SUITE_STARTED
    verdict = "PASS" if elapsed < SUITE_SPEED_BUDGET_SECONDS else "FAIL"
    terminalreporter.write_line(
        f"ACCEPTANCE suite-speed: {elapsed:.2f}s < {SUITE_SPEED_BUDGET_SECONDS:.0f}s "
        f"offline budget: {verdict}"
    )
