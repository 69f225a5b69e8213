from fractions import Fraction as F

import pytest
from hypothesis import HealthCheck, settings

from narrative_eq import Game, History, Scenario

settings.register_profile(
    "repo", deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")


def means_of(game, cells):
    return [[game.means[c] for c in range(lo, hi + 1)] for lo, hi in cells]


@pytest.fixture
def two_of_three():
    """Three observations, two of them successes."""
    return Game(History.from_string("101"))


@pytest.fixture
def mild(two_of_three):
    return Scenario(two_of_three, F(1, 30))


@pytest.fixture
def moderate(two_of_three):
    return Scenario(two_of_three, F(1, 25))


def boundary_breakpoints(game):
    """Every bias at which some adjacent-cell boundary condition switches."""
    C = game.n_classes
    pts = set()
    for lo in range(C):
        for mid in range(lo, C - 1):
            for hi in range(mid + 1, C):
                m = (game.action(lo, mid) + game.action(mid + 1, hi)) / 2
                for c in (mid, mid + 1):
                    if m - game.means[c] > 0:
                        pts.add(m - game.means[c])
    return sorted(pts)


def probe_biases(game, offset=F(1, 10**6)):
    out = set()
    for p in boundary_breakpoints(game):
        out.update(x for x in (p - offset, p, p + offset) if x > 0)
    return sorted(out)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, title, detail = RESULTS[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n}. {title}: {detail}")
