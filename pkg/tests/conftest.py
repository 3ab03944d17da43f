import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pbmvboost.measures import ViewPosterior  # noqa: E402
from pbmvboost.weak import train_tree  # noqa: E402

ACCEPTANCE_LINES = []


def random_triple(rng, V=None, n=None, positive_q=True):
    """A random (posteriors, rho, views, y, dist) setup built from trained trees."""
    V = V or int(rng.integers(1, 5))
    n = n or int(rng.integers(5, 40))
    views = [rng.normal(size=(n, int(rng.integers(1, 4)))) for _ in range(V)]
    y = rng.choice([-1, 1], size=n)
    posteriors = []
    for v in range(V):
        voters = []
        for _ in range(int(rng.integers(1, 6))):
            w = rng.dirichlet(np.ones(n))
            voters.append(train_tree(views[v], y, w, int(rng.integers(1, 4)), view_index=v))
        q = rng.uniform(0.01, 2.0, size=len(voters))
        if not positive_q:
            q *= rng.choice([-1, 1], size=len(voters))
        posteriors.append(ViewPosterior(voters, list(q)))
    rho = rng.dirichlet(np.ones(V))
    dist = rng.dirichlet(np.ones(n))
    return posteriors, rho, views, y, dist


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture
def acceptance():
    def record(number, title, passed, detail=""):
        """``passed=None`` marks a criterion that could not be run here."""
        ACCEPTANCE_LINES.append((number, title, passed if passed is None else bool(passed), detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_LINES, key=lambda t: t[0]):
        status = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
        terminalreporter.write_line(f"[{status}] {number}. {title}  {detail}")
