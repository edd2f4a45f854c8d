# Ensure tests can import from the project "src" package without installing.
import os, sys

import pytest

# Compute the project root as the parent of the current file's directory.
PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))

# Prepend the project root to sys.path so `import src...` works in tests
# without requiring a pip install or editable install.
if PROJECT_ROOT not in sys.path:
    sys.path.insert(0, PROJECT_ROOT)

from src.presets import testbed_nodes, victim_side_capture  # noqa: E402
from src.scenario import Scenario, SchedulePolicy  # noqa: E402


def build_scenario(pods, attacks, policy=SchedulePolicy.SEQUENTIAL, seed=7, rotation=60.0):
    """Testbed topology with a custom (small) workload; captures on wn3/wn4."""
    return Scenario(
        nodes=testbed_nodes(),
        pods=tuple(pods),
        attacks=tuple(attacks),
        capture=victim_side_capture(rotation),
        seed=seed,
        schedule_policy=policy,
    )


@pytest.fixture
def small_scenario():
    return build_scenario
