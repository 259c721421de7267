import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sceneqa.generator import GenerationConfig, generate_scene  # noqa: E402
from sceneqa.scene import build_scene_graph  # noqa: E402
from sceneqa.synthetic import random_scenes  # noqa: E402
from sceneqa.templates import load_registry  # noqa: E402


@pytest.fixture(scope="session")
def registry():
    return load_registry()


@pytest.fixture(scope="session")
def corpus(registry):
    """50 seeded synthetic scenes and every pair generated from them, pre-balancing."""
    scenes = random_scenes(7, 50, 5, 25)
    config = GenerationConfig(seed=7)
    pairs = []
    for scene in scenes:
        got, _ = generate_scene(build_scene_graph(scene), registry, config)
        pairs.extend(got)
    return scenes, pairs, config


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
