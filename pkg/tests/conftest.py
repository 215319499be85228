import os
import random
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from spooky_pebble.dag import parse_dag, random_dag
from spooky_pebble.game import parse_strategy

DATA = Path(__file__).parent / "data"

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", parent=settings.get_profile("default"), max_examples=600)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def load_dag(name):
    return parse_dag((DATA / name).read_text())


def load_strategy(name, dag):
    return parse_strategy((DATA / name).read_text(), dag)


@pytest.fixture
def g5():
    return load_dag("g5.dag")


@pytest.fixture
def g6():
    return load_dag("g6.dag")


@pytest.fixture
def reversible_strategy(g5):
    return load_strategy("g5_reversible.txt", g5)


@pytest.fixture
def spooky_strategy(g5):
    return load_strategy("g5_spooky.txt", g5)


def seeded_corpus(count, max_n, base_seed=0, min_n=1):
    """Deterministic list of small random DAGs."""
    out = []
    for seed in range(base_seed, base_seed + count):
        rng = random.Random(seed)
        out.append(random_dag(rng.randint(min_n, max_n), rng.uniform(0.15, 0.7), seed))
    return out
