import random
from pathlib import Path

import pytest
from hypothesis import strategies as st

from shapley_ndg import Edge, Instance, Player, Profile, enumerate_simple_paths

FIXTURES = Path(__file__).parent / "fixtures"


def load_fixture(name) -> Instance:
    return Instance.load(FIXTURES / f"{name}.json")


@pytest.fixture
def tiny1():
    return load_fixture("tiny1")


@pytest.fixture
def solo():
    return load_fixture("solo")


@pytest.fixture
def diamond():
    return load_fixture("diamond")


def two_parallel(a=0.5, b=0.5, weights=(1.0, 1.0)):
    return Instance(
        ["s", "t"],
        [Edge("e1", "s", "t", a, b), Edge("e2", "s", "t", a, b)],
        [Player(i + 1, w, "s", "t") for i, w in enumerate(weights)],
    )


def grid_arcs(rows, cols):
    arcs = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                arcs.append((v, v + 1))
            if r + 1 < rows:
                arcs.append((v, v + cols))
    return list(range(rows * cols)), arcs


SHAPES = {
    "parallel2": ([0, 1], [(0, 1)] * 2),
    "parallel4": ([0, 1], [(0, 1)] * 4),
    "diamond": ([0, 1, 2, 3], [(0, 1), (0, 2), (1, 3), (2, 3), (1, 2)]),
    "grid2x3": grid_arcs(2, 3),
    "grid3x3": grid_arcs(3, 3),
}


def random_profile(instance, rng):
    return Profile({
        p.id: rng.choice(enumerate_simple_paths(instance, p.source, p.sink))
        for p in instance.players
    })


@st.composite
def small_games(draw, max_players=3, normalized=True):
    """Tiny instances (at most 6 simple paths per player) with a random profile."""
    shape = draw(st.sampled_from(sorted(SHAPES)))
    vertices, arcs = SHAPES[shape]
    coef = st.floats(min_value=1e-3, max_value=1.0, allow_nan=False)
    edges = [Edge(j, u, v, draw(coef), draw(coef)) for j, (u, v) in enumerate(arcs)]
    n = draw(st.integers(min_value=1, max_value=max_players))
    weights = [draw(st.floats(min_value=1.0, max_value=4.0)) for _ in range(n)]
    if normalized:
        weights[draw(st.integers(0, n - 1))] = 1.0
    sink = vertices[-1]
    instance = Instance(vertices, edges, [Player(i, w, vertices[0], sink) for i, w in enumerate(weights)])
    rng = random.Random(draw(st.integers(0, 2**32 - 1)))
    return instance, random_profile(instance, rng)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_line():
    """Record one summary line per acceptance criterion."""
    def record(label, ok, detail=""):
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}".rstrip())
        print(ACCEPTANCE_LINES[-1])
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
