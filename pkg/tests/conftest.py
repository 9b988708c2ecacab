import numpy as np
import pytest

from msrec import Instance, Origin, synthetic_instance

REL = 1e-12


def rel_err(got: float, want: float) -> float:
    return abs(got - want) / max(abs(want), 1e-300)


@pytest.fixture(scope="session")
def demo3() -> Instance:
    """Three-point worked example: known probabilities and distances, a
    horizon of 10.  The horizon is deliberately below the strict bound, so
    construction is relaxed."""
    return Instance(
        probs=(0.5, 0.3, 0.8),
        cost=(
            (0.0, 5.0, 9.0),
            (5.0, 0.0, 1.0),
            (9.0, 1.0, 0.0),
        ),
        horizon=10.0,
        strict_horizon=False,
    )


@pytest.fixture(scope="session")
def demo3_origin() -> Origin:
    """Cab position of the worked example: cost 2 to point 0, 4 to point 1."""
    return Origin.from_costs((2.0, 4.0, 5.0))


@pytest.fixture(scope="session")
def demo3_time() -> Instance:
    """The worked example reinterpreted as driving times."""
    return Instance(
        probs=(0.5, 0.3, 0.8),
        cost=(
            (0.0, 5.0, 9.0),
            (5.0, 0.0, 1.0),
            (9.0, 1.0, 0.0),
        ),
        horizon=10.0,
        metric="time",
        strict_horizon=False,
    )


def random_origins(inst: Instance, count: int, seed: int) -> list[Origin]:
    """Coordinate origins scattered around (and beyond) the unit area."""
    rng = np.random.default_rng(seed)
    return [
        Origin.from_xy(x, y, inst)
        for x, y in rng.uniform(-0.25, 1.25, size=(count, 2))
    ]


@pytest.fixture(scope="session")
def tie_instance() -> Instance:
    """Four points where points 2 and 3 are exact duplicates, producing
    genuinely tied optimal routes."""
    rng = np.random.default_rng(5)
    coords = rng.uniform(0, 1, (4, 2))
    coords[3] = coords[2]
    probs = rng.uniform(0, 1, 4)
    probs[3] = probs[2]
    d = np.sqrt(((coords[:, None, :] - coords[None, :, :]) ** 2).sum(-1))
    return Instance(
        probs=tuple(probs),
        cost=tuple(map(tuple, d)),
        horizon=5 * float(d.max()) * 1.3,
        coords=tuple(map(tuple, coords)),
    )


def make_instance(n: int, seed: int) -> Instance:
    return synthetic_instance(n, seed)
