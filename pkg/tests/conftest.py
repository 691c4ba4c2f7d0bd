import numpy as np
import pytest

from instanton1d import (adjacent_pairs, find_wells, solve_trajectory,
                         symmetric_double_well, triple_well)


def normalized(model):
    wells = find_wells(model)
    model = model.with_zero_level(wells)
    return model, find_wells(model)


@pytest.fixture(scope="session")
def sym_setup():
    """Symmetric double well, lambda=3, a=1 (omega=1): model, wells, pair."""
    model, wells = normalized(symmetric_double_well(3.0, a=1.0))
    return model, wells, adjacent_pairs(model, wells)[0]


@pytest.fixture(scope="session")
def sym_solution(sym_setup):
    model, wells, pair = sym_setup
    return solve_trajectory(model, pair)


@pytest.fixture(scope="session")
def sym10_setup():
    """Symmetric double well with S/hbar = 10 at hbar=1 (lambda=0.2, omega=1)."""
    model, wells = normalized(symmetric_double_well(0.2))
    return model, wells, adjacent_pairs(model, wells)[0]


@pytest.fixture(scope="session")
def sym10_solution(sym10_setup):
    model, wells, pair = sym10_setup
    return solve_trajectory(model, pair)


@pytest.fixture(scope="session")
def tri_setup():
    """Triple well lambda=1, a=1: model, wells, the middle->right pair."""
    model, wells = normalized(triple_well(1.0, 1.0))
    return model, wells, adjacent_pairs(model, wells)[1]


@pytest.fixture(scope="session")
def tri_solution(tri_setup):
    model, wells, pair = tri_setup
    return solve_trajectory(model, pair)


def random_same_level_models(n, seed=20240817):
    """Same-level double wells V = c (x-p)^2 (x-q)^2 (1 + b (x-s)^2).

    The positive factor makes the wells sit exactly at V = 0 with generally
    different curvatures; rejection keeps only clean two-well shapes.
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        p = -1.0 - 0.8 * rng.random()
        q = 1.0 + 0.8 * rng.random()
        b = 0.1 + 1.2 * rng.random()
        s = p + (q - p) * rng.random()
        c = 0.3 + 1.2 * rng.random()
        if rng.random() < 0.3:
            b = 0.0  # plain symmetric-curvature quartic
        # expand c (x-p)^2 (x-q)^2 (1 + b (x-s)^2)
        quartic = np.polynomial.polynomial.polymul(
            np.polynomial.polynomial.polypow([-p, 1.0], 2),
            np.polynomial.polynomial.polypow([-q, 1.0], 2))
        if b > 0:
            factor = np.polynomial.polynomial.polyadd(
                [1.0], b * np.polynomial.polynomial.polypow([-s, 1.0], 2))
            coeffs = c * np.polynomial.polynomial.polymul(quartic, factor)
        else:
            coeffs = c * quartic
        from instanton1d import PotentialModel, NotMultiWellError, NotSameLevelError
        try:
            model = PotentialModel(tuple(coeffs))
            wells = find_wells(model)
        except (NotMultiWellError, NotSameLevelError):
            continue
        if len(wells) != 2:
            continue
        if not (0.4 < wells[0].omega < 6.0 and 0.4 < wells[1].omega < 6.0):
            continue
        out.append(model)
    return out
