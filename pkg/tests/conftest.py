import numpy as np
import pytest

from teleplan.policy import pack_params, unpack_params
from teleplan.rewards import MockSemanticScorer, RewardWeights
from teleplan.scenario import (
    CandidateSite,
    Scenario,
    generate_scenario,
    normalize_features,
)


def fd_gradient_check(params, objective, grads, coord_rng, n_coords=25,
                      h=1e-5, tol=1e-4):
    """Central-difference check of an analytic gradient on random coordinates.

    Coordinates where the finite difference itself is unreliable (the h and
    h/2 estimates disagree, i.e. a ReLU kink sits inside the stencil) are
    skipped; at most 20% may be skipped. Returns the worst relative error.
    """
    vec = pack_params(params)
    gvec = np.concatenate([np.asarray(g).ravel() for g in grads])
    coords = coord_rng.choice(vec.size, size=n_coords, replace=False)
    worst, skipped = 0.0, 0

    def central(c, step):
        vp = vec.copy()
        vp[c] += step
        vm = vec.copy()
        vm[c] -= step
        return (objective(unpack_params(vp, params))
                - objective(unpack_params(vm, params))) / (2 * step)

    for c in coords:
        fd = central(c, h)
        fd_half = central(c, h / 2)
        scale = max(abs(fd), abs(fd_half), abs(gvec[c]), 1e-8)
        if abs(fd - fd_half) / scale > 1e-3:
            skipped += 1
            continue
        worst = max(worst, abs(fd - gvec[c]) / scale)
    assert skipped <= max(1, n_coords // 5), f"{skipped} unreliable stencils"
    assert worst < tol, worst
    return worst


def make_scenario(sites, k, planted=None, actual=None):
    xs = [s.x for s in sites]
    ys = [s.y for s in sites]
    return Scenario(
        sites=tuple(sites),
        select_count=k,
        bbox=(min(xs), min(ys), max(xs), max(ys)),
        planted_optimum=frozenset(planted) if planted else None,
        actual_built=frozenset(actual) if actual else None,
    )


def site(i, x=0.0, y=0.0, throughput=10.0, users=100, rent=1000.0,
         complaints="", key_area=False):
    return CandidateSite(
        id=f"s{i}", x=x, y=y, throughput=throughput, users=users, rent=rent,
        complaints_text=complaints, marketer_text="", region_text="",
        key_area=key_area,
    )


@pytest.fixture(scope="session")
def small_scenario():
    return generate_scenario(7, 30, 6, "urban-cluster")


@pytest.fixture(scope="session")
def small_normalized(small_scenario):
    return normalize_features(small_scenario)


@pytest.fixture(scope="session")
def mid_scenario():
    return generate_scenario(7, 100, 20, "urban-cluster")


@pytest.fixture
def scorer():
    return MockSemanticScorer()


@pytest.fixture
def weights():
    return RewardWeights()


@pytest.fixture
def rng():
    return np.random.default_rng(0)
