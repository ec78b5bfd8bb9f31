import logging
import math

import numpy as np
import pytest

from teleplan.errors import PreconditionError
from teleplan.rewards import (
    MockSemanticScorer,
    RewardEvaluator,
    RewardWeights,
    cluster_score,
    combined_reward,
    evaluate_selection,
    mock_complaint_score,
    mock_semantic_score,
    set_terms,
    stage_reward,
)
from teleplan.scenario import generate_scenario, normalize_features

from conftest import make_scenario, site


# ---- complaint scorer ----

def test_complaint_empty_and_matchless():
    assert mock_complaint_score("") == 0.0
    assert mock_complaint_score("everything is fine") == 0.0


def test_complaint_single_keyword():
    assert mock_complaint_score("radiation concern") == 6.0


def test_complaint_sum_of_keywords():
    assert mock_complaint_score("no signal here, please build a tower") == -9.0


def test_complaint_case_insensitive_counted_once():
    assert mock_complaint_score("NOISE noise NoIsE") == 3.0


def test_complaint_clamped():
    text = "radiation radiation oppose construction noise"  # 6 + 8 + 3 = 17
    assert mock_complaint_score(text) == 10.0
    assert mock_complaint_score("no signal please build call drops slow data") == -10.0


# ---- cluster score ----

def test_cluster_colocated_pair():
    sites = [site(0, x=100.0, y=100.0), site(1, x=100.0, y=100.0)]
    assert cluster_score(["s0", "s1"], make_scenario(sites, 2)) == 1.0


def test_cluster_pair_at_sigma():
    sites = [site(0, x=0.0), site(1, x=500.0)]
    k = cluster_score(["s0", "s1"], make_scenario(sites, 2), sigma=500.0)
    assert abs(k - math.exp(-1.0)) < 1e-12  # 0.367879...


def test_cluster_singleton_is_zero(small_scenario):
    assert cluster_score([small_scenario.sites[0].id], small_scenario) == 0.0


def test_cluster_bounds_and_far_site_never_increases(rng):
    sc = generate_scenario(11, 40, 10, "uniform")
    ids = [s.id for s in sc.sites]
    for _ in range(20):
        pick = list(rng.choice(ids, size=5, replace=False))
        k = cluster_score(pick, sc, sigma=400.0)
        assert 0.0 <= k <= 1.0
    # adding a site farther than every existing nearest-neighbor distance
    near = [site(0, 0, 0), site(1, 10, 0), site(2, 0, 12)]
    far = site(3, 5000.0, 5000.0)
    both = make_scenario(near + [far], 4)
    assert (
        cluster_score(["s0", "s1", "s2", "s3"], both, 500.0)
        <= cluster_score(["s0", "s1", "s2"], both, 500.0)
    )


# ---- set terms ----

def test_set_terms_singleton(scorer):
    sites = [site(0, throughput=4.0, users=6, rent=2.0),
             site(1, x=10, throughput=10.0, users=10, rent=10.0),
             site(2, x=20, throughput=0.0, users=0, rent=0.0)]
    nz = normalize_features(make_scenario(sites, 1))
    t, u, m, e, k = set_terms(["s0"], nz, scorer)
    assert (t, u, m, e, k) == (0.4, 0.6, 0.0, 0.2, 0.0)


def test_set_terms_identical_sites(scorer):
    sites = [site(0, throughput=5.0, users=5, rent=5.0, complaints="noise"),
             site(1, x=3, throughput=5.0, users=5, rent=5.0, complaints="noise"),
             site(2, x=6, throughput=9.0, users=9, rent=9.0)]
    nz = normalize_features(make_scenario(sites, 2))
    t, u, m, e, k = set_terms(["s0", "s1"], nz, scorer)
    site_t = nz.t_hat[0]
    assert t == site_t and u == site_t and e == site_t
    assert m == 0.3  # noise scores 3, scaled by /10, mean of two equals


def test_set_terms_matches_bruteforce(scorer, rng):
    sc = generate_scenario(13, 50, 20, "urban-cluster")
    nz = normalize_features(sc)
    ids = [s.id for s in sc.sites]
    pick = list(rng.choice(ids, size=20, replace=False))
    t, u, m, e, k = set_terms(pick, nz, scorer, sigma=500.0)
    # independent re-aggregation
    by_id = {s.id: s for s in sc.sites}
    idx = [ids.index(i) for i in pick]
    assert abs(t - np.mean([nz.t_hat[i] for i in idx])) < 1e-12
    assert abs(u - np.mean([nz.u_hat[i] for i in idx])) < 1e-12
    assert abs(e - np.mean([nz.e_hat[i] for i in idx])) < 1e-12
    exp_m = np.mean([mock_complaint_score(by_id[i].complaints_text) for i in pick]) / 10
    assert abs(m - exp_m) < 1e-12
    nn = []
    for i in pick:
        a = by_id[i]
        nn.append(min(math.hypot(a.x - by_id[j].x, a.y - by_id[j].y)
                      for j in pick if j != i))
    assert abs(k - np.mean([math.exp(-d / 500.0) for d in nn])) < 1e-12


def test_set_terms_unknown_id(small_normalized, scorer):
    with pytest.raises(KeyError):
        set_terms(["nope"], small_normalized, scorer)


# ---- staged reward ----

def test_stage1_worked_example(weights):
    assert stage_reward((0.5, 0.5, 0.0, 0.0, 0.0), 1, weights) == 11.0


def test_stage2_worked_example(weights):
    # r1 = 11.0 for t = u = 0.5; 0.2*11 - 5*0.4 - 4*0.3 = -1.0
    r = stage_reward((0.5, 0.5, 0.4, 0.3, 0.0), 2, weights)
    assert abs(r - (-1.0)) < 1e-12


def test_stage3_worked_example(weights):
    # r2 = -1.0 from above; 0.2*(-1) + 8*0.5 = 3.8
    r = stage_reward((0.5, 0.5, 0.4, 0.3, 0.5), 3, weights)
    assert abs(r - 3.8) < 1e-12


def test_stage_reward_linear_slopes_equal_weights(weights):
    # finite-difference slope in each term equals the documented coefficient
    base = (0.31, 0.42, 0.17, 0.25, 0.6)
    h = 0.5

    def bump(i):
        t = list(base)
        t[i] += h
        return tuple(t)

    slopes3 = [(stage_reward(bump(i), 3, weights)
                - stage_reward(base, 3, weights)) / h for i in range(5)]
    ws = weights.w_s
    expect3 = [ws * ws * weights.w_t, ws * ws * weights.w_u,
               -ws * weights.w_m, -ws * weights.w_e, weights.w_k]
    assert np.allclose(slopes3, expect3, atol=1e-9)
    slopes1 = [(stage_reward(bump(i), 1, weights)
                - stage_reward(base, 1, weights)) / h for i in range(5)]
    assert np.allclose(slopes1, [weights.w_t, weights.w_u, 0, 0, 0], atol=1e-9)


def test_stage_invalid(weights):
    with pytest.raises(PreconditionError):
        stage_reward((0, 0, 0, 0, 0), 4, weights)


# ---- combined reward ----

def test_combined_worked_example(weights):
    assert combined_reward(3.8, 7.0, weights) == 10.8


def test_combined_zero_weight():
    w = RewardWeights(w2=0.0)
    assert combined_reward(5.0, 3.0, w) == combined_reward(5.0, 9.0, w) == 5.0


def test_combined_clamps_with_warning(weights, caplog):
    with caplog.at_level(logging.WARNING):
        assert combined_reward(0.0, 12.0, weights) == 10.0
    assert any("clamp" in r.message for r in caplog.records)


# ---- mock semantic score ----

def test_mock_semantic_extremes():
    # balanced quadrants, all key areas, no objections -> 10
    sites = [site(0, x=-10, y=-10, key_area=True),
             site(1, x=10, y=-10, key_area=True),
             site(2, x=-10, y=10, key_area=True),
             site(3, x=10, y=10, key_area=True)]
    sc = make_scenario(sites, 4)
    assert mock_semantic_score([s.id for s in sites], sc) == 10.0
    # one quadrant, no key areas, all objection complaints -> 0
    bad = [site(i, x=-10 + i * 0.1, y=-10, complaints="radiation") for i in range(4)]
    bad_sc = make_scenario(bad + [site(9, x=10, y=10)], 4)
    assert mock_semantic_score([s.id for s in bad], bad_sc) == 0.0


def test_mock_semantic_matches_fraction_recomputation(rng):
    sc = generate_scenario(17, 60, 20, "urban-cluster")
    ids = [s.id for s in sc.sites]
    pick = list(rng.choice(ids, size=20, replace=False))
    got = mock_semantic_score(pick, sc)
    by_id = {s.id: s for s in sc.sites}
    chosen = [by_id[i] for i in pick]
    key_frac = sum(s.key_area for s in chosen) / 20
    x_min, y_min, x_max, y_max = sc.bbox
    cx, cy = (x_min + x_max) / 2, (y_min + y_max) / 2
    quads = [0] * 4
    for s in chosen:
        quads[(s.x >= cx) + 2 * (s.y >= cy)] += 1
    balance = 1 - (max(quads) / 20 - 0.25) / 0.75
    neg = sum(mock_complaint_score(s.complaints_text) > 0 for s in chosen) / 20
    expect = 10 * min(1.0, max(0.0, 0.4 * key_frac + 0.3 * balance + 0.3 * (1 - neg)))
    assert abs(got - expect) < 1e-12


# ---- composition ----

def test_evaluate_selection_deterministic(small_normalized, scorer, weights):
    ids = [s.id for s in small_normalized.scenario.sites[:6]]
    a = evaluate_selection(ids, small_normalized, scorer, weights, 3)
    b = evaluate_selection(ids, small_normalized, scorer, weights, 3)
    assert a == b  # bit-identical dataclasses
    assert a.combined == weights.w1 * a.r + weights.w2 * a.llm_score


def test_reward_evaluator_matches_public_path(small_normalized, scorer, weights):
    ev = RewardEvaluator(small_normalized, scorer, weights)
    ids = [s.id for s in small_normalized.scenario.sites[:6]]
    idx = small_normalized.indices_for(ids)
    fast = ev.evaluate(idx, 3)
    slow = evaluate_selection(ids, small_normalized, scorer, weights, 3)
    assert abs(fast.combined - slow.combined) < 1e-12
    assert fast.stage == slow.stage and abs(fast.k - slow.k) < 1e-12


def test_planted_beats_random_stage3():
    weights = RewardWeights()
    scorer = MockSemanticScorer()
    for seed in range(8):
        sc = generate_scenario(seed, 80, 16, "urban-cluster")
        nz = normalize_features(sc)
        planted = evaluate_selection(sorted(sc.planted_optimum), nz, scorer,
                                     weights, 3)
        rng = np.random.default_rng(seed + 1000)
        ids = [s.id for s in sc.sites]
        rand = list(rng.choice(ids, size=16, replace=False))
        random_r = evaluate_selection(rand, nz, scorer, weights, 3)
        assert planted.r >= random_r.r
