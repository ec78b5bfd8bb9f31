"""Plan quality evaluation: ground-truth overlap, non-RL baseline planners,
run comparison reports, and GeoJSON export."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .coverage import RadioConfig, coverage_stats, grid_for_bbox, rsrp_grid
from .errors import PreconditionError
from .rewards import MockSemanticScorer, RewardWeights
from .scenario import NormalizedScenario, Scenario, unproject_xy
from .training import TrainHistory


def overlap(planned, reference) -> float:
    """Planning-construction consistency: |planned intersect reference| /
    |planned| for equal-sized non-empty sets."""
    p = set(planned)
    r = set(reference)
    if not p or len(p) != len(r):
        raise PreconditionError(
            f"overlap needs equal-sized non-empty sets, got {len(p)} vs {len(r)}"
        )
    return len(p & r) / len(p)


def plan_greedy(
    normalized: NormalizedScenario,
    weights: RewardWeights | None = None,
    scorer=None,
) -> list[str]:
    """Iteratively add the site that maximizes the stage-3 reward of the
    augmented selection; ties broken by lowest site index."""
    weights = weights or RewardWeights()
    scorer = scorer or MockSemanticScorer()
    sc = normalized.scenario
    n = len(sc.sites)
    k = sc.select_count
    pos = normalized.positions
    dmat = np.sqrt(((pos[:, None, :] - pos[None, :, :]) ** 2).sum(axis=2))
    m_site = np.array(
        [scorer.score_complaint(s.complaints_text) for s in sc.sites]
    ) / 10.0

    selected: list[int] = []
    sum_t = sum_u = sum_e = sum_m = 0.0
    nn_dist = np.empty(0)  # within-selection nearest-neighbor distances
    dist_to_sel = np.full(n, np.inf)
    taken = np.zeros(n, dtype=bool)

    for _ in range(k):
        m_count = len(selected) + 1
        t_vec = (sum_t + normalized.t_hat) / m_count
        u_vec = (sum_u + normalized.u_hat) / m_count
        e_vec = (sum_e + normalized.e_hat) / m_count
        mm_vec = (sum_m + m_site) / m_count
        if selected:
            new_nn = np.minimum(nn_dist[:, None], dmat[np.ix_(selected, range(n))])
            k_vec = (
                np.exp(-new_nn / weights.sigma).sum(axis=0)
                + np.exp(-dist_to_sel / weights.sigma)
            ) / m_count
        else:
            k_vec = np.zeros(n)
        r1 = weights.w_t * t_vec + weights.w_u * u_vec
        r2 = weights.w_s * r1 - weights.w_m * mm_vec - weights.w_e * e_vec
        r3 = weights.w_s * r2 + weights.w_k * k_vec
        r3[taken] = -np.inf
        choice = int(np.argmax(r3))  # first max wins: lowest index on ties

        if selected:
            nn_dist = np.minimum(nn_dist, dmat[selected, choice])
            nn_dist = np.append(nn_dist, dist_to_sel[choice])
        else:
            nn_dist = np.array([np.inf])
        dist_to_sel = np.minimum(dist_to_sel, dmat[:, choice])
        selected.append(choice)
        taken[choice] = True
        sum_t += normalized.t_hat[choice]
        sum_u += normalized.u_hat[choice]
        sum_e += normalized.e_hat[choice]
        sum_m += m_site[choice]
    return [sc.sites[i].id for i in selected]


def plan_kmeans(normalized: NormalizedScenario, k: int, seed: int = 0) -> list[str]:
    """User-weighted k-means over site positions (k-means++ seeding, fixed
    100 Lloyd iterations); selects the site nearest each centroid, resolving
    duplicates by next-nearest."""
    sc = normalized.scenario
    n = len(sc.sites)
    if k > n:
        raise PreconditionError(f"k={k} exceeds pool size {n}")
    pos = normalized.positions
    w = normalized.u_hat.copy()
    if w.sum() <= 0.0:
        w = np.ones(n)
    rng = np.random.default_rng(seed)

    centroids = np.empty((k, 2))
    centroids[0] = pos[rng.choice(n, p=w / w.sum())]
    for j in range(1, k):
        d2 = ((pos[:, None, :] - centroids[None, :j, :]) ** 2).sum(axis=2).min(axis=1)
        p = w * d2
        total = p.sum()
        if total <= 0.0:
            p = w / w.sum()
        else:
            p = p / total
        centroids[j] = pos[rng.choice(n, p=p)]

    for _ in range(100):
        d2 = ((pos[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        assign = d2.argmin(axis=1)
        for j in range(k):
            members = assign == j
            mass = w[members].sum()
            if mass > 0.0:
                centroids[j] = (pos[members] * w[members, None]).sum(axis=0) / mass

    chosen: list[int] = []
    used = np.zeros(n, dtype=bool)
    for j in range(k):
        d = np.hypot(pos[:, 0] - centroids[j, 0], pos[:, 1] - centroids[j, 1])
        order = np.lexsort((np.arange(n), d))
        pick = next(int(i) for i in order if not used[i])
        used[pick] = True
        chosen.append(pick)
    return [sc.sites[i].id for i in chosen]


def random_plan(scenario: Scenario, seed: int = 0) -> list[str]:
    """Uniform k-subset baseline."""
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(scenario.sites), size=scenario.select_count, replace=False)
    return [scenario.sites[int(i)].id for i in idx]


# ---------------------------------------------------------------------------
# run comparison

@dataclass
class ComparisonReport:
    runs: list[dict] = field(default_factory=list)
    seed_panel: dict = field(default_factory=dict)
    plans: list[dict] = field(default_factory=list)

    def to_json(self, path) -> None:
        payload = {
            "runs": self.runs,
            "seed_panel": self.seed_panel,
            "plans": self.plans,
        }
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=1, sort_keys=True)
            f.write("\n")

    def write_tables(self, runs_csv, plans_csv) -> None:
        with open(runs_csv, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["label", "algo", "seed", "final_mean_reward"])
            for r in self.runs:
                writer.writerow(
                    [r["label"], r["algo"], r["seed"], repr(r["final_mean_reward"])]
                )
        with open(plans_csv, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(
                ["label", "overlap", "frac_above_m80dbm", "frac_above_m60dbm",
                 "min_dbm", "mean_dbm"]
            )
            for p in self.plans:
                writer.writerow(
                    [p["label"],
                     "" if p["overlap"] is None else repr(p["overlap"]),
                     repr(p["coverage"]["frac_above_m80dbm"]),
                     repr(p["coverage"]["frac_above_m60dbm"]),
                     repr(p["coverage"]["min_dbm"]),
                     repr(p["coverage"]["mean_dbm"])]
                )


def _history_entry(label, item) -> dict:
    if isinstance(item, TrainHistory):
        return {
            "label": label,
            "algo": item.algo,
            "seed": item.seed,
            "mean_rewards": item.mean_rewards(),
        }
    return {
        "label": label,
        "algo": item.get("algo", label),
        "seed": item.get("seed", 0),
        "mean_rewards": [row["mean_reward"] for row in item["rows"]],
    }


def default_cell_size(scenario: Scenario) -> float:
    x_min, y_min, x_max, y_max = scenario.bbox
    extent = max(x_max - x_min, y_max - y_min, 1.0)
    return min(100.0, max(5.0, extent / 96.0))


def plan_grid(plan_ids, scenario: Scenario, radio: RadioConfig | None = None,
              cell_size_m: float | None = None):
    """RSRP grid of a plan's site positions over the scenario bbox."""
    by_id = {s.id: s for s in scenario.sites}
    positions = [(by_id[i].x, by_id[i].y) for i in plan_ids]
    if cell_size_m is None:
        cell_size_m = default_cell_size(scenario)
    return rsrp_grid(positions, grid_for_bbox(scenario.bbox, cell_size_m), radio)


def evaluate_plans(plans: dict, scenario: Scenario,
                   radio: RadioConfig | None = None,
                   cell_size_m: float | None = None) -> list[dict]:
    """Per-plan overlap (when the scenario has a reference set) and coverage
    statistics."""
    reference = scenario.reference_set()
    entries = []
    for label, ids in plans.items():
        grid = plan_grid(ids, scenario, radio, cell_size_m)
        entries.append(
            {
                "label": label,
                "ids": list(ids),
                "overlap": overlap(ids, reference) if reference else None,
                "coverage": coverage_stats(grid),
            }
        )
    return entries


def compare_runs(
    histories: dict,
    plans: dict,
    scenario: Scenario,
    window: int = 50,
    radio: RadioConfig | None = None,
    cell_size_m: float | None = None,
) -> ComparisonReport:
    """Aggregate training runs and candidate plans into one report.

    ``histories`` maps labels to TrainHistory objects (or dicts with
    ``rows`` loaded from history CSVs); ``plans`` maps labels to site-id
    lists. Final rewards are last-``window`` means; plans get overlap
    against the scenario's reference set (when present) and coverage
    statistics from the RSRP grid of their site positions.
    """
    if len(histories) < 2:
        raise PreconditionError("compare_runs needs at least 2 runs")
    report = ComparisonReport()
    for label, item in histories.items():
        entry = _history_entry(label, item)
        rewards = entry["mean_rewards"]
        report.runs.append(
            {
                "label": entry["label"],
                "algo": entry["algo"],
                "seed": entry["seed"],
                "final_mean_reward": float(np.mean(rewards[-window:])),
            }
        )

    by_algo: dict[str, list[float]] = {}
    for r in report.runs:
        by_algo.setdefault(r["algo"], []).append(r["final_mean_reward"])
    report.seed_panel = {
        algo: {
            "mean": float(np.mean(vals)),
            "std": float(np.std(vals)),
            "n_seeds": len(vals),
        }
        for algo, vals in by_algo.items()
    }
    report.plans = evaluate_plans(plans, scenario, radio, cell_size_m)
    return report


def export_geojson(plan, scenario: Scenario, path) -> None:
    """FeatureCollection of all candidate sites, flagged by plan membership
    and reference membership, with coordinates back-projected to lon/lat."""
    selected = set(plan)
    reference = scenario.reference_set() or frozenset()
    features = []
    for s in scenario.sites:
        lat, lon = unproject_xy(s.x, s.y, scenario.anchor_lat, scenario.anchor_lon)
        features.append(
            {
                "type": "Feature",
                "geometry": {
                    "type": "Point",
                    "coordinates": [float(lon), float(lat)],
                },
                "properties": {
                    "id": s.id,
                    "selected": s.id in selected,
                    "in_reference": s.id in reference,
                },
            }
        )
    with open(path, "w", encoding="utf-8") as f:
        json.dump({"type": "FeatureCollection", "features": features}, f, indent=1)
        f.write("\n")
