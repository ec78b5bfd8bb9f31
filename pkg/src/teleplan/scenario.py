"""Candidate-site scenarios: domain types, synthetic generation, file I/O.

A scenario is a pool of candidate base-station sites with quantitative
features (throughput demand, user count, rent) and free-text attributes,
plus the number of sites to select. Positions are planar meters; ingestion
projects lat/lon with a local equirectangular approximation anchored at the
bounding-box centroid, so the planar frame of loaded data is canonical
(bbox centroid at the origin). Synthetic scenarios are generated directly
in that canonical frame, which makes save -> load an identity.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import PreconditionError, SchemaError, ValidationError

METERS_PER_DEG = 111_320.0

CSV_COLUMNS = [
    "id",
    "lat",
    "lon",
    "throughput_mbps",
    "users",
    "rent",
    "key_area",
    "complaints_text",
    "marketer_text",
    "region_text",
    "selected",
]
REQUIRED_COLUMNS = ["id", "lat", "lon", "throughput_mbps", "users", "rent"]

NORMALIZED_FEATURES = ("throughput", "users", "rent")


@dataclass(frozen=True)
class CandidateSite:
    id: str
    x: float
    y: float
    throughput: float
    users: int
    rent: float
    complaints_text: str = ""
    marketer_text: str = ""
    region_text: str = ""
    key_area: bool = False


@dataclass(frozen=True)
class Scenario:
    sites: tuple[CandidateSite, ...]
    select_count: int
    bbox: tuple[float, float, float, float]  # x_min, y_min, x_max, y_max
    anchor_lat: float = 0.0
    anchor_lon: float = 0.0
    planted_optimum: frozenset[str] | None = None
    actual_built: frozenset[str] | None = None

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def reference_set(self) -> frozenset[str] | None:
        """Ground-truth selection if any: planted optimum, else built sites."""
        return self.planted_optimum or self.actual_built


@dataclass
class NormalizedScenario:
    """Scenario plus min-max scaled features in [0, 1].

    Constant features map to 0 everywhere. ``bounds`` keeps the (min, max)
    per feature so the scaling is invertible.
    """

    scenario: Scenario
    t_hat: np.ndarray
    u_hat: np.ndarray
    e_hat: np.ndarray
    bounds: dict[str, tuple[float, float]]
    positions: np.ndarray = field(init=False)
    key_area: np.ndarray = field(init=False)
    id_to_index: dict[str, int] = field(init=False)

    def __post_init__(self):
        self.positions = np.array(
            [[s.x, s.y] for s in self.scenario.sites], dtype=np.float64
        )
        self.key_area = np.array(
            [s.key_area for s in self.scenario.sites], dtype=np.float64
        )
        self.id_to_index = {s.id: i for i, s in enumerate(self.scenario.sites)}

    def indices_for(self, ids) -> np.ndarray:
        try:
            return np.array([self.id_to_index[i] for i in ids], dtype=np.intp)
        except KeyError as exc:
            raise KeyError(f"unknown site id {exc.args[0]!r}") from None

    def denormalize(self, feature: str, values) -> np.ndarray:
        lo, hi = self.bounds[feature]
        return lo + np.asarray(values, dtype=np.float64) * (hi - lo)


def _tight_bbox(xs, ys) -> tuple[float, float, float, float]:
    return float(np.min(xs)), float(np.min(ys)), float(np.max(xs)), float(np.max(ys))


def project_latlon(lat, lon, lat0: float, lon0: float):
    """Local equirectangular projection to planar meters."""
    x = (np.asarray(lon) - lon0) * METERS_PER_DEG * math.cos(math.radians(lat0))
    y = (np.asarray(lat) - lat0) * METERS_PER_DEG
    return x, y


def unproject_xy(x, y, lat0: float, lon0: float):
    lon = lon0 + np.asarray(x) / (METERS_PER_DEG * math.cos(math.radians(lat0)))
    lat = lat0 + np.asarray(y) / METERS_PER_DEG
    return lat, lon


# ---------------------------------------------------------------------------
# synthetic generation

_DEMAND_PHRASES = (
    "no signal indoors, residents keep asking for coverage",
    "please build a tower here soon",
    "call drops every evening on the main road",
    "slow data during peak hours near the market",
    "no signal along the riverside path",
)
_OBJECTION_PHRASES = (
    "radiation worries raised at the town meeting",
    "homeowners oppose construction next to the school",
    "noise from the equipment cabinet bothers neighbours",
    "radiation petition signed by the street committee",
)
_MARKETER_PHRASES = (
    "enterprise customers requesting dedicated capacity",
    "new mall opening, expects heavy foot traffic",
    "campus expansion planned for next year",
    "no specific development demand recorded",
    "logistics park tenants asking for better uplink",
)
_REGION_PHRASES = (
    "dense residential blocks with schools",
    "mixed office and retail district",
    "industrial zone with warehouses",
    "suburban housing, low rise",
    "riverside leisure area",
)


def generate_scenario(
    seed: int, n_candidates: int, select_count: int, profile: str = "urban-cluster"
) -> Scenario:
    """Deterministic synthetic scenario.

    ``urban-cluster`` places 3-6 Gaussian hotspots with elevated throughput
    and user counts and records a planted optimum (the ``select_count`` best
    sites by the stage-1 per-site score over normalized features);
    ``uniform`` scatters all features independently with no planted optimum.
    """
    if select_count < 1 or n_candidates < select_count:
        raise PreconditionError(
            f"need n_candidates >= select_count >= 1, got n={n_candidates} k={select_count}"
        )
    if profile not in ("uniform", "urban-cluster"):
        raise PreconditionError(f"unknown profile {profile!r}")

    rng = np.random.default_rng(seed)
    n = n_candidates
    extent = 4000.0 * math.sqrt(n / 100.0)

    if profile == "urban-cluster":
        n_hot = int(rng.integers(3, 7))
        centers = rng.uniform(0.12, 0.88, size=(n_hot, 2)) * extent
        sigmas = rng.uniform(0.035, 0.08, size=n_hot) * extent

        pos = np.empty((n, 2))
        in_hotspot = rng.random(n) < 0.7
        hot_idx = rng.integers(0, n_hot, size=n)
        for i in range(n):
            if in_hotspot[i]:
                h = hot_idx[i]
                pos[i] = centers[h] + rng.normal(0.0, sigmas[h], size=2)
            else:
                pos[i] = rng.uniform(0.0, extent, size=2)
        pos = np.clip(pos, 0.0, extent)

        # hotspot intensity drives demand features and, partly, rent
        d2 = ((pos[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        intensity = np.exp(-d2 / (2.0 * sigmas[None, :] ** 2)).sum(axis=1)
        throughput = np.maximum(
            20.0 + 160.0 * intensity + rng.normal(0.0, 8.0, n), 0.0
        )
        users = np.maximum(
            np.rint(40.0 + 450.0 * intensity + rng.normal(0.0, 20.0, n)), 0.0
        ).astype(int)
        rent = np.maximum(
            8000.0 + 22000.0 * intensity + rng.normal(0.0, 1500.0, n), 100.0
        )
        hot = intensity > 0.5
        key_area = rng.random(n) < np.where(hot, 0.75, 0.15)

        complaints = []
        for i in range(n):
            roll = rng.random()
            if hot[i]:
                if roll < 0.55:
                    complaints.append(_DEMAND_PHRASES[rng.integers(len(_DEMAND_PHRASES))])
                elif roll < 0.65:
                    complaints.append(_OBJECTION_PHRASES[rng.integers(len(_OBJECTION_PHRASES))])
                else:
                    complaints.append("")
            else:
                if roll < 0.2:
                    complaints.append(_DEMAND_PHRASES[rng.integers(len(_DEMAND_PHRASES))])
                elif roll < 0.45:
                    complaints.append(_OBJECTION_PHRASES[rng.integers(len(_OBJECTION_PHRASES))])
                else:
                    complaints.append("")
    else:
        pos = rng.uniform(0.0, extent, size=(n, 2))
        throughput = rng.uniform(0.0, 200.0, n)
        users = rng.integers(0, 500, n)
        rent = rng.uniform(1000.0, 50000.0, n)
        key_area = rng.random(n) < 0.3
        all_phrases = _DEMAND_PHRASES + _OBJECTION_PHRASES + ("",) * 6
        complaints = [all_phrases[rng.integers(len(all_phrases))] for _ in range(n)]

    marketer = [_MARKETER_PHRASES[rng.integers(len(_MARKETER_PHRASES))] for _ in range(n)]
    region = [_REGION_PHRASES[rng.integers(len(_REGION_PHRASES))] for _ in range(n)]

    # canonical frame: tight bbox centroid at the origin
    x_min, y_min, x_max, y_max = _tight_bbox(pos[:, 0], pos[:, 1])
    pos[:, 0] -= (x_min + x_max) / 2.0
    pos[:, 1] -= (y_min + y_max) / 2.0

    sites = tuple(
        CandidateSite(
            id=f"site-{i:04d}",
            x=float(pos[i, 0]),
            y=float(pos[i, 1]),
            throughput=float(throughput[i]),
            users=int(users[i]),
            rent=float(rent[i]),
            complaints_text=complaints[i],
            marketer_text=marketer[i],
            region_text=region[i],
            key_area=bool(key_area[i]),
        )
        for i in range(n)
    )

    planted = None
    if profile == "urban-cluster":
        t_hat = _minmax(throughput)
        u_hat = _minmax(users.astype(np.float64))
        score = 10.0 * t_hat + 12.0 * u_hat
        order = np.lexsort((np.arange(n), -score))  # ties -> lowest index first
        planted = frozenset(sites[i].id for i in order[:select_count])

    return Scenario(
        sites=sites,
        select_count=select_count,
        bbox=_tight_bbox(pos[:, 0], pos[:, 1]),
        planted_optimum=planted,
    )


def _minmax(values: np.ndarray) -> np.ndarray:
    lo = float(values.min())
    hi = float(values.max())
    if hi <= lo:
        return np.zeros_like(values, dtype=np.float64)
    return (values - lo) / (hi - lo)


def normalize_features(scenario: Scenario) -> NormalizedScenario:
    """Min-max scale throughput/users/rent over the candidate pool."""
    if not scenario.sites:
        raise PreconditionError("scenario has no sites")
    throughput = np.array([s.throughput for s in scenario.sites], dtype=np.float64)
    users = np.array([s.users for s in scenario.sites], dtype=np.float64)
    rent = np.array([s.rent for s in scenario.sites], dtype=np.float64)
    bounds = {
        "throughput": (float(throughput.min()), float(throughput.max())),
        "users": (float(users.min()), float(users.max())),
        "rent": (float(rent.min()), float(rent.max())),
    }
    return NormalizedScenario(
        scenario=scenario,
        t_hat=_minmax(throughput),
        u_hat=_minmax(users),
        e_hat=_minmax(rent),
        bounds=bounds,
    )


def validate_scenario(scenario: Scenario) -> list[str]:
    """Invariant violations as human-readable strings; empty means valid."""
    report = []
    seen = set()
    for s in scenario.sites:
        if s.id in seen:
            report.append(f"duplicate site id: {s.id}")
        seen.add(s.id)
        if s.throughput < 0:
            report.append(f"negative throughput for site {s.id}")
        if s.users < 0:
            report.append(f"negative users for site {s.id}")
        if s.rent < 0:
            report.append(f"negative rent for site {s.id}")
        if not (math.isfinite(s.x) and math.isfinite(s.y)):
            report.append(f"non-finite position for site {s.id}")
    if scenario.select_count < 1:
        report.append("select_count must be positive")
    if scenario.select_count > len(scenario.sites):
        report.append(
            f"select_count exceeds pool ({scenario.select_count} > {len(scenario.sites)})"
        )
    for name, ref in (
        ("planted_optimum", scenario.planted_optimum),
        ("actual_built", scenario.actual_built),
    ):
        if ref is not None:
            unknown = ref - seen
            if unknown:
                report.append(f"{name} contains unknown ids: {sorted(unknown)}")
            if len(ref) != scenario.select_count:
                report.append(
                    f"{name} size {len(ref)} != select_count {scenario.select_count}"
                )
    return report


# ---------------------------------------------------------------------------
# file I/O

_TRUTHY = {"true", "1", "yes", "y"}
_FALSY = {"false", "0", "no", "n", ""}


def _parse_bool(raw: str, column: str) -> bool:
    v = raw.strip().lower()
    if v in _TRUTHY:
        return True
    if v in _FALSY:
        return False
    raise SchemaError(f"cannot parse boolean {raw!r} in column {column}")


def _parse_float(raw: str, column: str) -> float:
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise SchemaError(f"cannot parse number {raw!r} in column {column}") from None


def load_scenario(
    path, mapping: dict | None = None, select_count: int | None = None
) -> Scenario:
    """Read a scenario from CSV or JSON (by file suffix).

    ``mapping`` maps canonical column names to source column names for
    third-party exports. Rows with ``selected=true`` populate
    ``actual_built``; ``select_count`` defaults to the selected-row count,
    else to 30% of the pool.
    """
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"scenario file not found: {path}")
    if path.suffix.lower() == ".json":
        with open(path, encoding="utf-8") as f:
            rows = json.load(f)
        if not isinstance(rows, list):
            raise SchemaError("JSON scenario must be an array of site objects")
        rows = [{k: ("" if v is None else str(v)) for k, v in r.items()} for r in rows]
    else:
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
    if not rows:
        raise SchemaError(f"no site records in {path}")

    mapping = mapping or {}
    colname = {c: mapping.get(c, c) for c in CSV_COLUMNS}
    present = set(rows[0].keys())
    for canonical in REQUIRED_COLUMNS:
        if colname[canonical] not in present:
            raise SchemaError(f"missing required column: {colname[canonical]}")

    def get(row, canonical, default=""):
        return row.get(colname[canonical], default) or default

    ids, lats, lons, recs = [], [], [], []
    for row in rows:
        sid = str(get(row, "id")).strip()
        if not sid:
            raise SchemaError("empty site id")
        ids.append(sid)
        lats.append(_parse_float(get(row, "lat"), colname["lat"]))
        lons.append(_parse_float(get(row, "lon"), colname["lon"]))
        recs.append(row)
    dupes = {i for i in ids if ids.count(i) > 1}
    if dupes:
        raise ValidationError(f"duplicate site id: {sorted(dupes)[0]}")

    lats = np.array(lats)
    lons = np.array(lons)
    lat0 = float((lats.min() + lats.max()) / 2.0)
    lon0 = float((lons.min() + lons.max()) / 2.0)
    xs, ys = project_latlon(lats, lons, lat0, lon0)

    sites = []
    selected_ids = []
    for i, row in enumerate(recs):
        throughput = _parse_float(get(row, "throughput_mbps"), colname["throughput_mbps"])
        users_f = _parse_float(get(row, "users"), colname["users"])
        rent = _parse_float(get(row, "rent"), colname["rent"])
        key = _parse_bool(get(row, "key_area", "false"), colname["key_area"])
        if _parse_bool(get(row, "selected", "false"), colname["selected"]):
            selected_ids.append(ids[i])
        sites.append(
            CandidateSite(
                id=ids[i],
                x=float(xs[i]),
                y=float(ys[i]),
                throughput=throughput,
                users=int(users_f),
                rent=rent,
                complaints_text=str(get(row, "complaints_text")),
                marketer_text=str(get(row, "marketer_text")),
                region_text=str(get(row, "region_text")),
                key_area=key,
            )
        )

    actual = frozenset(selected_ids) if selected_ids else None
    if select_count is None:
        select_count = len(actual) if actual else max(1, round(0.3 * len(sites)))
    return Scenario(
        sites=tuple(sites),
        select_count=select_count,
        bbox=_tight_bbox(xs, ys),
        anchor_lat=lat0,
        anchor_lon=lon0,
        planted_optimum=None,
        actual_built=actual,
    )


def save_scenario(scenario: Scenario, path) -> None:
    """Write the documented CSV (or JSON) schema; reference selections are
    stored in the ``selected`` column."""
    path = Path(path)
    reference = scenario.reference_set() or frozenset()
    records = []
    for s in scenario.sites:
        lat, lon = unproject_xy(s.x, s.y, scenario.anchor_lat, scenario.anchor_lon)
        records.append(
            {
                "id": s.id,
                "lat": repr(float(lat)),
                "lon": repr(float(lon)),
                "throughput_mbps": repr(s.throughput),
                "users": str(s.users),
                "rent": repr(s.rent),
                "key_area": "true" if s.key_area else "false",
                "complaints_text": s.complaints_text,
                "marketer_text": s.marketer_text,
                "region_text": s.region_text,
                "selected": "true" if s.id in reference else "false",
            }
        )
    if path.suffix.lower() == ".json":
        with open(path, "w", encoding="utf-8") as f:
            json.dump(records, f, indent=1)
            f.write("\n")
    else:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            writer.writerows(records)


def with_reference(scenario: Scenario, ids, planted: bool = False) -> Scenario:
    """Copy of the scenario with a reference selection attached."""
    ref = frozenset(ids)
    if planted:
        return replace(scenario, planted_optimum=ref)
    return replace(scenario, actual_built=ref)
