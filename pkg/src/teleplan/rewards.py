"""Staged reward computation for a completed site selection.

The scalar reward is built in three curriculum stages: stage 1 scores
demand capture (throughput and users), stage 2 adds complaint and rent
penalties while retaining stage 1 at a reduced weight, stage 3 adds a
spatial clustering incentive on top of stage 2. The final reward combines
the staged scalar with a semantic score in [0, 10] from a pluggable scorer
(a deterministic mock by default, optionally a remote HTTP service).
"""

from __future__ import annotations

import json
import logging
import re
import threading
import urllib.error
import urllib.request
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .scenario import NormalizedScenario, Scenario

log = logging.getLogger(__name__)

# Signed sentiment values for the deterministic complaint scorer. Positive
# means objection to construction (penalized), negative means a coverage
# demand (selecting the site addresses it, so it reduces the penalty).
# Case-insensitive substring match, each keyword counted once per text.
COMPLAINT_KEYWORDS = {
    "radiation": 6.0,
    "oppose construction": 8.0,
    "noise": 3.0,
    "no signal": -5.0,
    "please build": -4.0,
    "call drops": -4.0,
    "slow data": -3.0,
}


@dataclass(frozen=True)
class RewardWeights:
    w_t: float = 10.0
    w_u: float = 12.0
    w_s: float = 0.2
    w_m: float = 5.0
    w_e: float = 4.0
    w_k: float = 8.0
    w1: float = 1.0
    w2: float = 1.0
    sigma: float = 500.0  # cluster length scale, meters

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict) -> "RewardWeights":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**known)


@dataclass(frozen=True)
class RewardBreakdown:
    t: float
    u: float
    m: float
    e: float
    k: float
    stage: int
    r: float
    llm_score: float
    combined: float


def mock_complaint_score(text: str) -> float:
    """Keyword-table sentiment in [-10, 10]; empty or matchless text is 0."""
    if not text:
        return 0.0
    lowered = text.lower()
    total = sum(v for kw, v in COMPLAINT_KEYWORDS.items() if kw in lowered)
    return float(min(10.0, max(-10.0, total)))


def mock_semantic_score(selection, scenario: Scenario) -> float:
    """Deterministic stand-in for the LLM plan score, in [0, 10].

    Blends key-area coverage, spatial balance over bounding-box quadrants,
    and the absence of objection-type complaints.
    """
    ids = list(selection)
    if not ids:
        raise PreconditionError("selection is empty")
    by_id = {s.id: s for s in scenario.sites}
    sites = [by_id[i] for i in ids]

    key_fraction = sum(1.0 for s in sites if s.key_area) / len(sites)

    x_min, y_min, x_max, y_max = scenario.bbox
    cx, cy = (x_min + x_max) / 2.0, (y_min + y_max) / 2.0
    quad_counts = [0, 0, 0, 0]
    for s in sites:
        quad_counts[(s.x >= cx) + 2 * (s.y >= cy)] += 1
    max_share = max(quad_counts) / len(sites)
    spatial_balance = 1.0 - (max_share - 0.25) / 0.75

    negative_fraction = sum(
        1.0 for s in sites if mock_complaint_score(s.complaints_text) > 0.0
    ) / len(sites)

    raw = 0.4 * key_fraction + 0.3 * spatial_balance + 0.3 * (1.0 - negative_fraction)
    return 10.0 * min(1.0, max(0.0, raw))


class MockSemanticScorer:
    """Deterministic scorer pair used by default everywhere."""

    def score_selection(self, selection, scenario: Scenario) -> float:
        return mock_semantic_score(selection, scenario)

    def score_complaint(self, text: str) -> float:
        return mock_complaint_score(text)


def cluster_score(selection, scenario: Scenario, sigma: float = 500.0) -> float:
    """Spatial contiguity score in [0, 1].

    Mean over selected sites of exp(-d_nn / sigma) where d_nn is the
    distance to the nearest other selected site; 0 for a singleton.
    """
    ids = list(selection)
    if not ids:
        raise PreconditionError("selection is empty")
    if len(ids) == 1:
        return 0.0
    by_id = {s.id: s for s in scenario.sites}
    pos = np.array([[by_id[i].x, by_id[i].y] for i in ids])
    return _cluster_score_xy(pos, sigma)


def _cluster_score_xy(pos: np.ndarray, sigma: float) -> float:
    if len(pos) == 1:
        return 0.0
    diff = pos[:, None, :] - pos[None, :, :]
    d = np.sqrt((diff * diff).sum(axis=2))
    np.fill_diagonal(d, np.inf)
    return float(np.exp(-d.min(axis=1) / sigma).mean())


def set_terms(
    selection, normalized: NormalizedScenario, scorer, sigma: float = 500.0
) -> tuple[float, float, float, float, float]:
    """Aggregate per-site features of a selection into the (t, u, m, e, k)
    reward terms: means of the normalized features, mean complaint score
    scaled to [-1, 1], and the cluster score."""
    ids = list(selection)
    if not ids:
        raise PreconditionError("selection is empty")
    idx = normalized.indices_for(ids)
    t = float(normalized.t_hat[idx].mean())
    u = float(normalized.u_hat[idx].mean())
    e = float(normalized.e_hat[idx].mean())
    sites = normalized.scenario.sites
    m = float(
        np.mean([scorer.score_complaint(sites[i].complaints_text) for i in idx]) / 10.0
    )
    k = _cluster_score_xy(normalized.positions[idx], sigma)
    return t, u, m, e, k


def stage_reward(terms, stage: int, weights: RewardWeights) -> float:
    """Curriculum reward; later stages retain earlier ones at weight w_s."""
    t, u, m, e, k = terms
    r1 = weights.w_t * t + weights.w_u * u
    if stage == 1:
        return r1
    r2 = weights.w_s * r1 - weights.w_m * m - weights.w_e * e
    if stage == 2:
        return r2
    if stage == 3:
        return weights.w_s * r2 + weights.w_k * k
    raise PreconditionError(f"stage must be 1, 2 or 3, got {stage}")


def combined_reward(r: float, llm_score: float, weights: RewardWeights) -> float:
    """w1 * staged reward + w2 * semantic score (score clamped to [0, 10])."""
    if llm_score < 0.0 or llm_score > 10.0:
        log.warning("semantic score %.3f outside [0, 10], clamping", llm_score)
        llm_score = min(10.0, max(0.0, llm_score))
    return weights.w1 * r + weights.w2 * llm_score


def evaluate_selection(
    selection,
    normalized: NormalizedScenario,
    scorer,
    weights: RewardWeights,
    stage: int,
) -> RewardBreakdown:
    """Full reward breakdown for one selection at the given stage."""
    terms = set_terms(selection, normalized, scorer, sigma=weights.sigma)
    r = stage_reward(terms, stage, weights)
    llm = float(scorer.score_selection(list(selection), normalized.scenario))
    combined = combined_reward(r, llm, weights)
    t, u, m, e, k = terms
    return RewardBreakdown(
        t=t, u=u, m=m, e=e, k=k, stage=stage, r=r,
        llm_score=min(10.0, max(0.0, llm)), combined=combined,
    )


class RewardEvaluator:
    """Index-based fast path for repeated evaluation during training.

    Precomputes per-site complaint scores and caches the semantic score per
    unique selection (the scorer is deterministic, so caching is exact).
    """

    def __init__(self, normalized: NormalizedScenario, scorer, weights: RewardWeights):
        self.normalized = normalized
        self.scorer = scorer
        self.weights = weights
        sites = normalized.scenario.sites
        self.complaint = np.array(
            [scorer.score_complaint(s.complaints_text) for s in sites]
        )
        self._ids = [s.id for s in sites]
        self._llm_cache: dict[frozenset, float] = {}

    def evaluate(self, indices, stage: int) -> RewardBreakdown:
        idx = np.asarray(indices, dtype=np.intp)
        nz = self.normalized
        t = float(nz.t_hat[idx].mean())
        u = float(nz.u_hat[idx].mean())
        e = float(nz.e_hat[idx].mean())
        m = float(self.complaint[idx].mean() / 10.0)
        k = _cluster_score_xy(nz.positions[idx], self.weights.sigma)
        r = stage_reward((t, u, m, e, k), stage, self.weights)
        key = frozenset(int(i) for i in idx)
        llm = self._llm_cache.get(key)
        if llm is None:
            raw = float(
                self.scorer.score_selection(
                    [self._ids[i] for i in idx], nz.scenario
                )
            )
            llm = min(10.0, max(0.0, raw))
            self._llm_cache[key] = llm
        combined = combined_reward(r, llm, self.weights)
        return RewardBreakdown(
            t=t, u=u, m=m, e=e, k=k, stage=stage, r=r, llm_score=llm, combined=combined
        )


# ---------------------------------------------------------------------------
# remote scorer

_SCORE_RE = re.compile(r"Score:\s*([-+]?\d+(?:\.\d+)?)", re.IGNORECASE)

PROMPT_HEADER = (
    "You are reviewing a 5G base-station site selection plan. The selected "
    "sites are listed below with their demand figures, rent, key-area flag, "
    "complaint records, marketing demands and regional descriptions.\n"
    "Rate the plan considering: geographic balance of the distribution, "
    "coverage of key areas, expected user satisfaction given the complaint "
    "records, and how well marketing development demands are met.\n"
    "Reply with a line 'Score: <number between 0 and 10>' (10 = best) "
    "followed by a line 'Reasoning: <brief justification>'.\n"
)


def render_selection_prompt(selection, scenario: Scenario) -> str:
    by_id = {s.id: s for s in scenario.sites}
    lines = [PROMPT_HEADER, "Selected sites:"]
    for sid in selection:
        s = by_id[sid]
        lines.append(
            f"- {s.id}: pos=({s.x:.0f},{s.y:.0f})m throughput={s.throughput:.1f}Mbps "
            f"users={s.users} rent={s.rent:.0f} key_area={str(s.key_area).lower()} "
            f"complaints={s.complaints_text!r} marketing={s.marketer_text!r} "
            f"region={s.region_text!r}"
        )
    return "\n".join(lines)


class RemoteSemanticScorer:
    """Scores selections through an HTTP endpoint, with a local fallback.

    POSTs ``{"prompt": <rendered prompt>}`` as JSON and expects a response
    body containing a line ``Score: <number>``. Any network or parse failure
    falls back to the mock scorer and bumps ``fallback_count``; training is
    never aborted by the remote side. Each call opens its own connection, so
    instances are safe to share across rollout threads.
    """

    def __init__(self, endpoint: str, timeout: float = 10.0, fallback=None):
        self.endpoint = endpoint
        self.timeout = timeout
        self.fallback = fallback or MockSemanticScorer()
        self._lock = threading.Lock()
        self.fallback_count = 0

    def _record_fallback(self, reason: str):
        with self._lock:
            self.fallback_count += 1
        log.warning("remote scorer fallback (%s)", reason)

    def score_selection(self, selection, scenario: Scenario) -> float:
        prompt = render_selection_prompt(selection, scenario)
        body = json.dumps({"prompt": prompt}).encode("utf-8")
        request = urllib.request.Request(
            self.endpoint, data=body, headers={"Content-Type": "application/json"}
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as resp:
                text = resp.read().decode("utf-8", errors="replace")
        except (urllib.error.URLError, OSError, ValueError) as exc:
            self._record_fallback(f"request failed: {exc}")
            return self.fallback.score_selection(selection, scenario)
        match = _SCORE_RE.search(text)
        if match is None:
            self._record_fallback(f"unparseable response: {text[:80]!r}")
            return self.fallback.score_selection(selection, scenario)
        return float(min(10.0, max(0.0, float(match.group(1)))))

    def score_complaint(self, text: str) -> float:
        return self.fallback.score_complaint(text)
