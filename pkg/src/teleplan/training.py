"""Policy optimization: group-relative updates with a staged reward
curriculum, behavior-cloned reference pretraining, and PPO / single-stage
baselines.

One iteration samples a group of trajectories from the frozen previous
policy, scores each completed selection, normalizes rewards within the
group into advantages, and takes one clipped-surrogate ascent step with an
exact categorical KL penalty toward the reference policy at every visited
state. The sampling policy is refreshed after every iteration, which keeps
probability ratios near 1.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ContractViolation, PreconditionError, TrainingDiverged
from .policy import (
    STATE_DIM,
    PolicyParams,
    StateBuilder,
    Trajectory,
    accumulate_grads,
    apply_gradient,
    grad_norm,
    init_policy,
    kernel_args,
    masked_softmax,
    rollout_group,
    stacked_replay,
    zero_grads,
)
from .rewards import (
    MockSemanticScorer,
    RemoteSemanticScorer,
    RewardEvaluator,
    RewardWeights,
)
from .scenario import NormalizedScenario, Scenario, normalize_features

HISTORY_COLUMNS = ["iter", "stage", "mean_reward", "max_reward", "objective",
                   "mean_kl", "grad_norm"]


@dataclass(frozen=True)
class TrainConfig:
    group_size: int = 8
    clip_epsilon: float = 0.2
    kl_beta: float = 0.04
    learning_rate: float = 3e-4
    stage_iteration_cap: int = 400
    stage_window: int = 50
    stage_threshold: float = 0.02
    seed: int = 0
    weights: RewardWeights = field(default_factory=RewardWeights)
    scorer: str = "mock"  # mock | remote
    scorer_url: str | None = None
    scorer_timeout: float = 10.0
    optimizer: str = "sgd"  # sgd | adam
    use_sft: bool = True
    sft_epochs: int = 60
    sft_learning_rate: float = 0.05
    value_learning_rate: float = 0.005
    max_iterations: int | None = None  # overall budget; default 3 * stage cap

    @property
    def iteration_budget(self) -> int:
        if self.max_iterations is not None:
            return self.max_iterations
        return 3 * self.stage_iteration_cap

    def to_dict(self) -> dict:
        d = {}
        for name in self.__dataclass_fields__:
            value = getattr(self, name)
            d[name] = value.to_dict() if name == "weights" else value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        if isinstance(known.get("weights"), dict):
            known["weights"] = RewardWeights.from_dict(known["weights"])
        return cls(**known)


@dataclass
class IterationRecord:
    iter: int
    stage: int
    mean_reward: float
    max_reward: float
    objective: float
    mean_kl: float
    grad_norm: float


@dataclass
class TrainHistory:
    algo: str
    seed: int
    config: dict
    records: list[IterationRecord] = field(default_factory=list)
    stage_transitions: list[dict] = field(default_factory=list)
    fallback_count: int = 0
    # PPO only: mean |R - V| per iteration (diagnostic, not in the CSV)
    value_errors: list[float] = field(default_factory=list)

    def stages(self) -> list[int]:
        return [r.stage for r in self.records]

    def mean_rewards(self) -> list[float]:
        return [r.mean_reward for r in self.records]

    def final_window_mean(self, window: int) -> float:
        rewards = self.mean_rewards()
        if not rewards:
            return float("nan")
        return float(np.mean(rewards[-window:]))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(HISTORY_COLUMNS)
            for r in self.records:
                writer.writerow(
                    [r.iter, r.stage, repr(r.mean_reward), repr(r.max_reward),
                     repr(r.objective), repr(r.mean_kl), repr(r.grad_norm)]
                )

    def metadata(self) -> dict:
        return {
            "algo": self.algo,
            "seed": self.seed,
            "config": self.config,
            "stage_transitions": self.stage_transitions,
            "fallback_count": self.fallback_count,
            "iterations": len(self.records),
            "kernel_backend": kernels.BACKEND_NAME,
        }

    def write(self, csv_path) -> None:
        """History CSV plus a JSON metadata sidecar next to it."""
        self.to_csv(csv_path)
        meta_path = str(csv_path) + ".meta.json"
        with open(meta_path, "w", encoding="utf-8") as f:
            json.dump(self.metadata(), f, indent=1, sort_keys=True)
            f.write("\n")


def load_history_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    return [
        {
            "iter": int(r["iter"]),
            "stage": int(r["stage"]),
            "mean_reward": float(r["mean_reward"]),
            "max_reward": float(r["max_reward"]),
            "objective": float(r["objective"]),
            "mean_kl": float(r["mean_kl"]),
            "grad_norm": float(r["grad_norm"]),
        }
        for r in rows
    ]


# ---------------------------------------------------------------------------
# core math

def group_advantages(rewards) -> np.ndarray:
    """Group-standardized advantages: (R_i - mean) / population std, zeros
    when the group is (numerically) constant."""
    r = np.asarray(rewards, dtype=np.float64)
    if r.ndim != 1 or r.shape[0] < 2:
        raise PreconditionError("group_advantages needs at least 2 rewards")
    std = float(r.std())  # population std
    if std < 1e-8:
        return np.zeros_like(r)
    return (r - r.mean()) / std


def clip_ratio(r, epsilon: float):
    """Projection of the probability ratio onto [1 - eps, 1 + eps]."""
    if epsilon <= 0.0 or epsilon >= 1.0:
        raise PreconditionError(f"epsilon must be in (0, 1), got {epsilon}")
    out = np.maximum(np.minimum(r, 1.0 + epsilon), 1.0 - epsilon)
    return float(out) if np.ndim(out) == 0 else out


def kl_categorical(p, q) -> float:
    """Exact KL divergence between categorical distributions on the same
    support (terms with p = 0 contribute 0)."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ContractViolation("distributions must share a support")
    mask = p > 0.0
    if np.any(q[mask] <= 0.0):
        raise ContractViolation("q must be positive wherever p is positive")
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


class AdamState:
    """Adaptive-moment ascent, available behind config (SGD is the default)."""

    def __init__(self, params: PolicyParams, beta1=0.9, beta2=0.999, eps=1e-8):
        self.m = zero_grads(params)
        self.v = zero_grads(params)
        self.t = 0
        self.beta1, self.beta2, self.eps = beta1, beta2, eps

    def step(self, params: PolicyParams, grads, lr: float) -> PolicyParams:
        self.t += 1
        update = []
        for slot_m, slot_v, g in zip(self.m, self.v, grads):
            g = np.asarray(g)
            slot_m *= self.beta1
            slot_m += (1 - self.beta1) * g
            slot_v *= self.beta2
            slot_v += (1 - self.beta2) * g * g
            m_hat = slot_m / (1 - self.beta1 ** self.t)
            v_hat = slot_v / (1 - self.beta2 ** self.t)
            update.append(m_hat / (np.sqrt(v_hat) + self.eps))
        return apply_gradient(params, update, lr)


def _ascend(params, grads, config, opt_state):
    if config.optimizer == "adam":
        return opt_state.step(params, grads, config.learning_rate)
    return apply_gradient(params, grads, config.learning_rate)


def make_scorer(config: TrainConfig):
    if config.scorer == "remote":
        endpoint = os.environ.get("TELEPLAN_SCORER_URL") or config.scorer_url
        if not endpoint:
            raise PreconditionError(
                "remote scorer selected but no endpoint configured "
                "(set scorer_url or TELEPLAN_SCORER_URL)"
            )
        return RemoteSemanticScorer(endpoint, timeout=config.scorer_timeout)
    if config.scorer == "mock":
        return MockSemanticScorer()
    raise PreconditionError(f"unknown scorer {config.scorer!r}")


# ---------------------------------------------------------------------------
# objective and gradient

def _surrogate_and_kl_pass(theta, theta_old, theta_ref, trajectories,
                           advantages, config):
    """Objective value, mean per-step KL, and exact parameter gradients.

    Objective: mean over trajectories of per-step mean of
    min(ratio * A, clip(ratio) * A) - beta * KL(pi_theta || pi_ref),
    with ratio = pi_theta / pi_theta_old at the visited state. The new and
    old policies are evaluated through the identical code path, so
    theta == theta_old gives ratio exactly 1. Each trajectory runs one
    stacked forward per network and one stacked backward; gradients
    accumulate in fixed trajectory order.
    """
    eps, beta = config.clip_epsilon, config.kl_beta
    size = len(trajectories)
    args_new = kernel_args(theta)
    args_old = kernel_args(theta_old)
    args_ref = kernel_args(theta_ref)
    w2, w3, w4, w5 = theta.weights[1:5]
    grads = zero_grads(theta)
    objective = 0.0
    kl_sum = 0.0
    total_steps = 0
    for i, traj in enumerate(trajectories):
        adv = float(advantages[i])
        n_steps = len(traj.actions)
        n = traj.builder.n
        scale = 1.0 / (size * n_steps)
        stacked, masks = stacked_replay(traj)
        logits, h1, h2, h3, h4 = kernels.mlp_forward(stacked, *args_new)
        logits_old = kernels.mlp_logits(stacked, *args_old)
        logits_ref = kernels.mlp_logits(stacked, *args_ref)
        dlogits = np.zeros(n_steps * n)
        for t, a in enumerate(traj.actions):
            rows = slice(t * n, (t + 1) * n)
            masked = masks[t]
            p_new = masked_softmax(logits[rows], masked)
            p_old = masked_softmax(logits_old[rows], masked)
            p_ref = masked_softmax(logits_ref[rows], masked)

            ratio = p_new[a] / p_old[a]
            raw = ratio * adv
            clipped = clip_ratio(ratio, eps) * adv
            surrogate = min(raw, clipped)

            avail = ~masked
            pn = p_new[avail]
            live = pn > 0.0
            log_term = np.zeros_like(pn)
            log_term[live] = np.log(pn[live] / p_ref[avail][live])
            kl = float(np.dot(pn, log_term))

            objective += scale * (surrogate - beta * kl)
            kl_sum += kl
            total_steps += 1

            # d surrogate / d logits flows through the unclipped branch only
            step_dl = np.zeros(n)
            if raw <= clipped:
                step_dl = -adv * ratio * p_new
                step_dl[a] += adv * ratio
            dkl = np.zeros(n)
            dkl[avail] = pn * (log_term - kl)
            dlogits[rows] = scale * (step_dl - beta * dkl)
        traj_grads = kernels.mlp_backward(
            stacked, w2, w3, w4, w5, h1, h2, h3, h4, dlogits
        )
        accumulate_grads(grads, traj_grads)
    mean_kl = kl_sum / max(total_steps, 1)
    return objective, mean_kl, grads


def _rollout_rngs(config: TrainConfig, iteration: int):
    base = config.seed + iteration * config.group_size
    return [np.random.default_rng(base + i) for i in range(config.group_size)]


def _as_builder(scenario_like, scorer) -> StateBuilder:
    if isinstance(scenario_like, StateBuilder):
        return scenario_like
    if isinstance(scenario_like, NormalizedScenario):
        return StateBuilder(scenario_like, scorer)
    if isinstance(scenario_like, Scenario):
        return StateBuilder(normalize_features(scenario_like), scorer)
    raise PreconditionError("expected Scenario, NormalizedScenario or StateBuilder")


def grpo_step(
    scenario_like,
    theta: PolicyParams,
    theta_old: PolicyParams,
    theta_ref: PolicyParams,
    config: TrainConfig,
    *,
    stage: int = 3,
    evaluator: RewardEvaluator | None = None,
    iteration: int = 0,
    opt_state: AdamState | None = None,
):
    """One group-relative update. Returns (new params, record, trajectories).

    The caller refreshes theta_old with the returned params before the next
    iteration.
    """
    if config.group_size < 2:
        raise PreconditionError("group_size must be >= 2")
    scorer = evaluator.scorer if evaluator else MockSemanticScorer()
    builder = _as_builder(scenario_like, scorer)
    if evaluator is None:
        evaluator = RewardEvaluator(builder.normalized, scorer, config.weights)

    trajectories = rollout_group(theta_old, builder, _rollout_rngs(config, iteration))
    rewards = np.empty(config.group_size)
    for i, traj in enumerate(trajectories):
        traj.reward = evaluator.evaluate(traj.actions, stage)
        rewards[i] = traj.reward.combined
    advantages = group_advantages(rewards)

    objective, mean_kl, grads = _surrogate_and_kl_pass(
        theta, theta_old, theta_ref, trajectories, advantages, config
    )
    gnorm = grad_norm(grads)
    record = IterationRecord(
        iter=iteration,
        stage=stage,
        mean_reward=float(rewards.mean()),
        max_reward=float(rewards.max()),
        objective=float(objective),
        mean_kl=float(mean_kl),
        grad_norm=float(gnorm),
    )
    if not (math.isfinite(objective) and math.isfinite(gnorm)):
        raise TrainingDiverged(
            f"non-finite objective at iteration {iteration}", record.__dict__
        )
    theta_new = _ascend(theta, grads, config, opt_state)
    return theta_new, record, trajectories


# ---------------------------------------------------------------------------
# curriculum scheduler

def _advance_reason(stage_rewards: list[float], config: TrainConfig) -> str | None:
    """Why the current stage should end now, or None to keep training it."""
    if len(stage_rewards) >= config.stage_iteration_cap:
        return "cap"
    w = config.stage_window
    if len(stage_rewards) >= 2 * w:
        last = float(np.mean(stage_rewards[-w:]))
        prev = float(np.mean(stage_rewards[-2 * w : -w]))
        if abs(last - prev) / (abs(prev) + 1e-8) < config.stage_threshold:
            return "plateau"
    return None


def stage_scheduler(history: TrainHistory, config: TrainConfig) -> int:
    """Stage for the next iteration: advances on reward plateau or stage
    cap, never regresses, saturates at 3."""
    if not history.records:
        return 1
    current = history.records[-1].stage
    stage_rewards = [r.mean_reward for r in history.records if r.stage == current]
    if _advance_reason(stage_rewards, config) is not None:
        return min(current + 1, 3)
    return current


# ---------------------------------------------------------------------------
# supervised pretraining of the reference policy

def expert_order(normalized: NormalizedScenario, weights: RewardWeights) -> list[int]:
    """Ground-truth sites ordered by descending stage-1 per-site score
    (ties broken by site index); the cloning target."""
    ref = normalized.scenario.reference_set()
    if not ref:
        raise PreconditionError("scenario has no ground-truth selection")
    idx = normalized.indices_for(sorted(ref))
    score = weights.w_t * normalized.t_hat[idx] + weights.w_u * normalized.u_hat[idx]
    order = np.lexsort((idx, -score))
    return [int(idx[i]) for i in order]


def sft_pretrain(scenarios, config: TrainConfig):
    """Behavior-clone the ground-truth selections; returns (params, losses).

    Per epoch and scenario, minimizes the mean per-step cross-entropy of
    the masked softmax against the expert action sequence with plain SGD.
    Zero epochs returns the seed initialization untouched.
    """
    if isinstance(scenarios, (Scenario, NormalizedScenario)):
        scenarios = [scenarios]
    tasks = []
    for sc in scenarios:
        normalized = sc if isinstance(sc, NormalizedScenario) else normalize_features(sc)
        if normalized.scenario.reference_set():
            builder = StateBuilder(normalized)
            actions = expert_order(normalized, config.weights)
            tasks.append((builder, actions))
    if not tasks:
        raise PreconditionError(
            "no scenario provides a ground-truth selection; skip SFT"
        )

    replays = []
    for builder, actions in tasks:
        traj = Trajectory(builder=builder, actions=actions,
                          logprobs_old=np.zeros(len(actions)))
        replays.append((traj, *stacked_replay(traj)))

    params = init_policy(STATE_DIM, config.seed)
    losses: list[float] = []
    for _ in range(config.sft_epochs):
        epoch_loss = 0.0
        for traj, stacked, masks in replays:
            args = kernel_args(params)
            w2, w3, w4, w5 = params.weights[1:5]
            n = traj.builder.n
            inv_k = 1.0 / len(traj.actions)
            logits, h1, h2, h3, h4 = kernels.mlp_forward(stacked, *args)
            dlogits = np.empty_like(logits)
            ce = 0.0
            for t, a in enumerate(traj.actions):
                rows = slice(t * n, (t + 1) * n)
                probs = masked_softmax(logits[rows], masks[t])
                ce -= math.log(probs[a]) * inv_k
                dlogits[rows] = probs * inv_k
                dlogits[t * n + a] -= inv_k
            grads = kernels.mlp_backward(
                stacked, w2, w3, w4, w5, h1, h2, h3, h4, dlogits
            )
            params = apply_gradient(params, grads, -config.sft_learning_rate)
            epoch_loss += ce / len(replays)
        losses.append(epoch_loss)
    return params, losses


# ---------------------------------------------------------------------------
# training loops

def _prepare(scenario: Scenario, config: TrainConfig):
    normalized = normalize_features(scenario)
    scorer = make_scorer(config)
    builder = StateBuilder(normalized, scorer)
    evaluator = RewardEvaluator(normalized, scorer, config.weights)
    if config.use_sft and scenario.reference_set():
        theta_ref, _ = sft_pretrain(normalized, config)
    else:
        theta_ref = init_policy(STATE_DIM, config.seed)
    return builder, evaluator, scorer, theta_ref


def _finish(history: TrainHistory, scorer) -> None:
    history.fallback_count = getattr(scorer, "fallback_count", 0)


def train_grpo(
    scenario: Scenario, config: TrainConfig | None = None, on_stage_transition=None
):
    """Improved training loop: staged curriculum + group-relative updates
    anchored to the pretrained reference by a KL penalty.

    Stages advance on plateau or at the per-stage cap; the final stage then
    trains until the overall iteration budget so runs are budget-comparable
    with the single-stage baselines.
    """
    config = config or TrainConfig()
    builder, evaluator, scorer, theta_ref = _prepare(scenario, config)
    theta = theta_ref
    theta_old = theta
    opt_state = AdamState(theta) if config.optimizer == "adam" else None
    history = TrainHistory(algo="grpo", seed=config.seed, config=config.to_dict())

    stage = 1
    stage_rewards: list[float] = []
    for iteration in range(config.iteration_budget):
        if stage < 3:
            reason = _advance_reason(stage_rewards, config)
            if reason is not None:
                stage += 1
                stage_rewards = []
                history.stage_transitions.append(
                    {"iteration": iteration, "stage": stage, "reason": reason}
                )
                if on_stage_transition is not None:
                    on_stage_transition(stage, theta)
        theta, record, _ = grpo_step(
            builder, theta, theta_old, theta_ref, config,
            stage=stage, evaluator=evaluator, iteration=iteration,
            opt_state=opt_state,
        )
        theta_old = theta
        history.records.append(record)
        stage_rewards.append(record.mean_reward)
    _finish(history, scorer)
    return theta, history


def train_vanilla_grpo(
    scenario: Scenario, config: TrainConfig | None = None, on_stage_transition=None
):
    """Ablation baseline: identical updates but no curriculum; the stage-3
    reward applies from iteration 0."""
    config = config or TrainConfig()
    builder, evaluator, scorer, theta_ref = _prepare(scenario, config)
    theta = theta_ref
    theta_old = theta
    opt_state = AdamState(theta) if config.optimizer == "adam" else None
    history = TrainHistory(
        algo="grpo-vanilla", seed=config.seed, config=config.to_dict()
    )
    for iteration in range(config.iteration_budget):
        theta, record, _ = grpo_step(
            builder, theta, theta_old, theta_ref, config,
            stage=3, evaluator=evaluator, iteration=iteration,
            opt_state=opt_state,
        )
        theta_old = theta
        history.records.append(record)
    _finish(history, scorer)
    return theta, history


def _value_forward(value_params: PolicyParams, pooled: np.ndarray) -> np.ndarray:
    return kernels.mlp_logits(np.ascontiguousarray(pooled), *kernel_args(value_params))


def train_ppo(
    scenario: Scenario, config: TrainConfig | None = None, on_stage_transition=None
):
    """Clipped-surrogate baseline with a learned value head.

    The value net shares the trunk shape, reads the mean state view of the
    remaining candidates, and fits the terminal reward by squared error;
    advantages are R - V(state) per step, with no group normalization and
    no reference-model KL. The reward is the full stage-3 formula
    throughout.
    """
    config = config or TrainConfig()
    builder, evaluator, scorer, theta_ref = _prepare(scenario, config)
    theta = theta_ref
    theta_old = theta
    value_params = init_policy(STATE_DIM, config.seed + 1)
    opt_state = AdamState(theta) if config.optimizer == "adam" else None
    history = TrainHistory(algo="ppo", seed=config.seed, config=config.to_dict())

    for iteration in range(config.iteration_budget):
        trajectories = rollout_group(
            theta_old, builder, _rollout_rngs(config, iteration)
        )
        rewards = np.empty(config.group_size)
        for i, traj in enumerate(trajectories):
            traj.reward = evaluator.evaluate(traj.actions, 3)
            rewards[i] = traj.reward.combined

        # value predictions at every visited state (before updating V)
        replays = [stacked_replay(traj) for traj in trajectories]
        pooled_rows = []
        for traj, (stacked, masks) in zip(trajectories, replays):
            n = traj.builder.n
            for t in range(len(traj.actions)):
                pooled_rows.append(stacked[t * n : (t + 1) * n][~masks[t]].mean(axis=0))
        pooled = np.vstack(pooled_rows)
        values = _value_forward(value_params, pooled)

        args_new = kernel_args(theta)
        args_old = kernel_args(theta_old)
        w2, w3, w4, w5 = theta.weights[1:5]
        grads = zero_grads(theta)
        objective = 0.0
        row = 0
        for i, (traj, (stacked, masks)) in enumerate(zip(trajectories, replays)):
            n_steps = len(traj.actions)
            n = traj.builder.n
            scale = 1.0 / (config.group_size * n_steps)
            logits, h1, h2, h3, h4 = kernels.mlp_forward(stacked, *args_new)
            logits_old = kernels.mlp_logits(stacked, *args_old)
            dlogits = np.zeros(n_steps * n)
            for t, a in enumerate(traj.actions):
                rows = slice(t * n, (t + 1) * n)
                adv = float(rewards[i] - values[row])
                row += 1
                p_new = masked_softmax(logits[rows], masks[t])
                p_old = masked_softmax(logits_old[rows], masks[t])
                ratio = p_new[a] / p_old[a]
                raw = ratio * adv
                clipped = clip_ratio(ratio, config.clip_epsilon) * adv
                objective += scale * min(raw, clipped)
                if raw <= clipped:
                    step_dl = -adv * ratio * p_new
                    step_dl[a] += adv * ratio
                    dlogits[rows] = scale * step_dl
            traj_grads = kernels.mlp_backward(
                stacked, w2, w3, w4, w5, h1, h2, h3, h4, dlogits
            )
            accumulate_grads(grads, traj_grads)
        gnorm = grad_norm(grads)
        record = IterationRecord(
            iter=iteration,
            stage=3,
            mean_reward=float(rewards.mean()),
            max_reward=float(rewards.max()),
            objective=float(objective),
            mean_kl=0.0,
            grad_norm=float(gnorm),
        )
        if not (math.isfinite(objective) and math.isfinite(gnorm)):
            raise TrainingDiverged(
                f"non-finite objective at iteration {iteration}", record.__dict__
            )
        theta = _ascend(theta, grads, config, opt_state)
        theta_old = theta
        history.records.append(record)

        # squared-error fit of the value head to the terminal rewards
        targets = np.repeat(rewards, [len(t.actions) for t in trajectories])
        history.value_errors.append(float(np.abs(values - targets).mean()))
        vlogits, vh1, vh2, vh3, vh4 = kernels.mlp_forward(
            np.ascontiguousarray(pooled), *kernel_args(value_params)
        )
        dv = 2.0 * (vlogits - targets) / targets.shape[0]
        vw2, vw3, vw4, vw5 = value_params.weights[1:5]
        value_grads = kernels.mlp_backward(
            pooled, vw2, vw3, vw4, vw5, vh1, vh2, vh3, vh4, dv
        )
        value_params = apply_gradient(
            value_params, value_grads, -config.value_learning_rate
        )
    _finish(history, scorer)
    return theta, history


TRAINERS = {
    "grpo": train_grpo,
    "grpo-vanilla": train_vanilla_grpo,
    "ppo": train_ppo,
}
