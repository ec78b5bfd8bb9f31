"""Selection policy: a shared per-candidate MLP scorer with masked softmax.

Every remaining candidate is scored by the same 4x128 ReLU MLP from a
10-dimensional state view (normalized site features plus selection
context); a masked softmax over unselected candidates yields the action
distribution. This handles variable pool sizes and shrinking action sets
and is equivariant to candidate ordering. All arithmetic is float64 so
analytic gradients can be checked against finite differences tightly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ContractViolation, PreconditionError
from .rewards import MockSemanticScorer, RewardBreakdown
from .scenario import NormalizedScenario

STATE_DIM = 10
HIDDEN = 128
N_HIDDEN_LAYERS = 4
CHECKPOINT_VERSION = "teleplan-mlp-1"


@dataclass(frozen=True)
class PolicyParams:
    """Weights of the scorer MLP: input -> 128 -> 128 -> 128 -> 128 -> 1.

    ``weights`` holds (W1..W4, w5) and ``biases`` (b1..b4, b5) with the
    output head stored as a vector w5 (hidden,) and 0-d b5.
    """

    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    version: str = CHECKPOINT_VERSION

    @property
    def feature_dim(self) -> int:
        return self.weights[0].shape[0]


def kernel_args(params: PolicyParams):
    w, b = params.weights, params.biases
    return (
        w[0], b[0], w[1], b[1], w[2], b[2], w[3], b[3], w[4], float(b[4]),
    )


def flat_arrays(params: PolicyParams) -> list[np.ndarray]:
    w, b = params.weights, params.biases
    return [w[0], b[0], w[1], b[1], w[2], b[2], w[3], b[3], w[4], b[4]]


def params_from_flat(flat, version: str = CHECKPOINT_VERSION) -> PolicyParams:
    return PolicyParams(
        weights=(flat[0], flat[2], flat[4], flat[6], flat[8]),
        biases=(flat[1], flat[3], flat[5], flat[7], np.asarray(flat[9])),
        version=version,
    )


def init_policy(feature_dim: int, seed: int) -> PolicyParams:
    """He-uniform weights (ReLU fan-in scaling), zero biases, per-seed
    deterministic."""
    if feature_dim < 1:
        raise PreconditionError(f"feature_dim must be >= 1, got {feature_dim}")
    rng = np.random.default_rng(seed)
    dims = [feature_dim] + [HIDDEN] * N_HIDDEN_LAYERS
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = math.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    limit = math.sqrt(6.0 / HIDDEN)
    weights.append(rng.uniform(-limit, limit, size=HIDDEN))
    biases.append(np.zeros(()))
    return PolicyParams(weights=tuple(weights), biases=tuple(biases))


def n_parameters(params: PolicyParams) -> int:
    return sum(a.size for a in flat_arrays(params))


def pack_params(params: PolicyParams) -> np.ndarray:
    return np.concatenate([np.asarray(a).ravel() for a in flat_arrays(params)])


def unpack_params(vector: np.ndarray, template: PolicyParams) -> PolicyParams:
    flat, offset = [], 0
    for a in flat_arrays(template):
        a = np.asarray(a)
        flat.append(vector[offset : offset + a.size].reshape(a.shape).copy())
        offset += a.size
    return params_from_flat(flat, template.version)


def zero_grads(params: PolicyParams) -> list[np.ndarray]:
    return [np.zeros_like(np.asarray(a)) for a in flat_arrays(params)]


def accumulate_grads(acc: list, grads, scale: float = 1.0) -> None:
    for slot, g in zip(acc, grads):
        slot += scale * np.asarray(g)


def grad_norm(grads) -> float:
    return math.sqrt(sum(float((np.asarray(g) ** 2).sum()) for g in grads))


def apply_gradient(params: PolicyParams, grads, scale: float) -> PolicyParams:
    """params + scale * grads (scale > 0 ascends, < 0 descends)."""
    flat = [np.asarray(a) + scale * np.asarray(g)
            for a, g in zip(flat_arrays(params), grads)]
    return params_from_flat(flat, params.version)


def save_params(params: PolicyParams, path) -> None:
    """Lossless npz checkpoint: version string + the ten layer tensors."""
    names = ["w1", "b1", "w2", "b2", "w3", "b3", "w4", "b4", "w5", "b5"]
    arrays = {n: np.asarray(a) for n, a in zip(names, flat_arrays(params))}
    np.savez(path, version=np.array(params.version), **arrays)


def load_params(path) -> PolicyParams:
    with np.load(path) as data:
        names = ["w1", "b1", "w2", "b2", "w3", "b3", "w4", "b4", "w5", "b5"]
        missing = [n for n in names if n not in data]
        if missing:
            raise ContractViolation(f"checkpoint missing tensors: {missing}")
        flat = [np.asarray(data[n], dtype=np.float64) for n in names]
        version = str(data["version"]) if "version" in data else CHECKPOINT_VERSION
    for a in flat:
        if not np.all(np.isfinite(a)):
            raise ContractViolation("checkpoint contains non-finite values")
    return params_from_flat(flat, version)


# ---------------------------------------------------------------------------
# state construction

class StateBuilder:
    """Builds the per-candidate state views for one scenario.

    Feature layout (all in [-1, 1]):
      0 t_hat  1 u_hat  2 e_hat  3 complaint score / 10  4 key_area
      5 x, 6 y (bbox-normalized)  7 distance to nearest selected site
      (bbox-diagonal-normalized, 1 when nothing selected)
      8 selected_count / k  9 remaining_count / n
    """

    def __init__(self, normalized: NormalizedScenario, scorer=None):
        scorer = scorer or MockSemanticScorer()
        sc = normalized.scenario
        n = len(sc.sites)
        self.normalized = normalized
        self.n = n
        self.k = sc.select_count
        self.positions = normalized.positions
        x_min, y_min, x_max, y_max = sc.bbox
        ex, ey = x_max - x_min, y_max - y_min
        self.diag = math.hypot(ex, ey) or 1.0
        static = np.empty((n, 7))
        static[:, 0] = normalized.t_hat
        static[:, 1] = normalized.u_hat
        static[:, 2] = normalized.e_hat
        static[:, 3] = [
            scorer.score_complaint(s.complaints_text) / 10.0 for s in sc.sites
        ]
        static[:, 4] = normalized.key_area
        static[:, 5] = (self.positions[:, 0] - x_min) / ex if ex > 0 else 0.0
        static[:, 6] = (self.positions[:, 1] - y_min) / ey if ey > 0 else 0.0
        self._static = static

    def initial_dist(self) -> np.ndarray:
        return np.ones(self.n)

    def updated_dist(self, dist: np.ndarray, site_index: int) -> np.ndarray:
        d = np.hypot(
            self.positions[:, 0] - self.positions[site_index, 0],
            self.positions[:, 1] - self.positions[site_index, 1],
        )
        return np.minimum(dist, d / self.diag)

    def state_matrix(self, dist: np.ndarray, n_selected: int) -> np.ndarray:
        x = np.empty((self.n, STATE_DIM))
        x[:, :7] = self._static
        x[:, 7] = dist
        x[:, 8] = n_selected / self.k
        x[:, 9] = (self.n - n_selected) / self.n
        return x


@dataclass
class Trajectory:
    """One ordered selection of k sites sampled from a (frozen) policy."""

    builder: StateBuilder
    actions: list[int]
    logprobs_old: np.ndarray  # log-probs under the sampling policy
    reward: RewardBreakdown | None = None

    @property
    def site_ids(self) -> list[str]:
        sites = self.builder.normalized.scenario.sites
        return [sites[a].id for a in self.actions]


# ---------------------------------------------------------------------------
# distributions and sampling

def masked_softmax(logits: np.ndarray, masked: np.ndarray | None = None) -> np.ndarray:
    """Probability vector with masked entries exactly 0; max-subtracted for
    stability. Raises if every candidate is masked."""
    if masked is None:
        masked = np.zeros(logits.shape[0], dtype=bool)
    avail = ~masked
    if not avail.any():
        raise ContractViolation("all candidates are masked")
    out = np.zeros_like(logits)
    z = logits[avail]
    ez = np.exp(z - z.max())
    out[avail] = ez / ez.sum()
    return out


def forward(params: PolicyParams, states: np.ndarray, masked=None) -> np.ndarray:
    """Action distribution over candidates given their state views."""
    logits = kernels.mlp_logits(np.ascontiguousarray(states), *kernel_args(params))
    return masked_softmax(logits, masked)


def sample_action(probabilities: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw over the stored candidate order."""
    nz = np.flatnonzero(probabilities > 0.0)
    if nz.size == 0:
        raise ContractViolation("no candidate has positive probability")
    cdf = np.cumsum(probabilities[nz])
    u = rng.random() * cdf[-1]
    j = int(np.searchsorted(cdf, u, side="right"))
    return int(nz[min(j, nz.size - 1)])


# ---------------------------------------------------------------------------
# rollouts

def rollout(
    params: PolicyParams,
    normalized: NormalizedScenario,
    rng: np.random.Generator,
    builder: StateBuilder | None = None,
) -> Trajectory:
    """Sample one complete selection of k sites; terminal reward left unset."""
    b = builder or StateBuilder(normalized)
    args = kernel_args(params)
    masked = np.zeros(b.n, dtype=bool)
    dist = b.initial_dist()
    actions: list[int] = []
    logps = np.empty(b.k)
    for t in range(b.k):
        states = b.state_matrix(dist, t)
        logits = kernels.mlp_logits(states, *args)
        probs = masked_softmax(logits, masked)
        a = sample_action(probs, rng)
        logps[t] = math.log(probs[a])
        actions.append(a)
        masked[a] = True
        dist = b.updated_dist(dist, a)
    return Trajectory(builder=b, actions=actions, logprobs_old=logps)


def rollout_group(
    params: PolicyParams, builder: StateBuilder, rngs
) -> list[Trajectory]:
    """Sample len(rngs) trajectories in lockstep.

    Each trajectory consumes its own rng stream, so results do not depend
    on batching or scheduling; the stacked forward just amortizes the
    per-call cost.
    """
    b = builder
    size = len(rngs)
    args = kernel_args(params)
    masked = np.zeros((size, b.n), dtype=bool)
    dists = np.ones((size, b.n))
    actions = [[] for _ in range(size)]
    logps = np.empty((size, b.k))
    for t in range(b.k):
        stacked = np.concatenate(
            [b.state_matrix(dists[i], t) for i in range(size)], axis=0
        )
        logits = kernels.mlp_logits(stacked, *args).reshape(size, b.n)
        for i in range(size):
            probs = masked_softmax(logits[i], masked[i])
            a = sample_action(probs, rngs[i])
            logps[i, t] = math.log(probs[a])
            actions[i].append(a)
            masked[i, a] = True
            dists[i] = b.updated_dist(dists[i], a)
    return [
        Trajectory(builder=b, actions=actions[i], logprobs_old=logps[i])
        for i in range(size)
    ]


def greedy_decode(params: PolicyParams, builder: StateBuilder) -> list[int]:
    """Deterministic argmax decoding of exactly k sites."""
    b = builder
    args = kernel_args(params)
    masked = np.zeros(b.n, dtype=bool)
    dist = b.initial_dist()
    actions: list[int] = []
    for t in range(b.k):
        logits = kernels.mlp_logits(b.state_matrix(dist, t), *args)
        probs = masked_softmax(logits, masked)
        a = int(np.argmax(probs))
        actions.append(a)
        masked[a] = True
        dist = b.updated_dist(dist, a)
    return actions


def replay_states(trajectory: Trajectory):
    """Rebuild (states, masked, action) per step of a recorded trajectory."""
    b = trajectory.builder
    actions = trajectory.actions
    if len(set(actions)) != len(actions):
        raise ContractViolation("trajectory actions are not distinct")
    if any(a < 0 or a >= b.n for a in actions):
        raise ContractViolation("trajectory action out of range")
    masked = np.zeros(b.n, dtype=bool)
    dist = b.initial_dist()
    for t, a in enumerate(actions):
        yield b.state_matrix(dist, t), masked.copy(), a
        masked[a] = True
        dist = b.updated_dist(dist, a)


def stacked_replay(trajectory: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """All step states of a trajectory as one (k*n, 10) matrix plus the
    (k, n) mask history; lets the update pass run one batched forward and
    backward per trajectory instead of per step."""
    b = trajectory.builder
    k = len(trajectory.actions)
    states = np.empty((k, b.n, STATE_DIM))
    masks = np.empty((k, b.n), dtype=bool)
    for t, (step_states, masked, _) in enumerate(replay_states(trajectory)):
        states[t] = step_states
        masks[t] = masked
    return states.reshape(k * b.n, STATE_DIM), masks


def log_prob_and_grad(
    params: PolicyParams, trajectory: Trajectory, coefficients
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Per-step log-probs under ``params`` and the weighted score gradient
    sum_t coeff_t * grad log pi(a_t | state_t), by exact reverse-mode
    differentiation. Gradients accumulate in step order."""
    coeffs = np.asarray(coefficients, dtype=np.float64)
    if coeffs.shape[0] != len(trajectory.actions):
        raise ContractViolation("one coefficient per step required")
    args = kernel_args(params)
    grads = zero_grads(params)
    logps = np.empty(len(trajectory.actions))
    for t, (states, masked, a) in enumerate(replay_states(trajectory)):
        if masked[a]:
            raise ContractViolation(f"action {a} was already selected at step {t}")
        logits, h1, h2, h3, h4 = kernels.mlp_forward(states, *args)
        probs = masked_softmax(logits, masked)
        logps[t] = math.log(probs[a])
        if coeffs[t] == 0.0:
            continue
        dlogits = -coeffs[t] * probs
        dlogits[a] += coeffs[t]
        step = kernels.mlp_backward(
            states, params.weights[1], params.weights[2], params.weights[3],
            params.weights[4], h1, h2, h3, h4, dlogits,
        )
        accumulate_grads(grads, step)
    return logps, grads
