"""Q-learning driver.

Replay memory, epsilon-greedy action selection with expert-guided
exploration, one-step targets from a periodically synced target network, and
the epoch loop that ties them together. Training runs on a single thread so a
fixed seed reproduces the same network and log.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from time import perf_counter
from typing import TYPE_CHECKING, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .bch import Codebook
from .environment import (
    HashingEnv,
    State,
    encode_state_vector,
    margin,
    reward_terminate,
)
from .hamming import BinaryCode, LabelSet, flip_bit
from .io import write_training_log
from .models import EnvConfig, EpochStats, TrainConfig, Transition
from .qnetwork import (
    EVAL,
    TRAIN,
    QNetwork,
    backward,
    copy_network,
    default_architecture,
    forward,
    init_network,
    save_network,
    sgd_update,
)

if TYPE_CHECKING:
    from .dataset import Dataset

_SEED_BOUND = 2**63


class ReplayBuffer:
    """Fixed-capacity FIFO of transitions sampled uniformly."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._ring: List[Optional[Transition]] = [None] * capacity
        self.inserted = 0

    def __len__(self) -> int:
        return min(self.inserted, self.capacity)

    def push(self, transition: Transition) -> None:
        """Store ``transition``, evicting the oldest one when full."""
        self._ring[self.inserted % self.capacity] = transition
        self.inserted += 1

    def contents(self) -> List[Transition]:
        """Stored transitions, oldest first."""
        if self.inserted <= self.capacity:
            return [t for t in self._ring[: self.inserted] if t is not None]
        start = self.inserted % self.capacity
        return [t for t in self._ring[start:] + self._ring[:start] if t is not None]

    def sample(self, batch_size: int, rng: np.random.Generator) -> List[Transition]:
        """Uniform sample without replacement."""
        size = len(self)
        if batch_size > size:
            raise ValueError(f"Cannot sample {batch_size} from {size} transitions")
        picks = rng.choice(size, size=batch_size, replace=False)
        return [self._ring[int(i)] for i in picks]


def epsilon_at(epoch: int, config: TrainConfig) -> float:
    """Linear decay from eps_start (epoch 0) to eps_end (epoch decay - 1), then flat."""
    span = config.eps_decay_epochs - 1
    if span <= 0 or epoch >= span:
        return config.eps_end
    return config.eps_start - (config.eps_start - config.eps_end) * epoch / span


def greedy_action(net: QNetwork, state_vec: np.ndarray) -> int:
    """Argmax of eval-mode Q-values; ties go to the smallest index."""
    q, _ = forward(net, state_vec, EVAL)
    return int(np.argmax(q))


def select_action(
    net: QNetwork,
    state: State,
    epsilon: float,
    config: TrainConfig,
    env: HashingEnv,
    labels: LabelSet,
    rng: np.random.Generator,
    state_vec: Optional[np.ndarray] = None,
) -> int:
    """Epsilon-greedy choice; exploration asks the expert with ``expert_prob``."""
    if rng.random() < epsilon:
        if rng.random() < config.expert_prob:
            return env.expert_action(state, labels)
        return int(rng.integers(env.num_actions))
    if state_vec is None:
        state_vec = encode_state_vector(state)
    return greedy_action(net, state_vec)


def q_target(batch: Sequence[Transition], target: QNetwork, gamma: float) -> np.ndarray:
    """r for terminal transitions, r + gamma * max_a Q_target(s', a) otherwise."""
    if not batch:
        raise ValueError("Empty batch")
    rewards = np.array([t.reward for t in batch], dtype=np.float64)
    done = np.array([t.done for t in batch], dtype=bool)
    next_q, _ = forward(target, np.stack([t.next_state_vec for t in batch]), EVAL)
    return rewards + gamma * np.where(done, 0.0, next_q.max(axis=1))


def train_on_batch(
    online: QNetwork,
    target: QNetwork,
    batch: Sequence[Transition],
    gamma: float,
    learning_rate: float,
    mask_seed: int,
) -> float:
    """One SGD step on the squared error of the taken actions' Q-values.

    The step follows the gradient of ``0.5 * sum((q - y) ** 2)`` over the
    batch, so every sample moves the network at ``learning_rate`` whatever
    the batch size. Returns the mean squared error before the step.
    """
    y = q_target(batch, target, gamma)
    states = np.stack([t.state_vec for t in batch])
    actions = np.array([t.action for t in batch])
    rows = np.arange(len(batch))
    q, cache = forward(online, states, TRAIN, mask_seed)
    error = q[rows, actions] - y
    dq = np.zeros_like(q)
    dq[rows, actions] = error
    sgd_update(online, backward(online, cache, dq), learning_rate)
    return float(np.mean(error**2))


def rollout_greedy(
    net: QNetwork,
    env: HashingEnv,
    feature: np.ndarray,
    item_id: int,
    run_seed: int,
) -> Tuple[State, List[int]]:
    """Follow the greedy policy from the (run_seed, item_id) start.

    Returns the final state and the actions taken.
    """
    state = env.reset(feature, item_id, run_seed)
    actions: List[int] = []
    while not state.done:
        action = greedy_action(net, encode_state_vector(state))
        actions.append(action)
        state = env.transition(state, action)
    return state, actions


@dataclass
class TrainingResult:
    """Trained online network plus the per-epoch log."""

    network: QNetwork
    epochs: List[EpochStats]
    env_config: EnvConfig
    updates: int


def run_training(
    dataset: Dataset,
    book: Codebook,
    config: TrainConfig,
    model_path: Optional[str] = None,
    log_path: Optional[str] = None,
    progress_callback: Optional[Callable[[int, int], None]] = None,
    timed: bool = True,
) -> TrainingResult:
    """Train a Q-network on the dataset's train split.

    Every epoch visits the train items in a seeded shuffle and rolls out one
    episode each; once the buffer holds ``batch_size`` transitions every
    environment step is followed by one gradient update.

    Args:
        dataset: Features and labels; items tagged ``train`` are used.
        book: Class codebook the rewards are measured against.
        config: Hyperparameters.
        model_path: Where to save the trained network, if given.
        log_path: Where to write the training log, if given.
        progress_callback: Receives (completed_epochs, total_epochs).
        timed: Record wall-clock seconds per epoch; 0.0 otherwise.

    Returns:
        The trained network and per-epoch statistics.
    """
    train_ids = dataset.indices("train")
    if train_ids.size == 0:
        raise ValueError("Dataset has no training items")
    dataset.check_classes(book.num_classes)

    env_config = config.env_config(book.radius, book.b)
    env = HashingEnv(book, env_config, dataset.feature_dim)
    specs = default_architecture(
        env.state_dim, env.num_actions, config.hidden, config.dropout
    )
    online = init_network(specs, config.seed)
    target = copy_network(online)
    buffer = ReplayBuffer(config.buffer_capacity)
    rng = np.random.default_rng(config.seed)

    history: List[EpochStats] = []
    updates = 0
    for epoch in range(config.epochs):
        started = perf_counter()
        epsilon = epsilon_at(epoch, config)
        returns, lengths, final_dpos = [], [], []
        for item in rng.permutation(train_ids):
            item = int(item)
            labels = dataset.labels[item]
            state = env.reset(dataset.features[item], item, config.seed, epoch=epoch)
            vec = encode_state_vector(state)
            total, steps = 0.0, 0
            while not state.done:
                action = select_action(
                    online, state, epsilon, config, env, labels, rng, vec
                )
                outcome = env.step(state, action, labels)
                next_vec = encode_state_vector(outcome.next_state)
                # Cut-off episodes stay bootstrapped: only terminate is terminal.
                buffer.push(
                    Transition(vec, action, outcome.reward, next_vec, outcome.terminated)
                )
                if len(buffer) >= config.batch_size:
                    batch = buffer.sample(config.batch_size, rng)
                    mask_seed = int(rng.integers(_SEED_BOUND))
                    train_on_batch(
                        online, target, batch, config.gamma, config.learning_rate, mask_seed
                    )
                    updates += 1
                    if updates % config.target_sync_interval == 0:
                        target = copy_network(online)
                total += outcome.reward
                steps += 1
                state, vec = outcome.next_state, next_vec
            returns.append(total)
            lengths.append(steps)
            final_dpos.append(env.d_pos(state, labels))

        history.append(
            EpochStats(
                epoch=epoch + 1,
                epsilon=epsilon,
                mean_reward=float(np.mean(returns)),
                mean_length=float(np.mean(lengths)),
                mean_terminal_dpos=float(np.mean(final_dpos)),
                wall_seconds=perf_counter() - started if timed else 0.0,
            )
        )
        if progress_callback:
            progress_callback(epoch + 1, config.epochs)

    if model_path:
        save_network(online, model_path)
    if log_path:
        write_training_log(log_path, config, env_config, history)
    return TrainingResult(online, history, env_config, updates)


def discounted_return(rewards: Sequence[float], gamma: float) -> float:
    """sum_t gamma^t r_t."""
    return float(sum(r * gamma**t for t, r in enumerate(rewards)))


def code_index(code: BinaryCode) -> int:
    """Integer whose binary digits are the code's bits, bit 0 most significant."""
    return int("".join(str(b) for b in code.to_bits()), 2)


def value_iteration_policy(
    book: Codebook,
    labels: LabelSet,
    config: EnvConfig,
    gamma: float,
    tolerance: float = 1e-10,
) -> Dict[int, Tuple[int, ...]]:
    """Optimal actions per code vertex, by value iteration without step cap.

    States are the 2^b code vertices (history ignored); terminate is
    absorbing. Practical only for tiny b.

    Returns:
        ``code_index`` of each vertex mapped to the tuple of optimal actions.
    """
    width = book.b
    vertices = [BinaryCode.from_bits(bits) for bits in product((0, 1), repeat=width)]
    margins = {code_index(c): margin(c, labels, book) for c in vertices}
    stop = {
        code_index(c): reward_terminate(State(np.zeros(0), c), config, labels, book)
        for c in vertices
    }
    neighbours = {
        code_index(c): [code_index(flip_bit(c, k)) for k in range(width)]
        for c in vertices
    }

    values = {v: 0.0 for v in margins}

    def action_values(v: int) -> np.ndarray:
        flips = [margins[v] - margins[u] + gamma * values[u] for u in neighbours[v]]
        return np.array(flips + [stop[v]])

    while True:
        delta = 0.0
        for v in values:
            best = float(action_values(v).max())
            delta = max(delta, abs(best - values[v]))
            values[v] = best
        if delta < tolerance:
            break

    policy = {}
    for v in values:
        q = action_values(v)
        policy[v] = tuple(int(a) for a in np.flatnonzero(q >= q.max() - 1e-9))
    return policy


__all__ = [
    "ReplayBuffer",
    "TrainingResult",
    "code_index",
    "discounted_return",
    "epsilon_at",
    "greedy_action",
    "q_target",
    "rollout_greedy",
    "run_training",
    "select_action",
    "train_on_batch",
    "value_iteration_policy",
]
