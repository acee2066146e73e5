"""Bit-flip navigation of the Hamming cube.

An episode starts from a seeded random code e_0. Action ``k < b`` flips bit
``k`` and pays the change in margin ``d_pos - d_neg``; action ``b`` terminates
and pays ``+sigma`` when the code lies within ``eta`` of a ground-truth
codeword, ``-sigma`` otherwise. Episodes are cut off after ``max_steps``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np

from .bch import Codebook
from .constants import HISTORY_DEPTH
from .errors import (
    ActionOutOfRange,
    DimensionMismatch,
    EmptyLabelSet,
    EpisodeAlreadyDone,
    NoNegativeClasses,
)
from .hamming import BinaryCode, LabelSet, flip_bit
from .models import EnvConfig


@dataclass(frozen=True)
class State:
    """Agent state s_t = (f, e_t, h_t).

    Attributes:
        feature: Item feature vector f.
        code: Current code e_t.
        history: Last ``HISTORY_DEPTH`` flip actions, most recent last.
        step_index: Number of steps taken so far.
        done: True once the episode has ended.
    """

    feature: np.ndarray
    code: BinaryCode
    history: Tuple[int, ...] = ()
    step_index: int = 0
    done: bool = False

    @property
    def width(self) -> int:
        return self.code.width

    def history_matrix(self) -> np.ndarray:
        """One-hot (HISTORY_DEPTH, b) matrix; missing rows are zero, newest last."""
        matrix = np.zeros((HISTORY_DEPTH, self.width))
        offset = HISTORY_DEPTH - len(self.history)
        for row, action in enumerate(self.history):
            matrix[offset + row, action] = 1.0
        return matrix


@dataclass(frozen=True)
class StepOutcome:
    """Result of one environment step."""

    next_state: State
    reward: float
    done: bool
    action_taken: int

    @property
    def terminated(self) -> bool:
        """True when the episode ended through the terminate action."""
        return self.action_taken == self.next_state.width


def encode_state_vector(state: State) -> np.ndarray:
    """Flatten a state as [f | e_t | h_t] of length d_f + 11 b (float64)."""
    return np.concatenate(
        [
            np.asarray(state.feature, dtype=np.float64).ravel(),
            state.code.to_bits().astype(np.float64),
            state.history_matrix().ravel(),
        ]
    )


def distances_to_codebook(code: BinaryCode, book: Codebook) -> np.ndarray:
    """Hamming distance from ``code`` to every class codeword, shape (C,)."""
    return np.count_nonzero(book.bit_matrix != code.to_bits(), axis=1)


def _split_classes(labels: LabelSet, book: Codebook) -> Tuple[np.ndarray, np.ndarray]:
    if not labels:
        raise EmptyLabelSet("Item has no labels")
    positive = np.zeros(book.num_classes, dtype=bool)
    positive[list(labels)] = True
    if positive.all():
        raise NoNegativeClasses("Labels cover every class")
    return positive, ~positive


def _margin_terms(code: BinaryCode, labels: LabelSet, book: Codebook):
    """(d_pos, sum of negative distances, number of negatives) as integers."""
    positive, negative = _split_classes(labels, book)
    dist = distances_to_codebook(code, book)
    return int(dist[positive].min()), int(dist[negative].sum()), int(negative.sum())


def margin(code: BinaryCode, labels: LabelSet, book: Codebook) -> float:
    """d_pos - d_neg for a single code."""
    dpos, neg_sum, n_neg = _margin_terms(code, labels, book)
    return dpos - neg_sum / n_neg


def reward_flip(s_t: State, s_t1: State, labels: LabelSet, book: Codebook) -> float:
    """Margin improvement (d_pos - d_neg)_t - (d_pos - d_neg)_t+1.

    Evaluated over integer distance sums so equal margins give exactly 0.
    """
    dpos0, sum0, n_neg = _margin_terms(s_t.code, labels, book)
    dpos1, sum1, _ = _margin_terms(s_t1.code, labels, book)
    return ((dpos0 - dpos1) * n_neg + (sum1 - sum0)) / n_neg


def reward_terminate(
    s_t: State, config: EnvConfig, labels: LabelSet, book: Codebook
) -> float:
    """+sigma if d_pos <= eta, else -sigma."""
    dpos, _, _ = _margin_terms(s_t.code, labels, book)
    return config.sigma if dpos <= config.eta else -config.sigma


def flip_rewards(code: BinaryCode, labels: LabelSet, book: Codebook) -> np.ndarray:
    """Reward of every single-bit flip from ``code``, shape (b,)."""
    positive, negative = _split_classes(labels, book)
    bits = code.to_bits()
    differs = book.bit_matrix != bits
    dist = differs.sum(axis=1)
    # Flipping bit k moves the distance to codeword c by +1 (agree) or -1 (differ).
    moved = dist[:, None] + 1 - 2 * differs.astype(np.int64)
    dpos0 = dist[positive].min()
    dpos1 = moved[positive].min(axis=0)
    n_neg = int(negative.sum())
    delta_sum = moved[negative].sum(axis=0) - dist[negative].sum()
    return ((dpos0 - dpos1) * n_neg + delta_sum) / n_neg


def _pos_reducing_flip(code: BinaryCode, labels: LabelSet, book: Codebook) -> Optional[int]:
    positive, _ = _split_classes(labels, book)
    differs = book.bit_matrix[positive] != code.to_bits()
    dist = differs.sum(axis=1)
    nearest = differs[dist == dist.min()]
    candidates = np.flatnonzero(nearest.any(axis=0))
    return int(candidates[0]) if candidates.size else None


def expert_action(
    state: State, config: EnvConfig, labels: LabelSet, book: Codebook
) -> int:
    """Greedy demonstrator.

    Takes the flip with the largest positive reward (smallest index on ties).
    When no flip has positive reward but d_pos is still above ``eta``, takes
    the smallest-index flip that moves toward a nearest ground-truth
    codeword. Otherwise terminates.
    """
    if state.done:
        raise EpisodeAlreadyDone("Expert queried on a terminal state")
    rewards = flip_rewards(state.code, labels, book)
    best = int(np.argmax(rewards))
    if rewards[best] > 0:
        return best
    dpos, _, _ = _margin_terms(state.code, labels, book)
    if dpos > config.eta:
        k = _pos_reducing_flip(state.code, labels, book)
        if k is not None:
            return k
    return state.width


class HashingEnv:
    """Episode driver bound to one codebook, config and feature dimension."""

    def __init__(self, book: Codebook, config: EnvConfig, feature_dim: int):
        self.book = book
        self.config = config
        self.feature_dim = feature_dim

    @property
    def width(self) -> int:
        return self.book.b

    @property
    def num_actions(self) -> int:
        return self.book.b + 1

    @property
    def state_dim(self) -> int:
        return self.feature_dim + (HISTORY_DEPTH + 1) * self.book.b

    def reset(
        self,
        feature: np.ndarray,
        item_id: int,
        run_seed: int,
        epoch: Optional[int] = None,
    ) -> State:
        """Fresh state with e_0 seeded by (run_seed, item_id) or (run_seed, epoch, item_id).

        Raises:
            DimensionMismatch: if ``feature`` has the wrong length.
        """
        feature = np.asarray(feature, dtype=np.float64).ravel()
        if feature.size != self.feature_dim:
            raise DimensionMismatch(
                f"Feature has {feature.size} dims, expected {self.feature_dim}"
            )
        entropy = [run_seed, item_id] if epoch is None else [run_seed, epoch, item_id]
        rng = np.random.default_rng(entropy)
        code = BinaryCode.from_bits(rng.integers(0, 2, size=self.width))
        return State(feature=feature, code=code)

    def transition(self, state: State, action: int) -> State:
        """Next state without reward; terminate leaves code and history as they are.

        Raises:
            EpisodeAlreadyDone: if ``state`` is terminal.
            ActionOutOfRange: if ``action`` is outside [0, b].
        """
        if state.done:
            raise EpisodeAlreadyDone("Episode has already ended")
        if not 0 <= action <= self.width:
            raise ActionOutOfRange(f"Action {action} outside [0, {self.width}]")
        step_index = state.step_index + 1
        if action == self.width:
            return replace(state, step_index=step_index, done=True)
        return State(
            feature=state.feature,
            code=flip_bit(state.code, action),
            history=(state.history + (action,))[-HISTORY_DEPTH:],
            step_index=step_index,
            done=step_index >= self.config.max_steps,
        )

    def step(self, state: State, action: int, labels: LabelSet) -> StepOutcome:
        """Apply ``action`` to ``state`` and score it (see ``transition``)."""
        next_state = self.transition(state, action)
        if action == self.width:
            reward = reward_terminate(state, self.config, labels, self.book)
        else:
            reward = reward_flip(state, next_state, labels, self.book)
        return StepOutcome(next_state, reward, next_state.done, action)

    def expert_action(self, state: State, labels: LabelSet) -> int:
        return expert_action(state, self.config, labels, self.book)

    def d_pos(self, state: State, labels: LabelSet) -> int:
        dpos, _, _ = _margin_terms(state.code, labels, self.book)
        return dpos

    def expert_rollout(self, state: State, labels: LabelSet) -> List[StepOutcome]:
        """Follow the expert from ``state`` until the episode ends."""
        outcomes: List[StepOutcome] = []
        while not state.done:
            outcome = self.step(state, self.expert_action(state, labels), labels)
            outcomes.append(outcome)
            state = outcome.next_state
        return outcomes


__all__ = [
    "HashingEnv",
    "State",
    "StepOutcome",
    "distances_to_codebook",
    "encode_state_vector",
    "expert_action",
    "flip_rewards",
    "margin",
    "reward_flip",
    "reward_terminate",
]
