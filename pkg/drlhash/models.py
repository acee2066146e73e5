"""Lightweight data models shared across drl-hash modules."""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Optional, Tuple

import numpy as np

from .constants import (
    DEFAULT_DROPOUT,
    DEFAULT_HIDDEN,
    DEFAULT_LEARNING_RATE,
    DEFAULT_SIGMA,
)


@dataclass(frozen=True)
class EnvConfig:
    """Episode parameters.

    Attributes:
        eta: Termination threshold; terminate pays +sigma iff d_pos <= eta.
        sigma: Magnitude of the termination reward.
        max_steps: Step cap M after which an episode is cut off.
    """

    eta: int
    sigma: float = DEFAULT_SIGMA
    max_steps: int = 1

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")

    @classmethod
    def for_codebook(
        cls,
        radius: int,
        width: int,
        eta: Optional[int] = None,
        sigma: float = DEFAULT_SIGMA,
        max_steps: Optional[int] = None,
    ) -> EnvConfig:
        """Fill unset values with eta = floor(R / 2) and M = b.

        Raises:
            ValueError: if ``eta`` exceeds the codebook radius.
        """
        eta = radius // 2 if eta is None else eta
        if eta > radius:
            raise ValueError(f"eta={eta} exceeds codebook radius {radius}")
        return cls(eta=eta, sigma=sigma, max_steps=width if max_steps is None else max_steps)


@dataclass(frozen=True)
class TrainConfig:
    """Q-learning hyperparameters; every field is a valid config-file key."""

    epochs: int = 25
    eps_start: float = 1.0
    eps_end: float = 0.1
    eps_decay_epochs: int = 15
    gamma: float = 0.9
    batch_size: int = 64
    buffer_capacity: int = 50_000
    learning_rate: float = DEFAULT_LEARNING_RATE
    target_sync_interval: int = 500
    expert_prob: float = 0.5
    seed: int = 0
    hidden: Tuple[int, ...] = DEFAULT_HIDDEN
    dropout: float = DEFAULT_DROPOUT
    eta: Optional[int] = None
    sigma: float = DEFAULT_SIGMA
    max_steps: Optional[int] = None

    def __post_init__(self):
        positive = (
            "epochs",
            "eps_decay_epochs",
            "batch_size",
            "buffer_capacity",
            "learning_rate",
            "target_sync_interval",
            "sigma",
        )
        for name in positive:
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if not 0 < self.gamma < 1:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not 0 <= self.eps_end <= self.eps_start <= 1:
            raise ValueError("Need 0 <= eps_end <= eps_start <= 1")
        if not 0 <= self.expert_prob <= 1:
            raise ValueError(f"expert_prob must lie in [0, 1], got {self.expert_prob}")
        if not 0 <= self.dropout < 1:
            raise ValueError(f"dropout must lie in [0, 1), got {self.dropout}")
        if any(h < 1 for h in self.hidden):
            raise ValueError(f"hidden widths must be >= 1, got {self.hidden}")

    def env_config(self, radius: int, width: int) -> EnvConfig:
        """Environment parameters for a codebook of the given radius and width."""
        return EnvConfig.for_codebook(radius, width, self.eta, self.sigma, self.max_steps)

    def items(self):
        """(name, value) pairs in declaration order."""
        return [(f.name, getattr(self, f.name)) for f in fields(self)]


@dataclass(frozen=True)
class Transition:
    """One experience record (s, a, r, s', done)."""

    state_vec: np.ndarray
    action: int
    reward: float
    next_state_vec: np.ndarray
    done: bool


@dataclass(frozen=True)
class EpochStats:
    """Per-epoch training summary written to the training log."""

    epoch: int
    epsilon: float
    mean_reward: float
    mean_length: float
    mean_terminal_dpos: float
    wall_seconds: float


__all__ = ["EnvConfig", "EpochStats", "TrainConfig", "Transition"]
