"""Online convex optimization primitives: projected OGD, multiplicative
weights in log space, and a low-switching batched follow-the-perturbed-leader
meta-algorithm (BFPL*).

BFPL* keeps a per-batch exponential perturbation, follows the perturbed leader
lazily, and redraws the perturbation after `switch_budget` leader changes.
The cited regret and switch-count constants are used only as test thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericError
from .system import RandomStream


def project_ball(point: np.ndarray, radius: float) -> np.ndarray:
    norm = float(np.linalg.norm(point))
    if norm <= radius:
        return point
    return point * (radius / norm)


@dataclass
class OgdState:
    """Projected online gradient descent over a centered norm ball.

    The point may be a vector or a matrix; projection is radial in the
    Euclidean / Frobenius norm.
    """

    point: np.ndarray
    eta: float
    radius: float

    def __post_init__(self):
        self.point = project_ball(np.asarray(self.point, dtype=float), self.radius)


def ogd_step(s: OgdState, gradient: np.ndarray) -> OgdState:
    gradient = np.asarray(gradient, dtype=float)
    if not np.all(np.isfinite(gradient)):
        raise NumericError("non-finite gradient passed to OGD")
    s.point = project_ball(s.point - s.eta * gradient, s.radius)
    return s


@dataclass
class MwState:
    """Multiplicative weights over n experts, stored as log-weights."""

    log_weights: np.ndarray
    eta: float

    @classmethod
    def uniform(cls, n: int, eta: float) -> "MwState":
        if n < 1:
            raise ConfigError("MW needs at least one expert")
        return cls(np.zeros(n), eta)

    def probabilities(self) -> np.ndarray:
        shifted = self.log_weights - self.log_weights.max()
        w = np.exp(shifted)
        return w / w.sum()


def mw_update(s: MwState, losses: np.ndarray) -> MwState:
    losses = np.asarray(losses, dtype=float)
    if not np.all(np.isfinite(losses)):
        raise NumericError("non-finite losses passed to MW")
    s.log_weights = s.log_weights - s.eta * losses
    s.log_weights -= s.log_weights.max()  # renormalize in log space
    return s


def mw_sample(s: MwState, rng: RandomStream) -> int:
    return int(rng.choice(len(s.log_weights), p=s.probabilities()))


@dataclass
class BfplState:
    """Batched FPL with per-coordinate exponential perturbations.

    The leader is argmin(cumulative - perturbation) with lowest-index
    tie-break; after `switch_budget` leader changes within a batch a fresh
    perturbation is drawn.  Losses outside [0,1] are clipped and counted.
    """

    n: int
    cumulative: np.ndarray
    perturbation: np.ndarray
    current_leader: int
    switch_budget: int
    rng: RandomStream
    scale: float
    batch_switches: int = 0
    total_switches: int = 0
    clip_count: int = 0
    zero_perturbation: bool = False
    delta: float = 0.05

    @classmethod
    def create(
        cls,
        n: int,
        T: int,
        delta: float,
        rng: RandomStream,
        zero_perturbation: bool = False,
    ) -> "BfplState":
        if n < 1:
            raise ConfigError("BFPL needs at least one action")
        log_n = math.log(max(n, 2))
        scale = math.sqrt(T / log_n)
        budget = max(1, math.ceil(math.sqrt(T * log_n / math.log(2.0 / delta))))
        state = cls(
            n=n,
            cumulative=np.zeros(n),
            perturbation=np.zeros(n),
            current_leader=0,
            switch_budget=budget,
            rng=rng,
            scale=scale,
            zero_perturbation=zero_perturbation,
            delta=delta,
        )
        state._draw_perturbation()
        state.current_leader = int(np.argmin(state.cumulative - state.perturbation))
        return state

    def _draw_perturbation(self):
        if self.zero_perturbation:
            self.perturbation = np.zeros(self.n)
        else:
            self.perturbation = self.rng.exponential(self.scale, self.n)


def bfpl_step(s: BfplState, losses: np.ndarray) -> tuple[int, BfplState]:
    losses = np.asarray(losses, dtype=float)
    if losses.shape != (s.n,):
        raise ConfigError(f"expected {s.n} losses, got shape {losses.shape}")
    out_of_range = int(np.sum((losses < -1e-12) | (losses > 1.0 + 1e-12)))
    if out_of_range:
        s.clip_count += out_of_range
        losses = np.clip(losses, 0.0, 1.0)
    s.cumulative = s.cumulative + losses
    leader = int(np.argmin(s.cumulative - s.perturbation))
    if leader != s.current_leader:
        s.current_leader = leader
        s.batch_switches += 1
        s.total_switches += 1
        if s.batch_switches >= s.switch_budget:
            s._draw_perturbation()
            s.batch_switches = 0
            fresh = int(np.argmin(s.cumulative - s.perturbation))
            if fresh != s.current_leader:
                s.current_leader = fresh
                s.total_switches += 1
    return s.current_leader, s
