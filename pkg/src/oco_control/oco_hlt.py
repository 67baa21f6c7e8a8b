"""Online convex optimization against a hidden linear transform.

The learner plays actions a_t in a centered ball, observes noisy images
y_{t+1} = Q* a_t + eps_t plus the loss function, and hedges over 2 d_a
optimistic experts (one per coordinate/sign of the confidence bonus), each
driven by projected OGD through the current ridge estimate of Q*.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .costs import LossOracle
from .errors import ConfigError, DimensionError
from .estimation import GramState, epoch_should_advance, gram_update
from .oco_engines import MwState, mw_sample, mw_update, project_ball
from .system import RandomStream


@dataclass
class HltParams:
    eta_g: float
    eta_m: float
    lam: float
    alpha: float
    R_a: float
    R_Q: float
    W: float
    d_a: int
    d_y: int
    T: int
    delta: float
    alpha_scale: float = 1.0

    def __post_init__(self):
        if self.T < 8:
            raise ConfigError(f"T must be >= 8, got {self.T}")
        if abs(self.lam - self.R_a**2) > 1e-9 * max(1.0, self.R_a**2):
            raise ConfigError("lambda must equal R_a^2")


def hlt_params(
    R_a: float,
    R_Q: float,
    W: float,
    d_a: int,
    d_y: int,
    T: int,
    delta: float,
    alpha_scale: float = 1.0,
) -> HltParams:
    """Theoretical schedule: alpha from the estimation radius, step sizes from it."""
    if T < 8:
        raise ConfigError(f"T must be >= 8, got {T}")
    if not (0.0 < delta < 1.0):
        raise ConfigError(f"delta must lie in (0,1), got {delta}")
    if R_a <= 0 or R_Q < 0 or W < 0:
        raise ConfigError("need R_a > 0 and R_Q, W >= 0")
    alpha_theory = math.sqrt(d_a) * (
        W * d_y * math.sqrt(8.0 * math.log(2.0 * T / delta)) + math.sqrt(2.0) * R_a * R_Q
    )
    alpha = alpha_scale * alpha_theory
    denom_g = 2.0 * alpha / R_a + R_Q
    denom_m = 2.0 * (2.0 * alpha + R_a * R_Q)
    if denom_g <= 0 or denom_m <= 0:
        raise ConfigError("step sizes undefined: alpha and R_Q cannot both be zero")
    return HltParams(
        eta_g=R_a / (denom_g * math.sqrt(T)),
        eta_m=math.sqrt(math.log(2.0 * d_a)) / (denom_m * math.sqrt(T)),
        lam=R_a**2,
        alpha=alpha,
        R_a=R_a,
        R_Q=R_Q,
        W=W,
        d_a=d_a,
        d_y=d_y,
        T=T,
        delta=delta,
        alpha_scale=alpha_scale,
    )


def hlt_keys(d_a: int) -> list[tuple[int, int]]:
    return [(k, chi) for k in range(d_a) for chi in (1, -1)]


def ridge_transform(V: np.ndarray, moment_ya: np.ndarray) -> np.ndarray:
    """Solve the regularized normal equations Q V = moment_ya for Q."""
    return np.linalg.solve(V, moment_ya.T).T


def optimistic_expert_loss(
    a: np.ndarray,
    k: int,
    chi: int,
    loss: LossOracle,
    Qhat: np.ndarray,
    V: np.ndarray,
    alpha: float,
) -> tuple[float, np.ndarray]:
    """Value and gradient of l(Qhat a) - alpha chi [V^{-1/2} a]_k."""
    a = np.asarray(a, dtype=float)
    Qhat = np.atleast_2d(np.asarray(Qhat, dtype=float))
    V = np.atleast_2d(np.asarray(V, dtype=float))
    vals, vecs = np.linalg.eigh(V)
    if vals.min() <= 0:
        raise ConfigError("V must be positive definite")
    v_inv_sqrt = (vecs / np.sqrt(vals)) @ vecs.T
    bonus_dir = v_inv_sqrt[k]
    value = loss.evaluate(Qhat @ a) - alpha * chi * float(bonus_dir @ a)
    grad = Qhat.T @ loss.subgradient(Qhat @ a) - alpha * chi * bonus_dir
    return value, grad


class Alg2Learner:
    """Hidden-linear-transform learner: MW over 2 d_a optimistic OGD experts."""

    def __init__(self, params: HltParams, rng: RandomStream):
        self.p = params
        self.rng = rng
        d_a = params.d_a
        self.keys = hlt_keys(d_a)
        self.gram = GramState.initial(d_a, params.lam)
        self.moment_ya = np.zeros((params.d_y, d_a))
        self.Qhat = np.zeros((params.d_y, d_a))
        self.epoch = 1
        self.tau = 1
        self._refresh_epoch_geometry()
        self.actions = np.zeros((2 * d_a, d_a))
        self.mw = MwState.uniform(2 * d_a, params.eta_m)
        self.t = 1
        self.pending: int | None = None
        self.last_info: dict = {}

    def _refresh_epoch_geometry(self):
        vals, vecs = np.linalg.eigh(self.gram.V)
        v_inv_sqrt = (vecs / np.sqrt(vals)) @ vecs.T
        self.V_epoch = self.gram.V.copy()
        self.v_epoch_inv_sqrt = v_inv_sqrt
        # signed bonus directions, one per (coordinate, sign) expert
        self.bonus_dirs = np.stack([chi * v_inv_sqrt[k] for k, chi in self.keys])

    def act(self) -> tuple[np.ndarray, tuple[int, int]]:
        if self.pending is not None:
            raise RuntimeError("act called twice without an intervening observe")
        idx = mw_sample(self.mw, self.rng)
        self.pending = idx
        return self.actions[idx].copy(), self.keys[idx]

    def observe(self, y_next: np.ndarray, loss: LossOracle) -> None:
        if self.pending is None:
            raise RuntimeError("observe called before act")
        y_next = np.asarray(y_next, dtype=float)
        if y_next.shape != (self.p.d_y,):
            raise DimensionError(f"expected y of shape ({self.p.d_y},), got {y_next.shape}")
        idx = self.pending
        a = self.actions[idx]
        gram_update(self.gram, a)
        self.moment_ya += np.outer(y_next, a)

        info = {"epoch": self.epoch, "key": idx, "logdet_v": self.gram.logdet}
        if epoch_should_advance(self.gram):
            self.epoch += 1
            self.tau = self.t + 1
            self.Qhat = ridge_transform(self.gram.V, self.moment_ya)
            self.gram.anchor_logdet = self.gram.logdet
            self._refresh_epoch_geometry()
            self.mw = MwState.uniform(2 * self.p.d_a, self.p.eta_m)
            info["epoch"] = self.epoch
        else:
            images = self.actions @ self.Qhat.T
            values = loss.evaluate_batch(images) - self.p.alpha * np.einsum(
                "kd,kd->k", self.bonus_dirs, self.actions
            )
            g_y = loss.subgradient_batch(images)
            grads = g_y @ self.Qhat - self.p.alpha * self.bonus_dirs
            mw_update(self.mw, values)
            new_actions = self.actions - self.p.eta_g * grads
            norms = np.linalg.norm(new_actions, axis=1)
            radius = self.p.R_a / 2.0
            over = norms > radius
            if over.any():
                new_actions[over] *= (radius / norms[over])[:, None]
            self.actions = new_actions

        self.pending = None
        self.t += 1
        self.last_info = info


def project_action(a: np.ndarray, R_a: float) -> np.ndarray:
    return project_ball(np.asarray(a, dtype=float), R_a / 2.0)
