"""Regularized least squares, disturbance estimation, and epoch triggering.

The Gram matrix V_t accumulates rank-one updates of the stacked observations
rho_t; its log-determinant is maintained through the matrix-determinant lemma
and re-anchored by a full factorization every REFRESH_EVERY updates because the
rank-one identity drifts numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError, NumericError

REFRESH_EVERY = 256
_REFRESH_TOL = 1e-6


@dataclass
class GramState:
    """V = lambda_psi I + sum rho rho' with maintained logdet and epoch anchor."""

    V: np.ndarray
    logdet: float
    anchor_logdet: float
    lambda_psi: float
    updates_since_refresh: int = 0

    @classmethod
    def initial(cls, dim: int, lambda_psi: float) -> "GramState":
        if lambda_psi <= 0:
            raise ConfigError(f"lambda_psi must be positive, got {lambda_psi}")
        logdet = dim * math.log(lambda_psi)
        return cls(V=lambda_psi * np.eye(dim), logdet=logdet, anchor_logdet=logdet,
                   lambda_psi=lambda_psi)

    def fresh_logdet(self) -> float:
        sign, value = np.linalg.slogdet(self.V)
        if sign <= 0:
            raise NumericError("Gram matrix lost positive definiteness")
        return float(value)


def gram_update(g: GramState, rho: np.ndarray) -> GramState:
    """Apply V += rho rho' in place, tracking logdet via log(1 + rho' V^{-1} rho)."""
    rho = np.asarray(rho, dtype=float)
    if rho.shape != (g.V.shape[0],):
        raise DimensionError(f"rho shape {rho.shape} does not match V {g.V.shape}")
    quad = float(rho @ np.linalg.solve(g.V, rho))
    g.V += np.outer(rho, rho)
    g.logdet += math.log1p(quad)
    g.updates_since_refresh += 1
    if g.updates_since_refresh >= REFRESH_EVERY:
        fresh = g.fresh_logdet()
        if abs(fresh - g.logdet) > _REFRESH_TOL:
            raise NumericError(
                f"maintained logdet drifted by {abs(fresh - g.logdet):.3g} (> {_REFRESH_TOL})"
            )
        g.logdet = fresh
        g.updates_since_refresh = 0
    return g


def epoch_should_advance(g: GramState) -> bool:
    """True iff det(V) strictly exceeds twice the determinant at the epoch anchor."""
    return g.logdet - g.anchor_logdet > math.log(2.0)


@dataclass
class AbEstimate:
    """Ridge model (A_t B_t) from z_s = (x_s; u_s) to x_{s+1}, solved from moments."""

    moment_zz: np.ndarray
    moment_xz: np.ndarray
    lambda_w: float
    current: np.ndarray
    d_x: int
    d_u: int

    @classmethod
    def initial(cls, d_x: int, d_u: int, lambda_w: float) -> "AbEstimate":
        if lambda_w <= 0:
            raise ConfigError(f"lambda_w must be positive, got {lambda_w}")
        d_z = d_x + d_u
        return cls(np.zeros((d_z, d_z)), np.zeros((d_x, d_z)), lambda_w,
                   np.zeros((d_x, d_z)), d_x, d_u)

    @property
    def A(self) -> np.ndarray:
        return self.current[:, : self.d_x]

    @property
    def B(self) -> np.ndarray:
        return self.current[:, self.d_x :]


def ab_update_and_solve(est: AbEstimate, z: np.ndarray, x_next: np.ndarray) -> AbEstimate:
    z = np.asarray(z, dtype=float)
    x_next = np.asarray(x_next, dtype=float)
    if z.shape != (est.d_x + est.d_u,) or x_next.shape != (est.d_x,):
        raise DimensionError("z or x_next shape does not match the estimate dimensions")
    est.moment_zz += np.outer(z, z)
    est.moment_xz += np.outer(x_next, z)
    reg = est.moment_zz + est.lambda_w * np.eye(est.moment_zz.shape[0])
    est.current = np.linalg.solve(reg, est.moment_xz.T).T
    return est


def estimate_noise(x_next, A, B, x, u, W: float) -> np.ndarray:
    """Euclidean projection of the dynamics residual onto the W ball."""
    if W <= 0:
        raise ConfigError(f"W must be positive, got {W}")
    residual = np.asarray(x_next, dtype=float) - np.atleast_2d(A) @ x - np.atleast_2d(B) @ u
    norm = float(np.linalg.norm(residual))
    if norm <= W:
        return residual
    return residual * (W / norm)


@dataclass
class PsiEstimate:
    """Ridge solution for the unrolled model, frozen for the epoch it was solved in."""

    Psi: np.ndarray
    solved_at: int = 0


def solve_psi(history, lambda_psi: float, d_x: int | None = None,
              d_psi: int | None = None, solved_at: int = 0) -> PsiEstimate:
    """Ridge regression of x_{s+1} on rho_s over all past observations."""
    if lambda_psi <= 0:
        raise ConfigError(f"lambda_psi must be positive, got {lambda_psi}")
    history = list(history)
    if not history:
        if d_x is None or d_psi is None:
            raise ConfigError("empty history requires explicit dimensions")
        return PsiEstimate(np.zeros((d_x, d_psi)), solved_at)
    rhos = np.stack([np.asarray(r, dtype=float) for r, _ in history])
    xs = np.stack([np.asarray(x, dtype=float) for _, x in history])
    d_psi = rhos.shape[1]
    gram = rhos.T @ rhos + lambda_psi * np.eye(d_psi)
    cross = xs.T @ rhos
    return PsiEstimate(np.linalg.solve(gram, cross.T).T, solved_at)
