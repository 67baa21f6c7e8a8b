"""Ground-truth linear dynamics, bounded noise, and stability certification.

The simulator keeps the true disturbances on a test-only channel: learners see
only states and cost functions, while tests and the regret harness may read
the returned noise values directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .costs import CostOracle, TransformedCostOracle, truncation_bound_W
from .errors import ConfigError, DimensionError, UncertifiableError, UnstableSystemError

RandomStream = np.random.Generator


def make_rng(seed) -> RandomStream:
    return np.random.default_rng(seed)


class LearnerInterface(Protocol):
    """Interaction protocol: act on the observed state, then observe the outcome."""

    def act(self, x: np.ndarray) -> np.ndarray: ...

    def observe(self, x_next: np.ndarray, cost: CostOracle) -> None: ...


# Bounded zero-mean samplers available to custom_bounded noise models.
# Each entry maps (rng, dim, W, size) -> draws, and VARIANCES gives the
# isotropic covariance scale c so that Cov = c * I.
def _uniform_ball(rng, dim, W, size):
    n = 1 if size is None else size
    z = rng.standard_normal((n, dim))
    z /= np.maximum(np.linalg.norm(z, axis=1, keepdims=True), 1e-300)
    radii = W * rng.random(n) ** (1.0 / dim)
    out = z * radii[:, None]
    return out[0] if size is None else out


def _zero_sampler(rng, dim, W, size):
    return np.zeros(dim) if size is None else np.zeros((size, dim))


CUSTOM_SAMPLERS = {"uniform_ball": _uniform_ball, "zero": _zero_sampler}
CUSTOM_VARIANCES = {
    "uniform_ball": lambda dim, W: W**2 / (dim + 2.0),
    "zero": lambda dim, W: 0.0,
}


@dataclass
class NoiseModel:
    """Bounded zero-mean disturbance model with known covariance.

    kind is "truncated_gaussian" (a Gaussian draw zeroed out whenever its
    Mahalanobis norm exceeds the threshold) or "custom_bounded" (a registered
    sampler that is almost surely inside the W ball).
    """

    kind: str
    dim: int
    W: float
    sigma: np.ndarray
    maha_threshold_sq: float = math.inf
    sampler: str = ""
    _sqrt: np.ndarray = field(default=None, repr=False)
    _mask: np.ndarray = field(default=None, repr=False)

    @staticmethod
    def truncated_gaussian(sigma, T: int, delta: float, threshold_sq: float | None = None):
        """Gaussian with covariance sigma, truncated at 5 d log(2T/delta)."""
        sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
        d = sigma.shape[0]
        if sigma.shape != (d, d) or np.linalg.norm(sigma - sigma.T) > 1e-10 * (
            1.0 + np.linalg.norm(sigma)
        ):
            raise ConfigError("sigma must be a symmetric square matrix")
        eigvals = np.linalg.eigvalsh(sigma)
        if eigvals.min() < -1e-12 * max(1.0, eigvals.max()):
            raise ConfigError("sigma must be PSD")
        if threshold_sq is None:
            threshold_sq = 5.0 * d * math.log(2.0 * T / delta)
        W = truncation_bound_W(sigma, d, T, delta)
        model = NoiseModel("truncated_gaussian", d, W, sigma, maha_threshold_sq=threshold_sq)
        model._prepare()
        return model

    @staticmethod
    def custom_bounded(sampler: str, dim: int, W: float):
        if sampler not in CUSTOM_SAMPLERS:
            raise ConfigError(f"unknown noise sampler {sampler!r}")
        sigma = CUSTOM_VARIANCES[sampler](dim, W) * np.eye(dim)
        return NoiseModel("custom_bounded", dim, float(W), sigma, sampler=sampler)

    def _prepare(self):
        vals, vecs = np.linalg.eigh(self.sigma)
        vals = np.clip(vals, 0.0, None)
        self._sqrt = vecs * np.sqrt(vals)
        self._mask = vals > 1e-14 * max(1.0, vals.max(initial=0.0))

    def covariance(self) -> np.ndarray:
        return np.array(self.sigma, dtype=float)

    def sqrt_covariance(self) -> np.ndarray:
        vals, vecs = np.linalg.eigh(np.atleast_2d(self.covariance()))
        return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


def sample_noise(model: NoiseModel, rng: RandomStream, size: int | None = None) -> np.ndarray:
    """Draw one disturbance (or a batch of `size`) from the model; |w| <= W always."""
    if model.kind == "custom_bounded":
        return CUSTOM_SAMPLERS[model.sampler](rng, model.dim, model.W, size)
    if model._sqrt is None:
        model._prepare()
    n = 1 if size is None else size
    z = rng.standard_normal((n, model.dim))
    w = z @ model._sqrt.T
    maha_sq = np.sum(np.where(model._mask, z, 0.0) ** 2, axis=1)
    w[maha_sq > model.maha_threshold_sq] = 0.0
    return w[0] if size is None else w


@dataclass
class LinearSystem:
    """True dynamics x_{t+1} = A x_t + B u_t + w_t with bounded noise."""

    A: np.ndarray
    B: np.ndarray
    noise: NoiseModel

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.B = np.atleast_2d(np.asarray(self.B, dtype=float))
        if self.B.shape[0] != self.A.shape[0] or self.A.shape[0] != self.A.shape[1]:
            raise DimensionError(
                f"incompatible system shapes A{self.A.shape} B{self.B.shape}"
            )
        if self.noise is not None and self.noise.dim != self.A.shape[0]:
            raise DimensionError("noise dimension must match the state dimension")

    @property
    def d_x(self) -> int:
        return self.A.shape[0]

    @property
    def d_u(self) -> int:
        return self.B.shape[1]


def step(
    sys: LinearSystem, x: np.ndarray, u: np.ndarray, rng: RandomStream
) -> tuple[np.ndarray, np.ndarray]:
    """Advance the true system one step; the returned w is a test-only channel."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.shape != (sys.d_x,) or u.shape != (sys.d_u,):
        raise DimensionError(f"expected x({sys.d_x},) u({sys.d_u},), got {x.shape} {u.shape}")
    w = sample_noise(sys.noise, rng)
    return sys.A @ x + sys.B @ u + w, w


@dataclass
class StabilityCertificate:
    """Witness of strong stability: A + BK = Q L Q^{-1} with |L| <= 1-gamma."""

    Q: np.ndarray
    L: np.ndarray
    kappa: float
    gamma: float


_COND_TOL = 1e12


def certify_strong_stability(K: np.ndarray, sys: LinearSystem) -> StabilityCertificate:
    """Eigendecomposition certificate with the tightest (kappa, gamma) it yields.

    Raises UnstableSystemError when the closed-loop spectral radius is >= 1 and
    UncertifiableError when the eigenvector matrix is conditioned worse than 1e12.
    """
    K = np.atleast_2d(np.asarray(K, dtype=float))
    A_cl = sys.A + sys.B @ K
    eigvals, Q = np.linalg.eig(A_cl)
    radius = np.abs(eigvals).max()
    if radius >= 1.0:
        raise UnstableSystemError(f"spectral radius {radius:.6g} >= 1")
    cond = np.linalg.cond(Q)
    if not np.isfinite(cond) or cond > _COND_TOL:
        raise UncertifiableError(f"eigenvector matrix condition {cond:.3g} exceeds 1e12")
    gamma = 1.0 - float(radius)
    kappa = max(float(np.linalg.norm(K, 2)), float(cond), 1.0)
    return StabilityCertificate(Q=Q, L=np.diag(eigvals), kappa=kappa, gamma=gamma)


class ClosedLoopSystem:
    """View of (A + B K0, B) that reuses the base system's arithmetic.

    The step computes A x + B (K0 x + u) + w, the exact float operations the
    stabilization wrapper induces on the base system, so wrapped and direct
    runs agree bit for bit.
    """

    def __init__(self, base: LinearSystem, K0: np.ndarray):
        self.base = base
        self.K0 = np.atleast_2d(np.asarray(K0, dtype=float))
        self.noise = base.noise
        self.A = base.A + base.B @ self.K0  # informational; not used in step arithmetic
        self.B = base.B

    @property
    def d_x(self):
        return self.base.d_x

    @property
    def d_u(self):
        return self.base.d_u

    def step_with_noise(self, x, u, w):
        return self.base.A @ x + self.base.B @ (self.K0 @ x + u) + w


class StabilizedLearner:
    """Black-box reduction around an inner learner for an unstable plant.

    Plays u_t = K0 x_t + u~_t where u~_t comes from the inner learner, and
    forwards the reshaped cost c~(x, u) = c(x, u + K0 x) / (2 kappa).
    """

    def __init__(self, inner: LearnerInterface, K0: np.ndarray, kappa: float):
        self.inner = inner
        self.K0 = np.atleast_2d(np.asarray(K0, dtype=float))
        self.kappa = float(kappa)
        self.last_inner_action = None

    def act(self, x: np.ndarray) -> np.ndarray:
        u_inner = self.inner.act(x)
        self.last_inner_action = u_inner
        return self.K0 @ x + u_inner

    def observe(self, x_next: np.ndarray, cost: CostOracle) -> None:
        self.inner.observe(x_next, TransformedCostOracle(cost, self.K0, self.kappa))


def wrap_stabilize(inner: LearnerInterface, K0: np.ndarray, kappa: float) -> StabilizedLearner:
    return StabilizedLearner(inner, K0, kappa)
