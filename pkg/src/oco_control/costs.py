"""Cost oracles, oblivious cost schedules, and the bounded-noise reductions.

Cost oracles expose value and subgradient for convex, 1-Lipschitz costs
c_t(x, u).  Loss oracles are the single-argument analogue used by the
hidden-linear-transform learner.  Schedules are deterministic maps t -> oracle
so that the adversary is oblivious and runs are reproducible.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigError

_EPS = 1e-15


def truncation_bound_W(sigma: np.ndarray, d_x: int, T: int, delta: float) -> float:
    """Almost-sure norm bound for the truncated Gaussian: sqrt(5 d_x |Sigma| log(2T/delta))."""
    if not (0.0 < delta < 1.0):
        raise ConfigError(f"delta must lie in (0,1), got {delta}")
    if T < 1:
        raise ConfigError(f"T must be >= 1, got {T}")
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    op_norm = float(np.linalg.norm(sigma, 2))
    return math.sqrt(5.0 * d_x * op_norm * math.log(2.0 * T / delta))


class CostOracle:
    """Convex 1-Lipschitz cost c(x, u) with value and subgradient access.

    Subclasses implement ``evaluate`` and ``subgradient``; the batch variants
    have generic loop fallbacks and are overridden where vectorization pays.
    """

    lipschitz = 1.0

    def evaluate(self, x: np.ndarray, u: np.ndarray) -> float:
        raise NotImplementedError

    def subgradient(self, x: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def evaluate_batch(self, xs: np.ndarray, us: np.ndarray) -> np.ndarray:
        return np.array([self.evaluate(x, u) for x, u in zip(xs, us)])

    def subgradient_batch(self, xs: np.ndarray, us: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        gx = np.empty_like(xs)
        gu = np.empty_like(us)
        for i, (x, u) in enumerate(zip(xs, us)):
            gx[i], gu[i] = self.subgradient(x, u)
        return gx, gu


class LossOracle:
    """Convex 1-Lipschitz loss l(y) for the hidden-linear-transform game."""

    lipschitz = 1.0

    def evaluate(self, y: np.ndarray) -> float:
        raise NotImplementedError

    def subgradient(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate_batch(self, ys: np.ndarray) -> np.ndarray:
        return np.array([self.evaluate(y) for y in ys])

    def subgradient_batch(self, ys: np.ndarray) -> np.ndarray:
        return np.stack([self.subgradient(y) for y in ys])


class QuadraticClippedOracle(CostOracle):
    """Scaled quadratic x'Qx + u'Ru on the R_max ball, extended convexly outside.

    Inside the ball the value is (x'Qx + u'Ru) / (2 R_max).  Outside, the value
    is the supporting-hyperplane envelope sup over ball points z' of
    q(z') + grad q(z') . (z - z'), scaled by the same 1/(2 R_max).  The envelope
    is a max of affine functions, hence convex, matches the quadratic on the
    ball, and its gradients are bounded by 2 R_max |S| so the scaled oracle is
    1-Lipschitz.
    """

    def __init__(self, Q: np.ndarray, R: np.ndarray, r_max: float):
        Q = np.atleast_2d(np.asarray(Q, dtype=float))
        R = np.atleast_2d(np.asarray(R, dtype=float))
        if r_max <= 0:
            raise ConfigError(f"R_max must be positive, got {r_max}")
        for name, mat in (("Q", Q), ("R", R)):
            if np.linalg.norm(mat - mat.T) > 1e-10 * (1.0 + np.linalg.norm(mat)):
                raise ConfigError(f"{name} must be symmetric")
            if np.linalg.norm(mat, 2) > 1.0 + 1e-12:
                raise ConfigError(f"|{name}| must be <= 1")
            if np.linalg.eigvalsh(mat).min() < -1e-12:
                raise ConfigError(f"{name} must be PSD")
        self.Q = Q
        self.R = R
        self.r_max = float(r_max)
        self.d_x = Q.shape[0]
        self.d_u = R.shape[0]
        S = np.zeros((self.d_x + self.d_u, self.d_x + self.d_u))
        S[: self.d_x, : self.d_x] = Q
        S[self.d_x :, self.d_x :] = R
        self._eigvals, self._eigvecs = np.linalg.eigh(S)
        self._eigvals = np.clip(self._eigvals, 0.0, None)

    def _support_point_coords(self, zeta: np.ndarray) -> np.ndarray:
        # Argmax over the ball of the tangent value 2 z'.S z - z'.S z',
        # in the eigenbasis of S.  Concave in z', so KKT gives
        # zeta'_i = s_i zeta_i / (s_i + mu) with mu >= 0 picked so |zeta'| <= R_max.
        s = self._eigvals
        zeta0 = np.where(s > 0, zeta, 0.0)
        if np.linalg.norm(zeta0) <= self.r_max:
            return zeta0
        s_max = s.max()

        def excess(mu):
            return np.sum((s * zeta / (s + mu)) ** 2) - self.r_max**2

        hi = s_max * np.linalg.norm(zeta) / self.r_max
        mu = brentq(excess, 1e-300, hi + 1e-12, maxiter=200)
        return s * zeta / (s + mu)

    def evaluate(self, x: np.ndarray, u: np.ndarray) -> float:
        z = np.concatenate([np.atleast_1d(x), np.atleast_1d(u)]).astype(float)
        s = self._eigvals
        zeta = self._eigvecs.T @ z
        if z @ z <= self.r_max**2:
            return float(np.sum(s * zeta**2) / (2.0 * self.r_max))
        if s.max() == 0.0:
            return 0.0
        zp = self._support_point_coords(zeta)
        value = 2.0 * np.sum(s * zp * zeta) - np.sum(s * zp**2)
        return float(value / (2.0 * self.r_max))

    def subgradient(self, x: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        z = np.concatenate([np.atleast_1d(x), np.atleast_1d(u)]).astype(float)
        s = self._eigvals
        zeta = self._eigvecs.T @ z
        if z @ z <= self.r_max**2 or s.max() == 0.0:
            zp = zeta
        else:
            zp = self._support_point_coords(zeta)
        g = self._eigvecs @ (s * zp) / self.r_max
        return g[: self.d_x], g[self.d_x :]

    def evaluate_batch(self, xs: np.ndarray, us: np.ndarray) -> np.ndarray:
        zs = np.concatenate([xs, us], axis=1)
        inside = np.einsum("ij,ij->i", zs, zs) <= self.r_max**2
        zetas = zs @ self._eigvecs
        out = np.einsum("j,ij->i", self._eigvals, zetas**2) / (2.0 * self.r_max)
        if not inside.all():
            for i in np.flatnonzero(~inside):
                out[i] = self.evaluate(xs[i], us[i])
        return out

    def subgradient_batch(self, xs: np.ndarray, us: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        zs = np.concatenate([xs, us], axis=1)
        inside = np.einsum("ij,ij->i", zs, zs) <= self.r_max**2
        g = (zs @ self._eigvecs * self._eigvals) @ self._eigvecs.T / self.r_max
        if not inside.all():
            for i in np.flatnonzero(~inside):
                gx, gu = self.subgradient(xs[i], us[i])
                g[i] = np.concatenate([gx, gu])
        return g[:, : self.d_x], g[:, self.d_x :]


def quadratic_clipped_oracle(Q: np.ndarray, R: np.ndarray, r_max: float) -> QuadraticClippedOracle:
    return QuadraticClippedOracle(Q, R, r_max)


class DriftingTargetOracle(CostOracle):
    """c(x, u) = (|x - theta| + |u|) / sqrt(2); the 1/sqrt(2) makes it 1-Lipschitz jointly."""

    def __init__(self, theta: np.ndarray):
        self.theta = np.asarray(theta, dtype=float)
        self._scale = 1.0 / math.sqrt(2.0)

    def evaluate(self, x, u):
        return self._scale * (float(np.linalg.norm(x - self.theta)) + float(np.linalg.norm(u)))

    def subgradient(self, x, u):
        # At the kinks the zero vector is a valid subgradient element.
        dx = np.asarray(x, dtype=float) - self.theta
        nx = np.linalg.norm(dx)
        gx = self._scale * dx / nx if nx > _EPS else np.zeros_like(dx)
        u = np.asarray(u, dtype=float)
        nu = np.linalg.norm(u)
        gu = self._scale * u / nu if nu > _EPS else np.zeros_like(u)
        return gx, gu

    def evaluate_batch(self, xs, us):
        return self._scale * (
            np.linalg.norm(xs - self.theta, axis=1) + np.linalg.norm(us, axis=1)
        )

    def subgradient_batch(self, xs, us):
        dx = xs - self.theta
        nx = np.linalg.norm(dx, axis=1, keepdims=True)
        nu = np.linalg.norm(us, axis=1, keepdims=True)
        gx = self._scale * np.where(nx > _EPS, dx / np.maximum(nx, _EPS), 0.0)
        gu = self._scale * np.where(nu > _EPS, us / np.maximum(nu, _EPS), 0.0)
        return gx, gu


class LinearCostOracle(CostOracle):
    """c(x, u) = g_x . x + g_u . u with |(g_x, g_u)| <= 1."""

    def __init__(self, g_x: np.ndarray, g_u: np.ndarray):
        g_x = np.asarray(g_x, dtype=float)
        g_u = np.asarray(g_u, dtype=float)
        norm = math.sqrt(float(g_x @ g_x) + float(g_u @ g_u))
        if norm > 1.0:
            g_x = g_x / norm
            g_u = g_u / norm
        self.g_x = g_x
        self.g_u = g_u

    def evaluate(self, x, u):
        return float(self.g_x @ x + self.g_u @ u)

    def subgradient(self, x, u):
        return self.g_x.copy(), self.g_u.copy()

    def evaluate_batch(self, xs, us):
        return xs @ self.g_x + us @ self.g_u

    def subgradient_batch(self, xs, us):
        n = xs.shape[0]
        return np.tile(self.g_x, (n, 1)), np.tile(self.g_u, (n, 1))


class TransformedCostOracle(CostOracle):
    """c~(x, u) = c(x, u + K0 x) / (2 kappa); the stabilization wrapper's forwarded cost."""

    def __init__(self, base: CostOracle, K0: np.ndarray, kappa: float):
        self.base = base
        self.K0 = np.asarray(K0, dtype=float)
        self.kappa = float(kappa)

    def evaluate(self, x, u):
        return self.base.evaluate(x, u + self.K0 @ x) / (2.0 * self.kappa)

    def subgradient(self, x, u):
        gx, gu = self.base.subgradient(x, u + self.K0 @ x)
        return (gx + self.K0.T @ gu) / (2.0 * self.kappa), gu / (2.0 * self.kappa)

    def evaluate_batch(self, xs, us):
        return self.base.evaluate_batch(xs, us + xs @ self.K0.T) / (2.0 * self.kappa)

    def subgradient_batch(self, xs, us):
        gx, gu = self.base.subgradient_batch(xs, us + xs @ self.K0.T)
        return (gx + gu @ self.K0) / (2.0 * self.kappa), gu / (2.0 * self.kappa)


class TargetLossOracle(LossOracle):
    """l(y) = |y - target|."""

    def __init__(self, target: np.ndarray):
        self.target = np.asarray(target, dtype=float)

    def evaluate(self, y):
        return float(np.linalg.norm(np.asarray(y, dtype=float) - self.target))

    def subgradient(self, y):
        d = np.asarray(y, dtype=float) - self.target
        n = np.linalg.norm(d)
        return d / n if n > _EPS else np.zeros_like(d)

    def evaluate_batch(self, ys):
        return np.linalg.norm(ys - self.target, axis=1)

    def subgradient_batch(self, ys):
        d = ys - self.target
        n = np.linalg.norm(d, axis=1, keepdims=True)
        return np.where(n > _EPS, d / np.maximum(n, _EPS), 0.0)


class LinearLossOracle(LossOracle):
    def __init__(self, g: np.ndarray):
        g = np.asarray(g, dtype=float)
        n = np.linalg.norm(g)
        self.g = g / n if n > 1.0 else g

    def evaluate(self, y):
        return float(self.g @ y)

    def subgradient(self, y):
        return self.g.copy()

    def evaluate_batch(self, ys):
        return ys @ self.g

    def subgradient_batch(self, ys):
        return np.tile(self.g, (ys.shape[0], 1))


def _drift_targets(params: dict, d: int) -> "callable":
    amplitude = float(params.get("amplitude", 1.0))
    period = float(params.get("period", 200.0))
    phases = np.asarray(params.get("phases", np.arange(d)), dtype=float)

    def theta(t: int) -> np.ndarray:
        return amplitude * np.sin(2.0 * math.pi * t / period + phases)

    return theta


class CostSchedule:
    """Deterministic oblivious map t -> CostOracle, specified by kind + params.

    The same t always yields the same oracle; any randomness in the pattern set
    is materialized once at construction from params["seed"].
    """

    KINDS = ("fixed_quadratic", "drifting_target_l1", "switching_linear")

    def __init__(self, kind: str, params: dict, d_x: int, d_u: int):
        if kind not in self.KINDS:
            raise ConfigError(f"unknown cost kind {kind!r}; expected one of {self.KINDS}")
        self.kind = kind
        self.params = dict(params)
        self.d_x = d_x
        self.d_u = d_u
        if kind == "fixed_quadratic":
            Q = np.asarray(params.get("Q", np.eye(d_x)), dtype=float)
            R = np.asarray(params.get("R", np.zeros((d_u, d_u))), dtype=float)
            self._fixed = QuadraticClippedOracle(Q, R, float(params["r_max"]))
        elif kind == "drifting_target_l1":
            self._theta = _drift_targets(params, d_x)
            self._cache: dict[bytes, CostOracle] = {}
        else:
            n_patterns = int(params.get("n_patterns", 2))
            self.block = int(params.get("block", 1))
            rng = np.random.default_rng(int(params.get("seed", 0)))
            self._patterns = [
                LinearCostOracle(rng.standard_normal(d_x), rng.standard_normal(d_u))
                for _ in range(n_patterns)
            ]

    def at(self, t: int) -> CostOracle:
        if self.kind == "fixed_quadratic":
            return self._fixed
        if self.kind == "drifting_target_l1":
            # keyed on the target so periodic or constant drifts share oracles
            key = self._theta(t).tobytes()
            oracle = self._cache.get(key)
            if oracle is None:
                oracle = DriftingTargetOracle(self._theta(t))
                self._cache[key] = oracle
            return oracle
        return self._patterns[(t // self.block) % len(self._patterns)]


class LossSchedule:
    """Oblivious loss schedule for the hidden-linear-transform game."""

    KINDS = ("fixed_target", "drifting_target", "switching_linear")

    def __init__(self, kind: str, params: dict, d_y: int):
        if kind not in self.KINDS:
            raise ConfigError(f"unknown loss kind {kind!r}; expected one of {self.KINDS}")
        self.kind = kind
        self.params = dict(params)
        self.d_y = d_y
        if kind == "fixed_target":
            self._fixed = TargetLossOracle(np.asarray(params["target"], dtype=float))
        elif kind == "drifting_target":
            self._theta = _drift_targets(params, d_y)
            self._cache: dict[bytes, LossOracle] = {}
        else:
            n_patterns = int(params.get("n_patterns", 2))
            self.block = int(params.get("block", 1))
            rng = np.random.default_rng(int(params.get("seed", 0)))
            self._patterns = [LinearLossOracle(rng.standard_normal(d_y)) for _ in range(n_patterns)]

    def at(self, t: int) -> LossOracle:
        if self.kind == "fixed_target":
            return self._fixed
        if self.kind == "drifting_target":
            key = self._theta(t).tobytes()
            oracle = self._cache.get(key)
            if oracle is None:
                oracle = TargetLossOracle(self._theta(t))
                self._cache[key] = oracle
            return oracle
        return self._patterns[(t // self.block) % len(self._patterns)]


def cost_generator(kind: str, params: dict, t: int, d_x: int = 1, d_u: int = 1) -> CostOracle:
    """One-shot access to the oracle a schedule of the given kind yields at step t."""
    return CostSchedule(kind, params, d_x, d_u).at(t)
