"""Seeded experiment runner: configs, noise tapes, comparators, regret.

Every run first materializes the full noise tape from the seed so the learner,
all comparators, and the baselines consume identical disturbances; regret is
then a per-step cumulative difference of realized costs.  Identical
(config, seed) pairs produce byte-identical CSV traces and JSON summaries.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .controller import Alg1Controller, AlgParams, default_params
from .costs import CostSchedule, LossSchedule
from .dap import DapParams, NoiseWindow, build_psi_star, control_action, d_psi
from .errors import ConfigError, DimensionError
from .estimation import AbEstimate, ab_update_and_solve, estimate_noise, solve_psi
from .oco_hlt import Alg2Learner, hlt_params, ridge_transform
from .system import (
    LinearSystem,
    NoiseModel,
    certify_strong_stability,
    make_rng,
    sample_noise,
    wrap_stabilize,
)

SYSTEM_PRESETS = {
    "scalar_stable": {"A": [[0.5]], "B": [[1.0]]},
    "twod_stable": {"A": [[0.6, 0.2], [0.0, 0.4]], "B": [[1.0, 0.0], [0.0, 1.0]]},
    "scalar_unstable": {"A": [[2.0]], "B": [[1.0]]},
}

ALGORITHMS = ("alg1", "alg2", "fixed_K", "explore_exploit")


@dataclass
class ExperimentConfig:
    """Declarative run specification; `from_dict` / `to_dict` round-trip exactly."""

    algorithm: str
    T: int
    delta: float
    seed: int
    system: dict = field(default_factory=dict)
    noise: dict = field(default_factory=dict)
    costs: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    K0: list | None = None
    K: list | None = None
    comparators: list = field(default_factory=list)
    hlt: dict = field(default_factory=dict)
    explore: dict = field(default_factory=dict)
    out: str = "out"

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            cfg = cls(**raw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        out = {
            "algorithm": self.algorithm,
            "T": self.T,
            "delta": self.delta,
            "seed": self.seed,
            "system": self.system,
            "noise": self.noise,
            "costs": self.costs,
            "params": self.params,
            "K0": self.K0,
            "K": self.K,
            "comparators": self.comparators,
            "hlt": self.hlt,
            "explore": self.explore,
            "out": self.out,
        }
        return out

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.T < 8:
            raise ConfigError(f"T must be >= 8, got {self.T}")
        if not (0.0 < self.delta < 1.0):
            raise ConfigError(f"delta must lie in (0,1), got {self.delta}")
        if self.algorithm == "alg2":
            if "Q_star" not in self.hlt:
                raise ConfigError("alg2 requires hlt.Q_star")
        elif not self.system:
            raise ConfigError(f"{self.algorithm} requires a system spec")
        if self.algorithm == "fixed_K" and self.K is None:
            raise ConfigError("fixed_K requires K")


def resolve_system(cfg: ExperimentConfig) -> LinearSystem:
    spec = dict(cfg.system)
    if "preset" in spec:
        preset = SYSTEM_PRESETS.get(spec["preset"])
        if preset is None:
            raise ConfigError(f"unknown system preset {spec['preset']!r}")
        spec = dict(preset)
    if "A" not in spec or "B" not in spec:
        raise ConfigError("system spec needs matrices A and B (row-major nested arrays)")
    noise = resolve_noise(cfg.noise, len(spec["A"]), cfg.T, cfg.delta)
    return LinearSystem(np.array(spec["A"], dtype=float), np.array(spec["B"], dtype=float), noise)


def resolve_noise(spec: dict, dim: int, T: int, delta: float) -> NoiseModel:
    spec = dict(spec) if spec else {"kind": "custom_bounded", "name": "uniform_ball", "W": 1.0}
    kind = spec.get("kind", "custom_bounded")
    if kind == "truncated_gaussian":
        sigma = spec.get("sigma")
        if sigma is None:
            sigma = (float(spec.get("sigma_iso", 1.0)) ** 2) * np.eye(dim)
        return NoiseModel.truncated_gaussian(np.array(sigma, dtype=float), T, delta)
    if kind == "custom_bounded":
        return NoiseModel.custom_bounded(spec.get("name", "uniform_ball"), dim, float(spec.get("W", 1.0)))
    raise ConfigError(f"unknown noise kind {kind!r}")


def resolve_params(cfg: ExperimentConfig, sys: LinearSystem, K0=None) -> AlgParams:
    """Build AlgParams from the certified system, then apply config overrides."""
    over = dict(cfg.params)
    cert_K = np.zeros((sys.d_u, sys.d_x)) if K0 is None else np.array(K0, dtype=float)
    cert = certify_strong_stability(cert_K, sys)
    kappa = float(over.pop("kappa", cert.kappa))
    gamma = float(over.pop("gamma", cert.gamma))
    W = float(over.pop("W", max(1.0, sys.noise.W)))
    R_M = float(over.pop("R_M", 1.0))
    R_B = float(over.pop("R_B", max(1.0, float(np.linalg.norm(sys.B, 2)))))
    alpha_scale = float(over.pop("alpha_scale", 1.0))
    H = over.pop("H", None)
    params = default_params(
        kappa, gamma, W, R_M, R_B, sys.d_x, sys.d_u, cfg.T, cfg.delta,
        alpha_scale=alpha_scale, H=None if H is None else int(H),
    )
    allowed = {"lambda_w", "lambda_psi", "eta_g", "alpha"}
    unknown = set(over) - allowed
    if unknown:
        raise ConfigError(f"unknown parameter overrides: {sorted(unknown)}")
    for key, value in over.items():
        setattr(params, key, float(value))
    return params


# -- trace and summary emission ---------------------------------------------


def _fmt(value: float) -> str:
    return f"{value:.17g}"


@dataclass
class TraceRecord:
    t: int
    x: np.ndarray
    u: np.ndarray
    cost: float
    epoch: int
    expert_key: int
    switch: int
    logdet_v: float
    est_err: float
    cum_cost: float


def trace_header(d_x: int, d_u: int) -> list[str]:
    return (
        ["t"]
        + [f"x_{i}" for i in range(d_x)]
        + [f"u_{i}" for i in range(d_u)]
        + ["cost", "epoch", "expert_key", "switch", "logdet_v", "est_err", "cum_cost"]
    )


def write_trace_csv(path: str, records: list[TraceRecord], d_x: int, d_u: int) -> None:
    lines = [",".join(trace_header(d_x, d_u))]
    for r in records:
        fields = (
            [str(r.t)]
            + [_fmt(v) for v in r.x]
            + [_fmt(v) for v in r.u]
            + [_fmt(r.cost), str(r.epoch), str(r.expert_key), str(r.switch),
               _fmt(r.logdet_v), _fmt(r.est_err), _fmt(r.cum_cost)]
        )
        lines.append(",".join(fields))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_summary_json(path: str, summary: dict) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- comparator simulation ----------------------------------------------------


def simulate_dap_policy(M: DapParams, sys: LinearSystem, tape: np.ndarray,
                        schedule: CostSchedule) -> np.ndarray:
    """Realized costs of the fixed DAP policy driven by the true noise tape."""
    T = tape.shape[0]
    win = NoiseWindow(M.H, sys.d_x)
    x = np.zeros(sys.d_x)
    costs = np.empty(T)
    for t in range(1, T + 1):
        u = control_action(M, win)
        costs[t - 1] = schedule.at(t).evaluate(x, u)
        x = sys.A @ x + sys.B @ u + tape[t - 1]
        win.push(tape[t - 1])
    return costs


def simulate_linear_policy(K: np.ndarray, sys: LinearSystem, tape: np.ndarray,
                           schedule: CostSchedule) -> np.ndarray:
    T = tape.shape[0]
    K = np.atleast_2d(np.asarray(K, dtype=float))
    x = np.zeros(sys.d_x)
    costs = np.empty(T)
    for t in range(1, T + 1):
        u = K @ x
        costs[t - 1] = schedule.at(t).evaluate(x, u)
        x = sys.A @ x + sys.B @ u + tape[t - 1]
    return costs


def compute_regret(learner_costs: np.ndarray, comparator_costs: np.ndarray) -> np.ndarray:
    """Cumulative difference of realized costs under the shared noise tape."""
    learner_costs = np.asarray(learner_costs, dtype=float)
    comparator_costs = np.asarray(comparator_costs, dtype=float)
    if learner_costs.shape != comparator_costs.shape:
        raise DimensionError(
            f"horizon mismatch: {learner_costs.shape} vs {comparator_costs.shape}"
        )
    return np.cumsum(learner_costs - comparator_costs)


# -- best DAP in hindsight -----------------------------------------------------


def _surrogate_batch(M_mat: np.ndarray, Psi: np.ndarray, padded: np.ndarray,
                     H: int, d_x: int, d_u: int, T: int):
    """States, actions, and chain-rule contexts of the truncated surrogate at all t."""
    from numpy.lib.stride_tricks import sliding_window_view

    # padded[k] = w_{k - 2H + 1} with zeros before step 1; window_t = w_{t-2H..t-1}
    wins = sliding_window_view(padded, 2 * H, axis=0).transpose(0, 2, 1)[:T]
    recent_rev = wins[:, H:][:, ::-1]                      # (T, H, d_x); row h-1 is w_{t-h}
    S = wins[:, :-1]                                       # (T, 2H-1, d_x)
    Tten = np.stack([S[:, j : j + H][:, ::-1] for j in range(H)], axis=1)  # (T, H, H, d_x)
    blocks = M_mat.reshape(d_u, H, d_x)
    u_all = np.einsum("uhx,thx->tu", blocks, recent_rev)
    Psi_u = Psi[:, : H * d_u].reshape(d_x, H, d_u)
    U_blocks = np.einsum("uhx,tjhx->tju", blocks, Tten)
    x_all = np.einsum("xju,tju->tx", Psi_u, U_blocks)
    if H > 1:
        Psi_w = Psi[:, H * d_u :].reshape(d_x, H - 1, d_x)
        x_all = x_all + np.einsum("xjy,tjy->tx", Psi_w, S[:, H:])
    x_all = x_all + wins[:, -1]
    return x_all, u_all, recent_rev, Tten, Psi_u


def best_dap_in_hindsight(
    true_noises: np.ndarray,
    schedule: CostSchedule,
    Psi_star: np.ndarray,
    R_M: float,
    H: int,
    budget: int,
    restarts: int = 5,
    seed: int = 0,
) -> tuple[DapParams, float]:
    """Projected-gradient minimization of the truncated surrogate objective.

    Oracle access to the true noise tape is a test/benchmark side channel; the
    returned objective is sum_t c_t(x_t(M; Psi*, w), u_t(M; w)).
    """
    tape = np.asarray(true_noises, dtype=float)
    T, d_x = tape.shape
    Psi_star = np.atleast_2d(np.asarray(Psi_star, dtype=float))
    d_u = (Psi_star.shape[1] - (H - 1) * d_x) // H
    padded = np.vstack([np.zeros((2 * H, d_x)), tape])

    costs_at = [schedule.at(t) for t in range(1, T + 1)]
    groups: dict[int, list[int]] = {}
    oracle_of: dict[int, object] = {}
    for i, oracle in enumerate(costs_at):
        groups.setdefault(id(oracle), []).append(i)
        oracle_of[id(oracle)] = oracle

    def objective_grad(M_mat):
        x_all, u_all, recent_rev, Tten, Psi_u = _surrogate_batch(
            M_mat, Psi_star, padded, H, d_x, d_u, T
        )
        values = np.empty(T)
        gx = np.empty_like(x_all)
        gu = np.empty_like(u_all)
        for key, idx in groups.items():
            oracle = oracle_of[key]
            values[idx] = oracle.evaluate_batch(x_all[idx], u_all[idx])
            gx[idx], gu[idx] = oracle.subgradient_batch(x_all[idx], u_all[idx])
        grad = np.einsum("tu,thx->uhx", gu, recent_rev)
        q = np.einsum("xju,tx->tju", Psi_u, gx)
        grad += np.einsum("tju,tjhx->uhx", q, Tten)
        return float(values.sum()), grad.reshape(d_u, H * d_x)

    rng = make_rng(seed)
    starts = [np.zeros((d_u, H * d_x))]
    for _ in range(max(0, restarts - 1)):
        point = rng.standard_normal((d_u, H * d_x))
        point *= rng.random() * R_M / max(np.linalg.norm(point), 1e-12)
        starts.append(point)

    best_val = math.inf
    best_M = starts[0]
    for start in starts:
        M = start.copy()
        g_max = 1e-12
        for it in range(1, budget + 1):
            value, grad = objective_grad(M)
            if value < best_val:
                best_val = value
                best_M = M.copy()
            g_max = max(g_max, float(np.linalg.norm(grad)))
            M = M - (R_M / (g_max * math.sqrt(it))) * grad
            norm = np.linalg.norm(M)
            if norm > R_M:
                M *= R_M / norm
        value, _ = objective_grad(M)
        if value < best_val:
            best_val = value
            best_M = M.copy()
    return DapParams(best_M, d_x, R_M=max(1.0, R_M)), best_val


# -- learners beyond the main controller --------------------------------------


class FixedKController:
    """Plays u = K x; no learning state."""

    def __init__(self, K: np.ndarray):
        self.K = np.atleast_2d(np.asarray(K, dtype=float))

    def act(self, x):
        return self.K @ x

    def observe(self, x_next, cost):
        pass


class ExploreExploitController:
    """Explore-then-exploit baseline: random excitation, one ridge solve, then
    expert-free surrogate OGD with the frozen model (no optimism)."""

    def __init__(self, d_x, d_u, params: AlgParams, rng, explore_scale: float = 1.0):
        self.d_x = d_x
        self.d_u = d_u
        self.p = params
        self.explore_len = math.ceil(params.T ** (2.0 / 3.0))
        self.explore_scale = explore_scale
        (self.explore_rng,) = rng.spawn(1)
        H = params.H
        self.what_win = NoiseWindow(H, d_x, w_bound=params.W)
        self.u_hist = np.zeros((H, d_u))
        self.ab = AbEstimate.initial(d_x, d_u, params.lambda_w)
        self.psi_history: list[tuple[np.ndarray, np.ndarray]] = []
        self.Psi: np.ndarray | None = None
        self.frozen = False
        self.M = np.zeros((d_u, H * d_x))
        self.eta = 0.0
        self.t = 1
        self.x = np.zeros(d_x)
        self.pending_u = None
        self.last_info = {}

    def act(self, x):
        self.x = np.asarray(x, dtype=float)
        if self.t <= self.explore_len:
            z = self.explore_rng.standard_normal(self.d_u)
            z /= max(np.linalg.norm(z), 1e-300)
            u = self.explore_scale * (self.explore_rng.random() ** (1.0 / self.d_u)) * z
        else:
            u = self.M @ self.what_win.recent(self.p.H)[::-1].reshape(-1)
        self.u_hist[:-1] = self.u_hist[1:]
        self.u_hist[-1] = u
        self.pending_u = u
        return u

    def observe(self, x_next, cost):
        x_next = np.asarray(x_next, dtype=float)
        u = self.pending_u
        H = self.p.H
        rho_t = np.concatenate(
            [self.u_hist.reshape(-1), self.what_win.recent(H - 1).reshape(-1)]
        )
        self.psi_history.append((rho_t, x_next))
        if not self.frozen:
            ab_update_and_solve(self.ab, np.concatenate([self.x, u]), x_next)
        w_hat = estimate_noise(x_next, self.ab.A, self.ab.B, self.x, u, self.p.W)

        if self.t == self.explore_len:
            dpsi = d_psi(H, self.d_x, self.d_u)
            self.Psi = solve_psi(self.psi_history, self.p.lambda_psi, self.d_x, dpsi).Psi
            self.frozen = True
            g_bar = max(math.sqrt(2.0) * self.p.W * H * float(np.linalg.norm(self.Psi)), 1e-6)
            remaining = max(self.p.T - self.explore_len, 1)
            self.eta = self.p.R_M / (g_bar * math.sqrt(remaining))
        elif self.t > self.explore_len:
            # the time-t surrogate reads the window through w_hat_{t-1} only
            grad = self._surrogate_grad(cost)
            self.M = self.M - self.eta * grad
            norm = np.linalg.norm(self.M)
            if norm > self.p.R_M:
                self.M *= self.p.R_M / norm
        self.what_win.push(w_hat)

        self.last_info = {
            "epoch": 1 if self.frozen else 0,
            "key": -1,
            "switch": 0,
            "logdet_v": math.nan,
            "m_norm": float(np.linalg.norm(self.M)),
        }
        self.x = x_next
        self.pending_u = None
        self.t += 1

    def _surrogate_grad(self, cost):
        H, d_x, d_u = self.p.H, self.d_x, self.d_u
        buf = self.what_win.buf
        S = buf[:-1]
        recent_rev = buf[H:][::-1]
        Tten = np.stack([S[j : j + H][::-1] for j in range(H)])
        blocks = self.M.reshape(d_u, H, d_x)
        u_val = np.einsum("uhx,hx->u", blocks, recent_rev)
        Psi_u = self.Psi[:, : H * d_u].reshape(d_x, H, d_u)
        U_blocks = np.einsum("uhx,jhx->ju", blocks, Tten)
        x_val = np.einsum("xju,ju->x", Psi_u, U_blocks)
        if H > 1:
            Psi_w = self.Psi[:, H * d_u :].reshape(d_x, H - 1, d_x)
            x_val = x_val + np.einsum("xjy,jy->x", Psi_w, S[H:])
        x_val = x_val + buf[-1]
        gx, gu = cost.subgradient(x_val, u_val)
        grad = np.einsum("u,hx->uhx", gu, recent_rev)
        q = np.einsum("xju,x->ju", Psi_u, gx)
        grad += np.einsum("ju,jhx->uhx", q, Tten)
        return grad.reshape(d_u, H * d_x)


# -- run loops -----------------------------------------------------------------


def _spawn_streams(seed: int):
    ss = np.random.SeedSequence(seed)
    tape_ss, learner_ss, comp_ss = ss.spawn(3)
    return (
        np.random.default_rng(tape_ss),
        np.random.default_rng(learner_ss),
        np.random.default_rng(comp_ss),
    )


def run_control_loop(learner, sys: LinearSystem, tape: np.ndarray, schedule: CostSchedule,
                     psi_star: np.ndarray | None = None):
    """Drive the interaction protocol; returns (records, costs, diagnostics)."""
    T = tape.shape[0]
    x = np.zeros(sys.d_x)
    records: list[TraceRecord] = []
    costs = np.empty(T)
    cum = 0.0
    epochs = 1
    switches = 0
    for t in range(1, T + 1):
        u = learner.act(x)
        cost = schedule.at(t)
        c_val = float(cost.evaluate(x, u))
        x_next = sys.A @ x + sys.B @ u + tape[t - 1]
        learner.observe(x_next, cost)
        info = getattr(learner, "last_info", None) or getattr(
            getattr(learner, "inner", None), "last_info", {}
        )
        est_err = math.nan
        if psi_star is not None:
            inner = getattr(learner, "inner", learner)
            psi_hat = getattr(getattr(inner, "psi", None), "Psi", None)
            if psi_hat is None:
                psi_hat = getattr(inner, "Psi", None)
            if psi_hat is not None:
                est_err = float(np.linalg.norm(psi_hat - psi_star))
        cum += c_val
        epochs = max(epochs, info.get("epoch", 1))
        switches += info.get("switch", 0)
        records.append(
            TraceRecord(
                t=t, x=x.copy(), u=np.atleast_1d(u).copy(), cost=c_val,
                epoch=info.get("epoch", 0), expert_key=info.get("key", -1),
                switch=info.get("switch", 0), logdet_v=info.get("logdet_v", math.nan),
                est_err=est_err, cum_cost=cum,
            )
        )
        costs[t - 1] = c_val
        x = x_next
    return records, costs, {"epochs": epochs, "switches": switches}


def run_hlt_loop(learner: Alg2Learner, Q_star: np.ndarray, tape: np.ndarray,
                 schedule: LossSchedule):
    """Hidden-linear-transform protocol; the cost column is the realized true loss."""
    T = tape.shape[0]
    records: list[TraceRecord] = []
    costs = np.empty(T)
    cum = 0.0
    epochs = 1
    switches = 0
    prev_key = None
    for t in range(1, T + 1):
        a, _key = learner.act()
        loss = schedule.at(t)
        y_next = Q_star @ a + tape[t - 1]
        true_loss = float(loss.evaluate(Q_star @ a))
        idx = learner.pending
        learner.observe(y_next, loss)
        # est_err: running ridge error in the V-weighted spectral norm,
        # with V and the ridge both including all observations so far
        ridge = ridge_transform(learner.gram.V, learner.moment_ya)
        v_sqrt = _psd_sqrt(learner.gram.V)
        est_err = float(np.linalg.norm((ridge - Q_star) @ v_sqrt, 2))
        switch = int(prev_key is not None and idx != prev_key)
        prev_key = idx
        cum += true_loss
        epochs = max(epochs, learner.epoch)
        switches += switch
        records.append(
            TraceRecord(
                t=t, x=y_next.copy(), u=a.copy(), cost=true_loss,
                epoch=learner.epoch, expert_key=idx, switch=switch,
                logdet_v=learner.gram.logdet, est_err=est_err, cum_cost=cum,
            )
        )
        costs[t - 1] = true_loss
    return records, costs, {"epochs": epochs, "switches": switches}


def _psd_sqrt(V: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(V)
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


def best_fixed_action(Q_star: np.ndarray, schedule: LossSchedule, T: int, R_a: float,
                      budget: int = 400, restarts: int = 5, seed: int = 0):
    """Projected gradient minimization of sum_t l_t(Q* a) over the action ball."""
    Q_star = np.atleast_2d(np.asarray(Q_star, dtype=float))
    d_a = Q_star.shape[1]
    oracles = [schedule.at(t) for t in range(1, T + 1)]
    unique = all(o is oracles[0] for o in oracles)

    def objective_grad(a):
        image = Q_star @ a
        if unique:
            value = T * oracles[0].evaluate(image)
            grad = T * (Q_star.T @ oracles[0].subgradient(image))
        else:
            value = 0.0
            grad = np.zeros(d_a)
            for o in oracles:
                value += o.evaluate(image)
                grad += Q_star.T @ o.subgradient(image)
        return value, grad

    rng = make_rng(seed)
    radius = R_a / 2.0
    starts = [np.zeros(d_a)]
    for _ in range(max(0, restarts - 1)):
        z = rng.standard_normal(d_a)
        starts.append(z * rng.random() * radius / max(np.linalg.norm(z), 1e-12))
    best_val, best_a = math.inf, starts[0]
    for start in starts:
        a = start.copy()
        g_max = 1e-12
        for it in range(1, budget + 1):
            value, grad = objective_grad(a)
            if value < best_val:
                best_val, best_a = value, a.copy()
            g_max = max(g_max, float(np.linalg.norm(grad)))
            a = a - (radius / (g_max * math.sqrt(it))) * grad
            norm = np.linalg.norm(a)
            if norm > radius:
                a *= radius / norm
        value, _ = objective_grad(a)
        if value < best_val:
            best_val, best_a = value, a.copy()
    return best_a, best_val


# -- experiment entry point ----------------------------------------------------


def run_experiment(cfg: ExperimentConfig, out_dir: str | None = None) -> tuple[str, str]:
    """Execute one seeded run; writes trace.csv and summary.json, returns the paths."""
    cfg.validate()
    out_dir = out_dir or cfg.out
    os.makedirs(out_dir, exist_ok=True)

    if cfg.algorithm == "alg2":
        return _run_alg2(cfg, out_dir)
    return _run_control(cfg, out_dir)


def _run_control(cfg: ExperimentConfig, out_dir: str) -> tuple[str, str]:
    sys = resolve_system(cfg)
    schedule = CostSchedule(
        cfg.costs.get("kind", "fixed_quadratic"),
        {k: v for k, v in cfg.costs.items() if k != "kind"},
        sys.d_x,
        sys.d_u,
    )
    tape_rng, learner_rng, _ = _spawn_streams(cfg.seed)
    tape = sample_noise(sys.noise, tape_rng, size=cfg.T)

    K0 = None if cfg.K0 is None else np.array(cfg.K0, dtype=float)
    params = resolve_params(cfg, sys, K0=K0)
    psi_star = None

    if cfg.algorithm == "fixed_K":
        learner = FixedKController(np.array(cfg.K, dtype=float))
    elif cfg.algorithm == "explore_exploit":
        learner = ExploreExploitController(
            sys.d_x, sys.d_u, params, learner_rng,
            explore_scale=float(cfg.explore.get("scale", 1.0)),
        )
        psi_star = _psi_star_for(sys, K0, params.H)
    else:
        inner = Alg1Controller(sys.d_x, sys.d_u, params, sys.noise, learner_rng)
        learner = inner if K0 is None else wrap_stabilize(inner, K0, params.kappa)
        psi_star = _psi_star_for(sys, K0, params.H)

    records, costs, counters = run_control_loop(learner, sys, tape, schedule, psi_star)

    regret = {}
    for comp in cfg.comparators:
        name = comp["name"]
        if name == "zero":
            comp_costs = simulate_linear_policy(np.zeros((sys.d_u, sys.d_x)), sys, tape, schedule)
        elif name == "fixed_K":
            comp_costs = simulate_linear_policy(np.array(comp["K"], dtype=float), sys, tape, schedule)
        elif name == "best_dap":
            psi = _psi_star_for(sys, K0, params.H)
            M_star, _ = best_dap_in_hindsight(
                tape, schedule, psi, params.R_M, params.H,
                budget=int(comp.get("budget", 150)),
                restarts=int(comp.get("restarts", 5)),
                seed=cfg.seed,
            )
            comp_costs = simulate_dap_policy(M_star, sys, tape, schedule)
        else:
            raise ConfigError(f"unknown comparator {name!r}")
        regret[name] = float(compute_regret(costs, comp_costs)[-1])

    summary = {
        "total_cost": float(costs.sum()),
        "regret": regret,
        "epochs": counters["epochs"],
        "switches": counters["switches"],
        "params_used": _params_dict(params),
        "seed": cfg.seed,
    }
    trace_path = os.path.join(out_dir, "trace.csv")
    summary_path = os.path.join(out_dir, "summary.json")
    write_trace_csv(trace_path, records, sys.d_x, sys.d_u)
    write_summary_json(summary_path, summary)
    return trace_path, summary_path


def _psi_star_for(sys: LinearSystem, K0, H: int) -> np.ndarray:
    if K0 is None:
        return build_psi_star(sys.A, sys.B, H)
    return build_psi_star(sys.A + sys.B @ np.atleast_2d(K0), sys.B, H)


def _run_alg2(cfg: ExperimentConfig, out_dir: str) -> tuple[str, str]:
    hlt = dict(cfg.hlt)
    Q_star = np.array(hlt["Q_star"], dtype=float)
    d_y, d_a = Q_star.shape
    R_a = float(hlt.get("R_a", 2.0))
    R_Q = float(hlt.get("R_Q", max(1.0, float(np.linalg.norm(Q_star, 2)))))
    noise = resolve_noise(hlt.get("noise", {"kind": "custom_bounded", "name": "uniform_ball", "W": 0.5}),
                          d_y, cfg.T, cfg.delta)
    if float(np.linalg.norm(Q_star, 2)) > R_Q + 1e-9:
        raise ConfigError("hlt.R_Q must upper bound |Q_star|")
    params = hlt_params(
        R_a, R_Q, noise.W, d_a, d_y, cfg.T, cfg.delta,
        alpha_scale=float(hlt.get("alpha_scale", cfg.params.get("alpha_scale", 1.0))),
    )
    losses = hlt.get("losses", {"kind": "fixed_target", "target": [0.0] * d_y})
    schedule = LossSchedule(losses.get("kind", "fixed_target"),
                            {k: v for k, v in losses.items() if k != "kind"}, d_y)

    tape_rng, learner_rng, _ = _spawn_streams(cfg.seed)
    tape = sample_noise(noise, tape_rng, size=cfg.T)
    learner = Alg2Learner(params, learner_rng)
    records, costs, counters = run_hlt_loop(learner, Q_star, tape, schedule)

    regret = {}
    for comp in cfg.comparators:
        if comp["name"] != "best_fixed_action":
            raise ConfigError(f"unknown alg2 comparator {comp['name']!r}")
        _a_star, best_val = best_fixed_action(
            Q_star, schedule, cfg.T, R_a,
            budget=int(comp.get("budget", 400)), seed=cfg.seed,
        )
        regret["best_fixed_action"] = float(costs.sum() - best_val)

    summary = {
        "total_cost": float(costs.sum()),
        "regret": regret,
        "epochs": counters["epochs"],
        "switches": counters["switches"],
        "params_used": {
            "eta_g": params.eta_g, "eta_m": params.eta_m, "lambda": params.lam,
            "alpha": params.alpha, "alpha_scale": params.alpha_scale,
            "R_a": params.R_a, "R_Q": params.R_Q, "W": params.W,
            "d_a": params.d_a, "d_y": params.d_y, "T": params.T, "delta": params.delta,
        },
        "seed": cfg.seed,
    }
    trace_path = os.path.join(out_dir, "trace.csv")
    summary_path = os.path.join(out_dir, "summary.json")
    write_trace_csv(trace_path, records, d_y, d_a)
    write_summary_json(summary_path, summary)
    return trace_path, summary_path


def _params_dict(p: AlgParams) -> dict:
    return {
        "H": p.H, "lambda_w": p.lambda_w, "lambda_psi": p.lambda_psi,
        "eta_g": p.eta_g, "alpha": p.alpha, "alpha_scale": p.alpha_scale,
        "W": p.W, "R_M": p.R_M, "R_B": p.R_B, "kappa": p.kappa, "gamma": p.gamma,
        "delta": p.delta, "T": p.T,
    }
