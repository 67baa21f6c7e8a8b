"""Optimistic DAP controller: expert bank over matrix-entry/sign pairs, loss
scaling, determinant-doubling epochs, and the act/observe loop.

Per step the controller plays a DAP action on its estimated-noise window,
updates the Gram matrix and the dynamics ridge, re-estimates the latest
disturbance, and either opens a new epoch (freezing a fresh unrolled-model
estimate and resetting the expert bank) or feeds scaled optimistic losses to a
low-switching meta-algorithm while every expert takes one projected gradient
step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .costs import CostOracle
from .dap import NoiseWindow, d_psi
from .errors import ConfigError, DimensionError
from .estimation import (
    AbEstimate,
    GramState,
    PsiEstimate,
    ab_update_and_solve,
    epoch_should_advance,
    estimate_noise,
    gram_update,
    solve_psi,
)
from .oco_engines import BfplState, bfpl_step
from .system import NoiseModel, RandomStream, sample_noise


@dataclass
class AlgParams:
    """Controller parameters; defaults follow the theoretical schedule."""

    H: int
    lambda_w: float
    lambda_psi: float
    eta_g: float
    alpha: float
    W: float
    R_M: float
    R_B: float
    kappa: float
    gamma: float
    delta: float
    T: int
    alpha_scale: float = 1.0

    def __post_init__(self):
        if self.T < 8:
            raise ConfigError(f"T must be >= 8, got {self.T}")
        if min(self.W, self.R_M, self.R_B) < 1.0:
            raise ConfigError("W, R_M, R_B must all be >= 1")
        if not (0.0 < self.delta < 1.0):
            raise ConfigError(f"delta must lie in (0,1), got {self.delta}")
        if self.H < 1:
            raise ConfigError(f"H must be >= 1, got {self.H}")


def default_params(
    kappa: float,
    gamma: float,
    W: float,
    R_M: float,
    R_B: float,
    d_x: int,
    d_u: int,
    T: int,
    delta: float,
    alpha_scale: float = 1.0,
    H: int | None = None,
) -> AlgParams:
    """Theoretical parameter schedule, with H integerized by ceiling.

    alpha_scale multiplies the optimism weight (the theoretical constant is
    far too large for desk-scale horizons); eta_g is derived from the scaled
    alpha so the gradient step matches the losses actually fed to the experts.
    """
    if T < 8:
        raise ConfigError(f"T must be >= 8, got {T}")
    if not (0.0 < delta < 1.0):
        raise ConfigError(f"delta must lie in (0,1), got {delta}")
    if not (0.0 < gamma <= 1.0) or kappa < 1.0:
        raise ConfigError("need 0 < gamma <= 1 and kappa >= 1")
    if min(W, R_M, R_B) < 1.0:
        raise ConfigError("W, R_M, R_B must all be >= 1")
    if H is None:
        H = math.ceil(math.log(T) / gamma)
    lambda_psi = 2.0 * W**2 * R_M**2 * H**2
    lambda_w = 5.0 * kappa**2 * W**2 * R_M**2 * R_B**2 * H / gamma
    alpha_theory = (
        21.0
        * W
        * R_M
        * R_B
        * kappa**2
        * (d_x + d_u)
        * math.sqrt(H**3 / gamma**3 * (d_x**2 * kappa**2 + d_u * R_B**2)
                    * math.log(24.0 * T**2 / delta))
    )
    alpha = alpha_scale * alpha_theory
    eta_g = R_M**2 / alpha * math.sqrt(2.0 * H / T)
    return AlgParams(
        H=H, lambda_w=lambda_w, lambda_psi=lambda_psi, eta_g=eta_g, alpha=alpha,
        W=W, R_M=R_M, R_B=R_B, kappa=kappa, gamma=gamma, delta=delta, T=T,
        alpha_scale=alpha_scale,
    )


class ExpertKey(NamedTuple):
    row: int
    col: int
    chi: int


def expert_keys(n_rows: int, n_cols: int) -> list[ExpertKey]:
    """Fixed enumeration: rows, then columns, then chi in (+1, -1)."""
    return [
        ExpertKey(r, c, chi)
        for r in range(n_rows)
        for c in range(n_cols)
        for chi in (1, -1)
    ]


def loss_scale(Psi: np.ndarray, p: AlgParams) -> float:
    """Normalizer sqrt(8) W R_M H |Psi|_F + alpha sqrt(2/H) (2 + sqrt(d_x)/R_M)."""
    Psi = np.atleast_2d(np.asarray(Psi, dtype=float))
    d_x = Psi.shape[0]
    return float(
        math.sqrt(8.0) * p.W * p.R_M * p.H * np.linalg.norm(Psi)
        + p.alpha * math.sqrt(2.0 / p.H) * (2.0 + math.sqrt(d_x) / p.R_M)
    )


def _inv_sqrt_psd(V: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(V)
    if vals.min() <= 0:
        raise ConfigError("V must be positive definite")
    return (vecs / np.sqrt(vals)) @ vecs.T


def block_diag_sigma_sqrt(sigma_sqrt: np.ndarray, n_blocks: int) -> np.ndarray:
    """(I_{n} kron Sigma)^{1/2} materialized as a block-diagonal of Sigma^{1/2}."""
    sigma_sqrt = np.atleast_2d(np.asarray(sigma_sqrt, dtype=float))
    d = sigma_sqrt.shape[0]
    out = np.zeros((n_blocks * d, n_blocks * d))
    for j in range(n_blocks):
        out[j * d : (j + 1) * d, j * d : (j + 1) * d] = sigma_sqrt
    return out


class OptimismGeometry:
    """Per-epoch frozen linearization of the confidence bonus.

    For each matrix entry (r, c) of V^{-1/2} P(M) Sigma_blk^{1/2}, the entry is
    affine in M: <G[r,c], M> + b[r,c].  G and b depend only on the frozen V and
    the noise covariance, so they are computed once per epoch.
    """

    def __init__(self, V: np.ndarray, sigma_sqrt: np.ndarray, H: int, d_x: int, d_u: int):
        self.H = H
        self.d_x = d_x
        self.d_u = d_u
        self.dpsi = d_psi(H, d_x, d_u)
        self.n_cols = (2 * H - 1) * d_x
        if V.shape != (self.dpsi, self.dpsi):
            raise DimensionError(f"V has shape {V.shape}, expected ({self.dpsi}, {self.dpsi})")
        self.v_inv_sqrt = _inv_sqrt_psd(V)
        sig_blk = block_diag_sigma_sqrt(sigma_sqrt, 2 * H - 1)
        Au = self.v_inv_sqrt[:, : H * d_u].reshape(self.dpsi, H, d_u)
        Bw = sig_blk.reshape(2 * H - 1, d_x, self.n_cols)
        per_h = [
            np.einsum("rju,jyc->rcuy", Au, Bw[H - h : 2 * H - h]) for h in range(1, H + 1)
        ]
        # entry_grad[r, c] is the d_u x (H d_x) gradient of entry (r, c) in M
        stacked = np.stack(per_h, axis=2)  # (rows, cols, H, d_u, d_x)
        self.entry_grad = (
            stacked.transpose(0, 1, 3, 2, 4)
            .reshape(self.dpsi, self.n_cols, d_u, H * d_x)
        )
        if H > 1:
            self.entry_offset = self.v_inv_sqrt[:, H * d_u :] @ sig_blk[H * d_x :, :]
        else:
            self.entry_offset = np.zeros((self.dpsi, self.n_cols))

    def entry_value(self, M_mat: np.ndarray, row: int, col: int) -> float:
        return float(
            np.sum(self.entry_grad[row, col] * M_mat) + self.entry_offset[row, col]
        )


def expert_loss_and_grad(
    M,
    key: ExpertKey,
    cost: CostOracle,
    Psi: np.ndarray,
    V: np.ndarray,
    sim_window: NoiseWindow,
    p: AlgParams,
    sigma_sqrt: np.ndarray | None = None,
) -> tuple[float, np.ndarray]:
    """Optimistic expert loss and its gradient in M for a single key.

    The value is c_t(x_trunc(M), u(M)) on the simulated window minus
    alpha * chi * [V^{-1/2} P(M) Sigma^{1/2}]_{(row, col)}; the gradient chains
    the cost subgradient through the two affine maps and adds the constant
    gradient of the linear bonus.  sigma_sqrt defaults to the identity
    (isotropic unit-variance noise).
    """
    from .dap import DapParams, control_action, x_trunc  # local to avoid cycle at import

    if isinstance(M, DapParams):
        M_mat = M.mat
        d_x = M.d_x
    else:
        M_mat = np.atleast_2d(np.asarray(M, dtype=float))
        d_x = sim_window.dim
    d_u = M_mat.shape[0]
    H = M_mat.shape[1] // d_x
    if sim_window.H != H:
        raise DimensionError(f"window built for H={sim_window.H}, policy has H={H}")
    Psi = np.atleast_2d(np.asarray(Psi, dtype=float))
    if sigma_sqrt is None:
        sigma_sqrt = np.eye(d_x)
    geom = OptimismGeometry(np.asarray(V, dtype=float), sigma_sqrt, H, d_x, d_u)
    Mp = DapParams(M_mat, d_x, R_M=max(p.R_M, 1.0))
    x_val = x_trunc(Mp, Psi, sim_window)
    u_val = control_action(Mp, sim_window)
    bonus = geom.entry_value(M_mat, key.row, key.col)
    value = cost.evaluate(x_val, u_val) - p.alpha * key.chi * bonus

    gx, gu = cost.subgradient(x_val, u_val)
    buf = sim_window.buf
    S = buf[:-1]
    recent_rev = buf[H:][::-1]
    Tten = np.stack([S[j : j + H][::-1] for j in range(H)])
    Psi_u = Psi[:, : H * d_u].reshape(d_x, H, d_u)
    grad = np.einsum("u,hx->uhx", gu, recent_rev).reshape(d_u, H * d_x)
    q = np.einsum("xju,x->ju", Psi_u, gx)
    grad += np.einsum("ju,jhx->uhx", q, Tten).reshape(d_u, H * d_x)
    grad -= p.alpha * key.chi * geom.entry_grad[key.row, key.col]
    return value, grad


class Alg1Controller:
    """Full act/observe loop of the optimistic DAP algorithm.

    Construction spawns two child random streams from the provided generator,
    in order: simulated noise, then meta-algorithm perturbations.  Runs with
    the same seed therefore reproduce bit for bit.
    """

    def __init__(
        self,
        d_x: int,
        d_u: int,
        params: AlgParams,
        noise_model: NoiseModel,
        rng: RandomStream,
        x0: np.ndarray | None = None,
    ):
        if noise_model.dim != d_x:
            raise DimensionError("noise model dimension must match d_x")
        self.d_x = d_x
        self.d_u = d_u
        self.p = params
        self.noise_model = noise_model
        self.sim_rng, self.bfpl_rng = rng.spawn(2)

        H = params.H
        self.dpsi = d_psi(H, d_x, d_u)
        self.n_cols = (2 * H - 1) * d_x
        self.keys = expert_keys(self.dpsi, self.n_cols)
        self.n_keys = len(self.keys)
        self._chi = np.array([k.chi for k in self.keys], dtype=float)
        self._rc = np.array([[k.row, k.col] for k in self.keys])

        self.what_win = NoiseWindow(H, d_x, w_bound=params.W)
        self.sim_win = NoiseWindow(H, d_x, w_bound=params.W)
        self.u_hist = np.zeros((H, d_u))  # oldest first, ends at the last played u
        self.gram = GramState.initial(self.dpsi, params.lambda_psi)
        self.ab = AbEstimate.initial(d_x, d_u, params.lambda_w)
        self.psi = PsiEstimate(np.zeros((d_x, self.dpsi)), solved_at=1)
        self.psi_history: list[tuple[np.ndarray, np.ndarray]] = []
        self.sigma_sqrt = noise_model.sqrt_covariance()

        self.epoch = 1
        self.tau = 1
        self.meta = BfplState.create(self.n_keys, params.T, params.delta / 6.0, self.bfpl_rng)
        self.bank = np.zeros((self.n_keys, d_u, H * d_x))
        self.M = np.zeros((d_u, H * d_x))
        self.current_key: int | None = None
        self._refresh_epoch_geometry()

        self.t = 1
        self.x = np.zeros(d_x) if x0 is None else np.asarray(x0, dtype=float)
        self.pending_u: np.ndarray | None = None
        self.switch_count = 0
        self.last_info: dict = {}

    # -- epoch bookkeeping -------------------------------------------------

    def _refresh_epoch_geometry(self):
        self.geom = OptimismGeometry(
            self.gram.V.copy(), self.sigma_sqrt, self.p.H, self.d_x, self.d_u
        )
        rows, cols = self._rc[:, 0], self._rc[:, 1]
        signed = -self.p.alpha * self._chi
        # per-key signed bonus gradient and offset; the cost term adds the rest
        self.optim_grad = signed[:, None, None] * self.geom.entry_grad[rows, cols]
        self.optim_offset = signed * self.geom.entry_offset[rows, cols]
        self.scale = loss_scale(self.psi.Psi, self.p)

    def _start_new_epoch(self):
        self.epoch += 1
        self.tau = self.t + 1
        self.psi = solve_psi(
            self.psi_history, self.p.lambda_psi, self.d_x, self.dpsi, solved_at=self.epoch
        )
        self.gram.anchor_logdet = self.gram.logdet
        self._refresh_epoch_geometry()
        self.meta = BfplState.create(
            self.n_keys, self.p.T, self.p.delta / 6.0, self.bfpl_rng
        )
        self.bank[:] = 0.0
        self.M[:] = 0.0
        self.current_key = None

    # -- expert math -------------------------------------------------------

    def _expert_values_grads(self, cost: CostOracle) -> tuple[np.ndarray, np.ndarray]:
        H, d_x, d_u = self.p.H, self.d_x, self.d_u
        buf = self.sim_win.buf
        S = buf[:-1]
        recent_rev = buf[H:][::-1]
        Tten = np.stack([S[j : j + H][::-1] for j in range(H)])
        bank_b = self.bank.reshape(self.n_keys, d_u, H, d_x)

        u_all = np.einsum("nuhx,hx->nu", bank_b, recent_rev)
        Psi = self.psi.Psi
        Psi_u = Psi[:, : H * d_u].reshape(d_x, H, d_u)
        U_blocks = np.einsum("nuhx,jhx->nju", bank_b, Tten)
        x_all = np.einsum("xju,nju->nx", Psi_u, U_blocks)
        if H > 1:
            Psi_w = Psi[:, H * d_u :].reshape(d_x, H - 1, d_x)
            x_all = x_all + np.einsum("xjy,jy->x", Psi_w, S[H:])
        x_all = x_all + buf[-1]

        values = cost.evaluate_batch(x_all, u_all)
        values = values + np.einsum("nuz,nuz->n", self.optim_grad, self.bank)
        values = values + self.optim_offset

        gx, gu = cost.subgradient_batch(x_all, u_all)
        grads = np.einsum("nu,hx->nuhx", gu, recent_rev)
        q = np.einsum("xju,nx->nju", Psi_u, gx)
        grads += np.einsum("nju,jhx->nuhx", q, Tten)
        grads = grads.reshape(self.n_keys, d_u, H * d_x) + self.optim_grad
        return values, grads

    # -- interaction protocol ----------------------------------------------

    def act(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.d_x,):
            raise DimensionError(f"expected state of shape ({self.d_x},), got {x.shape}")
        if self.pending_u is not None:
            raise RuntimeError("act called twice without an intervening observe")
        if self.t <= self.tau + 2 * self.p.H:
            assert not self.M.any(), "policy must stay zero through the epoch warm-up"
        self.x = x
        u = self.M @ self.what_win.recent(self.p.H)[::-1].reshape(-1)
        self.u_hist[:-1] = self.u_hist[1:]
        self.u_hist[-1] = u
        self.pending_u = u
        return u

    def observe(self, x_next: np.ndarray, cost: CostOracle) -> None:
        if self.pending_u is None:
            raise RuntimeError("observe called before act")
        x_next = np.asarray(x_next, dtype=float)
        if x_next.shape != (self.d_x,):
            raise DimensionError(f"expected state of shape ({self.d_x},), got {x_next.shape}")
        H = self.p.H
        u = self.pending_u

        rho_t = np.concatenate(
            [self.u_hist.reshape(-1), self.what_win.recent(H - 1).reshape(-1)]
        )
        gram_update(self.gram, rho_t)
        self.psi_history.append((rho_t, x_next))
        ab_update_and_solve(self.ab, np.concatenate([self.x, u]), x_next)
        w_hat = estimate_noise(x_next, self.ab.A, self.ab.B, self.x, u, self.p.W)
        self.what_win.push(w_hat)
        self.last_w_hat = w_hat
        w_sim = sample_noise(self.noise_model, self.sim_rng)

        info = {
            "epoch": self.epoch,
            "key": -1 if self.current_key is None else self.current_key,
            "switch": 0,
            "clip": 0,
            "logdet_v": self.gram.logdet,
            "m_norm": float(np.linalg.norm(self.M)),
            "loss_min": math.nan,
            "loss_chosen": math.nan,
        }

        if epoch_should_advance(self.gram):
            self._start_new_epoch()
            info["epoch"] = self.epoch
            info["key"] = -1
        elif self.t >= self.tau + 2 * H:
            values, grads = self._expert_values_grads(cost)
            losses = values / self.scale if self.scale > 0 else np.zeros_like(values)
            losses = losses - losses.min()
            clip_before = self.meta.clip_count
            key_idx, _ = bfpl_step(self.meta, losses)
            info["clip"] = self.meta.clip_count - clip_before
            info["loss_min"] = float(losses.min())
            info["loss_chosen"] = float(losses[key_idx])

            self.bank -= self.p.eta_g * grads
            norms = np.linalg.norm(self.bank.reshape(self.n_keys, -1), axis=1)
            excess = norms > self.p.R_M
            if excess.any():
                self.bank[excess] *= (self.p.R_M / norms[excess])[:, None, None]

            if self.current_key is not None and key_idx != self.current_key:
                info["switch"] = 1
                self.switch_count += 1
            self.current_key = key_idx
            self.M = self.bank[key_idx].copy()
            info["key"] = key_idx

        self.sim_win.push(w_sim)
        self.x = x_next
        self.pending_u = None
        self.t += 1
        self.last_info = info
