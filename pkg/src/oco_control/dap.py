"""Disturbance-action policies and their bounded-memory representations.

A policy is the concatenated matrix M = (M^[1] ... M^[H]) acting on the last
H disturbances.  All representation operations read from a NoiseWindow that
holds the most recent 2H disturbances (zeros before the first step), which is
enough context for the action, the stacked observation rho, and the truncated
state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError
from .system import LinearSystem, certify_strong_stability


@dataclass
class DapParams:
    """Concatenated DAP matrix with block structure (d_u, H * d_x).

    Column block h (1-based) is M^[h], the coefficient of w_{t-h}.
    """

    mat: np.ndarray
    d_x: int
    R_M: float = 1.0

    def __post_init__(self):
        self.mat = np.atleast_2d(np.asarray(self.mat, dtype=float))
        if self.mat.shape[1] % self.d_x != 0:
            raise DimensionError(f"mat has {self.mat.shape[1]} columns, not a multiple of d_x={self.d_x}")
        if self.R_M < 1.0:
            raise ConfigError(f"R_M must be >= 1, got {self.R_M}")

    @classmethod
    def from_blocks(cls, blocks, R_M: float = 1.0) -> "DapParams":
        blocks = np.stack([np.atleast_2d(np.asarray(b, dtype=float)) for b in blocks])
        H, d_u, d_x = blocks.shape
        return cls(blocks.transpose(1, 0, 2).reshape(d_u, H * d_x), d_x, R_M)

    @classmethod
    def zeros(cls, H: int, d_x: int, d_u: int, R_M: float = 1.0) -> "DapParams":
        return cls(np.zeros((d_u, H * d_x)), d_x, R_M)

    @property
    def d_u(self) -> int:
        return self.mat.shape[0]

    @property
    def H(self) -> int:
        return self.mat.shape[1] // self.d_x

    @property
    def blocks(self) -> np.ndarray:
        """View of shape (H, d_u, d_x); blocks[h-1] is M^[h]."""
        return self.mat.reshape(self.d_u, self.H, self.d_x).transpose(1, 0, 2)

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.mat))


class NoiseWindow:
    """Ring of the most recent 2H disturbances, oldest first; pre-history is zero."""

    def __init__(self, H: int, dim: int, w_bound: float = math.inf):
        if H < 1:
            raise ConfigError(f"H must be >= 1, got {H}")
        self.H = H
        self.dim = dim
        self.w_bound = w_bound
        self.buf = np.zeros((2 * H, dim))

    def push(self, w: np.ndarray) -> None:
        w = np.asarray(w, dtype=float)
        if w.shape != (self.dim,):
            raise DimensionError(f"expected noise of shape ({self.dim},), got {w.shape}")
        if np.linalg.norm(w) > self.w_bound * (1.0 + 1e-9):
            raise ConfigError(f"noise norm {np.linalg.norm(w):.6g} exceeds bound {self.w_bound}")
        self.buf[:-1] = self.buf[1:]
        self.buf[-1] = w

    def recent(self, h: int) -> np.ndarray:
        """Last h entries, oldest first: (w_{t-h}, ..., w_{t-1})."""
        return self.buf[2 * self.H - h :]

    def tail_stack(self) -> np.ndarray:
        """Flat stack of w_{t+1-2H:t-1}, the input of rho at the current step."""
        return self.buf[1:].reshape(-1)

    def head_stack(self) -> np.ndarray:
        """Flat stack of w_{t-2H:t-2}, the input of rho at the previous step."""
        return self.buf[:-1].reshape(-1)

    def last(self) -> np.ndarray:
        return self.buf[-1]


def d_psi(H: int, d_x: int, d_u: int) -> int:
    return H * d_u + (H - 1) * d_x


def control_action(M: DapParams, win: NoiseWindow) -> np.ndarray:
    """u_t = sum_h M^[h] w_{t-h}; bounded by W R_M sqrt(H) for windows inside the W ball."""
    if win.dim != M.d_x or win.H < M.H:
        raise DimensionError("window does not match the policy dimensions")
    recent_rev = win.recent(M.H)[::-1]  # row h-1 holds w_{t-h}
    return np.einsum("hux,hx->u", M.blocks, recent_rev)


def build_P(M: DapParams) -> np.ndarray:
    """Dense block-banded operator mapping stacked noise to rho.

    Shape (H d_u + (H-1) d_x) x ((2H-1) d_x).  Row block j in [1, H] carries
    (M^[H] ... M^[1]) starting at column block j; the bottom (H-1) d_x rows
    carry an identity selecting the trailing noise entries.
    """
    H, d_u, d_x = M.H, M.d_u, M.d_x
    rows = d_psi(H, d_x, d_u)
    cols = (2 * H - 1) * d_x
    P = np.zeros((rows, cols))
    blocks = M.blocks
    for j in range(H):
        for i in range(H):
            # column block j+i holds M^[H-i] within row block j
            P[j * d_u : (j + 1) * d_u, (j + i) * d_x : (j + i + 1) * d_x] = blocks[H - 1 - i]
    for j in range(H - 1):
        r0 = H * d_u + j * d_x
        c0 = (H + j) * d_x
        P[r0 : r0 + d_x, c0 : c0 + d_x] = np.eye(d_x)
    return P


def rho(M: DapParams, win: NoiseWindow) -> np.ndarray:
    """Stacked (u_{t+1-H}, ..., u_t, w_{t+1-H}, ..., w_{t-1}) = P(M) w_{t+1-2H:t-1}."""
    return build_P(M) @ win.tail_stack()


def x_trunc(M: DapParams, Psi: np.ndarray, win: NoiseWindow) -> np.ndarray:
    """Truncated state Psi rho_{t-1}(M; w) + w_{t-1}."""
    Psi = np.atleast_2d(np.asarray(Psi, dtype=float))
    rho_prev = build_P(M) @ win.head_stack()
    if Psi.shape[1] != rho_prev.shape[0]:
        raise DimensionError(f"Psi has {Psi.shape[1]} columns, rho has {rho_prev.shape[0]}")
    return Psi @ rho_prev + win.last()


def project_frobenius(M: DapParams, R_M: float) -> DapParams:
    """Radial projection onto the Frobenius ball of radius R_M."""
    if R_M <= 0:
        raise ConfigError(f"R_M must be positive, got {R_M}")
    norm = M.frobenius()
    if norm <= R_M:
        return DapParams(M.mat.copy(), M.d_x, max(R_M, 1.0))
    return DapParams(M.mat * (R_M / norm), M.d_x, max(R_M, 1.0))


def dap_from_linear(K: np.ndarray, sys: LinearSystem, H: int) -> DapParams:
    """Comparator construction M^[h] = K (A + B K)^{h-1} for a certified stable loop."""
    K = np.atleast_2d(np.asarray(K, dtype=float))
    certify_strong_stability(K, sys)  # raises when A + BK is not certifiably stable
    A_cl = sys.A + sys.B @ K
    blocks = []
    power = np.eye(sys.d_x)
    for _ in range(H):
        blocks.append(K @ power)
        power = A_cl @ power
    M = DapParams.from_blocks(blocks)
    M.R_M = max(1.0, M.frobenius())
    return M


def build_psi_star(A: np.ndarray, B: np.ndarray, H: int) -> np.ndarray:
    """Unrolled model [A^{H-1}B ... AB B | A^{H-1} ... A] mapping rho to the state."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    d_x = A.shape[0]
    powers = [np.eye(d_x)]
    for _ in range(H - 1):
        powers.append(A @ powers[-1])
    u_part = [powers[H - 1 - j] @ B for j in range(H)]
    w_part = [powers[H - 1 - j] for j in range(H - 1)]
    return np.concatenate(u_part + w_part, axis=1) if w_part or u_part else np.zeros((d_x, 0))
