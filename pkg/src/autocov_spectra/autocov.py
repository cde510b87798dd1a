"""Lag-tau sample autocovariance and the matrices built from it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .datagen import Panel

__all__ = ["AutocovSet", "lag_autocov", "apply_shift", "shift_matrix", "gamma_x", "B_CAP"]

B_CAP = 2000


@dataclass(frozen=True)
class AutocovSet:
    """C = X Y^t / T, A = C C^t and (when T <= cap) B = Y^t Y X^t X / T^2.

    X holds eps_tau .. eps_{T+tau-1}, Y holds eps_0 .. eps_{T-1}.
    """

    C: NDArray[np.float64]
    A: NDArray[np.float64]
    B: NDArray[np.float64] | None
    X: NDArray[np.float64]
    Y: NDArray[np.float64]
    tau: int

    @property
    def p(self) -> int:
        return self.C.shape[0]

    @property
    def T(self) -> int:
        return self.X.shape[1]

    @property
    def c_hat(self) -> float:
        return self.p / self.T

    @property
    def C_tilde(self) -> NDArray[np.float64]:
        """(1/T) X^t X, the T x T Gram matrix of the leading block."""
        return self.X.T @ self.X / self.T


def lag_autocov(panel: Panel, b_cap: int = B_CAP) -> AutocovSet:
    tau, T = panel.tau, panel.T
    Y = panel.data[:, :T]
    X = panel.data[:, tau : tau + T]
    C = X @ Y.T / T
    A = C @ C.T
    A = (A + A.T) / 2
    B = None
    if T <= b_cap:
        B = (Y.T @ Y) @ (X.T @ X) / T**2
    return AutocovSet(C=C, A=A, B=B, X=X, Y=Y, tau=tau)


def apply_shift(k: int, v: NDArray) -> NDArray:
    """Action of the k-th power of the T x T down-shift: out[i] = v[i-k]."""
    if k < 0:
        raise ValueError(f"shift power must be >= 0, got {k}")
    v = np.asarray(v)
    out = np.zeros_like(v)
    T = v.shape[0]
    if k < T:
        out[k:] = v[: T - k]
    return out


def shift_matrix(T: int, k: int) -> NDArray[np.float64]:
    """Dense P_1^k; test helper only, kernels use :func:`apply_shift`."""
    return np.eye(T, k=-k) if k < T else np.zeros((T, T))


def gamma_x(panel_x: NDArray[np.float64] | Panel) -> NDArray[np.float64]:
    """Lag-1 sample autocovariance of a mean-centred observed panel.

    ``panel_x`` has columns x_0 .. x_T; the sample mean over all T+1 columns
    is removed before forming (1/T) sum_j x_j x_{j-1}^t.
    """
    data = panel_x.data if isinstance(panel_x, Panel) else np.asarray(panel_x, dtype=np.float64)
    if data.ndim != 2 or data.shape[1] < 2:
        raise ValueError("gamma_x needs a 2-D panel with at least 2 columns")
    centered = data - data.mean(axis=1, keepdims=True)
    T = data.shape[1] - 1
    return centered[:, 1:] @ centered[:, :-1].T / T
