"""Dynamic factor model x_i = Lambda f_i + eps_i + mu and an edge-threshold factor count."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .autocov import gamma_x
from .datagen import Dist, Panel, PanelSpec, generate_panel, make_rng
from .linalg import sym_eigvals
from .lsd import support_endpoints

__all__ = [
    "FactorModelSpec",
    "FactorSample",
    "simulate_factor_model",
    "simulate_factor_panel",
    "factor_eigenvalues",
    "estimate_num_factors",
]


@dataclass(frozen=True)
class FactorModelSpec:
    p: int
    T: int
    m: int = 0
    loading_scale: float = 1.0
    factor_ar_coefficient: float = 0.5
    mu: NDArray[np.float64] | None = None
    noise: Dist = Dist.GAUSSIAN
    seed: int = 0
    df: float = 6.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "noise", Dist(self.noise))
        if not 0 <= self.m < self.p:
            raise ValueError(f"need 0 <= m < p, got m={self.m}, p={self.p}")
        if not -1.0 < self.factor_ar_coefficient < 1.0:
            raise ValueError(f"factor AR coefficient must lie in (-1, 1), got {self.factor_ar_coefficient}")
        if self.loading_scale < 0:
            raise ValueError(f"loading_scale must be >= 0, got {self.loading_scale}")
        if self.mu is not None and np.shape(self.mu) != (self.p,):
            raise ValueError(f"mu must have length p={self.p}")


@dataclass(frozen=True)
class FactorSample:
    panel: Panel  # observed x_0 .. x_T
    noise: Panel
    factors: NDArray[np.float64]  # m x (T+1)
    loadings: NDArray[np.float64]  # p x m


def simulate_factor_model(spec: FactorModelSpec) -> FactorSample:
    """Draw noise, loadings and AR(1) factors from independent child streams.

    Loadings are ``loading_scale`` times an orthonormal p x m basis (QR of a
    Gaussian draw), so Lambda has rank m.  Factors are stationary AR(1) with
    unit marginal variance.
    """
    noise_ss, load_ss, fac_ss = np.random.SeedSequence(spec.seed).spawn(3)
    noise_seed = int(noise_ss.generate_state(1, dtype=np.uint64)[0])
    noise = generate_panel(PanelSpec(spec.p, spec.T, 1, spec.noise, noise_seed, spec.df))
    n_obs = spec.T + 1

    if spec.m > 0:
        raw = make_rng(load_ss).standard_normal((spec.p, spec.m)) / np.sqrt(spec.p)
        q, _ = np.linalg.qr(raw)
        loadings = spec.loading_scale * q
        rng = make_rng(fac_ss)
        phi = spec.factor_ar_coefficient
        shocks = rng.standard_normal((spec.m, n_obs))
        factors = np.empty((spec.m, n_obs))
        factors[:, 0] = shocks[:, 0]
        innov = np.sqrt(1.0 - phi * phi)
        for t in range(1, n_obs):
            factors[:, t] = phi * factors[:, t - 1] + innov * shocks[:, t]
        data = noise.data + loadings @ factors
    else:
        loadings = np.zeros((spec.p, 0))
        factors = np.zeros((0, n_obs))
        data = noise.data.copy()
    if spec.mu is not None:
        data = data + np.asarray(spec.mu, dtype=np.float64)[:, None]
    panel = Panel(data, 1, meta={"factor_model": True, "m": spec.m, "seed": spec.seed})
    return FactorSample(panel=panel, noise=noise, factors=factors, loadings=loadings)


def simulate_factor_panel(spec: FactorModelSpec) -> Panel:
    return simulate_factor_model(spec).panel


def factor_eigenvalues(panel: Panel | NDArray[np.float64], method: str = "jacobi") -> NDArray[np.float64]:
    """Eigenvalues of Gamma_x Gamma_x^t (squared singular values), descending."""
    G = gamma_x(panel)
    return sym_eigvals(G @ G.T, method=method).values


def estimate_num_factors(
    panel: Panel | NDArray[np.float64], delta: float = 0.1, method: str = "jacobi"
) -> int:
    """Count squared singular values of Gamma_x above b(p/T) * (1 + delta)."""
    data = panel.data if isinstance(panel, Panel) else np.asarray(panel, dtype=np.float64)
    p, n_obs = data.shape
    if n_obs < 2:
        raise ValueError("need at least 2 time points")
    _, b = support_endpoints(p / (n_obs - 1))
    return int(np.sum(factor_eigenvalues(data, method) > b * (1.0 + delta)))
