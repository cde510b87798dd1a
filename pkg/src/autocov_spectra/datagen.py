"""Synthetic noise panels and ingestion of observed panels.

Random draws use numpy's ``Generator`` over the counter-based ``Philox``
bit generator.  A panel seed maps to ``Philox(SeedSequence(seed))``, so two
identical :class:`PanelSpec` objects always yield bit-identical data, and
replicate seeds are spawned from a parent ``SeedSequence`` (see
:func:`replicate_seeds`).
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "Dist",
    "Truncation",
    "PanelSpec",
    "Panel",
    "make_rng",
    "replicate_seeds",
    "generate_panel",
    "standardize_panel",
    "read_panel_csv",
    "fourth_moment",
]


class Dist(str, enum.Enum):
    GAUSSIAN = "gaussian"
    RADEMACHER = "rademacher"
    CENTERED_UNIFORM = "uniform"
    STUDENT_T = "student-t"


@dataclass(frozen=True)
class Truncation:
    eta: float

    def __post_init__(self) -> None:
        if not self.eta > 0:
            raise ValueError(f"truncation eta must be positive, got {self.eta}")


@dataclass(frozen=True)
class PanelSpec:
    p: int
    T: int
    tau: int = 1
    dist: Dist = Dist.GAUSSIAN
    seed: int = 0
    df: float = 6.0
    truncation: Truncation | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "dist", Dist(self.dist))
        for name in ("p", "T", "tau"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value}")
        if self.tau >= self.T:
            raise ValueError(f"lag tau={self.tau} must be smaller than T={self.T}")
        if self.dist is Dist.STUDENT_T and self.df < 5:
            raise ValueError(f"student-t needs df >= 5 for a finite fourth moment, got {self.df}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class Panel:
    """p x (T + tau) matrix whose column j holds eps_j."""

    data: NDArray[np.float64]
    tau: int
    spec: PanelSpec | None = None
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValueError("panel data must be two-dimensional")
        if self.tau < 1:
            raise ValueError(f"tau must be >= 1, got {self.tau}")
        if data.shape[1] < self.tau + 1:
            raise ValueError(f"panel has {data.shape[1]} columns, need at least tau+1={self.tau + 1}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def p(self) -> int:
        return self.data.shape[0]

    @property
    def T(self) -> int:
        return self.data.shape[1] - self.tau


def make_rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def replicate_seeds(seed: int, n: int) -> list[int]:
    """Independent 64-bit seeds for ``n`` replicates, stable in ``seed``."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]


def fourth_moment(dist: Dist | str, df: float = 6.0) -> float:
    dist = Dist(dist)
    if dist is Dist.GAUSSIAN:
        return 3.0
    if dist is Dist.RADEMACHER:
        return 1.0
    if dist is Dist.CENTERED_UNIFORM:
        return 1.8
    return 3.0 * (df - 2.0) / (df - 4.0)


def _draw(rng: np.random.Generator, dist: Dist, shape: tuple[int, int], df: float) -> NDArray[np.float64]:
    if dist is Dist.GAUSSIAN:
        return rng.standard_normal(shape)
    if dist is Dist.RADEMACHER:
        return 2.0 * rng.integers(0, 2, size=shape).astype(np.float64) - 1.0
    if dist is Dist.CENTERED_UNIFORM:
        return rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), size=shape)
    return rng.standard_t(df, size=shape) / math.sqrt(df / (df - 2.0))


def generate_panel(spec: PanelSpec) -> Panel:
    rng = make_rng(spec.seed)
    data = _draw(rng, spec.dist, (spec.p, spec.T + spec.tau), spec.df)
    if spec.truncation is not None:
        level = spec.truncation.eta * spec.T**0.25
        data = np.clip(data, -level, level)
        sd = data.std()
        if sd == 0:
            raise ValueError("truncation collapsed the panel to a constant")
        data = (data - data.mean()) / sd
    return Panel(data, spec.tau, spec)


def standardize_panel(panel: Panel) -> Panel:
    """Center and scale each row to empirical mean 0, variance 1.

    Variance uses divisor n (population convention).
    """
    data = panel.data
    mean = data.mean(axis=1, keepdims=True)
    centered = data - mean
    sd = np.sqrt((centered**2).mean(axis=1, keepdims=True))
    scale = np.abs(mean) + 1.0
    bad = np.flatnonzero(sd[:, 0] <= 1e-14 * scale[:, 0])
    if bad.size:
        raise ValueError(f"row {int(bad[0])} is constant; cannot standardize")
    meta = dict(panel.meta, standardized=True)
    return replace(panel, data=centered / sd, meta=meta)


def read_panel_csv(path: str | Path, tau: int, header: bool = False) -> Panel:
    """Read a numeric CSV (rows = variables, columns = time points).

    The first column is eps_0.  Row and column numbers in error messages are
    1-based and count data rows only.
    """
    path = Path(path)
    rows: list[list[float]] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        if header:
            next(reader, None)
        for i, raw in enumerate(reader, start=1):
            if not raw or all(not cell.strip() for cell in raw):
                continue
            row = []
            for j, cell in enumerate(raw, start=1):
                try:
                    row.append(float(cell))
                except ValueError:
                    raise ValueError(f"{path}: non-numeric cell {cell!r} at ({i},{j})") from None
            if rows and len(row) != len(rows[0]):
                raise ValueError(f"{path}: ragged row {i} has {len(row)} columns, expected {len(rows[0])}")
            rows.append(row)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    ncol = len(rows[0])
    if ncol - tau < 1:
        raise ValueError(
            f"{path}: {ncol} columns with tau={tau}: T would be {ncol - tau}, need at least tau+1 columns"
        )
    return Panel(np.asarray(rows), tau, meta={"source": str(path)})
