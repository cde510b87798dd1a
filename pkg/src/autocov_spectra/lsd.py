"""Limiting singular-value laws of the lag-tau sample autocovariance matrix.

Two laws are handled, both indexed by the aspect ratio ``c = lim p/T``:

* ``Law.B`` -- the limit of the ESD of the T x T matrix ``B``.  Its Stieltjes
  transform x(alpha) solves
  ``alpha^2 x^3 - 2 alpha (c-1) x^2 + ((c-1)^2 - alpha) x - 1 = 0``
  and it carries an atom ``1 - c`` at zero when c < 1.
* ``Law.A`` -- the limit of the ESD of ``A = C C^t`` (p x p), i.e. of the
  squared singular values of C.  Its transform y(alpha) solves
  ``alpha^2 c^2 y^3 + alpha c (c-1) y^2 - alpha y - 1 = 0``;
  continuous part ``f / c`` and an atom ``1 - 1/c`` at zero when c > 1.

Densities are available by two routes that share no code: the closed-form
expression in radicals (:func:`density`) and Stieltjes inversion of the cubic
root (:func:`density_via_inversion`).
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from .linalg import NumericalError

__all__ = [
    "Law",
    "LsdModel",
    "StieltjesSolution",
    "QuadratureError",
    "raw_support_endpoints",
    "support_endpoints",
    "point_mass",
    "continuous_mass",
    "cubic_coefficients",
    "solve_stieltjes",
    "density",
    "density_via_inversion",
    "cdf",
    "moments",
    "stieltjes_by_quadrature",
    "density_curve",
    "density_csv",
    "write_density_csv",
]

INVERSION_EPS = 1e-7
QUAD_TOL = 1e-10
RADICAND_TOL = 1e-9
SMALL_U = 1e-6
RICHARDSON_TOL = 1e-4
CDF_TABLE_POINTS = 1500


class Law(str, enum.Enum):
    A = "A"
    B = "B"


class QuadratureError(NumericalError):
    def __init__(self, message: str, estimate: float) -> None:
        super().__init__(f"{message} (achieved estimate {estimate!r})")
        self.estimate = estimate


def _check_c(c: float) -> float:
    c = float(c)
    if not c > 0 or not math.isfinite(c):
        raise ValueError(f"aspect ratio c must be positive and finite, got {c}")
    return c


def raw_support_endpoints(c: float) -> tuple[float, float]:
    c = _check_c(c)
    root = (1.0 + 8.0 * c) ** 1.5
    base = -1.0 + 20.0 * c + 8.0 * c * c
    return (base - root) / 8.0, (base + root) / 8.0


def support_endpoints(c: float) -> tuple[float, float]:
    """Edges of the continuous part, with the lower edge clamped to 0 for c <= 1."""
    a, b = raw_support_endpoints(c)
    if c <= 1:
        a = 0.0
    return a, b


def point_mass(c: float, law: Law | str) -> float:
    c = _check_c(c)
    if Law(law) is Law.B:
        return max(0.0, 1.0 - c)
    return max(0.0, 1.0 - 1.0 / c)


# ---------------------------------------------------------------------------
# Stieltjes transform: roots of the cubic


@dataclass(frozen=True)
class StieltjesSolution:
    alpha: complex
    value: complex
    law: Law
    residual: float


def cubic_coefficients(alpha: complex, c: float, law: Law | str) -> list[complex]:
    if Law(law) is Law.B:
        return [alpha * alpha, -2.0 * alpha * (c - 1.0), (c - 1.0) ** 2 - alpha, -1.0 + 0j]
    return [alpha * alpha * c * c, alpha * c * (c - 1.0), -alpha, -1.0 + 0j]


def _polish(coeffs: list[complex], x: complex, steps: int = 2) -> complex:
    a3, a2, a1, a0 = coeffs
    for _ in range(steps):
        f = ((a3 * x + a2) * x + a1) * x + a0
        df = (3.0 * a3 * x + 2.0 * a2) * x + a1
        if df == 0:
            break
        x = x - f / df
    return x


def _residual(coeffs: list[complex], x: complex) -> float:
    a3, a2, a1, a0 = coeffs
    return abs(((a3 * x + a2) * x + a1) * x + a0)


def _residual_tol(coeffs: list[complex], alpha: complex, x: complex) -> float:
    # 1e-10 (1 + |alpha|^3) unless the individual terms are so large that
    # rounding alone exceeds it (alpha next to an atom at 0, where |m| ~ 1/|alpha|).
    scale = max(abs(a) * abs(x) ** (3 - i) for i, a in enumerate(coeffs))
    return max(1e-10 * (1.0 + abs(alpha) ** 3), 64.0 * np.finfo(float).eps * scale)


def _roots(alpha: complex, c: float, law: Law) -> tuple[list[complex], NDArray[np.complex128]]:
    coeffs = cubic_coefficients(alpha, c, law)
    roots = np.array([_polish(coeffs, complex(r)) for r in np.roots(coeffs)])
    return coeffs, roots


def _admissible(alpha: complex, roots: NDArray[np.complex128]) -> NDArray[np.bool_]:
    # Necessary conditions for the transform of a probability law on [0, inf):
    # Im m > 0, Im m >= Im(alpha) |m|^2 (Cauchy-Schwarz), Im(alpha m) >= 0.
    v = alpha.imag
    mod2 = np.abs(roots) ** 2
    return (
        (roots.imag > 1e-300)
        & (roots.imag - v * mod2 >= -1e-6 * v * mod2)
        & ((alpha * roots).imag >= -1e-9 * np.abs(alpha * roots))
    )


def _continue_branch(alpha: complex, c: float, law: Law) -> complex:
    """Follow the admissible root from a well-separated alpha down to ``alpha``."""
    u, v = alpha.real, alpha.imag
    start = max(1.0, abs(u))
    heights = np.geomspace(start, v, num=max(2, int(np.ceil(np.log10(start / v) * 4)) + 1))
    current = None
    for h in heights:
        _, roots = _roots(complex(u, h), c, law)
        if current is None:
            ok = _admissible(complex(u, h), roots)
            if ok.sum() != 1:
                raise NumericalError(f"no unique admissible root at alpha={complex(u, h)}: {roots}")
            current = complex(roots[ok][0])
        else:
            current = complex(roots[np.argmin(np.abs(roots - current))])
    return current


def solve_stieltjes(alpha: complex, c: float, law: Law | str = Law.B) -> StieltjesSolution:
    """Stieltjes transform of the limiting law at ``alpha`` (Im alpha > 0).

    All three roots of the cubic come from its companion matrix and are
    Newton-polished.  The root kept is the one that can be the transform of a
    probability law on [0, inf); when rounding leaves more than one such
    candidate (only for Im alpha below ~1e-10) the branch is continued in from
    larger Im alpha.
    """
    alpha = complex(alpha)
    c = _check_c(c)
    law = Law(law)
    if not alpha.imag > 0:
        raise ValueError(f"alpha must lie in the upper half-plane, got {alpha}")
    coeffs, roots = _roots(alpha, c, law)
    ok = _admissible(alpha, roots)
    if ok.sum() == 1:
        value = complex(roots[ok][0])
    elif ok.sum() == 0:
        raise NumericalError(f"no root with positive imaginary part at alpha={alpha}: roots {roots.tolist()}")
    else:
        cand = roots[ok]
        good = np.array([_residual(coeffs, x) <= _residual_tol(coeffs, alpha, x) for x in cand])
        if good.sum() == 1:
            value = complex(cand[good][0])
        else:
            value = _continue_branch(alpha, c, law)
    residual = _residual(coeffs, value)
    tol = _residual_tol(coeffs, alpha, value)
    if residual > tol:
        raise NumericalError(f"cubic residual {residual:.3e} exceeds {tol:.3e} at alpha={alpha}")
    return StieltjesSolution(alpha=alpha, value=value, law=law, residual=residual)


# ---------------------------------------------------------------------------
# Densities


def _closed_form_b(u: NDArray[np.float64], c: float) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Closed-form f(u) of the B-law on u > 0, plus the inner bracket."""
    q = c - 1.0
    poly = u * (-4.0 * u * u + (-1.0 + 4.0 * c * (5.0 + 2.0 * c)) * u - 4.0 * c * q**3)
    scale = 1.0 + np.abs(u) ** 3 + 4.0 * c * abs(q) ** 3
    if np.any(poly < -RADICAND_TOL * scale):
        raise ValueError("d(u) radicand negative inside the support")
    d = -2.0 * q**3 + 9.0 * (1.0 + 2.0 * c) * u + 3.0 * math.sqrt(3.0) * np.sqrt(np.maximum(poly, 0.0))
    d3 = np.cbrt(d)
    lin = 3.0 * u + q * q
    bracket = (
        -u
        - 5.0 * q * q / 3.0
        + 2.0 ** (4.0 / 3.0) * lin * q / (3.0 * d3)
        + 2.0 ** (2.0 / 3.0) * q * d3 / 3.0
        + (-8.0 * q + 2.0 * 2.0 ** (1.0 / 3.0) * lin / d3 + 2.0 ** (2.0 / 3.0) * d3) ** 2 / 48.0
    )
    return np.sqrt(np.maximum(bracket, 0.0)) / (np.pi * u), bracket


def _inside(u: NDArray[np.float64], c: float) -> NDArray[np.bool_]:
    lo, b = support_endpoints(c)
    return (u > lo) & (u <= b) & (u > 0)


def density(u: ArrayLike, c: float, law: Law | str = Law.A) -> NDArray[np.float64] | float:
    """Closed-form density of the continuous part (0 outside the support).

    For the A-law this is f(u) / c.  Points where the bracket under the outer
    square root comes out negative beyond rounding are re-evaluated by
    Stieltjes inversion, with a warning.
    """
    c = _check_c(c)
    law = Law(law)
    scalar = np.ndim(u) == 0
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    out = np.zeros_like(u)
    mask = _inside(u, c)
    if mask.any():
        f, bracket = _closed_form_b(u[mask], c)
        bad = bracket < -RADICAND_TOL * (1.0 + u[mask] + (c - 1.0) ** 2)
        if bad.any():
            warnings.warn(
                f"closed-form density radicand negative at {int(bad.sum())} point(s); using inversion",
                RuntimeWarning,
                stacklevel=2,
            )
            f[bad] = [density_via_inversion(x, c, Law.B) for x in u[mask][bad]]
        if law is Law.A:
            f = f / c
        out[mask] = f
    return float(out[0]) if scalar else out


def _density_on_axis(u: float, c: float, law: Law) -> float:
    """Density from the complex-conjugate root pair of the A-law cubic at real u.

    The A-law transform has no atom at 0 when c < 1, so near the origin its
    root is dominated by the imaginary part and stays well conditioned.
    """
    if u <= 1e-100:
        # u^2 underflows; every caller weights this point by a positive power of u
        return 0.0
    coeffs = cubic_coefficients(complex(u), c, Law.A)
    roots = [_polish(coeffs, complex(r)) for r in np.roots(coeffs)]
    f = max(abs(r.imag) for r in roots) / math.pi
    return c * f if law is Law.B else f


def _quad_density(c: float, law: Law):
    # Below SMALL_U the closed form's bracket is of order u and drowns in
    # rounding for c < 1; the on-axis cubic root is exact to working precision.
    def dens(x: float) -> float:
        if c < 1.0 and 0.0 < x < SMALL_U:
            return _density_on_axis(x, c, law)
        return density(x, c, law)

    return dens


def density_via_inversion(u: float, c: float, law: Law | str = Law.A, eps: float = INVERSION_EPS) -> float:
    """Im m(u + i eps) / pi for the continuous part.

    The value is compared with the one at 2 eps; a gap above
    ``RICHARDSON_TOL`` means eps is too coarse for this u and raises.
    """
    c = _check_c(c)
    law = Law(law)
    if u <= 0:
        return 0.0
    f1 = solve_stieltjes(complex(u, eps), c, law).value.imag / math.pi
    f2 = solve_stieltjes(complex(u, 2.0 * eps), c, law).value.imag / math.pi
    if abs(f1 - f2) > RICHARDSON_TOL:
        raise NumericalError(
            f"inversion at u={u} not converged: eps gives {f1:.6g}, 2 eps gives {f2:.6g}; try a smaller eps"
        )
    return max(f1, 0.0)


# ---------------------------------------------------------------------------
# Integrals against the law


def _integrate(func, lo: float, hi: float, c: float) -> float:
    """Integrate ``func`` over [lo, hi] inside the support."""
    if hi <= lo:
        return 0.0
    if c <= 1.0:
        # u = t^6 turns the u^{-1/2} (c < 1) and u^{-2/3} (c = 1) poles into
        # smooth integrands.
        def integrand(t: float) -> float:
            return func(t**6) * 6.0 * t**5

        lo_t, hi_t = lo ** (1.0 / 6.0), hi ** (1.0 / 6.0)
    else:
        integrand, lo_t, hi_t = func, lo, hi
    value, err, info = integrate.quad(
        integrand, lo_t, hi_t, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200, full_output=1
    )[:3]
    if err > 1e-8 * max(1.0, abs(value)):
        raise QuadratureError(f"quadrature on [{lo}, {hi}] did not converge (error {err:.2e})", value)
    return float(value)


def cdf(u: ArrayLike, c: float, law: Law | str = Law.A) -> NDArray[np.float64] | float:
    """Distribution function including the atom at zero.

    Vector input is sorted and integrated interval by interval, so the cost is
    one quadrature per point rather than one per point over the whole support.
    """
    c = _check_c(c)
    law = Law(law)
    scalar = np.ndim(u) == 0
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    lo, b = support_endpoints(c)
    mass = point_mass(c, law)

    dens = _quad_density(c, law)
    order = np.argsort(u)
    clipped = np.clip(u[order], lo, b)
    pieces = np.empty_like(clipped)
    prev = lo
    for i, x in enumerate(clipped):
        pieces[i] = _integrate(dens, prev, x, c)
        prev = x
    cont = np.cumsum(pieces)
    out = np.empty_like(u)
    out[order] = np.where(u[order] >= 0, mass, 0.0) + cont
    out = np.clip(out, 0.0, 1.0)
    out[u >= b] = 1.0
    return float(out[0]) if scalar else out


def continuous_mass(c: float, law: Law | str = Law.A) -> float:
    c = _check_c(c)
    lo, b = support_endpoints(c)
    return _integrate(_quad_density(c, Law(law)), lo, b, c)


def moments(c: float, law: Law | str = Law.A, k: int = 1) -> float:
    """k-th moment of the limiting law by quadrature; k = 0 gives total mass."""
    c = _check_c(c)
    law = Law(law)
    if k < 0:
        raise ValueError(f"moment order must be >= 0, got {k}")
    lo, b = support_endpoints(c)
    dens = _quad_density(c, law)
    cont = _integrate(lambda x: x**k * dens(x), lo, b, c)
    return cont + (point_mass(c, law) if k == 0 else 0.0)


def stieltjes_by_quadrature(alpha: complex, c: float, law: Law | str = Law.A) -> complex:
    """int dF(u) / (u - alpha), atom included, by direct quadrature."""
    c = _check_c(c)
    law = Law(law)
    alpha = complex(alpha)
    lo, b = support_endpoints(c)
    dens = _quad_density(c, law)
    re = _integrate(lambda x: dens(x) * ((x - alpha) ** -1).real, lo, b, c)
    im = _integrate(lambda x: dens(x) * ((x - alpha) ** -1).imag, lo, b, c)
    return complex(re, im) + point_mass(c, law) * (-1.0 / alpha)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LsdModel:
    c: float
    law: Law = Law.A

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", _check_c(self.c))
        object.__setattr__(self, "law", Law(self.law))

    @property
    def a(self) -> float:
        return raw_support_endpoints(self.c)[0]

    @property
    def b(self) -> float:
        return raw_support_endpoints(self.c)[1]

    @property
    def edge_low(self) -> float:
        return support_endpoints(self.c)[0]

    @property
    def point_mass_at_zero(self) -> float:
        return point_mass(self.c, self.law)

    def density(self, u: ArrayLike):
        return density(u, self.c, self.law)

    def density_via_inversion(self, u: float, eps: float = INVERSION_EPS) -> float:
        return density_via_inversion(u, self.c, self.law, eps)

    def cdf(self, u: ArrayLike):
        return cdf(u, self.c, self.law)

    def stieltjes(self, alpha: complex) -> StieltjesSolution:
        return solve_stieltjes(alpha, self.c, self.law)

    def moment(self, k: int) -> float:
        return moments(self.c, self.law, k)

    def _to_node_scale(self, u: NDArray[np.float64]) -> NDArray[np.float64]:
        lo, b = self.edge_low, self.b
        if self.c <= 1.0:
            return np.clip(u, 0.0, b) ** (1.0 / 6.0)
        return np.arccos(1.0 - 2.0 * (np.clip(u, lo, b) - lo) / (b - lo)) / np.pi

    @cached_property
    def cdf_table(self) -> tuple[NDArray[np.float64], NDArray[np.float64], PchipInterpolator]:
        """Exact cdf on CDF_TABLE_POINTS nodes, with a monotone interpolant.

        Nodes are uniform in t = u^(1/6) when c <= 1 (where the cdf is smooth
        in t) and cosine-spaced over [a, b] otherwise, so both the pole at 0
        and the square-root edges are resolved.
        """
        lo, b = self.edge_low, self.b
        s = np.linspace(0.0, 1.0, CDF_TABLE_POINTS)
        if self.c <= 1.0:
            s = s * b ** (1.0 / 6.0)
            u = s**6
        else:
            u = lo + (b - lo) * 0.5 * (1.0 - np.cos(np.pi * s))
        F = np.asarray(cdf(u, self.c, self.law))
        F[0] = self.point_mass_at_zero
        F[-1] = 1.0
        return u, F, PchipInterpolator(s, F)

    def cdf_interp(self, u: ArrayLike) -> NDArray[np.float64]:
        """Table-interpolated cdf; within ~1e-5 of :meth:`cdf` and far cheaper."""
        u = np.asarray(u, dtype=np.float64)
        _, _, interp = self.cdf_table
        out = np.clip(interp(self._to_node_scale(u)), 0.0, 1.0)
        out = np.where(u < 0, 0.0, out)
        out = np.where((u >= 0) & (u <= self.edge_low), self.point_mass_at_zero, out)
        return np.where(u >= self.b, 1.0, out)

    def ppf(self, q: ArrayLike) -> NDArray[np.float64]:
        """Inverse cdf by interpolation on the cdf table (sampling helper)."""
        q = np.asarray(q, dtype=np.float64)
        u, F, _ = self.cdf_table
        F, idx = np.unique(F, return_index=True)
        out = np.interp(q, F, u[idx])
        return np.where(q <= self.point_mass_at_zero, 0.0, out)


def density_curve(c: float, law: Law | str = Law.A, n_points: int = 400) -> NDArray[np.float64]:
    """(u, density) rows over the continuous support, sorted in u.

    For c <= 1 the density blows up at 0, so the first even grid cell is
    replaced by log-spaced points reaching down to ``b * 1e-6``.
    """
    c = _check_c(c)
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    lo, b = support_endpoints(c)
    u = np.linspace(lo, b, n_points)
    if c <= 1:
        refine = np.geomspace(b * 1e-6, u[1], 25, endpoint=False)
        u = np.concatenate([refine, u[1:]])
    return np.column_stack([u, density(u, c, law)])


def density_csv(table: NDArray[np.float64]) -> str:
    """CSV text with header ``u,density``; floats use repr so they round-trip."""
    return "u,density\n" + "".join(f"{float(u)!r},{float(f)!r}\n" for u, f in table)


def write_density_csv(path, table: NDArray[np.float64]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(density_csv(table))
