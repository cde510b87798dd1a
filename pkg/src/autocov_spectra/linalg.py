"""Dense kernels: a Jacobi symmetric eigensolver and complex LU resolvents.

The eigensolver is cyclic Jacobi with the round-robin (parallel) ordering:
each sweep is split into n-1 rounds of n/2 disjoint plane rotations, and the
rotations of one round commute, so they are applied together with array
operations.  Every off-diagonal pair is annihilated once per sweep exactly as
in the row-cyclic variant; only the visiting order differs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "NumericalError",
    "Spectrum",
    "ComplexShiftedTrace",
    "sym_eigvals",
    "jacobi_eigvals",
    "lu_factor",
    "lu_solve",
    "resolvent",
    "complex_resolvent_trace",
]

MAX_SWEEPS = 100
SYMMETRY_TOL = 1e-10


class NumericalError(RuntimeError):
    """A kernel failed to converge or hit a singular pivot."""


@dataclass(frozen=True)
class Spectrum:
    values: NDArray[np.float64]  # sorted descending
    n: int
    tol: float
    sweeps: int = 0

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class ComplexShiftedTrace:
    alpha: complex
    value: complex
    k: int = 0


def _round_robin(n: int) -> list[tuple[NDArray[np.intp], NDArray[np.intp]]]:
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < n and b < n:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=np.intp), np.array(qs, dtype=np.intp)))
        players = [players[0], players[-1], *players[1:-1]]
    return rounds


def _check_symmetric(M: NDArray[np.float64]) -> NDArray[np.float64]:
    M = np.array(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {M.shape}")
    norm = np.abs(M).sum(axis=1).max()
    asym = np.abs(M - M.T).sum(axis=1).max()
    if asym > SYMMETRY_TOL * max(norm, np.finfo(float).tiny):
        raise ValueError(f"matrix is not symmetric: ||M - M^t||_inf = {asym:.3e}")
    return (M + M.T) / 2


def jacobi_eigvals(M: NDArray[np.float64], tol: float = 1e-10, max_sweeps: int = MAX_SWEEPS) -> Spectrum:
    A = _check_symmetric(M)
    n = A.shape[0]
    scale = np.linalg.norm(A)
    rounds = _round_robin(n)

    def off_norm() -> float:
        off = A.copy()
        np.fill_diagonal(off, 0.0)
        return float(np.linalg.norm(off))

    sweeps = 0
    off = off_norm()
    while off > tol * scale and scale > 0:
        if sweeps >= max_sweeps:
            raise NumericalError(
                f"Jacobi did not converge in {max_sweeps} sweeps; off-diagonal norm {off:.3e}"
            )
        for P, Q in rounds:
            apq = A[P, Q]
            nz = apq != 0
            if not nz.any():
                continue
            P, Q, apq = P[nz], Q[nz], apq[nz]
            with np.errstate(over="ignore"):
                theta = (A[Q, Q] - A[P, P]) / (2.0 * apq)
            t = np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0))
            t[theta == 0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            colP, colQ = A[:, P], A[:, Q]
            A[:, P] = c * colP - s * colQ
            A[:, Q] = s * colP + c * colQ
            rowP, rowQ = A[P, :], A[Q, :]
            A[P, :] = c[:, None] * rowP - s[:, None] * rowQ
            A[Q, :] = s[:, None] * rowP + c[:, None] * rowQ
            A[P, Q] = 0.0
            A[Q, P] = 0.0
        sweeps += 1
        off = off_norm()

    values = np.sort(np.diag(A))[::-1].copy()
    return Spectrum(values=values, n=n, tol=tol, sweeps=sweeps)


def sym_eigvals(M: NDArray[np.float64], tol: float = 1e-10, method: str = "jacobi") -> Spectrum:
    """Eigenvalues of a real symmetric matrix, sorted descending.

    ``method="jacobi"`` is the self-contained reference solver;
    ``method="lapack"`` defers to ``numpy.linalg.eigvalsh`` for large runs.
    """
    if method == "jacobi":
        return jacobi_eigvals(M, tol)
    if method == "lapack":
        A = _check_symmetric(M)
        return Spectrum(values=np.linalg.eigvalsh(A)[::-1].copy(), n=A.shape[0], tol=tol)
    raise ValueError(f"unknown eigensolver {method!r}")


def lu_factor(M: NDArray) -> tuple[NDArray[np.complex128], NDArray[np.intp]]:
    """In-place style LU with partial pivoting by largest modulus.

    Returns the packed factors (unit-lower L below the diagonal, U on and
    above it) and the row permutation ``perm`` with ``M[perm] = L @ U``.
    """
    LU = np.array(M, dtype=np.complex128)
    n = LU.shape[0]
    if LU.ndim != 2 or LU.shape[1] != n:
        raise ValueError(f"expected a square matrix, got shape {LU.shape}")
    perm = np.arange(n)
    scale = max(np.abs(LU).max(), np.finfo(float).tiny)
    for k in range(n):
        piv = k + int(np.argmax(np.abs(LU[k:, k])))
        if abs(LU[piv, k]) <= 1e-300 * scale:
            raise NumericalError(f"singular pivot at index {k}")
        if piv != k:
            LU[[k, piv]] = LU[[piv, k]]
            perm[[k, piv]] = perm[[piv, k]]
        LU[k + 1 :, k] /= LU[k, k]
        LU[k + 1 :, k + 1 :] -= np.outer(LU[k + 1 :, k], LU[k, k + 1 :])
    return LU, perm


def lu_solve(LU: NDArray[np.complex128], perm: NDArray[np.intp], rhs: NDArray) -> NDArray[np.complex128]:
    b = np.array(rhs, dtype=np.complex128)[perm]
    n = LU.shape[0]
    for i in range(1, n):
        b[i] -= LU[i, :i] @ b[:i]
    for i in range(n - 1, -1, -1):
        b[i] = (b[i] - LU[i, i + 1 :] @ b[i + 1 :]) / LU[i, i]
    return b


def resolvent(M: NDArray[np.float64], alpha: complex) -> NDArray[np.complex128]:
    """(M - alpha I)^{-1} by complex LU with partial pivoting."""
    alpha = complex(alpha)
    if alpha.imag == 0:
        raise ValueError("alpha must have a nonzero imaginary part")
    M = np.asarray(M, dtype=np.float64)
    n = M.shape[0]
    if M.ndim != 2 or M.shape[1] != n:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    LU, perm = lu_factor(M - alpha * np.eye(n))
    return lu_solve(LU, perm, np.eye(n))


def complex_resolvent_trace(
    M: NDArray[np.float64],
    alpha: complex,
    k: int = 0,
    left: NDArray[np.float64] | None = None,
) -> ComplexShiftedTrace:
    """(1/T) tr(W (M - alpha I)^{-1} P_1^k), W = ``left`` or the identity.

    tr(R P_1^k) picks the k-th superdiagonal of R, so the shift is applied
    as an offset trace rather than a dense product.
    """
    if k < 0:
        raise ValueError(f"shift power must be >= 0, got {k}")
    R = resolvent(M, alpha)
    T = R.shape[0]
    if k >= T:
        return ComplexShiftedTrace(complex(alpha), 0j, k)
    if left is not None:
        R = np.asarray(left) @ R
    return ComplexShiftedTrace(complex(alpha), complex(np.trace(R, offset=k)) / T, k)
