from __future__ import annotations

import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def det_bisection_eigvals(M: np.ndarray, tol: float = 1e-13) -> np.ndarray:
    """Eigenvalues of symmetric M by bisection on a determinant Sturm count.

    The number of sign changes in 1, det(M_1 - x), ..., det(M_n - x), over the
    leading principal submatrices, counts the eigenvalues below x.
    """
    n = M.shape[0]

    bound = np.abs(M).sum(axis=1).max() + 1.0

    def count_below(x: float) -> int:
        shifted = M - x * np.eye(n)
        minors = [1.0] + [np.linalg.det(shifted[:k, :k]) for k in range(1, n + 1)]
        if any(m == 0.0 for m in minors):
            # a vanishing minor breaks the sign count; step just below x
            return count_below(x - 1e-3 * tol * bound)
        return sum(1 for a, b in zip(minors, minors[1:]) if a * b < 0)

    out = []
    for k in range(n):
        lo, hi = -bound, bound
        while hi - lo > tol * bound:
            mid = (lo + hi) / 2
            if count_below(mid) > k:
                hi = mid
            else:
                lo = mid
        out.append((lo + hi) / 2)
    return np.array(out[::-1])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
