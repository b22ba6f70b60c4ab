"""Symmetric eigenvalue machinery.

Two routes with different contracts: a cyclic Jacobi solver that certifies
spectra exactly at desk scale, and a shifted power iteration that exits early
as soon as its Rayleigh value drops below a caller-supplied threshold.  The
power route is allowed to give up; the Jacobi route is not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .symcore import SymmetricMatrix, gershgorin_bound

try:  # optional JIT; the kernel runs unchanged without it, just slower
    from numba import njit

    HAVE_NUMBA = True
except Exception:  # pragma: no cover - depends on the environment
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap

__all__ = [
    "EigenConvergenceError",
    "EigenDecomposition",
    "PowerResult",
    "jacobi_eigen",
    "min_eig_power",
    "certified_min_eig",
    "default_power_budget",
]

JACOBI_SWEEP_CAP = 30
POWER_ACCURACY = 0.1  # resolution parameter behind the default budget


class EigenConvergenceError(RuntimeError):
    """The rotation sweep cap was hit before the off-diagonal mass died."""


@dataclass(frozen=True)
class EigenDecomposition:
    """Full spectrum, values ascending, eigenvectors as matching columns."""

    values: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        for name in ("values", "vectors"):
            a = np.array(getattr(self, name), dtype=float)
            a.flags.writeable = False
            object.__setattr__(self, name, a)


@dataclass(frozen=True)
class PowerResult:
    """Outcome of the shifted power probe.

    ``exited_early`` means the Rayleigh value crossed the requested threshold
    and ``vector`` can be used as a pivot direction.  Otherwise the fields
    carry the best (smallest) Rayleigh value seen, which is only an upper
    bound on the minimum eigenvalue and decides nothing by itself.
    """

    rayleigh: float
    vector: np.ndarray
    iterations: int
    exited_early: bool


@njit(cache=True)
def _jacobi_sweeps(a, vec, off_target, max_sweeps):  # pragma: no cover - exercised via jacobi_eigen
    n = a.shape[0]
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                off += a[i, j] * a[i, j]
        off = math.sqrt(2.0 * off)
        if off <= off_target:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                for i in range(n):
                    aip = a[i, p]
                    aiq = a[i, q]
                    a[i, p] = c * aip - s * aiq
                    a[i, q] = s * aip + c * aiq
                for i in range(n):
                    api = a[p, i]
                    aqi = a[q, i]
                    a[p, i] = c * api - s * aqi
                    a[q, i] = s * api + c * aqi
                for i in range(n):
                    vip = vec[i, p]
                    viq = vec[i, q]
                    vec[i, p] = c * vip - s * viq
                    vec[i, q] = s * vip + c * viq
    off = 0.0
    for i in range(n - 1):
        for j in range(i + 1, n):
            off += a[i, j] * a[i, j]
    off = math.sqrt(2.0 * off)
    if off <= off_target:
        return max_sweeps
    return -1


def jacobi_eigen(a: SymmetricMatrix, tol: float = 1e-12) -> EigenDecomposition:
    """Diagonalize by cyclic rotation sweeps.

    Sweeps rotate every off-diagonal pair in row order until the off-diagonal
    Frobenius mass drops below ``tol`` times the Frobenius norm of the input.
    Symmetric input converges quadratically; the sweep cap exists purely as a
    numerical tripwire.
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    n = a.n
    if n == 1:
        return EigenDecomposition(a.entries[0].copy(), np.eye(1))
    scale = a.frob
    if scale == 0.0:
        return EigenDecomposition(np.zeros(n), np.eye(n))
    work = np.array(a.entries, dtype=float)
    vec = np.eye(n)
    sweeps = _jacobi_sweeps(work, vec, tol * scale, JACOBI_SWEEP_CAP)
    if sweeps < 0:
        raise EigenConvergenceError(
            f"off-diagonal mass still above {tol:g} * ||A||_F after {JACOBI_SWEEP_CAP} sweeps"
        )
    values = np.diag(work).copy()
    order = np.argsort(values, kind="stable")
    return EigenDecomposition(values[order], vec[:, order])


def default_power_budget(n: int) -> int:
    """Iteration allowance scaling with log of the order."""
    return int(math.ceil(10.0 * math.log(max(n, 2)) / POWER_ACCURACY))


def min_eig_power(
    a: SymmetricMatrix,
    threshold: float,
    budget: int | None = None,
    rng=0,
) -> PowerResult:
    """Probe for a direction with Rayleigh value at most ``threshold``.

    Runs power iteration on the spread-reversing shift sigma*I - A, sigma the
    Gershgorin bound, from a random sign vector.  Each iterate's Rayleigh
    value against A is checked and the probe returns the moment it crosses the
    threshold.  Exhausting the budget is an inconclusive outcome, never a
    certificate of absence.
    """
    n = a.n
    if budget is None:
        budget = default_power_budget(n)
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    sigma = gershgorin_bound(a)
    if sigma == 0.0:
        # zero matrix: every direction has Rayleigh value exactly 0
        v = np.zeros(n)
        v[0] = 1.0
        return PowerResult(0.0, v, 0, 0.0 <= threshold)
    mat = a.entries

    def draw():
        u = gen.integers(0, 2, size=n) * 2.0 - 1.0
        return u / math.sqrt(n)

    u = draw()
    ray = float(u @ mat @ u)
    best_ray, best_u = ray, u
    if ray <= threshold:
        return PowerResult(ray, u, 0, True)
    resample_left = 3
    for k in range(1, budget + 1):
        w = sigma * u - mat @ u
        nw = float(np.linalg.norm(w))
        if nw <= 1e-14 * sigma:
            # landed on the top eigenspace of A, which the shift annihilates
            if resample_left == 0:
                break
            resample_left -= 1
            u = draw()
            continue
        u = w / nw
        ray = float(u @ mat @ u)
        if ray < best_ray:
            best_ray, best_u = ray, u
        if ray <= threshold:
            return PowerResult(ray, u, k, True)
    return PowerResult(best_ray, best_u, budget, False)


def certified_min_eig(a: SymmetricMatrix, tol: float = 1e-12) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue and a matching eigenvector, Jacobi-backed."""
    dec = jacobi_eigen(a, tol)
    return float(dec.values[0]), dec.vectors[:, 0].copy()
