"""Membership of a target vector in the image of the spectraplex.

The solver walks the factored iterate toward the target: assemble the
residual-weighted pivot matrix, ask an escalating oracle (cache scan, shifted
power probe, exact Jacobi) for a direction whose quadratic form clears the
pivot bar, take the distance-minimizing convex step, and prune the factor list
when it grows past the representation bound.  Absence of a pivot is certified
exactly and converts directly into a separating-hyperplane witness.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .chm import (
    FEASIBLE,
    INCONCLUSIVE,
    NOISE_FLOOR,
    WITNESS,
    Hyperplane,
    PointSet,
    default_iteration_cap,
    find_pivot,
)
from .eigen import EigenConvergenceError, certified_min_eig, min_eig_power
from .symcore import (
    ShmInstance,
    SpectraplexPoint,
    SymmetricMatrix,
    _term_images,
    image,
    rank_one_image,
)

__all__ = [
    "Certificate",
    "PivotCache",
    "PivotMatrixAssembly",
    "PivotOutcome",
    "SolveStats",
    "VerificationReport",
    "assemble_pivot_matrix",
    "pivot_oracle",
    "prune_representation",
    "solve_shm",
    "solve_shm_cached",
    "verify_certificate",
]

logger = logging.getLogger(__name__)

PRUNE_SLACK = 8
TERM_DROP_EPS = 1e-14
IMAGE_REFRESH_PERIOD = 1000
CACHE_COS_TOL = 1e-9
MERGE_COS_TOL = 1e-12
ORACLE_MODES = ("power", "exact", "cached-first")


@dataclass
class PivotMatrixAssembly:
    """Residual-weighted combination of the instance matrices.

    ``matrix`` is assembled lazily so cache-scan iterations that never touch
    eigen machinery also never pay the dense combination.  ``threshold`` is
    the pivot bar for quadratic forms; ``strict_threshold`` the tighter one.
    """

    instance: ShmInstance
    target: np.ndarray
    p_image: np.ndarray
    resid: np.ndarray
    threshold: float

    @cached_property
    def matrix(self) -> SymmetricMatrix:
        return SymmetricMatrix(np.tensordot(self.resid, self.instance.stack, axes=1))

    @property
    def strict_threshold(self) -> float:
        return float(self.resid @ self.target)


def _make_assembly(instance: ShmInstance, p_image: np.ndarray, target=None) -> PivotMatrixAssembly:
    if target is None:
        target = instance.b
    resid = p_image - target
    # algebraically (|p'|^2 - |target|^2)/2, written to survive p' near target
    threshold = 0.5 * float(resid @ (p_image + target))
    return PivotMatrixAssembly(instance, target, p_image, resid, threshold)


def assemble_pivot_matrix(instance: ShmInstance, point: SpectraplexPoint) -> PivotMatrixAssembly:
    """Build the pivot matrix and bar for a bound iterate."""
    if point.image is None:
        raise ValueError("point must be bound to the instance (see symcore.bind)")
    return _make_assembly(instance, np.asarray(point.image, dtype=float))


@dataclass(frozen=True)
class PivotOutcome:
    """Either a usable pivot direction or a certified statement that none exists.

    ``found`` with ``vector``/``rayleigh`` set means the direction clears the
    bar as computed by the reporting route (``method`` one of cache, power,
    jacobi).  ``found=False`` always carries a Jacobi-certified ``lambda_min``
    strictly above the bar.
    """

    found: bool
    vector: np.ndarray | None
    rayleigh: float | None
    lambda_min: float | None
    threshold: float
    method: str
    cache_index: int | None = None
    power_iterations: int = 0


class PivotCache:
    """Deduplicated store of pivot directions and their images.

    Two directions count as one when their cosine is within 1e-9 of a sign
    flip, since they generate the same rank-one matrix for our purposes.
    """

    def __init__(self):
        self._vectors: list[np.ndarray] = []
        self._images: list[np.ndarray] = []
        self._vec_arr: np.ndarray | None = None
        self._img_arr: np.ndarray | None = None
        self._point_set: PointSet | None = None

    def __len__(self) -> int:
        return len(self._vectors)

    @property
    def vectors(self) -> np.ndarray:
        if self._vec_arr is None:
            self._vec_arr = np.array(self._vectors)
        return self._vec_arr

    @property
    def images(self) -> np.ndarray:
        if self._img_arr is None:
            self._img_arr = np.array(self._images)
        return self._img_arr

    def point_set(self) -> PointSet:
        if self._point_set is None:
            self._point_set = PointSet(self.images)
        return self._point_set

    def add(self, vector: np.ndarray, img: np.ndarray) -> int:
        """Insert a direction, returning its index (existing on near-duplicates)."""
        v = np.asarray(vector, dtype=float).reshape(-1)
        if self._vectors:
            cos = np.abs(self.vectors @ v)
            hit = int(np.argmax(cos))
            if cos[hit] > 1.0 - CACHE_COS_TOL:
                return hit
        self._vectors.append(v.copy())
        self._images.append(np.asarray(img, dtype=float).copy())
        self._vec_arr = None
        self._img_arr = None
        self._point_set = None
        return len(self._vectors) - 1


def pivot_oracle(
    assembly: PivotMatrixAssembly,
    mode: str = "power",
    cache: PivotCache | None = None,
    rng=0,
    budget: int | None = None,
    strict: bool = False,
) -> PivotOutcome:
    """Search the spectraplex for a pivot direction.

    Escalation order in cached-first mode: scan the cache images with the
    finite-set pivot rule (no matrix work at all), then the shifted power
    probe with one restart, then exact Jacobi.  ``power`` skips the scan,
    ``exact`` goes straight to Jacobi.  A ``found=False`` outcome is always
    Jacobi-certified.
    """
    if mode not in ORACLE_MODES:
        raise ValueError(f"unknown oracle mode {mode!r}")
    thr = assembly.strict_threshold if strict else assembly.threshold
    if mode == "cached-first" and cache is not None and len(cache) > 0:
        hit = find_pivot(cache.point_set(), assembly.target, assembly.p_image, strict=strict)
        if hit is not None:
            idx, img = hit
            score = float(assembly.resid @ img)
            return PivotOutcome(
                True, cache.vectors[idx].copy(), score, None, thr, "cache", cache_index=idx
            )
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    total_power = 0
    if mode != "exact":
        a = assembly.matrix
        for _ in range(2):  # one restart before escalating
            r = min_eig_power(a, thr, budget, gen)
            total_power += r.iterations
            if r.exited_early:
                return PivotOutcome(
                    True, r.vector, r.rayleigh, None, thr, "power", power_iterations=total_power
                )
    lam, vec = certified_min_eig(assembly.matrix)
    if lam <= thr:
        return PivotOutcome(True, vec, lam, lam, thr, "jacobi", power_iterations=total_power)
    return PivotOutcome(False, None, None, lam, thr, "jacobi", power_iterations=total_power)


@dataclass
class SolveStats:
    cache_hits: int = 0
    cache_misses: int = 0
    strict_fallbacks: int = 0
    prunes: int = 0
    jacobi_certs: int = 0


@dataclass
class Certificate:
    """Outcome of a membership run.

    Feasible carries a representation whose image lands within the tolerance
    ball; Witness carries the bisecting hyperplane plus the certified margin
    by which no pivot exists; Inconclusive only reports how far the budgeted
    run got.
    """

    kind: str
    point: SpectraplexPoint
    gap: float
    epsilon: float
    radius_bound: float
    iterations: int
    oracle_calls: int
    hyperplane: Hyperplane | None = None
    eig_margin: float | None = None
    stats: SolveStats = field(default_factory=SolveStats)
    cache: PivotCache | None = None


def _term_limit(instance: ShmInstance) -> int:
    return min(instance.m + 1, instance.n)


class _Iterate:
    """Mutable factored iterate with cached per-term images."""

    def __init__(self, instance: ShmInstance, weights, vectors):
        self.instance = instance
        self.weights = np.array(weights, dtype=float).reshape(-1)
        self.vectors = np.array(vectors, dtype=float)
        self.term_images = _term_images(instance, self.vectors)
        self.image = self.weights @ self.term_images
        self.accepted = 0

    @classmethod
    def from_start(cls, instance: ShmInstance, start) -> "_Iterate":
        if isinstance(start, SpectraplexPoint):
            point = start
        elif start == "rankone-e":
            point = SpectraplexPoint.uniform_rank_one(instance.n)
        elif start == "identity":
            point = SpectraplexPoint.uniform_diagonal(instance.n)
        else:
            raise ValueError(f"unknown start {start!r}")
        if point.n != instance.n:
            raise ValueError("start point order does not match the instance")
        return cls(instance, point.weights, point.vectors)

    def apply(self, vector: np.ndarray, v_image: np.ndarray, alpha: float) -> None:
        self.weights = np.append(self.weights * (1.0 - alpha), alpha)
        self.vectors = np.vstack([self.vectors, vector[None, :]])
        self.term_images = np.vstack([self.term_images, v_image[None, :]])
        self.image = (1.0 - alpha) * self.image + alpha * v_image
        small = self.weights < TERM_DROP_EPS
        if np.any(small):
            keep = ~small
            self.weights = self.weights[keep]
            self.weights = self.weights / self.weights.sum()
            self.vectors = self.vectors[keep]
            self.term_images = self.term_images[keep]
        self.accepted += 1
        if self.accepted % IMAGE_REFRESH_PERIOD == 0:
            self.image = self.weights @ self.term_images

    def prune_if_needed(self) -> bool:
        if self.weights.shape[0] <= _term_limit(self.instance) + PRUNE_SLACK:
            return False
        w, v, ti = _prune_arrays(self.instance, self.weights, self.vectors, self.term_images)
        self.weights, self.vectors, self.term_images = w, v, ti
        self.image = w @ ti
        return True

    def snapshot(self) -> SpectraplexPoint:
        w = self.weights / self.weights.sum()
        img = w @ self.term_images
        return SpectraplexPoint(
            w.copy(), self.vectors.copy(), image=img, term_images=self.term_images.copy()
        )


def _merge_duplicate_factors(w: np.ndarray, v: np.ndarray, ti: np.ndarray):
    t = w.shape[0]
    if t < 2:
        return w, v, ti
    gram = np.abs(v @ v.T)
    absorbed = np.zeros(t, dtype=bool)
    w = w.copy()
    for i in range(t):
        if absorbed[i]:
            continue
        dup = (gram[i] >= 1.0 - MERGE_COS_TOL) & ~absorbed
        dup[: i + 1] = False
        if np.any(dup):
            w[i] += w[dup].sum()
            absorbed |= dup
    keep = ~absorbed
    return w[keep], v[keep], ti[keep]


def _prune_arrays(instance: ShmInstance, w: np.ndarray, v: np.ndarray, ti: np.ndarray):
    from .eigen import jacobi_eigen  # local import keeps module load cheap

    n, m = instance.n, instance.m
    if w.shape[0] > n:
        # spectral route: the dense iterate has rank at most n, so its own
        # eigendecomposition is a representation with at most n factors
        dense = (v.T * w) @ v
        dec = jacobi_eigen(SymmetricMatrix(dense))
        vals = np.clip(dec.values, 0.0, None)
        keep = vals > TERM_DROP_EPS
        vals = vals[keep]
        w = vals / vals.sum()
        v = dec.vectors[:, keep].T.copy()
        ti = _term_images(instance, v)
    while w.shape[0] > m + 1:
        t = w.shape[0]
        mat = np.vstack([ti.T, np.ones((1, t))])
        _, _, vt = np.linalg.svd(mat)
        gamma = vt[-1]
        lead = int(np.argmax(np.abs(gamma) > 1e-9))  # unit norm, so one always clears
        if gamma[lead] < 0.0:
            gamma = -gamma  # canonical orientation: first significant entry positive
        pos = gamma > 0.0
        ratios = w[pos] / gamma[pos]
        j = int(np.argmin(ratios))
        theta = float(ratios[j])
        drop = np.flatnonzero(pos)[j]
        w = w - theta * gamma
        w[drop] = 0.0
        keep = w > 1e-15
        w, v, ti = w[keep], v[keep], ti[keep]
        w = w / w.sum()
    return w, v, ti


def prune_representation(instance: ShmInstance, point: SpectraplexPoint) -> SpectraplexPoint:
    """Rewrite a point with at most min(m+1, n) factors and the same image.

    Near-duplicate factors merge first; a factor count above the order n is
    collapsed through the iterate's own eigendecomposition; what remains is
    squeezed by eliminating affine dependencies among the factor images.  On
    linear-algebra failure the input is returned unchanged with a logged
    warning rather than a corrupted representation.
    """
    if point.n != instance.n:
        raise ValueError("point order does not match the instance")
    ti = point.term_images
    if ti is None:
        ti = _term_images(instance, point.vectors)
    w, v, ti = _merge_duplicate_factors(point.weights, point.vectors, ti)
    if w.shape[0] <= _term_limit(instance):
        if w.shape[0] == point.num_terms and point.term_images is not None:
            return point
        return SpectraplexPoint(w, v, image=w @ ti, term_images=ti)
    try:
        w, v, ti = _prune_arrays(instance, w, v, ti)
    except (np.linalg.LinAlgError, EigenConvergenceError) as err:
        logger.warning("prune left the representation unchanged: %s", err)
        return point
    if logger.isEnabledFor(logging.DEBUG):
        # diagnostic only, never enforced: a support this small always exists
        support = int((math.isqrt(8 * instance.m + 9) - 1) // 2)
        logger.debug("prune kept %d factors (minimal support bound %d)", w.size, support)
    return SpectraplexPoint(w, v, image=w @ ti, term_images=ti)


def _search_pivot(assembly, oracle_mode, cache, gen, strict, stats):
    """One pivot query with the strict-then-plain fallback dance.

    Returns the outcome together with the number of eigen engagements it
    cost (cache hits are free).
    """
    out = pivot_oracle(assembly, oracle_mode, cache, gen, strict=strict)
    calls = 0 if out.method == "cache" else 1
    if strict and not out.found:
        plain = pivot_oracle(assembly, oracle_mode, cache, gen, strict=False)
        calls += 0 if plain.method == "cache" else 1
        if plain.found:
            stats.strict_fallbacks += 1
        return plain, calls
    return out, calls


def _run(instance, epsilon, max_iters, oracle_mode, seed, start, strict, cache):
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if max_iters is None:
        max_iters = default_iteration_cap(epsilon)
    gen = np.random.default_rng(seed)
    it = _Iterate.from_start(instance, start)
    b = instance.b
    radius = instance.radius_bound
    target_gap = epsilon * radius + NOISE_FLOOR * (1.0 + float(np.linalg.norm(b)))
    stats = SolveStats()
    oracle_calls = 0
    iterations = 0
    while True:
        gap = float(np.linalg.norm(it.image - b))
        if gap <= target_gap:
            pt = it.snapshot()
            exact_gap = float(np.linalg.norm(pt.image - b))
            return Certificate(
                FEASIBLE, pt, exact_gap, epsilon, radius, iterations, oracle_calls,
                stats=stats, cache=cache,
            )
        if iterations >= max_iters:
            return Certificate(
                INCONCLUSIVE, it.snapshot(), gap, epsilon, radius, iterations,
                oracle_calls, stats=stats, cache=cache,
            )
        asm = _make_assembly(instance, it.image)
        out, calls = _search_pivot(asm, oracle_mode, cache, gen, strict, stats)
        oracle_calls += calls
        if cache is not None:
            if out.method == "cache":
                stats.cache_hits += 1
            else:
                stats.cache_misses += 1
        if out.method == "jacobi":
            stats.jacobi_certs += 1
        if not out.found:
            margin = float(out.lambda_min - asm.threshold)
            hp = Hyperplane(asm.resid.copy(), asm.threshold)
            return Certificate(
                WITNESS, it.snapshot(), gap, epsilon, radius, iterations, oracle_calls,
                hyperplane=hp, eig_margin=margin, stats=stats, cache=cache,
            )
        v = out.vector
        if out.method == "cache":
            v_img = cache.images[out.cache_index].copy()
        else:
            v_img = rank_one_image(instance, v)
            if cache is not None:
                cache.add(v, v_img)
        d = v_img - it.image
        dd = float(d @ d)
        if dd == 0.0:
            # a true pivot never shares the iterate's image; reaching here
            # means the residual is float noise and the point is as good as done
            return Certificate(
                FEASIBLE, it.snapshot(), gap, epsilon, radius, iterations,
                oracle_calls, stats=stats, cache=cache,
            )
        alpha = min(1.0, max(0.0, float((b - it.image) @ d) / dd))
        it.apply(v, v_img, alpha)
        iterations += 1
        if it.prune_if_needed():
            stats.prunes += 1


def solve_shm(
    instance: ShmInstance,
    epsilon: float,
    max_iters: int | None = None,
    mode: str = "power",
    seed=0,
    start="rankone-e",
    strict: bool = False,
) -> Certificate:
    """Decide membership of the instance target in the spectrahull.

    Parameters
    ----------
    instance : ShmInstance
        Matrix family and target.
    epsilon : float
        Relative tolerance in (0, 1); feasibility means a gap at most
        ``epsilon`` times the instance radius bound.
    max_iters : int, optional
        Pivot-step budget, defaulting to the worst-case feasible cap.
    mode : str
        Pivot oracle mode, ``power`` (probe then exact) or ``exact``;
        ``cached`` delegates to :func:`solve_shm_cached`.
    seed : int or numpy Generator
        Drives the power-probe start vectors only.
    start : str or SpectraplexPoint
        ``rankone-e`` (uniform rank-one), ``identity`` (maximally mixed), or
        an explicit warm-start point.
    strict : bool
        Prefer strict pivots, falling back to plain ones.
    """
    if mode == "cached":
        return solve_shm_cached(instance, epsilon, max_iters, seed, start=start, strict=strict)
    if mode not in ("power", "exact"):
        raise ValueError(f"unknown solve mode {mode!r}")
    return _run(instance, epsilon, max_iters, mode, seed, start, strict, cache=None)


def solve_shm_cached(
    instance: ShmInstance,
    epsilon: float,
    max_iters: int | None = None,
    seed=0,
    start="rankone-e",
    strict: bool = False,
) -> Certificate:
    """Membership with the image-cache driver.

    Every iteration first scans previously seen pivot directions through the
    finite-set pivot rule on their cached images, touching eigen machinery
    only on a scan miss.  Witness outcomes are still certified over the full
    spectraplex, never from the cache alone.
    """
    return _run(instance, epsilon, max_iters, "cached-first", seed, start, strict, PivotCache())


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    violations: int
    checks: tuple[str, ...]


def verify_certificate(
    instance: ShmInstance,
    cert: Certificate,
    sample_count: int = 10000,
    seed=0,
) -> VerificationReport:
    """Audit a decided certificate without trusting its cached numbers.

    Feasible: re-evaluate the representation from its factors and re-check the
    tolerance.  Witness: recompute the pivot matrix, confirm absence by an
    independent exact eigensolve, and hammer the claimed inequalities with
    random rank-one points plus every cached pivot.
    """
    if cert.kind not in (FEASIBLE, WITNESS):
        raise ValueError("only Feasible or Witness certificates can be verified")
    msgs: list[str] = []
    bad = 0

    def note(ok: bool, text: str) -> None:
        nonlocal bad
        msgs.append(("ok " if ok else "FAIL ") + text)
        if not ok:
            bad += 1

    pt = cert.point
    try:
        pt.validate()
        note(True, "representation invariants")
    except ValueError as err:
        note(False, f"representation invariants: {err}")
    tol = 1e-9 * instance.radius_bound + 1e-12
    img = image(instance, pt)
    gap = float(np.linalg.norm(img - instance.b))
    note(abs(gap - cert.gap) <= tol, f"reported gap reproduced ({gap:.3e})")
    if cert.kind == FEASIBLE:
        note(gap <= cert.epsilon * instance.radius_bound + tol, "gap within tolerance ball")
    else:
        note(cert.hyperplane is not None, "hyperplane present")
        asm = _make_assembly(instance, img)
        lam, _ = certified_min_eig(asm.matrix)
        margin = lam - asm.threshold
        note(margin > 0.0, f"certified eigen margin {margin:.3e}")
        if cert.eig_margin is not None:
            note(
                abs(margin - cert.eig_margin) <= 1e-6 * (1.0 + abs(margin)),
                "stored margin consistent",
            )
        gen = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        u = gen.standard_normal((sample_count, instance.n))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        samples = np.einsum("kij,ti,tj->tk", instance.stack, u, u, optimize=True)
        if cert.cache is not None and len(cert.cache) > 0:
            samples = np.vstack([samples, cert.cache.images])
        d_w = np.linalg.norm(samples - img, axis=1)
        d_b = np.linalg.norm(samples - instance.b, axis=1)
        closer = int(np.count_nonzero(d_w >= d_b))
        note(closer == 0, f"witness inequality on {samples.shape[0]} rank-one points")
        if cert.hyperplane is not None:
            hp = cert.hyperplane
            side_hull = samples @ hp.normal - hp.offset
            side_b = float(hp.normal @ instance.b) - hp.offset
            note(
                bool(np.all(side_hull > 0.0) and side_b < 0.0),
                "hyperplane separates samples from the target",
            )
    return VerificationReport(bad == 0, bad, tuple(msgs))
