"""Independent verification that a selected element really lies in the
Clarke generalized Jacobian.

The generalized Jacobian at x is the convex hull of all limits of
classical Jacobians taken over differentiability points approaching x.
For piecewise-affine functions that hull is spanned by the Jacobians of
the selection patterns active on full-dimensional regions near x, which
this module recovers by dense sampling plus (when the pattern count is
small enough) exhaustive enumeration with a feasibility program per
pattern.  Membership in the hull is decided by a minimum-norm-point
computation, which yields convex weights or a separation margin.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .dcmax import DEFAULT_TOL_ACT, DCMaxFn, active_set, eval_F

__all__ = [
    "LimitingSample",
    "HullCertificate",
    "FiniteDiffResult",
    "BruteForceReport",
    "sample_limiting_jacobians",
    "hull_membership",
    "brute_force_subdifferential",
    "finite_diff_dd",
    "is_affine",
]

DEFAULT_PROBE_RADIUS = 1e-3
DEFAULT_PROBE_COUNT = 4096
DEFAULT_SEED = 42

# Joint active patterns are enumerated exhaustively only while their count
# stays below this cap; beyond it (possible only under massive ties) the
# oracle falls back to sampling alone.
ENUMERATION_CAP = 8192


@dataclass(frozen=True)
class LimitingSample:
    """A differentiability point near x with its classical Jacobian and the
    per-component singleton active indices that produced it."""

    point: np.ndarray
    jacobian: np.ndarray
    active_profile: tuple[tuple[int, int], ...]  # (g piece, h piece) per component


@dataclass(frozen=True)
class HullCertificate:
    """Outcome of a convex-hull membership query.

    ``member`` is None when the solver hit its iteration cap without
    certifying either answer (inconclusive, never reported as False).
    ``violation`` is the Frobenius distance from the query to the hull;
    ``weights`` are convex coefficients over the candidates realizing the
    closest hull point (the query itself when member).
    """

    member: bool | None
    weights: np.ndarray
    violation: float
    iterations: int
    converged: bool


def _ball_samples(rng: np.random.Generator, center: np.ndarray, radius: float, count: int):
    n = center.shape[0]
    direc = rng.standard_normal((count, n))
    direc /= np.linalg.norm(direc, axis=1, keepdims=True)
    radii = radius * rng.random((count, 1)) ** (1.0 / n)
    return center + direc * radii


def sample_limiting_jacobians(
    F: DCMaxFn,
    x,
    radius: float = DEFAULT_PROBE_RADIUS,
    count: int = 512,
    seed: int = DEFAULT_SEED,
) -> list[LimitingSample]:
    """Sample the ball around x and keep points where every max term has a
    unique active piece, recording one classical Jacobian per distinct
    active profile."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    if count < 1:
        raise ValueError("count must be at least 1")
    x = np.asarray(x, dtype=float)
    rng = np.random.default_rng(seed)
    found: dict[tuple, LimitingSample] = {}
    for z in _ball_samples(rng, x, radius, count):
        profile = []
        for i in range(F.m):
            act_g = active_set(F.g[i], z, 0.0)
            act_h = active_set(F.h[i], z, 0.0)
            if len(act_g.indices) != 1 or len(act_h.indices) != 1:
                profile = None
                break
            profile.append((act_g.indices[0], act_h.indices[0]))
        if profile is None:
            continue
        key = tuple(profile)
        if key in found:
            continue
        jac = np.array(
            [F.g[i].pieces[j].grad(z) - F.h[i].pieces[k].grad(z) for i, (j, k) in enumerate(key)]
        )
        found[key] = LimitingSample(point=z, jacobian=jac, active_profile=key)
    return list(found.values())


# ---------------------------------------------------------------------------
# Convex hull membership by minimum-norm point


def _affine_minimizer(pts: np.ndarray) -> np.ndarray:
    """Barycentric coordinates of the norm minimizer over the affine hull."""
    k = pts.shape[0]
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = pts @ pts.T
    kkt[:k, k] = 1.0
    kkt[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
    return sol[:k]


def _min_norm_point(pts: np.ndarray, cap: int) -> tuple[np.ndarray, np.ndarray, int, bool]:
    """Minimum-norm point of the convex hull of the rows of ``pts``.

    Classic corral scheme: grow a working set with the vertex most opposed
    to the current point, project onto its affine hull, and walk back along
    the segment (dropping zero-weight vertices) whenever the projection
    leaves the simplex.  Returns (point, weights over rows, iterations,
    converged).
    """
    count = pts.shape[0]
    sq_scale = 1.0 + float(np.max(np.einsum("ij,ij->i", pts, pts)))
    stop_tol = 1e-13 * sq_scale
    drop_tol = 1e-12

    start = int(np.argmin(np.einsum("ij,ij->i", pts, pts)))
    corral = [start]
    wts = np.array([1.0])
    point = pts[start].copy()
    iters = 0
    converged = False
    while iters < cap:
        iters += 1
        scores = pts @ point
        cand = int(np.argmin(scores))
        if scores[cand] >= point @ point - stop_tol:
            converged = True
            break
        if cand in corral:
            break  # numerical stall; leave converged False (inconclusive)
        corral.append(cand)
        wts = np.append(wts, 0.0)
        while iters < cap:
            iters += 1
            bary = _affine_minimizer(pts[corral])
            if np.all(bary > drop_tol):
                wts = bary
                break
            # walk from wts toward bary until the first weight hits zero
            neg = np.where(bary <= drop_tol)[0]
            den = wts[neg] - bary[neg]
            ratios = np.where(den > 1e-30, wts[neg] / np.where(den > 1e-30, den, 1.0), 0.0)
            theta = float(np.min(ratios))
            wts = (1.0 - theta) * wts + theta * bary
            wts[neg[ratios <= theta + 1e-15]] = 0.0
            keep = wts > drop_tol
            if keep.all():
                keep[int(np.argmin(wts))] = False
            if not keep.any():
                keep[int(np.argmax(wts))] = True
            corral = [c for c, k in zip(corral, keep) if k]
            wts = wts[keep]
            total = wts.sum()
            wts = wts / total if total > 0.0 else np.full(len(corral), 1.0 / len(corral))
        point = wts @ pts[corral]

    weights = np.zeros(count)
    for c, w in zip(corral, wts):
        weights[c] += w
    return point, weights, iters, converged


def hull_membership(query, candidates, tol: float = 1e-8) -> HullCertificate:
    """Decide whether ``query`` lies within ``tol`` (Frobenius) of the
    convex hull of ``candidates``; both are m-by-n matrices."""
    cands = [np.asarray(c, dtype=float) for c in candidates]
    if not cands:
        raise ValueError("candidates must be nonempty")
    q = np.asarray(query, dtype=float)
    shape = q.shape
    pts = np.array([c.reshape(-1) - q.reshape(-1) for c in cands])
    # normalize so the minor-cycle systems stay well conditioned at any scale
    scale = max(1.0, float(np.max(np.linalg.norm(pts, axis=1))))
    cap = 10 * len(cands) * int(np.prod(shape))
    point, weights, iters, converged = _min_norm_point(pts / scale, cap)
    violation = float(np.linalg.norm(point)) * scale
    member: bool | None = violation <= tol
    if not converged and not member:
        member = None  # cap hit before a separation certificate; stay agnostic
    return HullCertificate(
        member=member,
        weights=weights,
        violation=violation,
        iterations=iters,
        converged=converged,
    )


# ---------------------------------------------------------------------------
# Brute-force subdifferential for piecewise-affine instances


@dataclass(frozen=True)
class BruteForceReport:
    profiles_found: int
    samples_kept: int
    enumerated: bool


def is_affine(F: DCMaxFn, seed: int = DEFAULT_SEED, tol: float = 1e-10) -> bool:
    """True when every piece has a constant gradient across 3 random points."""
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((3, F.n))
    for fn in (*F.g, *F.h):
        for piece in fn.pieces:
            grads = np.array([piece.grad(p) for p in pts])
            if np.max(np.abs(grads - grads[0])) > tol:
                return False
    return True


def _affine_data(F: DCMaxFn, x):
    """Per max term: gradient rows and values at x (exact for affine pieces)."""
    g_data, h_data = [], []
    for i in range(F.m):
        for data, fn in ((g_data, F.g[i]), (h_data, F.h[i])):
            grads = np.array([p.grad(x) for p in fn.pieces])
            vals = np.array([p.eval(x) for p in fn.pieces])
            data.append((grads, vals))
    return g_data, h_data


def _strict_argmax_rows(values: np.ndarray) -> np.ndarray:
    """Row-wise argmax, or -1 where the maximum is attained more than once."""
    best = np.argmax(values, axis=1)
    vmax = values[np.arange(values.shape[0]), best]
    ties = (values == vmax[:, None]).sum(axis=1)
    return np.where(ties == 1, best, -1)


def _cone_full_dimensional(rows: np.ndarray) -> bool:
    """Feasibility of a direction with all given inner products strictly
    positive, via a small linear program maximizing the common slack."""
    norms = np.max(np.abs(rows), axis=1, initial=0.0)
    rows = rows[norms > 1e-12]  # identical-gradient pairs impose nothing
    if rows.shape[0] == 0:
        return True
    n = rows.shape[1]
    # variables: d (n), delta; maximize delta s.t. rows @ d >= delta, |d| <= 1
    c = np.zeros(n + 1)
    c[n] = -1.0
    a_ub = np.hstack([-rows, np.ones((rows.shape[0], 1))])
    b_ub = np.zeros(rows.shape[0])
    bounds = [(-1.0, 1.0)] * n + [(None, 1.0)]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    return bool(res.status == 0 and res.x is not None and res.x[n] > 1e-9)


def brute_force_subdifferential(
    F: DCMaxFn,
    x,
    probe_radius: float = DEFAULT_PROBE_RADIUS,
    probe_count: int = DEFAULT_PROBE_COUNT,
    seed: int = DEFAULT_SEED,
    tol_act: float = DEFAULT_TOL_ACT,
    return_report: bool = False,
):
    """Jacobians of the selection patterns active on full-dimensional
    regions near x, for piecewise-affine F.

    Combines dense sampling of active patterns in a ball around x with, for
    moderate pattern counts, exhaustive enumeration of active-piece
    combinations checked by a cone-feasibility program.  The convex hull of
    the returned matrices equals the Clarke generalized Jacobian at x for
    this function class.  Non-affine pieces are rejected.
    """
    if not is_affine(F, seed=seed):
        raise ValueError("brute_force_subdifferential requires affine pieces")
    x = np.asarray(x, dtype=float)
    rng = np.random.default_rng(seed)
    g_data, h_data = _affine_data(F, x)

    # dense sampling of strict-argmax patterns
    pts = _ball_samples(rng, x, probe_radius, probe_count)
    offsets = pts - x
    choices = []
    for i in range(F.m):
        for grads, vals in (g_data[i], h_data[i]):
            choices.append(_strict_argmax_rows(offsets @ grads.T + vals))
    choice_mat = np.stack(choices, axis=1)  # (probe_count, 2m)
    keep = np.all(choice_mat >= 0, axis=1)
    samples_kept = int(keep.sum())
    profiles = {tuple(int(v) for v in row) for row in choice_mat[keep]}

    # exhaustive enumeration over active patterns while tractable
    active_g = [active_set(F.g[i], x, tol_act).indices for i in range(F.m)]
    active_h = [active_set(F.h[i], x, tol_act).indices for i in range(F.m)]
    combos = 1
    for idx in (*active_g, *active_h):
        combos *= len(idx)
    enumerated = combos <= ENUMERATION_CAP
    if enumerated:
        for combo in _product_profiles(active_g, active_h):
            if combo in profiles:
                continue
            rows = []
            for i in range(F.m):
                gj, hk = combo[2 * i], combo[2 * i + 1]
                for picked, others, (grads, _) in (
                    (gj, active_g[i], g_data[i]),
                    (hk, active_h[i], h_data[i]),
                ):
                    rows.extend(grads[picked] - grads[j] for j in others if j != picked)
            cone = np.array(rows) if rows else np.zeros((0, F.n))
            if _cone_full_dimensional(cone):
                profiles.add(combo)

    matrices: list[np.ndarray] = []
    for combo in sorted(profiles):
        jac = np.array(
            [
                g_data[i][0][combo[2 * i]] - h_data[i][0][combo[2 * i + 1]]
                for i in range(F.m)
            ]
        )
        if not any(np.max(np.abs(jac - seen)) <= 1e-10 for seen in matrices):
            matrices.append(jac)
    if return_report:
        report = BruteForceReport(
            profiles_found=len(matrices), samples_kept=samples_kept, enumerated=enumerated
        )
        return matrices, report
    return matrices


def _product_profiles(active_g, active_h):
    """All joint (g piece, h piece per component) patterns, interleaved to
    match the sampling profile layout."""
    pools = []
    for gi, hi in zip(active_g, active_h):
        pools.append(gi)
        pools.append(hi)
    return itertools.product(*pools)


# ---------------------------------------------------------------------------
# Finite-difference directional derivative


@dataclass(frozen=True)
class FiniteDiffResult:
    value: np.ndarray  # one-sided quotient at the smallest step
    estimates: np.ndarray  # one row per schedule step
    convergence: float  # gap between the last two estimates


def finite_diff_dd(F: DCMaxFn, x, y, t_schedule=(1e-3, 1e-5, 1e-7)) -> FiniteDiffResult:
    """One-sided difference quotients (F(x+ty)-F(x))/t down a decreasing
    step schedule; the smallest step gives the reported value."""
    ts = [float(t) for t in t_schedule]
    if not ts or any(t <= 0 for t in ts) or any(b >= a for a, b in zip(ts, ts[1:])):
        raise ValueError("t_schedule must be positive and strictly decreasing")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    base = eval_F(F, x)
    estimates = np.array([(eval_F(F, x + t * y) - base) / t for t in ts])
    convergence = 0.0
    if len(ts) > 1:
        convergence = float(np.max(np.abs(estimates[-1] - estimates[-2])))
    return FiniteDiffResult(value=estimates[-1], estimates=estimates, convergence=convergence)
