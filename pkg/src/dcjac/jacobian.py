"""Certified Clarke generalized Jacobian elements for F = G - H.

The selection walks the active gradients of every max term coordinate by
coordinate, keeping at step l only the gradients whose l-th component is
extremal (minimal or maximal, by convention).  The surviving gradients
coincide, and the row built from any survivor of G minus any survivor of H
is an element of the Clarke generalized Jacobian of F.

The module also exposes the constructions that certify this: the
difference vectors between rejected and selected gradients, a witness
direction making all of them strictly descent, and runnable checks that
the directional derivative is linear along the witness cone and that
nearby classical Jacobians reproduce the selected element.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dcmax import DEFAULT_TOL_ACT, ActiveSet, DCMaxFn, MaxFn, active_set, dd_F

__all__ = [
    "DEFAULT_TOL_TIE",
    "ComponentSelection",
    "SelectionResult",
    "JacobianElement",
    "DifferenceVectors",
    "WitnessDirection",
    "WitnessReport",
    "ConeLinearityReport",
    "LimitPoint",
    "LimitInclusionReport",
    "ConventionMismatchError",
    "lexicographic_chain",
    "lexicographic_select",
    "clarke_jacobian_element",
    "selection_differences",
    "witness_direction",
    "check_witness",
    "verify_cone_linearity",
    "verify_limit_inclusion",
]

DEFAULT_TOL_TIE = 1e-9

_CONVENTIONS = ("min", "max")


class ConventionMismatchError(ValueError):
    """A difference vector's leading sign contradicts the convention used;
    this signals a bug in the upstream selection, not bad user input."""


@dataclass(frozen=True)
class ComponentSelection:
    """Selection bookkeeping for one component of F (piece indices)."""

    g_active: tuple[int, ...]
    h_active: tuple[int, ...]
    g_chain: tuple[tuple[int, ...], ...]  # nested filtration, level 0 = active set
    h_chain: tuple[tuple[int, ...], ...]
    g_selected: tuple[int, ...]  # final level of g_chain
    h_selected: tuple[int, ...]
    chosen_g: int  # smallest selected index; any survivor gives the same row
    chosen_h: int


@dataclass(frozen=True)
class SelectionResult:
    components: tuple[ComponentSelection, ...]
    convention: str
    tol_act: float
    tol_tie: float


@dataclass(frozen=True)
class JacobianElement:
    """An m-by-n element of the Clarke generalized Jacobian with its
    selection provenance."""

    xi: np.ndarray
    provenance: SelectionResult


@dataclass(frozen=True)
class DifferenceVectors:
    """Gradient differences (rejected minus selected) over all components.

    Under the "min" convention every vector's first nonzero component is
    positive; under "max" it is negative.  Empty when all active gradients
    already coincide.
    """

    vectors: np.ndarray  # shape (count, n)

    @property
    def count(self) -> int:
        return int(self.vectors.shape[0])


@dataclass(frozen=True)
class WitnessDirection:
    """Direction with geometrically decaying weights along which every
    difference vector has strictly negative slope."""

    y_bar: np.ndarray
    epsilon: float
    m_bound: float
    lambdas: np.ndarray


def _check_convention(convention: str) -> None:
    if convention not in _CONVENTIONS:
        raise ValueError(f"convention must be one of {_CONVENTIONS}, got {convention!r}")


def lexicographic_chain(grads, convention: str = "min", tol_tie: float = DEFAULT_TOL_TIE):
    """Nested coordinatewise filtration of gradient indices.

    Level 0 is all input indices; level l keeps the indices whose l-th
    component is within tol_tie*(1+|extremum|) of the minimum ("min") or
    maximum ("max") over the previous level.  Returns n+1 levels.
    """
    _check_convention(convention)
    if tol_tie < 0:
        raise ValueError("tol_tie must be nonnegative")
    mat = np.asarray(grads, dtype=float)
    if mat.ndim != 2:
        raise ValueError("gradients must form a 2-D array (one row per gradient)")
    if mat.shape[0] == 0:
        raise ValueError("empty input list")
    n = mat.shape[1]
    keep = np.arange(mat.shape[0])
    chain = [tuple(int(i) for i in keep)]
    for l in range(n):
        col = mat[keep, l]
        if convention == "min":
            ext = col.min()
            mask = col <= ext + tol_tie * (1.0 + abs(ext))
        else:
            ext = col.max()
            mask = col >= ext - tol_tie * (1.0 + abs(ext))
        keep = keep[mask]
        chain.append(tuple(int(i) for i in keep))
    return chain


def lexicographic_select(grads, convention: str = "min", tol_tie: float = DEFAULT_TOL_TIE):
    """Indices surviving the full coordinatewise filtration (always nonempty)."""
    return list(lexicographic_chain(grads, convention, tol_tie)[-1])


def _active_gradients(f: MaxFn, x, tol_act: float) -> tuple[ActiveSet, np.ndarray]:
    act = active_set(f, x, tol_act)
    return act, np.array([f.pieces[j].grad(x) for j in act.indices])


def clarke_jacobian_element(
    F: DCMaxFn,
    x,
    tol_act: float = DEFAULT_TOL_ACT,
    tol_tie: float = DEFAULT_TOL_TIE,
    convention: str = "min",
) -> JacobianElement:
    """Select one element of the Clarke generalized Jacobian of F at x.

    For every component the active gradients of the max term and of the
    subtracted max term are filtered lexicographically (same convention
    for both, so all selections share one descent cone), and row i is the
    chosen g-gradient minus the chosen h-gradient.  The choice within each
    surviving set is immaterial because survivors coincide; the smallest
    index is taken for determinism.
    """
    _check_convention(convention)
    x = np.asarray(x, dtype=float)
    rows = []
    comps = []
    for i in range(F.m):
        act_g, grads_g = _active_gradients(F.g[i], x, tol_act)
        act_h, grads_h = _active_gradients(F.h[i], x, tol_act)
        chain_g = _to_piece_indices(lexicographic_chain(grads_g, convention, tol_tie), act_g)
        chain_h = _to_piece_indices(lexicographic_chain(grads_h, convention, tol_tie), act_h)
        sel_g, sel_h = chain_g[-1], chain_h[-1]
        chosen_g, chosen_h = min(sel_g), min(sel_h)
        rows.append(F.g[i].pieces[chosen_g].grad(x) - F.h[i].pieces[chosen_h].grad(x))
        comps.append(
            ComponentSelection(
                g_active=act_g.indices,
                h_active=act_h.indices,
                g_chain=chain_g,
                h_chain=chain_h,
                g_selected=sel_g,
                h_selected=sel_h,
                chosen_g=chosen_g,
                chosen_h=chosen_h,
            )
        )
    sel = SelectionResult(
        components=tuple(comps), convention=convention, tol_act=tol_act, tol_tie=tol_tie
    )
    return JacobianElement(xi=np.array(rows), provenance=sel)


def _to_piece_indices(chain, act: ActiveSet):
    return tuple(tuple(act.indices[i] for i in level) for level in chain)


def selection_differences(F: DCMaxFn, x, sel: SelectionResult) -> DifferenceVectors:
    """All rejected-minus-selected gradient differences for a selection.

    Vectors equal within 1e-12 componentwise are deduplicated.  Empty when
    every active gradient survived (e.g. smooth F).
    """
    x = np.asarray(x, dtype=float)
    vectors: list[np.ndarray] = []
    for i, comp in enumerate(sel.components):
        _collect_differences(F.g[i], x, comp.g_active, comp.g_selected, vectors)
        _collect_differences(F.h[i], x, comp.h_active, comp.h_selected, vectors)
    mat = np.array(vectors) if vectors else np.zeros((0, F.n))
    return DifferenceVectors(vectors=mat)


def _collect_differences(f: MaxFn, x, active, selected, out: list[np.ndarray]) -> None:
    rejected = [j for j in active if j not in selected]
    if not rejected:
        return
    grads = {j: f.pieces[j].grad(x) for j in set(rejected) | set(selected)}
    for j in rejected:
        for t in selected:
            alpha = grads[j] - grads[t]
            if np.max(np.abs(alpha)) <= 1e-12:
                continue  # numerically zero difference certifies nothing
            if not any(np.max(np.abs(alpha - seen)) <= 1e-12 for seen in out):
                out.append(alpha)


def _first_nonzero(alpha: np.ndarray) -> tuple[int, float]:
    """Index and value of the leading component, treating entries below
    1e-12*(1+max|alpha|) as zero."""
    scale = 1e-12 * (1.0 + float(np.max(np.abs(alpha), initial=0.0)))
    for k, v in enumerate(alpha):
        if abs(v) > scale:
            return k, float(v)
    raise ValueError("difference vector is numerically zero")


def witness_direction(
    diffs: DifferenceVectors, n: int, convention: str = "min"
) -> WitnessDirection:
    """Build a direction with every difference vector strictly descending.

    The weights decay geometrically fast enough that the leading component
    of each difference vector dominates the tail:  epsilon is half the
    smallest leading magnitude, the bound is twice the largest entry
    magnitude, and consecutive weight ratios sit at half the admissible
    limit, so all strict inequalities hold with quantifiable slack.
    """
    _check_convention(convention)
    leading = []
    for alpha in diffs.vectors:
        k, v = _first_nonzero(alpha)
        if (convention == "min" and v <= 0) or (convention == "max" and v >= 0):
            raise ConventionMismatchError(
                f"difference vector {alpha.tolist()} has leading component {v} "
                f"under convention {convention!r}"
            )
        leading.append(abs(v))
    epsilon = 1.0 if not leading else 0.5 * min(leading)
    m_bound = 2.0 * max(1.0, float(np.max(np.abs(diffs.vectors), initial=0.0)))
    ratio = 0.5 * (epsilon / m_bound) / (1.0 + epsilon / m_bound)
    lambdas = np.array([ratio**k for k in range(n)])
    y_bar = -lambdas if convention == "min" else lambdas.copy()
    return WitnessDirection(y_bar=y_bar, epsilon=epsilon, m_bound=m_bound, lambdas=lambdas)


@dataclass(frozen=True)
class WitnessReport:
    count: int
    margins: np.ndarray  # -alpha'y_bar, must be strictly positive
    required: np.ndarray  # lambda_k * (|leading| - epsilon) * (1 - 1e-9)
    passed: bool


def check_witness(
    diffs: DifferenceVectors, witness: WitnessDirection, convention: str = "min"
) -> WitnessReport:
    """Check strict negativity of every slope along the witness direction,
    with the margin each leading component guarantees."""
    _check_convention(convention)
    margins, required = [], []
    for alpha in diffs.vectors:
        k, v = _first_nonzero(alpha)
        margins.append(-float(alpha @ witness.y_bar))
        required.append(float(witness.lambdas[k]) * (abs(v) - witness.epsilon) * (1.0 - 1e-9))
    margins = np.array(margins)
    required = np.array(required)
    passed = bool(np.all(margins > 0.0) and np.all(margins >= required))
    return WitnessReport(count=diffs.count, margins=margins, required=required, passed=passed)


@dataclass(frozen=True)
class ConeLinearityReport:
    status: str  # "ok" | "inconclusive"
    samples: int
    kept: int
    max_discrepancy: float
    tolerance_at_max: float
    passed: bool


def verify_cone_linearity(
    F: DCMaxFn,
    x,
    xi: JacobianElement,
    y_bar,
    samples: int = 200,
    seed: int = 42,
    radius: float | None = None,
    tol_act: float = DEFAULT_TOL_ACT,
) -> ConeLinearityReport:
    """Sample directions near the witness and compare the directional
    derivative of F against the linear map given by the selected element.

    Directions are kept only when every difference vector has strictly
    negative slope along them (membership in the open descent cone); on
    kept directions the two sides must agree within 1e-8*(1+|y|) per
    component.  The directional derivative is evaluated from the active
    gradients at x, which do not depend on the direction.
    """
    x = np.asarray(x, dtype=float)
    y_bar = np.asarray(y_bar, dtype=float)
    diffs = selection_differences(F, x, xi.provenance)
    A = diffs.vectors

    g_grads = [_active_gradients(F.g[i], x, tol_act)[1] for i in range(F.m)]
    h_grads = [_active_gradients(F.h[i], x, tol_act)[1] for i in range(F.m)]

    if radius is None:
        if diffs.count:
            margins = -(A @ y_bar)
            norms = np.linalg.norm(A, axis=1)
            radius = 0.5 * float(np.min(margins / norms))
        else:
            radius = 0.5 * float(np.linalg.norm(y_bar))

    rng = np.random.default_rng(seed)
    n = F.n
    direc = rng.standard_normal((samples, n))
    direc /= np.linalg.norm(direc, axis=1, keepdims=True)
    direc *= radius * rng.random((samples, 1)) ** (1.0 / n)
    ys = y_bar + direc

    if diffs.count:
        inside = np.all(A @ ys.T < 0.0, axis=0)
    else:
        inside = np.ones(samples, dtype=bool)
    ys = ys[inside]
    kept = int(ys.shape[0])
    if kept == 0:
        return ConeLinearityReport(
            status="inconclusive",
            samples=samples,
            kept=0,
            max_discrepancy=float("nan"),
            tolerance_at_max=float("nan"),
            passed=False,
        )

    dd = np.empty((kept, F.m))
    for i in range(F.m):
        dd[:, i] = np.max(g_grads[i] @ ys.T, axis=0) - np.max(h_grads[i] @ ys.T, axis=0)
    lin = ys @ xi.xi.T
    disc = np.abs(dd - lin)
    allowed = 1e-8 * (1.0 + np.linalg.norm(ys, axis=1))[:, None]
    worst = int(np.argmax(disc - allowed))
    max_disc = float(disc.flat[worst])
    tol_at_max = float(np.broadcast_to(allowed, disc.shape).flat[worst])
    passed = bool(np.all(disc <= allowed))
    return ConeLinearityReport(
        status="ok",
        samples=samples,
        kept=kept,
        max_discrepancy=max_disc,
        tolerance_at_max=tol_at_max,
        passed=passed,
    )


@dataclass(frozen=True)
class LimitPoint:
    t: float
    degenerate: bool
    distance: float | None


@dataclass(frozen=True)
class LimitInclusionReport:
    status: str  # "ok" | "degenerate"
    points: tuple[LimitPoint, ...]
    final_distance: float | None
    tolerance: float
    passed: bool


DEFAULT_T_SCHEDULE = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)


def verify_limit_inclusion(
    F: DCMaxFn,
    x,
    xi: JacobianElement,
    y_bar,
    t_schedule=DEFAULT_T_SCHEDULE,
    tol_act: float = DEFAULT_TOL_ACT,
) -> LimitInclusionReport:
    """Walk x + t*y_bar down the schedule and compare classical Jacobians
    against the selected element.

    Points where some component's active sets are not all singletons are
    skipped as degenerate.  Passes when the distance decreases (within
    tolerance) along the schedule and the last usable point is within
    1e-6*(1+scale) of the element, where scale is the largest classical
    Jacobian norm seen.
    """
    x = np.asarray(x, dtype=float)
    y_bar = np.asarray(y_bar, dtype=float)
    ts = [float(t) for t in t_schedule]
    if not ts or any(t <= 0 for t in ts) or any(b >= a for a, b in zip(ts, ts[1:])):
        raise ValueError("t_schedule must be positive and strictly decreasing")

    points: list[LimitPoint] = []
    distances: list[float] = []
    scale = 0.0
    for t in ts:
        z = x + t * y_bar
        rows = []
        degenerate = False
        for i in range(F.m):
            act_g = active_set(F.g[i], z, tol_act)
            act_h = active_set(F.h[i], z, tol_act)
            if len(act_g.indices) != 1 or len(act_h.indices) != 1:
                degenerate = True
                break
            rows.append(
                F.g[i].pieces[act_g.indices[0]].grad(z) - F.h[i].pieces[act_h.indices[0]].grad(z)
            )
        if degenerate:
            points.append(LimitPoint(t=t, degenerate=True, distance=None))
            continue
        jac = np.array(rows)
        scale = max(scale, float(np.linalg.norm(jac)))
        dist = float(np.linalg.norm(jac - xi.xi))
        distances.append(dist)
        points.append(LimitPoint(t=t, degenerate=False, distance=dist))

    tolerance = 1e-6 * (1.0 + scale)
    if not distances:
        return LimitInclusionReport(
            status="degenerate",
            points=tuple(points),
            final_distance=None,
            tolerance=tolerance,
            passed=False,
        )
    monotone = all(b <= a + tolerance for a, b in zip(distances, distances[1:]))
    passed = bool(distances[-1] <= tolerance and monotone)
    return LimitInclusionReport(
        status="ok",
        points=tuple(points),
        final_distance=distances[-1],
        tolerance=tolerance,
        passed=passed,
    )
