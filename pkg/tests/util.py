"""Shared test helpers: finite-difference oracle and seeded expression
generation."""

from __future__ import annotations

import numpy as np

from dcjac.expr import Binary, Const, DomainError, SmoothFn, Unary, Var

ABS_DOC = {"n": 1, "m": 1, "components": [{"g": ["x1", "-x1"]}]}
NEG_ABS_DOC = {
    "n": 1,
    "m": 1,
    "components": [{"g": ["x1", "-x1"], "h": ["2*x1", "-2*x1"]}],
}


def central_diff(fn: SmoothFn, x, h: float = 1e-6) -> np.ndarray:
    """Independent gradient estimate by central differences."""
    x = np.asarray(x, dtype=float)
    out = np.empty(fn.dim)
    for l in range(fn.dim):
        step = np.zeros(fn.dim)
        step[l] = h
        out[l] = (fn.eval(x + step) - fn.eval(x - step)) / (2.0 * h)
    return out


def random_expr(rng: np.random.Generator, dim: int, depth: int = 3):
    """Random parse-shaped AST exercising every node kind.

    Unary functions wrap shallow arguments and log/sqrt arguments are
    shifted squares, keeping values, derivatives, and finite-difference
    curvature at sane magnitudes.
    """
    if depth == 0 or rng.random() < 0.2:
        if rng.random() < 0.4:
            return Const(round(float(rng.uniform(0.0, 3.0)), 3))
        return Var(int(rng.integers(0, dim)))
    kind = rng.random()
    if kind < 0.15:
        return Unary("neg", random_expr(rng, dim, depth - 1))
    if kind < 0.35:
        fn = ("sin", "cos", "exp")[int(rng.integers(0, 3))]
        arg = Binary(
            "+",
            Binary("*", Const(round(float(rng.uniform(0.1, 1.5)), 3)), Var(int(rng.integers(0, dim)))),
            Const(round(float(rng.uniform(0.0, 1.0)), 3)),
        )
        return Unary(fn, arg)
    if kind < 0.45:
        fn = ("log", "sqrt")[int(rng.integers(0, 2))]
        inner = Binary("*", Const(round(float(rng.uniform(0.2, 1.0)), 3)), Var(int(rng.integers(0, dim))))
        arg = Binary("+", Binary("^", inner, Const(2.0)), Const(round(float(rng.uniform(0.5, 2.0)), 3)))
        return Unary(fn, arg)
    if kind < 0.55:
        return Binary("^", random_expr(rng, dim, depth - 1), Const(float(rng.integers(2, 4))))
    if kind < 0.65:
        return Binary(
            "/", random_expr(rng, dim, depth - 1), Const(round(float(rng.uniform(0.5, 3.0)), 3))
        )
    op = ("+", "-", "*")[int(rng.integers(0, 3))]
    return Binary(op, random_expr(rng, dim, depth - 1), random_expr(rng, dim, depth - 1))


def random_smooth_pair(rng: np.random.Generator, max_dim: int = 4):
    """A random (SmoothFn, point) pair that is safely differentiable at the
    point and in a finite-difference neighborhood around it."""
    while True:
        dim = int(rng.integers(1, max_dim + 1))
        fn = SmoothFn(random_expr(rng, dim), dim)
        x = rng.uniform(-2.0, 2.0, size=dim)
        try:
            value = fn.eval(x)
            fn.grad(x)
            probe = central_diff(fn, x)
        except (DomainError, OverflowError):
            continue
        if abs(value) > 1e3 or np.max(np.abs(probe)) > 1e3:
            continue
        return fn, x
