"""Seeded random problem documents for testing and the CLI --random flag."""

from __future__ import annotations

import numpy as np

from .dcmax import DCMaxFn, load_problem

__all__ = ["random_affine_document", "random_affine_problem"]


def _affine_text(coeffs, constant) -> str:
    terms = [f"{int(c)}*x{j + 1}" for j, c in enumerate(coeffs)]
    terms.append(str(int(constant)))
    return " + ".join(terms)


def random_affine_document(
    n: int,
    m: int,
    pieces: int,
    seed: int,
    coeff_lo: int = -5,
    coeff_hi: int = 5,
) -> dict:
    """Problem document with integer-coefficient affine pieces.

    Each max term draws 1..pieces affine pieces with coefficients uniform
    in [coeff_lo, coeff_hi]; duplicates within a term are removed.  About a
    quarter of the subtracted terms are the zero function, so plain
    max-type instances stay represented.
    """
    if n < 1 or m < 1 or pieces < 1:
        raise ValueError("n, m, and pieces must be positive")
    rng = np.random.default_rng(seed)

    def draw_term() -> list[str]:
        count = int(rng.integers(1, pieces + 1))
        seen = set()
        exprs = []
        for _ in range(count):
            coeffs = rng.integers(coeff_lo, coeff_hi + 1, size=n)
            const = int(rng.integers(coeff_lo, coeff_hi + 1))
            key = (*coeffs.tolist(), const)
            if key in seen:
                continue
            seen.add(key)
            exprs.append(_affine_text(coeffs, const))
        return exprs

    components = []
    for _ in range(m):
        comp = {"g": draw_term()}
        if rng.random() >= 0.25:
            comp["h"] = draw_term()
        components.append(comp)
    return {"n": n, "m": m, "components": components}


def random_affine_problem(n: int, m: int, pieces: int, seed: int) -> DCMaxFn:
    """Convenience wrapper: generate a document and load it."""
    return load_problem(random_affine_document(n, m, pieces, seed))
