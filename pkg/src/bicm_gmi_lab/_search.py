"""Scalar maximization helpers shared by the offline and online scaling paths."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar


@dataclass(frozen=True)
class SearchParams:
    initial: float = 1.0
    alpha: float = 1.05
    max_steps: int = 200
    bounds: tuple = (0.1, 10.0)

    def __post_init__(self):
        if self.alpha <= 1:
            raise ValueError("alpha must exceed 1")
        if self.bounds[0] <= 0 or self.bounds[1] <= self.bounds[0]:
            raise ValueError("bounds must be positive and increasing")


@dataclass
class SearchResult:
    s: float
    value: float
    steps: int
    converged: bool


def multiplicative_search(f, params: SearchParams = SearchParams()) -> SearchResult:
    """Hill-climb a unimodal f by multiplicative steps.

    Start at the initial point, pick the uphill direction by comparing f(s)
    with f(alpha*s), then keep multiplying by alpha (one new evaluation per
    step, caching the previous value) until the first non-increase; return the
    midpoint of the final step. Hitting a bound or the step budget returns the
    boundary value flagged as non-converged.
    """
    lo, hi = params.bounds
    s = min(max(params.initial, lo), hi)
    alpha = params.alpha
    f_s = f(s)
    f_next = f(alpha * s)
    steps = 2
    if f_s >= f_next:          # ties count as a decrease: reverse direction
        alpha = 1.0 / alpha
    else:
        f_s = f_next
        s = alpha * s
    while steps < params.max_steps:
        s_next = alpha * s
        if not lo <= s_next <= hi:
            return SearchResult(s=min(max(s, lo), hi), value=f_s, steps=steps, converged=False)
        f_next = f(s_next)
        steps += 1
        if f_s >= f_next:
            return SearchResult(s=0.5 * (s + s_next), value=max(f_s, f_next),
                                steps=steps, converged=True)
        f_s = f_next
        s = s_next
    return SearchResult(s=s, value=f_s, steps=steps, converged=False)


def refine_golden(f, center: float, params: SearchParams = SearchParams(),
                  rel_tol: float = 1e-3) -> tuple:
    """Golden-section refinement around a multiplicative-search result."""
    lo, hi = params.bounds
    a = max(lo, center / params.alpha**3)
    b = min(hi, center * params.alpha**3)
    res = minimize_scalar(lambda s: -f(s), bounds=(a, b), method="bounded",
                          options={"xatol": rel_tol * center})
    return float(res.x), float(-res.fun)


def maximize(f, params: SearchParams = SearchParams(), rel_tol: float = 1e-3) -> tuple:
    """Multiplicative search followed by golden-section refinement: (s*, f(s*))."""
    coarse = multiplicative_search(f, params)
    return refine_golden(f, coarse.s, params, rel_tol)
