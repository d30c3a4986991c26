"""Bounded two-parameter nonlinear conjugate gradient.

Both parameters must be positive; the search runs on their logarithms so
iterates stay positive, and is projected onto the box at every step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

Objective = Callable[[float, float], float]

DEFAULT_GRID = tuple((a, b) for a in (0.5, 1.0, 2.0, 3.0) for b in (0.5, 1.0, 2.0, 3.0))

ARMIJO_C = 1e-4
RESTART_EVERY = 2
MAX_LOG_STEP = 1.0
MIN_LOG_STEP = 1e-10
MAX_EXPAND = 64.0


@dataclass(frozen=True)
class OptimizerSettings:
    max_iterations: int = 50
    gradient_step: float = 1e-3
    convergence_tol: float = 1e-4
    init_grid: tuple[tuple[float, float], ...] = field(default=DEFAULT_GRID)
    starts: int = 4

    def __post_init__(self):
        object.__setattr__(self, "init_grid", tuple((float(a), float(b)) for a, b in self.init_grid))
        if self.max_iterations <= 0 or self.gradient_step <= 0 or self.convergence_tol <= 0 or self.starts <= 0:
            raise ValueError("optimizer settings must be positive")
        if not self.init_grid:
            raise ValueError("init_grid must not be empty")
        if any(a <= 0 or b <= 0 for a, b in self.init_grid):
            raise ValueError("init_grid points must be positive")


class MinimizeResult(NamedTuple):
    x: tuple[float, float]
    fun: float
    nit: int
    history: tuple[float, ...] = ()


def finite_diff_gradient(objective: Objective, point, step: float) -> tuple[float, float]:
    """Central-difference gradient of a function of two reals."""
    a, b = point
    ga = (objective(a + step, b) - objective(a - step, b)) / (2.0 * step)
    gb = (objective(a, b + step) - objective(a, b - step)) / (2.0 * step)
    return ga, gb


def _box_gradient(f, u, fu, h, lo, hi):
    # central where the stencil fits in the box, one-sided otherwise
    g = [0.0, 0.0]
    for i in range(2):
        up = list(u)
        dn = list(u)
        if u[i] + h <= hi and u[i] - h >= lo:
            up[i] += h
            dn[i] -= h
            g[i] = (f(*up) - f(*dn)) / (2.0 * h)
        elif u[i] + h > hi:
            dn[i] -= h
            g[i] = (fu - f(*dn)) / h
        else:
            up[i] += h
            g[i] = (f(*up) - fu) / h
    return g


def _project(v, u, lo, hi, sign=1.0):
    # zero components that would move past an active bound
    return [
        0.0 if (u[i] <= lo and sign * v[i] > 0) or (u[i] >= hi and sign * v[i] < 0) else v[i]
        for i in range(2)
    ]


def _conjugate_gradient(f, u, fu, ulo, uhi, settings, history):
    """Run CG from ``u``; returns the final point, its value and the iteration count."""
    h = settings.gradient_step

    def clip(v):
        return [min(max(v[0], ulo), uhi), min(max(v[1], ulo), uhi)]

    grad = _box_gradient(f, u, fu, h, ulo, uhi)
    pg = _project(grad, u, ulo, uhi)
    d = [-pg[0], -pg[1]]
    trial = MAX_LOG_STEP
    force_restart = False
    nit = 0
    for it in range(settings.max_iterations):
        restarted = force_restart or it % RESTART_EVERY == 0 or pg[0] * d[0] + pg[1] * d[1] >= 0
        if restarted:
            d = [-pg[0], -pg[1]]
        force_restart = False
        d = _project(d, u, ulo, uhi, sign=-1.0)
        dmax = max(abs(d[0]), abs(d[1]))
        if dmax == 0.0:
            if restarted:
                break
            force_restart = True
            continue
        alpha = trial / dmax
        while True:
            cand = clip([u[0] + alpha * d[0], u[1] + alpha * d[1]])
            if cand == u:
                cand = None
                break
            fc = f(*cand)
            if not math.isfinite(fc):
                return u, fu, nit, False
            decrease = grad[0] * (cand[0] - u[0]) + grad[1] * (cand[1] - u[1])
            if fc <= fu + ARMIJO_C * decrease and fc < fu:
                break
            alpha *= 0.5
            if alpha * dmax < MIN_LOG_STEP:
                cand = None
                break
        if cand is None:
            if not restarted:
                # stalled along a conjugate direction: retry on steepest descent
                force_restart = True
                continue
            break
        if alpha * dmax >= trial:
            # first trial accepted: keep doubling while the value still drops
            while alpha * dmax < MAX_EXPAND * trial:
                nxt = clip([u[0] + 2 * alpha * d[0], u[1] + 2 * alpha * d[1]])
                if nxt == cand:
                    break
                fn = f(*nxt)
                if not (math.isfinite(fn) and fn < fc):
                    break
                alpha *= 2
                cand, fc = nxt, fn
        nit += 1
        step_len = max(abs(cand[0] - u[0]), abs(cand[1] - u[1]))
        trial = min(MAX_LOG_STEP, max(2.0 * step_len, 1e-6))
        rel = abs(fu - fc) / max(abs(fu), 1e-300)
        u, fu = cand, fc
        history.append(min(history[-1], fu))
        new_grad = _box_gradient(f, u, fu, h, ulo, uhi)
        new_pg = _project(new_grad, u, ulo, uhi)
        if rel < settings.convergence_tol:
            if restarted:
                break
            # a small gain along a conjugate direction proves little; confirm on steepest descent
            force_restart = True
        denom = pg[0] * pg[0] + pg[1] * pg[1]
        beta = 0.0
        if denom > 0:
            beta = max(0.0, (new_pg[0] * (new_pg[0] - pg[0]) + new_pg[1] * (new_pg[1] - pg[1])) / denom)
        grad, pg = new_grad, new_pg
        d = [-pg[0] + beta * d[0], -pg[1] + beta * d[1]]
    return u, fu, nit, True


def minimize(objective: Objective, bounds: tuple[float, float], settings: OptimizerSettings | None = None) -> MinimizeResult:
    """Minimize ``objective(a, b)`` over ``[lo, hi]**2``.

    Ranks ``settings.init_grid`` (clipped to the box) and runs Polak-Ribiere
    conjugate gradient from each of the ``settings.starts`` best points,
    with finite-difference gradients and an Armijo line search. Returns the
    best point seen, so the result never loses to the initialization grid.
    """
    settings = settings or OptimizerSettings()
    lo, hi = map(float, bounds)
    if not (0 < lo < hi):
        raise ValueError(f"need 0 < lo < hi, got {bounds}")
    ulo, uhi = math.log(lo), math.log(hi)

    def to_box(u):
        return min(max(math.exp(u[0]), lo), hi), min(max(math.exp(u[1]), lo), hi)

    def f(u0, u1):
        return objective(*to_box((u0, u1)))

    seeds = {}
    for a, b in settings.init_grid:
        cand = (min(max(math.log(a), ulo), uhi), min(max(math.log(b), ulo), uhi))
        if cand not in seeds:
            val = f(*cand)
            if math.isfinite(val):
                seeds[cand] = val
    if not seeds:
        raise ValueError("objective is non-finite on every initialization point")
    ranked = sorted(seeds.items(), key=lambda kv: kv[1])[: settings.starts]

    best_u, best_f = ranked[0]
    history = [best_f]
    nit = 0
    for u0, f0 in ranked:
        u, fu, k, finite = _conjugate_gradient(f, list(u0), f0, ulo, uhi, settings, history)
        nit += k
        if fu < best_f:
            best_u, best_f = tuple(u), fu
        if not finite:
            break
    return MinimizeResult(to_box(best_u), best_f, nit, tuple(history))
