"""Limited-memory BFGS with a strong-Wolfe line search.

The compiled driver :func:`lbfgs` minimizes one of the objectives known to
:func:`_objective`, selected by an integer ``kind`` so that every compiled
function stays cacheable on disk. Each objective has the signature
``(x, data, scalar) -> (f, grad)``: the packing energy takes ``data = radii``
and ``scalar = R``; the offset quadratic ``scalar * |x - data|^2`` is a
smooth check of the quasi-Newton machinery.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np

from pucc.energy import _flat, energy_and_gradient, energy_gradient_into


class Termination(enum.IntEnum):
    GRADIENT_CONVERGED = 0
    ENERGY_CONVERGED = 1
    ITERATION_CAP = 2
    LINE_SEARCH_FAILURE = 3


class InvalidStartError(ValueError):
    """The starting point has a non-finite energy or gradient."""


@dataclass(frozen=True)
class OptimizerSettings:
    memory: int = 7
    grad_tol: float = 1e-12
    energy_tol: float = 1e-20
    max_iters: Optional[int] = None  # None means 200 * n
    max_iters_per_disk: int = 200
    c1: float = 1e-4
    c2: float = 0.9
    max_line_search: int = 10

    def __post_init__(self):
        if self.memory < 1 or self.max_iters_per_disk < 1 or self.max_line_search < 1:
            raise ValueError("optimizer counts must be positive")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not (self.grad_tol > 0 and self.energy_tol > 0):
            raise ValueError("optimizer tolerances must be strictly positive")
        if not 0 < self.c1 < self.c2 < 1:
            raise ValueError("line search constants need 0 < c1 < c2 < 1")

    def iteration_cap(self, n: int) -> int:
        return self.max_iters if self.max_iters is not None else self.max_iters_per_disk * n


@dataclass
class MinimizeResult:
    pattern: np.ndarray
    energy: float
    iterations: int
    termination: Termination
    evaluations: int = 0


PACKING_ENERGY = 0
OFFSET_QUADRATIC = 1


@numba.njit(cache=True)
def offset_quadratic_into(x, target, scale, grad):
    f = 0.0
    for i in range(x.shape[0]):
        d = x[i] - target[i]
        f += d * d
        grad[i] = 2.0 * scale * d
    return scale * f


@numba.njit(cache=True)
def _objective(kind, x, data, scal, grad):
    if kind == OFFSET_QUADRATIC:
        return offset_quadratic_into(x, data, scal, grad)
    return energy_gradient_into(x, data, scal, grad)


# decreases below a few ulps of the energy cannot be resolved
_RESOLUTION = 4.0 * np.finfo(np.float64).eps


@numba.njit(cache=True)
def _dot(a, b):
    s = 0.0
    for i in range(a.shape[0]):
        s += a[i] * b[i]
    return s


@numba.njit(cache=True)
def _copy(dst, src):
    for i in range(src.shape[0]):
        dst[i] = src[i]


@numba.njit(cache=True)
def _probe(kind, x, alpha, d, data, scal, xt, gt):
    for i in range(x.shape[0]):
        xt[i] = x[i] + alpha * d[i]
    return _objective(kind, xt, data, scal, gt)


@numba.njit(cache=True)
def _cubic_min(a, fa, da, b, fb, db):
    # minimizer of the cubic through (a, fa, da), (b, fb, db), safeguarded into the bracket
    lo = min(a, b)
    hi = max(a, b)
    width = hi - lo
    d1 = da + db - 3.0 * (fa - fb) / (a - b)
    disc = d1 * d1 - da * db
    if disc >= 0.0:
        d2 = math.sqrt(disc)
        if b < a:
            d2 = -d2
        denom = db - da + 2.0 * d2
        if denom != 0.0:
            t = b - (b - a) * (db + d2 - d1) / denom
            if lo + 0.1 * width <= t <= hi - 0.1 * width:
                return t
    return 0.5 * (a + b)


@numba.njit(cache=True)
def _line_search(kind, x, f0, g0, d, data, scal, alpha, c1, c2, max_evals, xt, gt, g_out):
    """Strong-Wolfe search along ``d``.

    Returns ``(status, alpha, f, nfev)`` and leaves the gradient at the
    returned step in ``g_out``; status 0 is a Wolfe step, 1 a step with
    sufficient decrease only, 2 failure. ``xt`` and ``gt`` are scratch.
    """
    dg0 = _dot(g0, d)
    nfev = 0
    # g_out always holds the gradient of the lower bracket end
    _copy(g_out, g0)
    a_prev = 0.0
    f_prev = f0
    dg_prev = dg0
    lo_a = 0.0
    lo_f = f0
    lo_dg = dg0
    hi_a = 0.0
    hi_f = f0
    hi_dg = dg0
    bracketed = False
    first = True
    while nfev < max_evals:
        f = _probe(kind, x, alpha, d, data, scal, xt, gt)
        nfev += 1
        dg = _dot(gt, d)
        if not (math.isfinite(f) and math.isfinite(dg)):
            alpha *= 0.5
            continue
        if f > f0 + c1 * alpha * dg0 or (not first and f >= f_prev):
            lo_a, lo_f, lo_dg = a_prev, f_prev, dg_prev
            hi_a, hi_f, hi_dg = alpha, f, dg
            bracketed = True
            break
        if abs(dg) <= -c2 * dg0:
            _copy(g_out, gt)
            return 0, alpha, f, nfev
        if dg >= 0.0:
            lo_a, lo_f, lo_dg = alpha, f, dg
            _copy(g_out, gt)
            hi_a, hi_f, hi_dg = a_prev, f_prev, dg_prev
            bracketed = True
            break
        a_prev, f_prev, dg_prev = alpha, f, dg
        _copy(g_out, gt)
        alpha *= 2.0
        first = False
    if not bracketed:
        if f_prev < f0:
            return 1, a_prev, f_prev, nfev
        return 2, 0.0, f0, nfev

    while nfev < max_evals:
        if abs(hi_a - lo_a) <= 1e-14 * max(1.0, abs(lo_a)):
            break
        a = _cubic_min(lo_a, lo_f, lo_dg, hi_a, hi_f, hi_dg)
        f = _probe(kind, x, a, d, data, scal, xt, gt)
        nfev += 1
        dg = _dot(gt, d)
        if f > f0 + c1 * a * dg0 or f >= lo_f:
            hi_a, hi_f, hi_dg = a, f, dg
        else:
            if abs(dg) <= -c2 * dg0:
                _copy(g_out, gt)
                return 0, a, f, nfev
            if dg * (hi_a - lo_a) >= 0.0:
                hi_a, hi_f, hi_dg = lo_a, lo_f, lo_dg
            lo_a, lo_f, lo_dg = a, f, dg
            _copy(g_out, gt)
    if lo_a > 0.0 and lo_f < f0:
        return 1, lo_a, lo_f, nfev
    return 2, 0.0, f0, nfev


@numba.njit(cache=True)
def lbfgs(kind, x0, data, scal, memory, grad_tol, f_tol, max_iter, c1, c2, max_ls):
    """Minimize objective ``kind`` from ``x0``.

    Returns ``(x, f, iterations, evaluations, termination_code)``; codes match
    :class:`Termination`. The returned ``f`` never exceeds ``f(x0)``.
    """
    dim = x0.shape[0]
    x = x0.copy()
    g = np.empty(dim)
    f = _objective(kind, x, data, scal, g)
    nfev = 1
    if f <= f_tol:
        return x, f, 0, nfev, 1
    S = np.zeros((memory, dim))
    Y = np.zeros((memory, dim))
    rho = np.zeros(memory)
    alpha_buf = np.zeros(memory)
    d = np.empty(dim)
    xt = np.empty(dim)
    gt = np.empty(dim)
    g_new = np.empty(dim)
    stored = 0
    head = 0
    it = 0
    # a stall with memory in use is retried once from steepest descent; a
    # stall after a fresh restart with no resolvable progress since then ends the run
    progress = True
    status = 2
    while it < max_iter:
        gmax = 0.0
        for i in range(dim):
            gmax = max(gmax, abs(g[i]))
        if gmax <= grad_tol:
            status = 0
            break
        # two-loop recursion
        for i in range(dim):
            d[i] = -g[i]
        for k in range(stored):
            idx = (head - 1 - k) % memory
            a_k = rho[idx] * _dot(S[idx], d)
            alpha_buf[idx] = a_k
            Yk = Y[idx]
            for i in range(dim):
                d[i] -= a_k * Yk[i]
        if stored > 0:
            last = (head - 1) % memory
            gamma = _dot(S[last], Y[last]) / _dot(Y[last], Y[last])
            for i in range(dim):
                d[i] *= gamma
        for k in range(stored - 1, -1, -1):
            idx = (head - 1 - k) % memory
            coef = alpha_buf[idx] - rho[idx] * _dot(Y[idx], d)
            Sk = S[idx]
            for i in range(dim):
                d[i] += coef * Sk[i]
        gd = _dot(g, d)
        if gd >= 0.0:
            for i in range(dim):
                d[i] = -g[i]
            gd = -_dot(g, g)
            stored = 0
        stalled = -gd <= _RESOLUTION * abs(f)
        if not stalled:
            step = min(1.0, 1.0 / gmax) if stored == 0 else 1.0
            ls, a, f_new, evals = _line_search(
                kind, x, f, g, d, data, scal, step, c1, c2, max_ls, xt, gt, g_new
            )
            nfev += evals
            # a step whose decrease is below resolution is noise: not taken
            stalled = ls == 2 or f - f_new <= _RESOLUTION * abs(f)
        if stalled:
            if progress:
                stored = 0
                progress = False
                continue
            status = 3
            break
        sy = 0.0
        yy = 0.0
        for i in range(dim):
            yi = g_new[i] - g[i]
            sy += a * d[i] * yi
            yy += yi * yi
        if sy > 1e-16 * yy:
            Sh = S[head]
            Yh = Y[head]
            for i in range(dim):
                Sh[i] = a * d[i]
                Yh[i] = g_new[i] - g[i]
            rho[head] = 1.0 / sy
            head = (head + 1) % memory
            if stored < memory:
                stored += 1
        for i in range(dim):
            x[i] += a * d[i]
            g[i] = g_new[i]
        f = f_new
        it += 1
        progress = True
        if f <= f_tol:
            status = 1
            break
    return x, f, it, nfev, status


def minimize(instance, R: float, start, settings: OptimizerSettings = None, clock=None) -> MinimizeResult:
    """Locally minimize the packing energy at fixed container radius ``R``.

    ``clock``, when given, is charged with the work performed (see
    :class:`pucc.clock.WorkClock`).
    """
    settings = settings or OptimizerSettings()
    if not R > 0:
        raise ValueError(f"container radius must be positive, got {R}")
    x0 = _flat(start, instance).copy()
    f0, g0 = energy_and_gradient(x0, instance.radii, float(R))
    if not (np.all(np.isfinite(x0)) and math.isfinite(f0) and np.all(np.isfinite(g0))):
        raise InvalidStartError("start pattern, energy or gradient is not finite")
    x, f, iters, nfev, code = lbfgs(
        PACKING_ENERGY,
        x0,
        instance.radii,
        float(R),
        settings.memory,
        settings.grad_tol,
        settings.energy_tol,
        settings.iteration_cap(instance.n),
        settings.c1,
        settings.c2,
        settings.max_line_search,
    )
    if clock is not None:
        clock.charge(nfev, instance.n)
    return MinimizeResult(x.reshape(-1, 2), float(f), int(iters), Termination(code), int(nfev))


def check_gradient(instance, R: float, pattern, h: float = 1e-6) -> float:
    """Worst relative gap between the analytic gradient and central differences.

    Components where both sides are below 1e-6 in magnitude are skipped.
    """
    x = _flat(pattern, instance).copy()
    radii = instance.radii
    _, g = energy_and_gradient(x, radii, float(R))
    worst = 0.0
    for k in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[k] += h
        xm[k] -= h
        fd = (energy_and_gradient(xp, radii, float(R))[0] - energy_and_gradient(xm, radii, float(R))[0]) / (2 * h)
        scale = max(abs(g[k]), abs(fd))
        if scale <= 1e-6:
            continue
        worst = max(worst, abs(g[k] - fd) / scale)
    return worst
