"""Exact finite-n ground-state solvers.

The constrained quadratic maximum over the sphere section
``{|sigma| = 1, sigma . u = alpha}`` reduces, by Lagrange duality, to a
one-dimensional convex minimization over the dual variable ``l`` to the right
of the spectrum::

    sup sigma^T diag(lam) sigma  =  inf_{l > lam_max} { l - alpha^2 / s(l) }

where ``s`` is the u-weighted Stieltjes transform of the eigenvalues.  The
reduction holds for ``|u_n| < |alpha| < 1``; for ``|alpha| <= |u_n|`` the
supremum plateaus at ``lam_max`` (up to an explicit error bound), and for
``|alpha| = 1`` the section is the single point ``sigma = alpha u``.

Everything here is exact at finite n — no limit-theory input.  The full
ground-state solvers scan the overlap (and radius, on the ball) on a grid and
polish with golden-section search; an independent projected-gradient oracle is
provided as an equality witness for tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.linalg import null_space

from .rmt_core import GoeSample
from .theory_engine import RadialSpec, SpikeSpec

__all__ = [
    "DegenerateOverlapError",
    "InnerResult",
    "PlateauRegimeError",
    "SphereSolve",
    "BallSolve",
    "StationarityError",
    "dual_minimize",
    "inner_max",
    "oracle_direct",
    "recover_maximizer",
    "solve_ball",
    "solve_sphere",
]

Regime = Literal["dual", "plateau", "degenerate"]

#: relative pole-offset guard for the dual variable
_POLE_GUARD = 1e-13
#: relative bracket-width stopping rule for the dual bisection
_BISECT_TOL = 1e-12
#: golden-section target width for overlap/radius refinement
_GOLDEN_TOL = 1e-10
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class PlateauRegimeError(ValueError):
    """dual_minimize called with |alpha| <= |u_n|: use the plateau value."""


class DegenerateOverlapError(ValueError):
    """dual_minimize called with |alpha| >= 1: the section is degenerate."""


class StationarityError(RuntimeError):
    """Recovered maximizer failed its feasibility/stationarity checks."""


@dataclass
class InnerResult:
    """Value of the constrained quadratic maximum at one overlap."""

    value: float
    regime: Regime
    l_star: float | None = None
    plateau_error_bound: float | None = None


@dataclass
class SphereSolve:
    """Ground-state value and maximizer data on the unit sphere."""

    value: float  # extensive: n * max_alpha { f(alpha) + beta * inner(alpha) }
    alpha_star: float
    l_star: float | None
    regime: Regime
    sigma_star: np.ndarray | None = None
    curve: tuple[np.ndarray, np.ndarray] | None = None


@dataclass
class BallSolve:
    """Ground-state value and maximizer data on a radial domain."""

    value: float
    alpha_star: float
    r_star: float
    l_star: float | None
    regime: Regime
    domain: list[tuple[float, float]] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Dual minimization


def _slope_batch(
    lam: np.ndarray, w2: np.ndarray, alpha2: np.ndarray, l: np.ndarray
) -> np.ndarray:
    """Derivative of the dual objective, 1 + alpha^2 s'(l)/s(l)^2, vectorized in l."""
    out = np.empty_like(l)
    chunk = max(1, int(4e6) // max(1, lam.size))
    for a in range(0, l.size, chunk):
        b = min(a + chunk, l.size)
        inv = 1.0 / (l[a:b, None] - lam[None, :])
        s = inv @ w2
        sp = (inv * inv) @ w2  # equals -s'
        out[a:b] = 1.0 - alpha2[a:b] * sp / (s * s)
    return out


def _dual_value(lam: np.ndarray, w2: np.ndarray, alpha2: np.ndarray, l: np.ndarray):
    inv = 1.0 / (l[:, None] - lam[None, :])
    s = inv @ w2
    return l - alpha2 / s


def _dual_minimize_batch(
    lam: np.ndarray, w2: np.ndarray, alphas: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized bisection on the dual derivative for overlaps in the dual regime.

    Brackets start at the pole guard and a unit offset; the right end doubles
    until the derivative is positive.  Stops when every bracket width is below
    ``1e-12 * max(1, l)``.
    """
    alpha2 = alphas**2
    top = lam[-1]
    guard = _POLE_GUARD * max(1.0, abs(top))
    lo = np.full(alphas.shape, top + guard)
    slope_lo = _slope_batch(lam, w2, alpha2, lo)
    # roots inside the guard zone: pin to the guard point (continuous extension)
    pinned = slope_lo >= 0.0

    off = np.ones_like(alphas)
    for _ in range(200):
        hi = top + off
        pos = _slope_batch(lam, w2, alpha2, hi) > 0.0
        if np.all(pos | pinned):
            break
        off = np.where(pos | pinned, off, 2.0 * off)
    hi = top + off

    lo_b = lo.copy()
    hi_b = np.where(pinned, lo, hi)
    for _ in range(200):
        width = hi_b - lo_b
        mid = 0.5 * (lo_b + hi_b)
        if np.all(width <= _BISECT_TOL * np.maximum(1.0, np.abs(mid))):
            break
        slope = _slope_batch(lam, w2, alpha2, mid)
        neg = slope <= 0.0
        lo_b = np.where(neg & ~pinned, mid, lo_b)
        hi_b = np.where(~neg & ~pinned, mid, hi_b)
    l_star = np.where(pinned, lo, 0.5 * (lo_b + hi_b))
    return l_star, _dual_value(lam, w2, alpha2, l_star)


def dual_minimize(sample: GoeSample, alpha: float) -> tuple[float, float]:
    """Minimize the dual objective ``l - alpha^2/s(l)`` over ``l > lam_max``.

    Returns ``(l_star, value)``.  Requires the dual regime
    ``|u_n| < |alpha| < 1``; otherwise raises ``PlateauRegimeError`` or
    ``DegenerateOverlapError`` so the caller can dispatch to the closed form.
    """
    a = abs(float(alpha))
    if a >= 1.0:
        raise DegenerateOverlapError(f"|alpha|={a} is not inside the open interval (|u_n|, 1)")
    u_n = abs(float(sample.u[-1]))
    if a <= u_n:
        raise PlateauRegimeError(
            f"|alpha|={a} <= |u_n|={u_n}: the maximum plateaus at lam_max"
        )
    w2 = sample.u**2
    l_star, value = _dual_minimize_batch(
        sample.eigenvalues, w2, np.array([float(alpha)])
    )
    return float(l_star[0]), float(value[0])


def _degenerate_value(sample: GoeSample) -> float:
    return float(np.sum(sample.u**2 * sample.eigenvalues))


def _plateau_bound(sample: GoeSample) -> float:
    u_n2 = float(sample.u[-1]) ** 2
    spread = sample.lambda_max - sample.lambda_min
    return 2.0 * spread * u_n2 / math.sqrt(max(1.0 - u_n2, 1e-300))


def inner_max(sample: GoeSample, alpha: float) -> InnerResult:
    """Constrained maximum of the quadratic form at overlap ``alpha``.

    Dispatches between the dual regime, the plateau (value ``lam_max`` with an
    explicit error bound), and the degenerate section ``|alpha| = 1``.
    """
    a = abs(float(alpha))
    if a > 1.0:
        raise ValueError(f"|alpha| must be <= 1, got {alpha}")
    if a == 1.0:
        return InnerResult(value=_degenerate_value(sample), regime="degenerate")
    if a <= abs(float(sample.u[-1])):
        return InnerResult(
            value=sample.lambda_max,
            regime="plateau",
            plateau_error_bound=_plateau_bound(sample),
        )
    l_star, value = dual_minimize(sample, alpha)
    return InnerResult(value=value, regime="dual", l_star=l_star)


def recover_maximizer(sample: GoeSample, alpha: float, l_star: float) -> np.ndarray:
    """Reconstruct the maximizing sigma (in the eigenbasis) from the dual solution.

    ``sigma_i = r u_i / (2 (lam_i - l))`` with ``r = -2 alpha / s(l)``; unit
    norm holds exactly iff ``l`` is dual-stationary, so feasibility is checked
    to 1e-8 and a ``StationarityError`` is raised otherwise.
    """
    lam = sample.eigenvalues
    if l_star <= lam[-1]:
        raise StationarityError(f"l_star={l_star} does not exceed lam_max={lam[-1]}")
    gaps = l_star - lam
    s = float(np.sum(sample.u**2 / gaps))
    r = -2.0 * alpha / s
    sigma = r * sample.u / (2.0 * (lam - l_star))
    norm2 = float(sigma @ sigma)
    overlap = float(sigma @ sample.u)
    if abs(norm2 - 1.0) > 1e-8 or abs(overlap - alpha) > 1e-8:
        raise StationarityError(
            f"recovered sigma fails checks: |sigma|^2={norm2}, overlap={overlap}"
        )
    return sigma


# ---------------------------------------------------------------------------
# Grid + golden-section outer maximization


def _golden_max(fun, lo: float, hi: float, tol: float = _GOLDEN_TOL):
    """Golden-section maximization on [lo, hi]; returns (x_best, f_best).

    Endpoints are always candidates, so a boundary maximum is never lost.
    """
    a, b = float(lo), float(hi)
    best_x, best_f = a, fun(a)
    fb_end = fun(b)
    if fb_end > best_f:
        best_x, best_f = b, fb_end
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(300):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fun(d)
    for x, fx in ((c, fc), (d, fd)):
        if fx > best_f:
            best_x, best_f = x, fx
    return best_x, best_f


def _inner_values_on_grid(sample: GoeSample, alphas: np.ndarray) -> np.ndarray:
    """inner_max values for a whole overlap grid, batching the dual regime."""
    lam = sample.eigenvalues
    w2 = sample.u**2
    u_n = abs(float(sample.u[-1]))
    vals = np.empty_like(alphas)
    a = np.abs(alphas)
    degenerate = a >= 1.0
    plateau = (a <= u_n) & ~degenerate
    dual = ~degenerate & ~plateau
    vals[degenerate] = _degenerate_value(sample)
    vals[plateau] = sample.lambda_max
    if np.any(dual):
        _, v = _dual_minimize_batch(lam, w2, alphas[dual])
        vals[dual] = v
    return vals


def _inner_value(sample: GoeSample, alpha: float) -> float:
    return inner_max(sample, alpha).value


def solve_sphere(
    sample: GoeSample,
    beta: float,
    f: SpikeSpec,
    return_curve: bool = False,
    return_maximizer: bool = False,
    grid_points: int = 2001,
) -> SphereSolve:
    """Maximize ``n * (f(alpha) + beta * inner(alpha))`` over the overlap.

    Scans a uniform grid of ``grid_points`` overlaps in [-1, 1], then refines
    around the three best grid points by golden-section search to width 1e-10.
    Exact ties are broken toward the smaller overlap.
    """
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    n = sample.n
    alphas = np.linspace(-1.0, 1.0, grid_points)
    inner_vals = _inner_values_on_grid(sample, alphas)
    phi = f.value(alphas) + beta * inner_vals

    order = np.argsort(-phi, kind="stable")
    candidates: list[tuple[float, float]] = []
    for idx in order[:3]:
        lo = alphas[max(idx - 1, 0)]
        hi = alphas[min(idx + 1, grid_points - 1)]
        fun = lambda t: float(f.value(t)) + beta * _inner_value(sample, t)
        candidates.append(_golden_max(fun, lo, hi))
    # grid best as a safety net (golden search already saw the endpoints)
    candidates.append((float(alphas[order[0]]), float(phi[order[0]])))

    candidates.sort(key=lambda c: (-c[1], c[0]))
    alpha_star, best = candidates[0]

    res = inner_max(sample, alpha_star)
    l_star = res.l_star if res.regime == "dual" else (
        sample.lambda_max if res.regime == "plateau" else None
    )
    sigma = None
    if return_maximizer:
        if res.regime == "dual":
            sigma = recover_maximizer(sample, alpha_star, res.l_star)
        elif res.regime == "degenerate":
            sigma = math.copysign(1.0, alpha_star) * sample.u.copy()
    curve = (alphas, phi) if return_curve else None
    return SphereSolve(
        value=n * best,
        alpha_star=alpha_star,
        l_star=l_star,
        regime=res.regime,
        sigma_star=sigma,
        curve=curve,
    )


def _normalize_domain(R) -> list[tuple[float, float]]:
    if isinstance(R, (tuple, list)) and len(R) == 2 and np.isscalar(R[0]):
        R = [tuple(R)]
    out = []
    for lo, hi in R:
        lo, hi = float(lo), float(hi)
        if not (0.0 <= lo <= hi):
            raise ValueError(f"invalid radial interval ({lo}, {hi})")
        out.append((lo, hi))
    return out


def solve_ball(
    sample: GoeSample,
    beta: float,
    f: SpikeSpec,
    g: RadialSpec,
    R,
    grid_points: int = 201,
) -> BallSolve:
    """Maximize ``n * (f(r alpha) + g(r) + beta r^2 inner(alpha))`` over overlap and radius.

    ``R`` is a closed radial interval or a list of such intervals.  A
    ``grid_points`` x ``grid_points`` scan per interval (endpoints included)
    is refined coordinate-wise by golden-section search; the interval
    endpoints always remain candidates.
    """
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    domain = _normalize_domain(R)
    n = sample.n
    alphas = np.linspace(-1.0, 1.0, grid_points)
    inner_vals = _inner_values_on_grid(sample, alphas)

    def value_at(alpha: float, r: float, inner: float | None = None) -> float:
        if inner is None:
            inner = _inner_value(sample, alpha)
        gv = float(g.value(r))
        if not np.isfinite(gv):
            return -math.inf
        return float(f.value(r * alpha)) + gv + beta * r * r * inner

    candidates: list[tuple[float, float, float]] = []  # (value, alpha, r)
    for r_lo, r_hi in domain:
        rs = np.linspace(r_lo, r_hi, grid_points)
        gvals = np.array([g.value(r) for r in rs], dtype=float)
        gvals[~np.isfinite(gvals)] = -np.inf
        # grid of f(r*alpha) + g(r) + beta r^2 inner(alpha)
        grid = (
            f.value(np.outer(rs, alphas))
            + gvals[:, None]
            + beta * (rs**2)[:, None] * inner_vals[None, :]
        )
        flat = np.argsort(-grid, axis=None, kind="stable")[:3]
        span_r = rs[1] - rs[0] if grid_points > 1 else 0.0
        span_a = alphas[1] - alphas[0]
        for pos in flat:
            i, j = np.unravel_index(pos, grid.shape)
            r_c, a_c = float(rs[i]), float(alphas[j])
            v_c = float(grid[i, j])
            # two rounds of coordinate-wise refinement
            for _ in range(2):
                lo_r = max(r_lo, r_c - span_r)
                hi_r = min(r_hi, r_c + span_r)
                if hi_r > lo_r:
                    inner_c = _inner_value(sample, a_c)
                    r_c, v_c = _golden_max(
                        lambda t: value_at(a_c, t, inner_c), lo_r, hi_r
                    )
                lo_a = max(-1.0, a_c - span_a)
                hi_a = min(1.0, a_c + span_a)
                a_c, v_c = _golden_max(lambda t: value_at(t, r_c), lo_a, hi_a)
            candidates.append((v_c, a_c, r_c))
        # interval endpoints stay in play: refine the overlap at fixed radius
        for r_e in (r_lo, r_hi):
            j = int(np.argmax(grid[0 if r_e == r_lo else -1]))
            lo_a = max(-1.0, alphas[max(j - 1, 0)])
            hi_a = min(1.0, alphas[min(j + 1, grid_points - 1)])
            a_e, v_e = _golden_max(lambda t: value_at(t, r_e), lo_a, hi_a)
            candidates.append((v_e, a_e, r_e))

    candidates.sort(key=lambda c: (-c[0], c[1], c[2]))
    best, alpha_star, r_star = candidates[0]
    res = inner_max(sample, alpha_star)
    l_star = res.l_star if res.regime == "dual" else (
        sample.lambda_max if res.regime == "plateau" else None
    )
    return BallSolve(
        value=n * best,
        alpha_star=alpha_star,
        r_star=r_star,
        l_star=l_star,
        regime=res.regime,
        domain=domain,
    )


# ---------------------------------------------------------------------------
# Direct ascent oracle


def _as_quadratic(problem) -> tuple[np.ndarray | None, np.ndarray, np.ndarray]:
    """Return (dense matrix or None, its diagonal-model eigenvalues, spike vector)."""
    if isinstance(problem, GoeSample):
        return None, problem.eigenvalues, problem.u
    mat = np.asarray(problem, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("matrix input must be square")
    spike = np.zeros(mat.shape[0])
    spike[0] = 1.0
    return mat, np.array([]), spike


def oracle_direct(
    problem,
    beta: float,
    f: SpikeSpec,
    g: RadialSpec | None = None,
    R=None,
    restarts: int = 32,
    seed: int = 0,
    max_iter: int = 500,
) -> float:
    """Projected-gradient ascent lower-bound witness for the ground state.

    Maximizes ``n (f(sigma . u) + beta sigma^T A sigma)`` over the unit sphere
    (or, with ``g`` and ``R`` given, the radial objective over vectors with
    ``|m|`` in ``R``).  ``problem`` is a GoeSample (diagonal model) or the
    reduced symmetric matrix itself with the spike on the first coordinate.

    Multi-start with deterministic warm starts (the spike, the top eigenvector)
    plus seeded random directions; backtracking line search; renormalization
    retraction.  Returns the best objective found.
    """
    mat, lam, u = _as_quadratic(problem)
    n = u.size if mat is None else mat.shape[0]
    rng = np.random.Generator(np.random.Philox(seed))

    if mat is None:
        quad = lambda x: float(np.sum(lam * x * x))
        quad_grad = lambda x: 2.0 * lam * x
        top_vec = np.zeros(n)
        top_vec[-1] = 1.0
    else:
        quad = lambda x: float(x @ (mat @ x))
        quad_grad = lambda x: 2.0 * (mat @ x)
        _, vecs = np.linalg.eigh(mat)
        top_vec = vecs[:, -1]

    ball = g is not None
    if ball:
        domain = _normalize_domain(R if R is not None else (0.0, 1.0))

    def objective(x: np.ndarray) -> float:
        if ball:
            r = float(np.linalg.norm(x))
            gv = float(g.value(r))
            if not np.isfinite(gv):
                return -math.inf
            return n * (float(f.value(float(x @ u))) + gv + beta * quad(x))
        return n * (float(f.value(float(x @ u))) + beta * quad(x))

    def gradient(x: np.ndarray) -> np.ndarray:
        grad = float(f.d1(float(x @ u))) * u + beta * quad_grad(x)
        if ball:
            r = float(np.linalg.norm(x))
            if r > 0:
                grad = grad + float(g.d1(r)) * x / r
        return n * grad

    def project(x: np.ndarray) -> np.ndarray:
        r = float(np.linalg.norm(x))
        if r == 0.0:
            x = np.ones(n) / math.sqrt(n)
            r = 1.0
        if not ball:
            return x / r
        # clamp the radius into the nearest admissible interval
        best_r, best_gap = None, math.inf
        for lo, hi in domain:
            t = min(max(r, lo), hi)
            if abs(t - r) < best_gap:
                best_r, best_gap = t, abs(t - r)
        return x * (best_r / r) if r > 0 else x

    starts = [u.copy(), -u.copy(), top_vec, -top_vec]
    while len(starts) < max(restarts, 4):
        starts.append(rng.standard_normal(n))

    best = -math.inf
    for x0 in starts[: max(restarts, 4)]:
        x = project(x0.astype(float))
        val = objective(x)
        for _ in range(max_iter):
            grad = gradient(x)
            if not ball:
                grad = grad - (grad @ x) * x  # tangent projection
            gnorm = float(np.linalg.norm(grad))
            if gnorm <= 1e-12 * (1.0 + abs(val)):
                break
            step = 1.0 / max(1.0, gnorm)
            improved = False
            while step > 1e-14:
                cand = project(x + step * grad)
                cval = objective(cand)
                if cval > val + 1e-12 * abs(val):
                    x, val, improved = cand, cval, True
                    break
                step *= 0.5
            if not improved:
                break
        if val > best:
            best = val
    return best


def _fixed_overlap_max(
    sample: GoeSample, alpha: float, restarts: int = 64, seed: int = 1, max_iter: int = 2000
) -> float:
    """Direct maximum of the quadratic form on the section {|sigma|=1, sigma.u=alpha}.

    The constraint is eliminated by parametrizing sigma = alpha u + c B w with
    B an orthonormal basis of the complement of u and |w| = 1; the reduced
    problem is solved by projected ascent with restarts.  Test oracle for
    strong duality at small n.
    """
    lam = sample.eigenvalues
    u = sample.u
    n = sample.n
    c = math.sqrt(max(0.0, 1.0 - alpha * alpha))
    basis = null_space(u[None, :])
    rng = np.random.Generator(np.random.Philox(seed))

    def val(w: np.ndarray) -> float:
        sigma = alpha * u + c * (basis @ w)
        return float(np.sum(lam * sigma * sigma))

    m = n - 1
    best = -math.inf
    for k in range(restarts):
        w = rng.standard_normal(m)
        w /= np.linalg.norm(w)
        v = val(w)
        for _ in range(max_iter):
            sigma = alpha * u + c * (basis @ w)
            grad = 2.0 * c * (basis.T @ (lam * sigma))
            grad -= (grad @ w) * w
            if np.linalg.norm(grad) < 1e-13 * (1 + abs(v)):
                break
            step = 0.5
            improved = False
            while step > 1e-14:
                w_new = w + step * grad
                w_new /= np.linalg.norm(w_new)
                v_new = val(w_new)
                if v_new > v + 1e-13 * abs(v):
                    w, v, improved = w_new, v_new, True
                    break
                step *= 0.5
            if not improved:
                break
        best = max(best, v)
    return best
