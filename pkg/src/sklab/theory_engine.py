"""Closed-form limit theory: leading order, phase boundaries, fluctuation constants.

The n-to-infinity ground state per site converges to

    sphere:  max_alpha  B(alpha)          = f(alpha) + beta sqrt(2 (1-alpha^2))
    ball:    max_{alpha,r} Bt(alpha, r)   = f(r alpha) + g(r) + beta r^2 sqrt(2 (1-alpha^2))

where ``f`` is the spike profile and ``g`` the radial profile (the TAP
correction being the main instance).  This module locates the maximizers —
in closed form for monomial spikes, numerically otherwise — exposes the
phase-transition couplings, and evaluates every constant appearing in the
second-order (Gaussian fluctuation) description: the coupling ``kappa`` of
the leading Gaussian, the quadratic matrix ``G``, the limit laws of the
resolvent-type statistics, and the generic minimax expansion they come from.

Geometry shorthand used throughout, for a maximizer overlap ``a``::

    z_hat = sqrt(2 (1 - a^2))        (value of the semicircle transform at l_hat)
    l_hat = (2 - a^2) / z_hat        (the dual point where the transform is z_hat)

so that ``sqrt(l_hat^2 - 2) = a^2 / z_hat`` and ``l_hat z_hat = 2 - a^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .rmt_core import SQRT2, PoleError, stieltjes

__all__ = [
    "FluctuationParams",
    "GenericMinimaxInput",
    "InapplicableRegimeError",
    "LeadingOrder",
    "MinimaxExpansion",
    "RadialSpec",
    "SpikeSpec",
    "corollary_constants",
    "critical_betas",
    "evaluate_B",
    "evaluate_B_tilde",
    "fluct_params_ball",
    "fluct_params_sphere",
    "generic_minimax_params",
    "limiting_lambda_law",
    "maximize_ball_theory",
    "maximize_sphere_theory",
    "tap_threshold",
]


class InapplicableRegimeError(RuntimeError):
    """The Gaussian fluctuation description does not apply at these parameters."""


# ---------------------------------------------------------------------------
# Spike and radial profiles


def _vectorize_if_needed(fn: Callable) -> Callable:
    try:
        probe = fn(np.array([0.1, 0.2]))
        if np.shape(probe) == (2,):
            return fn
    except Exception:
        pass
    return np.vectorize(fn, otypes=[float])


def _check_derivative(fn, dfn, x: float, name: str) -> None:
    h = 1e-3
    fd = (8.0 * (fn(x + h) - fn(x - h)) - (fn(x + 2 * h) - fn(x - 2 * h))) / (12.0 * h)
    got = float(dfn(x))
    if abs(got - fd) > 1e-5 * max(1.0, abs(fd)):
        raise ValueError(f"{name} inconsistent with finite differences at x={x}: "
                         f"{got} vs {fd}")


@dataclass
class SpikeSpec:
    """Spike profile ``f`` with derivatives through third order.

    Use ``SpikeSpec.monomial(h, k)`` for ``f(x) = h x^k`` or
    ``SpikeSpec.custom(f, d1, d2, d3)`` with array-compatible callables.
    Custom derivatives are finite-difference-checked at construction so a
    mistyped derivative fails fast rather than corrupting downstream constants.
    """

    kind: Literal["monomial", "custom"]
    h: float | None = None
    k: int | None = None
    _f: Callable | None = None
    _d1: Callable | None = None
    _d2: Callable | None = None
    _d3: Callable | None = None

    @classmethod
    def monomial(cls, h: float, k: int) -> "SpikeSpec":
        if k < 1 or k != int(k):
            raise ValueError(f"monomial degree must be a positive integer, got {k}")
        if not math.isfinite(h):
            raise ValueError(f"monomial coefficient must be finite, got {h}")
        return cls(kind="monomial", h=float(h), k=int(k))

    @classmethod
    def custom(cls, f: Callable, d1: Callable, d2: Callable, d3: Callable) -> "SpikeSpec":
        for x in (-0.57, 0.11, 0.73):
            _check_derivative(f, d1, x, "d1")
            _check_derivative(d1, d2, x, "d2")
            _check_derivative(d2, d3, x, "d3")
        return cls(
            kind="custom",
            _f=_vectorize_if_needed(f),
            _d1=_vectorize_if_needed(d1),
            _d2=_vectorize_if_needed(d2),
            _d3=_vectorize_if_needed(d3),
        )

    def value(self, x):
        if self.kind == "monomial":
            return self.h * np.power(x, self.k)
        return self._f(x)

    def d1(self, x):
        if self.kind == "monomial":
            return self.h * self.k * np.power(x, self.k - 1)
        return self._d1(x)

    def d2(self, x):
        if self.kind == "monomial":
            if self.k == 1:
                return np.zeros_like(np.asarray(x, dtype=float)) + 0.0
            return self.h * self.k * (self.k - 1) * np.power(x, self.k - 2)
        return self._d2(x)

    def d3(self, x):
        if self.kind == "monomial":
            if self.k <= 2:
                return np.zeros_like(np.asarray(x, dtype=float)) + 0.0
            return self.h * self.k * (self.k - 1) * (self.k - 2) * np.power(x, self.k - 3)
        return self._d3(x)

    def label(self) -> str:
        if self.kind == "monomial":
            return f"monomial:{self.k}:{self.h:g}"
        return "custom"

    def to_dict(self) -> dict:
        if self.kind == "monomial":
            return {"kind": "monomial", "h": self.h, "k": self.k}
        return {"kind": "custom"}


@dataclass
class RadialSpec:
    """Radial profile ``g`` with derivatives through second order.

    ``RadialSpec.tap(beta)`` is the TAP correction
    ``g(r) = log(1-r^2)/2 + (beta^2/2)(1-r^2)^2`` on the Plefka domain
    ``[sqrt(q_P), 1]`` with ``q_P = max(1 - 1/(sqrt2 beta), 0)``;
    ``RadialSpec.custom(g, d1, d2, domain)`` takes an explicit radial domain.
    """

    kind: Literal["tap", "custom"]
    beta: float | None = None
    domain: tuple[float, float] = (0.0, 1.0)
    _g: Callable | None = None
    _d1: Callable | None = None
    _d2: Callable | None = None

    @classmethod
    def tap(cls, beta: float) -> "RadialSpec":
        if beta <= 0:
            raise ValueError(f"beta must be positive, got {beta}")
        q_p = max(1.0 - 1.0 / (SQRT2 * beta), 0.0)
        return cls(kind="tap", beta=float(beta), domain=(math.sqrt(q_p), 1.0))

    @classmethod
    def custom(cls, g: Callable, d1: Callable, d2: Callable,
               domain: tuple[float, float] = (0.0, 1.0)) -> "RadialSpec":
        lo, hi = float(domain[0]), float(domain[1])
        if not 0.0 <= lo < hi:
            raise ValueError(f"invalid radial domain {domain}")
        for r in (lo + 0.31 * (hi - lo), lo + 0.77 * (hi - lo)):
            _check_derivative(g, d1, r, "d1")
            _check_derivative(d1, d2, r, "d2")
        return cls(
            kind="custom",
            domain=(lo, hi),
            _g=_vectorize_if_needed(g),
            _d1=_vectorize_if_needed(d1),
            _d2=_vectorize_if_needed(d2),
        )

    @property
    def plefka_q(self) -> float:
        if self.kind != "tap":
            raise ValueError("plefka_q is defined for the tap profile only")
        return max(1.0 - 1.0 / (SQRT2 * self.beta), 0.0)

    def value(self, r):
        if self.kind == "tap":
            r = np.asarray(r, dtype=float)
            one = 1.0 - r * r
            with np.errstate(divide="ignore", invalid="ignore"):
                out = 0.5 * np.log(one) + 0.5 * self.beta**2 * one**2
            out = np.where(one > 0.0, out, -np.inf)
            return float(out) if out.ndim == 0 else out
        return self._g(r)

    def d1(self, r):
        if self.kind == "tap":
            r = np.asarray(r, dtype=float)
            one = 1.0 - r * r
            out = -r / one - 2.0 * self.beta**2 * r * one
            return float(out) if out.ndim == 0 else out
        return self._d1(r)

    def d2(self, r):
        if self.kind == "tap":
            r = np.asarray(r, dtype=float)
            one = 1.0 - r * r
            out = -(1.0 + r * r) / one**2 - 2.0 * self.beta**2 * (1.0 - 3.0 * r * r)
            return float(out) if out.ndim == 0 else out
        return self._d2(r)

    def to_dict(self) -> dict:
        if self.kind == "tap":
            return {"kind": "tap", "beta": self.beta}
        return {"kind": "custom", "domain": list(self.domain)}


# ---------------------------------------------------------------------------
# Leading order


@dataclass
class LeadingOrder:
    """Maximizer data of the limiting variational problem.

    ``applicable`` is False whenever the Gaussian fluctuation description
    breaks down (zero-overlap maximizer, boundary maximizer, ties at a
    critical coupling, degenerate Hessian); ``reason`` says why.
    """

    alpha_hat: float
    l_hat: float
    z_hat: float
    value: float
    multiplicity: Literal["single", "pair"]
    r_hat: float | None = None
    applicable: bool = True
    reason: str | None = None


def _geometry(alpha_hat: float) -> tuple[float, float]:
    z = math.sqrt(2.0 * max(1.0 - alpha_hat * alpha_hat, 0.0))
    if z == 0.0:
        return math.inf, 0.0
    return (2.0 - alpha_hat * alpha_hat) / z, z


def evaluate_B(alpha, beta: float, f: SpikeSpec):
    """Limiting sphere functional ``f(alpha) + beta sqrt(2 (1-alpha^2))``."""
    alpha = np.asarray(alpha, dtype=float)
    if np.any(np.abs(alpha) > 1.0):
        raise ValueError("overlap must lie in [-1, 1]")
    out = f.value(alpha) + beta * np.sqrt(np.maximum(2.0 * (1.0 - alpha**2), 0.0))
    return float(out) if out.ndim == 0 else out


def evaluate_B_tilde(alpha, r, beta: float, f: SpikeSpec, g: RadialSpec):
    """Limiting radial functional ``f(r alpha) + g(r) + beta r^2 sqrt(2 (1-alpha^2))``."""
    alpha = np.asarray(alpha, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(np.abs(alpha) > 1.0):
        raise ValueError("overlap must lie in [-1, 1]")
    out = (
        f.value(r * alpha)
        + g.value(r)
        + beta * r**2 * np.sqrt(np.maximum(2.0 * (1.0 - alpha**2), 0.0))
    )
    return float(out) if out.ndim == 0 else out


def _sphere_B_second(alpha: float, beta: float, f: SpikeSpec) -> float:
    one = 1.0 - alpha * alpha
    return float(f.d2(alpha)) - SQRT2 * beta / one**1.5


def critical_betas(k: int, h: float) -> tuple[float, float | None]:
    """Phase couplings of the sphere problem for a monomial spike.

    Returns ``(beta_c, beta_tilde_c)``: below ``beta_c`` the nonzero-overlap
    state is the global maximum; ``beta_tilde_c`` (degree >= 3 only, else
    None) is where the interior critical point itself disappears.
    """
    if k < 1 or k != int(k):
        raise ValueError(f"degree must be a positive integer, got {k}")
    if h <= 0:
        raise ValueError(f"critical couplings require h > 0, got {h}")
    if k == 1:
        return math.inf, None
    if k == 2:
        return SQRT2 * h, None
    beta_c = (h / SQRT2) * ((k - 1) / (k - 2)) * (1.0 - 1.0 / (k - 1) ** 2) ** (k / 2)
    beta_tilde = (
        h * k / SQRT2 * (k - 2) ** ((k - 2) / 2.0) / (k - 1) ** ((k - 1) / 2.0)
    )
    return beta_c, beta_tilde


def _largest_root_decreasing(fun, lo: float, hi: float, tol: float = 1e-15) -> float:
    """Root of a strictly decreasing function on [lo, hi] by bisection."""
    flo, fhi = fun(lo), fun(hi)
    if flo < 0.0 or fhi > 0.0:
        raise ValueError("root not bracketed")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol:
            break
        if fun(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _zero_overlap_leading(beta: float, f: SpikeSpec, reason: str) -> LeadingOrder:
    return LeadingOrder(
        alpha_hat=0.0,
        l_hat=SQRT2,
        z_hat=SQRT2,
        value=float(f.value(0.0)) + SQRT2 * beta,
        multiplicity="single",
        applicable=False,
        reason=reason,
    )


def _maximize_sphere_monomial(f: SpikeSpec, beta: float) -> LeadingOrder:
    h, k = f.h, f.k
    if h == 0.0:
        return _zero_overlap_leading(beta, f, "zero-overlap maximizer (no spike)")
    if h < 0.0:
        if k % 2 == 0:
            return _zero_overlap_leading(beta, f, "zero-overlap maximizer (h < 0)")
        mirror = _maximize_sphere_monomial(SpikeSpec.monomial(-h, k), beta)
        mirror.alpha_hat = -mirror.alpha_hat
        return mirror
    if k == 1:
        d = h * h + 2.0 * beta * beta
        a = h / math.sqrt(d)
        l_hat, z_hat = _geometry(a)
        return LeadingOrder(a, l_hat, z_hat, math.sqrt(d), "single")
    if k == 2:
        beta_c, _ = critical_betas(k, h)
        if beta > beta_c:
            return _zero_overlap_leading(beta, f, "zero-overlap maximizer")
        a = math.sqrt(1.0 - beta * beta / (2.0 * h * h)) if beta < beta_c else 0.0
        if beta == beta_c or a == 0.0:
            lo = _zero_overlap_leading(beta, f, "tied with zero-overlap state")
            lo.multiplicity = "pair"
            return lo
        l_hat, z_hat = _geometry(a)
        return LeadingOrder(
            a, l_hat, z_hat, h + beta * beta / (2.0 * h), "pair"
        )
    # degree >= 3
    beta_c, beta_tilde = critical_betas(k, h)
    if beta >= beta_tilde:
        return _zero_overlap_leading(beta, f, "no interior critical point")
    track = 2.0 * (beta / (h * k)) ** 2
    left = math.sqrt((k - 2.0) / (k - 1.0))
    a = _largest_root_decreasing(
        lambda t: t ** (2 * (k - 2)) * (1.0 - t * t) - track, left, 1.0
    )
    if beta > beta_c:
        return _zero_overlap_leading(beta, f, "zero-overlap maximizer")
    l_hat, z_hat = _geometry(a)
    lo = LeadingOrder(
        a, l_hat, z_hat, float(evaluate_B(a, beta, f)),
        "pair" if k % 2 == 0 else "single",
    )
    if beta == beta_c:
        lo.applicable = False
        lo.reason = "tied with zero-overlap state"
    return lo


_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max_scalar(fun, a: float, b: float, tol: float = 1e-10):
    best_x, best_f = a, fun(a)
    fb = fun(b)
    if fb > best_f:
        best_x, best_f = b, fb
    c = b - _GOLD * (b - a)
    d = a + _GOLD * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(300):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLD * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLD * (b - a)
            fd = fun(d)
    for x, fx in ((c, fc), (d, fd)):
        if fx > best_f:
            best_x, best_f = x, fx
    return best_x, best_f


def _maximize_sphere_numeric(f: SpikeSpec, beta: float) -> LeadingOrder:
    grid = np.linspace(-1.0, 1.0, 2001)
    vals = evaluate_B(grid, beta, f)
    order = np.argsort(-vals, kind="stable")
    fun = lambda t: float(evaluate_B(t, beta, f))
    cands = []
    for idx in order[:3]:
        lo = grid[max(idx - 1, 0)]
        hi = grid[min(idx + 1, grid.size - 1)]
        cands.append(_golden_max_scalar(fun, lo, hi))
    cands.sort(key=lambda c: (-c[1], c[0]))
    a, val = cands[0]
    # stationarity polish when strictly interior
    if abs(a) < 1.0 - 1e-9:
        for _ in range(50):
            one = 1.0 - a * a
            b1 = float(f.d1(a)) - SQRT2 * beta * a / math.sqrt(one)
            b2 = _sphere_B_second(a, beta, f)
            if b2 >= 0.0 or abs(b1) < 1e-14:
                break
            step = b1 / b2
            if abs(step) > 1e-2:
                break
            a -= step
        val = fun(a)
    l_hat, z_hat = _geometry(a)
    lo = LeadingOrder(a, l_hat, z_hat, val, "single")
    # detect a symmetric partner
    if abs(a) > 1e-8:
        mirrored = fun(-a)
        one = 1.0 - a * a
        slope = abs(float(f.d1(-a)) + SQRT2 * beta * a / math.sqrt(one)) if one > 0 else 1.0
        if abs(mirrored - val) <= 1e-9 * max(1.0, abs(val)) and slope <= 1e-6:
            lo.multiplicity = "pair"
            if lo.alpha_hat < 0:
                lo.alpha_hat = abs(lo.alpha_hat)
    if abs(a) <= 1e-8:
        lo.applicable = False
        lo.reason = "zero-overlap maximizer"
    elif abs(a) >= 1.0 - 1e-9:
        lo.applicable = False
        lo.reason = "full-alignment maximizer"
    elif _sphere_B_second(lo.alpha_hat, beta, f) >= 0.0:
        lo.applicable = False
        lo.reason = "degenerate curvature at maximizer"
    return lo


def maximize_sphere_theory(f: SpikeSpec, beta: float) -> LeadingOrder:
    """Global maximizer of the limiting sphere functional.

    Closed forms for monomial spikes (including the phase dispatch against
    ``critical_betas``); otherwise a 2001-point grid with golden-section and
    Newton polish.  A zero-overlap or tied maximizer is returned flagged
    ``applicable=False`` rather than raising, since the leading order is
    still perfectly well defined there.
    """
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if f.kind == "monomial":
        return _maximize_sphere_monomial(f, beta)
    return _maximize_sphere_numeric(f, beta)


# ---------------------------------------------------------------------------
# Ball / TAP leading order


def _plefka_F(beta: float) -> float:
    if beta <= 1.0 / SQRT2:
        return beta * beta / 2.0
    return SQRT2 * beta - 0.75 - 0.5 * math.log(SQRT2 * beta)


def tap_threshold(k: int, beta: float) -> float:
    """Critical spike strength ``h_c(k, beta)`` of the radial (TAP) problem.

    Above ``h_c`` the maximizer is interior with nonzero overlap; below it the
    maximizer sits at the Plefka boundary with zero overlap.  Degree 1 spikes
    always align (``h_c = 0``); degree 2 gives ``max(1/2, beta/sqrt2)``; for
    degree >= 3 the threshold is a variational infimum over the Plefka
    interval, evaluated on a 2001-point interior grid (margin 1e-6) and
    refined by golden-section search.
    """
    if k < 1 or k != int(k):
        raise ValueError(f"degree must be a positive integer, got {k}")
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if k == 1:
        return 0.0
    if k == 2:
        return max(0.5, beta / SQRT2)
    g = RadialSpec.tap(beta)
    f_val = _plefka_F(beta)
    b2 = beta * beta

    def ratio(r: float) -> float:
        one = 1.0 - r * r
        core = r * r * (1.0 - 2.0 * b2 * one * one)
        if core <= 0.0 or r <= 0.0:
            return math.inf
        return (f_val - float(g.value(r)) - 2.0 * b2 * r * r * one) / core ** (k / 2.0)

    lo = math.sqrt(g.plefka_q) + 1e-6
    hi = 1.0 - 1e-6
    rs = np.linspace(lo, hi, 2001)
    vals = np.array([ratio(r) for r in rs])
    idx = int(np.argmin(vals))
    a = rs[max(idx - 1, 0)]
    b = rs[min(idx + 1, rs.size - 1)]
    r_best, neg_best = _golden_max_scalar(lambda r: -ratio(r), a, b)
    return -neg_best


def _boundary_leading(beta: float, f: SpikeSpec, g: RadialSpec, reason: str) -> LeadingOrder:
    q_p = g.plefka_q if g.kind == "tap" else None
    r_b = math.sqrt(q_p) if q_p is not None else g.domain[0]
    value = _plefka_F(beta) if g.kind == "tap" else float(
        evaluate_B_tilde(0.0, r_b, beta, f, g)
    )
    return LeadingOrder(
        alpha_hat=0.0,
        l_hat=SQRT2,
        z_hat=SQRT2,
        value=value,
        multiplicity="single",
        r_hat=r_b,
        applicable=False,
        reason=reason,
    )


def _maximize_ball_tap_monomial(f: SpikeSpec, g: RadialSpec, beta: float) -> LeadingOrder:
    h, k = f.h, f.k
    q_p = g.plefka_q
    if h <= 0.0:
        if h < 0.0 and k % 2 == 1:
            mirror = _maximize_ball_tap_monomial(SpikeSpec.monomial(-h, k), g, beta)
            mirror.alpha_hat = -mirror.alpha_hat
            return mirror
        return _boundary_leading(beta, f, g, "zero-overlap boundary maximizer")
    if k == 1:
        b2 = beta * beta

        def slope(q: float) -> float:
            # derivative of sqrt(h^2 q + 2 b^2 q^2) + log(1-q)/2 + (b^2/2)(1-q)^2
            t = (h * h + 4.0 * b2 * q) / (2.0 * math.sqrt(h * h * q + 2.0 * b2 * q * q))
            return t - 0.5 / (1.0 - q) - b2 * (1.0 - q)

        lo_q, hi_q = q_p + 1e-15, 1.0 - 1e-15
        if slope(lo_q) <= 0.0:  # concave objective already decreasing
            return _boundary_leading(beta, f, g, "boundary maximizer")
        q_hat = _largest_root_decreasing(slope, lo_q, hi_q, tol=1e-15)
        r_hat = math.sqrt(q_hat)
        a = h / math.sqrt(h * h + 2.0 * b2 * q_hat)
        l_hat, z_hat = _geometry(a)
        return LeadingOrder(
            a, l_hat, z_hat, float(evaluate_B_tilde(a, r_hat, beta, f, g)),
            "single", r_hat=r_hat,
        )
    if k == 2:
        if h <= 0.5 or beta >= SQRT2 * h:
            reason = (
                "tied interior/boundary state"
                if beta == SQRT2 * h and h > 0.5
                else "zero-overlap boundary maximizer"
            )
            return _boundary_leading(beta, f, g, reason)
        r_hat = math.sqrt(1.0 - 1.0 / (2.0 * h))
        a = math.sqrt(1.0 - beta * beta / (2.0 * h * h))
        l_hat, z_hat = _geometry(a)
        value = (beta * beta / (8.0 * h * h)) * (4.0 * h - 1.0) + h - 0.5 * (
            1.0 + math.log(2.0 * h)
        )
        return LeadingOrder(a, l_hat, z_hat, value, "pair", r_hat=r_hat)
    # degree >= 3
    h_c = tap_threshold(k, beta)
    if h <= h_c:
        reason = "tied interior/boundary state" if h == h_c else "boundary maximizer"
        return _boundary_leading(beta, f, g, reason)
    b2 = beta * beta

    def t_of_q(q: float) -> float:
        core = q * (1.0 - 2.0 * b2 * (1.0 - q) ** 2)
        if core <= 0.0:
            return 0.0
        return (1.0 - q) * core ** ((k - 2) / 2.0)

    # T vanishes at both ends of (q_P, 1) with a single interior peak; the
    # maximizer radius is the larger root of T = 1/(h k), right of the peak.
    lo_q = q_p
    peak_q, peak_v = _golden_max_scalar(t_of_q, lo_q + 1e-12, 1.0 - 1e-12, tol=1e-13)
    target = 1.0 / (h * k)
    if peak_v < target:
        return _boundary_leading(beta, f, g, "no interior critical point")
    q_hat = _largest_root_decreasing(
        lambda q: t_of_q(q) - target, peak_q, 1.0 - 1e-15, tol=1e-15
    )
    r_hat = math.sqrt(q_hat)
    a = math.sqrt(max(1.0 - 2.0 * b2 * (1.0 - q_hat) ** 2, 0.0))
    l_hat, z_hat = _geometry(a)
    return LeadingOrder(
        a, l_hat, z_hat, float(evaluate_B_tilde(a, r_hat, beta, f, g)),
        "pair" if k % 2 == 0 else "single", r_hat=r_hat,
    )


def _ball_hessian(alpha: float, r: float, beta: float, f: SpikeSpec, g: RadialSpec) -> np.ndarray:
    """Hessian of the radial functional in (overlap, radius) coordinates."""
    one = 1.0 - alpha * alpha
    root = math.sqrt(one)
    x = r * alpha
    f1, f2 = float(f.d1(x)), float(f.d2(x))
    b_aa = f2 * r * r - SQRT2 * beta * r * r / one**1.5
    b_ar = f1 + f2 * r * alpha - 2.0 * SQRT2 * beta * r * alpha / root
    b_rr = f2 * alpha * alpha + float(g.d2(r)) + 2.0 * SQRT2 * beta * root
    return np.array([[b_aa, b_ar], [b_ar, b_rr]])


def _maximize_ball_numeric(f: SpikeSpec, g: RadialSpec, beta: float) -> LeadingOrder:
    r_lo, r_hi = g.domain
    alphas = np.linspace(-1.0, 1.0, 201)
    rs = np.linspace(r_lo, r_hi, 201)
    gv = np.asarray(g.value(rs), dtype=float)
    gv[~np.isfinite(gv)] = -np.inf
    grid = (
        f.value(np.outer(rs, alphas))
        + gv[:, None]
        + beta * (rs**2)[:, None] * np.sqrt(2.0 * (1.0 - alphas**2))[None, :]
    )
    fun = lambda a, r: float(evaluate_B_tilde(a, r, beta, f, g)) if np.isfinite(
        g.value(r)
    ) else -math.inf
    flat = np.argsort(-grid, axis=None, kind="stable")[:3]
    span_a = alphas[1] - alphas[0]
    span_r = rs[1] - rs[0]
    cands = []
    for pos in flat:
        i, j = np.unravel_index(pos, grid.shape)
        r_c, a_c = float(rs[i]), float(alphas[j])
        for _ in range(3):
            r_c, _ = _golden_max_scalar(
                lambda t: fun(a_c, t), max(r_lo, r_c - span_r), min(r_hi, r_c + span_r)
            )
            a_c, v_c = _golden_max_scalar(
                lambda t: fun(t, r_c), max(-1.0, a_c - span_a), min(1.0, a_c + span_a)
            )
        cands.append((v_c, a_c, r_c))
    cands.sort(key=lambda c: (-c[0], c[1], c[2]))
    val, a, r = cands[0]
    # Newton polish on the gradient when strictly interior
    interior = (
        abs(a) < 1.0 - 1e-9 and r_lo + 1e-9 < r < r_hi - 1e-9 and abs(a) > 1e-9
    )
    if interior:
        for _ in range(60):
            one = 1.0 - a * a
            grad = np.array(
                [
                    float(f.d1(r * a)) * r - SQRT2 * beta * r * r * a / math.sqrt(one),
                    float(f.d1(r * a)) * a + float(g.d1(r))
                    + 2.0 * SQRT2 * beta * r * math.sqrt(one),
                ]
            )
            hess = _ball_hessian(a, r, beta, f, g)
            try:
                step = np.linalg.solve(hess, grad)
            except np.linalg.LinAlgError:
                break
            if not np.all(np.isfinite(step)) or np.max(np.abs(step)) > 1e-2:
                break
            a, r = a - step[0], r - step[1]
            if np.max(np.abs(step)) < 1e-14:
                break
        val = fun(a, r)
    l_hat, z_hat = _geometry(a)
    lo = LeadingOrder(a, l_hat, z_hat, val, "single", r_hat=r)
    mirrored = fun(-a, r)
    if abs(a) > 1e-8 and abs(mirrored - val) <= 1e-9 * max(1.0, abs(val)):
        lo.multiplicity = "pair"
        lo.alpha_hat = abs(a)
    if abs(a) <= 1e-8:
        lo.applicable = False
        lo.reason = "zero-overlap maximizer"
    elif not (r_lo + 1e-9 < r < r_hi - 1e-9):
        lo.applicable = False
        lo.reason = "boundary maximizer"
    else:
        hess = _ball_hessian(lo.alpha_hat, r, beta, f, g)
        if not (np.trace(hess) < 0 and np.linalg.det(hess) > 0):
            lo.applicable = False
            lo.reason = "degenerate curvature at maximizer"
    return lo


def maximize_ball_theory(f: SpikeSpec, g: RadialSpec, beta: float) -> LeadingOrder:
    """Global maximizer of the limiting radial functional.

    Closed-form dispatch for monomial spikes with the TAP radial profile
    (scalar root-finding per degree, with the ``tap_threshold`` phase check);
    201x201 grid plus coordinate refinement and Newton polish otherwise.
    Boundary or zero-overlap maximizers are returned flagged.
    """
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if f.kind == "monomial" and g.kind == "tap":
        if g.beta != beta:
            raise ValueError("tap radial profile was built for a different beta")
        return _maximize_ball_tap_monomial(f, g, beta)
    return _maximize_ball_numeric(f, g, beta)


# ---------------------------------------------------------------------------
# Fluctuation constants


@dataclass
class FluctuationParams:
    """Constants of the second-order (Gaussian) description at a maximizer.

    ``G`` is the quadratic-coefficient matrix in the closed-form display
    convention; ``G_resid`` additionally carries the rank-one term
    ``w w^T / h_ll`` produced by eliminating the dual variable, which is the
    variant the empirical residuals vanish under.  ``Sigma`` is the limit
    covariance of the weighted resolvent pair evaluated from the semicircle
    transform; ``var_U``/``var_Uprime``/``cov_UUprime`` are the same numbers
    in maximizer coordinates.
    """

    kappa: float
    G: np.ndarray
    var_U: float
    var_Uprime: float
    cov_UUprime: float
    lambda_mean: float
    lambda_var: float
    Sigma: np.ndarray
    w: np.ndarray
    h_ll: float
    G_resid: np.ndarray


def limiting_lambda_law(l: float) -> tuple[float, float]:
    """Gaussian limit (mean, variance) of the centered resolvent trace at ``l``."""
    l = float(l)
    d = (l - SQRT2) * (l + SQRT2)
    if d <= 0.0:
        raise PoleError(f"resolvent law needs l > sqrt(2), got {l}")
    mean = (l - math.sqrt(d)) / (2.0 * d)
    return mean, 1.0 / (d * d)


def _sigma_from_transform(l_hat: float) -> np.ndarray:
    s0 = stieltjes("semicircle", l_hat)
    s1 = stieltjes("semicircle", l_hat, order=1)
    s2 = stieltjes("semicircle", l_hat, order=2)
    s3 = stieltjes("semicircle", l_hat, order=3)
    top = -2.0 * s1 - 2.0 * s0 * s0
    off = -s2 - 2.0 * s0 * s1
    bot = -s3 / 3.0 - 2.0 * s1 * s1
    return np.array([[top, off], [off, bot]])


def _limit_laws(alpha_hat: float) -> tuple[float, float, float, float, float]:
    a2 = alpha_hat * alpha_hat
    z = math.sqrt(2.0 * (1.0 - a2))
    var_u = z**4 / a2
    var_up = z**6 * (2.0 + a2 + a2 * a2) / a2**5
    cov = -(z**5) * (1.0 + a2) / a2**3
    lam_mean = z**3 / (2.0 * a2 * a2)
    lam_var = z**4 / a2**4
    return var_u, var_up, cov, lam_mean, lam_var


def fluct_params_sphere(
    f: SpikeSpec, beta: float, leading: LeadingOrder | None = None
) -> FluctuationParams:
    """Fluctuation constants of the sphere ground state.

    Requires an applicable leading order (interior nonzero overlap, strictly
    negative curvature); raises ``InapplicableRegimeError`` otherwise.
    """
    if leading is None:
        leading = maximize_sphere_theory(f, beta)
    if not leading.applicable:
        raise InapplicableRegimeError(leading.reason or "inapplicable leading order")
    a = leading.alpha_hat
    z = leading.z_hat
    b_pp = _sphere_B_second(a, beta, f)
    if b_pp >= 0.0:
        raise InapplicableRegimeError("curvature at the maximizer is not negative")
    kappa = beta * a * a / z**2
    k_row = (2.0 * beta * a / z**4) * np.array([2.0, a**4 / z])
    e3 = -2.0 * beta * a * a / z**3
    G = np.outer(k_row, k_row) / b_pp - np.diag([e3, 0.0])
    w = np.array([2.0 * beta / z, beta * a * a / z**2])
    h_ll = beta * z**3 / a**4
    var_u, var_up, cov, lam_mean, lam_var = _limit_laws(a)
    return FluctuationParams(
        kappa=kappa,
        G=G,
        var_U=var_u,
        var_Uprime=var_up,
        cov_UUprime=cov,
        lambda_mean=lam_mean,
        lambda_var=lam_var,
        Sigma=_sigma_from_transform(leading.l_hat),
        w=w,
        h_ll=h_ll,
        G_resid=G + np.outer(w, w) / h_ll,
    )


def fluct_params_ball(
    f: SpikeSpec, g: RadialSpec, beta: float, leading: LeadingOrder | None = None
) -> FluctuationParams:
    """Fluctuation constants of the radial (TAP) ground state.

    Assembled through the generic minimax expansion with the analytic
    partial derivatives of the radial problem; the limit laws of the
    resolvent statistics depend on the maximizer overlap only.
    """
    if leading is None:
        leading = maximize_ball_theory(f, g, beta)
    if not leading.applicable:
        raise InapplicableRegimeError(leading.reason or "inapplicable leading order")
    a, r = leading.alpha_hat, leading.r_hat
    z = leading.z_hat
    hess = _ball_hessian(a, r, beta, f, g)
    if not (np.trace(hess) < 0 and np.linalg.det(hess) > 0):
        raise InapplicableRegimeError("Hessian at the maximizer is not negative definite")
    r2 = r * r
    inp = GenericMinimaxInput(
        h_value=leading.value,
        h_g=beta * r2 * a * a / z**2,
        h_gg=-2.0 * beta * r2 * a * a / z**3,
        h_y_g=np.array([2.0 * beta * r2 * a / z**2, 2.0 * beta * r * a * a / z**2]),
        h_l_g=2.0 * beta * r2 / z,
        h_l_l=beta * r2 * z**3 / a**4,
        h_l_y=np.array([-2.0 * beta * r2 / a, 0.0]),
        hessian_B=hess,
    )
    exp = generic_minimax_params(inp)
    var_u, var_up, cov, lam_mean, lam_var = _limit_laws(a)
    return FluctuationParams(
        kappa=exp.E2,
        G=exp.G,
        var_U=var_u,
        var_Uprime=var_up,
        cov_UUprime=cov,
        lambda_mean=lam_mean,
        lambda_var=lam_var,
        Sigma=_sigma_from_transform(leading.l_hat),
        w=exp.w,
        h_ll=inp.h_l_l,
        G_resid=exp.G_resid,
    )


# ---------------------------------------------------------------------------
# Generic minimax expansion


@dataclass
class GenericMinimaxInput:
    """Partial derivatives of ``h(y, l, g)`` at the saddle, ``g`` the transform value.

    ``y`` is the outer maximization variable (dimension d); subscripted
    fields are partials at the saddle point; ``hessian_B`` is the d x d
    Hessian of the reduced outer functional ``B(y)``.
    """

    h_value: float
    h_g: float
    h_gg: float
    h_y_g: np.ndarray
    h_l_g: float
    h_l_l: float
    h_l_y: np.ndarray
    hessian_B: np.ndarray

    def __post_init__(self) -> None:
        self.h_y_g = np.atleast_1d(np.asarray(self.h_y_g, dtype=float))
        self.h_l_y = np.atleast_1d(np.asarray(self.h_l_y, dtype=float))
        self.hessian_B = np.atleast_2d(np.asarray(self.hessian_B, dtype=float))
        d = self.h_y_g.size
        if self.h_l_y.size != d or self.hessian_B.shape != (d, d):
            raise ValueError("inconsistent dimensions in minimax input")
        if self.h_l_l == 0.0:
            raise ValueError("h_l_l must be nonzero")


@dataclass
class MinimaxExpansion:
    """Coefficients of the second-order expansion of the minimax value.

    The expansion reads  value = E1 + E2 * W/sqrt(n) + F/n + o(1/n)  with
    F = E2 * Lambda - (W, W')^T G (W, W') / 2.  ``G`` follows the closed-form
    display convention ``K^T J^{-1} K - diag(E3, 0)``; ``dual_term`` is the
    rank-one matrix ``w w^T / h_ll`` from eliminating the dual variable, and
    ``G_resid = G + dual_term`` is the variant under which empirical
    residuals converge to zero.
    """

    E1: float
    E2: float
    E3: float
    w: np.ndarray
    L: np.ndarray
    K: np.ndarray
    H: np.ndarray
    G: np.ndarray
    dual_term: np.ndarray
    G_resid: np.ndarray


def generic_minimax_params(inp: GenericMinimaxInput) -> MinimaxExpansion:
    """Assemble the second-order minimax coefficients from saddle derivatives."""
    d = inp.h_y_g.size
    w = np.array([inp.h_l_g, inp.h_g])
    L = np.column_stack([inp.h_y_g, np.zeros(d)])
    K = L - np.outer(inp.h_l_y, w) / inp.h_l_l
    j_inv = np.linalg.inv(inp.hessian_B)
    H = K.T @ j_inv @ K
    G = H - np.diag([inp.h_gg, 0.0])
    dual = np.outer(w, w) / inp.h_l_l
    return MinimaxExpansion(
        E1=inp.h_value,
        E2=inp.h_g,
        E3=inp.h_gg,
        w=w,
        L=L,
        K=K,
        H=H,
        G=G,
        dual_term=dual,
        G_resid=G + dual,
    )


# ---------------------------------------------------------------------------
# Literal closed forms for monomial spikes on the sphere


def corollary_constants(k: int, h: float, beta: float) -> FluctuationParams:
    """Literal closed forms of the sphere fluctuation constants for degree 1 and 2."""
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if k == 1:
        if h == 0.0:
            raise InapplicableRegimeError("degree-1 constants need h != 0")
        d = h * h + 2.0 * beta * beta
        kappa = h * h / (4.0 * beta)
        G = np.array(
            [
                [-(h**4) * math.sqrt(d) / (8.0 * beta**4), -(h**6) / (32.0 * beta**5)],
                [-(h**6) / (32.0 * beta**5), -(h**10) / (128.0 * beta**6 * d**1.5)],
            ]
        )
        var_u = 16.0 * beta**4 / (h * h * d)
        var_up = 128.0 * beta**6 * (4.0 * beta**4 + 5.0 * beta**2 * h * h + 2.0 * h**4) / h**10
        cov = -64.0 * beta**5 * (h * h + beta * beta) / (h**6 * math.sqrt(d))
        lam_mean = 4.0 * beta**3 * math.sqrt(d) / h**4
        lam_var = 16.0 * beta**4 * d * d / h**8
        a2 = h * h / d
    elif k == 2:
        if h <= 0.0 or beta >= SQRT2 * h:
            raise InapplicableRegimeError(
                "degree-2 constants need h > 0 and beta < sqrt(2) h"
            )
        c = 2.0 * h * h - beta * beta
        kappa = c / (2.0 * beta)
        G = np.array(
            [
                [
                    -h * (4.0 * h**4 - 2.0 * h**2 * beta**2 + beta**4) / beta**4,
                    -(h**2) * c * c / (2.0 * beta**5),
                ],
                [
                    -(h**2) * c * c / (2.0 * beta**5),
                    -(c**4) / (16.0 * h * beta**6),
                ],
            ]
        )
        var_u = 2.0 * beta**4 / (h * h * c)
        var_up = 8.0 * beta**6 * (16.0 * h**4 - 6.0 * beta**2 * h**2 + beta**4) / c**5
        cov = -4.0 * beta**5 * (4.0 * h * h - beta * beta) / (h * c**3)
        lam_mean = 2.0 * h * beta**3 / (c * c)
        lam_var = 16.0 * h**4 * beta**4 / c**4
        a2 = c / (2.0 * h * h)
    else:
        raise ValueError("closed-form constants are available for degrees 1 and 2 only")
    z = math.sqrt(2.0 * (1.0 - a2))
    w = np.array([2.0 * beta / z, beta * a2 / z**2])
    h_ll = beta * z**3 / a2**2
    return FluctuationParams(
        kappa=kappa,
        G=G,
        var_U=var_u,
        var_Uprime=var_up,
        cov_UUprime=cov,
        lambda_mean=lam_mean,
        lambda_var=lam_var,
        Sigma=np.array([[var_u, cov], [cov, var_up]]),
        w=w,
        h_ll=h_ll,
        G_resid=G + np.outer(w, w) / h_ll,
    )
