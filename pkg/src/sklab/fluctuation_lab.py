"""Per-sample fluctuation statistics and second-order residuals.

For a sample with eigenvalues ``lam`` and spike coordinates ``u`` the module
evaluates, at a point ``l`` to the right of the spectrum, the centered
resolvent-type statistics

    U(l)      = (1/sqrt n) sum (n u_i^2 - 1) / (l - lam_i)
    U'(l)     = -(1/sqrt n) sum (n u_i^2 - 1) / (l - lam_i)^2
    Lambda(l) = sum 1/(l - lam_i) - n s(l)
    W, W'     = same weighted sums with the deterministic classical locations
    X, X', Y  = independent-summand variants built from the raw gaussians

and assembles the second-order residuals of the extensive ground state: the
ground state minus its deterministic, sqrt(n)-Gaussian and order-one
corrections, which converge to zero in probability.  The quadratic matrix in
the order-one correction is the dual-corrected one (``G_resid``): the closed
form display matrix misses the rank-one term produced by eliminating the
dual variable and leaves an order-one gap (see the matching tests for the
numerical demonstration).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy import stats as scipy_stats

from .rmt_core import GoeSample, PoleError, classical_locations, stieltjes
from .theory_engine import FluctuationParams, LeadingOrder

__all__ = [
    "FluctuationSample",
    "aggregate",
    "alt_residual_sphere",
    "compute_statistics",
    "residual_ball",
    "residual_sphere",
]

#: minimum clearance between the evaluation point and the top eigenvalue
POLE_MARGIN = 1e-10


@dataclass
class FluctuationSample:
    """Statistics of one sample evaluated at one resolvent point.

    ``X``/``Xprime``/``Y`` are only available when the sample carries its raw
    gaussians (spectral sampling in invariance mode); otherwise they are None.
    """

    n: int
    l: float
    U: float
    Uprime: float
    Lambda: float
    W: float
    Wprime: float
    X: float | None = None
    Xprime: float | None = None
    Y: float | None = None
    valid: bool = True
    residual: float | None = None  # set by the campaign runner, not here
    seed: int | None = None


def compute_statistics(sample: GoeSample, l: float) -> FluctuationSample:
    """Evaluate all fluctuation statistics of ``sample`` at the point ``l``.

    Raises ``PoleError`` when ``l`` is not strictly above the top eigenvalue
    by at least ``POLE_MARGIN`` (such trials are invalid: the statistics have
    a pole crossing or sit too close to one to be finite-size meaningful).
    """
    n = sample.n
    lam = sample.eigenvalues
    if l <= sample.lambda_max + POLE_MARGIN:
        raise PoleError(
            f"evaluation point {l} is within {POLE_MARGIN} of the top eigenvalue "
            f"{sample.lambda_max}"
        )
    s0 = stieltjes("semicircle", l)

    centered = n * sample.u**2 - 1.0
    gaps = l - lam
    root_n = math.sqrt(n)
    u_stat = float(centered @ (1.0 / gaps)) / root_n
    up_stat = -float(centered @ (1.0 / gaps**2)) / root_n
    lambda_stat = float(np.sum(1.0 / gaps)) - n * s0

    theta = classical_locations(n)
    tgaps = l - theta  # theta_n = sqrt(2) < l since l > lambda_max >= ... > sqrt 2 - o(1)
    if tgaps[-1] <= 0.0:
        raise PoleError(f"evaluation point {l} does not clear the support edge")
    w_stat = float(centered @ (1.0 / tgaps)) / root_n
    wp_stat = -float(centered @ (1.0 / tgaps**2)) / root_n

    x = xp = y = None
    if sample.raw_gaussians is not None:
        raw_centered = sample.raw_gaussians**2 - 1.0
        s1 = stieltjes("semicircle", l, order=1)
        x = float(raw_centered @ (1.0 / tgaps - s0)) / root_n
        xp = float(raw_centered @ (-1.0 / tgaps**2 - s1)) / root_n
        y = float(np.sum(raw_centered)) / root_n

    return FluctuationSample(
        n=n,
        l=l,
        U=u_stat,
        Uprime=up_stat,
        Lambda=lambda_stat,
        W=w_stat,
        Wprime=wp_stat,
        X=x,
        Xprime=xp,
        Y=y,
    )


Branch = Literal["auto", "positive", "negative"]


def _branch_values(leading: LeadingOrder, branch: Branch) -> list[float]:
    if branch == "negative" and leading.multiplicity != "pair":
        raise ValueError("negative branch requested for a single maximizer")
    if branch in ("positive", "negative") or leading.multiplicity == "single":
        return [leading.value]
    return [leading.value, leading.value]  # pair branches share every constant


def _second_order_residual(
    value: float,
    stats: FluctuationSample,
    leading: LeadingOrder,
    params: FluctuationParams,
    branch: Branch,
) -> float:
    if not leading.applicable:
        raise ValueError(
            f"the fluctuation description does not apply here: {leading.reason}"
        )
    n = stats.n
    v = np.array([stats.U, stats.Uprime])
    quad = 0.5 * float(v @ params.G_resid @ v)
    best = math.inf
    for b_val in _branch_values(leading, branch):
        r = (
            value
            - n * b_val
            - math.sqrt(n) * params.kappa * stats.U
            - params.kappa * stats.Lambda
            + quad
        )
        if abs(r) < abs(best):
            best = r
    return best


def residual_sphere(
    value: float,
    stats: FluctuationSample,
    leading: LeadingOrder,
    params: FluctuationParams,
    branch: Branch = "auto",
) -> float:
    """Second-order residual of the extensive sphere ground state.

    ``value`` is the exact finite-n ground state; the residual subtracts the
    deterministic term, the sqrt(n) Gaussian term and the order-one
    correction, and converges to zero in probability.  For a symmetric pair
    of maximizers every constant is even in the overlap, so the two branches
    coincide; ``branch="auto"`` takes the smaller magnitude anyway.
    """
    return _second_order_residual(value, stats, leading, params, branch)


def residual_ball(
    value: float,
    stats: FluctuationSample,
    leading: LeadingOrder,
    params: FluctuationParams,
    branch: Branch = "auto",
) -> float:
    """Second-order residual of the extensive radial (ball) ground state."""
    if leading.r_hat is None:
        raise ValueError("ball residual requires a radial leading order")
    return _second_order_residual(value, stats, leading, params, branch)


def alt_residual_sphere(
    value: float,
    stats: FluctuationSample,
    leading: LeadingOrder,
    params: FluctuationParams,
) -> float:
    """Sphere residual in the independent-summand statistics.

    Uses the raw-gaussian statistics (X, X', Y) in place of (U, U'): the
    change of weights introduces the extra order-one cross term
    ``kappa X Y``.  Requires a sample carrying raw gaussians.
    """
    if stats.X is None or stats.Xprime is None or stats.Y is None:
        raise ValueError(
            "independent-summand statistics unavailable: sample carries no raw gaussians"
        )
    if not leading.applicable:
        raise ValueError(
            f"the fluctuation description does not apply here: {leading.reason}"
        )
    n = stats.n
    v = np.array([stats.X, stats.Xprime])
    return (
        value
        - n * leading.value
        - math.sqrt(n) * params.kappa * stats.X
        - params.kappa * stats.Lambda
        + params.kappa * stats.X * stats.Y
        + 0.5 * float(v @ params.G_resid @ v)
    )


def aggregate(
    samples: Sequence[FluctuationSample],
    params: FluctuationParams | None = None,
) -> dict:
    """Empirical moments (and KS distances, given theory constants) of a batch.

    Only valid samples enter; at least two are required.  With ``params``
    given, each statistic is standardized by its theoretical law and compared
    to a standard Gaussian via the Kolmogorov-Smirnov distance.
    """
    valid = [s for s in samples if s.valid]
    if len(valid) < 2:
        raise ValueError(f"need at least 2 valid samples, got {len(valid)}")
    arr = lambda name: np.array([getattr(s, name) for s in valid], dtype=float)
    u, up, lam = arr("U"), arr("Uprime"), arr("Lambda")
    w, wp = arr("W"), arr("Wprime")
    out = {
        "count": len(valid),
        "mean_U": float(u.mean()),
        "var_U": float(u.var(ddof=1)),
        "mean_Uprime": float(up.mean()),
        "var_Uprime": float(up.var(ddof=1)),
        "cov_UUprime": float(np.cov(u, up, ddof=1)[0, 1]),
        "mean_Lambda": float(lam.mean()),
        "var_Lambda": float(lam.var(ddof=1)),
        "cov_LambdaU": float(np.cov(lam, u, ddof=1)[0, 1]),
        "cov_LambdaUprime": float(np.cov(lam, up, ddof=1)[0, 1]),
        "mean_W": float(w.mean()),
        "var_W": float(w.var(ddof=1)),
        "mean_Wprime": float(wp.mean()),
        "var_Wprime": float(wp.var(ddof=1)),
        "cov_WWprime": float(np.cov(w, wp, ddof=1)[0, 1]),
    }
    have_raw = all(s.X is not None for s in valid)
    if have_raw:
        x, xp, y = arr("X"), arr("Xprime"), arr("Y")
        out.update(
            {
                "mean_X": float(x.mean()),
                "var_X": float(x.var(ddof=1)),
                "var_Xprime": float(xp.var(ddof=1)),
                "cov_XXprime": float(np.cov(x, xp, ddof=1)[0, 1]),
                "mean_Y": float(y.mean()),
                "var_Y": float(y.var(ddof=1)),
                "cov_XY": float(np.cov(x, y, ddof=1)[0, 1]),
                "cov_LambdaY": float(np.cov(lam, y, ddof=1)[0, 1]),
            }
        )
    if params is not None:
        ks = lambda z: float(scipy_stats.kstest(z, "norm").statistic)
        out["ks_U"] = ks(u / math.sqrt(params.var_U))
        out["ks_Uprime"] = ks(up / math.sqrt(params.var_Uprime))
        out["ks_Lambda"] = ks(
            (lam - params.lambda_mean) / math.sqrt(params.lambda_var)
        )
        out["ks_W"] = ks(w / math.sqrt(params.Sigma[0, 0]))
        out["ks_Wprime"] = ks(wp / math.sqrt(params.Sigma[1, 1]))
        if have_raw:
            out["ks_Y"] = ks(arr("Y") / math.sqrt(2.0))
    return out
