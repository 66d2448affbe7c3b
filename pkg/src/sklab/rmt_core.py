"""Random-matrix primitives.

GOE sampling, spectral models with a planted direction, semicircle-law
quantities (density, CDF, classical locations), Stieltjes transforms of the
relevant spectral measures, and the Gaussian limit of linear eigenvalue
statistics.

Conventions used throughout the package:

* The coupling matrix ``J`` is symmetric with ``Var(J_ij) = 1/2`` off the
  diagonal and ``Var(J_ii) = 1``; all spectral quantities refer to the
  rescaled matrix ``J / sqrt(n)``, whose eigenvalue distribution converges
  to the semicircle law on ``[-sqrt(2), sqrt(2)]``.
* Eigenvalues are sorted ascending and made strictly increasing by an
  ulp-sized perturbation of exact ties, so downstream weighted transforms
  never see a degenerate atom.
* ``u`` denotes the coordinates of the planted unit direction in the
  eigenbasis; only ``u_i^2`` enters the transforms but the signed vector is
  kept for maximizer recovery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Literal

import numpy as np

__all__ = [
    "SQRT2",
    "GoeSample",
    "MeasureSelector",
    "PoleError",
    "classical_locations",
    "linear_stat_clt",
    "sample_goe",
    "sample_spectral_model",
    "semicircle_cdf",
    "semicircle_density",
    "stieltjes",
]

SQRT2 = math.sqrt(2.0)

#: Spectral measures the Stieltjes-transform evaluator understands.
MeasureSelector = Literal[
    "semicircle",
    "empirical_lambda",
    "classical_theta",
    "weighted_lambda_u",
    "weighted_theta_u",
]

_SELECTORS = (
    "semicircle",
    "empirical_lambda",
    "classical_theta",
    "weighted_lambda_u",
    "weighted_theta_u",
)


class PoleError(ValueError):
    """Raised when a transform is evaluated at or below an atom / branch point."""


@dataclass
class GoeSample:
    """Eigenvalues of ``J/sqrt(n)`` together with the planted direction.

    Attributes
    ----------
    n : int
        Matrix dimension.
    eigenvalues : ndarray
        Strictly increasing eigenvalues of ``J/sqrt(n)``, shape ``(n,)``.
    u : ndarray
        Unit vector of overlaps of the spike direction with the eigenbasis,
        shape ``(n,)``.
    raw_gaussians : ndarray or None
        The i.i.d. standard normals whose normalization produced ``u``
        (``invariance`` mode only); needed by the alternative fluctuation
        statistics.  ``None`` in ``rotate`` mode.
    """

    n: int
    eigenvalues: np.ndarray
    u: np.ndarray
    raw_gaussians: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.eigenvalues = np.asarray(self.eigenvalues, dtype=float)
        self.u = np.asarray(self.u, dtype=float)
        if self.eigenvalues.shape != (self.n,) or self.u.shape != (self.n,):
            raise ValueError("eigenvalues and u must both have shape (n,)")
        if np.any(np.diff(self.eigenvalues) <= 0):
            raise ValueError("eigenvalues must be strictly increasing")
        if abs(self.u @ self.u - 1.0) > 1e-10:
            raise ValueError("u must have unit norm")

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[0])


def sample_goe(n: int, seed: int) -> np.ndarray:
    """Draw a GOE matrix: symmetric, ``Var(J_ii)=1``, ``Var(J_ij)=1/2``.

    Uses the counter-based Philox generator, so a given ``(n, seed)`` pair
    reproduces the same matrix on any platform.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = np.random.Generator(np.random.Philox(seed))
    a = rng.standard_normal((n, n))
    return (a + a.T) / 2.0


def _break_ties(lam: np.ndarray) -> np.ndarray:
    """Make a sorted eigenvalue array strictly increasing (ulp perturbation)."""
    lam = np.array(lam, dtype=float)
    for i in range(1, lam.size):
        if lam[i] <= lam[i - 1]:
            lam[i] = np.nextafter(lam[i - 1], np.inf)
    return lam


def sample_spectral_model(
    n: int, seed: int, mode: Literal["rotate", "invariance"] = "rotate"
) -> GoeSample:
    """Sample eigenvalues and spike overlaps for the rank-one model.

    Parameters
    ----------
    n, seed : int
        Dimension and RNG seed (both fixed determine the sample exactly).
    mode : {"rotate", "invariance"}
        ``rotate``: diagonalize ``J/sqrt(n)`` and read the spike overlaps off
        the eigenvector matrix (``u_i = <q_i, e_1>``).  ``invariance``: keep
        the eigenvalues but draw ``u`` as an independent normalized i.i.d.
        Gaussian vector — equal in law by orthogonal invariance, and the raw
        Gaussians are retained for the alternative fluctuation statistics.

    Returns
    -------
    GoeSample
    """
    if mode not in ("rotate", "invariance"):
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.Generator(np.random.Philox(seed))
    a = rng.standard_normal((n, n))
    j = (a + a.T) / (2.0 * math.sqrt(n))
    if mode == "rotate":
        lam, q = np.linalg.eigh(j)
        u = q[0, :].copy()
        raw = None
    else:
        lam = np.linalg.eigvalsh(j)
        raw = rng.standard_normal(n)
        u = raw
    lam = _break_ties(np.sort(lam))
    u = u / math.sqrt(float(u @ u))
    return GoeSample(n=n, eigenvalues=lam, u=u, raw_gaussians=raw)


def semicircle_density(x):
    """Semicircle density ``sqrt(2 - x^2)/pi`` on ``[-sqrt(2), sqrt(2)]``, else 0."""
    scalar = np.isscalar(x) or np.ndim(x) == 0
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(arr)
    inside = np.abs(arr) < SQRT2
    out[inside] = np.sqrt(2.0 - arr[inside] ** 2) / np.pi
    return float(out[0]) if scalar else out


def semicircle_cdf(x):
    """CDF of the semicircle law on ``[-sqrt(2), sqrt(2)]``.

    Accepts scalars or arrays; raises ``PoleError`` outside the support
    (beyond a 1e-12 rounding grace, within which values are clamped).
    """
    arr = np.asarray(x, dtype=float)
    if np.any(np.abs(arr) > SQRT2 + 1e-12):
        raise PoleError(f"argument outside the support [-sqrt2, sqrt2]: {x!r}")
    arr = np.clip(arr, -SQRT2, SQRT2)
    # max(.., 0) guards against sqrt(2)**2 exceeding 2 by rounding
    val = 0.5 + (
        arr * np.sqrt(np.maximum(2.0 - arr**2, 0.0)) / 2.0 + np.arcsin(arr / SQRT2)
    ) / np.pi
    if val.ndim == 0:
        return float(val)
    return val


def classical_locations(n: int) -> np.ndarray:
    """Classical locations ``theta_{k/n}``: quantiles ``F(theta) = k/n``, k=1..n.

    Solved by bisection to ``|F(theta) - k/n| <= 1e-14``; the top location is
    ``sqrt(2)`` exactly.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return _classical_locations_cached(n).copy()


@lru_cache(maxsize=32)
def _classical_locations_cached(n: int) -> np.ndarray:
    targets = np.arange(1, n + 1, dtype=float) / n
    lo = np.full(n, -SQRT2)
    hi = np.full(n, SQRT2)
    done = np.zeros(n, dtype=bool)
    # Once an entry is done its bracket freezes, so its midpoint — the final
    # answer — stays put for the remaining iterations.
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        err = semicircle_cdf(mid) - targets
        done |= np.abs(err) <= 1e-14
        active = ~done
        high = err > 0
        hi = np.where(high & active, mid, hi)
        lo = np.where(~high & active, mid, lo)
        if done.all():
            break
    theta = 0.5 * (lo + hi)
    theta[-1] = SQRT2  # F(sqrt2) = 1 exactly
    theta.setflags(write=False)
    return theta


def _atoms_and_weights(
    sel: str, sample: GoeSample | None
) -> tuple[np.ndarray, np.ndarray]:
    if sample is None:
        raise ValueError(f"selector {sel!r} requires a sample")
    if sel in ("empirical_lambda", "weighted_lambda_u"):
        atoms = sample.eigenvalues
    else:
        atoms = _classical_locations_cached(sample.n)
    if sel in ("empirical_lambda", "classical_theta"):
        weights = np.full(sample.n, 1.0 / sample.n)
    else:
        weights = sample.u**2
    return atoms, weights


def stieltjes(
    sel: MeasureSelector,
    l: float,
    order: int = 0,
    sample: GoeSample | None = None,
) -> float:
    """Evaluate ``s_mu^(order)(l)`` for one of the model's spectral measures.

    The convention is ``s_mu(l) = \\int (l - x)^{-1} mu(dx)`` for ``l`` to the
    right of the support, so the k-th derivative is
    ``(-1)^k k! \\int (l - x)^{-(k+1)} mu(dx)``.

    Parameters
    ----------
    sel : MeasureSelector
        ``semicircle`` uses closed forms; ``empirical_lambda`` /
        ``classical_theta`` are uniformly weighted atoms at the eigenvalues /
        classical locations; the ``weighted_*_u`` variants weight the same
        atoms by ``u_i^2``.
    l : float
        Evaluation point, strictly to the right of every atom (the semicircle
        transform of order 0 extends continuously to ``l = sqrt(2)``).
    order : int
        Derivative order, 0 through 3.
    sample : GoeSample, optional
        Required for every selector except ``semicircle``.

    Returns
    -------
    float
    """
    if sel not in _SELECTORS:
        raise ValueError(f"unknown measure selector {sel!r}")
    if order not in (0, 1, 2, 3):
        raise ValueError(f"order must be in 0..3, got {order}")
    l = float(l)
    if sel == "semicircle":
        if l < SQRT2:
            raise PoleError(f"semicircle transform needs l >= sqrt(2), got {l}")
        # factored form is exact at the branch point, unlike l*l - 2
        d = (l - SQRT2) * (l + SQRT2)
        if order == 0:
            return l - math.sqrt(d)
        if d <= 0.0:
            raise PoleError("semicircle derivatives need l > sqrt(2)")
        if order == 1:
            return -(l - math.sqrt(d)) / math.sqrt(d)
        if order == 2:
            return 2.0 / d**1.5
        return -6.0 * l / d**2.5
    atoms, weights = _atoms_and_weights(sel, sample)
    if l <= atoms[-1]:
        raise PoleError(f"l={l} is not to the right of the largest atom {atoms[-1]}")
    gaps = l - atoms
    k = order
    return float(math.factorial(k) * (-1.0) ** k * np.sum(weights / gaps ** (k + 1)))


def linear_stat_clt(
    w: Callable[[float], float],
    w_prime: Callable[[float], float] | None = None,
    n_nodes: int = 200,
) -> tuple[float, float]:
    """Gaussian limit of ``sum_i w(lambda_i) - n * \\int w dmu_sc``.

    For a C^1 test function ``w`` the centered linear statistic converges to a
    normal law whose mean and variance are computed here by Gauss-Legendre
    quadrature after the substitution ``x = sqrt(2) sin(phi)`` (which removes
    the edge singularities of both integrands):

    * mean  ``(w(sqrt2) + w(-sqrt2))/4 - (1/2pi) \\int w(x) / sqrt(2-x^2) dx``
    * variance ``(1/2pi^2) \\iint ((w(x)-w(y))/(x-y))^2
      (2-xy) / (sqrt(2-x^2) sqrt(2-y^2)) dx dy``

    The diagonal of the difference quotient is the derivative ``w'``; supply
    ``w_prime`` for exact values, otherwise a central difference is used.

    Returns
    -------
    (mean, variance) : tuple of float
    """
    if n_nodes < 2:
        raise ValueError("n_nodes must be >= 2")
    nodes, wts = np.polynomial.legendre.leggauss(n_nodes)
    phi = 0.5 * math.pi * nodes
    om = 0.5 * math.pi * wts
    x = SQRT2 * np.sin(phi)
    wx = np.array([float(w(xi)) for xi in x])

    mean = (float(w(SQRT2)) + float(w(-SQRT2))) / 4.0 - float(om @ wx) / (2.0 * math.pi)

    if w_prime is None:

        def w_prime(t: float, _w=w) -> float:
            h = 1e-6 * max(1.0, abs(t))
            return (float(_w(t + h)) - float(_w(t - h))) / (2.0 * h)

    dx = x[:, None] - x[None, :]
    dw = wx[:, None] - wx[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        quot = dw / dx
    diag = np.array([float(w_prime(xi)) for xi in x])
    quot[np.arange(n_nodes), np.arange(n_nodes)] = diag
    kernel = 2.0 - x[:, None] * x[None, :]
    var = float(om @ (quot**2 * kernel) @ om) / (2.0 * math.pi**2)
    return mean, var
