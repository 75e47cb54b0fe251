"""Bergman metric on U: distances, metric balls, exact volumes and uniform sampling.

Sampling uses the fact that the metric ball ``D(i, r)`` is a Euclidean
ellipsoid: with ``w_n = x + i y``,

    (x^2 + (y - cosh 2r)^2) / sinh^2 2r + |w'|^2 / sinh^2 r < 1,

and ``D(z, r) = sigma_z^{-1}(D(i, r))`` where ``sigma_z^{-1}`` is affine with
constant real Jacobian ``rho(z)^{n+1}``. Uniform points of the ellipsoid thus
map to uniform points of any metric ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    CPoint,
    DomainError,
    _check_same_dim,
    _require_domain,
    cayley_inv_v,
    moebius_v,
    rho,
    rho2_v,
    rho_v,
    sigma_inv_v,
)
from .kernel import BOUND_SLACK, factorial

_ATANH_CLAMP = 1.0 - 1e-15


def atanh_clamped(x):
    x = np.minimum(np.asarray(x, dtype=float), _ATANH_CLAMP)
    return 0.5 * np.log((1.0 + x) / (1.0 - x))


def tanh_beta_v(Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    """``tanh beta(z, w)`` from the closed form in rho."""
    q = rho_v(Z) * rho_v(W) / np.abs(rho2_v(Z, W)) ** 2
    return np.sqrt(np.clip(1.0 - q, 0.0, None))


def bergman_distance_v(Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    return atanh_clamped(tanh_beta_v(Z, W))


def bergman_distance_ball_route_v(Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Same distance computed as ``atanh |phi_{Phi^-1(z)}(Phi^-1(w))|`` in the ball.

    ``Z`` and ``W`` are ``(m, n)`` arrays; the Moebius map is applied row by row.
    """
    Z = np.atleast_2d(Z)
    W = np.atleast_2d(W)
    X = cayley_inv_v(Z)
    Y = cayley_inv_v(W)
    out = np.empty(np.broadcast_shapes(X.shape, Y.shape)[:-1])
    X, Y = np.broadcast_arrays(X, Y)
    for k in range(out.shape[0]):
        out[k] = np.linalg.norm(moebius_v(X[k], Y[k]))
    return atanh_clamped(out)


def bergman_distance(z: CPoint, w: CPoint) -> float:
    _check_same_dim(z, w)
    _require_domain(z, w)
    if z == w:
        return 0.0
    return float(bergman_distance_v(z.array, w.array))


def ball_volume_at_i(n: int, r: float) -> float:
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    return math.pi**n / factorial(n) * math.sinh(2 * r) ** 2 * math.sinh(r) ** (2 * n - 2)


def ball_volume(z: CPoint, r: float) -> float:
    """Lebesgue volume of ``D(z, r)``.

    ``4 pi^n/n! * tanh^{2n} r / (1 - tanh^2 r)^{n+1} * rho(z)^{n+1}``, written
    with hyperbolic functions to stay accurate for large ``r``.
    """
    _require_domain(z)
    return ball_volume_at_i(z.dim, r) * rho(z) ** (z.dim + 1)


@dataclass(frozen=True)
class BergmanBall:
    center: CPoint
    radius: float

    def __post_init__(self):
        _require_domain(self.center)
        if not self.radius > 0:
            raise ValueError("BergmanBall radius must be positive")

    @property
    def volume(self) -> float:
        return ball_volume(self.center, self.radius)

    def contains_v(self, W: np.ndarray) -> np.ndarray:
        W = np.asarray(W)
        ok = rho_v(W) > 0
        d = np.full(W.shape[:-1], np.inf)
        d[ok] = bergman_distance_v(self.center.array, W[ok])
        return d < self.radius

    def to_json(self) -> dict:
        return {"center": self.center.to_json(), "radius": self.radius}

    @classmethod
    def from_json(cls, obj: dict) -> "BergmanBall":
        return cls(CPoint.from_json(obj["center"]), float(obj["radius"]))


def ball_contains(ball: BergmanBall, w: CPoint) -> bool:
    _require_domain(w)
    return bergman_distance(ball.center, w) < ball.radius


def _unit_ball_real(rng: np.random.Generator, m: int, d: int) -> np.ndarray:
    g = rng.standard_normal((m, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * rng.random(m)[:, None] ** (1.0 / d)


def sample_ball_v(center: np.ndarray, r: float, m: int, rng: np.random.Generator) -> np.ndarray:
    """``m`` Lebesgue-uniform points of ``D(center, r)``, shape ``(m, n)``."""
    center = np.asarray(center, dtype=complex)
    n = center.shape[-1]
    u = _unit_ball_real(rng, m, 2 * n)
    W = np.empty((m, n), dtype=complex)
    s1, s2, c2 = math.sinh(r), math.sinh(2 * r), math.cosh(2 * r)
    W[:, :-1] = s1 * (u[:, 2 : 2 * n : 2] + 1j * u[:, 3 : 2 * n : 2])
    W[:, -1] = s2 * u[:, 0] + 1j * (c2 + s2 * u[:, 1])
    return sigma_inv_v(center, W)


def sample_ball_uniform(ball: BergmanBall, count: int, seed: int) -> list[CPoint]:
    from .integrate import substream

    if count < 1:
        raise ValueError("count must be >= 1")
    W = sample_ball_v(ball.center.array, ball.radius, count, substream(seed, "ball", 0))
    return [CPoint.from_array(w) for w in W]


class PreconditionError(ValueError):
    """Inputs violate the stated precondition of a check."""


def quasi_invariance_bounds(r: float) -> tuple[float, float]:
    t = math.tanh(r)
    return (1 - t) / (1 + t), (1 + t) / (1 - t)


def quasi_invariance_check(z: CPoint, u: CPoint, v: CPoint, r: float) -> bool:
    """Two-sided bound on ``|rho(z,u)| / |rho(z,v)|`` when ``beta(u, v) <= r``."""
    _require_domain(z, u, v)
    if bergman_distance(u, v) > r * (1 + BOUND_SLACK):
        raise PreconditionError("quasi-invariance requires beta(u, v) <= r")
    lo, hi = quasi_invariance_bounds(r)
    ratio = abs(rho2_v(z.array, u.array)) / abs(rho2_v(z.array, v.array))
    return lo * (1 - BOUND_SLACK) <= ratio <= hi * (1 + BOUND_SLACK)


def qj_rho_bounds(j: float) -> tuple[float, float]:
    """Range of ``rho`` over ``Q_j``, the closure of ``D(i, j)``."""
    c = 1.0 - math.tanh(j) ** 2
    return c / 4.0, 4.0 / c


__all__ = [
    "BergmanBall",
    "DomainError",
    "PreconditionError",
    "atanh_clamped",
    "ball_contains",
    "ball_volume",
    "ball_volume_at_i",
    "build_lattice",
    "bergman_distance",
    "bergman_distance_ball_route_v",
    "bergman_distance_v",
    "qj_rho_bounds",
    "quasi_invariance_bounds",
    "quasi_invariance_check",
    "sample_ball_uniform",
    "sample_ball_v",
    "tanh_beta_v",
]


def build_lattice(region, r, seed=0, **kwargs):
    """See :func:`siegel_bergman.lattice.build_lattice`."""
    from .lattice import build_lattice as _build

    return _build(region, r, seed, **kwargs)
