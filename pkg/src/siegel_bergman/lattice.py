"""r-lattices in the Bergman metric on bounded regions of U.

Centers are chosen greedily (accept a candidate when it is at distance at
least ``r`` from every accepted center) from a scrambled Sobol stream spread
according to the invariant measure ``rho^{-(n+1)} dV``, so candidates are
roughly uniform in metric terms. Covering is then certified on fresh
pseudo-random probes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm, qmc

from .geometry import CPoint, cayley_v, rho_v, sigma_inv_v
from .integrate import RegionSpec, substream
from .metric import atanh_clamped

BATCH = 1 << 15
MAX_CANDIDATES = 1 << 21
MAX_CENTERS = 4000
CERTIFY_PROBES = 100_000
_SUB = 256
REPAIR_ROUNDS = 8


class LatticeError(ValueError):
    """The region cannot carry a lattice (empty or unbounded)."""


@dataclass(frozen=True)
class Lattice:
    centers: tuple[CPoint, ...]
    r: float
    multiplicity_estimate: int
    region: RegionSpec
    covering_failures: int = 0
    probes: int = 0
    max_nearest: float = 0.0
    candidates: int = 0
    truncated: bool = False
    _array: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def array(self) -> np.ndarray:
        if self._array is not None:
            return self._array
        return np.array([c.array for c in self.centers])

    @property
    def failure_fraction(self) -> float:
        return self.covering_failures / self.probes if self.probes else 0.0

    def to_json(self) -> dict:
        return {
            "centers": [c.to_json() for c in self.centers],
            "r": self.r,
            "multiplicity_estimate": self.multiplicity_estimate,
            "region": self.region.to_json(),
            "certificate": {
                "probes": self.probes,
                "covering_failures": self.covering_failures,
                "max_nearest_distance": self.max_nearest,
                "candidates": self.candidates,
                "truncated": self.truncated,
            },
        }


def _region_dim(region: RegionSpec, n: int | None) -> int:
    if region.ball is not None:
        d = region.ball.center.dim
        if n is not None and n != d:
            raise ValueError("dimension differs from the region's ball")
        return d
    if n is None:
        raise ValueError("dimension required for a rho/|z| region")
    return n


def _map_cube(U: np.ndarray, region: RegionSpec, n: int) -> np.ndarray:
    """Send points of ``[0,1)^{2n+1}`` into (a superset of) the region, invariant-measure spread."""
    m = U.shape[0]
    eps = 1e-12
    if region.ball is not None:
        # radial law of the invariant measure on a ball of the unit-ball model:
        # v = |xi|^2 / (1 - |xi|^2) has density proportional to v^{n-1} on [0, sinh^2 R]
        g = norm.ppf(np.clip(U[:, 1:], eps, 1 - eps))
        g /= np.maximum(np.linalg.norm(g, axis=1, keepdims=True), eps)
        v = math.sinh(region.ball.radius) ** 2 * U[:, 0] ** (1.0 / n)
        xi = (g[:, 0::2] + 1j * g[:, 1::2]) * np.sqrt(v / (1.0 + v))[:, None]
        # D(i, R) corresponds to the Euclidean ball |xi| < tanh R around 0
        return sigma_inv_v(region.ball.center.array, cayley_v(xi))
    lo, hi, M = region.rho_min, region.rho_max, region.max_abs
    # rho with density proportional to rho^{-(n+1)} on [lo, hi]
    a, b = lo**-n, hi**-n
    r = (a - U[:, 0] * (a - b)) ** (-1.0 / n)
    x = M * (2.0 * U[:, 1] - 1.0)
    W = np.empty((m, n), dtype=complex)
    if n > 1:
        g = norm.ppf(np.clip(U[:, 3:], eps, 1 - eps))
        g /= np.maximum(np.linalg.norm(g, axis=1, keepdims=True), eps)
        rad = M * U[:, 2] ** (1.0 / (2 * n - 2))
        W[:, :-1] = (g[:, 0::2] + 1j * g[:, 1::2]) * rad[:, None]
    W[:, -1] = x + 1j * (r + np.sum(np.abs(W[:, :-1]) ** 2, axis=1))
    return W


def _overlap(P: np.ndarray, C: np.ndarray) -> np.ndarray:
    """``q = rho(p) rho(c) / |rho(p, c)|^2 = 1 - tanh^2 beta(p, c)`` for all pairs."""
    R = 0.5j * (np.conj(C[:, -1])[None, :] - P[:, -1][:, None])
    if P.shape[1] > 1:
        R -= P[:, :-1] @ np.conj(C[:, :-1]).T
    return np.outer(rho_v(P), rho_v(C)) / (R.real**2 + R.imag**2)


def _pair_chunks(P: np.ndarray, C: np.ndarray):
    """Yield ``(slice of P, overlap block)`` with blocks of at most ~2^20 entries."""
    step = max(1, (1 << 20) // max(1, C.shape[0]))
    for s in range(0, P.shape[0], step):
        yield slice(s, s + step), _overlap(P[s : s + step], C)


def _max_overlap(P: np.ndarray, C: np.ndarray) -> np.ndarray:
    out = np.empty(P.shape[0])
    for sl, q in _pair_chunks(P, C):
        out[sl] = q.max(axis=1)
    return out


def _distance_from_overlap(q: np.ndarray) -> np.ndarray:
    return atanh_clamped(np.sqrt(np.clip(1.0 - q, 0.0, None)))


def _within(P: np.ndarray, C: np.ndarray, radius: float) -> np.ndarray:
    qmin = 1.0 / math.cosh(radius) ** 2
    out = np.empty(P.shape[0], dtype=int)
    for sl, q in _pair_chunks(P, C):
        out[sl] = (q > qmin).sum(axis=1)
    return out


def _greedy(cands: np.ndarray, centers: list[np.ndarray], r: float, cap: int) -> int:
    """Append accepted candidates to ``centers`` in stream order; returns the number added.

    A candidate is accepted when its overlap with every center is at most
    ``sech^2 r``, i.e. its distance to every center is at least ``r``.
    """
    qmax = 1.0 / math.cosh(r) ** 2
    before = len(centers)
    for s in range(0, cands.shape[0], _SUB):
        block = cands[s : s + _SUB]
        if centers:
            block = block[_max_overlap(block, np.array(centers)) <= qmax]
        start = len(centers)
        for c in block:
            if len(centers) >= cap:
                return len(centers) - before
            if len(centers) > start and _overlap(c[None, :], np.array(centers[start:])).max() > qmax:
                continue
            centers.append(c)
    return len(centers) - before


def build_lattice(
    region: RegionSpec,
    r: float,
    seed: int = 0,
    *,
    n: int | None = None,
    initial_centers=None,
    max_centers: int = MAX_CENTERS,
    probes: int = CERTIFY_PROBES,
) -> Lattice:
    """Greedy maximal ``r``-separated set of a bounded region, with a covering certificate.

    ``initial_centers`` (already ``r``-separated, e.g. the lattice of a smaller
    region) are kept and extended, which makes lattices of nested regions
    nested. The stream stops once two consecutive batches of ``2^15``
    candidates add no center. Fresh probes left uncovered are then added as
    centers until a probe set comes back fully covered (at most
    ``REPAIR_ROUNDS`` times); the last probe set is the reported
    certificate. ``truncated`` is set if ``max_centers`` or the candidate
    budget is reached.
    """
    if not r > 0:
        raise ValueError("lattice radius must be positive")
    if not region.bounded:
        raise LatticeError("lattices need a bounded region")
    n = _region_dim(region, n)
    d = 2 * n + 1
    sobol = qmc.Sobol(d, scramble=True, seed=np.random.default_rng(substream(seed, "lattice", 0).integers(2**63)))

    centers: list[np.ndarray] = []
    if initial_centers is not None:
        C0 = np.array([getattr(c, "array", c) for c in initial_centers], dtype=complex).reshape(-1, n)
        centers.extend(C0[region.contains_v(C0)])

    seen, truncated, empty_batches = 0, False, 0
    hit_region = False
    while True:
        P = _map_cube(sobol.random(BATCH), region, n)
        P = P[region.contains_v(P)]
        seen += BATCH
        hit_region |= P.shape[0] > 0
        added = _greedy(P, centers, r, max_centers) if P.shape[0] else 0
        if len(centers) >= max_centers:
            truncated = True
            break
        empty_batches = empty_batches + 1 if added == 0 and hit_region else 0
        if empty_batches >= 2:
            break
        if seen >= MAX_CANDIDATES:
            truncated = hit_region
            break
    if not centers:
        raise LatticeError("region is empty")

    # repair: a probe left uncovered is at distance >= r from every center,
    # so adding it keeps the set separated; re-certify on fresh probes
    for rnd in range(REPAIR_ROUNDS + 1):
        C = np.array(centers)
        rng = substream(seed, "lattice-probe", rnd)
        Q = _map_cube(rng.random((probes, d)), region, n)
        Q = Q[region.contains_v(Q)]
        if not Q.shape[0]:
            break
        near = _distance_from_overlap(_max_overlap(Q, C))
        bad = near >= r
        if not bad.any() or rnd == REPAIR_ROUNDS or len(centers) >= max_centers:
            break
        _greedy(Q[bad], centers, r, max_centers)
    if Q.shape[0]:
        failures = int(bad.sum())
        max_near = float(near.max())
        mult = int(_within(Q, C, 2 * r).max())
    else:
        failures, max_near, mult = 0, 0.0, 1
    truncated |= len(centers) >= max_centers
    return Lattice(
        tuple(CPoint.from_array(c) for c in C),
        float(r),
        mult,
        region,
        failures,
        int(Q.shape[0]),
        max_near,
        seen,
        truncated,
        C,
    )


__all__ = ["Lattice", "LatticeError", "build_lattice"]
