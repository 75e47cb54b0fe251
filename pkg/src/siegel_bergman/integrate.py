"""Monte-Carlo integration over the Siegel upper half-space.

Integrands are vectorised: ``f(W)`` receives an ``(m, n)`` complex array of
points of U and returns ``m`` real or complex values.

Three strategies:

``mc_ball_pullback``
    Pull the integral back to the unit ball through the Cayley transform,
    ``int_U f dV = int_B f(Phi(xi)) 4 / |1 + xi_n|^{2(n+1)} dV(xi)``, and sample
    the ball from a defensive mixture: uniform, a component concentrated at
    the pole ``xi = -e_n`` (the point at infinity of U), and a component
    concentrated at the sphere (the boundary of U). An optional ``center``
    first moves the integrand by ``sigma_center`` so its mass sits near ``i``.
``mc_region``
    Uniform sampling of a Bergman ball times its exact volume.
``stratified_shell``
    Strata in ``rho`` (dyadic shells ``[2^k, 2^{k+1}]`` plus both tails), each
    sampled in height coordinates ``(w', Re w_n, rho)`` with heavy-tailed
    conditionals. Suited to integrands concentrated near the boundary.

Randomness comes from counter-based Philox streams keyed by ``(seed, label,
block)``; blocks have a fixed size so results do not depend on the number of
worker threads.
"""

from __future__ import annotations

import math
import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import cayley_v, rho_v, sigma_inv_v
from .kernel import factorial, gamma
from .metric import BergmanBall, ball_volume, sample_ball_v

Integrand = Callable[[np.ndarray], np.ndarray]

BLOCK_SIZE = 1 << 15
POLE_EPS = 1e-12
REJECTION_RATE = 1e-5  # 10 per 10^6 samples
THREADS_ENV = "SIEGEL_BERGMAN_THREADS"

# mixture proposal on the ball
MIX_WEIGHTS = (1 / 3, 1 / 3, 1 / 3)
POLE_OFFSET = 0.5  # pole component ~ |1 + xi_n|^{-(n + 1/2)}
BOUNDARY_EXPONENT = -0.5  # sphere component ~ (1 - |xi|^2)^{-1/2}

# height-coordinate strata
SHELL_DEPTH = 12
ZPRIME_TAIL = 0.75
X_TAIL = 1.5
TOP_TAIL = 0.5


class IntegrationError(RuntimeError):
    """Too many samples produced non-finite integrand values."""


@dataclass(frozen=True)
class IntegrationResult:
    value: complex | float
    std_error: float
    samples: int
    strategy: str
    rejected: int = 0
    divergent: bool = False
    shells: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.std_error < 0 or self.samples < 1:
            raise ValueError("invalid IntegrationResult")

    def within(self, expected, k: float = 3.0) -> bool:
        return abs(self.value - expected) <= k * self.std_error

    def to_json(self) -> dict:
        v = self.value
        val = [v.real, v.imag] if isinstance(v, complex) else float(v)
        return {
            "value": val,
            "std_error": self.std_error,
            "samples": self.samples,
            "strategy": self.strategy,
            "rejected": self.rejected,
            "divergent": self.divergent,
        }


@dataclass(frozen=True)
class RegionSpec:
    """``{rho_min <= rho <= rho_max, |z| <= max_abs}``, optionally intersected with a ball."""

    rho_min: float = 0.0
    rho_max: float = math.inf
    max_abs: float = math.inf
    ball: BergmanBall | None = None

    def __post_init__(self):
        if not (self.rho_min >= 0 and self.rho_min < self.rho_max and self.max_abs > 0):
            raise ValueError(f"empty or invalid region {self}")

    @property
    def unrestricted(self) -> bool:
        return self.rho_min == 0 and math.isinf(self.rho_max) and math.isinf(self.max_abs) and self.ball is None

    @property
    def bounded(self) -> bool:
        if self.ball is not None:
            return True
        return self.rho_min > 0 and math.isfinite(self.rho_max) and math.isfinite(self.max_abs)

    def contains_v(self, W: np.ndarray) -> np.ndarray:
        r = rho_v(W)
        ok = (r > 0) & (r >= self.rho_min) & (r <= self.rho_max)
        if math.isfinite(self.max_abs):
            ok &= np.linalg.norm(W, axis=-1) <= self.max_abs
        if self.ball is not None:
            ok &= self.ball.contains_v(W)
        return ok

    def to_json(self) -> dict:
        def enc(x):
            return "inf" if math.isinf(x) else x

        out = {"rho_min": self.rho_min, "rho_max": enc(self.rho_max), "max_abs": enc(self.max_abs)}
        if self.ball is not None:
            out["ball"] = self.ball.to_json()
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "RegionSpec":
        def dec(x):
            if isinstance(x, str):
                if x.strip().lower() in ("inf", "+inf", "infinity"):
                    return math.inf
                raise ValueError(f"bad number {x!r}")
            return float(x)

        if not isinstance(obj, dict):
            raise ValueError("region must be a JSON object")
        ball = BergmanBall.from_json(obj["ball"]) if obj.get("ball") is not None else None
        return cls(
            rho_min=dec(obj.get("rho_min", 0.0)),
            rho_max=dec(obj.get("rho_max", "inf")),
            max_abs=dec(obj.get("max_abs", "inf")),
            ball=ball,
        )


# ---------------------------------------------------------------------------
# randomness


def substream(seed: int, label: str, block: int) -> np.random.Generator:
    key = np.random.SeedSequence([int(seed) & 0xFFFFFFFF, zlib.crc32(label.encode()), int(block)])
    return np.random.Generator(np.random.Philox(key))


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _block_sizes(count: int) -> list[int]:
    full, rest = divmod(count, BLOCK_SIZE)
    return [BLOCK_SIZE] * full + ([rest] if rest else [])


def _block_stats(vals: np.ndarray) -> tuple[int, complex, float]:
    m = vals.shape[0]
    mean = vals.mean() if m else 0.0
    m2 = float(np.sum(np.abs(vals - mean) ** 2)) if m else 0.0
    return m, mean, m2


def _combine(stats) -> tuple[int, complex, float]:
    n_tot, mean, m2 = 0, 0.0, 0.0
    for nb, mb, m2b in stats:
        if nb == 0:
            continue
        delta = mb - mean
        tot = n_tot + nb
        mean = mean + delta * nb / tot
        m2 = m2 + m2b + abs(delta) ** 2 * n_tot * nb / tot
        n_tot = tot
    return n_tot, mean, m2


Sampler = Callable[[np.random.Generator, int], tuple[np.ndarray, np.ndarray, np.ndarray]]


def _run(f: Integrand, sampler: Sampler, count: int, seed: int, label: str):
    """Evaluate ``f(W) * mult`` over blocks; returns (mean, std_error, rejected)."""
    sizes = _block_sizes(count)

    def one(b):
        rng = substream(seed, label, b)
        W, mult, bad = sampler(rng, sizes[b])
        vals = np.zeros(sizes[b], dtype=complex)
        good = ~bad
        if np.any(good):
            with np.errstate(all="ignore"):
                fv = np.asarray(f(W[good]), dtype=complex) * mult[good]
            finite = np.isfinite(fv)
            vals[np.flatnonzero(good)[finite]] = fv[finite]
            nbad = int(bad.sum() + (~finite).sum())
        else:
            nbad = int(bad.sum())
        return _block_stats(vals) + (nbad,)

    workers = min(worker_count(), len(sizes))
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(one, range(len(sizes))))
    else:
        parts = [one(b) for b in range(len(sizes))]
    n_tot, mean, m2 = _combine([p[:3] for p in parts])
    rejected = sum(p[3] for p in parts)
    se = math.sqrt(m2 / (n_tot - 1) / n_tot) if n_tot > 1 else 0.0
    return mean, se, rejected


def _finish(mean, se, count, strategy, rejected, real: bool, **extra) -> IntegrationResult:
    budget = math.ceil(REJECTION_RATE * count)
    if rejected > budget:
        raise IntegrationError(
            f"{rejected} of {count} samples rejected (pole or non-finite integrand), budget {budget}"
        )
    value = float(mean.real) if real else complex(mean)
    return IntegrationResult(value, float(se), count, strategy, rejected, **extra)


def _is_real(f: Integrand, W: np.ndarray) -> bool:
    with np.errstate(all="ignore"):
        return not np.iscomplexobj(np.asarray(f(W[:1])))


# ---------------------------------------------------------------------------
# ball pull-back


def uniform_ball(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    g = rng.standard_normal((m, 2 * n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    rad = rng.random(m) ** (1.0 / (2 * n))
    g *= rad[:, None]
    return g[:, 0::2] + 1j * g[:, 1::2]


def pole_normaliser(n: int, kappa: float) -> float:
    """``int_B |1 + xi_n|^{-kappa} dV`` for ``kappa < n + 1``."""
    m = 2 * n + 2 - kappa
    return (
        math.pi ** (n - 0.5)
        * 4.0**n
        * 2.0**-kappa
        * gamma((m - 1) / 2)
        * gamma(n + 1 - kappa)
        / (gamma(m / 2) * gamma(m - 1))
    )


def sphere_normaliser(n: int, b: float) -> float:
    """``int_B (1 - |xi|^2)^b dV`` for ``b > -1``."""
    return math.pi**n * gamma(b + 1) / gamma(n + b + 1)


def pole_component(rng: np.random.Generator, m: int, n: int, kappa: float) -> np.ndarray:
    """Ball points with density proportional to ``|1 + xi_n|^{-kappa}``."""
    mexp = 2 * n + 2 - kappa
    bb = rng.beta(n, n + 1 - kappa, m)
    y = bb / np.maximum(1.0 - bb, 1e-300)
    t = rng.standard_t(mexp - 1, m) / math.sqrt(mexp - 1)
    tau = (1.0 + y) * t + 1j * y
    zeta = (1j - tau) / (1j + tau)
    xi = np.zeros((m, n), dtype=complex)
    xi[:, -1] = zeta
    if n > 1:
        rad = np.sqrt(np.clip(1.0 - np.abs(zeta) ** 2, 0.0, None))
        xi[:, :-1] = uniform_ball(rng, m, n - 1) * rad[:, None]
    return xi


def sphere_component(rng: np.random.Generator, m: int, n: int, b: float) -> np.ndarray:
    """Ball points with density proportional to ``(1 - |xi|^2)^b``."""
    g = rng.standard_normal((m, 2 * n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    g *= np.sqrt(rng.beta(n, b + 1, m))[:, None]
    return g[:, 0::2] + 1j * g[:, 1::2]


def mixture_density(xi: np.ndarray, n: int) -> np.ndarray:
    kappa = n + POLE_OFFSET
    wu, wp, ws = MIX_WEIGHTS
    with np.errstate(all="ignore"):
        q = wu * factorial(n) / math.pi**n
        q = q + wp * np.abs(1.0 + xi[:, -1]) ** -kappa / pole_normaliser(n, kappa)
        q = q + ws * np.clip(1.0 - np.sum(np.abs(xi) ** 2, axis=1), 0.0, None) ** BOUNDARY_EXPONENT / sphere_normaliser(
            n, BOUNDARY_EXPONENT
        )
    return q


def sample_mixture(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    label = rng.random(m)
    wu, wp, _ = MIX_WEIGHTS
    xi = sphere_component(rng, m, n, BOUNDARY_EXPONENT)
    iu = label < wu
    ip = (label >= wu) & (label < wu + wp)
    xi[iu] = uniform_ball(rng, int(iu.sum()), n)
    xi[ip] = pole_component(rng, int(ip.sum()), n, n + POLE_OFFSET)
    return xi


def _pullback_sampler(n: int, center: np.ndarray | None) -> Sampler:
    scale = 1.0 if center is None else float(rho_v(center)) ** (n + 1)

    def sampler(rng, m):
        xi = sample_mixture(rng, m, n)
        d = np.abs(1.0 + xi[:, -1])
        bad = d < POLE_EPS
        xi[bad] = 0.0
        W = cayley_v(xi)
        if center is not None:
            W = sigma_inv_v(center, W)
        with np.errstate(all="ignore"):
            mult = scale * 4.0 / d ** (2 * (n + 1)) / mixture_density(xi, n)
        bad |= ~np.isfinite(mult) | (rho_v(W) <= 0)
        return W, mult, bad

    return sampler


def integrate_U(
    f: Integrand,
    n: int,
    count: int,
    seed: int,
    *,
    center=None,
    label: str = "U",
) -> IntegrationResult:
    """Estimate ``int_U f dV`` by Cayley pull-back to the ball."""
    if count < 1:
        raise ValueError("count must be >= 1")
    c = None if center is None else np.asarray(getattr(center, "array", center), dtype=complex)
    sampler = _pullback_sampler(n, c)
    probe = sampler(substream(seed, "probe", 0), 1)[0]
    mean, se, rej = _run(f, sampler, count, seed, label)
    return _finish(mean, se, count, "mc_ball_pullback", rej, _is_real(f, probe))


# ---------------------------------------------------------------------------
# metric-ball regions


def integrate_ball(
    f: Integrand, ball: BergmanBall, count: int, seed: int, *, label: str = "ball"
) -> IntegrationResult:
    """``int_{D(c,r)} f dV`` as exact volume times the uniform mean of ``f``."""
    vol = ball_volume(ball.center, ball.radius)
    c = ball.center.array

    def sampler(rng, m):
        W = sample_ball_v(c, ball.radius, m, rng)
        return W, np.full(m, vol), np.zeros(m, dtype=bool)

    mean, se, rej = _run(f, sampler, count, seed, label)
    probe = sampler(substream(seed, "probe", 0), 1)[0]
    return _finish(mean, se, count, "mc_region", rej, _is_real(f, probe))


# ---------------------------------------------------------------------------
# height-coordinate strata


def _strata(rho_min: float, rho_max: float) -> list[tuple[str, float, float]]:
    edges = [2.0**k for k in range(-SHELL_DEPTH, SHELL_DEPTH + 1)]
    out = []
    lo_tail = edges[0]
    if rho_min < lo_tail:
        hi = min(lo_tail, rho_max)
        out.append(("log" if rho_min > 0 else "low", rho_min, hi))
    for a, b in zip(edges[:-1], edges[1:]):
        lo, hi = max(a, rho_min), min(b, rho_max)
        if lo < hi:
            out.append(("log", lo, hi))
    if rho_max > edges[-1]:
        lo = max(edges[-1], rho_min)
        out.append(("log" if math.isfinite(rho_max) else "top", lo, rho_max))
    return [s for s in out if s[1] < s[2]]


def _height_sampler(n: int, kind: str, lo: float, hi: float) -> Sampler:
    lam = n - 1 + ZPRIME_TAIL
    cm = math.sqrt(math.pi) * gamma((X_TAIL - 1) / 2) / gamma(X_TAIL / 2)
    if n > 1:
        beta_w = gamma(n - 1) * gamma(lam - n + 1) / gamma(lam)
        area_w = math.pi ** (n - 1) / gamma(n - 1)

    def sampler(rng, m):
        u = rng.random(m)
        if kind == "log":
            span = math.log(hi / lo)
            y = lo * np.exp(span * u)
            qy = 1.0 / (y * span)
        elif kind == "low":
            y = hi * (1.0 - u)
            qy = np.full(m, 1.0 / hi)
        else:
            y = lo * (1.0 - u) ** (-1.0 / TOP_TAIL)
            qy = TOP_TAIL * lo**TOP_TAIL * y ** (-TOP_TAIL - 1.0)
        c = 1.0 + y
        W = np.empty((m, n), dtype=complex)
        if n > 1:
            bb = rng.beta(n - 1, lam - n + 1, m)
            s = c * bb / np.maximum(1.0 - bb, 1e-300)
            d = rng.standard_normal((m, 2 * (n - 1)))
            d /= np.linalg.norm(d, axis=1, keepdims=True)
            W[:, :-1] = (d[:, 0::2] + 1j * d[:, 1::2]) * np.sqrt(s)[:, None]
            qw = (c + s) ** (-lam) / (area_w * c ** (n - 1 - lam) * beta_w)
        else:
            s = np.zeros(m)
            qw = np.ones(m)
        A = c + s
        t = rng.standard_t(X_TAIL - 1, m) / math.sqrt(X_TAIL - 1)
        W[:, -1] = A * t + 1j * (y + s)
        with np.errstate(all="ignore"):
            qx = (1.0 + t * t) ** (-X_TAIL / 2) / (A * cm)
            mult = 1.0 / (qy * qw * qx)
        bad = ~np.isfinite(mult) | (y <= 0)
        return W, mult, bad

    return sampler


def integrate_shells(
    f: Integrand,
    n: int,
    count: int,
    seed: int,
    *,
    rho_min: float = 0.0,
    rho_max: float = math.inf,
    label: str = "shell",
) -> IntegrationResult:
    """Stratified estimate of ``int f dV`` over ``rho_min <= rho <= rho_max``.

    ``shells`` on the result lists ``(rho_lo, rho_hi, value, std_error)``
    per stratum in increasing ``rho``.
    """
    strata = _strata(rho_min, rho_max)
    if not strata:
        raise IntegrationError("empty rho range")
    per = max(1, count // len(strata))
    total, var, rej, shells, real = 0.0, 0.0, 0, [], True
    for k, (kind, lo, hi) in enumerate(strata):
        sampler = _height_sampler(n, kind, lo, hi)
        mean, se, r = _run(f, sampler, per, seed, f"{label}:{k}")
        real = real and _is_real(f, sampler(substream(seed, "probe", k), 1)[0])
        total += mean
        var += se * se
        rej += r
        shells.append((lo, hi, complex(mean), se))
    if real:
        shells = [(lo, hi, v.real, se) for lo, hi, v, se in shells]
    return _finish(total, math.sqrt(var), per * len(strata), "stratified_shell", rej, real, shells=tuple(shells))


def integrate_region(
    f: Integrand,
    region: RegionSpec,
    n: int,
    count: int,
    seed: int,
    *,
    stratified: bool = False,
    center=None,
    label: str = "region",
) -> IntegrationResult:
    """``int_{region} f dV``.

    Ball regions are sampled exactly; ``rho`` slabs (or ``stratified=True``)
    use shell strata; otherwise the Cayley pull-back with the region's
    indicator multiplied in.
    """
    if not region.rho_min < region.rho_max:
        raise IntegrationError("empty region")
    if region.unrestricted and not stratified:
        return integrate_U(f, n, count, seed, center=center, label=label)

    def g(W):
        return np.where(region.contains_v(W), f(W), 0.0)

    if region.ball is not None:
        return integrate_ball(g, region.ball, count, seed, label=label)
    if stratified or region.rho_min > 0 or math.isfinite(region.rho_max):
        return integrate_shells(g, n, count, seed, rho_min=region.rho_min, rho_max=region.rho_max, label=label)
    return integrate_U(g, n, count, seed, center=center, label=label)


__all__ = [
    "BLOCK_SIZE",
    "IntegrationError",
    "IntegrationResult",
    "RegionSpec",
    "integrate_U",
    "integrate_ball",
    "integrate_region",
    "integrate_shells",
    "mixture_density",
    "pole_normaliser",
    "sample_mixture",
    "sphere_normaliser",
    "substream",
]
