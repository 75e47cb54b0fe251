"""Positive measures on U (Toeplitz symbols), their Berezin transform and averaging function,
and the holomorphic test functions used to probe them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .geometry import CPoint, _require_domain, rho, rho2_v, rho_v
from .integrate import (
    IntegrationResult,
    RegionSpec,
    integrate_ball,
    integrate_shells,
    integrate_U,
    substream,
)
from .kernel import (
    bergman_kernel_v,
    forelli_rudin_constant,
    kernel_constant,
    kernel_norm,
)
from .metric import BergmanBall, ball_volume, bergman_distance_v


class SchemaError(ValueError):
    """Malformed measure or test-function description."""


# ---------------------------------------------------------------------------
# measures


@dataclass(frozen=True)
class Atomic:
    dim: int
    atoms: tuple[tuple[CPoint, float], ...] = ()

    def __post_init__(self):
        atoms = tuple((p, float(w)) for p, w in self.atoms)
        for p, w in atoms:
            if p.dim != self.dim:
                raise SchemaError("atom dimension differs from measure dimension")
            if not w > 0:
                raise SchemaError("atom weights must be positive")
            if not rho(p) > 0:
                raise SchemaError(f"atom {p} is not in U")
        object.__setattr__(self, "atoms", atoms)

    @property
    def points(self) -> np.ndarray:
        if not self.atoms:
            return np.empty((0, self.dim), dtype=complex)
        return np.array([p.array for p, _ in self.atoms])

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.atoms], dtype=float)


@dataclass(frozen=True)
class NamedDensity:
    """``rho^exponent dV`` (family ``rho_power``) or ``scale dV`` (``constant``)."""

    dim: int
    family: str
    exponent: float = 0.0
    scale: float = 1.0
    restriction: RegionSpec | None = None

    def __post_init__(self):
        if self.family not in ("rho_power", "constant"):
            raise SchemaError(f"unknown density family {self.family!r}")
        if not self.scale > 0:
            raise SchemaError("density scale must be positive")


@dataclass(frozen=True)
class Lebesgue:
    """Lebesgue measure, optionally restricted to a region."""

    dim: int
    restriction: RegionSpec | None = None


MeasureSpec = Union[Atomic, NamedDensity, Lebesgue]


def density_v(mu: MeasureSpec, W: np.ndarray) -> np.ndarray:
    """Density of ``mu`` with respect to ``dV`` at the rows of ``W`` (absolutely continuous ``mu`` only)."""
    if isinstance(mu, Atomic):
        raise TypeError("atomic measures have no density")
    if isinstance(mu, Lebesgue):
        d = np.ones(W.shape[0])
    elif mu.family == "constant":
        d = np.full(W.shape[0], mu.scale)
    else:
        with np.errstate(all="ignore"):
            d = mu.scale * rho_v(W) ** mu.exponent
    if mu.restriction is not None:
        d = np.where(mu.restriction.contains_v(W), d, 0.0)
    return d


def _restriction_ball(mu: MeasureSpec) -> BergmanBall | None:
    r = getattr(mu, "restriction", None)
    return None if r is None else r.ball


def measure_to_json(mu: MeasureSpec) -> dict:
    if isinstance(mu, Atomic):
        return {
            "type": "atomic",
            "dim": mu.dim,
            "atoms": [{"point": p.to_json(), "weight": w} for p, w in mu.atoms],
        }
    out: dict = {"type": "lebesgue", "dim": mu.dim}
    if isinstance(mu, NamedDensity):
        out = {"type": "density", "dim": mu.dim, "family": mu.family}
        if mu.family == "rho_power":
            out["exponent"] = mu.exponent
        if mu.scale != 1.0 or mu.family == "constant":
            out["scale"] = mu.scale
    if mu.restriction is not None:
        out["restriction"] = mu.restriction.to_json()
    return out


def measure_from_json(obj) -> MeasureSpec:
    if not isinstance(obj, dict):
        raise SchemaError("measure must be a JSON object")
    try:
        kind = obj["type"]
        dim = int(obj["dim"])
        if dim < 1:
            raise SchemaError("dim must be >= 1")
        restriction = obj.get("restriction")
        region = RegionSpec.from_json(restriction) if restriction is not None else None
        if kind == "atomic":
            atoms = tuple((CPoint.from_json(a["point"]), float(a["weight"])) for a in obj["atoms"])
            return Atomic(dim, atoms)
        if kind == "density":
            family = obj["family"]
            return NamedDensity(
                dim,
                family,
                exponent=float(obj.get("exponent", 0.0)),
                scale=float(obj.get("scale", 1.0)),
                restriction=region,
            )
        if kind == "lebesgue":
            return Lebesgue(dim, region)
    except SchemaError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed measure: {exc}") from exc
    raise SchemaError(f"unknown measure type {obj.get('type')!r}")


# ---------------------------------------------------------------------------
# Berezin transform and averaging function


def berezin_kernel_v(z: np.ndarray, W: np.ndarray) -> np.ndarray:
    """``|k_z(w)|^2 = n!/(4 pi^n) rho(z)^{n+1} / |rho(z,w)|^{2(n+1)}``."""
    n = np.shape(z)[-1]
    return kernel_constant(n) * float(rho_v(z)) ** (n + 1) / np.abs(rho2_v(z, W)) ** (2 * (n + 1))


def _exact(value: float, samples: int = 1) -> IntegrationResult:
    return IntegrationResult(float(value), 0.0, max(1, samples), "exact")


def integrate_measure(f, mu: MeasureSpec, count: int, seed: int, *, center=None, label: str = "mu") -> IntegrationResult:
    """``int f dmu``: a finite sum for atoms, Monte Carlo for densities."""
    if isinstance(mu, Atomic):
        if not mu.atoms:
            return _exact(0.0)
        vals = np.asarray(f(mu.points)) * mu.weights
        total = vals.sum()
        if np.iscomplexobj(total):
            return IntegrationResult(complex(total), 0.0, len(mu.atoms), "exact")
        return _exact(float(total), len(mu.atoms))

    def g(W):
        return f(W) * density_v(mu, W)

    ball = _restriction_ball(mu)
    if ball is not None:
        return integrate_ball(g, ball, count, seed, label=label)
    return integrate_U(g, mu.dim, count, seed, center=center, label=label)


def berezin(mu: MeasureSpec, z: CPoint, count: int = 200_000, seed: int = 0) -> IntegrationResult:
    """Berezin transform ``int |k_z(w)|^2 dmu(w)``."""
    _require_domain(z)
    za = z.array
    return integrate_measure(lambda W: berezin_kernel_v(za, W), mu, count, seed, center=za, label="berezin")


def ball_mass(mu: MeasureSpec, z: CPoint, r: float, count: int = 20_000, seed: int = 0) -> IntegrationResult:
    """``mu(D(z, r))``."""
    _require_domain(z)
    if not r > 0:
        raise ValueError("radius must be positive")
    if isinstance(mu, Atomic):
        if not mu.atoms:
            return _exact(0.0)
        inside = bergman_distance_v(z.array, mu.points) < r
        return _exact(float(mu.weights[inside].sum()), len(mu.atoms))
    if isinstance(mu, Lebesgue) and mu.restriction is None:
        return _exact(ball_volume(z, r))
    ball = BergmanBall(z, r)
    return integrate_ball(lambda W: density_v(mu, W), ball, count, seed, label="mass")


def averaging(mu: MeasureSpec, z: CPoint, r: float, count: int = 20_000, seed: int = 0) -> IntegrationResult:
    """Averaging function ``mu(D(z,r)) / |D(z,r)|``."""
    if not r > 0:
        raise ValueError("radius must be positive")
    mass = ball_mass(mu, z, r, count, seed)
    vol = ball_volume(z, r)
    return IntegrationResult(mass.value / vol, mass.std_error / vol, mass.samples, mass.strategy, mass.rejected)


def averaging_from_mass(mass: float, z: CPoint, r: float) -> float:
    """``n!/(4 pi^n) (1 - tanh^2 r)^{n+1} / tanh^{2n} r * mass / rho(z)^{n+1}``."""
    n = z.dim
    t2 = math.tanh(r) ** 2
    return kernel_constant(n) * (1 - t2) ** (n + 1) / t2**n * mass / rho(z) ** (n + 1)


def mplus_check(mu: MeasureSpec, alpha: float, count: int = 200_000, seed: int = 0) -> IntegrationResult:
    """Estimate ``int |z_n + i|^{-alpha} dmu`` with a finiteness verdict.

    Density measures are integrated over dyadic ``rho`` shells. If the three
    outermost shells toward ``rho -> 0`` or ``rho -> infinity`` fail to decay
    geometrically the integral is flagged divergent (value ``inf``).
    Divergence caused only by growth in ``Re z_n`` inside a single shell is
    not detected.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")

    def f(W):
        return np.abs(W[:, -1] + 1j) ** (-alpha)

    if isinstance(mu, Atomic):
        return integrate_measure(f, mu, count, seed)
    reg = mu.restriction
    if reg is not None and reg.ball is not None:
        return integrate_measure(f, mu, count, seed, label="mplus")
    lo = 0.0 if reg is None else reg.rho_min
    hi = math.inf if reg is None else reg.rho_max
    res = integrate_shells(lambda W: f(W) * density_v(mu, W), mu.dim, count, seed, rho_min=lo, rho_max=hi, label="mplus")
    dyadic = [s for s in res.shells if s[0] > 0 and s[1] == 2.0 * s[0]]
    divergent = False
    if len(dyadic) >= 3:
        if lo == 0.0:
            divergent |= _no_decay([s[2] for s in dyadic[:3]][::-1])
        if math.isinf(hi):
            divergent |= _no_decay([s[2] for s in dyadic[-3:]])
    if divergent:
        return IntegrationResult(math.inf, res.std_error, res.samples, res.strategy, res.rejected, True, res.shells)
    return res


DECAY_RATIO = 0.9


def _no_decay(contrib: list[float]) -> bool:
    """Contributions ordered toward the boundary regime; True if they fail to shrink geometrically."""
    c = [abs(x) for x in contrib]
    if min(c) <= 0:
        return False
    return all(b / a >= DECAY_RATIO for a, b in zip(c[:-1], c[1:]))


# ---------------------------------------------------------------------------
# test functions


@dataclass(frozen=True)
class KernelPower:
    """``[rho(a)^{n+1} / rho(z,a)^{2(n+1)}]^{1/p}``; its p-th power modulus is ``|k_a|^2`` up to a constant."""

    a: CPoint
    p: float


@dataclass(frozen=True)
class ResolventPower:
    """``(z_n + i)^{-alpha}``, a member of ``S_alpha``."""

    alpha: float


@dataclass(frozen=True)
class NormalizedKernel:
    """``w -> K(w, z) / sqrt(K(z, z))``."""

    z: CPoint


@dataclass(frozen=True)
class KernelFunction:
    """``K_w = K(., w)``."""

    w: CPoint


@dataclass(frozen=True)
class ZeroFunction:
    pass


TestFunction = Union[KernelPower, ResolventPower, NormalizedKernel, KernelFunction, ZeroFunction]


def eval_test_function_v(f: TestFunction, W: np.ndarray) -> np.ndarray:
    W = np.asarray(W, dtype=complex)
    if isinstance(f, ResolventPower):
        return (W[..., -1] + 1j) ** (-f.alpha)
    if isinstance(f, KernelPower):
        n = f.a.dim
        return rho(f.a) ** ((n + 1) / f.p) * rho2_v(W, f.a.array) ** (-2 * (n + 1) / f.p)
    if isinstance(f, NormalizedKernel):
        za = f.z.array
        return bergman_kernel_v(W, za) / math.sqrt(float(bergman_kernel_v(za, za).real))
    if isinstance(f, KernelFunction):
        return bergman_kernel_v(W, f.w.array)
    if isinstance(f, ZeroFunction):
        return np.zeros(W.shape[:-1], dtype=complex)
    raise TypeError(f"not a test function: {f!r}")


def eval_test_function(f: TestFunction, z: CPoint) -> complex:
    _require_domain(z)
    return complex(eval_test_function_v(f, z.array))


def test_function_norm(f: TestFunction, p: float, n: int | None = None) -> float:
    """Closed-form ``||f||_p`` over U; ``inf`` when ``f`` is not in ``L^p``."""
    if isinstance(f, ZeroFunction):
        return 0.0
    if isinstance(f, KernelFunction):
        return kernel_norm(f.w, p)
    if isinstance(f, NormalizedKernel):
        K = float(bergman_kernel_v(f.z.array, f.z.array).real)
        return kernel_norm(f.z, p) / math.sqrt(K)
    if isinstance(f, KernelPower):
        dim = f.a.dim
        s = 2 * (dim + 1) * p / f.p
        c = forelli_rudin_constant(dim, s, 0.0)
        return (rho(f.a) ** ((dim + 1) * p / f.p + dim + 1 - s) * c) ** (1.0 / p)
    if isinstance(f, ResolventPower):
        if n is None:
            raise ValueError("dimension required for the norm of (z_n + i)^-alpha")
        s = f.alpha * p
        return (2.0**-s * forelli_rudin_constant(n, s, 0.0)) ** (1.0 / p)
    raise TypeError(f"not a test function: {f!r}")


test_function_norm.__test__ = False  # keep pytest from collecting it


@dataclass(frozen=True)
class SupScan:
    """Empirical supremum of ``|z_n + i|^alpha |f(z)|`` over nested probe sets."""

    value: float
    argmax: CPoint | None
    scale_sups: tuple[float, ...] = field(default=())
    unbounded: bool = False

    def __float__(self) -> float:
        return self.value


SUP_GROWTH = 1.05


def salpha_sup(f: TestFunction, alpha: float, n: int, probes: int = 4096, seed: int = 0) -> SupScan:
    """Scan ``|z_n+i|^alpha |f(z)|`` with probes log-spread in ``rho`` and ``|Re z_n|``.

    Probes are grouped into nested scales ``10^k`` (k = 1..6) bounding both
    ``1/rho`` and ``|z|``; growth of more than 5% from the penultimate to the
    last scale flags an unbounded trend.
    """
    rng = substream(seed, "salpha", 0)
    scales = [10.0**k for k in range(1, 7)]
    pts, tags = [], []
    per = max(1, probes // len(scales))
    for k, L in enumerate(scales):
        r = np.exp(rng.uniform(-math.log(L), math.log(L), per))
        x = np.sign(rng.uniform(-1, 1, per)) * np.exp(rng.uniform(-2, math.log(L), per))
        zp = (rng.standard_normal((per, n - 1)) + 1j * rng.standard_normal((per, n - 1))) * 0.5
        Z = np.empty((per, n), dtype=complex)
        Z[:, :-1] = zp
        Z[:, -1] = x + 1j * (r + np.sum(np.abs(zp) ** 2, axis=1))
        # a ray straight up the imaginary axis and one toward the boundary
        ray = np.zeros((2, n), dtype=complex)
        ray[0, -1] = 1j * L
        ray[1, -1] = 1j / L
        pts.append(np.vstack([Z, ray]))
        tags.append(np.full(per + 2, k))
    P = np.vstack(pts)
    T = np.concatenate(tags)
    vals = np.abs(P[:, -1] + 1j) ** alpha * np.abs(eval_test_function_v(f, P))
    sups = tuple(float(vals[T <= k].max()) for k in range(len(scales)))
    i = int(np.argmax(vals))
    best = float(vals[i])
    unbounded = sups[-2] > 0 and sups[-1] > SUP_GROWTH * sups[-2]
    return SupScan(best, CPoint.from_array(P[i]) if best > 0 else None, sups, unbounded)


__all__ = [
    "Atomic",
    "KernelFunction",
    "KernelPower",
    "Lebesgue",
    "MeasureSpec",
    "NamedDensity",
    "NormalizedKernel",
    "ResolventPower",
    "SchemaError",
    "SupScan",
    "TestFunction",
    "ZeroFunction",
    "averaging",
    "averaging_from_mass",
    "ball_mass",
    "berezin",
    "berezin_kernel_v",
    "density_v",
    "eval_test_function",
    "eval_test_function_v",
    "integrate_measure",
    "measure_from_json",
    "measure_to_json",
    "mplus_check",
    "salpha_sup",
    "test_function_norm",
]
