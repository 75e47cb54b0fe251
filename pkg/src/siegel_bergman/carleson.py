"""Toeplitz operators with measure symbols and finite-evidence Carleson diagnostics.

A positive measure ``mu`` on U gives a bounded Toeplitz operator exactly when
its Berezin transform (equivalently its averaging function, or its averages
over a lattice) is bounded, and a compact one exactly when these tend to zero
at the boundary ``rho -> 0`` and at infinity. :func:`diagnose` evaluates the
three statistics on probe grids marching toward both boundary regimes and on
lattices of growing truncations, and classifies the measure. The verdicts are
"consistent with" labels drawn from finite data, not proofs.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .geometry import CPoint, _require_domain, origin_point, rho, rho_v
from .integrate import IntegrationResult, RegionSpec, integrate_shells
from .kernel import bergman_kernel_v, kernel_constant
from .lattice import build_lattice
from .measures import (
    Atomic,
    KernelFunction,
    Lebesgue,
    MeasureSpec,
    NamedDensity,
    NormalizedKernel,
    ResolventPower,
    TestFunction,
    _no_decay,
    averaging,
    berezin_kernel_v,
    density_v,
    eval_test_function_v,
    integrate_measure,
)
from .metric import bergman_distance_v

CARLESON = "carleson_consistent"
NOT_CARLESON = "not_carleson"
VANISHING = "vanishing_consistent"
NOT_VANISHING = "not_vanishing"
INCONCLUSIVE = "inconclusive"


# ---------------------------------------------------------------------------
# Toeplitz operator and duality


def toeplitz_apply(mu: MeasureSpec, f: TestFunction, z: CPoint, count: int = 200_000, seed: int = 0) -> IntegrationResult:
    """``T_mu f(z) = int K(z, w) f(w) dmu(w)``.

    For density measures without a ball restriction the absolute integrand
    is also integrated over ``rho`` shells; if those show no decay toward
    either end the result is flagged divergent (value ``nan``).
    """
    _require_domain(z)
    za = z.array

    def g(W):
        return bergman_kernel_v(za, W) * eval_test_function_v(f, W)

    res = integrate_measure(g, mu, count, seed, center=za, label="toeplitz")
    if isinstance(mu, Atomic) or getattr(mu, "restriction", None) is not None and mu.restriction.ball is not None:
        return res
    if _divergent_abs(g, mu, max(1, count // 4), seed):
        return IntegrationResult(complex(math.nan, math.nan), res.std_error, res.samples, res.strategy, res.rejected, True)
    return res


def _divergent_abs(g, mu: MeasureSpec, count: int, seed: int) -> bool:
    reg = mu.restriction
    lo = 0.0 if reg is None else reg.rho_min
    hi = math.inf if reg is None else reg.rho_max
    shells = integrate_shells(
        lambda W: np.abs(g(W)) * density_v(mu, W), mu.dim, count, seed, rho_min=lo, rho_max=hi, label="toeplitz-abs"
    ).shells
    dyadic = [s for s in shells if s[0] > 0 and s[1] == 2.0 * s[0]]
    if len(dyadic) < 3:
        return False
    bad = False
    if lo == 0.0:
        bad |= _no_decay([s[2] for s in dyadic[:3]][::-1])
    if math.isinf(hi):
        bad |= _no_decay([s[2] for s in dyadic[-3:]])
    return bad


@dataclass(frozen=True)
class DualityResult:
    lhs: complex
    rhs: complex
    sigma: float
    samples: int

    @property
    def agrees(self) -> bool:
        return abs(self.lhs - self.rhs) <= 3.0 * self.sigma

    def to_json(self) -> dict:
        return {
            "lhs": [self.lhs.real, self.lhs.imag],
            "rhs": [self.rhs.real, self.rhs.imag],
            "sigma": self.sigma,
            "samples": self.samples,
        }


def _check_duality_ranges(n: int, f: TestFunction, g: TestFunction, p: float) -> None:
    if not p > 1:
        raise ValueError("duality needs p > 1")
    if isinstance(f, ResolventPower) and not f.alpha > n + 1.0 / p:
        raise ValueError(f"f = (z_n+i)^-{f.alpha} needs alpha > n + 1/p = {n + 1.0 / p}")
    if isinstance(g, ResolventPower) and not g.alpha > n + (p - 1.0) / p:
        raise ValueError(f"g = (z_n+i)^-{g.alpha} needs gamma > n + (p-1)/p = {n + (p - 1.0) / p}")


def duality_check(
    mu: Atomic, f: TestFunction, g: TestFunction, p: float = 2.0, count: int = 200_000, seed: int = 0
) -> DualityResult:
    """Compare ``<T_mu f, g>`` (quadrature over U) with ``int f conj(g) dmu`` (exact atomic sum)."""
    if not isinstance(mu, Atomic):
        raise TypeError("duality_check takes an atomic measure")
    _check_duality_ranges(mu.dim, f, g, p)
    if not mu.atoms:
        return DualityResult(0j, 0j, 0.0, 1)
    A = mu.points
    coef = mu.weights * eval_test_function_v(f, A)
    rhs = complex(np.sum(coef * np.conj(eval_test_function_v(g, A))))

    def h(Z):
        T = bergman_kernel_v(Z[:, None, :], A[None, :, :]) @ coef
        return T * np.conj(eval_test_function_v(g, Z))

    from .integrate import integrate_U

    lhs = integrate_U(h, mu.dim, count, seed, center=A[int(np.argmax(mu.weights))], label="duality")
    return DualityResult(complex(lhs.value), rhs, lhs.std_error, lhs.samples)


def carleson_condition_b_integral(mu: MeasureSpec, a: CPoint, count: int = 200_000, seed: int = 0) -> IntegrationResult:
    """``int rho(a)^{n+1} / |rho(z, a)|^{2(n+1)} dmu(z)``, which is ``(4 pi^n / n!)`` times the Berezin transform.

    Uses the same samples as :func:`siegel_bergman.measures.berezin` for
    equal ``(count, seed)``, so the two agree to rounding.
    """
    _require_domain(a)
    aa = a.array
    c = kernel_constant(a.dim)
    return integrate_measure(lambda W: berezin_kernel_v(aa, W) / c, mu, count, seed, center=aa, label="berezin")


# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class DiagnoseConfig:
    r: float = 1.0
    seed: int = 7
    samples: int = 200_000
    lattice_samples: int = 4096
    shells: int = 10
    bound_max: float = 1e3
    stability_ratio: float = 1.05
    decay_fraction: float = 0.05
    max_centers: int = 1500

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("r must be positive")
        if self.samples < 1 or self.lattice_samples < 1:
            raise ValueError("sample counts must be >= 1")
        if self.shells < 3:
            raise ValueError("need at least 3 shells")


@dataclass(frozen=True)
class ShellStat:
    regime: str  # "rho" (rho = 2^-k) or "abs" (|z| = 2^k)
    k: int
    lo: float
    hi: float
    berezin_mean: float
    berezin_max: float
    averaging_mean: float
    averaging_max: float


@dataclass(frozen=True)
class DiagnosticsReport:
    dim: int
    berezin_sup: tuple[float, CPoint]
    averaging_probe_sup: tuple[float, CPoint]
    averaging_sup: tuple[float, CPoint | None]
    condition_b: tuple[float, ...]
    shell_trend: tuple[ShellStat, ...]
    truncation_sups: dict
    slopes: dict
    condition_verdicts: dict
    verdict_bounded: str
    verdict_vanishing: str
    lattice_info: tuple[dict, ...]
    config: DiagnoseConfig
    probes: tuple[CPoint, ...] = field(repr=False, default=())

    def to_json(self) -> dict:
        def pt(x):
            return None if x is None else x.to_json()

        return {
            "dim": self.dim,
            "berezin_sup": {"value": self.berezin_sup[0], "argmax": pt(self.berezin_sup[1])},
            "averaging_probe_sup": {"value": self.averaging_probe_sup[0], "argmax": pt(self.averaging_probe_sup[1])},
            "averaging_sup": {"value": self.averaging_sup[0], "argmax": pt(self.averaging_sup[1])},
            "condition_b": list(self.condition_b),
            "shell_trend": [asdict(s) for s in self.shell_trend],
            "truncation_sups": {k: [list(t) for t in v] for k, v in self.truncation_sups.items()},
            "slopes": self.slopes,
            "condition_verdicts": self.condition_verdicts,
            "verdict_bounded": self.verdict_bounded,
            "verdict_vanishing": self.verdict_vanishing,
            "lattices": list(self.lattice_info),
            "config": asdict(self.config),
        }

    def shell_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ["regime", "k", "lo", "hi", "berezin_mean", "berezin_max", "averaging_mean", "averaging_max"]
        w.writerow(cols)
        for s in self.shell_trend:
            w.writerow([repr(v) if isinstance(v, float) else v for v in (getattr(s, c) for c in cols)])
        return buf.getvalue()


def _point(n: int, zn: complex, zprime=None) -> np.ndarray:
    p = np.zeros(n, dtype=complex)
    if zprime is not None:
        p[:-1] = zprime
    p[-1] = zn
    return p


def probe_grid(n: int, shells: int = 10) -> tuple[np.ndarray, list[tuple[str, int]]]:
    """Probe points and their ``(regime, k)`` tags.

    ``rho`` shell k holds points of height ``2^-k`` at several horizontal
    offsets; ``|z|`` shell k holds points with ``|z_n| = 2^k`` ranging from
    straight up the imaginary axis to height one far out along the real axis.
    """
    pts, tags = [], []
    zq = None
    if n > 1:
        zq = np.zeros(n - 1, dtype=complex)
        zq[0] = 0.5
    for k in range(shells + 1):
        h = 2.0**-k
        for x in (0.0, 0.5, -1.0):
            pts.append(_point(n, x + 1j * h))
            tags.append(("rho", k))
        if n > 1:
            pts.append(_point(n, 0.25 + 1j * (h + 0.25), zq))
            tags.append(("rho", k))
    for k in range(shells + 1):
        R = 2.0**k
        far = math.sqrt(max(R * R - 1.0, 0.0))
        for zn in (1j * R, R * np.exp(1j * math.pi / 4), R * np.exp(3j * math.pi / 4), far + 1j, -far + 1j):
            pts.append(_point(n, zn))
            tags.append(("abs", k))
    P = np.array(pts)
    return P, tags


def _support_ball(mu: MeasureSpec) -> tuple[CPoint, float] | None:
    """Center and radius of a Bergman ball containing the support, when it is bounded."""
    if isinstance(mu, Atomic):
        c = origin_point(mu.dim)
        if not mu.atoms:
            return c, 0.0
        return c, float(bergman_distance_v(c.array, mu.points).max())
    reg = mu.restriction
    if reg is not None and reg.ball is not None:
        return reg.ball.center, reg.ball.radius
    return None


def truncation_schedule(mu: MeasureSpec, r: float) -> list[RegionSpec]:
    """Three growing bounded regions on which lattices are built.

    Bounded supports get Bergman balls reaching past the support by ``r/2``,
    ``r`` and ``r + 1/2`` (the averaging function vanishes beyond ``r``).
    Otherwise slabs ``2^-k <= rho <= 2^k`` whose depth starts at the height
    ``e^{-2r}`` where an ``r``-ball around a point of height one ends, with
    ``|z|`` bounds growing alongside.
    """
    from .metric import BergmanBall

    sb = _support_ball(mu)
    if sb is not None:
        c, R = sb
        return [RegionSpec(ball=BergmanBall(c, R + e)) for e in (r / 2, r, r + 0.5)]
    k0 = math.ceil(2 * r / math.log(2))
    return [RegionSpec(2.0 ** -(k0 + j), 2.0 ** (k0 + j), 2.0**j) for j in (1, 2, 3)]


def _lattice_averages(mu, C: np.ndarray, r: float, count: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    val, se = np.empty(C.shape[0]), np.empty(C.shape[0])
    for i, c in enumerate(C):
        a = averaging(mu, CPoint.from_array(c), r, count, seed)
        val[i], se[i] = a.value, a.std_error
    return val, se


def _sups(values: np.ndarray, errors: np.ndarray, masks) -> list[tuple[float, float]]:
    """``(sup, std_error at the argmax)`` over each mask."""
    out = []
    for m in masks:
        i = np.flatnonzero(m)[int(np.argmax(values[m]))]
        out.append((float(values[i]), float(errors[i])))
    return out


def _bounded(series: list[tuple[float, float]], cfg: DiagnoseConfig) -> bool:
    """Largest sup below ``bound_max`` and the last truncation within ``stability_ratio`` of the one before.

    The last sup may exceed the ratio by three of its standard errors, so
    Monte-Carlo noise in a larger set of estimates is not read as growth.
    """
    top = max(v for v, _ in series)
    if not math.isfinite(top) or top >= cfg.bound_max:
        return False
    (prev, _), (last, se) = series[-2], series[-1]
    return last - 3.0 * se <= cfg.stability_ratio * prev


def _vanishes(means: list[float], global_max: float, cfg: DiagnoseConfig) -> bool:
    a, b, c = means[-3:]
    return c < cfg.decay_fraction * global_max and a >= b >= c


def _slope(xs, ys) -> float | None:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    ok = (xs > 0) & (ys > 0)
    if ok.sum() < 3:
        return None
    return float(np.polyfit(np.log(xs[ok]), np.log(ys[ok]), 1)[0])


def _combine(votes: list[bool | None], yes: str, no: str) -> str:
    if any(v is None for v in votes):
        return INCONCLUSIVE
    if all(votes):
        return yes
    if not any(votes):
        return no
    return INCONCLUSIVE


def diagnose(mu: MeasureSpec, config: DiagnoseConfig | None = None) -> DiagnosticsReport:
    """Evaluate the Berezin transform, the averaging function and lattice averages, and classify ``mu``."""
    cfg = config or DiagnoseConfig()
    n, r, seed = mu.dim, cfg.r, cfg.seed
    P, tags = probe_grid(n, cfg.shells)
    probe_pts = [CPoint.from_array(p) for p in P]

    from .measures import berezin

    bres = [berezin(mu, z, cfg.samples, seed) for z in probe_pts]
    hres = [averaging(mu, z, r, cfg.lattice_samples, seed) for z in probe_pts]
    btil = np.array([b.value for b in bres])
    bse = np.array([b.std_error for b in bres])
    bhat = np.array([h.value for h in hres])
    hse = np.array([h.std_error for h in hres])
    cb = tuple(float(v) / kernel_constant(n) for v in btil)

    shells = []
    for regime in ("rho", "abs"):
        for k in range(cfg.shells + 1):
            idx = [i for i, t in enumerate(tags) if t == (regime, k)]
            lo, hi = (2.0 ** -(k + 1), 2.0**-k) if regime == "rho" else (2.0**k, 2.0 ** (k + 1))
            shells.append(
                ShellStat(
                    regime, k, lo, hi,
                    float(btil[idx].mean()), float(btil[idx].max()),
                    float(bhat[idx].mean()), float(bhat[idx].max()),
                )
            )  # fmt: skip

    # nested probe truncations: shells with index <= j in both regimes
    kk = np.array([t[1] for t in tags])
    masks = [kk <= j for j in range(cfg.shells + 1)]
    trunc_b = _sups(btil, bse, masks)
    trunc_h = _sups(bhat, hse, masks)

    # lattices on growing truncations, each extending the previous one
    lat_info, trunc_d = [], []
    best_d, arg_d = -math.inf, None
    prev, lattice_ok = None, True
    for j, region in enumerate(truncation_schedule(mu, r)):
        lat = build_lattice(
            region, r, seed, n=n, initial_centers=prev, max_centers=cfg.max_centers, probes=20_000
        )
        prev = lat.array
        vals, errs = _lattice_averages(mu, lat.array, r, cfg.lattice_samples, seed)
        i = int(np.argmax(vals))
        if vals[i] > best_d:
            best_d, arg_d = float(vals[i]), lat.centers[i]
        trunc_d.append((float(vals[i]), float(errs[i])))
        lattice_ok &= not lat.truncated
        lat_info.append(
            {
                "region": region.to_json(),
                "centers": len(lat.centers),
                "multiplicity_estimate": lat.multiplicity_estimate,
                "covering_failures": lat.covering_failures,
                "truncated": lat.truncated,
                "sup": trunc_d[-1][0],
                "sup_std_error": trunc_d[-1][1],
            }
        )

    bounded_votes = {
        "berezin": _bounded(trunc_b, cfg),
        "averaging": _bounded(trunc_h, cfg),
        "lattice": _bounded(trunc_d, cfg) if lattice_ok else None,
    }
    verdict_bounded = _combine(list(bounded_votes.values()), CARLESON, NOT_CARLESON)

    def vanish_vote(key):
        votes = []
        gmax = max(s.__getattribute__(key) for s in shells)
        for regime in ("rho", "abs"):
            means = [getattr(s, key) for s in shells if s.regime == regime]
            votes.append(_vanishes(means, gmax, cfg))
        return all(votes)

    van_votes = {"berezin": vanish_vote("berezin_mean"), "averaging": vanish_vote("averaging_mean")}
    if verdict_bounded == NOT_CARLESON:
        verdict_vanishing = NOT_VANISHING
    elif verdict_bounded == INCONCLUSIVE:
        verdict_vanishing = INCONCLUSIVE
    else:
        verdict_vanishing = _combine(list(van_votes.values()), VANISHING, NOT_VANISHING)

    rho_sh = [s for s in shells if s.regime == "rho"]
    abs_sh = [s for s in shells if s.regime == "abs"]
    slopes = {
        "rho_averaging": _slope([s.hi for s in rho_sh], [s.averaging_mean for s in rho_sh]),
        "rho_berezin": _slope([s.hi for s in rho_sh], [s.berezin_mean for s in rho_sh]),
        "abs_averaging": _slope([s.lo for s in abs_sh], [s.averaging_mean for s in abs_sh]),
        "abs_berezin": _slope([s.lo for s in abs_sh], [s.berezin_mean for s in abs_sh]),
    }
    ib, ih = int(np.argmax(btil)), int(np.argmax(bhat))
    return DiagnosticsReport(
        dim=n,
        berezin_sup=(float(btil[ib]), probe_pts[ib]),
        averaging_probe_sup=(float(bhat[ih]), probe_pts[ih]),
        averaging_sup=(best_d, arg_d),
        condition_b=cb,
        shell_trend=tuple(shells),
        truncation_sups={"berezin": tuple(trunc_b), "averaging": tuple(trunc_h), "lattice": tuple(trunc_d)},
        slopes=slopes,
        condition_verdicts={
            "bounded": {k: v for k, v in bounded_votes.items()},
            "vanishing": van_votes,
        },
        verdict_bounded=verdict_bounded,
        verdict_vanishing=verdict_vanishing,
        lattice_info=tuple(lat_info),
        config=cfg,
        probes=tuple(probe_pts),
    )


__all__ = [
    "CARLESON",
    "INCONCLUSIVE",
    "NOT_CARLESON",
    "NOT_VANISHING",
    "VANISHING",
    "DiagnoseConfig",
    "DiagnosticsReport",
    "DualityResult",
    "ShellStat",
    "carleson_condition_b_integral",
    "diagnose",
    "duality_check",
    "probe_grid",
    "toeplitz_apply",
    "truncation_schedule",
]
