"""Identity suite: closed forms of the geometry checked against quadrature and random trials.

Every check yields :class:`Check` rows ``{identity, expected, estimate,
sigma, pass}``. Monte-Carlo rows pass when the estimate is within three
standard errors of the closed form (plus any relative-error requirement
stated on the row); algebraic rows report the largest relative error over
random inputs; inequality rows report the number of violations.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    cayley_inv_v,
    cayley_jacobian_v,
    cayley_v,
    cayleyinv_jacobian_v,
    hdot,
    moebius_v,
    origin_point,
    random_ball_points,
    random_domain_points,
    rho2_i_v,
    rho2_v,
    rho_v,
    sigma_inv_rows,
    CPoint,
)
from .integrate import integrate_U, substream
from .kernel import (
    BOUND_SLACK,
    bergman_kernel,
    bergman_kernel_v,
    forelli_rudin_constant,
    forelli_rudin_integral,
    growth_constant,
    kernel_bound,
    kernel_constant,
    kernel_norm,
    mean_value_constant,
)
from .measures import (
    Atomic,
    Lebesgue,
    ResolventPower,
    averaging_from_mass,
    berezin,
    eval_test_function,
)
from .metric import (
    ball_volume,
    ball_volume_at_i,
    bergman_distance_ball_route_v,
    bergman_distance_v,
    qj_rho_bounds,
    quasi_invariance_bounds,
    sample_ball_v,
)

ALGEBRAIC_TOL = 1e-10
EXACT_TOL = 1e-12
RANDOM_CHECKS = 10_000
BOUND_TRIALS = 100_000
DUALITY_SAMPLES = 200_000
DUALITY_REL = 0.02
FR_REL = 0.01


@dataclass
class Check:
    identity: str
    expected: float | list
    estimate: float | list
    sigma: float
    passed: bool
    seconds: float = field(default=0.0, compare=False)

    def to_json(self) -> dict:
        return {
            "identity": self.identity,
            "expected": self.expected,
            "estimate": self.estimate,
            "sigma": self.sigma,
            "pass": bool(self.passed),
        }


def _cnum(v):
    v = complex(v)
    return [v.real, v.imag]


def _axis_point(n: int, y: float) -> CPoint:
    return CPoint((0j,) * (n - 1), 1j * y)


def _rel(a, b) -> np.ndarray:
    a, b = np.asarray(a), np.asarray(b)
    return np.abs(a - b) / np.maximum(np.abs(b), 1e-300)


def _mc_row(name, expected, res, rel_limit=None) -> Check:
    ok = res.within(expected)
    if rel_limit is not None:
        ok = ok and res.std_error <= rel_limit * abs(expected)
    return Check(name, float(expected), float(res.value), res.std_error, bool(ok))


# ---------------------------------------------------------------------------
# Monte-Carlo identities


def check_forelli_rudin(n: int, samples: int, seed: int) -> list[Check]:
    rows = []
    for s, t in ((4, 0), (5, 1), (6, 0)):
        for y in (1.0, 2.0):
            z = _axis_point(n, y)
            za = z.array

            def f(W, za=za, s=s, t=t):
                return rho_v(W) ** t / np.abs(rho2_v(za, W)) ** s

            res = integrate_U(f, n, samples, seed, center=za, label=f"fr:{s}:{t}:{y}")
            name = f"forelli_rudin n={n} s={s} t={t} z=(0',{y:g}i)"
            rows.append(_mc_row(name, forelli_rudin_integral(z, s, t), res, FR_REL))
    return rows


def check_ball_volume(n: int, samples: int, seed: int) -> list[Check]:
    rows = []
    for y in (1.0, 2.0):
        z = _axis_point(n, y)
        za = z.array

        def ind(W, za=za):
            return (bergman_distance_v(za, W) < 1.0).astype(float)

        res = integrate_U(ind, n, samples, seed, label=f"vol:{y}")
        rows.append(_mc_row(f"ball_volume n={n} D((0',{y:g}i),1)", ball_volume(z, 1.0), res))
    return rows


def check_kernel_norm(n: int, samples: int, seed: int) -> list[Check]:
    i = origin_point(n)
    ia = i.array
    rows = []
    for p in (2.0, 3.0):
        res = integrate_U(lambda W, p=p: np.abs(bergman_kernel_v(W, ia)) ** p, n, samples, seed, label=f"knorm:{p}")
        est = res.value ** (1.0 / p)
        sig = est * res.std_error / (p * res.value)
        exp = kernel_norm(i, p)
        rows.append(Check(f"kernel_norm n={n} p={p:g}", exp, est, sig, abs(est - exp) <= 3 * sig))
    exact = math.sqrt(bergman_kernel(i, i).real)
    got = kernel_norm(i, 2.0)
    rows.append(Check(f"kernel_norm n={n} p=2 closed form = sqrt K(i,i)", exact, got, 0.0, abs(got - exact) <= EXACT_TOL * exact))
    return rows


def check_berezin_lebesgue(n: int, samples: int, seed: int) -> list[Check]:
    rows = []
    rng = substream(seed, "berezin-probes", n)
    heights = np.logspace(-2, 2, 10)
    for k, h in enumerate(heights):
        zp = 0.3 * (rng.standard_normal(n - 1) + 1j * rng.standard_normal(n - 1))
        zn = rng.uniform(-2, 2) + 1j * (h + float(np.sum(np.abs(zp) ** 2)))
        z = CPoint(tuple(zp), zn)
        res = berezin(Lebesgue(n), z, samples, seed)
        rows.append(_mc_row(f"berezin_lebesgue n={n} probe {k} rho={h:.3g}", 1.0, res))
        ratio = averaging_from_mass(ball_volume(z, 1.0), z, 1.0)
        rows.append(Check(f"averaging_lebesgue n={n} probe {k} rho={h:.3g}", 1.0, ratio, 0.0, abs(ratio - 1.0) <= EXACT_TOL))
    return rows


def check_reproducing(samples: int, seed: int) -> list[Check]:
    from .carleson import toeplitz_apply

    rows = []
    probes = [CPoint((), 1j), CPoint((), 2j), CPoint((), 0.5 + 0.25j), CPoint((), -3 + 1j), CPoint((), 10 + 4j)]
    for alpha in (2.0, 3.0):
        f = ResolventPower(alpha)
        for k, z in enumerate(probes):
            res = toeplitz_apply(Lebesgue(1), f, z, samples, seed)
            exp = eval_test_function(f, z)
            ok = not res.divergent and abs(res.value - exp) <= 3 * res.std_error
            rows.append(Check(f"reproducing n=1 alpha={alpha:g} probe {k}", _cnum(exp), _cnum(res.value), res.std_error, ok))
    return rows


def check_duality(samples: int, seed: int) -> list[Check]:
    from .carleson import duality_check

    i, two_i = CPoint((), 1j), CPoint((), 2j)
    gallery = {
        "atom at i": Atomic(1, ((i, 1.0),)),
        "two atoms": Atomic(1, ((i, 1.0), (two_i, 0.5))),
    }
    rows = []
    for label, mu in gallery.items():
        for p, a, g in ((2.0, 2.0, 2.0), (2.0, 2.5, 1.8)):
            d = duality_check(mu, ResolventPower(a), ResolventPower(g), p, samples, seed)
            ok = d.agrees and d.sigma <= DUALITY_REL * abs(d.rhs)
            name = f"duality n=1 {label} p={p:g} alpha={a:g} gamma={g:g}"
            rows.append(Check(name, _cnum(d.rhs), _cnum(d.lhs), d.sigma, ok))
    return rows


# ---------------------------------------------------------------------------
# algebraic identities on random inputs


def _cauchy_jacobian(F, X: np.ndarray, radius: np.ndarray, nodes: int = 32) -> np.ndarray:
    """``|det dF|^2`` for holomorphic ``F`` via Cauchy-integral derivatives on circles of ``radius``."""
    m, n = X.shape
    theta = 2 * np.pi * np.arange(nodes) / nodes
    e = np.exp(1j * theta)
    D = np.empty((m, n, n), dtype=complex)
    for j in range(n):
        Y = np.repeat(X[:, None, :], nodes, axis=1)
        Y[:, :, j] += radius[:, None] * e[None, :]
        Fv = F(Y.reshape(-1, n)).reshape(m, nodes, n)
        D[:, :, j] = np.einsum("mkn,k->mn", Fv, np.conj(e)) / (nodes * radius[:, None])
    return np.abs(np.linalg.det(D)) ** 2


def check_cayley(n: int, seed: int, count: int = RANDOM_CHECKS) -> list[Check]:
    rng = substream(seed, "cayley", n)
    xi = random_ball_points(n, count, rng)
    eta = random_ball_points(n, count, rng)
    Z = random_domain_points(n, count, rng)
    W = random_domain_points(n, count, rng)
    i = origin_point(n).array
    errs = {}
    lhs = rho2_v(cayley_v(xi), cayley_v(eta))
    rhs = (1 - hdot(xi, eta)) / ((1 + xi[:, -1]) * np.conj(1 + eta[:, -1]))
    errs["cayley rho(Phi xi, Phi eta)"] = _rel(lhs, rhs).max()
    jac = _cauchy_jacobian(cayley_v, xi, 0.25 * np.abs(1 + xi[:, -1]))
    errs["cayley real Jacobian of Phi"] = _rel(jac, cayley_jacobian_v(xi)).max()
    lhs = 1 - hdot(cayley_inv_v(Z), cayley_inv_v(W))
    rhs = rho2_v(Z, W) / (rho2_v(Z, i) * rho2_v(i, W))
    errs["cayley 1 - Phi^-1(z).conj(Phi^-1(w))"] = _rel(lhs, rhs).max()
    lhs = np.sum(np.abs(cayley_inv_v(Z)) ** 2, axis=1)
    rhs = 1 - rho_v(Z) / np.abs(rho2_i_v(Z)) ** 2
    errs["cayley |Phi^-1(z)|^2"] = _rel(lhs, rhs).max()
    jac = _cauchy_jacobian(cayley_inv_v, Z, 0.25 * np.abs(Z[:, -1] + 1j))
    errs["cayley real Jacobian of Phi^-1"] = _rel(jac, cayleyinv_jacobian_v(Z)).max()
    om = random_ball_points(n, count, rng)
    worst = 0.0
    for k in range(count):
        a = moebius_v(xi[k], eta[k])
        b = moebius_v(xi[k], om[k])
        s2 = float(np.sum(np.abs(xi[k]) ** 2))
        lhs = 1 - hdot(a, b)
        rhs = (1 - s2) * (1 - hdot(eta[k], om[k])) / ((1 - hdot(eta[k], xi[k])) * (1 - hdot(xi[k], om[k])))
        worst = max(worst, float(_rel(lhs, rhs)))
    errs["moebius identity 1 - phi(eta).conj(phi(omega))"] = worst
    return [Check(f"{k} n={n}", 0.0, float(v), 0.0, bool(v <= ALGEBRAIC_TOL)) for k, v in errs.items()]


def check_metric_routes(n: int, seed: int, count: int = RANDOM_CHECKS) -> list[Check]:
    rng = substream(seed, "routes", n)
    Z = random_domain_points(n, count, rng)
    W = random_domain_points(n, count, rng)
    a = bergman_distance_v(Z, W)
    b = bergman_distance_ball_route_v(Z, W)
    err = float(_rel(a, b).max())
    return [Check(f"metric closed form = ball route n={n}", 0.0, err, 0.0, err <= ALGEBRAIC_TOL)]


# ---------------------------------------------------------------------------
# inequalities on random trials


def _violations(name: str, bad: np.ndarray) -> Check:
    v = int(np.sum(bad))
    return Check(name, 0, v, 0.0, v == 0)


def check_kernel_bound(n: int, seed: int, trials: int = BOUND_TRIALS) -> Check:
    rng = substream(seed, "kbound", n)
    Z = random_domain_points(n, trials, rng, (1e-3, 1e3))
    W = random_domain_points(n, trials, rng, (1e-3, 1e3))
    lhs = np.abs(bergman_kernel_v(Z, W))
    rhs = kernel_bound(n, rho_v(Z), rho_v(W))
    return _violations(f"kernel bound n={n}", lhs > rhs * (1 + BOUND_SLACK))


def check_quasi_invariance(n: int, seed: int, trials: int = BOUND_TRIALS) -> Check:
    rng = substream(seed, "quasi", n)
    bad = np.zeros(0, dtype=bool)
    radii = (0.5, 1.0, 2.0)
    per = trials // len(radii)
    for r in radii:
        Z = random_domain_points(n, per, rng)
        U = random_domain_points(n, per, rng)
        V = sigma_inv_rows(U, sample_ball_v(origin_point(n).array, r, per, rng))
        ratio = np.abs(rho2_v(Z, U)) / np.abs(rho2_v(Z, V))
        lo, hi = quasi_invariance_bounds(r)
        bad = np.concatenate([bad, (ratio < lo * (1 - BOUND_SLACK)) | (ratio > hi * (1 + BOUND_SLACK))])
    return _violations(f"quasi-invariance n={n}", bad)


def check_qj_bounds(n: int, seed: int, trials: int = BOUND_TRIALS) -> Check:
    rng = substream(seed, "qj", n)
    bad = np.zeros(0, dtype=bool)
    js = (0.5, 1.0, 2.0, 3.0)
    for j in js:
        W = sample_ball_v(origin_point(n).array, j, trials // len(js), rng)
        lo, hi = qj_rho_bounds(j)
        r = rho_v(W)
        bad = np.concatenate([bad, (r < lo * (1 - BOUND_SLACK)) | (r > hi * (1 + BOUND_SLACK))])
    return _violations(f"Q_j rho bounds n={n}", bad)


def check_growth_bound(n: int, seed: int, trials: int = BOUND_TRIALS) -> Check:
    """Pointwise growth bound for ``(z_n+i)^-alpha`` and ``[rho(a)^{n+1}/rho(z,a)^{2(n+1)}]^{1/q}``."""
    rng = substream(seed, "growth", n)
    half = trials // 2
    Z = random_domain_points(n, trials, rng, (1e-3, 1e3))
    p = rng.uniform(0.5, 4.0, trials)
    # resolvent powers with alpha p > n + 1
    alpha = (n + 1) / p[:half] + rng.uniform(0.05, 3.0, half)
    s = alpha * p[:half]
    fr = np.array([forelli_rudin_constant(n, x, 0.0) for x in s])
    norm_a = (2.0**-s * fr) ** (1 / p[:half])
    lhs_a = np.abs(Z[:half, -1] + 1j) ** -alpha
    # kernel powers with exponent 2(n+1)/q, q chosen so the L^p norm is finite
    A = random_domain_points(n, trials - half, rng, (1e-2, 1e2))
    pk = p[half:]
    q = pk * rng.uniform(0.3, 1.9, trials - half)
    sk = 2 * (n + 1) * pk / q
    frk = np.array([forelli_rudin_constant(n, x, 0.0) for x in sk])
    ra = rho_v(A)
    norm_k = (ra ** ((n + 1) * pk / q + n + 1 - sk) * frk) ** (1 / pk)
    lhs_k = ra ** ((n + 1) / q) * np.abs(rho2_v(Z[half:], A)) ** (-2 * (n + 1) / q)
    lhs = np.concatenate([lhs_a, lhs_k])
    norm = np.concatenate([norm_a, norm_k])
    G = np.array([growth_constant(n, x) for x in p])
    rhs = G * norm * rho_v(Z) ** (-(n + 1) / p)
    return _violations(f"growth bound n={n}", ~np.isfinite(norm) | (lhs > rhs * (1 + BOUND_SLACK)))


def _ellipsoid_rows(rng, r: np.ndarray, m: int, n: int) -> np.ndarray:
    """``m`` uniform points of ``D(i, r_k)`` for each entry of ``r``; shape ``(len(r), m, n)``."""
    T = r.shape[0]
    g = rng.standard_normal((T, m, 2 * n))
    g /= np.linalg.norm(g, axis=2, keepdims=True)
    g *= rng.random((T, m, 1)) ** (1 / (2 * n))
    s1, s2, c2 = np.sinh(r)[:, None], np.sinh(2 * r)[:, None], np.cosh(2 * r)[:, None]
    U = np.empty((T, m, n), dtype=complex)
    U[..., :-1] = s1[..., None] * (g[..., 2::2] + 1j * g[..., 3::2])
    U[..., -1] = s2 * g[..., 0] + 1j * (c2 + s2 * g[..., 1])
    return U


def check_mean_value(n: int, seed: int, trials: int = BOUND_TRIALS) -> Check:
    """``|f(i)|^p <= C(r) int_{D(i,r)} |f|^p dV`` for ``|f|^p = |rho(., b)|^{-e}``.

    Moving the center to ``i`` loses nothing: the automorphism ``sigma_z``
    maps this family to itself. Ball integrals are Monte-Carlo estimates;
    trials whose left side exceeds the estimate plus three standard errors
    are re-estimated with 2^12 and then 2^17 samples, and only those still
    above after the last stage count as violations.
    """
    rng = substream(seed, "meanvalue", n)
    B = random_domain_points(n, trials, rng, (1e-3, 1e2))
    e = rng.uniform(0.2, 8.0, trials)
    r = rng.uniform(0.25, 2.0, trials)
    vol = np.array([ball_volume_at_i(n, x) for x in r])
    C = np.array([mean_value_constant(n, x) for x in r])
    lhs = np.abs(rho2_v(origin_point(n).array, B)) ** -e
    idx = np.arange(trials)
    for m in (128, 1 << 12, 1 << 17):
        mean, se = np.empty(idx.size), np.empty(idx.size)
        step = max(1, (1 << 21) // m)
        for s in range(0, idx.size, step):
            sl = idx[s : s + step]
            v = np.abs(rho2_v(_ellipsoid_rows(rng, r[sl], m, n), B[sl][:, None, :])) ** (-e[sl][:, None])
            mean[s : s + step] = v.mean(axis=1)
            se[s : s + step] = v.std(axis=1, ddof=1) / math.sqrt(m)
        idx = idx[lhs[idx] > C[idx] * vol[idx] * (mean + 3 * se) * (1 + BOUND_SLACK)]
        if idx.size == 0:
            break
    return Check(f"mean-value bound n={n}", 0, int(idx.size), 0.0, idx.size == 0)


def check_condition_b_bridge(seed: int) -> Check:
    from .carleson import carleson_condition_b_integral

    mu = Atomic(2, ((CPoint((0.2j,), 1 + 1j), 1.0), (CPoint((0.5,), -2 + 3j), 2.5)))
    rng = substream(seed, "bridge", 0)
    worst = 0.0
    for Z in random_domain_points(2, 20, rng):
        z = CPoint.from_array(Z)
        a = berezin(mu, z).value
        b = carleson_condition_b_integral(mu, z).value
        worst = max(worst, abs(a - kernel_constant(2) * b) / abs(a))
    return Check("berezin = n!/(4 pi^n) * carleson_condition_b_integral, atomic", 0.0, worst, 0.0, worst <= EXACT_TOL)


# ---------------------------------------------------------------------------


def run_suite(samples: int = 1_000_000, seed: int = 0, dims=(1, 2)) -> list[Check]:
    """The full identity suite; rows in a fixed order."""
    rows: list[Check] = []

    def add(fn, *args):
        t = time.perf_counter()
        out = fn(*args)
        out = out if isinstance(out, list) else [out]
        dt = time.perf_counter() - t
        for c in out:
            c.seconds = dt / len(out)
        rows.extend(out)

    for n in dims:
        add(check_forelli_rudin, n, samples, seed)
        add(check_ball_volume, n, samples, seed)
        add(check_kernel_norm, n, samples, seed)
        add(check_cayley, n, seed)
        add(check_metric_routes, n, seed)
        add(check_kernel_bound, n, seed)
        add(check_quasi_invariance, n, seed)
        add(check_qj_bounds, n, seed)
        add(check_growth_bound, n, seed)
        add(check_mean_value, n, seed)
        add(check_berezin_lebesgue, n, samples, seed)
    if 1 in dims:
        add(check_reproducing, samples, seed)
        add(check_duality, min(samples, DUALITY_SAMPLES), seed)
    add(check_condition_b_bridge, seed)
    return rows


__all__ = [
    "Check",
    "check_ball_volume",
    "check_berezin_lebesgue",
    "check_cayley",
    "check_condition_b_bridge",
    "check_duality",
    "check_forelli_rudin",
    "check_growth_bound",
    "check_kernel_bound",
    "check_kernel_norm",
    "check_mean_value",
    "check_metric_routes",
    "check_qj_bounds",
    "check_quasi_invariance",
    "check_reproducing",
    "run_suite",
]
