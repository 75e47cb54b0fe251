"""Bergman kernel of the Siegel upper half-space and related closed forms."""

from __future__ import annotations

import math

import numpy as np

from .geometry import CPoint, DomainError, _check_same_dim, _require_domain, rho, rho2

# Lanczos approximation, g = 7, 9 terms.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)
MAX_FACTORIAL_DIM = 20
BOUND_SLACK = 1e-9


def gamma(x: float) -> float:
    """Gamma function for positive real ``x``.

    Lanczos sum with reflection below 1/2. Raises ``OverflowError`` for
    ``x > 170`` (the largest argument kept inside double range).
    """
    x = float(x)
    if not x > 0:
        raise ValueError(f"gamma requires x > 0, got {x}")
    if x > 171.0:
        raise OverflowError(f"gamma({x}) overflows double precision")
    if x == math.floor(x) and x <= 21:
        return float(math.factorial(int(x) - 1))
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    y = x - 1.0
    a = _LANCZOS_COEF[0]
    t = y + _LANCZOS_G + 0.5
    for k in range(1, len(_LANCZOS_COEF)):
        a += _LANCZOS_COEF[k] / (y + k)
    # split the power so that t**(y+0.5) never overflows on its own
    half = t ** ((y + 0.5) / 2.0)
    return _SQRT_2PI * half * (half * math.exp(-t)) * a


def factorial(n: int) -> int:
    if not 0 <= n <= MAX_FACTORIAL_DIM:
        raise ValueError(f"dimension {n} outside supported range 1..{MAX_FACTORIAL_DIM}")
    return math.factorial(n)


def kernel_constant(n: int) -> float:
    """``n! / (4 pi^n)``, the kernel's leading constant."""
    return factorial(n) / (4.0 * math.pi**n)


def bergman_kernel_v(Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    from .geometry import rho2_v

    n = np.shape(Z)[-1]
    return kernel_constant(n) * rho2_v(Z, W) ** (-(n + 1))


def bergman_kernel(z: CPoint, w: CPoint) -> complex:
    n = _check_same_dim(z, w)
    _require_domain(z, w)
    return kernel_constant(n) * rho2(z, w) ** (-(n + 1))


def normalized_kernel(z: CPoint, w: CPoint) -> complex:
    """``k_z(w) = K(z, w) / sqrt(K(z, z))``."""
    return bergman_kernel(z, w) / math.sqrt(bergman_kernel(z, z).real)


def forelli_rudin_constant(n: int, s: float, t: float) -> float:
    """Constant of ``int_U rho(w)^t / |rho(z,w)|^s dV(w)``; ``math.inf`` when divergent."""
    if not (t > -1 and s - t > n + 1):
        return math.inf
    return 4.0 * math.pi**n * gamma(1.0 + t) * gamma(s - t - n - 1.0) / gamma(s / 2.0) ** 2


def forelli_rudin_integral(z: CPoint, s: float, t: float) -> float:
    _require_domain(z)
    c = forelli_rudin_constant(z.dim, s, t)
    if math.isinf(c):
        return math.inf
    return c / rho(z) ** (s - t - z.dim - 1)


def kernel_norm_constant(n: int, p: float) -> float:
    """``C_{n,p}`` with ``||K_z||_p = C_{n,p} rho(z)^{-(n+1)/p'}``."""
    if not p > 1:
        raise ValueError(f"kernel norm requires p > 1, got {p}")
    return kernel_constant(n) * forelli_rudin_constant(n, p * (n + 1), 0.0) ** (1.0 / p)


def kernel_norm(z: CPoint, p: float) -> float:
    _require_domain(z)
    c = kernel_norm_constant(z.dim, p)
    conj = p / (p - 1.0)
    return c * rho(z) ** (-(z.dim + 1) / conj)


def kernel_bound(n: int, rho_z, rho_w):
    """Right-hand side of ``|K(z,w)| <= 2^{n-1} n!/pi^n min(rho)^{-n-1}``."""
    return 2.0 ** (n - 1) * factorial(n) / math.pi**n * np.minimum(rho_z, rho_w) ** (-(n + 1))


def growth_constant(n: int, p: float) -> float:
    """``(4^n n! / pi^n)^{1/p}`` from the pointwise growth estimate on A^p."""
    return (4.0**n * factorial(n) / math.pi**n) ** (1.0 / p)


def mean_value_constant(n: int, r: float) -> float:
    """Constant ``4^n n! / (pi^n tanh^{2n} r)`` of the local mean-value estimate."""
    return 4.0**n * factorial(n) / (math.pi**n * math.tanh(r) ** (2 * n))


def growth_bound_check(f, p: float, z: CPoint, norm: float | None = None) -> bool:
    """Check ``|f(z)| <= (4^n n!/pi^n)^{1/p} ||f||_p rho(z)^{-(n+1)/p}``.

    ``norm`` defaults to the closed-form ``||f||_p`` of the test function.
    """
    from .measures import eval_test_function, test_function_norm

    _require_domain(z)
    if norm is None:
        norm = test_function_norm(f, p)
    if not math.isfinite(norm):
        raise ValueError("growth bound needs a finite L^p norm")
    lhs = abs(eval_test_function(f, z))
    rhs = growth_constant(z.dim, p) * norm * rho(z) ** (-(z.dim + 1) / p)
    return lhs <= rhs * (1.0 + BOUND_SLACK)


__all__ = [
    "DomainError",
    "bergman_kernel",
    "bergman_kernel_v",
    "factorial",
    "forelli_rudin_constant",
    "forelli_rudin_integral",
    "gamma",
    "growth_bound_check",
    "growth_constant",
    "kernel_bound",
    "kernel_constant",
    "kernel_norm",
    "kernel_norm_constant",
    "mean_value_constant",
    "normalized_kernel",
]
