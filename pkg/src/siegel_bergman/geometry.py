"""Points of the Siegel upper half-space and the unit ball, and the maps between them.

Every formula has two entry points: a scalar one taking :class:`CPoint` /
:class:`BallPoint` values, and a vectorised one (suffix ``_v``) taking complex
arrays of shape ``(..., n)`` whose last coordinate is ``z_n``. The integration
engine only uses the vectorised versions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class DomainError(ValueError):
    """A point lies outside the domain an operation is defined on."""


def _as_complex_tuple(values) -> tuple[complex, ...]:
    out = tuple(complex(v) for v in values)
    for v in out:
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise ValueError(f"non-finite coordinate {v!r}")
    return out


@dataclass(frozen=True)
class CPoint:
    """A point ``(z', z_n)`` of C^n with ``z'`` in C^(n-1)."""

    zprime: tuple[complex, ...]
    zn: complex

    def __post_init__(self):
        object.__setattr__(self, "zprime", _as_complex_tuple(self.zprime))
        (zn,) = _as_complex_tuple([self.zn])
        object.__setattr__(self, "zn", zn)

    @property
    def dim(self) -> int:
        return len(self.zprime) + 1

    @property
    def array(self) -> np.ndarray:
        return np.array(self.zprime + (self.zn,), dtype=complex)

    @property
    def in_domain(self) -> bool:
        return rho(self) > 0

    @property
    def on_boundary(self) -> bool:
        return rho(self) == 0

    @classmethod
    def from_array(cls, a) -> "CPoint":
        a = np.asarray(a, dtype=complex).reshape(-1)
        return cls(tuple(a[:-1]), a[-1])

    @classmethod
    def from_json(cls, obj: dict) -> "CPoint":
        try:
            zp = [complex(float(re), float(im)) for re, im in obj.get("zprime", [])]
            re, im = obj["zn"]
            return cls(tuple(zp), complex(float(re), float(im)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed point JSON: {obj!r}") from exc

    def to_json(self) -> dict:
        return {
            "zprime": [[c.real, c.imag] for c in self.zprime],
            "zn": [self.zn.real, self.zn.imag],
        }


def origin_point(n: int) -> CPoint:
    """The base point ``i = (0', i)``."""
    return CPoint((0j,) * (n - 1), 1j)


@dataclass(frozen=True)
class BallPoint:
    """A point of the open unit ball of C^n.

    Use :meth:`unchecked` to build a point of the closed ball (for example the
    pole ``-e_n`` or a boundary point of the sphere).
    """

    coords: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", _as_complex_tuple(self.coords))
        if sum(abs(c) ** 2 for c in self.coords) >= 1.0:
            raise DomainError("BallPoint must satisfy |xi| < 1")

    @classmethod
    def unchecked(cls, coords: Sequence[complex]) -> "BallPoint":
        obj = object.__new__(cls)
        object.__setattr__(obj, "coords", _as_complex_tuple(coords))
        return obj

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=complex)

    @classmethod
    def from_array(cls, a, check: bool = True) -> "BallPoint":
        a = tuple(np.asarray(a, dtype=complex).reshape(-1))
        return cls(a) if check else cls.unchecked(a)


# ---------------------------------------------------------------------------
# vectorised forms


def hdot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hermitian product ``a . conj(b)`` along the last axis."""
    return np.sum(a * np.conj(b), axis=-1)


def rho_v(Z: np.ndarray) -> np.ndarray:
    Z = np.asarray(Z)
    zp = Z[..., :-1]
    return Z[..., -1].imag - np.sum(zp.real**2 + zp.imag**2, axis=-1)


def rho2_v(Z: np.ndarray, W: np.ndarray) -> np.ndarray:
    Z = np.asarray(Z)
    W = np.asarray(W)
    return 0.5j * (np.conj(W[..., -1]) - Z[..., -1]) - hdot(Z[..., :-1], W[..., :-1])


def rho2_i_v(Z: np.ndarray) -> np.ndarray:
    """``rho(z, i) = (1 - i z_n) / 2``."""
    return 0.5 * (1.0 - 1j * np.asarray(Z)[..., -1])


def cayley_v(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    d = 1.0 + X[..., -1]
    out = np.empty_like(X)
    out[..., :-1] = X[..., :-1] / d[..., None]
    out[..., -1] = 1j * (1.0 - X[..., -1]) / d
    return out


def cayley_inv_v(Z: np.ndarray) -> np.ndarray:
    Z = np.asarray(Z, dtype=complex)
    d = 1j + Z[..., -1]
    out = np.empty_like(Z)
    out[..., :-1] = 2j * Z[..., :-1] / d[..., None]
    out[..., -1] = (1j - Z[..., -1]) / d
    return out


def cayley_jacobian_v(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    n = X.shape[-1]
    return 4.0 / np.abs(1.0 + X[..., -1]) ** (2 * (n + 1))


def cayleyinv_jacobian_v(Z: np.ndarray) -> np.ndarray:
    Z = np.asarray(Z, dtype=complex)
    n = Z.shape[-1]
    return 1.0 / (4.0 * np.abs(rho2_i_v(Z)) ** (2 * (n + 1)))


def dilation_v(t: float, U: np.ndarray) -> np.ndarray:
    """Non-isotropic dilation ``(u', u_n) -> (t u', t^2 u_n)``."""
    U = np.asarray(U, dtype=complex)
    out = U * t
    out[..., -1] = U[..., -1] * t * t
    return out


def heisenberg_v(z: np.ndarray, U: np.ndarray) -> np.ndarray:
    """The affine automorphism ``h_z`` sending ``z`` to ``(0', i rho(z))``."""
    z = np.asarray(z, dtype=complex)
    U = np.asarray(U, dtype=complex)
    zp = z[:-1]
    out = np.empty(np.broadcast_shapes(U.shape, z.shape), dtype=complex)
    out[..., :-1] = U[..., :-1] - zp
    out[..., -1] = (
        U[..., -1] - z[-1].real - 2j * hdot(U[..., :-1], zp) + 1j * np.sum(np.abs(zp) ** 2)
    )
    return out


def heisenberg_inv_v(z: np.ndarray, V: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    V = np.asarray(V, dtype=complex)
    zp = z[:-1]
    out = np.empty(np.broadcast_shapes(V.shape, z.shape), dtype=complex)
    out[..., :-1] = V[..., :-1] + zp
    out[..., -1] = (
        V[..., -1] + z[-1].real + 2j * hdot(V[..., :-1], zp) + 1j * np.sum(np.abs(zp) ** 2)
    )
    return out


def sigma_v(z: np.ndarray, U: np.ndarray) -> np.ndarray:
    """``sigma_z = delta_{rho(z)^{-1/2}} o h_z``; maps ``z`` to ``i``."""
    t = float(rho_v(np.asarray(z))) ** -0.5
    return dilation_v(t, heisenberg_v(z, U))


def sigma_inv_v(z: np.ndarray, V: np.ndarray) -> np.ndarray:
    t = float(rho_v(np.asarray(z))) ** 0.5
    return heisenberg_inv_v(z, dilation_v(t, V))


def sigma_inv_rows(Z: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Row-wise ``sigma_{Z[k]}^{-1}(V[k])`` for ``(m, n)`` arrays."""
    Z = np.asarray(Z, dtype=complex)
    V = np.asarray(V, dtype=complex)
    t = np.sqrt(rho_v(Z))
    zp = Z[:, :-1]
    vp = V[:, :-1] * t[:, None]
    out = np.empty_like(V)
    out[:, :-1] = vp + zp
    out[:, -1] = (
        V[:, -1] * t * t + Z[:, -1].real + 2j * hdot(vp, zp) + 1j * np.sum(np.abs(zp) ** 2, axis=-1)
    )
    return out


def moebius_v(xi: np.ndarray, Eta: np.ndarray) -> np.ndarray:
    """Involutive ball automorphism ``phi_xi`` exchanging ``xi`` and ``0``."""
    xi = np.asarray(xi, dtype=complex)
    Eta = np.asarray(Eta, dtype=complex)
    s2 = float(np.sum(np.abs(xi) ** 2))
    ex = hdot(Eta, xi)
    if s2 == 0.0:
        return -Eta.copy()
    P = (ex / s2)[..., None] * xi
    Q = Eta - P
    return (xi - P - math.sqrt(1.0 - s2) * Q) / (1.0 - ex)[..., None]


# ---------------------------------------------------------------------------
# scalar API


def _check_same_dim(*pts) -> int:
    dims = {p.dim for p in pts}
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def _require_domain(*pts: CPoint) -> None:
    for p in pts:
        if not rho(p) > 0:
            raise DomainError(f"point {p} is not in the Siegel upper half-space")


def rho(z: CPoint) -> float:
    return z.zn.imag - sum(abs(c) ** 2 for c in z.zprime)


def rho2(z: CPoint, w: CPoint) -> complex:
    _check_same_dim(z, w)
    cross = sum(a * b.conjugate() for a, b in zip(z.zprime, w.zprime))
    return 0.5j * (w.zn.conjugate() - z.zn) - cross


def cayley(xi: BallPoint) -> CPoint:
    if xi.coords[-1] == -1:
        raise DomainError("Cayley transform has a pole at xi_n = -1")
    return CPoint.from_array(cayley_v(xi.array))


def cayley_inv(z: CPoint) -> BallPoint:
    _require_domain(z)
    return BallPoint.from_array(cayley_inv_v(z.array), check=False)


def cayley_jacobian(xi: BallPoint) -> float:
    if xi.coords[-1] == -1:
        raise DomainError("Cayley transform has a pole at xi_n = -1")
    return float(cayley_jacobian_v(xi.array))


def cayleyinv_jacobian(z: CPoint) -> float:
    _require_domain(z)
    return float(cayleyinv_jacobian_v(z.array))


def dilation(t: float, u: CPoint) -> CPoint:
    return CPoint.from_array(dilation_v(t, u.array))


def heisenberg(z: CPoint, u: CPoint) -> CPoint:
    _check_same_dim(z, u)
    return CPoint.from_array(heisenberg_v(z.array, u.array))


def sigma(z: CPoint, u: CPoint) -> CPoint:
    _check_same_dim(z, u)
    _require_domain(z, u)
    return CPoint.from_array(sigma_v(z.array, u.array))


def sigma_inv(z: CPoint, v: CPoint) -> CPoint:
    _check_same_dim(z, v)
    _require_domain(z, v)
    return CPoint.from_array(sigma_inv_v(z.array, v.array))


def moebius(xi: BallPoint, eta: BallPoint) -> BallPoint:
    if xi.dim != eta.dim:
        raise ValueError("dimension mismatch")
    if sum(abs(c) ** 2 for c in xi.coords) >= 1.0:
        raise DomainError("phi_xi requires |xi| < 1")
    return BallPoint.from_array(moebius_v(xi.array, eta.array), check=False)


# ---------------------------------------------------------------------------
# random points, used by property checks


def random_domain_points(
    n: int,
    count: int,
    rng: np.random.Generator,
    rho_range: tuple[float, float] = (1e-2, 1e2),
    x_max: float = 10.0,
    zprime_scale: float = 1.0,
) -> np.ndarray:
    """Points of U with rho log-uniform in ``rho_range``, shape ``(count, n)``."""
    lo, hi = rho_range
    r = np.exp(rng.uniform(math.log(lo), math.log(hi), count))
    x = rng.uniform(-x_max, x_max, count)
    zp = zprime_scale * (rng.standard_normal((count, n - 1)) + 1j * rng.standard_normal((count, n - 1)))
    Z = np.empty((count, n), dtype=complex)
    Z[:, :-1] = zp
    Z[:, -1] = x + 1j * (r + np.sum(np.abs(zp) ** 2, axis=-1))
    return Z


def random_ball_points(n: int, count: int, rng: np.random.Generator, max_radius: float = 0.999) -> np.ndarray:
    g = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    g /= np.linalg.norm(g, axis=-1, keepdims=True)
    rad = max_radius * rng.random(count) ** (1.0 / (2 * n))
    return g * rad[:, None]
