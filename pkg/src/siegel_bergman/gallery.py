"""Reference measures with known Carleson behaviour, used by the acceptance suite and scripts."""

from __future__ import annotations

from dataclasses import dataclass

from .carleson import CARLESON, NOT_CARLESON, NOT_VANISHING, VANISHING
from .geometry import origin_point
from .integrate import RegionSpec
from .measures import Atomic, Lebesgue, MeasureSpec, NamedDensity
from .metric import BergmanBall

RADII = (0.5, 1.0, 2.0)
SEEDS = (7, 11, 13)
RHO_POWER_SLOPE = -0.5


@dataclass(frozen=True)
class GalleryCase:
    name: str
    measure: MeasureSpec
    bounded: str
    vanishing: str


def gallery(n: int = 1) -> tuple[GalleryCase, ...]:
    i = origin_point(n)
    return (
        GalleryCase("lebesgue", Lebesgue(n), CARLESON, NOT_VANISHING),
        GalleryCase("rho^-1/2", NamedDensity(n, "rho_power", RHO_POWER_SLOPE), NOT_CARLESON, NOT_VANISHING),
        GalleryCase(
            "rho^1/2 on rho<=1",
            NamedDensity(n, "rho_power", 0.5, restriction=RegionSpec(0.0, 1.0)),
            CARLESON,
            NOT_VANISHING,
        ),
        GalleryCase("atom at i", Atomic(n, ((i, 1.0),)), CARLESON, VANISHING),
        GalleryCase("lebesgue on D(i,1)", Lebesgue(n, RegionSpec(ball=BergmanBall(i, 1.0))), CARLESON, VANISHING),
    )


__all__ = ["RADII", "RHO_POWER_SLOPE", "SEEDS", "GalleryCase", "gallery"]
