"""Lattice spacings that keep the impurity-neighbour distance comparable."""
from __future__ import annotations

import math

from .lattice import GeometryError, LatticeKind, Placement


def _check(kind: LatticeKind, theta, scale, a_sq):
    if not a_sq > 0:
        raise GeometryError(f"reference spacing must be positive, got {a_sq}")
    if kind is LatticeKind.OBLIQUE and (theta is None or not 0 < theta < math.pi):
        raise GeometryError(f"theta must lie in (0, pi), got {theta}")
    if kind is LatticeKind.RECTANGULAR and (scale is None or not scale > 0):
        raise GeometryError(f"scale must be positive, got {scale}")


def rescaled_spacing(kind, theta=None, scale=None, a_sq: float = 0.15,
                     oblique_variant: str = "csc2") -> float:
    """Interstitial lattice spacing referenced to a square lattice ``a_sq``.

    The triangular rule is the closed form sqrt(2) a_sq / (1 + tan^2(pi/6)),
    which does *not* reproduce the square impurity-neighbour distance
    (see :func:`equal_distance_spacing`).

    ``oblique_variant="cos2"`` evaluates the alternative radicand
    1 - 2 cot(theta) + cos(theta)^2; it is kept only for comparison and
    raises when that radicand is not positive.
    """
    kind = LatticeKind(kind)
    _check(kind, theta, scale, a_sq)
    root2 = math.sqrt(2.0)
    if kind is LatticeKind.SQUARE:
        return a_sq
    if kind is LatticeKind.TRIANGULAR:
        return root2 * a_sq / (1.0 + math.tan(math.pi / 6) ** 2)
    if kind is LatticeKind.OBLIQUE:
        s, c = math.sin(theta), math.cos(theta)
        if oblique_variant == "csc2":
            # |cot| keeps the short diagonal fixed on both sides of pi/2
            radicand = 1.0 - 2.0 * abs(c / s) + 1.0 / s**2
        elif oblique_variant == "cos2":
            radicand = 1.0 - 2.0 * c / s + c**2
        else:
            raise ValueError(f"unknown oblique variant {oblique_variant!r}")
        if radicand <= 0:
            raise GeometryError(f"oblique radicand {radicand:.4g} <= 0 at theta={theta}")
        return root2 * a_sq / math.sqrt(radicand)
    if kind is LatticeKind.RECTANGULAR:
        return root2 * a_sq / math.sqrt(1.0 + scale**2)
    return root2 * a_sq / 2.0


def equal_distance_spacing(kind, theta=None, scale=None, a_sq: float = 0.15) -> float:
    """Interstitial spacing giving exactly the square centre-to-corner distance a_sq/sqrt(2).

    Differs from :func:`rescaled_spacing` only for the triangular lattice,
    where the centroid of an equilateral triangle of side a lies a/sqrt(3)
    from its corners.
    """
    kind = LatticeKind(kind)
    _check(kind, theta, scale, a_sq)
    if kind is LatticeKind.TRIANGULAR:
        return math.sqrt(1.5) * a_sq
    return rescaled_spacing(kind, theta, scale, a_sq)


def nearest_site_distance(kind, spacing: float, theta=None, scale=None) -> float:
    """Nearest-neighbour distance between lattice sites (in units of length)."""
    kind = LatticeKind(kind)
    if kind is LatticeKind.OBLIQUE:
        s, c = math.sin(theta), math.cos(theta)
        cot = c / s
        lengths = (1.0, 1.0 / abs(s), math.sqrt((1 - cot) ** 2 + 1), math.sqrt((1 + cot) ** 2 + 1))
        return spacing * min(lengths)
    if kind is LatticeKind.RECTANGULAR:
        return spacing * min(1.0, scale)
    return spacing


def lattice_spacing(kind, placement, a_sq: float = 0.15, theta=None, scale=None,
                    substitution: str = "rescaled", triangular: str = "equal_distance") -> float:
    """Spacing used for one geometry-comparison case.

    ``substitution="rescaled"`` reuses the interstitial spacing;
    ``"equal_distance"`` sets the impurity-neighbour distance of the
    substitutional array to the square reference ``a_sq``.
    ``triangular`` picks between the closed-form rule (``"closed_form"``) and the
    exact equal-distance rule (``"equal_distance"``).
    """
    kind = LatticeKind(kind)
    placement = Placement(placement)
    if triangular == "closed_form":
        interstitial = rescaled_spacing(kind, theta, scale, a_sq)
    elif triangular == "equal_distance":
        interstitial = equal_distance_spacing(kind, theta, scale, a_sq)
    else:
        raise ValueError(f"unknown triangular rule {triangular!r}")
    if placement is Placement.INTERSTITIAL or substitution == "rescaled":
        return interstitial
    if substitution == "equal_distance":
        return a_sq * interstitial / nearest_site_distance(kind, interstitial, theta, scale)
    raise ValueError(f"unknown substitution convention {substitution!r}")


def plaquette_distances_oblique(theta: float, a_sq: float = 0.15) -> tuple[float, float, float, float]:
    """Side lengths and diagonals of an oblique plaquette at fixed impurity distance.

    Returns (|a1|, |a2|, |a1 - a2|, |a1 + a2|) for the oblique lattice scaled
    so that the plaquette centre sits a_sq/sqrt(2) from its nearest corners.
    Written with cot and csc^2 so theta = pi/2 is exact.
    """
    if not 0 < theta < math.pi:
        raise GeometryError(f"theta must lie in (0, pi), got {theta}")
    s, c = math.sin(theta), math.cos(theta)
    cot = c / s
    csc2 = 1.0 / (s * s)
    denom = math.sqrt(1.0 - 2.0 * abs(cot) + csc2)
    pre = math.sqrt(2.0) * a_sq / denom
    root = math.sqrt(1.0 + cot * cot)
    d1 = pre
    d2 = pre * root
    d3 = pre * math.sqrt(max(2.0 + cot * cot - 2.0 * root * c, 0.0))
    d4 = pre * math.sqrt(2.0 + cot * cot + 2.0 * root * c)
    return d1, d2, d3, d4
