"""Boundary integrals on the tree: the measure-derivative cocycle and the
spherical (Harish-Chandra type) function, in closed form and by brute-force
partition sums.

On a d-regular tree with q = d - 1, the visibility measure transforms under
the vertex moved to w by the factor q^beta, beta the Busemann value.  The
spherical function is the sphere average of q^(beta/2); its closed form is

    (1 + n*(q-1)/(q+1)) * q^(-n/2)

for displacement n.  The brute-force evaluation integrates q^(beta/2) over the
standard partition of the boundary by branch depth along a fixed geodesic and
never touches the closed form, so the two paths check each other.  The product
function for the two places multiplies factor values and is cached per length
pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .algebra import AlgebraicValue
from .trees import (
    BoundaryCylinder,
    TreeVertex,
    busemann,
    cylinder_measure,
    gromov_product,
    sphere_size,
    sphere_vertices,
)


def cocycle_sqrt(w: TreeVertex, cylinder: BoundaryCylinder) -> AlgebraicValue:
    """q^(beta/2) for the constant Busemann value beta of the cylinder at w.

    ``w`` is the translate of the base vertex whose cocycle is being
    evaluated; the cylinder must be deep enough for constancy (see
    ``busemann``).  Exact: irrational precisely when beta is odd.
    """
    if cylinder.degree != w.degree:
        raise ValueError("cylinder and vertex from trees of different degree")
    beta = busemann(cylinder, w)
    return AlgebraicValue.sqrt_q_power(w.degree - 1, beta)


@dataclass(frozen=True, slots=True)
class HarishChandraValue:
    """An exact spherical-function value together with the lengths it was
    evaluated at: one length for a single tree, a pair for the product."""

    value: AlgebraicValue
    lengths: tuple[int, ...]


def hc_tree_closed(degree: int, n: int) -> HarishChandraValue:
    """Closed-form spherical function of the d-regular tree at displacement n."""
    if degree < 3:
        raise ValueError("degree must be at least 3")
    if n < 0:
        raise ValueError("negative displacement")
    q = degree - 1
    coeff = 1 + Fraction(q - 1, q + 1) * n
    value = AlgebraicValue.rational(coeff, q) * AlgebraicValue.sqrt_q_power(q, -n)
    return HarishChandraValue(value, (n,))


def hc_tree_bruteforce(degree: int, n: int) -> HarishChandraValue:
    """Spherical function via the boundary partition along a fixed geodesic.

    Fix the leftmost vertex w at distance n.  The boundary splits into the
    cylinder over w plus, for each 1 <= i <= n, the cylinders over the
    vertices branching off the geodesic [root, w] at depth i.  Busemann
    values on the pieces come from Gromov products and measures from the
    cylinder formula; the closed form is never consulted.
    """
    if degree < 3:
        raise ValueError("degree must be at least 3")
    if n < 0:
        raise ValueError("negative displacement")
    q = degree - 1
    if n == 0:
        return HarishChandraValue(AlgebraicValue.rational(1, q), (0,))
    w = TreeVertex(degree, (0,) * n)
    total = AlgebraicValue.rational(0, q)
    total_measure = Fraction(0)
    # ends through w itself
    over_w = BoundaryCylinder(w)
    total = total + AlgebraicValue.rational(cylinder_measure(over_w), q) * cocycle_sqrt(w, over_w)
    total_measure += cylinder_measure(over_w)
    for i in range(1, n + 1):
        prefix = w.path[: i - 1]
        labels = range(degree) if i == 1 else range(degree - 1)
        branch_count = 0
        for label in labels:
            if label == w.path[i - 1]:
                continue
            y = TreeVertex(degree, prefix + (label,))
            beta = 2 * gromov_product(w, y) - n
            piece = BoundaryCylinder(y)
            total = total + AlgebraicValue.rational(cylinder_measure(piece), q) * AlgebraicValue.sqrt_q_power(q, beta)
            total_measure += cylinder_measure(piece)
            branch_count += 1
        expected = degree - 1 if i == 1 else degree - 2
        if branch_count != expected:
            raise RuntimeError(f"partition piece count {branch_count} != {expected} at depth {i}")
    if total_measure != 1:
        raise RuntimeError(f"partition measures sum to {total_measure}, not 1")
    return HarishChandraValue(total, (n,))


@lru_cache(maxsize=None)
def hc_product(length_zero: int, length_infinity: int, q: int) -> HarishChandraValue:
    """Spherical function of the product of the two (q+1)-regular trees.

    The boundary measure is the product measure, so the value is the product
    of the factor values; cached per length pair.
    """
    v0 = hc_tree_closed(q + 1, length_zero).value
    v1 = hc_tree_closed(q + 1, length_infinity).value
    return HarishChandraValue(v0 * v1, (length_zero, length_infinity))


def hc_product_expanded(length_zero: int, length_infinity: int, q: int) -> AlgebraicValue:
    """The same value written out: (1 + r*L + r^2*l0*linf) * q^(-L/2), with
    r = (q-1)/(q+1) and L the total length.  Used to cross-check hc_product."""
    r = Fraction(q - 1, q + 1)
    total = length_zero + length_infinity
    coeff = 1 + r * total + r * r * length_zero * length_infinity
    return AlgebraicValue.rational(coeff, q) * AlgebraicValue.sqrt_q_power(q, -total)


def sphere_average_check(degree: int, n: int, cylinder: BoundaryCylinder) -> AlgebraicValue:
    """Exact ratio (sphere average of the cocycle square root) / (closed form).

    The identity says this is 1 for every cylinder of depth >= n; computing
    the ratio rather than asserting keeps the op usable as an oracle.
    """
    if cylinder.degree != degree:
        raise ValueError("cylinder degree mismatch")
    if cylinder.depth < n:
        raise ValueError("cylinder too shallow for the sphere radius")
    q = degree - 1
    acc = AlgebraicValue.rational(0, q)
    for w in sphere_vertices(degree, n):
        acc = acc + cocycle_sqrt(w, cylinder)
    average = acc / AlgebraicValue.rational(sphere_size(degree, n), q)
    return average / hc_tree_closed(degree, n).value
