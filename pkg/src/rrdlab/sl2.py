"""SL2 over the Laurent-polynomial ring, tree lengths at the two places, and
lattice-class vertex coordinates for the associated (q+1)-regular trees.

A group element acts on the local field at each place; the vertex it moves the
base point to is the homothety class of the lattice spanned by its columns.
Lattice classes are put in a canonical triangular form (diagonal powers of the
uniformizer, off-diagonal entry reduced modulo the larger diagonal power,
homothety-normalized so the smaller diagonal valuation is 0), which is
injective on classes and idempotent.  A breadth-first registry maps canonical
forms to rooted label paths, giving the bridge from matrix algebra to the tree
coordinates used by the boundary analysis.

Place infinity reuses all place-zero code through the exact substitution
X -> X^-1, under which the uniformizer becomes X again.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional

from .algebra import (
    Fq,
    INFINITE_VALUATION,
    LaurentPolynomial,
    Place,
    RationalFunction,
)
from .trees import TreeVertex


class SL2Element:
    """A determinant-1 matrix [[a, b], [c, d]] of Laurent polynomials.

    Immutable; the two tree lengths are computed lazily and cached.  The
    determinant is verified at construction (pass check=False only when the
    construction guarantees it algebraically).
    """

    __slots__ = ("a", "b", "c", "d", "field", "__dict__")

    def __init__(
        self,
        a: LaurentPolynomial,
        b: LaurentPolynomial,
        c: LaurentPolynomial,
        d: LaurentPolynomial,
        check: bool = True,
    ):
        self.a, self.b, self.c, self.d = a, b, c, d
        self.field = a.field
        if check:
            det = a * d - b * c
            if not det.is_one():
                raise ValueError(f"determinant violation: det = {det!r}")

    # constructors -----------------------------------------------------------

    @classmethod
    def identity(cls, field: Fq) -> "SL2Element":
        one = LaurentPolynomial.one(field)
        zero = LaurentPolynomial.zero(field)
        return cls(one, zero, zero, one, check=False)

    @classmethod
    def elementary_upper(cls, s: LaurentPolynomial) -> "SL2Element":
        """E12(s) = [[1, s], [0, 1]]."""
        field = s.field
        one = LaurentPolynomial.one(field)
        zero = LaurentPolynomial.zero(field)
        return cls(one, s, zero, one, check=False)

    @classmethod
    def elementary_lower(cls, s: LaurentPolynomial) -> "SL2Element":
        """E21(s) = [[1, 0], [s, 1]]."""
        field = s.field
        one = LaurentPolynomial.one(field)
        zero = LaurentPolynomial.zero(field)
        return cls(one, zero, s, one, check=False)

    @classmethod
    def diagonal_shift(cls, field: Fq, k: int) -> "SL2Element":
        """diag(X^k, X^-k)."""
        zero = LaurentPolynomial.zero(field)
        return cls(
            LaurentPolynomial.x_power(field, k),
            zero,
            zero,
            LaurentPolynomial.x_power(field, -k),
            check=False,
        )

    # group operations ---------------------------------------------------------

    def __mul__(self, other: "SL2Element") -> "SL2Element":
        if not isinstance(other, SL2Element):
            return NotImplemented
        return SL2Element(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
            check=False,
        )

    def inverse(self) -> "SL2Element":
        return SL2Element(self.d, -self.b, -self.c, self.a, check=False)

    def entries(self) -> tuple[LaurentPolynomial, LaurentPolynomial, LaurentPolynomial, LaurentPolynomial]:
        return (self.a, self.b, self.c, self.d)

    def is_identity(self) -> bool:
        return self.a.is_one() and self.d.is_one() and self.b.is_zero() and self.c.is_zero()

    # lengths ------------------------------------------------------------------

    def _min_entry_valuation(self, place: Place) -> int:
        vals = [e.valuation(place) for e in self.entries() if not e.is_zero()]
        return min(v for v in vals if isinstance(v, int))

    @cached_property
    def length_zero(self) -> int:
        return -2 * self._min_entry_valuation(Place.ZERO)

    @cached_property
    def length_infinity(self) -> int:
        return -2 * self._min_entry_valuation(Place.INFINITY)

    def length_at_place(self, place: Place) -> int:
        """Tree displacement length of the base vertex at the given place.

        Production fast path: -2 * (minimum entry valuation), which agrees
        with the elementary-divisor gap for determinant-1 matrices; the Smith
        computation below is the independent oracle.
        """
        return self.length_zero if place is Place.ZERO else self.length_infinity

    @cached_property
    def total_length(self) -> int:
        """L = L_zero + L_infinity, the radial variable of the group."""
        return self.length_zero + self.length_infinity

    # serialization --------------------------------------------------------------

    def to_text(self) -> str:
        return "|".join(e.to_text() for e in self.entries())

    @classmethod
    def from_text(cls, field: Fq, text: str) -> "SL2Element":
        parts = text.split("|")
        if len(parts) != 4:
            raise ValueError(f"malformed SL2 text: {text!r}")
        a, b, c, d = (LaurentPolynomial.from_text(field, p) for p in parts)
        return cls(a, b, c, d)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SL2Element):
            return NotImplemented
        return (
            self.field is other.field
            and self.a == other.a
            and self.b == other.b
            and self.c == other.c
            and self.d == other.d
        )

    def __hash__(self) -> int:
        return hash((self.a, self.b, self.c, self.d))

    def __repr__(self) -> str:
        return f"[[{self.a!r}, {self.b!r}], [{self.c!r}, {self.d!r}]]"


def sl2_mul(g: SL2Element, h: SL2Element) -> SL2Element:
    return g * h


def sl2_inv(g: SL2Element) -> SL2Element:
    return g.inverse()


def _to_uniformizer(entry: LaurentPolynomial, place: Place) -> LaurentPolynomial:
    """Rewrite an entry in the local uniformizer variable of the place.

    At place zero the uniformizer is X itself; at place infinity substitute
    X -> X^-1, after which the place-zero code applies verbatim.
    """
    return entry if place is Place.ZERO else entry.substitute_inverse()


def smith_valuations(g: SL2Element, place: Place) -> tuple[int, int]:
    """Sorted elementary-divisor valuations of g over the local ring at place.

    Genuine valuation-guided pivoting over the rational function field: the
    minimum-valuation entry is swapped to the corner, its row and column are
    cleared with quotients (which lie in the valuation ring), and the
    remaining entry supplies the second divisor.  Independent of the
    min-valuation shortcut used by ``length_at_place``.
    """
    entries = [
        [RationalFunction.from_laurent(_to_uniformizer(e, place)) for e in row]
        for row in ((g.a, g.b), (g.c, g.d))
    ]
    best: Optional[tuple[int, int]] = None
    best_val: Optional[int] = None
    for i in range(2):
        for j in range(2):
            v = entries[i][j].valuation(Place.ZERO)
            if isinstance(v, int) and (best_val is None or v < best_val):
                best_val = v
                best = (i, j)
    if best is None:
        raise ValueError("degenerate input: zero matrix")
    i, j = best
    if i == 1:
        entries[0], entries[1] = entries[1], entries[0]
    if j == 1:
        for row in entries:
            row[0], row[1] = row[1], row[0]
    pivot = entries[0][0]
    # clear the rest of the first row and column
    col_factor = entries[1][0] / pivot
    entries[1][0] = entries[1][0] - col_factor * pivot
    entries[1][1] = entries[1][1] - col_factor * entries[0][1]
    row_factor = entries[0][1] / pivot
    entries[0][1] = entries[0][1] - row_factor * pivot
    corner = entries[1][1]
    if corner.is_zero():
        raise ValueError("degenerate input: matrix not invertible over the field")
    v1 = pivot.valuation(Place.ZERO)
    v2 = corner.valuation(Place.ZERO)
    assert isinstance(v1, int) and isinstance(v2, int)
    return (v1, v2) if v1 <= v2 else (v2, v1)


def length_at_place(g: SL2Element, place: Place) -> int:
    return g.length_at_place(place)


def total_length(g: SL2Element) -> int:
    return g.total_length


@dataclass(frozen=True, slots=True)
class LatticeVertex:
    """Canonical form of a lattice class: basis [[X^a, 0], [c, X^b]] in the
    uniformizer variable of ``place``, with min(a, b) = 0 and the exponents of
    c strictly below b."""

    place: Place
    diag_low: int
    diag_high: int
    off_diag: LaurentPolynomial

    @property
    def field(self) -> Fq:
        return self.off_diag.field

    def key(self) -> tuple[str, int, int, str]:
        return (self.place.value, self.diag_low, self.diag_high, self.off_diag.to_text())

    def to_text(self) -> str:
        return f"a={self.diag_low};b={self.diag_high};{self.off_diag.to_text()}"

    @classmethod
    def from_text(cls, field: Fq, place: Place, text: str) -> "LatticeVertex":
        m = text.split(";", 2)
        if len(m) != 3 or not m[0].startswith("a=") or not m[1].startswith("b="):
            raise ValueError(f"malformed lattice vertex text: {text!r}")
        a = int(m[0][2:])
        b = int(m[1][2:])
        c = LaurentPolynomial.from_text(field, m[2])
        return cls(place, a, b, c)

    def basis_columns(
        self,
    ) -> tuple[tuple[LaurentPolynomial, LaurentPolynomial], tuple[LaurentPolynomial, LaurentPolynomial]]:
        """Generating columns (X^a, c) and (0, X^b) in the uniformizer variable."""
        field = self.field
        return (
            (LaurentPolynomial.x_power(field, self.diag_low), self.off_diag),
            (LaurentPolynomial.zero(field), LaurentPolynomial.x_power(field, self.diag_high)),
        )

    def base_distance(self) -> int:
        """Tree distance to the standard-lattice vertex."""
        # elementary divisors of the canonical basis: min entry valuation m and
        # (a + b) - m, a gap of |a - b| when c does not dip below, else wider
        col1_val = min(
            self.diag_low,
            self.off_diag.valuation(Place.ZERO) if not self.off_diag.is_zero() else self.diag_low,
        )
        m = min(col1_val, self.diag_high)
        return (self.diag_low + self.diag_high) - 2 * m


def _canonical_from_triangular(
    place: Place, a: int, b: int, c: LaurentPolynomial
) -> LatticeVertex:
    """Normalize an already-triangular basis [[X^a, 0], [c, X^b]]."""
    m = min(a, b)
    a -= m
    b -= m
    c = c.shift(-m)
    # reduce c modulo X^b: keep exponents strictly below b
    if not c.is_zero() and c.top >= b:
        keep = [
            (e, coeff)
            for e, coeff in zip(range(c.low, c.top + 1), c.raw_coefficients)
            if e < b
        ]
        if keep:
            low = keep[0][0]
            out = [0] * (keep[-1][0] - low + 1)
            for e, coeff in keep:
                out[e - low] = coeff
            c = LaurentPolynomial(c.field, low, out)
        else:
            c = LaurentPolynomial.zero(c.field)
    return LatticeVertex(place, a, b, c)


def _canonical_from_matrix(
    place: Place,
    entries: tuple[
        tuple[RationalFunction, RationalFunction], tuple[RationalFunction, RationalFunction]
    ],
) -> LatticeVertex:
    """Column-reduce a nonsingular matrix (uniformizer variable) to canonical form."""
    (A, B), (C, D) = entries
    vA = A.valuation(Place.ZERO)
    vB = B.valuation(Place.ZERO)
    swap = not isinstance(vA, int) or (isinstance(vB, int) and vB < vA)
    if swap:
        A, B = B, A
        C, D = D, C
        vA = vB
    if not isinstance(vA, int):
        raise ValueError("degenerate input: zero top row")
    a = vA
    t = B / A
    D = D - t * C
    field = A.field
    x_a = RationalFunction.from_laurent(LaurentPolynomial.x_power(field, a))
    C = C * (x_a / A)
    vD = D.valuation(Place.ZERO)
    if not isinstance(vD, int):
        raise ValueError("degenerate input: matrix not invertible over the field")
    b = vD
    m = min(a, b)
    a -= m
    b -= m
    c_rat = C * RationalFunction.from_laurent(LaurentPolynomial.x_power(field, -m))
    c = c_rat.series_prefix(b)
    return LatticeVertex(place, a, b, c)


def canonical_vertex(g: SL2Element, place: Place) -> LatticeVertex:
    """Canonical form of the lattice spanned by the columns of g at the place."""
    rows = (
        (
            RationalFunction.from_laurent(_to_uniformizer(g.a, place)),
            RationalFunction.from_laurent(_to_uniformizer(g.b, place)),
        ),
        (
            RationalFunction.from_laurent(_to_uniformizer(g.c, place)),
            RationalFunction.from_laurent(_to_uniformizer(g.d, place)),
        ),
    )
    return _canonical_from_matrix(place, rows)


def base_vertex(field: Fq, place: Place) -> LatticeVertex:
    return LatticeVertex(place, 0, 0, LaurentPolynomial.zero(field))


def vertex_neighbors(v: LatticeVertex) -> list[LatticeVertex]:
    """The q+1 classes of index-q sublattices: one per residue line.

    q of them come from lines through shifted first basis vectors, the last
    from scaling the first basis vector by the uniformizer.
    """
    field = v.field
    q = field.q
    a, b, c = v.diag_low, v.diag_high, v.off_diag
    out = []
    for t in range(q):
        shift_c = c + LaurentPolynomial.x_power(field, b, t) if t else c
        out.append(_canonical_from_triangular(v.place, a, b + 1, shift_c))
    out.append(_canonical_from_triangular(v.place, a + 1, b, c.shift(1)))
    return out


def translate_vertex(g: SL2Element, v: LatticeVertex) -> LatticeVertex:
    """Canonical form of g . v (matrix times basis, then reduction)."""
    if v.place is Place.ZERO:
        ga, gb, gc, gd = g.a, g.b, g.c, g.d
    else:
        ga, gb, gc, gd = (
            g.a.substitute_inverse(),
            g.b.substitute_inverse(),
            g.c.substitute_inverse(),
            g.d.substitute_inverse(),
        )
    (b1x, b1y), (b2x, b2y) = v.basis_columns()
    rows = (
        (
            RationalFunction.from_laurent(ga * b1x + gb * b1y),
            RationalFunction.from_laurent(ga * b2x + gb * b2y),
        ),
        (
            RationalFunction.from_laurent(gc * b1x + gd * b1y),
            RationalFunction.from_laurent(gc * b2x + gd * b2y),
        ),
    )
    return _canonical_from_matrix(v.place, rows)


class TreeRegistry:
    """Breadth-first bijection between canonical lattice forms and label paths.

    Built once to a fixed radius around the standard lattice and frozen;
    lookups after that are safe under concurrent readers.  Child labels are
    assigned in sorted canonical-key order, so the registry is reproducible
    byte for byte.
    """

    def __init__(self, q: int, place: Place, radius: int):
        if radius < 0:
            raise ValueError("negative registry radius")
        self.q = q
        self.place = place
        self.radius = radius
        self.degree = q + 1
        self.field = Fq(q)
        self._by_key: dict[tuple, TreeVertex] = {}
        self._by_path: dict[tuple[int, ...], LatticeVertex] = {}
        self._build()

    def _build(self) -> None:
        root_form = base_vertex(self.field, self.place)
        root = TreeVertex.root(self.degree)
        self._by_key[root_form.key()] = root
        self._by_path[()] = root_form
        frontier = [(root, root_form)]
        for _ in range(self.radius):
            nxt = []
            for vertex, form in frontier:
                fresh = []
                for nb in vertex_neighbors(form):
                    if nb.key() not in self._by_key:
                        fresh.append(nb)
                fresh.sort(key=lambda f: f.key())
                expected = self.degree if vertex.is_root() else self.degree - 1
                if len(fresh) != expected:
                    raise RuntimeError(
                        f"registry build inconsistency at {vertex!r}: "
                        f"{len(fresh)} fresh neighbors, expected {expected}"
                    )
                for label, nb in enumerate(fresh):
                    child = vertex.child(label)
                    self._by_key[nb.key()] = child
                    self._by_path[child.path] = nb
                    nxt.append((child, nb))
            frontier = nxt

    def locate_form(self, form: LatticeVertex) -> TreeVertex:
        try:
            return self._by_key[form.key()]
        except KeyError:
            raise ValueError(
                f"lattice vertex outside registry radius {self.radius}: {form.to_text()}"
            ) from None

    def form_at(self, vertex: TreeVertex) -> LatticeVertex:
        try:
            return self._by_path[vertex.path]
        except KeyError:
            raise ValueError(
                f"path {vertex.to_text()!r} outside registry radius {self.radius}"
            ) from None

    def __len__(self) -> int:
        return len(self._by_key)

    # serialization ------------------------------------------------------------

    def to_json(self) -> str:
        body = {
            "q": self.q,
            "place": self.place.value,
            "radius": self.radius,
            "vertices": {
                form.to_text(): vertex.to_text()
                for form, vertex in (
                    (self._by_path[path], TreeVertex(self.degree, path))
                    for path in sorted(self._by_path)
                )
            },
        }
        return json.dumps(body, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TreeRegistry":
        body = json.loads(text)
        registry = cls.__new__(cls)
        registry.q = body["q"]
        registry.place = Place(body["place"])
        registry.radius = body["radius"]
        registry.degree = registry.q + 1
        registry.field = Fq(registry.q)
        registry._by_key = {}
        registry._by_path = {}
        for form_text, path_text in body["vertices"].items():
            form = LatticeVertex.from_text(registry.field, registry.place, form_text)
            vertex = TreeVertex.from_text(registry.degree, path_text)
            registry._by_key[form.key()] = vertex
            registry._by_path[vertex.path] = form
        return registry


def build_registry(q: int, place: Place, radius: int) -> TreeRegistry:
    return TreeRegistry(q, place, radius)


def locate(g: SL2Element, place: Place, registry: TreeRegistry) -> TreeVertex:
    """Tree coordinates of the vertex g moves the base point to."""
    if registry.place is not place:
        raise ValueError(f"registry is for place {registry.place}, not {place}")
    return registry.locate_form(canonical_vertex(g, place))
