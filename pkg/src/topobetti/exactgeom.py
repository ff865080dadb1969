"""Exact rational geometry primitives.

All core arithmetic is over the rationals: scalars are Python ints or
fractions.Fraction, vectors are tuples of scalars, matrices are tuples of row
tuples.  Hyperplanes are normalized to primitive integer coefficients so that
geometrically equal hyperplanes compare equal structurally, which the
arrangement module relies on for deduplication.

Floating point never appears here.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

Scalar = Fraction
Vector = tuple
Matrix = tuple

_RATIONAL_RE = re.compile(r"^(-?(?:0|[1-9][0-9]*))(?:/([1-9][0-9]*))?$")


def parse_rational(s: str) -> Fraction:
    """Parse the canonical serialization "p/q" (q>1, gcd=1) or "p".

    Rejects anything non-canonical: "2/4", "1/1", "+3", "-0", "1/-2", "1.5".
    """
    m = _RATIONAL_RE.match(s)
    if m is None:
        raise ValueError(f"non-canonical rational string: {s!r}")
    p = int(m.group(1))
    if m.group(1) == "-0":
        raise ValueError(f"non-canonical rational string: {s!r}")
    if m.group(2) is None:
        return Fraction(p)
    q = int(m.group(2))
    if q == 1 or math.gcd(abs(p), q) != 1:
        raise ValueError(f"non-canonical rational string: {s!r}")
    return Fraction(p, q)


def format_rational(x) -> str:
    """Serialize a rational as "p/q" with q>0 in lowest terms, or "p" if integral."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def vdot(a: Sequence, b: Sequence):
    if len(a) != len(b):
        raise ValueError("dimension mismatch in dot product")
    return sum(x * y for x, y in zip(a, b))


def sign(x) -> int:
    return (x > 0) - (x < 0)


def centroid(points: Iterable[Sequence]) -> tuple:
    pts = list(points)
    if not pts:
        raise ValueError("centroid of empty point set")
    n = Fraction(len(pts))
    return tuple(sum(p[i] for p in pts) / n for i in range(len(pts[0])))


def _clear_row(row: Sequence) -> list:
    """Scale a rational row to integers (multiply by the lcm of denominators)."""
    den = 1
    for x in row:
        if isinstance(x, Fraction):
            den = den * x.denominator // math.gcd(den, x.denominator)
    return [int(x * den) for x in row]


@dataclass(frozen=True)
class Hyperplane:
    """The set {x : normal·x + offset = 0}, stored in primitive integer form.

    The constructor expects already-normalized data; use from_coefficients to
    build one from arbitrary rational coefficients.
    """

    normal: tuple
    offset: int

    def __post_init__(self):
        if not any(self.normal):
            raise ValueError("hyperplane with zero normal is invalid")

    @staticmethod
    def from_coefficients(normal: Sequence, offset) -> tuple:
        """Normalize (normal, offset) up to positive scaling.

        Returns (hyperplane, orientation) where orientation ∈ {+1,−1} satisfies
        sign(normal·x + offset) == orientation · sign(h.normal·x + h.offset).
        """
        if not any(normal):
            raise ValueError("hyperplane with zero normal is invalid")
        ints = _clear_row(list(normal) + [Fraction(offset)])
        g = 0
        for v in ints:
            g = math.gcd(g, abs(v))
        ints = [v // g for v in ints]
        orientation = 1
        lead = next(v for v in ints[:-1] if v != 0)
        if lead < 0:
            ints = [-v for v in ints]
            orientation = -1
        return Hyperplane(tuple(ints[:-1]), ints[-1]), orientation

    def eval_at(self, x: Sequence):
        return vdot(self.normal, x) + self.offset


def evaluate_sign(h: Hyperplane, x: Sequence) -> int:
    """Exact sign of normal·x + offset in {−1, 0, +1}."""
    return sign(h.eval_at(x))


@dataclass(frozen=True)
class BoxDomain:
    """An axis-aligned box, the compact domain all analysis is restricted to."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        if len(self.lower) != len(self.upper):
            raise ValueError("box bounds have mismatched dimensions")
        if not all(lo < up for lo, up in zip(self.lower, self.upper)):
            raise ValueError("box requires lower[i] < upper[i] for all i")

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @staticmethod
    def unit_cube(d: int) -> "BoxDomain":
        return BoxDomain((Fraction(0),) * d, (Fraction(1),) * d)

    def corners(self):
        for choice in itertools.product(*zip(self.lower, self.upper)):
            yield tuple(choice)

    def facet_halfspaces(self):
        """Halfspaces whose intersection is the box, as (hyperplane, sign) pairs.

        The box is {x : s · h.eval_at(x) ≥ 0 for each pair (h, s)}.
        """
        d = self.dimension
        out = []
        for i in range(d):
            e = tuple(Fraction(1 if j == i else 0) for j in range(d))
            h, orient = Hyperplane.from_coefficients(e, -self.lower[i])
            out.append((h, orient))  # x_i ≥ lower
            h, orient = Hyperplane.from_coefficients(e, -self.upper[i])
            out.append((h, -orient))  # x_i ≤ upper
        return out

    def contains(self, x: Sequence) -> bool:
        return all(lo <= v <= up for lo, v, up in zip(self.lower, x, self.upper))

    def volume(self):
        vol = Fraction(1)
        for lo, up in zip(self.lower, self.upper):
            vol *= up - lo
        return vol


def solve_vertex(hyperplanes: Sequence[Hyperplane], dimension: int) -> Optional[tuple]:
    """Intersection point of `dimension` hyperplanes, or None if dependent.

    Plain Gaussian elimination over Fraction; systems here are at most 4×4.
    """
    if len(hyperplanes) != dimension:
        raise ValueError("need exactly `dimension` hyperplanes")
    for h in hyperplanes:
        if len(h.normal) != dimension:
            raise ValueError("hyperplane dimension mismatch")
    a = [[Fraction(v) for v in h.normal] + [Fraction(-h.offset)] for h in hyperplanes]
    n = dimension
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    return tuple(a[r][n] for r in range(n))


def matrix_rank(m: Sequence[Sequence]) -> int:
    """Exact rank over the rationals via fraction-free (Bareiss) elimination.

    Rows are cleared to integers first so all intermediate values stay integral.
    """
    rows = [_clear_row(r) for r in m]
    rows = [r for r in rows if any(r)]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    prev = 1
    for col in range(ncols):
        piv = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        pval = rows[rank][col]
        for r in range(rank + 1, len(rows)):
            rv = rows[r][col]
            rows[r] = [
                (pval * rows[r][j] - rv * rows[rank][j]) // prev
                for j in range(ncols)
            ]
        prev = pval
        rank += 1
        if rank == len(rows):
            break
    return rank


def affine_rank(points: Sequence[Sequence]) -> int:
    """Dimension of the affine hull of a point set (−1 for the empty set)."""
    pts = list(points)
    if not pts:
        return -1
    p0 = pts[0]
    if len(pts) == 1:
        return 0
    diffs = [[v - w for v, w in zip(p, p0)] for p in pts[1:]]
    return matrix_rank(diffs)
