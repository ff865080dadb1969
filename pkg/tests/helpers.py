"""Shared test helpers: hand-built polyhedral complexes from unit-cube unions.

These complexes are assembled directly from integer corner coordinates and
share no code with the arrangement pipeline, so homology tests run against an
independently constructed face lattice.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product

from topobetti.arrangement import Cell, PolyhedralComplex
from topobetti.exactgeom import BoxDomain


def box_complex(cubes, ambient_dim: int) -> PolyhedralComplex:
    """Face lattice of a union of axis-aligned unit cubes with integer corners.

    `cubes` is an iterable of lower-corner integer tuples; each cube is
    [a, a+1]^d.  Faces pick, per axis, the lower endpoint, the upper endpoint,
    or the whole interval; shared faces are deduplicated by vertex set.
    """
    faces = {}  # frozenset of vertices -> (dim, sorted vertex tuple)
    for base in cubes:
        if len(base) != ambient_dim:
            raise ValueError("cube corner has wrong dimension")
        for choice in product((0, 1, 2), repeat=ambient_dim):
            axes = [
                (base[i], base[i] + 1) if c == 2 else (base[i] + c,)
                for i, c in enumerate(choice)
            ]
            verts = tuple(sorted(product(*axes)))
            dim = sum(1 for c in choice if c == 2)
            faces[frozenset(verts)] = (dim, verts)

    ordered = sorted(faces.values())
    ids = {verts: i for i, (_, verts) in enumerate(ordered)}
    zero_map = ((tuple(Fraction(0) for _ in range(ambient_dim)),), (Fraction(0),))
    cells = {
        ids[verts]: Cell(
            id=ids[verts],
            dim=dim,
            vertices=tuple(tuple(Fraction(v) for v in p) for p in verts),
            active_constraints=(),
            affine_map=zero_map,
        )
        for dim, verts in ordered
    }
    incidence = set()
    for dim, verts in ordered:
        if dim == 0:
            continue
        vset = set(verts)
        for fdim, fverts in ordered:
            if fdim == dim - 1 and set(fverts) <= vset:
                incidence.add((ids[fverts], ids[verts]))
    los = [min(v[i] for vs in faces.values() for v in vs[1]) for i in range(ambient_dim)]
    his = [max(v[i] for vs in faces.values() for v in vs[1]) for i in range(ambient_dim)]
    box = BoxDomain(tuple(Fraction(l) for l in los), tuple(Fraction(h) for h in his))
    return PolyhedralComplex(
        cells=cells,
        faces=frozenset(incidence),
        ambient_dim=ambient_dim,
        box=box,
        constraints=(),
    )


def folding_closed_form(M: int, index, x):
    """Value of the M-folding map on the small cube with 1-based multi-index.

    On the cube [(i_j−1)/M, i_j/M] per coordinate, the map is M·x_j − (i_j−1)
    for odd i_j and i_j − M·x_j for even i_j (alternating mirroring).
    """
    out = []
    for i, v in zip(index, x):
        out.append(M * v - (i - 1) if i % 2 == 1 else i - M * v)
    return tuple(out)


def random_point_in_cube(M: int, index, rng):
    """A uniformly random rational point inside the given small cube."""
    res = 10**4
    return tuple(
        Fraction(i - 1, M) + Fraction(rng.randint(0, res), res) / M for i in index
    )


def ring_cubes_2d():
    """The 3×3 block of unit squares minus the center: an annulus."""
    return [(i, j) for i in range(3) for j in range(3) if (i, j) != (1, 1)]


def shell_cubes_3d():
    """The 3×3×3 block of unit cubes minus the center: a thickened sphere."""
    return [
        (i, j, k)
        for i in range(3)
        for j in range(3)
        for k in range(3)
        if (i, j, k) != (1, 1, 1)
    ]
