"""Canonical polyhedral complex of a ReLU network restricted to a box.

The complex is built neuron by neuron in (layer, index) order.  For every
full-dimensional region of the current partition the neuron's pre-activation
restricts to an affine functional; if that functional changes sign on the
region, the region is split along the pullback hyperplane.  Constant
functionals record their sign and never split.  After all hidden neurons the
partition is exactly the set of linear pieces of the network (up to merges of
adjacent pieces with equal affine maps), and a final refinement by the output
zero-set yields a signed complex whose negative/zero part is the decision
region F⁻¹((−∞,0]) ∩ box.

Everything is exact: hyperplanes are primitive-integer, vertices are rational,
and cells are deduplicated by canonical keys, so the construction is
deterministic.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .exactgeom import (
    BoxDomain,
    Hyperplane,
    affine_rank,
    centroid,
    sign,
    solve_vertex,
    vdot,
)
from .relunet import NeuronId, ReluNetwork

DEFAULT_MAX_CELLS = 2_000_000


class ComplexSizeError(RuntimeError):
    """Raised when the arrangement exceeds the configured cell cap."""


def _max_cells() -> int:
    raw = os.environ.get("TOPOBETTI_MAX_CELLS")
    if raw is None:
        return DEFAULT_MAX_CELLS
    try:
        val = int(raw)
    except ValueError as e:
        raise ValueError(f"TOPOBETTI_MAX_CELLS must be an integer, got {raw!r}") from e
    if val <= 0:
        raise ValueError("TOPOBETTI_MAX_CELLS must be positive")
    return val


@dataclass(frozen=True)
class Cell:
    """A closed polyhedron of the complex, identified by its vertex set.

    active_constraints lists (constraint-id, sign) pairs over the complex's
    hyperplane table; sign 0 marks constraints the cell satisfies with
    equality.  affine_map = (matrix, bias) is the network's affine restriction
    on the cell (scalar output: a 1×d matrix).
    """

    id: int
    dim: int
    vertices: tuple
    active_constraints: tuple
    affine_map: tuple
    sign_label: str = "unsigned"

    def evaluate(self, x: Sequence):
        rows, consts = self.affine_map
        return tuple(vdot(r, x) + c for r, c in zip(rows, consts))


@dataclass(frozen=True)
class PolyhedralComplex:
    """Full face lattice of the arrangement within the box."""

    cells: dict
    faces: frozenset  # (face_id, coface_id) pairs with dim difference 1
    ambient_dim: int
    box: BoxDomain
    constraints: tuple  # hyperplane table referenced by active_constraints

    def cells_of_dim(self, k: int):
        return [c for c in self.cells.values() if c.dim == k]

    def full_cells(self):
        return self.cells_of_dim(self.ambient_dim)

    def face_map(self):
        """coface id -> list of face ids (one dimension down)."""
        out = {cid: [] for cid in self.cells}
        for f, c in self.faces:
            out[c].append(f)
        return out

    def coface_map(self):
        out = {cid: [] for cid in self.cells}
        for f, c in self.faces:
            out[f].append(c)
        return out

    def euler_cells(self) -> int:
        return sum((-1) ** c.dim for c in self.cells.values())

    def restrict(self, ids) -> "PolyhedralComplex":
        ids = set(ids)
        cells = {cid: c for cid, c in self.cells.items() if cid in ids}
        faces = frozenset((f, c) for f, c in self.faces if f in ids and c in ids)
        return replace(self, cells=cells, faces=faces)


class SignedComplex(PolyhedralComplex):
    """A complex whose every cell is labeled negative / zero / positive."""


class _Registry:
    def __init__(self):
        self.hyperplanes = []
        self._index = {}

    def intern(self, h: Hyperplane) -> int:
        key = (h.normal, h.offset)
        hid = self._index.get(key)
        if hid is None:
            hid = len(self.hyperplanes)
            self.hyperplanes.append(h)
            self._index[key] = hid
        return hid

    def hp(self, hid: int) -> Hyperplane:
        return self.hyperplanes[hid]


class _Region:
    __slots__ = ("rid", "constraints", "vertices", "affine", "out_affine")

    def __init__(self, rid, constraints, vertices, affine, out_affine=None):
        self.rid = rid
        self.constraints = constraints  # {hid: sign}, region ⊆ {sign·h ≥ 0}
        self.vertices = vertices  # set of rational points
        self.affine = affine  # (rows, consts): input -> current layer output
        self.out_affine = out_affine  # (grad, const) once the output is reached


Observer = Callable[[str, NeuronId, int], None]


def _restrict_functional(affine, wrow, b):
    rows, consts = affine
    d = len(rows[0]) if rows else 0
    grad = tuple(sum(w * rows[j][t] for j, w in enumerate(wrow) if w) for t in range(d))
    const = sum(w * consts[j] for j, w in enumerate(wrow) if w) + b
    return grad, const


def _prune_constraints(region: _Region, registry: _Registry, d: int):
    keep = {}
    for hid, s in region.constraints.items():
        h = registry.hp(hid)
        tight = [v for v in region.vertices if h.eval_at(v) == 0]
        if len(tight) >= d and affine_rank(tight) == d - 1:
            keep[hid] = s
    region.constraints = keep


class _Builder:
    def __init__(self, net: ReluNetwork, box: BoxDomain, observer: Optional[Observer] = None):
        if net.input_dim != box.dimension:
            raise ValueError("box dimension does not match network input")
        self.net = net
        self.box = box
        self.d = box.dimension
        self.registry = _Registry()
        self.observer = observer
        self.cap = _max_cells()
        self._next_rid = 0
        base = self._new_region(
            {},
            set(box.corners()),
            (
                tuple(
                    tuple(Fraction(1 if i == j else 0) for j in range(self.d))
                    for i in range(self.d)
                ),
                (Fraction(0),) * self.d,
            ),
        )
        for h, s in box.facet_halfspaces():
            base.constraints[self.registry.intern(h)] = s
        self.regions = [base]

    def _new_region(self, constraints, vertices, affine, out_affine=None) -> _Region:
        r = _Region(self._next_rid, constraints, vertices, affine, out_affine)
        self._next_rid += 1
        return r

    def _record(self, reason: str, neuron: NeuronId, rid: int):
        if self.observer is not None:
            self.observer(reason, neuron, rid)

    def run_hidden(self):
        for ell, layer in enumerate(self.net.layers[:-1], start=1):
            for i, (wrow, b) in enumerate(zip(layer.weights, layer.bias), start=1):
                self._split_all(NeuronId(ell, i), wrow, b, output=False)
            self._apply_relu(layer)

    def run_output(self):
        if self.net.output_dim != 1:
            raise ValueError("output refinement requires a scalar-output network")
        layer = self.net.layers[-1]
        nid = NeuronId(len(self.net.layers), 1)
        self._split_all(nid, layer.weights[0], layer.bias[0], output=True)
        self.attach_output_affine()

    def attach_output_affine(self):
        layer = self.net.layers[-1]
        for r in self.regions:
            pairs = [
                _restrict_functional(r.affine, wrow, b)
                for wrow, b in zip(layer.weights, layer.bias)
            ]
            r.out_affine = (
                tuple(g for g, _ in pairs),
                tuple(c for _, c in pairs),
            )

    def _split_all(self, nid: NeuronId, wrow, b, output: bool):
        new_regions = []
        for r in self.regions:
            new_regions.extend(self._split(r, nid, wrow, b, output))
            if len(new_regions) > self.cap:
                raise ComplexSizeError(
                    f"arrangement exceeded TOPOBETTI_MAX_CELLS={self.cap}"
                )
        self.regions = new_regions

    def _split(self, r: _Region, nid: NeuronId, wrow, b, output: bool):
        grad, const = _restrict_functional(r.affine, wrow, b)
        if not any(grad):
            if const == 0:
                self._record("degenerate-pullback", nid, r.rid)
            return [r]
        h, orient = Hyperplane.from_coefficients(grad, const)
        hid = self.registry.intern(h)
        vals = [(v, vdot(grad, v) + const) for v in r.vertices]
        zeros = [v for v, t in vals if t == 0]
        has_pos = any(t > 0 for _, t in vals)
        has_neg = any(t < 0 for _, t in vals)
        if output and zeros:
            # the output zero-set through a vertex of the canonical complex is
            # a topological-stability violation whether or not it splits
            self._record("vertex-on-hyperplane", nid, r.rid)
        if not (has_pos and has_neg):
            return [r]
        if zeros and not output:
            self._record("vertex-on-hyperplane", nid, r.rid)
        facet = set(zeros)
        d = self.d
        hps = self.registry.hp
        keys = sorted(r.constraints)
        for combo in itertools.combinations(keys, d - 1):
            p = solve_vertex([hps(k) for k in combo] + [h], d)
            if p is None or p in facet:
                continue
            if all(hps(k).eval_at(p) * s >= 0 for k, s in r.constraints.items()):
                facet.add(p)
        pos_side = self._new_region(
            dict(r.constraints),
            {v for v, t in vals if t > 0} | facet,
            r.affine,
            r.out_affine,
        )
        pos_side.constraints[hid] = orient
        neg_side = self._new_region(
            dict(r.constraints),
            {v for v, t in vals if t < 0} | facet,
            r.affine,
            r.out_affine,
        )
        neg_side.constraints[hid] = -orient
        for child in (pos_side, neg_side):
            _prune_constraints(child, self.registry, d)
        return [pos_side, neg_side]

    def _apply_relu(self, layer):
        for r in self.regions:
            cen = centroid(r.vertices)
            rows, consts = [], []
            for wrow, b in zip(layer.weights, layer.bias):
                grad, const = _restrict_functional(r.affine, wrow, b)
                if vdot(grad, cen) + const > 0:
                    rows.append(grad)
                    consts.append(const)
                else:
                    rows.append((Fraction(0),) * self.d)
                    consts.append(Fraction(0))
            r.affine = (tuple(rows), tuple(consts))


def _label(value) -> str:
    s = sign(value)
    return "negative" if s < 0 else ("positive" if s > 0 else "zero")


def _assemble(regions, box: BoxDomain, registry: _Registry, signed: bool) -> PolyhedralComplex:
    d = box.dimension
    cap = _max_cells()
    info = {}  # frozenset(vertices) -> (dim, owner region)
    incid = set()  # (face key, coface key)

    def descend(key, verts, dim, owner):
        if dim == 0:
            return
        for hid in owner.constraints:
            h = registry.hp(hid)
            tight = tuple(v for v in verts if h.eval_at(v) == 0)
            if not tight or len(tight) > len(verts) - 1:
                continue
            if affine_rank(tight) != dim - 1:
                continue
            subkey = frozenset(tight)
            incid.add((subkey, key))
            if subkey not in info:
                info[subkey] = (dim - 1, owner)
                if len(info) > cap:
                    raise ComplexSizeError(
                        f"arrangement exceeded TOPOBETTI_MAX_CELLS={cap}"
                    )
                descend(subkey, tight, dim - 1, owner)

    for r in regions:
        key = frozenset(r.vertices)
        if key not in info:
            info[key] = (d, r)
            descend(key, tuple(r.vertices), d, r)

    ordered = sorted(info.items(), key=lambda kv: (kv[1][0], sorted(kv[0])))
    ids = {key: i for i, (key, _) in enumerate(ordered)}
    cells = {}
    for key, (dim, owner) in ordered:
        cid = ids[key]
        verts = tuple(sorted(key))
        affine_map = owner.out_affine
        if signed:
            rows, consts = affine_map
            cen = centroid(verts)
            label = _label(vdot(rows[0], cen) + consts[0])
        else:
            label = "unsigned"
        constraints = []
        for hid, s in sorted(owner.constraints.items()):
            h = registry.hp(hid)
            tight = all(h.eval_at(v) == 0 for v in verts)
            constraints.append((hid, 0 if tight else s))
        cells[cid] = Cell(
            id=cid,
            dim=dim,
            vertices=verts,
            active_constraints=tuple(constraints),
            affine_map=affine_map,
            sign_label=label,
        )
    faces = frozenset((ids[f], ids[c]) for f, c in incid)
    cls = SignedComplex if signed else PolyhedralComplex
    return cls(
        cells=cells,
        faces=faces,
        ambient_dim=d,
        box=box,
        constraints=tuple(registry.hyperplanes),
    )


def canonical_complex(
    net: ReluNetwork, box: BoxDomain, observer: Optional[Observer] = None
) -> PolyhedralComplex:
    """Face lattice of the network's linear pieces within the box.

    Cells carry the network's affine restriction but no sign labels; use
    refine_by_output to split along the output zero-set and label cells.
    """
    b = _Builder(net, box, observer)
    b.run_hidden()
    b.attach_output_affine()
    return _assemble(b.regions, box, b.registry, signed=False)


def refine_by_output(complex: PolyhedralComplex, net: ReluNetwork) -> SignedComplex:
    """Split full cells by the output zero-set and label every cell by sign."""
    b = _Builder(net, box=complex.box)
    b.run_hidden()
    b.run_output()
    return _assemble(b.regions, complex.box, b.registry, signed=True)


def signed_complex(
    net: ReluNetwork, box: BoxDomain, observer: Optional[Observer] = None
) -> SignedComplex:
    """One-pass construction of the output-refined, sign-labeled complex."""
    b = _Builder(net, box, observer)
    b.run_hidden()
    b.run_output()
    return _assemble(b.regions, box, b.registry, signed=True)


def sublevel_subcomplex(sc: SignedComplex) -> PolyhedralComplex:
    """Subcomplex of cells labeled negative or zero; support is F⁻¹((−∞,0]) ∩ box."""
    ids = {cid for cid, c in sc.cells.items() if c.sign_label in ("negative", "zero")}
    for cid in ids:
        if sc.cells[cid].sign_label == "unsigned":
            raise ValueError("sublevel_subcomplex requires a signed complex")
    return sc.restrict(ids)


def linear_region_count(complex: PolyhedralComplex) -> int:
    """Number of maximal linear pieces within the box.

    Adjacent full-dimensional cells with identical affine restrictions are
    merged before counting.
    """
    full = complex.full_cells()
    if not full:
        return 0
    parent = {c.id: c.id for c in full}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    affines = {c.id: c.affine_map for c in full}
    cofaces = {}
    for f, c in complex.faces:
        if complex.cells[c].dim == complex.ambient_dim and complex.cells[f].dim == complex.ambient_dim - 1:
            cofaces.setdefault(f, []).append(c)
    for group in cofaces.values():
        for a, b in itertools.combinations(group, 2):
            if affines[a] == affines[b]:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[ra] = rb
    return len({find(c.id) for c in full})


def _det(rows):
    rows = [list(r) for r in rows]
    n = len(rows)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            rows[col], rows[piv] = rows[piv], rows[col]
            det = -det
        det *= rows[col][col]
        inv = 1 / rows[col][col]
        for r in range(col + 1, n):
            if rows[r][col] != 0:
                f = rows[r][col] * inv
                rows[r] = [v - f * w for v, w in zip(rows[r], rows[col])]
    return det


def cell_volume(complex: PolyhedralComplex, cell_id: int):
    """Exact volume of a full-dimensional cell via barycentric triangulation.

    Sums |det| / d! over all maximal flags of the cell's face lattice, each
    flag contributing the simplex of barycenters of its faces.
    """
    cell = complex.cells[cell_id]
    d = complex.ambient_dim
    if cell.dim != d:
        raise ValueError("volume is defined for full-dimensional cells")
    fmap = complex.face_map()
    total = Fraction(0)

    def flags(cid):
        c = complex.cells[cid]
        if c.dim == 0:
            yield [c]
            return
        for f in fmap[cid]:
            for rest in flags(f):
                yield rest + [c]

    fact = 1
    for i in range(1, d + 1):
        fact *= i
    for flag in flags(cell_id):
        bary = [centroid(c.vertices) for c in flag]
        rows = [[b[i] - bary[0][i] for i in range(d)] for b in bary[1:]]
        total += abs(_det(rows))
    return total / fact


def validate_complex(complex: PolyhedralComplex):
    """Check complex invariants; returns a list of violation strings."""
    out = []
    cells = complex.cells
    for f, c in complex.faces:
        if f not in cells or c not in cells:
            out.append(f"incidence: unknown cell in pair ({f},{c})")
            continue
        if cells[c].dim - cells[f].dim != 1:
            out.append(f"incidence: dim mismatch in pair ({f},{c})")
        if not set(cells[f].vertices) < set(cells[c].vertices):
            out.append(f"incidence: vertices of {f} not contained in {c}")
    fmap = complex.face_map()
    for cid, c in cells.items():
        if affine_rank(c.vertices) != c.dim:
            out.append(f"dimension: cell {cid} has affine rank != dim")
        if c.dim >= 1 and len(fmap[cid]) < c.dim + 1:
            out.append(f"face-closure: cell {cid} is missing facets")
        for hid, s in c.active_constraints:
            h = complex.constraints[hid]
            for v in c.vertices:
                val = h.eval_at(v)
                if s == 0 and val != 0:
                    out.append(f"constraint: cell {cid} not tight on constraint {hid}")
                    break
                if s != 0 and val * s < 0:
                    out.append(f"constraint: cell {cid} violates constraint {hid}")
                    break
    full = complex.full_cells()
    if full:
        try:
            vol = sum(cell_volume(complex, c.id) for c in full)
        except (KeyError, ValueError):
            vol = None
        if vol is not None:
            box_vol = complex.box.volume()
            if vol > box_vol:
                out.append("interior-overlap: full cells exceed box volume")
            elif vol < box_vol:
                out.append("coverage-gap: full cells do not cover the box")
    return out
