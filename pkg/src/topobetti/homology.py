"""Exact rational homology of polyhedral complexes.

The support of a complex is triangulated by its order complex (barycentric
subdivision): simplices are strictly increasing chains in the face poset.
Chains inherit a canonical vertex order from cell dimensions, so boundary
matrices carry standard alternating signs without ever orienting polytopes.

Betti numbers are β_k = #k-simplices − rank ∂_k − rank ∂_{k+1} over ℚ.  Before
computing ranks the simplicial complex is reduced by elementary free-pair
collapses (a simplex with exactly one coface is removed together with it),
which preserves the homotopy type and typically shrinks the matrices by
orders of magnitude; ranks are then exact fraction-free eliminations.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional, Sequence

from .arrangement import (
    PolyhedralComplex,
    canonical_complex,
    linear_region_count,
    refine_by_output,
    signed_complex,
    sublevel_subcomplex,
)
from .constructions import (
    BettiVector,
    betti_upper_bound,
    euler_characteristic,
    serra_region_bound,
)
from .exactgeom import BoxDomain, matrix_rank
from .relunet import ReluNetwork, network_fingerprint
from .report import AnalysisReport


@dataclass(frozen=True)
class SimplicialComplex:
    """Simplices grouped by dimension; each simplex is an increasing cell-id chain."""

    simplices: tuple  # simplices[k] = sorted tuple of k-simplices (tuples of cell ids)

    def count(self, k: int) -> int:
        return len(self.simplices[k]) if k < len(self.simplices) else 0

    @property
    def dim(self) -> int:
        return len(self.simplices) - 1

    def euler(self) -> int:
        return sum((-1) ** k * len(s) for k, s in enumerate(self.simplices))


@dataclass(frozen=True)
class ChainBoundary:
    """Integer boundary matrices; matrices[k] maps k-chains to (k−1)-chains."""

    matrices: tuple  # matrices[k] = list of rows, entries in {−1,0,+1}


def _poset_successors(pc: PolyhedralComplex):
    """Full strict order relation of the face poset, as successor sets.

    The poset is graded by cell dimension and the incidence pairs are its
    covering relation, so the full order is the transitive closure.
    """
    covers = {cid: [] for cid in pc.cells}
    for f, c in pc.faces:
        covers[f].append(c)
    order = sorted(pc.cells, key=lambda cid: -pc.cells[cid].dim)
    succ = {}
    for cid in order:
        s = set()
        for c in covers[cid]:
            s.add(c)
            s |= succ[c]
        succ[cid] = s
    return succ


def order_complex(pc: PolyhedralComplex) -> SimplicialComplex:
    """Barycentric subdivision: all strictly increasing chains in the face poset."""
    succ = _poset_successors(pc)
    by_dim = {}
    start = sorted(pc.cells)

    def extend(chain, last):
        by_dim.setdefault(len(chain) - 1, []).append(tuple(chain))
        for nxt in sorted(succ[last]):
            chain.append(nxt)
            extend(chain, nxt)
            chain.pop()

    for cid in start:
        extend([cid], cid)
    top = max(by_dim) if by_dim else -1
    return SimplicialComplex(
        tuple(tuple(sorted(by_dim.get(k, []))) for k in range(top + 1))
    )


def boundary_matrices(sc: SimplicialComplex) -> ChainBoundary:
    mats = [[]]
    for k in range(1, sc.dim + 1):
        index = {s: i for i, s in enumerate(sc.simplices[k - 1])}
        rows = []
        for simplex in sc.simplices[k]:
            row = [0] * len(index)
            for i in range(len(simplex)):
                face = simplex[:i] + simplex[i + 1 :]
                row[index[face]] = (-1) ** i
            rows.append(row)
        mats.append(rows)  # stored transposed: row per k-simplex
    return ChainBoundary(tuple(mats))


def _collapse(simplices):
    """Remove free pairs (σ with a unique coface τ) until none remain.

    Operates on a dict k -> set of simplices; preserves homotopy type.
    """
    cofacets = {}
    for k in sorted(simplices):
        if k == 0:
            continue
        for tau in simplices[k]:
            for i in range(len(tau)):
                sigma = tau[:i] + tau[i + 1 :]
                cofacets.setdefault(sigma, set()).add(tau)
    queue = [s for s, cf in cofacets.items() if len(cf) == 1]
    alive = {s for k in simplices for s in simplices[k]}
    while queue:
        sigma = queue.pop()
        if sigma not in alive:
            continue
        cf = cofacets.get(sigma)
        if cf is None or len(cf) != 1:
            continue
        (tau,) = cf
        if tau not in alive:
            continue
        alive.discard(sigma)
        alive.discard(tau)
        for gone in (sigma, tau):
            for i in range(len(gone)):
                face = gone[:i] + gone[i + 1 :]
                if not face:
                    continue
                s = cofacets.get(face)
                if s is not None:
                    s.discard(gone)
                    if len(s) == 1:
                        queue.append(face)
    out = {}
    for s in alive:
        out.setdefault(len(s) - 1, []).append(s)
    return out


def _sparse_rank(rows) -> int:
    """Exact rank of a sparse integer matrix (rows are dicts col -> value).

    Elimination is fraction-free: each update is (row·p − v·pivot_row) divided
    by its content.  Pivots prefer sparse rows with unit entries, which keeps
    boundary-matrix eliminations essentially free of coefficient growth.
    """
    import math

    rows = [dict(r) for r in rows if r]
    rank = 0
    while rows:
        pi = min(range(len(rows)), key=lambda i: len(rows[i]))
        piv = rows.pop(pi)
        pc = min(piv, key=lambda c: (abs(piv[c]) != 1, abs(piv[c])))
        pval = piv[pc]
        rank += 1
        nxt = []
        for r in rows:
            v = r.pop(pc, None)
            if v:
                merged = {c: x * pval for c, x in r.items()}
                for c, x in piv.items():
                    if c == pc:
                        continue
                    y = merged.get(c, 0) - v * x
                    if y:
                        merged[c] = y
                    else:
                        merged.pop(c, None)
                if merged:
                    g = 0
                    for x in merged.values():
                        g = math.gcd(g, abs(x))
                    if g > 1:
                        merged = {c: x // g for c, x in merged.items()}
                    nxt.append(merged)
            elif r:
                nxt.append(r)
        rows = nxt
    return rank


def _component_betti(simplices, max_k: int):
    """Betti numbers of one simplicial complex given as dict k -> list of chains."""
    reduced = _collapse(simplices)
    top = max(reduced) if reduced else -1
    counts = [len(reduced.get(k, [])) for k in range(top + 1)]
    ranks = [0] * (max(top, max_k) + 2)
    for k in range(1, top + 1):
        index = {s: i for i, s in enumerate(reduced.get(k - 1, []))}
        rows = []
        for simplex in reduced.get(k, []):
            row = {}
            for i in range(len(simplex)):
                face = simplex[:i] + simplex[i + 1 :]
                row[index[face]] = (-1) ** i
            rows.append(row)
        ranks[k] = _sparse_rank(rows)
    betas = []
    for k in range(max_k + 1):
        n = counts[k] if k <= top else 0
        betas.append(n - ranks[k] - ranks[k + 1])
    return betas


def connected_components(pc: PolyhedralComplex) -> int:
    """Number of connected components of the support (union-find on incidence)."""
    return len(_component_cells(pc))


def _component_cells(pc: PolyhedralComplex):
    parent = {cid: cid for cid in pc.cells}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for f, c in pc.faces:
        rf, rc = find(f), find(c)
        if rf != rc:
            parent[rf] = rc
    groups = {}
    for cid in pc.cells:
        groups.setdefault(find(cid), []).append(cid)
    return list(groups.values())


def betti_numbers(pc: PolyhedralComplex, max_k: Optional[int] = None) -> BettiVector:
    """Exact rational Betti numbers of the complex's support.

    Computed per connected component (order complex, collapse, boundary ranks)
    and summed.  max_k defaults to ambient dimension − 1.
    """
    if max_k is None:
        max_k = pc.ambient_dim - 1
    totals = [0] * (max_k + 1)
    for comp in _component_cells(pc):
        sub = pc.restrict(comp)
        chains = order_complex(sub)
        simplices = {k: list(s) for k, s in enumerate(chains.simplices) if s}
        for k, b in enumerate(_component_betti(simplices, max_k)):
            totals[k] += b
    return BettiVector(tuple(totals))


def analyze_network(
    net: ReluNetwork,
    box: Optional[BoxDomain] = None,
    predicted: Optional[BettiVector] = None,
    oracle_beta0: Optional[int] = None,
) -> AnalysisReport:
    """End-to-end exact Betti computation of F⁻¹((−∞,0]) ∩ box.

    Runs the arrangement pipeline (canonical complex → output refinement →
    sublevel subcomplex → homology) and packages region counts and upper
    bounds; optional closed-form predictions and an oracle β₀ are recorded for
    reconciliation.
    """
    if net.output_dim != 1:
        raise ValueError("analysis requires a scalar-output network")
    if box is None:
        box = BoxDomain.unit_cube(net.input_dim)
    d = box.dimension
    timings = {}
    t0 = time.perf_counter()
    sc = signed_complex(net, box)
    timings["arrangement"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    sub = sublevel_subcomplex(sc)
    betti = betti_numbers(sub, d - 1)
    timings["homology"] = time.perf_counter() - t0
    regions = linear_region_count(sc)
    serra = serra_region_bound(net.architecture)
    binom = [betti_upper_bound(net.architecture, k, 0) for k in range(d)]
    complement_cells = [
        sum(
            1
            for c in sc.cells.values()
            if c.dim == k + 1 and c.sign_label == "positive"
        )
        for k in range(d)
    ]
    return AnalysisReport(
        architecture=net.architecture,
        fingerprint=network_fingerprint(net),
        box=box,
        betti=betti,
        region_count=regions,
        serra_bound=serra,
        binomial_bounds=tuple(binom),
        complement_cell_bounds=tuple(complement_cells),
        predicted=predicted,
        euler=euler_characteristic(betti),
        euler_cells=sub.euler_cells(),
        oracle_beta0=oracle_beta0,
        timings=timings,
    )
