"""Finite truncations of graph families and their metric quantities.

A truncation is the subgraph generated by all vertices within a given
combinatorial depth of the root/origin.  Cut vertices (smaller degree in
the truncation than the family prescribes) are marked as boundary.
Edges are oriented from lower to higher generation; second order
quantities never depend on the orientation and a test pins that down.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DepthTooLarge, UnknownVertex, UnsupportedFamily
from .graphspec import (ChainWithAttachments, ExtendedCount, FiniteGraph,
                        FullLinePath, GraphFamilySpec, HalfLinePath,
                        RadialTree, SphereSymmetric)
from .sequences import (CumulativeProduct, SequenceSpec, SeriesSum,
                        product_series, weighted_volume_series)

DEFAULT_VERTEX_CAP = 1_000_000


class MetricGraph:
    """Concrete finite metric graph: vertices with generation labels,
    oriented weighted edges, boundary marks, provenance."""

    def __init__(self, vertices, edges, boundary=(), provenance=("", 0)):
        # vertices: iterable of (id, generation); edges: (u, v, length)
        self.generations = dict(vertices)
        self.vertex_ids = tuple(self.generations)
        self.edges = tuple((u, v, float(length)) for u, v, length in edges)
        self.boundary = frozenset(boundary)
        self.provenance = tuple(provenance)
        self._adjacency: dict[str, list[tuple[str, float]]] = {v: [] for v in self.vertex_ids}
        for u, v, length in self.edges:
            if u not in self.generations or v not in self.generations:
                raise UnknownVertex(f"edge ({u},{v}) references unknown vertex")
            self._adjacency[u].append((v, length))
            self._adjacency[v].append((u, length))

    # -- basic queries ------------------------------------------------------

    def __contains__(self, vertex: str) -> bool:
        return vertex in self.generations

    @property
    def vertex_count(self) -> int:
        return len(self.vertex_ids)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degree(self, vertex: str) -> int:
        self._check(vertex)
        return len(self._adjacency[vertex])

    def neighbours(self, vertex: str):
        self._check(vertex)
        return tuple(self._adjacency[vertex])

    def is_boundary(self, vertex: str) -> bool:
        self._check(vertex)
        return vertex in self.boundary

    def volume(self) -> float:
        return math.fsum(length for _, _, length in self.edges)

    def star_weight(self, vertex: str) -> float:
        """m(v): total length of edges incident to v.  At a boundary
        vertex this is only a lower bound for the family value."""
        self._check(vertex)
        return math.fsum(length for _, length in self._adjacency[vertex])

    def path_metric(self, u: str, v: str) -> float:
        """Shortest path length between two vertices."""
        self._check(u), self._check(v)
        if u == v:
            return 0.0
        dist = self._dijkstra(u, edge_cost=lambda w, length: length, seed=0.0)
        if v not in dist:
            raise UnknownVertex(f"{v} not reachable from {u}")
        return dist[v]

    def star_path_metric(self, u: str, v: str) -> float:
        """Vertex-weighted path metric: infimum over paths of the sum of
        star weights of the path vertices (both endpoints included;
        0 when u == v)."""
        self._check(u), self._check(v)
        if u == v:
            return 0.0
        m = {w: self.star_weight(w) for w in self.vertex_ids}
        dist = self._dijkstra(u, edge_cost=lambda w, length: m[w], seed=m[u])
        if v not in dist:
            raise UnknownVertex(f"{v} not reachable from {u}")
        return dist[v]

    def _dijkstra(self, source, edge_cost, seed):
        dist = {source: seed}
        heap = [(seed, source)]
        while heap:
            d, x = heapq.heappop(heap)
            if d > dist.get(x, math.inf):
                continue
            for w, length in self._adjacency[x]:
                nd = d + edge_cost(w, length)
                if nd < dist.get(w, math.inf):
                    dist[w] = nd
                    heapq.heappush(heap, (nd, w))
        return dist

    def vertex_diameter(self) -> float:
        """Largest vertex-to-vertex distance (equals the metric diameter
        when the extremal points are vertices, as in trees and paths)."""
        best = 0.0
        for u in self.vertex_ids:
            dist = self._dijkstra(u, edge_cost=lambda w, length: length, seed=0.0)
            best = max(best, max(dist.values()))
        return best

    def _check(self, vertex: str) -> None:
        if vertex not in self.generations:
            raise UnknownVertex(f"unknown vertex {vertex!r}")

    # -- derived graphs ------------------------------------------------------

    def scaled(self, c: float) -> "MetricGraph":
        return MetricGraph(self.generations.items(),
                           [(u, v, length * c) for u, v, length in self.edges],
                           self.boundary, self.provenance)

    def with_reversed_edges(self) -> "MetricGraph":
        return MetricGraph(self.generations.items(),
                           [(v, u, length) for u, v, length in self.edges],
                           self.boundary, self.provenance)

    # -- export ---------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "vertices": [{"id": v, "generation": g} for v, g in self.generations.items()],
            "edges": [[u, v, length] for u, v, length in self.edges],
            "boundary": sorted(self.boundary),
            "provenance": {"spec": self.provenance[0], "depth": self.provenance[1]},
        }

    def to_csv(self) -> str:
        lines = ["u,v,length"]
        lines += [f"{u},{v},{length!r}" for u, v, length in self.edges]
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Truncation builders
# ---------------------------------------------------------------------------

class _Builder:
    def __init__(self, cap: int):
        self.cap = cap
        self.vertices: list[tuple[str, int]] = []
        self.edges: list[tuple[str, str, float]] = []
        self.spec_degree: dict[str, float] = {}

    def add_vertex(self, vid: str, generation: int, spec_degree: float) -> None:
        self.vertices.append((vid, generation))
        self.spec_degree[vid] = spec_degree
        if len(self.vertices) > self.cap:
            raise DepthTooLarge(f"truncation exceeds the vertex cap ({self.cap})")

    def add_edge(self, u: str, v: str, length: float) -> None:
        self.edges.append((u, v, length))

    def finish(self, provenance) -> MetricGraph:
        degree = {v: 0 for v, _ in self.vertices}
        for u, v, _ in self.edges:
            degree[u] += 1
            degree[v] += 1
        boundary = [v for v, _ in self.vertices if degree[v] < self.spec_degree[v]]
        return MetricGraph(self.vertices, self.edges, boundary, provenance)


def truncate(spec: GraphFamilySpec, depth: int, cap: int = DEFAULT_VERTEX_CAP) -> MetricGraph:
    """Subgraph generated by all vertices within combinatorial depth
    `depth` of the root, with cut vertices marked as boundary."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    builder = _Builder(cap)
    if isinstance(spec, RadialTree):
        _build_tree(builder, spec.b, spec.ell, depth, root="o", root_extra_degree=0.0,
                    scale=1.0, root_generation=0)
    elif isinstance(spec, HalfLinePath):
        _build_path(builder, spec.ell, depth, "p", root="p0", root_extra_degree=0.0)
    elif isinstance(spec, FullLinePath):
        builder.add_vertex("o", 0, 2)
        _build_ray(builder, spec.ell_pos, depth, "p", "o")
        _build_ray(builder, spec.ell_neg, depth, "m", "o")
    elif isinstance(spec, ChainWithAttachments):
        _build_chain(builder, spec, depth)
    elif isinstance(spec, SphereSymmetric):
        _build_sphere_symmetric(builder, spec, depth)
    elif isinstance(spec, FiniteGraph):
        _build_finite(builder, spec)
    else:
        raise UnsupportedFamily(f"cannot truncate {spec.variant}")
    return builder.finish((spec.name or spec.variant, depth))


def _build_tree(builder, b, ell, depth, root, root_extra_degree, scale, root_generation,
                prefix=""):
    root_id = prefix + root
    builder.add_vertex(root_id, root_generation, float(b.term(0)) + root_extra_degree)
    frontier = [root_id]
    for gen in range(depth):
        length = float(ell.term(gen)) * scale
        width = int(b.term(gen))
        spec_deg = 1.0 + float(b.term(gen + 1))
        next_frontier = []
        for parent in frontier:
            for j in range(width):
                child = f"{parent}.{j}"
                builder.add_vertex(child, root_generation + gen + 1, spec_deg)
                builder.add_edge(parent, child, length)
                next_frontier.append(child)
        frontier = next_frontier


def _build_path(builder, ell, depth, tag, root, root_extra_degree):
    builder.add_vertex(root, 0, 1.0 + root_extra_degree)
    _build_ray(builder, ell, depth, tag, root)


def _build_ray(builder, ell, depth, tag, attach_to, scale=1.0, generation_offset=0,
               prefix=""):
    prev = attach_to
    for n in range(1, depth + 1):
        vid = f"{prefix}{tag}{n}"
        builder.add_vertex(vid, generation_offset + n, 2.0)
        builder.add_edge(prev, vid, float(ell.term(n - 1)) * scale)
        prev = vid


def _build_chain(builder, spec: ChainWithAttachments, depth: int):
    att_root_degree = _family_root_degree(spec.attachment)
    for n in range(depth + 1):
        deg = (1.0 if n == 0 else 2.0) + att_root_degree
        builder.add_vertex(f"c{n}", n, deg)
        if n > 0:
            builder.add_edge(f"c{n-1}", f"c{n}", float(spec.ell.term(n - 1)))
    for n in range(depth + 1):
        remaining = depth - n
        if remaining < 1:
            continue
        scale = float(spec.scaling.term(n))
        _attach_family(builder, spec.attachment, f"c{n}", n, remaining, scale, f"a{n}:")


def _attach_family(builder, template, root_id, root_generation, depth, scale, prefix):
    """Graft a scaled copy of `template`, identifying its root with root_id."""
    if isinstance(template, RadialTree):
        frontier = [root_id]
        for gen in range(depth):
            length = float(template.ell.term(gen)) * scale
            width = int(template.b.term(gen))
            spec_deg = 1.0 + float(template.b.term(gen + 1))
            nxt = []
            for parent in frontier:
                for j in range(width):
                    child = f"{prefix}t.{j}" if parent == root_id else f"{parent}.{j}"
                    builder.add_vertex(child, root_generation + gen + 1, spec_deg)
                    builder.add_edge(parent, child, length)
                    nxt.append(child)
            frontier = nxt
    elif isinstance(template, HalfLinePath):
        _build_ray(builder, template.ell, depth, "h", root_id, scale, root_generation, prefix)
    elif isinstance(template, FullLinePath):
        _build_ray(builder, template.ell_pos, depth, "p", root_id, scale, root_generation, prefix)
        _build_ray(builder, template.ell_neg, depth, "m", root_id, scale, root_generation, prefix)
    elif isinstance(template, FiniteGraph):
        root = template.root_vertex()
        gens = _finite_generations(template)
        rename = {v: (root_id if v == root else prefix + v) for v in gens}
        for v, g in gens.items():
            if v != root:
                builder.add_vertex(rename[v], root_generation + g, _finite_degree(template, v))
        for u, v, length in template.edges:
            builder.add_edge(rename[u], rename[v], float(length) * scale)
    else:
        raise UnsupportedFamily(f"{template.variant} cannot be attached")


def _build_sphere_symmetric(builder, spec: SphereSymmetric, depth: int):
    declared = spec.declared_ends
    if declared == ExtendedCount.UNCOUNTABLE:
        b = _sphere_ratio_sequence(spec, depth + 1)
        _build_tree(builder, b, spec.ell, depth, root="o", root_extra_degree=0.0,
                    scale=1.0, root_generation=0)
        return
    sides = ("s",) if declared == ExtendedCount.finite(1) else ("p", "m")
    root_deg = len(sides) * float(spec.spheres.term(1))
    builder.add_vertex("o", 0, root_deg)
    for tag in sides:
        prev = ["o"]
        for n in range(1, depth + 1):
            size = int(spec.spheres.term(n))
            spec_deg = float(spec.spheres.term(n - 1)) + float(spec.spheres.term(n + 1))
            length = float(spec.ell.term(n - 1))
            sphere = []
            for i in range(size):
                vid = f"{tag}{n}.{i}"
                builder.add_vertex(vid, n, spec_deg)
                sphere.append(vid)
            for u in prev:
                for v in sphere:
                    builder.add_edge(u, v, length)
            prev = sphere


class _SphereRatio(SequenceSpec):
    """Generation branching numbers s_{n+1}/s_n of a declared-Cantor
    sphere-symmetric family; only term() is ever used."""

    def __init__(self, spheres, upto):
        self._values = []
        for n in range(upto + 1):
            num, den = Fraction(spheres.term(n + 1)), Fraction(spheres.term(n))
            q = num / den
            if q.denominator != 1 or q < 2:
                raise UnsupportedFamily(
                    "Cantor-declared sphere family needs integer sphere ratios >= 2")
            self._values.append(int(q))

    def term(self, n: int):
        return Fraction(self._values[min(n, len(self._values) - 1)])


def _sphere_ratio_sequence(spec: SphereSymmetric, upto: int) -> SequenceSpec:
    return _SphereRatio(spec.spheres, upto)


def _build_finite(builder, spec: FiniteGraph):
    gens = _finite_generations(spec)
    for v, g in gens.items():
        builder.add_vertex(v, g, _finite_degree(spec, v))
    for u, v, length in spec.edges:
        builder.add_edge(u, v, float(length))


def _finite_generations(spec: FiniteGraph) -> dict[str, int]:
    adjacency: dict[str, list[str]] = {}
    for u, v, _ in spec.edges:
        adjacency.setdefault(u, []).append(v)
        adjacency.setdefault(v, []).append(u)
    root = spec.root_vertex()
    gens = {root: 0}
    queue = [root]
    while queue:
        nxt = []
        for u in queue:
            for w in adjacency[u]:
                if w not in gens:
                    gens[w] = gens[u] + 1
                    nxt.append(w)
        queue = nxt
    return gens


def _finite_degree(spec: FiniteGraph, vertex: str) -> float:
    return float(sum(1 for u, v, _ in spec.edges if vertex in (u, v)))


def _family_root_degree(template) -> float:
    if isinstance(template, RadialTree):
        return float(template.b.term(0))
    if isinstance(template, HalfLinePath):
        return 1.0
    if isinstance(template, FullLinePath):
        return 2.0
    if isinstance(template, FiniteGraph):
        return _finite_degree(template, template.root_vertex())
    raise UnsupportedFamily(f"{template.variant} cannot be attached")


# ---------------------------------------------------------------------------
# Family-level metric quantities
# ---------------------------------------------------------------------------

def volume(g: MetricGraph) -> float:
    return g.volume()


def volume_family(spec: GraphFamilySpec) -> SeriesSum:
    """Total volume of the infinite family, Finite(v) or Divergent."""
    if isinstance(spec, RadialTree):
        return weighted_volume_series(spec.b, spec.ell)
    if isinstance(spec, HalfLinePath):
        return spec.ell.series_sum()
    if isinstance(spec, FullLinePath):
        return _series_add(spec.ell_pos.series_sum(), spec.ell_neg.series_sum())
    if isinstance(spec, ChainWithAttachments):
        att = volume_family(spec.attachment)
        if not att.finite:
            return SeriesSum.DIVERGENT
        scaled = spec.scaling.series_sum()
        if not scaled.finite:
            return SeriesSum.DIVERGENT
        total = _series_scale(scaled, att.value)
        total = SeriesSum.finite_sum(total.value,
                                     total.error_bound + scaled.error_bound * float(att.value))
        return _series_add(spec.ell.series_sum(), total)
    if isinstance(spec, SphereSymmetric):
        if spec.declared_ends == ExtendedCount.UNCOUNTABLE:
            return product_series(((spec.spheres, 1), (spec.ell, 0)))
        per_side = product_series(((spec.spheres, 0), (spec.spheres, 1), (spec.ell, 0)))
        if spec.declared_ends == ExtendedCount.finite(2):
            return _series_scale(per_side, 2)
        return per_side
    if isinstance(spec, FiniteGraph):
        return SeriesSum.finite_sum(spec.total_length())
    raise UnsupportedFamily(f"no volume rule for {spec.variant}")


def family_diameter(spec: GraphFamilySpec) -> float:
    """Metric diameter of the family (may be inf)."""
    if isinstance(spec, RadialTree):
        total = spec.ell.series_sum()
        return 2.0 * total.value_float if total.finite else math.inf
    if isinstance(spec, HalfLinePath):
        return spec.ell.series_sum().value_float
    if isinstance(spec, FullLinePath):
        return (spec.ell_pos.series_sum().value_float
                + spec.ell_neg.series_sum().value_float)
    if isinstance(spec, SphereSymmetric):
        total = spec.ell.series_sum()
        # coarse 2 * axial length bound, exact for the two-sided realisation
        return 2.0 * total.value_float if total.finite else math.inf
    if isinstance(spec, FiniteGraph):
        return truncate(spec, 1).vertex_diameter()
    raise UnsupportedFamily(f"no diameter rule for {spec.variant}")


def star_weight_family(spec: GraphFamilySpec, generation: int) -> float:
    """m(v) for a vertex at the given generation of a symmetric family."""
    if isinstance(spec, RadialTree):
        if generation == 0:
            return float(spec.b.term(0)) * float(spec.ell.term(0))
        return float(spec.ell.term(generation - 1)) \
            + float(spec.b.term(generation)) * float(spec.ell.term(generation))
    if isinstance(spec, HalfLinePath):
        if generation == 0:
            return float(spec.ell.term(0))
        return float(spec.ell.term(generation - 1)) + float(spec.ell.term(generation))
    raise UnsupportedFamily(f"no family star weight for {spec.variant}")


def _series_add(a: SeriesSum, b: SeriesSum) -> SeriesSum:
    if not (a.finite and b.finite):
        return SeriesSum.DIVERGENT
    if isinstance(a.value, Fraction) and isinstance(b.value, Fraction):
        return SeriesSum.finite_sum(a.value + b.value, a.error_bound + b.error_bound)
    return SeriesSum.finite_sum(float(a.value) + float(b.value),
                                a.error_bound + b.error_bound)


def _series_scale(a: SeriesSum, c) -> SeriesSum:
    if not a.finite:
        return SeriesSum.DIVERGENT
    if isinstance(a.value, Fraction) and isinstance(c, (int, Fraction)):
        return SeriesSum.finite_sum(a.value * c, a.error_bound * abs(float(c)))
    return SeriesSum.finite_sum(float(a.value) * float(c),
                                a.error_bound * abs(float(c)))


# ---------------------------------------------------------------------------
# Subgraph sequences (tails and attachments)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubgraphLevel:
    index: int
    volume: float            # inf when the tail diverges
    diameter: float
    boundary_size: int
    end_count: ExtendedCount


@dataclass(frozen=True)
class SubgraphSequenceReport:
    kind: str                # "tree-tails" or "chain-attachments"
    levels: tuple

    @property
    def volumes_vanish(self) -> bool:
        vols = [lvl.volume for lvl in self.levels]
        return all(math.isfinite(v) for v in vols) and vols[-1] < vols[0] \
            and all(b <= a for a, b in zip(vols, vols[1:]))


def subgraph_sequence(spec: GraphFamilySpec, count: int = 8) -> SubgraphSequenceReport:
    """Canonical tail decomposition: branch subtrees past each generation
    for radially symmetric trees, per-site attachments for chains."""
    from .ends import enumerate_ends  # late import to avoid a module cycle

    if isinstance(spec, RadialTree):
        cum = CumulativeProduct(spec.b)
        levels = []
        for n in range(1, count + 1):
            tail = weighted_volume_series(spec.b, spec.ell, start=n, cum=cum)
            vol = tail.value_float / float(cum.mu(n - 1)) if tail.finite else math.inf
            axial = spec.ell.tail_sum(n)
            diam = 2.0 * axial.value_float if axial.finite else math.inf
            levels.append(SubgraphLevel(n, vol, diam, 1, ExtendedCount.UNCOUNTABLE))
        return SubgraphSequenceReport("tree-tails", tuple(levels))

    if isinstance(spec, ChainWithAttachments):
        att_total = enumerate_ends(spec.attachment).total
        att_vol = volume_family(spec.attachment)
        att_diam = family_diameter(spec.attachment)
        levels = []
        for n in range(count):
            s = float(spec.scaling.term(n))
            vol = s * att_vol.value_float if att_vol.finite else math.inf
            diam = s * att_diam
            levels.append(SubgraphLevel(n, vol, diam, 1, att_total))
        return SubgraphSequenceReport("chain-attachments", tuple(levels))

    raise UnsupportedFamily(f"{spec.variant} has no canonical tail decomposition")
