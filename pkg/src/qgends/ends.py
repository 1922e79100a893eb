"""Graph-end census: counts, volume classes and freeness per family.

End spaces of infinite graphs are infinitary objects, so the census is
symbolic per family variant (each variant has a provable census) and is
cross-checked at desk scale against component counts of ball
complements computed on truncations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import UnsupportedFamily
from .graphspec import (ChainWithAttachments, ExtendedCount, FiniteGraph,
                        FullLinePath, GraphFamilySpec, HalfLinePath,
                        RadialTree, SphereSymmetric)
from .metric_graph import truncate, volume_family


@dataclass(frozen=True)
class VolumeClass:
    """Finite volume means some neighbourhood of the end has finite total
    edge length; witness_volume records one such value."""

    finite: bool
    witness_volume: Optional[float] = None

    def to_json(self):
        if self.finite:
            return {"finite": True, "witness_volume": self.witness_volume}
        return {"finite": False}


FREE = "free"
NON_FREE = "non-free"


@dataclass(frozen=True)
class EndDescriptor:
    id: str
    ray: str                      # symbolic ray description
    volume_class: VolumeClass
    freeness: str                 # FREE or NON_FREE
    multiplicity: ExtendedCount = ExtendedCount.finite(1)

    def to_json(self):
        return {"id": self.id, "ray": self.ray,
                "volume_class": self.volume_class.to_json(),
                "freeness": self.freeness,
                "multiplicity": self.multiplicity.to_json()}


@dataclass(frozen=True)
class EndSummary:
    total: ExtendedCount
    finite_volume: ExtendedCount
    free_finite_volume: ExtendedCount
    has_nonfree_finite_volume: bool
    descriptors: tuple

    def to_json(self):
        return {"total": self.total.to_json(),
                "finite_volume": self.finite_volume.to_json(),
                "free_finite_volume": self.free_finite_volume.to_json(),
                "has_nonfree_finite_volume": self.has_nonfree_finite_volume,
                "descriptors": [d.to_json() for d in self.descriptors]}


def enumerate_ends(spec: GraphFamilySpec) -> EndSummary:
    """Symbolic end census of the family."""
    if isinstance(spec, HalfLinePath):
        vc = _tail_class(spec.ell)
        d = EndDescriptor("axis", "ray along the path", vc, FREE)
        return _summary_from_descriptors((d,), ExtendedCount.finite(1))

    if isinstance(spec, FullLinePath):
        dp = EndDescriptor("positive", "ray along the positive side",
                           _tail_class(spec.ell_pos), FREE)
        dm = EndDescriptor("negative", "ray along the negative side",
                           _tail_class(spec.ell_neg), FREE)
        return _summary_from_descriptors((dp, dm), ExtendedCount.finite(2))

    if isinstance(spec, RadialTree):
        vol = volume_family(spec)
        vc = VolumeClass(vol.finite, vol.value_float if vol.finite else None)
        d = EndDescriptor("radial-branch", "any radial branch (all ends share the class)",
                          vc, NON_FREE, ExtendedCount.UNCOUNTABLE)
        return _summary_from_descriptors((d,), ExtendedCount.UNCOUNTABLE)

    if isinstance(spec, SphereSymmetric):
        total = spec.declared_ends
        vol = volume_family(spec)
        vc = VolumeClass(vol.finite, vol.value_float if vol.finite else None)
        freeness = FREE if total.is_finite else NON_FREE
        if total == ExtendedCount.finite(1):
            ds = (EndDescriptor("sphere-axis", "outward through the spheres", vc, freeness),)
        elif total == ExtendedCount.finite(2):
            half = VolumeClass(vol.finite,
                               vol.value_float / 2.0 if vol.finite else None)
            ds = (EndDescriptor("side-a", "outward through side a", half, freeness),
                  EndDescriptor("side-b", "outward through side b", half, freeness))
        else:
            ds = (EndDescriptor("cantor-branch", "any branch (Cantor end space)",
                                vc, NON_FREE, ExtendedCount.UNCOUNTABLE),)
        return _summary_from_descriptors(ds, total)

    if isinstance(spec, ChainWithAttachments):
        return _chain_summary(spec)

    if isinstance(spec, FiniteGraph):
        return EndSummary(ExtendedCount.finite(0), ExtendedCount.finite(0),
                          ExtendedCount.finite(0), False, ())

    raise UnsupportedFamily(f"no end census for {spec.variant}")


def _tail_class(ell) -> VolumeClass:
    total = ell.series_sum()
    return VolumeClass(total.finite, total.value_float if total.finite else None)


def _summary_from_descriptors(descriptors, total) -> EndSummary:
    finite_vol = ExtendedCount.finite(0)
    free_fv = ExtendedCount.finite(0)
    nonfree_fv = False
    for d in descriptors:
        if not d.volume_class.finite:
            continue
        finite_vol = _count_add(finite_vol, d.multiplicity)
        if d.freeness == FREE:
            free_fv = _count_add(free_fv, d.multiplicity)
        else:
            nonfree_fv = True
    return EndSummary(total, finite_vol, free_fv, nonfree_fv, tuple(descriptors))


def _chain_summary(spec: ChainWithAttachments) -> EndSummary:
    att = enumerate_ends(spec.attachment)
    graph_vol = volume_family(spec)
    chain_vc = VolumeClass(graph_vol.finite,
                           graph_vol.value_float if graph_vol.finite else None)
    chain_free = FREE if att.total.is_zero else NON_FREE
    chain_end = EndDescriptor("chain-tail", "ray along the chain", chain_vc, chain_free)

    descriptors = [chain_end]
    for d in att.descriptors:
        descriptors.append(EndDescriptor(
            f"site-{d.id}", f"into the site-n attachment, then {d.ray}",
            d.volume_class, d.freeness, _count_countably_many(d.multiplicity)))

    total = _count_add(ExtendedCount.finite(1), _count_countably_many(att.total))
    return _summary_from_descriptors(tuple(descriptors), total)


def _count_add(a: ExtendedCount, b: ExtendedCount) -> ExtendedCount:
    if a.is_finite and b.is_finite:
        return ExtendedCount.finite(a.finite_value + b.finite_value)
    return max(a, b)


def _count_countably_many(per_site: ExtendedCount) -> ExtendedCount:
    """Cardinality of countably many copies of a per-site end set."""
    if per_site.is_zero:
        return ExtendedCount.finite(0)
    if per_site == ExtendedCount.UNCOUNTABLE:
        return ExtendedCount.UNCOUNTABLE
    return ExtendedCount.COUNTABLE


# -- per-end views -----------------------------------------------------------

def classify_volume(spec: GraphFamilySpec, end: EndDescriptor) -> VolumeClass:
    """Volume class of one census end (recomputed, not cached)."""
    summary = enumerate_ends(spec)
    for d in summary.descriptors:
        if d.id == end.id:
            return d.volume_class
    raise UnsupportedFamily(f"end {end.id!r} is not in the census of {spec.variant}")


def detect_free(spec: GraphFamilySpec, end: EndDescriptor) -> str:
    summary = enumerate_ends(spec)
    for d in summary.descriptors:
        if d.id == end.id:
            return d.freeness
    raise UnsupportedFamily(f"end {end.id!r} is not in the census of {spec.variant}")


def count_finite_volume(spec: GraphFamilySpec) -> ExtendedCount:
    return enumerate_ends(spec).finite_volume


def has_nonfree_finite_volume(spec: GraphFamilySpec) -> bool:
    return enumerate_ends(spec).has_nonfree_finite_volume


# ---------------------------------------------------------------------------
# Truncation component trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComponentLevel:
    radius: int
    count: int
    component_of: dict          # vertex -> component index at this radius

    def to_json(self):
        return {"radius": self.radius, "count": self.count}


def truncation_components(spec: GraphFamilySpec, radius: int,
                          cap: int = None) -> ComponentLevel:
    """Connected components of the complement of the radius-R ball
    (vertices at combinatorial depth >= R)."""
    return component_tree(spec, radius, cap)[-1]


def component_tree(spec: GraphFamilySpec, r_max: int, cap: int = None) -> list:
    """Component levels for R = 1..r_max, from one shared truncation, so
    the inverse-system maps between levels are meaningful."""
    if r_max < 1:
        raise ValueError("radius must be >= 1")
    kwargs = {} if cap is None else {"cap": cap}
    g = truncate(spec, r_max + 1, **kwargs)
    levels = []
    for radius in range(1, r_max + 1):
        keep = {v for v, gen in g.generations.items() if gen >= radius}
        comp: dict[str, int] = {}
        count = 0
        for v in sorted(keep):
            if v in comp:
                continue
            stack = [v]
            comp[v] = count
            while stack:
                x = stack.pop()
                for w, _ in g.neighbours(x):
                    if w in keep and w not in comp:
                        comp[w] = count
                        stack.append(w)
            count += 1
        levels.append(ComponentLevel(radius, count, comp))
    return levels


def component_counts(spec: GraphFamilySpec, r_max: int, cap: int = None) -> list:
    return [(lvl.radius, lvl.count) for lvl in component_tree(spec, r_max, cap)]


def census_matches_components(spec: GraphFamilySpec, r_max: int = 6) -> bool:
    """Desk-scale consistency between the symbolic census and truncation
    component counts: finite censuses stabilise at the declared count,
    infinite ones keep growing."""
    summary = enumerate_ends(spec)
    counts = [c for _, c in component_counts(spec, r_max)]
    if summary.total.is_finite:
        return counts[-1] <= summary.total.finite_value and counts[-2] == counts[-1]
    return counts[-1] > counts[0] or counts[-1] >= r_max
