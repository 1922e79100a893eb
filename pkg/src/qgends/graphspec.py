"""Finite symbolic descriptions of infinite metric graph families.

A family spec pins down an infinite metric graph up to the data the
classifier needs: branching/length sequences for radially symmetric
trees, length sequences for half-line and full-line paths, a chain with
scaled attachment copies, sphere-symmetric (antitree style) families
with a declared end cardinality, and explicit finite graphs.

The documented JSON schema (version ``qgends-spec/1``) is what
``parse_spec`` accepts; ``serialize_spec`` inverts it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import ClassVar

from .errors import InvariantError, NonPositiveLength, SchemaError
from .sequences import (Number, SequenceSpec, number_to_json, parse_number,
                        parse_sequence)

SCHEMA_VERSION = "qgends-spec/1"


# ---------------------------------------------------------------------------
# Extended counts: finite k, countably infinite, uncountable
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class ExtendedCount:
    """Cardinality of an end set. Ordering: 0 < 1 < ... < aleph0 < continuum."""

    _rank: int          # 0 finite, 1 countably infinite, 2 uncountable
    _value: int = 0     # only meaningful for rank 0

    COUNTABLE: ClassVar["ExtendedCount"]
    UNCOUNTABLE: ClassVar["ExtendedCount"]

    @staticmethod
    def finite(k: int) -> "ExtendedCount":
        if k < 0:
            raise ValueError("finite count must be >= 0")
        return ExtendedCount(0, k)

    @property
    def is_finite(self) -> bool:
        return self._rank == 0

    @property
    def is_zero(self) -> bool:
        return self._rank == 0 and self._value == 0

    @property
    def finite_value(self) -> int:
        if not self.is_finite:
            raise ValueError("count is infinite")
        return self._value

    def __str__(self) -> str:
        if self._rank == 0:
            return str(self._value)
        return "countably-infinite" if self._rank == 1 else "uncountable"

    def to_json(self):
        if self._rank == 0:
            return self._value
        return str(self)

    @staticmethod
    def from_json(raw) -> "ExtendedCount":
        if isinstance(raw, int) and not isinstance(raw, bool):
            return ExtendedCount.finite(raw)
        if raw == "countably-infinite":
            return ExtendedCount.COUNTABLE
        if raw in ("uncountable", "cantor"):
            return ExtendedCount.UNCOUNTABLE
        raise SchemaError(f"cannot parse end count {raw!r}")


ExtendedCount.COUNTABLE = ExtendedCount(1)
ExtendedCount.UNCOUNTABLE = ExtendedCount(2)


# ---------------------------------------------------------------------------
# Family variants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GraphFamilySpec:
    """Base for all family variants; carries metadata only."""

    name: str = ""
    notes: str = ""

    variant = "abstract"

    def validate(self) -> None:
        raise NotImplementedError

    def payload_json(self) -> dict:
        raise NotImplementedError

    def to_json(self) -> dict:
        doc = {"schema": SCHEMA_VERSION, "variant": self.variant}
        doc.update(self.payload_json())
        if self.name:
            doc["name"] = self.name
        if self.notes:
            doc["notes"] = self.notes
        return doc


@dataclass(frozen=True)
class RadialTree(GraphFamilySpec):
    """Rooted tree, branching number b_n and edge length ell_n constant on
    each generation; b_n is an integer >= 2."""

    b: SequenceSpec = None
    ell: SequenceSpec = None
    variant = "RadialTree"

    def validate(self) -> None:
        self.b.require_integer_at_least(2, "b")
        self.ell.require_positive("ell", NonPositiveLength)

    def payload_json(self) -> dict:
        return {"b": self.b.to_json(), "ell": self.ell.to_json()}


@dataclass(frozen=True)
class HalfLinePath(GraphFamilySpec):
    """One-sided infinite path with edge lengths ell_n."""

    ell: SequenceSpec = None
    variant = "HalfLinePath"

    def validate(self) -> None:
        self.ell.require_positive("ell", NonPositiveLength)

    def payload_json(self) -> dict:
        return {"ell": self.ell.to_json()}


@dataclass(frozen=True)
class FullLinePath(GraphFamilySpec):
    """Two-sided infinite path: a junction vertex with a positive and a
    negative ray."""

    ell_pos: SequenceSpec = None
    ell_neg: SequenceSpec = None
    variant = "FullLinePath"

    def validate(self) -> None:
        self.ell_pos.require_positive("ell_pos", NonPositiveLength)
        self.ell_neg.require_positive("ell_neg", NonPositiveLength)

    def payload_json(self) -> dict:
        return {"ell_pos": self.ell_pos.to_json(), "ell_neg": self.ell_neg.to_json()}


@dataclass(frozen=True)
class ChainWithAttachments(GraphFamilySpec):
    """A one-sided chain carrying, at every chain vertex n, a copy of a
    template family with all lengths scaled by scaling(n)."""

    ell: SequenceSpec = None
    attachment: GraphFamilySpec = None
    scaling: SequenceSpec = None
    variant = "ChainWithAttachments"

    def validate(self) -> None:
        self.ell.require_positive("ell", NonPositiveLength)
        self.scaling.require_positive("scaling", NonPositiveLength)
        if isinstance(self.attachment, ChainWithAttachments):
            raise InvariantError("attachments may not nest chains")
        self.attachment.validate()

    def payload_json(self) -> dict:
        return {"ell": self.ell.to_json(),
                "attachment": self.attachment.to_json(),
                "scaling": self.scaling.to_json()}


@dataclass(frozen=True)
class SphereSymmetric(GraphFamilySpec):
    """Sphere-symmetric family for Cayley-type desk models.

    ``spheres(n)`` is the size of the n-th combinatorial sphere (with
    spheres(0) = 1) and ``ell(n)`` the common length of edges between
    spheres n and n+1.  The end cardinality (1, 2 or Cantor) is declared
    by the user and only validated at truncation level:

    * 1 end: realised as an antitree (complete bipartite joins between
      consecutive spheres),
    * 2 ends: two such antitrees glued at the shared root, with
      ``spheres`` read per side,
    * Cantor: realised as the radially symmetric tree whose generation
      sizes are ``spheres`` (requires integer ratios >= 2).
    """

    spheres: SequenceSpec = None
    ell: SequenceSpec = None
    declared_ends: ExtendedCount = None
    variant = "SphereSymmetric"

    def validate(self) -> None:
        self.spheres.require_integer_at_least(1, "spheres")
        self.ell.require_positive("ell", NonPositiveLength)
        if Fraction(self.spheres.term(0)) != 1:
            raise InvariantError("spheres: sphere 0 must have size 1 (the root)")
        ok = self.declared_ends in (ExtendedCount.finite(1), ExtendedCount.finite(2),
                                    ExtendedCount.UNCOUNTABLE)
        if not ok:
            raise InvariantError("ends declaration must be 1, 2 or \"cantor\"")

    def payload_json(self) -> dict:
        ends = self.declared_ends.to_json()
        return {"spheres": self.spheres.to_json(), "ell": self.ell.to_json(),
                "ends": "cantor" if ends == "uncountable" else ends}


@dataclass(frozen=True)
class FiniteGraph(GraphFamilySpec):
    """Explicit finite metric graph given by an edge list with lengths."""

    edges: tuple = ()  # ((u, v, length), ...)
    root: str = ""
    variant = "FiniteGraph"

    def validate(self) -> None:
        seen = set()
        adjacency: dict[str, set[str]] = {}
        for u, v, length in self.edges:
            if u == v:
                raise InvariantError(f"loop edge at {u!r} is not allowed")
            if not (float(length) > 0.0):
                raise NonPositiveLength(f"edge ({u},{v}) has non-positive length")
            key = frozenset((u, v))
            if key in seen:
                raise InvariantError(f"multiple edges between {u!r} and {v!r}")
            seen.add(key)
            adjacency.setdefault(u, set()).add(v)
            adjacency.setdefault(v, set()).add(u)
        if not adjacency:
            raise InvariantError("finite graph needs at least one edge")
        if self.root and self.root not in adjacency:
            raise InvariantError(f"root {self.root!r} is not a vertex")
        # connectivity
        start = self.root or next(iter(sorted(adjacency)))
        stack, reached = [start], {start}
        while stack:
            for w in adjacency[stack.pop()]:
                if w not in reached:
                    reached.add(w)
                    stack.append(w)
        if reached != set(adjacency):
            raise InvariantError("finite graph is not connected")

    @property
    def vertex_ids(self) -> tuple:
        out = []
        for u, v, _ in self.edges:
            for w in (u, v):
                if w not in out:
                    out.append(w)
        return tuple(out)

    def root_vertex(self) -> str:
        return self.root or self.vertex_ids[0]

    def total_length(self) -> Number:
        total: Number = Fraction(0)
        for _, _, length in self.edges:
            total = total + length
        return total

    def payload_json(self) -> dict:
        doc = {"edges": [[u, v, number_to_json(length)] for u, v, length in self.edges]}
        if self.root:
            doc["root"] = self.root
        return doc


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_META_FIELDS = {"schema", "variant", "name", "notes"}


def parse_spec(doc) -> GraphFamilySpec:
    """Parse and validate the JSON form of a family spec.

    Raises SchemaError for shape problems, InvariantError (or its
    NonPositiveLength refinement) for value problems.
    """
    if not isinstance(doc, dict):
        raise SchemaError("spec: expected a JSON object")
    schema = doc.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema version {schema!r}")
    variant = doc.get("variant")
    meta = {"name": _opt_str(doc, "name"), "notes": _opt_str(doc, "notes")}

    if variant == "RadialTree":
        _check_fields(doc, {"b", "ell"})
        spec = RadialTree(b=parse_sequence(doc.get("b"), "b"),
                          ell=parse_sequence(doc.get("ell"), "ell"), **meta)
    elif variant == "HalfLinePath":
        _check_fields(doc, {"ell"})
        spec = HalfLinePath(ell=parse_sequence(doc.get("ell"), "ell"), **meta)
    elif variant == "FullLinePath":
        _check_fields(doc, {"ell_pos", "ell_neg"})
        spec = FullLinePath(ell_pos=parse_sequence(doc.get("ell_pos"), "ell_pos"),
                            ell_neg=parse_sequence(doc.get("ell_neg"), "ell_neg"), **meta)
    elif variant == "ChainWithAttachments":
        _check_fields(doc, {"ell", "attachment", "scaling"})
        attachment = parse_spec(_require(doc, "attachment", dict, "attachment"))
        spec = ChainWithAttachments(ell=parse_sequence(doc.get("ell"), "ell"),
                                    attachment=attachment,
                                    scaling=parse_sequence(doc.get("scaling"), "scaling"),
                                    **meta)
    elif variant == "SphereSymmetric":
        _check_fields(doc, {"spheres", "ell", "ends"})
        spec = SphereSymmetric(spheres=parse_sequence(doc.get("spheres"), "spheres"),
                               ell=parse_sequence(doc.get("ell"), "ell"),
                               declared_ends=ExtendedCount.from_json(doc.get("ends")),
                               **meta)
    elif variant == "FiniteGraph":
        _check_fields(doc, {"edges", "root"})
        spec = FiniteGraph(edges=_parse_edges(doc.get("edges")),
                           root=_opt_str(doc, "root"), **meta)
    else:
        raise SchemaError(f"unknown variant {variant!r}")

    spec.validate()
    return spec


def serialize_spec(spec: GraphFamilySpec) -> dict:
    return spec.to_json()


def _parse_edges(raw) -> tuple:
    if not isinstance(raw, list) or not raw:
        raise SchemaError("edges: expected a non-empty list")
    out = []
    for i, item in enumerate(raw):
        if not (isinstance(item, list) and len(item) == 3):
            raise SchemaError(f"edges[{i}]: expected [u, v, length]")
        u, v, length = item
        if not (isinstance(u, str) and isinstance(v, str)):
            raise SchemaError(f"edges[{i}]: vertex ids must be strings")
        out.append((u, v, parse_number(length, f"edges[{i}].length")))
    return tuple(out)


def _check_fields(doc: dict, allowed: set) -> None:
    extra = set(doc) - allowed - _META_FIELDS
    if extra:
        raise SchemaError(f"spec: unknown fields {sorted(extra)}")


def _opt_str(doc: dict, key: str) -> str:
    val = doc.get(key, "")
    if not isinstance(val, str):
        raise SchemaError(f"{key}: expected a string")
    return val


def _require(doc: dict, key: str, typ, where: str):
    val = doc.get(key)
    if not isinstance(val, typ):
        raise SchemaError(f"{where}: missing or wrong type")
    return val
