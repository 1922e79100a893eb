"""Rule engine turning end data into operator-theoretic verdicts.

Each verdict cites the decision rule it came from; rules are tried in a
fixed order and the first match wins, so reports are reproducible and
traceable.  The engine is deliberately conservative: in the genuinely
open regime (infinitely many free finite-volume ends and no vanishing
subgraph sequence) it answers Unknown rather than guessing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import UnsupportedFamily
from .graphspec import (ChainWithAttachments, ExtendedCount, FiniteGraph,
                        FullLinePath, GraphFamilySpec, HalfLinePath,
                        RadialTree, SphereSymmetric)
from .ends import EndSummary, enumerate_ends
from .metric_graph import star_weight_family, volume_family
from .sequences import product_series

# Verdict constants
SELF_ADJOINT = "self-adjoint"
CLOSED_NOT_SELF_ADJOINT = "closed-not-self-adjoint"
NOT_CLOSED = "not-closed"
UNKNOWN = "unknown"

YES = "yes"
NO = "no"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Rule:
    id: str
    citation: str
    statement: str


# Decision rules, keyed by the order the engine tries them.
RULES = {
    "no-finite-volume-ends": Rule(
        "no-finite-volume-ends", "Lemma 3.4(v)",
        "no finite volume ends: the finite-energy Laplacian is self-adjoint "
        "and the Markovian extension is unique"),
    "finitely-many-finite-volume-ends": Rule(
        "finitely-many-finite-volume-ends", "Theorem 3.10(i)",
        "finitely many (but some) finite volume ends: closed with positive "
        "deficiency, hence not self-adjoint"),
    "nonfree-finite-volume-end": Rule(
        "nonfree-finite-volume-end", "Theorem 3.10(ii)",
        "a non-free finite volume end forces infinite deficiency and a "
        "non-closed operator"),
    "vanishing-subgraph-sequence": Rule(
        "vanishing-subgraph-sequence", "Proposition 4.1",
        "a subgraph sequence with vanishing volume and more ends than "
        "boundary vertices forces a non-closed operator"),
    "vanishing-diameter-sequence": Rule(
        "vanishing-diameter-sequence", "Remark 4.2",
        "bounded volumes with vanishing diameters, with more ends than "
        "boundary vertices, force a non-closed operator"),
    "finite-volume-many-ends": Rule(
        "finite-volume-many-ends", "Corollary 3.11",
        "finite total volume: closed exactly when there are finitely many ends"),
    "cayley-ends": Rule(
        "cayley-ends", "Corollary 3.12",
        "Cayley-type family: not closed exactly when there are infinitely "
        "many ends and at least one finite volume end"),
    "open-regime": Rule(
        "open-regime", "(open regime)",
        "infinitely many free finite-volume ends without a qualifying "
        "subgraph sequence: undecided by design"),
    "deficiency-count": Rule(
        "deficiency-count", "Theorem 3.9",
        "deficiency indices of the minimal finite-energy Laplacian equal "
        "the number of finite volume ends"),
    "kirchhoff-lower-bound": Rule(
        "kirchhoff-lower-bound", "Remark after Corollary 3.12",
        "deficiency indices of the minimal Kirchhoff Laplacian are at least "
        "the number of finite volume ends, with equality when that number "
        "is infinite"),
    "markov-uniqueness": Rule(
        "markov-uniqueness", "Lemma 3.4(iv)",
        "Markovian uniqueness is equivalent to the absence of finite "
        "volume ends"),
    "star-metric-complete": Rule(
        "star-metric-complete", "Theorem 2.5",
        "divergent star-weight sums along every ray class: the vertex set "
        "is complete in the star path metric, so the minimal Kirchhoff "
        "Laplacian is self-adjoint"),
    "radial-volume-dichotomy": Rule(
        "radial-volume-dichotomy", "Lemma 4.2(i)",
        "radially symmetric tree: self-adjoint exactly when the total "
        "volume diverges"),
    "deficiency-positive": Rule(
        "deficiency-positive", "Remark after Corollary 3.12",
        "positive finite-volume end count bounds the Kirchhoff deficiency "
        "away from zero, so not self-adjoint"),
}


@dataclass(frozen=True)
class RuleTrace:
    rule_id: str
    citation: str
    inputs: tuple  # ((key, value), ...)

    def to_json(self):
        return {"rule": self.rule_id, "citation": self.citation,
                "inputs": dict(self.inputs)}


def _trace(rule_id: str, **inputs) -> RuleTrace:
    rule = RULES[rule_id]
    return RuleTrace(rule.id, rule.citation,
                     tuple((k, str(v)) for k, v in inputs.items()))


@dataclass(frozen=True)
class Deficiency:
    gaffney_min: ExtendedCount
    kirchhoff_min_lower_bound: ExtendedCount
    kirchhoff_min_exact: Optional[ExtendedCount]
    exactness_condition: str = ""

    def to_json(self):
        doc = {"gaffney_min": self.gaffney_min.to_json(),
               "kirchhoff_min_lower_bound": self.kirchhoff_min_lower_bound.to_json()}
        if self.kirchhoff_min_exact is not None:
            doc["kirchhoff_min_exact"] = self.kirchhoff_min_exact.to_json()
        if self.exactness_condition:
            doc["exactness_condition"] = self.exactness_condition
        return doc


@dataclass(frozen=True)
class ClassificationReport:
    spec_name: str
    kirchhoff_selfadjoint: str
    gaffney_status: str
    markovian_unique: bool
    deficiency: Deficiency
    end_summary: EndSummary
    rule_trace: tuple

    def to_json(self):
        return {
            "spec": self.spec_name,
            "kirchhoff_selfadjoint": self.kirchhoff_selfadjoint,
            "gaffney_status": self.gaffney_status,
            "markovian_unique": self.markovian_unique,
            "deficiency": self.deficiency.to_json(),
            "ends": self.end_summary.to_json(),
            "rule_trace": [t.to_json() for t in self.rule_trace],
        }


# ---------------------------------------------------------------------------
# Gaffney status
# ---------------------------------------------------------------------------

def gaffney_status(spec: GraphFamilySpec) -> tuple[str, RuleTrace]:
    """Decision procedure, first matching rule wins."""
    summary = enumerate_ends(spec)
    c0 = summary.finite_volume

    if c0.is_zero:
        return SELF_ADJOINT, _trace("no-finite-volume-ends", finite_volume_ends=c0)
    if c0.is_finite:
        return CLOSED_NOT_SELF_ADJOINT, _trace("finitely-many-finite-volume-ends",
                                               finite_volume_ends=c0)
    if summary.has_nonfree_finite_volume:
        return NOT_CLOSED, _trace("nonfree-finite-volume-end",
                                  finite_volume_ends=c0)
    qualifier = _qualifying_sequence(spec)
    if qualifier is not None:
        rule_id, inputs = qualifier
        return NOT_CLOSED, _trace(rule_id, **inputs)
    vol = volume_family(spec)
    if vol.finite:
        # all ends have finite volume, so infinitely many ends in total
        return NOT_CLOSED, _trace("finite-volume-many-ends",
                                  volume=vol, total_ends=summary.total)
    if isinstance(spec, SphereSymmetric) and not summary.total.is_finite:
        return NOT_CLOSED, _trace("cayley-ends", total_ends=summary.total,
                                  finite_volume_ends=c0)
    return UNKNOWN, _trace("open-regime", finite_volume_ends=c0,
                           total_ends=summary.total)


def _qualifying_sequence(spec: GraphFamilySpec):
    """Detect a subgraph sequence with #boundary < #ends whose volumes
    vanish (or stay bounded with vanishing diameters)."""
    if isinstance(spec, RadialTree):
        vol = volume_family(spec)
        if vol.finite:
            return "vanishing-subgraph-sequence", {
                "subgraphs": "branch tails", "tail_volume_limit": 0}
        return None
    if isinstance(spec, ChainWithAttachments):
        att_ends = enumerate_ends(spec.attachment).total
        if att_ends < ExtendedCount.finite(2):
            return None  # one boundary vertex needs at least two ends
        att_vol = volume_family(spec.attachment)
        scaling_vanishes = spec.scaling.terms_vanish()
        if att_vol.finite and scaling_vanishes:
            return "vanishing-subgraph-sequence", {
                "subgraphs": "per-site attachments",
                "attachment_volume": att_vol, "scaling_limit": 0}
        # The bounded-volume / vanishing-diameter variant is subsumed here:
        # attachment copies scale volume and diameter by the same factor,
        # so vanishing diameters with bounded volumes already imply
        # vanishing volumes.
        return None
    return None


# ---------------------------------------------------------------------------
# Deficiency indices
# ---------------------------------------------------------------------------

def deficiency_indices(spec: GraphFamilySpec) -> tuple[Deficiency, list]:
    summary = enumerate_ends(spec)
    c0 = summary.finite_volume
    traces = [_trace("deficiency-count", finite_volume_ends=c0),
              _trace("kirchhoff-lower-bound", finite_volume_ends=c0)]
    if not c0.is_finite:
        exact, condition = c0, ""
    else:
        exact, condition = None, "requires dom(H) within H1"
    return Deficiency(c0, c0, exact, condition), traces


# ---------------------------------------------------------------------------
# Kirchhoff self-adjointness (sufficient tests only)
# ---------------------------------------------------------------------------

def kirchhoff_selfadjoint_test(spec: GraphFamilySpec) -> tuple[str, RuleTrace]:
    """Yes when the star path metric completeness test or the radial
    volume criterion applies; No when finite volume ends force positive
    deficiency; Inconclusive otherwise."""
    if _star_metric_complete(spec):
        return YES, _trace("star-metric-complete", ray_star_sums="divergent")
    if isinstance(spec, RadialTree):
        vol = volume_family(spec)
        if not vol.finite:
            return YES, _trace("radial-volume-dichotomy", volume=vol)
    c0 = enumerate_ends(spec).finite_volume
    if not c0.is_zero:
        return NO, _trace("deficiency-positive", finite_volume_ends=c0)
    return INCONCLUSIVE, _trace("open-regime", finite_volume_ends=c0)


def _star_metric_complete(spec: GraphFamilySpec) -> bool:
    """Conservative completeness test: every symbolic ray class must have
    a divergent star-weight sum.  Under-claims are possible (the volume
    criterion catches radially symmetric trees it misses); over-claims
    are not."""
    if isinstance(spec, FiniteGraph):
        return True
    if isinstance(spec, HalfLinePath):
        return not spec.ell.series_sum().finite
    if isinstance(spec, FullLinePath):
        return not spec.ell_pos.series_sum().finite \
            and not spec.ell_neg.series_sum().finite
    if isinstance(spec, RadialTree):
        return not product_series(((spec.b, 0), (spec.ell, 0))).finite
    if isinstance(spec, SphereSymmetric):
        return not product_series(((spec.spheres, 1), (spec.ell, 0))).finite
    if isinstance(spec, ChainWithAttachments):
        if not _star_metric_complete(spec.attachment):
            return False
        chain_part = spec.ell.series_sum()
        if not chain_part.finite:
            return True
        root_m = _attachment_root_star_weight(spec.attachment)
        return not spec.scaling.series_sum().finite and root_m > 0.0
    raise UnsupportedFamily(f"no ray classes for {spec.variant}")


def _attachment_root_star_weight(template: GraphFamilySpec) -> float:
    if isinstance(template, (RadialTree, HalfLinePath)):
        return star_weight_family(template, 0)
    if isinstance(template, FullLinePath):
        return float(template.ell_pos.term(0)) + float(template.ell_neg.term(0))
    if isinstance(template, FiniteGraph):
        root = template.root_vertex()
        return math.fsum(float(length) for u, v, length in template.edges
                         if root in (u, v))
    raise UnsupportedFamily(f"{template.variant} cannot be attached")


# ---------------------------------------------------------------------------
# Full report
# ---------------------------------------------------------------------------

def classification_report(spec: GraphFamilySpec) -> ClassificationReport:
    summary = enumerate_ends(spec)
    status, status_trace = gaffney_status(spec)
    kirchhoff, kirchhoff_trace = kirchhoff_selfadjoint_test(spec)
    deficiency, deficiency_traces = deficiency_indices(spec)
    markovian = summary.finite_volume.is_zero
    markov_trace = _trace("markov-uniqueness",
                          finite_volume_ends=summary.finite_volume)
    trace = (status_trace, kirchhoff_trace, markov_trace, *deficiency_traces)
    return ClassificationReport(
        spec_name=spec.name or spec.variant,
        kirchhoff_selfadjoint=kirchhoff,
        gaffney_status=status,
        markovian_unique=markovian,
        deficiency=deficiency,
        end_summary=summary,
        rule_trace=trace,
    )
