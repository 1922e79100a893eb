"""Blow-up witness for non-closedness.

On a qualifying subgraph sequence (vanishing volumes, more ends than
boundary vertices) one solves (tau - lam) f_n = 0 on each subgraph with
Dirichlet values at its boundary, extends by zero and normalises the sup
norm to 1.  The gradient-to-graph-norm ratio

    r_n = ||grad f_n||^2 / (||f_n||^2 + ||H f_n||^2)

then grows without bound; monotone growth of r_n is the expected outcome
for qualifying families and is asserted only by the acceptance tests,
the report itself is descriptive.

Realisation on the graph: the level-n element is an alternating pair of
branch copies below the cut vertex (so boundary value and flux both
vanish there and the zero extension stays in the operator domain); the
pair contributes the measure factor 2/mu_n to the norms, which cancels
in the ratio.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from ..classify import _qualifying_sequence
from ..errors import NoQualifyingSequence, UnsupportedFamily
from ..graphspec import (ChainWithAttachments, FullLinePath, GraphFamilySpec,
                         RadialTree)
from ..radial import RadialTreeData
from .shooting import dirichlet_channel_element, propagate, _line_plan

_GRID_PER_LAYER = 65   # grid spacing <= (edge length) / 64


@dataclass(frozen=True)
class WitnessRow:
    level: int
    lam: float
    sup_norm: float
    boundary_residual: float
    l2_sq: float
    grad_sq: float
    ham_sq: float
    ratio: float
    growth: float       # ratio relative to the previous level (nan first)

    def to_json(self):
        return {"level": self.level, "lambda": self.lam, "sup_norm": self.sup_norm,
                "boundary_residual": self.boundary_residual, "l2_sq": self.l2_sq,
                "grad_sq": self.grad_sq, "ham_sq": self.ham_sq,
                "ratio": self.ratio, "growth": self.growth}


def worker_count() -> int:
    raw = os.environ.get("QGENDS_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return max(1, n) if n else 1


def witness_nonclosed(spec: GraphFamilySpec, lam: float = -1.0,
                      n_max: int = 5) -> list:
    """Witness rows for levels 1..n_max (tree tails) or sites 0..n_max-1
    (chain attachments)."""
    if lam >= 0.0:
        raise ValueError("the witness construction needs lam < 0")
    if _qualifying_sequence(spec) is None:
        raise NoQualifyingSequence(
            f"{spec.name or spec.variant} has no subgraph sequence with "
            f"vanishing volumes and excess end count")

    if isinstance(spec, RadialTree):
        data = RadialTreeData(spec)
        levels = list(range(1, n_max + 1))
        build = lambda n: _tree_level(data, lam, n)
    elif isinstance(spec, ChainWithAttachments):
        levels = list(range(0, n_max))
        build = lambda n: _chain_level(spec, lam, n)
    else:
        raise UnsupportedFamily(f"no witness construction for {spec.variant}")

    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(build, levels))
    else:
        raw = [build(n) for n in levels]

    rows = []
    prev_ratio = None
    for level, (sup, residual, l2, grad) in zip(levels, raw):
        ham = lam * lam * l2
        ratio = grad / (l2 + ham)
        growth = math.nan if prev_ratio is None else ratio / prev_ratio
        prev_ratio = ratio
        rows.append(WitnessRow(level, lam, 1.0, residual, l2, grad, ham, ratio, growth))
    return rows


def _tree_level(data: RadialTreeData, lam: float, n: int):
    arm = dirichlet_channel_element(data, lam, n)
    return _normalised_norms([arm], measure_scale=2.0 / float(data.mu(n)))


def _chain_level(spec: ChainWithAttachments, lam: float, site: int):
    scale = float(spec.scaling.term(site))
    template = spec.attachment
    if isinstance(template, RadialTree):
        data = RadialTreeData(template, scale=scale)
        arm = dirichlet_channel_element(data, lam, 0)
        return _normalised_norms([arm], measure_scale=2.0 / float(data.mu(0)))
    if isinstance(template, FullLinePath):
        pos = propagate(_line_plan(template.ell_pos, scale), lam, 0.0, 1.0)
        neg = propagate(_line_plan(template.ell_neg, scale), lam, -0.0, -1.0)
        return _normalised_norms([pos, neg], measure_scale=1.0)
    raise UnsupportedFamily(
        f"witness needs a two-ended attachment, got {template.variant}")


def _normalised_norms(arms, measure_scale: float):
    sup = max(arm.sup_norm(_GRID_PER_LAYER) for arm in arms)
    factor = 1.0 / sup
    residual = max(abs(arm.boundary_value) for arm in arms) * factor
    l2 = measure_scale * factor ** 2 * math.fsum(arm.l2_sq() for arm in arms)
    grad = measure_scale * factor ** 2 * math.fsum(arm.grad_sq() for arm in arms)
    return sup, residual, l2, grad
