"""Layer shooting for the radial problems and H1 deficiency elements.

On a layer where the step weight mu is constant, -(mu f')' = lam mu f
reduces to -f'' = lam f, so the pair (f, mu f') propagates across the
layer by an exact 2x2 transfer map in the basis of profiles.py; at a
breakpoint f and mu f' stay continuous while mu jumps.  For lam < 0 a
solution that is positive with positive flux is convex and increasing,
which makes the far-end behaviour easy to bound.

Deficiency elements (H1 solutions of (H - lam)f = 0, lam < 0) exist one
per finite volume end.  They are built per family:

* half line of finite total length: propagate from the origin with the
  Neumann start (1, 0) forced by the Kirchhoff condition at the
  degree-one vertex;
* full line: one element per summable side, growing toward that side's
  end; on a non-summable side only the decaying exponential is square
  integrable and is attached analytically;
* radially symmetric tree of finite volume: the radially symmetric
  channel from the root (Neumann start in the step weight).

Plans with infinitely many layers are truncated once the remaining
length is negligible; the neglected tail mass enters the norms through
exact closed-out corrections computed from the sequence grammar, so no
integrator error is introduced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import NoFiniteVolumeEnd, ShootingFailure, UnsupportedFamily
from ..graphspec import FullLinePath, GraphFamilySpec, HalfLinePath, RadialTree
from ..metric_graph import volume_family
from ..radial import RadialTreeData
from ..sequences import SequenceSpec, SeriesSum
from .profiles import basis_values, pair_grad, pair_l2

_REL_REMAINDER = 1e-12
_MAX_LAYERS = 200_000
_TAIL_RATIO_LIMIT = 0.999


@dataclass(frozen=True)
class Layer:
    """f = a*C + b*S on [x0, x0 + width) with constant weight mu."""

    x0: float
    width: float
    mu: float
    a: float
    b: float


class ArmSolution:
    """Piecewise solution along one arm (radial coordinate from the arm
    root), with either a truncated-plan closure or an analytic decaying
    exponential tail."""

    def __init__(self, lam, layers, tail=None, closure_l2=0.0, closure_grad=0.0,
                 end_estimate=0.0, boundary_value=0.0):
        self.lam = lam
        self.layers = layers
        self.tail = tail                  # (c, x_end): c * exp(-q (x - x_end)), mu = 1
        self.closure_l2 = closure_l2
        self.closure_grad = closure_grad
        self.end_estimate = end_estimate
        self.boundary_value = boundary_value

    def value(self, x: float) -> float:
        for layer in self.layers:
            if layer.x0 <= x < layer.x0 + layer.width or layer is self.layers[-1]:
                C, S, _, _ = basis_values(self.lam, x - layer.x0)
                return layer.a * C + layer.b * S
        if self.tail is not None:
            c, x_end = self.tail
            return c * math.exp(-math.sqrt(-self.lam) * (x - x_end))
        raise ValueError(f"x = {x} outside the computed domain")

    def end_value(self) -> float:
        return self.end_estimate

    def l2_sq(self) -> float:
        total = math.fsum(layer.mu * pair_l2(self.lam, layer.width,
                                             layer.a, layer.b, layer.a, layer.b)
                          for layer in self.layers) + self.closure_l2
        if self.tail is not None:
            c, _ = self.tail
            total += c * c / (2.0 * math.sqrt(-self.lam))
        return total

    def grad_sq(self) -> float:
        total = math.fsum(layer.mu * pair_grad(self.lam, layer.width,
                                               layer.a, layer.b, layer.a, layer.b)
                          for layer in self.layers) + self.closure_grad
        if self.tail is not None:
            c, _ = self.tail
            q = math.sqrt(-self.lam)
            total += q * c * c / 2.0
        return total

    def pair(self, other: "ArmSolution") -> tuple[float, float]:
        """(L2, gradient) inner products with a solution on the same grid."""
        l2 = grad = 0.0
        for mine, theirs in zip(self.layers, other.layers):
            l2 += mine.mu * pair_l2(self.lam, mine.width, mine.a, mine.b,
                                    theirs.a, theirs.b)
            grad += mine.mu * pair_grad(self.lam, mine.width, mine.a, mine.b,
                                        theirs.a, theirs.b)
        if self.tail is not None and other.tail is not None:
            q = math.sqrt(-self.lam)
            c = self.tail[0] * other.tail[0]
            l2 += c / (2.0 * q)
            grad += q * c / 2.0
        return l2, grad

    def sup_norm(self, samples_per_layer: int = 65) -> float:
        best = 0.0
        for layer in self.layers:
            for i in range(samples_per_layer):
                x = layer.x0 + layer.width * i / (samples_per_layer - 1)
                C, S, _, _ = basis_values(self.lam, x - layer.x0)
                best = max(best, abs(layer.a * C + layer.b * S))
        if self.tail is not None:
            best = max(best, abs(self.tail[0]))
        return max(best, abs(self.end_estimate))

    def scaled(self, factor: float) -> "ArmSolution":
        layers = [Layer(l.x0, l.width, l.mu, l.a * factor, l.b * factor)
                  for l in self.layers]
        tail = None if self.tail is None else (self.tail[0] * factor, self.tail[1])
        return ArmSolution(self.lam, layers, tail,
                           self.closure_l2 * factor ** 2,
                           self.closure_grad * factor ** 2,
                           self.end_estimate * factor,
                           self.boundary_value * factor)

    def layer_energies(self) -> list:
        return [layer.mu * pair_grad(self.lam, layer.width,
                                     layer.a, layer.b, layer.a, layer.b)
                for layer in self.layers]


def tail_energy_converges(arm: ArmSolution, ratio_limit: float = _TAIL_RATIO_LIMIT) -> bool:
    """Ratio test on per-layer energies: partial sums of the energy of an
    admissible mode converge, so the trailing ratios sit below 1.

    Arms closed out exactly (zero truncation corrections) have no omitted
    tail to test."""
    if arm.closure_l2 == 0.0 and arm.closure_grad == 0.0:
        return True
    energies = [e for e in arm.layer_energies() if e > 0.0]
    if len(energies) < 4:
        return True
    ratios = [b / a for a, b in zip(energies, energies[1:])]
    window = ratios[max(0, len(ratios) - 5):]
    return all(r < ratio_limit for r in window)


# ---------------------------------------------------------------------------
# Segment plans and propagation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SegmentPlan:
    """Layer widths and weights from some start index, plus exact series
    data about what a truncation leaves out.  uniform_weight marks plans
    whose weight never changes: their remainder can be closed out by one
    exact synthetic layer (no interfaces left to cross)."""

    width_of: object            # n -> float
    weight_of: object           # n -> float
    start: int
    total_length: SeriesSum     # sum of widths from start
    tail_weighted: object       # n -> SeriesSum: sum_{k>=n} mu_k ell_k
    tail_inverse: object        # n -> SeriesSum: sum_{k>=n} ell_k / mu_k
    uniform_weight: bool = False


def _radial_plan(data: RadialTreeData, start: int) -> SegmentPlan:
    from ..radial import kernel_energy
    from ..sequences import weighted_volume_series

    scale = float(data.scale)

    def rescale(s: SeriesSum) -> SeriesSum:
        if not s.finite or scale == 1.0:
            return s
        return SeriesSum.finite_sum(s.value_float * scale, s.error_bound * scale)

    def tail_weighted(n):
        return rescale(weighted_volume_series(data.spec.b, data.spec.ell,
                                              start=n, cum=data._cum))

    return SegmentPlan(
        width_of=lambda n: float(data.ell(n)),
        weight_of=lambda n: float(data.mu(n)),
        start=start,
        total_length=rescale(data.spec.ell.tail_sum(start)),
        tail_weighted=tail_weighted,
        tail_inverse=lambda n: kernel_energy(data, n),
    )


def _line_plan(ell: SequenceSpec, scale: float = 1.0) -> SegmentPlan:
    def tail(n):
        out = ell.tail_sum(n)
        if not out.finite:
            return SeriesSum.DIVERGENT
        return SeriesSum.finite_sum(out.value_float * scale, out.error_bound * scale)

    return SegmentPlan(
        width_of=lambda n: float(ell.term(n)) * scale,
        weight_of=lambda n: 1.0,
        start=0,
        total_length=tail(0),
        tail_weighted=tail,
        tail_inverse=tail,
        uniform_weight=True,
    )


def propagate(plan: SegmentPlan, lam: float, f0: float, flux0: float) -> ArmSolution:
    """Propagate (f, mu f') across the plan from its start; the plan must
    have finite total length.  Returns the arm with closed-out tail
    corrections for the truncated remainder."""
    if not plan.total_length.finite:
        raise ShootingFailure("propagation needs a finite total length")
    total = plan.total_length.value_float
    x = 0.0  # local coordinate; layers record absolute offsets from arm root
    f, flux = f0, flux0
    layers = []
    n = plan.start
    boundary_value = f0
    # a constant-weight remainder has no interfaces left, so one synthetic
    # closing layer finishes the arm exactly (slowly summable widths would
    # otherwise need astronomically many layers)
    uniform_cap = plan.start + 64 if plan.uniform_weight else None
    while n < plan.start + _MAX_LAYERS:
        if uniform_cap is not None and n >= uniform_cap:
            break
        w = plan.width_of(n)
        mu = plan.weight_of(n)
        a, b_coef = f, _slope_coefficient(lam, flux / mu)
        layers.append(Layer(x, w, mu, a, b_coef))
        C, S, dC, dS = basis_values(lam, w)
        f = a * C + b_coef * S
        fprime = a * dC + b_coef * dS
        flux = mu * fprime
        x += w
        n += 1
        remaining = total - x
        if remaining <= _REL_REMAINDER * max(total, 1.0):
            break
        # secondary stop: the function is flat on the remainder, so the
        # closed-out corrections below are already machine-exact
        if abs(fprime) * remaining <= 1e-13 * max(abs(f), 1e-300) \
                and abs(lam) * remaining * remaining <= 1e-13:
            break
    else:
        raise ShootingFailure("layer cap reached before the remainder vanished")

    remaining = total - x
    if plan.uniform_weight and remaining > 0.0:
        mu = plan.weight_of(n)
        a, b_coef = f, _slope_coefficient(lam, flux / mu)
        layers.append(Layer(x, remaining, mu, a, b_coef))
        C, S, dC, dS = basis_values(lam, remaining)
        f = a * C + b_coef * S
        flux = mu * (a * dC + b_coef * dS)
        x = total
        return ArmSolution(lam, layers, None, 0.0, 0.0, f, boundary_value)

    tail_w = plan.tail_weighted(n)
    tail_inv = plan.tail_inverse(n)
    closure_l2 = f * f * tail_w.value_float if tail_w.finite else 0.0
    closure_grad = flux * flux * tail_inv.value_float if tail_inv.finite else 0.0
    end_estimate = f + (flux / plan.weight_of(n)) * max(total - x, 0.0)
    arm = ArmSolution(lam, layers, None, closure_l2, closure_grad,
                      end_estimate, boundary_value)
    return arm


def _slope_coefficient(lam: float, fprime: float) -> float:
    if lam > 0.0:
        return fprime / math.sqrt(lam)
    if lam == 0.0:
        return fprime
    return fprime / math.sqrt(-lam)


# ---------------------------------------------------------------------------
# Deficiency elements
# ---------------------------------------------------------------------------

class DeficiencyElement:
    """H1 solution of (H - lam) f = 0, stored as one arm per ray
    direction of the family, H1-normalised.  measure_scale carries a
    constant factor between the arm measure and the graph measure (e.g.
    branch-pair multiplicity)."""

    def __init__(self, spec_variant, lam, arms, end_id, measure_scale=1.0):
        self.spec_variant = spec_variant
        self.lam = lam
        self.arms = arms          # dict label -> ArmSolution
        self.end_id = end_id
        self.measure_scale = measure_scale

    def l2_sq(self) -> float:
        return self.measure_scale * math.fsum(arm.l2_sq() for arm in self.arms.values())

    def grad_sq(self) -> float:
        return self.measure_scale * math.fsum(arm.grad_sq() for arm in self.arms.values())

    def h1_sq(self) -> float:
        return self.l2_sq() + self.grad_sq()

    def inner_h1(self, other: "DeficiencyElement") -> float:
        total = 0.0
        for label, arm in self.arms.items():
            l2, grad = arm.pair(other.arms[label])
            total += l2 + grad
        return math.sqrt(self.measure_scale * other.measure_scale) * total

    def end_value(self) -> float:
        arms = list(self.arms.values())
        return arms[0].end_estimate if len(arms) == 1 else \
            max(arm.end_estimate for arm in arms)

    def normalised(self) -> "DeficiencyElement":
        scale = 1.0 / math.sqrt(self.h1_sq())
        return DeficiencyElement(self.spec_variant, self.lam,
                                 {k: arm.scaled(scale) for k, arm in self.arms.items()},
                                 self.end_id, self.measure_scale)


def find_deficiency_elements(spec: GraphFamilySpec, lam: float = -1.0) -> list:
    """One H1 element per finite volume end the construction can reach:
    both line families exactly realise the end count; the radially
    symmetric tree contributes its symmetric channel."""
    if lam > 0.0:
        raise ValueError("deficiency analysis needs lam <= 0")
    out = []
    if isinstance(spec, HalfLinePath):
        if spec.ell.series_sum().finite:
            arm = propagate(_line_plan(spec.ell), lam, 1.0, 0.0)
            out.append(_checked(spec, lam, {"axis": arm}, "axis"))
        return out
    if isinstance(spec, FullLinePath):
        q = math.sqrt(-lam) if lam < 0.0 else 0.0
        sides = {"positive": spec.ell_pos, "negative": spec.ell_neg}
        summable = {k: v.series_sum().finite for k, v in sides.items()}
        if lam == 0.0:
            # degenerate input: the kernel is spanned by the constants
            if all(summable.values()):
                arms = {side: propagate(_line_plan(ell), 0.0, 1.0, 0.0)
                        for side, ell in sides.items()}
                out.append(_checked(spec, lam, arms, "constants"))
            return out
        for grow_side in ("positive", "negative"):
            if not summable[grow_side]:
                continue
            arms = {}
            for side, ell in sides.items():
                sign = 1.0 if side == grow_side else -1.0
                if summable[side]:
                    arms[side] = propagate(_line_plan(ell), lam, 1.0, sign * q)
                else:
                    # only the decaying exponential is square integrable
                    arms[side] = ArmSolution(lam, [], tail=(1.0, 0.0),
                                             end_estimate=0.0, boundary_value=1.0)
            out.append(_checked(spec, lam, arms, grow_side))
        return out
    if isinstance(spec, RadialTree):
        if volume_family(spec).finite:
            data = RadialTreeData(spec)
            arm = propagate(_radial_plan(data, 0), lam, 1.0, 0.0)
            out.append(_checked(spec, lam, {"radial": arm}, "radial-symmetric-channel"))
        return out
    raise UnsupportedFamily(f"no deficiency construction for {spec.variant}")


def _checked(spec, lam, arms, end_id) -> DeficiencyElement:
    for label, arm in arms.items():
        if not tail_energy_converges(arm):
            raise ShootingFailure(f"tail energies fail the ratio test on {label}")
    return DeficiencyElement(spec.variant, lam, arms, end_id).normalised()


def deficiency_element(spec: GraphFamilySpec, lam: float = -1.0,
                       channel: str = "auto") -> DeficiencyElement:
    """A single H1 deficiency element; NoFiniteVolumeEnd when the family
    has none (the solution space is trivial).

    For a radially symmetric tree the channel may be ("dirichlet", n):
    the n-th Dirichlet channel, realised on the graph as an alternating
    pair of branch copies below a generation-n vertex (hence measure
    scale 2 / mu_n relative to the step-weight integrals)."""
    if isinstance(spec, RadialTree) and isinstance(channel, tuple) \
            and channel[0] == "dirichlet":
        if not volume_family(spec).finite:
            raise NoFiniteVolumeEnd("no finite volume ends: kernel meets H1 trivially")
        data = RadialTreeData(spec)
        n = channel[1]
        arm = dirichlet_channel_element(data, lam, n)
        element = DeficiencyElement(spec.variant, lam, {"branch-pair": arm},
                                    f"dirichlet-{n}",
                                    measure_scale=2.0 / float(data.mu(n)))
        return element.normalised()
    elements = find_deficiency_elements(spec, lam)
    if not elements:
        raise NoFiniteVolumeEnd("no finite volume ends: kernel meets H1 trivially")
    if channel == "auto":
        return elements[0]
    for element in elements:
        if element.end_id == channel:
            return element
    raise NoFiniteVolumeEnd(f"no element for channel {channel!r}")


def dirichlet_channel_element(data: RadialTreeData, lam: float, n: int) -> ArmSolution:
    """The n-th Dirichlet channel solution on [t_n, L): f(t_n) = 0 with
    unit initial slope, in the step weight."""
    plan = _radial_plan(data, n)
    return propagate(plan, lam, 0.0, float(data.mu(n)))


# ---------------------------------------------------------------------------
# Gram analysis
# ---------------------------------------------------------------------------

def gram_matrix(elements) -> np.ndarray:
    """H1 Gram matrix of H1-normalised elements."""
    k = len(elements)
    gram = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            gram[i, j] = gram[j, i] = elements[i].inner_h1(elements[j])
    return gram


def gram_smallest_eigenvalue(elements) -> float:
    if not elements:
        return 0.0
    return float(np.linalg.eigvalsh(gram_matrix(elements))[0])
