"""Sturm-Liouville reduction of radially symmetric trees.

A radially symmetric tree is, up to unitary equivalence, a direct sum of
half-line operators -(1/mu)(mu f')' with the step weight
mu(s) = mu_n on [t_n, t_{n+1}), where mu_n is the product of branching
numbers up to generation n and t_n the distance of generation n from the
root.  The summand acting on [t_n, L) with a Dirichlet condition at t_n
enters with multiplicity mu_n - mu_{n-1} (convention mu_{-1} = 1, so the
n = 0 channel is simple); its kernel is spanned by the piecewise linear
function g_n that integrates 1/mu from t_n.

Kernels are exact piecewise closed forms, never quadrature-backed, so
identity tests carry no integrator error.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import InfiniteVolumeRegime, NoLimit, OutOfDomain
from .graphspec import RadialTree
from .metric_graph import volume_family
from .sequences import CumulativeProduct, SeriesSum, inverse_weight_series


class RadialTreeData:
    """Cached accessors for mu_n, t_n, the step weight and the derived
    series of a radially symmetric tree; exact when the spec is exact."""

    def __init__(self, spec: RadialTree, scale=1):
        self.spec = spec
        self.scale = Fraction(scale) if isinstance(scale, int) else scale
        self._cum = CumulativeProduct(spec.b)
        self._t = [Fraction(0)]  # mixed arithmetic degrades to float as needed
        self.total_length = _scale_series(spec.ell.series_sum(), self.scale)
        self.volume = _scale_series(volume_family(spec), self.scale)

    # -- sequences ----------------------------------------------------------

    def mu(self, n: int) -> Fraction:
        """Product of branching numbers up to generation n; mu(-1) = 1."""
        return self._cum.mu(n)

    def b(self, n: int) -> int:
        return int(self.spec.b.term(n))

    def ell(self, n: int):
        return self.spec.ell.term(n) * self.scale

    def t(self, n: int):
        """Distance of generation n from the root; t(0) = 0."""
        while len(self._t) <= n:
            k = len(self._t) - 1
            self._t.append(self._t[-1] + self.ell(k))
        return self._t[n]

    @property
    def length_is_finite(self) -> bool:
        return self.total_length.finite

    def multiplicity(self, n: int) -> int:
        """Multiplicity of the n-th Dirichlet channel in the
        orthogonal decomposition: mu_n - mu_{n-1}."""
        if n < 0:
            raise ValueError("channel index must be >= 0")
        return int(self.mu(n) - self.mu(n - 1))

    # -- step weight ---------------------------------------------------------

    def layer_index(self, s: float) -> int:
        """n with t_n <= s < t_{n+1}."""
        s = float(s)
        if s < 0.0:
            raise OutOfDomain(f"s = {s} is negative")
        if self.length_is_finite and s >= self.total_length.value_float:
            raise OutOfDomain(f"s = {s} is beyond the total length "
                              f"{self.total_length.value_float}")
        n = 0
        while float(self.t(n + 1)) <= s:
            n += 1
        return n

    def weight_at(self, s: float) -> Fraction:
        """mu(s): the step weight at the point s in [0, L)."""
        return self.mu(self.layer_index(s))

    def step_weight(self, layers: int) -> "StepWeight":
        return StepWeight(tuple(self.t(n) for n in range(layers + 1)),
                          tuple(self.mu(n) for n in range(layers)))


@dataclass(frozen=True)
class StepWeight:
    """Finitely many layers of the step weight, for export and plots."""

    breakpoints: tuple
    values: tuple

    def jump_factor(self, n: int) -> Fraction:
        return Fraction(self.values[n]) / Fraction(self.values[n - 1])

    def to_json(self):
        return {"breakpoints": [float(x) for x in self.breakpoints],
                "values": [int(v) for v in self.values]}


def build(spec: RadialTree) -> RadialTreeData:
    return RadialTreeData(spec)


def weight_eval(data: RadialTreeData, s: float) -> Fraction:
    return data.weight_at(s)


# ---------------------------------------------------------------------------
# Kernel functions
# ---------------------------------------------------------------------------

class KernelFunction:
    """g_n(x): integral of 1/mu from t_n to x, piecewise linear with slope
    1/mu_j on [t_j, t_{j+1})."""

    def __init__(self, data: RadialTreeData, n: int):
        self.data = data
        self.start = n
        self._offsets = [Fraction(0)]
        self._energy = None

    def _offset(self, j: int):
        """g_n(t_j) for j >= start, exact."""
        while len(self._offsets) <= j - self.start:
            k = self.start + len(self._offsets) - 1
            self._offsets.append(self._offsets[-1] + self.data.ell(k) / self.data.mu(k))
        return self._offsets[j - self.start]

    def value(self, x: float) -> float:
        j = self.data.layer_index(x)
        if j < self.start or float(x) < float(self.data.t(self.start)):
            raise OutOfDomain(f"x = {x} is below t_{self.start}")
        return float(self._offset(j)) + (float(x) - float(self.data.t(j))) / float(self.data.mu(j))

    def value_at_breakpoint(self, j: int):
        """Exact g_n(t_j)."""
        if j < self.start:
            raise OutOfDomain(f"t_{j} is below t_{self.start}")
        return self._offset(j)

    def slope(self, j: int):
        return 1 / self.data.mu(j)

    def energy(self) -> SeriesSum:
        if self._energy is None:
            self._energy = kernel_energy(self.data, self.start)
        return self._energy

    def end_value(self) -> float:
        """Limit of g_n at the far end; equals the energy integral of g_n
        (both are the integral of 1/mu over [t_n, L))."""
        return self.energy().value_float


def kernel_g(data: RadialTreeData, n: int) -> KernelFunction:
    """The n-th kernel function; only asserted meaningful in the finite
    volume regime."""
    if n < 0:
        raise ValueError("kernel index must be >= 0")
    if not data.volume.finite:
        raise InfiniteVolumeRegime(
            "kernel analysis is only asserted for finite total volume")
    return KernelFunction(data, n)


def kernel_energy(data: RadialTreeData, n: int) -> SeriesSum:
    """Energy of g_n: the integral of 1/mu over [t_n, L), i.e. the sum of
    ell_k / mu_k for k >= n (exact via the sequence grammar)."""
    out = inverse_weight_series(data.spec.b, data.spec.ell, start=n, cum=data._cum)
    return _scale_series(out, data.scale)


def decomposition_multiplicities(data: RadialTreeData, n: int) -> int:
    return data.multiplicity(n)


def end_value(data: RadialTreeData, handle) -> float:
    """Value of a radial function at the ends (the limit toward L, shared
    by all ends by radial symmetry).

    Accepts a constant, any object with an end_value() method (kernel
    functions, shooting solutions), or a plain callable that is sampled
    along the approach to L.
    """
    if isinstance(handle, (int, float, Fraction)):
        return float(handle)
    if hasattr(handle, "end_value"):
        return float(handle.end_value())
    if not data.length_is_finite:
        raise NoLimit("cannot sample a bare callable toward an infinite length")
    L = data.total_length.value_float
    samples = [handle(L * (1.0 - 2.0 ** (-j))) for j in range(8, 48)]
    deltas = [abs(b - a) for a, b in zip(samples, samples[1:])]
    if deltas[-1] > 1e-9 * max(1.0, abs(samples[-1])):
        raise NoLimit("handle does not settle toward the far end")
    return samples[-1]


def _scale_series(s: SeriesSum, c) -> SeriesSum:
    if not s.finite:
        return SeriesSum.DIVERGENT
    if float(c) == 1.0:
        return s
    if isinstance(s.value, Fraction) and isinstance(c, (int, Fraction)):
        return SeriesSum.finite_sum(s.value * c, s.error_bound * abs(float(c)))
    return SeriesSum.finite_sum(float(s.value) * float(c),
                                s.error_bound * abs(float(c)))
