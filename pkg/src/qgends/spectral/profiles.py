"""Edgewise solutions of -f'' = lam f and their closed-form integrals.

Basis convention: f(x) = a*C(x) + b*S(x) with
    lam > 0:  C = cos(k x),  S = sin(k x),   k = sqrt(lam)
    lam = 0:  C = 1,         S = x
    lam < 0:  C = cosh(q x), S = sinh(q x),  q = sqrt(-lam)

All L2 quantities are evaluated from closed antiderivatives; the
near-degenerate regime |k| * w -> 0 switches to series forms so thin
layers lose no precision to cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import ZeroFunction

_SERIES_CUT = 1e-3


def basis_values(lam: float, x: float):
    """(C, S, C', S') at x."""
    if lam > 0.0:
        k = math.sqrt(lam)
        return (math.cos(k * x), math.sin(k * x),
                -k * math.sin(k * x), k * math.cos(k * x))
    if lam == 0.0:
        return 1.0, x, 0.0, 1.0
    q = math.sqrt(-lam)
    return (math.cosh(q * x), math.sinh(q * x),
            q * math.sinh(q * x), q * math.cosh(q * x))


def _int_ss_trig(k: float, w: float) -> float:
    # integral of sin^2(kx) over [0, w]
    if k * w < _SERIES_CUT:
        z = (k * w) ** 2
        return (k * k * w ** 3 / 3.0) * (1.0 - z / 5.0 + 2.0 * z * z / 105.0)
    return w / 2.0 - math.sin(2.0 * k * w) / (4.0 * k)


def _int_ss_hyp(q: float, w: float) -> float:
    # integral of sinh^2(qx) over [0, w]
    if q * w < _SERIES_CUT:
        z = (q * w) ** 2
        return (q * q * w ** 3 / 3.0) * (1.0 + z / 5.0 + 2.0 * z * z / 105.0)
    return math.sinh(2.0 * q * w) / (4.0 * q) - w / 2.0


def basis_integrals(lam: float, w: float):
    """(ICC, ICS, ISS, IdCdC, IdCdS, IdSdS): integrals over [0, w] of the
    products of basis functions and of their derivatives."""
    if lam > 0.0:
        k = math.sqrt(lam)
        iss = _int_ss_trig(k, w)
        icc = w - iss
        ics = math.sin(k * w) ** 2 / (2.0 * k)
        return icc, ics, iss, lam * iss, -lam * ics, lam * icc
    if lam == 0.0:
        return w, w * w / 2.0, w ** 3 / 3.0, 0.0, 0.0, w
    q = math.sqrt(-lam)
    iss = _int_ss_hyp(q, w)
    icc = w + iss
    ics = math.sinh(q * w) ** 2 / (2.0 * q)
    return icc, ics, iss, -lam * iss, -lam * ics, -lam * icc


def pair_l2(lam, w, a1, b1, a2, b2) -> float:
    """Integral over [0, w] of f1 * f2 for two solutions in the basis."""
    icc, ics, iss, _, _, _ = basis_integrals(lam, w)
    return a1 * a2 * icc + (a1 * b2 + b1 * a2) * ics + b1 * b2 * iss


def pair_grad(lam, w, a1, b1, a2, b2) -> float:
    """Integral over [0, w] of f1' * f2'."""
    _, _, _, idcc, idcs, idss = basis_integrals(lam, w)
    return a1 * a2 * idcc + (a1 * b2 + b1 * a2) * idcs + b1 * b2 * idss


@dataclass(frozen=True)
class EdgeSolution:
    """A solution a*C + b*S on one edge, parametrised from the initial
    vertex u (x = 0) to the terminal vertex v (x = length)."""

    u: str
    v: str
    length: float
    lam: float
    a: float
    b: float

    def value(self, x: float) -> float:
        C, S, _, _ = basis_values(self.lam, x)
        return self.a * C + self.b * S

    def derivative(self, x: float) -> float:
        _, _, dC, dS = basis_values(self.lam, x)
        return self.a * dC + self.b * dS

    def trace(self, vertex: str) -> float:
        if vertex == self.u:
            return self.value(0.0)
        if vertex == self.v:
            return self.value(self.length)
        raise ValueError(f"{vertex} is not an endpoint of this edge")

    def outward_derivative(self, vertex: str) -> float:
        """Derivative pointing from the vertex into the edge."""
        if vertex == self.u:
            return self.derivative(0.0)
        if vertex == self.v:
            return -self.derivative(self.length)
        raise ValueError(f"{vertex} is not an endpoint of this edge")

    def l2_sq(self) -> float:
        return pair_l2(self.lam, self.length, self.a, self.b, self.a, self.b)

    def grad_sq(self) -> float:
        return pair_grad(self.lam, self.length, self.a, self.b, self.a, self.b)

    def laplacian_sq(self) -> float:
        # -f'' = lam f edgewise, exactly
        return self.lam * self.lam * self.l2_sq()


def sobolev_ratio(edge_solutions) -> float:
    """||grad f||^2 / (||f||^2 + ||H f||^2) for an edgewise solution
    collection; 0 for locally constant f, ZeroFunction if everything
    vanishes."""
    l2 = math.fsum(e.l2_sq() for e in edge_solutions)
    grad = math.fsum(e.grad_sq() for e in edge_solutions)
    ham = math.fsum(e.laplacian_sq() for e in edge_solutions)
    if l2 == 0.0 and grad == 0.0 and ham == 0.0:
        raise ZeroFunction("all norms vanish")
    if grad == 0.0:
        return 0.0
    return grad / (l2 + ham)
