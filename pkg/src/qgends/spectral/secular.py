"""Secular-equation eigensolver for finite metric graphs.

Each edge carries two unknown coefficients in the basis of profiles.py;
vertex conditions (Kirchhoff continuity plus flux, or Dirichlet traces)
assemble a square condition matrix M(k) whose singular values vanish at
the eigenvalues lam = k^2.  Roots come from a sign scan of det M(k)
refined by bisection, plus a minimum search of the smallest singular
value (which catches even-multiplicity roots where the determinant does
not change sign).  Multiplicity is the count of near-zero singular
values at the refined root.

Flux rows are divided by k so that the assembly stays well scaled down
to k -> 0; the zero eigenvalue itself is decided by a separate assembly
in the basis {1, x}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from ..errors import RootScanTooCoarse, SingularAssembly
from ..metric_graph import MetricGraph
from .profiles import EdgeSolution

KIRCHHOFF = "kirchhoff"
DIRICHLET = "dirichlet"

_SV_TOL = 1e-8           # multiplicity threshold on normalised singular values
_ACCEPT_TOL = 1e-7       # acceptance threshold for minima-path roots
_K_REFINE_TOL = 1e-12


@dataclass(frozen=True)
class Eigenvalue:
    k: float
    lam: float
    multiplicity: int


def resolve_conditions(g: MetricGraph, bc=None, boundary_default=KIRCHHOFF) -> dict:
    """Per-vertex condition map: explicit entries win, boundary vertices
    fall back to boundary_default, interior vertices to Kirchhoff."""
    bc = dict(bc or {})
    out = {}
    for v in g.vertex_ids:
        if v in bc:
            cond = bc[v]
        elif g.is_boundary(v):
            cond = boundary_default
        else:
            cond = KIRCHHOFF
        if cond not in (KIRCHHOFF, DIRICHLET):
            raise ValueError(f"unknown condition {cond!r} at {v}")
        out[v] = cond
    return out


def _incidences(g: MetricGraph):
    """vertex -> list of (edge index, at_terminal_end: bool)."""
    incid = {v: [] for v in g.vertex_ids}
    for idx, (u, v, _) in enumerate(g.edges):
        incid[u].append((idx, False))
        incid[v].append((idx, True))
    return incid


def condition_matrix(g: MetricGraph, conditions: dict, k: float) -> np.ndarray:
    """Square assembly at lam = k^2 (k > 0), flux rows scaled by 1/k."""
    n = 2 * g.edge_count
    rows = []
    incid = _incidences(g)

    def trace_coeffs(idx, terminal):
        length = g.edges[idx][2]
        if terminal:
            return math.cos(k * length), math.sin(k * length)
        return 1.0, 0.0

    def flux_coeffs(idx, terminal):
        # outward derivative divided by k
        length = g.edges[idx][2]
        if terminal:
            return math.sin(k * length), -math.cos(k * length)
        return 0.0, 1.0

    for v in g.vertex_ids:
        entries = incid[v]
        if conditions[v] == DIRICHLET:
            for idx, terminal in entries:
                row = np.zeros(n)
                row[2 * idx], row[2 * idx + 1] = trace_coeffs(idx, terminal)
                rows.append(row)
        else:
            ref_idx, ref_term = entries[0]
            for idx, terminal in entries[1:]:
                row = np.zeros(n)
                row[2 * idx], row[2 * idx + 1] = trace_coeffs(idx, terminal)
                ca, cb = trace_coeffs(ref_idx, ref_term)
                row[2 * ref_idx] -= ca
                row[2 * ref_idx + 1] -= cb
                rows.append(row)
            row = np.zeros(n)
            for idx, terminal in entries:
                ca, cb = flux_coeffs(idx, terminal)
                row[2 * idx] += ca
                row[2 * idx + 1] += cb
            rows.append(row)

    matrix = np.array(rows)
    if matrix.shape != (n, n):
        raise SingularAssembly(f"assembly is {matrix.shape}, expected square {n}")
    return matrix


def condition_matrix_zero(g: MetricGraph, conditions: dict) -> np.ndarray:
    """Assembly at lam = 0 in the basis {1, x}."""
    n = 2 * g.edge_count
    rows = []
    incid = _incidences(g)
    for v in g.vertex_ids:
        entries = incid[v]
        if conditions[v] == DIRICHLET:
            for idx, terminal in entries:
                row = np.zeros(n)
                length = g.edges[idx][2]
                row[2 * idx] = 1.0
                row[2 * idx + 1] = length if terminal else 0.0
                rows.append(row)
        else:
            ref_idx, ref_term = entries[0]
            for idx, terminal in entries[1:]:
                row = np.zeros(n)
                row[2 * idx] = 1.0
                row[2 * idx + 1] = g.edges[idx][2] if terminal else 0.0
                row[2 * ref_idx] -= 1.0
                row[2 * ref_idx + 1] -= g.edges[ref_idx][2] if ref_term else 0.0
                rows.append(row)
            row = np.zeros(n)
            for idx, terminal in entries:
                row[2 * idx + 1] += -1.0 if terminal else 1.0
            rows.append(row)
    return np.array(rows)


def _nullity(matrix: np.ndarray, sv_tol: float = _SV_TOL) -> int:
    sv = np.linalg.svd(matrix, compute_uv=False)
    scale = sv[0] if sv[0] > 0.0 else 1.0
    return int(np.sum(sv / scale < sv_tol))


def _smallest_sv(matrix: np.ndarray) -> float:
    sv = np.linalg.svd(matrix, compute_uv=False)
    scale = sv[0] if sv[0] > 0.0 else 1.0
    return sv[-1] / scale


def secular_eigenvalues(g: MetricGraph, bc=None, k_max: float = 10.0,
                        scan_step: float = None,
                        boundary_default: str = KIRCHHOFF) -> list:
    """All eigenvalues lam = k^2 with k in [0, k_max], with multiplicities.

    bc maps vertex ids to "kirchhoff" or "dirichlet"; unknown vertices get
    Kirchhoff (interior) or boundary_default (boundary marks).
    """
    conditions = resolve_conditions(g, bc, boundary_default)
    if scan_step is None:
        scan_step = math.pi / (4.0 * g.volume())
    out = []

    mult0 = _nullity(condition_matrix_zero(g, conditions))
    if mult0 > 0:
        out.append(Eigenvalue(0.0, 0.0, mult0))

    def det(k):
        sign, logdet = np.linalg.slogdet(condition_matrix(g, conditions, k))
        return sign * math.exp(min(logdet, 500.0))

    def smin(k):
        return _smallest_sv(condition_matrix(g, conditions, k))

    ks = np.arange(scan_step, k_max + scan_step, scan_step)
    ks = ks[ks <= k_max + 1e-15]
    dets = np.array([det(k) for k in ks])
    smins = np.array([smin(k) for k in ks])

    roots = []
    # sign changes -> bisection
    for i in range(len(ks) - 1):
        if dets[i] == 0.0:
            roots.append(ks[i])
        elif dets[i] * dets[i + 1] < 0.0:
            roots.append(brentq(det, ks[i], ks[i + 1], xtol=_K_REFINE_TOL))
    if len(dets) and dets[-1] == 0.0:
        roots.append(ks[-1])

    # interior dips of the smallest singular value without a sign change:
    # either an even-multiplicity root or a pair of odd roots sharing the
    # cell.  A fine sign scan inside the cell separates pairs; a bounded
    # minimum search on the smallest singular value catches the rest.
    for i in range(1, len(ks) - 1):
        if smins[i] <= smins[i - 1] and smins[i] <= smins[i + 1] \
                and dets[i - 1] * dets[i + 1] > 0.0 and smins[i] < 0.5:
            lo, hi = ks[i - 1], ks[i + 1]
            sub = np.linspace(lo, hi, 129)
            sub_dets = np.array([det(k) for k in sub])
            crossings = 0
            for j in range(len(sub) - 1):
                if sub_dets[j] * sub_dets[j + 1] < 0.0:
                    roots.append(brentq(det, sub[j], sub[j + 1],
                                        xtol=_K_REFINE_TOL))
                    crossings += 1
            if crossings == 0:
                res = minimize_scalar(smin, bounds=(lo, hi), method="bounded",
                                      options={"xatol": _K_REFINE_TOL})
                if res.fun < _ACCEPT_TOL:
                    roots.append(float(res.x))

    roots.sort()
    merge_tol = max(100.0 * _K_REFINE_TOL, scan_step * 1e-4)
    merged = []
    for r in roots:
        if merged and abs(r - merged[-1]) < merge_tol:
            continue
        merged.append(r)

    for r in merged:
        if r > k_max + 1e-12:
            continue
        mult = _nullity(condition_matrix(g, conditions, r))
        if mult == 0:
            mult = 1  # refined root with a barely non-degenerate assembly
        out.append(Eigenvalue(float(r), float(r) ** 2, mult))

    # Weyl sanity check: a scan that resolved the spectrum cannot be far
    # below the leading-order eigenvalue count
    found = sum(ev.multiplicity for ev in out)
    expected = g.volume() * k_max / math.pi
    slack = g.vertex_count + g.edge_count + 2
    if found < expected - slack:
        raise RootScanTooCoarse(
            f"found {found} eigenvalues where about {expected:.1f} were "
            f"expected; rerun with a finer scan_step")
    return out


def eigenfunctions(g: MetricGraph, bc, k: float,
                   boundary_default: str = KIRCHHOFF) -> list:
    """Null-space solutions at lam = k^2 as EdgeSolution collections,
    one list per multiplicity dimension."""
    conditions = resolve_conditions(g, bc, boundary_default)
    matrix = condition_matrix(g, conditions, k) if k > 0.0 \
        else condition_matrix_zero(g, conditions)
    _, sv, vt = np.linalg.svd(matrix)
    scale = sv[0] if sv[0] > 0.0 else 1.0
    out = []
    for i, s in enumerate(sv):
        if s / scale < _SV_TOL:
            coeffs = vt[i]
            sols = [EdgeSolution(u, v, length, k * k, coeffs[2 * j], coeffs[2 * j + 1])
                    for j, (u, v, length) in enumerate(g.edges)]
            out.append(sols)
    return out


def dirichlet_vs_neumann(g: MetricGraph, k_max: float = 10.0, bc=None,
                         scan_step: float = None) -> tuple:
    """Eigenvalue lists with Dirichlet vs Kirchhoff conditions at the
    boundary marks (interior vertices keep Kirchhoff), paired by index."""
    if not g.boundary:
        raise ValueError("graph has no boundary marks to vary")
    dirichlet = secular_eigenvalues(g, bc, k_max, scan_step, boundary_default=DIRICHLET)
    neumann = secular_eigenvalues(g, bc, k_max, scan_step, boundary_default=KIRCHHOFF)
    return dirichlet, neumann


def expand_with_multiplicity(eigenvalues) -> list:
    out = []
    for ev in eigenvalues:
        out.extend([ev.lam] * ev.multiplicity)
    return out
