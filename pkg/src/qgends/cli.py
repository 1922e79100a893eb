"""Command line interface.

Subcommands: analyze, ends, spectrum, witness, tree-kernels, components.
Outputs are deterministic for a fixed configuration; delimited output
goes to stdout (or --output), figures to --plot when requested.  Errors
are reported as machine-readable JSON on stderr with exit codes
2 (spec error), 3 (unsupported family), 4 (numeric failure).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field

from . import radial
from .classify import classification_report
from .ends import component_counts, enumerate_ends
from .errors import (DepthTooLarge, NumericError, QgendsError, SchemaError,
                     UnsupportedFamily)
from .graphspec import GraphFamilySpec, RadialTree, parse_spec
from .metric_graph import truncate
from .spectral import dirichlet_vs_neumann, secular_eigenvalues, witness_nonclosed
from .spectral.secular import DIRICHLET, KIRCHHOFF

EXIT_SPEC_ERROR = 2
EXIT_UNSUPPORTED = 3
EXIT_NUMERIC = 4


@dataclass
class RunConfig:
    command: str
    spec_path: str
    output_format: str = "csv"
    output: str = ""            # empty = stdout
    plot: str = ""              # empty = no figure
    depth: int = 6
    k_max: float = 10.0
    bc: str = "kirchhoff"
    lam: float = -1.0
    levels: int = 5
    radius: int = 8
    count: int = 8
    scan_step: float = 0.0      # 0 = the documented default pi / (4 volume)
    dump_components: int = 0
    weight_json: str = ""
    seed: int = 0               # recorded for reproducibility of outputs
    extra: dict = field(default_factory=dict)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    config = RunConfig(
        command=args.command,
        spec_path=args.spec,
        output_format=getattr(args, "format"),
        output=args.output or "",
        plot=getattr(args, "plot", "") or "",
        depth=getattr(args, "depth", 6),
        k_max=getattr(args, "kmax", 10.0),
        bc=getattr(args, "bc", "kirchhoff"),
        lam=getattr(args, "lam", -1.0),
        levels=getattr(args, "levels", 5),
        radius=getattr(args, "radius", 8),
        count=getattr(args, "count", 8),
        scan_step=getattr(args, "scan_step", 0.0) or 0.0,
        dump_components=getattr(args, "dump_components", 0) or 0,
        weight_json=getattr(args, "weight_json", "") or "",
        seed=args.seed,
    )
    return run(config)


def run(config: RunConfig) -> int:
    """Execute a configuration; returns the process exit status."""
    try:
        spec = _load_spec(config.spec_path)
        text = _COMMANDS[config.command](spec, config)
    except (SchemaError, FileNotFoundError, json.JSONDecodeError) as exc:
        return _fail(exc, EXIT_SPEC_ERROR)
    except UnsupportedFamily as exc:
        return _fail(exc, EXIT_UNSUPPORTED)
    except (NumericError, DepthTooLarge, ArithmeticError) as exc:
        return _fail(exc, EXIT_NUMERIC)
    except QgendsError as exc:
        return _fail(exc, EXIT_SPEC_ERROR)
    _emit(text, config.output)
    return 0


def _fail(exc, code: int) -> int:
    doc = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(doc), file=sys.stderr)
    return code


def _emit(text: str, output: str) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _load_spec(path: str) -> GraphFamilySpec:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_spec(json.load(handle))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_analyze(spec, config: RunConfig) -> str:
    report = classification_report(spec)
    if config.output_format == "table":
        return _analyze_table(report)
    if config.output_format == "csv":
        d = report.deficiency
        rows = [("spec", report.spec_name),
                ("gaffney_status", report.gaffney_status),
                ("kirchhoff_selfadjoint", report.kirchhoff_selfadjoint),
                ("markovian_unique", str(report.markovian_unique).lower()),
                ("deficiency_gaffney_min", d.gaffney_min),
                ("deficiency_kirchhoff_lower_bound", d.kirchhoff_min_lower_bound),
                ("deficiency_kirchhoff_exact",
                 d.kirchhoff_min_exact if d.kirchhoff_min_exact is not None else ""),
                ("ends_total", report.end_summary.total),
                ("ends_finite_volume", report.end_summary.finite_volume),
                ("rules", ";".join(t.citation for t in report.rule_trace))]
        return _csv(["field", "value"], rows, "csv")
    return json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n"


def _analyze_table(report) -> str:
    lines = [f"spec                    {report.spec_name}"]
    lines.append(f"gaffney status          {report.gaffney_status}")
    lines.append(f"kirchhoff self-adjoint  {report.kirchhoff_selfadjoint}")
    lines.append(f"markovian unique        {str(report.markovian_unique).lower()}")
    d = report.deficiency
    lines.append(f"deficiency (gaffney)    {d.gaffney_min}")
    exact = d.kirchhoff_min_exact if d.kirchhoff_min_exact is not None \
        else f">= {d.kirchhoff_min_lower_bound} ({d.exactness_condition})"
    lines.append(f"deficiency (kirchhoff)  {exact}")
    lines.append(f"ends total / finite-vol {report.end_summary.total} / "
                 f"{report.end_summary.finite_volume}")
    lines.append("rules:")
    for t in report.rule_trace:
        lines.append(f"  [{t.citation}] {t.rule_id}")
    return "\n".join(lines) + "\n"


def _cmd_ends(spec, config: RunConfig) -> str:
    if config.dump_components:
        counts = component_counts(spec, config.dump_components)
        if config.plot:
            from .plots import plot_components
            plot_components(counts, config.plot)
        return _csv(["radius", "components"], [(r, c) for r, c in counts],
                    config.output_format)
    summary = enumerate_ends(spec)
    if config.output_format == "table":
        lines = [f"total ends              {summary.total}",
                 f"finite volume ends      {summary.finite_volume}",
                 f"free finite volume      {summary.free_finite_volume}",
                 f"non-free finite volume  {str(summary.has_nonfree_finite_volume).lower()}"]
        for d in summary.descriptors:
            vc = "finite" if d.volume_class.finite else "infinite"
            lines.append(f"  end {d.id}: {vc} volume, {d.freeness} ({d.ray})")
        return "\n".join(lines) + "\n"
    if config.output_format == "csv":
        rows = [(d.id, d.multiplicity,
                 "finite" if d.volume_class.finite else "infinite",
                 d.volume_class.witness_volume if d.volume_class.finite else "",
                 d.freeness) for d in summary.descriptors]
        return _csv(["end", "multiplicity", "volume_class", "witness_volume",
                     "freeness"], rows, "csv")
    return json.dumps(summary.to_json(), indent=2, sort_keys=True) + "\n"


def _cmd_spectrum(spec, config: RunConfig) -> str:
    g = truncate(spec, config.depth)
    default = DIRICHLET if config.bc == "dirichlet" else KIRCHHOFF
    bc = None
    if not g.boundary:
        # finite graphs have no truncation cuts; --bc then applies to the
        # degree-one vertices
        bc = {v: default for v in g.vertex_ids if g.degree(v) == 1}
    step = config.scan_step if config.scan_step > 0.0 else None
    evs = secular_eigenvalues(g, bc, config.k_max, scan_step=step,
                              boundary_default=default)
    if config.plot:
        from .plots import plot_spectrum
        if g.boundary:
            d_evs, n_evs = dirichlet_vs_neumann(g, config.k_max)
            plot_spectrum(d_evs, config.plot, paired=n_evs)
        else:
            plot_spectrum(evs, config.plot)
    rows = []
    index = 0
    for ev in evs:
        for _ in range(ev.multiplicity):
            index += 1
            rows.append((index, ev.k, ev.lam, ev.multiplicity))
    return _csv(["index", "k", "lambda", "multiplicity"], rows, config.output_format)


def _cmd_witness(spec, config: RunConfig) -> str:
    rows = witness_nonclosed(spec, config.lam, config.levels)
    if config.plot:
        from .plots import plot_witness
        plot_witness(rows, config.plot)
    table = [(r.level, r.lam, r.sup_norm, r.boundary_residual,
              r.l2_sq, r.grad_sq, r.ham_sq, r.ratio, r.growth) for r in rows]
    return _csv(["level", "lambda", "sup_norm", "boundary_residual",
                 "l2_sq", "grad_sq", "ham_sq", "ratio", "growth"],
                table, config.output_format)


def _cmd_tree_kernels(spec, config: RunConfig) -> str:
    if not isinstance(spec, RadialTree):
        raise UnsupportedFamily("tree-kernels needs a RadialTree spec")
    data = radial.build(spec)
    rows = []
    for n in range(config.count):
        energy = radial.kernel_energy(data, n)
        rows.append((n, energy.value_float, str(energy), data.multiplicity(n)))
    if config.weight_json:
        with open(config.weight_json, "w", encoding="utf-8") as handle:
            json.dump(data.step_weight(config.count).to_json(), handle, indent=2)
    if config.plot:
        from .plots import plot_kernels
        if not data.volume.finite:
            raise NumericError("kernel profiles are only plotted in the "
                               "finite volume regime")
        plot_kernels(data, rows, config.plot)
    return _csv(["n", "end_value", "energy", "multiplicity"], rows,
                config.output_format)


def _cmd_components(spec, config: RunConfig) -> str:
    counts = component_counts(spec, config.radius)
    if config.plot:
        from .plots import plot_components
        plot_components(counts, config.plot)
    return _csv(["radius", "components"], counts, config.output_format)


_COMMANDS = {
    "analyze": _cmd_analyze,
    "ends": _cmd_ends,
    "spectrum": _cmd_spectrum,
    "witness": _cmd_witness,
    "tree-kernels": _cmd_tree_kernels,
    "components": _cmd_components,
}


def _cell(x) -> str:
    # repr keeps float round-trips byte-identical across runs
    return repr(x) if isinstance(x, float) else str(x)


def _csv(header, rows, output_format: str) -> str:
    if output_format == "json":
        def jsonable(x):
            if isinstance(x, float) and math.isnan(x):
                return None
            return x
        doc = [dict(zip(header, (jsonable(x) for x in row))) for row in rows]
        return json.dumps(doc, indent=2) + "\n"
    if output_format == "table":
        widths = [max(len(str(h)), *(len(_cell(r[i])) for r in rows)) if rows else len(str(h))
                  for i, h in enumerate(header)]
        lines = ["  ".join(str(h).ljust(w) for h, w in zip(header, widths))]
        for row in rows:
            lines.append("  ".join(_cell(x).ljust(w) for x, w in zip(row, widths)))
        return "\n".join(lines) + "\n"
    lines = [",".join(header)]
    lines += [",".join(_cell(x) for x in row) for row in rows]
    return "\n".join(lines) + "\n"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qgends",
        description="classify Laplacians on infinite metric graphs and run "
                    "the numerical layer on finite truncations")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, default_format):
        p.add_argument("spec", help="family spec (JSON)")
        p.add_argument("--format", choices=["json", "csv", "table"],
                       default=default_format)
        p.add_argument("--output", "-o", default="", help="write to a file")
        p.add_argument("--seed", type=int, default=0,
                       help="seed recorded with the run (outputs are "
                            "deterministic for a fixed config and seed)")

    p = sub.add_parser("analyze", help="full classification report")
    common(p, "json")

    p = sub.add_parser("ends", help="end census")
    common(p, "json")
    p.add_argument("--dump-components", type=int, default=0, metavar="R",
                   help="emit component counts up to radius R instead")
    p.add_argument("--plot", default="", help="render a figure to this file")

    p = sub.add_parser("spectrum", help="eigenvalues of a truncation")
    common(p, "csv")
    p.add_argument("--bc", choices=["dirichlet", "kirchhoff"], default="kirchhoff",
                   help="condition at the truncation boundary")
    p.add_argument("--kmax", type=float, default=10.0)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--scan-step", dest="scan_step", type=float, default=0.0,
                   help="root scan step in k (default pi / (4 total length))")
    p.add_argument("--plot", default="", help="render the eigenvalue ladder")

    p = sub.add_parser("witness", help="blow-up witness ratios")
    common(p, "csv")
    p.add_argument("--lambda", dest="lam", type=float, default=-1.0)
    p.add_argument("--levels", type=int, default=5)
    p.add_argument("--plot", default="", help="render the ratio curve")

    p = sub.add_parser("tree-kernels", help="kernel data of a radial tree")
    common(p, "csv")
    p.add_argument("--count", type=int, default=8, help="number of channels")
    p.add_argument("--weight-json", default="",
                   help="also export step-weight breakpoints as JSON")
    p.add_argument("--plot", default="", help="render kernels and weight")

    p = sub.add_parser("components", help="ball-complement component counts")
    common(p, "csv")
    p.add_argument("--radius", type=int, default=8)
    p.add_argument("--plot", default="", help="render the count curve")

    return parser


if __name__ == "__main__":
    sys.exit(main())
