"""Command-line interface: ``qgraph <command> [spec] [options]``."""
from __future__ import annotations

import argparse
import sys

from .. import __version__
from .._config import get_tol, set_tol
from ..edgecorr import build_edge_correspondence, phi_compacts_check
from ..errors import BudgetExceeded, ParseError, QGraphError, ValidationError
from ..fock import FockTruncation, verify_qck, verify_toeplitz_identities
from ..qadj import quantum_sinks, quantum_sources, range_ideal, validate_graph
from ..simplicity import certify_simplicity, qck_separation
from .specfile import canonical_json, example_spec, load

REPORT_SCHEMA = "qgraph-report/1"

EXIT_OK, EXIT_VALIDATION, EXIT_PARSE, EXIT_BUDGET = 0, 1, 2, 3


def _residual(v: float) -> float:
    """Residuals are reported to 3 significant digits; rounding noise below
    ``tol * 1e-3`` is reported as zero so reports are reproducible."""
    v = float(v)
    if v < get_tol() * 1e-3:
        return 0.0
    return float(f"{v:.3e}")


def _blocks(s) -> list:
    return sorted(b + 1 for b in s)


def _validation(G) -> dict:
    rep = validate_graph(G)
    return {"schur_residual": _residual(rep["schur_residual"]), "cp": rep["cp"],
            "degenerate": rep["degenerate"], "delta_sq": float(G.space.delta_sq)}


def _correspondence(G) -> dict:
    E = build_edge_correspondence(G)
    return {
        "dim": E.dim,
        "faithful": E.faithful,
        "full": E.full,
        "sources": _blocks(quantum_sources(G)),
        "sinks": _blocks(quantum_sinks(G)),
        "K": _blocks(range_ideal(G)),
        "inner_product_ideal": _blocks(E.inner_ideal_blocks()),
        "multiplicity_matrix": E.multiplicity_matrix.tolist(),
        "phi_compacts_residual": _residual(phi_compacts_check(E)),
    }


def _params(args) -> dict:
    keys = ("m_max", "period_max", "seed", "levels")
    out = {k: getattr(args, k) for k in keys if hasattr(args, k)}
    out["tol"] = get_tol()
    return out


def _report(args, spec, **sections) -> dict:
    rep = {"schema": REPORT_SCHEMA, "command": args.command, "input": spec.data,
           "params": _params(args)}
    rep.update(sections)
    return rep


def cmd_validate(args, spec, G):
    return _report(args, spec, validation=_validation(G))


def cmd_analyze(args, spec, G):
    return _report(args, spec, validation=_validation(G), correspondence=_correspondence(G))


def cmd_certify(args, spec, G):
    v = certify_simplicity(G, args.m_max, args.period_max, args.seed)
    return _report(args, spec, validation=_validation(G), verdict=v.to_dict())


def cmd_separate(args, spec, G):
    s = qck_separation(G, args.m_max, args.period_max, args.seed)
    return _report(args, spec, validation=_validation(G), separation=s.to_dict())


def cmd_fock(args, spec, G):
    E = build_edge_correspondence(G)
    F = FockTruncation(E, args.levels)
    toe = {k: _residual(v) for k, v in verify_toeplitz_identities(F).items()}
    qck = {k: _residual(v) for k, v in verify_qck(F).items()}
    return _report(args, spec, validation=_validation(G),
                   fock={"levels": args.levels, "level_dims": F.dims, "toeplitz": toe, "qck": qck})


def _print_human(rep, out):
    def emit(obj, indent=0):
        pad = "  " * indent
        for key, val in obj.items():
            if isinstance(val, dict):
                out.write(f"{pad}{key}:\n")
                emit(val, indent + 1)
            elif isinstance(val, list) and val and all(isinstance(v, dict) for v in val):
                out.write(f"{pad}{key}:\n")
                for v in val:
                    out.write(f"{pad}  -\n")
                    emit(v, indent + 2)
            else:
                out.write(f"{pad}{key}: {val}\n")
    emit({k: v for k, v in rep.items() if k not in ("schema", "input")})


def _parse_matrix(text):
    rows = [r for r in text.split(";") if r.strip()]
    return [[int(v) for v in r.replace(",", " ").split()] for r in rows]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qgraph", description="Quantum graph correspondences and "
                                "Cuntz-Pimsner simplicity certificates.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def graph_cmd(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("spec", nargs="?", default="-", help="graph file, '-' for stdin")
        sp.add_argument("--json", action="store_true", help="emit the JSON report")
        sp.add_argument("--tol", type=float, default=None, help="numerical tolerance")
        sp.set_defaults(func=fn)
        return sp

    graph_cmd("validate", cmd_validate, "check the state and the adjacency map")
    graph_cmd("analyze", cmd_analyze, "edge correspondence statistics")
    for name, fn, help_ in (("certify", cmd_certify, "simplicity verdict"),
                            ("separate", cmd_separate, "QCK separation report")):
        sp = graph_cmd(name, fn, help_)
        sp.add_argument("--m-max", dest="m_max", type=int, default=8)
        sp.add_argument("--period-max", dest="period_max", type=int, default=4)
        sp.add_argument("--seed", type=int, default=0)
    sp = graph_cmd("fock-verify", cmd_fock, "operator identities on the truncated Fock module")
    sp.add_argument("--levels", type=int, default=3)

    ex = sub.add_parser("example", help="print a built-in graph specification")
    ex.add_argument("name", choices=["main_example", "complete", "trivial", "rank_one", "classical"])
    ex.add_argument("--n", type=int, default=1, help="block size for main_example")
    ex.add_argument("--blocks", default=None,
                    help="comma-separated block sizes, e.g. 2 or 1,1,1")
    ex.add_argument("--matrix", default=None, help="classical 0/1 matrix, rows split by ';'")
    ex.add_argument("--json", action="store_true", help="accepted for symmetry; output is JSON")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = sys.stdout
    try:
        if args.command == "example":
            blocks = [int(b) for b in args.blocks.split(",")] if args.blocks else None
            matrix = _parse_matrix(args.matrix) if args.matrix else None
            spec = example_spec(args.name, blocks, args.n, matrix)
            spec.build()
            out.write(spec.dumps())
            return EXIT_OK
        if args.tol is not None:
            set_tol(args.tol)
        spec = load(args.spec)
        G = spec.build()
        rep = args.func(args, spec, G)
    except ParseError as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except BudgetExceeded as exc:
        sys.stderr.write(f"budget exceeded: {exc}\n")
        return EXIT_BUDGET
    except (ValidationError, QGraphError, ValueError) as exc:
        sys.stderr.write(f"validation failed: {exc}\n")
        return EXIT_VALIDATION
    if args.json:
        out.write(canonical_json(rep))
    else:
        _print_human(rep, out)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
