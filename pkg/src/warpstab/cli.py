"""Command-line front end.

Every subcommand builds a report (a dict of plain values) and prints it either
as ``key: value`` lines or, with ``--json``, as one JSON document. Exit codes:
0 success, 1 validation or usage error, 2 solver failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .blocks import SUPPORTED_MATRICES, special_matrix
from .catalog import CATALOG, classify_entry, get_entry
from .config import GRAMMAR, load_config
from .errors import NotFound, SolverError, ValidationError, WarpstabError
from .model import Kind
from .radial import hardy_suite
from .verdict import block_minima, decide, spectrum_blocks


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# report rendering


def _plain(x):
    """Convert to JSON-safe plain values; non-finite floats become strings."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (bool, str)) or x is None:
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return str(x)


def to_json(report: dict) -> str:
    return json.dumps(_plain(report), sort_keys=True, indent=2, allow_nan=False)


def _text_lines(report: dict, prefix: str = "") -> list[str]:
    lines = []
    for key, value in report.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            lines.extend(_text_lines(value, f"{name}."))
        elif isinstance(value, list) and value and all(isinstance(v, dict) for v in value):
            for row in value:
                lines.append("")
                lines.extend(_text_lines(row))
        elif isinstance(value, list):
            lines.append(f"{name}: " + ", ".join(str(v) for v in value))
        else:
            lines.append(f"{name}: {value}")
    return lines


def to_text(report: dict) -> str:
    return "\n".join(_text_lines(_plain(report)))


# ---------------------------------------------------------------------------
# subcommands


def _model_header(model) -> dict:
    return {"model": model.kind.value, "n": model.n, "threshold": model.threshold}


def _blocks_report(model, spectrum, policy) -> list[dict]:
    from .blocks import block_form
    from .verdict import NEGATIVITY_RTOL

    kinds = spectrum_blocks(spectrum)
    minima, scales = block_minima(model, kinds, policy)
    rows = []
    for kind in kinds:
        bf = block_form(model, kind)
        rows.append({
            "block": kind.label,
            "sigma_min": minima[kind],
            "scale": scales[kind],
            "nonnegative": bool(minima[kind] >= -NEGATIVITY_RTOL * scales[kind]),
            "components": list(bf.components),
            "dropped": list(bf.dropped),
        })
    return rows


def cmd_analyze(args) -> dict:
    cfg = load_config(args.config)
    verdict = decide(cfg.model, cfg.spectrum, cfg.policy)
    report = _model_header(cfg.model)
    report["kappa_min"] = verdict.kappa_min
    report["classification"] = verdict.classification.value
    report["domain_s"] = list(cfg.policy.domain)
    report["mesh"] = cfg.policy.N
    if verdict.block_minima:
        report["min_block_sigma"] = min(verdict.block_minima.values())
    if verdict.certificate is not None:
        c = verdict.certificate
        report["certificate"] = {
            "component": c.component,
            "rayleigh": c.rayleigh,
            "recomputed": c.recompute(),
            "rounds": c.rounds,
            "domain_s": [float(c.nodes[0]), float(c.nodes[-1])],
            "elements": len(c.nodes) - 1,
        }
    report["blocks"] = _blocks_report(cfg.model, cfg.spectrum, cfg.policy)
    return report


def cmd_blocks(args) -> dict:
    cfg = load_config(args.config)
    report = _model_header(cfg.model)
    report["domain_s"] = list(cfg.policy.domain)
    report["mesh"] = cfg.policy.N
    report["blocks"] = _blocks_report(cfg.model, cfg.spectrum, cfg.policy)
    return report


def cmd_hardy(args) -> dict:
    n = args.n
    table = hardy_suite(n)
    rows = []
    for key, est in table.items():
        rows.append({
            "pair": key,
            "expected": est.expected,
            "estimate": est.limit,
            "relative_error": est.relative_error(),
            "converged": est.converged,
        })
    return {"n": n, "hardy": rows}


def _parse_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(Fraction(p)) for p in text.split(":"))
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"lambda range must look like lo:hi, got {text!r}") from None
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
        raise ValidationError(f"bad lambda range {text!r}")
    return lo, hi


def cmd_matrices(args) -> dict:
    kind = Kind.parse(args.kind)
    n = args.n
    lo, hi = _parse_range(args.range)
    if args.step <= 0:
        raise ValidationError("--step must be positive")
    grid = [0.0] + [float(x) for x in np.arange(lo, hi + 0.5 * args.step, args.step) if x > 0]
    whiches = [w for (k, m, w) in SUPPORTED_MATRICES if k is kind and m == n]
    if not whiches:
        supported = ", ".join(f"{k.value} {m} {w}" for k, m, w in SUPPORTED_MATRICES)
        raise ValidationError(f"no explicit matrices for {kind.value} n={n}; supported: {supported}")
    rows, skipped, ok = [], [], True
    for lam in grid:
        if 0 < lam < n:
            skipped.append(lam)          # excluded by Obata's bound
            continue
        for which in whiches:
            mat, d = special_matrix(kind, n, lam, which)
            ok = ok and d.nonnegative
            rows.append({"lambda": lam, "matrix": which, "definiteness": d.value,
                         "min_eigenvalue": float(np.linalg.eigvalsh(mat)[0])})
    return {
        "model": kind.value,
        "n": n,
        "sweep": "positive semidefinite" if ok else "not positive semidefinite",
        "skipped_obata_gap": skipped,
        "matrices": rows,
    }


def cmd_oracle(args) -> dict:
    if args.which == "section2":
        from .oracle.torus import verify_section2

        rep = verify_section2(n=args.n)
        worst = rep.worst()
        return {
            "n": rep.n,
            "h": rep.h,
            "modes": [list(k) for k in rep.modes],
            "worst": worst,
            "order": rep.order,
            "pass": bool(worst["diagonal"] <= 1e-3 and worst["couplings"] <= 1e-3 and worst["zero_pairs"] <= 1e-3),
        }
    from .oracle.brute import brute_force_min, random_form
    from .radial import form_min

    rng = np.random.default_rng(args.seed)
    rows = []
    worst = 0.0
    for i in range(args.count):
        form, mesh = random_form(rng)
        sigma = form_min(form, mesh)[0]
        brute = brute_force_min(form, budget=args.budget, mesh=mesh, seed=args.seed + i)
        gap = (brute - sigma) / max(1.0, abs(sigma))
        worst = min(worst, gap)
        rows.append({"form": form.name, "elements": mesh.N, "sigma_min": sigma, "brute": brute, "relative_gap": gap})
    return {"seed": args.seed, "budget": args.budget, "worst_undercut": worst,
            "pass": bool(worst >= -1e-6), "forms": rows}


def _entry_report(e) -> dict:
    v = classify_entry(e)
    row = {
        "name": e.name,
        "n": e.n,
        "flags": sorted(f.value for f in e.flags),
        "bounds": [str(b) for b in e.bounds],
    }
    if e.is_exp_total:
        row["exp"] = v.exp.value
    else:
        row["cone"] = v.cone.value
        row["sinh"] = v.sinh.value
    return row


def cmd_catalog(args) -> dict:
    entries = [get_entry(args.entry)] if args.entry else list(CATALOG)
    return {"entries": [_entry_report(e) for e in entries]}


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    json_help = "print one JSON document instead of key: value lines"
    # subcommands must not reset a --json given before the subcommand name
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help=json_help)

    p = _Parser(prog="warpstab", description="Linear stability of warped-product Einstein manifolds.",
                epilog=GRAMMAR, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--json", action="store_true", help=json_help)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", parents=[common], help="classify a configuration and certify the verdict",
                       epilog=GRAMMAR, formatter_class=argparse.RawDescriptionHelpFormatter)
    a.add_argument("config")
    a.set_defaults(func=cmd_analyze)

    b = sub.add_parser("blocks", parents=[common], help="smallest discrete Rayleigh quotient of every block",
                       epilog=GRAMMAR, formatter_class=argparse.RawDescriptionHelpFormatter)
    b.add_argument("config")
    b.set_defaults(func=cmd_blocks)

    h = sub.add_parser("hardy", parents=[common], help="Hardy-type infima of the three warp families")
    h.add_argument("n", type=int)
    h.set_defaults(func=cmd_hardy)

    m = sub.add_parser("matrices", parents=[common], help="definiteness of the explicit scalar-block matrices")
    m.add_argument("kind", help="cone or sinh")
    m.add_argument("n", type=int)
    m.add_argument("range", help="lambda range lo:hi; 0 is always included")
    m.add_argument("--step", type=float, default=1.0)
    m.set_defaults(func=cmd_matrices)

    o = sub.add_parser("oracle", parents=[common], help="independent cross-checks")
    o.add_argument("which", choices=["section2", "rayleigh"])
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--n", type=int, default=4, help="base dimension for section2")
    o.add_argument("--count", type=int, default=5, help="random forms for rayleigh")
    o.add_argument("--budget", type=int, default=10_000, help="random profiles per form")
    o.set_defaults(func=cmd_oracle)

    c = sub.add_parser("catalog", parents=[common], help="classify the built-in example classes")
    c.add_argument("--entry", help="one entry by name")
    c.set_defaults(func=cmd_catalog)
    return p


def run(argv=None) -> tuple[int, str]:
    """Execute one invocation; returns (exit code, text for stdout or stderr)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        report = args.func(args)
    except SystemExit as exc:          # --help and --version print on their own
        return int(exc.code or 0), ""
    except UsageError as exc:
        return 1, f"{exc}\n{parser.format_usage()}\n{GRAMMAR}"
    except (ValidationError, NotFound) as exc:
        return 1, f"error: {exc}\n\n{GRAMMAR}"
    except SolverError as exc:
        return 2, f"solver error: {exc}"
    except WarpstabError as exc:
        return 1, f"error: {exc}"
    return 0, to_json(report) if args.json else to_text(report)


def main(argv=None) -> int:
    code, out = run(argv)
    print(out, file=sys.stdout if code == 0 else sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
