"""Command-line interface.

Exit status: 0 pass, 2 fail (the report carries a witness), 3 input error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict, dataclass, field

from .fock import FockDepthError
from .functionals import (
    CumulantFunctional,
    MomentFunctional,
    TruncationError,
    bifreeness_test,
    cumulants_to_moments,
    faces,
    moments_to_cumulants,
)
from .infdiv import infdiv_report, levy_realize, reconstruct
from .io import (
    SchemaError,
    array_spec_from_doc,
    canonical_dumps,
    load_document,
    model_from_doc,
    table_from_doc,
    table_to_doc,
)
from .limits import NonzeroMeanError, clt_check, limit_theorem_check

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 2, 3
MAX_ORDER = 8
KINDS = ("bifree", "infdiv", "levy", "clt", "limit")


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: list
    output: str | None = None
    kind: str | None = None
    max_order: int | None = None
    cnd_tol: float = 1e-9
    match_tol: float = 1e-8
    exact_tol: float = 1e-12
    direction: str = "auto"
    grid: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    def __post_init__(self):
        if min(self.cnd_tol, self.match_tol, self.exact_tol) <= 0:
            raise InputError("tolerances must be positive")
        if self.max_order is not None and not 1 <= self.max_order <= MAX_ORDER:
            raise InputError(f"--max-order must be in 1..{MAX_ORDER}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bifree", description="Bi-free moment/cumulant tools.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--input", required=True, help="input document (JSON)")
        p.add_argument("--output", help="report/table path; stdout if omitted")
        p.add_argument("--max-order", type=int, help=f"truncation order (<= {MAX_ORDER})")

    p = sub.add_parser("convert", help="moments <-> cumulants")
    common(p)
    p.add_argument("--direction", choices=("auto", "to-cumulants", "to-moments"),
                   default="auto")

    p = sub.add_parser("check", help="run a verification and write a report")
    common(p)
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--tol", type=float, default=1e-9,
                   help="cnd / bi-freeness / limit tolerance (default 1e-9)")
    p.add_argument("--match-tol", type=float, default=1e-8,
                   help="reconstruction tolerance (default 1e-8)")
    p.add_argument("--grid", type=_floats, default=[0.0, 0.5, 1.0],
                   help="time grid for --kind levy, e.g. 0,0.5,1")
    p.add_argument("--rows", type=_ints, default=[4, 16, 64],
                   help="row sizes for --kind clt, e.g. 4,16,64")

    p = sub.add_parser("fock", help="moment table of a Fock model")
    common(p)
    return parser


def _config(args) -> RunConfig:
    return RunConfig(
        command=args.command,
        inputs=[args.input],
        output=args.output,
        kind=getattr(args, "kind", None),
        max_order=args.max_order,
        cnd_tol=getattr(args, "tol", 1e-9),
        match_tol=getattr(args, "match_tol", 1e-8),
        direction=getattr(args, "direction", "auto"),
        grid=getattr(args, "grid", []) if getattr(args, "kind", None) == "levy" else [],
        rows=getattr(args, "rows", []) if getattr(args, "kind", None) == "clt" else [],
    )


def _load_table(cfg: RunConfig):
    doc, text = load_document(cfg.inputs[0])
    table = table_from_doc(doc, text, max_order_limit=MAX_ORDER)
    if cfg.max_order is not None and cfg.max_order < table.max_order:
        cls = type(table)
        table = cls(table.alphabet, cfg.max_order,
                    {w: v for w, v in table.items() if len(w) <= cfg.max_order})
    return doc, table


def _as_cumulants(table):
    return table if isinstance(table, CumulantFunctional) else moments_to_cumulants(table)


def _write(cfg: RunConfig, obj):
    text = canonical_dumps(obj)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report(cfg, passed, metrics, witness=None):
    return {
        "command": cfg.command,
        "kind": cfg.kind,
        "verdict": "pass" if passed else "fail",
        "witness": None if passed else witness,
        "metrics": metrics,
        "config": asdict(cfg),
    }


def cmd_convert(cfg: RunConfig) -> int:
    _, table = _load_table(cfg)
    direction = cfg.direction
    if direction == "auto":
        direction = "to-cumulants" if isinstance(table, MomentFunctional) else "to-moments"
    if direction == "to-cumulants":
        if not isinstance(table, MomentFunctional):
            raise InputError("to-cumulants needs a moment table")
        out = moments_to_cumulants(table)
    else:
        if not isinstance(table, CumulantFunctional):
            raise InputError("to-moments needs a cumulant table")
        out = cumulants_to_moments(table)
    _write(cfg, table_to_doc(out))
    return EXIT_PASS


def cmd_fock(cfg: RunConfig) -> int:
    doc, text = load_document(cfg.inputs[0])
    model = model_from_doc(doc, text)
    _write(cfg, table_to_doc(model.moments(cfg.max_order or 4)))
    return EXIT_PASS


def _check_bifree(cfg):
    doc, text = load_document(cfg.inputs[0])
    if "left" in doc or "right" in doc:
        model = model_from_doc(doc, text)
        order = cfg.max_order or 4
        mf = model.moments(order)
        grouping = model.grouping()
    else:
        table = table_from_doc(doc, text, max_order_limit=MAX_ORDER)
        mf = table if isinstance(table, MomentFunctional) else cumulants_to_moments(table)
        order = min(cfg.max_order or mf.max_order, mf.max_order)
        grouping = doc.get("groups")
        if not isinstance(grouping, dict):
            raise SchemaError("a table checked for bi-freeness needs a 'groups' object", "$.groups")
    rep = bifreeness_test(mf, grouping, order, cfg.cnd_tol)
    witness = None
    if rep.worst_word is not None:
        w = rep.worst_word
        witness = {
            "word": " ".join(a.label for a in w),
            "faces": faces(w),
            "partition": "[[" + ",".join(str(i) for i in range(1, len(w) + 1)) + "]]",
            "cumulant_abs": rep.max_abs,
        }
    return rep.passed, rep.as_dict(), witness


def _infdiv(cfg):
    _, table = _load_table(cfg)
    pc = _as_cumulants(table)
    rep = infdiv_report(pc, tol=cfg.cnd_tol, match_tol=cfg.match_tol)
    passed = rep.passed and (rep.reconstruction_error is None
                             or rep.reconstruction_error <= cfg.match_tol)
    return pc, rep, passed


def _check_infdiv(cfg):
    _, rep, passed = _infdiv(cfg)
    return passed, rep.as_dict(), rep.witness


def _check_levy(cfg):
    pc, rep, passed = _infdiv(cfg)
    if not rep.psd:
        return False, rep.as_dict(), rep.witness
    verify = min(pc.max_order // 2 + 1, pc.max_order)
    rec = reconstruct(pc, verify, cnd_tol=cfg.cnd_tol)
    rep.levy = levy_realize(pc, cfg.grid, verify, tol=cfg.cnd_tol, rec=rec)
    witness = rep.witness
    if not rep.levy.passed:
        b = rep.levy.bifree
        witness = {"increment_errors": rep.levy.increment_errors,
                   "bifree_worst_word": b.as_dict()["worst_word"],
                   "marginal_sup": rep.levy.marginal_sup}
    return passed and rep.levy.passed, rep.as_dict(), witness


def _check_clt(cfg):
    doc, text = load_document(cfg.inputs[0])
    if "base" in doc:
        base = array_spec_from_doc(doc, text)[0].base
    else:
        base = table_from_doc(doc, text, max_order_limit=MAX_ORDER)
    base = _as_cumulants(base)
    rep = clt_check(base, cfg.rows, tol=cfg.cnd_tol)
    witness = {"order2_drift": rep.order2_drift, "rates": rep.as_dict()["rates"],
               "limit_error": rep.limit_error}
    return rep.passed, rep.as_dict(), witness


def _check_limit(cfg):
    doc, text = load_document(cfg.inputs[0])
    spec, predicted = array_spec_from_doc(doc, text)
    if predicted is None:
        raise SchemaError("limit check needs a 'predicted' table", "$.predicted")
    rep = limit_theorem_check(spec, _as_cumulants(predicted), tol=cfg.cnd_tol)
    witness = {"row_size": spec.row_sizes[-1], "word": rep.worst_words[-1],
               "error": rep.errors[-1]}
    return rep.passed, rep.as_dict(), witness


_CHECKS = {
    "bifree": _check_bifree,
    "infdiv": _check_infdiv,
    "levy": _check_levy,
    "clt": _check_clt,
    "limit": _check_limit,
}


def cmd_check(cfg: RunConfig) -> int:
    passed, metrics, witness = _CHECKS[cfg.kind](cfg)
    _write(cfg, _report(cfg, passed, metrics, witness))
    return EXIT_PASS if passed else EXIT_FAIL


_COMMANDS = {"convert": cmd_convert, "check": cmd_check, "fock": cmd_fock}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        return _COMMANDS[cfg.command](cfg)
    except (InputError, SchemaError, TruncationError, NonzeroMeanError,
            FockDepthError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"bifree: error: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
