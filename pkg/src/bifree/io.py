"""JSON documents: moment/cumulant tables, Fock models and array specs.

All writers go through :func:`canonical_dumps` (sorted keys, floats at ten
significant digits, no negative zero), so equal content gives equal bytes.
"""

from __future__ import annotations

import ast
import json
from typing import Any

import numpy

from .fock import (
    FockOp,
    FockSpace,
    LeftCreate,
    LeftGauge,
    RightCreate,
    RightGauge,
    Scalar,
    amplify,
    two_faced_moments,
)
from .functionals import CumulantFunctional, Letter, MomentFunctional
from .limits import ArraySpec

__all__ = [
    "SchemaError",
    "canonical_dumps",
    "load_document",
    "table_to_doc",
    "table_from_doc",
    "FockModel",
    "model_from_doc",
    "parse_expression",
    "array_spec_from_doc",
]

FLOAT_DIGITS = 10


class SchemaError(ValueError):
    """Malformed input document; carries a JSON path and, when known, a line."""

    def __init__(self, message: str, path: str = "$", line: int | None = None):
        where = path if line is None else f"{path} (line {line})"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


def _clean(x: float) -> float:
    x = float(f"{x:.{FLOAT_DIGITS}g}")
    return 0.0 if x == 0 else x


def _canon(obj):
    if isinstance(obj, dict):
        return {str(k): _canon(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canon(v) for v in obj]
    if isinstance(obj, (bool, numpy.bool_)):
        return bool(obj)
    if isinstance(obj, (int, numpy.integer)):
        return int(obj)
    if isinstance(obj, (float, numpy.floating)):
        if not numpy.isfinite(obj):
            return str(float(obj))
        return _clean(obj)
    if isinstance(obj, (complex, numpy.complexfloating)):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


def canonical_dumps(obj: Any) -> str:
    return json.dumps(_canon(obj), sort_keys=True, indent=1, ensure_ascii=False) + "\n"


def _line_of(text: str | None, token: str) -> int | None:
    if not text:
        return None
    needle = json.dumps(token)
    for i, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return i
    return None


class _Ctx:
    """Raises schema errors with a line number looked up in the source text."""

    def __init__(self, text: str | None):
        self.text = text

    def fail(self, message, path, token=None):
        raise SchemaError(message, path, _line_of(self.text, token) if token else None)


def load_document(path: str) -> tuple[dict, str]:
    """Parse a JSON file; syntax errors become :class:`SchemaError` with a line."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(exc.msg, "$", exc.lineno) from None
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object")
    return doc, text


def _complex(value, path, ctx, token=None):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if (isinstance(value, list) and len(value) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        return complex(value[0], value[1])
    ctx.fail("expected a number or a [re, im] pair", path, token)


def table_to_doc(table: MomentFunctional | CumulantFunctional) -> dict:
    entries = {}
    for w, v in table.items():
        if table.kind == "cumulants" and v == 0:
            continue
        entries[" ".join(a.label for a in w)] = v
    return {
        "alphabet": [{"label": a.label, "face": a.face} for a in table.alphabet],
        "max_order": table.max_order,
        "kind": table.kind,
        "table": entries,
    }


def _alphabet(doc, ctx, path="$"):
    raw = doc.get("alphabet")
    if not isinstance(raw, list):
        ctx.fail("'alphabet' must be a list", f"{path}.alphabet", "alphabet")
    out = []
    for i, item in enumerate(raw):
        p = f"{path}.alphabet[{i}]"
        if not isinstance(item, dict) or set(item) != {"label", "face"}:
            ctx.fail("alphabet entries are {label, face} objects", p, "alphabet")
        try:
            out.append(Letter(item["face"], item["label"]))
        except (ValueError, TypeError) as exc:
            ctx.fail(str(exc), p, item.get("label"))
    if len({a.label for a in out}) != len(out):
        ctx.fail("labels must be unique", f"{path}.alphabet", "alphabet")
    return tuple(out)


def table_from_doc(doc: dict, text: str | None = None, path: str = "$",
                   max_order_limit: int | None = None):
    """Build a moment or cumulant table from its document form."""
    ctx = _Ctx(text)
    if not isinstance(doc, dict):
        ctx.fail("table document must be an object", path)
    for key in ("alphabet", "max_order", "kind", "table"):
        if key not in doc:
            ctx.fail(f"missing field '{key}'", path)
    kind = doc["kind"]
    if kind not in ("moments", "cumulants"):
        ctx.fail("kind must be 'moments' or 'cumulants'", f"{path}.kind", "kind")
    n = doc["max_order"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        ctx.fail("max_order must be a positive integer", f"{path}.max_order", "max_order")
    if max_order_limit is not None and n > max_order_limit:
        ctx.fail(f"max_order {n} exceeds the limit {max_order_limit}",
                 f"{path}.max_order", "max_order")
    alphabet = _alphabet(doc, ctx, path)
    by_label = {a.label: a for a in alphabet}
    raw = doc["table"]
    if not isinstance(raw, dict):
        ctx.fail("'table' must be an object", f"{path}.table", "table")
    entries = {}
    for key, value in raw.items():
        p = f"{path}.table[{json.dumps(key)}]"
        tokens = key.split()
        if any(t not in by_label for t in tokens):
            ctx.fail(f"unknown label in word {key!r}", p, key)
        if len(tokens) > n:
            ctx.fail(f"word {key!r} is longer than max_order {n}", p, key)
        if not tokens and kind == "cumulants":
            ctx.fail("cumulant tables have no empty-word entry", p, key)
        entries[tuple(by_label[t] for t in tokens)] = _complex(value, p, ctx, key)
    cls = MomentFunctional if kind == "moments" else CumulantFunctional
    try:
        return cls(alphabet, n, entries)
    except (KeyError, ValueError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        ctx.fail(str(msg), f"{path}.table", "table")


# ---- Fock models ----

_VECTOR_OPS = {"l": LeftCreate, "r": RightCreate}
_MATRIX_OPS = {"gauge_l": LeftGauge, "gauge_r": RightGauge}


def parse_expression(expr: str, vectors: dict, matrices: dict):
    """Evaluate an operator expression such as ``l(f) + adj(l(f)) + 0.5``.

    Allowed: ``l(v)``, ``r(v)``, ``gauge_l(M)``, ``gauge_r(M)``, ``adj(X)``,
    numbers (scalar multiples of the identity), ``+``, ``-`` and ``*``.
    """
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse {expr!r}: {exc.msg}") from None

    def ev(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)) \
                and not isinstance(node.value, bool):
            return node.value
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub, ast.Mult)):
            a, b = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            return a * b
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) \
                and len(node.args) == 1 and not node.keywords:
            name, arg = node.func.id, node.args[0]
            if name == "adj":
                v = ev(arg)
                return v.adjoint() if isinstance(v, FockOp) else complex(v).conjugate()
            if name in _VECTOR_OPS or name in _MATRIX_OPS:
                if not isinstance(arg, ast.Name):
                    raise ValueError(f"{name}() takes a vector or matrix name")
                pool = vectors if name in _VECTOR_OPS else matrices
                kind = "vector" if name in _VECTOR_OPS else "matrix"
                if arg.id not in pool:
                    raise ValueError(f"unknown {kind} {arg.id!r}")
                ops = _VECTOR_OPS if name in _VECTOR_OPS else _MATRIX_OPS
                return ops[name](pool[arg.id])
            raise ValueError(f"unknown function {name!r}")
        raise ValueError(f"unsupported syntax {ast.unparse(node)!r}")

    out = ev(tree.body)
    return out if isinstance(out, FockOp) else Scalar(out)


def _names(expr: str) -> set:
    return {n.id for n in ast.walk(ast.parse(expr, mode="eval")) if isinstance(n, ast.Name)}


class FockModel:
    """A two-faced family of operators on a Fock space, read from a document."""

    def __init__(self, dim_h, vectors, matrices, left, right, summands=None,
                 groups=None, sources=None):
        self.dim_h = dim_h
        self.vectors = vectors
        self.matrices = matrices
        self.left = left
        self.right = right
        self.summands = summands or {}
        self.groups = groups
        self.sources = sources or {}

    def moments(self, max_order: int) -> MomentFunctional:
        space = FockSpace(self.dim_h, max_order, self.summands)
        return two_faced_moments(self.left, self.right, max_order, space)

    def grouping(self) -> dict:
        """Label -> group, given explicitly or inferred from summand supports."""
        if self.groups is not None:
            return dict(self.groups)
        if not self.summands:
            raise ValueError("no 'groups' given and no summands to infer them from")
        home = {}
        for name, v in self.vectors.items():
            home[name] = self._home(set(numpy.flatnonzero(numpy.abs(v) > 0)))
        for name, M in self.matrices.items():
            rows, cols = numpy.nonzero(numpy.abs(M) > 0)
            home[name] = self._home(set(rows) | set(cols))
        out = {}
        for label, expr in self.sources.items():
            found = {home[n] for n in _names(expr) if n in home and home[n] != ""}
            if None in found or len(found) > 1:
                raise ValueError(f"operator {label!r} is not supported in a single summand")
            out[label] = found.pop() if found else f"scalar:{label}"
        return out

    def _home(self, support):
        if not support:
            return ""
        for name, idx in self.summands.items():
            if support <= set(idx):
                return name
        return None


def _vector(value, dim, path, ctx, name):
    if not isinstance(value, list) or len(value) != dim:
        ctx.fail(f"vector must have {dim} entries", path, name)
    return numpy.array([_complex(x, f"{path}[{i}]", ctx, name) for i, x in enumerate(value)])


def _matrix(value, dim, path, ctx, name):
    if not isinstance(value, list) or len(value) != dim:
        ctx.fail(f"matrix must have {dim} rows", path, name)
    rows = [_vector(row, dim, f"{path}[{i}]", ctx, name) for i, row in enumerate(value)]
    return numpy.array(rows).reshape(dim, dim)


def model_from_doc(doc: dict, text: str | None = None) -> FockModel:
    """Build a :class:`FockModel`; an ``amplify`` field ``N`` hats every datum."""
    ctx = _Ctx(text)
    dim = doc.get("dim_h")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 0:
        ctx.fail("dim_h must be a nonnegative integer", "$.dim_h", "dim_h")
    vectors = {k: _vector(v, dim, f"$.vectors.{k}", ctx, k)
               for k, v in (doc.get("vectors") or {}).items()}
    matrices = {k: _matrix(v, dim, f"$.matrices.{k}", ctx, k)
                for k, v in (doc.get("matrices") or {}).items()}
    clash = set(vectors) & set(matrices)
    if clash:
        ctx.fail(f"names used for both vectors and matrices: {sorted(clash)}", "$", sorted(clash)[0])
    summands = {}
    for k, idx in (doc.get("summands") or {}).items():
        if not isinstance(idx, list) or any(not isinstance(i, int) or not 0 <= i < dim
                                            for i in idx):
            ctx.fail("summand must list indices in 0..dim_h-1", f"$.summands.{k}", k)
        summands[k] = tuple(idx)
    groups = doc.get("groups")
    if groups is not None and not isinstance(groups, dict):
        ctx.fail("'groups' must map labels to group ids", "$.groups", "groups")

    N = doc.get("amplify")
    if N is not None:
        if not isinstance(N, int) or isinstance(N, bool) or N < 1:
            ctx.fail("amplify must be a positive integer", "$.amplify", "amplify")
        vnames, mnames = list(vectors), list(matrices)
        if dim and (vnames or mnames):
            amp = amplify([vectors[k] for k in vnames], [], [matrices[k] for k in mnames], N, 1)
            vectors = dict(zip(vnames, amp.f_hat))
            matrices = dict(zip(mnames, amp.T_hat))
        # hatted vectors spread over every copy, so summands no longer apply
        summands = {}
        dim = dim * N

    faces, sources = {}, {}
    for face in ("left", "right"):
        raw = doc.get(face) or {}
        if not isinstance(raw, dict):
            ctx.fail(f"'{face}' must map labels to expressions", f"$.{face}", face)
        faces[face] = {}
        for label, expr in raw.items():
            if label in sources:
                ctx.fail(f"label {label!r} used on both faces", f"$.{face}.{label}", label)
            if not isinstance(expr, str):
                ctx.fail("operator expressions are strings", f"$.{face}.{label}", label)
            try:
                faces[face][label] = parse_expression(expr, vectors, matrices)
            except ValueError as exc:
                ctx.fail(str(exc), f"$.{face}.{label}", label)
            sources[label] = expr
    return FockModel(dim, vectors, matrices, faces["left"], faces["right"],
                     summands, groups, sources)


def array_spec_from_doc(doc: dict, text: str | None = None):
    """``(ArraySpec, predicted table or None)`` from an array spec document."""
    ctx = _Ctx(text)
    if "base" not in doc or "row_sizes" not in doc:
        ctx.fail("array spec needs 'base' and 'row_sizes'", "$")
    base = table_from_doc(doc["base"], text, "$.base")
    scaling = {}
    for k, v in (doc.get("order_scaling") or {}).items():
        try:
            scaling[int(k)] = float(v)
        except (TypeError, ValueError):
            ctx.fail("order_scaling maps orders to exponents", f"$.order_scaling.{k}", k)
    try:
        spec = ArraySpec(base, doc["row_sizes"], scaling)
    except (TypeError, ValueError) as exc:
        ctx.fail(str(exc), "$.row_sizes", "row_sizes")
    predicted = doc.get("predicted")
    if predicted is not None:
        predicted = table_from_doc(predicted, text, "$.predicted")
    return spec, predicted
