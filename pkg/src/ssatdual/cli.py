"""Command-line front end: TOML scenarios in, reports and diamond diagrams out.

Scenario files are TOML.  Recognised keys::

    command = "tdualize"          # classify | tdualize | ktheory | simplify | cohomology
    space = "S1"                  # name ("T3", "S2 x S1", "RP2", "pt") or a table:
                                  #   [space] label = "K", vertices = 4, simplices = [[0,1,2], ...]
    fiber = "UHF:2"               # catalog name
    coefficients = "Z[1/2]"       # cohomology command only (default "Z")
    branch = "torsion"            # optional: purely_infinite | stably_finite | torsion
    expr = "cross(D, Z, alpha)"   # simplify / ktheory: expression instead of the bundle D
    k_fixed = ["Z", "Z/2"]        # ktheory: K(B^alpha) for the torsion-diamond formula

    [class]                       # class components per degree (Kunneth block coordinates)
    3 = [1]

    [[actions]]
    role = "z"                    # z | circle | r (roles used by tdualize)
    label = "alpha"
    kind = "spectrum-fixing"      # trace | quasi-free | translation | spectrum-fixing | named
    rokhlin_dimension = 0
    commutes = true
    fiber_action = { kind = "trace", factor = "2" }

Quasi-free actions take ``lambda = "1/3"`` or ``sign = 1`` / ``sign = -1``
for an irrational parameter.

Expression grammar (``E``)::

    E    := term (("⊗" | "(x)") term)*
    term := "D" | "K" | "C(" space ")" | fiber-name | "(" E ")"
          | "cross(" E "," group "," act ")" | "stab(" E ")" | "ind(" E "," act ")"
    act  := label of an [[actions]] entry | "dual(" act ")"

Exit codes: 0 success, 2 parse or validation error, 3 unevaluated result.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
import tomli_w

from .abgroup import SLocalGroup, parse_group
from .calg import (
    Action,
    BundleAlg,
    Branch,
    Crossed,
    CstarExpr,
    Diagnostic,
    Diamond,
    Fiber,
    FunctionsOn,
    Induced,
    Stabilize,
    Tensor,
    bundle,
    classification_warnings,
    classify_bundles,
    explain_torsion_class,
    mathai_rosenberg_dual,
    prim,
    simplify,
    t_dualize,
    validate_action,
)
from .catalog import KPair, Kind, SSAlgebra, assumptions_for, parse_algebra
from .errors import SSATError, UnevaluatedError, UnsupportedError, ValidationError
from .ktheory import k_of_expr, k_step, torsion_diamond_k
from .topology import NCSpace, SimplicialComplex, Space, Triangulated, cohomology, parse_space

__all__ = [
    "ScenarioError",
    "Scenario",
    "Report",
    "parse_scenario",
    "load_scenario",
    "parse_expr",
    "render_diamond",
    "run_scenario",
    "validate_scenario",
    "main",
]

COMMANDS = ("classify", "tdualize", "ktheory", "simplify", "cohomology")
ROLES = {"z": "Z", "circle": "S1", "r": "R"}
_KNOWN_KEYS = {"command", "name", "space", "fiber", "coefficients", "branch", "expr", "k_fixed", "class", "actions"}
_ACTION_KEYS = {"role", "label", "kind", "factor", "lambda", "sign", "rokhlin_dimension", "commutes", "fiber_action"}


class ScenarioError(ValidationError):
    """Scenario text failed to parse; carries a position when known."""

    def __init__(self, msg: str, line: int | None = None, column: int | None = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(msg + where)
        self.line, self.column = line, column


# ---------------------------------------------------------------------------
# Scenarios


@dataclass
class Scenario:
    raw: dict
    command: str | None
    space: Space | None
    fiber: SSAlgebra | None
    class_vectors: dict[int, tuple]
    actions: dict[str, Action]
    roles: dict[str, Action]
    expr: str | None = None
    coefficients: SLocalGroup | None = None
    branch: str | None = None
    k_fixed: KPair | None = None

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        skip = {"raw"}
        return all(getattr(self, f) == getattr(other, f) for f in self.__dataclass_fields__ if f not in skip)

    def echo(self) -> str:
        return tomli_w.dumps(self.raw)


def _parse_fraction(v, what: str) -> Fraction:
    try:
        return Fraction(str(v))
    except (ValueError, ZeroDivisionError):
        raise ScenarioError(f"{what}: {v!r} is not a rational number") from None


def _parse_action(tbl: dict, where: str) -> Action:
    if not isinstance(tbl, dict):
        raise ScenarioError(f"{where}: action must be a table")
    extra = set(tbl) - _ACTION_KEYS
    if extra:
        raise ScenarioError(f"{where}: unknown action key {sorted(extra)[0]!r}")
    kind = tbl.get("kind")
    flags = {
        "label": tbl.get("label"),
        "rokhlin_dimension": tbl.get("rokhlin_dimension"),
        "commutes_with_translation": bool(tbl.get("commutes", False)),
    }
    if kind == "trace":
        if "factor" not in tbl:
            raise ScenarioError(f"{where}: trace action needs factor")
        return Action.trace_scaling(_parse_fraction(tbl["factor"], where), **flags)
    if kind == "quasi-free":
        if "lambda" in tbl:
            return Action.quasi_free(_parse_fraction(tbl["lambda"], where), **flags)
        return Action.quasi_free(sign=tbl.get("sign"), **flags)
    if kind == "translation":
        return Action.translation(**flags)
    if kind == "spectrum-fixing":
        inner = tbl.get("fiber_action")
        if inner is None:
            raise ScenarioError(f"{where}: spectrum-fixing action needs fiber_action")
        return Action.spectrum_fixing(_parse_action(inner, where + ".fiber_action"), **flags)
    if kind == "named":
        return Action.named(tbl.get("label") or "", **{k: v for k, v in flags.items() if k != "label"})
    raise ScenarioError(f"{where}: unknown action kind {kind!r}")


def _parse_space_entry(v) -> Space:
    if isinstance(v, str):
        return parse_space(v)
    if isinstance(v, dict):
        if "vertices" not in v or "simplices" not in v:
            raise ScenarioError("triangulated space needs vertices and simplices")
        K = SimplicialComplex(int(v["vertices"]), tuple(tuple(s) for s in v["simplices"]))
        return Triangulated(K, str(v.get("label", "K")))
    raise ScenarioError("space must be a name or a triangulation table")


def parse_scenario(text: str) -> Scenario:
    """Parse scenario TOML text.  Errors carry line/column when the TOML is malformed."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+), column (\d+)", str(exc))
        line, col = (int(m.group(1)), int(m.group(2))) if m else (None, None)
        msg = re.sub(r"\s*\(at line \d+, column \d+\)", "", str(exc))
        raise ScenarioError(f"TOML syntax error: {msg}", line, col) from None
    extra = set(raw) - _KNOWN_KEYS
    if extra:
        raise ScenarioError(f"unknown scenario key {sorted(extra)[0]!r}")
    command = raw.get("command")
    if command is not None and command not in COMMANDS:
        raise ScenarioError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    space = _parse_space_entry(raw["space"]) if "space" in raw else None
    fiber = parse_algebra(raw["fiber"]) if "fiber" in raw else None
    vectors = {}
    for k, v in raw.get("class", {}).items():
        if not re.fullmatch(r"\d+", str(k)):
            raise ScenarioError(f"class degree {k!r} is not an integer")
        if not isinstance(v, list):
            raise ScenarioError(f"class component for degree {k} must be a list")
        vectors[int(k)] = tuple(_parse_fraction(x, f"class.{k}") for x in v)
    actions, roles = {}, {}
    for i, tbl in enumerate(raw.get("actions", [])):
        where = f"actions[{i}]"
        a = _parse_action(tbl, where)
        label = tbl.get("label") or f"action{i}"
        if label in actions:
            raise ScenarioError(f"{where}: duplicate action label {label!r}")
        actions[label] = a
        role = tbl.get("role")
        if role is not None:
            if role not in ROLES:
                raise ScenarioError(f"{where}: unknown role {role!r}; expected z, circle or r")
            if role in roles:
                raise ScenarioError(f"{where}: role {role!r} given twice")
            roles[role] = a
    coeff = parse_group(raw["coefficients"]) if "coefficients" in raw else None
    k_fixed = None
    if "k_fixed" in raw:
        kf = raw["k_fixed"]
        if not (isinstance(kf, list) and len(kf) == 2):
            raise ScenarioError("k_fixed must be a list of two groups")
        k_fixed = KPair(parse_group(kf[0]), parse_group(kf[1]))
    branch = raw.get("branch")
    if branch not in (None, "purely_infinite", "stably_finite", "torsion"):
        raise ScenarioError(f"unknown branch {branch!r}")
    return Scenario(raw, command, space, fiber, vectors, actions, roles, raw.get("expr"), coeff, branch, k_fixed)


def load_scenario(path) -> Scenario:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# Expressions


class _ExprParser:
    def __init__(self, text: str, sc: Scenario):
        self.s, self.i, self.sc = text, 0, sc

    def fail(self, msg):
        raise ScenarioError(f"expr: {msg}", 1, self.i + 1)

    def ws(self):
        while self.i < len(self.s) and self.s[self.i].isspace():
            self.i += 1

    def peek(self, tok: str) -> bool:
        self.ws()
        return self.s.startswith(tok, self.i)

    def eat(self, tok: str):
        if not self.peek(tok):
            self.fail(f"expected {tok!r}")
        self.i += len(tok)

    _WORD = re.compile(r"UHF:(?:ALL|\d+(?:,\d+)*)(?:\*Oinf)?|MT\(A\(\d+,\d+\)\)|[A-Za-z0-9_#^|]+")

    def word(self) -> str:
        self.ws()
        m = self._WORD.match(self.s, self.i)
        if not m:
            self.fail("expected a name")
        self.i = m.end()
        return m.group(0)

    def until_close(self) -> str:
        depth, start = 0, self.i
        while self.i < len(self.s):
            c = self.s[self.i]
            if c == "(":
                depth += 1
            elif c == ")":
                if depth == 0:
                    return self.s[start:self.i]
                depth -= 1
            self.i += 1
        self.fail("unbalanced parenthesis")

    def parse(self) -> CstarExpr:
        e = self.expr()
        self.ws()
        if self.i != len(self.s):
            self.fail("trailing input")
        return e

    def expr(self) -> CstarExpr:
        parts = [self.term()]
        while self.peek("⊗") or self.peek("(x)"):
            self.eat("⊗" if self.peek("⊗") else "(x)")
            parts.append(self.term())
        return parts[0] if len(parts) == 1 else Tensor(tuple(parts))

    def term(self) -> CstarExpr:
        self.ws()
        for kw in ("cross(", "stab(", "ind("):
            if self.peek(kw):
                self.eat(kw)
                inner = self.expr()
                if kw == "cross(":
                    self.eat(",")
                    group = self.word()
                    self.eat(",")
                    act = self.action()
                    self.eat(")")
                    return Crossed(inner, group, act)
                if kw == "ind(":
                    self.eat(",")
                    act = self.action()
                    self.eat(")")
                    return Induced(inner, act)
                self.eat(")")
                return Stabilize(inner)
        if self.peek("C("):
            self.eat("C(")
            txt = self.until_close()
            self.eat(")")
            return FunctionsOn(parse_space(txt))
        if self.peek("("):
            self.eat("(")
            e = self.expr()
            self.eat(")")
            return e
        w = self.word()
        if w == "D":
            return _bundle_of(self.sc)
        if w == "K":
            return Fiber(SSAlgebra.complex(), True)
        try:
            return Fiber(parse_algebra(w))
        except ValidationError:
            self.i -= len(w)
            self.fail(f"unknown algebra {w!r}")

    def action(self) -> Action:
        if self.peek("dual("):
            self.eat("dual(")
            a = self.action()
            self.eat(")")
            return Action.dual_of(a)
        w = self.word()
        if w not in self.sc.actions:
            self.i -= len(w)
            self.fail(f"unknown action {w!r}")
        return self.sc.actions[w]


def parse_expr(text: str, sc: Scenario | None = None) -> CstarExpr:
    """Parse an expression; ``D`` is the scenario bundle and labels name its actions."""
    sc = sc or parse_scenario("")
    return _ExprParser(text, sc).parse()


def _bundle_of(sc: Scenario) -> BundleAlg:
    if sc.space is None or sc.fiber is None:
        raise ScenarioError("the bundle D needs space and fiber")
    return bundle(sc.space, sc.fiber, sc.class_vectors)


# ---------------------------------------------------------------------------
# Reports


@dataclass
class Report:
    command: str
    inputs: str
    results: dict
    trace: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    exit_code: int = 0
    diamond: Diamond | None = None

    def to_json(self) -> str:
        doc = {
            "command": self.command,
            "exit_code": self.exit_code,
            "inputs": self.inputs,
            "results": self.results,
            "trace": self.trace,
            "warnings": self.warnings,
        }
        return json.dumps(doc, indent=2, ensure_ascii=False, sort_keys=True) + "\n"

    def to_text(self, with_trace: bool = False) -> str:
        lines = [f"# {self.command}", "## inputs", self.inputs.rstrip(), "## results"]
        for k, v in self.results.items():
            if isinstance(v, list):
                lines.append(f"{k}:")
                lines.extend(f"  {x}" for x in v)
            else:
                lines.append(f"{k}: {v}")
        if self.diamond is not None:
            lines.append("## diamond")
            lines.append(render_diamond(self.diamond, "text").rstrip())
        if self.warnings:
            lines.append("## warnings")
            lines.extend(f"- {w}" for w in self.warnings)
        if with_trace and self.trace:
            lines.append("## trace")
            lines.extend(f"  {t}" for t in self.trace)
        return "\n".join(lines) + "\n"


def _warn_fiber(A: SSAlgebra | None, X: Space | None) -> list[str]:
    if A is None:
        return []
    out = list(assumptions_for(A))
    if X is not None:
        out += classification_warnings(X, A)
    return out


def _require(sc: Scenario, *keys):
    for k in keys:
        if getattr(sc, k) is None:
            raise ScenarioError(f"command {sc.command!r} needs {k}")


def _reduced_exit(e: CstarExpr) -> int:
    return 3 if isinstance(prim(e), NCSpace) else 0


def _cmd_classify(sc: Scenario, rep: Report):
    _require(sc, "space", "fiber")
    groups = classify_bundles(sc.space, sc.fiber)
    rep.results["space"] = str(sc.space)
    rep.results["fiber"] = str(sc.fiber)
    rep.results["classification"] = [
        f"degree {d}: {g}" + (" (trivial)" if g.is_trivial() else "") for d, g in groups
    ]
    if all(g.is_trivial() for _, g in groups):
        rep.results["summary"] = "all factors trivial: every bundle is C(X) (x) A (x) K"
    if sc.class_vectors or "class" in sc.raw:
        D = _bundle_of(sc)
        tors, why = explain_torsion_class(D)
        rep.results["class"] = D.char_class.label()
        rep.results["torsion_class"] = f"{str(tors).lower()} ({why})"
    rep.warnings += _warn_fiber(sc.fiber, sc.space)


def _cmd_cohomology(sc: Scenario, rep: Report):
    _require(sc, "space")
    M = sc.coefficients or SLocalGroup(1)
    rep.results["space"] = str(sc.space)
    rep.results["coefficients"] = str(M)
    rep.results["cohomology"] = [f"H^{k} = {cohomology(sc.space, k, M)}" for k in range(sc.space.dim + 1)]


def _target(sc: Scenario) -> CstarExpr:
    if sc.expr is not None:
        return parse_expr(sc.expr, sc)
    return _bundle_of(sc)


def _cmd_simplify(sc: Scenario, rep: Report):
    e = _target(sc)
    steps: list = []
    nf = simplify(e, trace=steps)
    rep.results["input"] = str(e)
    rep.results["normal_form"] = str(nf)
    rep.results["prim"] = str(prim(nf))
    rep.trace += [str(s) for s in steps]
    rep.warnings += _warn_fiber(sc.fiber, sc.space)
    rep.exit_code = _reduced_exit(nf)


def _cmd_ktheory(sc: Scenario, rep: Report):
    if sc.k_fixed is not None:
        k = torsion_diamond_k(sc.k_fixed)
        rep.results["k_fixed"] = str(sc.k_fixed)
        rep.results["K0(B)"] = str(k.k0)
        rep.results["K1(B)"] = str(k.k1)
        rep.trace.append(k_step("torsion-diamond", f"K(B^alpha) = {sc.k_fixed}"))
        return
    e = _target(sc)
    res = k_of_expr(e)
    rep.results["expression"] = str(simplify(e))
    if res.evaluated:
        rep.results["K0"] = str(res.value.k0)
        rep.results["K1"] = str(res.value.k1)
    else:
        rep.results["K"] = str(res.value)
        if res.constraints:
            rep.results["constraints"] = list(res.constraints)
        rep.exit_code = 3
    rep.trace += list(res.trace)
    rep.warnings += _warn_fiber(sc.fiber, sc.space) + list(res.notes)


def _cmd_tdualize(sc: Scenario, rep: Report):
    D = _target(sc)
    if isinstance(D, BundleAlg) and D.fiber.kind is Kind.COMPLEX and not sc.roles:
        mr = mathai_rosenberg_dual(D)
        rep.results["dual_space"] = str(mr.space)
        rep.results["dual_c1"] = mr.c1_dual.label()
        rep.results["dual_flux"] = mr.flux.label() if mr.flux is not None else "underdetermined"
        rep.results["constraints"] = list(mr.constraints)
        rep.trace.append(k_step("Mathai-Rosenberg", str(D)))
        return
    d = t_dualize(
        D,
        sc.roles.get("z"),
        sc.roles.get("circle"),
        sc.roles.get("r"),
        branch=sc.branch,
    )
    rep.diamond = d
    rep.results["branch"] = d.branch.value
    for c in ("top", "left", "right", "bottom"):
        rep.results[c] = str(d.corner(c))
    for k, v in d.aliases.items():
        rep.results[f"alias.{k}"] = str(v)
    for k, v in d.parameters.items():
        rep.results[f"parameter.{k}"] = v
    if d.unique:
        rep.results["uniqueness"] = "right corner unique up to cocycle conjugacy"
    rep.trace += [str(s) for s in d.trace]
    rep.warnings += _warn_fiber(sc.fiber, sc.space) + list(d.notes)
    rep.exit_code = _reduced_exit(d.right)


_HANDLERS = {
    "classify": _cmd_classify,
    "cohomology": _cmd_cohomology,
    "simplify": _cmd_simplify,
    "ktheory": _cmd_ktheory,
    "tdualize": _cmd_tdualize,
}


def execute(sc: Scenario, command: str | None = None) -> Report:
    cmd = command or sc.command
    if cmd is None:
        raise ScenarioError("no command given on the command line or in the scenario")
    if cmd not in _HANDLERS:
        raise ScenarioError(f"unknown command {cmd!r}")
    sc.command = cmd
    rep = Report(cmd, sc.echo(), {})
    try:
        _HANDLERS[cmd](sc, rep)
    except UnevaluatedError as exc:
        rep.results["unevaluated"] = exc.reason
        rep.exit_code = 3
    return rep


def run_scenario(path, command: str | None = None) -> Report:
    """Load and execute a scenario file."""
    return execute(load_scenario(path), command)


def validate_scenario(path) -> list[Diagnostic]:
    """All error-level findings for a scenario, without executing it."""
    try:
        sc = load_scenario(path) if not isinstance(path, Scenario) else path
    except (SSATError, OSError) as exc:
        return [Diagnostic("error", "parse", str(exc))]
    out: list[Diagnostic] = []
    D = None
    if sc.space is not None and sc.fiber is not None:
        try:
            classify_bundles(sc.space, sc.fiber)
        except UnsupportedError as exc:
            out.append(Diagnostic("error", "unsupported", str(exc)))
        try:
            D = _bundle_of(sc)
        except UnsupportedError as exc:
            out.append(Diagnostic("error", "unsupported", str(exc)))
        except ValidationError as exc:
            code = "degree-mismatch" if "does not exist" in str(exc) else "class"
            out.append(Diagnostic("error", code, str(exc)))
    if sc.expr is not None:
        try:
            parse_expr(sc.expr, sc)
        except SSATError as exc:
            out.append(Diagnostic("error", "expr", str(exc)))
    target = D if D is not None else (Fiber(sc.fiber, True) if sc.fiber is not None else None)
    if target is not None:
        for role, a in sorted(sc.roles.items()):
            out += [d for d in validate_action(target, a, ROLES[role]) if d.level == "error"]
    return out


# ---------------------------------------------------------------------------
# Diamond rendering


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def render_diamond(d: Diamond, fmt: str = "text") -> str:
    """Render a diamond as a text diagram or a dot graph (byte-stable)."""
    if fmt == "dot":
        lines = [
            "digraph TDualityDiamond {",
            '  rankdir="TB";',
            f'  label="{d.branch.value}";',
            "  node [shape=box];",
        ]
        for c in ("top", "left", "right", "bottom"):
            label = d.corner(c).render(ascii=True)
            if c == "right" and d.unique:
                label += "\\nunique up to cocycle conjugacy"
            if c in d.aliases and d.branch is Branch.TORSION_CLASS:
                label += "\\n= " + d.aliases[c].render(ascii=True)
            label = _dot_escape(label).replace("\\\\n", "\\n")
            lines.append(f'  {c} [label="{label}"];')
        for a in d.arrows:
            lines.append(f'  {a.source} -> {a.target} [label="{_dot_escape(a.label)}"];')
        lines.append("  { rank=same; left; right; }")
        lines.append("}")
        return "\n".join(lines) + "\n"
    if fmt != "text":
        raise ValidationError(f"unknown diamond format {fmt!r}")
    arrows = {(a.source, a.target): a.label for a in d.arrows}
    torsion = d.branch is Branch.TORSION_CLASS
    right = str(d.right) + ("   [unique up to cocycle conjugacy]" if d.unique else "")
    lines = [
        f"[{d.branch.value}]",
        f"            top: {d.top}",
        f"          /   {arrows.get(('top', 'left'), '')}",
        f"         /        {arrows.get(('top', 'right'), '')}",
        f"   left: {d.left}" + (f"   = {d.aliases['left']}" if torsion else ""),
        f"  right: {right}",
        f"         \\        {arrows.get(('right', 'bottom'), '')}",
        f"          \\   {arrows.get(('left', 'bottom'), '')}",
        f"         bottom: {d.bottom}" + (f"   = {d.aliases['bottom']}" if torsion else ""),
    ]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Entry point


def _render(rep: Report, fmt: str, with_trace: bool) -> str:
    if fmt == "json":
        return rep.to_json()
    if fmt == "dot":
        if rep.diamond is None:
            raise ScenarioError("dot output is only available for tdualize")
        return render_diamond(rep.diamond, "dot")
    return rep.to_text(with_trace)


def _run_one(path: Path, command: str | None, fmt: str, with_trace: bool) -> tuple[int, str, str]:
    """``(exit code, stdout text, stderr text)`` for one scenario."""
    try:
        if command == "validate":
            diags = validate_scenario(path)
            if fmt == "json":
                body = json.dumps([d.__dict__ for d in diags], indent=2, ensure_ascii=False) + "\n"
            else:
                body = "".join(f"{d}\n" for d in diags) or "ok: no findings\n"
            return (2 if diags else 0), body, ""
        rep = run_scenario(path, None if command == "run" else command)
        return rep.exit_code, _render(rep, fmt, with_trace), ""
    except (SSATError, OSError) as exc:
        return 2, "", f"error: {exc}\n"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tdual", description="Bundle classification, crossed products and T-duality diamonds.")
    p.add_argument("command", choices=COMMANDS + ("validate", "run"), help="run uses the scenario's own command")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", type=Path, help="scenario TOML file")
    src.add_argument("--batch", type=Path, help="directory of scenario files, evaluated concurrently")
    p.add_argument("--format", choices=("text", "json", "dot"), default="text")
    p.add_argument("--trace", action="store_true", help="include derivation steps")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.scenario is not None:
        code, out, err = _run_one(args.scenario, args.command, args.format, args.trace)
        sys.stdout.write(out)
        sys.stderr.write(err)
        return code
    files = sorted(args.batch.glob("*.toml"))
    if not files:
        sys.stderr.write(f"error: no scenario files in {args.batch}\n")
        return 2
    with ThreadPoolExecutor() as pool:
        results = list(pool.map(lambda f: _run_one(f, args.command, args.format, args.trace), files))
    for f, (code, out, err) in zip(files, results):
        sys.stdout.write(f"==> {f.name} (exit {code})\n{out}")
        sys.stderr.write(err)
    return max(code for code, _, _ in results)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
