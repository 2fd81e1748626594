"""Scenario files: TOML with typed sections, validated into plain values.

Numeric fields accept TOML numbers or short arithmetic strings such as
``"1/6"`` or ``"sqrt(2)/4"``.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

COMMANDS = ("certify", "classify", "scan-curvature", "ode", "product")
BUNDLED = Path(__file__).parent / "scenarios"

DEFAULT_Z_POINTS = 64
DEFAULT_PLANE_SAMPLES = 1024
DEFAULT_SEED = 42
DEFAULT_TOLERANCE = 1e-9


class ScenarioError(ValueError):
    """Malformed scenario; the message names the line or the offending field."""


@dataclass
class Scenario:
    command: str
    family: dict
    hyperplane: dict | None
    sampling: dict
    ode: dict = field(default_factory=dict)
    product: dict = field(default_factory=dict)
    output: str | None = None
    source: str = ""

    def echo(self) -> dict:
        out = {"command": self.command, "family": self.family, "sampling": self.sampling}
        if self.hyperplane is not None:
            out["hyperplane"] = self.hyperplane
        if self.ode:
            out["ode"] = self.ode
        if self.product:
            out["product"] = self.product
        return out


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_FUNCS = {"sqrt": math.sqrt}


def _eval(node):
    if isinstance(node, ast.Expression):
        return _eval(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left), _eval(node.right))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS and len(node.args) == 1):
        return _FUNCS[node.func.id](_eval(node.args[0]))
    raise ValueError("unsupported expression")


def number(value, name: str) -> float:
    if isinstance(value, bool):
        raise ScenarioError(f"field '{name}': expected a number, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(_eval(ast.parse(value, mode="eval")))
        except (SyntaxError, ValueError, ZeroDivisionError, OverflowError) as exc:
            raise ScenarioError(f"field '{name}': cannot evaluate {value!r} ({exc})") from None
    raise ScenarioError(f"field '{name}': expected a number, got {type(value).__name__}")


def integer(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"field '{name}': expected an integer")
    return value


def vector(value, name: str) -> list[float]:
    if not isinstance(value, list) or not value:
        raise ScenarioError(f"field '{name}': expected a non-empty array of numbers")
    return [number(v, f"{name}[{i}]") for i, v in enumerate(value)]


def _section(data: dict, key: str, required: bool) -> dict | None:
    if key not in data:
        if required:
            raise ScenarioError(f"missing section '[{key}]'")
        return None
    sec = data[key]
    if not isinstance(sec, dict):
        raise ScenarioError(f"field '{key}': expected a table")
    return sec


def _known(sec: dict, allowed: set, prefix: str):
    for key in sec:
        if key not in allowed:
            raise ScenarioError(f"field '{prefix}.{key}': unknown key")


def _family(sec: dict) -> dict:
    kind = sec.get("kind")
    if kind not in ("power", "reciprocal", "constant"):
        raise ScenarioError("field 'family.kind': expected 'power', 'reciprocal' or 'constant'")
    need = {"power": ("A", "B", "t"), "reciprocal": ("A", "B"), "constant": ("f0",)}[kind]
    _known(sec, {"kind", *need}, "family")
    out = {"kind": kind}
    for key in need:
        if key not in sec:
            raise ScenarioError(f"field 'family.{key}': required for kind '{kind}'")
        out[key] = number(sec[key], f"family.{key}")
    return out


def _hyperplane(sec: dict) -> dict:
    _known(sec, {"a", "direction", "c"}, "hyperplane")
    if ("a" in sec) == ("direction" in sec):
        raise ScenarioError("section '[hyperplane]': give exactly one of 'a' or 'direction'")
    out = {"c": number(sec.get("c", 0.0), "hyperplane.c")}
    if "a" in sec:
        out["a"] = vector(sec["a"], "hyperplane.a")
    else:
        out["direction"] = vector(sec["direction"], "hyperplane.direction")
    return out


def _sampling(sec: dict | None) -> dict:
    sec = sec or {}
    _known(sec, {"z_points", "plane_samples", "seed", "tolerance", "ambient_dim"}, "sampling")
    out = {
        "z_points": integer(sec.get("z_points", DEFAULT_Z_POINTS), "sampling.z_points"),
        "plane_samples": integer(sec.get("plane_samples", DEFAULT_PLANE_SAMPLES),
                                 "sampling.plane_samples"),
        "seed": integer(sec.get("seed", DEFAULT_SEED), "sampling.seed"),
        "tolerance": number(sec.get("tolerance", DEFAULT_TOLERANCE), "sampling.tolerance"),
    }
    if "ambient_dim" in sec:
        out["ambient_dim"] = integer(sec["ambient_dim"], "sampling.ambient_dim")
    return out


def _ode(sec: dict) -> dict:
    _known(sec, {"sum_a_sq", "z0", "z_end", "initial", "tolerance", "compare_family"}, "ode")
    out = {}
    if "sum_a_sq" in sec:
        out["sum_a_sq"] = number(sec["sum_a_sq"], "ode.sum_a_sq")
    for key in ("z0", "z_end"):
        if key not in sec:
            raise ScenarioError(f"field 'ode.{key}': required")
        out[key] = number(sec[key], f"ode.{key}")
    if "initial" in sec:
        init = vector(sec["initial"], "ode.initial")
        if len(init) != 3:
            raise ScenarioError("field 'ode.initial': expected [f, f', f'']")
        out["initial"] = init
    out["tolerance"] = number(sec.get("tolerance", 1e-10), "ode.tolerance")
    cf = sec.get("compare_family", False)
    if not isinstance(cf, bool):
        raise ScenarioError("field 'ode.compare_family': expected a boolean")
    out["compare_family"] = cf
    return out


def _product(sec: dict) -> dict:
    _known(sec, {"n", "k"}, "product")
    return {"n": integer(sec.get("n", 0), "product.n"), "k": integer(sec.get("k", 1), "product.k")}


def resolve(path: str | Path) -> Path:
    p = Path(path)
    if not p.exists() and (BUNDLED / p.name).exists():
        return BUNDLED / p.name
    return p


def parse(text: str, command: str | None = None, source: str = "<string>") -> Scenario:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"{source}: {exc}") from None
    _known(data, {"command", "family", "hyperplane", "sampling", "ode", "product", "output"}, "scenario")
    file_cmd = data.get("command")
    if file_cmd is not None and file_cmd not in COMMANDS:
        raise ScenarioError(f"field 'command': expected one of {', '.join(COMMANDS)}")
    if command and file_cmd and command != file_cmd:
        raise ScenarioError(f"field 'command': scenario is for '{file_cmd}', invoked as '{command}'")
    cmd = command or file_cmd
    if cmd is None:
        raise ScenarioError("field 'command': required when no subcommand is given")

    family = _family(_section(data, "family", True))
    needs_plane = cmd in ("certify", "classify", "product")
    hp = _section(data, "hyperplane", needs_plane)
    hyperplane = _hyperplane(hp) if hp is not None else None
    ode = _ode(_section(data, "ode", True)) if cmd == "ode" else {}
    product = _product(_section(data, "product", True)) if cmd == "product" else {}
    out_sec = _section(data, "output", False) or {}
    _known(out_sec, {"path"}, "output")
    output = out_sec.get("path")
    if output is not None and not isinstance(output, str):
        raise ScenarioError("field 'output.path': expected a string")
    return Scenario(cmd, family, hyperplane, _sampling(_section(data, "sampling", False)),
                    ode, product, output, source)


def load(path: str | Path, command: str | None = None) -> Scenario:
    p = resolve(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {str(path)!r}: {exc.strerror}") from None
    return parse(text, command, str(p))
