"""Text format for blueprints, with a small expression language.

A blueprint file looks like

    blueprint dstar

    biases:
      b1 = -2*b - nu2
      b2 = -b - nu1

    mu:
      b1 = 0.325898600625

    configs:
      b2 b4 b_GW 0.351359472465

Bias values and pairwise biases are expressions over the named constants
b_GW (the gap-threshold root), b = 1 + b_GW, nu1 and nu2, with decimal
literals, +, -, * and parentheses.  Symbolic form is what makes rigorous
certification possible: a decimal image of an irrational bias cannot
witness an exactly tight triangle inequality.  Measure values and
configuration weights must be plain rational literals (decimals, exponent
notation, or p/q); they are kept as exact fractions.

`format_blueprint` emits a canonical form (biases ascending, support-only
measure, configurations in canonical order, exact rational literals) and
`blueprint_hash` is the sha256 of that canonical text, so two blueprints
hash equal iff they serialize identically.  parse(format(bp)) == bp for
any blueprint built from this module.
"""

from __future__ import annotations

import hashlib
import re
from fractions import Fraction
from pathlib import Path

from ..errors import FormatError
from ..rigor import Interval, constants
from .model import Blueprint, Configuration, WeightedConfiguration, exact_measure

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<sym>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*()])"
    r")")


def _constant_env() -> dict[str, Interval]:
    c = constants()
    return {"b_GW": c.b_gw, "b": c.b, "nu1": c.nu1, "nu2": c.nu2}


def _tokenize(text: str) -> list[str]:
    tokens, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            if text[pos:].strip():
                raise FormatError(f"cannot tokenize expression at: {text[pos:]!r}")
            break
        tokens.append(m.group("num") or m.group("sym") or m.group("op"))
        pos = m.end()
    return tokens


class _ExprParser:
    """Recursive descent over: expr := term ((+|-) term)*,
    term := factor (* factor)*, factor := - factor | ( expr ) | num | sym."""

    def __init__(self, tokens: list[str], env: dict[str, Interval]):
        self.tokens = tokens
        self.pos = 0
        self.env = env

    def _peek(self) -> str | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self) -> str:
        tok = self._peek()
        if tok is None:
            raise FormatError("unexpected end of expression")
        self.pos += 1
        return tok

    def parse(self) -> Interval:
        value = self._expr()
        if self._peek() is not None:
            raise FormatError(f"trailing tokens in expression: {self.tokens[self.pos:]}")
        return value

    def _expr(self) -> Interval:
        value = self._term()
        while self._peek() in ("+", "-"):
            op = self._next()
            rhs = self._term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def _term(self) -> Interval:
        value = self._factor()
        while self._peek() == "*":
            self._next()
            value = value * self._factor()
        return value

    def _factor(self) -> Interval:
        tok = self._next()
        if tok == "-":
            return -self._factor()
        if tok == "(":
            value = self._expr()
            if self._next() != ")":
                raise FormatError("unbalanced parentheses")
            return value
        if tok[0].isdigit() or tok[0] == ".":
            return Interval.from_decimal(tok)
        if tok in self.env:
            return self.env[tok]
        raise FormatError(
            f"unknown symbol {tok!r}; expressions may use {sorted(self.env)}")


def eval_expr(text: str, env: dict[str, Interval] | None = None) -> Interval:
    """Evaluate an expression string to an enclosure."""
    return _ExprParser(_tokenize(text), env or _constant_env()).parse()


def _fraction(text: str, what: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"{what} must be a rational literal, got {text!r}") from exc


def fraction_text(f: Fraction) -> str:
    """Exact decimal form when the denominator is 2^a 5^b, else p/q."""
    den = f.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{f.numerator}/{f.denominator}"
    k = max(twos, fives)
    scaled = abs(f.numerator) * 10 ** k // f.denominator
    sign = "-" if f.numerator < 0 else ""
    if k == 0:
        return f"{sign}{scaled}"
    digits = str(scaled).rjust(k + 1, "0")
    whole, frac = digits[:-k], digits[-k:]
    frac = frac.rstrip("0") or "0"
    return f"{sign}{whole}.{frac}"


# -- parsing -----------------------------------------------------------------


def parse_blueprint(text: str) -> Blueprint:
    """Parse the text format into a validated Blueprint."""
    env = _constant_env()
    name = None
    section = None
    bias_exprs: dict[str, str] = {}
    biases: dict[str, Interval] = {}
    mu_literals: dict[str, str] = {}
    config_rows: list[tuple[str, str, str, str]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if name is None:
            parts = line.split()
            if len(parts) != 2 or parts[0] != "blueprint":
                raise FormatError(f"line {lineno}: expected 'blueprint <name>'")
            name = parts[1]
            continue
        if line in ("biases:", "mu:", "configs:"):
            section = line[:-1]
            continue
        if section == "biases":
            sym, _, expr = line.partition("=")
            sym, expr = sym.strip(), expr.strip()
            if not sym or not expr:
                raise FormatError(f"line {lineno}: expected '<symbol> = <expression>'")
            if sym in env or sym in biases:
                raise FormatError(f"line {lineno}: symbol {sym!r} already defined")
            bias_exprs[sym] = expr
            biases[sym] = eval_expr(expr, env)
        elif section == "mu":
            sym, _, lit = line.partition("=")
            sym, lit = sym.strip(), lit.strip()
            if sym not in biases:
                raise FormatError(f"line {lineno}: measure on undefined bias {sym!r}")
            mu_literals[sym] = lit
        elif section == "configs":
            parts = line.split()
            if len(parts) != 4:
                raise FormatError(
                    f"line {lineno}: expected '<sym> <sym> <pair expression> <weight>'")
            config_rows.append((parts[0], parts[1], parts[2], parts[3]))
        else:
            raise FormatError(f"line {lineno}: content before any section header")

    if name is None:
        raise FormatError("missing 'blueprint <name>' header")
    if not biases:
        raise FormatError("missing biases section")
    if not config_rows:
        raise FormatError("missing configs section")

    mu, mu_exact = exact_measure({s: _fraction(v, f"mu({s})") for s, v in mu_literals.items()})

    configs = []
    for i, j, pair_expr, weight_lit in config_rows:
        for sym in (i, j):
            if sym not in biases:
                raise FormatError(f"configuration uses undefined bias {sym!r}")
        if biases[i].mid > biases[j].mid:
            i, j = j, i
        weight = _fraction(weight_lit, f"weight of ({i}, {j})")
        theta = Configuration(biases[i], biases[j], eval_expr(pair_expr, env))
        configs.append(WeightedConfiguration(
            i=i, j=j, theta=theta,
            weight=Interval.from_decimal(str(weight)),
            weight_exact=weight,
            pair_expr=pair_expr,
        ))

    return Blueprint(
        name=name,
        biases=biases,
        mu=mu,
        configs=tuple(configs),
        mu_exact=mu_exact,
        bias_exprs=bias_exprs,
    )


# -- formatting ----------------------------------------------------------------


def format_blueprint(bp: Blueprint) -> str:
    """Canonical text for bp; requires expression-form biases and configs."""
    if bp.bias_exprs is None or set(bp.bias_exprs) != set(bp.biases):
        raise FormatError("blueprint lacks bias expressions; cannot serialize losslessly")
    if bp.mu_exact is None:
        raise FormatError("blueprint lacks an exact measure; cannot serialize losslessly")
    lines = [f"blueprint {bp.name}", "", "biases:"]
    for sym in bp.symbols():
        lines.append(f"  {sym} = {bp.bias_exprs[sym]}")
    lines += ["", "mu:"]
    for sym in bp.symbols():
        frac = bp.mu_exact.get(sym, Fraction(0))
        if frac != 0:
            lines.append(f"  {sym} = {fraction_text(frac)}")
    lines += ["", "configs:"]
    for wc in bp.configs:
        if wc.pair_expr is None or wc.weight_exact is None:
            raise FormatError(
                f"configuration ({wc.i}, {wc.j}) lacks its expression or exact weight")
        lines.append(
            f"  {wc.i} {wc.j} {wc.pair_expr} {fraction_text(wc.weight_exact)}")
    return "\n".join(lines) + "\n"


def blueprint_hash(bp: Blueprint) -> str:
    """sha256 hex digest of the canonical text."""
    return hashlib.sha256(format_blueprint(bp).encode("utf-8")).hexdigest()


def read_blueprint(path: str | Path) -> Blueprint:
    return parse_blueprint(Path(path).read_text(encoding="utf-8"))


def write_blueprint(bp: Blueprint, path: str | Path) -> None:
    Path(path).write_text(format_blueprint(bp), encoding="utf-8")
