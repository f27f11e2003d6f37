"""Line-oriented text format for reaction networks (``.crn`` files).

Example::

    # archetypal network
    species: X, Y
    X + Y -> 2 Y ; alpha
    Y -> X ; beta
    params: alpha=2, beta=1

Reaction lines are ``complex -> complex ; rate`` or
``complex <-> complex ; forward, reverse``. A complex is ``0`` (empty) or
``+``-separated terms ``[coefficient] name``. Rates are numbers (integers,
``p/q`` rationals or decimals, all converted exactly) or parameter names
defined on a ``params:`` line anywhere in the file. ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .model import Complex, Reaction, ReactionNetwork, Species

MAX_COEFFICIENT = 10**6

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_NUMBER = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?(?:/\d+)?\Z")
_TERM = re.compile(r"(\d+)?\s*([A-Za-z_][A-Za-z0-9_]*)\Z")
_HEADER = re.compile(r"\s*(species|params)\s*:")


@dataclass(frozen=True)
class NetworkSource:
    text: Union[str, bytes]
    origin: str = "<string>"


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int
    column: int
    message: str
    severity: str = "error"

    def format(self, origin: str = "<string>") -> str:
        return f"{origin}:{self.line}:{self.column}: {self.severity}: {self.message}"


class NetworkParseError(ValueError):
    """Raised by :func:`parse_network` when the source has errors."""

    def __init__(self, diagnostics: list[ParseDiagnostic], origin: str = "<string>"):
        self.diagnostics = diagnostics
        self.origin = origin
        super().__init__("\n".join(d.format(origin) for d in diagnostics if d.severity == "error"))


@dataclass
class ParseResult:
    network: ReactionNetwork | None
    diagnostics: list[ParseDiagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.network is not None


@dataclass
class _RawReaction:
    line: int
    reactant: dict[str, int]
    product: dict[str, int]
    rate: object  # Fraction or (name, line, column)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.diags: list[ParseDiagnostic] = []
        self.header: list[str] | None = None
        self.mentioned: list[str] = []
        self.params: dict[str, Fraction] = {}
        self.param_order: list[str] = []
        self.reactions: list[_RawReaction] = []

    def error(self, line: int, col: int, msg: str, severity: str = "error"):
        self.diags.append(ParseDiagnostic(line, max(col, 1), msg, severity))

    def run(self) -> ParseResult:
        for lineno, raw in enumerate(self.text.splitlines(), start=1):
            line = raw.split("#", 1)[0]
            if not line.strip():
                continue
            m = _HEADER.match(line)
            if m:
                body_start = m.end()
                if m.group(1) == "species":
                    self._species_line(lineno, line, body_start)
                else:
                    self._params_line(lineno, line, body_start)
            else:
                self._reaction_line(lineno, line)
        return self._assemble()

    # pieces ---------------------------------------------------------------

    @staticmethod
    def _split(line: str, start: int, end: int, sep: str):
        """Split ``line[start:end]`` on ``sep``; yield (stripped text, 1-based column)."""
        pos = start
        for piece in line[start:end].split(sep):
            lead = len(piece) - len(piece.lstrip())
            yield piece.strip(), pos + lead + 1
            pos += len(piece) + len(sep)

    def _species_line(self, lineno: int, line: str, start: int):
        if self.header is not None:
            self.error(lineno, 1, "duplicate species header")
            return
        names = []
        for name, col in self._split(line, start, len(line), ","):
            if not _IDENT.match(name):
                self.error(lineno, col, f"invalid species name {name!r}")
            elif name in names:
                self.error(lineno, col, f"species {name!r} declared twice")
            else:
                names.append(name)
        self.header = names

    def _params_line(self, lineno: int, line: str, start: int):
        for item, col in self._split(line, start, len(line), ","):
            if not item:
                self.error(lineno, col, "empty parameter definition")
                continue
            if "=" not in item:
                self.error(lineno, col, f"expected name=value, got {item!r}")
                continue
            name, raw_value = item.split("=", 1)
            name, value = name.strip(), raw_value.strip()
            vcol = col + len(item) - len(raw_value) + (len(raw_value) - len(raw_value.lstrip()))
            if not _IDENT.match(name):
                self.error(lineno, col, f"invalid parameter name {name!r}")
                continue
            if name in self.params:
                self.error(lineno, col, f"parameter {name!r} defined twice")
                continue
            num = self._number(value)
            if num is None:
                self.error(lineno, vcol, f"invalid number {value!r}")
                continue
            if num <= 0:
                self.error(lineno, vcol, f"nonpositive rate constant {value}")
                continue
            self.params[name] = num
            self.param_order.append(name)

    @staticmethod
    def _number(tok: str) -> Fraction | None:
        if not _NUMBER.match(tok) or len(tok) > 64:
            return None
        exp = re.search(r"[eE]([+-]?\d+)", tok)
        if exp and abs(int(exp.group(1))) > 64:
            return None
        try:
            if "/" in tok:
                num, den = tok.split("/")
                if int(den) == 0:
                    return None
                return Fraction(num) / Fraction(den)
            return Fraction(tok)
        except (ValueError, ZeroDivisionError, OverflowError):
            return None

    def _complex(self, lineno: int, line: str, start: int, end: int) -> dict[str, int] | None:
        body = line[start:end]
        if body.strip() == "0":
            return {}
        if not body.strip():
            self.error(lineno, start + 1, "missing complex (use 0 for the empty complex)")
            return None
        out: dict[str, int] = {}
        ok = True
        for term, col in self._split(line, start, end, "+"):
            m = _TERM.match(term)
            if not m:
                self.error(lineno, col, f"malformed stoichiometry {term!r}")
                ok = False
                continue
            digits = m.group(1)
            coeff = int(digits) if digits and len(digits) <= 9 else (1 if not digits else 0)
            if coeff == 0 or coeff > MAX_COEFFICIENT:
                self.error(lineno, col, f"malformed stoichiometry {term!r}: coefficient must be in 1..{MAX_COEFFICIENT}")
                ok = False
                continue
            name = m.group(2)
            out[name] = out.get(name, 0) + coeff
            if name not in self.mentioned:
                self.mentioned.append(name)
        return out if ok else None

    def _reaction_line(self, lineno: int, line: str):
        semi = line.find(";")
        head_end = semi if semi >= 0 else len(line)
        head = line[:head_end]
        if head.count("<->") == 1 and head.count("->") == 1:
            arrow, reversible = head.index("<->"), True
            alen = 3
        elif head.count("->") == 1 and "<->" not in head:
            arrow, reversible = head.index("->"), False
            alen = 2
        else:
            self.error(lineno, 1, "expected a reaction 'complex -> complex ; rate' or a header line")
            return
        if semi < 0:
            self.error(lineno, len(line.rstrip()) + 1, "missing '; rate' after reaction")
            return
        lhs = self._complex(lineno, line, 0, arrow)
        rhs = self._complex(lineno, line, arrow + alen, semi)
        rates = []
        for tok, col in self._split(line, semi + 1, len(line), ","):
            if not tok:
                self.error(lineno, col, "missing rate constant")
                rates.append(None)
                continue
            if _IDENT.match(tok):
                rates.append((tok, lineno, col))
                continue
            num = self._number(tok)
            if num is None:
                self.error(lineno, col, f"invalid rate constant {tok!r}")
                rates.append(None)
            elif num <= 0:
                self.error(lineno, col, f"nonpositive rate constant {tok}")
                rates.append(None)
            else:
                rates.append(num)
        want = 2 if reversible else 1
        if len(rates) != want:
            self.error(lineno, semi + 1, f"expected {want} rate constant{'s' if want > 1 else ''}, got {len(rates)}")
            return
        if lhs is None or rhs is None or any(r is None for r in rates):
            return
        if lhs == rhs:
            self.error(lineno, 1, "reactant and product complexes are identical")
            return
        self.reactions.append(_RawReaction(lineno, lhs, rhs, rates[0]))
        if reversible:
            self.reactions.append(_RawReaction(lineno, rhs, lhs, rates[1]))

    def _assemble(self) -> ParseResult:
        if self.header is not None:
            names = list(self.header)
            for name in self.mentioned:
                if name not in names:
                    self.diags.append(ParseDiagnostic(1, 1, f"species {name!r} not in the species header; appended", "warning"))
                    names.append(name)
        else:
            names = list(self.mentioned)
        index = {n: k for k, n in enumerate(names)}
        d = len(names)

        def cplx(spec: dict[str, int]) -> Complex:
            coeffs = [0] * d
            for n, c in spec.items():
                coeffs[index[n]] = c
            return Complex(tuple(coeffs))

        rxns: list[Reaction] = []
        seen: dict[tuple, int] = {}
        for raw in self.reactions:
            rate_name = None
            if isinstance(raw.rate, tuple):
                rate_name, pline, pcol = raw.rate
                if rate_name not in self.params:
                    self.error(pline, pcol, f"unresolved parameter {rate_name!r}")
                    continue
                rate = self.params[rate_name]
            else:
                rate = raw.rate
            a, b = cplx(raw.reactant), cplx(raw.product)
            if (a, b) in seen:
                self.error(raw.line, 1, f"duplicate edge (first defined on line {seen[(a, b)]})")
                continue
            seen[(a, b)] = raw.line
            rxns.append(Reaction(a, b, rate, rate_name))

        errors = [x for x in self.diags if x.severity == "error"]
        self.diags.sort(key=lambda x: (x.line, x.column))
        if errors:
            return ParseResult(None, self.diags)
        net = ReactionNetwork(
            tuple(Species(n, k) for k, n in enumerate(names)),
            tuple(rxns),
            tuple((n, self.params[n]) for n in self.param_order),
        )
        return ParseResult(net, self.diags)


def _decode(text: Union[str, bytes]) -> tuple[str | None, ParseDiagnostic | None]:
    if isinstance(text, str):
        return text, None
    try:
        return bytes(text).decode("utf-8"), None
    except UnicodeDecodeError as exc:
        before = bytes(text)[: exc.start]
        line = before.count(b"\n") + 1
        col = exc.start - (before.rfind(b"\n") + 1) + 1
        return None, ParseDiagnostic(line, col, "invalid UTF-8 byte sequence")


def parse_with_diagnostics(src: Union[NetworkSource, str, bytes]) -> ParseResult:
    """Parse a network and return every diagnostic instead of raising."""
    if not isinstance(src, NetworkSource):
        src = NetworkSource(src)
    text, diag = _decode(src.text)
    if diag is not None:
        return ParseResult(None, [diag])
    return _Parser(text).run()


def parse_network(src: Union[NetworkSource, str, bytes], origin: str | None = None) -> ReactionNetwork:
    """Parse ``.crn`` text into a :class:`ReactionNetwork`.

    Raises:
        NetworkParseError: carrying the full list of diagnostics when any
            error was found.
    """
    if not isinstance(src, NetworkSource):
        src = NetworkSource(src, origin or "<string>")
    result = parse_with_diagnostics(src)
    if result.network is None:
        raise NetworkParseError(result.diagnostics, src.origin)
    return result.network


def read_network(path) -> ReactionNetwork:
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_network(NetworkSource(data, str(path)))


def _format_rate(rxn: Reaction) -> str:
    return rxn.rate_name if rxn.rate_name else _format_number(rxn.rate)


def _format_number(value: Fraction) -> str:
    return str(value)


def serialize(net: ReactionNetwork) -> str:
    """Canonical text form; ``parse_network(serialize(net)) == net``."""
    names = net.species_names
    lines = []
    if names:
        lines.append("species: " + ", ".join(names))
    if net.parameters:
        lines.append("params: " + ", ".join(f"{n}={_format_number(v)}" for n, v in net.parameters))
    for rxn in net.reactions:
        lines.append(f"{rxn.reactant.format(names)} -> {rxn.product.format(names)} ; {_format_rate(rxn)}")
    return "\n".join(lines) + "\n"
