"""Per-pair classification of dose-response behaviour and full tables.

Each cell ``(input i, output j)`` combines the exact certificate from the
symbolic engine with the empirical verdict of a numeric sweep:

* a unique symbolic candidate is taken as is (SymbolicCertified) provided
  the numeric tail does not contradict it;
* several candidates are narrowed by propagating the certified limits of
  the free species through the steady-state parametrization, and then by
  the numeric tail (Hybrid);
* without symbolic information the numeric verdict alone decides
  (NumericInferred), which can never yield ACR.

A contradiction between the two pipelines makes the cell Undetermined.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from .conservation import ConservationLaw, kernel_basis, positive_laws, positive_support_contains
from .model import ReactionNetwork
from .numeric import (
    DEFAULT_OPTIONS,
    EmpiricalVerdict,
    SolverOptions,
    Sweep,
    VerdictKind,
    base_total,
    check_well_defined,
    default_grid,
    empirical_verdict,
    sweep,
)
from .symbolic.elimination import ElimPolynomial, NetworkAlgebra, NotFound, SpecializationError, Unsupported
from .symbolic.limits import (
    Asymptotic,
    Behaviour,
    LimitCertificate,
    LimitKind,
    branch_model,
    certified_limit,
    propagate_limits,
)
from .symbolic.roots import RootValue

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
_AGREE_TOL = 0.02


class Kind(str, Enum):
    ACR = "ACR"
    AACR = "aACR"
    DIVERGENT = "Divergent"
    EXTINCT = "Extinct"
    UNDETERMINED = "Undetermined"


class Provenance(str, Enum):
    SYMBOLIC = "SymbolicCertified"
    NUMERIC = "NumericInferred"
    HYBRID = "Hybrid"


_SYMBOLS = {
    Kind.ACR: "ACR",
    Kind.AACR: "aACR",
    Kind.DIVERGENT: "inf",
    Kind.EXTINCT: "0",
    Kind.UNDETERMINED: "?",
}


@dataclass(frozen=True)
class Classification:
    kind: Kind
    limit: RootValue | float | None = None
    provenance: Provenance = Provenance.SYMBOLIC
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind in (Kind.ACR, Kind.AACR) and self.limit is None:
            raise ValueError(f"{self.kind.value} requires a limit")
        if self.kind == Kind.ACR and self.provenance == Provenance.NUMERIC:
            raise ValueError("ACR cannot be inferred from numerics alone")

    @property
    def symbol(self) -> str:
        return _SYMBOLS[self.kind]

    def limit_text(self) -> str:
        if self.limit is None:
            return ""
        if self.kind == Kind.EXTINCT:
            return "0"
        if isinstance(self.limit, RootValue):
            return str(self.limit)
        return f"{self.limit:.6g}"

    def to_json(self) -> dict:
        if self.limit is None:
            lim = None
        elif isinstance(self.limit, RootValue):
            lim = self.limit.to_json()
        else:
            lim = {"approx": float(self.limit)}
        return {
            "kind": self.kind.value,
            "limit": lim,
            "provenance": self.provenance.value,
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class CellEvidence:
    """Everything computed for one cell, kept for reporting and tests."""

    elim: ElimPolynomial | None
    certificate: LimitCertificate | None
    verdict: EmpiricalVerdict | None


@dataclass(frozen=True)
class ClassificationTable:
    species: tuple[str, ...]
    cells: tuple[tuple[Classification, ...], ...]
    base_x0: tuple
    rate_constants: tuple[tuple[str, Fraction], ...]
    label: str = ""
    evidence: dict = field(default_factory=dict, compare=False, repr=False)
    sweeps: dict = field(default_factory=dict, compare=False, repr=False)

    def cell(self, input_i: int | str, output_j: int | str) -> Classification:
        i = self.species.index(input_i) if isinstance(input_i, str) else input_i
        j = self.species.index(output_j) if isinstance(output_j, str) else output_j
        return self.cells[i][j]

    def kinds(self) -> list[list[str]]:
        return [[c.kind.value for c in row] for row in self.cells]

    def symbols(self) -> list[list[str]]:
        return [[c.symbol for c in row] for row in self.cells]

    def format_text(self) -> str:
        head = ["input \\ output"] + list(self.species)
        rows = [head] + [[f"{s}(0)"] + [c.symbol for c in row] for s, row in zip(self.species, self.cells)]
        widths = [max(len(r[k]) for r in rows) for k in range(len(head))]
        lines = []
        if self.label:
            lines.append(f"# {self.label}")
        for r in rows:
            lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip())
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["input", "output", "kind", "limit", "provenance", "notes"])
        for i, row in enumerate(self.cells):
            for j, c in enumerate(row):
                w.writerow([self.species[i], self.species[j], c.kind.value, c.limit_text(), c.provenance.value, "; ".join(c.notes)])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "label": self.label,
            "species": list(self.species),
            "base_x0": [str(v) for v in self.base_x0],
            "rate_constants": {k: str(v) for k, v in self.rate_constants},
            "cells": [
                [dict(c.to_json(), input=self.species[i], output=self.species[j]) for j, c in enumerate(row)]
                for i, row in enumerate(self.cells)
            ],
        }

    def diff(self, other: "ClassificationTable") -> list[tuple[str, str, str, str]]:
        """Cells whose kind differs: (input, output, self kind, other kind)."""
        out = []
        for i, s in enumerate(self.species):
            for j, t in enumerate(self.species):
                a, b = self.cells[i][j].kind, other.cells[i][j].kind
                if a != b:
                    out.append((s, t, a.value, b.value))
        return out


@dataclass(frozen=True)
class GuaranteeEntry:
    input_index: int
    law: ConservationLaw
    witnesses: tuple[int, ...]


@dataclass(frozen=True)
class GuaranteeReport:
    entries: tuple[GuaranteeEntry, ...]

    @property
    def violations(self) -> tuple[GuaranteeEntry, ...]:
        return tuple(e for e in self.entries if not e.witnesses)

    @property
    def ok(self) -> bool:
        return not self.violations

    def format_text(self, names: Sequence[str]) -> str:
        lines = []
        for e in self.entries:
            wit = ", ".join(names[j] for j in e.witnesses) or "NONE (violation)"
            lines.append(f"input {names[e.input_index]}: law {e.law.expression(names)} -> witnesses {wit}")
        return "\n".join(lines) + ("\n" if lines else "")


# helpers -----------------------------------------------------------------------


def as_fractions(x0: Sequence) -> tuple[Fraction, ...]:
    out = []
    for v in x0:
        if isinstance(v, (int, Fraction, str)):
            out.append(Fraction(v))
        else:
            out.append(Fraction(repr(float(v))))
    return tuple(out)


def _kind_of(cert: LimitCertificate) -> tuple[Kind, RootValue | None]:
    if cert.kind == LimitKind.CONSTANT:
        return Kind.ACR, cert.value
    if cert.kind == LimitKind.EXACT:
        return Kind.AACR, cert.value
    if cert.kind == LimitKind.ZERO:
        return Kind.EXTINCT, RootValue.rational(Fraction(0))
    if cert.kind == LimitKind.INFINITY:
        return Kind.DIVERGENT, None
    return Kind.UNDETERMINED, None


def _numeric_classification(verdict: EmpiricalVerdict, notes: list[str]) -> Classification:
    if verdict.kind == VerdictKind.FINITE:
        return Classification(Kind.AACR, verdict.limit_estimate, Provenance.NUMERIC, tuple(notes))
    if verdict.kind == VerdictKind.ZERO:
        return Classification(Kind.EXTINCT, 0.0, Provenance.NUMERIC, tuple(notes))
    if verdict.kind == VerdictKind.INFINITY:
        return Classification(Kind.DIVERGENT, None, Provenance.NUMERIC, tuple(notes))
    return Classification(Kind.UNDETERMINED, None, Provenance.NUMERIC, tuple(notes + ["numeric tail inconclusive"]))


def conflicts(cert: LimitCertificate, verdict: EmpiricalVerdict | None, tol: float = _AGREE_TOL) -> str | None:
    """Description of a disagreement between a certificate and a numeric tail, if any."""
    if verdict is None or verdict.kind == VerdictKind.INCONCLUSIVE or cert.is_ambiguous:
        return None
    vk = verdict.kind
    if cert.kind in (LimitKind.EXACT, LimitKind.CONSTANT):
        v = float(cert.value)
        if vk != VerdictKind.FINITE:
            return f"symbolic limit {cert.value} but numeric tail {vk.value}"
        if abs(verdict.limit_estimate - v) > tol * max(v, 1e-300):
            return f"symbolic limit {cert.value} but numeric tail {verdict.limit_estimate:.6g}"
        return None
    expected = {LimitKind.ZERO: VerdictKind.ZERO, LimitKind.INFINITY: VerdictKind.INFINITY}[cert.kind]
    if vk != expected:
        return f"symbolic {cert.kind.value} but numeric tail {vk.value}"
    return None


def _candidate_for(cert: LimitCertificate, behaviour: Asymptotic):
    hits = []
    for c in cert.candidates:
        if behaviour.behaviour == Behaviour.ZERO and c.kind == LimitKind.ZERO:
            hits.append(c)
        elif behaviour.behaviour == Behaviour.INFINITY and behaviour.sign > 0 and c.kind == LimitKind.INFINITY:
            hits.append(c)
        elif behaviour.behaviour == Behaviour.FINITE and c.kind in (LimitKind.EXACT, LimitKind.CONSTANT):
            if abs(float(c.value) - behaviour.value) <= 1e-9 * max(1.0, abs(behaviour.value)):
                hits.append(c)
    return hits[0] if len(hits) == 1 else None


# analysis ----------------------------------------------------------------------------


class Analyzer:
    """Shared state for classifying many cells of one network at one base point."""

    def __init__(
        self,
        net: ReactionNetwork,
        x0: Sequence,
        grid: Sequence[float] | None = None,
        opts: SolverOptions = DEFAULT_OPTIONS,
        jobs: int = 1,
        check: bool = True,
        seed: int = 0,
        numeric: bool = True,
    ):
        self.net = net
        self.x0 = as_fractions(x0)
        if any(v <= 0 for v in self.x0):
            raise ValueError("base initial condition must be positive")
        self.x0_float = np.array([float(v) for v in self.x0])
        self.grid = np.asarray(grid, dtype=float) if grid is not None else default_grid(base_total(net, self.x0_float))
        self.opts = opts
        self.jobs = jobs
        self.check = check
        self.seed = seed
        self.numeric = numeric
        self.algebra = NetworkAlgebra(net, seed=seed)
        self.positive = positive_laws(kernel_basis(net))
        self._sweeps: dict[int, Sweep] = {}
        self._well: dict[int, bool] = {}
        self._rows: dict[int, tuple[list[Classification], list[CellEvidence]]] = {}

    def sweep(self, input_i: int) -> Sweep | None:
        if not self.numeric:
            return None
        if input_i not in self._sweeps:
            self._sweeps[input_i] = sweep(self.net, self.x0_float, input_i, self.grid, self.opts, self.jobs)
        return self._sweeps[input_i]

    def well_defined(self, input_i: int) -> bool:
        if not self.check or not self.numeric:
            return True
        if input_i not in self._well:
            probe = float(self.grid[len(self.grid) // 2])
            self._well[input_i] = check_well_defined(self.net, self.x0_float, input_i, probe, seed=self.seed, opts=self.opts)
        return self._well[input_i]

    def certificate(self, input_i: int, output_j: int, hint=None) -> tuple[ElimPolynomial | None, LimitCertificate | None, str | None]:
        try:
            elim = self.algebra.specialize(output_j, input_i, self.x0)
        except (Unsupported, NotFound, SpecializationError) as exc:
            return None, None, f"symbolic engine: {exc}"
        base = [law.dot(self.x0) for law in self.algebra.laws]
        model = branch_model(self.algebra.output_parametrization(output_j), output_j, self.algebra.laws, base, input_i)
        ps = positive_support_contains(self.positive, input_i, output_j)
        return elim, certified_limit(elim, positive_support=ps, numeric_hint=hint, model=model), None

    def row(self, input_i: int) -> tuple[list[Classification], list[CellEvidence]]:
        if input_i not in self._rows:
            self._rows[input_i] = self._classify_row(input_i)
        return self._rows[input_i]

    def _classify_row(self, input_i: int):
        d = self.net.n_species
        if not self.well_defined(input_i):
            note = "dose-response not well defined: several steady states in one compatibility class"
            cells = [Classification(Kind.UNDETERMINED, None, Provenance.NUMERIC, (note,)) for _ in range(d)]
            return cells, [CellEvidence(None, None, None)] * d
        sw = self.sweep(input_i)
        verdicts = [empirical_verdict(sw.curve(j), self.opts) if sw is not None else None for j in range(d)]
        certs = [self.certificate(input_i, j) for j in range(d)]
        known: dict[int, Asymptotic] = {}
        for j, (_, cert, _) in enumerate(certs):
            if cert is not None and not cert.is_ambiguous:
                known[j] = Asymptotic.from_certificate(cert)
        propagated = self._propagate(known)
        cells = []
        evidence = []
        for j in range(d):
            elim, cert, err = certs[j]
            cell = self._decide(cert, err, verdicts[j], propagated.get(j), input_i, j)
            cells.append(cell)
            evidence.append(CellEvidence(elim, cert, verdicts[j]))
        return cells, evidence

    def _propagate(self, known: dict[int, Asymptotic]) -> dict[int, Asymptotic]:
        param = self.algebra.base_parametrization
        if param is None or any(k not in known for k in param.free):
            return {}
        return propagate_limits(param, {k: known[k] for k in param.free})

    def _decide(self, cert, err, verdict, propagated, input_i, output_j) -> Classification:
        notes: list[str] = []
        if err:
            notes.append(err)
        if cert is not None:
            notes.extend(cert.notes)
        if cert is not None and cert.is_ambiguous and propagated is not None:
            pick = _candidate_for(cert, propagated)
            if pick is not None:
                cert = LimitCertificate(
                    pick.kind,
                    pick.value if pick.kind in (LimitKind.EXACT, LimitKind.CONSTANT) else None,
                    cert.candidates,
                    "propagation",
                    cert.notes + ("ambiguity resolved by propagating free-species limits",),
                )
                notes.append("ambiguity resolved by propagating free-species limits")
        provenance = Provenance.SYMBOLIC
        if cert is not None and cert.is_ambiguous and verdict is not None:
            _, hinted, _ = self.certificate(input_i, output_j, hint=verdict)
            if hinted is not None and not hinted.is_ambiguous:
                cert = hinted
                provenance = Provenance.HYBRID
                notes.append("ambiguity resolved by numeric tail")
            elif verdict.kind != VerdictKind.INCONCLUSIVE:
                notes.append("numeric tail matches none of the symbolic candidates: " + ", ".join(str(c) for c in cert.candidates))
                return Classification(Kind.UNDETERMINED, None, Provenance.HYBRID, tuple(notes))
        if cert is None or cert.is_ambiguous:
            if cert is not None:
                notes.append("symbolic candidates: " + ", ".join(str(c) for c in cert.candidates))
            if verdict is None:
                return Classification(Kind.UNDETERMINED, None, Provenance.SYMBOLIC, tuple(notes))
            return _numeric_classification(verdict, notes)
        problem = conflicts(cert, verdict)
        if problem:
            notes.append("conflict: " + problem)
            return Classification(Kind.UNDETERMINED, None, provenance, tuple(notes))
        kind, value = _kind_of(cert)
        return Classification(kind, value, provenance, tuple(notes))

    def classify(self, input_i: int, output_j: int) -> Classification:
        return self.row(input_i)[0][output_j]

    def table(self, label: str = "") -> ClassificationTable:
        d = self.net.n_species
        rows, ev = [], {}
        for i in range(d):
            cells, evidence = self.row(i)
            rows.append(tuple(cells))
            for j, e in enumerate(evidence):
                ev[(i, j)] = e
        return ClassificationTable(
            self.net.species_names,
            tuple(rows),
            self.x0,
            self.net.parameters,
            label,
            ev,
            dict(self._sweeps),
        )


def classify_pair(
    net: ReactionNetwork,
    x0: Sequence,
    input_i: int,
    output_j: int,
    grid: Sequence[float] | None = None,
    opts: SolverOptions = DEFAULT_OPTIONS,
    check: bool = True,
    jobs: int = 1,
) -> Classification:
    """Classify the dose-response of ``output_j`` under shifts of ``input_i``.

    Example:
        >>> from crnrob.fixtures import load_fixture
        >>> net = load_fixture("envz_ompr")
        >>> classify_pair(net, [1] * 7, net.index("X"), net.index("YP")).kind.value
        'ACR'
    """
    return Analyzer(net, x0, grid, opts, jobs, check).classify(input_i, output_j)


def build_table(
    net: ReactionNetwork,
    x0: Sequence,
    grid: Sequence[float] | None = None,
    opts: SolverOptions = DEFAULT_OPTIONS,
    check: bool = True,
    jobs: int = 1,
    label: str = "",
) -> ClassificationTable:
    """All ``d * d`` cells, rows indexed by input species and columns by output."""
    return Analyzer(net, x0, grid, opts, jobs, check).table(label)


def guarantee_report(net: ReactionNetwork, table: ClassificationTable) -> GuaranteeReport:
    """For each input and each positive law not containing it, the ACR/aACR witnesses in its support."""
    laws = positive_laws(kernel_basis(net))
    entries = []
    for i in range(net.n_species):
        for law in laws:
            if i in law.support:
                continue
            wit = tuple(j for j in sorted(law.support) if table.cells[i][j].kind in (Kind.ACR, Kind.AACR))
            entries.append(GuaranteeEntry(i, law, wit))
    return GuaranteeReport(tuple(entries))


def table_json(table: ClassificationTable) -> str:
    return json.dumps(table.to_json(), indent=2, sort_keys=False) + "\n"


__all__ = [
    "SCHEMA_VERSION",
    "Kind",
    "Provenance",
    "Classification",
    "CellEvidence",
    "ClassificationTable",
    "GuaranteeEntry",
    "GuaranteeReport",
    "Analyzer",
    "classify_pair",
    "build_table",
    "guarantee_report",
    "conflicts",
    "table_json",
    "as_fractions",
]
