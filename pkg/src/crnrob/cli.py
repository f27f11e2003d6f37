"""Command-line interface: ``crnrob <command> NETWORK [options]``.

Exit status: 0 on success, 1 when the analysis fails (or a check does not
pass), 2 for usage errors, unreadable files and parse errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .classifier import SCHEMA_VERSION, Analyzer, Classification, ClassificationTable, guarantee_report
from .conservation import kernel_basis, positive_laws, totals
from .fixtures import fixture_text
from .model import ReactionNetwork, mass_action_rhs_exact
from .numeric import DEFAULT_OPTIONS, DoseResponseCurve, SolverOptions, base_total, check_well_defined, default_grid, find_steady_state
from .parser import NetworkParseError, NetworkSource, parse_with_diagnostics, serialize
from .symbolic.elimination import NotFound, SpecializationError, Unsupported
from .symbolic.roots import analyze_roots

log = logging.getLogger("crnrob")

COMMANDS = ("parse", "laws", "steady", "sweep", "certify", "table", "check")


class UsageError(Exception):
    """Bad command-line input (exit status 2)."""


class AnalysisError(Exception):
    """The analysis could not be completed (exit status 1)."""


@dataclass
class RunConfig:
    command: str
    network: str
    x0: str = "all=1"
    input: str | None = None
    output: str | None = None
    grid: str | None = None
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    format: str = "text"
    out_path: str | None = None
    plot_path: str | None = None
    jobs: int = 1
    instances: str | None = None
    check: bool = True
    numeric: bool = True


@dataclass(frozen=True)
class PlotData:
    """Dose-response samples with the certified asymptote, ready for any plotting tool."""

    lambdas: tuple[float, ...]
    values: tuple[float, ...]
    kind: str | None = None
    limit: str | None = None
    thresholds: tuple[float, ...] = ()
    labels: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if len(self.lambdas) != len(self.values):
            raise ValueError("lambdas and values differ in length")
        if any(b <= a for a, b in zip(self.lambdas, self.lambdas[1:])):
            raise ValueError("plot data must be sorted by lambda")

    def to_csv(self) -> str:
        lines = []
        for k, v in self.labels:
            lines.append(f"# {k}={v}")
        if self.kind is not None:
            lines.append(f"# kind={self.kind}")
        if self.limit is not None:
            lines.append(f"# limit={self.limit}")
        for t in self.thresholds:
            lines.append(f"# threshold={_num(t)}")
        lines.append("lambda,value")
        for lam, v in zip(self.lambdas, self.values):
            lines.append(f"{_num(lam)},{_num(v)}")
        return "\n".join(lines) + "\n"


def _num(v: float) -> str:
    return repr(float(v))


def emit_plot_data(curve: DoseResponseCurve, classification: Classification | None, path: str | None = None, names: Sequence[str] | None = None) -> PlotData:
    """Build plot data for a curve and write it atomically to ``path`` when given."""
    if len(curve.lambdas) == 0:
        raise ValueError("empty curve")
    labels = ()
    if names is not None:
        labels = (("input", names[curve.input_index]), ("output", names[curve.output_index]))
    kind = limit = None
    if classification is not None:
        kind = classification.kind.value
        limit = classification.limit_text() or None
    data = PlotData(
        tuple(float(v) for v in curve.lambdas),
        tuple(float(v) for v in curve.values),
        kind,
        limit,
        labels=labels,
    )
    if path is not None:
        atomic_write(path, data.to_csv())
    return data


# input handling ------------------------------------------------------------------


def atomic_write(path: str, text: str) -> None:
    """Write via a temporary file in the target directory and rename."""
    target = Path(path)
    directory = target.parent if str(target.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_network(path: str) -> ReactionNetwork:
    if path.startswith("builtin:"):
        name = path.split(":", 1)[1]
        try:
            text = fixture_text(name)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
        src = NetworkSource(text, path)
    else:
        try:
            data = Path(path).read_bytes()
        except FileNotFoundError:
            raise UsageError(f"{path}: file not found") from None
        except OSError as exc:
            raise UsageError(f"{path}: cannot read file: {exc.strerror}") from None
        src = NetworkSource(data, path)
    result = parse_with_diagnostics(src)
    for diag in result.diagnostics:
        if diag.severity != "error":
            log.warning(diag.format(src.origin))
    if result.network is None:
        raise NetworkParseError([d for d in result.diagnostics if d.severity == "error"], src.origin)
    return result.network


def parse_x0(spec: str, net: ReactionNetwork) -> tuple[Fraction, ...]:
    """``"all=1,X=2"`` -> one exact value per species (unlisted species default to 1)."""
    values = {name: Fraction(1) for name in net.species_names}
    for part in filter(None, (p.strip() for p in spec.split(","))):
        if "=" not in part:
            raise UsageError(f"--x0: expected NAME=VALUE, got {part!r}")
        name, raw = (s.strip() for s in part.split("=", 1))
        try:
            value = Fraction(raw)
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"--x0: invalid number {raw!r}") from None
        if value <= 0:
            raise UsageError(f"--x0: {name} must be positive")
        if name == "all":
            values = {n: value for n in values}
        elif name in values:
            values[name] = value
        else:
            raise UsageError(f"--x0: unknown species {name!r}")
    return tuple(values[n] for n in net.species_names)


def parse_grid(spec: str | None, scale: float) -> np.ndarray:
    """``a:b:n`` geometric grid (absolute values); default scaled to the totals."""
    if spec is None:
        return default_grid(scale)
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError("--lambda expects START:STOP:COUNT")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"--lambda: cannot parse {spec!r}") from None
    if n < 1:
        raise UsageError("--lambda: the grid must contain at least one point")
    if not (0 < a < b) and not (n == 1 and a > 0):
        raise UsageError("--lambda: need 0 < START < STOP")
    return np.geomspace(a, b, n) if n > 1 else np.array([a])


def species_index(net: ReactionNetwork, name: str | None, flag: str) -> int:
    if name is None:
        raise UsageError(f"{flag} is required")
    try:
        return net.index(name)
    except (KeyError, ValueError):
        raise UsageError(f"{flag}: unknown species {name!r}") from None


def solver_options(overrides: dict) -> SolverOptions:
    if not overrides:
        return DEFAULT_OPTIONS
    return SolverOptions(**{**DEFAULT_OPTIONS.__dict__, **overrides})


# commands ------------------------------------------------------------------------------


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def cmd_parse(cfg: RunConfig, net: ReactionNetwork) -> str:
    if cfg.format == "json":
        return _dump({
            "schema_version": SCHEMA_VERSION,
            "species": list(net.species_names),
            "parameters": {k: str(v) for k, v in net.parameters},
            "reactions": [net.format_reaction(r) + f" ; {r.rate}" for r in net.reactions],
        })
    return serialize(net)


def cmd_laws(cfg: RunConfig, net: ReactionNetwork) -> str:
    names = net.species_names
    basis = kernel_basis(net)
    pos = positive_laws(basis)
    x0 = parse_x0(cfg.x0, net)
    if cfg.format == "json":
        return _dump({
            "schema_version": SCHEMA_VERSION,
            "basis": [[str(c) for c in law.coeffs] for law in basis],
            "positive": [
                {"coeffs": [str(c) for c in law.coeffs], "support": [names[k] for k in sorted(law.support)], "total": str(law.dot(x0))}
                for law in pos
            ],
        })
    lines = [f"conservation laws: {len(basis)} independent"]
    for law in basis:
        lines.append(f"  {law.expression(names)}")
    lines.append(f"positive laws: {len(pos)}")
    for law, t in zip(pos, totals(pos, x0).values):
        lines.append(f"  {law.expression(names)} = {t}")
    return "\n".join(lines) + "\n"


def cmd_steady(cfg: RunConfig, net: ReactionNetwork) -> str:
    x0 = parse_x0(cfg.x0, net)
    st = find_steady_state(net, np.array([float(v) for v in x0]), solver_options(cfg.tolerances))
    if not st.converged:
        raise AnalysisError(f"steady state did not converge: {st.message}")
    if cfg.format == "json":
        return _dump({
            "schema_version": SCHEMA_VERSION,
            "species": list(net.species_names),
            "x": [float(v) for v in st.x],
            "residual": st.residual,
            "relative_residual": st.relative_residual,
            "converged": st.converged,
        })
    if cfg.format == "csv":
        return "species,value\n" + "".join(f"{n},{_num(v)}\n" for n, v in zip(net.species_names, st.x))
    width = max(len(n) for n in net.species_names)
    lines = [f"{n.ljust(width)}  {v:.10g}" for n, v in zip(net.species_names, st.x)]
    lines.append(f"relative residual {st.relative_residual:.2e}")
    return "\n".join(lines) + "\n"


def _analyzer(cfg: RunConfig, net: ReactionNetwork, x0, grid=None) -> Analyzer:
    if grid is None:
        grid = parse_grid(cfg.grid, base_total(net, [float(v) for v in x0]))
    return Analyzer(net, x0, grid, solver_options(cfg.tolerances), cfg.jobs, cfg.check, cfg.seed, cfg.numeric)


def cmd_sweep(cfg: RunConfig, net: ReactionNetwork) -> str:
    i = species_index(net, cfg.input, "--input")
    cols = [species_index(net, cfg.output, "--output")] if cfg.output else list(range(net.n_species))
    x0 = parse_x0(cfg.x0, net)
    an = _analyzer(cfg, net, x0)
    sw = an.sweep(i)
    if cfg.plot_path:
        if not cfg.output:
            raise UsageError("--plot needs --output")
        j = cols[0]
        emit_plot_data(sw.curve(j), an.classify(i, j), cfg.plot_path, net.species_names)
    names = [net.species_names[j] for j in cols]
    if cfg.format == "json":
        return _dump({
            "schema_version": SCHEMA_VERSION,
            "input": net.species_names[i],
            "lambda": [float(v) for v in sw.lambdas],
            "values": {n: [float(v) for v in sw.states[:, j]] for n, j in zip(names, cols)},
            "converged": [bool(v) for v in sw.converged],
        })
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["lambda"] + names + ["converged"])
    for k, lam in enumerate(sw.lambdas):
        w.writerow([_num(lam)] + [_num(sw.states[k, j]) for j in cols] + [int(sw.converged[k])])
    return buf.getvalue()


def cmd_certify(cfg: RunConfig, net: ReactionNetwork) -> str:
    i = species_index(net, cfg.input, "--input")
    j = species_index(net, cfg.output, "--output")
    x0 = parse_x0(cfg.x0, net)
    an = _analyzer(cfg, net, x0)
    try:
        elim = an.algebra.specialize(j, i, x0)
    except (Unsupported, NotFound, SpecializationError) as exc:
        raise AnalysisError(f"symbolic elimination failed: {exc}") from None
    _, cert, _ = an.certificate(i, j)
    cell = an.classify(i, j)
    report = analyze_roots(elim.q)
    verdict = an.row(i)[1][j].verdict
    exact = cell.limit.to_json() if cell.limit is not None and hasattr(cell.limit, "to_json") else cell.limit
    result = {
        "schema_version": SCHEMA_VERSION,
        "input": net.species_names[i],
        "output": net.species_names[j],
        "x0": [str(v) for v in x0],
        "P": str(elim.poly),
        "specialized": str(elim.specialized),
        "q": str(elim.q),
        "m_deg": elim.m_deg,
        "lambda_dependent": elim.lambda_dependent,
        "roots": [r.to_json() for r in report.nonneg_roots],
        "candidates": [str(c) for c in cert.candidates],
        "verdict": cert.kind.value,
        "exact_limit": exact,
        "classification": cell.kind.value,
        "provenance": cell.provenance.value,
        "notes": list(cell.notes),
        "numeric": None if verdict is None else {"kind": verdict.kind.value, "estimate": verdict.limit_estimate},
    }
    if cfg.plot_path and an.numeric:
        emit_plot_data(an.sweep(i).curve(j), cell, cfg.plot_path, net.species_names)
    if cfg.format == "json":
        return _dump(result)
    lines = [
        f"P(x, T) = {result['P']}",
        f"P(x, lambda) = {result['specialized']}",
        f"q(x) = {result['q']}   (m = {result['m_deg']})",
        "nonnegative roots of q: " + (", ".join(str(r) for r in report.nonneg_roots) or "none"),
        f"certificate: {cert.describe()}",
        f"classification: {cell.kind.value} [{cell.provenance.value}]" + (f" limit {cell.limit_text()}" if cell.limit_text() else ""),
    ]
    lines += [f"note: {n}" for n in cell.notes]
    return "\n".join(lines) + "\n"


def _load_instances(path: str) -> list[dict]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise UsageError(f"{path}: file not found") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(data, list) or not all(isinstance(d, dict) for d in data):
        raise UsageError(f"{path}: expected a list of objects with 'label', 'params' and/or 'x0'")
    return data


def cmd_table(cfg: RunConfig, net: ReactionNetwork) -> str:
    runs: list[tuple[str, ReactionNetwork, str]] = []
    if cfg.instances:
        for k, inst in enumerate(_load_instances(cfg.instances)):
            try:
                n2 = net.with_parameters(inst.get("params", {}))
            except (ValueError, KeyError) as exc:
                raise UsageError(f"instance {k}: {exc}") from None
            runs.append((str(inst.get("label", f"instance {k}")), n2, str(inst.get("x0", cfg.x0))))
    else:
        runs.append(("", net, cfg.x0))
    tables: list[ClassificationTable] = []
    for label, n2, x0s in runs:
        x0 = parse_x0(x0s, n2)
        tables.append(_analyzer(cfg, n2, x0).table(label))
    reports = [guarantee_report(n2, t) for (_, n2, _), t in zip(runs, tables)]
    if cfg.format == "json":
        payload = {"schema_version": SCHEMA_VERSION, "tables": [t.to_json() for t in tables]}
        payload["guarantees"] = [
            [{"input": net.species_names[e.input_index], "law": e.law.expression(net.species_names), "witnesses": [net.species_names[w] for w in e.witnesses]} for e in r.entries]
            for r in reports
        ]
        if len(tables) > 1:
            payload["diffs"] = [[list(d) for d in tables[0].diff(t)] for t in tables[1:]]
        return _dump(payload)
    if cfg.format == "csv":
        out = []
        for t in tables:
            body = t.to_csv()
            out.append(body if len(tables) == 1 else "".join(f"{t.label},{line}\n" for line in body.splitlines()))
        return "".join(out)
    out = []
    for t, r in zip(tables, reports):
        out.append(t.format_text())
        if not r.ok:
            out.append("guarantee violations:\n" + r.format_text(net.species_names))
    for t in tables[1:]:
        changes = tables[0].diff(t)
        out.append(f"# {t.label} vs {tables[0].label}: {len(changes)} cell(s) differ\n")
        out += [f"  {a} -> {b}: {x} / {y}\n" for a, b, x, y in changes]
    return "\n".join(out)


def cmd_check(cfg: RunConfig, net: ReactionNetwork) -> tuple[str, bool]:
    names = net.species_names
    lines = [f"network: {net.n_species} species, {net.n_reactions} reactions"]
    ok = True
    basis = kernel_basis(net)
    pos = positive_laws(basis)
    rng = np.random.default_rng(cfg.seed)
    point = [Fraction(int(v), 7) for v in rng.integers(1, 50, net.n_species)]
    rhs = mass_action_rhs_exact(net, point)
    exact = all(sum((c * r for c, r in zip(law.coeffs, rhs)), Fraction(0)) == 0 for law in basis)
    lines.append(f"conservation laws: {len(basis)} ({len(pos)} positive); exact check {'ok' if exact else 'FAILED'}")
    ok &= exact
    covered = set().union(*(law.support for law in pos)) if pos else set()
    conservative = covered == set(range(net.n_species))
    lines.append("conservative: " + ("yes" if conservative else "no (species outside every positive law: " + ", ".join(names[k] for k in range(net.n_species) if k not in covered) + ")"))
    x0 = parse_x0(cfg.x0, net)
    x0f = np.array([float(v) for v in x0])
    probe = base_total(net, x0f)
    opts = solver_options(cfg.tolerances)
    for i, name in enumerate(names):
        good = check_well_defined(net, x0f, i, probe, seed=cfg.seed, opts=opts)
        lines.append(f"well-defined along {name}: {'ok' if good else 'FAILED'}")
        ok &= good
    lines.append("check passed" if ok else "check FAILED")
    if cfg.format == "json":
        return _dump({"schema_version": SCHEMA_VERSION, "ok": ok, "report": lines}), ok
    return "\n".join(lines) + "\n", ok


# driver --------------------------------------------------------------------------------


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    """Execute one command; returns the exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr

    def fail(status: int, kind: str, message: str, diagnostics=()) -> int:
        print(f"crnrob: error: {message}", file=stderr)
        if cfg.format == "json":
            stdout.write(_dump({"schema_version": SCHEMA_VERSION, "error": {"kind": kind, "message": message, "diagnostics": list(diagnostics)}}))
        return status

    try:
        if cfg.command not in COMMANDS:
            raise UsageError(f"unknown command {cfg.command!r}")
        net = load_network(cfg.network)
        ok = True
        if cfg.command == "check":
            text, ok = cmd_check(cfg, net)
        else:
            text = globals()[f"cmd_{cfg.command}"](cfg, net)
        if cfg.out_path:
            atomic_write(cfg.out_path, text)
        else:
            stdout.write(text)
        return 0 if ok else 1
    except NetworkParseError as exc:
        diags = [d.format(exc.origin) for d in exc.diagnostics]
        for d in diags:
            print(d, file=stderr)
        return fail(2, "parse", f"{exc.origin}: {len(diags)} parse error(s)", diags)
    except UsageError as exc:
        return fail(2, "usage", str(exc))
    except AnalysisError as exc:
        return fail(1, "analysis", str(exc))
    except (ValueError, ArithmeticError) as exc:
        return fail(1, "analysis", f"{type(exc).__name__}: {exc}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="crnrob", description="Concentration robustness analysis for mass-action reaction networks.")
    p.add_argument("--version", action="version", version=f"crnrob {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "parse": "validate a network and print it in canonical form",
        "laws": "conservation laws and positive laws",
        "steady": "steady state from an initial condition",
        "sweep": "dose-response sweep along one input species",
        "certify": "symbolic certificate for one input/output pair",
        "table": "classification table for all input/output pairs",
        "check": "well-formedness, conservation and well-definedness checks",
    }
    for name in COMMANDS:
        s = sub.add_parser(name, help=helps[name])
        s.add_argument("network", help="path to a .crn file, or builtin:NAME")
        s.add_argument("--x0", default="all=1", help='base initial condition, e.g. "all=1,X=2"')
        fmt = s.add_mutually_exclusive_group()
        fmt.add_argument("--json", dest="format", action="store_const", const="json")
        fmt.add_argument("--csv", dest="format", action="store_const", const="csv")
        s.add_argument("-o", "--out", dest="out_path", help="write the result to this file (atomically)")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")
        s.add_argument("--rtol", type=float)
        s.add_argument("--atol", type=float)
        s.add_argument("--final-tol", type=float)
        s.add_argument("-v", "--verbose", action="store_true")
        if name in ("sweep", "certify", "table"):
            s.add_argument("--lambda", dest="grid", metavar="START:STOP:COUNT", help="geometric grid of input shifts")
            s.add_argument("--no-check", dest="check", action="store_false", help="skip the well-definedness probe")
        if name in ("sweep", "certify"):
            s.add_argument("--input", help="species whose initial value is shifted")
            s.add_argument("--output", help="species whose steady state is reported")
            s.add_argument("--plot", dest="plot_path", help="write plot data (CSV) to this file")
        if name == "certify":
            s.add_argument("--no-numeric", dest="numeric", action="store_false", help="symbolic analysis only")
        if name == "table":
            s.add_argument("--instances", help="JSON list of {label, params, x0} instances to tabulate and diff")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    tol = {}
    for key, attr in (("rtol", "rtol"), ("atol", "atol"), ("final_tol", "final_tol")):
        v = getattr(ns, attr, None)
        if v is not None:
            if v <= 0:
                raise UsageError(f"--{key.replace('_', '-')} must be positive")
            tol[key] = v
    if ns.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    return RunConfig(
        command=ns.command,
        network=ns.network,
        x0=ns.x0,
        input=getattr(ns, "input", None),
        output=getattr(ns, "output", None),
        grid=getattr(ns, "grid", None),
        seed=ns.seed,
        tolerances=tol,
        format=ns.format or "text",
        out_path=ns.out_path,
        plot_path=getattr(ns, "plot_path", None),
        jobs=ns.jobs,
        instances=getattr(ns, "instances", None),
        check=getattr(ns, "check", True),
        numeric=getattr(ns, "numeric", True),
    )


def main(argv: Sequence[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if not ns.verbose:
        warnings.filterwarnings("ignore", module="scipy")
    try:
        cfg = config_from_args(ns)
    except UsageError as exc:
        print(f"crnrob: error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
