"""Steady states, dose-response curves and empirical limit verdicts.

Steady states are found by integrating the mass-action ODE until the vector
field is small, then polishing with damped Newton iterations on a square
reduced system: the rate equations restricted to a row basis of the
stoichiometric matrix, plus the conservation constraints pinned to the
initial totals.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from . import linalg
from .conservation import kernel_basis, positive_laws
from .model import MassActionSystem, ReactionNetwork, mass_action_rhs_exact, stoichiometric_matrix

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverOptions:
    """Tolerances for the steady-state solver and the empirical verdict.

    Residuals are measured relative to the largest reaction flux at the
    point (floored at 1), which keeps the criterion meaningful when totals
    reach 1e6 and absolute rounding noise alone exceeds 1e-12.
    """

    switch_tol: float = 1e-3
    final_tol: float = 1e-12
    conservation_tol: float = 1e-9
    max_time: float = 1e14
    rtol: float = 1e-6
    atol: float = 1e-10
    method: str = "BDF"
    max_newton_iter: int = 60
    max_restarts: int = 4
    plateau_tol: float = 1e-3
    zero_tol: float = 1e-7
    slope_tol: float = 0.2
    tail_points: int = 6


DEFAULT_OPTIONS = SolverOptions()


@dataclass(frozen=True)
class SteadyState:
    x: np.ndarray
    residual: float
    relative_residual: float
    converged: bool
    compat_class: tuple
    message: str = ""


class VerdictKind(str, Enum):
    FINITE = "FinitePositiveLimit"
    INFINITY = "DivergesToInfinity"
    ZERO = "DecaysToZero"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class EmpiricalVerdict:
    kind: VerdictKind
    limit_estimate: float | None = None
    tail_slope: float | None = None
    tail_value: float | None = None


@dataclass(frozen=True)
class DoseResponseCurve:
    input_index: int
    output_index: int
    lambdas: np.ndarray
    values: np.ndarray
    base_x0: np.ndarray
    converged: np.ndarray = field(default=None)
    residuals: np.ndarray = field(default=None)

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        if lam.ndim != 1 or len(lam) != len(self.values):
            raise ValueError("lambdas and values must be 1-d arrays of equal length")
        if len(lam) > 1 and np.any(np.diff(lam) <= 0):
            raise ValueError("lambdas must be strictly increasing")
        if self.converged is None:
            object.__setattr__(self, "converged", np.ones(len(lam), dtype=bool))
        if self.residuals is None:
            object.__setattr__(self, "residuals", np.zeros(len(lam)))


@dataclass(frozen=True)
class Sweep:
    """Steady states of every species along one input direction."""

    input_index: int
    lambdas: np.ndarray
    states: np.ndarray  # (n_points, d)
    converged: np.ndarray
    residuals: np.ndarray
    base_x0: np.ndarray

    def curve(self, output_j: int) -> DoseResponseCurve:
        return DoseResponseCurve(
            self.input_index, output_j, self.lambdas, self.states[:, output_j].copy(),
            self.base_x0, self.converged, self.residuals,
        )


# -- per-network cached structure ---------------------------------------------


@dataclass(frozen=True)
class _Reduced:
    system: MassActionSystem
    rows: np.ndarray  # row basis of N
    L: np.ndarray  # conservation basis, one law per row
    L_exact: tuple
    net: ReactionNetwork


@lru_cache(maxsize=64)
def _reduced(net: ReactionNetwork) -> _Reduced:
    S = stoichiometric_matrix(net)
    rows = linalg.row_basis_indices(S.tolist()) if net.n_reactions else []
    basis = kernel_basis(net)
    L = np.array([[float(c) for c in law.coeffs] for law in basis]).reshape(len(basis), net.n_species)
    return _Reduced(net._system, np.array(rows, dtype=int), L, tuple(law.coeffs for law in basis), net)


def _flux_scale(sys: MassActionSystem, x: np.ndarray) -> float:
    v = sys.fluxes(np.maximum(x, 0.0))
    return max(1.0, float(np.max(np.abs(v))) if len(v) else 1.0)


def _relative_residual(sys: MassActionSystem, x: np.ndarray) -> float:
    xp = np.maximum(x, 0.0)
    f = sys.rhs(xp)
    return float(np.max(np.abs(f))) / _flux_scale(sys, xp) if len(f) else 0.0


def _conservation_error(red: _Reduced, x: np.ndarray, c: np.ndarray) -> float:
    if not len(c):
        return 0.0
    err = np.abs(red.L @ x - c)
    scale = np.maximum(np.abs(red.L) @ np.abs(x), 1e-300)
    return float(np.max(err / np.maximum(scale, np.abs(c))))


def _newton(red: _Reduced, x: np.ndarray, c: np.ndarray, opts: SolverOptions) -> tuple[np.ndarray, bool]:
    """Newton polish of the reduced square system.

    A first pass takes full, orthant-safeguarded Newton steps (these cross
    the badly scaled valleys that appear when a conservation class is nearly
    degenerate); if that stalls, a second pass uses a monotone line search.
    The iterate with the smallest residual is kept.
    """
    sys = red.system
    rows = red.rows
    d = sys.d
    if len(rows) + len(c) != d:
        return x, False
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    cscale = np.maximum(np.abs(red.L) @ np.abs(x), 1e-300) if len(c) else np.zeros(0)

    def G(z):
        fs = _flux_scale(sys, z)
        g = sys.rhs(z)[rows] / fs
        if len(c):
            g = np.concatenate([g, (red.L @ z - c) / cscale])
        return g, fs

    def step(z, g, fs):
        J = sys.jacobian(z)[rows] / fs
        if len(c):
            J = np.vstack([J, red.L / cscale[:, None]])
        D = np.maximum(np.abs(z), 1e-30 * max(1.0, float(np.max(z))))
        A = J * D[None, :]
        try:
            dz = np.linalg.solve(A, -g)
        except np.linalg.LinAlgError:
            dz = np.linalg.lstsq(A, -g, rcond=None)[0]
        return D * dz

    def max_fraction(z, dx):
        neg = (dx < 0) & (z > 0)
        frac = 1.0
        if np.any(neg):
            frac = min(1.0, 0.5 * float(np.min(z[neg] / -dx[neg])) if np.any(z[neg] + dx[neg] < 0) else 1.0)
        return frac

    target = opts.final_tol * 1e-2
    g, fs = G(x)
    best_x, best_norm = x, float(np.max(np.abs(g)))
    for monotone in (False, True):
        z, gz, fz = best_x, *G(best_x)
        znorm = float(np.max(np.abs(gz)))
        stall = 0
        for _ in range(opts.max_newton_iter):
            if znorm < target:
                break
            dx = step(z, gz, fz)
            if not np.all(np.isfinite(dx)):
                break
            dx = np.where((z <= 0) & (dx < 0), 0.0, dx)
            alpha = max_fraction(z, dx)
            while True:
                zn = np.maximum(z + alpha * dx, 0.0)
                gn, fn = G(zn)
                nn = float(np.max(np.abs(gn)))
                if not monotone or nn < znorm or alpha < 1e-10:
                    break
                alpha *= 0.5
            if monotone and nn >= znorm:
                break
            z, gz, fz, znorm = zn, gn, fn, nn
            if znorm < best_norm * 0.999:
                best_x, best_norm, stall = z, znorm, 0
            else:
                stall += 1
                if stall >= 6:
                    break
        if _relative_residual(sys, best_x) < opts.final_tol:
            break
    ok = _relative_residual(sys, best_x) < opts.final_tol and _conservation_error(red, best_x, c) < opts.conservation_tol
    return best_x, ok


def _refine_exact(red: _Reduced, x: np.ndarray, x0: np.ndarray, iterations: int = 4) -> np.ndarray:
    """Iterative refinement with exactly evaluated residuals.

    Near-degenerate compatibility classes make the steady state extremely
    sensitive along a soft direction; residuals rounded in double precision
    then cannot locate it. Evaluating the residual in rational arithmetic
    and solving for the correction with the float Jacobian recovers close to
    full double accuracy in the state.
    """
    sys = red.system
    rows = red.rows
    if len(rows) + len(red.L_exact) != sys.d:
        return x
    c = [sum((a * Fraction(v) for a, v in zip(law, x0) if a), Fraction(0)) for law in red.L_exact]
    cscale = np.maximum(np.abs(red.L) @ np.abs(x), 1e-300) if len(c) else np.zeros(0)
    xf = [Fraction(float(v)) for v in np.maximum(x, 0.0)]
    for _ in range(iterations):
        z = np.array([float(v) for v in xf])
        fs = _flux_scale(sys, z)
        f = mass_action_rhs_exact(red.net, xf)
        g = [float(f[r]) / fs for r in rows]
        g += [float(sum((a * v for a, v in zip(law, xf) if a), Fraction(0)) - ck) / s_ for law, ck, s_ in zip(red.L_exact, c, cscale)]
        g = np.array(g)
        if not np.any(g):
            break
        J = sys.jacobian(z)[rows] / fs
        if len(c):
            J = np.vstack([J, red.L / cscale[:, None]])
        try:
            dz = np.linalg.solve(J * np.maximum(np.abs(z), 1e-300)[None, :], -g) * np.maximum(np.abs(z), 1e-300)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(dz)) or np.any(z + dz < 0):
            break
        xf = [v + Fraction(float(d)) for v, d in zip(xf, dz)]
        if float(np.max(np.abs(dz) / np.maximum(np.abs(z), 1e-300))) < 1e-17:
            break
    return np.array([float(v) for v in xf])


def _collapsed(x: np.ndarray, xn: np.ndarray, scale: float) -> bool:
    """True when Newton sent a clearly positive species to (almost) zero.

    Faces where a species vanishes are often invariant and carry boundary
    steady states; a Newton step from a point that has not settled yet can
    land there although the trajectory itself stays away from the face.
    """
    return bool(np.any((xn < 1e-3 * x) & (x > 1e-9 * scale)))


def find_steady_state(net: ReactionNetwork, x0, opts: SolverOptions = DEFAULT_OPTIONS) -> SteadyState:
    """Steady state reached from ``x0``: integration, then Newton polish.

    Args:
        net: The reaction network.
        x0: Nonnegative initial concentrations.
        opts: Solver tolerances.

    Returns:
        A :class:`SteadyState`. When the solver fails within ``opts.max_time``
        the best iterate is returned with ``converged=False``.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (net.n_species,):
        raise ValueError(f"x0 must have length {net.n_species}")
    if np.any(x0 < 0) or not np.all(np.isfinite(x0)):
        raise ValueError("x0 must be finite and nonnegative")
    red = _reduced(net)
    sys = red.system
    c = red.L @ x0 if len(red.L) else np.zeros(0)
    scale = max(1.0, float(np.max(x0))) if len(x0) else 1.0

    def done(x, msg=""):
        x = np.maximum(x, 0.0)
        if _relative_residual(sys, x) < opts.switch_tol:
            xr = _refine_exact(red, x, x0)
            if _relative_residual(sys, xr) <= max(_relative_residual(sys, x), opts.final_tol):
                x = xr
        f = sys.rhs(x)
        res = float(np.max(np.abs(f))) if len(f) else 0.0
        rel = _relative_residual(sys, x)
        ok = rel < opts.final_tol and _conservation_error(red, x, c) < opts.conservation_tol
        return SteadyState(x, res, rel, ok, tuple(float(v) for v in c), msg)

    if net.n_reactions == 0:
        return done(x0.copy())

    x = x0.copy()
    if _relative_residual(sys, x) < opts.switch_tol:
        xn, ok = _newton(red, x, c, opts)
        if ok and not _collapsed(x, xn, scale):
            return done(xn)

    fun = lambda t, y: sys.rhs(y)
    jac = lambda t, y: sys.jacobian(y)
    best = x0
    # a fast pass with loose integration tolerances, then a careful one
    passes = ((opts.method, 1.0), ("BDF", 1e-3))
    for npass, (method, tighten) in enumerate(passes):
        x = x0.copy()
        threshold = opts.switch_tol
        t0 = 0.0
        for attempt in range(opts.max_restarts + 1):
            def event(t, y, thr=threshold):
                return _relative_residual(sys, y) - thr

            event.terminal = True
            event.direction = -1
            sol = solve_ivp(
                fun, (t0, opts.max_time), x, method=method, jac=jac,
                rtol=opts.rtol * tighten, atol=opts.atol * tighten * scale, events=event,
            )
            x = sol.y[:, -1]
            t0 = float(sol.t[-1])
            xn, ok = _newton(red, x, c, opts)
            final_pass = npass == len(passes) - 1
            last = final_pass and (attempt == opts.max_restarts or t0 >= opts.max_time or sol.status == -1)
            if ok and (last or not _collapsed(x, xn, scale)):
                return done(xn)
            if _relative_residual(sys, xn) < _relative_residual(sys, best):
                best = xn
            if t0 >= opts.max_time or sol.status == -1:
                break
            threshold *= 1e-3
            x = np.maximum(x, 0.0)
    st = done(best, "did not converge within max_time")
    return replace(st, converged=False) if not st.converged else st


# -- well-definedness -----------------------------------------------------------


def _random_class_point(net: ReactionNetwork, base: np.ndarray, rng: np.random.Generator, steps: int = 25) -> np.ndarray:
    """Hit-and-run walk inside the positive part of the compatibility class."""
    N = stoichiometric_matrix(net).astype(float)
    x = base.copy()
    if not N.size or not np.any(N):
        return x
    for _ in range(steps):
        u = N @ rng.standard_normal(N.shape[1])
        if not np.any(u):
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = -x / u
        lo = np.max(ratios[u > 0]) if np.any(u > 0) else -np.inf
        hi = np.min(ratios[u < 0]) if np.any(u < 0) else np.inf
        lo = max(lo, -1e6 * max(1.0, float(np.max(x))))
        hi = min(hi, 1e6 * max(1.0, float(np.max(x))))
        t = rng.uniform(0.95 * lo, 0.95 * hi)
        x = np.maximum(x + t * u, 0.0)
    return x


def check_well_defined(
    net: ReactionNetwork,
    x0,
    input_i: int,
    lambda_probe: float,
    n_starts: int = 5,
    seed: int = 0,
    opts: SolverOptions = DEFAULT_OPTIONS,
) -> bool:
    """Probe uniqueness of the positive steady state in one compatibility class.

    Solves from ``n_starts`` points of the class of ``x0 + lambda_probe e_i``
    (the shifted point itself plus random positive points) and returns True
    iff every solve converges and all results agree within 1e-6 relative.
    """
    if n_starts < 2:
        raise ValueError("n_starts must be at least 2")
    base = np.asarray(x0, dtype=float).copy()
    base[input_i] += lambda_probe
    rng = np.random.default_rng(seed)
    starts = [base] + [_random_class_point(net, base, rng) for _ in range(n_starts - 1)]
    results = []
    for s in starts:
        st = find_steady_state(net, s, opts)
        if not st.converged:
            log.warning("well-definedness probe: start %s did not converge", np.array2string(s, precision=3))
            return False
        results.append(st.x)
    ref = results[0]
    tol = 1e-6 * max(float(np.max(np.abs(ref))), 1e-300)
    return all(float(np.max(np.abs(r - ref))) <= tol for r in results[1:])


# -- dose-response sweeps ------------------------------------------------------------


def base_total(net: ReactionNetwork, x0) -> float:
    """Largest conserved total of a positive law at ``x0`` (fallback: max entry)."""
    x0 = np.asarray(x0, dtype=float)
    laws = positive_laws(kernel_basis(net))
    vals = [abs(law.dot(x0)) for law in laws]
    if vals and max(vals) > 0:
        return float(max(vals))
    return float(np.max(x0)) if len(x0) and np.max(x0) > 0 else 1.0


def default_grid(scale: float = 1.0, start: float = 1e-1, stop: float = 1e6, count: int = 40) -> np.ndarray:
    """Geometric grid over ``[start, stop] * scale``."""
    if count < 1 or start <= 0 or stop <= start:
        raise ValueError("grid needs count >= 1 and 0 < start < stop")
    return np.geomspace(start * scale, stop * scale, count)


def _solve_point(args):
    net, x, opts = args
    return find_steady_state(net, x, opts)


def sweep(
    net: ReactionNetwork,
    x0,
    input_i: int,
    grid: Sequence[float],
    opts: SolverOptions = DEFAULT_OPTIONS,
    jobs: int = 1,
) -> Sweep:
    """Steady states for every ``x0 + lambda e_i`` on the grid.

    Each point is solved from scratch, so results do not depend on the order
    of evaluation or the number of worker processes.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or len(grid) == 0 or np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be a nonempty increasing sequence of positive numbers")
    x0 = np.asarray(x0, dtype=float)
    tasks = []
    for lam in grid:
        x = x0.copy()
        x[input_i] += lam
        tasks.append((net, x, opts))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_solve_point, tasks))
    else:
        results = [_solve_point(t) for t in tasks]
    states = np.array([r.x for r in results]).reshape(len(grid), net.n_species)
    return Sweep(
        input_i, grid, states,
        np.array([r.converged for r in results], dtype=bool),
        np.array([r.relative_residual for r in results]),
        x0,
    )


def dose_response(
    net: ReactionNetwork,
    x0,
    input_i: int,
    output_j: int,
    grid: Sequence[float] | None = None,
    opts: SolverOptions = DEFAULT_OPTIONS,
    jobs: int = 1,
) -> DoseResponseCurve:
    """Dose-response curve of species ``output_j`` under input shifts of ``input_i``."""
    x0 = np.asarray(x0, dtype=float)
    if np.any(x0 <= 0):
        raise ValueError("base initial condition must be positive")
    if grid is None:
        grid = default_grid(base_total(net, x0))
    return sweep(net, x0, input_i, grid, opts, jobs).curve(output_j)


# -- empirical verdicts ------------------------------------------------------------


def empirical_verdict(curve: DoseResponseCurve, opts: SolverOptions = DEFAULT_OPTIONS) -> EmpiricalVerdict:
    """Classify the tail behaviour of a sampled dose-response curve.

    Rules, in order: a flat positive tail (relative change per decade below
    ``plateau_tol``) is a finite positive limit; a tail below ``zero_tol``
    that is not increasing, or one falling with log-log slope below
    ``-slope_tol`` to under a tenth of its initial value, decays to zero; a
    log-log slope above ``slope_tol`` with growth beyond ten times the initial
    value diverges. Anything else, or fewer than six converged points spanning
    three decades, is inconclusive.
    """
    mask = np.asarray(curve.converged, dtype=bool)
    lam = np.asarray(curve.lambdas, dtype=float)[mask]
    val = np.maximum(np.asarray(curve.values, dtype=float)[mask], 0.0)
    if len(lam) < 6 or math.log10(lam[-1] / lam[0]) < 3:
        return EmpiricalVerdict(VerdictKind.INCONCLUSIVE)
    w = min(max(opts.tail_points, 3), len(lam))
    tl, tv = lam[-w:], val[-w:]
    tail = float(tv[-1])
    initial = float(val[0])
    decades = math.log10(tl[-1] / tl[0])
    slope = None
    if np.all(tv > 0):
        slope = float(np.polyfit(np.log10(tl), np.log10(tv), 1)[0])
    if tail > opts.zero_tol:
        change = abs(tv[-1] - tv[0]) / tail / max(decades, 1e-12)
        if change < opts.plateau_tol:
            return EmpiricalVerdict(VerdictKind.FINITE, tail, slope, tail)
    non_increasing = bool(np.all(np.diff(tv) <= 1e-12 * max(initial, 1e-300)))
    if tail < opts.zero_tol and non_increasing:
        return EmpiricalVerdict(VerdictKind.ZERO, None, slope, tail)
    if slope is not None and slope < -opts.slope_tol and tail < initial / 10:
        return EmpiricalVerdict(VerdictKind.ZERO, None, slope, tail)
    if slope is not None and slope > opts.slope_tol and tail > 10 * initial:
        return EmpiricalVerdict(VerdictKind.INFINITY, None, slope, tail)
    return EmpiricalVerdict(VerdictKind.INCONCLUSIVE, None, slope, tail)
