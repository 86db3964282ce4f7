"""Monte Carlo logical error rates, noise sweeps and (pseudo-)threshold search."""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .codes import CssCode
from .decoder import UnionFindDecoder, logical_flip, lost_logicals
from .foliation import DecodingProblem, FoliatedLattice, build_decoding_problem, foliate
from .noise import combined_error_rate, sample_iid, sample_rus

PE_BOUNDS = (5e-4, 3e-3)
PL_BOUNDS = (1e-2, 1e-1)
CSV_FIELDS = (
    "code", "T", "noise", "p_e", "p_l", "eta", "N", "trials", "failures", "p_bar", "ci_low", "ci_high",
)
FAILURE_CRITERIA = ("flip_or_lost", "flip", "lost")
DESK_TRIALS = 10_000
FULL_TRIALS = 100_000


def wilson_interval(failures: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    if trials <= 0:
        return 0.0, 1.0
    p = failures / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if failures == 0 else max(0.0, centre - half)
    hi = 1.0 if failures == trials else min(1.0, centre + half)
    return lo, hi


def break_even(p: float, k: int) -> float:
    """Probability that at least one of k unprotected qubits has an error."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if k < 1:
        raise ValueError("k must be at least 1")
    return 1.0 - (1.0 - p) ** k


def line_noise(theta: float, x: float) -> tuple[float, float]:
    """(p_e, p_l) on the sweep line at angle theta, parameter x."""
    p_e = (x * (PE_BOUNDS[1] - PE_BOUNDS[0]) + PE_BOUNDS[0]) * math.cos(theta)
    p_l = (x * (PL_BOUNDS[1] - PL_BOUNDS[0]) + PL_BOUNDS[0]) * math.sin(theta)
    # cos(pi/2) is 6e-17, not 0
    return (0.0 if abs(p_e) < 1e-15 else p_e), (0.0 if abs(p_l) < 1e-15 else p_l)


def trial_rng(seed: int, point: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, point, trial])


@dataclass
class SweepPoint:
    code: str
    T: int
    noise: str  # "iid" or "rus-<strategy>"
    trials: int
    failures: int
    p_e: float = 0.0
    p_l: float = 0.0
    eta: float | None = None
    N: int | None = None

    def __post_init__(self):
        if not 0 <= self.failures <= self.trials:
            raise ValueError("failures must lie in [0, trials]")

    @property
    def p_bar(self) -> float:
        return self.failures / self.trials if self.trials else 0.0

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.failures, self.trials)

    def row(self) -> dict:
        lo, hi = self.ci
        return {
            "code": self.code,
            "T": self.T,
            "noise": self.noise,
            "p_e": repr(float(self.p_e)),
            "p_l": repr(float(self.p_l)),
            "eta": "" if self.eta is None else repr(float(self.eta)),
            "N": "" if self.N is None else self.N,
            "trials": self.trials,
            "failures": self.failures,
            "p_bar": repr(self.p_bar),
            "ci_low": repr(lo),
            "ci_high": repr(hi),
        }


@dataclass
class PseudoThresholdResult:
    code: str
    axis: str
    crossing: float
    bracket_low: float
    bracket_high: float
    k: int
    trials: int
    crossing_ci: tuple[float, float] = (math.nan, math.nan)
    points: list[SweepPoint] = field(default_factory=list, repr=False)

    def record(self) -> dict:
        return {
            "code": self.code,
            "axis": self.axis,
            "crossing": self.crossing,
            "bracket_low": self.bracket_low,
            "bracket_high": self.bracket_high,
            "k": self.k,
            "trials": self.trials,
        }


class NoCrossingError(RuntimeError):
    pass


# --- trial execution ----------------------------------------------------------------------


@dataclass
class Context:
    """Lattice, decoding problem and decoder for one (code, T)."""

    code: CssCode
    T: int
    lattice: FoliatedLattice
    problem: DecodingProblem
    decoder: UnionFindDecoder

    @property
    def name(self) -> str:
        return self.code.name or str(self.code)

    @property
    def k(self) -> int:
        return self.problem.k


_CONTEXTS: dict[tuple, Context] = {}


def context(code: CssCode, T: int | None = None, growth: str = "invalid") -> Context:
    """Build (or reuse) the decoding context; T defaults to the code distance."""
    if T is None:
        if code.distance is None:
            raise ValueError(f"{code} has no known distance; pass T explicitly")
        T = code.distance
    key = (code.h_x.rows, code.h_z.rows, code.name, T, growth)
    hit = _CONTEXTS.get(key)
    if hit is None:
        lattice = foliate(code, T)
        problem = build_decoding_problem(lattice)
        hit = Context(code, T, lattice, problem, UnionFindDecoder(problem, growth))
        _CONTEXTS[key] = hit
    return hit


@dataclass(frozen=True)
class IidTask:
    p_e: float
    p_l: float
    criterion: str = "flip_or_lost"

    def __call__(self, ctx: Context, rng: np.random.Generator) -> bool:
        prob = ctx.problem
        tn = sample_iid(prob, self.p_e, self.p_l, rng)
        if self.criterion != "lost":
            corr = ctx.decoder.decode(prob.syndrome(tn.error), tn.erasures)
            if logical_flip(prob, corr, tn.error).any():
                return True
        if self.criterion != "flip" and tn.erasures.size:
            return bool(lost_logicals(prob, tn.erasures))
        return False


@dataclass(frozen=True)
class RusTask:
    eta: float
    N: int
    strategy: str = "modified"
    criterion: str = "lost"

    def __call__(self, ctx: Context, rng: np.random.Generator) -> bool:
        prob = ctx.problem
        tn = sample_rus(ctx.lattice, prob, self.eta, self.N, self.strategy, rng)
        if self.criterion != "flip" and lost_logicals(prob, tn.erasures):
            return True
        if self.criterion != "lost":
            corr = ctx.decoder.decode(prob.syndrome(tn.error), tn.erasures)
            return bool(logical_flip(prob, corr, tn.error).any())
        return False


def _count(code, T, growth, task, seed, point, lo, hi) -> int:
    ctx = context(code, T, growth)
    return sum(bool(task(ctx, trial_rng(seed, point, t))) for t in range(lo, hi))


def count_failures(
    ctx: Context,
    task: Callable[[Context, np.random.Generator], bool],
    trials: int,
    seed: int,
    point: int,
    workers: int = 1,
) -> int:
    """Run ``trials`` independent trials; trial t uses rng(seed, point, t).

    With several workers the trial range is split into chunks; the count
    does not depend on the split.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if workers <= 1 or trials < 2 * workers:
        return sum(bool(task(ctx, trial_rng(seed, point, t))) for t in range(trials))
    edges = np.linspace(0, trials, workers + 1).astype(int)
    growth = ctx.decoder.growth
    with ProcessPoolExecutor(workers) as pool:
        futures = [
            pool.submit(_count, ctx.code, ctx.T, growth, task, seed, point, int(a), int(b))
            for a, b in zip(edges[:-1], edges[1:])
        ]
        return sum(f.result() for f in futures)


def iid_point(
    ctx: Context,
    p_e: float,
    p_l: float,
    trials: int,
    seed: int,
    point: int,
    criterion: str = "flip_or_lost",
    workers: int = 1,
) -> SweepPoint:
    if criterion not in FAILURE_CRITERIA:
        raise ValueError(f"criterion must be one of {FAILURE_CRITERIA}")
    fails = count_failures(ctx, IidTask(p_e, p_l, criterion), trials, seed, point, workers)
    return SweepPoint(ctx.name, ctx.T, "iid", trials, fails, p_e=p_e, p_l=p_l)


def rus_point(
    ctx: Context,
    eta: float,
    N: int,
    trials: int,
    seed: int,
    point: int,
    strategy: str = "modified",
    criterion: str = "lost",
    workers: int = 1,
) -> SweepPoint:
    if criterion not in FAILURE_CRITERIA:
        raise ValueError(f"criterion must be one of {FAILURE_CRITERIA}")
    fails = count_failures(ctx, RusTask(eta, N, strategy, criterion), trials, seed, point, workers)
    return SweepPoint(ctx.name, ctx.T, f"rus-{strategy}", trials, fails, eta=eta, N=N)


# --- sweeps -----------------------------------------------------------------------------------


def sweep_line(
    code: CssCode,
    T: int | None,
    theta: float,
    x_grid: Sequence[float],
    trials: int,
    seed: int,
    criterion: str = "flip_or_lost",
    workers: int = 1,
) -> list[SweepPoint]:
    if not 0.0 <= theta <= math.pi / 2 + 1e-12:
        raise ValueError("theta must lie in [0, pi/2]")
    ctx = context(code, T)
    out = []
    for i, x in enumerate(x_grid):
        if not 0.0 <= x <= 1.0:
            raise ValueError("x must lie in [0, 1]")
        p_e, p_l = line_noise(theta, x)
        out.append(iid_point(ctx, p_e, p_l, trials, seed, i, criterion, workers))
    return out


def grid_sweep(
    code: CssCode,
    T: int | None,
    p_e_grid: Sequence[float],
    p_l_grid: Sequence[float],
    trials: int,
    seed: int,
    criterion: str = "flip_or_lost",
    workers: int = 1,
) -> list[list[SweepPoint]]:
    ctx = context(code, T)
    table = []
    for i, p_e in enumerate(p_e_grid):
        row = []
        for j, p_l in enumerate(p_l_grid):
            point = i * len(p_l_grid) + j
            row.append(iid_point(ctx, p_e, p_l, trials, seed, point, criterion, workers))
        table.append(row)
    return table


AXES = {"error-only": 0.0, "erasure-only": math.pi / 2}


def parse_axis(axis: str | float) -> float:
    if isinstance(axis, (int, float)):
        return float(axis)
    if axis in AXES:
        return AXES[axis]
    try:
        return float(axis)
    except ValueError:
        raise ValueError(f"unknown axis {axis!r}; use error-only, erasure-only or an angle") from None


def _axis_value(theta: float, x: float) -> float:
    p_e, p_l = line_noise(theta, x)
    if theta == 0.0:
        return p_e
    if theta == AXES["erasure-only"]:
        return p_l
    return x


def _interp(x0, g0, x1, g1) -> float:
    if g1 == g0:
        return 0.5 * (x0 + x1)
    return x0 + (x1 - x0) * (-g0) / (g1 - g0)


def bisect_crossing(
    evaluate: Callable[[float, int], tuple[float, float, float]],
    lo: float,
    hi: float,
    resolution: float,
    value: Callable[[float], float],
    max_steps: int = 30,
):
    """Bisection on a noisy sign change.

    ``evaluate(x, point)`` returns (g, g_low, g_high): the estimated gap to
    the reference curve and its confidence bounds.  Stops when the bracket
    width in ``value`` units is below ``resolution`` relative to its midpoint.
    """
    seen: list[tuple[float, tuple[float, float, float]]] = []

    def probe(x: float, point: int):
        g = evaluate(x, point)
        seen.append((x, g))
        return g

    g_lo = probe(lo, 0)
    g_hi = probe(hi, 1)
    if g_lo[0] >= 0 or g_hi[0] <= 0:
        raise NoCrossingError(
            f"no crossing in range: gap {g_lo[0]:+.4g} at the low end, {g_hi[0]:+.4g} at the high end"
        )
    point = 2
    for _ in range(max_steps):
        v_lo, v_hi = value(lo), value(hi)
        if v_hi - v_lo <= resolution * 0.5 * (v_lo + v_hi):
            break
        mid = 0.5 * (lo + hi)
        g_mid = probe(mid, point)
        point += 1
        if g_mid[0] < 0:
            lo, g_lo = mid, g_mid
        else:
            hi, g_hi = mid, g_mid
    crossing = value(_interp(lo, g_lo[0], hi, g_hi[0]))
    ci = (value(_first_crossing(seen, 2)), value(_last_crossing(seen, 1)))
    return crossing, value(lo), value(hi), ci


def _first_crossing(seen, bound: int) -> float:
    """Smallest x where the given gap bound reaches zero, interpolated."""
    pts = sorted(seen)
    for (x0, g0), (x1, g1) in zip(pts, pts[1:]):
        if g0[bound] >= 0:
            return x0
        if g1[bound] >= 0:
            return _interp(x0, g0[bound], x1, g1[bound])
    return pts[-1][0]


def _last_crossing(seen, bound: int) -> float:
    """Largest x where the given gap bound is still below zero, interpolated."""
    pts = sorted(seen)
    for (x0, g0), (x1, g1) in zip(pts[::-1][1:], pts[::-1]):
        if g1[bound] < 0:
            return x1
        if g0[bound] < 0:
            return _interp(x0, g0[bound], x1, g1[bound])
    return pts[0][0]


def pseudo_threshold(
    code: CssCode,
    T: int | None,
    axis: str | float,
    trials: int,
    seed: int,
    resolution: float = 0.05,
    x_range: tuple[float, float] = (0.0, 1.0),
    criterion: str = "flip_or_lost",
    workers: int = 1,
    growth: str = "invalid",
) -> PseudoThresholdResult:
    """Where the logical rate meets the break-even curve along a sweep line.

    The crossing is reported as p_e for the error-only axis, p_l for the
    erasure-only axis and as the line parameter x otherwise.
    """
    theta = parse_axis(axis)
    ctx = context(code, T, growth)
    k = ctx.k
    points: list[SweepPoint] = []

    def evaluate(x: float, point: int):
        p_e, p_l = line_noise(theta, x)
        sp = iid_point(ctx, p_e, p_l, trials, seed, point, criterion, workers)
        points.append(sp)
        ref = break_even(combined_error_rate(p_e, p_l), k)
        lo, hi = sp.ci
        return sp.p_bar - ref, lo - ref, hi - ref

    crossing, b_lo, b_hi, ci = bisect_crossing(
        evaluate, x_range[0], x_range[1], resolution, lambda x: _axis_value(theta, x)
    )
    name = axis if isinstance(axis, str) else f"theta={theta:.6g}"
    return PseudoThresholdResult(ctx.name, name, crossing, b_lo, b_hi, k, trials, ci, points)


def rus_pseudo_threshold(
    code: CssCode,
    T: int | None,
    N: int,
    trials: int,
    seed: int,
    loss_range: tuple[float, float] = (0.005, 0.08),
    resolution: float = 0.05,
    strategy: str = "modified",
    criterion: str = "lost",
    workers: int = 1,
) -> PseudoThresholdResult:
    """Photon-loss pseudo-threshold: p̄(1-η) against break_even(1-η, k)."""
    ctx = context(code, T)
    k = ctx.k
    points: list[SweepPoint] = []

    def evaluate(loss: float, point: int):
        sp = rus_point(ctx, 1 - loss, N, trials, seed, 1000 * N + point, strategy, criterion, workers)
        points.append(sp)
        ref = break_even(loss, k)
        lo, hi = sp.ci
        return sp.p_bar - ref, lo - ref, hi - ref

    crossing, b_lo, b_hi, ci = bisect_crossing(evaluate, *loss_range, resolution, lambda v: v)
    return PseudoThresholdResult(ctx.name, f"loss-N={N}", crossing, b_lo, b_hi, k, trials, ci, points)


def rus_curve_crossing(
    small: CssCode,
    large: CssCode,
    N: int,
    trials: int,
    seed: int,
    loss_range: tuple[float, float] = (0.01, 0.06),
    resolution: float = 0.05,
    strategy: str = "modified",
    criterion: str = "lost",
    workers: int = 1,
) -> PseudoThresholdResult:
    """Threshold estimate: the loss at which two code sizes fail equally often.

    Below threshold the larger code fails less, so the gap ``p̄_large - p̄_small``
    changes sign from negative to positive.
    """
    a, b = context(small), context(large)
    points: list[SweepPoint] = []

    def evaluate(loss: float, point: int):
        pa = rus_point(a, 1 - loss, N, trials, seed, 1000 * N + point, strategy, criterion, workers)
        pb = rus_point(b, 1 - loss, N, trials, seed, 1000 * N + point, strategy, criterion, workers)
        points.extend([pa, pb])
        (a_lo, a_hi), (b_lo, b_hi) = pa.ci, pb.ci
        return pb.p_bar - pa.p_bar, b_lo - a_hi, b_hi - a_lo

    crossing, lo, hi, ci = bisect_crossing(evaluate, *loss_range, resolution, lambda v: v)
    axis = f"loss-N={N} {a.name}/{b.name}"
    return PseudoThresholdResult(f"{a.name}+{b.name}", axis, crossing, lo, hi, 0, trials, ci, points)


def rus_threshold_curve(
    code: CssCode | Sequence[CssCode],
    T: int | None,
    N_range: Sequence[int],
    trials: int,
    seed: int,
    strategy: str = "modified",
    criterion: str = "lost",
    workers: int = 1,
    **kwargs,
) -> list[PseudoThresholdResult]:
    """Loss (pseudo-)threshold for each N.

    A single code gives break-even pseudo-thresholds.  A family of codes
    (e.g. Toric L = 3, 5, 8) gives the crossing of each consecutive pair of
    curves, so each N contributes ``len(family) - 1`` results.
    """
    out = []
    if isinstance(code, CssCode):
        for N in N_range:
            out.append(
                rus_pseudo_threshold(code, T, N, trials, seed, strategy=strategy,
                                     criterion=criterion, workers=workers, **kwargs)
            )
        return out
    family = list(code)
    for N in N_range:
        for small, large in zip(family[:-1], family[1:]):
            out.append(
                rus_curve_crossing(small, large, N, trials, seed, strategy=strategy,
                                   criterion=criterion, workers=workers, **kwargs)
            )
    return out


# --- output ---------------------------------------------------------------------------------


def write_csv(points: Sequence[SweepPoint], path: str | Path) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with tmp.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        for p in points:
            writer.writerow(p.row())
    os.replace(tmp, path)


def read_csv(path: str | Path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def write_json(records, path: str | Path) -> None:
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(records, indent=2, sort_keys=True) + "\n")
    os.replace(tmp, path)


def point_dict(p: SweepPoint) -> dict:
    out = asdict(p)
    out["p_bar"] = p.p_bar
    out["ci"] = list(p.ci)
    return out
