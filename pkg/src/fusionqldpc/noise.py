"""Fusion noise: i.i.d. error/erasure and repeat-until-success photon loss."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from numba import njit

from .foliation import ANCILLA_SIDE, DecodingProblem, FoliatedLattice

SUCCESS, FAILURE, LOSS, SKIPPED = 0, 1, 2, 3
RESULT_NAMES = ("success", "failure", "loss", "skipped")
ENDPOINT_NONE, ENDPOINT_ANCILLA, ENDPOINT_DATA = 0, 1, 2
ENDPOINT_NAMES = ("none", "ancilla", "data")


@dataclass(frozen=True)
class IIDNoise:
    p_e: float
    p_l: float

    def __post_init__(self):
        for name in ("p_e", "p_l"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")


@dataclass(frozen=True)
class RUSNoise:
    eta: float
    N: int
    strategy: Literal["standard", "modified"] = "modified"

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if self.N < 1:
            raise ValueError("N must be at least 1")
        if self.strategy not in ("standard", "modified"):
            raise ValueError(f"unknown RUS strategy {self.strategy!r}")

    @property
    def loss(self) -> float:
        return 1.0 - self.eta


NoiseConfig = IIDNoise | RUSNoise


@dataclass(frozen=True)
class RusOutcome:
    fusion: int
    result: str
    erased_endpoint: str
    attempts: int


@dataclass
class TrialNoise:
    error: np.ndarray  # uint8 over problem variables
    erasures: np.ndarray  # sorted column indices
    rus_result: np.ndarray | None = None
    rus_endpoint: np.ndarray | None = None
    rus_attempts: np.ndarray | None = None

    @property
    def rus_log(self) -> list[RusOutcome] | None:
        if self.rus_result is None:
            return None
        return [
            RusOutcome(f, RESULT_NAMES[r], ENDPOINT_NAMES[e], int(a))
            for f, (r, e, a) in enumerate(
                zip(self.rus_result, self.rus_endpoint, self.rus_attempts)
            )
        ]


def combined_error_rate(p_e: float, p_l: float) -> float:
    """Error probability when an erased outcome is wrong half the time."""
    return p_l / 2 + (1 - p_l) * p_e


def sample_iid(
    problem: DecodingProblem, p_e: float, p_l: float, rng: np.random.Generator
) -> TrialNoise:
    """Independent erasure (p_l) and flip (p_e) of every fusion bit.

    Erased bits get a uniformly random value so that the syndrome carries the
    right statistics; virtual columns are never touched.
    """
    IIDNoise(p_e, p_l)
    n_f = problem.n_fusions
    erased = rng.random(n_f) < p_l
    flipped = rng.random(n_f) < p_e
    coin = rng.random(n_f) < 0.5
    error = np.zeros(problem.n_variables, dtype=np.uint8)
    error[:n_f] = np.where(erased, coin, flipped)
    return TrialNoise(error, np.flatnonzero(erased))


def physical_fusion_probabilities(eta: float) -> tuple[float, float, float]:
    """(success, failure, loss) of one physical fusion attempt."""
    p = 0.5 * eta * eta
    return p, p, 1.0 - eta * eta


def rus_outcome_probabilities(eta: float, N: int) -> tuple[float, float, float]:
    """(success, failure, loss) of a repeat-until-success fusion with N attempts."""
    RUSNoise(eta, N)
    p_s, p_f, p_l = physical_fusion_probabilities(eta)
    geometric = sum(p_f**i for i in range(N))
    return p_s * geometric, p_f**N, p_l * geometric


def sample_rus_outcomes(
    eta: float, N: int, size: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Simulate `size` independent RUS fusions attempt by attempt.

    Returns (result codes, attempts used).
    """
    p_s, p_f, _ = physical_fusion_probabilities(eta)
    result = np.full(size, FAILURE, dtype=np.int8)
    attempts = np.full(size, N, dtype=np.int16)
    pending = np.arange(size)
    for attempt in range(1, N + 1):
        if pending.size == 0:
            break
        u = rng.random(pending.size)
        done_s = u < p_s
        done_l = u >= p_s + p_f
        result[pending[done_s]] = SUCCESS
        result[pending[done_l]] = LOSS
        finished = done_s | done_l
        attempts[pending[finished]] = attempt
        pending = pending[~finished]
    return result, attempts


@njit(cache=True)
def _rus_schedule(result, endpoint, layer_starts, chain_of, anc_of, coin, modified, n_nodes):
    """Apply RUS outcomes layer by layer; returns the Z-measured (dead) spins.

    ``result`` and ``endpoint`` are updated in place (skips, failure ends).
    """
    dead = np.zeros(n_nodes, dtype=np.bool_)
    for li in range(layer_starts.shape[0] - 1):
        for f in range(layer_starts[li], layer_starts[li + 1]):
            a = chain_of[f]
            b = anc_of[f]
            if modified and (dead[a] or dead[b]):
                result[f] = 3
                continue
            r = result[f]
            if r == 2:
                dead[a] = True
                dead[b] = True
            elif r == 1:
                # standard RUS always Z-measures the ancilla spin
                if not modified or coin[f]:
                    endpoint[f] = 1
                    dead[b] = True
                else:
                    endpoint[f] = 2
                    dead[a] = True
    return dead


@dataclass
class _RusTables:
    layer_starts: np.ndarray
    chain_of: np.ndarray
    anc_of: np.ndarray
    relevant_node: np.ndarray  # endpoint whose generator carries the X-lattice bit


def _rus_tables(lattice: FoliatedLattice, problem: DecodingProblem) -> _RusTables:
    hit = problem.__dict__.get("_rus_tables")
    if hit is not None:
        return hit
    ends = np.array([lattice.fusion_endpoints(f) for f in range(len(lattice.fusions))])
    layers = np.array([fu.layer for fu in lattice.fusions])
    if np.any(np.diff(layers) < 0):
        raise ValueError("fusions must be ordered by layer")
    starts = np.searchsorted(layers, np.arange(lattice.n_layers + 1))
    tables = _RusTables(
        layer_starts=starts.astype(np.int64),
        chain_of=ends[:, 0].astype(np.int64),
        anc_of=ends[:, 1].astype(np.int64),
        relevant_node=np.where(
            np.array([s == ANCILLA_SIDE for s in problem.fusion_side]), ends[:, 1], ends[:, 0]
        ).astype(np.int64),
    )
    problem.__dict__["_rus_tables"] = tables
    return tables


def _erased_columns(problem, tables, result, dead) -> np.ndarray:
    n_f = problem.n_fusions
    erased = np.zeros(problem.n_variables, dtype=bool)
    erased[:n_f] = (result != SUCCESS) & dead[tables.relevant_node]
    erased[problem.node_column_of[dead]] = True
    return np.flatnonzero(erased)


def dead_spins(lattice: FoliatedLattice, result, endpoint) -> np.ndarray:
    """Spins Z-measured by a given set of RUS outcomes."""
    dead = np.zeros(lattice.n_nodes, dtype=bool)
    for f, (r, e) in enumerate(zip(result, endpoint)):
        a, b = lattice.fusion_endpoints(f)
        if r == LOSS:
            dead[a] = dead[b] = True
        elif r == FAILURE:
            dead[b if e == ENDPOINT_ANCILLA else a] = True
    return dead


def erasures_from_events(
    lattice: FoliatedLattice, problem: DecodingProblem, result, endpoint
) -> np.ndarray:
    """Erased columns implied by per-fusion RUS results and failure endpoints."""
    result = np.asarray(result)
    dead = dead_spins(lattice, result, endpoint)
    return _erased_columns(problem, _rus_tables(lattice, problem), result, dead)


def sample_rus(
    lattice: FoliatedLattice,
    problem: DecodingProblem,
    eta: float,
    N: int,
    strategy: str,
    rng: np.random.Generator,
) -> TrialNoise:
    """Photon loss under repeat-until-success fusions.

    Fusions run layer by layer, all at once (``standard``) or one after the
    other in fusion-id order (``modified``), in which case a fusion touching
    an already Z-measured spin is skipped.  A lost RUS fusion Z-measures both
    spins; a failed one Z-measures the ancilla (standard) or a random end
    (modified).  A Z-measured spin erases its virtual X outcome.  A missing
    bond erases the fusion's X-lattice bit only when the spin feeding that
    bit is the one measured; otherwise the bit's value is fixed by the known
    Z outcomes and stays available.  Erased columns receive random values.
    """
    config = RUSNoise(eta, N, strategy)
    tables = _rus_tables(lattice, problem)
    n_f = problem.n_fusions
    result, attempts = sample_rus_outcomes(config.eta, config.N, n_f, rng)
    coin = rng.random(n_f) < 0.5
    endpoint = np.zeros(n_f, dtype=np.int8)
    dead = _rus_schedule(
        result,
        endpoint,
        tables.layer_starts,
        tables.chain_of,
        tables.anc_of,
        coin,
        strategy == "modified",
        lattice.n_nodes,
    )
    attempts[result == SKIPPED] = 0
    cols = _erased_columns(problem, tables, result, dead)
    error = np.zeros(problem.n_variables, dtype=np.uint8)
    error[cols] = rng.random(cols.size) < 0.5
    return TrialNoise(error, cols, result, endpoint, attempts)
