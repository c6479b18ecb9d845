"""
Admissible measures, seeded random walks and Monte Carlo estimates of the
speed, the overlap tail constant and translate-overlap statistics.
"""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from config.settings import C1_GRID
from core.error_handler import ConfigurationError, check_budget, get_logger
from core.group_core import (
    BackendSpec,
    GroupElement,
    enumerate_ball,
    get_backend,
    identity,
    invert,
    multiply,
    parse_element,
    word_length,
)
from core.hyp_geom import overlap_diameter

logger = get_logger(__name__)

MEASURE_GRAMMAR = (
    "measure := 'uniform' | 'uniform(' symbols ')' | element ':' weight (',' element ':' weight)* ; "
    "weight := p/q"
)


# ============================================================
#                   MEASURES
# ============================================================

@dataclass(frozen=True)
class Measure:
    """A finitely supported probability measure on G with rational weights."""

    support: Tuple[GroupElement, ...]
    weights: Tuple[Fraction, ...]
    admissible: Optional[bool] = None

    def __post_init__(self):
        if not self.support:
            raise ConfigurationError("Measure support is empty")
        if len(self.support) != len(self.weights):
            raise ConfigurationError("Support and weights differ in length")
        if len(set(self.support)) != len(self.support):
            raise ConfigurationError("Support elements must be distinct")
        if len({s.backend for s in self.support}) != 1:
            raise ConfigurationError("Support elements live on different backends")
        if any(w <= 0 for w in self.weights):
            raise ConfigurationError("Weights must be positive")
        if sum(self.weights) != 1:
            raise ConfigurationError(f"Weights sum to {sum(self.weights)}, not 1")
        if self.admissible is None:
            object.__setattr__(self, "admissible", validate_admissible(self))

    @property
    def backend(self) -> BackendSpec:
        return self.support[0].backend

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([float(w) for w in self.weights])

    def __str__(self) -> str:
        return format_measure(self)


def uniform_measure(backend: BackendSpec, symbols: Optional[Sequence[str]] = None) -> Measure:
    """Uniform on the given symbols, S u S^-1 by default."""
    symbols = list(symbols) if symbols is not None else list(backend.alphabet)
    support = tuple(parse_element(s, backend) for s in symbols)
    weight = Fraction(1, len(support))
    return Measure(support, tuple(weight for _ in support))


def parse_measure(text: str, backend: BackendSpec) -> Measure:
    """
    Parse `uniform`, `uniform(aAbB)`, `uniform(a, ab, BA)` or `a:1/4, A:1/4, ...`.

    Raises:
        ConfigurationError: On a malformed weight or measure
        UnknownSymbol: On an element outside the alphabet
    """
    compact = "".join(text.split())
    if compact == "uniform":
        return uniform_measure(backend)
    if compact.startswith("uniform(") and compact.endswith(")"):
        inner = compact[len("uniform("):-1]
        symbols = inner.split(",") if "," in inner else list(inner)
        return uniform_measure(backend, [s for s in symbols if s])

    support: List[GroupElement] = []
    weights: List[Fraction] = []
    for item in filter(None, compact.split(",")):
        if ":" not in item:
            raise ConfigurationError(f"Expected element:weight, got {item!r}. Grammar: {MEASURE_GRAMMAR}")
        element_text, weight_text = item.split(":", 1)
        try:
            weight = Fraction(weight_text)
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigurationError(f"Bad weight {weight_text!r}: {e}") from e
        support.append(parse_element("" if element_text == "e" else element_text, backend))
        weights.append(weight)
    if not support:
        raise ConfigurationError(f"Empty measure {text!r}. Grammar: {MEASURE_GRAMMAR}")
    return Measure(tuple(support), tuple(weights))


def format_measure(measure: Measure) -> str:
    return ", ".join(f"{s}:{w}" for s, w in zip(measure.support, measure.weights))


def reflected_measure(measure: Measure) -> Measure:
    """The law of an increment's inverse; drives the walk x_n^-1 in reverse."""
    return Measure(tuple(invert(s) for s in measure.support), measure.weights)


# ============================================================
#                   ADMISSIBILITY
# ============================================================

def _fold(words: Sequence[str], budget: Optional[int]) -> Tuple[int, set]:
    """
    Stallings-fold the bouquet of the given reduced words.

    Returns:
        (number of vertices, set of generator labels) of the folded graph
    """
    check_budget("fold", sum(len(w) for w in words), budget, f"{len(words)} words")
    parent: List[int] = [0]

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def new_vertex() -> int:
        parent.append(len(parent))
        return len(parent) - 1

    # edges oriented along lowercase labels
    edges: List[Tuple[int, str, int]] = []
    for word in words:
        current = 0
        for position, symbol in enumerate(word):
            target = 0 if position == len(word) - 1 else new_vertex()
            if symbol.islower():
                edges.append((current, symbol, target))
            else:
                edges.append((target, symbol.lower(), current))
            current = target

    merged = True
    while merged:
        merged = False
        outgoing: Dict[Tuple[int, str], int] = {}
        incoming: Dict[Tuple[int, str], int] = {}
        for u, label, v in edges:
            u, v = find(u), find(v)
            for table, key, value in ((outgoing, (u, label), v), (incoming, (v, label), u)):
                seen = table.setdefault(key, value)
                if find(seen) != find(value):
                    parent[find(seen)] = find(value)
                    merged = True

    vertices = {find(v) for v in range(len(parent))}
    labels = {label for _, label, _ in edges}
    return len(vertices), labels


def validate_admissible(measure: Measure, budget: Optional[int] = None) -> bool:
    """
    Sufficient admissibility test: symmetric support generating G as a group.

    Generation is decided by folding the support words; the subgroup is all
    of F_k exactly when the folded graph is the rose with every generator.

    Raises:
        BudgetExceeded: If the folding input exceeds the budget
    """
    support = set(measure.support)
    if any(invert(s) not in support for s in support):
        return False
    backend = measure.support[0].backend
    words = [s.letters for s in support if not s.is_identity]
    if not words:
        return False
    vertex_count, labels = _fold(words, budget)
    return vertex_count == 1 and labels == set(backend.generators)


def warn_if_inadmissible(measure: Measure, context: str) -> None:
    if not measure.admissible:
        logger.warning(f"{context}: measure {measure} is not admissible; results are unsupported")


# ============================================================
#                   SEEDED SAMPLING
# ============================================================

def _key_part(part) -> int:
    if isinstance(part, (int, np.integer)):
        return int(part)
    return zlib.crc32(str(part).encode("utf-8"))


def derive_rng(master_seed: int, *key) -> np.random.Generator:
    """Independent PCG64 stream for (master_seed, key); a pure function of both."""
    sequence = np.random.SeedSequence(master_seed, spawn_key=tuple(_key_part(k) for k in key))
    return np.random.Generator(np.random.PCG64(sequence))


@dataclass(frozen=True)
class WalkSpec:
    measure: Measure
    seed: int
    length: int

    def __post_init__(self):
        if self.length < 0:
            raise ValueError(f"Walk length must be nonnegative, got {self.length}")


def _increments(measure: Measure, n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.choice(len(measure.support), size=n, p=measure.probabilities)


def sample_walk(spec: WalkSpec) -> List[GroupElement]:
    """Positions x_0 = e, ..., x_n of the walk seeded by spec.seed."""
    warn_if_inadmissible(spec.measure, "sample_walk")
    rng = derive_rng(spec.seed)
    position = identity(spec.measure.backend)
    positions = [position]
    for index in _increments(spec.measure, spec.length, rng):
        position = multiply(position, spec.measure.support[index])
        positions.append(position)
    return positions


def walk_endpoint(measure: Measure, n: int, rng: np.random.Generator) -> GroupElement:
    """x_n without keeping the path."""
    implementation = get_backend(measure.backend)
    inverse = {s: s.swapcase() for s in measure.backend.alphabet}
    stack: List[str] = []
    steps = [s.letters for s in measure.support]
    for index in _increments(measure, n, rng):
        for symbol in steps[index]:
            if stack and stack[-1] == inverse[symbol]:
                stack.pop()
            else:
                stack.append(symbol)
    return GroupElement(implementation.reduce("".join(stack)), measure.backend)


# ============================================================
#                   SPEED
# ============================================================

@dataclass
class SpeedEstimate:
    lambda_hat: float
    stderr: float
    speeds: np.ndarray
    n: int
    trials: int

    def quantile(self, q: float) -> float:
        return float(np.quantile(self.speeds, q))


def estimate_speed(measure: Measure, n: int, trials: int, master_seed: int) -> SpeedEstimate:
    """
    Mean and standard error of d(e, x_n)/n over independent trials.

    Trial i draws from derive_rng(master_seed, "speed", i).
    """
    if n < 1 or trials < 1:
        raise ValueError(f"n and trials must be positive, got n={n}, trials={trials}")
    warn_if_inadmissible(measure, "estimate_speed")
    logger.info(f"Estimating speed: n={n}, trials={trials}, seed={master_seed}")
    speeds = np.array([
        word_length(walk_endpoint(measure, n, derive_rng(master_seed, "speed", i))) / n
        for i in range(trials)
    ])
    stderr = float(stats.sem(speeds)) if trials > 1 else 0.0
    return SpeedEstimate(float(speeds.mean()), stderr, speeds, n, trials)


# ============================================================
#                   TAIL OF THE OVERLAP
# ============================================================

@dataclass
class TailEstimate:
    """Empirical survival t -> P[D(g, x_n) >= t] with a dominating C_1."""

    survival: Dict[int, float]
    fitted_c1: float
    trials: int
    slope: float = math.nan
    overlaps: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {"t": list(self.survival), "survival": list(self.survival.values())}
        )


def fit_dominating_c1(survival: Dict[int, float], grid: Sequence[float] = C1_GRID) -> float:
    """Smallest C on the grid with survival(t) <= C 2^(-t/C) for every t; inf if none."""
    for c in grid:
        if all(s <= c * 2 ** (-t / c) for t, s in survival.items()):
            return float(c)
    logger.warning(f"No grid value up to {grid[-1]} dominates the survival function")
    return math.inf


def log2_survival_slope(survival: Dict[int, float], window: Tuple[int, int] = (3, 10)) -> float:
    """Least-squares slope of log2 survival over the window (positive entries only)."""
    points = [(t, s) for t, s in survival.items() if window[0] <= t <= window[1] and s > 0]
    if len(points) < 2:
        return math.nan
    t, s = zip(*points)
    return float(stats.linregress(t, np.log2(s)).slope)


def estimate_tail(
    measure: Measure,
    g: GroupElement,
    n: int,
    trials: int,
    master_seed: int,
    inverse: bool = False,
    slope_window: Tuple[int, int] = (3, 10)
) -> TailEstimate:
    """
    Empirical survival of D(g, x_n), or of D(g, x_n^-1) when `inverse` is set.

    Returns:
        TailEstimate with survival on t = 0 .. max observed + 1
    """
    if n < 0 or trials < 1:
        raise ValueError(f"n must be nonnegative and trials positive, got n={n}, trials={trials}")
    warn_if_inadmissible(measure, "estimate_tail")
    logger.info(f"Estimating tail for g={g}: n={n}, trials={trials}, inverse={inverse}")
    overlaps = np.empty(trials, dtype=int)
    for i in range(trials):
        x_n = walk_endpoint(measure, n, derive_rng(master_seed, "tail", i))
        if inverse:
            x_n = invert(x_n)
        overlaps[i] = int(round(overlap_diameter(g, x_n)))

    counts = np.bincount(overlaps, minlength=int(overlaps.max()) + 2)
    at_least = counts[::-1].cumsum()[::-1]
    survival = {t: float(at_least[t] / trials) for t in range(len(at_least))}
    return TailEstimate(
        survival=survival,
        fitted_c1=fit_dominating_c1(survival),
        trials=trials,
        slope=log2_survival_slope(survival, slope_window),
        overlaps=overlaps,
    )


# ============================================================
#                   TRANSLATE OVERLAPS
# ============================================================

@dataclass
class OverlapStats:
    """Per-trial normalized overlap maxima over g in a finite ball."""

    frame: pd.DataFrame
    quantiles: Dict[str, Dict[float, float]]
    radius: int
    n: int
    ball_restricted: bool = True


def translate_overlap_stats(
    measure: Measure,
    n: int,
    trials: int,
    radius: int,
    master_seed: int,
    budget: Optional[int] = None
) -> OverlapStats:
    """
    Per trial: max_{g in ball} D(x_n^-1, g x_n)/n and max_{g != e} D(x_n, g x_n)/n.

    Only g in the ball of the given radius are checked; the report says so.

    Raises:
        BudgetExceeded: If the ball exceeds the budget
    """
    if n < 1 or trials < 1 or radius < 0:
        raise ValueError(f"Need n, trials >= 1 and radius >= 0, got n={n}, trials={trials}, radius={radius}")
    warn_if_inadmissible(measure, "translate_overlap_stats")
    ball = enumerate_ball(radius, measure.backend, budget)
    rows = []
    for i in range(trials):
        x_n = walk_endpoint(measure, n, derive_rng(master_seed, "overlap", i))
        x_inverse = invert(x_n)
        inverse_max = max(overlap_diameter(x_inverse, multiply(g, x_n)) for g in ball)
        translates = [overlap_diameter(x_n, multiply(g, x_n)) for g in ball if not g.is_identity]
        rows.append({
            "trial": i,
            "inverse_overlap": inverse_max / n,
            "self_overlap": (max(translates) if translates else 0.0) / n,
        })
    frame = pd.DataFrame(rows, columns=["trial", "inverse_overlap", "self_overlap"])
    levels = (0.5, 0.9, 0.99)
    quantiles = {
        column: {q: float(frame[column].quantile(q)) for q in levels}
        for column in ("inverse_overlap", "self_overlap")
    }
    logger.info(f"Overlap stats over ball({radius}): medians {quantiles['inverse_overlap'][0.5]:.3f}, "
                f"{quantiles['self_overlap'][0.5]:.3f}")
    return OverlapStats(frame=frame, quantiles=quantiles, radius=radius, n=n)
