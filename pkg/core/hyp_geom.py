"""
Geodesic geometry in the Cayley graph.

Geodesics, Gromov products, overlap diameters and the concatenation
checker that certifies a chain of geodesic segments is a quasi-geodesic.
On the free-group backend (delta = 0) overlaps are read off common
prefixes; for delta > 0 the 3*delta neighbourhood is built by a
budget-gated breadth-first search.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

import pandas as pd

from core.error_handler import ConfigurationError, EndpointMismatch, check_budget, get_logger
from core.group_core import (
    GroupElement,
    ball_size,
    enumerate_ball,
    get_backend,
    identity,
    invert,
    multiply,
    power,
    word_length,
)
from core.mixed_words import MixedWord

logger = get_logger(__name__)

# (translate, shape): the segment translate * [e, shape]
Segment = Tuple[GroupElement, GroupElement]


# ============================================================
#                   TYPES
# ============================================================

@dataclass(frozen=True)
class Geodesic:
    start: GroupElement
    end: GroupElement
    vertices: Tuple[GroupElement, ...]

    @property
    def length(self) -> int:
        return len(self.vertices) - 1


@dataclass(frozen=True)
class HypParams:
    """
    Hyperbolicity constant delta and the concatenation constant C_delta.

    `budget` caps the 3*delta neighbourhood search and must be set whenever
    that search runs (delta >= 1/3).
    """

    delta: float = 0.0
    c_delta: float = 1.0
    budget: Optional[int] = None

    def __post_init__(self):
        if self.delta < 0 or self.c_delta < 0:
            raise ConfigurationError(
                f"delta and c_delta must be nonnegative, got {self.delta}, {self.c_delta}"
            )
        if self.fattening > 0 and self.budget is None:
            raise ConfigurationError(
                f"delta = {self.delta} needs a neighbourhood budget for the 3*delta search"
            )

    @property
    def fattening(self) -> int:
        return math.floor(3 * self.delta)


@dataclass
class OverlapProfile:
    """All computed d_{i,j} plus the segment lengths l(alpha_i)."""

    entries: Dict[Tuple[int, int], float] = field(default_factory=dict)
    segment_lengths: List[int] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {"i": i, "j": j, "d": value}
            for (i, j), value in sorted(self.entries.items())
        ]
        return pd.DataFrame(rows, columns=["i", "j", "d"])


@dataclass
class ConcatVerdict:
    passed: bool
    profile: OverlapProfile
    worst_margin: float

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"


@dataclass(frozen=True)
class SegmentPattern:
    """
    A chain of segments for concat_check.

    `first_index` is the label of segments[0]; x-translates carry even labels.
    """

    segments: Tuple[Segment, ...]
    periodic: bool
    first_index: int = 0


# ============================================================
#                   GEODESICS AND GROMOV PRODUCTS
# ============================================================

def geodesic(a: GroupElement, b: GroupElement) -> Geodesic:
    """The shortlex-canonical geodesic from a to b (unique in a tree)."""
    step = multiply(invert(a), b)
    implementation = get_backend(a.backend)
    vertices = tuple(multiply(a, p) for p in implementation.geodesic_prefixes(step))
    return Geodesic(start=a, end=b, vertices=vertices)


def gromov_product(g: GroupElement, h: GroupElement) -> float:
    """(|g| + |h| - |g^-1 h|) / 2, based at e."""
    return (word_length(g) + word_length(h) - word_length(multiply(invert(g), h))) / 2


def _path_diameter(indices: Sequence[int]) -> float:
    # vertices along a geodesic are at distance |i - j|
    return float(max(indices) - min(indices)) if indices else 0.0


def _neighbourhood(vertices: Sequence[GroupElement], radius: int, params: HypParams) -> Set[GroupElement]:
    """Closed radius-neighbourhood of a vertex set by ball translation."""
    if radius == 0:
        return set(vertices)
    backend = vertices[0].backend
    check_budget(
        "neighbourhood",
        len(vertices) * ball_size(radius, backend),
        params.budget,
        f"{len(vertices)} vertices, radius {radius}",
    )
    ball = enumerate_ball(radius, backend)
    return {multiply(v, s) for v in vertices for s in ball}


def _fattened_overlap(first: Geodesic, second: Geodesic, params: HypParams) -> float:
    """diam(N_{3 delta}(first) intersect second), measured along second."""
    radius = params.fattening
    if radius == 0:
        on_first = set(first.vertices)
    else:
        on_first = _neighbourhood(first.vertices, radius, params)
    hits = [i for i, v in enumerate(second.vertices) if v in on_first]
    return _path_diameter(hits)


def overlap_diameter(g: GroupElement, h: GroupElement, params: HypParams = HypParams()) -> float:
    """
    The overlap diameter of [e, g] and [e, h].

    Args:
        g: End of the fattened geodesic
        h: End of the measured geodesic
        params: Hyperbolicity parameters; delta > 0 needs params.budget

    Returns:
        diam(N_{3 delta}([e,g]) intersect [e,h]); the Gromov product when delta = 0

    Raises:
        BudgetExceeded: On the delta > 0 path only
    """
    if params.fattening == 0:
        return gromov_product(g, h)
    e = identity(g.backend)
    return _fattened_overlap(geodesic(e, g), geodesic(e, h), params)


def translated_overlap(
    g1: GroupElement,
    a1: GroupElement,
    g2: GroupElement,
    a2: GroupElement,
    params: HypParams = HypParams()
) -> float:
    """
    diam(N_{3 delta}(g1 [e,a1]) intersect g2 [e,a2]).

    Both segments are moved by g1^-1 first; the metric is left-invariant.
    """
    shift = multiply(invert(g1), g2)
    if params.fattening > 0:
        e = identity(a1.backend)
        first = geodesic(e, a1)
        second = geodesic(shift, multiply(shift, a2))
        return _fattened_overlap(first, second, params)

    # tree: v lies on [e, a1] iff v is a prefix of a1
    target = a1.letters
    hits = []
    for index, vertex in enumerate(geodesic(shift, multiply(shift, a2)).vertices):
        letters = vertex.letters
        if len(letters) <= len(target) and target.startswith(letters):
            hits.append(index)
    return _path_diameter(hits)


# ============================================================
#                   CONCATENATION CHECK
# ============================================================

def _segment_end(segment: Segment) -> GroupElement:
    translate, shape = segment
    return multiply(translate, shape)


def concat_check(
    segments: Sequence[Segment],
    params: HypParams = HypParams(),
    window: int = 2,
    periodic: bool = False,
    first_index: int = 0
) -> ConcatVerdict:
    """
    Check the concatenation inequality on every even-labelled segment.

    For each even label i the slack is
        l(alpha_i) - sum_{1 <= |j - i| <= window} d_{i,j} - C_delta
    and the chain passes iff the smallest slack is nonnegative.

    Args:
        segments: (translate, shape) pairs, alpha_i = translate * [e, shape]
        params: Hyperbolicity parameters
        window: How many neighbours on each side enter the sum
        periodic: Treat the list as one period of a bi-infinite chain; the
            segment P positions on is the period translate W * alpha_i with W
            carrying the chain start to its end
        first_index: Label of segments[0]

    Returns:
        ConcatVerdict with the profile of all computed d_{i,j}

    Raises:
        EndpointMismatch: If alpha_i does not end where alpha_{i+1} starts
    """
    if not segments:
        raise ValueError("concat_check needs at least one segment")
    if window < 1:
        raise ValueError(f"window must be positive, got {window}")
    count = len(segments)
    if periodic and count % 2:
        raise ValueError("A periodic chain needs an even period")

    for i in range(count - 1):
        if _segment_end(segments[i]) != segments[i + 1][0]:
            logger.error(f"Segments {i} and {i + 1} do not share an endpoint")
            raise EndpointMismatch(
                f"Segment {i} ends at {_segment_end(segments[i])} but segment "
                f"{i + 1} starts at {segments[i + 1][0]}"
            )

    period_shift = multiply(_segment_end(segments[-1]), invert(segments[0][0]))

    def resolve(j: int) -> Optional[Segment]:
        if 0 <= j < count:
            return segments[j]
        if not periodic:
            return None
        q, r = divmod(j, count)
        translate, shape = segments[r]
        return multiply(power(period_shift, q), translate), shape

    profile = OverlapProfile(segment_lengths=[word_length(shape) for _, shape in segments])
    worst_margin = math.inf
    for i in range(count):
        if (i + first_index) % 2:
            continue
        translate, shape = segments[i]
        total = 0.0
        for j in range(i - window, i + window + 1):
            neighbour = resolve(j)
            if j == i or neighbour is None:
                continue
            d = translated_overlap(translate, shape, neighbour[0], neighbour[1], params)
            profile.entries[(i, j)] = d
            total += d
        margin = word_length(shape) - total - params.c_delta
        worst_margin = min(worst_margin, margin)

    if worst_margin == math.inf:
        raise ValueError("No even-labelled segment to test")
    return ConcatVerdict(passed=worst_margin >= 0, profile=profile, worst_margin=worst_margin)


def check_pattern(pattern: SegmentPattern, params: HypParams = HypParams(), window: int = 2) -> ConcatVerdict:
    return concat_check(
        pattern.segments,
        params,
        window=window,
        periodic=pattern.periodic,
        first_index=pattern.first_index,
    )


# ============================================================
#                   PATTERN BUILDERS
# ============================================================

def _chain(shapes: Sequence[GroupElement], start: GroupElement) -> Tuple[Segment, ...]:
    segments = []
    position = start
    for shape in shapes:
        segments.append((position, shape))
        position = multiply(position, shape)
    return tuple(segments)


def _interleaved_shapes(w: MixedWord, g: GroupElement) -> List[GroupElement]:
    """x-letters alternate with constants; trivial segments fill x x gaps."""
    e = identity(g.backend)
    g_inverse = invert(g)
    shapes: List[GroupElement] = []
    for index, exponent in enumerate(w.exponents):
        step = g if exponent > 0 else g_inverse
        for k in range(abs(exponent)):
            if k:
                shapes.append(e)
            shapes.append(step)
        shapes.append(w.constants[index + 1])
    return shapes


def periodic_pattern(core: MixedWord, g: GroupElement) -> SegmentPattern:
    """
    One period of the bi-infinite chain for core(g)^k.

    The core must be cyclically reduced with at least one x-syllable, so its
    leading constant is trivial and the period begins on an x-translate.
    """
    if core.m == 0 or not core.constants[0].is_identity:
        raise ValueError(f"periodic_pattern needs a cyclically reduced core, got {core}")
    shapes = _interleaved_shapes(core, g)
    return SegmentPattern(_chain(shapes, identity(g.backend)), periodic=True, first_index=0)
