"""
Mixed-identity-free constructions: complexity sweeps, exact growth,
non-solution certificates, randomized searches and selfless maps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config.settings import DEFAULT_ATTEMPT_LIMIT, DEFAULT_BUDGETS
from core.error_handler import (
    AttemptLimitExceeded,
    BudgetExceeded,
    ConfigurationError,
    InjectivityFailure,
    SelflessnessFailure,
    TrivialWord,
    check_budget,
    get_logger,
)
from core.group_core import (
    BackendSpec,
    GroupElement,
    ball_size,
    commutes,
    enumerate_ball,
    identity,
    invert,
    iter_shortlex,
    multiply,
    parse_element,
    word_length,
)
from core.hyp_geom import ConcatVerdict, HypParams, check_pattern, overlap_diameter, periodic_pattern
from core.mixed_words import (
    MixedWord,
    cyclic_reduce,
    enumerate_mixed_ball,
    evaluate,
    mixed_identity,
    mixed_ball_size,
    mixed_length,
    parse_mixed,
)
from core.random_walk import Measure, derive_rng, uniform_measure, walk_endpoint, warn_if_inadmissible

logger = get_logger(__name__)


# ============================================================
#                   CALIBRATED CONSTANTS
# ============================================================

@dataclass(frozen=True)
class Calibration:
    """Operational stand-ins for the existential constants lambda, C_1, C_delta."""

    lambda_hat: float
    c1_hat: float
    c_delta: float = 1.0
    master_seed: Optional[int] = None
    measure: str = ""
    backend: str = ""
    diagnostics: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.lambda_hat <= 0:
            raise ConfigurationError(f"lambda_hat must be positive, got {self.lambda_hat}")
        if not 0 < self.c1_hat < math.inf:
            raise ConfigurationError(f"c1_hat must be positive and finite, got {self.c1_hat}")

    def single_word_constant(self) -> float:
        return 20 * self.c1_hat / self.lambda_hat

    def simultaneous_constant(self, rank: int) -> float:
        # s is twice the size of the free basis
        return 20 * self.c1_hat * math.log2(2 * rank) / self.lambda_hat

    def hyp_params(self, budget: Optional[int] = DEFAULT_BUDGETS["neighbourhood"]) -> HypParams:
        return HypParams(delta=0.0, c_delta=self.c_delta, budget=budget)

    def provenance(self) -> Dict[str, object]:
        return {
            "lambda_hat": self.lambda_hat,
            "c1_hat": self.c1_hat,
            "c_delta": self.c_delta,
            "seed": self.master_seed,
        }


# ============================================================
#                   RESULT TYPES
# ============================================================

@dataclass
class Certificate:
    """Simultaneous non-solution certificate for g over W_n."""

    candidate: GroupElement
    radius: int
    threshold: float
    bullet_maxima: Tuple[float, float, float, float]
    c_delta: float
    passed: bool
    margin: float
    strict: bool = False
    strict_threshold: Optional[float] = None
    calibration: Optional[Dict[str, object]] = None

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"


@dataclass
class SingleCertificate:
    """Outcome of certify_single; `attempt` is the concat report on the cyclic core."""

    word: MixedWord
    core: MixedWord
    candidate: GroupElement
    nonsolution: bool
    attempt: Optional[ConcatVerdict] = None

    @property
    def certificate(self) -> Optional[ConcatVerdict]:
        return self.attempt if self.attempt is not None and self.attempt.passed else None


@dataclass
class GrowthRecord:
    n: int
    value: int
    witness_word: MixedWord
    witness_nonsolution: GroupElement
    words_checked: int = 0


@dataclass
class SearchResult:
    g: GroupElement
    attempts: int
    walk_length: int
    constant: float


@dataclass
class SimultaneousResult:
    g: GroupElement
    certificate: Certificate
    attempts: int
    walk_length: int
    constant: float


@dataclass
class UnionBoundReport:
    n: int
    walk_length: int
    threshold: float
    frequency: float
    bound: float
    trials: int
    constants: List[str]


@dataclass
class SelflessMap:
    n: int
    image_of_x: GroupElement
    f_value: int
    injectivity_checked_radius: int
    certificate: Certificate
    attempts: int
    f_at_least_n: bool


@dataclass
class LowerBoundResult:
    n: int
    length: int
    witness: GroupElement
    family_size: int


# ============================================================
#                   COMPLEXITY AND GROWTH
# ============================================================

def minimal_nonsolution(
    w: MixedWord,
    budget: Optional[int] = DEFAULT_BUDGETS["sweep"]
) -> GroupElement:
    """
    The shortlex-first g with w(g) != e.

    Raises:
        TrivialWord: If w is trivial in G*<x>
        BudgetExceeded: If the sweep visits more than `budget` elements
    """
    if w.is_identity:
        raise TrivialWord("The trivial word has no non-solution")
    visited = 0
    e = identity(w.backend)
    for g in iter_shortlex(w.backend):
        if evaluate(w, g) != e:
            return g
        visited += 1
        if budget is not None and visited >= budget:
            logger.error(f"Complexity sweep for {w} exhausted radius {word_length(g)}")
            raise BudgetExceeded("sweep", visited, budget, f"radius {word_length(g)} exhausted for {w}")
    raise AssertionError("unreachable: iter_shortlex is infinite")


def complexity(w: MixedWord, budget: Optional[int] = DEFAULT_BUDGETS["sweep"]) -> int:
    """min |g| over g with w(g) != e."""
    return word_length(minimal_nonsolution(w, budget))


def mif_growth(
    n: int,
    backend: BackendSpec,
    budget: Optional[int] = DEFAULT_BUDGETS["growth"],
    shuffle_seed: Optional[int] = None
) -> GrowthRecord:
    """
    Exact M(n): the largest complexity among nontrivial words of length <= n.

    The cost gate assumes each sweep may reach radius n. With `shuffle_seed`
    the words are visited in a permuted order; the value must not change.

    Raises:
        BudgetExceeded: If the double enumeration exceeds the budget
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    check_budget("growth", mixed_ball_size(n, backend) * ball_size(n, backend), budget, f"n={n}")
    words = enumerate_mixed_ball(n, backend)
    if shuffle_seed is not None:
        order = derive_rng(shuffle_seed, "growth-order").permutation(len(words))
        words = [words[int(i)] for i in order]

    best: Optional[Tuple[int, MixedWord, GroupElement]] = None
    for w in words:
        g = minimal_nonsolution(w, budget=None)
        if best is None or word_length(g) > best[0]:
            best = (word_length(g), w, g)
    logger.info(f"M({n}) = {best[0]} over {len(words)} words, witness {best[1]}")
    return GrowthRecord(n=n, value=best[0], witness_word=best[1], witness_nonsolution=best[2],
                        words_checked=len(words))


# ============================================================
#                   CERTIFICATES
# ============================================================

def certify_single(w: MixedWord, g: GroupElement, params: HypParams = HypParams()) -> SingleCertificate:
    """
    Decide w(g) != e on the cyclic core and try to certify infinite order.

    A passing concat report on the periodic pattern of the core implies the
    non-solution; a failing one says nothing.

    Raises:
        TrivialWord: If w is trivial
    """
    core = cyclic_reduce(w).core
    nonsolution = evaluate(core, g) != identity(g.backend)
    attempt = None
    if core.m > 0:
        attempt = check_pattern(periodic_pattern(core, g), params)
    return SingleCertificate(word=w, core=core, candidate=g, nonsolution=nonsolution, attempt=attempt)


def certify_simultaneous(
    g: GroupElement,
    n: int,
    params: HypParams = HypParams(),
    budget: Optional[int] = DEFAULT_BUDGETS["ball"],
    ball: Optional[Sequence[GroupElement]] = None,
    strict: bool = False,
    lambda_hat: Optional[float] = None,
    walk_length: Optional[int] = None,
    calibration: Optional[Calibration] = None
) -> Certificate:
    """
    Certify w(g) != e for every w in W_n at once.

    Bullet maxima over g_i in ball(n) and h in {g, g^-1}:
        b1 = max D(g_i, h)
        b2 = |g|
        b3 = max D(h^-1, g_i h)
        b4 = max D(h, g_i h) over g_i != e
    Any even segment of a pattern with constants from ball(n) has two
    constant-side neighbours bounded by b1 and two x-side neighbours bounded
    by max(b1, b3, b4). The certificate passes iff
        2 b1 + 2 max(b1, b3, b4) + C_delta < |g|.

    Strict mode also demands b1, b3, b4 <= lambda_hat * m / 10 and |g| > lambda_hat * m.

    Raises:
        BudgetExceeded: If ball(n) exceeds the budget
        ConfigurationError: If strict mode lacks lambda_hat or walk_length
    """
    ball = list(ball) if ball is not None else enumerate_ball(n, g.backend, budget)
    orientations = (g, invert(g))
    b1 = max(overlap_diameter(gi, h, params) for gi in ball for h in orientations)
    b2 = float(word_length(g))
    b3 = max(overlap_diameter(invert(h), multiply(gi, h), params) for gi in ball for h in orientations)
    b4 = max(
        (overlap_diameter(h, multiply(gi, h), params) for gi in ball if not gi.is_identity for h in orientations),
        default=0.0,
    )
    requirement = 2 * b1 + 2 * max(b1, b3, b4) + params.c_delta
    passed = requirement < b2
    strict_threshold = None

    if strict:
        if lambda_hat is None or walk_length is None:
            raise ConfigurationError("Strict certification needs lambda_hat and walk_length")
        strict_threshold = lambda_hat * walk_length / 10
        passed = passed and max(b1, b3, b4) <= strict_threshold and b2 > lambda_hat * walk_length

    return Certificate(
        candidate=g,
        radius=n,
        threshold=requirement,
        bullet_maxima=(b1, b2, b3, b4),
        c_delta=params.c_delta,
        passed=passed,
        margin=b2 - requirement,
        strict=strict,
        strict_threshold=strict_threshold,
        calibration=calibration.provenance() if calibration else None,
    )


# ============================================================
#                   RANDOMIZED SEARCHES
# ============================================================

def _search_constant(
    c_override: Optional[float],
    calibration: Optional[Calibration],
    rank: int,
    simultaneous: bool
) -> float:
    if c_override is not None:
        return c_override
    if calibration is None:
        raise ConfigurationError("Randomized search needs a calibration or an explicit C")
    if simultaneous:
        return calibration.simultaneous_constant(rank)
    return calibration.single_word_constant()


def find_nonsolution_random(
    w: MixedWord,
    master_seed: int,
    calibration: Optional[Calibration] = None,
    c_override: Optional[float] = None,
    measure: Optional[Measure] = None,
    attempt_limit: int = DEFAULT_ATTEMPT_LIMIT
) -> SearchResult:
    """
    Sample x_m with m = ceil(C log2 max(|w|, 2)) until w(x_m) != e.

    Attempt i uses derive_rng(master_seed, "single", i).

    Raises:
        TrivialWord: If w is trivial
        AttemptLimitExceeded: After `attempt_limit` failures
    """
    if w.is_identity:
        raise TrivialWord("The trivial word has no non-solution")
    measure = measure or uniform_measure(w.backend)
    warn_if_inadmissible(measure, "find_nonsolution_random")
    constant = _search_constant(c_override, calibration, w.backend.rank, simultaneous=False)
    walk_length = math.ceil(constant * math.log2(max(mixed_length(w), 2)))
    e = identity(w.backend)
    for attempt in range(1, attempt_limit + 1):
        g = walk_endpoint(measure, walk_length, derive_rng(master_seed, "single", attempt))
        if evaluate(w, g) != e:
            logger.info(f"Non-solution for {w} of length {word_length(g)} at attempt {attempt}")
            return SearchResult(g=g, attempts=attempt, walk_length=walk_length, constant=constant)
    logger.error(f"No non-solution for {w} in {attempt_limit} attempts (C={constant:.3f})")
    raise AttemptLimitExceeded(attempt_limit, f"walk length {walk_length}; C may be miscalibrated")


def find_simultaneous_random(
    n: int,
    master_seed: int,
    backend: BackendSpec,
    calibration: Optional[Calibration] = None,
    c_override: Optional[float] = None,
    measure: Optional[Measure] = None,
    params: Optional[HypParams] = None,
    attempt_limit: int = DEFAULT_ATTEMPT_LIMIT,
    budget: Optional[int] = DEFAULT_BUDGETS["ball"],
    strict: bool = False
) -> SimultaneousResult:
    """
    Sample x_m with m = ceil(C n) until certify_simultaneous(x_m, n) passes.

    Raises:
        AttemptLimitExceeded: After `attempt_limit` failures
        BudgetExceeded: If ball(n) exceeds the budget
    """
    measure = measure or uniform_measure(backend)
    warn_if_inadmissible(measure, "find_simultaneous_random")
    if params is None:
        params = calibration.hyp_params() if calibration else HypParams()
    constant = _search_constant(c_override, calibration, backend.rank, simultaneous=True)
    walk_length = math.ceil(constant * n)
    ball = enumerate_ball(n, backend, budget)
    lambda_hat = calibration.lambda_hat if calibration else None

    for attempt in range(1, attempt_limit + 1):
        g = walk_endpoint(measure, walk_length, derive_rng(master_seed, "simultaneous", n, attempt))
        certificate = certify_simultaneous(
            g, n, params, ball=ball, strict=strict, lambda_hat=lambda_hat,
            walk_length=walk_length, calibration=calibration,
        )
        if certificate.passed:
            logger.info(f"Certified g of length {word_length(g)} for W_{n} at attempt {attempt}")
            return SimultaneousResult(g=g, certificate=certificate, attempts=attempt,
                                      walk_length=walk_length, constant=constant)
    logger.error(f"No certified candidate for W_{n} in {attempt_limit} attempts")
    raise AttemptLimitExceeded(attempt_limit, f"walk length {walk_length}; C may be miscalibrated")


def _random_reduced_word(length: int, backend: BackendSpec, rng: np.random.Generator) -> GroupElement:
    letters: List[str] = []
    alphabet = backend.alphabet
    while len(letters) < length:
        symbol = alphabet[int(rng.integers(len(alphabet)))]
        if letters and letters[-1] == symbol.swapcase():
            continue
        letters.append(symbol)
    return GroupElement("".join(letters), backend)


def verify_union_bound(
    n: int,
    trials: int,
    master_seed: int,
    calibration: Calibration,
    backend: BackendSpec,
    measure: Optional[Measure] = None,
    word: Optional[MixedWord] = None
) -> UnionBoundReport:
    """
    Frequency of {some g_i has D(g_i, x_m) >= lambda_hat m / 10} against 2 C_1 / n.

    The constants are those of `word` with their inverses, or n random reduced
    words of length n with their inverses.
    """
    measure = measure or uniform_measure(backend)
    warn_if_inadmissible(measure, "verify_union_bound")
    walk_length = math.ceil(calibration.single_word_constant() * math.log2(max(n, 2)))
    threshold = calibration.lambda_hat * walk_length / 10

    if word is not None:
        constants = sorted(
            {c for c in word.constants if not c.is_identity} | {invert(c) for c in word.constants if not c.is_identity},
            key=lambda c: (word_length(c), c.letters),
        )
    else:
        rng = derive_rng(master_seed, "union-constants", n)
        drawn = [_random_reduced_word(n, backend, rng) for _ in range(n)]
        constants = drawn + [invert(c) for c in drawn]

    bad = 0
    for i in range(trials):
        x_m = walk_endpoint(measure, walk_length, derive_rng(master_seed, "union", i))
        if any(overlap_diameter(c, x_m) >= threshold for c in constants):
            bad += 1
    frequency = bad / trials if trials else 0.0
    bound = 2 * calibration.c1_hat / n
    logger.info(f"Union bound n={n}: frequency {frequency:.4f} vs bound {bound:.4f}")
    return UnionBoundReport(n=n, walk_length=walk_length, threshold=threshold, frequency=frequency,
                            bound=bound, trials=trials, constants=[str(c) for c in constants])


# ============================================================
#                   SELFLESS MAPS
# ============================================================

def build_selfless_map(
    n: int,
    master_seed: int,
    backend: BackendSpec,
    calibration: Optional[Calibration] = None,
    c_override: Optional[float] = None,
    measure: Optional[Measure] = None,
    attempt_limit: int = DEFAULT_ATTEMPT_LIMIT,
    budget: Optional[int] = DEFAULT_BUDGETS["mixed_ball"]
) -> SelflessMap:
    """
    phi_n: G*<x> -> G fixing G with x -> g_{2n}, and f(n) = n |g_{2n}|.

    Injectivity and containment are checked on the whole ball B_{S u {x}}(n).

    Raises:
        InjectivityFailure: If two ball elements share an image
        SelflessnessFailure: If an image is longer than f(n)
        BudgetExceeded: If a ball exceeds the budget
    """
    search = find_simultaneous_random(
        2 * n, master_seed, backend, calibration=calibration, c_override=c_override,
        measure=measure, attempt_limit=attempt_limit, budget=budget,
    )
    g = search.g
    f_value = n * word_length(g)

    words = [mixed_identity(backend)] + enumerate_mixed_ball(n, backend, budget)
    images: Dict[GroupElement, MixedWord] = {}
    for w in words:
        image = evaluate(w, g)
        if image in images:
            logger.error(f"{images[image]} and {w} both map to {image}")
            raise InjectivityFailure(
                f"{images[image]} and {w} both map to {image} under x -> {g}; the certificate was unsound"
            )
        images[image] = w
        if word_length(image) > f_value:
            raise SelflessnessFailure(f"Image of {w} has length {word_length(image)} > f(n) = {f_value}")

    logger.info(f"Selfless map n={n}: |g_2n| = {word_length(g)}, f = {f_value}, {len(words)} images checked")
    return SelflessMap(
        n=n,
        image_of_x=g,
        f_value=f_value,
        injectivity_checked_radius=n,
        certificate=search.certificate,
        attempts=search.attempts,
        f_at_least_n=f_value >= n,
    )


# ============================================================
#                   OPTIMALITY AND SCALING
# ============================================================

def commutator_lower_bound(
    n: int,
    backend: BackendSpec,
    budget: Optional[int] = DEFAULT_BUDGETS["sweep"]
) -> LowerBoundResult:
    """
    Shortest simultaneous non-solution of the family {x h x^-1 h^-1 : 1 <= |h| <= n}.

    g is a non-solution of every member iff it commutes with no h in the family.
    """
    family = [h for h in enumerate_ball(n, backend, budget) if not h.is_identity]
    visited = 0
    for g in iter_shortlex(backend):
        if not g.is_identity and not any(commutes(g, h) for h in family):
            return LowerBoundResult(n=n, length=word_length(g), witness=g, family_size=len(family))
        visited += 1
        if budget is not None and visited >= budget:
            raise BudgetExceeded("sweep", visited, budget, f"commutator family n={n}")
    raise AssertionError("unreachable: iter_shortlex is infinite")


def commutator_word(h: GroupElement) -> MixedWord:
    """x h x^-1 h^-1."""
    return parse_mixed(f"x{h.letters}X{invert(h).letters}", h.backend)


def scaling_experiment(
    j_values: Sequence[int],
    master_seed: int,
    backend: BackendSpec,
    calibration: Optional[Calibration] = None,
    c_override: Optional[float] = None,
    measure: Optional[Measure] = None,
    attempt_limit: int = DEFAULT_ATTEMPT_LIMIT
) -> pd.DataFrame:
    """Random non-solutions of [x, h] with |h| = 2^j; one row per j."""
    rows = []
    for j in j_values:
        h = parse_element(("ab" * 2 ** j)[: 2 ** j], backend)
        w = commutator_word(h)
        result = find_nonsolution_random(
            w, master_seed, calibration=calibration, c_override=c_override,
            measure=measure, attempt_limit=attempt_limit,
        )
        rows.append({
            "j": j,
            "word_length": mixed_length(w),
            "nonsolution_length": word_length(result.g),
            "attempts": result.attempts,
            "walk_length": result.walk_length,
        })
    return pd.DataFrame(rows, columns=["j", "word_length", "nonsolution_length", "attempts", "walk_length"])
