"""
The algebra of G*<x>: normal forms, cyclic reduction, evaluation and
bounded enumeration of mixed words.

A mixed word is stored as alternating syllables

    c_0 x^{e_1} c_1 x^{e_2} ... x^{e_m} c_m

with every interior constant nontrivial and every exponent nonzero.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from math import prod
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import W_N_EXPONENT_CAP, W_N_SYLLABLE_CAP
from core.error_handler import (
    BackendMismatch,
    TrivialWord,
    UnknownSymbol,
    check_budget,
    get_logger,
)
from core.group_core import (
    BackendSpec,
    GroupElement,
    enumerate_ball,
    enumerate_sphere,
    get_backend,
    identity,
    invert,
    multiply,
    parse_element,
    sphere_size,
    word_length,
)

logger = get_logger(__name__)

VARIABLE = "x"
VARIABLE_INVERSE = "X"
IDENTITY_LITERAL = "e"

WORD_GRAMMAR = (
    "word := term+ ; term := symbol ('^' int)? ; "
    "symbol := alphabet letter | 'x' | 'X' | 'e'  (whitespace ignored)"
)


# ============================================================
#                   MIXED WORD
# ============================================================

@dataclass(frozen=True)
class MixedWord:
    """An element of G*<x> as alternating constants and x-powers."""

    constants: Tuple[GroupElement, ...]
    exponents: Tuple[int, ...]
    backend: BackendSpec

    def __post_init__(self):
        if len(self.constants) != len(self.exponents) + 1:
            raise ValueError(
                f"{len(self.exponents)} x-syllables need {len(self.exponents) + 1} "
                f"constants, got {len(self.constants)}"
            )

    @property
    def m(self) -> int:
        """Number of x-syllables."""
        return len(self.exponents)

    @property
    def is_identity(self) -> bool:
        return self.m == 0 and self.constants[0].is_identity

    def __str__(self) -> str:
        return format_mixed(self)

    def __mul__(self, other: "MixedWord") -> "MixedWord":
        return mixed_multiply(self, other)

    def __invert__(self) -> "MixedWord":
        return mixed_invert(self)

    def __pow__(self, k: int) -> "MixedWord":
        return mixed_power(self, k)


@dataclass(frozen=True)
class ConjugateDecomposition:
    """w = conjugator * core * conjugator^-1 with core cyclically reduced."""

    core: MixedWord
    conjugator: MixedWord


# ============================================================
#                   CONSTRUCTION
# ============================================================

def constant_word(c: GroupElement) -> MixedWord:
    return MixedWord((c,), (), c.backend)


def variable(backend: BackendSpec, exponent: int = 1) -> MixedWord:
    """x^exponent as a mixed word."""
    e = identity(backend)
    if exponent == 0:
        return MixedWord((e,), (), backend)
    return MixedWord((e, e), (exponent,), backend)


def mixed_identity(backend: BackendSpec) -> MixedWord:
    return constant_word(identity(backend))


def reduce(w: MixedWord) -> MixedWord:
    """
    Free-product normal form: merge x-powers across trivial constants,
    drop zero exponents. Idempotent.
    """
    e = identity(w.backend)
    constants: List[GroupElement] = [w.constants[0]]
    exponents: List[int] = []
    for exponent, constant in zip(w.exponents, w.constants[1:]):
        if exponent != 0:
            if exponents and constants[-1].is_identity:
                constants.pop()
                merged = exponents.pop() + exponent
                if merged != 0:
                    exponents.append(merged)
                    constants.append(e)
            else:
                exponents.append(exponent)
                constants.append(e)
        constants[-1] = multiply(constants[-1], constant)
    return MixedWord(tuple(constants), tuple(exponents), w.backend)


def _assemble(tokens: Sequence[Tuple[str, object]], backend: BackendSpec) -> MixedWord:
    """Build a raw syllable sequence from ('c', letters) / ('x', exponent) tokens."""
    implementation = get_backend(backend)
    pending: List[str] = []
    constants: List[GroupElement] = []
    exponents: List[int] = []
    for kind, value in tokens:
        if kind == "c":
            pending.append(value)
        else:
            constants.append(GroupElement(implementation.reduce("".join(pending)), backend))
            exponents.append(value)
            pending = []
    constants.append(GroupElement(implementation.reduce("".join(pending)), backend))
    return reduce(MixedWord(tuple(constants), tuple(exponents), backend))


def parse_mixed(text: str, backend: BackendSpec) -> MixedWord:
    """
    Parse a word over the backend alphabet plus x / X.

    Args:
        text: e.g. "xaXA"
        backend: Backend the constants live on

    Returns:
        The normal form of the denoted element of G*<x>

    Raises:
        UnknownSymbol: If a character is neither an alphabet symbol nor x / X
    """
    alphabet = set(backend.alphabet)
    tokens: List[Tuple[str, object]] = []
    for position, symbol in enumerate(text):
        if symbol == VARIABLE:
            tokens.append(("x", 1))
        elif symbol == VARIABLE_INVERSE:
            tokens.append(("x", -1))
        elif symbol in alphabet:
            tokens.append(("c", symbol))
        else:
            raise UnknownSymbol(symbol, position, text)
    return _assemble(tokens, backend)


_TERM = re.compile(r"([A-Za-z])(?:\^(-?\d+))?")


def parse_mixed_expression(text: str, backend: BackendSpec) -> MixedWord:
    """
    Parse the CLI grammar: terms `symbol('^' int)?`, whitespace ignored,
    literal `e` for the identity.

    Raises:
        UnknownSymbol: On any character the grammar does not accept
    """
    compact = "".join(text.split())
    alphabet = set(backend.alphabet)
    tokens: List[Tuple[str, object]] = []
    position = 0
    while position < len(compact):
        match = _TERM.match(compact, position)
        if match is None:
            raise UnknownSymbol(compact[position], position, compact)
        symbol, raw_power = match.group(1), match.group(2)
        k = int(raw_power) if raw_power is not None else 1
        if symbol in (VARIABLE, VARIABLE_INVERSE):
            sign = 1 if symbol == VARIABLE else -1
            if k != 0:
                tokens.append(("x", sign * k))
        elif symbol == IDENTITY_LITERAL:
            pass
        elif symbol in alphabet:
            letters = symbol if k >= 0 else symbol.swapcase()
            tokens.append(("c", letters * abs(k)))
        else:
            raise UnknownSymbol(symbol, position, compact)
        position = match.end()
    return _assemble(tokens, backend)


def format_mixed(w: MixedWord) -> str:
    """Render in the CLI grammar; parse_mixed_expression inverts this."""
    if w.is_identity:
        return IDENTITY_LITERAL
    pieces = [w.constants[0].letters]
    for exponent, constant in zip(w.exponents, w.constants[1:]):
        symbol = VARIABLE if exponent > 0 else VARIABLE_INVERSE
        pieces.append(symbol if abs(exponent) == 1 else f"{symbol}^{abs(exponent)}")
        pieces.append(constant.letters)
    return "".join(pieces)


# ============================================================
#                   GROUP LAW OF G*<x>
# ============================================================

def _check_same(w1: MixedWord, w2: MixedWord) -> None:
    if w1.backend != w2.backend:
        raise BackendMismatch("Mixed words live on different backends")


def mixed_multiply(w1: MixedWord, w2: MixedWord) -> MixedWord:
    _check_same(w1, w2)
    joint = multiply(w1.constants[-1], w2.constants[0])
    constants = w1.constants[:-1] + (joint,) + w2.constants[1:]
    return reduce(MixedWord(constants, w1.exponents + w2.exponents, w1.backend))


def mixed_invert(w: MixedWord) -> MixedWord:
    constants = tuple(invert(c) for c in reversed(w.constants))
    exponents = tuple(-e for e in reversed(w.exponents))
    return MixedWord(constants, exponents, w.backend)


def mixed_power(w: MixedWord, k: int) -> MixedWord:
    base = w if k >= 0 else mixed_invert(w)
    result = mixed_identity(w.backend)
    for _ in range(abs(k)):
        result = mixed_multiply(result, base)
    return result


# ============================================================
#                   CYCLIC REDUCTION
# ============================================================

def cyclic_reduce(w: MixedWord) -> ConjugateDecomposition:
    """
    Split w into conjugator * core * conjugator^-1 with a cyclically reduced core.

    The first constant is rotated to the end, and a trailing x-power that meets
    the leading x-power across a trivial constant is rotated to the front,
    until neither move applies.

    Raises:
        TrivialWord: If w is the identity of G*<x>
    """
    w = reduce(w)
    if w.is_identity:
        raise TrivialWord("Cyclic reduction needs a nontrivial word")

    backend = w.backend
    conjugator = mixed_identity(backend)
    core = w
    while core.m > 0:
        head = core.constants[0]
        if not head.is_identity:
            shift = constant_word(head)
            core = mixed_multiply(mixed_multiply(mixed_invert(shift), core), shift)
            conjugator = mixed_multiply(conjugator, shift)
            continue
        if core.m >= 2 and core.constants[-1].is_identity:
            shift = variable(backend, core.exponents[-1])
            core = mixed_multiply(mixed_multiply(shift, core), mixed_invert(shift))
            conjugator = mixed_multiply(conjugator, mixed_invert(shift))
            continue
        break
    return ConjugateDecomposition(core=core, conjugator=conjugator)


# ============================================================
#                   EVALUATION AND MEASUREMENT
# ============================================================

def evaluate(w: MixedWord, g: GroupElement) -> GroupElement:
    """
    Image of w under G*<x> -> G fixing G and sending x to g.

    Raises:
        BackendMismatch: If g lives on another backend
    """
    if w.backend != g.backend:
        raise BackendMismatch("Word and substituted element live on different backends")
    implementation = get_backend(g.backend)
    g_inverse = implementation.invert(g.letters)
    parts = [w.constants[0].letters]
    for exponent, constant in zip(w.exponents, w.constants[1:]):
        parts.append((g.letters if exponent > 0 else g_inverse) * abs(exponent))
        parts.append(constant.letters)
    return GroupElement(implementation.reduce("".join(parts)), g.backend)


def mixed_length(w: MixedWord) -> int:
    """Length in the S u {x} metric: sum |c_i| + sum |e_i|."""
    return sum(word_length(c) for c in w.constants) + sum(abs(e) for e in w.exponents)


def constants_closure(w: MixedWord) -> FrozenSet[GroupElement]:
    """All constants of w, their inverses, and the identity."""
    closure = {identity(w.backend)}
    for c in w.constants:
        closure.add(c)
        closure.add(invert(c))
    return frozenset(closure)


def syllable_count(w: MixedWord) -> int:
    """x-syllables plus nontrivial constants."""
    return w.m + sum(1 for c in w.constants if not c.is_identity)


def in_w_n(w: MixedWord, n: int) -> bool:
    """Membership in W_n: nontrivial, every constant of length <= n."""
    return not w.is_identity and all(word_length(c) <= n for c in w.constants)


# ============================================================
#                   ENUMERATION
# ============================================================

def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """Positive compositions of total into `parts` parts, lexicographic."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _constant_lengths(total: int, m: int) -> Iterator[Tuple[int, ...]]:
    """Lengths (l_0..l_m) summing to total; interior entries at least 1."""
    if m == 0:
        yield (total,)
        return
    lower = [0] + [1] * (m - 1) + [0]

    def extend(index: int, remaining: int) -> Iterator[Tuple[int, ...]]:
        if index == m:
            if remaining >= lower[m]:
                yield (remaining,)
            return
        floor_rest = sum(lower[index + 1:])
        for length in range(lower[index], remaining - floor_rest + 1):
            for rest in extend(index + 1, remaining - length):
                yield (length,) + rest

    yield from extend(0, total)


def _syllable_patterns(length: int) -> Iterator[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """(exponents, constant lengths) for normal forms of total length `length`."""
    for m in range(length + 1):
        for exponent_total in range(m, length + 1):
            constant_total = length - exponent_total
            if constant_total < max(m - 1, 0):
                continue
            for magnitudes in _compositions(exponent_total, m):
                for signs in itertools.product((1, -1), repeat=m):
                    exponents = tuple(s * a for s, a in zip(signs, magnitudes))
                    for lengths in _constant_lengths(constant_total, m):
                        yield exponents, lengths


def mixed_ball_size(n: int, backend: BackendSpec) -> int:
    """Number of nontrivial normal forms of length <= n."""
    return sum(
        prod(sphere_size(l, backend) for l in lengths)
        for length in range(1, n + 1)
        for _, lengths in _syllable_patterns(length)
    )


def enumerate_mixed_ball(
    n: int,
    backend: BackendSpec,
    budget: Optional[int] = None
) -> List[MixedWord]:
    """
    Every nontrivial element of G*<x> with mixed_length <= n, exactly once.

    Order: total length, then syllable pattern, then shortlex on constants.

    Raises:
        BudgetExceeded: If the count exceeds the budget
    """
    check_budget("mixed_ball", mixed_ball_size(n, backend), budget, f"n={n}")
    spheres: Dict[int, List[GroupElement]] = {}
    words: List[MixedWord] = []
    for length in range(1, n + 1):
        for exponents, lengths in _syllable_patterns(length):
            choices = []
            for l in lengths:
                if l not in spheres:
                    spheres[l] = enumerate_sphere(l, backend)
                choices.append(spheres[l])
            for constants in itertools.product(*choices):
                words.append(MixedWord(tuple(constants), exponents, backend))
    logger.info(f"Enumerated {len(words)} mixed words of length <= {n}")
    return words


def enumerate_w_n(
    n: int,
    backend: BackendSpec,
    max_syllables: int = 4,
    exponents: Sequence[int] = (1, -1, 2, -2),
    budget: Optional[int] = None
) -> List[MixedWord]:
    """
    Exhaustive slice of W_n: constants in ball(n), exponents from `exponents`,
    syllable_count <= max_syllables.
    """
    ball = enumerate_ball(n, backend, budget)
    nontrivial = [c for c in ball if not c.is_identity]
    e = identity(backend)
    end_choices = [[e], nontrivial]

    def plans() -> Iterator[Tuple[int, int, int]]:
        for m in range(1, max_syllables + 1):
            base = 2 * m - 1
            for first_nontrivial in (0, 1):
                for last_nontrivial in (0, 1):
                    if base + first_nontrivial + last_nontrivial <= max_syllables:
                        yield m, first_nontrivial, last_nontrivial

    size = len(nontrivial) if max_syllables >= 1 else 0
    for m, first, last in plans():
        size += (
            len(exponents) ** m
            * len(nontrivial) ** (m - 1)
            * len(end_choices[first])
            * len(end_choices[last])
        )
    check_budget("w_n_slice", size, budget, f"n={n}, syllables<={max_syllables}")

    words = [constant_word(c) for c in nontrivial] if max_syllables >= 1 else []
    for m, first, last in plans():
        for exps in itertools.product(exponents, repeat=m):
            for interior in itertools.product(nontrivial, repeat=m - 1):
                for c0 in end_choices[first]:
                    for cm in end_choices[last]:
                        words.append(MixedWord((c0,) + interior + (cm,), exps, backend))
    return words


def sample_w_n(
    n: int,
    backend: BackendSpec,
    rng: np.random.Generator,
    syllable_cap: int = W_N_SYLLABLE_CAP,
    exponent_cap: int = W_N_EXPONENT_CAP,
    ball: Optional[Sequence[GroupElement]] = None
) -> MixedWord:
    """
    Random member of W_n with at least one x-syllable and syllable_count <= syllable_cap.

    W_0 has no nontrivial constants, so its samples are single x-powers.
    """
    if n < 0 or syllable_cap < 1 or exponent_cap < 1:
        raise ValueError(
            f"Need n >= 0 and positive caps, got n={n}, syllable_cap={syllable_cap}, exponent_cap={exponent_cap}"
        )
    ball = list(ball) if ball is not None else enumerate_ball(n, backend)
    nontrivial = [c for c in ball if not c.is_identity]
    max_m = max(1, (syllable_cap - 1) // 2) if nontrivial else 1
    m = int(rng.integers(1, max_m + 1))
    exps = tuple(
        int(rng.integers(1, exponent_cap + 1)) * (1 if rng.random() < 0.5 else -1)
        for _ in range(m)
    )
    interior = tuple(nontrivial[int(i)] for i in rng.integers(0, len(nontrivial), m - 1)) if m > 1 else ()
    c0 = ball[int(rng.integers(0, len(ball)))]
    cm = ball[int(rng.integers(0, len(ball)))]
    return MixedWord((c0,) + interior + (cm,), exps, backend)
