"""
Group backends with exact word arithmetic.

The default backend is the free group F_k on its standard generating set:
elements are freely reduced words, the Cayley graph is a tree (delta = 0)
and every geometric quantity is computed exactly.
"""
from __future__ import annotations

import string
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, List, Optional, Tuple

from core.error_handler import (
    BackendMismatch,
    ConfigurationError,
    UnknownSymbol,
    check_budget,
    get_logger,
)

logger = get_logger(__name__)

FREE_GROUP = "free-group"

# `e` is the identity literal and `x` the variable of G*<x>
GENERATOR_LETTERS = "".join(
    ch for ch in string.ascii_lowercase if ch not in ("e", "x")
)
MAX_RANK = len(GENERATOR_LETTERS)


# ============================================================
#                   BACKEND SPEC
# ============================================================

@dataclass(frozen=True)
class BackendSpec:
    """A group G together with its generating set S."""

    kind: str
    rank: int
    alphabet: Tuple[str, ...]

    def __post_init__(self):
        if self.kind != FREE_GROUP:
            raise ConfigurationError(f"Unsupported backend kind: {self.kind!r}")
        if self.rank < 2:
            raise ConfigurationError(
                f"Rank must be at least 2 (F_1 is elementary), got {self.rank}"
            )
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ConfigurationError("Alphabet symbols must be distinct")
        if len(self.alphabet) != 2 * self.rank:
            raise ConfigurationError(
                f"Alphabet of rank {self.rank} needs {2 * self.rank} symbols"
            )
        for symbol in self.alphabet:
            if symbol.swapcase() not in self.alphabet:
                raise ConfigurationError(f"Symbol {symbol!r} has no inverse")

    @classmethod
    def free_group(cls, rank: int = 2) -> "BackendSpec":
        """F_rank with alphabet a < A < b < B < ... (skipping e and x)."""
        if not 2 <= rank <= MAX_RANK:
            raise ConfigurationError(f"Rank must lie in [2, {MAX_RANK}], got {rank}")
        alphabet = []
        for letter in GENERATOR_LETTERS[:rank]:
            alphabet.extend((letter, letter.upper()))
        return cls(FREE_GROUP, rank, tuple(alphabet))

    @property
    def generators(self) -> Tuple[str, ...]:
        return self.alphabet[::2]

    def describe(self) -> str:
        return f"F_{self.rank}"


# ============================================================
#                   GROUP ELEMENT
# ============================================================

@dataclass(frozen=True)
class GroupElement:
    """A freely reduced word over a backend alphabet."""

    letters: str
    backend: BackendSpec

    def __str__(self) -> str:
        return self.letters or "e"

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return multiply(self, other)

    def __invert__(self) -> "GroupElement":
        return invert(self)

    def __pow__(self, k: int) -> "GroupElement":
        return power(self, k)

    @property
    def is_identity(self) -> bool:
        return not self.letters


# ============================================================
#                   BACKEND INTERFACE
# ============================================================

class GroupBackend(ABC):
    """Word arithmetic a concrete group must provide."""

    def __init__(self, spec: BackendSpec):
        self.spec = spec

    @abstractmethod
    def reduce(self, letters: str) -> str:
        """Canonical form of a product of generator symbols."""

    @abstractmethod
    def multiply(self, a: str, b: str) -> str:
        """Canonical form of a*b for canonical a, b."""

    @abstractmethod
    def invert(self, a: str) -> str:
        """Canonical form of the inverse."""

    @abstractmethod
    def length(self, element: GroupElement) -> int:
        """Word length with respect to the generating set."""

    @abstractmethod
    def geodesic_prefixes(self, element: GroupElement) -> List[GroupElement]:
        """Vertices of the chosen geodesic from e to element."""

    @abstractmethod
    def sphere_size(self, r: int) -> int:
        """Number of elements of word length exactly r."""

    @abstractmethod
    def iter_sphere(self, r: int) -> Iterator[str]:
        """Canonical words of length r in shortlex order."""


class FreeGroupBackend(GroupBackend):
    """F_k on its free basis: reduced words, Cayley graph a 2k-regular tree."""

    def __init__(self, spec: BackendSpec):
        super().__init__(spec)
        self._inverse = {symbol: symbol.swapcase() for symbol in spec.alphabet}

    def reduce(self, letters: str) -> str:
        stack: List[str] = []
        for symbol in letters:
            if stack and stack[-1] == self._inverse[symbol]:
                stack.pop()
            else:
                stack.append(symbol)
        return "".join(stack)

    def multiply(self, a: str, b: str) -> str:
        k = 0
        limit = min(len(a), len(b))
        while k < limit and a[-1 - k] == self._inverse[b[k]]:
            k += 1
        return a[: len(a) - k] + b[k:]

    def invert(self, a: str) -> str:
        return a[::-1].swapcase()

    def length(self, element: GroupElement) -> int:
        return len(element.letters)

    def geodesic_prefixes(self, element: GroupElement) -> List[GroupElement]:
        letters = element.letters
        return [GroupElement(letters[:i], self.spec) for i in range(len(letters) + 1)]

    def sphere_size(self, r: int) -> int:
        if r == 0:
            return 1
        two_k = 2 * self.spec.rank
        return two_k * (two_k - 1) ** (r - 1)

    def iter_sphere(self, r: int) -> Iterator[str]:
        # Appending symbols in alphabet order to a shortlex-sorted sphere keeps it sorted
        words = [""]
        for _ in range(r):
            words = [
                w + symbol
                for w in words
                for symbol in self.spec.alphabet
                if not w or w[-1] != self._inverse[symbol]
            ]
        return iter(words)


@lru_cache(maxsize=None)
def get_backend(spec: BackendSpec) -> GroupBackend:
    """Return the arithmetic implementation for a backend spec."""
    if spec.kind == FREE_GROUP:
        return FreeGroupBackend(spec)
    raise ConfigurationError(f"No implementation for backend kind {spec.kind!r}")


# ============================================================
#                   OPERATIONS
# ============================================================

def _same_backend(a: GroupElement, b: GroupElement) -> BackendSpec:
    if a.backend != b.backend:
        raise BackendMismatch(
            f"Elements live on different backends: {a.backend.describe()} "
            f"vs {b.backend.describe()}"
        )
    return a.backend


def identity(backend: BackendSpec) -> GroupElement:
    return GroupElement("", backend)


def parse_element(text: str, backend: BackendSpec) -> GroupElement:
    """
    Parse concatenated generator symbols into a reduced element.

    Args:
        text: Symbols of the backend alphabet; empty text is the identity
        backend: Backend the element lives on

    Returns:
        The freely reduced product of the symbols in order

    Raises:
        UnknownSymbol: If a character is outside the alphabet
    """
    alphabet = set(backend.alphabet)
    for position, symbol in enumerate(text):
        if symbol not in alphabet:
            raise UnknownSymbol(symbol, position, text)
    return GroupElement(get_backend(backend).reduce(text), backend)


def multiply(a: GroupElement, b: GroupElement) -> GroupElement:
    backend = _same_backend(a, b)
    return GroupElement(get_backend(backend).multiply(a.letters, b.letters), backend)


def invert(a: GroupElement) -> GroupElement:
    return GroupElement(get_backend(a.backend).invert(a.letters), a.backend)


def power(a: GroupElement, k: int) -> GroupElement:
    """a^k for any integer k."""
    base = a if k >= 0 else invert(a)
    backend = get_backend(a.backend)
    return GroupElement(backend.reduce(base.letters * abs(k)), a.backend)


def word_length(a: GroupElement) -> int:
    return get_backend(a.backend).length(a)


def distance(a: GroupElement, b: GroupElement) -> int:
    """Left-invariant word metric d(a, b) = |a^-1 b|."""
    return word_length(multiply(invert(a), b))


def commutes(a: GroupElement, b: GroupElement) -> bool:
    return multiply(a, b) == multiply(b, a)


def sphere_size(r: int, backend: BackendSpec) -> int:
    return get_backend(backend).sphere_size(r)


def ball_size(r: int, backend: BackendSpec) -> int:
    """1 + sum_{j=1..r} 2k(2k-1)^(j-1) for F_k."""
    return sum(sphere_size(j, backend) for j in range(r + 1))


def enumerate_sphere(r: int, backend: BackendSpec) -> List[GroupElement]:
    return [GroupElement(w, backend) for w in get_backend(backend).iter_sphere(r)]


def enumerate_ball(
    r: int,
    backend: BackendSpec,
    budget: Optional[int] = None
) -> List[GroupElement]:
    """
    All elements of word length <= r in shortlex order.

    Args:
        r: Radius
        backend: Backend to enumerate
        budget: Element-count limit

    Returns:
        Elements sorted by length, then by the alphabet's symbol order

    Raises:
        BudgetExceeded: With the computed ball size
    """
    if r < 0:
        raise ValueError(f"Radius must be nonnegative, got {r}")
    check_budget("ball", ball_size(r, backend), budget, f"radius {r}")
    ball: List[GroupElement] = []
    for j in range(r + 1):
        ball.extend(enumerate_sphere(j, backend))
    return ball


def iter_shortlex(
    backend: BackendSpec,
    max_radius: Optional[int] = None
) -> Iterator[GroupElement]:
    """Lazy shortlex stream of the whole group (or of a ball)."""
    implementation = get_backend(backend)
    r = 0
    while max_radius is None or r <= max_radius:
        for w in implementation.iter_sphere(r):
            yield GroupElement(w, backend)
        r += 1
