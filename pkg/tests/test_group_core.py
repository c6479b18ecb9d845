import itertools

import pytest

from core.error_handler import BackendMismatch, BudgetExceeded, ConfigurationError, UnknownSymbol
from core.group_core import (
    BackendSpec,
    ball_size,
    commutes,
    distance,
    enumerate_ball,
    enumerate_sphere,
    get_backend,
    invert,
    iter_shortlex,
    multiply,
    parse_element,
    power,
    sphere_size,
    word_length,
)
from tests.conftest import naive_free_reduce


class TestBackendSpec:
    """Alphabet construction and validation."""

    def test_rank_two_alphabet(self, f2):
        assert f2.alphabet == ("a", "A", "b", "B")
        assert f2.generators == ("a", "b")
        assert f2.describe() == "F_2"

    def test_alphabet_skips_identity_and_variable_letters(self):
        spec = BackendSpec.free_group(5)
        assert spec.generators == ("a", "b", "c", "d", "f")
        assert "x" not in BackendSpec.free_group(24).alphabet

    @pytest.mark.parametrize("rank", [0, 1, 25])
    def test_bad_rank_rejected(self, rank):
        with pytest.raises(ConfigurationError):
            BackendSpec.free_group(rank)

    def test_alphabet_without_inverses_rejected(self):
        with pytest.raises(ConfigurationError):
            BackendSpec("free-group", 2, ("a", "b", "c", "d"))


class TestArithmetic:
    """Reduced words, products, inverses and powers."""

    def test_parse_reduces(self, el):
        assert el("aAb").letters == "b"
        assert el("").is_identity

    def test_parse_unknown_symbol(self, f2):
        with pytest.raises(UnknownSymbol) as info:
            parse_element("abx", f2)
        assert info.value.position == 2

    def test_multiply_cancels(self, el):
        assert multiply(el("ab"), el("Ba")).letters == "aa"
        assert (el("ab") * el("BA")).is_identity

    def test_invert_and_power(self, el):
        assert invert(el("abA")).letters == "aBA"
        assert power(el("ab"), -2).letters == "BABA"
        assert power(el("ab"), 0).is_identity
        assert (el("ab") ** 3).letters == "ababab"

    def test_identity_prints_as_e(self, e):
        assert str(e) == "e"

    def test_distance_and_length(self, el):
        assert word_length(el("abab")) == 4
        assert distance(el("a"), el("b")) == 2

    def test_commutes(self, el):
        assert commutes(el("ab"), el("abab"))
        assert not commutes(el("a"), el("b"))

    def test_backend_mismatch(self, f2, f3):
        with pytest.raises(BackendMismatch):
            multiply(parse_element("a", f2), parse_element("a", f3))


class TestEnumeration:
    """Spheres, balls and shortlex order."""

    def test_sphere_sizes(self, f2):
        assert [sphere_size(r, f2) for r in range(4)] == [1, 4, 12, 36]
        assert ball_size(2, f2) == 17

    def test_ball_order(self, f2):
        ball = [str(g) for g in enumerate_ball(2, f2)]
        assert ball[:5] == ["e", "a", "A", "b", "B"]
        assert ball[5:8] == ["aa", "ab", "aB"]
        assert len(ball) == len(set(ball)) == 17

    def test_sphere_matches_closed_formula(self, f3):
        for r in range(4):
            sphere = enumerate_sphere(r, f3)
            assert len(sphere) == sphere_size(r, f3)
            assert all(word_length(g) == r for g in sphere)

    def test_ball_budget(self, f2):
        with pytest.raises(BudgetExceeded) as info:
            enumerate_ball(3, f2, budget=10)
        assert info.value.size == 53

    def test_shortlex_stream_matches_ball(self, f2):
        stream = list(itertools.islice(iter_shortlex(f2), 17))
        assert stream == enumerate_ball(2, f2)


class TestReductionOracle:
    """Stack reduction against repeated pair cancellation."""

    def test_exhaustive_short_words(self, f2):
        backend = get_backend(f2)
        for length in range(7):
            for letters in itertools.product(f2.alphabet, repeat=length):
                text = "".join(letters)
                assert backend.reduce(text) == naive_free_reduce(text)

    def test_random_long_words(self, f2, rng):
        backend = get_backend(f2)
        for _ in range(10_000):
            length = int(rng.integers(0, 65))
            text = "".join(f2.alphabet[i] for i in rng.integers(0, 4, length))
            assert backend.reduce(text) == naive_free_reduce(text)

    def test_multiply_agrees_with_reduce(self, f2, rng):
        backend = get_backend(f2)
        for _ in range(10_000):
            first = "".join(f2.alphabet[i] for i in rng.integers(0, 4, int(rng.integers(0, 65))))
            second = "".join(f2.alphabet[i] for i in rng.integers(0, 4, int(rng.integers(0, 65))))
            a, b = backend.reduce(first), backend.reduce(second)
            assert backend.multiply(a, b) == backend.reduce(a + b)
            assert multiply(parse_element(first, f2), parse_element(second, f2)) == parse_element(first + second, f2)


def _random_element(f2, rng, max_length=16):
    return parse_element("".join(f2.alphabet[i] for i in rng.integers(0, 4, int(rng.integers(0, max_length + 1)))), f2)


class TestGroupLaws:
    """Metric and group axioms on random elements."""

    def test_triangle_inequality(self, f2, rng):
        for _ in range(2000):
            a, b, c = (_random_element(f2, rng) for _ in range(3))
            assert word_length(multiply(a, b)) <= word_length(a) + word_length(b)
            assert distance(a, c) <= distance(a, b) + distance(b, c)
            assert distance(a, b) == distance(b, a)

    def test_invert_is_an_involution(self, f2, rng):
        for _ in range(2000):
            a = _random_element(f2, rng)
            assert invert(invert(a)) == a
            assert word_length(invert(a)) == word_length(a)
            assert multiply(a, invert(a)).is_identity

    def test_invert_reverses_products(self, f2, rng):
        for _ in range(2000):
            a, b = _random_element(f2, rng), _random_element(f2, rng)
            assert invert(multiply(a, b)) == multiply(invert(b), invert(a))

    def test_multiply_is_associative(self, f2, rng):
        for _ in range(2000):
            a, b, c = (_random_element(f2, rng) for _ in range(3))
            assert multiply(multiply(a, b), c) == multiply(a, multiply(b, c))

    @pytest.mark.parametrize("r", [0, 1, 2, 3])
    def test_balls_are_nested(self, f2, r):
        inner = enumerate_ball(r, f2)
        outer = enumerate_ball(r + 1, f2)
        assert outer[:len(inner)] == inner
        assert set(inner) < set(outer)
        assert all(word_length(g) == r + 1 for g in outer[len(inner):])
