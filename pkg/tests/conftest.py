import pytest

from outercore.words import Automorphism


@pytest.fixture
def phi_rank2():
    # a -> ab, b -> bab; inverse a -> aaB, b -> bA
    return Automorphism.from_strings(["ab", "bab"], ["aaB", "bA"])


@pytest.fixture
def phi_rank3():
    # a -> baC, b -> cA, c -> a; inverse a -> c, b -> ab, c -> bc
    return Automorphism.from_strings(["baC", "cA", "a"], ["c", "ab", "bc"])


@pytest.fixture
def phi_intro():
    # a -> b, b -> c, c -> ab; expansion factor ~ 1.3247 (nongeometric direction)
    return Automorphism.from_strings(["b", "c", "ab"], ["cA", "a", "b"])


@pytest.fixture
def phi_geo():
    # a -> ac, b -> a, c -> b; carries an indivisible Nielsen path orbit
    return Automorphism.from_strings(["ac", "a", "b"], ["b", "c", "Ba"])


@pytest.fixture
def phi_fib():
    # a -> ab, b -> a on the 2-rose (golden expansion)
    return Automorphism.from_strings(["ab", "a"], ["b", "Ba"])
