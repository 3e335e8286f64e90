import random

import pytest

from outercore.words import (
    Automorphism,
    InverseVerificationError,
    RankError,
    concat,
    format_word,
    invert,
    parse_word,
    reduce_word,
    verify_inverse,
)


def w(text, rank=3):
    return parse_word(text, rank)


def naive_apply(aut, word):
    # independent oracle: full letter-by-letter substitution, then one reduction
    raw = []
    for x in word:
        raw.extend(aut.images[x - 1] if x > 0 else invert(aut.images[-x - 1]))
    return reduce_word(raw)


class TestReduce:
    def test_full_cancellation(self):
        assert reduce_word(w("aA", 1) + ()) == ()
        assert reduce_word([1, -1]) == ()

    def test_nested_cancellation(self):
        assert reduce_word([1, 2, -2, -1]) == ()

    def test_hand_reduction(self):
        # ab . BAB -> B
        assert reduce_word([1, 2, -2, -1, -2]) == (-2,)

    def test_idempotent_on_random_raw(self):
        rng = random.Random(7)
        for _ in range(500):
            raw = [rng.choice([1, -1, 2, -2, 3, -3]) for _ in range(rng.randrange(0, 40))]
            once = reduce_word(raw)
            assert reduce_word(once) == once

    def test_rejects_zero(self):
        with pytest.raises(RankError):
            reduce_word([1, 0])

    def test_rank_bound(self):
        with pytest.raises(RankError):
            reduce_word([4], rank=3)


class TestConcat:
    def test_inverse_pair(self):
        assert concat(w("ab"), w("BA")) == ()

    def test_no_cancellation(self):
        assert concat(w("a"), w("b")) == w("ab")

    def test_partial_cancellation(self):
        assert concat(w("baC"), w("cA")) == w("b")

    def test_length_bounds_and_parity(self):
        rng = random.Random(11)
        for _ in range(300):
            u = reduce_word([rng.choice([1, -1, 2, -2]) for _ in range(rng.randrange(0, 20))])
            v = reduce_word([rng.choice([1, -1, 2, -2]) for _ in range(rng.randrange(0, 20))])
            c = concat(u, v)
            assert abs(len(u) - len(v)) <= len(c) <= len(u) + len(v)
            assert (len(c) - len(u) - len(v)) % 2 == 0


class TestInvert:
    def test_basic(self):
        assert invert(w("ab")) == w("BA")
        assert invert(()) == ()
        assert invert(w("baC")) == w("cAB")

    def test_involution_and_identity(self):
        rng = random.Random(3)
        for _ in range(200):
            u = reduce_word([rng.choice([1, -1, 2, -2, 3, -3]) for _ in range(12)])
            assert invert(invert(u)) == u
            assert concat(u, invert(u)) == ()


class TestApply:
    def test_paper_generator_image(self, phi_rank3):
        assert phi_rank3.apply(w("c")) == w("a")

    def test_identity_word(self, phi_rank3):
        assert phi_rank3.apply(()) == ()

    def test_against_naive_oracle(self, phi_rank3):
        assert phi_rank3.apply(w("cA")) == naive_apply(phi_rank3, w("cA"))
        rng = random.Random(5)
        for _ in range(300):
            u = reduce_word([rng.choice([1, -1, 2, -2, 3, -3]) for _ in range(rng.randrange(0, 25))])
            assert phi_rank3.apply(u) == naive_apply(phi_rank3, u)

    def test_homomorphism(self, phi_rank3):
        rng = random.Random(13)
        for _ in range(200):
            u = reduce_word([rng.choice([1, -1, 2, -2, 3, -3]) for _ in range(10)])
            v = reduce_word([rng.choice([1, -1, 2, -2, 3, -3]) for _ in range(10)])
            assert phi_rank3.apply(concat(u, v)) == concat(
                phi_rank3.apply(u), phi_rank3.apply(v)
            )

    def test_respects_inversion(self, phi_rank3):
        rng = random.Random(17)
        for _ in range(200):
            u = reduce_word([rng.choice([1, -1, 2, -2, 3, -3]) for _ in range(15)])
            assert phi_rank3.apply(invert(u)) == invert(phi_rank3.apply(u))

    def test_roundtrip_up_to_length_50(self, phi_rank3):
        rng = random.Random(23)
        for _ in range(200):
            u = reduce_word([rng.choice([1, -1, 2, -2, 3, -3]) for _ in range(50)])
            assert phi_rank3.apply_inverse(phi_rank3.apply(u)) == u


class TestCompose:
    def test_cube_matches_hand_expansion(self, phi_rank3):
        cube = phi_rank3.power(3)
        assert cube.images[0] == w("acABcAbaCAcAB")
        assert cube.images[1] == w("baCacABaC")
        assert cube.images[2] == w("cAbaCA")

    def test_compose_with_inverse_is_identity(self, phi_rank3):
        assert phi_rank3.compose(phi_rank3.inverse()).is_identity()

    def test_intro_square(self, phi_intro):
        sq = phi_intro.compose(phi_intro)
        assert sq.images[0] == w("c")
        assert sq.images[1] == w("ab")
        assert sq.images[2] == w("bc")

    def test_compose_matches_pointwise(self, phi_rank3, phi_intro):
        comp = phi_rank3.compose(phi_intro)
        for g in (1, 2, 3):
            assert comp.apply((g,)) == phi_rank3.apply(phi_intro.apply((g,)))


class TestVerifyInverse:
    def test_paper_pair(self):
        aut = Automorphism.from_strings(["baC", "cA", "a"], ["c", "ab", "bc"])
        assert verify_inverse(aut.images, aut.inverse_images, 3) is None

    def test_identity(self):
        aut = Automorphism.identity(4)
        assert verify_inverse(aut.images, aut.inverse_images, 4) is None

    def test_wrong_candidate_rejected(self):
        with pytest.raises(InverseVerificationError) as exc:
            Automorphism.from_strings(["ab", "bab"], ["a", "b"])
        assert exc.value.generator == 1


class TestText:
    def test_roundtrip(self):
        assert format_word(w("abC"), 3) == "abC"
        assert format_word((), 3) == "1"
        assert parse_word("1", 3) == ()
