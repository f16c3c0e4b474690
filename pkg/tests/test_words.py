import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isooe.words import (
    BallTooLarge,
    GroupPreset,
    PresetMismatch,
    ReducedWord,
    ball,
    ball_size,
    invert,
    is_even,
    length,
    multiply,
    reduce_letters,
    sphere,
    sphere_size,
    tree_index,
)

F2 = GroupPreset.free(2)
W4 = GroupPreset.coxeter(4)


def w(text, preset=F2):
    return ReducedWord.parse(text, preset)


def fixpoint_reduce(letters, preset):
    """Oracle: delete any cancelling adjacent pair until none is left."""
    letters = list(letters)
    changed = True
    while changed:
        changed = False
        for k in range(len(letters) - 1):
            if letters[k + 1] == preset.inverse_letter(letters[k]):
                del letters[k : k + 2]
                changed = True
                break
    return tuple(letters)


def letters_of(preset, max_size=12):
    return st.lists(st.sampled_from(preset.letters), max_size=max_size)


def reduced_words(preset, max_size=10):
    return letters_of(preset, max_size).map(lambda xs: ReducedWord.from_letters(xs, preset))


def test_multiply_examples():
    assert multiply(w("ab"), w("Ba")) == w("aa")
    assert len(w("ab") * w("Ba")) == 2
    assert multiply(w("a"), w("A")) == F2.identity()
    assert multiply(w("ab"), w("ab")) == w("abab")


def test_invert_examples():
    assert invert(w("ab")) == w("BA")
    assert invert(F2.identity()) == F2.identity()
    s = W4.generator(2)
    assert invert(s) == s


def test_length_and_parity_examples():
    assert length(F2.identity()) == 0
    assert length(w("abA")) == 3
    assert length(ReducedWord.from_letters([(0, 1), (0, -1), (1, 1)], F2)) == 1
    assert is_even(w("ab"))
    assert not is_even(w("a"))
    assert is_even(F2.identity())


def test_ball_examples():
    assert len(ball(F2, 1)) == 5
    assert len(ball(F2, 2)) == 17
    assert len(ball(W4, 2)) == 17


def test_unreduced_letters_rejected():
    with pytest.raises(ValueError):
        ReducedWord(((0, 1), (0, -1)), F2)
    with pytest.raises(ValueError):
        ReducedWord(((1, 1), (1, 1)), W4)
    with pytest.raises(ValueError):
        ReducedWord(((1, -1),), W4)


def test_preset_mismatch():
    with pytest.raises(PresetMismatch):
        multiply(w("a"), W4.generator(0))


def test_text_and_json_round_trip():
    for text in ["1", "a", "aB", "bAbb", "ABab"]:
        word = w(text)
        assert ReducedWord.parse(str(word), F2) == word
        assert ReducedWord.from_json(word.to_json(), F2) == word
    assert w("aB").to_json() == [[0, 1], [1, -1]]
    with pytest.raises(ValueError):
        w("a-b")


@pytest.mark.parametrize("preset", [F2, W4, GroupPreset.free(3), GroupPreset.coxeter(3)])
@pytest.mark.parametrize("k", range(1, 9))
def test_sphere_sizes(preset, k):
    deg = preset.degree
    expected = deg * (deg - 1) ** (k - 1)
    assert sphere_size(preset, k) == expected
    if expected <= 20000:
        words = sphere(preset, k)
        assert len(words) == expected
        assert len(set(words)) == expected
        assert all(len(x) == k for x in words)


def test_free_and_coxeter_spheres_agree_for_equal_degree():
    assert [sphere_size(F2, k) for k in range(9)] == [sphere_size(W4, k) for k in range(9)]


def test_ball_enumeration_against_brute_force():
    # every reduced word of length <= 3 from all letter strings
    brute = set()
    for n in range(4):
        for xs in itertools.product(F2.letters, repeat=n):
            brute.add(fixpoint_reduce(xs, F2))
    assert brute == {x.letters for x in ball(F2, 3)}
    assert ball_size(F2, 3) == len(brute)


def test_ball_cap():
    with pytest.raises(BallTooLarge):
        ball(F2, 20, cap=1000)


def test_inverse_cancels_on_ball_6():
    for preset in (F2, W4):
        ident = preset.identity()
        for x in ball(preset, 6):
            assert multiply(invert(x), x) == ident


def test_tree_index_tables():
    t = tree_index(F2, 3)
    for v, letters in enumerate(t.words):
        word = ReducedWord(letters, F2)
        assert t.label(letters) == v
        assert t.words[t.inverse[v]] == (~word).letters
        if len(word) < 3:
            for x in F2.letters:
                g = ReducedWord((x,), F2)
                assert t.words[t.right[t.letter_code[x]][v]] == (word * g).letters
                assert t.words[t.left[t.letter_code[x]][v]] == (g * word).letters
    g = w("aB")
    table = t.left_table(g.letters)
    for v in range(t.size(1)):
        assert t.words[table[v]] == (g * ReducedWord(t.words[v], F2)).letters


@settings(max_examples=200)
@given(letters_of(F2), letters_of(F2))
def test_parity_is_a_homomorphism(xs, ys):
    u = ReducedWord.from_letters(xs, F2)
    v = ReducedWord.from_letters(ys, F2)
    assert length(u * v) % 2 == (length(u) + length(v)) % 2


@settings(max_examples=200)
@given(letters_of(W4), letters_of(W4))
def test_parity_is_a_homomorphism_coxeter(xs, ys):
    u = ReducedWord.from_letters(xs, W4)
    v = ReducedWord.from_letters(ys, W4)
    assert is_even(u * v) == (is_even(u) == is_even(v))


@settings(max_examples=300)
@given(st.sampled_from([F2, W4, GroupPreset.free(3)]).flatmap(lambda p: st.tuples(st.just(p), letters_of(p))))
def test_reduction_is_confluent(case):
    preset, xs = case
    expected = fixpoint_reduce(xs, preset)
    assert reduce_letters(xs, preset) == expected
    # any bracketing: reduce the halves first, then the concatenation
    for cut in range(len(xs) + 1):
        left = ReducedWord.from_letters(xs[:cut], preset)
        right = ReducedWord.from_letters(xs[cut:], preset)
        assert (left * right).letters == expected


@given(reduced_words(F2), reduced_words(F2), reduced_words(F2))
def test_associativity(u, v, x):
    assert (u * v) * x == u * (v * x)
    assert ~(u * v) == ~v * ~u
