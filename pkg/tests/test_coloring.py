import itertools
import math

import numpy as np
import pytest
from scipy import stats

from isooe import keyed
from isooe.coloring import (
    COLORS,
    DEFAULT_PERMUTATIONS,
    F2,
    ColoringState,
    FivePointPermutations,
    check_rainbow,
    color,
    exact_star_correlation,
    exact_twisted_correlation,
    mc_correlation,
    seed_color,
    seed_color_array,
    star_act,
    star_correlation_matrix,
    star_transition_matrix,
    twisted_act,
    twisted_cocycle,
    twisted_walk,
    verify_invariants,
)
from isooe.schreier import act
from isooe.words import ReducedWord, ball, sphere


def w(text):
    return ReducedWord.parse(text, F2)


def path_oracle(n):
    """P(colour i at distance n, root colour j) by listing every colour path."""
    out = np.zeros((5, 5))
    if n == 0:
        return np.eye(5) / 5
    weight = 1 / (5 * 4 * 3 ** (n - 1))
    for path in itertools.product(COLORS, repeat=n + 1):
        ok = all(path[k] != path[k - 1] for k in range(1, n + 1))
        ok = ok and all(path[k] != path[k - 2] for k in range(2, n + 1))
        if ok:
            out[path[-1] - 1, path[0] - 1] += weight
    return out


def states(count, seed=0):
    return [ColoringState(int(s)) for s in keyed.derive_seeds(seed, count)]


def same_colouring(s, t, radius=4):
    return all(color(s, x) == color(t, x) for x in ball(F2, radius))


def test_permutations_match_the_cycles():
    perms = DEFAULT_PERMUTATIONS
    assert perms.A == (2, 3, 4, 5, 1)
    assert perms.B == (3, 4, 5, 1, 2)
    assert perms.of_word(w("ab"))[0] == 4
    action = perms.coset_action()
    for x in ball(F2, 3):
        for p in range(5):
            assert perms.of_word(x)[p] - 1 == act(action, x, p)
    with pytest.raises(ValueError):
        FivePointPermutations(A=(1, 2, 3, 4, 5))


def test_keyed_scalar_and_array_agree():
    seeds = keyed.derive_seeds(3, 50)
    keys = keyed.root_key_array(seeds, 99)
    for s, k in zip(seeds, keys):
        assert keyed.root_key(int(s), 99) == int(k)
        for code in range(4):
            assert keyed.child_key(int(k), code) == int(keyed.child_key_array(np.array([k]), code)[0])
            assert keyed.sub_key(int(k), code) == int(keyed.sub_key_array(np.array([k]), code)[0])
    codes = np.arange(50) % 4
    assert [keyed.child_key(int(k), int(c)) for k, c in zip(keys, codes)] == list(keyed.child_key_array(keys, codes))


def test_keyed_permutations_are_permutations():
    for k in (3, 4, 9):
        for key in range(20):
            assert sorted(keyed.keyed_permutation(keyed.mix(key), k)) == list(range(k))


def test_colours_are_stable_and_vectorised_lookup_agrees():
    seeds = keyed.derive_seeds(4, 300)
    for x in ball(F2, 3):
        arr = seed_color_array(seeds, x)
        assert list(arr) == [seed_color(int(s), x) for s in seeds]
        assert list(arr) == [seed_color(int(s), x) for s in seeds]


def test_propriety_and_rainbow_on_random_queries():
    rng = np.random.default_rng(5)
    words = ball(F2, 6)
    for _ in range(10_000):
        state = ColoringState(int(rng.integers(2**63)), words[int(rng.integers(len(words)))])
        x = words[int(rng.integers(1, len(words)))]
        parent = ReducedWord(x.letters[:-1], F2)
        assert color(state, x) != color(state, parent)
        neighbours = [color(state, x * ReducedWord((y,), F2)) for y in F2.letters]
        assert len(set(neighbours)) == 4 and color(state, x) not in neighbours
    assert check_rainbow(ColoringState(1), w("abA"))


def test_root_colour_is_uniform():
    counts = np.bincount(seed_color_array(keyed.derive_seeds(6, 10_000), F2.identity()), minlength=6)[1:]
    assert stats.chisquare(counts).pvalue > 1e-3


def test_star_action():
    s = states(1, seed=7)[0]
    assert star_act(F2.identity(), s) == s
    assert color(star_act(w("a"), s), w("a")) == color(s, F2.identity())
    g, h = w("aB"), w("bb")
    assert same_colouring(star_act(g * h, s), star_act(g, star_act(h, s)))
    for x in ball(F2, 3):
        assert color(star_act(g, s), x) == color(s, ~g * x)


def test_twisted_examples():
    for s in states(1000, seed=8):
        root = color(s, F2.identity())
        assert color(twisted_act(w("a"), s), F2.identity()) == DEFAULT_PERMUTATIONS.A[root - 1]
        assert len(twisted_cocycle(w("a"), s)) == 1
    s = states(1, seed=9)[0]
    assert twisted_cocycle(F2.identity(), s) == F2.identity()
    for x in ("a", "b"):
        back = twisted_act(~w(x), twisted_act(w(x), s))
        assert same_colouring(back, s)
        back = twisted_act(w(x), twisted_act(~w(x), s))
        assert same_colouring(back, s)


def test_twisted_agrees_with_star_by_its_cocycle():
    for s in states(20, seed=10):
        for x in ball(F2, 3):
            c = twisted_cocycle(x, s)
            assert twisted_act(x, s) == star_act(c, s)
            assert len(c) == len(x)


def test_stabilizer_preserves_root_colour_events():
    words = ball(F2, 4)
    for i in COLORS:
        stab = [x for x in words if DEFAULT_PERMUTATIONS.of_word(x)[i - 1] == i]
        assert len(stab) > 1
        for k, s in enumerate(states(1000, seed=11 + i)):
            x = stab[k % len(stab)]
            before = color(s, F2.identity()) == i
            after = color(twisted_act(x, s), F2.identity()) == i
            assert before == after


def test_vectorised_walk_matches_scalar():
    seeds = keyed.derive_seeds(12, 40)
    for x in ball(F2, 4):
        moved, depth = twisted_walk(seeds, x)
        for s, m, d in zip(seeds, moved, depth):
            c = twisted_cocycle(x, ColoringState(int(s)))
            assert d == len(c)
            assert m == color(star_act(c, ColoringState(int(s))), F2.identity())


def test_star_chain_is_stochastic():
    states_, m = star_transition_matrix()
    assert len(states_) == 20
    assert np.allclose(m.sum(axis=1), 1.0)
    assert np.allclose(m.sum(axis=0), 1.0)


def test_exact_star_small_cases():
    for i in COLORS:
        for j in COLORS:
            assert exact_star_correlation(0, i, j) == (0.2 if i == j else 0.0)
            assert exact_star_correlation(1, i, j) == pytest.approx(0.0 if i == j else 1 / 20, abs=1e-15)
    with pytest.raises(ValueError):
        exact_star_correlation(-1, 1, 1)


@pytest.mark.parametrize("n", range(9))
def test_exact_star_matches_path_oracle(n):
    assert np.abs(star_correlation_matrix(n) - path_oracle(n)).max() < 1e-12


def test_exact_star_marginals():
    for n in range(0, 41):
        m = star_correlation_matrix(n)
        assert np.allclose(m.sum(axis=0), 0.2, atol=1e-12, rtol=0)
        assert np.allclose(m.sum(axis=1), 0.2, atol=1e-12, rtol=0)


def test_star_chain_subdominant_eigenvalue():
    _, m = star_transition_matrix()
    eig = np.linalg.eigvals(m)
    mods = np.sort(np.abs(eig))[::-1]
    assert mods[0] == pytest.approx(1.0)
    assert mods[1] == pytest.approx(1 / math.sqrt(3), abs=1e-12)
    assert np.min(np.abs(eig - complex(-1 / 6, math.sqrt(11) / 6))) < 1e-12


def test_star_decay_envelope():
    # the deviation decays like 3^(-n/2): neither faster nor slower
    scaled = [np.abs(star_correlation_matrix(n) - 1 / 25).max() * 3 ** (n / 2) for n in range(2, 61)]
    assert max(scaled) < 0.25
    assert min(max(scaled[k : k + 6]) for k in range(len(scaled) - 6)) > 0.05


def test_star_at_twenty_regression():
    dev = np.abs(star_correlation_matrix(20) - 1 / 25).max()
    assert dev == pytest.approx(2.635998944268414e-06, rel=1e-9)


def test_exact_twisted_examples():
    ab = w("ab")
    assert exact_twisted_correlation(ab, 1, 4) == 0.2
    for j in (1, 2, 3, 5):
        assert exact_twisted_correlation(ab, 1, j) == 0.0
    for i in COLORS:
        assert exact_twisted_correlation(F2.identity(), i, i) == 0.2
        assert exact_twisted_correlation(w("aaaaa"), i, i) == 0.2
        assert exact_twisted_correlation(w("abb"), i, i) == 0.2
        assert exact_twisted_correlation(w("aaB"), i, i) == 0.2


def test_mc_rows():
    row = mc_correlation("twisted", w("ab"), 1, 2, 0, 0)
    assert row.mc is None and row.exact == 0.0
    row = mc_correlation("star", w("a"), 1, 2, 1, 3)
    assert row.mc in (0.0, 1.0)
    row = mc_correlation("twisted", w("ab"), 1, 4, 20_000, 3)
    assert row == mc_correlation("twisted", w("ab"), 1, 4, 20_000, 3)
    assert row.stderr == pytest.approx(math.sqrt(row.mc * (1 - row.mc) / 20_000))
    assert abs(row.mc - 0.2) < 4 * row.stderr
    row = mc_correlation("star", w("aBaB"), 2, 5, 20_000, 4)
    assert abs(row.mc - row.exact) < 4 * row.stderr
    with pytest.raises(ValueError):
        mc_correlation("other", w("a"), 1, 1, 10, 0)


def test_star_mc_matches_exact_along_any_geodesic():
    for text in ("aaa", "abA", "BBa"):
        row = mc_correlation("star", w(text), 3, 1, 20_000, 5)
        assert abs(row.mc - exact_star_correlation(3, 3, 1)) < 4 * row.stderr


def test_invariant_suite_small():
    result = verify_invariants(30, seed=1, max_len=4)
    assert result["ok"], result
    assert result == verify_invariants(30, seed=1, max_len=4)


def test_sphere_words_cover_all_directions():
    # sanity for the sphere enumeration used by the suites
    assert len(sphere(F2, 3)) == 36
