"""Rainbow 5-colourings of the 4-regular tree and two F_2-actions on them.

``*`` translates a colouring; the twisted action moves the root to the
unique neighbour carrying the colour prescribed by a fixed pair of
5-cycles.  Both are realised on lazily evaluated random colourings: every
colour is a pure function of (seed, vertex), so orbits of any length can be
followed without storing a ball.

Colours are 1..5.  The letters of F_2 are ordered a, a^-1, b, b^-1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import keyed
from .words import GroupPreset, ReducedWord

COLORS = (1, 2, 3, 4, 5)
COLOR_SALT = 0xC0101
F2 = GroupPreset.free(2)
ALPHABET = F2.letters
CODE = {x: c for c, x in enumerate(ALPHABET)}
INV_CODE = [CODE[F2.inverse_letter(x)] for x in ALPHABET]


class SelectorError(RuntimeError):
    pass


class NoSelector(SelectorError):
    pass


class NonUniqueSelector(SelectorError):
    pass


def _cycle_images(cycle: tuple[int, ...]) -> tuple[int, ...]:
    images = {c: cycle[(k + 1) % len(cycle)] for k, c in enumerate(cycle)}
    return tuple(images[c] for c in COLORS)


def _is_five_cycle(images: tuple[int, ...]) -> bool:
    c, seen = 1, 0
    for _ in range(5):
        c = images[c - 1]
        seen += 1
        if c == 1:
            break
    return c == 1 and seen == 5


@dataclass(frozen=True)
class FivePointPermutations:
    """Images of colours 1..5 under A and B (``A[i-1]`` is A(i))."""

    A: tuple[int, ...] = field(default_factory=lambda: _cycle_images((1, 2, 3, 4, 5)))
    B: tuple[int, ...] = field(default_factory=lambda: _cycle_images((1, 3, 5, 2, 4)))

    def __post_init__(self):
        for name, p in (("A", self.A), ("B", self.B)):
            if sorted(p) != list(COLORS):
                raise ValueError(f"{name} is not a permutation of 1..5")
            if not _is_five_cycle(p):
                raise ValueError(f"{name} is not a 5-cycle")
        if any(a == b for a, b in zip(self.A, self.B)):
            raise ValueError("A(i) must differ from B(i) for every i")

    def letter(self, x: tuple[int, int]) -> tuple[int, ...]:
        base = self.A if x[0] == 0 else self.B
        if x[1] > 0:
            return base
        inv = [0] * 5
        for i, img in enumerate(base):
            inv[img - 1] = i + 1
        return tuple(inv)

    def of_word(self, w: ReducedWord) -> tuple[int, ...]:
        """pi(w) with pi(uv) = pi(u) o pi(v)."""
        out = list(COLORS)
        for x in reversed(w.letters):
            p = self.letter(x)
            out = [p[c - 1] for c in out]
        return tuple(out)

    def coset_action(self):
        """The same permutations as a 0-indexed coset action of F_2."""
        from .schreier import CosetAction

        return CosetAction(5, (tuple(a - 1 for a in self.A), tuple(b - 1 for b in self.B)))


DEFAULT_PERMUTATIONS = FivePointPermutations()


# colours left once 1 or 2 colours are excluded, sorted
_REM4 = np.array([[c for c in COLORS if c != o] if o else [0] * 4 for o in range(6)], dtype=np.int64)
_REM3 = np.zeros((6, 6, 3), dtype=np.int64)
for _o, _p in itertools.permutations(COLORS, 2):
    _REM3[_o, _p] = [c for c in COLORS if c not in (_o, _p)]


def _forward_codes(last: int) -> list[int]:
    if last < 0:
        return [0, 1, 2, 3]
    return [c for c in range(4) if c != INV_CODE[last]]


@lru_cache(maxsize=1 << 18)
def _vertex(seed: int, codes: tuple[int, ...]) -> tuple[int, int, int]:
    """(key, own colour, parent colour) of the vertex reached by ``codes``."""
    if not codes:
        key = keyed.root_key(seed, COLOR_SALT)
        return key, 1 + keyed.sub_key(key, 0) % 5, 0
    key, own, parent = _vertex(seed, codes[:-1])
    code = codes[-1]
    last = codes[-2] if len(codes) > 1 else -1
    fwd = _forward_codes(last)
    if last < 0:
        palette = _REM4[own]
    else:
        palette = _REM3[own, parent]
    perm = keyed.keyed_permutation(keyed.sub_key(key, 1), len(fwd))
    colour = int(palette[perm[fwd.index(code)]])
    return keyed.child_key(key, code), colour, own


def seed_color(seed: int, w: ReducedWord) -> int:
    """Colour of vertex w in the random colouring with the given seed."""
    return _vertex(seed, tuple(CODE[x] for x in w.letters))[1]


def seed_color_array(seeds: np.ndarray, w: ReducedWord) -> np.ndarray:
    """Vectorised :func:`seed_color` over many seeds for one vertex."""
    seeds = np.asarray(seeds, dtype=np.uint64)
    key = keyed.root_key_array(seeds, COLOR_SALT)
    own = (1 + keyed.sub_key_array(key, 0) % np.uint64(5)).astype(np.int64)
    parent = np.zeros_like(own)
    last = -1
    for x in w.letters:
        code = CODE[x]
        fwd = _forward_codes(last)
        k = len(fwd)
        table = keyed.permutations_of(k)
        perm_idx = (keyed.sub_key_array(key, 1) % np.uint64(len(table))).astype(np.int64)
        slot = table[perm_idx, fwd.index(code)]
        if last < 0:
            colour = _REM4[own, slot]
        else:
            colour = _REM3[own, parent, slot]
        key = keyed.child_key_array(key, code)
        parent, own, last = own, colour, code
    return own


_FWD = np.array([[c for c in range(4) if c != INV_CODE[last]] for last in range(4)], dtype=np.int64)


def twisted_walk(seeds: np.ndarray, w: ReducedWord,
                 perms: FivePointPermutations = DEFAULT_PERMUTATIONS) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised twisted action from the seed colourings themselves.

    ``twisted_act(w, ColoringState(seed))`` is ``c * col_seed`` for the
    cocycle c; its root sits at vertex ``c^-1`` of ``col_seed``, and each
    letter moves that vertex to the neighbour with the prescribed colour.
    Returns (root colour after the action, |c|) per seed.
    """
    seeds = np.asarray(seeds, dtype=np.uint64)
    n = len(seeds)
    depth_max = len(w) + 1
    key = np.zeros((depth_max, n), dtype=np.uint64)
    own = np.zeros((depth_max, n), dtype=np.int64)
    pcol = np.zeros((depth_max, n), dtype=np.int64)
    last = np.full((depth_max, n), -1, dtype=np.int64)
    key[0] = keyed.root_key_array(seeds, COLOR_SALT)
    own[0] = 1 + (keyed.sub_key_array(key[0], 0) % np.uint64(5)).astype(np.int64)
    depth = np.zeros(n, dtype=np.int64)
    cols = np.arange(n)
    for x in reversed(w.letters):
        p = np.asarray((0,) + perms.letter(x), dtype=np.int64)
        k_cur, o_cur = key[depth, cols], own[depth, cols]
        pc_cur, l_cur = pcol[depth, cols], last[depth, cols]
        target = p[o_cur]
        up = (depth > 0) & (pc_cur == target)
        down = ~up
        at_root = down & (depth == 0)
        inner = down & (depth > 0)
        code = np.full(n, -1, dtype=np.int64)
        sub = keyed.sub_key_array(k_cur, 1)
        if at_root.any():
            idx = np.nonzero(at_root)[0]
            table = keyed.permutations_of(4)
            perm = table[(sub[idx] % np.uint64(len(table))).astype(np.int64)]
            colours = _REM4[o_cur[idx][:, None], perm]
            slot = np.argmax(colours == target[idx][:, None], axis=1)
            if not (colours[np.arange(len(idx)), slot] == target[idx]).all():
                raise NoSelector("no child of the root has the target colour")
            code[idx] = slot
        if inner.any():
            idx = np.nonzero(inner)[0]
            table = keyed.permutations_of(3)
            perm = table[(sub[idx] % np.uint64(len(table))).astype(np.int64)]
            colours = _REM3[o_cur[idx][:, None], pc_cur[idx][:, None], perm]
            slot = np.argmax(colours == target[idx][:, None], axis=1)
            if not (colours[np.arange(len(idx)), slot] == target[idx]).all():
                raise NoSelector("no neighbour has the target colour")
            code[idx] = _FWD[l_cur[idx], slot]
        depth = np.where(up, depth - 1, depth)
        d_idx = np.nonzero(down)[0]
        nd = depth[d_idx] + 1
        key[nd, d_idx] = keyed.child_key_array(k_cur[d_idx], code[d_idx])
        own[nd, d_idx] = target[d_idx]
        pcol[nd, d_idx] = o_cur[d_idx]
        last[nd, d_idx] = code[d_idx]
        depth = np.where(down, depth + 1, depth)
    return own[depth, cols], depth


@dataclass(frozen=True)
class ColoringState:
    """The colouring ``offset * col_seed``."""

    seed: int
    offset: ReducedWord = field(default_factory=F2.identity)

    def __post_init__(self):
        if self.offset.preset != F2:
            raise ValueError("colourings live on the Cayley tree of F_2")


def color(state: ColoringState, w: ReducedWord) -> int:
    return seed_color(state.seed, ~state.offset * w)


def star_act(gamma: ReducedWord, state: ColoringState) -> ColoringState:
    return ColoringState(state.seed, gamma * state.offset)


def _select(state: ColoringState, target: int) -> ReducedWord:
    """The generator s with color(s * state, 1) == target."""
    hits = [x for x in ALPHABET if color(state, ReducedWord((F2.inverse_letter(x),), F2)) == target]
    if not hits:
        raise NoSelector(f"no neighbour of the root has colour {target} (seed {state.seed}, offset {state.offset})")
    if len(hits) > 1:
        raise NonUniqueSelector(f"{len(hits)} neighbours have colour {target} (seed {state.seed}, offset {state.offset})")
    return ReducedWord((hits[0],), F2)


def twisted_cocycle(w: ReducedWord, state: ColoringState,
                    perms: FivePointPermutations = DEFAULT_PERMUTATIONS) -> ReducedWord:
    """The word c with ``twisted_act(w, state) == star_act(c, state)``."""
    c = F2.identity()
    current = state
    for x in reversed(w.letters):
        target = perms.letter(x)[color(current, F2.identity()) - 1]
        s = _select(current, target)
        c = s * c
        current = star_act(s, current)
    return c


def twisted_act(w: ReducedWord, state: ColoringState,
                perms: FivePointPermutations = DEFAULT_PERMUTATIONS) -> ColoringState:
    return star_act(twisted_cocycle(w, state, perms), state)


def check_rainbow(state: ColoringState, w: ReducedWord) -> bool:
    """Vertex w and its four neighbours show all five colours."""
    seen = {color(state, w)}
    for x in ALPHABET:
        seen.add(color(state, w * ReducedWord((x,), F2)))
    return len(seen) == 5


def star_transition_matrix() -> tuple[list[tuple[int, int]], np.ndarray]:
    """Second-order chain along a geodesic on (parent colour, own colour)."""
    states = list(itertools.permutations(COLORS, 2))
    pos = {s: k for k, s in enumerate(states)}
    m = np.zeros((20, 20))
    for (p, c), k in pos.items():
        for nxt in COLORS:
            if nxt not in (p, c):
                m[k, pos[(c, nxt)]] = 1 / 3
    return states, m


def star_correlation_matrix(n: int) -> np.ndarray:
    """M[i-1, j-1] = P(colour at distance n is i and root colour is j)."""
    if n == 0:
        return np.eye(5) / 5
    states, m = star_transition_matrix()
    # joint[root - 1, state]: (root, child) starts uniform over the 20 ordered pairs
    joint = np.zeros((5, 20))
    for k, (root, _) in enumerate(states):
        joint[root - 1, k] = 1 / 20
    for _ in range(n - 1):
        joint = joint @ m
    out = np.zeros((5, 5))
    for k, (_, own) in enumerate(states):
        out[own - 1, :] += joint[:, k]
    return out


def exact_star_correlation(n: int, i: int, j: int) -> float:
    """P(col(gamma) = i, col(1) = j) for any gamma with |gamma| = n."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return float(star_correlation_matrix(n)[i - 1, j - 1])


def exact_twisted_correlation(w: ReducedWord, i: int, j: int,
                              perms: FivePointPermutations = DEFAULT_PERMUTATIONS) -> float:
    """P(root colour i before, j after w acts); the root colour moves
    deterministically, so this is (1/5) [pi(w)(i) == j]."""
    return 0.2 if perms.of_word(w)[i - 1] == j else 0.0


@dataclass
class CorrelationRow:
    word: str
    n: int
    exact: float
    mc: float | None
    stderr: float | None
    samples: int


def mc_correlation(action: str, w: ReducedWord, i: int, j: int, samples: int, seed: int,
                   perms: FivePointPermutations = DEFAULT_PERMUTATIONS) -> CorrelationRow:
    """Monte Carlo estimate of P(col_state(1) = i, col_{w.state}(1) = j).

    For ``star`` the pair law is symmetric in (i, j), so this agrees with
    :func:`exact_star_correlation` either way round.
    """
    if action not in ("star", "twisted"):
        raise ValueError(f"action must be star or twisted, got {action!r}")
    exact = exact_star_correlation(len(w), i, j) if action == "star" else exact_twisted_correlation(w, i, j, perms)
    if samples == 0:
        return CorrelationRow(str(w), len(w), exact, None, None, 0)
    if samples < 0:
        raise ValueError("sample count must be non-negative")
    seeds = keyed.derive_seeds(seed, samples)
    root = seed_color_array(seeds, F2.identity())
    if action == "star":
        moved = seed_color_array(seeds, ~w)
    else:
        moved, _ = twisted_walk(seeds, w, perms)
    hits = int(np.count_nonzero((root == i) & (moved == j)))
    p = hits / samples
    return CorrelationRow(str(w), len(w), exact, p, math.sqrt(p * (1 - p) / samples), samples)


def verify_invariants(samples: int, seed: int, max_len: int = 6, pairs: int = 8,
                      perms: FivePointPermutations = DEFAULT_PERMUTATIONS) -> dict:
    """Invariant suite over ``samples`` seeded states.

    Vectorised over all words of length <= max_len: cocycle length equals word
    length and the root colour moves by pi(w).  Per state, scalar checks of
    rainbowness along the visited vertices, of the vectorised walk against
    :func:`twisted_cocycle`, and of cocycle multiplicativity on ``pairs``
    keyed pairs (u, v) with |u|, |v| <= max_len // 2.
    """
    from .words import ball

    seeds = keyed.derive_seeds(seed, samples)
    words = ball(F2, max_len)
    halves = ball(F2, max_len // 2)
    checks = {"rainbow": 0, "cocycleLength": 0, "rootEquivariance": 0, "walkMatchesScalar": 0, "multiplicative": 0}

    def fail(check, state_seed, **words_):
        ce = {"check": check, "seed": int(state_seed)}
        ce.update({k: str(v) for k, v in words_.items()})
        return {"ok": False, "checks": checks, "counterexample": ce}

    root = seed_color_array(seeds, F2.identity())
    for w in words:
        try:
            moved, depth = twisted_walk(seeds, w, perms)
        except SelectorError:
            return fail("selector", seeds[0], word=w)
        bad = np.nonzero(depth != len(w))[0]
        if len(bad):
            return fail("cocycleLength", seeds[bad[0]], word=w)
        pi = np.asarray((0,) + perms.of_word(w), dtype=np.int64)
        bad = np.nonzero(moved != pi[root])[0]
        if len(bad):
            return fail("rootEquivariance", seeds[bad[0]], word=w)
        checks["cocycleLength"] += samples
        checks["rootEquivariance"] += samples

    for k, s in enumerate(seeds):
        state = ColoringState(int(s))
        key = keyed.root_key(int(s), 0x7E57)
        for p in range(pairs):
            draw = keyed.sub_key(key, p)
            u = halves[draw % len(halves)]
            v = halves[(draw >> 32) % len(halves)]
            cv = twisted_cocycle(v, state, perms)
            cuv = twisted_cocycle(u * v, state, perms)
            if cuv != twisted_cocycle(u, star_act(cv, state), perms) * cv:
                return fail("multiplicative", s, u=u, v=v)
            checks["multiplicative"] += 1
            for vertex in (~cv, ~cuv):
                if not check_rainbow(state, vertex):
                    return fail("rainbow", s, word=vertex)
                checks["rainbow"] += 1
            moved, depth = twisted_walk(np.asarray([s]), u * v, perms)
            if int(depth[0]) != len(cuv) or int(moved[0]) != color(star_act(cuv, state), F2.identity()):
                return fail("walkMatchesScalar", s, word=u * v)
            checks["walkMatchesScalar"] += 1
    return {"ok": True, "checks": checks, "counterexample": None}
