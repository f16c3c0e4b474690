"""Reduced words in free groups and universal Coxeter groups.

A letter is a pair ``(generator_index, sign)``.  Free presets use signs
``+1``/``-1``; Coxeter presets only ever use ``+1`` because every generator
is an involution.  Words are kept freely reduced at all times, so two words
are equal as group elements iff their letter tuples are equal.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

Letter = tuple[int, int]

DEFAULT_BALL_CAP = 10**7


class PresetMismatch(ValueError):
    pass


class BallTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class GroupPreset:
    kind: str  # "free" or "coxeter"
    rank: int

    def __post_init__(self):
        if self.kind not in ("free", "coxeter"):
            raise ValueError(f"unknown preset kind {self.kind!r}")
        if self.rank < 1:
            raise ValueError("rank must be positive")

    @classmethod
    def free(cls, d: int) -> "GroupPreset":
        return cls("free", d)

    @classmethod
    def coxeter(cls, m: int) -> "GroupPreset":
        return cls("coxeter", m)

    @property
    def degree(self) -> int:
        """Valence of the Cayley tree."""
        return 2 * self.rank if self.kind == "free" else self.rank

    @property
    def letters(self) -> tuple[Letter, ...]:
        return _alphabet(self)

    def inverse_letter(self, x: Letter) -> Letter:
        if self.kind == "coxeter":
            return x
        return (x[0], -x[1])

    def identity(self) -> "ReducedWord":
        return ReducedWord((), self)

    def generator(self, i: int, sign: int = 1) -> "ReducedWord":
        return ReducedWord.from_letters([(i, sign)], self)

    def __str__(self):
        return f"F{self.rank}" if self.kind == "free" else f"W{self.rank}"


@lru_cache(maxsize=None)
def _alphabet(preset: GroupPreset) -> tuple[Letter, ...]:
    if preset.kind == "free":
        return tuple((i, s) for i in range(preset.rank) for s in (1, -1))
    return tuple((i, 1) for i in range(preset.rank))


def _check_letter(x: Letter, preset: GroupPreset) -> Letter:
    i, s = int(x[0]), int(x[1])
    if not 0 <= i < preset.rank:
        raise ValueError(f"generator index {i} out of range for {preset}")
    if preset.kind == "free":
        if s not in (1, -1):
            raise ValueError(f"exponent sign must be +1 or -1, got {s}")
    else:
        # s_i^{-1} = s_i
        if s not in (1, -1):
            raise ValueError(f"exponent sign must be +1 or -1, got {s}")
        s = 1
    return (i, s)


def reduce_letters(letters: Iterable[Letter], preset: GroupPreset) -> tuple[Letter, ...]:
    """Freely reduce an arbitrary letter sequence (single left-to-right pass)."""
    out: list[Letter] = []
    for x in letters:
        x = _check_letter(x, preset)
        if out and out[-1] == preset.inverse_letter(x):
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def _is_reduced(letters: Sequence[Letter], preset: GroupPreset) -> bool:
    return all(
        letters[k + 1] != preset.inverse_letter(letters[k]) for k in range(len(letters) - 1)
    )


@dataclass(frozen=True)
class ReducedWord:
    letters: tuple[Letter, ...]
    preset: GroupPreset

    def __post_init__(self):
        if self.preset.kind == "coxeter" and any(s != 1 for _, s in self.letters):
            raise ValueError("Coxeter letters carry sign +1")
        if not _is_reduced(self.letters, self.preset):
            raise ValueError(f"letters {self.letters} are not reduced; use ReducedWord.from_letters")

    @classmethod
    def from_letters(cls, letters: Iterable[Letter], preset: GroupPreset) -> "ReducedWord":
        return cls(reduce_letters(letters, preset), preset)

    @classmethod
    def parse(cls, text: str, preset: GroupPreset) -> "ReducedWord":
        """Parse ``ab``, ``aB`` (capital = inverse) or ``1`` for the identity."""
        text = text.strip()
        if text in ("", "1", "e"):
            return preset.identity()
        letters = []
        for ch in text:
            if ch in string.ascii_lowercase:
                letters.append((ord(ch) - ord("a"), 1))
            elif ch in string.ascii_uppercase:
                letters.append((ord(ch) - ord("A"), -1))
            else:
                raise ValueError(f"bad character {ch!r} in word {text!r}")
        return cls.from_letters(letters, preset)

    @classmethod
    def from_json(cls, data, preset: GroupPreset) -> "ReducedWord":
        if isinstance(data, str):
            data = json.loads(data)
        return cls.from_letters([tuple(x) for x in data], preset)

    def to_json(self) -> list[list[int]]:
        return [[i, s] for i, s in self.letters]

    def __str__(self):
        if not self.letters:
            return "1"
        if self.preset.rank > 26:
            return ".".join(f"x{i + 1}" + ("" if s > 0 else "^-1") for i, s in self.letters)
        return "".join(
            chr(ord("a") + i) if s > 0 else chr(ord("A") + i) for i, s in self.letters
        )

    def __repr__(self):
        return f"ReducedWord({str(self)!r}, {self.preset})"

    def __len__(self):
        return len(self.letters)

    def __mul__(self, other: "ReducedWord") -> "ReducedWord":
        return multiply(self, other)

    def __invert__(self) -> "ReducedWord":
        return invert(self)


def _mul_letters(u: Sequence[Letter], v: Sequence[Letter], preset: GroupPreset) -> tuple[Letter, ...]:
    # both inputs reduced: cancellation only happens at the junction
    k = 0
    n = min(len(u), len(v))
    while k < n and v[k] == preset.inverse_letter(u[len(u) - 1 - k]):
        k += 1
    return tuple(u[: len(u) - k]) + tuple(v[k:])


def _inv_letters(u: Sequence[Letter], preset: GroupPreset) -> tuple[Letter, ...]:
    return tuple(preset.inverse_letter(x) for x in reversed(u))


def multiply(u: ReducedWord, v: ReducedWord) -> ReducedWord:
    if u.preset != v.preset:
        raise PresetMismatch(f"cannot multiply words over {u.preset} and {v.preset}")
    return ReducedWord(_mul_letters(u.letters, v.letters, u.preset), u.preset)


def invert(w: ReducedWord) -> ReducedWord:
    return ReducedWord(_inv_letters(w.letters, w.preset), w.preset)


def length(w: ReducedWord) -> int:
    return len(w.letters)


def is_even(w: ReducedWord) -> bool:
    return len(w.letters) % 2 == 0


def sphere_size(preset: GroupPreset, k: int) -> int:
    if k == 0:
        return 1
    q = preset.degree
    return q * (q - 1) ** (k - 1)


def ball_size(preset: GroupPreset, r: int) -> int:
    return sum(sphere_size(preset, k) for k in range(r + 1))


def iter_sphere_letters(preset: GroupPreset, k: int) -> Iterator[tuple[Letter, ...]]:
    """Reduced letter tuples of length exactly k, by non-backtracking DFS."""
    alphabet = preset.letters

    def extend(prefix: tuple[Letter, ...]):
        if len(prefix) == k:
            yield prefix
            return
        banned = preset.inverse_letter(prefix[-1]) if prefix else None
        for x in alphabet:
            if x != banned:
                yield from extend(prefix + (x,))

    yield from extend(())


def sphere(preset: GroupPreset, k: int) -> list[ReducedWord]:
    return [ReducedWord(t, preset) for t in iter_sphere_letters(preset, k)]


def ball(preset: GroupPreset, r: int, cap: int = DEFAULT_BALL_CAP) -> list[ReducedWord]:
    """All reduced words of length <= r, ordered by length then DFS order."""
    if r < 0:
        raise ValueError("radius must be non-negative")
    size = ball_size(preset, r)
    if size > cap:
        raise BallTooLarge(f"ball of radius {r} in {preset} has {size} elements (cap {cap})")
    out = []
    for k in range(r + 1):
        out.extend(sphere(preset, k))
    return out


class TreeIndex:
    """Integer labels for the vertices of a Cayley-tree ball.

    Vertices are numbered sphere by sphere, so the ball of radius ``k`` is the
    index prefix ``range(ball_size(preset, k))`` for every ``k <= radius``.
    ``right[x][v]`` is the label of ``v x`` and ``left[x][v]`` that of
    ``x v`` (``-1`` when the product leaves the ball).
    """

    def __init__(self, preset: GroupPreset, radius: int, cap: int = DEFAULT_BALL_CAP):
        size = ball_size(preset, radius)
        if size > cap:
            raise BallTooLarge(f"ball of radius {radius} in {preset} has {size} elements (cap {cap})")
        self.preset = preset
        self.radius = radius
        self.alphabet = preset.letters
        self.letter_code = {x: c for c, x in enumerate(self.alphabet)}
        self.inverse_code = [self.letter_code[preset.inverse_letter(x)] for x in self.alphabet]

        words: list[tuple[Letter, ...]] = [()]
        last = [-1]
        parent = [0]
        frontier = [0]
        for _ in range(radius):
            nxt = []
            for v in frontier:
                banned = self.inverse_code[last[v]] if last[v] >= 0 else -1
                for c in range(len(self.alphabet)):
                    if c != banned:
                        words.append(words[v] + (self.alphabet[c],))
                        last.append(c)
                        parent.append(v)
                        nxt.append(len(words) - 1)
            frontier = nxt
        self.words = words
        self.index = {w: k for k, w in enumerate(words)}
        self.lengths = np.fromiter((len(w) for w in words), dtype=np.int64, count=len(words))
        self.last = np.asarray(last, dtype=np.int64)
        self.parent = np.asarray(parent, dtype=np.int64)
        self.sizes = [ball_size(preset, k) for k in range(radius + 1)]

        idx = self.index
        inv = preset.inverse_letter
        self.right = []
        self.left = []
        for x in self.alphabet:
            xi = inv(x)
            r = np.full(len(words), -1, dtype=np.int64)
            lft = np.full(len(words), -1, dtype=np.int64)
            for k, w in enumerate(words):
                wr = w[:-1] if w and w[-1] == xi else w + (x,)
                wl = w[1:] if w and w[0] == xi else (x,) + w
                r[k] = idx.get(wr, -1)
                lft[k] = idx.get(wl, -1)
            self.right.append(r)
            self.left.append(lft)
        self.inverse = np.fromiter(
            (idx[tuple(inv(x) for x in reversed(w))] for w in words), dtype=np.int64, count=len(words)
        )
        self._word_tables: dict[tuple[Letter, ...], np.ndarray] = {}
        self._right_tables: dict[tuple[Letter, ...], np.ndarray] = {}

    def __len__(self):
        return len(self.words)

    def size(self, k: int) -> int:
        return self.sizes[k]

    def label(self, letters: Sequence[Letter]) -> int:
        try:
            return self.index[tuple(letters)]
        except KeyError:
            raise BallTooLarge(f"word of length {len(letters)} outside radius {self.radius}") from None

    def forward_codes(self, v: int) -> list[int]:
        """Letters leading from vertex v away from the root, in alphabet order."""
        c = self.last[v]
        banned = self.inverse_code[c] if c >= 0 else -1
        return [x for x in range(len(self.alphabet)) if x != banned]

    def left_table(self, letters: tuple[Letter, ...]) -> np.ndarray:
        """Labels of ``g v`` for the word g, -1 where the product leaves the ball."""
        table = self._word_tables.get(letters)
        if table is not None:
            return table
        table = np.arange(len(self.words), dtype=np.int64)
        # g v = x_1 (x_2 (... (x_k v))): apply the last letter first
        for x in reversed(letters):
            step = self.left[self.letter_code[x]]
            table = np.where(table >= 0, step[np.maximum(table, 0)], -1)
        if len(self._word_tables) < 4096:
            self._word_tables[letters] = table
        return table

    def right_table(self, letters: tuple[Letter, ...]) -> np.ndarray:
        """Labels of ``v g`` for the word g, -1 where the product leaves the ball."""
        table = self._right_tables.get(letters)
        if table is not None:
            return table
        table = np.arange(len(self.words), dtype=np.int64)
        for x in letters:
            step = self.right[self.letter_code[x]]
            table = np.where(table >= 0, step[np.maximum(table, 0)], -1)
        if len(self._right_tables) < 4096:
            self._right_tables[letters] = table
        return table


@lru_cache(maxsize=16)
def tree_index(preset: GroupPreset, radius: int) -> TreeIndex:
    return TreeIndex(preset, radius)
