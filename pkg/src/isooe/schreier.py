"""Finite-index subgroups of F_d as transitive permutation actions on cosets.

A :class:`CosetAction` lists, for each free generator, the images of the
points ``0..n-1``.  Point 0 is the base coset, so the encoded subgroup is its
stabilizer.  Words act on the left: ``act(uv, p) == act(u, act(v, p))``.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import asdict, dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .words import GroupPreset, ReducedWord

DENSE_LIMIT = 2000
SHIFT = 1e-3


class NotTransitive(ValueError):
    pass


class EquivalenceViolation(AssertionError):
    """The parity criteria for bipartite Schreier graphs disagree."""


@dataclass(frozen=True, eq=False)
class CosetAction:
    n: int
    gens: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("an action needs at least one point")
        if not self.gens:
            raise ValueError("need at least one generator")
        gens = tuple(tuple(int(x) for x in g) for g in self.gens)
        for i, g in enumerate(gens):
            if len(g) != self.n or sorted(g) != list(range(self.n)):
                raise ValueError(f"generator {i} is not a permutation of 0..{self.n - 1}: {g}")
        object.__setattr__(self, "gens", gens)
        perms = np.asarray(gens, dtype=np.int64).reshape(len(gens), self.n)
        invs = np.empty_like(perms)
        for i in range(len(gens)):
            invs[i, perms[i]] = np.arange(self.n)
        perms.flags.writeable = False
        invs.flags.writeable = False
        object.__setattr__(self, "_perms", perms)
        object.__setattr__(self, "_invs", invs)

    @property
    def rank(self) -> int:
        return len(self.gens)

    @property
    def preset(self) -> GroupPreset:
        return GroupPreset.free(self.rank)

    def __eq__(self, other):
        return isinstance(other, CosetAction) and self.n == other.n and self.gens == other.gens

    def __hash__(self):
        return hash((self.n, self.gens))

    def letter_perm(self, i: int, sign: int) -> np.ndarray:
        return self._perms[i] if sign > 0 else self._invs[i]

    def letter_perms(self) -> list[np.ndarray]:
        """Permutations of the 2d letters, in the preset's alphabet order."""
        return [self.letter_perm(i, s) for i, s in self.preset.letters]

    @property
    def transitive(self) -> bool:
        return len(_orbit(self.letter_perms(), 0)) == self.n

    def require_transitive(self):
        if not self.transitive:
            raise NotTransitive(f"action on {self.n} points is not transitive")

    @classmethod
    def from_json(cls, data) -> "CosetAction":
        if isinstance(data, str):
            data = json.loads(data)
        n = int(data["n"])
        return cls(n, tuple(tuple(g) for g in data["gens"]))

    def to_json(self) -> dict:
        return {"n": self.n, "gens": [list(g) for g in self.gens]}


def _orbit(perms: Sequence[np.ndarray], start: int) -> list[int]:
    seen = {start}
    queue = deque([start])
    while queue:
        p = queue.popleft()
        for g in perms:
            q = int(g[p])
            if q not in seen:
                seen.add(q)
                queue.append(q)
    return sorted(seen)


def act(action: CosetAction, w: ReducedWord, p: int) -> int:
    if w.preset != action.preset:
        raise ValueError(f"word over {w.preset} cannot act through an action of {action.preset}")
    if not 0 <= p < action.n:
        raise IndexError(f"point {p} out of range for {action.n} cosets")
    for i, s in reversed(w.letters):
        p = int(action.letter_perm(i, s)[p])
    return p


def word_permutation(action: CosetAction, w: ReducedWord) -> np.ndarray:
    """Images of all points under w, as an index array."""
    out = np.arange(action.n)
    for i, s in reversed(w.letters):
        out = action.letter_perm(i, s)[out]
    return out


def five_point_action() -> CosetAction:
    """F_2 acting on five points: a by (1 2 3 4 5), b by (1 3 5 2 4), 0-indexed."""
    return CosetAction(5, ((1, 2, 3, 4, 0), (2, 3, 4, 0, 1)))


def swap_action() -> CosetAction:
    return CosetAction(2, ((1, 0), (1, 0)))


def cycle_action(m: int, exponents: Sequence[int]) -> CosetAction:
    """Translation action of F_d on Z/m, generator i adding exponents[i]."""
    return CosetAction(m, tuple(tuple((p + e) % m for p in range(m)) for e in exponents))


def is_bipartite(action: CosetAction) -> bool:
    """BFS 2-colouring of the Schreier graph; a loop rules it out."""
    action.require_transitive()
    colour = [-1] * action.n
    colour[0] = 0
    queue = deque([0])
    perms = action.letter_perms()
    while queue:
        p = queue.popleft()
        for g in perms:
            q = int(g[p])
            if colour[q] < 0:
                colour[q] = 1 - colour[p]
                queue.append(q)
            elif colour[q] == colour[p]:
                return False
    return True


def bipartition(action: CosetAction) -> tuple[list[int], list[int]] | None:
    """Parts (U, V) with 0 in U if the Schreier graph is bipartite, else None."""
    if not is_bipartite(action):
        return None
    side = _parity_layers(action)
    return ([p for p in range(action.n) if side[p] == 0], [p for p in range(action.n) if side[p] == 1])


def _parity_layers(action: CosetAction) -> list[int]:
    dist = [-1] * action.n
    dist[0] = 0
    queue = deque([0])
    perms = action.letter_perms()
    while queue:
        p = queue.popleft()
        for g in perms:
            q = int(g[p])
            if dist[q] < 0:
                dist[q] = dist[p] + 1
                queue.append(q)
    return [d % 2 for d in dist]


def _even_orbit(action: CosetAction, start: int) -> list[int]:
    perms = action.letter_perms()
    pairs = [s[t] for s in perms for t in perms]
    return _orbit(pairs, start)


def even_orbit_size(action: CosetAction, start: int = 0) -> int:
    """Size of the orbit of ``start`` under the words of even length."""
    action.require_transitive()
    return len(_even_orbit(action, start))


def even_transitive(action: CosetAction) -> bool:
    return even_orbit_size(action) == action.n


def odd_stabilizer_reachable(action: CosetAction) -> bool:
    """Whether some odd-length word fixes the base point.

    Search on (point, parity of word length) pairs; independent of the
    2-colouring and of the even-orbit computation.
    """
    action.require_transitive()
    perms = action.letter_perms()
    seen = {(0, 0)}
    queue = deque([(0, 0)])
    while queue:
        p, eps = queue.popleft()
        for g in perms:
            state = (int(g[p]), 1 - eps)
            if state == (0, 1):
                return True
            if state not in seen:
                seen.add(state)
                queue.append(state)
    return False


def is_normal(action: CosetAction) -> bool:
    """Whether the stabilizer of 0 is normal, i.e. fixes every point.

    Tree paths ``T_p`` (BFS spanning tree from 0) give one Schreier generator
    ``T_q^{-1} x T_p`` of Stab(0) per edge ``p -x-> q``.  It is the identity
    permutation iff ``x o T_p == T_q`` pointwise.
    """
    action.require_transitive()
    n = action.n
    perms = action.letter_perms()
    path = [None] * n
    path[0] = np.arange(n)
    order = [0]
    queue = deque([0])
    while queue:
        p = queue.popleft()
        for g in perms:
            q = int(g[p])
            if path[q] is None:
                path[q] = g[path[p]]
                order.append(q)
                queue.append(q)
    for p in order:
        for g in perms:
            q = int(g[p])
            if not np.array_equal(g[path[p]], path[q]):
                return False
    return True


def transition_matrix(action: CosetAction) -> np.ndarray:
    """Normalised adjacency (1/2d) sum over letters of the permutation matrices."""
    n = action.n
    m = np.zeros((n, n))
    rows = np.arange(n)
    for g in action.letter_perms():
        np.add.at(m, (g, rows), 1.0)
    return m / (2 * action.rank)


def _sparse_walk(action: CosetAction):
    from scipy import sparse

    n = action.n
    rows = np.arange(n)
    mat = sparse.csr_matrix((n, n))
    for g in action.letter_perms():
        mat = mat + sparse.csr_matrix((np.ones(n), (g, rows)), shape=(n, n))
    return mat / (2 * action.rank)


def _sparse_extremes(action: CosetAction, tol: float, max_iter: int) -> tuple[float, float]:
    """(second largest, smallest) eigenvalue of the walk operator for large n.

    Lanczos first, which is quick when the gap is large; graphs with a tiny
    gap stall it and go through shift-invert instead, where sparse LU is
    cheap because such graphs are long and thin.
    """
    from scipy.sparse.linalg import ArpackNoConvergence, eigsh

    mat = _sparse_walk(action)
    n = action.n
    v0 = 1.0 + np.arange(n) % 7  # deterministic start, not orthogonal to anything useful
    try:
        top = eigsh(mat, k=2, which="LA", tol=tol, maxiter=max_iter, v0=v0, return_eigenvectors=False)
        low = eigsh(mat, k=1, which="SA", tol=tol, maxiter=max_iter, v0=v0, return_eigenvectors=False)
    except ArpackNoConvergence:
        mat = mat.tocsc()
        top = eigsh(mat, k=2, sigma=1.0 + SHIFT, which="LM", tol=tol, v0=v0, return_eigenvectors=False)
        low = eigsh(mat, k=1, sigma=-1.0 - SHIFT, which="LM", tol=tol, v0=v0, return_eigenvectors=False)
    return float(np.sort(top)[0]), float(low[0])


def spectral_gap(action: CosetAction, tol: float = 1e-12, max_iter: int = 2000) -> tuple[float, float]:
    """(second largest eigenvalue, largest non-top modulus) of the walk operator."""
    action.require_transitive()
    n = action.n
    if n < 2:
        raise ValueError("spectral gap needs at least two points")
    if n <= DENSE_LIMIT:
        eig = np.linalg.eigvalsh(transition_matrix(action))
        rest = eig[:-1]
        return float(rest[-1]), float(np.max(np.abs(rest)))
    lam2, lam_min = _sparse_extremes(action, tol, max_iter)
    return lam2, max(abs(lam2), abs(lam_min))


def sphere_distribution(action: CosetAction, length: int, start: int = 0) -> np.ndarray:
    """Law of ``act(w, start)`` for w uniform on the sphere of radius ``length``.

    Transfer matrix over (point, leftmost letter): a reduced word grows on the
    left by any letter except the inverse of its current leftmost one, so
    mass splits evenly over the 2d-1 continuations.
    """
    n = action.n
    perms = action.letter_perms()
    q = len(perms)
    if length == 0:
        out = np.zeros(n)
        out[start] = 1.0
        return out
    inv = [action.preset.letters.index(action.preset.inverse_letter(x)) for x in action.preset.letters]
    state = np.zeros((q, n))
    for c, g in enumerate(perms):
        state[c, g[start]] += 1.0 / q
    for _ in range(length - 1):
        state = _nonbacktracking_push(state, perms, inv)
    return state.sum(axis=0)


def _nonbacktracking_push(state: np.ndarray, perms, inv) -> np.ndarray:
    q, n = state.shape
    new = np.zeros_like(state)
    for c, g in enumerate(perms):
        # mass arriving via letter c comes from every leftmost letter except c^{-1}
        src = state.sum(axis=0) - state[inv[c]]
        np.add.at(new[c], g, src / (q - 1))
    return new


def sphere_distribution_series(action: CosetAction, max_length: int, start: int = 0) -> list[np.ndarray]:
    """Sphere laws for lengths 0..max_length sharing one transfer-matrix run."""
    n = action.n
    perms = action.letter_perms()
    q = len(perms)
    inv = [action.preset.letters.index(action.preset.inverse_letter(x)) for x in action.preset.letters]
    out = [sphere_distribution(action, 0, start)]
    if max_length == 0:
        return out
    state = np.zeros((q, n))
    for c, g in enumerate(perms):
        state[c, g[start]] += 1.0 / q
    out.append(state.sum(axis=0))
    for _ in range(max_length - 1):
        state = _nonbacktracking_push(state, perms, inv)
        out.append(state.sum(axis=0))
    return out


def total_variation_from_uniform(dist: np.ndarray) -> float:
    return 0.5 * float(np.abs(dist - 1.0 / len(dist)).sum())


@dataclass
class SchreierReport:
    transitive: bool
    index: int
    bipartite: bool
    evenTransitive: bool
    oddStabilizerWordFound: bool
    evenOrbitSize: int
    normal: bool
    lambda2ByValue: float | None
    lambda2ByModulus: float | None
    spectralGap: float | None

    def to_json(self) -> dict:
        return asdict(self)


def lemma_even_crosscheck(action: CosetAction, spectral: bool = True) -> SchreierReport:
    """Run the three parity predicates and the orbit-index statement together.

    Raises :class:`EquivalenceViolation` if they disagree; that would be a bug
    here, not a counterexample.
    """
    action.require_transitive()
    n = action.n
    bip = is_bipartite(action)
    ev = even_transitive(action)
    odd = odd_stabilizer_reachable(action)
    size = even_orbit_size(action)
    if not (bip == (not ev) == (not odd)):
        raise EquivalenceViolation(
            f"bipartite={bip} evenTransitive={ev} oddStabilizer={odd} for {action.to_json()}"
        )
    expected = n // 2 if bip else n
    if bip and n % 2:
        raise EquivalenceViolation(f"bipartite action on an odd number of points: {action.to_json()}")
    # index statement at every base coset: the even subgroup's orbits all have the same size
    for p in range(n):
        if len(_even_orbit(action, p)) != expected:
            raise EquivalenceViolation(
                f"even orbit of point {p} has size {len(_even_orbit(action, p))}, expected {expected}: "
                f"{action.to_json()}"
            )
    lam = mod = gap = None
    if spectral and n >= 2:
        lam, mod = spectral_gap(action)
        gap = 1.0 - lam
    return SchreierReport(
        transitive=True,
        index=n,
        bipartite=bip,
        evenTransitive=ev,
        oddStabilizerWordFound=odd,
        evenOrbitSize=size,
        normal=is_normal(action),
        lambda2ByValue=lam,
        lambda2ByModulus=mod,
        spectralGap=gap,
    )


def random_transitive_action(n: int, d: int, rng: np.random.Generator, max_tries: int = 100_000) -> CosetAction:
    """Rejection sampling: d uniform permutations, kept once they act transitively."""
    for _ in range(max_tries):
        gens = tuple(tuple(int(x) for x in rng.permutation(n)) for _ in range(d))
        action = CosetAction(n, gens)
        if action.transitive:
            return action
    raise RuntimeError(f"no transitive action on {n} points after {max_tries} draws")


def bruteforce_lemma(max_points: int, trials: int, seed: int, d: int = 2) -> dict:
    """Cross-check the parity criteria on random transitive actions.

    Returns a summary; the first violation (if any) is reported with the
    offending action and trial number.
    """
    rng = np.random.default_rng(seed)
    counts = {"bipartite": 0, "nonBipartite": 0}
    violation = None
    for t in range(trials):
        n = int(rng.integers(1, max_points + 1))
        action = random_transitive_action(n, d, rng)
        try:
            report = lemma_even_crosscheck(action, spectral=False)
        except EquivalenceViolation as exc:
            violation = {"trial": t, "seed": seed, "action": action.to_json(), "error": str(exc)}
            break
        counts["bipartite" if report.bipartite else "nonBipartite"] += 1
    return {"trials": trials, "maxPoints": max_points, "rank": d, "seed": seed,
            "violations": 0 if violation is None else 1, "counterexample": violation, **counts}


def tower(base: int, step: int, depth: int, exponents: Sequence[int], kind: str = "cycle") -> list[CosetAction]:
    """Cyclic quotients Z/(base * step**j), j < depth, generator i acting by +exponents[i].

    Level j is the kernel of F_d -> Z/(base * step**j); kernels are nested
    because each modulus divides the next.
    """
    if kind != "cycle":
        raise ValueError(f"unknown tower kind {kind!r}")
    if base < 1 or step < 1 or depth < 1:
        raise ValueError("base, step and depth must be positive")
    out = []
    for j in range(depth):
        m = base * step**j
        if reduce(math.gcd, [e % m for e in exponents], m) != 1:
            raise ValueError(f"exponents {list(exponents)} do not generate Z/{m}")
        out.append(cycle_action(m, exponents))
    return out
