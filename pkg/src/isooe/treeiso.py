"""Root-fixing isometries of the Cayley tree of F_d, known on a finite ball.

A :class:`TruncatedIsometry` of radius r stores the image label of every
vertex of the radius-r ball (labels from :class:`~isooe.words.TreeIndex`).
Anything that consumes a group element of length k shrinks the certified
radius by k; asking for more raises :class:`RadiusExceeded`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import keyed
from .schreier import CosetAction, act
from .words import GroupPreset, ReducedWord, ball, ball_size, sphere, sphere_size, tree_index

HAAR_SALT = 0x15011

ACTIONS = ("quotient", "diagonal")


class RadiusExceeded(ValueError):
    pass


class InvalidIsometry(AssertionError):
    pass


@dataclass(frozen=True, eq=False)
class TruncatedIsometry:
    preset: GroupPreset
    radius: int
    images: np.ndarray

    def __post_init__(self):
        if self.preset.kind != "free":
            raise ValueError("truncated isometries are implemented for free groups")
        n = ball_size(self.preset, self.radius)
        if self.images.shape != (n,):
            raise ValueError(f"expected {n} images for radius {self.radius}, got {self.images.shape}")
        self.images.flags.writeable = False

    @property
    def tree(self):
        return tree_index(self.preset, self.radius)

    @property
    def map(self) -> dict[ReducedWord, ReducedWord]:
        t = self.tree
        return {
            ReducedWord(t.words[v], self.preset): ReducedWord(t.words[int(fv)], self.preset)
            for v, fv in enumerate(self.images)
        }

    def restrict(self, radius: int) -> "TruncatedIsometry":
        if radius > self.radius:
            raise RadiusExceeded(f"cannot extend radius {self.radius} to {radius}")
        return TruncatedIsometry(self.preset, radius, self.images[: ball_size(self.preset, radius)].copy())

    def agrees_with(self, other: "TruncatedIsometry") -> bool:
        """Equality on the largest ball both isometries certify."""
        n = ball_size(self.preset, min(self.radius, other.radius))
        return self.preset == other.preset and np.array_equal(self.images[:n], other.images[:n])

    def __eq__(self, other):
        return (
            isinstance(other, TruncatedIsometry)
            and self.preset == other.preset
            and self.radius == other.radius
            and np.array_equal(self.images, other.images)
        )

    __hash__ = None


def identity(d: int, radius: int) -> TruncatedIsometry:
    preset = GroupPreset.free(d)
    return TruncatedIsometry(preset, radius, np.arange(ball_size(preset, radius), dtype=np.int64))


def from_map(preset: GroupPreset, radius: int, mapping: dict[ReducedWord, ReducedWord]) -> TruncatedIsometry:
    """Build from an explicit word map covering the whole ball; validated."""
    t = tree_index(preset, radius)
    images = np.full(len(t), -1, dtype=np.int64)
    for u, fu in mapping.items():
        if len(u) > radius or len(fu) > radius:
            raise RadiusExceeded(f"{u} -> {fu} leaves the radius-{radius} ball")
        images[t.label(u.letters)] = t.label(fu.letters)
    if (images < 0).any():
        raise InvalidIsometry("map does not cover the ball")
    f = TruncatedIsometry(preset, radius, images)
    validate(f)
    return f


def validate(f: TruncatedIsometry) -> None:
    """Check root fixed, spheres preserved, bijectivity and adjacency."""
    t = tree_index(f.preset, f.radius)
    img = f.images
    if img[0] != 0:
        raise InvalidIsometry("identity is not fixed")
    if not np.array_equal(t.lengths[img], t.lengths):
        raise InvalidIsometry("spheres are not preserved")
    if len(np.unique(img)) != len(img):
        raise InvalidIsometry("map is not injective")
    # a length-preserving injective map is an isometry iff it sends each
    # vertex's parent to the image's parent
    for x in range(len(t.alphabet)):
        child = t.right[x]
        ok = child >= 0
        ok &= t.lengths[np.maximum(child, 0)] > t.lengths
        parents = np.nonzero(ok)[0]
        kids = child[parents]
        img_parent_of_kids = t.parent[img[kids]]
        if not np.array_equal(img_parent_of_kids, img[parents]):
            raise InvalidIsometry("adjacency is not preserved")


def haar_sample(d: int, radius: int, seed: int) -> TruncatedIsometry:
    """Haar-random element of Iso_1(F_d) restricted to the radius-r ball.

    The root gets a uniform bijection of its 2d directions; every other
    vertex an independent uniform bijection of its 2d-1 forward directions
    onto those of its image.  Choices are keyed by (seed, vertex), so a
    larger radius with the same seed extends a smaller one.
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    preset = GroupPreset.free(d)
    t = tree_index(preset, radius)
    images = np.zeros(len(t), dtype=np.int64)
    keys = [0] * len(t)
    keys[0] = keyed.root_key(seed, HAAR_SALT)
    inner = t.size(radius - 1) if radius > 0 else 0
    right = [r.tolist() for r in t.right]
    for v in range(inner):
        key = keys[v]
        fv = int(images[v])
        src = t.forward_codes(v)
        dst = t.forward_codes(fv)
        perm = keyed.keyed_permutation(key, len(src))
        for k, code in enumerate(src):
            child = right[code][v]
            images[child] = right[dst[perm[k]]][fv]
            keys[child] = keyed.child_key(key, code)
    return TruncatedIsometry(preset, radius, images)


def _check_radius(f: TruncatedIsometry, k: int):
    if k > f.radius:
        raise RadiusExceeded(f"word of length {k} exceeds certified radius {f.radius}")


def apply(f: TruncatedIsometry, w: ReducedWord) -> ReducedWord:
    if w.preset != f.preset:
        raise ValueError(f"word over {w.preset} for an isometry of {f.preset}")
    _check_radius(f, len(w))
    t = f.tree
    return ReducedWord(t.words[int(f.images[t.label(w.letters)])], f.preset)


def invert(f: TruncatedIsometry) -> TruncatedIsometry:
    inv = np.empty_like(f.images)
    inv[f.images] = np.arange(len(f.images))
    return TruncatedIsometry(f.preset, f.radius, inv)


def compose(f: TruncatedIsometry, g: TruncatedIsometry) -> TruncatedIsometry:
    """f o g on the smaller of the two balls."""
    r = min(f.radius, g.radius)
    n = ball_size(f.preset, r)
    return TruncatedIsometry(f.preset, r, f.images[g.images[:n]])


def _sigma_letters(gamma: ReducedWord, f: TruncatedIsometry) -> tuple:
    t = f.tree
    gi = ~gamma
    image = t.words[int(f.images[t.label(gi.letters)])]
    return (~ReducedWord(image, f.preset)).letters


def sigma(gamma: ReducedWord, f: TruncatedIsometry) -> ReducedWord:
    """The cocycle f(gamma^-1)^-1; same length as gamma."""
    if gamma.preset != f.preset:
        raise ValueError(f"word over {gamma.preset} for an isometry of {f.preset}")
    _check_radius(f, len(gamma))
    return ReducedWord(_sigma_letters(gamma, f), f.preset)


def sigma_labels(f: TruncatedIsometry) -> np.ndarray:
    """Label of sigma(gamma, f) for every label gamma of the ball."""
    t = f.tree
    return t.inverse[f.images[t.inverse]]


def gamma_dot(gamma: ReducedWord, f: TruncatedIsometry) -> TruncatedIsometry:
    """(gamma . f)(delta) = sigma(gamma, f) f(gamma^-1 delta), radius r - |gamma|."""
    _check_radius(f, len(gamma))
    if not gamma.letters:
        return f
    t = f.tree
    r = f.radius - len(gamma)
    n = t.size(r)
    shift_in = t.left_table((~gamma).letters)[:n]
    moved = f.images[shift_in]
    out = t.left_table(_sigma_letters(gamma, f))[moved]
    if (shift_in < 0).any() or (out < 0).any():
        raise AssertionError("left multiplication left the ball")
    return TruncatedIsometry(f.preset, r, out)


def cocycle_identity_check(gamma: ReducedWord, delta: ReducedWord, f: TruncatedIsometry) -> bool:
    """sigma(gamma delta, f) == sigma(gamma, delta . f) sigma(delta, f)."""
    _check_radius(f, len(gamma) + len(delta))
    lhs = sigma(gamma * delta, f)
    rhs = sigma(gamma, gamma_dot(delta, f)) * sigma(delta, f)
    return lhs == rhs


def cocycle_defects(f: TruncatedIsometry, max_len: int) -> list[tuple[ReducedWord, ReducedWord]]:
    """All (gamma, delta) with |gamma|, |delta| <= max_len and |gamma| + |delta| <= radius
    where the cocycle identity fails; vectorised over gamma."""
    t = f.tree
    r = f.radius
    sig = sigma_labels(f)
    bad = []
    for delta in range(t.size(min(max_len, r))):
        dl = t.words[delta]
        reach = min(max_len, r - len(dl))
        gammas = np.arange(t.size(reach))
        df = gamma_dot(ReducedWord(dl, f.preset), f)
        lhs = sig[t.right_table(dl)[gammas]]
        rhs = t.right_table(t.words[int(sig[delta])])[sigma_labels(df)[gammas]]
        for g in np.nonzero(lhs != rhs)[0]:
            bad.append((ReducedWord(t.words[int(g)], f.preset), ReducedWord(dl, f.preset)))
    return bad


@dataclass(frozen=True, eq=False)
class QuotientPoint:
    iso: TruncatedIsometry
    coset: int

    def agrees_with(self, other: "QuotientPoint") -> bool:
        return self.coset == other.coset and self.iso.agrees_with(other.iso)

    def __eq__(self, other):
        return isinstance(other, QuotientPoint) and self.coset == other.coset and self.iso == other.iso

    __hash__ = None


def _check_point(p: QuotientPoint, action: CosetAction):
    if not 0 <= p.coset < action.n:
        raise IndexError(f"coset {p.coset} out of range for {action.n} cosets")
    if action.rank != p.iso.preset.rank:
        raise ValueError("isometry and coset action have different ranks")


def quotient_act(gamma: ReducedWord, p: QuotientPoint, action: CosetAction) -> QuotientPoint:
    """gamma (f, q) = (gamma . f, sigma(gamma, f) q)."""
    _check_point(p, action)
    s = sigma(gamma, p.iso)
    return QuotientPoint(gamma_dot(gamma, p.iso), act(action, s, p.coset))


def diagonal_act(gamma: ReducedWord, p: QuotientPoint, action: CosetAction) -> QuotientPoint:
    """gamma (f, q) = (gamma . f, gamma q)."""
    _check_point(p, action)
    return QuotientPoint(gamma_dot(gamma, p.iso), act(action, gamma, p.coset))


def psi(p: QuotientPoint) -> QuotientPoint:
    return QuotientPoint(invert(p.iso), p.coset)


def _mover(kind: str):
    if kind == "quotient":
        return quotient_act
    if kind == "diagonal":
        return diagonal_act
    raise ValueError(f"action must be one of {ACTIONS}, got {kind!r}")


def orbit_ball(p: QuotientPoint, action: CosetAction, kind: str, max_len: int, margin: bool = True):
    """Images ``w p`` for every reduced w with |w| <= max_len, shortest first.

    With ``margin`` the point must certify radius 2*max_len + 2 so that
    comparisons after max_len moves still see a ball of radius >= max_len + 2.
    """
    if margin and p.iso.radius < 2 * max_len + 2:
        raise RadiusExceeded(
            f"orbit search to length {max_len} needs radius >= {2 * max_len + 2}, have {p.iso.radius}"
        )
    _check_radius(p.iso, max_len)
    move = _mover(kind)
    preset = p.iso.preset
    t = tree_index(preset, max_len)
    return [(len(w), move(ReducedWord(w, preset), p, action)) for w in t.words]


def orbit_distances(p: QuotientPoint, targets: Iterable[QuotientPoint], action: CosetAction, kind: str,
                    max_len: int, margin: bool = True) -> list[int | None]:
    """Graphing distance from p to each target, None past max_len."""
    reached = orbit_ball(p, action, kind, max_len, margin)
    out = []
    for target in targets:
        found = None
        for k, q in reached:
            if q.agrees_with(target):
                found = k
                break
        out.append(found)
    return out


def orbit_distance(p: QuotientPoint, target: QuotientPoint, action: CosetAction, kind: str,
                   max_len: int, margin: bool = True) -> int | None:
    return orbit_distances(p, [target], action, kind, max_len, margin)[0]


def verify_invariants(d: int, radius: int, samples: int, seed: int, pair_len: int | None = None) -> dict:
    """Invariant suite over Haar samples; stops at the first counterexample."""
    preset = GroupPreset.free(d)
    if pair_len is None:
        pair_len = min(3, radius // 2)
    short = ball(preset, pair_len)
    checks = {"validated": 0, "sigmaLength": 0, "sigmaInjective": 0, "roundTrip": 0,
              "cocycleIdentity": 0, "actionProperty": 0}

    def fail(kind, sample_seed, **words):
        return {"ok": False, "checks": checks, "counterexample": {
            "check": kind, "sampleSeed": int(sample_seed), **{k: str(v) for k, v in words.items()}}}

    for s in keyed.derive_seeds(seed, samples):
        f = haar_sample(d, radius, int(s))
        try:
            validate(f)
        except InvalidIsometry as exc:
            return fail("validate", s, error=exc)
        checks["validated"] += 1
        t = f.tree
        sig = sigma_labels(f)
        wrong = np.nonzero(t.lengths[sig] != t.lengths)[0]
        if len(wrong):
            return fail("sigmaLength", s, gamma=ReducedWord(t.words[int(wrong[0])], preset))
        checks["sigmaLength"] += len(sig)
        # length-preserving, so injective on every sphere iff injective on the ball
        if len(np.unique(sig)) != len(sig):
            return fail("sigmaInjective", s)
        checks["sigmaInjective"] += radius + 1
        if not (compose(f, invert(f)) == identity(d, radius) and invert(invert(f)) == f):
            return fail("roundTrip", s)
        checks["roundTrip"] += 1
        dots = {g: gamma_dot(g, f) for g in short}
        for g, gf in dots.items():
            try:
                validate(gf)
            except InvalidIsometry as exc:
                return fail("validate", s, gamma=g, error=exc)
        defects = cocycle_defects(f, pair_len)
        if defects:
            return fail("cocycleIdentity", s, gamma=defects[0][0], delta=defects[0][1])
        checks["cocycleIdentity"] += sum(1 for g in short for h in short if len(g) + len(h) <= radius)
        for g in short:
            for h in short:
                if len(g) + len(h) > radius or len(g) > 2 or len(h) > 2:
                    continue
                if not gamma_dot(g * h, f).agrees_with(gamma_dot(g, dots[h])):
                    return fail("actionProperty", s, gamma=g, delta=h)
                checks["actionProperty"] += 1
    return {"ok": True, "checks": checks, "counterexample": None}


def verify_construction(action: CosetAction, radius: int, max_len: int, samples: int, seed: int) -> dict:
    """Intertwining of psi and preservation of graphing distances, on samples."""
    action.require_transitive()
    d = action.rank
    preset = GroupPreset.free(d)
    words = ball(preset, max_len)
    rng = np.random.default_rng(seed)
    checks = {"intertwining": 0, "distances": 0}
    histogram: dict[int, int] = {}

    def fail(kind, sample_seed, coset, **extra):
        return {"ok": False, "checks": checks, "distanceHistogram": histogram, "counterexample": {
            "check": kind, "sampleSeed": int(sample_seed), "coset": int(coset), "action": action.to_json(),
            **{k: str(v) for k, v in extra.items()}}}

    for s in keyed.derive_seeds(seed, samples):
        q = int(rng.integers(action.n))
        p = QuotientPoint(haar_sample(d, radius, int(s)), q)
        pp = psi(p)
        for g in words:
            lhs = psi(quotient_act(g, p, action))
            rhs = diagonal_act(sigma(g, p.iso), pp, action)
            if lhs != rhs:
                return fail("intertwining", s, q, gamma=g)
            checks["intertwining"] += 1
        targets = [quotient_act(w, p, action) for w in words]
        d_quot = orbit_distances(p, targets, action, "quotient", max_len)
        d_diag = orbit_distances(pp, [psi(t) for t in targets], action, "diagonal", max_len)
        for w, a, b in zip(words, d_quot, d_diag):
            if a != b or a is None or a > len(w):
                return fail("distances", s, q, word=w, quotientDistance=a, diagonalDistance=b)
            histogram[a] = histogram.get(a, 0) + 1
            checks["distances"] += 1
    return {"ok": True, "checks": checks, "distanceHistogram": {str(k): v for k, v in sorted(histogram.items())},
            "counterexample": None}
