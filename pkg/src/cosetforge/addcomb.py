"""Additive-combinatorics primitives on finite groups.

Sets are collections of element indices of a :class:`FiniteGroup`; the
group operation is written multiplicatively throughout (for cyclic groups
``a * b`` is addition mod ``n`` and ``a^-1`` is negation).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import (DegenerateMeasure, EmptySet, EnumerationTooLarge, InclusionViolation,
                     NoPopularPattern, NotSymmetric, ThresholdUnmet)
from .functions import GroupFunction, MeasureOnG, round_almost_integer, support
from .groups import FiniteGroup

ENUMERATION_LIMIT = 10**7


def _as_array(G: FiniteGroup, S: Iterable[int], name: str = "set") -> np.ndarray:
    arr = np.unique(np.fromiter((int(x) for x in S), dtype=np.int64))
    if arr.size == 0:
        raise EmptySet(f"{name} is empty")
    if arr[0] < 0 or arr[-1] >= G.order:
        raise ValueError(f"{name} contains elements outside 0..{G.order - 1}")
    return arr


def _frozen(arr) -> frozenset[int]:
    return frozenset(int(x) for x in np.asarray(arr).ravel())


def product_set(G: FiniteGroup, A: Iterable[int], B: Iterable[int]) -> frozenset[int]:
    """``A * B = {ab}``."""
    a, b = _as_array(G, A, "A"), _as_array(G, B, "B")
    return _frozen(np.unique(G.table[np.ix_(a, b)]))


def inverse_set(G: FiniteGroup, A: Iterable[int]) -> frozenset[int]:
    return _frozen(G.inverses[_as_array(G, A, "A")])


def doubling_ratio(G: FiniteGroup, A: Iterable[int]) -> Fraction:
    """``|A A^-1| / |A|``."""
    a = _as_array(G, A, "A")
    return Fraction(len(np.unique(G.div_table[np.ix_(a, a)])), a.size)


def is_neighbourhood(G: FiniteGroup, S: Iterable[int]) -> bool:
    """Symmetric and containing the identity."""
    s = _frozen(S)
    return G.identity in s and inverse_set(G, s) == s


# ---------------------------------------------------------------------------
# eta-closed quadruples

@dataclass(frozen=True)
class EtaClosedWitness:
    Z: frozenset[int]
    X: frozenset[int]
    Zplus: frozenset[int]
    Zminus: frozenset[int]
    eta_achieved: Fraction

    def is_eta_closed(self, eta) -> bool:
        return self.eta_achieved <= Fraction(eta)


def check_eta_closed(G: FiniteGroup, Z, X, Zplus, Zminus, *, neighbourhood: bool = False) -> EtaClosedWitness:
    """Verify ``Z^- X ⊆ Z`` and ``Z X^-1 ⊆ Z^+`` and return ``|Z^+ \\ Z^-| / |Z|``.

    With ``neighbourhood=True`` ``X`` must also be symmetric and contain the identity.
    """
    sets = {}
    for name, S in (("Z", Z), ("X", X), ("Zplus", Zplus), ("Zminus", Zminus)):
        sets[name] = _as_array(G, S, name)
    z, x, zp, zm = sets["Z"], sets["X"], sets["Zplus"], sets["Zminus"]
    if neighbourhood and not is_neighbourhood(G, x):
        bad = [int(e) for e in x if G.inverses[e] not in set(x.tolist())]
        raise NotSymmetric("X is not a symmetric neighbourhood of the identity",
                           missing_identity=G.identity not in set(x.tolist()),
                           unpaired=bad[:5])
    z_mask = np.zeros(G.order, dtype=bool)
    z_mask[z] = True
    prod = G.table[np.ix_(zm, x)]
    bad = np.argwhere(~z_mask[prod])
    if bad.size:
        i, j = bad[0]
        raise InclusionViolation("Z^- X is not contained in Z", which="Zminus*X",
                                 pair=[int(zm[i]), int(x[j])], product=int(prod[i, j]))
    zp_mask = np.zeros(G.order, dtype=bool)
    zp_mask[zp] = True
    quot = G.div_table[np.ix_(z, x)]
    bad = np.argwhere(~zp_mask[quot])
    if bad.size:
        i, j = bad[0]
        raise InclusionViolation("Z X^-1 is not contained in Z^+", which="Z*X^-1",
                                 pair=[int(z[i]), int(x[j])], product=int(quot[i, j]))
    eta = Fraction(len(np.setdiff1d(zp, zm)), z.size)
    return EtaClosedWitness(_frozen(z), _frozen(x), _frozen(zp), _frozen(zm), eta)


# ---------------------------------------------------------------------------
# Ruzsa covering

@dataclass(frozen=True)
class CoverResult:
    T: tuple[int, ...]
    bound: Fraction                 # |W X| / |W|
    covered: bool
    size_ok: bool

    @property
    def ok(self) -> bool:
        return self.covered and self.size_ok


def ruzsa_cover(G: FiniteGroup, X: Iterable[int], W: Iterable[int]) -> CoverResult:
    """Cover ``X`` by sets ``W^-1 W t`` with ``t`` in a maximal family of disjoint translates ``W t``.

    Disjointness gives ``|T| |W| <= |W X|``; maximality puts every ``x`` in
    some ``W^-1 W t``.  Both facts are re-checked by enumeration.
    """
    x, w = _as_array(G, X, "X"), _as_array(G, W, "W")
    used = np.zeros(G.order, dtype=bool)
    T = []
    for t in x:
        Wt = G.table[w, t]
        if not used[Wt].any():
            used[Wt] = True
            T.append(int(t))
    bound = Fraction(len(np.unique(G.table[np.ix_(w, x)])), w.size)
    # W^-1 W as a set, then right-translate by each t
    wiw = np.unique(G.table[np.ix_(G.inverses[w], w)])
    cover = np.zeros(G.order, dtype=bool)
    for t in T:
        cover[G.table[wiw, t]] = True
    return CoverResult(tuple(T), bound, bool(cover[x].all()), len(T) <= bound)


# ---------------------------------------------------------------------------
# index vectors

def _index_vectors(k: int, t: int, chunk: int = 1 << 16):
    total = k ** t
    if total > ENUMERATION_LIMIT:
        raise EnumerationTooLarge(f"[k]^t has {total} elements (limit {ENUMERATION_LIMIT})",
                                  k=k, t=t, size=total)
    powers = k ** np.arange(t - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        yield (codes[:, None] // powers) % k


def _fibre_sizes(vecs: np.ndarray, k: int) -> np.ndarray:
    counts = np.zeros((vecs.shape[0], k), dtype=np.int64)
    rows = np.repeat(np.arange(vecs.shape[0]), vecs.shape[1])
    np.add.at(counts, (rows, vecs.ravel()), 1)
    return counts


def is_trivial_index(i: Sequence[int]) -> bool:
    """At most one value occurs exactly once in ``i``."""
    counts: dict[int, int] = {}
    for v in i:
        counts[v] = counts.get(v, 0) + 1
    return sum(1 for c in counts.values() if c == 1) <= 1


def trivial_indices(k: int, t: int) -> tuple[int, int]:
    """``(|T_{k,t}|, |N_{k,t}|)`` by enumeration of ``[k]^t``."""
    trivial = 0
    for vecs in _index_vectors(k, t):
        unique = (_fibre_sizes(vecs, k) == 1).sum(axis=1)
        trivial += int((unique <= 1).sum())
    return trivial, k ** t - trivial


def r_multi_count(k: int, r: int) -> int:
    """Number of maps ``[2r] -> [k]`` none of whose non-empty fibres is a singleton."""
    count = 0
    for vecs in _index_vectors(k, 2 * r):
        count += int(((_fibre_sizes(vecs, k) == 1).sum(axis=1) == 0).sum())
    return count


def surjection_check(k: int, r: int) -> dict:
    """Counts behind ``|T_{k,2r+1}| <= (2r+1) k |R_{k,r}|``."""
    t = 2 * r + 1
    T, N = trivial_indices(k, t)
    R = r_multi_count(k, r)
    return {"k": k, "r": r, "T": T, "N": N, "R": R, "bound": t * k * R,
            "partition_ok": T + N == k ** t, "inequality_ok": T <= t * k * R}


# ---------------------------------------------------------------------------
# arithmetic connectivity

@dataclass(frozen=True)
class Pattern:
    r: int
    i: tuple[int, ...]          # 0-based coordinates into x
    sigma: tuple[int, ...]

    def evaluate(self, G: FiniteGroup, x: Sequence[int]) -> int:
        out = G.identity
        for idx, s in zip(self.i, self.sigma):
            e = x[idx] if s == 1 else G.inverses[x[idx]]
            out = int(G.table[out, e])
        return out


def patterns(k: int, l: int) -> Iterable[Pattern]:
    """Non-trivial ``(r, i, sigma)`` in search order: ``r`` ascending, then ``i``, then ``sigma``."""
    for r in range(1, l + 1):
        t = 2 * r + 1
        for i in itertools.product(range(k), repeat=t):
            if is_trivial_index(i):
                continue
            for sigma in itertools.product((1, -1), repeat=t):
                yield Pattern(r, i, sigma)


def _pattern_products(G: FiniteGroup, xs: np.ndarray, pat: Pattern) -> np.ndarray:
    out = np.full(xs.shape[0], G.identity, dtype=np.int64)
    for idx, s in zip(pat.i, pat.sigma):
        col = xs[:, idx]
        out = G.table[out, col if s == 1 else G.inverses[col]]
    return out


@dataclass(frozen=True, eq=False)
class ConnectivityCertificate:
    k: int
    l: int
    verdict: str                                   # connected | counterexample | inconclusive
    counterexample: tuple[int, ...] | None
    tuples: np.ndarray = field(repr=False)         # the x's examined, one per row
    witness_ids: np.ndarray = field(repr=False)    # index into ``patterns`` or -1
    patterns: tuple[Pattern, ...] = field(repr=False)
    exhaustive: bool = True

    def witness(self, row: int) -> Pattern | None:
        j = int(self.witness_ids[row])
        return None if j < 0 else self.patterns[j]

    def recheck(self, G: FiniteGroup, A: Iterable[int]) -> bool:
        """Every recorded witness is non-trivial and lands in ``A``."""
        a = set(int(v) for v in A)
        for row, j in enumerate(self.witness_ids):
            if j < 0:
                continue
            pat = self.patterns[int(j)]
            if is_trivial_index(pat.i) or pat.evaluate(G, self.tuples[row]) not in a:
                return False
        return True

    def to_dict(self) -> dict:
        return {"k": self.k, "l": self.l, "verdict": self.verdict,
                "counterexample": list(self.counterexample) if self.counterexample else None,
                "examined": int(self.tuples.shape[0]), "exhaustive": self.exhaustive}


def is_arithmetically_connected(G: FiniteGroup, A: Iterable[int], k: int, l: int,
                                mode: str | tuple = "exhaustive",
                                rng: np.random.Generator | None = None) -> ConnectivityCertificate:
    """Search every ``x`` in ``A^k`` (or a sample) for a non-trivial signed product landing in ``A``.

    ``mode`` is ``"exhaustive"`` or ``("samples", m)``.  A sampled ``x`` with
    no witness is still a definitive counterexample, since all patterns are
    tried for it; otherwise a sampled run is inconclusive.
    """
    a = _as_array(G, A, "A")
    in_a = np.zeros(G.order, dtype=bool)
    in_a[a] = True
    if mode == "exhaustive":
        size = a.size ** k
        if size > ENUMERATION_LIMIT:
            raise EnumerationTooLarge(f"|A|^k = {size} exceeds {ENUMERATION_LIMIT}; use samples mode",
                                      size=size)
        grids = np.indices((a.size,) * k).reshape(k, -1).T
        xs = a[grids]
        exhaustive = True
    else:
        _, m = mode
        rng = rng if rng is not None else np.random.default_rng(0)
        xs = a[rng.integers(a.size, size=(int(m), k))]
        exhaustive = False
    witness = np.full(xs.shape[0], -1, dtype=np.int64)
    pats: list[Pattern] = []
    open_rows = np.arange(xs.shape[0])
    for pat in patterns(k, l):
        if open_rows.size == 0:
            break
        hit = in_a[_pattern_products(G, xs[open_rows], pat)]
        if hit.any():
            witness[open_rows[hit]] = len(pats)
            pats.append(pat)
            open_rows = open_rows[~hit]
    if open_rows.size:
        verdict, cx = "counterexample", tuple(int(v) for v in xs[open_rows[0]])
    else:
        verdict, cx = ("connected" if exhaustive else "inconclusive"), None
    return ConnectivityCertificate(k, l, verdict, cx, xs, witness, tuple(pats), exhaustive)


# ---------------------------------------------------------------------------
# energy and Balog-Szemeredi-Gowers

def representation_counts(G: FiniteGroup, A: Iterable[int], B: Iterable[int]) -> np.ndarray:
    """``r(x) = #{(a, b) : ab = x}``, i.e. ``1_A * 1_B`` under counting convolution."""
    a, b = _as_array(G, A, "A"), _as_array(G, B, "B")
    return np.bincount(G.table[np.ix_(a, b)].ravel(), minlength=G.order)


def energy(G: FiniteGroup, A: Iterable[int], B: Iterable[int]) -> int:
    """``#{(a, a', b, b') : ab = a'b'} = ||1_A * 1_B||_2^2``."""
    r = representation_counts(G, A, B)
    return int(np.dot(r, r))


@dataclass
class BSGResult:
    subset: frozenset[int]
    size: int
    fraction: float
    doubling: Fraction
    energy: int
    threshold: float
    anchor: int

    def to_dict(self) -> dict:
        return {"subset": sorted(self.subset), "size": self.size, "fraction": self.fraction,
                "doubling": float(self.doubling), "energy": self.energy,
                "threshold": self.threshold, "anchor": self.anchor}


def bsg_extract(G: FiniteGroup, A: Iterable[int], B: Iterable[int], K: float) -> BSGResult:
    """Extract ``A' ⊆ A`` with small doubling from a pair with ``E(A, B) >= |A|^3 / K``.

    Graph argument: join ``a`` to ``b`` when ``ab`` is popular
    (``r(ab) >= |A| / (2K)``); for each ``b`` take its neighbourhood and keep
    the vertices joined by many length-2 paths to the rest of it.  The
    candidate with the smallest doubling among those of size at least
    ``|A| / (4K)`` is returned (the largest candidate if none is that big).
    Constants are measured, not promised.
    """
    a, b = _as_array(G, A, "A"), _as_array(G, B, "B")
    E = energy(G, a, b)
    threshold = a.size ** 3 / K
    if E < threshold:
        raise ThresholdUnmet(f"E(A,B) = {E} is below |A|^3/K = {threshold:.6g}",
                             energy=E, threshold=threshold)
    r = representation_counts(G, a, b)
    popular = r >= a.size / (2 * K)
    adj = popular[G.table[np.ix_(a, b)]]                     # |A| x |B|
    common = adj.astype(np.int64) @ adj.T.astype(np.int64)    # length-2 paths in A
    path_min = b.size / (4 * K)
    best = None
    for j in range(b.size):
        nbrs = np.flatnonzero(adj[:, j])
        if nbrs.size == 0:
            continue
        sub = common[np.ix_(nbrs, nbrs)] >= path_min
        keep = nbrs[sub.sum(axis=1) >= nbrs.size / 2]
        if keep.size == 0:
            keep = nbrs
        cand = a[keep]
        dbl = doubling_ratio(G, cand)
        big = cand.size >= a.size / (4 * K)
        key = (big, -dbl if big else cand.size, cand.size, -j)
        if best is None or key > best[0]:
            best = (key, cand, dbl, int(b[j]))
    if best is None:
        raise ThresholdUnmet("no popular products: the graph has no edges", energy=E,
                             threshold=threshold)
    _, cand, dbl, anchor = best
    return BSGResult(_frozen(cand), int(cand.size), cand.size / a.size, dbl, E, threshold, anchor)


# ---------------------------------------------------------------------------
# Croot-Sisask sampling

@dataclass
class CrootSisaskResult:
    r_used: int
    trials: int
    successes: int
    errors: np.ndarray = field(repr=False)
    tolerance: float

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials

    def to_dict(self) -> dict:
        return {"r_used": self.r_used, "trials": self.trials, "successes": self.successes,
                "success_rate": self.success_rate, "tolerance": self.tolerance,
                "median_error": float(np.median(self.errors))}


def default_sample_size(p: float, eps: float) -> int:
    """``ceil(8 p / eps^2)``; the constant in ``r = O(p eps^-2)`` is a free choice."""
    return int(math.ceil(8 * p / eps ** 2))


def croot_sisask_trial(nu, g: np.ndarray, p: float = 2.0, eps: float = 0.5,
                       r: int | None = None, trials: int = 200,
                       rng: np.random.Generator | None = None, mu=None) -> CrootSisaskResult:
    """Monte Carlo frequency of the sampled approximation of ``∫ g_ω dν(ω)`` being ``eps``-good.

    ``g`` has one row ``g_ω`` per point of ``Ω``; ``nu`` gives complex weights
    on ``Ω`` (a :class:`MeasureOnG` or an array) and ``mu`` non-negative
    weights on the columns (uniform probability by default).  With
    ``h(ω) = ||ν|| · phase(ν(ω))`` and ``ω_1..ω_r`` drawn from ``|ν| / ||ν||``,
    a trial succeeds when
    ``||∫ g dν - (1/r) Σ h(ω_i) g_{ω_i}||_{L_p(μ)} <= eps ||g||_{L_p(|ν| x μ)}``.
    """
    if not p >= 2:
        raise ValueError("p must be at least 2")
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    w = np.asarray(nu.weights if isinstance(nu, MeasureOnG) else nu, dtype=np.complex128)
    g = np.asarray(g, dtype=np.complex128)
    if g.shape[0] != w.size:
        raise ValueError(f"g has {g.shape[0]} rows but nu has {w.size} points")
    mass = np.abs(w)
    total = float(mass.sum())
    if total == 0:
        raise DegenerateMeasure("nu has zero total variation")
    mu_w = np.full(g.shape[1], 1.0 / g.shape[1]) if mu is None else np.asarray(
        mu.weights if isinstance(mu, MeasureOnG) else mu, dtype=float)
    r = default_sample_size(p, eps) if r is None else int(r)
    rng = rng if rng is not None else np.random.default_rng(0)

    phase = np.where(mass > 0, w / np.where(mass > 0, mass, 1), 0)
    h = total * phase
    target = w @ g
    g_norm = float(np.sum(mass[:, None] * mu_w[None, :] * np.abs(g) ** p) ** (1 / p))
    tol = eps * g_norm
    probs = mass / total
    errors = np.empty(trials)
    for s in range(trials):
        idx = rng.choice(w.size, size=r, p=probs)
        approx = (h[idx, None] * g[idx]).mean(axis=0)
        errors[s] = np.sum(mu_w * np.abs(target - approx) ** p) ** (1 / p)
    # relative slack absorbs rounding when the approximation is exact
    successes = int(np.sum(errors <= tol + 1e-12 * max(1.0, g_norm)))
    return CrootSisaskResult(r, trials, successes, errors, tol)


def translate_family(f: GroupFunction) -> np.ndarray:
    """Rows ``g_ω = ρ_ω(f)``, so that ``∫ g dν = Σ_ω ν(ω) f(· ω)``."""
    G = f.group
    return f.as_complex()[G.table.T]


# ---------------------------------------------------------------------------
# structured subset of the support

@dataclass
class StructResult:
    subset: frozenset[int]
    support_size: int
    fraction: float
    doubling: Fraction
    pattern: Pattern
    pattern_count: int
    fixed: dict
    energy: int
    stats: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"subset": sorted(self.subset), "support_size": self.support_size,
                "fraction": self.fraction, "doubling": float(self.doubling),
                "pattern": {"r": self.pattern.r, "i": list(self.pattern.i),
                            "sigma": list(self.pattern.sigma)},
                "pattern_count": self.pattern_count, "fixed": self.fixed,
                "energy": self.energy, **self.stats}


def _popular_pattern(G: FiniteGroup, a: np.ndarray, in_a: np.ndarray, k: int, l: int):
    grids = np.indices((a.size,) * k).reshape(k, -1).T
    xs = a[grids]
    best, best_count = None, 0
    for pat in patterns(k, l):
        count = int(in_a[_pattern_products(G, xs, pat)].sum())
        if count > best_count:
            best, best_count = pat, count
    return best, best_count


def _word(G: FiniteGroup, pat: Pattern, x: dict, positions: range) -> int:
    out = G.identity
    for s in positions:
        e = x[pat.i[s]]
        out = int(G.table[out, e if pat.sigma[s] == 1 else G.inverses[e]])
    return out


def find_struct_subset(f: GroupFunction, eps: float, k: int, l: int) -> StructResult:
    """A subset of ``supp f_Z`` with small doubling, through connectivity, energy and BSG.

    1. Require ``A = supp f_Z`` to be ``(k, l)``-connected (exhaustively).
    2. Pick the pattern ``(r, i, σ)`` with the most solutions ``x ∈ A^k``.
    3. Take two positions ``s1 < s2`` whose coordinates occur once in ``i``
       and fix all other coordinates to maximise the remaining count.
    4. With ``w, y, z`` the words before, between and after them, compute
       ``E(A z^-1, A^{-σ_{s2}} y^-1)`` and run BSG on that pair.
    5. Translate the extracted ``A' ⊆ A z^-1`` back: ``S = A' z ⊆ A``.
    """
    G = f.group
    A = sorted(support(round_almost_integer(f, eps)))
    if not A:
        raise EmptySet("f_Z is identically zero")
    a = np.array(A, dtype=np.int64)
    cert = is_arithmetically_connected(G, a, k, l)
    if cert.verdict != "connected":
        raise NoPopularPattern(f"supp f_Z is not ({k},{l})-connected",
                               counterexample=list(cert.counterexample))
    in_a = np.zeros(G.order, dtype=bool)
    in_a[a] = True
    pat, count = _popular_pattern(G, a, in_a, k, l)
    if pat is None:
        raise NoPopularPattern("no pattern has a solution")
    t = len(pat.i)
    fibre = {v: pat.i.count(v) for v in set(pat.i)}
    s1, s2 = [s for s in range(t) if fibre[pat.i[s]] == 1][:2]
    free = (pat.i[s1], pat.i[s2])
    others = sorted(set(range(k)) - set(free))

    # fix the other coordinates to maximise the inner solution count
    best = None
    for values in itertools.product(a.tolist(), repeat=len(others)):
        x = dict(zip(others, values))
        inner = 0
        for u, v in itertools.product(a.tolist(), repeat=2):
            x[free[0]], x[free[1]] = u, v
            inner += bool(in_a[_word(G, pat, x, range(t))])
        if best is None or inner > best[0]:
            best = (inner, dict(zip(others, values)))
    inner, fixed = best
    x = dict(fixed)
    x[free[0]] = x[free[1]] = G.identity        # placeholders; excluded from the words below
    y = _word(G, pat, x, range(s1 + 1, s2))
    z = _word(G, pat, x, range(s2 + 1, t))
    A1 = G.table[a, G.inverses[z]]                                  # A z^-1
    A_sig = a if -pat.sigma[s2] == 1 else G.inverses[a]
    A2 = G.table[A_sig, G.inverses[y]]                              # A^{-σ} y^-1
    E = energy(G, A1, A2)
    K = max(1.0, a.size ** 3 / E)
    bsg = bsg_extract(G, A1, A2, K)
    S = _frozen(G.table[np.fromiter(bsg.subset, dtype=np.int64), z])
    assert S <= set(A)
    return StructResult(S, a.size, len(S) / a.size, doubling_ratio(G, S), pat, count,
                        {str(j): int(v) for j, v in fixed.items()}, E,
                        {"inner_count": inner, "bsg_K": K, "bsg_fraction": bsg.fraction})
