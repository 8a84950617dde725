"""Finite groups given by Cayley tables, their subgroups and left cosets.

Elements are the integers ``0..n-1``.  The identity is derived from the table
rather than assumed to be ``0``, so externally supplied tables are accepted
as long as they define a group.
"""

from __future__ import annotations

import itertools
import json
import os
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InputError,
    InvalidTable,
    MissingInverse,
    NoIdentity,
    NonAssociative,
    NonBijectiveColumn,
    NonBijectiveRow,
    SizeLimitExceeded,
)

# Constructors refuse to materialise tables larger than this.
MAX_TABLE_ORDER = 4096
DEFAULT_SUBGROUP_CAP = 384


def subgroup_cap() -> int:
    """Group-size cap for subgroup enumeration (env ``COSETFORGE_CAP``)."""
    raw = os.environ.get("COSETFORGE_CAP")
    if raw is None:
        return DEFAULT_SUBGROUP_CAP
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"COSETFORGE_CAP must be an integer, got {raw!r}")


class FiniteGroup:
    """A finite group stored as a read-only Cayley table.

    ``table[a, b]`` is the index of ``a*b``.  ``factors`` is set only for
    groups built as products of cyclic groups, in which case element ``x``
    is the mixed-radix number whose digits are its coordinates (first factor
    most significant); the abelian Fourier oracle relies on this layout.
    """

    def __init__(self, table, identity: int, inverses, name: str = "G",
                 factors: tuple[int, ...] | None = None):
        table = np.array(table, dtype=np.int64)
        table.setflags(write=False)
        inverses = np.array(inverses, dtype=np.int64)
        inverses.setflags(write=False)
        self.table = table
        self.order = int(table.shape[0])
        self.identity = int(identity)
        self.inverses = inverses
        self.name = name
        self.factors = tuple(int(m) for m in factors) if factors else None

    def __repr__(self):
        return f"FiniteGroup({self.name!r}, order={self.order})"

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, FiniteGroup):
            return NotImplemented
        return (self.order == other.order and self.identity == other.identity
                and np.array_equal(self.table, other.table))

    def __hash__(self):
        return self._hash

    @cached_property
    def _hash(self):
        return hash((self.order, self.identity, self.table.tobytes()))

    def __len__(self):
        return self.order

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inv(self, a: int) -> int:
        return int(self.inverses[a])

    def power(self, a: int, k: int) -> int:
        if k < 0:
            a, k = self.inv(a), -k
        x = self.identity
        for _ in range(k):
            x = int(self.table[x, a])
        return x

    def element_order(self, a: int) -> int:
        x, k = a, 1
        while x != self.identity:
            x = int(self.table[x, a])
            k += 1
        return k

    def elements(self) -> range:
        return range(self.order)

    @cached_property
    def div_table(self) -> np.ndarray:
        """``div_table[x, y]`` is the index of ``x * y^-1``."""
        out = self.table[:, self.inverses]
        out.setflags(write=False)
        return out

    @cached_property
    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    @property
    def explicitly_abelian(self) -> bool:
        return self.factors is not None


# ---------------------------------------------------------------------------
# validation and construction

def validate_group(table, name: str = "G", *, check_associativity: bool = True,
                   factors: tuple[int, ...] | None = None) -> FiniteGroup:
    """Check a Cayley table and return the group it defines.

    Raises one of the ``InvalidTable`` subclasses naming the offending row,
    column or element; non-associativity reports a witness triple.
    """
    arr = np.asarray(table)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise InvalidTable(f"table must be a non-empty square array, got shape {arr.shape}")
    n = arr.shape[0]
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise InvalidTable("table entries must be integers")
    arr = arr.astype(np.int64)
    if arr.min() < 0 or arr.max() >= n:
        raise InvalidTable(f"table entries must lie in 0..{n - 1}")

    full = np.arange(n)
    sorted_rows = np.sort(arr, axis=1)
    bad = np.flatnonzero(~np.all(sorted_rows == full, axis=1))
    if bad.size:
        raise NonBijectiveRow(f"row {bad[0]} is not a permutation", row=int(bad[0]))
    sorted_cols = np.sort(arr, axis=0)
    bad = np.flatnonzero(~np.all(sorted_cols == full[:, None], axis=0))
    if bad.size:
        raise NonBijectiveColumn(f"column {bad[0]} is not a permutation", column=int(bad[0]))

    left = np.all(arr == full, axis=1)
    right = np.all(arr == full[:, None], axis=0)
    candidates = np.flatnonzero(left & right)
    if candidates.size == 0:
        raise NoIdentity("no two-sided identity element")
    e = int(candidates[0])

    # rows are permutations, so each x has exactly one right inverse
    inverses = np.argmax(arr == e, axis=1)
    bad = np.flatnonzero(arr[inverses, full] != e)
    if bad.size:
        raise MissingInverse(f"element {bad[0]} has no two-sided inverse", element=int(bad[0]))

    if check_associativity:
        witness = _associativity_witness(arr)
        if witness is not None:
            a, b, c = witness
            raise NonAssociative(f"(a*b)*c != a*(b*c) for (a, b, c) = {witness}",
                                 witness=[a, b, c])
    return FiniteGroup(arr, e, inverses, name=name, factors=factors)


def _associativity_witness(arr: np.ndarray, chunk: int = 32):
    n = arr.shape[0]
    for start in range(0, n, chunk):
        a = np.arange(start, min(n, start + chunk))
        lhs = arr[arr[a]]            # lhs[i, b, c] = (a_i b) c
        rhs = arr[a][:, arr]         # rhs[i, b, c] = a_i (b c)
        diff = np.argwhere(lhs != rhs)
        if diff.size:
            i, b, c = diff[0]
            return int(a[i]), int(b), int(c)
    return None


def _check_size(n: int, what: str):
    if n > MAX_TABLE_ORDER:
        raise SizeLimitExceeded(f"{what} would have order {n} > {MAX_TABLE_ORDER}", order=n)


def make_cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise ValueError("cyclic group order must be positive")
    _check_size(n, f"Z/{n}")
    x = np.arange(n)
    table = (x[:, None] + x[None, :]) % n
    return FiniteGroup(table, 0, (-x) % n, name=f"Z{n}", factors=(n,))


def make_product(G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
    """Direct product; the pair ``(g, h)`` gets index ``g*|H| + h``."""
    n = G.order * H.order
    _check_size(n, f"{G.name}x{H.name}")
    m = H.order
    table = (G.table[:, None, :, None] * m + H.table[None, :, None, :]).reshape(n, n)
    inverses = (G.inverses[:, None] * m + H.inverses[None, :]).reshape(n)
    identity = G.identity * m + H.identity
    factors = None
    if G.factors is not None and H.factors is not None:
        factors = G.factors + H.factors
    return FiniteGroup(table, identity, inverses, name=f"{G.name}x{H.name}", factors=factors)


def make_dihedral(m: int) -> FiniteGroup:
    """Dihedral group of order ``2m``; index ``a*m + i`` stands for ``s^a r^i``."""
    if m < 1:
        raise ValueError("dihedral parameter must be positive")
    _check_size(2 * m, f"D{m}")
    n = 2 * m
    a = np.arange(n) // m
    i = np.arange(n) % m
    # (s^a r^i)(s^b r^j) = s^(a+b) r^((-1)^b i + j)
    sign = np.where(a == 1, -1, 1)
    new_a = (a[:, None] + a[None, :]) % 2
    new_i = (sign[None, :] * i[:, None] + i[None, :]) % m
    table = new_a * m + new_i
    inv_i = np.where(a == 1, i, (-i) % m)
    inverses = a * m + inv_i
    return FiniteGroup(table, 0, inverses, name=f"D{m}")


def make_boolean_cube(k: int) -> FiniteGroup:
    """``(Z/2)^k``; element bits are its coordinates, most significant first."""
    if k < 0:
        raise ValueError("cube dimension must be non-negative")
    n = 2 ** k
    _check_size(n, f"Z2^{k}")
    x = np.arange(n)
    table = x[:, None] ^ x[None, :]
    factors = (2,) * k if k else (1,)
    return FiniteGroup(table, 0, x, name=f"Z2^{k}", factors=factors)


def make_symmetric(m: int) -> FiniteGroup:
    """Symmetric group on ``m <= 6`` points.

    Elements are permutations in lexicographic order (index 0 is the
    identity); the product is composition ``(p*q)(i) = p(q(i))``.
    """
    if m < 1:
        raise ValueError("symmetric group degree must be positive")
    if m > 6:
        raise SizeLimitExceeded(f"S{m} exceeds the degree limit 6", degree=m)
    perms = np.array(list(itertools.permutations(range(m))), dtype=np.int64)
    return _from_permutations(perms, f"S{m}")


def _from_permutations(perms: np.ndarray, name: str) -> FiniteGroup:
    n, m = perms.shape
    weights = m ** np.arange(m - 1, -1, -1)
    codes = perms @ weights
    lookup = {int(c): i for i, c in enumerate(codes)}
    composed = perms[:, perms]               # composed[p, q, i] = perms[p][perms[q][i]]
    comp_codes = composed @ weights
    table = np.vectorize(lookup.__getitem__, otypes=[np.int64])(comp_codes)
    return validate_group(table, name=name, check_associativity=False)


_NAME_PATTERNS = [
    (re.compile(r"^(?:Z|C|Z/)(\d+)$"), lambda m: make_cyclic(int(m.group(1)))),
    (re.compile(r"^Z2\^(\d+)$"), lambda m: make_boolean_cube(int(m.group(1)))),
    (re.compile(r"^D(\d+)$"), lambda m: make_dihedral(int(m.group(1)))),
    (re.compile(r"^S(\d+)$"), lambda m: make_symmetric(int(m.group(1)))),
]


def group_by_name(name: str) -> FiniteGroup:
    """Build a group from a short name such as ``Z12``, ``Z2xZ4``, ``D6``, ``S3``, ``Z2^4``.

    ``Dm`` is the dihedral group of order ``2m``.
    """
    parts = [p.strip() for p in name.split("x")]
    groups = []
    for part in parts:
        for pattern, build in _NAME_PATTERNS:
            match = pattern.match(part)
            if match:
                groups.append(build(match))
                break
        else:
            raise InputError(f"unrecognised group name {part!r}")
    out = groups[0]
    for g in groups[1:]:
        out = make_product(out, g)
    if len(groups) > 1:
        out.name = name
    return out


# ---------------------------------------------------------------------------
# subgroups and cosets

@dataclass(frozen=True)
class Subgroup:
    parent: FiniteGroup = field(repr=False)
    elements: tuple[int, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def index(self) -> int:
        return self.parent.order // self.order

    @cached_property
    def mask(self) -> np.ndarray:
        out = np.zeros(self.parent.order, dtype=bool)
        out[list(self.elements)] = True
        return out

    @cached_property
    def coset_labels(self) -> np.ndarray:
        """Canonical representative of the left coset ``xH`` for each ``x``."""
        return self.parent.table[:, list(self.elements)].min(axis=1)

    @cached_property
    def representatives(self) -> tuple[int, ...]:
        return tuple(int(r) for r in np.unique(self.coset_labels))

    def __contains__(self, x) -> bool:
        return bool(self.mask[x])

    def is_trivial(self) -> bool:
        return self.order == 1

    @cached_property
    def is_normal(self) -> bool:
        """``gHg^-1 = H`` for every ``g``, i.e. left and right cosets agree."""
        G = self.parent
        elems = list(self.elements)
        conj = G.table[G.table[:, elems], G.inverses[:, None]]   # g h g^-1
        return bool(self.mask[conj].all())


@dataclass(frozen=True)
class Coset:
    """Left coset ``representative * subgroup``; the representative is canonical (minimal)."""

    subgroup: Subgroup
    representative: int
    side: str = "left"

    @cached_property
    def members(self) -> tuple[int, ...]:
        G = self.subgroup.parent
        return tuple(sorted(int(x) for x in G.table[self.representative, list(self.subgroup.elements)]))

    @cached_property
    def mask(self) -> np.ndarray:
        return self.subgroup.coset_labels == self.representative

    def __contains__(self, x) -> bool:
        return bool(self.subgroup.coset_labels[x] == self.representative)

    def __len__(self):
        return self.subgroup.order

    def key(self) -> tuple:
        return (self.subgroup.elements, self.representative)


def subgroup_from_elements(G: FiniteGroup, elements: Iterable[int], *, check: bool = True) -> Subgroup:
    elems = tuple(sorted({int(x) for x in elements}))
    if check:
        if G.identity not in elems:
            raise ValueError("subgroup must contain the identity")
        mask = np.zeros(G.order, dtype=bool)
        mask[list(elems)] = True
        idx = list(elems)
        if not mask[G.table[np.ix_(idx, idx)]].all() or not mask[G.inverses[idx]].all():
            raise ValueError("elements are not closed under the group operation")
        if G.order % len(elems):
            raise ValueError("subgroup order must divide the group order")
    return Subgroup(G, elems)


def _closure_mask(G: FiniteGroup, start: np.ndarray, gens: Sequence[int]) -> np.ndarray:
    mask = start.copy()
    gens = np.asarray(list(gens), dtype=np.int64)
    if gens.size == 0:
        return mask
    frontier = np.flatnonzero(mask)
    while frontier.size:
        new = G.table[np.ix_(frontier, gens)].ravel()
        new = np.unique(new[~mask[new]])
        mask[new] = True
        frontier = new
    return mask


def generated_subgroup(G: FiniteGroup, gens: Iterable[int]) -> Subgroup:
    """Smallest subgroup containing ``gens``; empty ``gens`` gives the trivial subgroup."""
    start = np.zeros(G.order, dtype=bool)
    start[G.identity] = True
    mask = _closure_mask(G, start, list(gens))
    return Subgroup(G, tuple(int(x) for x in np.flatnonzero(mask)))


def enumerate_subgroups(G: FiniteGroup, cap: int | None = None) -> list[Subgroup]:
    """All subgroups of ``G`` sorted by ``(order, elements)``.

    Starting from the trivial subgroup, every known subgroup ``H`` is joined
    with one extra generator taken from each non-trivial left coset of
    ``H``; new subgroups are queued until no join produces anything new.
    """
    cap = subgroup_cap() if cap is None else cap
    if G.order > cap:
        raise SizeLimitExceeded(f"subgroup enumeration capped at order {cap}, got {G.order}",
                                order=G.order, cap=cap)
    trivial = np.zeros(G.order, dtype=bool)
    trivial[G.identity] = True
    seen = {(G.identity,)}
    queue = [(trivial, [])]
    while queue:
        mask, gens = queue.pop()
        elems = np.flatnonzero(mask)
        reps = np.unique(G.table[:, elems].min(axis=1))
        for g in reps:
            if mask[g]:
                continue
            # <H, g> is the closure of H under right multiplication by gens(H) and g
            new_gens = gens + [int(g)]
            joined = _closure_mask(G, mask, new_gens)
            key = tuple(int(x) for x in np.flatnonzero(joined))
            if key not in seen:
                seen.add(key)
                queue.append((joined, new_gens))
    subs = [Subgroup(G, key) for key in seen]
    subs.sort(key=lambda s: (s.order, s.elements))
    return subs


def left_cosets(G: FiniteGroup, H: Subgroup) -> list[Coset]:
    return [Coset(H, r) for r in H.representatives]


def coset_of(G: FiniteGroup, H: Subgroup, x: int) -> Coset:
    return Coset(H, int(H.coset_labels[x]))


def coset_members(c: Coset) -> list[int]:
    return list(c.members)


def element_set(G: FiniteGroup, elements: Iterable[int]) -> frozenset[int]:
    out = frozenset(int(x) for x in elements)
    bad = [x for x in out if not 0 <= x < G.order]
    if bad:
        raise ValueError(f"elements {sorted(bad)} are not in 0..{G.order - 1}")
    return out


# ---------------------------------------------------------------------------
# JSON

def group_to_dict(G: FiniteGroup) -> dict:
    out = {"name": G.name, "order": G.order, "identity": G.identity,
           "table": G.table.tolist()}
    if G.factors is not None:
        out["factors"] = list(G.factors)
    return out


def group_from_dict(data: dict, *, trusted: bool = False) -> FiniteGroup:
    try:
        table = data["table"]
        name = data.get("name", "G")
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed group record: {exc}")
    factors = tuple(data["factors"]) if data.get("factors") else None
    G = validate_group(table, name=name, check_associativity=not trusted, factors=factors)
    if "order" in data and int(data["order"]) != G.order:
        raise InvalidTable(f"declared order {data['order']} but table has {G.order} rows")
    if "identity" in data and int(data["identity"]) != G.identity:
        raise InvalidTable(f"declared identity {data['identity']} but derived {G.identity}")
    if factors is not None and int(np.prod(factors)) != G.order:
        raise InvalidTable("factors do not multiply to the group order")
    return G


def save_group(G: FiniteGroup, path) -> None:
    Path(path).write_text(json.dumps(group_to_dict(G)))


def group_ref(G: FiniteGroup):
    """Short name when it rebuilds ``G`` exactly, otherwise the full record."""
    try:
        if group_by_name(G.name) == G:
            return G.name
    except (InputError, SizeLimitExceeded, ValueError):
        pass
    return group_to_dict(G)


def resolve_group_ref(ref, base_dir=None) -> FiniteGroup:
    """Like :func:`load_group`, but relative paths are tried against ``base_dir`` first."""
    if isinstance(ref, str) and base_dir is not None and (Path(base_dir) / ref).exists():
        ref = Path(base_dir) / ref
    return load_group(ref)


def load_group(ref, *, trusted: bool = False) -> FiniteGroup:
    """Load a group from a JSON path, or build it from a short name."""
    if isinstance(ref, FiniteGroup):
        return ref
    if isinstance(ref, dict):
        return group_from_dict(ref, trusted=trusted)
    path = Path(str(ref))
    if path.exists():
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read group file {path}: {exc}")
        return group_from_dict(data, trusted=trusted)
    return group_by_name(str(ref))
