"""Functions and measures on a finite group.

Two scalar modes are supported: ``"float"`` stores complex doubles and is
what the spectral code consumes; ``"exact"`` stores :class:`fractions.Fraction`
objects so that decomposition identities can be checked with zero tolerance.

Convolution comes in two explicitly named normalisations:

* :func:`convolve_mean` -- ``(f*g)(x) = (1/n) sum_y f(y) g(y^-1 x)`` (Haar measure ``m_G``)
* :func:`convolve_count` -- ``(h*k)(x) = sum_y h(y) k(y^-1 x)`` (counting measure)
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import AmbiguousEpsilon, GroupMismatch, InputError, NotAlmostInteger
from .groups import FiniteGroup, Subgroup, group_ref as _group_ref, resolve_group_ref

FLOAT = "float"
EXACT = "exact"


def _to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, np.integer)):
        return Fraction(int(v))
    if isinstance(v, complex) or isinstance(v, np.complexfloating):
        if v.imag != 0:
            raise ValueError(f"exact mode is real-valued, got {v}")
        v = v.real
    return Fraction(float(v)) if isinstance(v, (float, np.floating)) else Fraction(v)


def _exact_array(values) -> np.ndarray:
    out = np.empty(len(values), dtype=object)
    for i, v in enumerate(values):
        out[i] = _to_fraction(v)
    return out


@dataclass(frozen=True, eq=False)
class GroupFunction:
    group: FiniteGroup = field(repr=False)
    values: np.ndarray
    mode: str = FLOAT

    def __post_init__(self):
        if self.mode not in (FLOAT, EXACT):
            raise ValueError(f"unknown scalar mode {self.mode!r}")
        vals = self.values
        if self.mode == FLOAT:
            vals = np.asarray(vals, dtype=np.complex128).copy()
        else:
            vals = _exact_array(list(vals))
        if vals.shape != (self.group.order,):
            raise ValueError(f"expected {self.group.order} values, got shape {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    # -- constructors -----------------------------------------------------
    @classmethod
    def zeros(cls, G: FiniteGroup, mode: str = FLOAT) -> GroupFunction:
        return cls(G, [0] * G.order, mode)

    @classmethod
    def constant(cls, G: FiniteGroup, c, mode: str = FLOAT) -> GroupFunction:
        return cls(G, [c] * G.order, mode)

    @classmethod
    def indicator(cls, G: FiniteGroup, S: Iterable[int], mode: str = EXACT) -> GroupFunction:
        vals = [0] * G.order
        for x in S:
            vals[int(x)] = 1
        return cls(G, vals, mode)

    @classmethod
    def dirac(cls, G: FiniteGroup, a: int, mode: str = EXACT) -> GroupFunction:
        return cls.indicator(G, [a], mode)

    @classmethod
    def random(cls, G: FiniteGroup, rng: np.random.Generator, complex_valued: bool = True) -> GroupFunction:
        vals = rng.standard_normal(G.order)
        if complex_valued:
            vals = vals + 1j * rng.standard_normal(G.order)
        return cls(G, vals, FLOAT)

    # -- conversions ------------------------------------------------------
    def to_float(self) -> GroupFunction:
        if self.mode == FLOAT:
            return self
        return GroupFunction(self.group, np.array([float(v) for v in self.values]), FLOAT)

    def to_exact(self) -> GroupFunction:
        if self.mode == EXACT:
            return self
        return GroupFunction(self.group, self.values, EXACT)

    def as_complex(self) -> np.ndarray:
        if self.mode == FLOAT:
            return self.values
        return np.array([float(v) for v in self.values], dtype=np.complex128)

    def is_integer_valued(self) -> bool:
        if self.mode == EXACT:
            return all(v.denominator == 1 for v in self.values)
        return bool(np.all(self.values == np.round(self.values.real)))

    def integer_values(self) -> list[int]:
        if not self.is_integer_valued():
            raise ValueError("function is not integer-valued")
        if self.mode == EXACT:
            return [int(v) for v in self.values]
        return [int(v) for v in self.values.real]

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> tuple[np.ndarray, np.ndarray, str]:
        _same_group(self, other)
        if self.mode == other.mode:
            return self.values, other.values, self.mode
        return self.as_complex(), other.as_complex(), FLOAT

    def __add__(self, other):
        a, b, mode = self._coerce(other)
        return GroupFunction(self.group, a + b, mode)

    def __sub__(self, other):
        a, b, mode = self._coerce(other)
        return GroupFunction(self.group, a - b, mode)

    def __neg__(self):
        return GroupFunction(self.group, -self.values, self.mode)

    def __mul__(self, other):
        if isinstance(other, GroupFunction):
            a, b, mode = self._coerce(other)
            return GroupFunction(self.group, a * b, mode)
        if self.mode == EXACT and not isinstance(other, (float, complex)):
            return GroupFunction(self.group, self.values * _to_fraction(other), EXACT)
        return GroupFunction(self.group, self.as_complex() * other, FLOAT)

    __rmul__ = __mul__

    def __getitem__(self, x):
        return self.values[x]

    def __len__(self):
        return self.group.order

    def equals(self, other: GroupFunction) -> bool:
        """Exact pointwise equality (use :meth:`allclose` for floats)."""
        _same_group(self, other)
        return all(a == b for a, b in zip(self.values, other.values))

    def allclose(self, other: GroupFunction, atol: float = 1e-10) -> bool:
        _same_group(self, other)
        return bool(np.max(np.abs(self.as_complex() - other.as_complex()), initial=0.0) <= atol)


@dataclass(frozen=True, eq=False)
class MeasureOnG:
    """A complex measure, stored as its density against counting measure."""

    group: FiniteGroup = field(repr=False)
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights)
        if w.dtype != object:
            w = w.astype(np.complex128)
        w = w.copy()
        if w.shape != (self.group.order,):
            raise ValueError(f"expected {self.group.order} weights, got shape {w.shape}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def values(self) -> np.ndarray:
        return self.weights

    @property
    def exact(self) -> bool:
        return self.weights.dtype == object

    @property
    def norm(self) -> float:
        """Total variation ``||nu|| = sum |nu(x)|``."""
        return float(sum(abs(complex(w)) for w in self.weights)) if self.exact \
            else float(np.abs(self.weights).sum())

    def support(self) -> list[int]:
        return [x for x, w in enumerate(self.weights) if w != 0]


def uniform_measure(G: FiniteGroup, S: Iterable[int], exact: bool = False) -> MeasureOnG:
    """``m_S``: weight ``1/|S|`` on each point of ``S``."""
    S = sorted({int(x) for x in S})
    if not S:
        raise ValueError("m_S needs a non-empty set")
    if exact:
        w = np.array([Fraction(0)] * G.order, dtype=object)
        w[S] = Fraction(1, len(S))
        return MeasureOnG(G, w)
    w = np.zeros(G.order, dtype=np.complex128)
    w[S] = 1.0 / len(S)
    return MeasureOnG(G, w)


def counting_measure(G: FiniteGroup, S: Iterable[int], exact: bool = False) -> MeasureOnG:
    """``delta_S``: weight ``1`` on each point of ``S``."""
    S = sorted({int(x) for x in S})
    w = np.array([Fraction(0)] * G.order, dtype=object) if exact else np.zeros(G.order, dtype=np.complex128)
    w[S] = Fraction(1) if exact else 1.0
    return MeasureOnG(G, w)


def function_measure(f: GroupFunction, weighting: str = "mean") -> MeasureOnG:
    """The measure ``f dm_G`` (``weighting="mean"``) or ``f d delta_G`` (``"count"``)."""
    if weighting == "count":
        return MeasureOnG(f.group, f.values)
    if weighting == "mean":
        if f.mode == EXACT:
            return MeasureOnG(f.group, f.values * Fraction(1, f.group.order))
        return MeasureOnG(f.group, f.values / f.group.order)
    raise ValueError(f"unknown weighting {weighting!r}")


def _same_group(a, b):
    if a.group is not b.group and a.group != b.group:
        raise GroupMismatch(f"{a.group.name} vs {b.group.name}")


def _mode_of(*objs) -> str:
    exact = all(
        (o.mode == EXACT) if isinstance(o, GroupFunction) else o.exact for o in objs
    )
    return EXACT if exact else FLOAT


def _values(obj, mode: str) -> np.ndarray:
    if mode == EXACT:
        return obj.values
    if isinstance(obj, GroupFunction):
        return obj.as_complex()
    return np.asarray(obj.weights, dtype=np.complex128)


# ---------------------------------------------------------------------------
# convolution, translation, involution

def convolve_measure(f, mu) -> GroupFunction:
    """``(f * mu)(x) = sum_y f(x y^-1) mu(y)`` where ``mu`` is a density against counting measure."""
    _same_group(f, mu)
    mode = _mode_of(f, mu)
    G = f.group
    fv, mv = _values(f, mode), _values(mu, mode)
    if mode == EXACT:
        shifted = fv[G.div_table]
        out = np.array([sum(shifted[x] * mv, Fraction(0)) for x in range(G.order)], dtype=object)
        return GroupFunction(G, out, EXACT)
    return GroupFunction(G, fv[G.div_table] @ mv, FLOAT)


def convolve_count(h, k) -> GroupFunction:
    """Counting-measure (``l_1``) convolution ``sum_y h(y) k(y^-1 x)``."""
    return convolve_measure(h, k)


def convolve_mean(f, g) -> GroupFunction:
    """Haar-normalised convolution ``E_y f(y) g(y^-1 x)``."""
    _same_group(f, g)
    out = convolve_measure(f, g)
    n = f.group.order
    if out.mode == EXACT:
        return GroupFunction(f.group, out.values * Fraction(1, n), EXACT)
    return GroupFunction(f.group, out.values / n, FLOAT)


def project_to_subgroup(f: GroupFunction, H: Subgroup) -> GroupFunction:
    """``f * m_H``: the average of ``f`` over each left coset ``xH``.

    Equal to ``convolve_measure(f, uniform_measure(G, H))`` but computed
    coset by coset in ``O(n)``.
    """
    if H.parent is not f.group and H.parent != f.group:
        raise GroupMismatch("subgroup belongs to a different group")
    labels = H.coset_labels
    if f.mode == EXACT:
        sums: dict[int, Fraction] = {}
        for x, v in enumerate(f.values):
            sums[labels[x]] = sums.get(labels[x], Fraction(0)) + v
        scale = Fraction(1, H.order)
        return GroupFunction(f.group, [sums[labels[x]] * scale for x in range(f.group.order)], EXACT)
    sums = np.zeros(f.group.order, dtype=np.complex128)
    np.add.at(sums, labels, f.values)
    return GroupFunction(f.group, sums[labels] / H.order, FLOAT)


def translate(f: GroupFunction, y: int) -> GroupFunction:
    """Right regular action ``rho_y(f)(x) = f(xy)``."""
    return GroupFunction(f.group, f.values[f.group.table[:, y]], f.mode)


def tilde(f: GroupFunction) -> GroupFunction:
    """Involution ``f~(x) = conj(f(x^-1))``."""
    vals = f.values[f.group.inverses]
    if f.mode == FLOAT:
        vals = np.conj(vals)
    return GroupFunction(f.group, vals, f.mode)


def tilde_measure(mu: MeasureOnG) -> MeasureOnG:
    w = mu.weights[mu.group.inverses]
    return MeasureOnG(mu.group, w if mu.exact else np.conj(w))


# ---------------------------------------------------------------------------
# inner products and norms

def inner(f: GroupFunction, g: GroupFunction, weighting: str = "count"):
    """``sum_x f(x) conj(g(x))``, divided by ``n`` when ``weighting="mean"``."""
    _same_group(f, g)
    mode = _mode_of(f, g)
    if mode == EXACT:
        total = sum((a * b for a, b in zip(f.values, g.values)), Fraction(0))
        return total / f.group.order if weighting == "mean" else total
    total = complex(np.vdot(g.as_complex(), f.as_complex()))
    return total / f.group.order if weighting == "mean" else total


def inner_fm(f: GroupFunction, mu: MeasureOnG) -> complex:
    """``<f, mu> = integral f d(conj mu)``."""
    _same_group(f, mu)
    return complex(np.sum(f.as_complex() * np.conj(np.asarray(mu.weights, dtype=np.complex128))))


def inner_mf(mu: MeasureOnG, f: GroupFunction) -> complex:
    """``<mu, f> = integral conj(f) d mu``."""
    _same_group(f, mu)
    return complex(np.sum(np.conj(f.as_complex()) * np.asarray(mu.weights, dtype=np.complex128)))


def lp_norm(f: GroupFunction, p: float, weighting="mean") -> float:
    """``L_p`` norm against ``m_G`` ("mean"), counting measure ("count") or ``m_S`` (pass ``S``)."""
    a = np.abs(f.as_complex())
    if isinstance(weighting, str):
        if weighting == "mean":
            w = np.full(f.group.order, 1.0 / f.group.order)
        elif weighting == "count":
            w = np.ones(f.group.order)
        else:
            raise ValueError(f"unknown weighting {weighting!r}")
    else:
        S = sorted({int(x) for x in weighting})
        w = np.zeros(f.group.order)
        w[S] = 1.0 / len(S)
    if p == np.inf:
        return float(a[w > 0].max(initial=0.0))
    if p < 1:
        raise ValueError("p must be in [1, inf]")
    return float(np.sum(w * a ** p) ** (1.0 / p))


def support(f: GroupFunction, tol: float = 0.0) -> frozenset[int]:
    """Points where ``|f(x)| > tol``."""
    if f.mode == EXACT:
        return frozenset(x for x, v in enumerate(f.values) if abs(v) > tol)
    return frozenset(int(x) for x in np.flatnonzero(np.abs(f.values) > tol))


def round_almost_integer(f: GroupFunction, eps: float) -> GroupFunction:
    """Nearest-integer rounding ``f_Z`` of an ``eps``-almost integer-valued ``f``.

    Every value must lie strictly within ``eps`` of an integer; with
    ``eps == 0`` the values must already be integers.
    """
    if not 0 <= eps < 0.5:
        raise AmbiguousEpsilon(f"epsilon must lie in [0, 1/2), got {eps}", epsilon=eps)
    out = []
    worst = (-1.0, None)
    for x, v in enumerate(f.values):
        if f.mode == EXACT:
            z = round(v)
            dist = abs(v - z)
            ok = dist == 0 or dist < Fraction(eps)
            dist = float(dist)
        else:
            z = int(np.round(v.real))
            dist = abs(complex(v) - z)
            ok = dist == 0 or dist < eps
        if not ok and dist > worst[0]:
            worst = (dist, x)
        out.append(z)
    if worst[1] is not None:
        dist, x = worst
        raise NotAlmostInteger(f"value at {x} is {dist:.6g} from the nearest integer (eps={eps})",
                               element=x, distance=dist)
    return GroupFunction(f.group, out, EXACT)


# ---------------------------------------------------------------------------
# JSON

def _encode_value(v, mode: str):
    if mode == EXACT:
        return [v.numerator, v.denominator] if v.denominator != 1 else v.numerator
    v = complex(v)
    return [v.real, v.imag] if v.imag != 0 else v.real


def _decode_value(v, mode: str):
    if mode == EXACT:
        if isinstance(v, list):
            return Fraction(int(v[0]), int(v[1]))
        return _to_fraction(v)
    if isinstance(v, list):
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def function_to_dict(f: GroupFunction, group_ref=None) -> dict:
    return {"group": group_ref if group_ref is not None else _group_ref(f.group), "mode": f.mode,
            "values": [_encode_value(v, f.mode) for v in f.values]}


def function_from_dict(data: dict, group: FiniteGroup | None = None, base_dir=None) -> GroupFunction:
    try:
        mode = data.get("mode", FLOAT)
        raw = data["values"]
        ref = data.get("group")
    except (AttributeError, KeyError) as exc:
        raise InputError(f"malformed function record: {exc}")
    if group is None:
        group = resolve_group_ref(ref, base_dir)
    if len(raw) != group.order:
        raise InputError(f"function has {len(raw)} values but {group.name} has order {group.order}")
    return GroupFunction(group, [_decode_value(v, mode) for v in raw], mode)


def save_function(f: GroupFunction, path, group_ref=None) -> None:
    Path(path).write_text(json.dumps(function_to_dict(f, group_ref)))


def load_function(path, group: FiniteGroup | None = None) -> GroupFunction:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read function file {path}: {exc}")
    return function_from_dict(data, group=group, base_dir=path.parent)
