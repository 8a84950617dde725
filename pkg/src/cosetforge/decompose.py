"""Integer combinations of coset indicators.

A :class:`CosetDecomposition` writes an integer-valued ``f`` as
``sum_i sum_W z_W^(i) 1_W`` where ``W`` runs over left cosets of ``H_i``.
:func:`greedy_decompose` peels off layers ``f_i * m_H`` that happen to be
integer-valued; :func:`exact_min_cost` searches for a cheapest
representation by iterative deepening.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetExhausted, InputError, IterationCap, Mismatch, NotAlmostInteger
from .functions import EXACT, GroupFunction, project_to_subgroup, round_almost_integer
from .groups import (Coset, FiniteGroup, Subgroup, coset_of, enumerate_subgroups, group_ref,
                     resolve_group_ref, subgroup_from_elements)
from .spectral import algebra_norm

STRATEGIES = ("largest-subgroup", "max-mass", "norm-drop")
NORM_TIE_TOL = 1e-9


@dataclass(frozen=True)
class Layer:
    """Nonzero integer coefficients on left cosets of one subgroup, keyed by canonical representative."""

    subgroup: Subgroup
    terms: tuple[tuple[int, int], ...]

    def __post_init__(self):
        terms = tuple(sorted((int(r), int(z)) for r, z in self.terms))
        reps = [r for r, _ in terms]
        if len(set(reps)) != len(reps):
            raise ValueError("duplicate coset representative in a layer")
        labels = self.subgroup.coset_labels
        for r, z in terms:
            if z == 0:
                raise ValueError(f"zero coefficient on coset {r}")
            if labels[r] != r:
                raise ValueError(f"{r} is not the canonical representative of its coset")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def from_mapping(cls, H: Subgroup, coeffs) -> Layer:
        return cls(H, tuple((r, z) for r, z in dict(coeffs).items() if z != 0))

    @property
    def coefficients(self) -> dict[int, int]:
        return dict(self.terms)

    @property
    def cost(self) -> int:
        return sum(abs(z) for _, z in self.terms)

    @property
    def support_size(self) -> int:
        return len(self.terms)

    def cosets(self) -> list[Coset]:
        return [Coset(self.subgroup, r) for r, _ in self.terms]

    def values(self) -> np.ndarray:
        table = np.zeros(self.subgroup.parent.order, dtype=np.int64)
        for r, z in self.terms:
            table[r] = z
        return table[self.subgroup.coset_labels]


@dataclass(frozen=True, eq=False)
class CosetDecomposition:
    group: FiniteGroup = field(repr=False)
    layers: tuple[Layer, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))

    @property
    def L(self) -> int:
        return len(self.layers)

    @property
    def cost(self) -> int:
        return sum(layer.cost for layer in self.layers)

    def values(self) -> np.ndarray:
        out = np.zeros(self.group.order, dtype=np.int64)
        for layer in self.layers:
            out += layer.values()
        return out

    def merged(self) -> CosetDecomposition:
        """Combine layers sharing a subgroup (first occurrence keeps its place); drop empty ones."""
        order: list[tuple[int, ...]] = []
        acc: dict[tuple[int, ...], tuple[Subgroup, dict[int, int]]] = {}
        for layer in self.layers:
            key = layer.subgroup.elements
            if key not in acc:
                order.append(key)
                acc[key] = (layer.subgroup, {})
            coeffs = acc[key][1]
            for r, z in layer.terms:
                coeffs[r] = coeffs.get(r, 0) + z
        layers = []
        for key in order:
            H, coeffs = acc[key]
            layer = Layer.from_mapping(H, coeffs)
            if layer.terms:
                layers.append(layer)
        return CosetDecomposition(self.group, tuple(layers))


@dataclass
class DecompositionReport:
    L: int
    layer_costs: list[int]
    total_cost: int
    exact: bool
    norm_trace: list[float] = field(default_factory=list)
    projection_norms: list[float] = field(default_factory=list)
    strategy: str | None = None
    steps: int = 0
    optimal: bool | None = None
    nodes_expanded: int | None = None

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def to_function(decomposition: CosetDecomposition) -> GroupFunction:
    return GroupFunction(decomposition.group, decomposition.values(), EXACT)


def _target(f: GroupFunction, eps: float) -> np.ndarray:
    return np.array(round_almost_integer(f, eps).integer_values(), dtype=np.int64)


def verify(f: GroupFunction, decomposition: CosetDecomposition, eps: float = 0.0,
           **extra) -> DecompositionReport:
    """Check ``to_function(decomposition) == f_Z`` pointwise and recompute the costs."""
    target = _target(f, eps)
    got = decomposition.values()
    diff = np.flatnonzero(got != target)
    if diff.size:
        x = int(diff[0])
        raise Mismatch(f"decomposition gives {got[x]} at {x}, expected {target[x]}",
                       element=x, expected=int(target[x]), got=int(got[x]))
    costs = [layer.cost for layer in decomposition.layers]
    return DecompositionReport(decomposition.L, costs, sum(costs), True, **extra)


# ---------------------------------------------------------------------------
# greedy peeling

@dataclass(frozen=True)
class LayerProjection:
    layer: Layer
    projection: GroupFunction = field(repr=False)
    residual: GroupFunction = field(repr=False)


def project_layer(f: GroupFunction, H: Subgroup, eps: float = 0.0) -> LayerProjection | None:
    """``f * m_H`` as a layer when it is ``eps``-almost integer-valued and rounds to nonzero.

    The residual is ``f - f * m_H`` (not ``f`` minus the rounded layer).
    """
    proj = project_to_subgroup(f, H)
    try:
        rounded = round_almost_integer(proj, eps)
    except NotAlmostInteger:
        return None
    vals = rounded.integer_values()
    coeffs = {int(r): vals[int(r)] for r in H.representatives if vals[int(r)] != 0}
    if not coeffs:
        return None
    return LayerProjection(Layer.from_mapping(H, coeffs), proj, f - proj)


def _score(strategy: str, cand: LayerProjection, residual: GroupFunction,
           residual_norm: float | None) -> float:
    """Gain per unit of layer cost; raw gains would always favour the trivial subgroup."""
    if strategy == "largest-subgroup":
        return float(cand.layer.subgroup.order)
    if strategy == "max-mass":
        before = sum(abs(v) for v in residual.values)
        after = sum(abs(v) for v in cand.residual.values)
        gain = float(before - after)
    else:
        gain = residual_norm - algebra_norm(cand.residual)
    return gain / cand.layer.cost


def _iteration_cap(f_norm: float, f_int: np.ndarray) -> int:
    return int(math.ceil(10 * f_norm)) + int(np.count_nonzero(f_int))


def greedy_decompose(f: GroupFunction, eps: float = 0.0, strategy: str = "largest-subgroup",
                     subgroups: Sequence[Subgroup] | None = None,
                     max_steps: int | None = None, track_norms: bool = True,
                     merge: bool = True) -> tuple[CosetDecomposition, DecompositionReport]:
    """Repeatedly subtract an integer-valued ``f_i * m_H`` from the residual.

    ``f`` is first rounded to ``f_Z`` (this is the only place ``eps`` acts);
    afterwards every step is exact, so only subgroups whose projection of the
    current residual is integer-valued qualify.  The trivial subgroup always
    qualifies while the residual is nonzero, and each step lowers
    ``sum |f_i|^2`` by at least one, which bounds the number of steps.

    Strategies pick, among qualifying subgroups: the largest one
    (``largest-subgroup``), the best drop in ``sum |f_i|`` per unit of layer
    cost (``max-mass``), or the best drop in ``||f_i||_A`` per unit of layer
    cost (``norm-drop``).  Ties go to the earlier subgroup in enumeration order.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    G = f.group
    f_int = _target(f, eps)
    subs = list(subgroups) if subgroups is not None else enumerate_subgroups(G)
    if strategy == "largest-subgroup":
        # biggest first; stable sort keeps enumeration order among equals
        subs = sorted(subs, key=lambda H: -H.order)
    residual = GroupFunction(G, f_int, EXACT)
    norms = [algebra_norm(residual)] if track_norms or strategy == "norm-drop" else []
    cap = max_steps if max_steps is not None else _iteration_cap(
        norms[0] if norms else algebra_norm(residual), f_int)
    layers: list[Layer] = []
    proj_norms: list[float] = []
    steps = 0
    while any(v != 0 for v in residual.values):
        if steps >= cap:
            raise IterationCap(f"greedy decomposition did not finish within {cap} steps",
                               steps=steps, residual_support=int(sum(v != 0 for v in residual.values)))
        best, best_score = None, None
        current_norm = norms[-1] if strategy == "norm-drop" else None
        for H in subs:
            cand = project_layer(residual, H, 0.0)
            if cand is None:
                continue
            if strategy == "largest-subgroup":
                best = cand
                break
            score = _score(strategy, cand, residual, current_norm)
            if best is None or score > best_score + NORM_TIE_TOL:
                best, best_score = cand, score
        assert best is not None, "trivial subgroup must always qualify"
        layers.append(best.layer)
        if track_norms:
            proj_norms.append(algebra_norm(best.projection))
        residual = best.residual
        if track_norms or strategy == "norm-drop":
            norms.append(algebra_norm(residual))
        steps += 1
    decomposition = CosetDecomposition(G, tuple(layers))
    if merge:
        decomposition = decomposition.merged()
    report = verify(GroupFunction(G, f_int, EXACT), decomposition, 0.0,
                    norm_trace=norms, projection_norms=proj_norms, strategy=strategy, steps=steps)
    return decomposition, report


# ---------------------------------------------------------------------------
# exact minimum cost

def _decomposition_from_moves(G: FiniteGroup, moves: Iterable[tuple[Subgroup, int, int]]) -> CosetDecomposition:
    layers = [Layer.from_mapping(H, {rep: sign}) for H, rep, sign in moves]
    return CosetDecomposition(G, tuple(layers)).merged()


def exact_min_cost(f: GroupFunction, cost_budget: int | None = None, node_budget: int = 200_000,
                   eps: float = 0.0, subgroups: Sequence[Subgroup] | None = None,
                   ) -> tuple[CosetDecomposition, DecompositionReport] | None:
    """Cheapest ``sum |z_W|`` representation of ``f_Z``, by iterative deepening.

    Any representation of a nonzero residual ``r`` contains a coset through
    the first point ``x`` with ``r(x) != 0`` whose coefficient has the sign
    of ``r(x)``; branching on that coset (one per subgroup) with a unit step
    is therefore complete.  Lower bound: ``max_x |r(x)|``.

    The greedy decomposition seeds the incumbent.  Returns ``None`` when no
    representation costs at most ``cost_budget``.  Raises
    :class:`BudgetExhausted` carrying the incumbent when more than
    ``node_budget`` nodes would be expanded.
    """
    G = f.group
    subs = list(subgroups) if subgroups is not None else enumerate_subgroups(G)
    target = _target(f, eps)
    greedy, greedy_report = greedy_decompose(GroupFunction(G, target, EXACT), 0.0,
                                             subgroups=subs, track_norms=False)
    best_cost = greedy.cost
    limit = best_cost - 1 if cost_budget is None else min(best_cost - 1, cost_budget)
    masks = [(H, H.coset_labels) for H in subs]
    expanded = 0
    failed: dict[bytes, int] = {}      # residual -> largest budget known to fail

    def search(r: np.ndarray, budget: int, moves: list) -> list | None:
        nonlocal expanded
        nz = np.flatnonzero(r)
        if nz.size == 0:
            return list(moves)
        if int(np.abs(r).max()) > budget:
            return None
        key = r.tobytes()
        if failed.get(key, -1) >= budget:
            return None
        expanded += 1
        if expanded > node_budget:
            raise _OutOfNodes()
        x = int(nz[0])
        sign = 1 if r[x] > 0 else -1
        for H, labels in masks:
            rep = int(labels[x])
            moves.append((H, rep, sign))
            found = search(r - sign * (labels == rep), budget - 1, moves)
            moves.pop()
            if found is not None:
                return found
        failed[key] = budget
        return None

    start = int(np.abs(target).max()) if target.any() else 0
    try:
        for budget in range(start, limit + 1):
            found = search(target.copy(), budget, [])
            if found is not None:
                decomposition = _decomposition_from_moves(G, found)
                report = verify(GroupFunction(G, target, EXACT), decomposition, 0.0,
                                optimal=True, nodes_expanded=expanded, strategy="exact-min")
                return decomposition, report
    except _OutOfNodes:
        greedy_report.optimal = False
        greedy_report.nodes_expanded = expanded
        raise BudgetExhausted(f"node budget {node_budget} exhausted; incumbent cost {best_cost}",
                              incumbent=(greedy, greedy_report), incumbent_cost=best_cost,
                              nodes_expanded=expanded)
    if cost_budget is not None and best_cost > cost_budget:
        return None
    greedy_report.optimal = True
    greedy_report.nodes_expanded = expanded
    return greedy, greedy_report


class _OutOfNodes(Exception):
    pass


# ---------------------------------------------------------------------------
# random instances

def random_coset_sum(G: FiniteGroup, rng: np.random.Generator, max_layers: int = 3,
                     max_coeff: int = 3, max_terms: int = 4,
                     subgroups: Sequence[Subgroup] | None = None) -> tuple[GroupFunction, CosetDecomposition]:
    """A nonzero random integer combination of coset indicators and the decomposition that built it.

    Draws 1..``max_layers`` layers, each on a uniformly chosen subgroup with
    1..``max_terms`` distinct cosets and coefficients in
    ``[-max_coeff, max_coeff] \\ {0}``.  Identically zero sums are redrawn.
    """
    subs = list(subgroups) if subgroups is not None else enumerate_subgroups(G)
    coeff_pool = [c for c in range(-max_coeff, max_coeff + 1) if c != 0]
    while True:
        layers = []
        for _ in range(int(rng.integers(1, max_layers + 1))):
            H = subs[int(rng.integers(len(subs)))]
            reps = list(H.representatives)
            k = int(rng.integers(1, min(max_terms, len(reps)) + 1))
            chosen = rng.choice(len(reps), size=k, replace=False)
            layers.append(Layer(H, tuple((reps[int(i)], int(rng.choice(coeff_pool))) for i in chosen)))
        decomposition = CosetDecomposition(G, tuple(layers))
        vals = decomposition.values()
        if vals.any():
            return GroupFunction(G, vals, EXACT), decomposition


# ---------------------------------------------------------------------------
# JSON

def decomposition_to_dict(decomposition: CosetDecomposition) -> dict:
    return {"group": group_ref(decomposition.group),
            "layers": [{"subgroup": list(layer.subgroup.elements),
                        "terms": [{"rep": r, "coeff": z} for r, z in layer.terms]}
                       for layer in decomposition.layers]}


def decomposition_from_dict(data: dict, group: FiniteGroup | None = None, base_dir=None) -> CosetDecomposition:
    try:
        G = group if group is not None else resolve_group_ref(data["group"], base_dir)
        layers = []
        for rec in data["layers"]:
            try:
                H = subgroup_from_elements(G, rec["subgroup"])
            except ValueError as exc:
                raise InputError(f"layer subgroup {rec['subgroup']} is invalid: {exc}")
            coeffs: dict[int, int] = {}
            for term in rec["terms"]:
                coeff = term["coeff"]
                if Fraction(coeff).denominator != 1:
                    raise InputError(f"coefficient {coeff} is not an integer")
                rep = int(coset_of(G, H, int(term["rep"])).representative)
                coeffs[rep] = coeffs.get(rep, 0) + int(coeff)
            layers.append(Layer.from_mapping(H, coeffs))
        return CosetDecomposition(G, tuple(layers))
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed decomposition record: {exc!r}")


def save_decomposition(decomposition: CosetDecomposition, path) -> None:
    Path(path).write_text(json.dumps(decomposition_to_dict(decomposition)))


def load_decomposition(path, group: FiniteGroup | None = None) -> CosetDecomposition:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read decomposition file {path}: {exc}")
    return decomposition_from_dict(data, group=group, base_dir=path.parent)
