"""Coset decision trees.

Internal nodes test membership of the input in a left coset; the 1-edge is
taken when the input lies in the coset.  Leaves carry integers.  Trees are
stored as a flat arena of nodes addressed by integer ids.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterator, Union

import numpy as np

from .errors import EmptyDecomposition, InputError, MalformedTree, SizeLimitExceeded
from .functions import EXACT, GroupFunction
from .groups import (Coset, FiniteGroup, Subgroup, coset_of, group_ref, resolve_group_ref,
                     subgroup_from_elements)

if TYPE_CHECKING:
    from .decompose import CosetDecomposition

MAX_COMPILED_LEAVES = 500_000


@dataclass(frozen=True)
class Leaf:
    value: int


@dataclass(frozen=True)
class Internal:
    test: Coset
    e1: int
    e0: int


Node = Union[Leaf, Internal]


@dataclass(frozen=True)
class PathTerm:
    """A maximal root-to-leaf path: ``z_P`` and the factors of ``g_P``.

    Each factor is ``(W, True)`` for ``1_W`` or ``(W, False)`` for ``1 - 1_W``.
    """

    value: int
    factors: tuple[tuple[Coset, bool], ...]

    def indicator(self, G: FiniteGroup) -> np.ndarray:
        g = np.ones(G.order, dtype=np.int64)
        for W, inside in self.factors:
            g *= W.mask if inside else ~W.mask
        return g


@dataclass(frozen=True, eq=False)
class CosetDecisionTree:
    group: FiniteGroup = field(repr=False)
    nodes: tuple[Node, ...]
    root: int = 0

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        _validate(self)

    def node(self, i: int) -> Node:
        return self.nodes[i]

    def __len__(self):
        return len(self.nodes)


def _validate(tree: CosetDecisionTree):
    nodes, n = tree.nodes, len(tree.nodes)
    if n == 0:
        raise MalformedTree("tree has no nodes")
    if not 0 <= tree.root < n:
        raise MalformedTree(f"root id {tree.root} out of range", root=tree.root)
    seen = np.zeros(n, dtype=bool)
    stack = [tree.root]
    while stack:
        i = stack.pop()
        if seen[i]:
            raise MalformedTree(f"node {i} is reached twice (cycle or shared subtree)", node=i)
        seen[i] = True
        node = nodes[i]
        if isinstance(node, Leaf):
            if not isinstance(node.value, (int, np.integer)):
                raise MalformedTree(f"leaf {i} has non-integer value {node.value!r}", node=i)
            continue
        if not isinstance(node, Internal):
            raise MalformedTree(f"node {i} has unknown kind {type(node).__name__}", node=i)
        parent = node.test.subgroup.parent
        if parent is not tree.group and parent != tree.group:
            raise MalformedTree(f"node {i} tests a coset of a different group", node=i)
        for child in (node.e1, node.e0):
            if not 0 <= child < n:
                raise MalformedTree(f"node {i} points to missing id {child}", node=i, child=child)
        if node.e1 == node.e0:
            raise MalformedTree(f"node {i} has identical children", node=i)
        stack.extend((node.e1, node.e0))
    if not seen.all():
        orphan = int(np.flatnonzero(~seen)[0])
        raise MalformedTree(f"node {orphan} is unreachable from the root", node=orphan)


class TreeBuilder:
    """Append-only arena used to assemble trees bottom-up."""

    def __init__(self, group: FiniteGroup):
        self.group = group
        self.nodes: list[Node] = []

    def leaf(self, value: int) -> int:
        self.nodes.append(Leaf(int(value)))
        return len(self.nodes) - 1

    def test(self, W: Coset, e1: int, e0: int) -> int:
        self.nodes.append(Internal(W, e1, e0))
        return len(self.nodes) - 1

    def build(self, root: int) -> CosetDecisionTree:
        return CosetDecisionTree(self.group, tuple(self.nodes), root)


def single_leaf(G: FiniteGroup, value: int) -> CosetDecisionTree:
    return CosetDecisionTree(G, (Leaf(int(value)),), 0)


# ---------------------------------------------------------------------------
# evaluation

def evaluate(tree: CosetDecisionTree, x: int) -> int:
    """Follow the computation path of ``x`` and return the leaf value."""
    node = tree.nodes[tree.root]
    while isinstance(node, Internal):
        node = tree.nodes[node.e1 if x in node.test else node.e0]
    return node.value


def evaluate_all(tree: CosetDecisionTree) -> np.ndarray:
    """``evaluate`` at every element at once, routing masks down the tree."""
    G = tree.group
    out = np.zeros(G.order, dtype=np.int64)
    stack = [(tree.root, np.ones(G.order, dtype=bool))]
    while stack:
        i, mask = stack.pop()
        node = tree.nodes[i]
        if isinstance(node, Leaf):
            out[mask] = node.value
            continue
        inside = node.test.mask
        stack.append((node.e1, mask & inside))
        stack.append((node.e0, mask & ~inside))
    return out


def paths(tree: CosetDecisionTree) -> Iterator[PathTerm]:
    stack = [(tree.root, ())]
    while stack:
        i, factors = stack.pop()
        node = tree.nodes[i]
        if isinstance(node, Leaf):
            yield PathTerm(node.value, factors)
            continue
        stack.append((node.e0, factors + ((node.test, False),)))
        stack.append((node.e1, factors + ((node.test, True),)))


def to_function(tree: CosetDecisionTree) -> GroupFunction:
    """``sum_P z_P g_P`` over maximal paths, in exact arithmetic."""
    G = tree.group
    total = np.zeros(G.order, dtype=np.int64)
    for term in paths(tree):
        if term.value:
            total += term.value * term.indicator(G)
    return GroupFunction(G, total, EXACT)


def leaf_count(tree: CosetDecisionTree) -> int:
    return sum(isinstance(node, Leaf) for node in tree.nodes)


def depth(tree: CosetDecisionTree) -> int:
    best = 0
    stack = [(tree.root, 0)]
    while stack:
        i, d = stack.pop()
        node = tree.nodes[i]
        if isinstance(node, Leaf):
            best = max(best, d)
        else:
            stack.extend(((node.e1, d + 1), (node.e0, d + 1)))
    return best


def leaf_values(tree: CosetDecisionTree) -> list[int]:
    return [node.value for node in tree.nodes if isinstance(node, Leaf)]


# ---------------------------------------------------------------------------
# compilation and pruning

def leaf_bound(decomposition: CosetDecomposition) -> int:
    """``prod_i (R_i + 1)`` where ``R_i`` is the support size of layer ``i``."""
    return int(np.prod([layer.support_size + 1 for layer in decomposition.layers], dtype=object))


def compile_decomposition(decomposition: CosetDecomposition,
                          max_leaves: int = MAX_COMPILED_LEAVES) -> CosetDecisionTree:
    """Chain one decision list per layer; each leaf of a stage roots a copy of the next stage.

    Within a layer the cosets are tested in increasing order of canonical
    representative; a 1-edge adds that coset's coefficient to the running
    leaf value.  The result has exactly ``prod_i (R_i + 1)`` leaves.
    """
    layers = decomposition.layers
    if not layers:
        raise EmptyDecomposition("cannot compile a decomposition with no layers")
    bound = leaf_bound(decomposition)
    if bound > max_leaves:
        raise SizeLimitExceeded(f"compiled tree would have {bound} leaves (limit {max_leaves})",
                                leaves=bound, limit=max_leaves)
    G = decomposition.group
    builder = TreeBuilder(G)
    stages = [[(Coset(layer.subgroup, rep), z) for rep, z in layer.terms] for layer in layers]

    def stage(i: int, acc: int) -> int:
        if i == len(stages):
            return builder.leaf(acc)
        # build the list back to front so every 0-edge already has a target
        nxt = stage(i + 1, acc)
        for W, z in reversed(stages[i]):
            nxt = builder.test(W, stage(i + 1, acc + z), nxt)
        return nxt

    return builder.build(stage(0, 0))


def prune(tree: CosetDecisionTree) -> CosetDecisionTree:
    """Collapse internal nodes whose two subtrees are structurally identical.

    Subtrees are hashed bottom-up, so a collapse that makes a parent's
    children identical is picked up in the same pass.
    """
    order = []
    stack = [tree.root]
    while stack:
        i = stack.pop()
        order.append(i)
        node = tree.nodes[i]
        if isinstance(node, Internal):
            stack.extend((node.e1, node.e0))
    sig_ids: dict[tuple, int] = {}
    sig: dict[int, int] = {}
    keep: dict[int, int] = {}           # node -> node that replaces it
    for i in reversed(order):
        node = tree.nodes[i]
        if isinstance(node, Leaf):
            key = ("leaf", node.value)
            keep[i] = i
        elif sig[node.e1] == sig[node.e0]:
            sig[i] = sig[node.e1]
            keep[i] = keep[node.e1]
            continue
        else:
            key = ("test", node.test.key(), sig[node.e1], sig[node.e0])
            keep[i] = i
        sig[i] = sig_ids.setdefault(key, len(sig_ids))

    builder = TreeBuilder(tree.group)

    def emit(i: int) -> int:
        node = tree.nodes[keep[i]]
        if isinstance(node, Leaf):
            return builder.leaf(node.value)
        return builder.test(node.test, emit(node.e1), emit(node.e0))

    return builder.build(emit(tree.root))


# ---------------------------------------------------------------------------
# export

def _coset_label(W: Coset, limit: int = 8) -> str:
    H = W.subgroup
    if H.order <= limit:
        body = "{" + ",".join(map(str, H.elements)) + "}"
    else:
        body = f"H[{H.order}]"
    return f"{W.representative}·{body}"


def export_dot(tree: CosetDecisionTree, name: str = "T") -> str:
    """Graphviz source: circles for coset tests, boxes for leaves, dashed 0-edges."""
    lines = [f"digraph {name} {{", "  node [fontname=\"Helvetica\"];"]
    ids: dict[int, int] = {}
    stack = [tree.root]
    while stack:
        i = stack.pop()
        ids[i] = len(ids)
        node = tree.nodes[i]
        if isinstance(node, Internal):
            stack.extend((node.e0, node.e1))
    for i, k in sorted(ids.items(), key=lambda kv: kv[1]):
        node = tree.nodes[i]
        if isinstance(node, Leaf):
            lines.append(f"  n{k} [shape=box, label=\"{node.value}\"];")
        else:
            lines.append(f"  n{k} [shape=circle, label=\"{_coset_label(node.test)}\"];")
    for i, k in sorted(ids.items(), key=lambda kv: kv[1]):
        node = tree.nodes[i]
        if isinstance(node, Internal):
            lines.append(f"  n{k} -> n{ids[node.e1]} [label=\"1\"];")
            lines.append(f"  n{k} -> n{ids[node.e0]} [label=\"0\", style=dashed];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def tree_to_dict(tree: CosetDecisionTree) -> dict:
    nodes = []
    for node in tree.nodes:
        if isinstance(node, Leaf):
            nodes.append({"kind": "leaf", "value": int(node.value)})
        else:
            nodes.append({"kind": "internal", "subgroup": list(node.test.subgroup.elements),
                          "rep": node.test.representative, "e1": node.e1, "e0": node.e0})
    return {"group": group_ref(tree.group), "root": tree.root, "nodes": nodes}


def tree_from_dict(data: dict, group: FiniteGroup | None = None, base_dir=None) -> CosetDecisionTree:
    try:
        G = group if group is not None else resolve_group_ref(data["group"], base_dir)
        subgroups: dict[tuple, Subgroup] = {}
        nodes: list[Node] = []
        for rec in data["nodes"]:
            if rec["kind"] == "leaf":
                nodes.append(Leaf(int(rec["value"])))
            elif rec["kind"] == "internal":
                elems = tuple(sorted(int(x) for x in rec["subgroup"]))
                if elems not in subgroups:
                    try:
                        subgroups[elems] = subgroup_from_elements(G, elems)
                    except ValueError as exc:
                        raise MalformedTree(f"node tests a non-subgroup {list(elems)}: {exc}")
                rep = int(rec["rep"])
                if not 0 <= rep < G.order:
                    raise MalformedTree(f"coset representative {rep} is not a group element")
                nodes.append(Internal(coset_of(G, subgroups[elems], rep), int(rec["e1"]), int(rec["e0"])))
            else:
                raise MalformedTree(f"unknown node kind {rec['kind']!r}")
        return CosetDecisionTree(G, tuple(nodes), int(data.get("root", 0)))
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed tree record: {exc!r}")


def save_tree(tree: CosetDecisionTree, path) -> None:
    Path(path).write_text(json.dumps(tree_to_dict(tree)))


def load_tree(path, group: FiniteGroup | None = None) -> CosetDecisionTree:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read tree file {path}: {exc}")
    return tree_from_dict(data, group=group, base_dir=path.parent)
