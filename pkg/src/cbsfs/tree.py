"""Explicit rooted trees built from a sampled ancestral point measure.

The construction walks each leaf's branch toward the spine and merges it
into the first strictly taller branch on the way (the spine counts as
infinitely tall), then cuts the spine at either the deepest sample
branching point (sample root) or the deepest of all branch depths
including the interval endpoints (population root).

Trees are parent-pointer node lists with times (0 at the leaves, negative
below), which makes TMRCA queries an upward walk and length accounting a
single pass over edges.  The mutation overlay is a Poisson sprinkling on
edges; a mutation's carrier set is the leaf set under its edge, so carrier
counts are per-edge quantities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .genealogy import SCHEMA_VERSION, LeafConfig, ZetaVector
from .model import ModelParams


class StructuralError(RuntimeError):
    """The probability-zero tie/degeneracy cases the construction forbids."""


class RootMode(str, Enum):
    SAMPLE_MRCA = "sample"
    POPULATION_MRCA = "population"


@dataclass
class TreeNode:
    id: int
    time: float  # 0.0 at leaves, strictly negative below
    parent: int | None
    leaf_label: int | None = None


@dataclass
class GenealogyTree:
    """Rooted tree over the n sample leaves.

    ``leaf_ids_by_rank[r - 1]`` is the node id of the leaf at position rank
    r (1..n); ``leaf_label`` on leaf nodes is the original sample index.
    """

    nodes: list[TreeNode]
    root_mode: RootMode
    root: int
    leaf_ids_by_rank: tuple[int, ...]
    _children: dict[int, list[int]] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self._children = {}
        for node in self.nodes:
            if node.parent is not None:
                self._children.setdefault(node.parent, []).append(node.id)
        for kids in self._children.values():
            kids.sort()

    @property
    def n_leaves(self) -> int:
        return len(self.leaf_ids_by_rank)

    def children(self, node_id: int) -> list[int]:
        return self._children.get(node_id, [])

    def depth(self, node_id: int) -> float:
        return -self.nodes[node_id].time

    def edges(self):
        """Yield (child_id, parent_id, length) for every edge."""
        for node in self.nodes:
            if node.parent is not None:
                yield node.id, node.parent, node.time - self.nodes[node.parent].time

    def total_length(self) -> float:
        return sum(length for _, _, length in self.edges())

    def validate(self) -> None:
        roots = [node.id for node in self.nodes if node.parent is None]
        if roots != [self.root]:
            raise StructuralError(f"expected single root {self.root}, found {roots}")
        for rank_id in self.leaf_ids_by_rank:
            if self.nodes[rank_id].time != 0.0:
                raise StructuralError("leaf times must be exactly 0")
        for child, parent, length in self.edges():
            if not length > 0.0:
                raise StructuralError(f"edge {child}->{parent} has length {length}")

    def leaf_counts(self) -> dict[int, int]:
        """Sample leaves under each node (a leaf counts itself)."""
        counts = {node.id: 0 for node in self.nodes}
        for leaf_id in self.leaf_ids_by_rank:
            counts[leaf_id] = 1
        # nodes are created parents-after-children except the leaves, so a
        # reverse topological pass is easiest via explicit stack
        order: list[int] = []
        stack = [self.root]
        while stack:
            v = stack.pop()
            order.append(v)
            stack.extend(self.children(v))
        for v in reversed(order):
            for c in self.children(v):
                counts[v] += counts[c]
        return counts

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "root_mode": self.root_mode.value,
            "root": self.root,
            "leaf_ids_by_rank": list(self.leaf_ids_by_rank),
            "nodes": [
                {
                    "id": node.id,
                    "time": node.time,
                    "parent": node.parent,
                    "leaf_label": node.leaf_label,
                }
                for node in self.nodes
            ],
        }


def tree_from_dict(data: dict) -> GenealogyTree:
    nodes = [
        TreeNode(
            id=int(item["id"]),
            time=float(item["time"]),
            parent=None if item["parent"] is None else int(item["parent"]),
            leaf_label=None if item["leaf_label"] is None else int(item["leaf_label"]),
        )
        for item in data["nodes"]
    ]
    return GenealogyTree(
        nodes=nodes,
        root_mode=RootMode(data["root_mode"]),
        root=int(data["root"]),
        leaf_ids_by_rank=tuple(int(x) for x in data["leaf_ids_by_rank"]),
    )


def build_tree(config: LeafConfig, zetas: ZetaVector, root_mode: RootMode) -> GenealogyTree:
    """Assemble the explicit tree for one sampled replicate."""
    n, spine = config.n, config.spine_index
    x = config.positions
    z = zetas.zetas

    # Attachment target of each non-spine leaf branch: first strictly
    # taller branch toward the spine; the spine itself always qualifies.
    attach: dict[int, int] = {}
    for k in range(1, n + 1):
        if k == spine:
            continue
        step = 1 if x[k] < 0.0 else -1
        m = k + step
        while m != spine and z[m] <= z[k]:
            if z[m] == z[k]:
                raise StructuralError(f"tied branch depths at ranks {k} and {m}")
            m += step
        attach[k] = m

    nodes = [
        TreeNode(id=rank - 1, time=0.0, parent=None, leaf_label=config.labels[rank - 1])
        for rank in range(1, n + 1)
    ]
    leaf_ids_by_rank = tuple(range(n))

    # One internal node per attachment, at the branch's own depth on its
    # target lineage; it is simultaneously the bottom of branch k and a
    # branching point of the target's path.
    branch_node: dict[int, int] = {}
    events: dict[int, list[tuple[float, int]]] = {}
    for k in sorted(attach):
        node = TreeNode(id=len(nodes), time=-z[k], parent=None)
        nodes.append(node)
        branch_node[k] = node.id
        events.setdefault(attach[k], []).append((z[k], k))

    # Chain each lineage's branching points by depth; the deepest element
    # of lineage k hangs onto k's own attachment node.
    deepest_on_spine: int | None = None
    for lineage in range(1, n + 1):
        chain = sorted(events.get(lineage, []))
        for (da, _), (db, _) in zip(chain, chain[1:]):
            if da == db:
                raise StructuralError(f"tied branching depths on lineage {lineage}")
        prev = lineage - 1  # the lineage's leaf node id
        for _, k in chain:
            nodes[prev].parent = branch_node[k]
            prev = branch_node[k]
        if lineage == spine:
            deepest_on_spine = prev
        else:
            nodes[prev].parent = branch_node[lineage]

    assert deepest_on_spine is not None
    if root_mode is RootMode.POPULATION_MRCA:
        root_depth = max(z)
        if root_depth > -nodes[deepest_on_spine].time:
            root = TreeNode(id=len(nodes), time=-root_depth, parent=None)
            nodes.append(root)
            nodes[deepest_on_spine].parent = root.id
            root_id = root.id
        else:
            root_id = deepest_on_spine
    else:
        root_id = deepest_on_spine

    tree = GenealogyTree(
        nodes=nodes,
        root_mode=root_mode,
        root=root_id,
        leaf_ids_by_rank=leaf_ids_by_rank,
    )
    tree.validate()
    return tree


def tree_tmrca(tree: GenealogyTree, leaf_ids: list[int] | tuple[int, ...]) -> float:
    """Depth of the MRCA of a leaf set, by upward traversal."""
    if not leaf_ids:
        raise IndexError("leaf set must be nonempty")
    first, *rest = leaf_ids
    path = []
    v: int | None = first
    while v is not None:
        path.append(v)
        v = tree.nodes[v].parent
    ancestors = {node_id: i for i, node_id in enumerate(path)}
    deepest = 0
    for leaf in rest:
        v = leaf
        while v not in ancestors:
            parent = tree.nodes[v].parent
            if parent is None:
                raise StructuralError("walked past the root without meeting")
            v = parent
        deepest = max(deepest, ancestors[v])
    return tree.depth(path[deepest])


def edge_lengths_by_count(tree: GenealogyTree) -> dict[int, float]:
    """Total edge length subtending exactly c sample leaves, for each c."""
    counts = tree.leaf_counts()
    out: dict[int, float] = {}
    for child, _, length in tree.edges():
        c = counts[child]
        out[c] = out.get(c, 0.0) + length
    return out


@dataclass(frozen=True)
class MutationOverlay:
    """Mutations as (edge child id, depth below the edge's shallow end)."""

    atoms: tuple[tuple[int, float], ...]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "atoms": [[edge, depth] for edge, depth in self.atoms],
        }


def drop_mutations(
    tree: GenealogyTree, params: ModelParams, rng: np.random.Generator
) -> MutationOverlay:
    """Poisson(mu * length) mutations per edge, uniform along the edge.

    Edges are visited in child-id order so the draw sequence is a pure
    function of (tree, seed).
    """
    atoms: list[tuple[int, float]] = []
    for child, _, length in sorted(tree.edges()):
        count = int(rng.poisson(params.mu * length))
        if count:
            for depth in rng.uniform(0.0, length, size=count):
                atoms.append((child, float(depth)))
    return MutationOverlay(atoms=tuple(atoms))


def leafset_counts(tree: GenealogyTree, overlay: MutationOverlay) -> list[int]:
    """Number of sample leaves carrying each mutation of the overlay."""
    counts = tree.leaf_counts()
    return [counts[edge] for edge, _ in overlay.atoms]


def newick_export(tree: GenealogyTree) -> str:
    """Newick text with branch lengths; leaves labelled X0..X{n-1} by
    sample index.  The root carries no length, so emitted lengths sum to
    the total tree length.  A single-node tree serializes as "(X0:0.0);".
    """

    def label(node: TreeNode) -> str:
        return f"X{node.leaf_label}" if node.leaf_label is not None else ""

    root = tree.nodes[tree.root]
    if not tree.children(tree.root):
        return f"({label(root)}:0.0);"
    rendered: dict[int, str] = {}
    stack: list[tuple[int, bool]] = [(tree.root, False)]
    while stack:
        v, expanded = stack.pop()
        kids = tree.children(v)
        if kids and not expanded:
            stack.append((v, True))
            stack.extend((c, False) for c in kids)
            continue
        node = tree.nodes[v]
        inner = "(" + ",".join(rendered[c] for c in kids) + ")" if kids else ""
        if v == tree.root:
            rendered[v] = inner + label(node) + ";"
        else:
            length = node.time - tree.nodes[node.parent].time
            rendered[v] = inner + label(node) + f":{length!r}"
    return rendered[tree.root]


def parse_newick(text: str):
    """Parse Newick into nested (label, length, children) tuples.

    Minimal grammar: tree -> subtree ';', subtree -> leaf | '(' list ')'
    name? (':' length)?.  Used for round-trip checks of the exporter.
    """
    text = text.strip()
    if not text.endswith(";"):
        raise ValueError("Newick text must end with ';'")
    body = text[:-1]
    pos = 0

    def parse_subtree():
        nonlocal pos
        children = []
        if pos < len(body) and body[pos] == "(":
            pos += 1
            while True:
                children.append(parse_subtree())
                if body[pos] == ",":
                    pos += 1
                    continue
                if body[pos] == ")":
                    pos += 1
                    break
                raise ValueError(f"unexpected character {body[pos]!r} at {pos}")
        start = pos
        while pos < len(body) and body[pos] not in ",():;":
            pos += 1
        name = body[start:pos]
        length = None
        if pos < len(body) and body[pos] == ":":
            pos += 1
            start = pos
            while pos < len(body) and body[pos] not in ",()":
                pos += 1
            length = float(body[start:pos])
        return (name, length, tuple(children))

    result = parse_subtree()
    if pos != len(body):
        raise ValueError(f"trailing characters after position {pos}")
    return result
