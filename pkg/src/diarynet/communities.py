"""Weighted modularity, Louvain detection, brute-force oracle, agreement.

Louvain is order-dependent, so the node visit order is pinned: a seeded
shuffle by default, or an explicit order for reproducibility experiments.
Community labels used for tie-breaking are visit-order indices, never raw
node ids, which keeps results invariant under node relabeling (up to label
renaming) when the visit order is permuted correspondingly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

__all__ = [
    "UndefinedModularityError",
    "Graph",
    "Partition",
    "modularity",
    "louvain",
    "brute_force_best_partition",
    "partition_agreement",
]


class UndefinedModularityError(ValueError):
    """Modularity is undefined when the total edge weight is zero."""


@dataclass(frozen=True)
class Graph:
    """Minimal weighted undirected graph for community analysis.

    Any object with .nodes (iterable of ids) and .edges (mapping pair ->
    weight) works where a Graph is expected; CoocGraph satisfies this.
    Self-loops are legal (aggregated graphs have them).
    """

    nodes: tuple = ()
    edges: Mapping = field(default_factory=dict)


@dataclass(frozen=True)
class Partition:
    """Louvain result over the original node ids.

    levels[0] is the finest grouping; each later entry is a coarsening of the
    one before.  assignment is the final (coarsest) level.  modularity holds
    Q per level.  All labels are canonicalized to 0..C-1 by first appearance
    in sorted node-id order.
    """

    assignment: dict
    levels: tuple
    modularity: tuple


# ---------------------------------------------------------------------------
# Graph normalization
# ---------------------------------------------------------------------------


def _normalize(graph) -> tuple[list, dict[tuple[int, int], float]]:
    """Sorted node list plus integer-keyed canonical edge dict."""
    ids = sorted(graph.nodes)
    if not ids:
        raise ValueError("graph has no nodes")
    index = {u: i for i, u in enumerate(ids)}
    edges: dict[tuple[int, int], float] = {}
    for (u, v), w in dict(graph.edges).items():
        if u not in index or v not in index:
            raise ValueError(f"edge ({u!r}, {v!r}) references a missing node")
        w = float(w)
        if w < 0:
            raise ValueError(f"negative edge weight on ({u!r}, {v!r})")
        a, b = index[u], index[v]
        key = (a, b) if a <= b else (b, a)
        edges[key] = edges.get(key, 0.0) + w
    return ids, edges


def _degrees_and_w(n: int, edges: Mapping[tuple[int, int], float]) -> tuple[list[float], float]:
    # Self-loop weight counts once in W and twice in the node's degree.
    k = [0.0] * n
    W = 0.0
    for (a, b), w in edges.items():
        W += w
        if a == b:
            k[a] += 2 * w
        else:
            k[a] += w
            k[b] += w
    return k, W


# ---------------------------------------------------------------------------
# Modularity
# ---------------------------------------------------------------------------


def modularity(graph, assignment: Mapping, gamma: float = 1.0) -> float:
    """Q = sum over communities of [W_in/W - gamma * (S / 2W)^2].

    W is the total edge weight (each edge once), W_in the weight inside the
    community (self-loops included once), S the sum of weighted degrees
    (self-loops twice).  Direct-sum evaluation; relative error stays at
    floating-point level.
    """
    ids, edges = _normalize(graph)
    missing = [u for u in ids if u not in assignment]
    if missing:
        raise ValueError(f"assignment lacks node(s): {missing[:5]!r}")
    k, W = _degrees_and_w(len(ids), edges)
    if W == 0:
        raise UndefinedModularityError("total edge weight is zero")

    comm_of = [assignment[u] for u in ids]
    w_in: dict = {}
    s: dict = {}
    for i, u in enumerate(ids):
        c = comm_of[i]
        s[c] = s.get(c, 0.0) + k[i]
        w_in.setdefault(c, 0.0)
    for (a, b), w in edges.items():
        if comm_of[a] == comm_of[b]:
            w_in[comm_of[a]] += w

    q = 0.0
    for c in w_in:
        q += w_in[c] / W - gamma * (s[c] / (2 * W)) ** 2
    return q


# ---------------------------------------------------------------------------
# Louvain
# ---------------------------------------------------------------------------


def _phase1(
    order: list[int],
    adj: list[dict[int, float]],
    k: list[float],
    W: float,
    gamma: float,
) -> tuple[list[int], bool]:
    """Local moving.  Returns (community per node, any move happened).

    Community labels start as visit-order indices.  A node moves only for a
    strictly positive gain over staying put; equal-gain targets lose to the
    lowest label, and a tie with the node's own community means no move.
    """
    n = len(order)
    comm = [0] * n
    for pos, u in enumerate(order):
        comm[u] = pos
    S = [0.0] * n
    for u in range(n):
        S[comm[u]] += k[u]

    half_inv_w2 = gamma / (2 * W * W)
    moved_any = False
    while True:
        moves = 0
        for u in order:
            own = comm[u]
            S[own] -= k[u]
            neigh_w: dict[int, float] = {}
            for v, w in adj[u].items():
                if v != u:
                    c = comm[v]
                    neigh_w[c] = neigh_w.get(c, 0.0) + w
            best_label = own
            best_gain = neigh_w.get(own, 0.0) / W - k[u] * S[own] * half_inv_w2
            for label in sorted(neigh_w):
                if label == own:
                    continue
                gain = neigh_w[label] / W - k[u] * S[label] * half_inv_w2
                if gain > best_gain:
                    best_gain = gain
                    best_label = label
            comm[u] = best_label
            S[best_label] += k[u]
            if best_label != own:
                moves += 1
        if moves == 0:
            break
        moved_any = True
    return comm, moved_any


def _aggregate(
    comm: list[int],
    edges: Mapping[tuple[int, int], float],
    order: list[int],
) -> tuple[dict[int, int], dict[tuple[int, int], float], int]:
    """Relabel communities by first appearance in visit order and merge edges."""
    label_map: dict[int, int] = {}
    for u in order:
        c = comm[u]
        if c not in label_map:
            label_map[c] = len(label_map)
    new_edges: dict[tuple[int, int], float] = {}
    for (a, b), w in edges.items():
        ca, cb = label_map[comm[a]], label_map[comm[b]]
        key = (ca, cb) if ca <= cb else (cb, ca)
        new_edges[key] = new_edges.get(key, 0.0) + w
    node_map = {u: label_map[comm[u]] for u in range(len(comm))}
    return node_map, new_edges, len(label_map)


def _canonical_labels(ids: list, assignment: Mapping) -> dict:
    """Relabel to 0..C-1 by first appearance over sorted node ids."""
    relabel: dict = {}
    out = {}
    for u in ids:
        c = assignment[u]
        if c not in relabel:
            relabel[c] = len(relabel)
        out[u] = relabel[c]
    return out


def louvain(
    graph,
    seed: int = 0,
    gamma: float = 1.0,
    order: Sequence | None = None,
    validate: bool = False,
) -> Partition:
    """Two-phase Louvain with a recorded hierarchy.

    Phase 1 moves single nodes; phase 2 collapses communities to super-nodes
    (intra-community weight becomes a self-loop) and recurses.  The visit
    order at the first level is random.Random(seed) shuffling the sorted node
    ids, unless an explicit order (a permutation of the node ids) is given;
    deeper levels shuffle the super-node ids with the same generator.

    A graph with zero total edge weight gets the degenerate answer: every
    node its own community, Q defined as 0.

    validate rechecks, from scratch on the input graph, that Q never
    decreases from level to level.
    """
    ids, edges = _normalize(graph)
    n = len(ids)
    k, W = _degrees_and_w(n, edges)
    rng = random.Random(seed)

    if W == 0:
        assignment = {u: i for i, u in enumerate(ids)}
        return Partition(
            assignment=assignment, levels=(assignment,), modularity=(0.0,)
        )

    if order is None:
        perm = list(range(n))
        rng.shuffle(perm)
    else:
        given = list(order)
        if sorted(given) != ids:
            raise ValueError("order must be a permutation of the graph's node ids")
        index = {u: i for i, u in enumerate(ids)}
        perm = [index[u] for u in given]

    levels: list[dict] = []
    qs: list[float] = []
    node_to_super = list(range(n))  # original index -> current super-node
    cur_edges = edges
    cur_n = n
    cur_order = perm

    while True:
        adj: list[dict[int, float]] = [dict() for _ in range(cur_n)]
        for (a, b), w in cur_edges.items():
            adj[a][b] = adj[a].get(b, 0.0) + w
            if a != b:
                adj[b][a] = adj[b].get(a, 0.0) + w
        cur_k, _ = _degrees_and_w(cur_n, cur_edges)

        comm, moved = _phase1(cur_order, adj, cur_k, W, gamma)
        node_map, new_edges, c_count = _aggregate(comm, cur_edges, cur_order)

        assignment = {
            ids[i]: node_map[node_to_super[i]] for i in range(n)
        }
        if levels and not moved:
            break
        levels.append(_canonical_labels(ids, assignment))
        qs.append(modularity(graph, levels[-1], gamma=gamma))
        if not moved:
            break
        node_to_super = [node_map[s] for s in node_to_super]
        cur_edges = new_edges
        cur_n = c_count
        cur_order = list(range(c_count))
        rng.shuffle(cur_order)

    if validate:
        for a, b in zip(qs, qs[1:]):
            if b < a - 1e-9:
                raise AssertionError(f"modularity decreased across levels: {a} -> {b}")

    return Partition(
        assignment=levels[-1], levels=tuple(levels), modularity=tuple(qs)
    )


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------


def _restricted_growth_strings(n: int):
    """All set partitions of range(n) as RGS, lexicographic order."""
    a = [0] * n
    while True:
        yield list(a)
        for i in range(n - 1, 0, -1):
            if a[i] <= max(a[:i]):
                a[i] += 1
                for j in range(i + 1, n):
                    a[j] = 0
                break
        else:
            return


def brute_force_best_partition(graph, gamma: float = 1.0) -> tuple[dict, float]:
    """Exhaustive best-Q partition; the test oracle for louvain.

    Ties go to the first partition in canonical RGS enumeration order over
    sorted node ids (so the all-in-one partition wins any tie).  Refuses more
    than 10 nodes: Bell(11) is past the point of usefulness.
    """
    ids, edges = _normalize(graph)
    n = len(ids)
    if n > 10:
        raise ValueError("brute force is limited to graphs with <= 10 nodes")
    k, W = _degrees_and_w(n, edges)
    if W == 0:
        return {u: 0 for u in ids}, 0.0

    comm_edges = [(a, b, w) for (a, b), w in edges.items()]
    best_q = None
    best = None
    for rgs in _restricted_growth_strings(n):
        s: dict[int, float] = {}
        w_in: dict[int, float] = {}
        for i in range(n):
            c = rgs[i]
            s[c] = s.get(c, 0.0) + k[i]
        for a, b, w in comm_edges:
            if rgs[a] == rgs[b]:
                w_in[rgs[a]] = w_in.get(rgs[a], 0.0) + w
        q = 0.0
        for c in s:
            q += w_in.get(c, 0.0) / W - gamma * (s[c] / (2 * W)) ** 2
        if best_q is None or q > best_q:
            best_q = q
            best = rgs
    assignment = _canonical_labels(ids, {u: best[i] for i, u in enumerate(ids)})
    return assignment, best_q


# ---------------------------------------------------------------------------
# Agreement
# ---------------------------------------------------------------------------


def partition_agreement(p1: Mapping, p2: Mapping, subset: Iterable) -> float:
    """Rand index over node pairs within subset.

    Fraction of pairs the two partitions treat the same way (both together or
    both apart).  A single-node subset scores 1.0 by convention.
    """
    nodes = sorted(set(subset))
    if not nodes:
        raise ValueError("subset must be non-empty")
    for u in nodes:
        if u not in p1 or u not in p2:
            raise ValueError(f"node {u!r} missing from a partition")
    if len(nodes) == 1:
        return 1.0
    agree = 0
    total = 0
    for i, u in enumerate(nodes):
        for v in nodes[i + 1 :]:
            same1 = p1[u] == p1[v]
            same2 = p2[u] == p2[v]
            agree += same1 == same2
            total += 1
    return agree / total
