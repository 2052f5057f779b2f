"""ForceAtlas2 layout and label-overlap removal.

Forces follow the published ForceAtlas2 model: linear attraction along edges,
degree-weighted repulsion, optional LinLog attraction and strong gravity, and
the swing/traction adaptive speed schedule.  Every step is synchronous (all
forces from pre-step positions) and every iteration order is canonical, so a
(graph, params, seed) triple always reproduces bit-identical positions.

The label pass has no published specification; the pairwise push-apart scheme
implemented here is this project's own definition: overlapping boxes move
apart along their center line, half the required separation each.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

__all__ = [
    "LayoutParams",
    "LayoutState",
    "LayoutResult",
    "fa2_init",
    "fa2_step",
    "fa2_run",
    "resolve_label_overlaps",
]

# Adaptive-speed constants from the published ForceAtlas2 defaults.
K_SPEED = 0.1          # per-node speed scaling (k_s)
K_SPEED_MAX = 10.0     # cap on per-node displacement relative to force (k_smax)
SPEED_RISE_CAP = 1.5   # global speed may grow at most 50% per step
JITTER_DISTANCE = 1e-6  # separation applied to exactly coincident nodes


@dataclass(frozen=True)
class LayoutParams:
    k_r: float = 1.0                    # repulsion scaling, > 0
    k_g: float = 1.0                    # gravity, >= 0
    edge_weight_influence: float = 1.0  # delta exponent on edge weights, >= 0
    tolerance: float = 1.0              # swing tolerance (jitter tolerance), > 0
    linlog: bool = False
    strong_gravity: bool = False
    max_iterations: int = 1000
    convergence_threshold: float = 1e-4  # on mean per-node displacement
    barnes_hut_nodes: int = 1000         # exact repulsion at or below this size
    barnes_hut_theta: float = 1.2

    def __post_init__(self) -> None:
        if self.k_r <= 0:
            raise ValueError("k_r must be > 0")
        if self.k_g < 0:
            raise ValueError("k_g must be >= 0")
        if self.edge_weight_influence < 0:
            raise ValueError("edge_weight_influence must be >= 0")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.convergence_threshold <= 0:
            raise ValueError("convergence_threshold must be > 0")
        if self.barnes_hut_theta <= 0:
            raise ValueError("barnes_hut_theta must be > 0")


@dataclass(frozen=True)
class LayoutState:
    positions: dict
    prev_forces: dict
    speed: float = 1.0
    iteration: int = 0
    mean_displacement: float = math.inf
    jitter_seed: int = 0


@dataclass(frozen=True)
class LayoutResult:
    positions: dict
    converged: bool
    iterations: int


def _graph_arrays(graph) -> tuple[list, dict, list[tuple[int, int, float]], list[int]]:
    ids = sorted(graph.nodes)
    index = {u: i for i, u in enumerate(ids)}
    edges: list[tuple[int, int, float]] = []
    neighbors: list[set[int]] = [set() for _ in ids]
    for (u, v), w in sorted(dict(graph.edges).items()):
        a, b = index[u], index[v]
        if a == b:
            continue  # self-loops exert no layout force
        edges.append((a, b, float(w)))
        neighbors[a].add(b)
        neighbors[b].add(a)
    deg = [len(s) for s in neighbors]
    return ids, index, edges, deg


# ---------------------------------------------------------------------------
# Barnes-Hut quadtree (used only above params.barnes_hut_nodes)
# ---------------------------------------------------------------------------


class _QuadNode:
    __slots__ = ("cx", "cy", "half", "mass", "mx", "my", "children", "point", "count")

    def __init__(self, cx: float, cy: float, half: float) -> None:
        self.cx = cx
        self.cy = cy
        self.half = half
        self.mass = 0.0
        self.mx = 0.0  # mass-weighted centroid accumulators
        self.my = 0.0
        self.children: list[_QuadNode] | None = None
        self.point: tuple[float, float, float] | None = None  # x, y, mass
        self.count = 0


def _quad_insert(node: _QuadNode, x: float, y: float, m: float, depth: int = 0) -> None:
    node.mass += m
    node.mx += m * x
    node.my += m * y
    node.count += 1
    if node.count == 1:
        node.point = (x, y, m)
        return
    if depth > 48:
        # Pathologically close points: fold into the centroid, stop splitting.
        return
    if node.children is None:
        node.children = [
            _QuadNode(
                node.cx + dx * node.half / 2, node.cy + dy * node.half / 2, node.half / 2
            )
            for dy in (-1, 1)
            for dx in (-1, 1)
        ]
        px, py, pm = node.point
        node.point = None
        _quad_insert(_quad_child(node, px, py), px, py, pm, depth + 1)
    _quad_insert(_quad_child(node, x, y), x, y, m, depth + 1)


def _quad_child(node: _QuadNode, x: float, y: float) -> _QuadNode:
    i = (1 if x >= node.cx else 0) + (2 if y >= node.cy else 0)
    return node.children[i]


def _bh_force(
    node: _QuadNode, x: float, y: float, m: float, k_r: float, theta: float
) -> tuple[float, float]:
    if node.count == 0:
        return 0.0, 0.0
    if node.count == 1:
        px, py, pm = node.point
        dx, dy = x - px, y - py
        d2 = dx * dx + dy * dy
        if d2 == 0:
            return 0.0, 0.0
        f = k_r * m * pm / d2
        return dx * f, dy * f
    gx, gy = node.mx / node.mass, node.my / node.mass
    dx, dy = x - gx, y - gy
    d2 = dx * dx + dy * dy
    inside = abs(x - node.cx) <= node.half and abs(y - node.cy) <= node.half
    opened = node.children is not None
    if d2 > 0 and (
        not opened
        or (not inside and (2 * node.half) ** 2 < (theta * theta) * d2)
    ):
        # Far enough away (or a collapsed deep leaf): act as one point mass.
        f = k_r * m * node.mass / d2
        return dx * f, dy * f
    if not opened:
        return 0.0, 0.0
    fx = fy = 0.0
    for child in node.children:
        cfx, cfy = _bh_force(child, x, y, m, k_r, theta)
        fx += cfx
        fy += cfy
    return fx, fy


# ---------------------------------------------------------------------------
# Core step
# ---------------------------------------------------------------------------


def fa2_init(graph, seed: int = 0) -> LayoutState:
    """Seed-deterministic initial positions, uniform in the unit disk."""
    ids = sorted(graph.nodes)
    rng = random.Random(seed)
    positions = {}
    for u in ids:
        r = math.sqrt(rng.random())
        theta = rng.random() * 2 * math.pi
        positions[u] = (r * math.cos(theta), r * math.sin(theta))
    return LayoutState(
        positions=positions,
        prev_forces={u: (0.0, 0.0) for u in ids},
        speed=1.0,
        iteration=0,
        jitter_seed=seed,
    )


def fa2_step(state: LayoutState, graph, params: LayoutParams) -> LayoutState:
    """One synchronous update; all forces evaluated at pre-step positions."""
    ids, index, edges, deg = _graph_arrays(graph)
    n = len(ids)
    if n == 0:
        return replace(state, iteration=state.iteration + 1, mean_displacement=0.0)

    xs = [0.0] * n
    ys = [0.0] * n
    for u in ids:
        x, y = state.positions[u]
        xs[index[u]], ys[index[u]] = x, y

    # Exactly coincident nodes get a tiny deterministic separation first;
    # repulsion is singular at zero distance.
    seen: dict[tuple[float, float], int] = {}
    for i in range(n):
        key = (xs[i], ys[i])
        if key in seen:
            rng = random.Random(state.jitter_seed * 1_000_003 + state.iteration * 8191 + i)
            angle = rng.random() * 2 * math.pi
            xs[i] += JITTER_DISTANCE * math.cos(angle)
            ys[i] += JITTER_DISTANCE * math.sin(angle)
        else:
            seen[key] = i

    mass = [d + 1.0 for d in deg]
    fx = [0.0] * n
    fy = [0.0] * n

    # Repulsion: F_r = k_r * mass_u * mass_v / d, exact pairwise up to the
    # Barnes-Hut threshold, quadtree approximation (theta) above it.
    if n <= params.barnes_hut_nodes:
        for i in range(n):
            for j in range(i + 1, n):
                dx, dy = xs[i] - xs[j], ys[i] - ys[j]
                d2 = dx * dx + dy * dy
                if d2 == 0:
                    continue
                f = params.k_r * mass[i] * mass[j] / d2
                fx[i] += dx * f
                fy[i] += dy * f
                fx[j] -= dx * f
                fy[j] -= dy * f
    else:
        half = max(
            max((abs(v) for v in xs), default=1.0),
            max((abs(v) for v in ys), default=1.0),
        ) + 1.0
        root = _QuadNode(0.0, 0.0, half)
        for i in range(n):
            _quad_insert(root, xs[i], ys[i], mass[i])
        for i in range(n):
            bx, by = _bh_force(
                root, xs[i], ys[i], mass[i], params.k_r, params.barnes_hut_theta
            )
            # The tree includes node i itself; a point at zero distance
            # contributes nothing, so no self-term correction is needed.
            fx[i] += bx
            fy[i] += by

    # Attraction: F_a = w^delta * d, or w^delta * log(1 + d) in LinLog mode.
    delta = params.edge_weight_influence
    for a, b, w in edges:
        dx, dy = xs[b] - xs[a], ys[b] - ys[a]
        d = math.hypot(dx, dy)
        if d == 0:
            continue
        aw = w**delta
        factor = aw * math.log(1 + d) / d if params.linlog else aw
        fx[a] += dx * factor
        fy[a] += dy * factor
        fx[b] -= dx * factor
        fy[b] -= dy * factor

    # Gravity toward the origin: k_g * mass (strong mode scales with distance).
    if params.k_g > 0:
        for i in range(n):
            r = math.hypot(xs[i], ys[i])
            if r == 0:
                continue
            if params.strong_gravity:
                f = params.k_g * mass[i]
            else:
                f = params.k_g * mass[i] / r
            fx[i] -= xs[i] * f
            fy[i] -= ys[i] * f

    # Adaptive speed from swing (force disagreement) vs traction (persistence).
    swing = [0.0] * n
    traction = [0.0] * n
    for i, u in enumerate(ids):
        pfx, pfy = state.prev_forces[u]
        swing[i] = math.hypot(fx[i] - pfx, fy[i] - pfy)
        traction[i] = math.hypot(fx[i] + pfx, fy[i] + pfy) / 2
    total_swing = sum(mass[i] * swing[i] for i in range(n))
    total_traction = sum(mass[i] * traction[i] for i in range(n))
    if total_swing > 0:
        target = params.tolerance * total_traction / total_swing
    else:
        target = state.speed
    speed = min(target, SPEED_RISE_CAP * state.speed)

    positions = {}
    prev_forces = {}
    total_disp = 0.0
    for i, u in enumerate(ids):
        s = K_SPEED * speed / (1 + speed * math.sqrt(swing[i]))
        fmag = math.hypot(fx[i], fy[i])
        if fmag > 0:
            s = min(s, K_SPEED_MAX / fmag)
        dx, dy = fx[i] * s, fy[i] * s
        positions[u] = (xs[i] + dx, ys[i] + dy)
        prev_forces[u] = (fx[i], fy[i])
        total_disp += math.hypot(dx, dy)

    return LayoutState(
        positions=positions,
        prev_forces=prev_forces,
        speed=speed,
        iteration=state.iteration + 1,
        mean_displacement=total_disp / n,
        jitter_seed=state.jitter_seed,
    )


def fa2_run(graph, params: LayoutParams | None = None, seed: int = 0) -> LayoutResult:
    """Iterate fa2_step to convergence (mean displacement) or max_iterations.

    Non-convergence is reported in the flag, never raised: a layout that ran
    out of iterations is still a usable picture.
    """
    params = params or LayoutParams()
    ids = sorted(graph.nodes)
    if not ids:
        return LayoutResult(positions={}, converged=True, iterations=0)
    state = fa2_init(graph, seed)
    converged = False
    for _ in range(params.max_iterations):
        state = fa2_step(state, graph, params)
        if state.mean_displacement < params.convergence_threshold:
            converged = True
            break
    for u, (x, y) in state.positions.items():
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ArithmeticError(f"non-finite position for node {u!r}")
    return LayoutResult(
        positions=state.positions, converged=converged, iterations=state.iteration
    )


# ---------------------------------------------------------------------------
# Label overlap removal
# ---------------------------------------------------------------------------


def resolve_label_overlaps(
    positions: Mapping,
    label_boxes: Mapping,
    max_passes: int = 50,
    seed: int = 0,
) -> tuple[dict, int]:
    """Push apart overlapping label boxes; returns (positions, overlaps left).

    Boxes are centered on their node positions.  Passes run in canonical node
    order; each overlapping pair moves apart along its center line, half the
    needed separation per box, until a full pass finds nothing or max_passes
    is reached.  Identical centers take a seed-deterministic direction.
    """
    ids = sorted(positions)
    for u in ids:
        w, h = label_boxes[u]
        if w <= 0 or h <= 0:
            raise ValueError(f"label box for {u!r} must have positive dimensions")
    pos = {u: tuple(positions[u]) for u in ids}
    rng = random.Random(seed)
    margin = 1e-9

    def overlap(u, v) -> tuple[float, float] | None:
        dx = pos[v][0] - pos[u][0]
        dy = pos[v][1] - pos[u][1]
        ox = (label_boxes[u][0] + label_boxes[v][0]) / 2 - abs(dx)
        oy = (label_boxes[u][1] + label_boxes[v][1]) / 2 - abs(dy)
        if ox > 0 and oy > 0:
            return ox, oy
        return None

    for _ in range(max_passes):
        found = 0
        for i, u in enumerate(ids):
            for v in ids[i + 1 :]:
                ov = overlap(u, v)
                if ov is None:
                    continue
                found += 1
                ox, oy = ov
                dx = pos[v][0] - pos[u][0]
                dy = pos[v][1] - pos[u][1]
                d = math.hypot(dx, dy)
                if d == 0:
                    angle = rng.random() * 2 * math.pi
                    ux, uy = math.cos(angle), math.sin(angle)
                else:
                    ux, uy = dx / d, dy / d
                # Total separation along the center line that clears the
                # overlap on whichever axis gives up first.
                candidates = []
                if ux != 0:
                    candidates.append(ox / abs(ux))
                if uy != 0:
                    candidates.append(oy / abs(uy))
                t = min(candidates) / 2 + margin
                pos[u] = (pos[u][0] - ux * t, pos[u][1] - uy * t)
                pos[v] = (pos[v][0] + ux * t, pos[v][1] + uy * t)
        if found == 0:
            break

    remaining = 0
    for i, u in enumerate(ids):
        for v in ids[i + 1 :]:
            if overlap(u, v) is not None:
                remaining += 1
    return pos, remaining
