"""Exact label-correcting search for the hybrid-fuel planning problem.

Each label records the state of one partial path: cost-to-arrive ``d``,
battery ``b``, fuel ``q`` and the generator bit ``s`` of the incoming edge
(off at the start node).  Labels at the same node are partially ordered by
dominance; dominated labels can never complete into a better plan and are
pruned.  Selection is ordered by f = d + h(node) for an admissible
heuristic h, so the first goal label selected is optimal.

Two selection methods are supported: ``label`` treats the single open
label of minimum f per iteration, ``node`` treats every open label of the
node owning the minimum-f label.

The startup drain applies with transition semantics: the battery pays the
startup cost only on an off -> on switch of the generator (the start node
counts as off).

Solutions must be simple paths.  Pure resource dominance is unsound for
that requirement on its own: a label can dominate on (d, b, q, s) while
having visited a node the dominated label's optimal continuation needs,
for example after a cheap gliding detour past a recharge edge.  ``solve``
therefore refines a critical-node set: the search first relaxes
elementarity (labels may revisit nodes; such cycles are almost always
dominated away), and whenever the returned optimum repeats a node, that
node becomes critical and the search reruns.  Critical nodes cannot be
revisited, labels carry a bitmask over them, and dominance additionally
requires the dominator's critical-visit set to be a subset of the
dominated label's.  Each round's relaxed optimum lower-bounds the simple
optimum, so the first simple optimum returned is exact; on typical
instances the first round is already simple and the refinement costs
nothing.

``extend`` is the readable reference form of the extension rule, treating
``label.mask`` as a full visited-set bitmask.  The solve loop applies the
identical resource arithmetic inline (allocating a label object only once
a candidate survives dominance), which is what keeps 20k-node instances
tractable in pure Python; a unit test holds the two forms together.
"""

from __future__ import annotations

import heapq
import math
import time
from bisect import bisect_left
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .heuristics import HeuristicTable, make_table
from .instance import EdgeParams, Instance, Solution, path_cost

SELECT_LABEL = "label"
SELECT_NODE = "node"

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_LIMIT = "limit"


class Label:
    """State of a partial path ending at ``node``.

    ``mask`` is a visited-set bitmask: the full path set for hand-built
    chains fed through ``extend``, or the critical-node subset inside
    ``solve``.  ``gen`` is the generator bit of the incoming edge,
    ``parent`` the predecessor label (None at the start node).
    """

    __slots__ = ("node", "d", "b", "q", "s", "f", "seq", "parent", "gen",
                 "mask", "in_open")

    def __init__(self, node, d, b, q, s, f, parent, gen, mask):
        self.node = node
        self.d = d
        self.b = b
        self.q = q
        self.s = s
        self.f = f
        self.seq = -1
        self.parent = parent
        self.gen = gen
        self.mask = mask
        self.in_open = False

    def __repr__(self):  # debugging aid
        return (f"Label(node={self.node}, d={self.d:.6g}, b={self.b}, "
                f"q={self.q}, s={int(self.s)})")


def dominates(a: Label, b: Label) -> bool:
    """True when label ``a`` is at least as good as ``b`` in every
    coordinate (cost, battery, fuel, generator on >= off), has visited no
    critical node that ``b`` avoided, and is not equal to ``b`` in all
    four resource coordinates.  Equal-in-all-four labels are equivalent,
    not dominating; insertion discards the newer of an equivalent pair."""
    if a.d <= b.d and a.b >= b.b and a.q >= b.q and a.s >= b.s \
            and (a.mask | b.mask) == b.mask:
        return a.d != b.d or a.b != b.b or a.q != b.q or a.s != b.s
    return False


def extend(label: Label, edge: EdgeParams, gen_on: bool, instance: Instance,
           h=None) -> Optional[Label]:
    """Extend a label over ``edge``; returns None when infeasible.

    Feasibility: the generator may only run where allowed; the battery,
    debited by the edge drain plus any startup cost, must stay at bmin or
    above before the recharge is credited (then clamps at bmax); fuel
    must not go negative; the target node must not be in the label's
    visited mask.
    """
    if gen_on and not edge.gen_allowed:
        return None
    bit = 1 << edge.v
    if label.mask & bit:
        return None
    if gen_on:
        startup = instance.v if not label.s else 0
        mid = label.b - edge.c - startup
        if mid < instance.bmin:
            return None
        q = label.q - edge.z
        if q < 0:
            return None
        b = mid + edge.z
        if b > instance.bmax:
            b = instance.bmax
    else:
        mid = label.b - edge.c
        if mid < instance.bmin:
            return None
        b = mid
        q = label.q
    d = label.d + edge.d
    f = d + h[edge.v] if h is not None else d
    return Label(edge.v, d, b, q, gen_on, f, label, gen_on, label.mask | bit)


class OpenList:
    """Priority structure over open labels keyed by f-cost.

    Ties break toward larger battery, then larger fuel, then insertion
    order.  Every label ever accepted at a node, open or closed, sits in
    that node's dominance list (kept sorted by cost so rejection scans
    stop early); insertion enforces the no-dominated-label invariant
    against that whole list and evicts open or closed entries the
    newcomer dominates.  Heap entries of evicted labels are dropped
    lazily.
    """

    def __init__(self, n_nodes: int):
        self._heap: List[tuple] = []
        # per node: costs (sorted), aligned (d, b, q, s, mask, label)
        # tuples, and the currently open labels
        self._costs: List[List[float]] = [[] for _ in range(n_nodes)]
        self._dom: List[List[tuple]] = [[] for _ in range(n_nodes)]
        self.open_by_node: List[List[Label]] = [[] for _ in range(n_nodes)]
        self._seq = 0
        self.n_open = 0
        self.pruned = 0

    def __len__(self) -> int:
        return self.n_open

    def insert_candidate(self, node, d, b, q, s, f, parent, gen,
                         mask) -> Optional[Label]:
        """Accept a candidate state unless an existing label at ``node``
        weakly dominates it; the Label object is built only on
        acceptance.  Returns it, or None when pruned."""
        costs = self._costs[node]
        dom = self._dom[node]
        for i, ed in enumerate(costs):
            if ed > d:
                break
            e = dom[i]
            if e[1] >= b and e[2] >= q and e[3] >= s \
                    and (e[4] | mask) == mask:
                self.pruned += 1
                return None

        evicted = False
        lo = bisect_left(costs, d)
        i = len(costs) - 1
        while i >= lo:
            e = dom[i]
            if b >= e[1] and q >= e[2] and s >= e[3] \
                    and (mask | e[4]) == e[4]:
                lab = e[5]
                if lab.in_open:
                    lab.in_open = False
                    self.n_open -= 1
                    evicted = True
                self.pruned += 1
                del dom[i], costs[i]
            i -= 1
        if evicted:
            opens = self.open_by_node[node]
            opens[:] = [l for l in opens if l.in_open]

        label = Label(node, d, b, q, s, f, parent, gen, mask)
        label.seq = self._seq
        self._seq += 1
        label.in_open = True
        pos = bisect_left(costs, d)
        costs.insert(pos, d)
        dom.insert(pos, (d, b, q, s, mask, label))
        self.open_by_node[node].append(label)
        heapq.heappush(self._heap, (f, -b, -q, label.seq, label))
        self.n_open += 1
        return label

    def insert(self, label: Label) -> bool:
        """Object-based wrapper over insert_candidate (same invariant);
        the stored label is an equivalent copy of the argument."""
        accepted = self.insert_candidate(
            label.node, label.d, label.b, label.q, label.s, label.f,
            label.parent, label.gen, label.mask)
        return accepted is not None

    def peek_min(self) -> Optional[Label]:
        heap = self._heap
        while heap:
            label = heap[0][4]
            if label.in_open:
                return label
            heapq.heappop(heap)
        return None

    def pop_min(self) -> Optional[Label]:
        heap = self._heap
        while heap:
            label = heapq.heappop(heap)[4]
            if label.in_open:
                label.in_open = False
                self.n_open -= 1
                self.open_by_node[label.node].remove(label)
                return label
        return None

    def take_node(self, node: int) -> List[Label]:
        """Remove and return every open label of ``node``."""
        labels = self.open_by_node[node]
        self.open_by_node[node] = []
        for e in labels:
            e.in_open = False
        self.n_open -= len(labels)
        return labels


def select_label(open_list: OpenList) -> Tuple[List[Label], int]:
    """Minimum-f open label (documented tie-break), as a singleton list."""
    label = open_list.pop_min()
    if label is None:
        raise ValueError("open list is empty")
    return [label], label.node


def select_node(open_list: OpenList) -> Tuple[List[Label], int]:
    """All open labels of the node holding the minimum-f open label,
    removed from the open list and ordered by ascending f."""
    best = open_list.peek_min()
    if best is None:
        raise ValueError("open list is empty")
    labels = open_list.take_node(best.node)
    labels.sort(key=lambda l: (l.f, -l.b, -l.q, l.seq))
    return labels, best.node


@dataclass(frozen=True)
class SolverConfig:
    selection: str = SELECT_LABEL
    heuristic: str = "sup"
    max_labels: Optional[int] = None
    max_seconds: Optional[float] = None

    def __post_init__(self):
        if self.selection not in (SELECT_LABEL, SELECT_NODE):
            raise ValueError(f"unknown selection method {self.selection!r}")
        if self.heuristic not in ("sld", "sup", "zero"):
            raise ValueError(f"unknown heuristic {self.heuristic!r}")


@dataclass
class SolveStats:
    labels_created: int = 0
    labels_treated: int = 0
    labels_pruned: int = 0
    peak_open: int = 0
    wall_time: float = 0.0
    rounds: int = 0
    created_per_node: Tuple[int, ...] = ()


@dataclass(frozen=True)
class SolveResult:
    """Outcome of a solve: status is ``optimal``, ``infeasible`` or
    ``limit``.  ``lower_bound`` is the smallest f-cost still open at the
    stop point (the optimal cost itself when status is optimal)."""

    status: str
    solution: Optional[Solution]
    stats: SolveStats
    lower_bound: Optional[float] = None


def extract_path(label: Label, instance: Instance) -> Solution:
    """Rebuild the solution for a label by walking its parent chain.

    The resource traces are read off the chain labels; the cost is
    recomputed as the exact-rounded sum of edge costs."""
    chain = []
    cur = label
    while cur is not None:
        chain.append(cur)
        cur = cur.parent
    chain.reverse()
    path = tuple(l.node for l in chain)
    return Solution(
        path=path,
        gen=tuple(bool(l.gen) for l in chain[1:]),
        cost=path_cost(instance, path),
        battery=tuple(l.b for l in chain),
        fuel=tuple(l.q for l in chain),
    )


def _search(instance, config, h, critical_bit, stats, created, t0, budget):
    """One labeling pass with the current critical-node set.

    Returns (status, best goal label or None, lower bound or None) and
    accumulates counts into ``stats``/``created``.  ``critical_bit`` maps
    node id to its mask bit (0 for freely revisitable nodes)."""
    n = instance.n_nodes
    inf = math.inf
    goal = instance.goal
    bmin, bmax, v_cost = instance.bmin, instance.bmax, instance.v
    adj = [tuple((e.v, e.d, e.c, e.z, e.gen_allowed) for e in lst)
           for lst in instance.out_edges]
    max_seconds = config.max_seconds

    open_list = OpenList(n)
    n_created = 0
    if h[instance.start] != inf:
        open_list.insert_candidate(
            instance.start, 0.0, instance.b0, instance.q0, False,
            h[instance.start], None, False, critical_bit[instance.start])
        n_created = 1
        created[instance.start] += 1
        stats.peak_open = max(stats.peak_open, 1)

    select = select_label if config.selection == SELECT_LABEL else select_node
    status, best, bound = STATUS_INFEASIBLE, None, None

    while open_list.n_open:
        if max_seconds is not None and time.perf_counter() - t0 > max_seconds:
            top = open_list.peek_min()
            status, bound = STATUS_LIMIT, top.f if top else None
            break
        labels, node = select(open_list)
        if node == goal:
            status, best, bound = STATUS_OPTIMAL, labels[0], labels[0].d
            break
        edges = adj[node]
        insert = open_list.insert_candidate
        stop = False
        for label in labels:
            stats.labels_treated += 1
            d0, b0, q0 = label.d, label.b, label.q
            s0, mask = label.s, label.mask
            startup = 0 if s0 else v_cost
            for v2, ed, ec, ez, allowed in edges:
                cbit = critical_bit[v2]
                if cbit and mask & cbit:
                    continue
                hv = h[v2]
                if hv == inf:
                    continue
                d2 = d0 + ed
                f2 = d2 + hv
                mask2 = mask | cbit
                b_off = b0 - ec
                if b_off >= bmin:
                    if insert(v2, d2, b_off, q0, False, f2, label, False,
                              mask2) is not None:
                        n_created += 1
                        created[v2] += 1
                if allowed and ez <= q0:
                    b_mid = b0 - ec - startup
                    if b_mid >= bmin:
                        b_on = b_mid + ez
                        if b_on > bmax:
                            b_on = bmax
                        if insert(v2, d2, b_on, q0 - ez, True, f2, label,
                                  True, mask2) is not None:
                            n_created += 1
                            created[v2] += 1
            if open_list.n_open > stats.peak_open:
                stats.peak_open = open_list.n_open
            if budget is not None and stats.labels_created + n_created > budget:
                top = open_list.peek_min()
                status, bound = STATUS_LIMIT, top.f if top else None
                stop = True
                break
        if stop:
            break
    stats.labels_created += n_created
    stats.labels_pruned += open_list.pruned
    stats.rounds += 1
    return status, best, bound


def solve(instance: Instance, config: SolverConfig = SolverConfig(),
          table: Optional[HeuristicTable] = None) -> SolveResult:
    """Run the label-correcting search to a provably optimal simple path.

    Returns the minimum-cost feasible solution, an infeasibility result
    (the search space exhausted), or a limit result with the best lower
    bound still open.  Limits apply across all refinement rounds (see the
    module docstring).  Pass ``table`` to reuse a precomputed heuristic
    table (its kind must match the config).
    """
    if instance.start == instance.goal:
        raise ValueError("start equals goal")
    if table is None:
        table = make_table(instance, config.heuristic)
    elif table.kind != config.heuristic:
        raise ValueError(
            f"table kind {table.kind!r} != config {config.heuristic!r}")

    t0 = time.perf_counter()
    n = instance.n_nodes
    stats = SolveStats()
    created = [0] * n
    critical_bit = [0] * n
    n_critical = 0

    def finish(status, solution=None, bound=None):
        stats.wall_time = time.perf_counter() - t0
        stats.created_per_node = tuple(created)
        return SolveResult(status, solution, stats, bound)

    while True:
        status, best, bound = _search(
            instance, config, table.h, critical_bit, stats, created, t0,
            config.max_labels)
        if status != STATUS_OPTIMAL:
            return finish(status, bound=bound)
        solution = extract_path(best, instance)
        repeats = {v for v in solution.path
                   if solution.path.count(v) > 1}
        if not repeats:
            return finish(STATUS_OPTIMAL, solution, solution.cost)
        for v in sorted(repeats):
            if not critical_bit[v]:
                critical_bit[v] = 1 << n_critical
                n_critical += 1
