"""Minimum-weight perfect matching of detection events on a decoding graph.

Events pair up either with each other or with the lattice boundary.  The
standard reduction runs all-sources Dijkstra from the event nodes over the
sparse space-time graph, then solves a dense matching over the events:
because path distances may route through the boundary node, pairing two
events "via the boundary" costs exactly as much as matching both to the
boundary, so a complete even-order matching (with one extra virtual vertex
when the event count is odd) captures every boundary split.  Matched pairs
whose minimum path passes through the boundary are reported as two separate
boundary pairings.

``brute_force_matching`` enumerates every partition of the events into
pairs and boundary singletons; it is the independent oracle for the blossom
path and is kept free of any shared matching logic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import dijkstra as _sp_dijkstra

from .blossom import min_weight_perfect_matching
from .graph import DecodingGraph
from .pauli import PauliOperator

#: weights are rounded to this many decimals before matching, so that
#: dual-variable arithmetic inside blossom cannot drift across near-ties
WEIGHT_DECIMALS = 12


class UnreachableNodeError(RuntimeError):
    """An event node cannot reach the rest of the graph (construction bug)."""


class TooManyEventsError(ValueError):
    """brute_force_matching refuses instances it cannot enumerate."""


@dataclass
class MatchingResult:
    """A perfect matching of detection events, with path bookkeeping.

    ``pairs`` holds event-node index pairs matched through the bulk;
    ``boundary_pairs`` holds events matched to the boundary.  ``path_edges``
    maps each pair (and each boundary pairing, keyed by (event, -1)) to the
    graph edge indices along its minimum-weight path.
    """

    pairs: list[tuple[int, int]] = field(default_factory=list)
    boundary_pairs: list[int] = field(default_factory=list)
    total_weight: float = 0.0
    path_edges: dict[tuple[int, int], tuple[int, ...]] = field(default_factory=dict)

    def all_edge_ids(self) -> list[int]:
        out = []
        for eids in self.path_edges.values():
            out.extend(eids)
        return out

    def signature(self) -> tuple:
        """Canonical form for equality tests between iterations."""
        return (
            tuple(sorted(tuple(sorted(p)) for p in self.pairs)),
            tuple(sorted(self.boundary_pairs)),
        )


def shortest_paths(
    graph: DecodingGraph,
    events: list[int],
    weights: np.ndarray | None = None,
    overlay: dict[int, float] | None = None,
):
    """All minimum path weights from each event to every node (and boundary).

    Returns (dist, predecessors) with one row per event, computed over the
    graph's base weights unless an ``overlay`` (edge index -> new weight)
    or a full per-edge ``weights`` vector is supplied.
    """
    if not events:
        n = graph.n_nodes
        return np.zeros((0, n)), np.full((0, n), -9999, dtype=np.int32)
    if weights is not None:
        overlay = {i: float(w) for i, w in enumerate(weights)}
    csr = graph.csr_with_weights(overlay)
    dist, pred = _sp_dijkstra(
        csr, directed=False, indices=events, return_predecessors=True
    )
    if np.isinf(dist[:, graph.boundary_node]).any():
        raise UnreachableNodeError("an event cannot reach the boundary node")
    return dist, pred


def _walk_path(graph: DecodingGraph, pred_row, source: int, target: int) -> list[int]:
    """Node path target -> source via the predecessor row, as edge indices."""
    edges = []
    node = target
    while node != source:
        prv = int(pred_row[node])
        if prv < 0:
            raise UnreachableNodeError(f"no path from {source} to {target}")
        edges.append(graph.edge_between(prv, node))
        node = prv
    edges.reverse()
    return edges


def _split_at_boundary(
    graph: DecodingGraph, eids: list[int]
) -> tuple[list[int], list[int]] | None:
    """Split a path at the boundary node if it passes through it."""
    bnd = graph.boundary_node
    for k, eid in enumerate(eids):
        e = graph.edges[eid]
        if bnd in (e.u, e.v):
            # the path enters and leaves the boundary on consecutive edges
            return eids[: k + 1], eids[k + 1 :]
    return None


def mwpm(
    graph: DecodingGraph,
    events: list[int],
    overlay: dict[int, float] | None = None,
    prune_neighbors: int | None = None,
) -> MatchingResult:
    """Minimum-weight perfect matching of events against each other/boundary.

    ``events`` are node indices; an empty list returns an empty matching.
    Deterministic for a fixed event ordering: distances are pre-rounded to
    12 decimals and the blossom search is order-stable.

    ``prune_neighbors`` keeps only each event's m nearest partners in the
    dense matching problem (boundary routes always kept), which speeds up
    large instances considerably.  Off by default: with pruning the result
    is no longer guaranteed minimum over all pairings, although in practice
    generous values (>= 12) reproduce the exact matching.  Falls back to
    the exact dense problem if the pruned graph has no perfect matching.
    """
    events = sorted(events)
    k = len(events)
    result = MatchingResult()
    if k == 0:
        return result
    dist, pred = shortest_paths(graph, events, overlay=overlay)
    bnd = graph.boundary_node
    event_dist = dist[:, events]  # (k, k) pairwise distances

    def dense_edges(keep=None):
        out = []
        for a in range(k):
            row = event_dist[a]
            for b in range(a + 1, k):
                if keep is not None and (a, b) not in keep:
                    continue
                out.append((a, b, round(float(row[b]), WEIGHT_DECIMALS)))
        if k % 2:
            for a in range(k):
                out.append(
                    (a, k, round(float(dist[a, bnd]), WEIGHT_DECIMALS))
                )
        return out

    nverts = k + (k % 2)
    if prune_neighbors is not None and k > prune_neighbors + 2:
        m = prune_neighbors
        keep = set()
        order = np.argsort(event_dist, axis=1, kind="stable")
        for a in range(k):
            kept = 0
            for b in order[a]:
                b = int(b)
                if b == a:
                    continue
                keep.add((a, b) if a < b else (b, a))
                kept += 1
                if kept >= m:
                    break
        try:
            pairs = min_weight_perfect_matching(nverts, dense_edges(keep))
        except RuntimeError:
            pairs = min_weight_perfect_matching(nverts, dense_edges())
    else:
        pairs = min_weight_perfect_matching(nverts, dense_edges())

    total = 0.0
    for a, b in pairs:
        if b == k:  # virtual boundary vertex
            eids = _walk_path(graph, pred[a], events[a], bnd)
            result.boundary_pairs.append(events[a])
            result.path_edges[(events[a], -1)] = tuple(eids)
            total += float(dist[a, bnd])
            continue
        eids = _walk_path(graph, pred[a], events[a], events[b])
        total += float(dist[a, events[b]])
        split = _split_at_boundary(graph, eids)
        if split is None:
            result.pairs.append((events[a], events[b]))
            result.path_edges[(events[a], events[b])] = tuple(eids)
        else:
            first, second = split
            result.boundary_pairs.append(events[a])
            result.path_edges[(events[a], -1)] = tuple(first)
            result.boundary_pairs.append(events[b])
            result.path_edges[(events[b], -1)] = tuple(second)
    result.total_weight = total
    return result


def brute_force_matching(
    graph: DecodingGraph,
    events: list[int],
    overlay: dict[int, float] | None = None,
    max_events: int = 10,
) -> MatchingResult:
    """Exhaustive minimum over all pair/boundary partitions of the events.

    Independent oracle for ``mwpm``; ties are broken by lexicographic pair
    ordering.  Refuses more than ``max_events`` events.
    """
    events = sorted(events)
    k = len(events)
    if k > max_events:
        raise TooManyEventsError(f"{k} events exceed the brute-force cap {max_events}")
    result = MatchingResult()
    if k == 0:
        return result
    dist, pred = shortest_paths(graph, events, overlay=overlay)
    bnd = graph.boundary_node
    pair_w = {
        (a, b): round(float(dist[a, events[b]]), WEIGHT_DECIMALS)
        for a in range(k)
        for b in range(a + 1, k)
    }
    bound_w = [round(float(dist[a, bnd]), WEIGHT_DECIMALS) for a in range(k)]

    best: tuple[float, tuple] | None = None

    def rec(remaining: tuple[int, ...], acc_w: float, acc_pairs: tuple):
        nonlocal best
        if not remaining:
            cand = (acc_w, acc_pairs)
            if best is None or cand < best:
                best = cand
            return
        a = remaining[0]
        rest = remaining[1:]
        rec(rest, acc_w + bound_w[a], acc_pairs + ((a, -1),))
        for i, b in enumerate(rest):
            rec(
                rest[:i] + rest[i + 1 :],
                acc_w + pair_w[(a, b)],
                acc_pairs + ((a, b),),
            )

    rec(tuple(range(k)), 0.0, ())
    total, pairing = best
    for a, b in pairing:
        if b == -1:
            eids = _walk_path(graph, pred[a], events[a], bnd)
            result.boundary_pairs.append(events[a])
            result.path_edges[(events[a], -1)] = tuple(eids)
        else:
            eids = _walk_path(graph, pred[a], events[a], events[b])
            split = _split_at_boundary(graph, eids)
            if split is None:
                result.pairs.append((events[a], events[b]))
                result.path_edges[(events[a], events[b])] = tuple(eids)
            else:
                first, second = split
                result.boundary_pairs.append(events[a])
                result.path_edges[(events[a], -1)] = tuple(first)
                result.boundary_pairs.append(events[b])
                result.path_edges[(events[b], -1)] = tuple(second)
    result.total_weight = float(total)
    return result


def matching_to_correction(
    graph: DecodingGraph, matching: MatchingResult, layout
) -> PauliOperator:
    """Project matched space-time paths onto a data-qubit Pauli correction.

    Each traversed edge contributes its representative residual flips;
    temporal edges contribute nothing.  The result is an X-type Pauli for
    the X lattice and Z-type for the Z lattice.
    """
    mask = 0
    for eid in matching.all_edge_ids():
        mask ^= graph.edges[eid].correction
    if graph.kind == "X":
        return PauliOperator(layout.n_data, mask, 0)
    return PauliOperator(layout.n_data, 0, mask)


def events_to_nodes(graph: DecodingGraph, events) -> list[int]:
    """Convert (stabilizer, round) detection events to graph node indices."""
    return [graph.node_id(s, t) for s, t in events]
