"""Iteratively reweighted minimum-weight perfect matching.

Decoding alternates between the two lattices: after the initial independent
matchings, the Z lattice is reweighted using the X matching and re-matched,
then the X lattice is reweighted using the new Z matching, and so on until
the estimate pair repeats or the iteration cap is reached.

Reweighting always starts from the pristine base graph: every edge used by
the dual matching's paths pulls each of its correlated primal edges down to
-ln(conditional probability); if several matched dual edges touch the same
primal edge the smallest weight wins.  In code-capacity mode the normalized
convention applies instead (base weight 1, correlated edge reweighted to 0).

The integer Pauli weight of the joint estimate is tracked at every half
iteration; it must never increase.  A violation is an internal-consistency
failure and is raised (or recorded, for harnesses that prefer to count).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .graph import DecodingGraph
from .matcher import MatchingResult, matching_to_correction, mwpm
from .pauli import PauliOperator, multiply, weight


class MonotonicityError(RuntimeError):
    """The joint correction weight increased across an iteration."""


@dataclass(frozen=True)
class WeightOverlay:
    """Per-trial weight overrides on top of an immutable base graph."""

    graph: DecodingGraph
    weights: dict[int, float]

    def __len__(self) -> int:
        return len(self.weights)


@dataclass
class IterationStep:
    """Decoder state after a half or full iteration."""

    index: float  # 0, 0.5, 1, 1.5, ...
    ex_mask: int
    ez_mask: int
    pauli_weight: int
    matching_weight: float  # sum of base-graph weights of both matchings


@dataclass
class IterationTrace:
    steps: list[IterationStep] = field(default_factory=list)
    extra_iterations: int = 0  # full iterations beyond the initial decode
    stop_reason: str = ""
    monotonic: bool = True

    def weights(self) -> list[int]:
        return [s.pauli_weight for s in self.steps]

    def to_dict(self) -> dict:
        """JSON-ready export for iteration-count studies."""
        return {
            "extra_iterations": self.extra_iterations,
            "stop_reason": self.stop_reason,
            "monotonic": self.monotonic,
            "steps": [
                {
                    "index": s.index,
                    "x_mask": s.ex_mask,
                    "z_mask": s.ez_mask,
                    "pauli_weight": s.pauli_weight,
                    "matching_weight": s.matching_weight,
                }
                for s in self.steps
            ],
        }


STOPPING_MODES = ("consecutive", "algorithm1-literal", "weight-stable")


def correction_weight(e_x: PauliOperator, e_z: PauliOperator) -> int:
    """Pauli weight of the joint correction (support of the product)."""
    return weight(multiply(e_x, e_z))


def reweight(
    base_graph: DecodingGraph,
    dual_matching: MatchingResult,
    correlation_map,
    reweight_boundary: bool = True,
    dual_graph: DecodingGraph | None = None,
) -> WeightOverlay:
    """Overlay for ``base_graph`` from a matching on its dual lattice.

    ``correlation_map`` is the dual graph's edge -> [(primal edge,
    conditional)] table.  With ``reweight_boundary`` off, matched dual edges
    incident to the virtual boundary node do not trigger updates.
    """
    overlay: dict[int, float] = {}
    if correlation_map is None:
        raise ValueError("correlation map has not been derived for the dual graph")
    code_capacity = base_graph.mode == "code_capacity"
    for eid in set(dual_matching.all_edge_ids()):
        if not reweight_boundary and dual_graph is not None:
            e = dual_graph.edges[eid]
            if e.v == dual_graph.boundary_node:
                continue
        for primal_eid, cond in correlation_map[eid]:
            w = 0.0 if code_capacity else -math.log(float(cond))
            if w < overlay.get(primal_eid, math.inf):
                overlay[primal_eid] = w
    return WeightOverlay(base_graph, overlay)


def _estimate(graph, matching, layout) -> PauliOperator:
    return matching_to_correction(graph, matching, layout)


def _matching_base_weight(graph: DecodingGraph, matching: MatchingResult) -> float:
    return sum(graph.edges[eid].weight for eid in matching.all_edge_ids())


def stopping_criterion(
    mode: str,
    ex_mask: int,
    ez_mask: int,
    prev_ex: int,
    prev_ez: int,
    ex_history: list[int],
    ez_history: list[int],
    w_now: int,
    w_prev: int,
) -> bool:
    """Halt decision after a completed full iteration.

    "consecutive" compares the estimate pair with the previous iteration;
    "algorithm1-literal" halts when either estimate repeats any earlier one
    of its type; "weight-stable" halts when the joint weight stops
    decreasing.
    """
    if mode == "consecutive":
        return ex_mask == prev_ex and ez_mask == prev_ez
    if mode == "algorithm1-literal":
        return ex_mask in ex_history or ez_mask in ez_history
    if mode == "weight-stable":
        return w_now >= w_prev
    raise ValueError(f"unknown stopping mode {mode!r}")


def decode(
    graph_x: DecodingGraph,
    graph_z: DecodingGraph,
    events_x: list[int],
    events_z: list[int],
    layout,
    max_iterations: int = 10,
    stopping: str = "consecutive",
    reweight_boundary: bool = True,
    raise_on_violation: bool = True,
    prune_neighbors: int | None = None,
) -> tuple[PauliOperator, PauliOperator, IterationTrace]:
    """Run the full iterative decoder on one syndrome pair.

    ``events_x`` / ``events_z`` are node indices on the X and Z lattices.
    ``max_iterations`` caps the full reweighting iterations after the
    initial matching; 0 reproduces the plain MWPM decoder.  Returns the two
    estimates and the iteration trace.
    """
    if stopping not in STOPPING_MODES:
        raise ValueError(f"stopping mode must be one of {STOPPING_MODES}")
    trace = IterationTrace()

    m_x = mwpm(graph_x, events_x, prune_neighbors=prune_neighbors)
    m_z = mwpm(graph_z, events_z, prune_neighbors=prune_neighbors)
    e_x = _estimate(graph_x, m_x, layout)
    e_z = _estimate(graph_z, m_z, layout)
    w = correction_weight(e_x, e_z)
    trace.steps.append(
        IterationStep(
            0.0,
            e_x.x_mask,
            e_z.z_mask,
            w,
            _matching_base_weight(graph_x, m_x) + _matching_base_weight(graph_z, m_z),
        )
    )

    if (not events_x and not events_z) or max_iterations == 0:
        trace.stop_reason = "no_events" if not (events_x or events_z) else "max_iters"
        return e_x, e_z, trace

    def check_monotone(w_new: int, w_old: int, idx: float):
        if w_new > w_old:
            trace.monotonic = False
            if raise_on_violation:
                raise MonotonicityError(
                    f"joint weight rose from {w_old} to {w_new} at step {idx}"
                )

    ex_history = [e_x.x_mask]
    ez_history = [e_z.z_mask]
    w_prev_full = w

    for k in range(1, max_iterations + 1):
        # Z step: reweight the base Z lattice with the current X matching.
        ovl_z = reweight(
            graph_z, m_x, graph_x.corr_to_dual, reweight_boundary, graph_x
        )
        m_z_new = mwpm(graph_z, events_z, ovl_z.weights, prune_neighbors)
        e_z_new = _estimate(graph_z, m_z_new, layout)
        w_half = correction_weight(e_x, e_z_new)
        check_monotone(w_half, trace.steps[-1].pauli_weight, k - 0.5)
        trace.steps.append(
            IterationStep(
                k - 0.5,
                e_x.x_mask,
                e_z_new.z_mask,
                w_half,
                _matching_base_weight(graph_x, m_x)
                + _matching_base_weight(graph_z, m_z_new),
            )
        )

        # X step: reweight the base X lattice with the new Z matching.
        ovl_x = reweight(
            graph_x, m_z_new, graph_z.corr_to_dual, reweight_boundary, graph_z
        )
        m_x_new = mwpm(graph_x, events_x, ovl_x.weights, prune_neighbors)
        e_x_new = _estimate(graph_x, m_x_new, layout)
        w_full = correction_weight(e_x_new, e_z_new)
        check_monotone(w_full, trace.steps[-1].pauli_weight, float(k))
        trace.steps.append(
            IterationStep(
                float(k),
                e_x_new.x_mask,
                e_z_new.z_mask,
                w_full,
                _matching_base_weight(graph_x, m_x_new)
                + _matching_base_weight(graph_z, m_z_new),
            )
        )

        halt = stopping_criterion(
            stopping,
            e_x_new.x_mask,
            e_z_new.z_mask,
            ex_history[-1],
            ez_history[-1],
            ex_history,
            ez_history,
            w_full,
            w_prev_full,
        )
        m_x, m_z = m_x_new, m_z_new
        e_x, e_z = e_x_new, e_z_new
        ex_history.append(e_x.x_mask)
        ez_history.append(e_z.z_mask)
        w_prev_full = w_full
        trace.extra_iterations = k
        if halt:
            trace.stop_reason = "converged"
            return e_x, e_z, trace

    trace.stop_reason = "max_iters"
    return e_x, e_z, trace


def decode_mwpm(
    graph_x: DecodingGraph,
    graph_z: DecodingGraph,
    events_x: list[int],
    events_z: list[int],
    layout,
) -> tuple[PauliOperator, PauliOperator, IterationTrace]:
    """Plain MWPM baseline: independent matchings, no reweighting."""
    return decode(graph_x, graph_z, events_x, events_z, layout, max_iterations=0)
