"""Space-time decoding graphs derived from single-fault enumeration.

A decoding graph for one error type has a node for every (stabilizer,
round) pair plus one virtual boundary node.  Every edge is backed by the
set of single faults whose detection signature is exactly that node pair
(or that single node, for boundary edges); its probability is the direct
first-order sum of the contributing fault rates, and its weight is
-ln(probability).  Cross-lattice conditional probabilities are pooled from
the same enumeration, in exact rational arithmetic.

Interior edges fall into six space-time geometry classes, labelled a-f:

    letter  (dt, dr, dc)   interior probability
      a     (1,  0,  0)    31p/15   temporal (measurement-type)
      b     (0,  2,  0)    18p/15   spatial, vertical
      c     (1,  2,  0)    16p/15   space-time diagonal, vertical
      d     (0,  0,  2)    42p/15   spatial, horizontal
      e     (1,  0,  2)     8p/15   space-time diagonal, horizontal
      f     (1,  2, -2)     8p/15   space-time diagonal, skew

The same table applies to both lattices.  Edges whose geometry matches a
letter but whose probability differs from the interior value (near the
space or time boundary) keep the letter and carry a boundary flag.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .code import CodeLayout, SECircuit, build_layout, build_se_circuit
from .noise import FaultRecord, NoiseParams, enumerate_single_faults
from .pauli import PauliOperator, commutation_parity

#: geometry (dt, dr, dc) of the later-time endpoint relative to the earlier
#: one (position-lexicographic for equal times) -> matching type letter
GEOMETRY_LETTERS = {
    (1, 0, 0): "a",
    (0, 2, 0): "b",
    (1, 2, 0): "c",
    (0, 0, 2): "d",
    (1, 0, 2): "e",
    (1, 2, -2): "f",
}

#: interior probability coefficients (units of p) per letter
INTERIOR_COEFFS = {
    "a": Fraction(31, 15),
    "b": Fraction(18, 15),
    "c": Fraction(16, 15),
    "d": Fraction(42, 15),
    "e": Fraction(8, 15),
    "f": Fraction(8, 15),
}


class GraphBuildError(RuntimeError):
    """Enumeration produced a structure the decoding graph cannot represent."""


class EdgeClassificationError(GraphBuildError):
    """An edge's space-time geometry matches none of the six classes."""


class DegenerateWeightError(ValueError):
    """p = 0 makes every edge weight infinite."""


class InvalidRateError(ValueError):
    """p so large that some edge probability reaches 1."""


@dataclass
class Edge:
    """One decoding-graph edge and the fault mechanisms behind it."""

    index: int
    u: int
    v: int  # equals the boundary node id for boundary edges
    coeff: Fraction
    weight: float
    correction: int  # data-qubit flip mask applied when this edge is matched
    letter: str | None = None
    boundary: bool = False
    n_fault_locations: int = 0
    fault_ids: tuple[int, ...] = ()  # indices into the enumeration record list


@dataclass
class DecodingGraph:
    """Static decoding lattice for one error type ('X' or 'Z').

    Nodes are (stabilizer, round) pairs, ``node_id = (t - 1) * n_stabs + s``
    for rounds 1..n_layers, plus the boundary node ``n_layers * n_stabs``.
    The graph is immutable after construction; per-trial reweighting uses
    weight overlays that never touch the base arrays.
    """

    kind: str
    L: int
    T: int
    p: float
    mode: str  # "circuit" or "code_capacity"
    n_stabs: int
    n_layers: int
    stab_coords: tuple[tuple[int, int], ...]
    edges: list[Edge]
    edge_lookup: dict[tuple[int, int], int] = field(repr=False)
    # conditional probabilities toward the dual lattice:
    # edge index -> tuple of (dual edge index, conditional probability)
    corr_to_dual: list[tuple[tuple[int, Fraction], ...]] | None = None
    _csr: sp.csr_matrix | None = field(default=None, repr=False)
    _edge_data_pos: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_nodes(self) -> int:
        return self.n_stabs * self.n_layers + 1

    @property
    def boundary_node(self) -> int:
        return self.n_stabs * self.n_layers

    def node_id(self, stab: int, t: int) -> int:
        return (t - 1) * self.n_stabs + stab

    def node_pos(self, node: int) -> tuple[int, int]:
        """(stabilizer, round) of a non-boundary node id."""
        return node % self.n_stabs, node // self.n_stabs + 1

    @property
    def base_weights(self) -> np.ndarray:
        return np.array([e.weight for e in self.edges])

    def finalize(self) -> None:
        """Build the sparse adjacency used for shortest-path queries."""
        n = self.n_nodes
        rows, cols, data, pos = [], [], [], []
        for e in self.edges:
            pos.append(len(rows))
            rows.extend((e.u, e.v))
            cols.extend((e.v, e.u))
            data.extend((e.weight, e.weight))
        coo = sp.coo_matrix(
            (np.array(data), (np.array(rows), np.array(cols))), shape=(n, n)
        )
        csr = coo.tocsr()
        # map each edge's two directed entries to csr.data slots
        indptr, indices = csr.indptr, csr.indices
        slot = {}
        for r in range(n):
            for k in range(indptr[r], indptr[r + 1]):
                slot[(r, indices[k])] = k
        edge_pos = np.empty((len(self.edges), 2), dtype=np.intp)
        for i, e in enumerate(self.edges):
            edge_pos[i, 0] = slot[(e.u, e.v)]
            edge_pos[i, 1] = slot[(e.v, e.u)]
        self._csr = csr
        self._edge_data_pos = edge_pos

    def csr_with_weights(self, overlay: dict[int, float] | None = None) -> sp.csr_matrix:
        """A CSR adjacency copy, optionally with selected edge weights overridden."""
        if self._csr is None:
            self.finalize()
        csr = self._csr
        data = csr.data.copy()
        if overlay:
            for eid, w in overlay.items():
                data[self._edge_data_pos[eid, 0]] = w
                data[self._edge_data_pos[eid, 1]] = w
        return sp.csr_matrix((data, csr.indices, csr.indptr), shape=csr.shape)

    def edge_between(self, u: int, v: int) -> int:
        """Edge index for a node pair; raises KeyError if absent."""
        return self.edge_lookup[(u, v) if u < v else (v, u)]


def _edge_geometry(
    sig: tuple[tuple[int, int], ...], coords: tuple[tuple[int, int], ...]
) -> tuple[int, int, int]:
    (s1, t1), (s2, t2) = sorted(sig, key=lambda e: (e[1], coords[e[0]]))
    r1, c1 = coords[s1]
    r2, c2 = coords[s2]
    return (t2 - t1, r2 - r1, c2 - c1)


def _pool_edges(
    records: list[FaultRecord],
    kind: str,
    layout: CodeLayout,
    n_layers: int,
    n_stabs: int,
    coords,
    p: float,
    mode: str,
    check_logical: bool = True,
) -> tuple[list[Edge], dict]:
    """Group fault records by detection signature into edges.

    With ``check_logical`` (any window closed by a perfect round) every
    mechanism behind an edge must share the same logical action, so the
    representative correction is well defined.  Open-time-boundary windows
    genuinely mix interpretations near the last round; there the highest
    rate mechanism supplies the correction.
    """
    boundary = n_stabs * n_layers
    logical = layout.logical_z if kind == "X" else layout.logical_x
    pooled: dict[tuple[int, int], dict] = {}
    for rid, rec in enumerate(records):
        sig = rec.x_events if kind == "X" else rec.z_events
        if not sig or len(sig) > 2:
            if len(sig) > 2:
                raise GraphBuildError(
                    f"single fault produced {len(sig)} events on the {kind} lattice"
                )
            continue
        nodes = sorted((t - 1) * n_stabs + s for s, t in sig)
        key = (nodes[0], nodes[1]) if len(nodes) == 2 else (nodes[0], boundary)
        residual = rec.x_residual if kind == "X" else rec.z_residual
        entry = pooled.get(key)
        if entry is None:
            entry = {
                "coeff": Fraction(0),
                "faults": [],
                "residual": residual,
                "rep_coeff": rec.coeff,
                "locations": set(),
            }
            pooled[key] = entry
        else:
            if check_logical:
                # mechanisms behind one edge must agree on the logical action
                res_p = PauliOperator(
                    layout.n_data,
                    *((residual, 0) if kind == "X" else (0, residual)),
                )
                rep_p = PauliOperator(
                    layout.n_data,
                    *(
                        (entry["residual"], 0)
                        if kind == "X"
                        else (0, entry["residual"])
                    ),
                )
                if commutation_parity(res_p, logical) != commutation_parity(
                    rep_p, logical
                ):
                    raise GraphBuildError(
                        f"edge {key} has contributing faults with conflicting "
                        "logical action"
                    )
            if rec.coeff > entry["rep_coeff"]:
                entry["residual"] = residual
                entry["rep_coeff"] = rec.coeff
        entry["coeff"] += rec.coeff
        entry["faults"].append(rid)
        entry["locations"].add((rec.fault.round, rec.fault.kind, rec.fault.index))

    edges: list[Edge] = []
    lookup: dict[tuple[int, int], int] = {}
    for key in sorted(pooled):
        entry = pooled[key]
        coeff = entry["coeff"]
        if mode == "code_capacity":
            weight = 1.0
        else:
            prob = float(coeff) * p
            if prob <= 0.0:
                raise DegenerateWeightError("p = 0 gives infinite edge weights")
            if prob >= 1.0:
                raise InvalidRateError(
                    f"p = {p} puts edge probability at {prob:.3f} >= 1 "
                    f"(p_max = {1 / float(coeff):.4f} for this graph)"
                )
            weight = -math.log(prob)
        eid = len(edges)
        edges.append(
            Edge(
                index=eid,
                u=key[0],
                v=key[1],
                coeff=coeff,
                weight=weight,
                correction=entry["residual"],
                boundary=key[1] == boundary,
                n_fault_locations=len(entry["locations"]),
                fault_ids=tuple(entry["faults"]),
            )
        )
        lookup[key] = eid
    return edges, lookup


def shift_enumeration(
    records: list[FaultRecord], warmup: int
) -> list[FaultRecord]:
    """Re-anchor an enumeration so its first ``warmup`` rounds precede the
    decoding window.

    Used for steady-state windowed decoding: mechanisms from the rounds just
    before the window keep only the detections that fall inside it, which
    yields the time-boundary edges that explain detections inherited from
    the previous window.  Events at or before round ``warmup`` are dropped;
    records with no surviving events on either lattice are removed.
    """
    if warmup == 0:
        return records
    out = []
    for rec in records:
        x = tuple((s, t - warmup) for s, t in rec.x_events if t > warmup)
        z = tuple((s, t - warmup) for s, t in rec.z_events if t > warmup)
        if not x and not z:
            continue
        out.append(
            FaultRecord(
                fault=rec.fault,
                x_events=x,
                z_events=z,
                coeff=rec.coeff,
                x_residual=rec.x_residual,
                z_residual=rec.z_residual,
            )
        )
    return out


def build_graph(
    layout: CodeLayout,
    circuit: SECircuit,
    params: NoiseParams,
    T: int,
    lattice_kind: str,
    enumeration: list[FaultRecord] | None = None,
    final_round_perfect: bool = True,
    include_idle: bool = True,
    warmup_rounds: int = 0,
) -> DecodingGraph:
    """Assemble the decoding lattice for one error type from enumeration.

    Edge probabilities are direct first-order sums of contributing fault
    rates (valid for small p; every edge probability must stay below 1).
    ``warmup_rounds`` > 0 builds the steady-state window variant (see
    ``shift_enumeration``).
    """
    if lattice_kind not in ("X", "Z"):
        raise ValueError(f"lattice kind must be 'X' or 'Z', got {lattice_kind!r}")
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    if params.p <= 0.0:
        raise DegenerateWeightError("p must be positive to form -ln weights")
    if enumeration is None:
        enumeration = shift_enumeration(
            enumerate_single_faults(
                layout, circuit, T + warmup_rounds, final_round_perfect,
                include_idle,
            ),
            warmup_rounds,
        )
    n_layers = T + (1 if final_round_perfect else 0)
    coords = layout.z_anc_coords if lattice_kind == "X" else layout.x_anc_coords
    n_stabs = len(coords)
    edges, lookup = _pool_edges(
        enumeration, lattice_kind, layout, n_layers, n_stabs, coords, params.p,
        "circuit", check_logical=final_round_perfect,
    )
    g = DecodingGraph(
        kind=lattice_kind,
        L=layout.L,
        T=T,
        p=params.p,
        mode="circuit",
        n_stabs=n_stabs,
        n_layers=n_layers,
        stab_coords=coords,
        edges=edges,
        edge_lookup=lookup,
    )
    classify_edges(g)
    g.finalize()
    return g


def classify_edges(graph: DecodingGraph) -> DecodingGraph:
    """Assign matching-type letters a-f from each edge's space-time geometry.

    Boundary edges keep ``letter=None``; interior-geometry edges whose
    probability is reduced by the space or time boundary are labelled with
    the letter and flagged as boundary.
    """
    if graph.mode == "code_capacity":
        return graph
    for e in graph.edges:
        if e.v == graph.boundary_node:
            e.boundary = True
            continue
        s1, t1 = graph.node_pos(e.u)
        s2, t2 = graph.node_pos(e.v)
        geom = _edge_geometry(((s1, t1), (s2, t2)), graph.stab_coords)
        letter = GEOMETRY_LETTERS.get(geom)
        if letter is None:
            raise EdgeClassificationError(
                f"edge {(s1, t1)}-{(s2, t2)} geometry {geom} matches no class"
            )
        e.letter = letter
        e.boundary = e.coeff != INTERIOR_COEFFS[letter]
    return graph


def derive_correlations(
    graph_primal: DecodingGraph,
    graph_dual: DecodingGraph,
    enumeration: list[FaultRecord],
) -> list[tuple[tuple[int, Fraction], ...]]:
    """Conditional probabilities of dual-lattice edges given primal edges.

    For each primal edge e and dual edge f sharing a contributing fault,
    P(f | e) = (sum of joint fault rates) / (sum of e's fault rates), as an
    exact rational.  The result is stored on ``graph_primal.corr_to_dual``
    and returned.
    """
    pk, dk = graph_primal.kind, graph_dual.kind
    if {pk, dk} != {"X", "Z"}:
        raise ValueError("correlations need one X and one Z lattice")

    def edge_of(graph, sig):
        if not sig or len(sig) > 2:
            return None
        nodes = sorted((t - 1) * graph.n_stabs + s for s, t in sig)
        key = (
            (nodes[0], nodes[1])
            if len(nodes) == 2
            else (nodes[0], graph.boundary_node)
        )
        return graph.edge_lookup.get(key)

    joint: dict[tuple[int, int], Fraction] = {}
    for rec in enumeration:
        psig = rec.x_events if pk == "X" else rec.z_events
        dsig = rec.x_events if dk == "X" else rec.z_events
        pe = edge_of(graph_primal, psig)
        de = edge_of(graph_dual, dsig)
        if pe is None or de is None:
            continue
        key = (pe, de)
        joint[key] = joint.get(key, Fraction(0)) + rec.coeff

    table: list[list[tuple[int, Fraction]]] = [[] for _ in graph_primal.edges]
    for (pe, de), j in sorted(joint.items()):
        cond = j / graph_primal.edges[pe].coeff
        if not 0 < cond <= 1:
            raise GraphBuildError(f"conditional {cond} outside (0, 1]")
        table[pe].append((de, cond))
    result = [tuple(row) for row in table]
    graph_primal.corr_to_dual = result
    return result


def _code_capacity_records(layout: CodeLayout) -> list[FaultRecord]:
    """Single data-qubit Pauli 'enumeration' for the code-capacity model."""
    from .code import ideal_syndrome
    from .noise import FaultEvent

    n_x = len(layout.x_stabilizers)
    records = []
    for q in range(layout.n_data):
        for pay, kind in enumerate("XYZ"):
            err = PauliOperator.single(layout.n_data, q, kind)
            syn = ideal_syndrome(layout, err)
            z_events = tuple((i, 1) for i in range(n_x) if syn[i])
            x_events = tuple(
                (i, 1) for i in range(len(layout.z_stabilizers)) if syn[n_x + i]
            )
            records.append(
                FaultRecord(
                    fault=FaultEvent(1, "idle", q, pay),
                    x_events=x_events,
                    z_events=z_events,
                    coeff=Fraction(1, 3),
                    x_residual=err.x_mask,
                    z_residual=err.z_mask,
                )
            )
    return records


def build_code_capacity_graph(layout: CodeLayout, lattice_kind: str) -> DecodingGraph:
    """2D decoding graph with perfect syndromes and unit edge weights.

    Edge weights follow the normalized convention: every unconditioned edge
    weighs 1; reweighting a correlated edge sets it to 0.
    """
    if lattice_kind not in ("X", "Z"):
        raise ValueError(f"lattice kind must be 'X' or 'Z', got {lattice_kind!r}")
    records = _code_capacity_records(layout)
    coords = layout.z_anc_coords if lattice_kind == "X" else layout.x_anc_coords
    n_stabs = len(coords)
    edges, lookup = _pool_edges(
        records, lattice_kind, layout, 1, n_stabs, coords, 0.0, "code_capacity"
    )
    g = DecodingGraph(
        kind=lattice_kind,
        L=layout.L,
        T=0,
        p=0.0,
        mode="code_capacity",
        n_stabs=n_stabs,
        n_layers=1,
        stab_coords=coords,
        edges=edges,
        edge_lookup=lookup,
    )
    g.finalize()
    return g


#: enumeration results per (L, T, final_round_perfect, include_idle, warmup);
#: they are pure functions of the configuration and safe to share read-only
_ENUM_CACHE: dict[tuple, list[FaultRecord]] = {}


def _cached_enumeration(
    layout, circuit, T, final_round_perfect, include_idle, warmup_rounds
):
    key = (layout.L, T, final_round_perfect, include_idle, warmup_rounds)
    records = _ENUM_CACHE.get(key)
    if records is None:
        records = shift_enumeration(
            enumerate_single_faults(
                layout, circuit, T + warmup_rounds, final_round_perfect,
                include_idle,
            ),
            warmup_rounds,
        )
        _ENUM_CACHE[key] = records
    return records


def build_decoder_graphs(
    L: int,
    T: int,
    p: float,
    final_round_perfect: bool = True,
    include_idle: bool = True,
    warmup_rounds: int = 0,
) -> tuple[DecodingGraph, DecodingGraph]:
    """Both lattices plus cross-correlations for a distance-L, T-round window."""
    layout = build_layout(L)
    circuit = build_se_circuit(layout)
    enumeration = _cached_enumeration(
        layout, circuit, T, final_round_perfect, include_idle, warmup_rounds
    )
    params = NoiseParams(p)
    gx = build_graph(
        layout, circuit, params, T, "X", enumeration, final_round_perfect,
        include_idle,
    )
    gz = build_graph(
        layout, circuit, params, T, "Z", enumeration, final_round_perfect,
        include_idle,
    )
    derive_correlations(gx, gz, enumeration)
    derive_correlations(gz, gx, enumeration)
    return gx, gz


def build_code_capacity_pair(L: int) -> tuple[DecodingGraph, DecodingGraph]:
    """Both 2D code-capacity lattices with same-qubit correlations."""
    layout = build_layout(L)
    records = _code_capacity_records(layout)
    gx = build_code_capacity_graph(layout, "X")
    gz = build_code_capacity_graph(layout, "Z")
    derive_correlations(gx, gz, records)
    derive_correlations(gz, gx, records)
    return gx, gz


def graph_to_dict(graph: DecodingGraph) -> dict:
    """JSON-ready dump of nodes, edges, weights, labels and correlations."""
    return {
        "kind": graph.kind,
        "distance": graph.L,
        "rounds": graph.T,
        "p": graph.p,
        "mode": graph.mode,
        "n_stabilizers": graph.n_stabs,
        "n_layers": graph.n_layers,
        "boundary_node": graph.boundary_node,
        "edges": [
            {
                "index": e.index,
                "u": e.u,
                "v": e.v,
                "probability_coefficient": str(e.coeff),
                "probability": float(e.coeff) * graph.p
                if graph.mode == "circuit"
                else None,
                "weight": e.weight,
                "type": e.letter,
                "boundary": e.boundary,
                "fault_locations": e.n_fault_locations,
                "correction_mask": e.correction,
            }
            for e in graph.edges
        ],
        "correlations": None
        if graph.corr_to_dual is None
        else [
            [
                {"dual_edge": de, "conditional": str(c)}
                for de, c in graph.corr_to_dual[e.index]
            ]
            for e in graph.edges
        ],
    }


def dump_graph_json(graph: DecodingGraph, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(graph_to_dict(graph), fh, indent=1, sort_keys=True)
        fh.write("\n")
