"""Summarization by state elimination on the labeled reachability graph.

Each reachability edge starts out labeled with the atomic transformer of
its outcome. Three reduction rules (merge parallel edges, remove a
self-loop by starring it onto the outgoing edges, bypass a node with
shortcut edges) are applied in phases until only the initial and final
markings remain; the surviving edge labels are the summary expressions.

Edges into the final marking carry their final result as a tag, so the
output maps each final result to one expression even when the final atom
has several results. On diagrams where some marking cannot reach the
final marking the graph does not reduce completely; the residual graph is
returned instead of a summary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import GuardFailed
from .model import Negotiation
from .semantics import DEFAULT_CAP, Marking, ReachabilityGraph, reachability
from .transformers import (
    Rel,
    StateSpace,
    TransformerExpr,
    concat,
    concat_expr,
    eval_expr,
    identity_rel,
    star_expr,
    union,
    union_expr,
)


@dataclass
class LEdge:
    src: int
    expr: TransformerExpr
    dst: int
    final_result: Optional[str] = None


@dataclass
class LabeledRG:
    markings: list[Marking]
    alive: set[int]
    edges: list[LEdge]
    x0: int
    xf: Optional[int]

    def in_edges(self, v: int) -> list[LEdge]:
        return [e for e in self.edges if e.dst == v and e.src != v]

    def out_edges(self, v: int) -> list[LEdge]:
        return [e for e in self.edges if e.src == v and e.dst != v]

    def self_loops(self, v: int) -> list[LEdge]:
        return [e for e in self.edges if e.src == v and e.dst == v]

    def node_key(self, v: int) -> str:
        return str(self.markings[v])


def labeled_rg(neg: Negotiation, graph: ReachabilityGraph) -> LabeledRG:
    xf = graph.node_index.get(graph.final) if graph.final is not None else None
    edges = []
    for src, (aid, r), dst in graph.edges:
        edges.append(
            LEdge(
                graph.node_index[src],
                neg.transformer((aid, r)),
                graph.node_index[dst],
                final_result=r if aid == neg.final else None,
            )
        )
    return LabeledRG(
        markings=list(graph.nodes),
        alive=set(range(len(graph.nodes))),
        edges=edges,
        x0=graph.node_index[graph.initial],
        xf=xf,
    )


# ---------------------------------------------------------------------------
# The three elimination rules
# ---------------------------------------------------------------------------

def elim_parallel(g: LabeledRG, v1: int, v2: int) -> None:
    """Replace all parallel v1 -> v2 edges by one edge labeled with their
    union. Edges into the final marking keep their final-result tags and
    are never merged."""
    if v2 == g.xf:
        raise GuardFailed("parallel edges into the final marking are kept apart")
    parallel = [e for e in g.edges if e.src == v1 and e.dst == v2]
    if len(parallel) < 2:
        raise GuardFailed(f"fewer than two edges from {v1} to {v2}")
    merged = LEdge(v1, union_expr(*(e.expr for e in parallel)), v2)
    g.edges = [e for e in g.edges if not (e.src == v1 and e.dst == v2)]
    g.edges.append(merged)


def elim_selfloop(g: LabeledRG, v: int) -> None:
    """Prefix every proper out-edge of v with the starred self-loop, then
    drop the self-loop."""
    loops = g.self_loops(v)
    if not loops:
        raise GuardFailed(f"no self-loop at node {v}")
    if len(loops) > 1:
        raise GuardFailed(
            f"{len(loops)} parallel self-loops at node {v}; merge them first"
        )
    star = star_expr(loops[0].expr)
    for e in g.edges:
        if e.src == v and e.dst != v:
            e.expr = concat_expr(star, e.expr)
    g.edges.remove(loops[0])


def elim_node(g: LabeledRG, v: int) -> None:
    """Bypass v: one shortcut edge per (in-edge, out-edge) pair, then
    remove v entirely. Requires v to be an interior node with no self-loop
    and at least one successor."""
    if v == g.x0 or v == g.xf:
        raise GuardFailed("cannot eliminate the initial or final marking")
    if v not in g.alive:
        raise GuardFailed(f"node {v} was already removed")
    if g.self_loops(v):
        raise GuardFailed(f"node {v} still has a self-loop")
    outs = g.out_edges(v)
    if not outs:
        raise GuardFailed(f"node {v} has no successor")
    ins = g.in_edges(v)
    new_edges = [
        LEdge(ei.src, concat_expr(ei.expr, eo.expr), eo.dst, eo.final_result)
        for ei in ins
        for eo in outs
    ]
    g.edges = [e for e in g.edges if e.src != v and e.dst != v] + new_edges
    g.alive.discard(v)


# ---------------------------------------------------------------------------
# The phase strategy
# ---------------------------------------------------------------------------

def _parallel_sites(g: LabeledRG):
    seen: dict[tuple[int, int], int] = {}
    for e in g.edges:
        if e.dst == g.xf:
            continue
        seen[(e.src, e.dst)] = seen.get((e.src, e.dst), 0) + 1
    return sorted(k for k, count in seen.items() if count > 1)


@dataclass
class SummaryResult:
    summary: Optional[dict[str, TransformerExpr]]
    residual: Optional[LabeledRG] = None

    @property
    def fully_reduced(self) -> bool:
        return self.summary is not None


def reduce_labeled_rg(g: LabeledRG, on_step=None) -> SummaryResult:
    def done(kind, site):
        if on_step is not None:
            on_step(g, kind, site)

    while True:
        while True:
            sites = _parallel_sites(g)
            if not sites:
                break
            for v1, v2 in sites:
                elim_parallel(g, v1, v2)
                done("parallel", (v1, v2))
        for v in sorted(g.alive):
            if g.self_loops(v):
                elim_selfloop(g, v)
                done("selfloop", v)
        if _parallel_sites(g):
            continue  # a starred rewrite may have created new parallels

        interior = [v for v in g.alive if v not in (g.x0, g.xf)]
        if not interior:
            break
        candidates = [v for v in interior if g.out_edges(v)]
        if not candidates:
            break  # dead-end nodes: the graph cannot reduce further
        v = min(
            candidates,
            key=lambda v: (len(g.in_edges(v)) * len(g.out_edges(v)), g.node_key(v)),
        )
        elim_node(g, v)
        done("node", v)

    leftover = g.alive - {g.x0} - ({g.xf} if g.xf is not None else set())
    if leftover or g.xf is None:
        return SummaryResult(summary=None, residual=g)
    summary: dict[str, TransformerExpr] = {}
    for e in g.edges:
        assert e.src == g.x0 and e.dst == g.xf and e.final_result is not None
        if e.final_result in summary:
            summary[e.final_result] = union_expr(summary[e.final_result], e.expr)
        else:
            summary[e.final_result] = e.expr
    return SummaryResult(summary=summary)


def summarize_by_states(neg: Negotiation, cap: int = DEFAULT_CAP) -> SummaryResult:
    """Build the labeled reachability graph and reduce it. Returns the
    mapping final result -> transformer expression, or the residual graph
    when the diagram cannot reach its final marking from everywhere."""
    graph = reachability(neg, cap)
    return reduce_labeled_rg(labeled_rg(neg, graph))


# ---------------------------------------------------------------------------
# Denotation oracle
# ---------------------------------------------------------------------------

def graph_denotation(
    g: LabeledRG, interp, space: StateSpace
) -> dict[str, Rel]:
    """Per final result, the union of path relations from the initial to
    the final marking, computed by Kleene iteration on the finite relation
    lattice. Independent of the elimination rules; used as their oracle
    (and, on the unreduced graph, as the brute-force union over all large
    steps)."""
    edge_rels = [(e, eval_expr(e.expr, interp, space)) for e in g.edges]
    reach: dict[int, Rel] = {g.x0: identity_rel()}
    changed = True
    while changed:
        changed = False
        for e, rel in edge_rels:
            if e.src not in reach:
                continue
            add = concat(reach[e.src], rel, space)
            if e.dst not in reach:
                reach[e.dst] = add
                changed = True
            else:
                merged = union(reach[e.dst], add, space)
                if merged.pairs != reach[e.dst].pairs:
                    reach[e.dst] = merged
                    changed = True
    out: dict[str, Rel] = {}
    for e, rel in edge_rels:
        if e.dst != g.xf or e.final_result is None or e.src not in reach:
            continue
        add = concat(reach[e.src], rel, space)
        if e.final_result in out:
            out[e.final_result] = union(out[e.final_result], add, space)
        else:
            out[e.final_result] = add
    return out


def brute_force_summary(
    neg: Negotiation, interp, space: StateSpace, cap: int = DEFAULT_CAP
) -> dict[str, Rel]:
    """Union of the transformers of all large steps, per final result,
    straight off the reachability graph."""
    graph = reachability(neg, cap)
    return graph_denotation(labeled_rg(neg, graph), interp, space)
