"""Structural diagnostics: targets of maximal sequences launched by an
atom, fragments and segments, loops and their synchronizers, dominating
atoms of syntactic cycles, and guided path execution.

On sound deterministic diagrams all maximal sequences launched from an
atom hit the same target marking; a conflicting pair of sequences is
returned as unsoundness evidence otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import networkx as nx

from .errors import BudgetExceeded
from .model import AtomSpec, Negotiation, Outcome, negotiation_graph, validate
from .semantics import (
    Marking,
    enabled,
    make_marking,
    reachability,
    sorted_outcomes,
    step,
)
from .transformers import IDENTITY

DEFAULT_CAP = 100_000


@dataclass
class TargetReport:
    """Result of exploring the maximal sequences launched by an atom (or by
    one outcome, in strict mode): the common target, or two sequences with
    different targets as unsoundness evidence."""

    atom: str
    target: Optional[Marking]
    conflict: Optional[tuple[list[Outcome], list[Outcome]]] = None
    explored_atoms: frozenset[str] = frozenset()

    @property
    def unique(self) -> bool:
        return self.target is not None and self.conflict is None


def start_marking(neg: Negotiation, atom: str) -> Marking:
    return make_marking(neg, {p: {atom} for p in neg.parties(atom)})


def _explore_targets(
    neg: Negotiation,
    atom: str,
    first: Optional[Outcome],
    strict: bool,
    cap: int,
) -> TargetReport:
    """Walk all sequences from the atom's start marking. In strict mode
    only atoms with strictly fewer parties than the launch atom may follow
    the first outcome."""
    launch_parties = set(neg.parties(atom))
    x_start = start_marking(neg, atom)

    def moves(m: Marking) -> list[Outcome]:
        outs = sorted_outcomes(neg, m)
        if strict:
            outs = [
                o
                for o in outs
                if set(neg.parties(o[0])) < launch_parties
            ]
        return outs

    if first is not None:
        roots = [([first], step(neg, x_start, first))]
    else:
        roots = [
            ([(atom, r)], step(neg, x_start, (atom, r))) for r in neg.results(atom)
        ]

    paths: dict[Marking, list[Outcome]] = {}
    fired: set[str] = {atom}
    dead: dict[Marking, list[Outcome]] = {}
    stack = list(reversed(roots))
    while stack:
        path, m = stack.pop()
        if m in paths:
            continue
        if len(paths) >= cap:
            raise BudgetExceeded(cap)
        paths[m] = path
        nxt = moves(m)
        if not nxt:
            dead[m] = path
            continue
        for o in reversed(nxt):
            fired.add(o[0])
            stack.append((path + [o], step(neg, m, o)))

    explored = frozenset(fired)
    targets = sorted(dead, key=lambda m: str(m))
    if len(dead) == 1:
        return TargetReport(atom, targets[0], explored_atoms=explored)
    if not dead:
        # every branch loops forever: no maximal sequence exists
        return TargetReport(atom, None, explored_atoms=explored)
    return TargetReport(
        atom,
        None,
        conflict=(dead[targets[0]], dead[targets[1]]),
        explored_atoms=explored,
    )


def target_of_atom(neg: Negotiation, atom: str, cap: int = DEFAULT_CAP) -> TargetReport:
    return _explore_targets(neg, atom, None, strict=False, cap=cap)


def target_of_outcome(
    neg: Negotiation, outcome: Outcome, cap: int = DEFAULT_CAP
) -> TargetReport:
    return _explore_targets(neg, outcome[0], outcome, strict=True, cap=cap)


# ---------------------------------------------------------------------------
# Fragments and segments
# ---------------------------------------------------------------------------

@dataclass
class Fragment:
    """A sub-negotiation with a fresh exit atom standing in for the launch
    atom's target marking. When targets are not unique the negotiation is
    absent and the report explains why."""

    atom: str
    negotiation: Optional[Negotiation]
    exit_atom: Optional[str]
    report: TargetReport

    @property
    def is_atomic(self) -> bool:
        """Only the launch atom and the exit remain, and the launch atom
        has a single result."""
        return (
            self.negotiation is not None
            and len(self.negotiation.atoms) == 2
            and len(self.negotiation.results(self.atom)) == 1
        )


def exit_name(atom: str) -> str:
    return f"n̂:{atom}"


def _build_fragment(
    neg: Negotiation, atom: str, report: TargetReport, members: set[str]
) -> Fragment:
    if not report.unique:
        return Fragment(atom, None, None, report)
    target = report.target
    agents = neg.parties(atom)
    hat = exit_name(atom)
    hat_result = "r̂"

    atoms = [neg.atoms[a] for a in neg.atoms if a in members]
    atoms.append(AtomSpec(hat, agents, (hat_result,)))
    transition: dict = {}
    transformers: dict = {}
    for spec in atoms:
        if spec.id == hat:
            for p in agents:
                transition[(hat, p, hat_result)] = set()
            transformers[(hat, hat_result)] = IDENTITY
            continue
        for p in spec.parties:
            for r in spec.results:
                want = target.agent_set(neg, p)
                now = neg.targets(spec.id, p, r)
                if tuple(sorted(now, key=neg.atom_index)) == want:
                    transition[(spec.id, p, r)] = {hat}
                else:
                    transition[(spec.id, p, r)] = set(now)
                transformers[(spec.id, r)] = neg.transformer((spec.id, r))
    built = validate(
        agents,
        atoms,
        atom,
        hat,
        transition,
        transformers=transformers,
        rels=dict(neg.rels),
        states=neg.states,
    )
    return Fragment(atom, built, hat, report)


def fragment(neg: Negotiation, atom: str, cap: int = DEFAULT_CAP) -> Fragment:
    """The sub-negotiation generated by everything the atom's parties can
    do on their own, with transitions into the target marking redirected
    to a fresh exit atom."""
    report = target_of_atom(neg, atom, cap)
    return _build_fragment(neg, atom, report, set(report.explored_atoms))


def segment(neg: Negotiation, outcome: Outcome, cap: int = DEFAULT_CAP) -> Fragment:
    """Like `fragment`, but launched by a single outcome and closed under
    atoms with strictly fewer parties; the launch atom keeps only the
    launching result."""
    report = target_of_outcome(neg, outcome, cap)
    if not report.unique:
        return Fragment(outcome[0], None, None, report)
    atom, result = outcome
    members = set(report.explored_atoms)
    restricted = dict(neg.atoms)
    restricted[atom] = AtomSpec(atom, neg.parties(atom), (result,))
    view = Negotiation(
        agents=neg.agents,
        atoms=restricted,
        initial=neg.initial,
        final=neg.final,
        transition=dict(neg.transition),
        transformers=dict(neg.transformers),
        rels=dict(neg.rels),
        states=neg.states,
    )
    return _build_fragment(view, atom, report, members)


def k_fragment(neg: Negotiation, k: int, cap: int = DEFAULT_CAP) -> list[Fragment]:
    """Fragments of all atoms with exactly k parties, with exit atoms
    shared between fragments whose launch atoms have the same parties."""
    out = []
    shared_exits: dict[frozenset[str], str] = {}
    for atom, spec in neg.atoms.items():
        if len(spec.parties) != k:
            continue
        frag = fragment(neg, atom, cap)
        key = frozenset(spec.parties)
        if frag.negotiation is not None:
            canonical = shared_exits.setdefault(key, frag.exit_atom)
            if canonical != frag.exit_atom:
                frag = _rename_exit(frag, canonical)
        out.append(frag)
    return out


def _rename_exit(frag: Fragment, new_name: str) -> Fragment:
    neg = frag.negotiation
    mapping = {frag.exit_atom: new_name}
    atoms = [
        AtomSpec(mapping.get(a.id, a.id), a.parties, a.results)
        for a in neg.atoms.values()
    ]
    transition = {
        (mapping.get(n, n), p, r): {mapping.get(t, t) for t in targets}
        for (n, p, r), targets in neg.transition.items()
    }
    transformers = {
        (mapping.get(n, n), r): e for (n, r), e in neg.transformers.items()
    }
    built = validate(
        neg.agents,
        atoms,
        neg.initial,
        new_name,
        transition,
        transformers=transformers,
        rels=dict(neg.rels),
        states=neg.states,
    )
    return Fragment(frag.atom, built, new_name, frag.report)


# ---------------------------------------------------------------------------
# Loops, synchronizers, dominating atoms
# ---------------------------------------------------------------------------

@dataclass
class Loop:
    outcomes: list[Outcome]
    marking: Marking
    atoms: frozenset[str] = field(init=False)
    agents: frozenset[str] = field(init=False)

    def __post_init__(self):
        self.atoms = frozenset(o[0] for o in self.outcomes)
        self.agents = frozenset()

    def bind(self, neg: Negotiation) -> "Loop":
        self.agents = frozenset(
            p for o in self.outcomes for p in neg.parties(o[0])
        )
        return self

    def replay(self, neg: Negotiation) -> bool:
        m = self.marking
        for o in self.outcomes:
            m = step(neg, m, o)
        return m == self.marking


def find_loops(neg: Negotiation, cap: int = DEFAULT_CAP, limit: int = 10_000) -> list[Loop]:
    """All simple cycles of the reachability graph, as replayable loops."""
    graph = reachability(neg, cap)
    g = nx.MultiDiGraph()
    for src, o, dst in graph.edges:
        g.add_edge(graph.node_index[src], graph.node_index[dst], outcome=o)
    edge_lookup: dict[tuple[int, int], list[Outcome]] = {}
    for src, o, dst in graph.edges:
        edge_lookup.setdefault(
            (graph.node_index[src], graph.node_index[dst]), []
        ).append(o)
    loops = []
    for cycle in nx.simple_cycles(g):
        if len(loops) >= limit:
            break
        outcomes = []
        ok = True
        for i, v in enumerate(cycle):
            w = cycle[(i + 1) % len(cycle)]
            options = edge_lookup.get((v, w))
            if not options:
                ok = False
                break
            outcomes.append(sorted(options)[0])
        if not ok:
            continue
        loop = Loop(outcomes, graph.nodes[cycle[0]]).bind(neg)
        loops.append(loop)
    return loops


def find_minimal_loop(neg: Negotiation, cap: int = DEFAULT_CAP) -> Optional[Loop]:
    """A loop whose atom set is minimal under inclusion (simple cycles
    suffice: every loop's atom set contains a simple cycle's atom set)."""
    loops = find_loops(neg, cap)
    if not loops:
        return None
    minimal = []
    for loop in loops:
        if not any(
            other.atoms < loop.atoms for other in loops if other is not loop
        ):
            minimal.append(loop)
    return min(minimal, key=lambda l: (sorted(l.atoms), len(l.outcomes)))


def synchronizers(neg: Negotiation, loop: Loop) -> set[str]:
    """Atoms of the loop whose parties cover every atom in the loop."""
    return {
        n
        for n in loop.atoms
        if all(set(neg.parties(m)) <= set(neg.parties(n)) for m in loop.atoms)
    }


def dominating_atom(neg: Negotiation, cycle: list[str]) -> Optional[str]:
    """First atom of a syntactic cycle whose parties cover the whole
    cycle, or None."""
    for n in cycle:
        if all(set(neg.parties(m)) <= set(neg.parties(n)) for m in cycle):
            return n
    return None


def syntactic_cycles(neg: Negotiation, limit: int = 10_000) -> list[list[str]]:
    g = negotiation_graph(neg)
    out = []
    for cycle in nx.simple_cycles(g):
        out.append(list(cycle))
        if len(out) >= limit:
            break
    return out


# ---------------------------------------------------------------------------
# Path execution
# ---------------------------------------------------------------------------

def execute_path(
    neg: Negotiation, path: list[tuple[str, str, str]], cap: int = DEFAULT_CAP
) -> Optional[list[Outcome]]:
    """Find an occurrence sequence from the initial marking executing the
    given path of (atom, agent, result) triples: between path outcomes only
    atoms outside the path may fire. Returns None if the guided search
    fails (it cannot on sound deterministic diagrams)."""
    path_atoms = {t[0] for t in path}
    allowed_outcomes = {(t[0], t[2]) for t in path}

    def filler_moves(m: Marking) -> list[Outcome]:
        # path atoms may only ever occur with their own path results
        return [
            o
            for o in sorted_outcomes(neg, m)
            if o[0] not in path_atoms or o in allowed_outcomes
        ]

    def bfs_to_enable(m: Marking, atom: str):
        seen = {m}
        queue = [(m, [])]
        qpos = 0
        while qpos < len(queue):
            cur, seq = queue[qpos]
            qpos += 1
            if atom in enabled(neg, cur):
                return cur, seq
            if len(seen) > cap:
                raise BudgetExceeded(cap)
            for o in filler_moves(cur):
                nxt = step(neg, cur, o)
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append((nxt, seq + [o]))
        return None

    from .semantics import initial_marking

    m = initial_marking(neg)
    run: list[Outcome] = []
    for atom, _agent, result in path:
        found = bfs_to_enable(m, atom)
        if found is None:
            return None
        m, seq = found
        run.extend(seq)
        if (atom, result) not in allowed_outcomes:
            return None
        m = step(neg, m, (atom, result))
        run.append((atom, result))
    return run
