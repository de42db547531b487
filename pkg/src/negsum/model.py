"""Negotiation diagrams: data model, well-formedness validation, the
negotiation graph, and classification (deterministic / weakly
deterministic / acyclic).

A negotiation couples a set of agents with a set of multi-party atoms.
Validation enforces:

  (1) every agent participates in both the initial and the final atom;
  (2) a transition target set is empty exactly at the final atom;
  (3) every atom lies on a path from the initial to the final atom,
      checked as forward reachability from the initial atom plus backward
      reachability from the final atom on the negotiation graph.

Validated negotiations are immutable by convention: every reduction rule
produces a new value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

import networkx as nx

from .errors import ValidationError
from .transformers import Atomic, Rel, StateSpace, TransformerExpr

Outcome = tuple[str, str]  # (atom id, result name)
Arc = tuple[str, str, str, str]  # (atom, agent, result, target atom)


@dataclass(frozen=True)
class AtomSpec:
    """One atom: its parties and results, both in declaration order."""

    id: str
    parties: tuple[str, ...]
    results: tuple[str, ...]


@dataclass(frozen=True)
class Classification:
    deterministic: bool
    weakly_deterministic: bool
    acyclic: bool
    deterministic_agents: frozenset[str]


@dataclass
class Negotiation:
    """A validated negotiation diagram.

    `transition` maps every triple (atom, party, result) to a frozenset of
    target atom ids (the transition function, total on the triples of the
    diagram). `transformers` maps every outcome to a symbolic transformer
    expression; `rels` optionally carries concrete relations for outcomes,
    and `states` the finite per-agent state space they live in.
    """

    agents: tuple[str, ...]
    atoms: dict[str, AtomSpec]
    initial: str
    final: str
    transition: dict[tuple[str, str, str], frozenset[str]]
    transformers: dict[Outcome, TransformerExpr] = field(default_factory=dict)
    rels: dict[Outcome, Rel] = field(default_factory=dict)
    states: Optional[StateSpace] = None

    # -- basic accessors ---------------------------------------------------

    def parties(self, atom: str) -> tuple[str, ...]:
        return self.atoms[atom].parties

    def results(self, atom: str) -> tuple[str, ...]:
        return self.atoms[atom].results

    def targets(self, atom: str, agent: str, result: str) -> frozenset[str]:
        return self.transition[(atom, agent, result)]

    def outcomes(self) -> Iterator[Outcome]:
        for atom in self.atoms.values():
            for r in atom.results:
                yield (atom.id, r)

    def arcs(self) -> Iterator[Arc]:
        for (atom, agent, result), targets in self.transition.items():
            for t in sorted(targets, key=self.atom_index):
                yield (atom, agent, result, t)

    def atom_index(self, atom: str) -> int:
        return self._atom_order[atom]

    def agent_index(self, agent: str) -> int:
        return self._agent_order[agent]

    def result_index(self, atom: str, result: str) -> int:
        return self.atoms[atom].results.index(result)

    def transformer(self, outcome: Outcome) -> TransformerExpr:
        return self.transformers.get(outcome, Atomic(outcome))

    def is_atomic(self) -> bool:
        return len(self.atoms) == 1

    def num_outcomes(self) -> int:
        return sum(len(a.results) for a in self.atoms.values())

    def __post_init__(self):
        self._atom_order = {a: i for i, a in enumerate(self.atoms)}
        self._agent_order = {a: i for i, a in enumerate(self.agents)}

    def __repr__(self):
        return (
            f"Negotiation({len(self.agents)} agents, {len(self.atoms)} atoms, "
            f"initial={self.initial!r}, final={self.final!r})"
        )


def negotiation_graph(neg: Negotiation) -> nx.MultiDiGraph:
    """The graph of the negotiation: atoms as vertices, one edge per arc,
    labeled with (agent, result)."""
    g = nx.MultiDiGraph()
    g.add_nodes_from(neg.atoms)
    for atom, agent, result, target in neg.arcs():
        g.add_edge(atom, target, agent=agent, result=result)
    return g


def validate(
    agents: Iterable[str],
    atoms: Iterable[AtomSpec],
    initial: str,
    final: str,
    transition: dict[tuple[str, str, str], Iterable[str]],
    transformers: Optional[dict[Outcome, TransformerExpr]] = None,
    rels: Optional[dict[Outcome, Rel]] = None,
    states: Optional[StateSpace] = None,
) -> Negotiation:
    """Check all well-formedness conditions and build a Negotiation.

    Collects every violation instead of failing fast, and raises a single
    ValidationError naming condition (1)/(2)/(3) and the offending element.
    """
    agents = tuple(agents)
    atom_map: dict[str, AtomSpec] = {}
    violations: list[str] = []

    if not agents:
        violations.append("agent set is empty")
    if len(set(agents)) != len(agents):
        violations.append("duplicate agent names")

    for spec in atoms:
        if spec.id in atom_map:
            violations.append(f"duplicate atom id {spec.id!r}")
            continue
        if not spec.parties:
            violations.append(f"atom {spec.id!r} has no parties")
        if not spec.results:
            violations.append(f"atom {spec.id!r} has no results")
        if len(set(spec.results)) != len(spec.results):
            violations.append(f"atom {spec.id!r} has duplicate result names")
        for p in spec.parties:
            if p not in agents:
                violations.append(f"atom {spec.id!r} party {p!r} is not an agent")
        atom_map[spec.id] = spec

    for name, aid in (("initial", initial), ("final", final)):
        if aid not in atom_map:
            violations.append(f"{name} atom {aid!r} does not exist")
    if violations:
        raise ValidationError(violations)

    # condition (1): everyone participates in the initial and final atoms
    for aid in {initial, final}:
        if set(atom_map[aid].parties) != set(agents):
            violations.append(
                f"InitialOrFinalNotAllAgents: condition (1) fails at {aid!r}: "
                f"parties {sorted(atom_map[aid].parties)} != agents {sorted(agents)}"
            )

    # transition totality, target existence, condition (2)
    norm: dict[tuple[str, str, str], frozenset[str]] = {}
    for spec in atom_map.values():
        for p in spec.parties:
            for r in spec.results:
                key = (spec.id, p, r)
                if key not in transition:
                    violations.append(f"transition not defined on triple {key}")
                    continue
                targets = frozenset(transition[key])
                norm[key] = targets
                for t in targets:
                    if t not in atom_map:
                        violations.append(
                            f"DanglingTarget: arc {(spec.id, p, r, t)} targets a "
                            f"missing atom"
                        )
                    elif p not in atom_map[t].parties:
                        violations.append(
                            f"DanglingTarget: arc {(spec.id, p, r, t)} targets an "
                            f"atom without a port for {p!r}"
                        )
                if spec.id == final and targets:
                    violations.append(
                        f"NonFinalEmptyTransition: condition (2) fails: final triple "
                        f"{key} has targets {sorted(targets)}"
                    )
                if spec.id != final and not targets:
                    violations.append(
                        f"NonFinalEmptyTransition: condition (2) fails: non-final "
                        f"triple {key} has no target"
                    )
    extra = set(transition) - set(norm)
    for key in sorted(extra):
        violations.append(f"transition defined outside the diagram's triples: {key}")

    # condition (3): forward-reachable from the initial atom and
    # backward-reachable from the final atom, on a best-effort graph so
    # this reports alongside any condition (1)/(2) findings
    g = nx.MultiDiGraph()
    g.add_nodes_from(atom_map)
    for (aid, _agent, _r), targets in norm.items():
        for t in targets:
            if t in atom_map:
                g.add_edge(aid, t)
    fwd = nx.descendants(g, initial) | {initial}
    bwd = nx.ancestors(g, final) | {final}
    for aid in atom_map:
        if aid not in fwd or aid not in bwd:
            violations.append(
                f"MissingPath: condition (3) fails at {aid!r}: not on a path from "
                f"{initial!r} to {final!r}"
            )

    # sanity of attached concrete data
    rels = dict(rels or {})
    if states is not None:
        for agent in agents:
            if agent not in states or not states[agent]:
                violations.append(f"state space missing agent {agent!r}")
    for (aid, r), rel in rels.items():
        if aid not in atom_map or r not in atom_map[aid].results:
            # Interpretation entries for outcomes consumed by earlier rule
            # applications stay usable for evaluating derived expressions.
            continue
        if tuple(rel.parties) != atom_map[aid].parties:
            violations.append(
                f"relation for {(aid, r)} is over {rel.parties}, expected "
                f"{atom_map[aid].parties}"
            )
        elif states is not None and not rel.is_left_total(states):
            violations.append(f"relation for {(aid, r)} is not left-total")

    if violations:
        raise ValidationError(violations)
    return Negotiation(
        agents=agents,
        atoms=atom_map,
        initial=initial,
        final=final,
        transition=norm,
        transformers=dict(transformers or {}),
        rels=rels,
        states=states,
    )


def classify(neg: Negotiation) -> Classification:
    """Determinism, weak determinism, and acyclicity of a valid negotiation."""
    det_agents = set(neg.agents)
    for (atom, agent, _r), targets in neg.transition.items():
        if atom != neg.final and len(targets) != 1 and agent in det_agents:
            det_agents.discard(agent)

    deterministic = det_agents == set(neg.agents)

    weakly = True
    for (atom, _agent, _r), targets in neg.transition.items():
        if atom == neg.final:
            continue
        if not any(
            b in det_agents and all(b in neg.parties(t) for t in targets)
            for b in neg.agents
        ):
            weakly = False
            break

    acyclic = nx.is_directed_acyclic_graph(negotiation_graph(neg))
    return Classification(
        deterministic=deterministic,
        weakly_deterministic=weakly,
        acyclic=acyclic,
        deterministic_agents=frozenset(det_agents),
    )
