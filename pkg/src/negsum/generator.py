"""Random instance generation.

`generate_sound` starts from an atomic negotiation and applies randomly
chosen inverse rule images: splitting a result in two (inverse merge),
inserting a fresh atom behind an outcome (inverse shortcut), and adding a
self-loop result (inverse iteration). Each inserted pattern is exactly
what a correct reduction rule removes again, so every output is sound by
rule correctness, deterministic by construction, and acyclic when
self-loop insertion is disabled.

`mutate_unsound` derives unsound, still well-formed variants from sound
ones by deleting results (falling back to retargeting single arcs),
keeping only mutants the state-space oracle rejects.
"""

from __future__ import annotations

import random
from typing import Optional

from .model import AtomSpec, Negotiation, classify, validate
from .errors import ValidationError
from .semantics import check_soundness


def _atomic(agents: tuple[str, ...]) -> Negotiation:
    return validate(
        agents,
        [AtomSpec("n0", agents, ("r0",))],
        "n0",
        "n0",
        {("n0", p, "r0"): set() for p in agents},
    )


def _parts(neg: Negotiation):
    atoms = list(neg.atoms.values())
    transition = {k: set(v) for k, v in neg.transition.items()}
    return atoms, transition


def _rebuild(neg, atoms, transition, initial, final):
    return validate(neg.agents, atoms, initial, final, transition)


def _split_final(neg: Negotiation, counter: list[int]) -> Negotiation:
    """Inverse of the final-atom shortcut: push the final results onto a
    fresh final atom behind the old one."""
    atoms, transition = _parts(neg)
    old = neg.final
    fresh = f"a{counter[0]}"
    counter[0] += 1
    link = f"r{counter[1]}"
    counter[1] += 1
    results = neg.results(old)
    atoms = [
        AtomSpec(a.id, a.parties, (link,)) if a.id == old else a for a in atoms
    ]
    atoms.append(AtomSpec(fresh, neg.agents, results))
    for p in neg.agents:
        for r in results:
            del transition[(old, p, r)]
            transition[(fresh, p, r)] = set()
        transition[(old, p, link)] = {fresh}
    return _rebuild(neg, atoms, transition, neg.initial, fresh)


def _un_merge(neg: Negotiation, rng: random.Random, counter: list[int]) -> Optional[Negotiation]:
    candidates = [a for a in neg.atoms.values() if a.id != neg.final]
    if not candidates:
        return None
    spec = rng.choice(candidates)
    r = rng.choice(spec.results)
    atoms, transition = _parts(neg)
    r1 = f"r{counter[1]}"
    r2 = f"r{counter[1] + 1}"
    counter[1] += 2
    pos = spec.results.index(r)
    new_results = spec.results[:pos] + (r1, r2) + spec.results[pos + 1 :]
    atoms = [
        AtomSpec(a.id, a.parties, new_results) if a.id == spec.id else a
        for a in atoms
    ]
    for p in spec.parties:
        targets = transition.pop((spec.id, p, r))
        transition[(spec.id, p, r1)] = set(targets)
        transition[(spec.id, p, r2)] = set(targets)
    return _rebuild(neg, atoms, transition, neg.initial, neg.final)


def _un_shortcut(neg: Negotiation, rng: random.Random, counter: list[int]) -> Optional[Negotiation]:
    sites = [
        (n, r) for n, spec in neg.atoms.items() if n != neg.final for r in spec.results
    ]
    if not sites:
        return None
    n, r = rng.choice(sites)
    parties = neg.parties(n)
    size = rng.randint(1, len(parties))
    chosen = tuple(sorted(rng.sample(parties, size), key=neg.agent_index))
    fresh = f"a{counter[0]}"
    counter[0] += 1
    link = f"r{counter[1]}"
    counter[1] += 1
    atoms, transition = _parts(neg)
    atoms.append(AtomSpec(fresh, chosen, (link,)))
    for p in chosen:
        transition[(fresh, p, link)] = set(neg.targets(n, p, r))
        transition[(n, p, r)] = {fresh}
    return _rebuild(neg, atoms, transition, neg.initial, neg.final)


def _un_iteration(neg: Negotiation, rng: random.Random, counter: list[int]) -> Optional[Negotiation]:
    candidates = [a for a in neg.atoms.values() if a.id != neg.final]
    if not candidates:
        return None
    spec = rng.choice(candidates)
    loop = f"r{counter[1]}"
    counter[1] += 1
    atoms, transition = _parts(neg)
    atoms = [
        AtomSpec(a.id, a.parties, a.results + (loop,)) if a.id == spec.id else a
        for a in atoms
    ]
    for p in spec.parties:
        transition[(spec.id, p, loop)] = {spec.id}
    return _rebuild(neg, atoms, transition, neg.initial, neg.final)


def generate_sound(
    seed: int,
    steps: int,
    num_agents: int = 3,
    acyclic: bool = False,
    max_atoms: int = 12,
) -> Negotiation:
    """Apply `steps` random inverse rules starting from an atomic
    negotiation over `num_agents` agents."""
    rng = random.Random(seed)
    agents = tuple(f"p{i}" for i in range(1, num_agents + 1))
    neg = _atomic(agents)
    counter = [1, 1]  # fresh atom ids, fresh result names
    if steps == 0:
        return neg
    neg = _split_final(neg, counter)
    ops = ["un_merge", "un_shortcut"] + ([] if acyclic else ["un_iteration"])
    for _ in range(steps - 1):
        op = rng.choice(ops)
        if op == "un_shortcut" and len(neg.atoms) >= max_atoms:
            op = "un_merge"
        if op == "un_merge":
            nxt = _un_merge(neg, rng, counter)
        elif op == "un_shortcut":
            nxt = _un_shortcut(neg, rng, counter)
        else:
            nxt = _un_iteration(neg, rng, counter)
        if nxt is not None:
            neg = nxt
    return neg


def mutate_unsound(
    neg: Negotiation, rng: random.Random, attempts: int = 60
) -> Optional[Negotiation]:
    """A well-formed but unsound variant of a sound input, produced by
    deleting a result (or, failing that, retargeting one arc); mutants are
    screened with the state-space oracle. Preserves determinism and
    acyclicity. Returns None when no attempt works."""
    was_acyclic = classify(neg).acyclic
    deletable = [
        (n, r)
        for n, spec in neg.atoms.items()
        if n != neg.final and len(spec.results) > 1
        for r in spec.results
    ]
    retargets = [
        (n, p, r, t)
        for (n, p, r), targets in neg.transition.items()
        if n != neg.final
        for t in targets
    ]
    for _ in range(attempts):
        mutant = None
        if deletable and (not retargets or rng.random() < 0.7):
            n, r = rng.choice(deletable)
            spec = neg.atoms[n]
            atoms, transition = _parts(neg)
            atoms = [
                AtomSpec(a.id, a.parties, tuple(x for x in a.results if x != r))
                if a.id == n
                else a
                for a in atoms
            ]
            for p in spec.parties:
                del transition[(n, p, r)]
            try:
                mutant = _rebuild(neg, atoms, transition, neg.initial, neg.final)
            except ValidationError:
                continue
        elif retargets:
            n, p, r, old = rng.choice(retargets)
            options = [
                m
                for m, spec in neg.atoms.items()
                if p in spec.parties and m != old and m != neg.initial
            ]
            if not options:
                continue
            new = rng.choice(options)
            atoms, transition = _parts(neg)
            transition[(n, p, r)] = (set(transition[(n, p, r)]) - {old}) | {new}
            try:
                mutant = _rebuild(neg, atoms, transition, neg.initial, neg.final)
            except ValidationError:
                continue
        if mutant is None:
            continue
        cls = classify(mutant)
        if was_acyclic and not cls.acyclic:
            continue
        if not cls.deterministic:
            continue
        if not check_soundness(mutant, cap=200_000).sound:
            return mutant
    return None


def expfam(k: int) -> Negotiation:
    """The branch-diamond family: one initial atom fans out to k private
    branches (a two-way choice rejoining before the final atom); shortcuts
    taken eagerly at the initial atom pile up 2^(k-1) results there."""
    if k < 1:
        raise ValueError("k must be >= 1")
    agents = tuple(f"p{i}" for i in range(1, k + 1))
    atoms = [AtomSpec("n0", agents, ("a",))]
    transition: dict = {}
    for i, agent in enumerate(agents, start=1):
        root, arm_a, arm_b, join = f"b{i}", f"b{i}a", f"b{i}b", f"b{i}j"
        atoms.append(AtomSpec(root, (agent,), (f"x{i}", f"y{i}")))
        atoms.append(AtomSpec(arm_a, (agent,), ("go",)))
        atoms.append(AtomSpec(arm_b, (agent,), ("go",)))
        atoms.append(AtomSpec(join, (agent,), ("go",)))
        transition[("n0", agent, "a")] = {root}
        transition[(root, agent, f"x{i}")] = {arm_a}
        transition[(root, agent, f"y{i}")] = {arm_b}
        transition[(arm_a, agent, "go")] = {join}
        transition[(arm_b, agent, "go")] = {join}
        transition[(join, agent, "go")] = {"nf"}
    atoms.append(AtomSpec("nf", agents, ("f",)))
    for agent in agents:
        transition[("nf", agent, "f")] = set()
    return validate(agents, atoms, "n0", "nf", transition)
