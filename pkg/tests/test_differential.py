"""Differential stress tests: random diagrams, two independent analysis
routes, exact agreement required.

Random one-agent diagrams are arbitrary digraphs in which every atom lies
between the initial and final atoms, so they cover much wilder cycle
structure than the inverse-rule generator. Each one is pushed through the
rule-based strategies and through state elimination, and the resulting
summaries are compared denotationally under random interpretations.
"""

from __future__ import annotations

import random

import pytest

from negsum import (
    AtomSpec,
    check_soundness,
    classify,
    eval_expr,
    generate_sound,
    rels_equal,
    run_acyclic,
    run_general,
    run_one_agent,
    summarize_by_states,
    validate,
)
from negsum.strategies import is_replication

from conftest import synthetic_interp

from test_strategies import one_agent_bound, general_bound, replicate


def random_one_agent(seed: int, n_atoms: int = 6, extra_edges: int = 5):
    """A random valid one-agent negotiation: a random spanning path plus
    random extra edges, patched so every atom reaches the final atom."""
    rng = random.Random(seed)
    names = ["n0"] + [f"m{i}" for i in range(1, n_atoms - 1)] + ["nf"]
    edges = set()
    order = names[1:-1]
    rng.shuffle(order)
    chain = ["n0"] + order + ["nf"]
    for a, b in zip(chain, chain[1:]):
        edges.add((a, b))
    non_final = names[:-1]
    for _ in range(extra_edges):
        src = rng.choice(non_final)
        dst = rng.choice(names)
        if dst != "n0" or rng.random() < 0.5:
            edges.add((src, dst))
    edges = {(a, b) for a, b in edges if a != "nf"}

    atoms = []
    transition = {}
    counter = 0
    for name in names:
        outs = sorted(b for a, b in edges if a == name)
        if name == "nf":
            atoms.append(AtomSpec("nf", ("p",), ("end",)))
            transition[("nf", "p", "end")] = set()
            continue
        results = []
        for target in outs:
            counter += 1
            results.append(f"r{counter}")
            transition[(name, "p", f"r{counter}")] = {target}
        atoms.append(AtomSpec(name, ("p",), tuple(results)))
    return validate(("p",), atoms, "n0", "nf", transition)


@pytest.mark.parametrize("seed", range(40))
def test_one_agent_random_diagrams(seed):
    neg = random_one_agent(seed, n_atoms=4 + seed % 5, extra_edges=3 + seed % 5)
    assert check_soundness(neg).sound  # every one-agent diagram is sound
    trace = run_one_agent(neg)
    assert trace.verdict == "summarized"
    assert trace.total <= one_agent_bound(neg)

    space, interp = synthetic_interp(neg, seed)
    elim = summarize_by_states(neg)
    assert set(elim.summary) == set(trace.summary) == {"end"}
    assert rels_equal(
        eval_expr(trace.summary["end"], interp, space),
        eval_expr(elim.summary["end"], interp, space),
        space,
    )


@pytest.mark.parametrize("seed", range(12))
def test_general_strategy_agrees_on_one_agent_inputs(seed):
    neg = random_one_agent(seed, n_atoms=5, extra_edges=4)
    via_one = run_one_agent(neg)
    via_general = run_general(neg)
    assert via_general.verdict == via_one.verdict == "summarized"
    assert via_general.total <= general_bound(neg)
    space, interp = synthetic_interp(neg, seed)
    assert rels_equal(
        eval_expr(via_one.summary["end"], interp, space),
        eval_expr(via_general.summary["end"], interp, space),
        space,
    )


@pytest.mark.parametrize("seed", range(10))
def test_replications_of_random_diagrams(seed):
    base = random_one_agent(seed, n_atoms=5, extra_edges=3)
    rep = replicate(base, copies=2 + seed % 2)
    assert is_replication(rep)
    trace = run_one_agent(rep)
    assert trace.verdict == "summarized"
    assert trace.total <= one_agent_bound(rep)
    # the replication makes exactly the same decisions as its original
    assert [a.kind for a in trace.applications] == [
        a.kind for a in run_one_agent(base).applications
    ]


@pytest.mark.parametrize("seed", range(30))
def test_acyclic_generated_summaries_match_brute_force(seed):
    from negsum import brute_force_summary

    neg = generate_sound(seed, steps=2 + seed % 6, num_agents=2 + seed % 3,
                         acyclic=True)
    trace = run_acyclic(neg)
    assert trace.verdict == "summarized"
    space, interp = synthetic_interp(neg, seed)
    oracle = brute_force_summary(neg, interp, space)
    assert set(oracle) == set(trace.summary)
    for r in oracle:
        assert rels_equal(
            eval_expr(trace.summary[r], interp, space), oracle[r], space
        ), (seed, r)


@pytest.mark.parametrize("seed", range(15))
def test_cyclic_generated_summaries_match_state_elimination(seed):
    neg = generate_sound(seed, steps=3 + seed % 5, num_agents=2 + seed % 2,
                         acyclic=False)
    cls = classify(neg)
    assert cls.deterministic
    trace = run_general(neg)
    assert trace.verdict == "summarized"
    elim = summarize_by_states(neg)
    space, interp = synthetic_interp(neg, seed)
    assert set(elim.summary) == set(trace.summary)
    for r in elim.summary:
        assert rels_equal(
            eval_expr(trace.summary[r], interp, space),
            eval_expr(elim.summary[r], interp, space),
            space,
        ), (seed, r)


def random_deterministic(seed: int, n_agents: int = 2, n_inner: int = 4):
    """A random deterministic multi-agent diagram: random party sets and
    random singleton targets (ports respected), kept only when valid.
    Unlike the inverse-rule generator this produces shared cycles and a
    high share of unsound diagrams."""
    rng = random.Random(seed)
    agents = tuple(f"p{i}" for i in range(1, n_agents + 1))
    names = ["n0"] + [f"m{i}" for i in range(1, n_inner + 1)] + ["nf"]
    for _attempt in range(200):
        parties = {"n0": agents, "nf": agents}
        for name in names[1:-1]:
            size = rng.randint(1, n_agents)
            parties[name] = tuple(sorted(rng.sample(agents, size),
                                         key=agents.index))
        atoms = []
        transition = {}
        ok = True
        for name in names:
            n_results = 1 if name == "nf" else rng.randint(1, 2)
            results = tuple(f"r{j}" for j in range(1, n_results + 1))
            atoms.append(AtomSpec(name, parties[name], results))
            for r in results:
                for p in parties[name]:
                    if name == "nf":
                        transition[(name, p, r)] = set()
                        continue
                    options = [
                        m for m in names if m != name and p in parties[m]
                    ]
                    if not options:
                        ok = False
                        break
                    transition[(name, p, r)] = {rng.choice(options)}
        if not ok:
            continue
        try:
            return validate(agents, atoms, "n0", "nf", transition)
        except Exception:
            continue
    return None


@pytest.mark.parametrize("seed", range(60))
def test_random_deterministic_verdicts_match_oracle(seed):
    neg = random_deterministic(seed, n_agents=2 + seed % 2, n_inner=3 + seed % 3)
    if neg is None:
        pytest.skip("no valid sample for this seed")
    assert classify(neg).deterministic
    oracle = check_soundness(neg, cap=200_000)
    trace = run_general(neg)
    assert (trace.verdict == "summarized") == oracle.sound, seed
    if oracle.sound:
        elim = summarize_by_states(neg)
        space, interp = synthetic_interp(neg, seed)
        assert set(elim.summary) == set(trace.summary)
        for r in elim.summary:
            assert rels_equal(
                eval_expr(trace.summary[r], interp, space),
                eval_expr(elim.summary[r], interp, space),
                space,
            ), (seed, r)
