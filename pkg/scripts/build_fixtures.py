#!/usr/bin/env python3
"""Build the bundled fixture corpus.

Each fixture is constructed programmatically, checked against its
documented classification and soundness with the state-space oracle, and
written to src/negsum/fixtures/<name>.json. Rerun after changing a
definition; the output is canonical, so diffs stay readable.
"""

from __future__ import annotations

import itertools
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from negsum import (  # noqa: E402
    AtomSpec,
    CLASSIFICATIONS,
    Rel,
    check_soundness,
    classify,
    dumps,
    loads,
    validate,
)

OUT = pathlib.Path(__file__).resolve().parents[1] / "src" / "negsum" / "fixtures"

TIMES = ("t1", "t2")
BITS = ("0", "1")


def ident(parties, space):
    pairs = frozenset(
        (q, q) for q in itertools.product(*(space[p] for p in parties))
    )
    return Rel(tuple(parties), pairs)


def rel_from(parties, fn, space):
    """Relation {(q, q') | q' in fn(q)} over the given parties."""
    pairs = set()
    for q in itertools.product(*(space[p] for p in parties)):
        for q2 in fn(q):
            pairs.add((q, tuple(q2)))
    return Rel(tuple(parties), frozenset(pairs))


def agree_between(q):
    """Both parties settle on a value between their two proposals."""
    a, b = q
    lo, hi = min(a, b), max(a, b)
    return [(t, t) for t in TIMES if lo <= t <= hi]


def swap(q):
    return [tuple(reversed(q))]


def build_atomic():
    agents = ("p1",)
    atoms = [AtomSpec("n0", agents, ("r1", "r2"))]
    transition = {("n0", "p1", "r1"): set(), ("n0", "p1", "r2"): set()}
    return validate(agents, atoms, "n0", "n0", transition)


def build_fdm_acyclic():
    agents = ("F", "D", "M")
    space = {a: TIMES for a in agents}
    atoms = [
        AtomSpec("n0", agents, ("st",)),
        AtomSpec("n1", ("F", "D"), ("yes", "no", "am")),
        AtomSpec("n2", ("D", "M"), ("yes", "no")),
        AtomSpec("nf", agents, ("rf",)),
    ]
    transition = {
        ("n0", "F", "st"): {"n1"},
        ("n0", "D", "st"): {"n1"},
        ("n0", "M", "st"): {"n2", "nf"},
        ("n1", "F", "yes"): {"nf"},
        ("n1", "D", "yes"): {"nf"},
        ("n1", "F", "no"): {"nf"},
        ("n1", "D", "no"): {"nf"},
        ("n1", "F", "am"): {"nf"},
        ("n1", "D", "am"): {"n2"},
        ("n2", "D", "yes"): {"nf"},
        ("n2", "M", "yes"): {"nf"},
        ("n2", "D", "no"): {"nf"},
        ("n2", "M", "no"): {"nf"},
        ("nf", "F", "rf"): set(),
        ("nf", "D", "rf"): set(),
        ("nf", "M", "rf"): set(),
    }
    rels = {
        ("n0", "st"): ident(agents, space),
        ("n1", "yes"): rel_from(("F", "D"), agree_between, space),
        ("n1", "no"): rel_from(("F", "D"), swap, space),
        ("n1", "am"): ident(("F", "D"), space),
        ("n2", "yes"): rel_from(("D", "M"), agree_between, space),
        ("n2", "no"): rel_from(("D", "M"), swap, space),
        ("nf", "rf"): ident(agents, space),
    }
    return validate(agents, atoms, "n0", "nf", transition, rels=rels, states=space)


def build_fdm_unsound():
    neg = build_fdm_acyclic()
    transition = {k: set(v) for k, v in neg.transition.items()}
    transition[("n0", "M", "st")] = {"n2"}
    return validate(
        neg.agents,
        list(neg.atoms.values()),
        neg.initial,
        neg.final,
        transition,
        rels=neg.rels,
        states=neg.states,
    )


def build_fdm_cyclic():
    agents = ("F", "D", "M")
    space = {a: TIMES for a in agents}
    atoms = [
        AtomSpec("n0", agents, ("yes", "no")),
        AtomSpec("n1", ("F", "D"), ("tm",)),
        AtomSpec("n2", agents, ("yes", "r")),
        AtomSpec("nf", agents, ("rf",)),
    ]
    transition = {
        ("n0", "F", "yes"): {"n1"},
        ("n0", "D", "yes"): {"n1"},
        ("n0", "M", "yes"): {"n2"},
        ("n0", "F", "no"): {"nf"},
        ("n0", "D", "no"): {"nf"},
        ("n0", "M", "no"): {"nf"},
        ("n1", "F", "tm"): {"n2"},
        ("n1", "D", "tm"): {"n2"},
        ("n2", "F", "yes"): {"nf"},
        ("n2", "D", "yes"): {"nf"},
        ("n2", "M", "yes"): {"nf"},
        ("n2", "F", "r"): {"n1"},
        ("n2", "D", "r"): {"n1"},
        ("n2", "M", "r"): {"n2"},
        ("nf", "F", "rf"): set(),
        ("nf", "D", "rf"): set(),
        ("nf", "M", "rf"): set(),
    }

    def adopt_m(q):
        f, d, m = q
        return [(m, m, m)]

    def fd_swap(q):
        f, d, m = q
        return [(d, f, m)]

    rels = {
        ("n0", "yes"): ident(agents, space),
        ("n0", "no"): rel_from(agents, adopt_m, space),
        ("n1", "tm"): rel_from(("F", "D"), agree_between, space),
        ("n2", "yes"): ident(agents, space),
        ("n2", "r"): rel_from(agents, fd_swap, space),
        ("nf", "rf"): ident(agents, space),
    }
    return validate(agents, atoms, "n0", "nf", transition, rels=rels, states=space)


def build_ladder():
    agents = ("p1", "p2", "p3", "p4")
    space = {a: BITS for a in agents}
    atoms = [
        AtomSpec("n0", agents, ("a",)),
        AtomSpec("n1", ("p1", "p2"), ("b", "c")),
        AtomSpec("n2", ("p3", "p4"), ("d",)),
        AtomSpec("n3", ("p2", "p3"), ("e",)),
        AtomSpec("nf", agents, ("f",)),
    ]
    transition = {
        ("n0", "p1", "a"): {"n1"},
        ("n0", "p2", "a"): {"n1"},
        ("n0", "p3", "a"): {"n2"},
        ("n0", "p4", "a"): {"n2"},
        ("n1", "p1", "b"): {"n1"},
        ("n1", "p2", "b"): {"n1"},
        ("n1", "p1", "c"): {"nf"},
        ("n1", "p2", "c"): {"n3"},
        ("n2", "p3", "d"): {"n3"},
        ("n2", "p4", "d"): {"nf"},
        ("n3", "p2", "e"): {"nf"},
        ("n3", "p3", "e"): {"nf"},
        ("nf", "p1", "f"): set(),
        ("nf", "p2", "f"): set(),
        ("nf", "p3", "f"): set(),
        ("nf", "p4", "f"): set(),
    }

    def copy_left(q):
        return [(q[0], q[0])]

    def copy_right(q):
        return [(q[1], q[1])]

    rels = {
        ("n0", "a"): ident(agents, space),
        ("n1", "b"): rel_from(("p1", "p2"), swap, space),
        ("n1", "c"): rel_from(("p1", "p2"), copy_left, space),
        ("n2", "d"): rel_from(("p3", "p4"), copy_right, space),
        ("n3", "e"): ident(("p2", "p3"), space),
        ("nf", "f"): ident(agents, space),
    }
    return validate(agents, atoms, "n0", "nf", transition, rels=rels, states=space)


def build_merge_demo():
    agents = ("A", "B", "C")
    space = {a: BITS for a in agents}
    atoms = [
        AtomSpec("n0", agents, ("a", "b")),
        AtomSpec("mid", ("A", "B"), ("r3",)),
        AtomSpec("alt1", ("C",), ("r1",)),
        AtomSpec("alt2", ("C",), ("r2",)),
        AtomSpec("nf", agents, ("rf",)),
    ]
    transition = {}
    for r in ("a", "b"):
        transition[("n0", "A", r)] = {"mid"}
        transition[("n0", "B", r)] = {"mid"}
        transition[("n0", "C", r)] = {"alt1", "alt2"}
    transition.update(
        {
            ("mid", "A", "r3"): {"nf"},
            ("mid", "B", "r3"): {"nf"},
            ("alt1", "C", "r1"): {"nf"},
            ("alt2", "C", "r2"): {"nf"},
            ("nf", "A", "rf"): set(),
            ("nf", "B", "rf"): set(),
            ("nf", "C", "rf"): set(),
        }
    )

    def flip_a(q):
        a, b, c = q
        return [("1" if a == "0" else "0", b, c)]

    rels = {
        ("n0", "a"): ident(agents, space),
        ("n0", "b"): rel_from(agents, flip_a, space),
        ("mid", "r3"): ident(("A", "B"), space),
        ("alt1", "r1"): ident(("C",), space),
        ("alt2", "r2"): ident(("C",), space),
        ("nf", "rf"): ident(agents, space),
    }
    return validate(agents, atoms, "n0", "nf", transition, rels=rels, states=space)


def build_iter_demo():
    agents = ("A", "B", "C")
    space = {a: BITS for a in agents}
    atoms = [
        AtomSpec("n0", agents, ("loop", "go")),
        AtomSpec("mid", ("A", "B"), ("r3",)),
        AtomSpec("alt1", ("C",), ("r1",)),
        AtomSpec("alt2", ("C",), ("r2",)),
        AtomSpec("nf", agents, ("rf",)),
    ]
    transition = {
        ("n0", "A", "loop"): {"n0"},
        ("n0", "B", "loop"): {"n0"},
        ("n0", "C", "loop"): {"n0"},
        ("n0", "A", "go"): {"mid"},
        ("n0", "B", "go"): {"mid"},
        ("n0", "C", "go"): {"alt1", "alt2"},
        ("mid", "A", "r3"): {"nf"},
        ("mid", "B", "r3"): {"nf"},
        ("alt1", "C", "r1"): {"nf"},
        ("alt2", "C", "r2"): {"nf"},
        ("nf", "A", "rf"): set(),
        ("nf", "B", "rf"): set(),
        ("nf", "C", "rf"): set(),
    }

    def flip_a(q):
        a, b, c = q
        return [("1" if a == "0" else "0", b, c)]

    rels = {
        ("n0", "loop"): rel_from(agents, flip_a, space),
        ("n0", "go"): ident(agents, space),
        ("mid", "r3"): ident(("A", "B"), space),
        ("alt1", "r1"): ident(("C",), space),
        ("alt2", "r2"): ident(("C",), space),
        ("nf", "rf"): ident(agents, space),
    }
    return validate(agents, atoms, "n0", "nf", transition, rels=rels, states=space)


def build_useless_demo():
    agents = ("p", "q")
    atoms = [
        AtomSpec("n0", agents, ("r", "s")),
        AtomSpec("nprime", agents, ("a",)),
        AtomSpec("ndouble", agents, ("a",)),
        AtomSpec("nf", agents, ("f",)),
    ]
    transition = {
        ("n0", "p", "r"): {"nprime", "ndouble"},
        ("n0", "q", "r"): {"nprime"},
        ("n0", "p", "s"): {"ndouble"},
        ("n0", "q", "s"): {"ndouble"},
        ("nprime", "p", "a"): {"nf"},
        ("nprime", "q", "a"): {"nf"},
        ("ndouble", "p", "a"): {"nf"},
        ("ndouble", "q", "a"): {"nf"},
        ("nf", "p", "f"): set(),
        ("nf", "q", "f"): set(),
    }
    return validate(agents, atoms, "n0", "nf", transition)


def build_shortcut_demo():
    agents = ("A", "B", "C")
    atoms = [
        AtomSpec("n0", agents, ("a", "b")),
        AtomSpec("n1", ("B", "C"), ("c",)),
        AtomSpec("n2", ("A", "B"), ("d",)),
        AtomSpec("nf", agents, ("f",)),
    ]
    transition = {
        ("n0", "A", "a"): {"n2"},
        ("n0", "B", "a"): {"n1"},
        ("n0", "C", "a"): {"n1"},
        ("n0", "A", "b"): {"n2"},
        ("n0", "B", "b"): {"n2"},
        ("n0", "C", "b"): {"nf"},
        ("n1", "B", "c"): {"n2"},
        ("n1", "C", "c"): {"nf"},
        ("n2", "A", "d"): {"nf"},
        ("n2", "B", "d"): {"nf"},
        ("nf", "A", "f"): set(),
        ("nf", "B", "f"): set(),
        ("nf", "C", "f"): set(),
    }
    return validate(agents, atoms, "n0", "nf", transition)


def build_shortcut_problem():
    agents = ("A", "B")
    atoms = [
        AtomSpec("n0", agents, ("a",)),
        AtomSpec("n1", agents, ("b",)),
        AtomSpec("n2", agents, ("c",)),
        AtomSpec("n3", agents, ("d",)),
        AtomSpec("nf", agents, ("f",)),
    ]
    transition = {
        ("n0", "A", "a"): {"n1", "n3"},
        ("n0", "B", "a"): {"n1"},
        ("n1", "A", "b"): {"n2"},
        ("n1", "B", "b"): {"n2", "n3"},
        ("n2", "A", "c"): {"n3"},
        ("n2", "B", "c"): {"n3"},
        ("n3", "A", "d"): {"nf"},
        ("n3", "B", "d"): {"nf"},
        ("nf", "A", "f"): set(),
        ("nf", "B", "f"): set(),
    }
    return validate(agents, atoms, "n0", "nf", transition)


def build_fdm_wd_summary():
    agents = ("F", "D", "M")
    atoms = [
        AtomSpec("n0", agents, ("st",)),
        AtomSpec("n1", ("D",), ("af", "am")),
        AtomSpec("n2", ("F", "D"), ("yes", "no", "am")),
        AtomSpec("n3", ("D", "M"), ("yes", "no")),
        AtomSpec("nf", agents, ("rf",)),
    ]
    transition = {
        ("n0", "F", "st"): {"n2", "nf"},
        ("n0", "D", "st"): {"n1"},
        ("n0", "M", "st"): {"n3", "nf"},
        ("n1", "D", "af"): {"n2"},
        ("n1", "D", "am"): {"n3"},
        ("n2", "F", "yes"): {"nf"},
        ("n2", "D", "yes"): {"nf"},
        ("n2", "F", "no"): {"nf"},
        ("n2", "D", "no"): {"nf"},
        ("n2", "F", "am"): {"nf"},
        ("n2", "D", "am"): {"n3"},
        ("n3", "D", "yes"): {"nf"},
        ("n3", "M", "yes"): {"nf"},
        ("n3", "D", "no"): {"nf"},
        ("n3", "M", "no"): {"nf"},
        ("nf", "F", "rf"): set(),
        ("nf", "D", "rf"): set(),
        ("nf", "M", "rf"): set(),
    }
    return validate(agents, atoms, "n0", "nf", transition)


def _one_agent(name_results_targets):
    agents = ("p",)
    atoms = []
    transition = {}
    for name, results in name_results_targets:
        atoms.append(AtomSpec(name, agents, tuple(r for r, _ in results)))
        for r, targets in results:
            transition[(name, "p", r)] = set(targets)
    return validate(agents, atoms, "n0", atoms[-1].id, transition)


def build_cyclic_two_outcomes():
    return _one_agent(
        [
            ("n0", [("r1", ["n1"]), ("r2", ["n2"])]),
            ("n1", [("a", ["n2"]), ("b", ["nf"])]),
            ("n2", [("c", ["n1"]), ("d", ["nf"])]),
            ("nf", [("f1", []), ("f2", [])]),
        ]
    )


def build_pingpong():
    return _one_agent(
        [
            ("n0", [("a", ["n1"]), ("b", ["nf"])]),
            ("n1", [("c", ["n2"])]),
            ("n2", [("d", ["n1"]), ("e", ["nf"])]),
            ("nf", [("f", [])]),
        ]
    )


def build_regen():
    agents = ("p1", "p2")
    atoms = [
        AtomSpec("n0", agents, ("a", "b")),
        AtomSpec("n1", ("p1",), ("d",)),
        AtomSpec("n2", ("p2",), ("e",)),
        AtomSpec("n3", agents, ("c", "f")),
        AtomSpec("nf", agents, ("rf",)),
    ]
    transition = {
        ("n0", "p1", "a"): {"n1"},
        ("n0", "p2", "a"): {"n2"},
        ("n0", "p1", "b"): {"n3"},
        ("n0", "p2", "b"): {"n3"},
        ("n1", "p1", "d"): {"n3"},
        ("n2", "p2", "e"): {"n3"},
        ("n3", "p1", "c"): {"n1"},
        ("n3", "p2", "c"): {"n2"},
        ("n3", "p1", "f"): {"nf"},
        ("n3", "p2", "f"): {"nf"},
        ("nf", "p1", "rf"): set(),
        ("nf", "p2", "rf"): set(),
    }
    return validate(agents, atoms, "n0", "nf", transition)


def build_dfs_example():
    # declaration order carries the atom order the strategy uses: the two
    # successors of n1 are ordered n3 before n2
    return _one_agent(
        [
            ("n0", [("a", ["n1"])]),
            ("n1", [("b", ["n2"]), ("c", ["n3"])]),
            ("n3", [("e", ["nf"])]),
            ("n2", [("d", ["n4"])]),
            ("n4", [("f", ["n1"]), ("g", ["nf"])]),
            ("nf", [("h", [])]),
        ]
    )


def build_running_multi():
    agents = ("A", "B", "C")
    atoms = [
        AtomSpec("n0", agents, ("a",)),
        AtomSpec("n1", ("A", "B"), ("a", "b")),
        AtomSpec("n2", ("A",), ("a",)),
        AtomSpec("n3", ("A", "B"), ("a",)),
        AtomSpec("n4", ("A", "B"), ("a", "b", "c")),
        AtomSpec("n5", ("B",), ("a",)),
        AtomSpec("n6", ("C",), ("a", "b")),
        AtomSpec("n7", ("C",), ("a", "b")),
        AtomSpec("n8", ("B", "C"), ("a",)),
        AtomSpec("nf", agents, ("a",)),
    ]
    transition = {
        ("n0", "A", "a"): {"n1"},
        ("n0", "B", "a"): {"n1"},
        ("n0", "C", "a"): {"n6"},
        ("n1", "A", "a"): {"n2"},
        ("n1", "B", "a"): {"n4"},
        ("n1", "A", "b"): {"n3"},
        ("n1", "B", "b"): {"n3"},
        ("n2", "A", "a"): {"n4"},
        ("n3", "A", "a"): {"n4"},
        ("n3", "B", "a"): {"n4"},
        ("n4", "A", "a"): {"nf"},
        ("n4", "B", "a"): {"n8"},
        ("n4", "A", "b"): {"n1"},
        ("n4", "B", "b"): {"n5"},
        ("n4", "A", "c"): {"n3"},
        ("n4", "B", "c"): {"n3"},
        ("n5", "B", "a"): {"n1"},
        ("n6", "C", "a"): {"n7"},
        ("n6", "C", "b"): {"n8"},
        ("n7", "C", "a"): {"n8"},
        ("n7", "C", "b"): {"n6"},
        ("n8", "B", "a"): {"nf"},
        ("n8", "C", "a"): {"nf"},
        ("nf", "A", "a"): set(),
        ("nf", "B", "a"): set(),
        ("nf", "C", "a"): set(),
    }
    return validate(agents, atoms, "n0", "nf", transition)


def build_multifragment():
    agents = ("A", "B")
    atoms = [
        AtomSpec("n0", agents, ("r1", "r2")),
        AtomSpec("n1", ("A",), ("a",)),
        AtomSpec("n2", ("A",), ("a",)),
        AtomSpec("n3", ("A",), ("a", "b")),
        AtomSpec("n4", ("A",), ("a",)),
        AtomSpec("n5", ("B",), ("a",)),
        AtomSpec("n6", ("B",), ("a", "b")),
        AtomSpec("nf", agents, ("f",)),
    ]
    transition = {
        ("n0", "A", "r1"): {"n1"},
        ("n0", "B", "r1"): {"n5"},
        ("n0", "A", "r2"): {"n2"},
        ("n0", "B", "r2"): {"n5"},
        ("n1", "A", "a"): {"n3"},
        ("n2", "A", "a"): {"n4"},
        ("n3", "A", "a"): {"n4"},
        ("n3", "A", "b"): {"nf"},
        ("n4", "A", "a"): {"n3"},
        ("n5", "B", "a"): {"n6"},
        ("n6", "B", "a"): {"n5"},
        ("n6", "B", "b"): {"nf"},
        ("nf", "A", "f"): set(),
        ("nf", "B", "f"): set(),
    }
    return validate(agents, atoms, "n0", "nf", transition)


def build_lemma3_counterexample():
    return _one_agent(
        [
            ("n0", [("a", ["n1"])]),
            ("n1", [("b", ["nf"]), ("c", ["n2"]), ("d", ["n3"])]),
            ("n2", [("e", ["n1"]), ("f", ["n3"])]),
            ("n3", [("g", ["n2"]), ("h", ["n1"])]),
            ("nf", [("i", [])]),
        ]
    )


BUILDERS = {
    "atomic": build_atomic,
    "fdm_acyclic": build_fdm_acyclic,
    "fdm_cyclic": build_fdm_cyclic,
    "fdm_unsound": build_fdm_unsound,
    "ladder": build_ladder,
    "merge_demo": build_merge_demo,
    "iter_demo": build_iter_demo,
    "useless_demo": build_useless_demo,
    "shortcut_demo": build_shortcut_demo,
    "shortcut_problem": build_shortcut_problem,
    "fdm_wd_summary": build_fdm_wd_summary,
    "cyclic_two_outcomes": build_cyclic_two_outcomes,
    "pingpong": build_pingpong,
    "regen": build_regen,
    "dfs_example": build_dfs_example,
    "running_multi": build_running_multi,
    "multifragment": build_multifragment,
    "lemma3_counterexample": build_lemma3_counterexample,
}


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    assert set(BUILDERS) == set(CLASSIFICATIONS), "manifest out of sync"
    for name, builder in sorted(BUILDERS.items()):
        neg = builder()
        det, wd, acyclic, sound = CLASSIFICATIONS[name]
        cls = classify(neg)
        assert cls.deterministic == det, f"{name}: deterministic {cls.deterministic}"
        assert cls.weakly_deterministic == wd, f"{name}: wd {cls.weakly_deterministic}"
        assert cls.acyclic == acyclic, f"{name}: acyclic {cls.acyclic}"
        verdict = check_soundness(neg)
        assert verdict.sound == sound, f"{name}: sound {verdict.sound}"
        text = dumps(neg)
        loads(text)  # round-trip check
        (OUT / f"{name}.json").write_text(text, encoding="utf-8")
        print(f"wrote {name}.json ({len(neg.atoms)} atoms, sound={verdict.sound})")


if __name__ == "__main__":
    main()
