"""Bundled fixture corpus: small negotiations exercising every analysis,
each with its documented classification."""

from __future__ import annotations

from importlib import resources

from .fileio import loads
from .model import Negotiation

# name -> (deterministic, weakly_deterministic, acyclic, sound)
CLASSIFICATIONS: dict[str, tuple[bool, bool, bool, bool]] = {
    "atomic": (True, True, True, True),
    "fdm_acyclic": (False, True, True, True),
    "fdm_cyclic": (True, True, False, True),
    "fdm_unsound": (True, True, True, False),
    "ladder": (True, True, False, True),
    "merge_demo": (False, False, True, True),
    "iter_demo": (False, False, False, True),
    "useless_demo": (False, True, True, True),
    "shortcut_demo": (True, True, True, True),
    "shortcut_problem": (False, False, True, True),
    "fdm_wd_summary": (False, True, True, True),
    "cyclic_two_outcomes": (True, True, False, True),
    "pingpong": (True, True, False, True),
    "regen": (True, True, False, True),
    "dfs_example": (True, True, False, True),
    "running_multi": (True, True, False, True),
    "multifragment": (True, True, False, True),
    "lemma3_counterexample": (True, True, False, True),
}

# fixtures shipping concrete per-outcome relations
WITH_RELATIONS = ("fdm_acyclic", "fdm_cyclic", "ladder", "merge_demo", "iter_demo")


def fixture_names() -> list[str]:
    return sorted(CLASSIFICATIONS)


def fixture_text(name: str) -> str:
    if name not in CLASSIFICATIONS:
        raise KeyError(f"unknown fixture {name!r}")
    return (
        resources.files("negsum")
        .joinpath("fixtures", f"{name}.json")
        .read_text(encoding="utf-8")
    )


def load_fixture(name: str) -> Negotiation:
    return loads(fixture_text(name))
