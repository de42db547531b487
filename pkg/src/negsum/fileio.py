"""The negotiation file format (strict JSON), canonical serialization, and
DOT export.

File layout::

    {
      "agents": ["F", "D", "M"],
      "states": {"F": ["t1", "t2"], ...},          # optional
      "atoms": [
        {"id": "n0", "parties": ["F", "D", "M"], "results": [
          {"name": "st",
           "next": {"F": ["n1"], "D": ["n1"], "M": ["n2", "nf"]},
           "rel": [[["t1","t1","t1"], ["t1","t1","t1"]], ...]}   # optional
        ]},
        ...
      ],
      "initial": "n0",
      "final": "nf",
      "transformers": {"n0.st": "<expr>"}           # optional, non-default only
    }

`next` must cover exactly the atom's parties. `rel` lists entry/exit state
assignments aligned with the party order and requires `states`. Unknown
keys are rejected.
"""

from __future__ import annotations

import json
from .errors import ParseError
from .model import AtomSpec, Negotiation, Outcome, validate
from .semantics import ReachabilityGraph
from .transformers import Atomic, Rel, format_expr, parse_expr

_TOP_KEYS = {"agents", "states", "atoms", "initial", "final", "transformers"}
_ATOM_KEYS = {"id", "parties", "results"}
_RESULT_KEYS = {"name", "next", "rel"}


def _require_keys(obj: dict, allowed: set[str], where: str):
    unknown = set(obj) - allowed
    if unknown:
        raise ParseError(f"unknown keys {sorted(unknown)} in {where}")


def _str_list(value, where: str) -> list[str]:
    if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
        raise ParseError(f"{where} must be a list of strings")
    return value


def loads(text: str) -> Negotiation:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    _require_keys(doc, _TOP_KEYS, "top level")
    for key in ("agents", "atoms", "initial", "final"):
        if key not in doc:
            raise ParseError(f"missing top-level key {key!r}")

    agents = _str_list(doc["agents"], "agents")

    states = None
    if "states" in doc:
        if not isinstance(doc["states"], dict):
            raise ParseError("states must be an object")
        states = {
            a: tuple(_str_list(qs, f"states[{a!r}]")) for a, qs in doc["states"].items()
        }

    atoms: list[AtomSpec] = []
    transition: dict[tuple[str, str, str], list[str]] = {}
    rels: dict[Outcome, Rel] = {}
    if not isinstance(doc["atoms"], list):
        raise ParseError("atoms must be a list")
    for entry in doc["atoms"]:
        if not isinstance(entry, dict):
            raise ParseError("each atom must be an object")
        _require_keys(entry, _ATOM_KEYS, f"atom {entry.get('id')!r}")
        for key in _ATOM_KEYS:
            if key not in entry:
                raise ParseError(f"atom {entry.get('id')!r} missing key {key!r}")
        aid = entry["id"]
        parties = tuple(_str_list(entry["parties"], f"atom {aid!r} parties"))
        names = []
        for res in entry["results"]:
            if not isinstance(res, dict):
                raise ParseError(f"atom {aid!r}: each result must be an object")
            _require_keys(res, _RESULT_KEYS, f"result of atom {aid!r}")
            if "name" not in res or "next" not in res:
                raise ParseError(f"atom {aid!r}: result missing 'name' or 'next'")
            rname = res["name"]
            names.append(rname)
            nxt = res["next"]
            if not isinstance(nxt, dict):
                raise ParseError(f"atom {aid!r} result {rname!r}: next must be an object")
            missing = set(parties) - set(nxt)
            extra = set(nxt) - set(parties)
            if missing:
                raise ParseError(
                    f"atom {aid!r} result {rname!r}: next omits parties {sorted(missing)}"
                )
            if extra:
                raise ParseError(
                    f"atom {aid!r} result {rname!r}: next lists non-parties {sorted(extra)}"
                )
            for p in parties:
                transition[(aid, p, rname)] = _str_list(
                    nxt[p], f"next[{p!r}] of {aid!r}.{rname!r}"
                )
            if "rel" in res:
                if states is None:
                    raise ParseError(
                        f"atom {aid!r} result {rname!r}: rel given without 'states'"
                    )
                pairs = set()
                for item in res["rel"]:
                    if not (isinstance(item, list) and len(item) == 2):
                        raise ParseError(
                            f"atom {aid!r} result {rname!r}: rel entries must be pairs"
                        )
                    entry_states = _str_list(item[0], "rel entry")
                    exit_states = _str_list(item[1], "rel exit")
                    if len(entry_states) != len(parties) or len(exit_states) != len(parties):
                        raise ParseError(
                            f"atom {aid!r} result {rname!r}: rel assignment length "
                            f"does not match the party count"
                        )
                    pairs.add((tuple(entry_states), tuple(exit_states)))
                rels[(aid, rname)] = Rel(parties, frozenset(pairs))
        atoms.append(AtomSpec(aid, parties, tuple(names)))

    transformers = {}
    for key, text in (doc.get("transformers") or {}).items():
        aid, _, rname = key.partition(".")
        if not rname:
            raise ParseError(f"transformers key {key!r} is not of the form atom.result")
        transformers[(aid, rname)] = parse_expr(text)

    return validate(
        agents,
        atoms,
        doc["initial"],
        doc["final"],
        transition,
        transformers=transformers,
        rels=rels,
        states=states,
    )


def load(path) -> Negotiation:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def to_dict(neg: Negotiation) -> dict:
    """Canonical document: declaration order everywhere, sorted rel pairs."""
    doc: dict = {"agents": list(neg.agents)}
    if neg.states is not None:
        doc["states"] = {a: list(neg.states[a]) for a in neg.agents}
    doc["atoms"] = []
    for spec in neg.atoms.values():
        results = []
        for r in spec.results:
            res: dict = {
                "name": r,
                "next": {
                    p: sorted(neg.targets(spec.id, p, r), key=neg.atom_index)
                    for p in spec.parties
                },
            }
            rel = neg.rels.get((spec.id, r))
            if rel is not None:
                res["rel"] = [
                    [list(entry), list(exit_)] for entry, exit_ in sorted(rel.pairs)
                ]
            results.append(res)
        doc["atoms"].append(
            {"id": spec.id, "parties": list(spec.parties), "results": results}
        )
    doc["initial"] = neg.initial
    doc["final"] = neg.final
    custom = {
        f"{aid}.{r}": format_expr(expr)
        for (aid, r), expr in sorted(neg.transformers.items())
        if expr != Atomic((aid, r))
    }
    if custom:
        doc["transformers"] = custom
    return doc


def dumps(neg: Negotiation) -> str:
    return json.dumps(to_dict(neg), indent=2, ensure_ascii=False) + "\n"


def dump(neg: Negotiation, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(neg))


# ---------------------------------------------------------------------------
# DOT export
# ---------------------------------------------------------------------------

def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _port(agent: str) -> str:
    return "p_" + "".join(c if c.isalnum() else "_" for c in agent)


def negotiation_dot(neg: Negotiation) -> str:
    """Atoms as record boxes with one port per party; proper hyperarcs go
    through an intermediate fork point."""
    lines = ["digraph negotiation {", "  rankdir=TB;"]
    for spec in neg.atoms.values():
        ports = "|".join(f"<{_port(p)}>{p}" for p in spec.parties)
        label = f"{{{spec.id}|{{{ports}}}}}"
        lines.append(f"  {_dot_quote(spec.id)} [shape=record, label={_dot_quote(label)}];")
    for spec in neg.atoms.values():
        for r in spec.results:
            for p in spec.parties:
                targets = sorted(neg.targets(spec.id, p, r), key=neg.atom_index)
                src = f"{_dot_quote(spec.id)}:{_port(p)}"
                if len(targets) == 1:
                    dst = f"{_dot_quote(targets[0])}:{_port(p)}"
                    lines.append(f"  {src} -> {dst} [label={_dot_quote(r)}];")
                elif len(targets) > 1:
                    fork = f"fork_{spec.id}_{p}_{r}"
                    lines.append(
                        f"  {_dot_quote(fork)} [shape=point, width=0.05];"
                    )
                    lines.append(
                        f"  {src} -> {_dot_quote(fork)} "
                        f"[label={_dot_quote(r)}, arrowhead=none];"
                    )
                    for t in targets:
                        lines.append(
                            f"  {_dot_quote(fork)} -> {_dot_quote(t)}:{_port(p)};"
                        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def reachability_dot(graph: ReachabilityGraph) -> str:
    lines = ["digraph reachability {", "  rankdir=TB;"]
    for i, m in enumerate(graph.nodes):
        shape = "doublecircle" if m == graph.final else "circle"
        lines.append(
            f"  {_dot_quote(f'x{i}')} [shape={shape}, label={_dot_quote(str(m))}];"
        )
    for src, (aid, r), dst in graph.edges:
        i, j = graph.node_index[src], graph.node_index[dst]
        lines.append(
            f"  {_dot_quote(f'x{i}')} -> {_dot_quote(f'x{j}')} "
            f"[label={_dot_quote(f'{aid}.{r}')}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_dot(obj) -> str:
    if isinstance(obj, Negotiation):
        return negotiation_dot(obj)
    if isinstance(obj, ReachabilityGraph):
        return reachability_dot(obj)
    raise TypeError(f"cannot export {type(obj).__name__} to DOT")


def roundtrip_stable(neg: Negotiation) -> bool:
    """parse . serialize is the identity on canonical content."""
    return to_dict(loads(dumps(neg))) == to_dict(neg)
