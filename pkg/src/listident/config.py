"""Run configuration: parsing, validation and construction of runtime objects.

Configs are YAML mappings (JSON is accepted too, being a YAML subset).
Example::

    subcommand: rates
    collection: {kind: canonical, k_max: 1}
    k: 2
    target: 2
    horizon: 30
    trials: 10000
    seed: 7
"""
from __future__ import annotations

import shlex
import subprocess
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from typing import Any

import yaml

from .errors import ParseError
from .identify import ConstantIdentifier, Identifier, ListIdentifier
from .langs import (BlockShuffledEnumeration, CanonicalCollection, CanonicalEnumeration,
                    Cofinite, Collection, EnumerationGeometric, ExplicitCollection, Finite,
                    HalfMassPoint, ListEnumeration, truncate_canonical)

SUBCOMMANDS = ("check-angluin", "simulate-identify", "adversary", "stratify", "derandomize",
               "extract-bits", "rates", "lower-bound")

REQUIRED = {
    "check-angluin": ("collection", "k"),
    "simulate-identify": ("collection", "k", "target", "horizon"),
    "adversary": ("collection", "k", "budget"),
    "stratify": ("collection", "k"),
    "derandomize": ("collection", "k", "target", "depth", "prob_identifier"),
    "extract-bits": ("distribution", "n_bits"),
    "rates": ("collection", "k", "target", "horizon", "trials"),
    "lower-bound": ("collection", "k", "shared_x", "languages", "horizon", "trials"),
}


@dataclass
class RunConfig:
    subcommand: str
    collection: dict | None = None
    k: int | None = None
    list_size: int | None = None
    target: int | None = None
    identifier: Any = "listidentify"
    prob_identifier: dict | None = None
    distribution: dict | None = None
    enumeration: Any = "canonical"
    horizon: int | None = None
    mc_horizon: int | None = None
    budget: int | None = None
    trials: int | None = None
    depth: int | None = None
    n_bits: int | None = None
    shared_x: int | None = None
    languages: list | None = None
    cap: int | None = None
    fit: bool = False
    window: list | None = None
    seed: int = 0
    threads: int = 1
    out: str | None = None

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


FIELD_NAMES = {f.name for f in fields(RunConfig)}
INT_FIELDS = ("k", "list_size", "target", "horizon", "mc_horizon", "budget", "trials", "depth",
              "n_bits", "shared_x", "cap", "seed", "threads")
POSITIVE = ("k", "list_size", "target", "horizon", "mc_horizon", "trials", "depth", "threads")


def _key_lines(text: str) -> dict[str, int]:
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    if not isinstance(node, yaml.MappingNode):
        return {}
    return {k.value: k.start_mark.line + 1 for k, _ in node.value if hasattr(k, "value")}


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    """Validate a config text; raises ParseError listing every offending field."""
    try:
        data = yaml.safe_load(text) if text.strip() else {}
    except yaml.YAMLError as exc:
        raise ParseError([f"malformed config: {exc}"]) from exc
    if not isinstance(data, dict):
        raise ParseError(["config must be a mapping"])
    data = {str(k).replace("-", "_"): v for k, v in data.items()}
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return config_from_dict(data, _key_lines(text))


def config_from_dict(data: dict, lines: dict | None = None) -> RunConfig:
    lines = lines or {}
    errors = []

    def where(name):
        line = lines.get(name) or lines.get(name.replace("_", "-"))
        return f"line {line}: " if line else ""

    for name in data:
        if name not in FIELD_NAMES:
            errors.append(f"{where(name)}unknown field '{name}'")
    sub = data.get("subcommand")
    if sub not in SUBCOMMANDS:
        errors.append(f"{where('subcommand')}field 'subcommand' must be one of {', '.join(SUBCOMMANDS)}")
    for name in INT_FIELDS:
        v = data.get(name)
        if v is None:
            continue
        if isinstance(v, bool) or not isinstance(v, int):
            errors.append(f"{where(name)}field '{name}' must be an integer, got {v!r}")
        elif name in POSITIVE and v < 1:
            errors.append(f"{where(name)}field '{name}' must be >= 1, got {v}")
        elif v < 0:
            errors.append(f"{where(name)}field '{name}' must be >= 0, got {v}")
    if sub in REQUIRED:
        for name in REQUIRED[sub]:
            if data.get(name) is None:
                errors.append(f"field '{name}' is required for {sub}")
    if data.get("collection") is not None:
        errors.extend(where("collection") + e for e in _collection_errors(data["collection"]))
    if data.get("languages") is not None:
        langs = data["languages"]
        if not isinstance(langs, list) or not all(isinstance(i, int) and i >= 1 for i in langs):
            errors.append(f"{where('languages')}field 'languages' must be a list of indices")
    if "fit" in data and not isinstance(data["fit"], bool):
        errors.append(f"{where('fit')}field 'fit' must be true or false")
    if errors:
        raise ParseError(errors)
    return RunConfig(**{k: v for k, v in data.items() if k in FIELD_NAMES})


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=True)


# -- building runtime objects ---------------------------------------------

def _collection_errors(spec) -> list[str]:
    if isinstance(spec, str):
        spec = shorthand_collection(spec)
        if spec is None:
            return ["collection shorthand must look like C1, C2, ... or Cinf"]
    if not isinstance(spec, dict):
        return ["field 'collection' must be a mapping"]
    kind = spec.get("kind")
    if kind == "canonical":
        km = spec.get("k_max")
        if not (km in ("inf", None) or (isinstance(km, int) and km >= 1)):
            return [f"collection k_max must be a positive integer or 'inf', got {km!r}"]
    elif kind == "explicit":
        langs = spec.get("languages")
        if not isinstance(langs, list) or not langs or not all(
                isinstance(m, list) and m and all(isinstance(x, int) for x in m) for m in langs):
            return ["explicit collection needs 'languages': a list of non-empty integer lists"]
    elif kind == "truncated":
        if not isinstance(spec.get("k_max"), int) or not isinstance(spec.get("bound"), int):
            return ["truncated collection needs integer 'k_max' and 'bound'"]
    else:
        return [f"collection kind must be canonical, explicit or truncated, got {kind!r}"]
    return []


def shorthand_collection(text: str) -> dict | None:
    t = text.strip()
    if len(t) >= 2 and t[0] in "Cc":
        rest = t[1:]
        if rest in ("inf", "∞"):
            return {"kind": "canonical", "k_max": "inf"}
        if rest.isdigit() and int(rest) >= 1:
            return {"kind": "canonical", "k_max": int(rest)}
    return None


def build_collection(spec) -> Collection:
    if isinstance(spec, str):
        spec = shorthand_collection(spec)
    kind = spec["kind"]
    if kind == "canonical":
        km = spec.get("k_max")
        return CanonicalCollection(None if km in ("inf", None) else int(km))
    if kind == "explicit":
        return ExplicitCollection([Finite(frozenset(m)) for m in spec["languages"]],
                                  spec.get("universe"))
    return truncate_canonical(int(spec["k_max"]), int(spec["bound"]))[0]


def build_language(spec, coll: Collection | None = None):
    if isinstance(spec, int):
        return coll.language(spec)
    if "index" in spec:
        return coll.language(int(spec["index"]))
    if "members" in spec:
        return Finite(frozenset(spec["members"]))
    return Cofinite(frozenset(spec.get("excluded", ())))


def build_enumeration(spec, lang):
    if spec in (None, "canonical"):
        return CanonicalEnumeration(lang)
    if isinstance(spec, dict) and spec.get("kind") == "shuffled":
        return BlockShuffledEnumeration(lang, int(spec.get("seed", 0)), int(spec.get("block", 16)))
    if isinstance(spec, dict) and spec.get("kind") == "list":
        return ListEnumeration(spec["sequence"], lang)
    raise ParseError([f"unknown enumeration {spec!r}"])


def build_distribution(spec, coll: Collection | None = None, default_target: int | None = None):
    if spec is None:
        lang = coll.language(default_target)
        return EnumerationGeometric(CanonicalEnumeration(lang))
    kind = spec.get("kind", "geometric")
    lang_spec = spec.get("language", default_target)
    if lang_spec is None:
        raise ParseError(["distribution needs a 'language'"])
    lang = build_language(lang_spec, coll)
    if kind == "geometric":
        return EnumerationGeometric(build_enumeration(spec.get("enumeration"), lang))
    if kind == "half-mass":
        return HalfMassPoint(int(spec["x0"]), lang)
    raise ParseError([f"unknown distribution kind {kind!r}"])


class ExecIdentifier(Identifier):
    """External identifier speaking a line protocol.

    The process receives one element per line on stdin and answers each
    with one line of space-separated guess indices. ``reset`` restarts it.
    """

    def __init__(self, command):
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.proc = None

    def reset(self):
        self.close()
        self.proc = subprocess.Popen(self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                                     text=True, bufsize=1)

    def push(self, x):
        self.proc.stdin.write(f"{x}\n")
        self.proc.stdin.flush()
        line = self.proc.stdout.readline()
        return [int(v) for v in line.split()]

    def close(self):
        if self.proc is not None:
            self.proc.stdin.close()
            self.proc.wait(timeout=10)
            self.proc = None


def identifier_factory(spec, coll: Collection, list_size: int, cap: int | None = None):
    from .angluin import default_telltales

    if spec in (None, "listidentify"):
        tt = default_telltales(coll, cap)
        return lambda: ListIdentifier(coll, list_size, tt)
    if isinstance(spec, dict):
        kind = spec.get("kind")
        if kind == "constant":
            guesses = [int(i) for i in spec["guesses"]]
            return lambda: ConstantIdentifier(guesses)
        if kind in ("exec", "custom-exec"):
            return lambda: ExecIdentifier(spec["command"])
    raise ParseError([f"unknown identifier {spec!r}"])


def build_prob_identifier(spec: dict, coll: Collection, k: int, cap: int | None = None):
    from .derand import CoinMixture, DecoySplitter, Derandomizable

    good = identifier_factory(spec.get("good", "listidentify"), coll, k, cap)()
    kind = spec.get("kind")
    if kind == "coin-mixture":
        return CoinMixture(Fraction(str(spec["p"])), good, spec["decoys"], k)
    if kind == "splitter":
        return DecoySplitter(spec["decoys"], k)
    if kind == "derandomizable":
        return Derandomizable(good, k)
    raise ParseError([f"unknown probabilistic identifier {spec!r}"])


DEFAULT_OUT = {
    "check-angluin": "verdict.json",
    "simulate-identify": "transcript.csv",
    "adversary": "run.json",
    "stratify": "strata.json",
    "derandomize": "derandomize.json",
    "extract-bits": "bits.json",
    "rates": "curve.csv",
    "lower-bound": "lb.csv",
}
