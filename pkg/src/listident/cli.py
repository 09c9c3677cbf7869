"""Command-line entry point.

Every subcommand accepts its options as flags, as a ``--config`` file, or
both (flags win). Outputs land in ``--out-dir`` (default: the
``LISTIDENT_OUT_DIR`` environment variable, else the working directory),
each run with a ``<output>.manifest.json`` next to it.

Exit status: 0 on success, 1 on a runtime invariant violation, 2 on a
configuration error or an unmet precondition.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import yaml

from . import __version__
from .adversary import adv_enum, limit_language
from .angluin import check_k_angluin
from .config import (DEFAULT_OUT, RunConfig, build_collection, build_distribution,
                     build_enumeration, build_prob_identifier, identifier_factory,
                     parse_config, shorthand_collection)
from .derand import build_tree, derandomize_detailed, level_fraction_identifying, sample_bits
from .errors import InsufficientPositivePoints, InvariantViolation, ListIdentError, ParseError
from .identify import converged_at, pad, run_identifier
from .langs import CanonicalEnumeration, make_rng
from .rates import (RateExperiment, fit_exponential, lower_bound_experiment, positive_window,
                    run_rate_experiment)
from .stratify import stratify, verify_stratum_identifiable

ENV_OUT_DIR = "LISTIDENT_OUT_DIR"


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- subcommand handlers: cfg -> ({file suffix: text}, summary) -----------

def _check_angluin(cfg: RunConfig):
    coll = build_collection(cfg.collection)
    v = check_k_angluin(coll, cfg.k, cfg.cap)
    out = {"k": cfg.k, "holds": v.holds, "failing_index": v.failing_index, "exact": v.exact}
    return {"": _dumps(out)}, out


def _simulate_identify(cfg: RunConfig):
    coll = build_collection(cfg.collection)
    enum = build_enumeration(cfg.enumeration, coll.language(cfg.target))
    tr = run_identifier(coll, cfg.k, enum, cfg.horizon,
                        identifier_factory(cfg.identifier, coll, cfg.k, cfg.cap)())
    lines = ["t,x_t," + ",".join(f"guess_{i}" for i in range(1, cfg.k + 1)) + ",contains_target"]
    for t, x, guesses in tr.rows:
        hit = coll.identifies(cfg.target, guesses)
        lines.append(",".join(map(str, [t, x, *pad(guesses, cfg.k), int(hit)])))
    return {"": "\n".join(lines) + "\n"}, {"converged_at": converged_at(tr, coll, cfg.target)}


def _adversary(cfg: RunConfig):
    coll = build_collection(cfg.collection)
    size = cfg.list_size or cfg.k
    ident = identifier_factory(cfg.identifier, coll, size, cfg.cap)()
    try:
        run = adv_enum(coll, cfg.k, ident, cfg.budget)
    finally:
        if hasattr(ident, "close"):
            ident.close()
    out = run.to_dict()
    if run.chains:
        lim = limit_language(run)
        out["limit"] = {"level": lim.level, "index": lim.index,
                        "window_start": lim.window_start, "settled_at": lim.settled_at}
    else:
        out["limit"] = None
    summary = {"witness_count": run.witness_count, "status": run.status, "limit": out["limit"]}
    return {"": _dumps(out)}, summary


def _stratify(cfg: RunConfig):
    coll = build_collection(cfg.collection)
    st = stratify(coll, cfg.k, cap=cfg.cap)
    out = st.to_dict()
    out["identifiable"] = [verify_stratum_identifiable(coll, s) for s in st.strata]
    return {"": _dumps(out)}, {"empty_levels": st.empty_levels,
                               "identifiable": out["identifiable"]}


def _derandomize(cfg: RunConfig):
    coll = build_collection(cfg.collection)
    A = build_prob_identifier(cfg.prob_identifier, coll, cfg.k, cfg.cap)
    prefix = CanonicalEnumeration(coll.language(cfg.target)).prefix(cfg.depth - 1)
    tree = build_tree(A, prefix, cfg.depth)
    z = coll.first_index(cfg.target)
    rows = []
    for t in range(1, cfg.depth):
        res = derandomize_detailed(A, coll, cfg.k, prefix, t)
        frac = level_fraction_identifying(tree, coll, cfg.target, t + 1)
        rows.append({"t": t, "guesses": res.guesses, "contains_target": z in res.guesses,
                     "level_fraction": str(frac),
                     "counts": {str(i): c for i, c in sorted(res.counts.items())}})
    out = {"target": cfg.target, "first_index": z, "k": cfg.k, "rows": rows}
    return {"": _dumps(out)}, {"contains_target": [r["contains_target"] for r in rows]}


def _extract_bits(cfg: RunConfig):
    coll = build_collection(cfg.collection) if cfg.collection is not None else None
    dist = build_distribution(cfg.distribution, coll, cfg.target)
    res = sample_bits(dist, make_rng(cfg.seed), cfg.n_bits)
    bits = res.bits[: cfg.n_bits]
    out = {"n_bits": len(bits), "bits": "".join(map(str, bits)), "consumed": res.consumed,
           "anchor": list(res.anchor), "mean": sum(bits) / max(1, len(bits))}
    return {"": _dumps(out)}, {"n_bits": len(bits), "mean": out["mean"]}


def _rates(cfg: RunConfig):
    coll = build_collection(cfg.collection)
    dist = build_distribution(cfg.distribution, coll, cfg.target)
    exp = RateExperiment(coll, cfg.k, cfg.target, dist,
                         identifier_factory(cfg.identifier, coll, cfg.k, cfg.cap),
                         cfg.horizon, cfg.trials, cfg.seed, cfg.threads)
    curve = run_rate_experiment(exp)
    files = {"": curve.to_csv()}
    summary = {"e_hat_final": float(curve.e_hat[-1])}
    if cfg.fit:
        window = tuple(cfg.window) if cfg.window else positive_window(curve)
        try:
            if window is None:
                raise InsufficientPositivePoints("no positive failure frequencies")
            f = fit_exponential(curve, window)
            fit = {"slope": f.slope, "intercept": f.intercept, "r_squared": f.r_squared,
                   "points": f.points, "clamped": list(f.clamped), "window": list(window)}
        except InsufficientPositivePoints as exc:
            fit = {"error": str(exc), "window": list(window) if window else None}
        files[".fit.json"] = _dumps(fit)
        summary["fit"] = fit
    return files, summary


def _lower_bound(cfg: RunConfig):
    coll = build_collection(cfg.collection)
    report = lower_bound_experiment(
        coll, cfg.k, cfg.shared_x, cfg.languages,
        identifier_factory(cfg.identifier, coll, cfg.k, cfg.cap), cfg.horizon, cfg.trials,
        mc_horizon=cfg.mc_horizon, seed=cfg.seed, threads=cfg.threads)
    mc = cfg.mc_horizon or cfg.horizon
    checks = report.floor_checks(mc)
    summary = {"pigeonhole_max": max(report.pigeonhole), "k": cfg.k,
               "floor_ok": all(c[3] for c in checks)}
    return {"": report.to_csv()}, summary


HANDLERS = {
    "check-angluin": _check_angluin,
    "simulate-identify": _simulate_identify,
    "adversary": _adversary,
    "stratify": _stratify,
    "derandomize": _derandomize,
    "extract-bits": _extract_bits,
    "rates": _rates,
    "lower-bound": _lower_bound,
}


def _out_path(cfg: RunConfig, out_dir: Path) -> Path:
    name = cfg.out or DEFAULT_OUT[cfg.subcommand]
    p = Path(name)
    return p if p.is_absolute() else out_dir / p


def dispatch(cfg: RunConfig, out_dir: str | os.PathLike | None = None, stdout=None) -> int:
    """Run one subcommand, write its outputs and manifest, return the exit status."""
    stdout = stdout or sys.stdout
    out_dir = Path(out_dir or os.environ.get(ENV_OUT_DIR) or ".")
    start = time.perf_counter()
    try:
        files, summary = HANDLERS[cfg.subcommand](cfg)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 1
    except ParseError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return 2
    except ListIdentError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    base = _out_path(cfg, out_dir)
    base.parent.mkdir(parents=True, exist_ok=True)
    digests = {}
    for suffix, text in files.items():
        path = base.with_name(base.name + suffix) if suffix else base
        data = text.encode()
        path.write_bytes(data)
        digests[path.name] = hashlib.sha256(data).hexdigest()
    manifest = {"tool": "listident", "version": __version__, "config": cfg.to_dict(),
                "wall_time_s": round(time.perf_counter() - start, 6), "outputs": digests}
    base.with_name(base.name + ".manifest.json").write_text(_dumps(manifest))
    stdout.write(_dumps(summary))
    return 0


# -- argument parsing -----------------------------------------------------

def _spec(value: str):
    """A collection or distribution given as a file path, shorthand, or inline YAML."""
    if os.path.exists(value):
        with open(value) as fh:
            return yaml.safe_load(fh)
    short = shorthand_collection(value)
    if short is not None:
        return short
    return yaml.safe_load(value)


def _int_list(value: str) -> list[int]:
    return [int(v) for v in value.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    glob = argparse.ArgumentParser(add_help=False)
    glob.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    glob.add_argument("--threads", type=int, default=argparse.SUPPRESS)
    glob.add_argument("--out-dir", default=argparse.SUPPRESS)
    glob.add_argument("--config", default=argparse.SUPPRESS, help="YAML run config")
    glob.add_argument("--out", default=argparse.SUPPRESS, help="output file name")
    glob.add_argument("--cap", type=int, default=argparse.SUPPRESS,
                      help="tell-tale size cap for brute force")

    parser = argparse.ArgumentParser(prog="listident", parents=[glob],
                                     description="k-list identification in the limit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, help_):
        p = sub.add_parser(name, parents=[glob], help=help_)
        return p

    def coll_k(p):
        p.add_argument("--collection", type=_spec, default=argparse.SUPPRESS,
                       help="file, inline YAML, or shorthand C1, C2, ..., Cinf")
        p.add_argument("--k", type=int, default=argparse.SUPPRESS)

    p = add("check-angluin", "decide the k-Angluin condition")
    coll_k(p)
    p = add("simulate-identify", "run the list identifier on an enumeration")
    coll_k(p)
    p.add_argument("--target", type=int, default=argparse.SUPPRESS)
    p.add_argument("--horizon", type=int, default=argparse.SUPPRESS)
    p.add_argument("--shuffle-seed", type=int, default=argparse.SUPPRESS,
                   help="block-shuffle the target's enumeration with this seed")
    p = add("adversary", "adversarial enumeration against an identifier")
    coll_k(p)
    p.add_argument("--identifier", choices=("listidentify", "constant", "custom-exec"),
                   default=argparse.SUPPRESS)
    p.add_argument("--guesses", type=_int_list, default=argparse.SUPPRESS,
                   help="guess list for the constant identifier")
    p.add_argument("--command", default=argparse.SUPPRESS, help="process for custom-exec")
    p.add_argument("--list-size", type=int, default=argparse.SUPPRESS)
    p.add_argument("--budget", type=int, default=argparse.SUPPRESS)
    p = add("stratify", "peel into single-guess strata")
    coll_k(p)
    p = add("derandomize", "top-k vote over a probabilistic identifier's tree")
    coll_k(p)
    p.add_argument("--prob-identifier", type=_spec, default=argparse.SUPPRESS)
    p.add_argument("--depth", type=int, default=argparse.SUPPRESS)
    p.add_argument("--target", type=int, default=argparse.SUPPRESS)
    p = add("extract-bits", "unbiased bits from i.i.d. samples")
    p.add_argument("--dist", type=_spec, default=argparse.SUPPRESS)
    p.add_argument("--n", type=int, default=argparse.SUPPRESS)
    p = add("rates", "Monte Carlo error curve")
    coll_k(p)
    p.add_argument("--target", type=int, default=argparse.SUPPRESS)
    p.add_argument("--horizon", type=int, default=argparse.SUPPRESS)
    p.add_argument("--trials", type=int, default=argparse.SUPPRESS)
    p.add_argument("--fit", action="store_true", default=argparse.SUPPRESS)
    p = add("lower-bound", "pigeonhole and half-mass lower-bound experiment")
    coll_k(p)
    p.add_argument("--shared-x", type=int, default=argparse.SUPPRESS)
    p.add_argument("--languages", type=_int_list, default=argparse.SUPPRESS)
    p.add_argument("--horizon", type=int, default=argparse.SUPPRESS)
    p.add_argument("--mc-horizon", type=int, default=argparse.SUPPRESS)
    p.add_argument("--trials", type=int, default=argparse.SUPPRESS)
    return parser


def config_from_args(ns: argparse.Namespace) -> tuple[RunConfig, str | None]:
    args = vars(ns).copy()
    sub = args.pop("subcommand")
    out_dir = args.pop("out_dir", None)
    text = ""
    if "config" in args:
        text = Path(args.pop("config")).read_text()
        declared = (yaml.safe_load(text) or {}).get("subcommand")
        if declared not in (None, sub):
            raise ParseError([f"config subcommand '{declared}' does not match '{sub}'"])
    if "dist" in args:
        args["distribution"] = args.pop("dist")
    if "n" in args:
        args["n_bits"] = args.pop("n")
    if "shuffle_seed" in args:
        args["enumeration"] = {"kind": "shuffled", "seed": args.pop("shuffle_seed")}
    ident = args.pop("identifier", None)
    guesses = args.pop("guesses", None)
    command = args.pop("command", None)
    if ident == "constant":
        args["identifier"] = {"kind": "constant", "guesses": guesses or [1]}
    elif ident == "custom-exec":
        args["identifier"] = {"kind": "exec", "command": command}
    elif ident is not None:
        args["identifier"] = ident
    args["subcommand"] = sub
    return parse_config(text, args), out_dir


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg, out_dir = config_from_args(ns)
    except ParseError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return 2
    except (OSError, yaml.YAMLError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return dispatch(cfg, out_dir)


if __name__ == "__main__":
    sys.exit(main())
