"""
``ncsim`` command-line entry point.

Every run builds a :class:`~ncsim.runlog.RunConfig`, executes it, prints the
summary document on stdout and writes a JSON-lines log to the output
directory (``--out-dir``, else ``$NCSIM_OUTPUT_DIR``, else ``./ncsim-runs``).
Exit codes: 0 success, 1 domain error, 2 usage error.
"""
from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from . import ck, experiments, gz, ks, sbz
from .io import (
    MalformedFile,
    dumps,
    model_from_dict,
    model_to_dict,
    read_json,
    state_from_dict,
    targets_from_dict,
)
from .quantum import TOL, InvalidDecomposition, InvalidState, ProjectiveDecomposition, \
    born_probabilities
from .runlog import RunConfig, RunResult, Timer, read_log, replay, write_log

OUTPUT_ENV = "NCSIM_OUTPUT_DIR"
DEFAULT_OUTPUT = "ncsim-runs"

DOMAIN_ERRORS = (
    ck.NoMatch, ck.DisjointnessError, ks.InvalidCatalogue, MalformedFile, InvalidState,
    InvalidDecomposition, gz.NotUnitNormalizable, sbz.VacuousVerdict, sbz.DegenerateSetting,
    FileNotFoundError,
)


class UsageError(Exception):
    pass


def _load_model(cfg: RunConfig):
    if "model" in cfg.paths:
        return model_from_dict(read_json(cfg.paths["model"]), cfg.tol)
    targets = targets_from_dict(read_json(cfg.paths["targets"]), cfg.tol)
    return ck.build_submodel(targets, cfg.options["epsilon"], cfg.seed,
                             copies=cfg.options.get("copies", 1), tol=cfg.tol)


def _ks_check(cfg: RunConfig) -> RunResult:
    vset = ks.load_catalogue(cfg.paths["catalogue"], cfg.tol)
    s = ks.build_orthogonality(vset)
    records = [{"basis": list(b)} for b in s.bases]
    summary = {"name": vset.name, "dim": vset.dim, "vectors": len(vset),
               "bases": len(s.bases), "exact": vset.exact, "membership": s.membership()}
    return RunResult(records, summary)


def _ks_search(cfg: RunConfig) -> RunResult:
    vset = ks.load_catalogue(cfg.paths["catalogue"], cfg.tol)
    s = ks.build_orthogonality(vset)
    res = ks.search_colouring(s)
    exhaustive = None
    if len(vset) <= ks.EXHAUSTIVE_LIMIT:
        exhaustive = ks.count_colourings_exhaustive(s)
    colouring = res.colouring.as_list(len(vset)) if res.found else None
    summary = {"name": vset.name, "dim": vset.dim, "vectors": len(vset), "bases": len(s.bases),
               "uncolourable": res.uncolourable, "search_nodes": res.nodes,
               "exhaustive_colourings": exhaustive, "colouring": colouring}
    if exhaustive is not None and (exhaustive == 0) != res.uncolourable:
        summary["error"] = "backtracking and exhaustive enumeration disagree"
        return RunResult([], summary, 1)
    records = [{"vector": i, "colour": c} for i, c in enumerate(colouring or [])]
    return RunResult(records, summary)


def _gz_colour(cfg: RunConfig) -> RunResult:
    v = gz.reduce(cfg.options["components"])
    summary = {"input": cfg.options["components"], "primitive": list(v.components), "n": v.n,
               "odd_position": v.odd_position, "colour": gz.gz_colour(v)}
    return RunResult([], summary)


def _gz_verify(cfg: RunConfig) -> RunResult:
    m = cfg.options["max_component"]
    triads = gz.enumerate_rational_triads(m)
    records = [{"triad": [[*v.components, v.n] for v in t],
                "colours": [gz.gz_colour(v) for v in t]} for t in triads]
    report = gz.verify(m)
    return RunResult(records, report.to_dict(), 0 if report.ok else 1)


def _ck_build(cfg: RunConfig) -> RunResult:
    targets = targets_from_dict(read_json(cfg.paths["targets"]), cfg.tol)
    model = ck.build_submodel(targets, cfg.options["epsilon"], cfg.seed,
                              copies=cfg.options.get("copies", 1), tol=cfg.tol)
    copies = cfg.options.get("copies", 1)
    records = [{"index": i, "target": i // copies,
                "distance": ck.distance(model[i], targets[i // copies])}
               for i in range(len(model))]
    summary = {"decompositions": len(model), "dim": model.dim, "kind": model.kind,
               "epsilon_r": model.epsilon_r, "build_seed": model.build_seed,
               "max_distance": max(r["distance"] for r in records)}
    name = cfg.options.get("model_out", "model.json")
    return RunResult(records, summary, files={name: dumps(model_to_dict(model)) + "\n"})


def _ck_run(cfg: RunConfig) -> RunResult:
    model = _load_model(cfg)
    state = state_from_dict(read_json(cfg.paths["state"]), cfg.tol)
    targets = targets_from_dict(read_json(cfg.paths["targets"]), cfg.tol)
    shots = cfg.shots or 1
    records = []
    if cfg.options.get("sequence"):
        for s in range(shots):
            for k, rec in enumerate(ck.measure_sequence(model, state, targets, cfg.seed, shot=s)):
                records.append({"shot": s, "step": k, "target": k, **rec.to_dict()})
        summary = {"mode": "sequence", "shots": shots, "steps": len(targets)}
    else:
        matches = [ck.lookup(model, t) for t in targets]
        hidden = ck.sample_hidden_states(model, state, shots, cfg.seed)
        for s in range(shots):
            hs = ck.HiddenState(hidden[s], cfg.seed)
            for k, (t, m) in enumerate(zip(targets, matches)):
                records.append({"shot": s, "target": k, **ck.measure(model, hs, t, m).to_dict()})
        per_target = []
        for k, (t, m) in enumerate(zip(targets, matches)):
            inverse = np.argsort(m.permutation)
            counts = np.bincount(inverse[hidden[:, m.index]], minlength=len(t))
            per_target.append({
                "target": k, "matched_index": m.index, "distance": m.distance,
                "counts": [int(c) for c in counts],
                "born_matched": [float(p) for p in ck.aligned_probabilities(state, model, m)],
                "born_target": [float(p) for p in born_probabilities(state, t)],
            })
        summary = {"mode": "independent", "shots": shots, "targets": per_target}
    summary.update(epsilon_r=model.epsilon_r, build_seed=model.build_seed)
    return RunResult(records, summary)


def _ck_breakdown(cfg: RunConfig) -> RunResult:
    if "model" in cfg.paths:
        model = model_from_dict(read_json(cfg.paths["model"]), cfg.tol)
    else:
        dim = cfg.options.get("dim", 2)
        basis = ProjectiveDecomposition.from_basis(np.eye(dim))
        model = ck.build_submodel([basis], cfg.options["epsilon"], cfg.seed, tol=cfg.tol)
    w = ck.demonstrate_breakdown(model, shots=cfg.shots or 0, seed=cfg.seed)
    summary = {k: (list(map(float, v)) if isinstance(v, tuple) else v)
               for k, v in w.to_dict().items()}
    summary["epsilon_r"] = model.epsilon_r
    return RunResult([], summary)


def _sbz_run(cfg: RunConfig) -> RunResult:
    cat = ks.load_catalogue(cfg.paths["catalogue"], cfg.tol)
    o = cfg.options
    box = sbz.BlackBox(o["interior"], cat, jitter_sigma=o["jitter"], seed=cfg.seed,
                       epsilon_r=o["epsilon"], crosstalk=o.get("crosstalk", 0.0))
    triads = ks.build_orthogonality(cat).bases
    rounds = o.get("rounds") or cfg.shots or 1
    transcript = sbz.run_box(box, sbz.default_schedule(triads, rounds), triads)
    verdict = sbz.sbz_verdict(transcript, o["confidence"])
    eps = sbz.compute_epsilon(transcript)
    summary = {"catalogue": cat.name, "interior": o["interior"], "rounds": rounds,
               "epsilon": f"{eps.numerator}/{eps.denominator}", "verdict": verdict.to_dict()}
    return RunResult(list(transcript.records()), summary)


def _exp_phiplus(cfg: RunConfig) -> RunResult:
    o = cfg.options
    scenario = experiments.PhiPlusScenario(shots=cfg.shots or 100_000,
                                           jitter_sigma=o["jitter"], engine=o["engine"],
                                           seed=cfg.seed, epsilon_r=o["epsilon"],
                                           hlzpg_reduced=o.get("hlzpg_reduced", False))
    report = experiments.run_scenario(scenario)
    doc = report.to_dict()
    records = [{"context": int(c), **v} for c, v in doc["contexts"].items()]
    return RunResult(records, doc, files={"phiplus_frequencies.csv": report.frequency_csv()})


COMMANDS = {
    ("ks", "check"): _ks_check,
    ("ks", "search"): _ks_search,
    ("gz", "colour"): _gz_colour,
    ("gz", "verify"): _gz_verify,
    ("ck", "build"): _ck_build,
    ("ck", "run"): _ck_run,
    ("ck", "breakdown"): _ck_breakdown,
    ("sbz", "run"): _sbz_run,
    ("exp", "phiplus"): _exp_phiplus,
}


#: Schema (in ``schemas/ncsim.schema.json``) of each command's summary document.
SUMMARY_SCHEMAS = {
    ("ks", "check"): "ks_check_summary",
    ("ks", "search"): "ks_search_summary",
    ("gz", "colour"): "gz_colour_summary",
    ("gz", "verify"): "gz_report",
    ("ck", "build"): "ck_build_summary",
    ("ck", "run"): "ck_run_summary",
    ("ck", "breakdown"): "breakdown_witness",
    ("sbz", "run"): "sbz_run_summary",
    ("exp", "phiplus"): "phiplus_report",
}

RECORD_SCHEMAS = {
    ("ck", "run"): "measurement_record",
    ("sbz", "run"): "transcript_round",
}


def execute(cfg: RunConfig) -> RunResult:
    return COMMANDS[(cfg.command, cfg.subcommand)](cfg)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # raise instead of exiting so dispatch owns exit codes
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="root seed for all randomness")
    common.add_argument("--shots", type=int, default=None)
    common.add_argument("--tol", type=float, default=None,
                        help=f"operator-identity tolerance (default {TOL})")
    common.add_argument("--out-dir", default=None, help=f"log directory (default ${OUTPUT_ENV})")
    common.add_argument("--log", default=None, help="explicit log file path")

    p = _Parser(prog="ncsim", description="Finite-precision non-contextual model simulator")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    ks_p = sub.add_parser("ks").add_subparsers(dest="subcommand", parser_class=_Parser)
    for name in ("check", "search"):
        q = ks_p.add_parser(name, parents=[common])
        q.add_argument("catalogue")

    gz_p = sub.add_parser("gz").add_subparsers(dest="subcommand", parser_class=_Parser)
    q = gz_p.add_parser("colour", parents=[common])
    q.add_argument("components", nargs=3, help="rationals such as 3/5")
    q = gz_p.add_parser("verify", parents=[common])
    q.add_argument("--max-component", type=int, required=True)

    ck_p = sub.add_parser("ck").add_subparsers(dest="subcommand", parser_class=_Parser)
    q = ck_p.add_parser("build", parents=[common])
    q.add_argument("--targets", required=True)
    q.add_argument("--epsilon", type=float, default=1e-3)
    q.add_argument("--copies", type=int, default=1)
    q.add_argument("--model-out", default="model.json")
    q = ck_p.add_parser("run", parents=[common])
    q.add_argument("--state", required=True)
    q.add_argument("--targets", required=True)
    q.add_argument("--model", default=None)
    q.add_argument("--epsilon", type=float, default=1e-3)
    q.add_argument("--copies", type=int, default=1)
    q.add_argument("--sequence", action="store_true",
                   help="measure targets in order with collapse, per shot")
    q = ck_p.add_parser("breakdown", parents=[common])
    q.add_argument("--model", default=None)
    q.add_argument("--epsilon", type=float, default=0.5)
    q.add_argument("--dim", type=int, default=2)

    sbz_p = sub.add_parser("sbz").add_subparsers(dest="subcommand", parser_class=_Parser)
    q = sbz_p.add_parser("run", parents=[common])
    q.add_argument("--interior", choices=sbz.INTERIORS, required=True)
    q.add_argument("--catalogue", required=True)
    q.add_argument("--rounds", type=int, default=None)
    q.add_argument("--jitter", type=float, default=0.0)
    q.add_argument("--epsilon", type=float, default=1e-2)
    q.add_argument("--confidence", type=float, default=0.999)
    q.add_argument("--crosstalk", type=float, default=0.0)

    exp_p = sub.add_parser("exp").add_subparsers(dest="subcommand", parser_class=_Parser)
    q = exp_p.add_parser("phiplus", parents=[common])
    q.add_argument("--engine", choices=("oracle", "ck"), default="oracle")
    q.add_argument("--jitter", type=float, default=0.0)
    q.add_argument("--epsilon", type=float, default=1e-3)
    q.add_argument("--hlzpg-reduced", action="store_true")

    q = sub.add_parser("replay", parents=[common])
    q.add_argument("log_path")
    return p


def _abspath(p: str) -> str:
    path = Path(p)
    if not path.exists() and (ks.CATALOGUE_DIR / path).exists():
        path = ks.CATALOGUE_DIR / path
    return str(path.resolve())


def config_from_args(a: argparse.Namespace) -> RunConfig:
    paths, opts = {}, {}
    for key in ("catalogue", "targets", "state", "model"):
        if getattr(a, key, None):
            paths[key] = _abspath(getattr(a, key))
    for key in ("epsilon", "copies", "model_out", "sequence", "dim", "interior", "rounds",
                "jitter", "confidence", "crosstalk", "engine", "hlzpg_reduced",
                "max_component"):
        if getattr(a, key, None) is not None:
            opts[key] = getattr(a, key)
    if a.command == "gz" and a.subcommand == "colour":
        try:
            opts["components"] = [str(Fraction(c)) for c in a.components]
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(f"bad component: {exc}") from None
    cfg = RunConfig(a.command, a.subcommand, a.seed, a.shots,
                    TOL if a.tol is None else a.tol, paths, opts)
    return cfg.with_input_hashes()


def _out_dir(a: argparse.Namespace) -> Path:
    return Path(a.out_dir or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT)


def dispatch(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv``, run the command and return the process exit code."""
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
        if a.command is None or (a.command != "replay" and a.subcommand is None):
            raise UsageError("a command and subcommand are required; see ncsim --help")
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    try:
        if a.command == "replay":
            return _replay(a)
        cfg = config_from_args(a)
        with Timer() as t:
            result = execute(cfg)
        out = _out_dir(a)
        log = Path(a.log) if a.log else out / f"{cfg.command}-{cfg.subcommand}-seed{cfg.seed}.jsonl"
        write_log(log, cfg, result, t.seconds)
        for name, text in result.files.items():
            (out / name).parent.mkdir(parents=True, exist_ok=True)
            (out / name).write_text(text)
        print(dumps(result.summary))
        return result.exit_code
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except DOMAIN_ERRORS as exc:
        print(f"ncsim: error: {exc}", file=sys.stderr)
        return 1


def _replay(a: argparse.Namespace) -> int:
    if a.tol is not None:
        config, _ = read_log(a.log_path)
        print(f"ncsim: error: replay uses the logged tolerance {config.tol}; "
              "--tol override refused", file=sys.stderr)
        return 1
    rep = replay(a.log_path, execute)
    doc = {"identical": rep.identical, "first_divergence": rep.first_divergence,
           "reason": rep.reason}
    print(dumps(doc))
    if not rep.identical:
        msg = rep.reason or f"first divergence at line {rep.first_divergence}"
        print(f"ncsim: replay mismatch: {msg}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
