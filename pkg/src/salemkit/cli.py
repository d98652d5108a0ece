"""Command line: construct measures, verify written measures, run sharpness experiments.

Exit codes: 0 success, 1 a verdict failed, 2 invalid input, 3 degenerate derived
parameters, 4 unreadable files.
"""
import argparse
import hashlib
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import __version__
from .analysis.experiments import (conv_sharpness_geometric, conv_sharpness_nongeometric,
                                   restriction_experiment)
from .analysis.regions import reciprocal
from .analysis.report import SCHEMA_VERSION, ExperimentReport, plain
from .analysis.suites import run_suite
from .constructions import PRESETS, ConstructionParams, build
from .constructions.presets import resolve_overrides
from .errors import InvalidParameters, ParseError, SalemkitError
from .exact import as_fraction
from .measures import dump_measure, load_measure

OUT_ENV = "SALEMKIT_OUT"
DEFAULT_OUT = "salemkit-out"
METADATA = "metadata.json"
EXPERIMENTS = {
    "conv-geometric": ("geo-factorization",),
    "conv-nongeometric": ("heavy-core",),
    "restriction": ("restriction-geo", "restriction-nongeo"),
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    params_path: str | None
    out: Path
    seed: int | None
    preset: str | None
    threads: int
    verbose: bool
    inputs: tuple = ()


def _dumps(doc):
    return json.dumps(plain(doc), sort_keys=True, indent=2) + "\n"


def _write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _read_json(path, what):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {what} {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what} {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{what} {path} must hold a JSON object")
    return doc


def _params_doc(cfg):
    if cfg.params_path is None:
        raise InvalidParameters("--params is required for this command")
    return _read_json(cfg.params_path, "parameter document")


def _echo(params, extra=None):
    """Full resolved parameter set: the document, with preset constants spelled out."""
    doc = params.to_dict()
    doc.update(extra or {})
    return {"params": doc, "resolved_constants": resolve_overrides(params),
            "seed": params.seed, "salemkit_version": __version__, "schema_version": SCHEMA_VERSION}


def _measure_name(i):
    return f"measure_{i:02d}.txt"


def cmd_construct(cfg):
    params = ConstructionParams.from_dict(_params_doc(cfg), seed=cfg.seed, preset=cfg.preset)
    obj = build(params)
    files = []
    for i, mu in enumerate(obj.measures, start=1):
        text = dump_measure(mu)
        name = _measure_name(i)
        _write(cfg.out / name, text)
        files.append({"file": name, "level": mu.level, "scale": mu.scale, "atoms": len(mu),
                      "sha256": hashlib.sha256(text.encode()).hexdigest()})
    meta = _echo(params)
    meta.update(command="construct", files=files, construction=obj.metadata())
    _write(cfg.out / METADATA, _dumps(meta))
    if cfg.verbose:
        print(f"wrote {len(files)} measure files and {METADATA} to {cfg.out}")
    return 0


def _load_written(inputs):
    """Sidecar document and measures from a construct output directory."""
    if len(inputs) != 1:
        raise ParseError("verify takes one construct output directory")
    root = Path(inputs[0])
    meta = _read_json(root / METADATA, "metadata sidecar")
    try:
        params_doc = meta["params"]
        entries = meta["files"]
    except KeyError as exc:
        raise ParseError(f"metadata sidecar lacks {exc}") from exc
    measures = []
    for entry in entries:
        try:
            text = (root / entry["file"]).read_text(encoding="utf-8")
        except (OSError, KeyError, TypeError) as exc:
            raise ParseError(f"cannot read measure file listed as {entry!r}") from exc
        measures.append(load_measure(text))
    return params_doc, measures


def _write_report(out, stem, rep, echo):
    doc = rep.to_dict()
    doc.update(echo)
    _write(out / f"{stem}.json", _dumps(doc))
    for key in sorted(rep.series):
        safe = "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in key)
        _write(out / f"{stem}.series" / f"{safe}.csv", rep.series_csv(key))


def cmd_verify(cfg):
    params_doc, measures = _load_written(cfg.inputs)
    try:
        params = ConstructionParams.from_dict(params_doc)
    except SalemkitError as exc:
        raise ParseError(f"embedded parameters do not parse: {exc}") from exc
    obj = build(params)
    rep = ExperimentReport(f"verify-{params.construction}", params.to_dict(), params.seed)
    rep.tolerance("exact", 0)
    rebuilt = obj.measures
    same = len(rebuilt) == len(measures) and all(a == b for a, b in zip(rebuilt, measures))
    rep.verdict("files_match_rebuild", same, "exact",
                "written measures equal the ones rebuilt from the embedded parameters")
    rep.merge(run_suite(obj), "suite")
    _write_report(cfg.out, "verify", rep, _echo(params, {}))
    if cfg.verbose:
        for v in rep.verdicts:
            print(f"{'PASS' if v.passed else 'FAIL'} {v.name}")
    return 0 if rep.passed else 1


def _pq_grid(doc):
    grid = doc.get("pq")
    if not grid:
        raise InvalidParameters("experiment document needs a nonempty 'pq' list of [p, q] pairs")
    out = []
    for pair in grid:
        try:
            p, q = (math.inf if str(v).strip().lower() in ("inf", "infinity") else as_fraction(v)
                    for v in pair)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"bad (p, q) entry {pair!r}") from exc
        if not (1 <= p and 1 <= q):
            raise InvalidParameters(f"(p, q) = {pair!r} must satisfy p, q >= 1")
        out.append((p, q))
    return out


def _label(p, q):
    return f"p={plain(p) if p != math.inf else 'inf'},q={plain(q) if q != math.inf else 'inf'}"


def _run_point(name, obj, p, q, doc):
    if name == "restriction":
        return restriction_experiment(obj, p, q)
    a, b = reciprocal(p), reciprocal(q)
    samples = int(doc.get("samples", 16))
    if name == "conv-geometric":
        return conv_sharpness_geometric(obj, a, b, samples=samples, seed=obj.params.seed)
    return conv_sharpness_nongeometric(obj, a, b, samples=samples, seed=obj.params.seed)


def cmd_experiment(cfg):
    doc = _params_doc(cfg)
    name = doc.get("experiment")
    if name not in EXPERIMENTS:
        raise InvalidParameters(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}")
    params = ConstructionParams.from_dict(doc, seed=cfg.seed, preset=cfg.preset)
    if params.construction not in EXPERIMENTS[name]:
        raise InvalidParameters(f"experiment {name} runs on {EXPERIMENTS[name]}, not {params.construction}")
    grid = _pq_grid(doc)
    obj = build(params)
    # builders cache lazily; fill the caches before worker threads share the object
    obj.measures
    with ThreadPoolExecutor(max_workers=max(1, cfg.threads)) as pool:
        parts = list(pool.map(lambda pq: _run_point(name, obj, *pq, doc), grid))
    rep = ExperimentReport(name, params.to_dict(), params.seed)
    rep.scalar("pq_grid", [[p, q] for p, q in grid])
    for (p, q), part in zip(grid, parts):
        rep.merge(part, _label(p, q))
    extra = {"experiment": name, "pq": [[str(p) if p != math.inf else "inf",
                                          str(q) if q != math.inf else "inf"] for p, q in grid]}
    if "samples" in doc:
        extra["samples"] = int(doc["samples"])
    _write_report(cfg.out, name, rep, _echo(params, extra))
    if cfg.verbose:
        for v in rep.verdicts:
            print(f"{'PASS' if v.passed else 'FAIL'} {v.name}")
    return 0 if rep.passed else 1


COMMANDS = {"construct": cmd_construct, "verify": cmd_verify, "experiment": cmd_experiment}


def _parser():
    ap = argparse.ArgumentParser(prog="salemkit", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"salemkit {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--params", help="parameter document (JSON)")
        sp.add_argument("--out", help=f"output directory; defaults to ${OUT_ENV}, then ./{DEFAULT_OUT}")
        sp.add_argument("--seed", type=int, help="overrides the document's seed (u64)")
        sp.add_argument("--preset", choices=PRESETS, help="overrides the document's preset")
        sp.add_argument("--threads", type=int, default=1, help="worker cap for batch evaluation")
        sp.add_argument("-v", "--verbose", action="store_true")
        if name == "verify":
            sp.add_argument("inputs", nargs=1, metavar="DIR", help="directory written by construct")
    return ap


def config_from_args(argv=None, environ=None):
    environ = os.environ if environ is None else environ
    args = _parser().parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        raise InvalidParameters(f"seed {args.seed} is not an unsigned 64-bit integer")
    if args.threads < 1:
        raise InvalidParameters("--threads must be at least 1")
    out = args.out or environ.get(OUT_ENV) or DEFAULT_OUT
    return RunConfig(args.command, args.params, Path(out), args.seed, args.preset, args.threads,
                     args.verbose, tuple(getattr(args, "inputs", None) or ()))


def main(argv=None):
    try:
        cfg = config_from_args(argv)
        return COMMANDS[cfg.command](cfg)
    except SalemkitError as exc:
        print(f"salemkit: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
