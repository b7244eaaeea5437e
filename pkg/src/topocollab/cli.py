"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 invalid input data, 3 internal error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import logging
import re
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, read_config_file
from .corpus import CorpusError, dump_corpus, extract_ambiguous_cases, load_corpus
from .evaluate import (
    RNG_ALGORITHM,
    DegenerateCaseError,
    lambda_sweep,
    prepare_case,
    splitting_error,
)
from .graph import build_network, components, write_edge_list
from .lambda_model import LambdaObservation, fit_lambda_model
from .measures import ALL_FIELDS, topo_vector, write_feature_csv
from .relevance import collaborative_crisp_accuracy, enumerate_subsets, rank_features, relevance_scores, select_hard_cases
from .synth import MODES, SynthSpec, generate_corpus, generate_suite

log = logging.getLogger("topocollab")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", text).strip("_") or "case"


def _run_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("run configuration")
    g.add_argument("--config", help="key=value configuration file (overridden by flags)")
    g.add_argument("--input", "-i", help="corpus file")
    g.add_argument("--format", choices=["jsonl", "csv"])
    g.add_argument("--alias", help="disputed alias, or 'all' for every ambiguous alias")
    g.add_argument("--features", help="'default', 'extended' or comma-separated measurement names")
    g.add_argument("--kappa", type=int)
    g.add_argument("--m", type=float)
    g.add_argument("--grid-step", type=float)
    g.add_argument("--folds", type=int)
    g.add_argument("--threshold", type=float, help="hard-case accuracy threshold for relevance")
    g.add_argument("--ridge", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--out", "-o", help="output directory")
    g.add_argument("--weighted", action="store_true", default=None, help="use 1/w edge costs for paths")
    g.add_argument("--keep-intermediates", action="store_true", default=None)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="topocollab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    run = _run_options()

    sub.add_parser("evaluate", parents=[run], help="lambda sweep and summary for every ambiguous case")
    sp = sub.add_parser("sweep", parents=[run], help="lambda sweep CSV for one alias")
    sp.add_argument("--output", help="CSV path (default: stdout)")
    sub.add_parser("relevance", parents=[run], help="rank topological features over hard cases")
    fp = sub.add_parser("fit-lambda", parents=[run], help="fit lambda* against collaborative accuracy")
    fp.add_argument("--summary", required=True, help="summary.json written by 'evaluate'")
    fp.add_argument("--epochs", type=int, default=1000)
    fp.add_argument("--output", help="fit JSON path (default: stdout)")

    syn = sub.add_parser("synth", help="generate a synthetic corpus with planted homonyms")
    syn.add_argument("--mode", choices=MODES + ("all",), default="disjoint-collaborators",
                     help="'all' stacks one case per mode")
    syn.add_argument("--replicates", type=int, default=1,
                     help="cases per mode, seeded seed, seed+1, ...")
    syn.add_argument("--entities", type=int, default=2)
    syn.add_argument("--papers-per-entity", type=int, default=10)
    syn.add_argument("--name", default="J. Doe", help="the shared alias")
    syn.add_argument("--seed", type=int, default=0)
    syn.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    syn.add_argument("--output", help="corpus path (default: stdout)")

    for name, helptext in (("dump-network", "edge list of the network for one alias"),
                           ("dump-features", "measurement CSV of the personas of one alias")):
        dp = sub.add_parser(name, parents=[run], help=helptext)
        dp.add_argument("--output", help="path (default: stdout)")
    return parser


def _config(args) -> RunConfig:
    keys = [f for f in RunConfig.__dataclass_fields__]
    cli = {k: getattr(args, k, None) for k in keys}
    file_layer = read_config_file(args.config) if getattr(args, "config", None) else {}
    return RunConfig.from_layers(file_layer, cli)


@contextlib.contextmanager
def _sink(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _load(cfg: RunConfig):
    if not cfg.input:
        raise UsageError("--input is required")
    with open(cfg.input, "rb") as fh:
        return load_corpus(fh, cfg.format)


def _cases(corpus, cfg: RunConfig):
    if not corpus:
        raise CorpusError("empty corpus")
    cases = extract_ambiguous_cases(corpus)
    if cfg.alias != "all":
        cases = [c for c in cases if c.alias == cfg.alias]
        if not cases:
            raise CorpusError(f"alias {cfg.alias!r} is not ambiguous in the corpus")
    if not cases:
        raise CorpusError("no ambiguous aliases in the corpus")
    return cases


def _write_sweep_csv(sweep, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["lambda", "gamma_h"])
    for lam, g in zip(sweep.lambda_grid, sweep.gamma_per_lambda):
        writer.writerow([repr(float(lam)), repr(float(g))])


def _json(obj, stream) -> None:
    json.dump(obj, stream, indent=2, sort_keys=True)
    stream.write("\n")


def cmd_evaluate(cfg: RunConfig) -> int:
    corpus = _load(cfg)
    cases = _cases(corpus, cfg)
    ecfg = cfg.eval_config()
    out = Path(cfg.out)
    (out / "sweeps").mkdir(parents=True, exist_ok=True)
    summaries = []
    for i, case in enumerate(cases):
        net, fm = prepare_case(corpus, case, ecfg)
        entry = {
            "alias": case.alias,
            "c": case.class_count,
            "n_personas": case.n_personas,
            "isolated_personas": int(sum(fm.isolated)),
        }
        if cfg.keep_intermediates:
            _write_intermediates(out, i, case, net, fm)
        try:
            sweep = lambda_sweep(case, net, ecfg, cfg.grid_step, cfg.seed, features=fm)
        except DegenerateCaseError as exc:
            log.warning("case %r skipped: %s", case.alias, exc)
            entry.update(degenerate=True, reason=str(exc))
            summaries.append(entry)
            continue
        sweep_name = f"sweeps/{i:03d}_{_slug(case.alias)}.csv"
        with open(out / sweep_name, "w", encoding="utf-8", newline="") as fh:
            _write_sweep_csv(sweep, fh)
        entry.update(
            degenerate=False,
            n_folds=sweep.n_folds,
            gamma_c=sweep.gamma_c,
            gamma_t=sweep.gamma_t,
            gamma_h_max=sweep.gamma_h_max,
            lambda_star=sweep.lambda_star,
            tied_interval=list(sweep.tied_interval),
            tied_set=list(sweep.tied_set),
            epsilon_s=splitting_error(sweep.confusion, case.class_count),
            confusion=sweep.confusion.z.tolist(),
            sweep_csv=sweep_name,
        )
        summaries.append(entry)
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        _json({"config": cfg.as_dict(), "rng": RNG_ALGORITHM, "cases": summaries}, fh)
    return EXIT_OK


def _write_intermediates(out: Path, i: int, case, net, fm) -> None:
    stem = f"{i:03d}_{_slug(case.alias)}"
    with open(out / f"network_{stem}.tsv", "w", encoding="utf-8") as fh:
        write_edge_list(net, fh)
    comp = components(net)
    with open(out / f"features_{stem}.csv", "w", encoding="utf-8", newline="") as fh:
        write_feature_csv(((net.labels[v], topo_vector(net, v, comp)) for v in fm.rows), fh)


def cmd_sweep(cfg: RunConfig, output: str | None) -> int:
    corpus = _load(cfg)
    cases = _cases(corpus, cfg)
    if len(cases) != 1:
        raise UsageError("sweep needs a single --alias")
    case = cases[0]
    ecfg = cfg.eval_config()
    net, fm = prepare_case(corpus, case, ecfg)
    sweep = lambda_sweep(case, net, ecfg, cfg.grid_step, cfg.seed, features=fm)
    with _sink(output) as fh:
        _write_sweep_csv(sweep, fh)
    return EXIT_OK


def cmd_relevance(cfg: RunConfig) -> int:
    corpus = _load(cfg)
    cases = _cases(corpus, cfg)
    ecfg = cfg.eval_config()
    prepared = {}
    collab_acc = {}
    for case in cases:
        _, fm = prepare_case(corpus, case, ecfg)
        counts = np.bincount(fm.y, minlength=len(fm.classes))
        if counts.min() < 2:
            log.warning("case %r skipped: an entity has a single persona", case.alias)
            continue
        prepared[case.alias] = fm
        collab_acc[case.alias] = collaborative_crisp_accuracy(fm, cfg.kappa, cfg.folds, cfg.seed)
    hard = select_hard_cases(collab_acc, cfg.threshold)
    fields = ecfg.topo_fields
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if not hard:
        log.warning("no case has collaborative accuracy below %s", cfg.threshold)
    per_case = {}
    for alias in hard:
        ranking = enumerate_subsets(prepared[alias], fields, cfg.kappa, cfg.folds, cfg.seed)
        log.info("case %r: %d subset classifiers", alias, len(ranking.masks))
        per_case[alias] = relevance_scores(ranking.incidence)
    with open(out / "relevance.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["feature", *(f"r[{a}]" for a in per_case), "geometric_mean", "rank"])
        if per_case:
            table = rank_features(per_case, fields)
            rank_of = {f: k + 1 for k, f in enumerate(table.rank)}
            for f in table.rank:
                j = fields.index(f)
                writer.writerow([f, *(repr(float(per_case[a][j])) for a in per_case),
                                 repr(float(table.aggregate[j])), rank_of[f]])
    return EXIT_OK


def cmd_fit_lambda(cfg: RunConfig, summary: str, epochs: int, output: str | None) -> int:
    with open(summary, encoding="utf-8") as fh:
        data = json.load(fh)
    try:
        obs = [
            LambdaObservation(c["gamma_c"], tuple(c["tied_set"]), c["lambda_star"])
            for c in data["cases"]
            if not c.get("degenerate")
        ]
    except (KeyError, TypeError) as exc:
        raise CorpusError(f"malformed summary file: {exc}") from None
    fit = fit_lambda_model(obs, seed=cfg.seed, epochs=epochs)
    with _sink(output) as fh:
        _json(fit.to_dict(), fh)
    return EXIT_OK


def cmd_synth(args) -> int:
    fields = dict(n_entities=args.entities, papers_per_entity=args.papers_per_entity, alias=args.name)
    if args.replicates < 1:
        raise UsageError("--replicates must be >= 1")
    if args.mode == "all" or args.replicates > 1:
        modes = MODES if args.mode == "all" else (args.mode,)
        seeds = tuple(range(args.seed, args.seed + args.replicates))
        records = generate_suite(modes, seeds, **fields)
    else:
        records = generate_corpus(SynthSpec(mode=args.mode, **fields), args.seed)
    with _sink(args.output) as fh:
        dump_corpus(records, fh, args.format)
    return EXIT_OK


def _single_alias(cfg: RunConfig) -> str:
    if cfg.alias == "all":
        raise UsageError("--alias is required")
    return cfg.alias


def cmd_dump_network(cfg: RunConfig, output: str | None) -> int:
    net = build_network(_load(cfg), _single_alias(cfg))
    with _sink(output) as fh:
        write_edge_list(net, fh)
    return EXIT_OK


def cmd_dump_features(cfg: RunConfig, output: str | None) -> int:
    net = build_network(_load(cfg), _single_alias(cfg))
    comp = components(net)
    rows = ((net.labels[v], topo_vector(net, v, comp, cfg.weighted)) for v in net.persona_nodes())
    with _sink(output) as fh:
        write_feature_csv(rows, fh, ALL_FIELDS)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "synth":
            return cmd_synth(args)
        cfg = _config(args)
        if args.command == "evaluate":
            return cmd_evaluate(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.output)
        if args.command == "relevance":
            return cmd_relevance(cfg)
        if args.command == "fit-lambda":
            return cmd_fit_lambda(cfg, args.summary, args.epochs, args.output)
        if args.command == "dump-network":
            return cmd_dump_network(cfg, args.output)
        if args.command == "dump-features":
            return cmd_dump_features(cfg, args.output)
    except UsageError as exc:
        print(f"topocollab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CorpusError, DegenerateCaseError, ValueError, OSError) as exc:
        print(f"topocollab: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"topocollab: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    parser.error(f"unknown command {args.command}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
