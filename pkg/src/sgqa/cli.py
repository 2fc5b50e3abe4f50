"""Command-line pipeline: normalize, generate, entail, balance, split, evaluate, stats.

Every stage reads declared files, writes its output plus
``<output>.manifest.json`` (config echo, seed, input/output digests, counts)
and exits 0 on success, 1 on usage errors and 2 on data errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from . import plots
from .balancing import BalanceConfig, assign_splits, balance_corpus
from .entailment import DEFAULT_MAX_ROUNDS, entail_corpus
from .generator import GenContext, default_patterns_path, generate_corpus, load_patterns
from .generator.patterns import PatternError
from .generator.text import tokenize
from .jsonl import RecordError, file_digest, read_jsonl, write_json, write_jsonl
from .metrics import MetricError, evaluate, format_report, oracle_predictions
from .ontology import OntologyError, default_ontology_dir, load_ontology
from .program import CATALOG, ExecutionError, ProgramError
from .scenegraph import (
    GraphError,
    build_plausibility,
    default_scene_dir,
    graph_to_record,
    iter_records,
    load_scene_config,
    normalize,
    read_graphs,
)

log = logging.getLogger("sgqa")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
STAGES = ("normalize", "generate", "entail", "balance", "split", "evaluate", "stats")

DEFAULT_FILES = {
    "graphs": "graphs.jsonl",
    "questions": "questions.jsonl",
    "entailments": "entailments.jsonl",
    "balanced": "balanced.jsonl",
    "balance_report": "balance_report.json",
    "split": "corpus.jsonl",
    "predictions": "oracle_predictions.jsonl",
    "evaluation": "evaluation.json",
    "stats": "stats.json",
}


class UsageError(Exception):
    pass


class StageError(Exception):
    """A data error inside a stage; the message already names the stage."""


def default_config_path() -> Path:
    return Path(__file__).parent / "data" / "config.json"


def default_graphs_path() -> Path:
    return Path(__file__).parent / "data" / "demo_graphs.jsonl"


@dataclass
class Settings:
    raw: dict
    base: Path
    seed: int
    workers: int
    workdir: Path

    def path(self, key: str) -> Path | None:
        value = self.raw.get("paths", {}).get(key)
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else self.base / p

    def section(self, name: str) -> dict:
        return dict(self.raw.get(name, {}))

    def out(self, key: str) -> Path:
        return self.workdir / DEFAULT_FILES[key]


CONFIG_KEYS = {"workdir", "seed", "workers", "paths", "normalize", "generate", "entail", "balance"}


def load_settings(args: argparse.Namespace) -> Settings:
    path = Path(args.config) if args.config else default_config_path()
    if not path.exists():
        raise UsageError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise UsageError(f"config {path}: {e}") from None
    unknown = set(raw) - CONFIG_KEYS
    if unknown:
        raise UsageError(f"config {path}: unknown key(s) {sorted(unknown)}")
    base = path.parent if args.config else Path.cwd()
    seed = args.seed if args.seed is not None else raw.get("seed")
    if seed is None:
        raise UsageError("a seed is required (config 'seed' or --seed)")
    workers = args.workers if args.workers is not None else int(raw.get("workers", 1))
    if args.workdir:
        workdir = Path(args.workdir)
    else:
        wd = Path(raw.get("workdir", "sgqa-out"))
        workdir = wd if wd.is_absolute() else base / wd
    return Settings(raw, base, int(seed), max(1, workers), workdir)


# --------------------------------------------------------------------------
# shared helpers


def _require(stage: str, path: Path | None, what: str) -> Path:
    if path is None or not Path(path).exists():
        raise StageError(f"{stage}: {what} not found: {path}")
    return Path(path)


def _manifest(stage: str, settings: Settings, config: dict, inputs: dict, outputs: dict, counts: dict) -> None:
    def describe(paths: dict) -> dict:
        return {k: {"file": Path(p).name, "sha256": file_digest(p)} for k, p in sorted(paths.items())}

    primary = next(iter(outputs.values()))
    write_json(Path(str(primary) + ".manifest.json"), {
        "stage": stage,
        "seed": settings.seed,
        "config": config,
        "inputs": describe(inputs),
        "outputs": describe(outputs),
        "counts": counts,
    })


def _ontology(settings: Settings):
    return load_ontology(settings.path("ontology") or default_ontology_dir())


def _scene_config(settings: Settings):
    margin = float(settings.section("normalize").get("marginFraction", 1 / 3))
    return load_scene_config(settings.path("scene") or default_scene_dir(), margin)


def _graphs(stage: str, settings: Settings, path: Path, ontology):
    return read_graphs(_require(stage, path, "graph file"), ontology, _scene_config(settings))


def _records(stage: str, path: Path, what: str) -> list[dict]:
    return list(read_jsonl(_require(stage, path, what)))


# --------------------------------------------------------------------------
# stages


def cmd_normalize(args, settings: Settings) -> dict:
    src = Path(args.input) if args.input else (settings.path("graphs") or default_graphs_path())
    src = _require("normalize", src, "input")
    out = Path(args.output) if args.output else settings.out("graphs")
    ontology = _ontology(settings)
    scene = _scene_config(settings)
    records, dropped = [], 0
    for rec in iter_records(src):
        g = normalize(rec, ontology, scene)
        dropped += g.dropped
        records.append(graph_to_record(g))
    write_jsonl(out, records)
    counts = {"graphs": len(records), "droppedTokens": dropped,
              "objects": sum(len(r["objects"]) for r in records)}
    _manifest("normalize", settings, settings.section("normalize"), {"input": src}, {"output": out}, counts)
    return counts


def cmd_generate(args, settings: Settings) -> dict:
    src = Path(args.input) if args.input else settings.out("graphs")
    out = Path(args.output) if args.output else settings.out("questions")
    ontology = _ontology(settings)
    graphs = _graphs("generate", settings, src, ontology)
    gen = settings.section("generate")
    patterns_path = settings.path("patterns") or default_patterns_path()
    patterns = load_patterns(_require("generate", patterns_path, "pattern file"))
    ctx = GenContext(
        ontology, build_plausibility(graphs, ontology), _scene_config(settings).unannotated,
        max_depth=int(gen.get("maxDepth", 2)), attempts=int(gen.get("attempts", 3)),
    )
    rejections: Counter = Counter()
    instances = generate_corpus(graphs, patterns, ctx, settings.seed, settings.workers, rejections)
    n = write_jsonl(out, (q.to_record() for q in instances))
    counts = {"graphs": len(graphs), "questions": n, "rejections": dict(sorted(rejections.items()))}
    _manifest("generate", settings, gen, {"input": src, "patterns": patterns_path}, {"output": out}, counts)
    return counts


def cmd_entail(args, settings: Settings) -> dict:
    src = Path(args.input) if args.input else settings.out("questions")
    graphs_path = Path(args.graphs) if args.graphs else settings.out("graphs")
    out = Path(args.output) if args.output else settings.out("entailments")
    records = _records("entail", src, "question file")
    ontology = _ontology(settings)
    graphs = _graphs("entail", settings, graphs_path, ontology)
    table = build_plausibility(graphs, ontology)
    conf = settings.section("entail")
    rounds = int(conf.get("maxRounds", DEFAULT_MAX_ROUNDS))
    sidecar = entail_corpus(records, ontology, {g.image_id: g for g in graphs}, table, rounds, settings.workers)
    members = 0

    def counted():
        nonlocal members
        for item in sidecar:
            members += len(item["entailed"])
            yield item

    n = write_jsonl(out, counted())
    counts = {"questions": n, "entailed": members}
    _manifest("entail", settings, conf, {"input": src, "graphs": graphs_path}, {"output": out}, counts)
    return counts


def _balance_config(settings: Settings) -> BalanceConfig:
    conf = settings.section("balance")
    conf.setdefault("seed", settings.seed)
    return BalanceConfig.from_dict(conf)


def cmd_balance(args, settings: Settings) -> dict:
    src = Path(args.input) if args.input else settings.out("questions")
    out = Path(args.output) if args.output else settings.out("balanced")
    report_path = Path(args.report) if args.report else settings.out("balance_report")
    records = _records("balance", src, "question file")
    cfg = _balance_config(settings)
    balanced, report = balance_corpus(records, cfg)
    write_jsonl(out, balanced)
    write_json(report_path, report)
    figure = report_path.with_suffix(".png")
    top = [g for g in report["groups"] if g["level"] == "global"]
    top = sorted(top, key=lambda g: (len(g["input"]) < 3, -sum(g["input"].values()), g["group"]))[:6]
    plots.plot_balance(top, figure)
    infeasible = sum(1 for g in report["groups"] if not g["feasible"])
    if infeasible:
        log.info("balance: %d group(s) could not meet the head/tail bound; flattest allowed targets used",
                 infeasible)
    counts = {"input": len(records), "output": len(balanced), "infeasibleGroups": infeasible}
    _manifest("balance", settings, settings.section("balance"), {"input": src},
              {"output": out, "report": report_path, "figure": figure}, counts)
    return counts


def cmd_split(args, settings: Settings) -> dict:
    src = Path(args.input) if args.input else settings.out("balanced")
    out = Path(args.output) if args.output else settings.out("split")
    records = _records("split", src, "balanced corpus")
    try:
        tagged = assign_splits(records, _balance_config(settings))
    except ValueError as e:
        raise StageError(f"split: {e}") from None
    write_jsonl(out, tagged)
    images: dict[str, set] = {}
    for r in tagged:
        images.setdefault(r["split"], set()).add(r["imageId"])
    counts = {
        "questions": dict(sorted(Counter(r["split"] for r in tagged).items())),
        "images": {k: len(v) for k, v in sorted(images.items())},
    }
    _manifest("split", settings, {"splitShares": list(_balance_config(settings).split_shares)},
              {"input": src}, {"output": out}, counts)
    return counts


def cmd_evaluate(args, settings: Settings) -> dict:
    gold_path = Path(args.input) if args.input else settings.out("split")
    graphs_path = Path(args.graphs) if args.graphs else settings.out("graphs")
    ent_path = Path(args.entailments) if args.entailments else settings.out("entailments")
    report_path = Path(args.report) if args.report else settings.out("evaluation")
    gold = _records("evaluate", gold_path, "gold corpus")
    if args.split:
        gold = [g for g in gold if g.get("split") == args.split]
    ontology = _ontology(settings)
    graphs = _graphs("evaluate", settings, graphs_path, ontology)
    by_id = {g.image_id: g for g in graphs}
    inputs = {"gold": gold_path, "graphs": graphs_path}
    if args.oracle:
        pred_path = Path(args.predictions) if args.predictions else settings.out("predictions")
        missing = sorted({g["imageId"] for g in gold} - set(by_id))
        if missing:
            raise StageError(f"evaluate: no graph for image(s) {missing[:5]}")
        write_jsonl(pred_path, oracle_predictions(gold, by_id, ontology))
    elif args.predictions:
        pred_path = Path(args.predictions)
    else:
        raise UsageError("evaluate needs --predictions or --oracle")
    preds = _records("evaluate", pred_path, "prediction file")
    inputs["predictions"] = pred_path
    entailments = None
    if ent_path.exists():
        entailments = list(read_jsonl(ent_path))
        inputs["entailments"] = ent_path
    report = evaluate(preds, gold, ontology, build_plausibility(graphs, ontology), entailments, by_id)
    write_json(report_path, report)
    text_path = report_path.with_suffix(".txt")
    text = format_report(report)
    text_path.write_text(text, encoding="utf-8")
    print(text, end="")
    _manifest("evaluate", settings, {"split": args.split, "oracle": bool(args.oracle)}, inputs,
              {"report": report_path, "table": text_path}, {"questions": len(gold), "predictions": len(preds)})
    return {"accuracy": report["accuracy"]}


def corpus_stats(records: Sequence[dict]) -> dict:
    """Counts per type, question-length histogram and vocabulary sizes."""
    lengths: Counter = Counter()
    vocab: set[str] = set()
    for r in records:
        words = [t.lower() for t in tokenize(r["question"]) if t[0].isalnum()]
        lengths[len(words)] += 1
        vocab.update(words)
    order = list(CATALOG)
    detailed = Counter(r["types"]["detailed"] for r in records)
    stats = {
        "questions": len(records),
        "images": len({r["imageId"] for r in records}),
        "vocabularySize": len(vocab),
        "answerVocabularySize": len({r["answer"] for r in records}),
        "meanQuestionLength": round(sum(k * v for k, v in lengths.items()) / max(1, len(records)), 6),
        "questionLengths": {str(k): lengths[k] for k in sorted(lengths)},
        "structural": dict(sorted(Counter(r["types"]["structural"] for r in records).items())),
        "semantic": dict(sorted(Counter(r["types"]["semantic"] for r in records).items())),
        "detailed": {t: detailed[t] for t in order if detailed[t]},
    }
    if any("split" in r for r in records):
        stats["splits"] = dict(sorted(Counter(r.get("split", "none") for r in records).items()))
    return stats


def cmd_stats(args, settings: Settings) -> dict:
    src = Path(args.input) if args.input else settings.out("split")
    out = Path(args.output) if args.output else settings.out("stats")
    records = _records("stats", src, "corpus")
    stats = corpus_stats(records)
    write_json(out, stats)
    types_png = out.with_name(out.stem + "_types.png")
    lengths_png = out.with_name(out.stem + "_lengths.png")
    plots.plot_type_counts(stats["detailed"], types_png)
    plots.plot_length_histogram({int(k): v for k, v in stats["questionLengths"].items()}, lengths_png)
    print(f"questions {stats['questions']}  images {stats['images']}  "
          f"vocabulary {stats['vocabularySize']}  answers {stats['answerVocabularySize']}")
    for name, n in stats["detailed"].items():
        print(f"  {name:<14}{n:>8}")
    _manifest("stats", settings, {}, {"input": src},
              {"output": out, "types": types_png, "lengths": lengths_png},
              {"questions": stats["questions"]})
    return {"questions": stats["questions"]}


def cmd_pipeline(args, settings: Settings) -> dict:
    """All stages in order with default file names under the work directory."""
    results = {}
    blank = argparse.Namespace(input=None, output=None, graphs=None, report=None, entailments=None,
                               predictions=None, oracle=True, split=None)
    for stage in STAGES:
        stage_args = argparse.Namespace(**vars(blank))
        if stage == "normalize":
            stage_args.input = args.input
        results[stage] = COMMANDS[stage](stage_args, settings)
    return results


COMMANDS: dict[str, Callable] = {
    "normalize": cmd_normalize,
    "generate": cmd_generate,
    "entail": cmd_entail,
    "balance": cmd_balance,
    "split": cmd_split,
    "evaluate": cmd_evaluate,
    "stats": cmd_stats,
    "pipeline": cmd_pipeline,
}


# --------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON pipeline config (default: bundled demo config)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--workers", type=int, help="worker processes for generate/entail")
    common.add_argument("--workdir", help="directory for default stage outputs")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress")

    parser = _Parser(prog="sgqa", description="Scene-graph question corpus pipeline.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "normalize": "normalize raw scene graphs",
        "generate": "generate questions from normalized graphs",
        "entail": "compute entailment closures for every question",
        "balance": "smooth answer distributions, deduplicate, sample types",
        "split": "assign images to train/val/test/challenge",
        "evaluate": "score predictions against a gold corpus",
        "stats": "corpus statistics and figures",
        "pipeline": "run every stage in order",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, parents=[common], help=text, description=text)
        p.add_argument("--input", help="input file (default: previous stage output)")
        if name not in ("evaluate", "pipeline"):
            p.add_argument("--output", help="output file")
        if name in ("entail", "evaluate"):
            p.add_argument("--graphs", help="normalized graph file")
        if name in ("balance", "evaluate"):
            p.add_argument("--report", help="report file")
        if name == "evaluate":
            p.add_argument("--predictions", help="predictions file")
            p.add_argument("--entailments", help="entailment sidecar")
            p.add_argument("--oracle", action="store_true", help="score answers obtained by executing each program")
            p.add_argument("--split", choices=("train", "val", "test", "challenge"), help="evaluate one split")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        settings = load_settings(args)
        result = COMMANDS[args.command](args, settings)
    except UsageError as e:
        print(f"sgqa {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as e:
        print(f"sgqa {e}", file=sys.stderr)
        return EXIT_DATA
    except (GraphError, ProgramError, ExecutionError, RecordError, MetricError, OntologyError,
            PatternError, ValueError, KeyError) as e:
        print(f"sgqa {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_DATA
    log.info("%s: %s", args.command, json.dumps(result, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
