"""Command-line pipeline: embeddings, seed mining, aspect training and
classification, salience scoring, summarization, and evaluation.

Every command writes a resolved ``*.config.txt`` next to its outputs so a
run can be reproduced exactly. Flags override values from an optional
``key=value`` config file, which overrides the built-in defaults. The
``OPINIONSUM_OUTDIR`` environment variable supplies the pipeline output
directory when ``--outdir`` is omitted.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from opinionsum import memory, salience, summarizer
from opinionsum.corpus import (Corpus, load_aspect_labels, load_features,
                               load_references, load_reviews)
from opinionsum.embeddings import (SkipgramConfig, load_embeddings,
                                   save_embeddings, train_skipgram)
from opinionsum.evaluation import (approx_randomization_test,
                                   aspect_eval_report, summary_eval_report)
from opinionsum.memory import (MemoryBank, TrainConfig, build_seeded_bank,
                               confusion_matrix, load_bank, load_seed_words,
                               save_bank, save_training_log, train)
from opinionsum.salience import SalienceScore, load_lexicon
from opinionsum.seeds import load_seed_set, mine_seeds, save_seed_set
from opinionsum.summarizer import (build_problem, pairwise_similarity,
                                   render_summary, solve_exact, solve_greedy)

log = logging.getLogger(__name__)

OUTDIR_ENV = "OPINIONSUM_OUTDIR"


@dataclass(frozen=True)
class PipelineConfig:
    """Resolved hyperparameters shared across stages."""

    dim: int = 200
    window: int = 5
    negatives: int = 5
    embed_epochs: int = 5
    min_count: int = 5
    embed_lr: float = 0.025
    subsample: float = 1e-3
    learning_rate: float = 0.001
    batch_size: int = 300
    lam: float = 100.0
    max_epochs: int = 50
    patience: int = 5
    extra_general: int = 5
    delta: float = 0.3
    seed_k: int = 100
    budget: int = 100
    redundancy_threshold: float = 0.5
    mode: str = "hard"
    max_candidates: int = 400
    node_budget: int = 500_000
    trials: int = 9999
    rng_seed: int = 0


_CONFIG_FIELDS = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}


def read_config_file(path: str | Path) -> dict:
    """Parse a flat key=value config file into typed PipelineConfig values."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}, line {lineno}: expected key=value")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key == "lambda":
                key = "lam"
            if key not in _CONFIG_FIELDS:
                raise ValueError(f"{path}, line {lineno}: unknown key {key!r}")
            if key == "mode":
                values[key] = value
            elif _CONFIG_FIELDS[key] in ("int", int):
                values[key] = int(value)
            else:
                values[key] = float(value)
    return values


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    """defaults < config file < explicit flags."""
    values = {}
    config_path = getattr(args, "config", None)
    if config_path:
        values.update(read_config_file(config_path))
    for name in _CONFIG_FIELDS:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    return PipelineConfig(**values)


def write_resolved_config(path: Path, command: str, config: PipelineConfig,
                          paths: dict[str, str]) -> None:
    lines = [f"command={command}"]
    for key in sorted(paths):
        lines.append(f"{key}={paths[key]}")
    for field in dataclasses.fields(PipelineConfig):
        lines.append(f"{field.name}={getattr(config, field.name)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _sidecar(out_path: str | Path) -> Path:
    out_path = Path(out_path)
    return out_path.with_name(out_path.name + ".config.txt")


def _require_inputs(stage: str, produced_by: dict[str, str], **paths: str) -> None:
    for name, path in paths.items():
        if path is None or Path(path).exists():
            continue
        hint = produced_by.get(name)
        extra = f" (produced by `{hint}`)" if hint else ""
        raise FileNotFoundError(f"{stage}: missing input {name} at {path!r}{extra}")


# ---------------------------------------------------------------------------
# Stage implementations (shared by individual commands and the pipeline)
# ---------------------------------------------------------------------------

def _score_segments(corpus: Corpus, table, seed_set, lexicon, config: PipelineConfig,
                    category: str | None, no_relevance: bool,
                    no_sentiment: bool) -> dict[str, SalienceScore]:
    scores = {}
    for seg in corpus.iter_segments(category):
        rel = 1.0 if no_relevance else salience.relevance(
            seg.tokens, seed_set, table, config.delta)
        senti = 1.0 if no_sentiment else salience.sentiment(seg.tokens, lexicon)
        scores[seg.id] = SalienceScore.of(rel, senti)
    return scores


def _write_scores(scores: dict[str, SalienceScore], corpus: Corpus,
                  category: str | None, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for seg in corpus.iter_segments(category):
            row = scores[seg.id]
            fh.write(json.dumps({"segment_id": seg.id,
                                 "relevance": row.relevance,
                                 "sentiment": row.sentiment,
                                 "salience": row.salience}) + "\n")


def _read_scores(path: str | Path) -> dict[str, float]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if line:
                obj = json.loads(line)
                out[obj["segment_id"]] = float(obj["salience"])
    return out


def _seed_encoder_bank(seed_set, table) -> MemoryBank | None:
    """Bank whose cells are the in-vocabulary seed words themselves, with
    priors proportional to the mined weights; used to encode segments for
    the redundancy similarity."""
    cells = []
    entries = [(w, wt) for w, wt in seed_set.entries if w in table]
    if not entries:
        return None
    total = sum(wt for _, wt in entries)
    for word, weight in entries:
        cells.append(memory.AspectCell(word, table[word], weight / total, False))
    return MemoryBank(cells)


def _summarize_products(corpus: Corpus, table, seed_set, sal_scores: dict[str, float],
                        config: PipelineConfig, category: str | None,
                        greedy: bool, out_path: Path) -> None:
    encoder = _seed_encoder_bank(seed_set, table)
    if encoder is None:
        log.warning("no seed word is in vocabulary; redundancy similarities are zero")
    with open(out_path, "w", encoding="utf-8") as fh:
        for product in corpus.iter_products(category):
            segments = [seg for review in product.reviews for seg in review.segments]
            for seg in segments:
                if seg.id not in sal_scores:
                    raise ValueError(
                        f"summarize: no salience score for segment {seg.id!r} "
                        "(run the score stage first)")
            if encoder is not None:
                vectors = []
                for seg in segments:
                    in_vocab = [table[t] for t in seg.tokens if t in table]
                    if in_vocab:
                        vectors.append(memory.encode_segment(in_vocab, encoder).vector)
                    else:
                        vectors.append([0.0] * table.dim)
                sims = pairwise_similarity(vectors)
            else:
                sims = [[0.0] * len(segments)] * len(segments)
            problem = build_problem(
                segments, sal_scores, sims,
                budget=config.budget, mode=config.mode,
                redundancy_threshold=config.redundancy_threshold,
                max_candidates=config.max_candidates)
            if greedy:
                summary = solve_greedy(problem)
            else:
                summary, _stats = solve_exact(problem, node_budget=config.node_budget)
            text = render_summary(summary, corpus)
            fh.write(json.dumps({"product_id": product.id,
                                 "mode": problem.mode,
                                 "selected": list(summary.selected),
                                 "objective": summary.objective,
                                 "words": summary.total_words,
                                 "summary": text}) + "\n")


def _read_summaries(path: str | Path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if line:
                obj = json.loads(line)
                out[obj["product_id"]] = obj["summary"]
    return out


def _eval_summaries(summaries_path: str, references_path: str, out_json: Path,
                    out_tsv: Path | None, config: PipelineConfig,
                    compare_path: str | None = None) -> dict:
    summaries = _read_summaries(summaries_path)
    references = {pid: [r.text for r in refs]
                  for pid, refs in load_references(references_path).items()}
    report, per_product = summary_eval_report(summaries, references)
    payload = {"variant": "f1_max_over_references",
               "report": report.to_dict(),
               "per_product": per_product}
    if compare_path:
        other = _read_summaries(compare_path)
        shared = sorted(set(summaries) & set(other))
        if not shared:
            raise ValueError("eval-summaries: no shared products to compare")
        _, other_rows = summary_eval_report(
            {p: other[p] for p in shared}, references)
        significance = {}
        for metric in ("rouge1_f1", "rouge2_f1"):
            a = [per_product[p][metric] for p in shared]
            b = [other_rows[p][metric] for p in shared]
            significance[metric] = approx_randomization_test(
                a, b, trials=config.trials, rng_seed=config.rng_seed)
        payload["significance"] = significance
    out_json.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
    if out_tsv is not None:
        lines = ["product\trouge1_f1\trouge2_f1"]
        for pid in sorted(per_product):
            row = per_product[pid]
            lines.append(f"{pid}\t{row['rouge1_f1']!r}\t{row['rouge2_f1']!r}")
        avg = report.average
        lines.append(f"AVERAGE\t{avg['rouge1_f1']!r}\t{avg['rouge2_f1']!r}")
        out_tsv.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return payload


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_train_embeddings(args) -> int:
    config = resolve_config(args)
    _require_inputs("train-embeddings", {}, reviews=args.reviews)
    corpus = load_reviews(args.reviews)
    sg = SkipgramConfig(dim=config.dim, window=config.window,
                        negatives=config.negatives, epochs=config.embed_epochs,
                        min_count=config.min_count, learning_rate=config.embed_lr,
                        subsample=config.subsample, rng_seed=config.rng_seed)
    table = train_skipgram(corpus.iter_segments(args.category), sg)
    save_embeddings(table, args.out)
    write_resolved_config(_sidecar(args.out), "train-embeddings", config,
                          {"reviews": args.reviews, "out": args.out,
                           "category": args.category or ""})
    print(f"trained {len(table)} vectors of dim {table.dim} -> {args.out}")
    return 0


def cmd_mine_seeds(args) -> int:
    config = resolve_config(args)
    _require_inputs("mine-seeds", {}, features=args.features)
    features = load_features(args.features)
    seed_set = mine_seeds(features, args.category, k=config.seed_k)
    save_seed_set(seed_set, args.out)
    write_resolved_config(_sidecar(args.out), "mine-seeds", config,
                          {"features": args.features, "out": args.out,
                           "category": args.category})
    print(f"mined {len(seed_set.entries)} seeds for {args.category} -> {args.out}")
    return 0


def cmd_train_aspects(args) -> int:
    config = resolve_config(args)
    _require_inputs("train-aspects", {"embeddings": "train-embeddings"},
                    reviews=args.reviews, embeddings=args.embeddings,
                    seeds=args.seeds)
    corpus = load_reviews(args.reviews)
    table = load_embeddings(args.embeddings)
    seed_words = load_seed_words(args.seeds)
    bank = build_seeded_bank(seed_words, table, extra_general=config.extra_general,
                             rng_seed=config.rng_seed)
    dev_labels = load_aspect_labels(args.dev_labels) if args.dev_labels else None
    dev_corpus = load_reviews(args.dev_reviews) if args.dev_reviews else None
    tc = TrainConfig(learning_rate=config.learning_rate,
                     batch_size=config.batch_size, lam=config.lam,
                     max_epochs=config.max_epochs, patience=config.patience,
                     rng_seed=config.rng_seed)
    segments = list(corpus.iter_segments(args.category))
    trained, logs = train(bank, segments, table, dev_labels, tc, dev_corpus)
    save_bank(trained, args.out)
    save_training_log(logs, args.log or str(args.out) + ".log.csv")
    write_resolved_config(_sidecar(args.out), "train-aspects", config,
                          {"reviews": args.reviews, "embeddings": args.embeddings,
                           "seeds": args.seeds, "out": args.out,
                           "dev_labels": args.dev_labels or "",
                           "dev_reviews": args.dev_reviews or "",
                           "category": args.category or ""})
    last = logs[-1]
    print(f"trained bank of {len(trained)} cells in {len(logs)} epochs "
          f"(final loss {last.loss:.4f}) -> {args.out}")
    return 0


def cmd_classify(args) -> int:
    config = resolve_config(args)
    _require_inputs("classify", {"embeddings": "train-embeddings",
                                 "bank": "train-aspects"},
                    reviews=args.reviews, embeddings=args.embeddings, bank=args.bank)
    corpus = load_reviews(args.reviews)
    table = load_embeddings(args.embeddings)
    bank = load_bank(args.bank)
    with open(args.out, "w", encoding="utf-8") as fh:
        for seg in corpus.iter_segments(args.category):
            fh.write(f"{seg.id}\t{memory.classify(seg.tokens, bank, table)}\n")
    write_resolved_config(_sidecar(args.out), "classify", config,
                          {"reviews": args.reviews, "embeddings": args.embeddings,
                           "bank": args.bank, "out": args.out,
                           "category": args.category or ""})
    return 0


def _read_predictions(path: str | Path) -> dict[str, str]:
    preds = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}, line {lineno}: expected 2 fields")
            preds[parts[0]] = parts[1]
    return preds


def cmd_eval_aspects(args) -> int:
    config = resolve_config(args)
    _require_inputs("eval-aspects", {"predictions": "classify"},
                    predictions=args.predictions, labels=args.labels)
    preds = _read_predictions(args.predictions)
    gold = load_aspect_labels(args.labels)
    evaluated = {sid: label for sid, label in preds.items() if sid in gold}
    categories = None
    if args.reviews:
        categories = load_reviews(args.reviews).segment_categories()
    report = aspect_eval_report(evaluated, gold, categories)
    payload = report.to_dict()
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                                  encoding="utf-8")
        write_resolved_config(_sidecar(args.out), "eval-aspects", config,
                              {"predictions": args.predictions,
                               "labels": args.labels, "out": args.out,
                               "reviews": args.reviews or ""})
    if args.tsv:
        lines = ["category\tmultilabel_f1"]
        for cat, metrics in report.per_category.items():
            lines.append(f"{cat}\t{metrics['multilabel_f1']!r}")
        lines.append(f"AVERAGE\t{report.average['multilabel_f1']!r}")
        Path(args.tsv).write_text("\n".join(lines) + "\n", encoding="utf-8")
    if args.confusion:
        labels, counts, _norm = confusion_matrix(
            evaluated, {sid: gold[sid] for sid in evaluated})
        lines = ["gold\\pred," + ",".join(labels)]
        for i, lab in enumerate(labels):
            lines.append(lab + "," + ",".join(str(c) for c in counts[i]))
        Path(args.confusion).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"multilabel F1 (macro avg): {report.average['multilabel_f1']:.4f}")
    return 0


def cmd_score(args) -> int:
    config = resolve_config(args)
    _require_inputs("score", {"embeddings": "train-embeddings",
                              "seeds": "mine-seeds"},
                    reviews=args.reviews, embeddings=args.embeddings,
                    seeds=args.seeds, lexicon_pos=args.lexicon_pos,
                    lexicon_neg=args.lexicon_neg)
    corpus = load_reviews(args.reviews)
    table = load_embeddings(args.embeddings)
    seed_set = load_seed_set(args.seeds, args.category or "unknown")
    lexicon = load_lexicon(args.lexicon_pos, args.lexicon_neg)
    scores = _score_segments(corpus, table, seed_set, lexicon, config,
                             args.category, args.no_relevance, args.no_sentiment)
    _write_scores(scores, corpus, args.category, Path(args.out))
    write_resolved_config(_sidecar(args.out), "score", config,
                          {"reviews": args.reviews, "embeddings": args.embeddings,
                           "seeds": args.seeds, "lexicon_pos": args.lexicon_pos,
                           "lexicon_neg": args.lexicon_neg, "out": args.out,
                           "category": args.category or "",
                           "no_relevance": str(args.no_relevance),
                           "no_sentiment": str(args.no_sentiment)})
    return 0


def cmd_summarize(args) -> int:
    config = resolve_config(args)
    _require_inputs("summarize", {"embeddings": "train-embeddings",
                                  "seeds": "mine-seeds", "scores": "score"},
                    reviews=args.reviews, embeddings=args.embeddings,
                    seeds=args.seeds, scores=args.scores)
    corpus = load_reviews(args.reviews)
    table = load_embeddings(args.embeddings)
    seed_set = load_seed_set(args.seeds, args.category or "unknown")
    sal_scores = _read_scores(args.scores)
    _summarize_products(corpus, table, seed_set, sal_scores, config,
                        args.category, args.greedy, Path(args.out))
    write_resolved_config(_sidecar(args.out), "summarize", config,
                          {"reviews": args.reviews, "embeddings": args.embeddings,
                           "seeds": args.seeds, "scores": args.scores,
                           "out": args.out, "category": args.category or "",
                           "greedy": str(args.greedy)})
    return 0


def cmd_eval_summaries(args) -> int:
    config = resolve_config(args)
    _require_inputs("eval-summaries", {"summaries": "summarize"},
                    summaries=args.summaries, references=args.references)
    payload = _eval_summaries(args.summaries, args.references, Path(args.out),
                              Path(args.tsv) if args.tsv else None,
                              config, args.compare)
    write_resolved_config(_sidecar(args.out), "eval-summaries", config,
                          {"summaries": args.summaries,
                           "references": args.references, "out": args.out,
                           "compare": args.compare or ""})
    avg = payload["report"]["average"]
    print(f"ROUGE-1 F1 {avg['rouge1_f1']:.4f}  ROUGE-2 F1 {avg['rouge2_f1']:.4f}")
    return 0


def cmd_pipeline(args) -> int:
    config = resolve_config(args)
    outdir = args.outdir or os.environ.get(OUTDIR_ENV)
    if not outdir:
        raise ValueError(f"pipeline: --outdir or ${OUTDIR_ENV} is required")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    _require_inputs("pipeline", {"embeddings": "train-embeddings"},
                    reviews=args.reviews, features=args.features,
                    embeddings=args.embeddings, lexicon_pos=args.lexicon_pos,
                    lexicon_neg=args.lexicon_neg, references=args.references)

    corpus = load_reviews(args.reviews)
    table = load_embeddings(args.embeddings)
    lexicon = load_lexicon(args.lexicon_pos, args.lexicon_neg)

    seeds_path = outdir / "seeds.tsv"
    seed_set = mine_seeds(load_features(args.features), args.category,
                          k=config.seed_k)
    save_seed_set(seed_set, seeds_path)

    scores_path = outdir / "scores.jsonl"
    scores = _score_segments(corpus, table, seed_set, lexicon, config,
                             args.category, args.no_relevance, args.no_sentiment)
    _write_scores(scores, corpus, args.category, scores_path)

    summaries_path = outdir / "summaries.jsonl"
    sal_scores = {sid: s.salience for sid, s in scores.items()}
    _summarize_products(corpus, table, seed_set, sal_scores, config,
                        args.category, args.greedy, summaries_path)

    _eval_summaries(str(summaries_path), args.references,
                    outdir / "rouge.json", outdir / "rouge.tsv", config)

    write_resolved_config(outdir / "config.txt", "pipeline", config,
                          {"reviews": args.reviews, "features": args.features,
                           "embeddings": args.embeddings,
                           "lexicon_pos": args.lexicon_pos,
                           "lexicon_neg": args.lexicon_neg,
                           "references": args.references,
                           "category": args.category,
                           "outdir": str(args.outdir or ""),
                           "greedy": str(args.greedy),
                           "no_relevance": str(args.no_relevance),
                           "no_sentiment": str(args.no_sentiment)})
    print(f"pipeline outputs written to {outdir}")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _add_config_flags(parser: argparse.ArgumentParser, names: list[str]) -> None:
    parser.add_argument("--config", help="key=value config file")
    specs = {
        "dim": int, "window": int, "negatives": int, "embed_epochs": int,
        "min_count": int, "embed_lr": float, "subsample": float,
        "learning_rate": float, "batch_size": int, "lam": float,
        "max_epochs": int, "patience": int, "extra_general": int,
        "delta": float, "seed_k": int, "budget": int,
        "redundancy_threshold": float, "max_candidates": int,
        "node_budget": int, "trials": int, "rng_seed": int,
    }
    for name in names:
        if name == "mode":
            parser.add_argument("--mode", choices=summarizer.MODES, default=None)
        elif name == "lam":
            parser.add_argument("--lambda", dest="lam", type=float, default=None)
        else:
            flag = "--" + name.replace("_", "-")
            parser.add_argument(flag, type=specs[name], default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opinionsum",
        description="Aspect-aware opinion mining and review summarization.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-embeddings", help="train skip-gram word vectors")
    p.add_argument("--reviews", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--category", default=None)
    _add_config_flags(p, ["dim", "window", "negatives", "embed_epochs",
                          "min_count", "embed_lr", "subsample", "rng_seed"])
    p.set_defaults(func=cmd_train_embeddings)

    p = sub.add_parser("mine-seeds", help="mine seed words from feature descriptions")
    p.add_argument("--features", required=True)
    p.add_argument("--category", required=True)
    p.add_argument("--out", required=True)
    _add_config_flags(p, ["seed_k"])
    p.set_defaults(func=cmd_mine_seeds)

    p = sub.add_parser("train-aspects", help="train extra GENERAL memory cells")
    p.add_argument("--reviews", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--seeds", required=True, help="aspect seed TSV (aspect<TAB>word)")
    p.add_argument("--out", required=True)
    p.add_argument("--dev-labels", default=None)
    p.add_argument("--dev-reviews", default=None)
    p.add_argument("--log", default=None)
    p.add_argument("--category", default=None)
    _add_config_flags(p, ["learning_rate", "batch_size", "lam", "max_epochs",
                          "patience", "extra_general", "rng_seed"])
    p.set_defaults(func=cmd_train_aspects)

    p = sub.add_parser("classify", help="assign an aspect label to every segment")
    p.add_argument("--reviews", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--bank", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--category", default=None)
    _add_config_flags(p, [])
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("eval-aspects", help="multi-label F1 of predictions")
    p.add_argument("--predictions", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--reviews", default=None, help="for per-category breakdown")
    p.add_argument("--out", default=None)
    p.add_argument("--tsv", default=None, help="write per-category TSV here")
    p.add_argument("--confusion", default=None, help="write confusion CSV here")
    _add_config_flags(p, [])
    p.set_defaults(func=cmd_eval_aspects)

    p = sub.add_parser("score", help="salience-score every segment")
    p.add_argument("--reviews", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--seeds", required=True, help="mined seed TSV (word<TAB>weight)")
    p.add_argument("--lexicon-pos", required=True)
    p.add_argument("--lexicon-neg", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--category", default=None)
    p.add_argument("--no-relevance", action="store_true")
    p.add_argument("--no-sentiment", action="store_true")
    _add_config_flags(p, ["delta"])
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("summarize", help="select the optimal opinion subset")
    p.add_argument("--reviews", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--seeds", required=True)
    p.add_argument("--scores", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--category", default=None)
    p.add_argument("--greedy", action="store_true")
    _add_config_flags(p, ["budget", "mode", "redundancy_threshold",
                          "max_candidates", "node_budget"])
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("eval-summaries", help="ROUGE against reference summaries")
    p.add_argument("--summaries", required=True)
    p.add_argument("--references", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tsv", default=None)
    p.add_argument("--compare", default=None,
                   help="second summaries file for a paired significance test")
    _add_config_flags(p, ["trials", "rng_seed"])
    p.set_defaults(func=cmd_eval_summaries)

    p = sub.add_parser("pipeline",
                       help="mine-seeds -> score -> summarize -> eval-summaries")
    p.add_argument("--reviews", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--category", required=True)
    p.add_argument("--lexicon-pos", required=True)
    p.add_argument("--lexicon-neg", required=True)
    p.add_argument("--references", required=True)
    p.add_argument("--outdir", default=None)
    p.add_argument("--greedy", action="store_true")
    p.add_argument("--no-relevance", action="store_true")
    p.add_argument("--no-sentiment", action="store_true")
    _add_config_flags(p, ["seed_k", "delta", "budget", "mode",
                          "redundancy_threshold", "max_candidates",
                          "node_budget", "trials", "rng_seed"])
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
