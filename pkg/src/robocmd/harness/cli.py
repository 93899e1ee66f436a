"""Command-line interface.

Subcommands: generate, split, train, eval, matrix, repl, anonymize, judge.
Bundled fixtures (grammar, ontology, predicate registry, paraphrases) are
the defaults everywhere, so ``robocmd generate`` works out of the box.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .. import data as bundled
from ..anonymizer import anonymize
from ..corpus import (
    Dataset,
    build_vocab,
    read_jsonl,
    split_by_command,
    split_by_logical_form,
    write_jsonl,
)
from ..grammar import corpus_stats, enumerate_anonymized, load_grammar_file, sample_pair
from ..logic import PredicateRegistry
from ..metrics import Thresholds, judge_paraphrase
from ..neural import ModelConfig, Seq2SeqModel, load_model, load_pretrained_vectors, save_model, train
from ..neural.train import validation_exact_match
from ..ontology import Ontology
from .error_report import error_report
from .experiment import reproduce_matrix
from .repl import repl


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grammar", default=None, help="grammar file (default: bundled)")
    parser.add_argument("--ontology", default=None, help="ontology file (default: bundled)")
    parser.add_argument("--predicates", default=None, help="predicate registry (default: bundled)")
    parser.add_argument("--seed", type=int, default=0)


def _load_inputs(args):
    registry = PredicateRegistry.load(args.predicates or bundled.data_path(bundled.PREDICATES))
    grammar = load_grammar_file(args.grammar or bundled.data_path(bundled.GRAMMAR), registry)
    ont = Ontology.load(args.ontology or bundled.data_path(bundled.ONTOLOGY))
    return registry, grammar, ont


def cmd_generate(args) -> int:
    registry, grammar, ont = _load_inputs(args)
    pairs = enumerate_anonymized(grammar)
    for k in range(args.samples):
        pairs.append(sample_pair(grammar, ont, seed=args.seed + k))
    ds = Dataset(tuple(pairs), "generated")
    write_jsonl(args.out, ds)
    stats = corpus_stats(pairs, grammar)
    print(json.dumps(stats, indent=2))
    print(f"wrote {len(pairs)} pairs to {args.out}", file=sys.stderr)
    return 0


def cmd_split(args) -> int:
    registry, _, _ = _load_inputs(args)
    gen = read_jsonl(args.generated, registry, origin="generated")
    ratios = tuple(float(x) for x in args.ratios.split("/"))
    if args.kind == "command":
        gen = split_by_command(gen, ratios, args.seed)
        write_jsonl(args.out, gen)
        manifest = {"kind": "command", "seed": args.seed, "ratios": ratios, "counts": gen.counts()}
    else:
        para_path = args.paraphrased or bundled.data_path(bundled.PARAPHRASES)
        para = read_jsonl(para_path, registry, origin="paraphrased")
        gen, para = split_by_logical_form(gen, para, ratios, args.seed)
        write_jsonl(args.out, gen)
        para_out = Path(args.out).with_suffix(".para.jsonl")
        write_jsonl(para_out, para)
        manifest = {
            "kind": "logical",
            "seed": args.seed,
            "ratios": ratios,
            "counts": gen.counts(),
            "para_counts": para.counts(),
            "para_out": str(para_out),
        }
    Path(str(args.out) + ".manifest.json").write_text(json.dumps(manifest, indent=2))
    print(json.dumps(manifest, indent=2))
    return 0


def cmd_train(args) -> int:
    registry, _, _ = _load_inputs(args)
    ds = read_jsonl(args.corpus, registry, origin="generated")
    if not ds.tags:
        print("corpus has no split tags; run `robocmd split` first", file=sys.stderr)
        return 2
    train_pairs = ds.subset("train")
    val_pairs = ds.subset("validation")
    overrides = json.loads(Path(args.config).read_text()) if args.config else {}
    cfg = ModelConfig(**{"seed": args.seed, **overrides})
    src_vocab, tgt_vocab = build_vocab(train_pairs)
    frozen = None
    if args.vectors:
        path = bundled.data_path(bundled.VECTORS) if args.vectors == "bundled" else args.vectors
        frozen = load_pretrained_vectors(path, src_vocab)
    model = Seq2SeqModel(cfg, src_vocab, tgt_vocab, frozen)
    model, report = train(model, train_pairs, val_pairs, cfg)
    save_model(args.out, model)
    report_path = Path(str(args.out) + ".report.json")
    report_path.write_text(json.dumps(report.to_dict(), indent=2))
    print(
        f"trained {len(report.train_loss)} epochs (best {report.best_epoch}, "
        f"early-stop {report.stopped_early}); checkpoint -> {args.out}"
    )
    return 0


def cmd_eval(args) -> int:
    registry, grammar, ont = _load_inputs(args)
    ds = read_jsonl(args.corpus, registry, origin="generated")
    pairs = ds.subset(args.split_tag) if ds.tags else list(ds.pairs)
    if not pairs:
        print(f"no pairs tagged {args.split_tag!r}", file=sys.stderr)
        return 2
    golds = [p.lf_str for p in pairs]
    inputs = [p.command_str for p in pairs]
    if args.model == "oracle":
        from ..baselines import oracle_predict
        from ..logic import lf_to_str

        predictions = []
        for p in pairs:
            lf = oracle_predict(grammar, p.command, ont)
            predictions.append("" if lf is None else lf_to_str(lf))
    elif args.model == "knn":
        from ..baselines import KnnIndex, knn_predict
        from ..logic import lf_to_str

        index_pairs = ds.subset("train") + ds.subset("validation") if ds.tags else list(ds.pairs)
        index = KnnIndex.build(index_pairs)
        predictions = [lf_to_str(knn_predict(index, p.command)) for p in pairs]
    else:
        from ..neural.beam import decode_beam

        model = load_model(args.model)
        predictions = []
        for p in pairs:
            hyps = decode_beam(model, list(p.command))
            predictions.append(" ".join(hyps[0].tokens) if hyps else "")
    correct = sum(1 for a, b in zip(predictions, golds) if a == b)
    accuracy = 100.0 * correct / len(pairs)
    print(f"exact match: {accuracy:.1f}% ({correct}/{len(pairs)})")
    if args.errors:
        report = error_report(predictions, inputs, golds)
        Path(args.errors).write_text(report.to_json())
        print(report.to_text())
    return 0


def cmd_matrix(args) -> int:
    config = {}
    if args.config:
        path = Path(args.config)
        if not path.exists() and args.config in ("full", "quick"):
            name = bundled.MATRIX_FULL if args.config == "full" else bundled.MATRIX_QUICK
            path = bundled.data_path(name)
        config = json.loads(path.read_text())
    if args.seed is not None:
        config["seed"] = args.seed
    table, manifest = reproduce_matrix(config, args.out)
    print(table.render())
    if args.out:
        print(f"results and manifest under {args.out}", file=sys.stderr)
    return 0


def cmd_repl(args) -> int:
    registry, grammar, ont = _load_inputs(args)
    model = load_model(args.checkpoint)
    repl(model, ont, registry)
    return 0


def cmd_anonymize(args) -> int:
    _, _, ont = _load_inputs(args)
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        ac = anonymize(line.split(), ont)
        print(" ".join(ac.tokens))
        replacements = [
            {"class": r.cls, "span": " ".join(r.span), "position": r.position}
            for r in ac.replacements
        ]
        print(json.dumps(replacements, ensure_ascii=False), file=sys.stderr)
    return 0


def cmd_judge(args) -> int:
    thresholds = Thresholds(args.lev_low, args.jaccard_low, args.jaccard_high)
    bad = 0
    total = 0
    for lineno, raw in enumerate(sys.stdin, start=1):
        raw = raw.rstrip("\n")
        if not raw.strip():
            continue
        parts = raw.split("\t")
        if len(parts) < 2:
            print(f"line {lineno}: expected original<TAB>paraphrase", file=sys.stderr)
            return 2
        judgment = judge_paraphrase(parts[0], parts[1], thresholds)
        total += 1
        if judgment.verdict.value != "Acceptable":
            bad += 1
        print(
            f"{judgment.verdict.value}\t{judgment.levenshtein}\t"
            f"{judgment.jaccard_distance:.3f}\t{parts[0]}\t{parts[1]}"
        )
    print(f"{total - bad}/{total} acceptable", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robocmd",
        description="command understanding toolkit: corpus generation, parsing, evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="expand the grammar into a corpus")
    _add_common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--samples", type=int, default=0, help="additional concrete samples")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("split", help="assign train/validation/test tags")
    _add_common(p)
    p.add_argument("--generated", required=True, help="generated corpus JSONL")
    p.add_argument("--paraphrased", default=None, help="paraphrase corpus (logical split)")
    p.add_argument("--kind", choices=["command", "logical"], default="command")
    p.add_argument("--ratios", default="0.7/0.1/0.2")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("train", help="train the seq2seq parser")
    _add_common(p)
    p.add_argument("--corpus", required=True, help="split corpus JSONL")
    p.add_argument("--config", default=None, help="JSON file of ModelConfig overrides")
    p.add_argument("--vectors", default=None, help="pretrained vector file or 'bundled'")
    p.add_argument("--out", required=True, help="checkpoint path (.npz)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a model on a tagged corpus")
    _add_common(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", required=True, help="'oracle', 'knn', or a checkpoint path")
    p.add_argument("--split-tag", default="test")
    p.add_argument("--errors", default=None, help="write an error-analysis JSON here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("matrix", help="run the evaluation matrix")
    p.add_argument("--config", default=None, help="matrix config JSON, or 'full'/'quick'")
    p.add_argument("--out", default=None, help="output directory (enables resume)")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("repl", help="interactive parsing session")
    _add_common(p)
    p.add_argument("--checkpoint", required=True)
    p.set_defaults(func=cmd_repl)

    p = sub.add_parser("anonymize", help="anonymize stdin lines; map goes to stderr")
    _add_common(p)
    p.set_defaults(func=cmd_anonymize)

    p = sub.add_parser("judge", help="validate paraphrase TSV from stdin")
    p.add_argument("--lev-low", type=int, default=Thresholds.levenshtein_low)
    p.add_argument("--jaccard-low", type=float, default=Thresholds.jaccard_low)
    p.add_argument("--jaccard-high", type=float, default=Thresholds.jaccard_high)
    p.set_defaults(func=cmd_judge)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
