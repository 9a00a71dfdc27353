"""Command-line entry points for the treebank pipelines."""

from __future__ import annotations

import argparse
import hashlib
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import alignment, induce_attention, induce_sentiment, nuclearity, sentiment, summarize
from .induce_sentiment import BeamConfig, label_to_unit
from .treebank import (
    ParseError,
    TreebankDocument,
    parse_attention,
    parse_documents,
    parse_embeddings,
    parse_signals,
    parse_trees,
    serialize_trees,
)

log = logging.getLogger(__name__)

_LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


class CliError(Exception):
    """Fatal problem with the invocation itself, not with one document."""


def derived_seed(seed: int, doc_id: str) -> int:
    """Per-document seed: the run seed folded with a stable id hash."""
    digest = hashlib.blake2b(doc_id.encode("utf-8"), digest_size=8).digest()
    return (seed ^ int.from_bytes(digest, "big")) & 0x7FFFFFFFFFFFFFFF


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from None


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}") from None


def _each_document(items, worker, strict: bool):
    """Run ``worker`` per document, collecting results and counting skips."""
    results, failures = [], 0
    for doc_id, payload in items:
        try:
            results.append(worker(doc_id, payload))
        except Exception as exc:
            if strict:
                raise CliError(f"document {doc_id!r}: {exc}") from exc
            log.error("skipping document %r: %s", doc_id, exc)
            failures += 1
    return results, failures


def _gold_labels(documents_text: str) -> dict[str, int]:
    return {d.doc_id: d.gold_label for d in parse_documents(documents_text)}


def _require_docs(mapping, what: str):
    if not mapping:
        raise CliError(f"no documents found in {what}")
    return mapping


# --- subcommands -----------------------------------------------------------

def cmd_induce_sentiment(args: argparse.Namespace) -> int:
    signals = _require_docs(parse_signals(_read(args.input)), "the signals file")
    labels = _gold_labels(_read(args.labels))

    def worker(doc_id: str, doc_signals) -> TreebankDocument:
        if doc_id not in labels:
            raise KeyError("no gold label in the documents file")
        gold = label_to_unit(labels[doc_id], args.classes)
        config = BeamConfig(
            beam_size=args.beam_size,
            tau_start=args.tau,
            seed=derived_seed(args.seed, doc_id),
        )
        tree = induce_sentiment.induce_tree(doc_signals, gold, config)
        return TreebankDocument(doc_id=doc_id, tree=tree)

    docs, failures = _each_document(signals.items(), worker, args.strict)
    _write(args.output, serialize_trees(docs))
    return 1 if failures else 0


def cmd_induce_attention(args: argparse.Namespace) -> int:
    matrices = _require_docs(parse_attention(_read(args.input)), "the attention file")

    def worker(doc_id: str, matrix) -> TreebankDocument:
        return TreebankDocument(doc_id=doc_id, tree=induce_attention.induce_tree(matrix))

    docs, failures = _each_document(matrices.items(), worker, args.strict)
    _write(args.output, serialize_trees(docs))
    return 1 if failures else 0


def cmd_discretize(args: argparse.Namespace) -> int:
    docs = parse_trees(_read(args.input))
    if not docs:
        raise CliError("no trees in the input file")

    def worker(doc_id: str, doc: TreebankDocument) -> TreebankDocument:
        return TreebankDocument(doc_id=doc_id, tree=nuclearity.discretize(doc.tree, args.threshold))

    converted, failures = _each_document([(d.doc_id, d) for d in docs], worker, args.strict)
    _write(args.output, serialize_trees(converted))
    ratios = [
        nuclearity.nucleus_ratio(d.tree) for d in converted if d.tree.internals()
    ]
    if ratios:
        print(
            f"discretized {len(converted)} documents at t={args.threshold}; "
            f"mean nucleus ratio {sum(ratios) / len(ratios):.4f}"
        )
    return 1 if failures else 0


def _trees_as_weighted(docs, threshold: float | None):
    """Pass weighted trees through; reweight labeled ones via --threshold."""
    out = []
    for doc in docs:
        if doc.tree.is_weighted:
            out.append(doc)
        elif doc.tree.is_labeled:
            if threshold is None:
                raise CliError(
                    f"document {doc.doc_id!r} carries nuclearity labels; "
                    "pass --threshold to map them to baseline weights"
                )
            out.append(
                TreebankDocument(
                    doc_id=doc.doc_id,
                    tree=nuclearity.reweight_from_nuclearity(doc.tree, threshold),
                )
            )
        else:
            raise CliError(f"document {doc.doc_id!r} has no usable annotation")
    return out


def _feature_rows(tree_docs, documents, table):
    """Join trees with tokenized documents into (doc_id, vector, gold) rows."""
    docs_by_id = {d.doc_id: d for d in documents}
    rows = []
    for doc in tree_docs:
        tokens = docs_by_id.get(doc.doc_id)
        if tokens is None:
            raise KeyError(f"document {doc.doc_id!r} missing from the documents file")
        if tokens.n_edus != doc.tree.n_edus:
            raise ValueError(
                f"document {doc.doc_id!r}: tree covers {doc.tree.n_edus} EDUs, "
                f"text has {tokens.n_edus}"
            )
        vector = sentiment.aggregate(doc.tree, sentiment.embed_leaves(tokens, table))
        rows.append((doc.doc_id, vector, tokens.gold_label))
    return rows


def cmd_train_sentiment(args: argparse.Namespace) -> int:
    tree_docs = _trees_as_weighted(parse_trees(_read(args.input)), args.threshold)
    if not tree_docs:
        raise CliError("no trees in the input file")
    documents = parse_documents(_read(args.documents))
    table = parse_embeddings(_read(args.embeddings))
    rows = _feature_rows(tree_docs, documents, table)
    features = np.stack([vec for _, vec, _ in rows])
    labels = np.array([gold for _, _, gold in rows])
    clf = sentiment.LinearClassifier.create(
        table.dim, args.classes, hidden_units=args.hidden_units, seed=args.seed
    )
    clf = sentiment.train(
        clf,
        features,
        labels,
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        seed=args.seed,
        batch_size=args.batch_size,
    )
    _write(args.output, sentiment.save_classifier(clf))
    loss = sentiment.mean_loss(clf, features, labels)
    print(f"trained on {len(rows)} documents; final loss {loss:.6f}")
    return 0


def _accuracy(tree_docs, documents, table, clf, strict: bool):
    rows = []

    def worker(doc_id: str, doc: TreebankDocument):
        tokens_rows = _feature_rows([doc], documents, table)
        _, vector, gold = tokens_rows[0]
        predicted, _ = sentiment.predict(clf, vector)
        return doc_id, predicted, gold

    rows, failures = _each_document([(d.doc_id, d) for d in tree_docs], worker, strict)
    return rows, failures


def cmd_eval_sentiment(args: argparse.Namespace) -> int:
    tree_docs = _trees_as_weighted(parse_trees(_read(args.input)), args.threshold)
    if not tree_docs:
        raise CliError("no trees in the input file")
    documents = parse_documents(_read(args.documents))
    table = parse_embeddings(_read(args.embeddings))
    clf = sentiment.load_classifier(_read(args.classifier))

    rows, failures = _accuracy(tree_docs, documents, table, clf, args.strict)
    if not rows:
        raise CliError("no documents could be evaluated")
    hits = sum(1 for _, predicted, gold in rows if predicted == gold)
    lines = ["doc_id\tpredicted\tgold"]
    lines += [f"{doc_id}\t{predicted}\t{gold}" for doc_id, predicted, gold in rows]
    accuracy = hits / len(rows)
    lines.append(f"accuracy\t{hits}/{len(rows)}\t{accuracy!r}")
    _write(args.output, "\n".join(lines) + "\n")
    print(f"accuracy {accuracy:.4f} ({hits}/{len(rows)})")
    return 1 if failures else 0


def _summary_rows(tree_docs, documents, references, args):
    docs_by_id = {d.doc_id: d for d in documents} if documents else {}

    def worker(doc_id: str, doc: TreebankDocument):
        if args.mode == "promotion":
            scores = summarize.score_promotion(doc.tree)
        else:
            scores = summarize.score_weighted(doc.tree)
        k = min(args.topk, len(scores))
        selected = summarize.select_summary(
            scores, k, mode=args.mode, seed=derived_seed(args.seed, doc_id)
        )
        if references is None:
            return doc_id, selected, None
        if doc_id not in references:
            raise KeyError("no reference summary")
        tokens = docs_by_id.get(doc_id)
        if tokens is None:
            raise KeyError("no tokenized document for ROUGE")
        candidate = [tok.lower() for edu in selected for tok in tokens.edus[edu - 1]]
        report = summarize.rouge(candidate, summarize.tokenize(references[doc_id]))
        return doc_id, selected, report

    return _each_document([(d.doc_id, d) for d in tree_docs], worker, args.strict)


def _parse_references(text: str) -> dict[str, str]:
    refs = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if "\t" not in line:
            raise ParseError(f"line {lineno}: expected 'doc_id<TAB>summary text'")
        doc_id, summary = line.split("\t", 1)
        refs[doc_id] = summary
    return refs


def cmd_eval_summ(args: argparse.Namespace) -> int:
    docs = parse_trees(_read(args.input))
    if not docs:
        raise CliError("no trees in the input file")
    if args.mode == "promotion":
        converted = []
        for doc in docs:
            if doc.tree.is_labeled:
                converted.append(doc)
            elif doc.tree.is_weighted and args.threshold is not None:
                converted.append(
                    TreebankDocument(
                        doc_id=doc.doc_id,
                        tree=nuclearity.discretize(doc.tree, args.threshold),
                    )
                )
            else:
                raise CliError(
                    f"document {doc.doc_id!r}: promotion mode needs labeled trees "
                    "(or weighted trees plus --threshold)"
                )
        docs = converted
    documents = parse_documents(_read(args.documents)) if args.documents else None
    references = _parse_references(_read(args.references)) if args.references else None
    if references is not None and documents is None:
        raise CliError("--references requires --documents for the EDU text")

    rows, failures = _summary_rows(docs, documents, references, args)
    if not rows:
        raise CliError("no documents could be summarized")
    lines = []
    reports = []
    for doc_id, selected, report in rows:
        cells = [doc_id, ",".join(str(i) for i in selected)]
        if report is not None:
            cells += [repr(report.rouge1.f1), repr(report.rouge2.f1), repr(report.rougeL.f1)]
            reports.append(report)
        lines.append("\t".join(cells))
    _write(args.output, "\n".join(lines) + "\n")
    if reports:
        r1 = sum(r.rouge1.f1 for r in reports) / len(reports)
        r2 = sum(r.rouge2.f1 for r in reports) / len(reports)
        rl = sum(r.rougeL.f1 for r in reports) / len(reports)
        print(f"mean ROUGE F1 over {len(reports)} documents: r1={r1:.4f} r2={r2:.4f} rl={rl:.4f}")
    return 1 if failures else 0


def cmd_align(args: argparse.Namespace) -> int:
    first = {d.doc_id: d for d in parse_trees(_read(args.input))}
    second = {d.doc_id: d for d in parse_trees(_read(args.second))}
    weighted = {d.doc_id: d for d in parse_trees(_read(args.weighted))}
    shared = [doc_id for doc_id in first if doc_id in second and doc_id in weighted]
    if not shared:
        raise CliError("no documents shared between the three treebanks")

    observations = []
    excluded = 0

    def worker(doc_id: str, _):
        nonlocal excluded
        pairs = alignment.aligned_subtrees(first[doc_id].tree, second[doc_id].tree)
        joined, dropped = alignment.join_weighted(pairs, weighted[doc_id].tree)
        observations.extend(joined)
        excluded += dropped
        return doc_id

    _, failures = _each_document([(d, None) for d in shared], worker, args.strict)
    if not observations:
        raise CliError("no aligned subtrees across the shared documents")
    matrix = alignment.spread_matrix(observations, excluded=excluded)
    try:
        matrix = alignment.normalize_matrix(matrix)
    except ValueError as exc:
        log.warning("emitting unnormalized spreads: %s", exc)
    _write(args.output, alignment.format_spread_csv(matrix))
    print(
        f"aligned {len(observations)} nodes over {len(shared)} documents"
        + (f" ({excluded} without a weighted counterpart)" if excluded else "")
    )
    return 1 if failures else 0


def _parse_thresholds(raw: str) -> list[float]:
    try:
        values = [float(chunk) for chunk in raw.split(",") if chunk.strip() != ""]
    except ValueError:
        raise CliError(f"malformed threshold list {raw!r}") from None
    if not values:
        raise CliError("empty threshold list")
    return values


def cmd_sweep(args: argparse.Namespace) -> int:
    docs = parse_trees(_read(args.input))
    if not docs:
        raise CliError("no trees in the input file")
    if not all(d.tree.is_weighted for d in docs):
        raise CliError("the sweep needs fully weighted input trees")
    thresholds = _parse_thresholds(args.thresholds)

    documents = parse_documents(_read(args.documents)) if args.documents else None
    table = parse_embeddings(_read(args.embeddings)) if args.embeddings else None
    clf = sentiment.load_classifier(_read(args.classifier)) if args.classifier else None
    references = _parse_references(_read(args.references)) if args.references else None
    eval_sentiment = documents is not None and table is not None and clf is not None
    eval_summ = documents is not None and references is not None

    def accuracy_of(tree_docs) -> str:
        rows, _ = _accuracy(tree_docs, documents, table, clf, strict=True)
        hits = sum(1 for _, predicted, gold in rows if predicted == gold)
        return repr(hits / len(rows))

    def rouge_of(tree_docs, mode: str) -> list[str]:
        run_args = argparse.Namespace(
            mode=mode, topk=args.topk, seed=args.seed, strict=True
        )
        rows, _ = _summary_rows(tree_docs, documents, references, run_args)
        reports = [report for _, _, report in rows]
        n = len(reports)
        return [
            repr(sum(r.rouge1.f1 for r in reports) / n),
            repr(sum(r.rouge2.f1 for r in reports) / n),
            repr(sum(r.rougeL.f1 for r in reports) / n),
        ]

    lines = ["threshold,nucleus_ratio,accuracy,rouge1_f1,rouge2_f1,rougeL_f1"]
    for t in thresholds:
        labeled = [
            TreebankDocument(doc_id=d.doc_id, tree=nuclearity.discretize(d.tree, t))
            for d in docs
        ]
        ratios = [nuclearity.nucleus_ratio(d.tree) for d in labeled if d.tree.internals()]
        ratio = repr(sum(ratios) / len(ratios)) if ratios else ""
        accuracy = ""
        if eval_sentiment:
            reweighted = [
                TreebankDocument(
                    doc_id=d.doc_id, tree=nuclearity.reweight_from_nuclearity(d.tree, t)
                )
                for d in labeled
            ]
            accuracy = accuracy_of(reweighted)
        rouge_cells = rouge_of(labeled, "promotion") if eval_summ else ["", "", ""]
        lines.append(",".join([repr(t), ratio, accuracy, *rouge_cells]))

    weighted_accuracy = accuracy_of(docs) if eval_sentiment else ""
    weighted_rouge = rouge_of(docs, "weighted") if eval_summ else ["", "", ""]
    lines.append(",".join(["weighted", "", weighted_accuracy, *weighted_rouge]))
    _write(args.output, "\n".join(lines) + "\n")
    return 0


# --- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wrst",
        description="Induce, convert and evaluate weighted discourse trees.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--input", required=True, help="primary input file")
        p.add_argument("--output", help="output file (stdout when omitted)")
        p.add_argument("--strict", action="store_true", help="abort on the first bad document")
        p.add_argument("--seed", type=int, default=0, help="base random seed")
        return p

    p = add("induce-sentiment", cmd_induce_sentiment, "build weighted trees from EDU signals")
    p.add_argument("--labels", required=True, help="documents file supplying gold labels")
    p.add_argument("--classes", type=int, default=5, help="number of gold classes")
    p.add_argument("--beam-size", type=int, default=10)
    p.add_argument("--tau", type=float, default=1.0, help="starting exploration temperature")

    add("induce-attention", cmd_induce_attention, "build weighted trees from attention matrices")

    p = add("discretize", cmd_discretize, "turn weight pairs into nuclearity labels")
    p.add_argument("--threshold", type=float, required=True)

    p = add("train-sentiment", cmd_train_sentiment, "fit the softmax classifier on tree vectors")
    p.add_argument("--documents", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--classes", type=int, default=5)
    p.add_argument("--threshold", type=float, help="baseline weights for labeled input trees")
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--learning-rate", type=float, default=0.5)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--hidden-units", type=int, default=0, help="optional hidden layer width")

    p = add("eval-sentiment", cmd_eval_sentiment, "classify documents and report accuracy")
    p.add_argument("--documents", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--classifier", required=True, help="checkpoint from train-sentiment")
    p.add_argument("--threshold", type=float, help="baseline weights for labeled input trees")

    p = add("eval-summ", cmd_eval_summ, "select summary EDUs and score them")
    p.add_argument("--mode", choices=list(summarize.SUMMARY_MODES), required=True)
    p.add_argument("--topk", type=int, default=6, help="EDUs per summary")
    p.add_argument("--documents", help="documents file with the EDU text")
    p.add_argument("--references", help="TSV of doc_id and reference summary")
    p.add_argument("--threshold", type=float, help="discretize weighted trees for promotion mode")

    p = add("align", cmd_align, "spread of induced weights over annotator label pairs")
    p.add_argument("--second", required=True, help="second annotator's tree file")
    p.add_argument("--weighted", required=True, help="induced weighted tree file")

    p = add("sweep", cmd_sweep, "metric table across discretization thresholds")
    p.add_argument(
        "--thresholds",
        default="0.0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0",
        help="comma-separated threshold grid",
    )
    p.add_argument("--topk", type=int, default=6)
    p.add_argument("--documents")
    p.add_argument("--embeddings")
    p.add_argument("--classifier")
    p.add_argument("--references")

    return parser


def configure_logging() -> None:
    level = _LOG_LEVELS.get(os.environ.get("WRST_LOG", "").lower(), logging.WARNING)
    root = logging.getLogger()
    root.setLevel(level)
    if not root.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        root.addHandler(handler)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging()
    try:
        return args.func(args)
    except (CliError, ParseError, OSError) as exc:
        log.error("%s", exc)
        return 2


def run() -> None:
    sys.exit(main())
