"""Command-line front end.

Commands: train-lm, k2s, paraphrase, eval, compare, trace. Flags mirror
the default hyperparameters (100 steps hard / 50 soft, all weights 1),
so the zero-flag path runs the standard configuration. Exit codes:
0 success, 1 I/O or backend failure, 2 input-contract violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .errors import InputContractError, PmctgError
from .keywords import TfidfKeywordExtractor
from .lm import BACKWARD, lm_stats, train_kn
from .metrics import compare_searchers, evaluate_sentences
from .model_io import load_model_dir, save_model_dir
from .scoring import HARD, SOFT, ScoreWeights
from .search import (
    SearchConfig,
    TaskInput,
    search,
)
from .text import Sentence, ingest_corpus, tokenize
from .traces import format_trace, read_trace, write_trace
from . import encoder as enc_mod
from . import remote as remote_mod

SERVER_URL_ENV = "PMCTG_SERVER_URL"


def _add_backend_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", help="trained model directory (builtin backends)")
    parser.add_argument(
        "--server-url",
        default=None,
        help=f"model server URL (falls back to ${SERVER_URL_ENV})",
    )


def _add_search_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--steps", type=int, default=None, help="search step budget")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--top-k", type=int, default=50, dest="top_k")
    parser.add_argument("--lambda-flu", type=float, default=1.0)
    parser.add_argument("--lambda-edit", type=float, default=1.0)
    parser.add_argument("--lambda-sem", type=float, default=1.0)
    parser.add_argument("--lambda-exp", type=float, default=1.0)
    parser.add_argument(
        "--candidate-direction",
        choices=("forward", "bidirectional-product"),
        default="forward",
    )
    parser.add_argument("--max-keywords", type=int, default=3)


def _weights(args) -> ScoreWeights:
    return ScoreWeights(
        fluency=args.lambda_flu,
        edit=args.lambda_edit,
        semantic=args.lambda_sem,
        expression=args.lambda_exp,
    )


def _search_config(args, task: str) -> SearchConfig:
    return SearchConfig(
        task=task,
        max_steps=args.steps,
        top_k=args.top_k,
        weights=_weights(args),
        seed=args.seed,
        candidate_direction=args.candidate_direction,
    )


class Backends:
    def __init__(self, vocab, forward, backward, encoder, extractor):
        self.vocab = vocab
        self.forward = forward
        self.backward = backward
        self.encoder = encoder
        self.extractor = extractor


def _resolve_backends(args) -> Backends:
    url = args.server_url or os.environ.get(SERVER_URL_ENV)
    if url:
        vocab, lm, encoder, extractor = remote_mod.connect(url)
        extractor.max_keywords = getattr(args, "max_keywords", 3)
        return Backends(vocab, lm, None, encoder, extractor)
    if not args.model:
        raise InputContractError("either --model or --server-url is required")
    bundle = load_model_dir(args.model)
    extractor = TfidfKeywordExtractor(getattr(args, "max_keywords", 3))
    return Backends(
        bundle.vocabulary, bundle.forward, bundle.backward, bundle.encoder, extractor
    )


def cmd_train_lm(args) -> int:
    corpus = ingest_corpus(args.corpus, lowercase=args.lowercase, min_count=args.min_count)
    forward = train_kn(corpus, order=args.order, discount=args.discount)
    backward = train_kn(
        corpus, order=args.order, discount=args.discount, direction=BACKWARD
    )
    encoder = enc_mod.build_ppmi_encoder(
        corpus, dim=args.dim, window=args.window, seed=args.seed
    )
    save_model_dir(args.out, corpus.vocabulary, forward, backward, encoder)
    print(lm_stats(forward).describe())
    print(f"model written to {args.out}")
    return 0


def cmd_k2s(args) -> int:
    backends = _resolve_backends(args)
    surfaces = [s.strip() for s in args.keywords.split(",") if s.strip()]
    if not surfaces:
        raise InputContractError("no keywords given")
    tokens = [backends.vocab.token_for(s) for s in surfaces]
    config = _search_config(args, HARD)
    best, trace = search(
        TaskInput.hard(tokens),
        backends.forward,
        backends.backward,
        backends.encoder,
        backends.extractor,
        config,
    )
    if not args.no_trace:
        write_trace(trace, args.trace)
    print(best.text())
    return 0


def _paraphrase_line(line, backends, config, seed):
    sentence = tokenize(line, backends.vocab)
    task_input = TaskInput.soft(sentence)
    best, trace = search(
        task_input,
        backends.forward,
        backends.backward,
        backends.encoder,
        backends.extractor,
        config.with_seed(seed),
    )
    return best, trace


def cmd_paraphrase(args) -> int:
    backends = _resolve_backends(args)
    config = _search_config(args, SOFT)
    lines = [
        line for line in Path(args.input).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    trace_dir = None
    if not args.no_trace:
        trace_dir = Path(args.trace_dir)
        trace_dir.mkdir(parents=True, exist_ok=True)

    def run(indexed):
        index, line = indexed
        return index, _paraphrase_line(line, backends, config, args.seed + index)

    jobs = max(1, args.jobs)
    if jobs == 1:
        results = [run(item) for item in enumerate(lines)]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, enumerate(lines)))
    results.sort(key=lambda item: item[0])
    with open(args.out, "w", encoding="utf-8") as handle:
        for index, (best, trace) in results:
            handle.write(best.text() + "\n")
            if trace_dir is not None:
                write_trace(trace, trace_dir / f"line_{index:04d}.jsonl")
    print(f"{len(results)} paraphrases written to {args.out}")
    return 0


def _read_sentences(path, vocab) -> list[Sentence]:
    sentences = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            sentences.append(tokenize(line, vocab))
    return sentences


def cmd_eval(args) -> int:
    judge = None
    if args.judge:
        bundle = load_model_dir(args.judge)
        vocab = bundle.vocabulary
        judge = bundle.forward
    else:
        vocab = remote_mod.OpenVocabulary()
    hyps = _read_sentences(args.hyp, vocab)
    refs = _read_sentences(args.ref, vocab)
    srcs = _read_sentences(args.src, vocab) if args.src else None
    report = evaluate_sentences(hyps, refs, srcs, judge, alpha=args.alpha)
    if args.csv:
        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerow(["index", "bleu", "ibleu", "rouge1", "rouge2", "nll"])
        for row in report.rows:
            writer.writerow(
                [row.index, row.bleu, row.ibleu, row.rouge1, row.rouge2, row.nll]
            )
        summary = report.summary()
        writer.writerow(
            ["mean", summary["bleu"], summary["ibleu"], summary["rouge1"],
             summary["rouge2"], summary["nll"]]
        )
        print(out.getvalue(), end="")
    else:
        for row in report.rows:
            print(json.dumps({"record": "sentence", **row.__dict__}, sort_keys=True))
        print(json.dumps({"record": "summary", **report.summary()}, sort_keys=True))
    return 0


def cmd_compare(args) -> int:
    backends = _resolve_backends(args)
    judge_bundle = load_model_dir(args.judge) if args.judge else None
    judge = judge_bundle.forward if judge_bundle else backends.forward
    task = HARD if args.task == "hard" else SOFT
    config = _search_config(args, task)
    inputs = []
    for line in Path(args.inputs).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        if task == HARD:
            tokens = [
                backends.vocab.token_for(s.strip())
                for s in line.split(",")
                if s.strip()
            ]
            inputs.append(TaskInput.hard(tokens))
        else:
            inputs.append(TaskInput.soft(tokenize(line, backends.vocab)))
    report = compare_searchers(
        inputs,
        backends.forward,
        backends.backward,
        backends.encoder,
        backends.extractor,
        judge,
        config,
        trials=args.trials,
        target=args.target,
    )
    print(report.as_table())
    return 0


def cmd_trace(args) -> int:
    print(format_trace(read_trace(args.file)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmctg",
        description="Constrained text generation by perturbed-masking local-edit search",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train-lm", help="train KN language models and encoder tables")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--discount", type=float, default=0.75)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--window", type=int, default=2)
    p.add_argument("--min-count", type=int, default=1, dest="min_count")
    p.add_argument("--lowercase", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train_lm)

    p = sub.add_parser("k2s", help="keywords-to-sentence generation")
    p.add_argument("--keywords", required=True, help="comma-separated keywords")
    _add_backend_args(p)
    _add_search_args(p)
    p.add_argument("--trace", default="k2s_trace.jsonl")
    p.add_argument("--no-trace", action="store_true")
    p.set_defaults(func=cmd_k2s)

    p = sub.add_parser("paraphrase", help="paraphrase a file of sentences")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    _add_backend_args(p)
    _add_search_args(p)
    p.add_argument("--trace-dir", default="paraphrase_traces", dest="trace_dir")
    p.add_argument("--no-trace", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_paraphrase)

    p = sub.add_parser("eval", help="BLEU/iBLEU/ROUGE/NLL evaluation")
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--src")
    p.add_argument("--judge", help="judge model directory for NLL")
    p.add_argument("--alpha", type=float, default=0.9)
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="PMCTG vs uniform-position step comparison")
    p.add_argument("--inputs", required=True)
    p.add_argument("--task", choices=("hard", "soft"), default="hard")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--target", type=float, required=True, help="judge NLL target")
    p.add_argument("--judge", help="judge model directory (defaults to --model)")
    _add_backend_args(p)
    _add_search_args(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("trace", help="pretty-print a trace file")
    p.add_argument("file")
    p.set_defaults(func=cmd_trace)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PmctgError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
